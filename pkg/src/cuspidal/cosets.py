"""Finite-level matrix decompositions: Bruhat cells through the standard
congruence subgroup convention (upper triangular mod p), Iwahori
triangular factorizations, Cartan elementary-divisor representatives and
the diagonal double-coset ladder.

Every report carries its factors; reconstruction is exact at the working
level, so each decomposition doubles as its own certificate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .intertwine import Mat2
from .padic import FieldSpec, PadicScalar, PrecisionLossError


class DecompositionError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteLevelMatrix:
    """2x2 matrix over Z/p^k with unit determinant."""

    p: int
    level: int
    entries: Tuple[Tuple[int, int], Tuple[int, int]]

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("level must be >= 1")
        q = self.p**self.level
        norm = tuple(tuple(x % q for x in row) for row in self.entries)
        object.__setattr__(self, "entries", norm)
        if self.det() % self.p == 0:
            raise DecompositionError("matrix is not invertible at this level")

    @property
    def modulus(self) -> int:
        return self.p**self.level

    def det(self) -> int:
        (a, b), (c, d) = self.entries
        return (a * d - b * c) % self.modulus

    def __mul__(self, other: "FiniteLevelMatrix") -> "FiniteLevelMatrix":
        if (self.p, self.level) != (other.p, other.level):
            raise ValueError("mixed levels")
        (a, b), (c, d) = self.entries
        (e, f), (g, h) = other.entries
        q = self.modulus
        return FiniteLevelMatrix(
            self.p,
            self.level,
            (
                ((a * e + b * g) % q, (a * f + b * h) % q),
                ((c * e + d * g) % q, (c * f + d * h) % q),
            ),
        )

    def inverse(self) -> "FiniteLevelMatrix":
        (a, b), (c, d) = self.entries
        q = self.modulus
        dinv = pow(self.det(), -1, q)
        return FiniteLevelMatrix(
            self.p,
            self.level,
            ((d * dinv % q, -b * dinv % q), (-c * dinv % q, a * dinv % q)),
        )

    @staticmethod
    def identity(p: int, level: int) -> "FiniteLevelMatrix":
        return FiniteLevelMatrix(p, level, ((1, 0), (0, 1)))

    def in_iwahori(self) -> bool:
        """Upper triangular modulo p: lower-left entry divisible by p."""
        return self.entries[1][0] % self.p == 0

    def __repr__(self):
        return f"[{self.entries[0]} {self.entries[1]}] mod {self.p}^{self.level}"


WEYL_LABELS = ("1", "w0")


@dataclass(frozen=True)
class CosetReport:
    decomposition: str
    cell: str
    representative: FiniteLevelMatrix
    factors: Tuple[FiniteLevelMatrix, ...]

    def reconstruction(self) -> FiniteLevelMatrix:
        acc = self.factors[0]
        for f in self.factors[1:]:
            acc = acc * f
        return acc

    def verify(self, g: FiniteLevelMatrix) -> bool:
        return self.reconstruction().entries == g.entries


def bruhat_decompose(g: FiniteLevelMatrix) -> CosetReport:
    """Write g = k1 * w * k2 with k1, k2 in the Iwahori subgroup and w the
    identity or the antidiagonal Weyl representative; the cell is read off
    the lower-left entry modulo p."""
    p, k = g.p, g.level
    q = g.modulus
    ident = FiniteLevelMatrix.identity(p, k)
    if g.in_iwahori():
        return CosetReport("bruhat", "1", ident, (g, ident, ident))
    (a, b), (c, d) = g.entries
    # clear the top-left entry with the unit pivot c, then swap rows via w0
    x = (-a) * pow(c, -1, q) % q
    k1 = FiniteLevelMatrix(p, k, ((1, (-x) % q), (0, 1)))
    w0 = FiniteLevelMatrix(p, k, ((0, 1), (1, 0)))
    bprime = (b + x * d) % q
    k2 = FiniteLevelMatrix(p, k, ((c, d), (0, bprime)))
    report = CosetReport("bruhat", "w0", w0, (k1, w0, k2))
    if not report.verify(g):
        raise AssertionError("bruhat reconstruction failed")
    if not (k1.in_iwahori() and k2.in_iwahori()):
        raise AssertionError("bruhat factors left the Iwahori subgroup")
    return report


def iwahori_factor(
    h: FiniteLevelMatrix,
) -> Tuple[FiniteLevelMatrix, FiniteLevelMatrix, FiniteLevelMatrix]:
    """Triangular factorization h = u_minus * t * u_plus inside the Iwahori
    subgroup: u_minus lower unipotent with off-diagonal in pZ, t diagonal,
    u_plus upper unipotent."""
    if not h.in_iwahori():
        raise DecompositionError("matrix is not in the Iwahori subgroup")
    p, k = h.p, h.level
    q = h.modulus
    (a, b), (c, d) = h.entries
    ainv = pow(a, -1, q)
    clow = c * ainv % q
    x = b * ainv % q
    t1 = (d - c * ainv * b) % q
    u_minus = FiniteLevelMatrix(p, k, ((1, 0), (clow, 1)))
    t = FiniteLevelMatrix(p, k, ((a, 0), (0, t1)))
    u_plus = FiniteLevelMatrix(p, k, ((1, x), (0, 1)))
    if (u_minus * t * u_plus).entries != h.entries:
        raise AssertionError("iwahori reconstruction failed")
    return u_minus, t, u_plus


def enumerate_gl2(p: int) -> Iterator[FiniteLevelMatrix]:
    """All of GL_2(F_p), as level-1 matrices."""
    for a, b, c, d in itertools.product(range(p), repeat=4):
        if (a * d - b * c) % p != 0:
            yield FiniteLevelMatrix(p, 1, ((a, b), (c, d)))


def iwahori_order(p: int, level: int = 1) -> int:
    """Size of the Iwahori subgroup at the given level."""
    count = 0
    if level == 1:
        return (p - 1) ** 2 * p
    raise NotImplementedError("order formula implemented at level 1 only")


# -- Cartan ladder over the scalar field -----------------------------------


@dataclass(frozen=True)
class CartanReport:
    gap: int
    left: Mat2
    representative: Mat2
    right: Mat2
    centre: PadicScalar

    def verify(self, g: Mat2) -> bool:
        recon = (self.left * self.representative * self.right).scale(self.centre)
        return recon == g


def cartan_representative(g: Mat2) -> CartanReport:
    """Elementary-divisor gap j >= 0 with g in G_0 * diag(1, p^j) * G_0 * Z,
    plus verified factors.  Needs exact entry valuations; a precision-loss
    entry raises."""
    spec = g.field
    det = g.det()
    if det.indistinguishable_from_zero():
        raise DecompositionError("matrix is singular (or indistinguishably so)")
    vals = []
    for r in range(2):
        for c in range(2):
            x = g.rows[r][c]
            if x.is_precision_loss():
                raise PrecisionLossError("entry precision insufficient for the gap")
            vals.append((None if x.is_exactly_zero() else x.valuation(), (r, c)))
    v_min, pivot = min(
        ((v, rc) for v, rc in vals if v is not None), key=lambda t: t[0]
    )
    v_det = det.valuation()
    gap_val = v_det - 2 * v_min
    if gap_val.denominator != 1:
        raise DecompositionError(
            f"elementary-divisor gap {gap_val} is not an integral p-power"
        )
    j = int(gap_val)
    assert j >= 0

    # move the minimal-valuation pivot to the corner, then clear row/column
    r0, c0 = pivot
    swap_rows = Mat2(spec, ((0, 1), (1, 0)))
    left_p = swap_rows if r0 == 1 else Mat2.identity(spec)
    right_p = swap_rows if c0 == 1 else Mat2.identity(spec)
    m = left_p * g * right_p
    pivot_entry = m.rows[0][0]
    l_fac = Mat2.lower_unipotent(spec, -(m.rows[1][0] / pivot_entry))
    r_fac = Mat2.upper_unipotent(spec, -(m.rows[0][1] / pivot_entry))
    diag = l_fac * m * r_fac
    d1 = diag.rows[1][1]
    unit = d1 / (pivot_entry * spec.exact(Fraction(spec.p) ** j))
    rep = Mat2.diag(spec, 1, spec.exact(Fraction(spec.p) ** j))
    left = left_p.inverse() * l_fac.inverse()
    right = Mat2.diag(spec, 1, unit) * r_fac.inverse() * right_p.inverse()
    report = CartanReport(gap=j, left=left, representative=rep, right=right, centre=pivot_entry)
    if not report.verify(g):
        raise AssertionError("cartan reconstruction failed")
    return report


@dataclass(frozen=True)
class MackeyLabel:
    j: int
    representative: Mat2
    roundtrip_ok: bool


def mackey_cosets(spec: FieldSpec, j_max: int) -> List[MackeyLabel]:
    """Diagonal double-coset representatives diag(1, p^j), 0 <= j <= j_max,
    each checked against its own Cartan round trip."""
    if j_max < 0:
        raise ValueError("j_max must be >= 0")
    labels = []
    for j in range(j_max + 1):
        rep = Mat2.diag(spec, 1, spec.exact(Fraction(spec.p) ** j))
        ok = cartan_representative(rep).gap == j
        labels.append(MackeyLabel(j=j, representative=rep, roundtrip_ok=ok))
    return labels
