"""Truncated enveloping algebra of sl_2 in the PBW basis f^a h^b e^c.

Left multiplication by generators is enough to define the full product:
moving e past powers of f uses [e, f^a] = a f^(a-1) (h - a + 1), moving
h past f and e past h use the weight shifts.  Coefficients are exact
rationals.

The Ore witness solver answers the localizability question for the
multiplicative set generated by a raising element s = c*e: given delta it
searches for delta' and a power s^k with s * delta' = delta * s^k, by exact
linear algebra over the PBW monomials, and verifies the witness by an
independent product expansion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from .linalg import fraction_ops, sparse_solve

Monomial = Tuple[int, int, int]  # exponents of f, h, e


class EnvelopingElement:
    """Finite rational combination of PBW monomials f^a h^b e^c."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[Monomial, Fraction]] = None):
        clean = {}
        for m, q in (terms or {}).items():
            q = Fraction(q)
            if q != 0:
                if len(m) != 3 or any(x < 0 for x in m):
                    raise ValueError(f"bad PBW monomial {m}")
                clean[tuple(m)] = q
        self.terms = clean

    # -- constructors --

    @staticmethod
    def zero() -> "EnvelopingElement":
        return EnvelopingElement()

    @staticmethod
    def one() -> "EnvelopingElement":
        return EnvelopingElement({(0, 0, 0): Fraction(1)})

    @staticmethod
    def gen_f() -> "EnvelopingElement":
        return EnvelopingElement({(1, 0, 0): Fraction(1)})

    @staticmethod
    def gen_h() -> "EnvelopingElement":
        return EnvelopingElement({(0, 1, 0): Fraction(1)})

    @staticmethod
    def gen_e() -> "EnvelopingElement":
        return EnvelopingElement({(0, 0, 1): Fraction(1)})

    @staticmethod
    def monomial(a: int, b: int, c: int, coeff=1) -> "EnvelopingElement":
        return EnvelopingElement({(a, b, c): Fraction(coeff)})

    # -- ring structure --

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def __add__(self, other: "EnvelopingElement") -> "EnvelopingElement":
        out = dict(self.terms)
        for m, q in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + q
        return EnvelopingElement(out)

    def __neg__(self):
        return EnvelopingElement({m: -q for m, q in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, q) -> "EnvelopingElement":
        q = Fraction(q)
        return EnvelopingElement({m: c * q for m, c in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, EnvelopingElement):
            return NotImplemented
        return self.terms == other.terms

    __hash__ = None

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for (a, b, c), q in sorted(self.terms.items()):
            names = "".join(
                f"{g}^{n}" if n > 1 else g
                for g, n in (("f", a), ("h", b), ("e", c))
                if n
            )
            bits.append(f"{q}*{names or '1'}")
        return " + ".join(bits)

    # -- multiplication via generator moves --

    def _lmul_f(self) -> "EnvelopingElement":
        return EnvelopingElement({(a + 1, b, c): q for (a, b, c), q in self.terms.items()})

    def _lmul_h(self) -> "EnvelopingElement":
        out: Dict[Monomial, Fraction] = {}
        for (a, b, c), q in self.terms.items():
            # h f^a = f^a (h - 2a)
            _acc(out, (a, b + 1, c), q)
            _acc(out, (a, b, c), q * (-2 * a))
        return EnvelopingElement(out)

    def _lmul_e(self) -> "EnvelopingElement":
        out: Dict[Monomial, Fraction] = {}
        for (a, b, c), q in self.terms.items():
            # e f^a = f^a e + a f^(a-1) (h - a + 1), then e h^b = (h-2)^b e
            for k in range(b + 1):
                coeff = q * _binom(b, k) * Fraction(-2) ** (b - k)
                _acc(out, (a, k, c + 1), coeff)
            if a:
                _acc(out, (a - 1, b + 1, c), q * a)
                _acc(out, (a - 1, b, c), q * a * (-(a - 1)))
        return EnvelopingElement(out)

    def __mul__(self, other: "EnvelopingElement") -> "EnvelopingElement":
        result = EnvelopingElement.zero()
        for (a, b, c), q in self.terms.items():
            acc = other
            for _ in range(c):
                acc = acc._lmul_e()
            for _ in range(b):
                acc = acc._lmul_h()
            for _ in range(a):
                acc = acc._lmul_f()
            result = result + acc.scale(q)
        return result

    def __pow__(self, n: int) -> "EnvelopingElement":
        if n < 0:
            raise ValueError("negative powers are undefined here")
        acc = EnvelopingElement.one()
        for _ in range(n):
            acc = acc * self
        return acc

    def bracket(self, other: "EnvelopingElement") -> "EnvelopingElement":
        return self * other - other * self


def _acc(store: Dict[Monomial, Fraction], m: Monomial, q: Fraction):
    if q:
        store[m] = store.get(m, Fraction(0)) + q


def _binom(n: int, k: int) -> Fraction:
    num = 1
    for i in range(k):
        num = num * (n - i) // (i + 1)
    return Fraction(num)


def casimir() -> EnvelopingElement:
    """ef + fe + h^2/2; central, a good stress test for the product."""
    e, f, h = EnvelopingElement.gen_e(), EnvelopingElement.gen_f(), EnvelopingElement.gen_h()
    return e * f + f * e + (h * h).scale(Fraction(1, 2))


def pbw_monomials(max_degree: int) -> List[Monomial]:
    out = []
    for a, b, c in itertools.product(range(max_degree + 1), repeat=3):
        if a + b + c <= max_degree:
            out.append((a, b, c))
    return out


class OreWitnessNotFound(RuntimeError):
    """No witness within the degree/power budget (reported, not impossible)."""


@dataclass(frozen=True)
class OreWitness:
    delta_prime: EnvelopingElement
    s_prime: EnvelopingElement
    power: int


def ore_witness(
    s: EnvelopingElement,
    delta: EnvelopingElement,
    degree_budget: int = 6,
) -> OreWitness:
    """Solve s * delta' = delta * s^k with s' = s^k, k <= degree_budget + 1,
    by exact linear algebra in the PBW basis; the returned witness is
    re-verified by an independent product expansion."""
    if s.is_zero():
        raise ValueError("s must be nonzero")
    if set(m for m in s.terms) != {(0, 0, 1)}:
        raise ValueError("s must be a scalar multiple of the raising generator")
    if delta.degree() > degree_budget:
        raise ValueError("delta exceeds the degree budget")
    c = s.terms[(0, 0, 1)]
    ops = fraction_ops()
    for k in range(1, degree_budget + 2):
        # equation: e * delta' = c^(k-1) * delta * e^k
        rhs_elt = (delta * EnvelopingElement.monomial(0, 0, k)).scale(c ** (k - 1))
        budget = delta.degree() + k
        unknowns = pbw_monomials(budget)
        columns: Dict[Monomial, Dict[Monomial, Fraction]] = {}
        for u in unknowns:
            col = EnvelopingElement.monomial(*u)._lmul_e()
            columns[u] = dict(col.terms)
        rows: Dict[Monomial, Dict[Monomial, Fraction]] = {}
        for u, col in columns.items():
            for m, q in col.items():
                rows.setdefault(m, {})[u] = q
        row_keys = set(rows) | set(rhs_elt.terms)
        system = [
            (rows.get(m, {}), rhs_elt.terms.get(m, Fraction(0))) for m in sorted(row_keys)
        ]
        sol = sparse_solve(system, unknowns, ops)
        if sol is None:
            continue
        delta_prime = EnvelopingElement({m: q for m, q in sol.items()})
        s_prime = s**k
        if (s * delta_prime - delta * s_prime).is_zero():
            return OreWitness(delta_prime=delta_prime, s_prime=s_prime, power=k)
    raise OreWitnessNotFound(
        f"no witness with s' = s^k, k <= {degree_budget + 1}, degree <= budget"
    )
