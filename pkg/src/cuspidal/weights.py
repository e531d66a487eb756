"""Sparse weight modules of gl(n+1) realized on Laurent monomials.

A module element is a finite association from root-lattice points nu
(integer vectors summing to zero) to scalars; the point nu stands for the
monomial of exponent mu + nu.  Root operators act by the derivation rule
"multiply by the source exponent and shift", the torus acts diagonally.
Everything is exact: the cuspidality, degree and window-injectivity checks
below are certificates, not floating-point heuristics.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .padic import FieldSpec, PadicScalar, PrecisionLossError

Rat = Union[int, Fraction]


class WindowError(ValueError):
    """Degenerate or too-small lattice window."""


class InternalInconsistencyError(RuntimeError):
    """The window scan and the closed-form criterion disagree."""


@dataclass(frozen=True)
class LatticePoint:
    """A point of the root lattice: integer coordinates summing to zero."""

    nu: Tuple[int, ...]

    def __post_init__(self):
        if sum(self.nu) != 0:
            raise ValueError(f"lattice point {self.nu} does not sum to zero")

    def shift(self, i: int, j: int) -> "LatticePoint":
        """Translate by epsilon_i - epsilon_j."""
        nu = list(self.nu)
        nu[i] += 1
        nu[j] -= 1
        return LatticePoint(tuple(nu))

    def radius(self) -> int:
        return max(abs(c) for c in self.nu) if self.nu else 0

    def __getitem__(self, k: int) -> int:
        return self.nu[k]

    def __len__(self) -> int:
        return len(self.nu)


def lattice_window(n: int, radius: int) -> Iterator[LatticePoint]:
    """All lattice points of Z^{n+1}, sum zero, sup-norm <= radius."""
    if radius < 0:
        raise WindowError("window radius must be >= 0")
    rng = range(-radius, radius + 1)
    for head in itertools.product(rng, repeat=n):
        last = -sum(head)
        if -radius <= last <= radius:
            yield LatticePoint(tuple(head) + (last,))


@dataclass(frozen=True)
class CuspidalModuleSpec:
    """Parameters of a degree-1 module: field, rank, exponent vector, window."""

    field: FieldSpec
    n: int
    mu: Tuple[PadicScalar, ...]
    window_radius: int = 8

    def __post_init__(self):
        if len(self.mu) != self.n + 1:
            raise ValueError("mu must have n+1 entries")
        for m in self.mu:
            if m.spec != self.field:
                raise ValueError("mu entries must live in the spec's field")
        if self.window_radius < 0:
            raise ValueError("window_radius must be >= 0")

    @property
    def total_mu(self) -> PadicScalar:
        acc = self.field.zero()
        for m in self.mu:
            acc = acc + m
        return acc

    def exponent_at(self, point: LatticePoint, k: int) -> PadicScalar:
        """k-th exponent at the monomial mu + nu."""
        return self.mu[k] + point[k]

    def window(self, radius: Optional[int] = None) -> Iterator[LatticePoint]:
        return lattice_window(self.n, self.window_radius if radius is None else radius)


class ModuleElement:
    """Finite scalar combination of monomials, indexed by lattice points."""

    __slots__ = ("spec", "coeffs")

    def __init__(self, spec: CuspidalModuleSpec, coeffs: Optional[Dict[LatticePoint, PadicScalar]] = None):
        self.spec = spec
        clean: Dict[LatticePoint, PadicScalar] = {}
        for pt, c in (coeffs or {}).items():
            if len(pt) != spec.n + 1:
                raise ValueError("lattice point of wrong rank")
            c = spec.field.coerce(c)
            if not c.is_exactly_zero():
                clean[pt] = c
        self.coeffs = clean

    @staticmethod
    def basis_vector(spec: CuspidalModuleSpec, point: LatticePoint, coeff: Rat = 1) -> "ModuleElement":
        return ModuleElement(spec, {point: spec.field.coerce(coeff)})

    @staticmethod
    def zero(spec: CuspidalModuleSpec) -> "ModuleElement":
        return ModuleElement(spec)

    def is_zero(self) -> bool:
        return not self.coeffs

    def support(self) -> List[LatticePoint]:
        return sorted(self.coeffs, key=lambda pt: pt.nu)

    def __add__(self, other: "ModuleElement") -> "ModuleElement":
        if other.spec is not self.spec and other.spec != self.spec:
            raise ValueError("elements of different modules")
        out = dict(self.coeffs)
        for pt, c in other.coeffs.items():
            out[pt] = out[pt] + c if pt in out else c
        return ModuleElement(self.spec, out)

    def __neg__(self) -> "ModuleElement":
        return ModuleElement(self.spec, {pt: -c for pt, c in self.coeffs.items()})

    def __sub__(self, other: "ModuleElement") -> "ModuleElement":
        return self + (-other)

    def scale(self, scalar) -> "ModuleElement":
        s = self.spec.field.coerce(scalar)
        return ModuleElement(self.spec, {pt: c * s for pt, c in self.coeffs.items()})

    def coefficient(self, point: LatticePoint) -> PadicScalar:
        return self.coeffs.get(point, self.spec.field.zero())

    def restrict_to_window(self, radius: int) -> Tuple["ModuleElement", "ModuleElement"]:
        """Split into the part inside the sup-norm window and the escaped part."""
        inside, escaped = {}, {}
        for pt, c in self.coeffs.items():
            (inside if pt.radius() <= radius else escaped)[pt] = c
        return ModuleElement(self.spec, inside), ModuleElement(self.spec, escaped)

    def __repr__(self):
        terms = ", ".join(f"{pt.nu}: {c!r}" for pt, c in sorted(self.coeffs.items(), key=lambda kv: kv[0].nu))
        return f"ModuleElement({terms or '0'})"


# -- generator actions --------------------------------------------------


def apply_root_operator(v: ModuleElement, i: int, j: int) -> ModuleElement:
    """Action of the (i, j) root generator: each monomial of exponent
    lambda = mu + nu maps to lambda_j times the monomial shifted by
    epsilon_i - epsilon_j."""
    spec = v.spec
    if i == j:
        raise ValueError("root operator needs i != j")
    if not (0 <= i <= spec.n and 0 <= j <= spec.n):
        raise ValueError("root operator index out of range")
    out: Dict[LatticePoint, PadicScalar] = {}
    for pt, c in v.coeffs.items():
        mult = spec.exponent_at(pt, j)
        if mult.is_exactly_zero():
            continue
        tgt = pt.shift(i, j)
        term = c * mult
        out[tgt] = out[tgt] + term if tgt in out else term
    return ModuleElement(spec, out)


def apply_torus(v: ModuleElement, x: Sequence) -> ModuleElement:
    """Diagonal action: the term at exponent lambda scales by sum_k x_k lambda_k."""
    spec = v.spec
    if len(x) != spec.n + 1:
        raise ValueError("torus vector must have n+1 entries")
    xs = [spec.field.coerce(c) for c in x]
    out: Dict[LatticePoint, PadicScalar] = {}
    for pt, c in v.coeffs.items():
        eig = spec.field.zero()
        for k, xk in enumerate(xs):
            eig = eig + xk * spec.exponent_at(pt, k)
        out[pt] = c * eig
    return ModuleElement(spec, out)


def apply_gl_matrix(v: ModuleElement, mat: Sequence[Sequence]) -> ModuleElement:
    """Action of an (n+1)x(n+1) matrix: off-diagonal entries drive root
    operators, the diagonal acts through the torus."""
    spec = v.spec
    size = spec.n + 1
    if len(mat) != size or any(len(row) != size for row in mat):
        raise ValueError("matrix of wrong shape")
    rows = [[spec.field.coerce(c) for c in row] for row in mat]
    acc = apply_torus(v, [rows[k][k] for k in range(size)])
    for i in range(size):
        for j in range(size):
            if i != j and not rows[i][j].is_exactly_zero():
                acc = acc + apply_root_operator(v, i, j).scale(rows[i][j])
    return acc


# -- structural predicates ----------------------------------------------


def _integer_value(x: PadicScalar) -> Optional[int]:
    """The exact rational integer x equals, if any."""
    if x.is_rational_integer():
        if x.is_exactly_zero():
            return 0
        return int(x.exact_value()[0])
    return None


@dataclass(frozen=True)
class CuspidalityReport:
    cuspidal: bool
    failing_root: Optional[Tuple[int, int]] = None
    failing_weight: Optional[LatticePoint] = None
    notes: str = ""


def check_cuspidality(spec: CuspidalModuleSpec) -> CuspidalityReport:
    """Cuspidality verdict: true iff no exponent entry is a rational integer.

    The closed-form criterion is cross-checked against a scan of the window
    multipliers; a disagreement inside the scanned range is an internal error.
    """
    if spec.window_radius < 1:
        raise WindowError("cuspidality scan needs window_radius >= 1")
    integer_entries = {}
    for j, m in enumerate(spec.mu):
        mj = _integer_value(m)
        if mj is not None:
            integer_entries[j] = mj

    # window scan: a root operator (i, j) kills the monomial at nu when
    # mu_j + nu_j = 0
    scan_hit: Optional[Tuple[Tuple[int, int], LatticePoint]] = None
    for pt in spec.window():
        for j in range(spec.n + 1):
            if spec.exponent_at(pt, j).is_exactly_zero():
                i = (j + 1) % (spec.n + 1)
                scan_hit = ((i, j), pt)
                break
        if scan_hit:
            break

    closed_form_cuspidal = not integer_entries
    # a zero multiplier at entry j needs nu_j = -mu_j, so it is visible in the
    # sup-norm window exactly when |mu_j| <= radius
    scan_reachable = any(abs(m) <= spec.window_radius for m in integer_entries.values())
    if closed_form_cuspidal and scan_hit is not None:
        raise InternalInconsistencyError(
            f"scan found zero multiplier at {scan_hit} but no mu entry is integral"
        )
    if not closed_form_cuspidal and scan_reachable and scan_hit is None:
        raise InternalInconsistencyError(
            "integral mu entry within scan range but the window scan found no zero multiplier"
        )

    if closed_form_cuspidal:
        return CuspidalityReport(cuspidal=True)
    if scan_hit is not None:
        (i, j), pt = scan_hit
        return CuspidalityReport(cuspidal=False, failing_root=(i, j), failing_weight=pt)
    j, mj = next(iter(integer_entries.items()))
    i = (j + 1) % (spec.n + 1)
    return CuspidalityReport(
        cuspidal=False,
        failing_root=(i, j),
        failing_weight=None,
        notes=f"zero multiplier at nu_{j} = {-mj}, outside the scanned window",
    )


@dataclass(frozen=True)
class FiniteRep:
    """Finite-dimensional piece used to stack a module: weight labels plus
    raising/lowering matrices for the generators that act.

    Matrices are over exact rationals; the commutation compatibility of each
    generator with the weight grading is checked at construction.
    """

    dimension: int
    weights: Tuple[Tuple[int, ...], ...]
    matrices: Dict[Tuple[int, int], Tuple[Tuple[Fraction, ...], ...]] = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension < 1 or len(self.weights) != self.dimension:
            raise ValueError("need one weight label per basis vector")
        for (i, j), mat in self.matrices.items():
            if len(mat) != self.dimension or any(len(row) != self.dimension for row in mat):
                raise ValueError(f"matrix for generator {(i, j)} has wrong shape")
            for r in range(self.dimension):
                for c in range(self.dimension):
                    if mat[r][c] == 0:
                        continue
                    shift = tuple(
                        self.weights[r][k] - self.weights[c][k] for k in range(len(self.weights[0]))
                    )
                    expected = tuple(
                        (1 if k == i else 0) - (1 if k == j else 0) for k in range(len(self.weights[0]))
                    )
                    if shift != expected:
                        raise ValueError(
                            f"generator {(i, j)} entry ({r},{c}) violates the weight grading"
                        )

    @staticmethod
    def symmetric_power_stack(k: int) -> "FiniteRep":
        """Degree-k symmetric power of the standard 2-dimensional piece:
        weights (k,0), (k-1,1), ..., (0,k) with the raising generator (0,1)."""
        dim = k + 1
        weights = tuple((k - m, m) for m in range(dim))
        raise_mat = [[Fraction(0)] * dim for _ in range(dim)]
        for m in range(1, dim):
            raise_mat[m - 1][m] = Fraction(k - m + 1)
        return FiniteRep(dim, weights, {(0, 1): tuple(tuple(r) for r in raise_mat)})


class DegreeError(ValueError):
    """Weight-space dimensions are undefined or not constant on the window."""


def degree(spec: CuspidalModuleSpec, window_radius: int, rep: Optional[FiniteRep] = None) -> int:
    """Common dimension of the nonzero weight spaces over the window.

    Without a stacked piece every lattice weight carries a 1-dimensional
    space.  With one, two stacked basis vectors land in the same weight space
    exactly when their labels differ by a lattice point, i.e. when their
    coordinate sums agree; the weight-space dimension is the size of that
    coordinate-sum class and must be constant across classes.
    """
    if window_radius < 0:
        raise DegreeError("empty window")
    if rep is None:
        return 1
    classes: Dict[int, int] = {}
    for w in rep.weights:
        s = sum(w)
        classes[s] = classes.get(s, 0) + 1
    sizes = set(classes.values())
    if len(sizes) != 1:
        raise DegreeError(f"non-constant weight-space dimensions: {sorted(sizes)}")
    return sizes.pop()


@dataclass(frozen=True)
class TwistResult:
    spec: CuspidalModuleSpec
    same_module: bool


def twist_by_character(spec: CuspidalModuleSpec, lam: Tuple[int, int]) -> TwistResult:
    """Shift mu by an integral character (n = 1 only).  When the shift lies
    in the root lattice the new exponent generates the same module."""
    if spec.n != 1:
        raise ValueError("character twist implemented for n = 1 only")
    l0, l1 = lam
    new_mu = (spec.mu[0] + l0, spec.mu[1] + l1)
    twisted = CuspidalModuleSpec(spec.field, spec.n, new_mu, spec.window_radius)
    return TwistResult(twisted, same_module=(l0 + l1 == 0))


def same_module(mu: Sequence[PadicScalar], nu: Sequence[PadicScalar]) -> bool:
    """True iff mu - nu has integer entries summing to zero."""
    if len(mu) != len(nu):
        raise ValueError("vectors of different length")
    diffs = []
    for a, b in zip(mu, nu):
        d = _integer_value(a - b)
        if d is None:
            return False
        diffs.append(d)
    return sum(diffs) == 0


def weyl_condition(mu: Sequence[PadicScalar]) -> bool:
    """True iff every nontrivial permutation of mu moves it by a
    non-integral vector."""
    idx = list(range(len(mu)))
    for perm in itertools.permutations(idx):
        if list(perm) == idx:
            continue
        if all(_integer_value(mu[perm[k]] - mu[k]) is not None for k in idx):
            return False
    return True


def central_character_weight(
    mu: Sequence[PadicScalar], tau: Optional[Sequence] = None
) -> Tuple[PadicScalar, ...]:
    """Project |mu| e_0 along the diagonal direction and add the stacked
    highest weight tau."""
    if not mu:
        raise ValueError("mu must be nonempty")
    spec = mu[0].spec
    size = len(mu)
    total = spec.zero()
    for m in mu:
        total = total + m
    share = total / spec.exact(size)
    out = []
    for k in range(size):
        base = total - share if k == 0 else -share
        if tau is not None:
            base = base + spec.coerce(tau[k])
        out.append(base)
    return tuple(out)


# -- irreducibility hypotheses (n = 1) -----------------------------------


@dataclass(frozen=True)
class HypothesisReport:
    """Per-hypothesis ledger for the n = 1 irreducibility criteria."""

    results: Dict[str, bool]
    case: str

    @property
    def all_pass(self) -> bool:
        return all(self.results.values())


def irreducibility_precheck(
    mu: Tuple[PadicScalar, PadicScalar], lam: Tuple[int, int]
) -> HypothesisReport:
    """Evaluate every hypothesis of the rank-one irreducibility criterion:
    the Weyl separation, valuations outside the base value group, distinct
    norms, and the norm-window condition keyed by lam_0 + lam_1."""
    v0, v1 = mu[0].valuation(), mu[1].valuation()
    results: Dict[str, bool] = {}
    results["weyl_separation"] = weyl_condition(mu)
    base_ok = True
    for v in (v0, v1):
        if v is None or v.denominator == 1:
            base_ok = False
    results["valuations_outside_base_group"] = base_ok
    results["distinct_norms"] = v0 is not None and v1 is not None and v0 != v1

    def le_one(v):  # |mu_i| <= 1  <=>  val >= 0
        return v is not None and v >= 0

    def ge_one(v):  # |mu_i| >= 1  <=>  val <= 0
        return v is None or v <= 0

    if lam[0] + lam[1] == 0:
        case = "norm_window_a"
        results[case] = le_one(v0) or le_one(v1)
    else:
        case = "norm_window_b"
        results[case] = (le_one(v0) and ge_one(v1)) or (ge_one(v0) and le_one(v1))
    return HypothesisReport(results=results, case=case)
