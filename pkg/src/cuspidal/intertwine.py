"""Rank-one intertwiner engine: conjugation transport, coefficient
recurrences, an operator-level oracle, and end-to-end divergence
certification.

A candidate equivariant map out of the standard monomial generator is a
two-sided coefficient sequence (c_i).  Conjugating the torus action by the
unipotent pair u+ = 1 + a*e, u- = 1 + b*f turns equivariance into one linear
relation per weight; depending on which of a, b vanish the relation becomes
a one-sided closed form or a genuine three-term recurrence.  The oracle
below never trusts those derivations: it rebuilds both sides of the weight
relation with the generic module operators and demands exactly zero
residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .linalg import padic_ops, sparse_nullspace
from .padic import FieldSpec, PadicScalar, PPower
from .series import DivergenceCertificate, RadiusParams, c_to_d, convergence_verdict, validate_radius
from .weights import (
    CuspidalModuleSpec,
    HypothesisReport,
    LatticePoint,
    ModuleElement,
    apply_root_operator,
    apply_torus,
    irreducibility_precheck,
)

__all__ = [
    "Mat2",
    "ad_conjugate",
    "ConjugationParams",
    "IntertwinerTable",
    "TableBuildError",
    "build_table",
    "ResidualReport",
    "verify_intertwiner_equation",
    "solve_equation_weightwise",
    "CertifyResult",
    "certify_divergence",
    "DisjointnessResult",
    "torus_disjointness",
]


class Mat2:
    """2x2 matrix over the scalar field; just enough linear algebra for the
    conjugation formulas."""

    __slots__ = ("field", "rows")

    def __init__(self, fieldspec: FieldSpec, rows):
        self.field = fieldspec
        self.rows = tuple(tuple(fieldspec.coerce(x) for x in row) for row in rows)
        if len(self.rows) != 2 or any(len(r) != 2 for r in self.rows):
            raise ValueError("Mat2 needs a 2x2 entry grid")

    @staticmethod
    def identity(fieldspec: FieldSpec) -> "Mat2":
        return Mat2(fieldspec, ((1, 0), (0, 1)))

    @staticmethod
    def gen_e(fieldspec: FieldSpec) -> "Mat2":
        return Mat2(fieldspec, ((0, 1), (0, 0)))

    @staticmethod
    def gen_f(fieldspec: FieldSpec) -> "Mat2":
        return Mat2(fieldspec, ((0, 0), (1, 0)))

    @staticmethod
    def gen_z(fieldspec: FieldSpec) -> "Mat2":
        return Mat2(fieldspec, ((1, 0), (0, -1)))

    @staticmethod
    def diag(fieldspec: FieldSpec, x0, x1) -> "Mat2":
        return Mat2(fieldspec, ((x0, 0), (0, x1)))

    @staticmethod
    def upper_unipotent(fieldspec: FieldSpec, a) -> "Mat2":
        return Mat2(fieldspec, ((1, a), (0, 1)))

    @staticmethod
    def lower_unipotent(fieldspec: FieldSpec, b) -> "Mat2":
        return Mat2(fieldspec, ((1, 0), (b, 1)))

    def __mul__(self, other: "Mat2") -> "Mat2":
        a, b = self.rows, other.rows
        return Mat2(
            self.field,
            (
                (a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
                (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]),
            ),
        )

    def __add__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.field,
            tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(self.rows, other.rows)),
        )

    def __sub__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.field,
            tuple(tuple(x - y for x, y in zip(r, s)) for r, s in zip(self.rows, other.rows)),
        )

    def scale(self, s) -> "Mat2":
        s = self.field.coerce(s)
        return Mat2(self.field, tuple(tuple(x * s for x in r) for r in self.rows))

    def det(self) -> PadicScalar:
        return self.rows[0][0] * self.rows[1][1] - self.rows[0][1] * self.rows[1][0]

    def inverse(self) -> "Mat2":
        d = self.det()
        if d.indistinguishable_from_zero():
            raise ZeroDivisionError("singular matrix")
        return Mat2(
            self.field,
            (
                (self.rows[1][1] / d, -self.rows[0][1] / d),
                (-self.rows[1][0] / d, self.rows[0][0] / d),
            ),
        )

    def __eq__(self, other):
        if not isinstance(other, Mat2):
            return NotImplemented
        return all(
            (x - y).indistinguishable_from_zero()
            for r, s in zip(self.rows, other.rows)
            for x, y in zip(r, s)
        )

    __hash__ = None

    def __repr__(self):
        return f"Mat2({self.rows[0]!r}, {self.rows[1]!r})"


def ad_conjugate(u: Mat2, x: Mat2) -> Mat2:
    """u^(-1) x u by direct multiplication (the closed conjugation formulas
    for unipotent u are checked against this in the tests)."""
    return u.inverse() * x * u


@dataclass(frozen=True)
class ConjugationParams:
    """Unipotent pair u+ = 1 + a*e, u- = 1 + b*f and the congruence level
    m0m = m_0 + m; (a, b) lies inside the threshold group exactly when both
    valuations reach m0m."""

    a: PadicScalar
    b: PadicScalar
    m0m: int

    def inside_threshold(self) -> bool:
        ok = True
        for x in (self.a, self.b):
            if x.is_exactly_zero():
                continue
            ok = ok and x.valuation() >= self.m0m
        return ok

    @property
    def case_tag(self) -> str:
        azero = self.a.is_exactly_zero()
        bzero = self.b.is_exactly_zero()
        if azero and bzero:
            return "Identity"
        if bzero:
            return "BZero"
        if azero:
            return "AZero"
        return "Both"


class TableBuildError(ValueError):
    """A recurrence precondition failed at a named index."""


@dataclass(frozen=True)
class IntertwinerTable:
    mu: Tuple[PadicScalar, PadicScalar]
    params: ConjugationParams
    case_tag: str
    c: Dict[int, PadicScalar]
    extent: int
    seeds: Dict[int, PadicScalar]
    provenance: str = "recurrence"

    def coefficient(self, i: int) -> PadicScalar:
        zero = self.mu[0].spec.zero()
        return self.c.get(i, zero)

    def is_zero(self) -> bool:
        return all(v.is_exactly_zero() for v in self.c.values())


def _require_nonzero(x: PadicScalar, what: str):
    if x.indistinguishable_from_zero():
        raise TableBuildError(f"precondition failed: {what} vanishes")


def build_table(
    mu: Tuple[PadicScalar, PadicScalar],
    params: ConjugationParams,
    seeds: Union[Sequence, Dict[int, object]],
    N: int,
) -> IntertwinerTable:
    """Fill c_{-N}..c_N by the case-appropriate rule.

    Seeds: (c_0,) when one of a, b vanishes; (c_0, c_{-1}) when both act.
    Preconditions (nonvanishing of the shifted exponent entries, and of
    b^2 a - b in the two-sided case) are checked with the offending index
    named.
    """
    if N < 1:
        raise ValueError("table extent must be >= 1")
    spec = mu[0].spec
    a, b = params.a, params.b
    tag = params.case_tag
    if isinstance(seeds, dict):
        seed_map = {int(k): spec.coerce(v) for k, v in seeds.items()}
    else:
        seq = [spec.coerce(v) for v in seeds]
        if tag == "Both":
            if len(seq) != 2:
                raise ValueError("two-sided case needs seeds (c_0, c_-1)")
            seed_map = {0: seq[0], -1: seq[1]}
        else:
            if len(seq) != 1:
                raise ValueError("one-sided case needs the single seed (c_0,)")
            seed_map = {0: seq[0]}

    zero = spec.zero()
    c: Dict[int, PadicScalar] = {i: zero for i in range(-N, N + 1)}
    c[0] = seed_map.get(0, zero)

    if tag in ("Identity", "BZero"):
        # only the forward ladder survives; each step multiplies by
        # a*(mu_1 - k + 1)/k
        for k in range(1, N + 1):
            c[k] = a * (mu[1] - (k - 1)) * c[k - 1] / spec.exact(k)
        for k in range(1, N + 1):
            _require_nonzero(mu[1] + k, f"mu_1 + {k}")
    elif tag == "AZero":
        for k in range(0, -N, -1):
            # downward: c_{k-1} = b*(mu_0 + k)*c_k / (k - 1)
            div = spec.exact(k - 1)
            c[k - 1] = b * (mu[0] + k) * c[k] / div
        for k in range(1, N + 1):
            _require_nonzero(mu[0] + k, f"mu_0 + {k}")
    elif tag == "Both":
        b2ab = b * b * a - b
        _require_nonzero(b2ab, "b^2 a - b")
        c[-1] = seed_map.get(-1, zero)
        mubar = mu[0] - mu[1]
        # forced first step at weight 0
        _require_nonzero(mu[0] + 1, "mu_0 + 1")
        c[1] = (a * b * mubar * c[0] + a * (mu[1] + 1) * c[-1]) / (b2ab * (mu[0] + 1))
        for i in range(1, N):
            _require_nonzero(mu[0] + i + 1, f"mu_0 + {i + 1}")
            c[i + 1] = (
                c[i] * (a * b * (mubar + 2 * i) - i) + a * (mu[1] - i + 1) * c[i - 1]
            ) / (b2ab * (mu[0] + i + 1))
        for i in range(2, N + 1):
            _require_nonzero(mu[1] + i, f"mu_1 + {i}")
            c[-i] = (
                b2ab * (mu[0] - i + 2) * c[-i + 2]
                - (a * b * (mubar - 2 * (i - 1)) + (i - 1)) * c[-i + 1]
            ) / (a * (mu[1] + i))
    else:  # pragma: no cover
        raise AssertionError(tag)

    table = IntertwinerTable(
        mu=mu, params=params, case_tag=tag, c=c, extent=N, seeds=seed_map
    )
    _check_two_zero_collapse(table)
    return table


def _check_two_zero_collapse(table: IntertwinerTable):
    """Two consecutive exactly-zero entries force the whole table to zero."""
    c = table.c
    idx = range(-table.extent, table.extent)
    has_adjacent_zeros = any(
        c[i].is_exactly_zero() and c[i + 1].is_exactly_zero() for i in idx
    )
    if has_adjacent_zeros and table.case_tag == "Both" and not table.is_zero():
        raise TableBuildError(
            "two consecutive zero entries in a nonzero two-sided table"
        )


# -- the operator-level oracle -------------------------------------------


@dataclass(frozen=True)
class ResidualReport:
    all_zero: bool
    window: int
    nonzero_weights: Tuple[Tuple[str, int], ...]

    def __bool__(self):
        return self.all_zero


def _table_element(table: IntertwinerTable, spec: CuspidalModuleSpec) -> ModuleElement:
    coeffs = {}
    for i, v in table.c.items():
        if not v.is_exactly_zero():
            coeffs[LatticePoint((i, -i))] = v
    return ModuleElement(spec, coeffs)


def _transport_residual(
    table: IntertwinerTable, v: ModuleElement, x: Tuple[int, int]
) -> ModuleElement:
    """Difference of both sides of the conjugated equivariance relation for
    the torus direction x, built from the generic module operators."""
    spec = v.spec
    fieldspec = spec.field
    a, b = table.params.a, table.params.b
    mu_of_x = table.mu[0] * x[0] + table.mu[1] * x[1]
    alpha_of_x = fieldspec.coerce(x[0] - x[1])
    zv = apply_torus(v, (1, -1))
    ev = apply_root_operator(v, 0, 1)
    fv = apply_root_operator(v, 1, 0)
    lhs = v.scale(mu_of_x) + (zv.scale(b) + ev).scale(a * alpha_of_x)
    rhs = apply_torus(v, x) + fv.scale((b * b * a - b) * alpha_of_x)
    return lhs - rhs


def verify_intertwiner_equation(table: IntertwinerTable, window: int) -> ResidualReport:
    """THE ORACLE: apply both sides of the conjugated equivariance relation
    to the table's element for a torus basis and report per-weight residuals.
    Interior weights (|i| <= window <= extent - 1) of a correctly built table
    must vanish exactly."""
    if window > table.extent - 1:
        raise ValueError("window must leave one boundary layer: window <= extent - 1")
    spec = CuspidalModuleSpec(
        table.mu[0].spec, 1, (table.mu[0], table.mu[1]), window_radius=table.extent + 1
    )
    v = _table_element(table, spec)
    bad: List[Tuple[str, int]] = []
    for label, x in (("x0", (1, 0)), ("x1", (0, 1))):
        residual = _transport_residual(table, v, x)
        for i in range(-window, window + 1):
            coeff = residual.coefficient(LatticePoint((i, -i)))
            if not coeff.is_exactly_zero():
                bad.append((label, i))
    return ResidualReport(all_zero=not bad, window=window, nonzero_weights=tuple(bad))


# -- independent weight-by-weight linear solve ----------------------------


def solve_equation_weightwise(
    mu: Tuple[PadicScalar, PadicScalar],
    params: ConjugationParams,
    N: int,
) -> Tuple[List[Dict[int, PadicScalar]], List[int]]:
    """Assemble the per-weight equivariance relations on unknowns
    c_{-N}..c_N by applying the transport operators to unit basis elements,
    and return a nullspace basis plus the free columns.

    This route never uses the case recurrences, so agreement with
    ``build_table`` is a genuine two-path check.
    """
    fieldspec = mu[0].spec
    spec = CuspidalModuleSpec(fieldspec, 1, mu, window_radius=N + 1)
    dummy = IntertwinerTable(mu, params, params.case_tag, {}, N, {})
    columns: Dict[int, Dict[Tuple[str, int], PadicScalar]] = {}
    for mcol in range(-N, N + 1):
        basis_vec = ModuleElement.basis_vector(spec, LatticePoint((mcol, -mcol)))
        col: Dict[Tuple[str, int], PadicScalar] = {}
        for label, x in (("x0", (1, 0)), ("x1", (0, 1))):
            residual = _transport_residual(dummy, basis_vec, x)
            for pt, coeff in residual.coeffs.items():
                col[(label, pt[0])] = coeff
        columns[mcol] = col
    rows: Dict[Tuple[str, int], Dict[int, PadicScalar]] = {}
    for mcol, col in columns.items():
        for key, coeff in col.items():
            label, i = key
            if abs(i) > N - 1:
                continue  # boundary weights are truncation-corrupted
            rows.setdefault(key, {})[mcol] = coeff
    basis, free_cols = sparse_nullspace(
        list(rows.values()), list(range(-N, N + 1)), padic_ops(fieldspec)
    )
    return basis, free_cols


def table_matches_solution_space(table: IntertwinerTable) -> bool:
    """Check the built table lies in the solution space of the weight-by-
    weight system, reconstructing it from its values at the free columns."""
    fieldspec = table.mu[0].spec
    basis, free_cols = solve_equation_weightwise(table.mu, table.params, table.extent)
    recon: Dict[int, PadicScalar] = {}
    for vec, fc in zip(basis, free_cols):
        w = table.coefficient(fc)
        if w.is_exactly_zero():
            continue
        for cc, vv in vec.items():
            term = vv * w
            recon[cc] = recon.get(cc, fieldspec.zero()) + term
    for i in range(-table.extent, table.extent + 1):
        want = table.coefficient(i)
        got = recon.get(i, fieldspec.zero())
        if not (want - got).is_exactly_zero():
            return False
    return True


# -- end-to-end certification ---------------------------------------------


@dataclass(frozen=True)
class CertifyResult:
    certificate: DivergenceCertificate
    case_tag: str
    inside_threshold: bool
    precheck: HypothesisReport
    oracle: ResidualReport


def certify_divergence(
    mu: Tuple[PadicScalar, PadicScalar],
    params: ConjugationParams,
    radius: RadiusParams,
    N: int,
    seeds: Optional[Sequence] = None,
    lam: Tuple[int, int] = (0, 0),
) -> CertifyResult:
    """Build the coefficient table, convert to generator coefficients and run
    the convergence scan.  Outside the threshold group the expected verdict
    is Diverges; inside it (one-sided cases) Converges."""
    violations = validate_radius(radius)
    if violations:
        raise ValueError("inadmissible radius parameters: " + "; ".join(violations))
    precheck = irreducibility_precheck(mu, lam)
    tag = params.case_tag
    if seeds is None:
        seeds = (1, 1) if tag == "Both" else (1,)
    table = build_table(mu, params, seeds, N)
    # check residuals on a truncated copy: the window-30 oracle only sees
    # coefficients up to |i| = 31, and the full element would drag the deep
    # big-number coefficients through every operator application
    owin = min(N - 1, 30)
    trunc = IntertwinerTable(
        mu=mu, params=params, case_tag=table.case_tag,
        c={i: v for i, v in table.c.items() if abs(i) <= owin + 1},
        extent=owin + 1, seeds=table.seeds,
    )
    oracle = verify_intertwiner_equation(trunc, owin)

    # valuation of the conversion divisor, accumulated incrementally (the
    # per-index falling factorial would cost quadratic big-number work)
    fall_val: Dict[int, Fraction] = {0: Fraction(0)}
    acc_pos = Fraction(0)
    acc_neg = Fraction(0)
    for k in range(1, N + 1):
        factor_pos = mu[1] - (k - 1)
        factor_neg = mu[0] - (k - 1)
        if factor_pos.is_exactly_zero() or factor_neg.is_exactly_zero():
            raise ZeroDivisionError(
                f"zero falling-factorial factor at step {k}: integral exponent entry"
            )
        acc_pos += factor_pos.valuation()
        acc_neg += factor_neg.valuation()
        fall_val[k] = acc_pos
        fall_val[-k] = acc_neg

    def valseq(i: int) -> Optional[Fraction]:
        if abs(i) > N:
            return None
        ci = table.coefficient(i)
        if ci.is_exactly_zero():
            return None
        return ci.valuation() - fall_val[i] - abs(i) * radius.m0m

    cert = convergence_verdict(valseq, radius, horizon=N)
    return CertifyResult(
        certificate=cert,
        case_tag=tag,
        inside_threshold=params.inside_threshold(),
        precheck=precheck,
        oracle=oracle,
    )


@dataclass(frozen=True)
class DisjointnessResult:
    disjoint: bool
    shift: Fraction
    witness_slope: Optional[Fraction]
    before: Optional[DivergenceCertificate]
    after: Optional[DivergenceCertificate]


def torus_disjointness(
    t1: PadicScalar,
    sample_norm_target: Union[PPower, Fraction, int],
    N: int,
    radius: Optional[RadiusParams] = None,
) -> DisjointnessResult:
    """Decide whether twisting by the diagonal element diag(1, t1) moves the
    completion off itself: rescaling the lowering ladder multiplies the n-th
    term by t1^(-n), shifting term exponents by -n*val(t1).  Disjointness
    holds exactly when some convergent series of norm below the target is
    sent to a divergent one, i.e. when val(t1) > 0.  The slope comparison is
    confirmed by running the scanner on a synthesized witness."""
    spec = t1.spec
    if t1.indistinguishable_from_zero():
        raise ValueError("t1 must be a nonzero scalar")
    shift = t1.valuation()
    if shift < 0:
        raise ValueError("expected the normalized representative with |t1| <= 1")
    if isinstance(sample_norm_target, PPower):
        target_exp = -sample_norm_target.exponent if not sample_norm_target.is_zero() else Fraction(0)
    else:
        target_exp = Fraction(sample_norm_target)
    if radius is None:
        kappa = 2 if spec.p == 2 else 1
        m0 = 2 if spec.p == 2 else 1
        lam = Fraction(1, 2) if spec.p > 2 else Fraction(3, 4)
        radius = RadiusParams(spec, kappa, m0, 0, lam)
    if shift == 0:
        return DisjointnessResult(False, shift, None, None, None)
    sigma = shift / 2
    e = spec.e
    weight = radius.kappa * Fraction(radius.lambda_s)

    def exponents(shifted: bool):
        def seq(i: int) -> Optional[Fraction]:
            if i <= 0:
                return None if i < 0 else Fraction(0)
            t_i = target_exp + Fraction(math.floor(sigma * e * i), e)
            if shifted:
                t_i -= shift * i
            return t_i - weight * i

        return seq

    before = convergence_verdict(exponents(False), radius, horizon=N, sides=(1,))
    after = convergence_verdict(exponents(True), radius, horizon=N, sides=(1,))
    disjoint = before.verdict == "Converges" and after.verdict == "Diverges"
    return DisjointnessResult(disjoint, shift, sigma, before, after)
