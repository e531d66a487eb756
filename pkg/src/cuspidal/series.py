"""Banach-completion coefficient analysis and locally analytic characters.

Elements of the rank-one completion are modeled as two-sided coefficient
sequences i -> d_i; membership is the decay of the exact term magnitudes
|d_i| * s^(kappa |i|).  Convergence is decided by exponent arithmetic on the
valuation sequence t_i = val(d_i) + kappa*lambda_s*|i| (s = p^(-lambda_s)):
an exact asymptotic slope is extracted whenever the sequence is affine plus
the bounded fluctuations that factorials and unit shifts produce, and the
verdict is a certificate relative to the scan horizon, never a float fit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .padic import (
    FieldSpec,
    PadicScalar,
    PPower,
    PrecisionLossError,
    factorial_valuation,
    falling_factorial,
    rational_valuation,
)

__all__ = [
    "RadiusParams",
    "validate_radius",
    "term_norm",
    "c_to_d",
    "DivergenceCertificate",
    "convergence_verdict",
    "CharValue",
    "TailNotCertifiableError",
    "char_binomial",
    "char_exp_log",
    "padic_log",
    "padic_exp",
    "unit_split",
]

ValSeq = Callable[[int], Optional[Fraction]]


@dataclass(frozen=True)
class RadiusParams:
    """Completion radius data: s = p^(-lambda_s) with the admissibility window
    max(1/p, |pi| p^(-1/(p-1))) < s and s^kappa < p^(-1/(p-1))."""

    field: FieldSpec
    kappa: int
    m0: int
    m: int
    lambda_s: Fraction

    @property
    def m0m(self) -> int:
        return self.m0 + self.m

    @property
    def s(self) -> PPower:
        return PPower(self.field.p, -Fraction(self.lambda_s))


def validate_radius(params: RadiusParams) -> List[str]:
    """Check every admissibility inequality exactly; empty list means ok."""
    p, e = params.field.p, params.field.e
    lam = Fraction(params.lambda_s)
    violations = []
    expected_kappa = 2 if p == 2 else 1
    if params.kappa != expected_kappa:
        violations.append(f"kappa must be {expected_kappa} for p = {p}")
    if params.m0 < (2 if p == 2 else 1):
        violations.append("m0 below the uniformity threshold")
    if params.m < 0:
        violations.append("m must be >= 0")
    if lam <= 0:
        violations.append("s must be < 1 (lambda_s > 0)")
    if not lam < 1:
        violations.append("s > 1/p fails")
    if not lam < Fraction(1, e) + Fraction(1, p - 1):
        violations.append("s > |pi| p^(-1/(p-1)) fails")
    if not params.kappa * lam > Fraction(1, p - 1):
        violations.append("s^kappa < p^(-1/(p-1)) fails")
    return violations


def term_norm(i: int, d: PadicScalar, params: RadiusParams) -> PPower:
    """|d| * s^(kappa |i|) as an exact p-power."""
    p = params.field.p
    if d.is_exactly_zero():
        return PPower.zero(p)
    return PPower(p, -(d.valuation() + params.kappa * Fraction(params.lambda_s) * abs(i)))


def c_to_d(c: PadicScalar, i: int, mu: Sequence[PadicScalar], m0m: int) -> PadicScalar:
    """Convert a monomial coefficient c_i to the generator-basis coefficient
    d_i, dividing out the falling-factorial and p-power factors accumulated
    by the i-fold generator action."""
    if i == 0:
        return c
    spec = c.spec
    entry = mu[1] if i > 0 else mu[0]
    fall = falling_factorial(entry, abs(i))
    if fall.is_exactly_zero():
        raise ZeroDivisionError(
            f"zero falling-factorial factor at i = {i}: integral exponent entry"
        )
    return c / (fall * spec.exact(Fraction(spec.p) ** (abs(i) * m0m)))


# -- convergence certificates ---------------------------------------------


@dataclass(frozen=True)
class DivergenceCertificate:
    verdict: str  # "Converges" | "Diverges" | "Indeterminate"
    asymptotic_slope: Optional[Fraction]
    witness: Optional[Tuple[int, int]]
    horizon: int
    notes: str = ""
    side_detail: Dict[str, str] = field(default_factory=dict)

    def to_json(self) -> str:
        slope = None
        if self.asymptotic_slope is not None:
            slope = f"{self.asymptotic_slope.numerator}/{self.asymptotic_slope.denominator}"
        payload = {
            "verdict": self.verdict,
            "slope": slope,
            "witness": list(self.witness) if self.witness else None,
            "horizon": self.horizon,
        }
        if self.notes:
            payload["notes"] = self.notes
        return json.dumps(payload, sort_keys=True)


def _exact_slope(t: Dict[int, Fraction], p: int, N: int) -> Optional[Tuple[Fraction, str]]:
    """Exact asymptotic slope of t_k when the sequence is affine plus a
    factorial (Legendre) term and/or sawtooth fluctuations of period a power
    of p.  Sampling along multiples of a stride p^a makes those fluctuations
    exactly linear, so constant secants certify the slope."""
    strides = set()
    J = 1
    while J <= max(1, N // 5):
        strides.add(J)
        if 2 * J <= max(1, N // 5):
            strides.add(2 * J)  # unit-shift sawtooths of period 2
        J *= p
    strides = sorted(strides)
    for legendre_coeff in (0, -1, 1):
        w = {}
        for k, val in t.items():
            if k >= 1:
                w[k] = val - legendre_coeff * Fraction(factorial_valuation(p, k))
        for J in reversed(strides):
            mmax = N // J
            if mmax < 5:
                continue
            samples = [i * J for i in range(2, mmax + 1)]
            if any(s not in w for s in samples):
                continue
            secants = {
                (w[samples[idx + 1]] - w[samples[idx]]) / J
                for idx in range(len(samples) - 1)
            }
            if len(secants) == 1:
                slope = secants.pop() + legendre_coeff * Fraction(1, p - 1)
                return slope, f"stride {J}, legendre {legendre_coeff}"
    return None


def _analyze_side(t: Dict[int, Fraction], p: int, N: int) -> Tuple[str, Optional[Fraction], Optional[Tuple[int, int]], str]:
    present = sorted(t)
    if not present or max(present) <= N // 2:
        return "Converges", None, None, "terms vanish over the scanned tail"

    early = [k for k in present if k <= max(1, N // 4)]
    early_max = max(t[k] for k in early) if early else t[present[0]]
    late_start = N // 2
    late = [k for k in present if k >= late_start and t[k] <= early_max]
    bounded_witness = bool(late) and max(late) >= N - max(2, N // 10)
    tail = [k for k in present if k >= 3 * N // 4]
    growth = bool(tail) and min(t[k] for k in tail) > early_max

    hit = _exact_slope(t, p, N)
    if hit is not None:
        slope, how = hit
        if slope < 0:
            witness = (min(late), max(late)) if late else (min(tail, key=lambda k: t[k]), present[-1])
            return "Diverges", slope, witness, f"exact slope {slope} < 0 ({how})"
        if slope > 0:
            if bounded_witness:
                return (
                    "Indeterminate",
                    slope,
                    (min(late), max(late)),
                    f"slope {slope} > 0 but late terms stay bounded ({how})",
                )
            return "Converges", slope, None, f"exact slope {slope} > 0 ({how})"
        return "Indeterminate", slope, None, f"exact slope 0 ({how})"

    if bounded_witness:
        return (
            "Diverges",
            None,
            (min(late), max(late)),
            "no exact slope; term valuations stop increasing through the horizon",
        )
    if growth:
        return "Indeterminate", None, None, "growth observed but no exact slope certificate"
    return "Indeterminate", None, None, "no exact slope and no bounded witness"


def convergence_verdict(
    valseq: ValSeq,
    params: RadiusParams,
    horizon: int,
    sides: Tuple[int, ...] = (1, -1),
) -> DivergenceCertificate:
    """Scan val(d_i) + kappa*lambda_s*|i| for |i| <= horizon and certify.

    ``valseq(i)`` returns the exact valuation of d_i, or None when d_i is
    exactly zero.  Divergence of either side certifies divergence of the
    series; convergence needs every scanned side.
    """
    if horizon < 50:
        raise ValueError("horizon must be >= 50")
    p = params.field.p
    weight = params.kappa * Fraction(params.lambda_s)
    side_results = {}
    for side in sides:
        t: Dict[int, Fraction] = {}
        for k in range(horizon + 1):
            v = valseq(side * k)
            if v is not None:
                t[k] = Fraction(v) + weight * k
        side_results[side] = _analyze_side(t, p, horizon)

    def signed(side, window):
        if window is None:
            return None
        a, b = window
        return (side * b, side * a) if side < 0 else (a, b)

    detail = {
        ("plus" if side > 0 else "minus"): f"{v[0]}: {v[3]}"
        for side, v in side_results.items()
    }
    for side, (verdict, slope, window, note) in side_results.items():
        if verdict == "Diverges":
            return DivergenceCertificate(
                "Diverges", slope, signed(side, window), horizon,
                notes=note, side_detail=detail,
            )
    if all(v[0] == "Converges" for v in side_results.values()):
        slopes = [v[1] for v in side_results.values() if v[1] is not None]
        return DivergenceCertificate(
            "Converges", min(slopes) if slopes else None, None, horizon,
            notes="all scanned sides converge", side_detail=detail,
        )
    for side, (verdict, slope, window, note) in side_results.items():
        if verdict == "Indeterminate":
            return DivergenceCertificate(
                "Indeterminate", slope, signed(side, window), horizon,
                notes=note, side_detail=detail,
            )
    raise AssertionError("unreachable")


# -- locally analytic characters ------------------------------------------


class TailNotCertifiableError(ArithmeticError):
    """The requested truncation cannot be certified below working precision."""


@dataclass(frozen=True)
class CharValue:
    """A truncated series value with a certified ultrametric tail bound
    (None means the series terminated: the value is exact)."""

    value: PadicScalar
    tail_valuation: Optional[Fraction]


def _mahler_integral(mu: PadicScalar) -> bool:
    """True when mu is an exact rational in Z_p (binomials then lie in Z_p)."""
    if not mu.is_exact():
        return False
    coords = mu.exact_value()
    if any(c != 0 for c in coords[1:]):
        return False
    return coords[0].denominator % mu.spec.p != 0


def char_binomial(mu: PadicScalar, x: PadicScalar, terms: int) -> CharValue:
    """Partial sum of sum_n binom(mu, n) (x-1)^n with a certified tail.

    Requires |x - 1| < 1; the certified tail valuation must be positive
    (i.e. the truncation error provably lies below working precision),
    otherwise TailNotCertifiableError is raised.
    """
    spec = mu.spec
    if x.spec != spec:
        raise ValueError("mu and x live in different fields")
    y = x - spec.one()
    if y.is_exactly_zero():
        return CharValue(spec.one(), None)
    vt = y.valuation()  # raises on precision loss
    if vt <= 0:
        raise ValueError("x outside the unit disc around 1")

    one = spec.one()
    coef = one
    power = one
    acc = one
    terminated = False
    for n in range(1, terms + 1):
        coef = coef * (mu - (n - 1)) / spec.exact(n)
        power = power * y
        if coef.is_exactly_zero():
            terminated = True
            break
        acc = acc + coef * power
    if terminated:
        return CharValue(acc, None)

    p = spec.p
    if _mahler_integral(mu):
        gap = vt  # binomials integral: |binom(mu,n)| <= 1
    else:
        vmu = mu.valuation()
        head = min(vmu, Fraction(0)) if vmu is not None else Fraction(0)
        gap = head + vt - Fraction(1, p - 1)
    if gap <= 0:
        raise TailNotCertifiableError(
            f"term magnitudes not provably decreasing (gap {gap} <= 0)"
        )
    tail = (terms + 1) * gap
    abs_pi = math.floor(tail * spec.e)
    if abs_pi <= 0:
        raise TailNotCertifiableError("tail bound does not clear working precision")
    return CharValue(acc.with_absolute_precision(abs_pi), tail)


def _log_tail_bound(vt: Fraction, N: int, p: int) -> Fraction:
    """Exact lower bound for min_{n > N} (n*vt - val_p(n))."""
    best = None
    k = 0
    while True:
        pk = p**k
        n_k = pk * (N // pk + 1)  # smallest multiple of p^k strictly above N
        cand = n_k * vt - k
        if best is None or cand < best:
            best = cand
        # stop once candidates grow monotonically and the next one cannot
        # undercut the recorded minimum
        if pk > N and pk * (p - 1) * vt > 1 and (p * pk) * vt - (k + 1) >= best:
            break
        k += 1
    return best


def padic_log(x: PadicScalar, digits: Optional[int] = None) -> PadicScalar:
    """Truncated logarithm sum (-1)^(n+1) (x-1)^n / n with certified tail,
    valid on the open unit disc around 1."""
    spec = x.spec
    y = x - spec.one()
    if y.is_exactly_zero():
        return spec.zero()
    vt = y.valuation()
    if vt <= 0:
        raise ValueError("log argument outside the unit disc around 1")
    target = Fraction(digits if digits is not None else spec.precision_cap, spec.e)
    N = max(1, int(target / vt) + 1)
    while _log_tail_bound(vt, N, spec.p) < target:
        N += max(1, int(1 / vt))
        if N > 10_000_000:
            raise TailNotCertifiableError("log tail will not certify")
    acc = spec.zero()
    power = spec.one()
    for n in range(1, N + 1):
        power = power * y
        term = power / spec.exact(n if n % 2 == 1 else -n)
        acc = acc + term
    bound = _log_tail_bound(vt, N, spec.p)
    return acc.with_absolute_precision(math.floor(bound * spec.e))


def padic_exp(z: PadicScalar, digits: Optional[int] = None) -> PadicScalar:
    """Truncated exponential with certified tail; needs val(z) > 1/(p-1)."""
    spec = z.spec
    if z.is_exactly_zero():
        return spec.one()
    p = spec.p
    vz = z.valuation()
    gap = vz - Fraction(1, p - 1)
    if gap <= 0:
        raise ValueError("argument outside the exponential disc")
    target = Fraction(digits if digits is not None else spec.precision_cap, spec.e)
    N = max(1, int(target / gap) + 1)
    acc = spec.one()
    power = spec.one()
    fact = 1
    for n in range(1, N + 1):
        power = power * z
        fact *= n
        acc = acc + power / spec.exact(fact)
    bound = (N + 1) * gap
    return acc.with_absolute_precision(math.floor(bound * spec.e))


def char_exp_log(mu: PadicScalar, x: PadicScalar, digits: Optional[int] = None) -> PadicScalar:
    """Character value exp(mu * log x), certified on the composed disc."""
    spec = mu.spec
    if x.spec != spec:
        raise ValueError("mu and x live in different fields")
    lg = padic_log(x, digits=digits)
    arg = mu * lg
    if arg.indistinguishable_from_zero():
        return spec.one()
    if arg.valuation() <= Fraction(1, spec.p - 1):
        raise ValueError("mu * log(x) outside the exponential disc")
    return padic_exp(arg, digits=digits)


def unit_split(x: PadicScalar) -> Tuple[int, PadicScalar]:
    """Split a unit of Z_p into its Teichmuller residue and principal part.

    Returns (r, u) with r in {1, ..., p-1} the residue of the root-of-unity
    component and u = x / omega(x) in 1 + pZ_p.  Unramified base only.
    """
    spec = x.spec
    if spec.e != 1:
        raise ValueError("Teichmuller splitting implemented for e = 1 only")
    if x.indistinguishable_from_zero() or x.valuation() != 0:
        raise ValueError("unit_split needs a unit (valuation 0)")
    p = spec.p
    rel = x.relative_precision()
    m = spec.precision_cap if rel is None else min(rel, spec.precision_cap)
    digits = x.unit_digits(m)
    u = sum(d * p**i for i, d in enumerate(digits)) % p**m
    t = u
    for _ in range(m + 1):
        nxt = pow(t, p, p**m)
        if nxt == t:
            break
        t = nxt
    omega = PadicScalar(spec, (Fraction(t),), m)
    principal = x / omega
    return t % p, principal
