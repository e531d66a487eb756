"""Exact arithmetic over Q_p and its totally ramified extensions Q_p(pi), pi^e = p.

Scalars are stored as pi-adic coordinate vectors (c_0, ..., c_{e-1}) of exact
rationals, so the value of an element is sum_j c_j * pi^j.  Because the term
valuations val_p(c_j) + j/e are pairwise distinct modulo 1, the valuation of a
nonzero element is always the exact minimum of the term valuations: there is
no hidden cancellation between coordinates, and zero testing on the known part
is decidable.

Precision model: every scalar carries an absolute precision in pi-units
(``None`` means the value is exact).  Arithmetic propagates precision
ultrametrically, and a result whose known part vanishes below its precision
floor becomes a *precision-loss* value, never a silent zero.  Relative
precision is capped at ``FieldSpec.precision_cap`` pi-digits.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

__all__ = [
    "PrecisionLossError",
    "FieldSpec",
    "PadicScalar",
    "PPower",
    "norm",
    "field_arithmetic",
    "embed_rational",
    "binomial_scalar",
    "falling_factorial",
    "factorial_valuation",
    "digit_sum",
    "rational_valuation",
]

Rat = Union[int, Fraction]


class PrecisionLossError(ArithmeticError):
    """A result is indistinguishable from zero at the surviving precision."""

    def __init__(self, message: str, lower_bound: Optional[Fraction] = None):
        super().__init__(message)
        self.lower_bound = lower_bound


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d, s = d // 2, s + 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def digit_sum(p: int, i: int) -> int:
    """Sum of the base-p digits of i >= 0."""
    if i < 0:
        raise ValueError("digit_sum needs a nonnegative argument")
    s = 0
    while i:
        i, r = divmod(i, p)
        s += r
    return s


def factorial_valuation(p: int, i: int) -> int:
    """val_p(i!) = (i - digit_sum_p(i)) / (p - 1), exactly (Legendre)."""
    if i < 0:
        raise ValueError("factorial_valuation needs a nonnegative argument")
    num = i - digit_sum(p, i)
    assert num % (p - 1) == 0
    return num // (p - 1)


def rational_valuation(q: Rat, p: int) -> Optional[int]:
    """val_p of an exact rational; None encodes +infinity (q = 0)."""
    q = Fraction(q)
    if q == 0:
        return None
    v = 0
    n = q.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = q.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


def _frac_reduce(c: Fraction, p: int, mod_exp: int) -> Fraction:
    """Canonical representative of c modulo p^mod_exp (denominator a p-power)."""
    if c == 0 or mod_exp is None:
        return c
    v = rational_valuation(c, p)
    if v >= mod_exp:
        return Fraction(0)
    unit = c / Fraction(p) ** v
    m = p ** (mod_exp - v)
    r = unit.numerator * pow(unit.denominator, -1, m) % m
    return Fraction(r) * Fraction(p) ** v


@dataclass(frozen=True)
class FieldSpec:
    """Ambient field Q_p(pi) with pi^e = p and a relative precision cap.

    ``precision_cap`` counts pi-digits; valuations live in (1/e)*Z.
    """

    p: int
    e: int = 1
    precision_cap: int = 64

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.e < 1:
            raise ValueError("ramification index must be >= 1")
        if self.precision_cap < 1:
            raise ValueError("precision_cap must be >= 1")

    # -- constructors -------------------------------------------------

    def zero(self) -> "PadicScalar":
        return PadicScalar(self, (Fraction(0),) * self.e, None)

    def one(self) -> "PadicScalar":
        return self.exact(1)

    def exact(self, num: Rat, den: Rat = 1, pi_power: int = 0) -> "PadicScalar":
        """Exact element (num/den) * pi^pi_power; infinite precision."""
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        q = Fraction(num, 1) / Fraction(den)
        coords = [Fraction(0)] * self.e
        if q != 0:
            k, j = divmod(pi_power, self.e)
            coords[j] = q * Fraction(self.p) ** k
        return PadicScalar(self, tuple(coords), None)

    def embed_rational(self, num: int, den: int) -> "PadicScalar":
        """num/den at the precision cap (digits correct to precision_cap)."""
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        return self.exact(num, den).capped()

    def uniformizer(self) -> "PadicScalar":
        return self.exact(1, 1, 1)

    def pi_power(self, k: int) -> "PadicScalar":
        return self.exact(1, 1, k)

    def coerce(self, value) -> "PadicScalar":
        if isinstance(value, PadicScalar):
            if value.spec != self:
                raise ValueError("scalar belongs to a different field")
            return value
        if isinstance(value, (int, Fraction)):
            return self.exact(value)
        raise TypeError(f"cannot coerce {type(value).__name__} into {self}")

    def __str__(self):
        if self.e == 1:
            return f"Q_{self.p} (cap {self.precision_cap})"
        return f"Q_{self.p}(pi), pi^{self.e} = {self.p} (cap {self.precision_cap})"


class PadicScalar:
    """An element of Q_p(pi), exact or with capped relative precision.

    The element equals ``sum_j coords[j] * pi^j + O(pi^abs_prec)``; an
    ``abs_prec`` of None marks an exact value.
    """

    __slots__ = ("spec", "_coords", "_abs")

    def __init__(self, spec: FieldSpec, coords: Sequence[Rat], abs_prec: Optional[int]):
        object.__setattr__(self, "spec", spec)
        coords = tuple(Fraction(c) for c in coords)
        if len(coords) != spec.e:
            raise ValueError("coordinate vector has the wrong length")
        if abs_prec is not None:
            coords = self._reduced(spec, coords, abs_prec)
            v = self._coord_valuation(spec, coords)
            if v is not None:
                capped = min(abs_prec, v + spec.precision_cap)
                if capped < abs_prec:
                    abs_prec = capped
                    coords = self._reduced(spec, coords, abs_prec)
        object.__setattr__(self, "_coords", coords)
        object.__setattr__(self, "_abs", abs_prec)

    def __setattr__(self, *a):  # immutable
        raise AttributeError("PadicScalar is immutable")

    # -- internals ----------------------------------------------------

    @staticmethod
    def _reduced(spec: FieldSpec, coords: Tuple[Fraction, ...], abs_prec: int):
        out = []
        for j, c in enumerate(coords):
            mod_exp = -((j - abs_prec) // spec.e)  # ceil((abs_prec - j)/e)
            out.append(_frac_reduce(c, spec.p, mod_exp) if mod_exp > 0 else Fraction(0))
        return tuple(out)

    @staticmethod
    def _coord_valuation(spec: FieldSpec, coords) -> Optional[int]:
        """Valuation in pi-units of the known part; None if it vanishes."""
        best = None
        for j, c in enumerate(coords):
            v = rational_valuation(c, spec.p)
            if v is None:
                continue
            cand = v * spec.e + j
            if best is None or cand < best:
                best = cand
        return best

    # -- state predicates ----------------------------------------------

    def is_exact(self) -> bool:
        return self._abs is None

    def is_exactly_zero(self) -> bool:
        return self._abs is None and all(c == 0 for c in self._coords)

    def is_precision_loss(self) -> bool:
        """True when only a bound val >= abs_prec is known (no digits)."""
        return self._abs is not None and all(c == 0 for c in self._coords)

    def indistinguishable_from_zero(self) -> bool:
        return self.is_exactly_zero() or self.is_precision_loss()

    # -- valuation, norm, digits ----------------------------------------

    def valuation_pi(self) -> Optional[int]:
        """Exact valuation in pi-units; None means +infinity (exact zero)."""
        if self.is_exactly_zero():
            return None
        v = self._coord_valuation(self.spec, self._coords)
        if v is None:
            raise PrecisionLossError(
                f"valuation only known to be >= {Fraction(self._abs, self.spec.e)}",
                lower_bound=Fraction(self._abs, self.spec.e),
            )
        return v

    def valuation(self) -> Optional[Fraction]:
        """Exact valuation in (1/e)Z, None for the exact zero."""
        v = self.valuation_pi()
        return None if v is None else Fraction(v, self.spec.e)

    def valuation_lower_bound(self) -> Optional[Fraction]:
        """Always available: a lower bound for the valuation (None = +inf)."""
        if self.is_exactly_zero():
            return None
        if self.is_precision_loss():
            return Fraction(self._abs, self.spec.e)
        return self.valuation()

    def relative_precision(self) -> Optional[int]:
        """Known pi-digits of the unit part (None = exact)."""
        if self._abs is None:
            return None
        if self.is_precision_loss():
            return 0
        return self._abs - self.valuation_pi()

    def unit_digits(self, count: Optional[int] = None) -> Tuple[int, ...]:
        """pi-adic digits of x / pi^val(x), most significant first omitted --
        index 0 is the leading (unit) digit."""
        if self.indistinguishable_from_zero():
            raise PrecisionLossError("no digits: value indistinguishable from zero")
        spec = self.spec
        rel = self.relative_precision()
        if count is None:
            count = spec.precision_cap if rel is None else rel
        elif rel is not None and count > rel:
            raise PrecisionLossError(f"only {rel} digits known, {count} requested")
        v = self.valuation_pi()
        k, j0 = divmod(v, spec.e)
        # shift down by pi^v: coords cyclic-rotate by j0, scale by p^k
        coords = list(self._coords)
        unit = [Fraction(0)] * spec.e
        for j in range(spec.e):
            src = (j + j0) % spec.e
            drop = (j + j0) // spec.e
            unit[j] = coords[src] / Fraction(spec.p) ** (k + drop)
        digits = []
        p = spec.p
        for _ in range(count):
            c0 = unit[0]
            m = c0.numerator * pow(c0.denominator, -1, p) % p if c0 != 0 else 0
            digits.append(m)
            rem = (unit[0] - m) / p
            unit = unit[1:] + [rem]
        return tuple(digits)

    def residue(self) -> int:
        """Leading pi-digit (in Z/p) of the unit part."""
        return self.unit_digits(1)[0]

    def capped(self) -> "PadicScalar":
        """Truncate to the spec's precision cap (no-op on exact zero / loss)."""
        if self.is_exactly_zero() or self.is_precision_loss():
            return self
        v = self.valuation_pi()
        target = v + self.spec.precision_cap
        if self._abs is not None and self._abs <= target:
            return self
        return PadicScalar(self.spec, self._coords, target)

    def with_absolute_precision(self, abs_pi: int) -> "PadicScalar":
        """Forget digits beyond pi^abs_pi (tightens, never loosens)."""
        new = abs_pi if self._abs is None else min(self._abs, abs_pi)
        return PadicScalar(self.spec, self._coords, new)

    def exact_value(self) -> Tuple[Fraction, ...]:
        """Coordinates of the known part (exact rationals)."""
        return self._coords

    def as_rational(self) -> Fraction:
        """The value as an exact rational; requires e = 1 or pure coordinate 0."""
        if any(c != 0 for c in self._coords[1:]):
            raise ValueError("value has nonzero pi-coordinates")
        return self._coords[0]

    def is_rational_integer(self) -> bool:
        """Whether the value is an exact rational integer (needs exactness)."""
        if self.is_exactly_zero():
            return True
        if not self.is_exact():
            raise PrecisionLossError(
                "integrality is only decidable for exact scalars"
            )
        return (
            all(c == 0 for c in self._coords[1:])
            and self._coords[0].denominator == 1
        )

    # -- arithmetic -----------------------------------------------------

    def _coerce(self, other) -> "PadicScalar":
        return self.spec.coerce(other)

    def _floor_pi(self) -> Optional[int]:
        """Lower bound for the valuation in pi-units (None = +inf)."""
        if self.is_exactly_zero():
            return None
        if self.is_precision_loss():
            return self._abs
        return self.valuation_pi()

    def __add__(self, other):
        other = self._coerce(other)
        a, b = self._abs, other._abs
        abs_prec = a if b is None else b if a is None else min(a, b)
        coords = tuple(x + y for x, y in zip(self._coords, other._coords))
        return PadicScalar(self.spec, coords, abs_prec)

    __radd__ = __add__

    def __neg__(self):
        return PadicScalar(self.spec, tuple(-c for c in self._coords), self._abs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + self._coerce(other)

    def __mul__(self, other):
        other = self._coerce(other)
        spec = self.spec
        if self.is_exactly_zero() or other.is_exactly_zero():
            abs_prec = None
        else:
            cands = []
            if other._abs is not None:
                cands.append(self._floor_pi() + other._abs)
            if self._abs is not None:
                cands.append(other._floor_pi() + self._abs)
            abs_prec = min(cands) if cands else None
        coords = [Fraction(0)] * spec.e
        for j, cj in enumerate(self._coords):
            if cj == 0:
                continue
            for k, dk in enumerate(other._coords):
                if dk == 0:
                    continue
                m = j + k
                if m < spec.e:
                    coords[m] += cj * dk
                else:
                    coords[m - spec.e] += cj * dk * spec.p
        return PadicScalar(spec, tuple(coords), abs_prec)

    __rmul__ = __mul__

    def _known_inverse_coords(self) -> Tuple[Fraction, ...]:
        """Exact inverse of the known part in Q(pi) by linear solve."""
        spec = self.spec
        e = spec.e
        # matrix of multiplication by self on the basis 1, pi, ..., pi^{e-1}
        mat = [[Fraction(0)] * e for _ in range(e)]
        for k in range(e):
            for j, cj in enumerate(self._coords):
                m = j + k
                if m < e:
                    mat[m][k] += cj
                else:
                    mat[m - e][k] += cj * spec.p
        rhs = [Fraction(1 if i == 0 else 0) for i in range(e)]
        # Gaussian elimination over Q
        for col in range(e):
            piv = next((r for r in range(col, e) if mat[r][col] != 0), None)
            if piv is None:
                raise ZeroDivisionError("known part is not invertible")
            mat[col], mat[piv] = mat[piv], mat[col]
            rhs[col], rhs[piv] = rhs[piv], rhs[col]
            inv = 1 / mat[col][col]
            mat[col] = [x * inv for x in mat[col]]
            rhs[col] *= inv
            for r in range(e):
                if r != col and mat[r][col] != 0:
                    f = mat[r][col]
                    mat[r] = [x - f * y for x, y in zip(mat[r], mat[col])]
                    rhs[r] -= f * rhs[col]
        return tuple(rhs)

    def inverse(self) -> "PadicScalar":
        if self.is_exactly_zero():
            raise ZeroDivisionError("division by zero")
        if self.is_precision_loss():
            raise PrecisionLossError(
                "division by a value indistinguishable from zero",
                lower_bound=self.valuation_lower_bound(),
            )
        inv_coords = self._known_inverse_coords()
        if self._abs is None:
            return PadicScalar(self.spec, inv_coords, None)
        v = self.valuation_pi()
        rel = self._abs - v
        return PadicScalar(self.spec, inv_coords, -v + rel)

    def __truediv__(self, other):
        other = self._coerce(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = self.spec.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return (self - other).indistinguishable_from_zero()

    __hash__ = None  # mutable-equality semantics; not hashable

    def __repr__(self):
        spec = self.spec
        if self.is_exactly_zero():
            return "0 (exact)"
        if self.is_precision_loss():
            return f"O(pi^{self._abs})" if spec.e > 1 else f"O({spec.p}^{self._abs})"
        v = self.valuation()
        digits = self.unit_digits(min(8, self.relative_precision() or 8))
        ds = ",".join(str(d) for d in digits)
        tail = "..." if self.is_exact() or (self.relative_precision() or 0) > 8 else ""
        unit = "pi" if spec.e > 1 else str(spec.p)
        prec = "exact" if self.is_exact() else f"prec {self.relative_precision()}"
        return f"{unit}^({v})*[{ds}{tail}] ({prec})"


# -- spec-level operations ---------------------------------------------


@dataclass(frozen=True)
class PPower:
    """Exact magnitude p^exponent; exponent None encodes the zero magnitude."""

    p: int
    exponent: Optional[Fraction]

    @staticmethod
    def zero(p: int) -> "PPower":
        return PPower(p, None)

    def is_zero(self) -> bool:
        return self.exponent is None

    def __mul__(self, other: "PPower") -> "PPower":
        if self.p != other.p:
            raise ValueError("mixed prime bases")
        if self.is_zero() or other.is_zero():
            return PPower.zero(self.p)
        return PPower(self.p, self.exponent + other.exponent)

    def _key(self):
        # zero magnitude sorts below every p-power
        return (0, 0) if self.is_zero() else (1, self.exponent)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def _cmp(self, other):
        if isinstance(other, PPower):
            if self.p != other.p:
                raise ValueError("mixed prime bases")
            a, b = self._key(), other._key()
        else:
            # compare against an exact nonnegative rational, as p^log_p(other)
            q = Fraction(other)
            if q < 0:
                raise ValueError("magnitudes are nonnegative")
            if q == 0:
                b = (0, 0)
            else:
                # exact comparison p^x ? q: only p-power rationals supported
                v = rational_valuation(q, self.p)
                if Fraction(q) != Fraction(self.p) ** v:
                    raise ValueError("exact comparison needs a p-power")
                b = (1, Fraction(v))
            a = self._key()
        if a[0] != b[0]:
            return -1 if a[0] < b[0] else 1
        if a[0] == 0:
            return 0
        return -1 if a[1] < b[1] else (0 if a[1] == b[1] else 1)

    def __float__(self):
        return 0.0 if self.is_zero() else float(self.p) ** float(self.exponent)

    def __repr__(self):
        return "0" if self.is_zero() else f"{self.p}^({self.exponent})"


def norm(x: PadicScalar) -> PPower:
    """|x| = p^(-val(x)); |0| = 0.  Exact exponent pair."""
    if x.is_exactly_zero():
        return PPower.zero(x.spec.p)
    return PPower(x.spec.p, -x.valuation())


def embed_rational(spec: FieldSpec, num: int, den: int) -> PadicScalar:
    return spec.embed_rational(num, den)


def field_arithmetic(x: PadicScalar, y: PadicScalar, op: str) -> PadicScalar:
    if x.spec != y.spec:
        raise ValueError("operands live in different fields")
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    raise ValueError(f"unknown operation {op!r}")


def falling_factorial(mu: PadicScalar, n: int) -> PadicScalar:
    """mu (mu-1) ... (mu-n+1); the empty product for n = 0."""
    if n < 0:
        raise ValueError("n must be >= 0")
    acc = mu.spec.one()
    for k in range(n):
        acc = acc * (mu - k)
    return acc


def binomial_scalar(mu: PadicScalar, n: int) -> PadicScalar:
    """Generalized binomial coefficient mu (mu-1)...(mu-n+1) / n!."""
    if n < 0:
        raise ValueError("n must be >= 0")
    num = falling_factorial(mu, n)
    den = 1
    for k in range(2, n + 1):
        den *= k
    return num / mu.spec.exact(den)
