"""JSON ingestion and emission for the command-line surface.

Scalar entries are written as [num, den, pi_power] (den and pi_power
optional), with ints or decimal strings for the big values; a bare int or
string is shorthand for [num, 1, 0].  All parsed scalars are exact.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .padic import FieldSpec, PadicScalar


class ConfigError(ValueError):
    """Malformed configuration; the message carries the offending path."""


def _as_int(value, path: str) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected an integer")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            return int(value, 10)
        except ValueError:
            raise ConfigError(f"{path}: {value!r} is not an integer") from None
    raise ConfigError(f"{path}: expected an integer, got {type(value).__name__}")


def parse_fraction(value, path: str) -> Fraction:
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"{path}: {value!r} is not a rational") from None
    if isinstance(value, Sequence) and len(value) == 2:
        return Fraction(_as_int(value[0], path), _as_int(value[1], path))
    raise ConfigError(f"{path}: expected a rational")


def parse_field(obj: Dict[str, Any], path: str = "") -> FieldSpec:
    try:
        p = _as_int(obj["p"], path + "p")
    except KeyError:
        raise ConfigError(f"{path}p: missing prime") from None
    e = _as_int(obj.get("e", 1), path + "e")
    cap = _as_int(obj.get("precision", 64), path + "precision")
    try:
        return FieldSpec(p=p, e=e, precision_cap=cap)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def parse_scalar(spec: FieldSpec, entry, path: str) -> PadicScalar:
    if isinstance(entry, (int, str)):
        entry = [entry]
    if not isinstance(entry, Sequence) or not 1 <= len(entry) <= 3:
        raise ConfigError(f"{path}: scalar entries are [num, den, pi_power]")
    num = _as_int(entry[0], f"{path}[0]")
    den = _as_int(entry[1], f"{path}[1]") if len(entry) > 1 else 1
    pi_power = _as_int(entry[2], f"{path}[2]") if len(entry) > 2 else 0
    if den == 0:
        raise ConfigError(f"{path}: zero denominator")
    return spec.exact(num, den, pi_power)


def scalar_to_json(x: PadicScalar) -> Any:
    """Exact scalars echo as [num, den, pi_power]; inexact ones as a
    valuation/digits record."""
    if x.is_exactly_zero():
        return [0, 1, 0]
    if x.is_exact():
        coords = x.exact_value()
        nonzero = [(j, c) for j, c in enumerate(coords) if c != 0]
        if len(nonzero) == 1:
            j, c = nonzero[0]
            return [str(c.numerator), str(c.denominator), j]
        return {
            "coords": [[str(c.numerator), str(c.denominator)] for c in coords]
        }
    if x.is_precision_loss():
        return {"precision_loss": True, "val_at_least": str(x.valuation_lower_bound())}
    return {
        "valuation": str(x.valuation()),
        "digits": list(x.unit_digits(min(x.relative_precision(), 24))),
    }


def fraction_to_json(q: Optional[Fraction]) -> Optional[str]:
    if q is None:
        return None
    return f"{q.numerator}/{q.denominator}"


def load_json_file(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"spec file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
