"""Sparse exact linear algebra over pluggable coefficient fields.

Rows are dicts column -> coefficient.  The two coefficient types used in
this package (PadicScalar and Fraction) plug in through a small ops record,
so kernel computations stay exact in both worlds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from .padic import FieldSpec, PadicScalar


@dataclass(frozen=True)
class FieldOps:
    zero: Callable[[], object]
    one: Callable[[], object]
    is_zero: Callable[[object], bool]
    add: Callable[[object, object], object]
    sub: Callable[[object, object], object]
    mul: Callable[[object, object], object]
    inv: Callable[[object], object]
    neg: Callable[[object], object]


def padic_ops(spec: FieldSpec) -> FieldOps:
    return FieldOps(
        zero=spec.zero,
        one=spec.one,
        is_zero=lambda x: x.is_exactly_zero(),
        add=lambda x, y: x + y,
        sub=lambda x, y: x - y,
        mul=lambda x, y: x * y,
        inv=lambda x: x.inverse(),
        neg=lambda x: -x,
    )


def fraction_ops() -> FieldOps:
    return FieldOps(
        zero=lambda: Fraction(0),
        one=lambda: Fraction(1),
        is_zero=lambda x: x == 0,
        add=lambda x, y: x + y,
        sub=lambda x, y: x - y,
        mul=lambda x, y: x * y,
        inv=lambda x: 1 / x,
        neg=lambda x: -x,
    )


def sparse_nullspace(
    rows: Sequence[Dict[Hashable, object]],
    cols: Sequence[Hashable],
    ops: FieldOps,
) -> Tuple[List[Dict[Hashable, object]], List[Hashable]]:
    """Nullspace basis of the sparse system; each basis vector has a 1 at its
    own free column and 0 at the other free columns.  Columns are ordered by
    the given sequence."""
    order = {c: k for k, c in enumerate(cols)}
    pivots: Dict[Hashable, Dict[Hashable, object]] = {}
    for row in rows:
        row = {c: v for c, v in row.items() if not ops.is_zero(v)}
        while row:
            lead = min(row, key=order.__getitem__)
            if lead in pivots:
                factor = row.pop(lead)
                for cc, vv in pivots[lead].items():
                    if cc == lead:
                        continue
                    nxt = ops.sub(row.get(cc, ops.zero()), ops.mul(factor, vv))
                    if ops.is_zero(nxt):
                        row.pop(cc, None)
                    else:
                        row[cc] = nxt
            else:
                inv = ops.inv(row[lead])
                pivots[lead] = {cc: ops.mul(vv, inv) for cc, vv in row.items()}
                break
    free_cols = [c for c in cols if c not in pivots]
    basis = []
    for fc in free_cols:
        vec: Dict[Hashable, object] = {fc: ops.one()}
        for pc in sorted(pivots, key=order.__getitem__, reverse=True):
            acc = ops.zero()
            for cc, vv in pivots[pc].items():
                if cc != pc and cc in vec:
                    acc = ops.add(acc, ops.mul(vv, vec[cc]))
            if not ops.is_zero(acc):
                vec[pc] = ops.neg(acc)
        basis.append(vec)
    return basis, free_cols


def dense_inverse(rows: Sequence[Sequence[object]], ops: FieldOps) -> List[List[object]]:
    """Exact inverse of a small square matrix by Gauss-Jordan elimination."""
    n = len(rows)
    aug = [list(r) + [ops.one() if i == j else ops.zero() for j in range(n)] for i, r in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not ops.is_zero(aug[r][col])), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = ops.inv(aug[col][col])
        aug[col] = [ops.mul(x, inv) for x in aug[col]]
        for r in range(n):
            if r != col and not ops.is_zero(aug[r][col]):
                f = aug[r][col]
                aug[r] = [ops.sub(x, ops.mul(f, y)) for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def sparse_solve(
    rows: Sequence[Tuple[Dict[Hashable, object], object]],
    cols: Sequence[Hashable],
    ops: FieldOps,
) -> Optional[Dict[Hashable, object]]:
    """One solution of the (possibly underdetermined) system, free unknowns
    set to zero; None when inconsistent."""
    order = {c: k for k, c in enumerate(cols)}
    pivots: Dict[Hashable, Tuple[Dict[Hashable, object], object]] = {}
    for row, rhs in rows:
        row = {c: v for c, v in row.items() if not ops.is_zero(v)}
        while True:
            if not row:
                if not ops.is_zero(rhs):
                    return None
                break
            lead = min(row, key=order.__getitem__)
            if lead in pivots:
                factor = row.pop(lead)
                prow, prhs = pivots[lead]
                for cc, vv in prow.items():
                    if cc == lead:
                        continue
                    nxt = ops.sub(row.get(cc, ops.zero()), ops.mul(factor, vv))
                    if ops.is_zero(nxt):
                        row.pop(cc, None)
                    else:
                        row[cc] = nxt
                rhs = ops.sub(rhs, ops.mul(factor, prhs))
            else:
                inv = ops.inv(row[lead])
                pivots[lead] = (
                    {cc: ops.mul(vv, inv) for cc, vv in row.items()},
                    ops.mul(rhs, inv),
                )
                break
    solution: Dict[Hashable, object] = {}
    for pc in sorted(pivots, key=order.__getitem__, reverse=True):
        prow, prhs = pivots[pc]
        acc = prhs
        for cc, vv in prow.items():
            if cc != pc and cc in solution:
                acc = ops.sub(acc, ops.mul(vv, solution[cc]))
        if not ops.is_zero(acc):
            solution[pc] = acc
    return solution
