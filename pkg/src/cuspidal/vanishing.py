"""Window injectivity of conjugated raising/lowering operators.

The invariants-vanishing mechanism reduces to a concrete linear-algebra
statement: every conjugate of a root generator must act injectively on the
monomial module.  On a finite window this is checked exactly for vectors
supported strictly inside (their images cannot escape, so truncation never
fabricates or hides a kernel)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .intertwine import Mat2
from .linalg import dense_inverse, padic_ops, sparse_nullspace
from .weights import (
    CuspidalModuleSpec,
    LatticePoint,
    ModuleElement,
    WindowError,
    apply_gl_matrix,
    lattice_window,
)

__all__ = ["H0Row", "H0Report", "h0_vanishing_check", "conjugated_generator"]

MatrixLike = Union[Mat2, Sequence[Sequence[object]]]


def _as_rows(u: MatrixLike, spec: CuspidalModuleSpec):
    if isinstance(u, Mat2):
        if spec.n != 1:
            raise ValueError("2x2 conjugator on a higher-rank module")
        return [list(r) for r in u.rows]
    rows = [[spec.field.coerce(x) for x in row] for row in u]
    if len(rows) != spec.n + 1 or any(len(r) != spec.n + 1 for r in rows):
        raise ValueError("conjugator has the wrong shape")
    return rows


def conjugated_generator(u: MatrixLike, i: int, j: int, spec: CuspidalModuleSpec):
    """Matrix of u^(-1) E_ij u over the scalar field."""
    rows = _as_rows(u, spec)
    ops = padic_ops(spec.field)
    uinv = dense_inverse(rows, ops)
    size = spec.n + 1
    # E_ij picks out column: (u^-1 E_ij u)_(r,c) = uinv[r][i] * u[j][c]
    return [[uinv[r][i] * rows[j][c] for c in range(size)] for r in range(size)]


@dataclass(frozen=True)
class H0Row:
    generator: Tuple[int, int]
    conjugator_index: int
    injective: bool
    kernel_dim: int
    witness: Optional[Dict[LatticePoint, object]] = None


@dataclass(frozen=True)
class H0Report:
    rows: Tuple[H0Row, ...]
    window_radius: int

    @property
    def all_injective(self) -> bool:
        return all(r.injective for r in self.rows)

    def kernels(self) -> List[H0Row]:
        return [r for r in self.rows if not r.injective]


def h0_vanishing_check(
    spec: CuspidalModuleSpec,
    conjugators: Sequence[MatrixLike],
    window_radius: Optional[int] = None,
    generators: Optional[Sequence[Tuple[int, int]]] = None,
) -> H0Report:
    """For each conjugated generator, decide whether the induced map on
    strictly-interior window vectors has zero kernel; report per pair.

    An empty conjugator list is a vacuous pass.  Images of strictly interior
    points stay inside the window (generators shift by at most one), which
    is asserted, so the verdict is exact.
    """
    radius = spec.window_radius if window_radius is None else window_radius
    if radius < 1:
        raise WindowError("window too small to contain a strictly-interior vector")
    interior = list(lattice_window(spec.n, radius - 1))
    if not interior:
        raise WindowError("window too small to contain a strictly-interior vector")
    if generators is None:
        generators = [
            (i, j)
            for i in range(spec.n + 1)
            for j in range(spec.n + 1)
            if i != j
        ]
    ops = padic_ops(spec.field)
    rows_out: List[H0Row] = []
    for uidx, u in enumerate(conjugators):
        for gen in generators:
            xmat = conjugated_generator(u, gen[0], gen[1], spec)
            equations: Dict[LatticePoint, Dict[LatticePoint, object]] = {}
            for pt in interior:
                image = apply_gl_matrix(
                    ModuleElement.basis_vector(spec, pt), xmat
                )
                inside, escaped = image.restrict_to_window(radius)
                if not escaped.is_zero():
                    raise AssertionError("interior image escaped the window")
                for ipt, coeff in inside.coeffs.items():
                    equations.setdefault(ipt, {})[pt] = coeff
            basis, _free = sparse_nullspace(
                list(equations.values()), interior, ops
            )
            kernel_dim = len(basis)
            witness = basis[0] if basis else None
            rows_out.append(
                H0Row(
                    generator=tuple(gen),
                    conjugator_index=uidx,
                    injective=kernel_dim == 0,
                    kernel_dim=kernel_dim,
                    witness=witness,
                )
            )
    return H0Report(rows=tuple(rows_out), window_radius=radius)
