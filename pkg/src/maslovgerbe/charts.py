"""Charts and scalar maps on the lagrangian grassmannian.

* slope / inverse-slope coordinates of a line in the plane,
* ``det(X + iY)^2`` of an orthonormal frame and the Maslov index as its
  winding number along a loop,
* the determinant section ``L -> det(phi . Z_L)`` whose zero set is the
  Maslov cycle of a reference lagrangian ``L0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FieldMismatchError, ReferenceDataError, ShapeError
from .phase import phase_increments
from .symplectic import LagrangianFrame, LagrangianLoop

CHART_TOL = 1e-12
SECTION_RTOL = 1e-9
DEFECT_TOL = 1e-8


@dataclass(frozen=True)
class ChartValue:
    chart: str  # "slope" or "inverse-slope"
    value: complex | float
    valid: bool


def slope_coords(L: LagrangianFrame) -> tuple[ChartValue, ChartValue]:
    """Slope ``a`` (line ``p = a q``) and inverse slope ``b`` (line ``q = b p``)."""
    if L.n != 1:
        raise ShapeError("slope coordinates are defined on lines in a plane")
    x, y = L.Z[0, 0], L.Z[1, 0]
    norm = np.hypot(abs(x), abs(y))
    a_ok = abs(x) > CHART_TOL * norm
    b_ok = abs(y) > CHART_TOL * norm
    nan = float("nan")
    a = ChartValue("slope", y / x if a_ok else nan, bool(a_ok))
    b = ChartValue("inverse-slope", x / y if b_ok else nan, bool(b_ok))
    return a, b


def _require_real(space):
    if space.field != "real":
        raise FieldMismatchError(
            "the Maslov index of loops is defined for real spaces; "
            "complex Lag has no first cohomology"
        )


def det_squared(L: LagrangianFrame) -> complex:
    """``det(X + iY)^2`` for an orthonormalized real frame; a unit complex number."""
    _require_real(L.space)
    Q = L.orthonormal()
    n = L.n
    d = np.linalg.det(Q[:n] + 1j * Q[n:])
    d2 = d * d
    return d2 / abs(d2)


def maslov_index(loop: LagrangianLoop) -> int:
    """Winding number of ``det_squared`` around a closed real loop."""
    _require_real(loop.space)
    if not loop.closed:
        raise ShapeError("maslov_index needs a closed loop")
    values = np.array([det_squared(f) for f in loop.samples])
    inc = phase_increments(values, closed=True, where="det^2 along loop")
    return int(np.rint(inc.sum() / (2 * np.pi)))


def default_phi(L0: LagrangianFrame) -> np.ndarray:
    """Orthonormal rows spanning the annihilator of ``L0``.

    Row ``i`` is ``x -> omega(x, u_i)`` for an orthonormal basis ``u`` of
    ``L0``; for a coordinate lagrangian these are the complementary
    coordinate projections (``L0`` = p-axis gives ``dq``).
    """
    Q0 = L0.orthonormal()
    return Q0.T @ L0.space.J.T


@dataclass(frozen=True, eq=False)
class SectionValue:
    value: complex
    frame: LagrangianFrame
    base: LagrangianFrame
    phi: np.ndarray

    @property
    def scale(self) -> float:
        cols = np.prod(np.linalg.norm(self.frame.Z, axis=0))
        return float(cols * np.linalg.norm(self.phi, 2) ** self.frame.n)

    def vanishes(self, rtol: float = SECTION_RTOL) -> bool:
        return bool(abs(self.value) < rtol * self.scale)


def maslov_section(L: LagrangianFrame, L0: LagrangianFrame, phi=None) -> SectionValue:
    """Value at ``L`` of the section of the top power of the dual tautological bundle.

    ``phi`` is an ``n x 2n`` matrix whose rows annihilate ``L0``; its
    restriction to ``L`` has determinant zero exactly when ``L`` meets ``L0``.
    """
    if L.space != L0.space:
        raise FieldMismatchError("L and L0 must live in the same space")
    phi = default_phi(L0) if phi is None else np.asarray(phi)
    n = L.n
    if phi.shape != (n, 2 * n):
        raise ShapeError(f"phi must be {n}x{2 * n}, got {phi.shape}")
    leak = np.linalg.norm(phi @ L0.Z)
    if leak > 1e-9 * np.linalg.norm(phi) * np.linalg.norm(L0.Z):
        raise ReferenceDataError(f"phi does not annihilate L0 (residual {leak:.3g})")
    if np.linalg.matrix_rank(phi) < n:
        raise ReferenceDataError("phi must have rank n")
    value = complex(np.linalg.det(phi @ L.Z))
    if L.space.field == "real":
        value = value.real
    return SectionValue(value, L, L0, phi)


def transversality_defect(L: LagrangianFrame, L0: LagrangianFrame, tol: float = DEFECT_TOL) -> int:
    """Numerical ``dim(L  intersect  L0)``: nullity of the stacked orthonormal frames."""
    if L.space != L0.space:
        raise FieldMismatchError("L and L0 must live in the same space")
    s = np.linalg.svd(np.hstack([L.orthonormal(), L0.orthonormal()]), compute_uv=False)
    return int(np.sum(s < tol))
