"""Polarization (two-point rearrangement) and Schwarz symmetrization.

Polarization with respect to a closed half-space H keeps, for every
reflection pair of points, the larger value on the H side and the smaller on
the other side.  On a grid it is an exact permutation-with-comparison of cell
values whenever H is grid-aligned, which preserves the value multiset and
hence every L^p norm and the distribution function.

Cells whose reflection falls outside the grid pair against the exterior value
zero.  The larger of ``(value, 0)`` must stay on the H side, so such cells
must carry nonnegative values; a negative value there would have to move
outside the representable domain and is rejected.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .grid import GridError, GridFunction, lp_norm, radial_order
from .halfspaces import AlignedHalfSpace, HalfSpace, HalfSpaceSchedule

__all__ = [
    "polarize",
    "polarize_general",
    "CellPartition",
    "polarization_partition",
    "schwarz_rearrange",
    "iterate_polarization",
    "contraction_check",
]


def _axis_last(values: np.ndarray, axis: int) -> np.ndarray:
    return np.swapaxes(values, axis, -1)


def polarize(u: GridFunction, hs: AlignedHalfSpace) -> GridFunction:
    """Two-point rearrangement of ``u`` with respect to an aligned half-space."""
    hs.validate(u.spec)
    m = u.spec.cells_per_axis
    partner = hs.partner_index(u.spec)
    side = hs.side_mask(u.spec)
    inside = (partner >= 0) & (partner < m)
    deep = side & ~inside

    v = _axis_last(u.values, hs.axis).copy()
    if np.any(deep):
        if np.any(v[..., deep] < 0):
            raise GridError(
                "polarization would move a negative value outside the grid; "
                "enlarge the domain or use a smaller half-space offset"
            )
        # max(value, 0) = value for the checked cells: nothing to do
    idx = np.nonzero(side & inside)[0]
    par = partner[idx]
    a, b = v[..., idx], v[..., par]
    v[..., idx] = np.maximum(a, b)
    v[..., par] = np.minimum(a, b)
    return u.with_values(_axis_last(v, hs.axis))


def polarize_general(u: GridFunction, hs: HalfSpace) -> tuple[GridFunction, bool]:
    """Polarization for an arbitrary half-space via nearest-cell resampling.

    Returns ``(result, approximate)``.  When ``hs`` snaps exactly onto the
    grid the exact path is used and ``approximate`` is False; otherwise the
    reflected values are looked up at nearest cell centers, which breaks the
    exact multiset invariants and is excluded from the exact-identity tests.
    """
    try:
        aligned = AlignedHalfSpace.from_halfspace(hs, u.spec)
    except GridError:
        aligned = None
    if aligned is not None:
        return polarize(u, aligned), False

    spec = u.spec
    coords = np.stack([c.ravel() for c in spec.center_coords()], axis=-1)
    reflected = hs.reflect(coords)
    idx = np.round((reflected + spec.half_width) / spec.h - 0.5).astype(int)
    in_grid = np.all((idx >= 0) & (idx < spec.cells_per_axis), axis=-1)
    flat = u.flat()
    mirror = np.zeros_like(flat)
    lin = idx[in_grid, 0] if spec.dim == 1 else idx[in_grid, 0] * spec.cells_per_axis + idx[in_grid, 1]
    mirror[in_grid] = flat[lin]
    side = hs.contains(coords)
    out = np.where(side, np.maximum(flat, mirror), np.minimum(flat, mirror))
    return u.with_values(out.reshape(spec.shape)), True


@dataclasses.dataclass(frozen=True)
class CellPartition:
    """Flat cell-index partition induced by a half-space and a function.

    ``swap_h`` holds the H-side cells whose value is <= the reflected value
    (ties included; polarization replaces their value), ``keep_h`` the H-side
    cells that already dominate.  ``swap_c`` and ``keep_c`` are their exact
    reflections on the complement side.  ``fixed`` holds the H-side cells
    whose reflection leaves the grid; both paired values are zero there, so
    no operation ever moves them.
    """

    swap_h: np.ndarray
    keep_h: np.ndarray
    swap_c: np.ndarray
    keep_c: np.ndarray
    fixed: np.ndarray
    partner: np.ndarray  # flat partner index, -1 where the partner is off-grid

    def sets(self) -> dict[str, np.ndarray]:
        return {
            "swap_h": self.swap_h,
            "keep_h": self.keep_h,
            "swap_c": self.swap_c,
            "keep_c": self.keep_c,
            "fixed": self.fixed,
        }


def polarization_partition(u: GridFunction, hs: AlignedHalfSpace) -> CellPartition:
    """Exact cell partition behind the polarization identities.

    Requires ``u`` to vanish on cells whose reflection leaves the grid (both
    members of such a pair are then zero); this is what keeps the restricted
    energy identities exact at cell level.
    """
    hs.validate(u.spec)
    spec = u.spec
    m = spec.cells_per_axis
    partner = hs.partner_index(spec)
    side = hs.side_mask(spec)
    inside = (partner >= 0) & (partner < m)

    if spec.dim == 1:
        axis_index = np.arange(m)
        flat_partner = np.where(inside[axis_index], partner[axis_index], -1)
        side_full = side
        deep_full = side & ~inside
        values = u.values
        mirror = np.where(flat_partner >= 0, u.values[np.clip(flat_partner, 0, m - 1)], 0.0)
    else:
        ax = hs.axis
        ii = np.indices(spec.shape)
        along = ii[ax]
        p_along = partner[along]
        ok = inside[along]
        other = ii[1 - ax]
        flat_partner = np.where(ok, (p_along * m + other) if ax == 0 else (other * m + p_along), -1).ravel()
        side_full = side[along].ravel()
        deep_full = (side & ~inside)[along].ravel()
        values = u.flat()
        mirror = np.where(flat_partner >= 0, u.flat()[np.clip(flat_partner, 0, values.size - 1)], 0.0)

    values = np.ravel(values)
    mirror = np.ravel(mirror)
    side_full = np.ravel(side_full)
    deep_full = np.ravel(deep_full)

    if np.any(values[deep_full] != 0.0):
        raise GridError(
            "partition requires u == 0 on cells whose reflection leaves the grid"
        )

    paired_h = side_full & ~deep_full
    swap_h = np.nonzero(paired_h & (values <= mirror))[0]
    keep_h = np.nonzero(paired_h & (values > mirror))[0]
    swap_c = flat_partner[swap_h]
    keep_c = flat_partner[keep_h]
    fixed = np.nonzero(deep_full)[0]
    return CellPartition(swap_h, keep_h, swap_c, keep_c, fixed, flat_partner)


def schwarz_rearrange(u: GridFunction, *, warn_signed: bool = False) -> GridFunction:
    """Schwarz (radially decreasing) rearrangement of ``|u|`` on the grid.

    Sorts cell values in decreasing order and lays them out along the
    (center distance, lexicographic) order.  The result is equimeasurable
    with ``|u|`` and radially decreasing in the total-order sense.
    """
    a = np.abs(u.flat()) if np.any(u.values < 0) else u.flat()
    order = radial_order(u.spec)
    out = np.empty_like(a)
    out[order] = np.sort(a)[::-1]
    return u.with_values(out.reshape(u.spec.shape))


def iterate_polarization(
    u0: GridFunction,
    schedule: HalfSpaceSchedule,
    n_steps: int,
    *,
    p: float = 2.0,
    track_error: bool = True,
):
    """Iterated polarization ``u_{n+1} = u_n`` polarized by ``H_1 .. H_{n+1}``.

    Step ``n`` re-applies the first ``n+1`` half-spaces of the schedule in
    order (the compounding scheme under which iterates converge to the
    Schwarz rearrangement).  Returns ``(iterates, errors)`` where ``errors``
    lists ``||u_n - u*||_p`` per step when tracking is on, else None.
    """
    halfspaces = schedule.take(n_steps)
    target = schwarz_rearrange(u0) if track_error else None
    iterates = [u0]
    errors = [l_err(u0, target, p)] if track_error else None
    current = u0
    for n in range(n_steps):
        for hs in halfspaces[: n + 1]:
            current = polarize(current, hs)
        iterates.append(current)
        if track_error:
            errors.append(l_err(current, target, p))
    return iterates, errors


def l_err(u: GridFunction, v: GridFunction | None, p: float) -> float:
    if v is None:
        return float("nan")
    return lp_norm(u.with_values(u.values - v.values), p)


def contraction_check(
    u: GridFunction, v: GridFunction, hs: AlignedHalfSpace, p: float
) -> dict:
    """L^p nonexpansiveness of polarization: ``||u^H - v^H||_p <= ||u - v||_p``."""
    if u.spec != v.spec:
        raise GridError("contraction_check requires a shared grid")
    lhs = l_err(polarize(u, hs), polarize(v, hs), p)
    rhs = l_err(u, v, p)
    return {"lhs": lhs, "rhs": rhs}
