"""Closed half-spaces containing the origin and their reflections.

Two representations are used:

* :class:`HalfSpace` is the general continuum object ``{x : n.x <= c}`` with
  unit normal ``n`` and offset ``c >= 0`` (so the origin always belongs to
  it), together with the reflection ``sigma(x) = x - 2 (n.x - c) n``.
* :class:`AlignedHalfSpace` is the grid-exact special case: an axis-aligned
  half-space whose boundary lies exactly on a cell boundary.  Its reflection
  permutes cell centers, which is what makes polarization an exact cell
  operation.

The boundary of an aligned half-space never passes through a cell interior
(cell counts are even and offsets are whole numbers of cells), so every cell
is strictly inside either the half-space or its complement.
"""

from __future__ import annotations

import dataclasses
import itertools

import numpy as np

from .grid import GridError, GridSpec

__all__ = ["HalfSpace", "AlignedHalfSpace", "HalfSpaceSchedule"]


@dataclasses.dataclass(frozen=True)
class HalfSpace:
    """Closed half-space ``{x : normal . x <= offset}`` with ``offset >= 0``."""

    normal: tuple[float, ...]
    offset: float

    def __post_init__(self) -> None:
        n = np.asarray(self.normal, dtype=float)
        if abs(float(np.linalg.norm(n)) - 1.0) > 1e-15 * max(1.0, n.size):
            raise ValueError(f"normal must be a unit vector, got norm {np.linalg.norm(n)}")
        if self.offset < 0:
            raise ValueError(f"offset must be >= 0 so the origin is inside, got {self.offset}")
        object.__setattr__(self, "normal", tuple(float(x) for x in n))

    @property
    def dim(self) -> int:
        return len(self.normal)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x @ np.asarray(self.normal) <= self.offset

    def reflect(self, x) -> np.ndarray:
        """Reflection across the boundary hyperplane; an involution."""
        x = np.asarray(x, dtype=float)
        n = np.asarray(self.normal)
        return x - 2.0 * (x @ n - self.offset)[..., None] * n if x.ndim > 1 else x - 2.0 * (x @ n - self.offset) * n


@dataclasses.dataclass(frozen=True)
class AlignedHalfSpace:
    """Axis-aligned half-space with its boundary on a grid cell boundary.

    ``orientation=+1`` gives ``{x : x[axis] <= offset_cells * h}`` and
    ``orientation=-1`` gives ``{x : x[axis] >= -offset_cells * h}``; both
    contain the origin because ``offset_cells >= 0``.
    """

    axis: int
    offset_cells: int
    orientation: int

    def __post_init__(self) -> None:
        if self.axis < 0:
            raise ValueError("axis must be nonnegative")
        if self.offset_cells < 0:
            raise ValueError("offset_cells must be >= 0")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")

    def validate(self, spec: GridSpec) -> None:
        if self.axis >= spec.dim:
            raise GridError(f"axis {self.axis} out of range for dim {spec.dim}")
        if self.offset_cells >= spec.cells_per_axis // 2:
            raise GridError(
                f"offset_cells {self.offset_cells} places the boundary outside the grid"
            )

    def offset(self, spec: GridSpec) -> float:
        return self.offset_cells * spec.h

    def as_halfspace(self, spec: GridSpec) -> HalfSpace:
        n = [0.0] * spec.dim
        n[self.axis] = 1.0 if self.orientation == 1 else -1.0
        return HalfSpace(tuple(n), self.offset(spec))

    # -- exact cell-index maps along the axis -------------------------------

    def partner_index(self, spec: GridSpec) -> np.ndarray:
        """Reflected cell index along the axis; may fall outside ``[0, M)``."""
        self.validate(spec)
        m = spec.cells_per_axis
        i = np.arange(m)
        if self.orientation == 1:
            return 2 * self.offset_cells + m - 1 - i
        return m - 2 * self.offset_cells - 1 - i

    def side_mask(self, spec: GridSpec) -> np.ndarray:
        """Boolean mask along the axis: True where the cell lies inside H."""
        self.validate(spec)
        m = spec.cells_per_axis
        i = np.arange(m)
        if self.orientation == 1:
            return i < m // 2 + self.offset_cells
        return i >= m // 2 - self.offset_cells

    def deep_mask(self, spec: GridSpec) -> np.ndarray:
        """H-side cells (along the axis) whose reflection leaves the grid."""
        partner = self.partner_index(spec)
        return self.side_mask(spec) & ((partner < 0) | (partner >= spec.cells_per_axis))

    @staticmethod
    def from_halfspace(hs: HalfSpace, spec: GridSpec, *, tol: float = 1e-12) -> "AlignedHalfSpace":
        """Snap a continuum half-space to the grid; raises if not axis-aligned."""
        n = np.asarray(hs.normal)
        axis = int(np.argmax(np.abs(n)))
        if abs(abs(n[axis]) - 1.0) > tol:
            raise GridError("half-space is not axis-aligned")
        orientation = 1 if n[axis] > 0 else -1
        cells = hs.offset / spec.h
        if abs(cells - round(cells)) > 1e-9:
            raise GridError("half-space boundary does not lie on a cell boundary")
        return AlignedHalfSpace(axis, int(round(cells)), orientation)


class HalfSpaceSchedule:
    """Deterministic, seeded enumeration of grid-aligned half-spaces.

    Every admissible aligned half-space appears infinitely often: the full
    finite list (axes x orientations x offsets) is shuffled per epoch with a
    seeded generator and replayed forever.  Zero-offset half-spaces are
    emitted only with orientation +1, which keeps the Schwarz rearrangement
    (lexicographic tie rule) a fixed point of every emitted polarization.
    """

    def __init__(self, spec: GridSpec, seed: int = 0, *, max_offset_cells: int | None = None):
        self.spec = spec
        self.seed = int(seed)
        limit = spec.cells_per_axis // 2 - 1
        if max_offset_cells is not None:
            limit = min(limit, max_offset_cells)
        items = []
        for axis, off in itertools.product(range(spec.dim), range(limit + 1)):
            items.append(AlignedHalfSpace(axis, off, 1))
            if off > 0:
                items.append(AlignedHalfSpace(axis, off, -1))
        self._items = items

    def __iter__(self):
        rng = np.random.default_rng(self.seed)
        while True:
            for k in rng.permutation(len(self._items)):
                yield self._items[int(k)]

    def take(self, n: int) -> list[AlignedHalfSpace]:
        return list(itertools.islice(iter(self), n))
