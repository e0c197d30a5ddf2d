"""Uniform origin-centered grids and piecewise-constant functions on them.

A :class:`GridFunction` represents a real function on ``R^dim`` that is
constant on every cell of a uniform grid covering ``[-L, L]^dim`` and zero
outside.  The cell count per axis is even, so the coordinate hyperplanes
through the origin always coincide with cell boundaries; axis-aligned
reflections then act as exact cell permutations.

Because the data is piecewise constant, Lebesgue-type quantities (L^p norms,
distribution functions, Lorentz quasinorms) are computed exactly, not by
quadrature.
"""

from __future__ import annotations

import dataclasses
import functools
import json
import math

import numpy as np

__all__ = [
    "GridError",
    "GridSpec",
    "GridFunction",
    "DistributionFunction",
    "LorentzParams",
    "lp_norm",
    "distribution_function",
    "lorentz_quasinorm",
    "pointwise_decay_bound",
    "decay_bound_check",
    "discrete_gradient_energy",
    "is_radially_decreasing",
    "radial_order",
    "tail_norm_bound_check",
    "radial_pointwise_bound_check",
    "unit_ball_measure",
]


class GridError(ValueError):
    """Invalid grid construction or incompatible grid arguments."""


@dataclasses.dataclass(frozen=True)
class GridSpec:
    """Uniform grid on ``[-half_width, half_width]^dim`` with an even cell count.

    ``h`` is derived as ``2 * half_width / cells_per_axis``; the product
    ``h * cells_per_axis`` is exact at the rational level because ``h`` is
    never stored independently.
    """

    dim: int
    half_width: float
    cells_per_axis: int

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise GridError(f"dim must be 1 or 2, got {self.dim}")
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise GridError(f"half_width must be positive, got {self.half_width}")
        m = self.cells_per_axis
        if m <= 0 or m % 2 != 0:
            raise GridError(f"cells_per_axis must be positive and even, got {m}")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.cells_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells_per_axis,) * self.dim

    @property
    def n_cells(self) -> int:
        return self.cells_per_axis**self.dim

    @property
    def cell_measure(self) -> float:
        return self.h**self.dim

    def axis_centers(self) -> np.ndarray:
        """Cell-center coordinates along one axis, ascending."""
        m = self.cells_per_axis
        i = np.arange(m)
        # center_i = -L + (i + 1/2) h, written with the integer offset 2i-m+1
        # so that mirror cells get exactly opposite floats.
        return (2 * i - m + 1) * (self.half_width / m)

    def center_coords(self) -> tuple[np.ndarray, ...]:
        """Cell-center coordinate arrays, one per axis, each of grid shape."""
        c = self.axis_centers()
        if self.dim == 1:
            return (c,)
        return tuple(np.meshgrid(c, c, indexing="ij"))

    def center_dist2_int(self) -> np.ndarray:
        """Squared center distance in integer units of ``(h/2)^2``, grid shape."""
        return _center_dist2_int(self.dim, self.cells_per_axis)

    def boundary_index(self, x: float, *, tol: float = 1e-9) -> int:
        """Index ``j`` such that ``-L + j h == x``; raises if ``x`` is off-grid."""
        j = (x + self.half_width) / self.h
        ji = round(j)
        if not (0 <= ji <= self.cells_per_axis) or abs(j - ji) > tol:
            raise GridError(f"{x!r} is not a cell boundary of {self}")
        return ji


@functools.lru_cache(maxsize=64)
def _center_dist2_int(dim: int, m: int) -> np.ndarray:
    k = 2 * np.arange(m, dtype=np.int64) - m + 1
    if dim == 1:
        out = k * k
    else:
        out = (k * k)[:, None] + (k * k)[None, :]
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=64)
def _radial_order_flat(dim: int, m: int) -> np.ndarray:
    """Flat cell indices sorted by (center distance, lexicographic index)."""
    d2 = _center_dist2_int(dim, m).ravel()
    order = np.lexsort((np.arange(d2.size), d2))
    order.setflags(write=False)
    return order


def radial_order(spec: GridSpec) -> np.ndarray:
    """Flat cell indices of ``spec`` in (distance from origin, lex) order."""
    return _radial_order_flat(spec.dim, spec.cells_per_axis)


@dataclasses.dataclass(frozen=True)
class GridFunction:
    """Piecewise-constant function: one value per cell, zero outside the grid."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.spec.shape:
            raise GridError(f"values shape {v.shape} does not match grid {self.spec.shape}")
        if not np.all(np.isfinite(v)):
            raise GridError("values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.spec, values)

    @property
    def h(self) -> float:
        return self.spec.h

    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def to_json(self) -> str:
        doc = {
            "dim": self.spec.dim,
            "half_width": self.spec.half_width,
            "cells_per_axis": self.spec.cells_per_axis,
            "values": self.values.ravel(order="C").tolist(),
        }
        return json.dumps(doc)

    @staticmethod
    def from_json(text: str) -> "GridFunction":
        doc = json.loads(text)
        spec = GridSpec(int(doc["dim"]), float(doc["half_width"]), int(doc["cells_per_axis"]))
        vals = np.asarray(doc["values"], dtype=float).reshape(spec.shape, order="C")
        return GridFunction(spec, vals)


# ---------------------------------------------------------------------------
# Norms and distribution functions
# ---------------------------------------------------------------------------


def lp_norm(u: GridFunction, p: float) -> float:
    """L^p norm of ``u``; exact for piecewise-constant data."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return float((u.spec.cell_measure * np.sum(np.abs(u.values) ** p)) ** (1.0 / p))


@dataclasses.dataclass(frozen=True)
class DistributionFunction:
    """Step distribution function ``mu(t) = |{ |u| > t }|`` of a grid function.

    ``levels`` holds the distinct nonzero values of ``|u|`` in increasing
    order; ``measures[j]`` is ``mu(t)`` for ``t`` in ``[levels[j-1], levels[j])``
    (with ``levels[-1] := 0``), i.e. the measure of ``{ |u| >= levels[j] }``.
    """

    levels: np.ndarray
    measures: np.ndarray
    cell_measure: float

    def mu(self, t: float | np.ndarray) -> np.ndarray:
        """Evaluate ``mu`` at thresholds ``t >= 0`` (right-continuous step)."""
        t = np.asarray(t, dtype=float)
        # mu(t) = measure of levels strictly above t
        idx = np.searchsorted(self.levels, t, side="right")
        out = np.zeros(t.shape)
        inside = idx < self.levels.size
        out[inside] = self.measures[idx[inside]]
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DistributionFunction):
            return NotImplemented
        return (
            self.levels.shape == other.levels.shape
            and np.array_equal(self.levels, other.levels)
            and np.array_equal(self.measures, other.measures)
            and self.cell_measure == other.cell_measure
        )

    __hash__ = None  # type: ignore[assignment]


def distribution_function(u: GridFunction) -> DistributionFunction:
    """Exact distribution function of ``|u|`` (strict superlevel sets)."""
    a = np.abs(u.flat())
    levels, counts = np.unique(a, return_counts=True)
    if levels.size and levels[0] == 0.0:
        levels, counts = levels[1:], counts[1:]
    # measure of {|u| >= levels[j]} = cell_measure * sum of counts from j on
    tail = np.cumsum(counts[::-1])[::-1] if counts.size else np.zeros(0)
    return DistributionFunction(levels, u.spec.cell_measure * tail, u.spec.cell_measure)


@dataclasses.dataclass(frozen=True)
class LorentzParams:
    """Parameters (q, theta) of the Lorentz quasinorm; theta may be ``inf``."""

    q: float
    theta: float

    def __post_init__(self) -> None:
        if not self.q > 0:
            raise ValueError(f"q must be positive, got {self.q}")
        if not self.theta > 0:
            raise ValueError(f"theta must be positive or inf, got {self.theta}")


def lorentz_quasinorm(u: GridFunction, params: LorentzParams) -> float:
    """Lorentz functional of ``u``, exact over the step structure of ``mu``.

    For finite theta this is ``int_0^inf t^(theta-1) mu(t)^(theta/q) dt``; for
    theta = inf it is ``sup_t t mu(t)^(1/q)`` (attained at a level point).
    """
    dist = distribution_function(u)
    if dist.levels.size == 0:
        return 0.0
    q, theta = params.q, params.theta
    lev = np.concatenate(([0.0], dist.levels))
    if math.isinf(theta):
        return float(np.max(lev[1:] * dist.measures ** (1.0 / q)))
    # on [lev[j], lev[j+1]) mu equals measures[j]; integrate t^(theta-1) exactly
    pieces = dist.measures ** (theta / q) * (lev[1:] ** theta - lev[:-1] ** theta) / theta
    return float(np.sum(pieces))


def unit_ball_measure(dim: int) -> float:
    """Measure of the unit ball: 2 in 1D, pi in 2D."""
    return 2.0 if dim == 1 else math.pi


# ---------------------------------------------------------------------------
# Radial structure
# ---------------------------------------------------------------------------


def is_radially_decreasing(u: GridFunction, *, strict_ties: bool = False) -> bool:
    """Whether cell values are non-increasing in the radial (distance, lex) order.

    With ``strict_ties=True``, cells at exactly equal center distance must in
    addition carry equal values (the genuinely radial notion; the default
    total-order check is the one the Schwarz rearrangement satisfies by
    construction).
    """
    order = radial_order(u.spec)
    v = u.flat()[order]
    if np.any(np.diff(v) > 0):
        return False
    if strict_ties:
        d2 = u.spec.center_dist2_int().ravel()[order]
        same = np.diff(d2) == 0
        if np.any(same & (np.diff(v) != 0)):
            return False
    return True


def pointwise_decay_bound(u: GridFunction, params: LorentzParams) -> float:
    """Coefficient ``K`` in the radial decay bound ``u(x) <= K |x|^(-dim/q)``.

    Requires ``u`` nonnegative and radially decreasing.  Both the finite-theta
    and the theta = inf branch are supported; the Lorentz functional entering
    ``K`` is evaluated exactly on the step structure.
    """
    if np.any(u.values < 0):
        raise ValueError("pointwise_decay_bound requires a nonnegative function")
    if not is_radially_decreasing(u):
        raise ValueError("pointwise_decay_bound requires a radially decreasing function")
    omega = unit_ball_measure(u.spec.dim)
    q, theta = params.q, params.theta
    lor = lorentz_quasinorm(u, params)
    if math.isinf(theta):
        return float(omega ** (-1.0 / q) * lor)
    return float((theta * omega ** (-theta / q) * lor) ** (1.0 / theta))


def decay_bound_check(u: GridFunction, params: LorentzParams) -> dict:
    """Evaluate ``u(x) <= K |x|^(-dim/q)`` at every nonzero cell center.

    Returns the coefficient, the worst slack, and the violation count.  The
    check is exact (both sides are plain float arithmetic on exact data).
    """
    k = pointwise_decay_bound(u, params)
    d2 = u.spec.center_dist2_int().astype(float) * (u.spec.h / 2.0) ** 2
    r = np.sqrt(d2)
    bound = k * r ** (-u.spec.dim / params.q)
    ok = u.values <= bound
    return {
        "coefficient": k,
        "violations": int(np.sum(~ok)),
        "max_excess": float(np.max(u.values - bound)),
    }


def radial_pointwise_bound_check(u: GridFunction, p: float) -> dict:
    """Check ``u(x)^p * omega |x|^dim <= ||u||_p^p`` at every cell center.

    Valid for nonnegative radially decreasing ``u`` (exact in 1D; in 2D the
    lattice count near specific radii can genuinely violate it, so callers
    treat this as a 1D contract).
    """
    if np.any(u.values < 0):
        raise ValueError("requires a nonnegative function")
    if not is_radially_decreasing(u):
        raise ValueError("requires a radially decreasing function")
    omega = unit_ball_measure(u.spec.dim)
    norm_p = lp_norm(u, p) ** p
    d2 = u.spec.center_dist2_int().astype(float) * (u.spec.h / 2.0) ** 2
    r = np.sqrt(d2)
    lhs = u.values**p * omega * r ** u.spec.dim
    return {
        "violations": int(np.sum(lhs > norm_p)),
        "max_excess": float(np.max(lhs - norm_p)),
        "norm_p_pow": norm_p,
    }


def tail_norm_bound_check(u: GridFunction, p: float, r: float, radius: float) -> dict:
    """Both sides of the outer-region interpolation bound.

    With ``eps`` the value of ``u`` at the first cell center outside the ball
    of radius ``radius``, compares ``||u||_{L^r(out)}`` against
    ``eps^((r-p)/r) ||u||_{L^p(out)}^(p/r)``.  Requires ``p < r`` and a
    nonnegative radially decreasing ``u``; exact cell arithmetic.
    """
    if not p < r:
        raise ValueError(f"need p < r, got p={p}, r={r}")
    if np.any(u.values < 0):
        raise ValueError("requires a nonnegative function")
    if not is_radially_decreasing(u):
        raise ValueError("requires a radially decreasing function")
    order = radial_order(u.spec)
    d2 = u.spec.center_dist2_int().ravel()[order].astype(float) * (u.spec.h / 2.0) ** 2
    outside = d2 > radius * radius
    if not np.any(outside):
        raise ValueError(f"no cell centers outside radius {radius}")
    v = u.flat()[order][outside]
    eps = float(v[0])
    meas = u.spec.cell_measure
    lhs = float((meas * np.sum(v**r)) ** (1.0 / r))
    # ||u||_{L^p(out)}^{p/r} = (meas * sum v^p)^{1/r}
    rhs = float(eps ** ((r - p) / r) * (meas * np.sum(v**p)) ** (1.0 / r))
    return {"lhs": lhs, "rhs": rhs, "eps": eps}


# ---------------------------------------------------------------------------
# Discrete gradient energy
# ---------------------------------------------------------------------------


def discrete_gradient_energy(u: GridFunction, p: float) -> float:
    """``h^dim * sum |grad_h u|^p`` with forward differences, zero-extended.

    Meaningful as an approximation of ``int |grad u|^p`` when ``u``
    discretizes a Lipschitz function; that is the caller's responsibility.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    h = u.spec.h
    grads = []
    for axis in range(u.spec.dim):
        shifted = np.zeros_like(u.values)
        src = [slice(None)] * u.spec.dim
        dst = [slice(None)] * u.spec.dim
        src[axis] = slice(1, None)
        dst[axis] = slice(None, -1)
        shifted[tuple(dst)] = u.values[tuple(src)]
        grads.append((shifted - u.values) / h)
    mag2 = sum(g * g for g in grads)
    return float(u.spec.cell_measure * np.sum(mag2 ** (p / 2.0)))
