"""The step-and-ramp profile whose threshold energy grows under polarization.

The 1D profile takes the value ``delta`` left of ``-1``, descends linearly to
``-2 eps delta`` across a ramp of width ``delta``, then sits at ``-2 eps
delta``, ``-eps delta`` and ``delta - eps delta`` on the unit intervals up to
``2``, and vanishes outside ``(-2, 2)``.  Its jumps at ``-2`` and ``1`` equal
``delta`` exactly, so they do not activate the strict threshold and the
energy is finite; polarizing with respect to ``[0, inf)`` moves the largest
plateau next to the negative one and strictly increases the energy for small
``delta`` and ``eps``.

Floating point is handled explicitly: the designed equal-to-threshold jumps
are verified on the stored values and nudged by ulps when rounding would
otherwise tip them over the threshold.  Grid samples and the analytic oracle
share one piece list, so both sides see identical values.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .grid import GridError, GridFunction, GridSpec
from .oracle import Piece, PiecewiseLinear, threshold_energy_exact
from .oracle import _integrate_over_rect  # kernel integral without indicator

__all__ = [
    "CounterexampleSpec",
    "raw_pieces",
    "polarized_pieces",
    "build_grid_spec",
    "sample_pieces",
    "build_profile_1d",
    "build_profile_2d",
    "polarized_reference_intervals",
    "oracle_energy",
    "gain_term",
    "ramp_loss_term",
    "far_loss_term",
]


@dataclasses.dataclass(frozen=True)
class CounterexampleSpec:
    """Parameters of the counterexample profile and its discretization."""

    delta: float
    epsilon: float
    p: float = 2.0
    dim: int = 1
    cells_per_delta: int = 8
    half_width: float = 3.0

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon < 0.125:
            raise ValueError(f"epsilon must lie in (0, 1/8), got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if self.half_width < 3.0:
            raise ValueError("half_width must be at least 3")
        if self.cells_per_delta < 1:
            raise ValueError("cells_per_delta must be positive")


def _nudge_jump_down(a: float, b: float, delta: float) -> float:
    """Return ``b`` adjusted by ulps so that ``|a - b|`` is at most ``delta``.

    Used where the designed jump equals the threshold exactly: rounding in
    the construction of ``a`` and ``b`` must not tip the strict comparison.
    """
    for _ in range(4):
        if abs(a - b) <= delta:
            return b
        b = math.nextafter(b, a)
    raise AssertionError("could not realize an at-threshold jump in floats")


def raw_pieces(spec: CounterexampleSpec) -> PiecewiseLinear:
    """Exact piece list of the 1D profile on ``[-L, L]``."""
    d, e, L = spec.delta, spec.epsilon, spec.half_width
    v_left = d
    v_mid = -2.0 * e * d
    v_neg = -(e * d)
    v_right = d - e * d
    # the jump at 1 must not exceed the threshold after rounding
    v_right = _nudge_jump_down(v_neg, v_right, d)
    slope = (v_mid - v_left) / d
    return PiecewiseLinear.from_list(
        [
            Piece(-L, -2.0, 0.0, 0.0),
            Piece(-2.0, -1.0, 0.0, v_left),
            Piece(-1.0, -1.0 + d, slope, v_left + slope),  # value v_left at x = -1
            Piece(-1.0 + d, 0.0, 0.0, v_mid),
            Piece(0.0, 1.0, 0.0, v_neg),
            Piece(1.0, 2.0, 0.0, v_right),
            Piece(2.0, L, 0.0, 0.0),
        ]
    )


def polarized_pieces(spec: CounterexampleSpec) -> PiecewiseLinear:
    """Exact piece list of the polarization w.r.t. ``[0, inf)`` of the profile.

    Derived from the pairwise max/min structure: the plateaus swap across the
    origin, the original ramp keeps only its tail below ``-eps delta``, and a
    mirrored ramp appears just left of ``1``.
    """
    d, e, L = spec.delta, spec.epsilon, spec.half_width
    raw = raw_pieces(spec)
    v_left = raw.pieces[1].intercept
    ramp = raw.pieces[2]
    v_mid = raw.pieces[3].intercept
    v_neg = raw.pieces[4].intercept
    v_right = raw.pieces[5].intercept
    # crossover where the ramp passes the value -eps delta
    t_star = (v_left - v_neg) / (v_left - v_mid)
    x_star = -1.0 + t_star * d
    return PiecewiseLinear.from_list(
        [
            Piece(-L, -2.0, 0.0, 0.0),
            Piece(-2.0, -1.0, 0.0, v_right),
            Piece(-1.0, x_star, 0.0, v_neg),
            Piece(x_star, -1.0 + d, ramp.slope, ramp.intercept),
            Piece(-1.0 + d, 0.0, 0.0, v_mid),
            Piece(0.0, 1.0 - t_star * d, 0.0, v_neg),
            Piece(1.0 - t_star * d, 1.0, -ramp.slope, v_left + ramp.slope),  # r(-x)
            Piece(1.0, 2.0, 0.0, v_left),
            Piece(2.0, L, 0.0, 0.0),
        ]
    )


def polarized_reference_intervals(spec: CounterexampleSpec) -> list[tuple[float, float, float]]:
    """The constant intervals of the polarized profile with their values.

    Only the plateaus (the intervals with an explicit constant value) are
    listed; the two ramp segments between them are omitted, matching the
    reference description of the polarized function.
    """
    pol = polarized_pieces(spec)
    return [(pc.lo, pc.hi, pc.intercept) for pc in pol.pieces if pc.is_const]


# ---------------------------------------------------------------------------
# Grid sampling
# ---------------------------------------------------------------------------


def build_grid_spec(spec: CounterexampleSpec) -> GridSpec:
    """Grid aligned with every breakpoint of the profile.

    The cell width is ``delta / cells_per_delta``; the cell count is rounded
    so that ``-2, -1, -1 + delta, 0, 1, 2`` all land on cell boundaries
    within alignment tolerance.
    """
    d, L = spec.delta, spec.half_width
    h = d / spec.cells_per_delta
    m = round(2.0 * L / h)
    if m % 2:
        m += 1
    gspec = GridSpec(spec.dim, L, m)
    for x in (-2.0, -1.0, -1.0 + d, 0.0, 1.0, 2.0):
        gspec.boundary_index(x)  # raises GridError when misaligned
    return gspec


def sample_pieces(gspec: GridSpec, f: PiecewiseLinear) -> GridFunction:
    """Midpoint samples of a piecewise-linear profile (1D grids)."""
    if gspec.dim != 1:
        raise GridError("sample_pieces is 1D")
    return GridFunction(gspec, f.value(gspec.axis_centers()))


def build_profile_1d(spec: CounterexampleSpec) -> GridFunction:
    return sample_pieces(build_grid_spec(spec), raw_pieces(spec))


def build_profile_2d(spec: CounterexampleSpec) -> GridFunction:
    """Product extension ``U(x1, x2) = u(x1) - delta/2`` on the sup-norm box.

    The vertical shift keeps every jump across the box edge at or below the
    threshold, so the 2D energy stays finite.
    """
    if spec.dim != 2:
        raise ValueError("build_profile_2d needs dim = 2")
    gspec = build_grid_spec(spec)
    x = gspec.axis_centers()
    line = raw_pieces(spec).value(x) - spec.delta / 2.0
    inside_1 = np.abs(x) < 2.0
    vals = np.where(inside_1[:, None] & inside_1[None, :], line[:, None], 0.0)
    return GridFunction(gspec, vals)


# ---------------------------------------------------------------------------
# Analytic oracle values
# ---------------------------------------------------------------------------


def oracle_energy(spec: CounterexampleSpec, which: str = "raw") -> float:
    """Exact threshold energy of the profile (``which`` in raw | polarized)."""
    if spec.dim != 1:
        raise ValueError("the analytic oracle is 1D")
    pieces = raw_pieces(spec) if which == "raw" else polarized_pieces(spec)
    return threshold_energy_exact(pieces, spec.p, spec.delta)


def gain_term(spec: CounterexampleSpec) -> float:
    """Kernel mass of ``(0, 1-delta) x (1, 2)`` times ``delta^p`` (the gain)."""
    d, p = spec.delta, spec.p
    rect = (0.0, 1.0 - d, 1.0, 2.0)
    return d**p * _integrate_over_rect(rect, p, [(-math.inf, math.inf)], None)


def ramp_loss_term(spec: CounterexampleSpec) -> float:
    """Active energy of ``[-1, -1+delta] x [-2, 0]`` (single orientation)."""
    return threshold_energy_exact(
        raw_pieces(spec),
        spec.p,
        spec.delta,
        x_window=(-1.0, -1.0 + spec.delta),
        y_window=(-2.0, 0.0),
        ordered_factor=False,
    )


def far_loss_term(spec: CounterexampleSpec) -> float:
    """Kernel mass of ``[-1, 0] x [1, 2]`` times ``delta^p`` (loss bound)."""
    d, p = spec.delta, spec.p
    rect = (-1.0, 0.0, 1.0, 2.0)
    return d**p * _integrate_over_rect(rect, p, [(-math.inf, math.inf)], None)


def shifted_pieces(spec: CounterexampleSpec, *, polarized: bool = False) -> PiecewiseLinear:
    """Nonnegative variant: the profile plus ``2 eps delta`` on ``|x| < 3``.

    Requires ``half_width > 3`` so the new jumps at ``|x| = 3`` are interior.
    All at-threshold jumps are re-verified after the shift.
    """
    if spec.half_width <= 3.0:
        raise ValueError("the shifted variant needs half_width > 3")
    base = polarized_pieces(spec) if polarized else raw_pieces(spec)
    lift = 2.0 * spec.epsilon * spec.delta
    d, L = spec.delta, spec.half_width
    out: list[Piece] = [Piece(-L, -3.0, 0.0, 0.0), Piece(-3.0, -2.0, 0.0, lift)]
    for pc in base.pieces:
        if pc.hi <= -2.0 or pc.lo >= 2.0:
            continue
        out.append(Piece(pc.lo, pc.hi, pc.slope, pc.intercept + lift))
    out.append(Piece(2.0, 3.0, 0.0, lift))
    out.append(Piece(3.0, L, 0.0, 0.0))
    # re-verify the designed at-threshold jumps after lifting
    fixed: list[Piece] = []
    for pc in out:
        if fixed:
            prev = fixed[-1]
            a = prev.value(prev.hi)
            b = pc.value(pc.lo)
            if pc.is_const and d < abs(a - b) < d * (1.0 + 1e-12):
                pc = Piece(pc.lo, pc.hi, pc.slope, _nudge_jump_down(a, pc.intercept, d))
        fixed.append(pc)
    return PiecewiseLinear.from_list(fixed)
