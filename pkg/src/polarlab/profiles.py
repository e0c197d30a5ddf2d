"""Analytic profile constructors sampled at cell midpoints.

These are the stock inputs used by the studies and the CLI: smooth bumps for
limit studies, indicators and power tails for decay checks, and seeded random
generators for the property suites.
"""

from __future__ import annotations

import numpy as np

from .grid import GridFunction, GridSpec

__all__ = [
    "gaussian",
    "hat",
    "indicator_interval",
    "indicator_ball",
    "power_decay",
    "cosine_bump",
    "random_piecewise",
    "random_radial_decreasing",
    "profile_by_name",
]


def _radius2(spec: GridSpec, center) -> np.ndarray:
    coords = spec.center_coords()
    c = np.zeros(spec.dim) if center is None else np.broadcast_to(np.asarray(center, float), (spec.dim,))
    return sum((x - ci) ** 2 for x, ci in zip(coords, c))


def gaussian(spec: GridSpec, *, center=None, width: float = 1.0, amplitude: float = 1.0) -> GridFunction:
    """``A exp(-|x-c|^2 / w^2)`` at cell midpoints."""
    return GridFunction(spec, amplitude * np.exp(-_radius2(spec, center) / width**2))


def hat(spec: GridSpec, *, radius: float = 1.0, amplitude: float = 1.0) -> GridFunction:
    """Piecewise-linear hat ``A max(0, 1 - |x|/R)`` (1D and 2D cones)."""
    r = np.sqrt(_radius2(spec, None))
    return GridFunction(spec, amplitude * np.maximum(0.0, 1.0 - r / radius))


def indicator_interval(spec: GridSpec, a: float, b: float, *, amplitude: float = 1.0) -> GridFunction:
    """1D indicator of ``[a, b]`` (cells whose midpoint lies inside)."""
    if spec.dim != 1:
        raise ValueError("indicator_interval is 1D only")
    (x,) = spec.center_coords()
    return GridFunction(spec, amplitude * ((x > a) & (x < b)).astype(float))


def indicator_ball(spec: GridSpec, radius: float, *, amplitude: float = 1.0) -> GridFunction:
    """Indicator of the centered ball of the given radius."""
    return GridFunction(spec, amplitude * (_radius2(spec, None) < radius**2).astype(float))


def power_decay(spec: GridSpec, beta: float, *, cutoff: float | None = None) -> GridFunction:
    """``(1 + |x|)^(-beta)``, optionally truncated to zero beyond ``cutoff``."""
    r = np.sqrt(_radius2(spec, None))
    v = (1.0 + r) ** (-beta)
    if cutoff is not None:
        v = np.where(r <= cutoff, v, 0.0)
    return GridFunction(spec, v)


def cosine_bump(spec: GridSpec, *, center=None, radius: float = 1.0, amplitude: float = 1.0) -> GridFunction:
    """Smooth compactly supported bump ``A cos^2(pi r / (2 R))`` for ``r < R``."""
    r = np.sqrt(_radius2(spec, center))
    v = np.where(r < radius, amplitude * np.cos(np.pi * r / (2.0 * radius)) ** 2, 0.0)
    return GridFunction(spec, v)


def random_piecewise(
    spec: GridSpec,
    rng: np.random.Generator,
    *,
    low: float = 0.0,
    high: float = 1.0,
    support_margin: int = 0,
    n_blocks: int | None = None,
) -> GridFunction:
    """Random piecewise-constant function, optionally zero near the walls.

    ``support_margin`` cells at each wall are forced to zero.  With
    ``n_blocks`` the interior is split into that many constant runs per axis,
    otherwise every cell is drawn independently.
    """
    m = spec.cells_per_axis
    if n_blocks is None:
        v = rng.uniform(low, high, size=spec.shape)
    else:
        edges = np.sort(rng.choice(np.arange(1, m), size=min(n_blocks - 1, m - 1), replace=False))
        block_of = np.searchsorted(edges, np.arange(m), side="right")
        if spec.dim == 1:
            v = rng.uniform(low, high, size=block_of.max() + 1)[block_of]
        else:
            vals = rng.uniform(low, high, size=(block_of.max() + 1,) * 2)
            v = vals[np.ix_(block_of, block_of)]
    if support_margin > 0:
        mask = np.zeros(spec.shape, dtype=bool)
        core = tuple(slice(support_margin, m - support_margin) for _ in range(spec.dim))
        mask[core] = True
        v = np.where(mask, v, 0.0)
    return GridFunction(spec, v)


def random_threshold_field(
    spec: GridSpec,
    rng: np.random.Generator,
    delta: float,
    *,
    cap: bool = False,
    support_margin: int = 0,
    smooth_passes: int = 4,
) -> GridFunction:
    """Random function whose neighbouring cells never differ by more than
    ``0.95 delta`` (so threshold energies at ``delta`` stay finite), while far
    pairs do exceed the threshold.

    With ``cap=True`` the magnitude is also kept below ``0.98 delta``, which
    keeps cells near the walls inert in restricted-energy identities.
    """
    v = rng.uniform(-1.0, 1.0, size=spec.shape)
    for _ in range(smooth_passes):
        acc = v.copy()
        for axis in range(spec.dim):
            acc = acc + np.roll(v, 1, axis=axis) + np.roll(v, -1, axis=axis)
        v = acc / (1 + 2 * spec.dim)
    if support_margin > 0:
        m = spec.cells_per_axis
        i = np.arange(m, dtype=float)
        # zero on the margin cells, then a 4-cell linear taper up to 1
        inner = np.minimum(i - (support_margin - 1), (m - support_margin) - i)
        w = np.clip(inner / 4.0, 0.0, 1.0)
        v = v * (w[:, None] * w[None, :] if spec.dim == 2 else w)
    maxdiff = max(
        (np.max(np.abs(np.diff(v, axis=axis))) for axis in range(spec.dim)),
        default=0.0,
    )
    if maxdiff > 0:
        v = v * (0.95 * delta / maxdiff)
    if cap:
        peak = np.max(np.abs(v))
        if peak > 0.98 * delta:
            v = v * (0.98 * delta / peak)
    return GridFunction(spec, v)


def random_radial_decreasing(
    spec: GridSpec,
    rng: np.random.Generator,
    *,
    scale: float = 1.0,
    decay: float = 0.85,
) -> GridFunction:
    """Random nonnegative function, constant on rings, non-increasing outward.

    Ring values follow a random multiplicative decay so that cells at equal
    center distance share a value exactly (the strict radial notion).
    """
    d2 = spec.center_dist2_int().ravel()
    rings, inverse = np.unique(d2, return_inverse=True)
    factors = rng.uniform(decay, 1.0, size=rings.size)
    ring_vals = scale * np.cumprod(factors)
    # randomly truncate to compact support
    cut = rng.integers(rings.size // 2, rings.size + 1)
    ring_vals[cut:] = 0.0
    return GridFunction(spec, ring_vals[inverse].reshape(spec.shape))


_BUILDERS = {
    "gaussian": gaussian,
    "hat": hat,
    "indicator-interval": indicator_interval,
    "indicator-ball": indicator_ball,
    "power-decay": power_decay,
    "cosine-bump": cosine_bump,
}


def profile_by_name(name: str, spec: GridSpec, **kwargs) -> GridFunction:
    """CLI/config entry point: build a named profile with keyword parameters."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choices: {sorted(_BUILDERS)}") from None
    return builder(spec, **kwargs)
