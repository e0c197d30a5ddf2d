"""Riesz fractional gradient, its energy density, and the polarization probe.

The fractional gradient of order ``s`` is the vector singular integral

    D^s u(x) = c_s * int (u(x) - u(y)) (x - y) / |x - y|^(dim + s + 1) dy,

evaluated here at cell centers.  The principal value over the evaluation
cell vanishes for the odd kernel; a first-order correction from the local
gradient estimate accounts for the within-cell variation, and the integral
over the exterior of the grid (where the function vanishes) is folded in
through the whole-space principal value, which is zero.  The normalization
``c_s`` is fixed so that the 1D Fourier symbol is ``(2 pi i xi) (2 pi
|xi|)^(s-1)``, i.e. the operator tends to ``d/dx`` as ``s -> 1``; the
spectral oracle uses the same convention, making the two routes directly
comparable.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .grid import GridError, GridFunction, GridSpec
from .halfspaces import AlignedHalfSpace
from .kernels import gauss_rectangle
from .rearrange import polarize

__all__ = [
    "FractionalGradientField",
    "convention_constant",
    "fractional_gradient",
    "fractional_gradient_spectral",
    "fractional_energy_density",
    "reflection_decomposition",
    "polarization_inequality_probe",
]

_VTABLE_CACHE: dict = {}


def convention_constant(dim: int, s: float) -> float:
    """Normalization making the operator's symbol ``(2 pi i xi)(2 pi |xi|)^(s-1)``."""
    if dim == 1:
        return s / (2.0 * math.gamma(1.0 - s) * math.sin(math.pi * s / 2.0))
    if dim == 2:
        # from int_0^inf J_1(w) w^(-1-s) dw = 2^(-1-s) Gamma((1-s)/2) / Gamma((3+s)/2)
        f1 = 2.0 * math.pi * 2.0 ** (-1.0 - s) * math.gamma((1.0 - s) / 2.0) / math.gamma((3.0 + s) / 2.0)
        return 1.0 / f1
    raise ValueError("dim must be 1 or 2")


@dataclasses.dataclass(frozen=True)
class FractionalGradientField:
    """Fractional gradient vectors at cell centers."""

    spec: GridSpec
    vectors: np.ndarray  # shape grid_shape + (dim,)
    s: float
    constant: float

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.vectors**2, axis=-1))


# ---------------------------------------------------------------------------
# Kernel moments
# ---------------------------------------------------------------------------


def _vkernel_1d(m: int, h: float, s: float) -> np.ndarray:
    """``V[d] = int_cell_at_offset_d (x - y)/|x - y|^(2+s) dy`` for d in [-(m-1), m-1].

    Closed form; odd in ``d``; ``V[0] = 0`` (principal value).
    """
    d = np.arange(1, m, dtype=float)
    hi = (d + 0.5) * h
    lo = (d - 0.5) * h
    pos = (hi ** (-s) - lo ** (-s)) / s  # negative: y right of x
    v = np.concatenate([-pos[::-1], [0.0], pos])
    return v


def _self_moment_1d(h: float, s: float) -> float:
    """``int_{-h/2}^{h/2} z^2 / |z|^(2+s) dz`` (finite for s < 1)."""
    return 2.0 * (h / 2.0) ** (1.0 - s) / (1.0 - s)


def _moment_kernel_1d(m: int, h: float, s: float) -> np.ndarray:
    """First-moment correction table ``M[t]`` for the local slope at cell ``j``.

    For a locally linear ``u`` the point-to-cell sum with midpoint values
    misses ``slope_j * int_cell (y - y_j) k(x_i - y) dy``; this odd table
    restores it (the ``t = 0`` entry is the within-cell moment).
    """
    d = np.arange(1, m, dtype=float)
    a, b = (d - 0.5) * h, (d + 0.5) * h
    # int_a^b (y - d h) y^(-1-s) dy; the same (negative) value applies on both
    # sides of the evaluation point, so the table is even
    m1 = (b ** (1.0 - s) - a ** (1.0 - s)) / (1.0 - s) + (d * h / s) * (b ** (-s) - a ** (-s))
    full = np.concatenate([m1[::-1], [_self_moment_1d(h, s)], m1])
    return full


def _vkernel_2d(m: int, h: float, s: float) -> np.ndarray:
    """Vector kernel table ``V[d1+m-1, d2+m-1, k]`` for 2D point-to-cell integrals."""
    size = 2 * m - 1
    out = np.zeros((size, size, 2))
    order = 24

    def comp(d1: int, d2: int, k: int) -> float:
        # integral over the cell centered at (d1 h, d2 h) of (-y_k) |y|^(-3-s)
        def f(y1, y2):
            r = np.sqrt(y1 * y1 + y2 * y2)
            yk = y1 if k == 0 else y2
            return -yk * r ** (-3.0 - s)

        x0, x1 = d1 * h - h / 2.0, d1 * h + h / 2.0
        y0, y1_ = d2 * h - h / 2.0, d2 * h + h / 2.0
        total = 0.0
        # 2x2 split for near cells, single panel otherwise
        nx = 2 if max(abs(d1), abs(d2)) <= 2 else 1
        xs = np.linspace(x0, x1, nx + 1)
        ys = np.linspace(y0, y1_, nx + 1)
        for a, b in zip(xs[:-1], xs[1:]):
            for c, dd in zip(ys[:-1], ys[1:]):
                total += gauss_rectangle(f, a, b, c, dd, order)
        return total

    for d1 in range(0, m):
        for d2 in range(0, m):
            if d1 == 0 and d2 == 0:
                continue
            # each component is odd in its own offset: exactly zero at 0
            v1 = 0.0 if d1 == 0 else comp(d1, d2, 0)
            v2 = 0.0 if d2 == 0 else comp(d1, d2, 1)
            # extend by the component-wise parities: V_k odd in d_k, even in the other
            for s1 in (1, -1):
                for s2 in (1, -1):
                    i, j = s1 * d1 + m - 1, s2 * d2 + m - 1
                    out[i, j, 0] = s1 * v1
                    out[i, j, 1] = s2 * v2
    return out


def _self_moment_2d(h: float, s: float) -> float:
    """``int_square z1^2 |z|^(-3-s) dz`` over the centered cell (finite for s < 1)."""
    def f(z1, z2):
        r2 = z1 * z1 + z2 * z2
        return z1 * z1 * r2 ** (-(3.0 + s) / 2.0)

    total = 0.0
    rho = h / 2.0
    pieces = []
    for _ in range(60):
        inner = rho / 2.0
        piece = 0.0
        # square ring between inner and rho, clipped to the half-cell box
        for rect in (
            (-rho, rho, inner, rho),
            (-rho, rho, -rho, -inner),
            (-rho, -inner, -inner, inner),
            (inner, rho, -inner, inner),
        ):
            x0, x1, y0, y1 = rect
            x0, x1 = max(x0, -h / 2), min(x1, h / 2)
            y0, y1 = max(y0, -h / 2), min(y1, h / 2)
            if x1 > x0 and y1 > y0:
                piece += gauss_rectangle(f, x0, x1, y0, y1, 16)
        total += piece
        pieces.append(piece)
        rho = inner
        if piece <= 1e-15 * max(total, 1e-300):
            return total
    ratio = pieces[-1] / pieces[-2] if pieces[-2] > 0 else 0.0
    if 0.0 < ratio < 0.999:
        total += pieces[-1] * ratio / (1.0 - ratio)
    return total


def _tables(spec: GridSpec, s: float):
    key = (spec.dim, spec.cells_per_axis, spec.half_width, float(s))
    if key not in _VTABLE_CACHE:
        m, h = spec.cells_per_axis, spec.h
        if spec.dim == 1:
            _VTABLE_CACHE[key] = (_vkernel_1d(m, h, s), _moment_kernel_1d(m, h, s))
        else:
            _VTABLE_CACHE[key] = (_vkernel_2d(m, h, s), _self_moment_2d(h, s))
    return _VTABLE_CACHE[key]


# ---------------------------------------------------------------------------
# Direct quadrature field
# ---------------------------------------------------------------------------


def _central_gradient(u: GridFunction) -> np.ndarray:
    """Central differences with zero extension, shape grid + (dim,)."""
    h = u.spec.h
    grads = []
    for axis in range(u.spec.dim):
        plus = np.zeros_like(u.values)
        minus = np.zeros_like(u.values)
        src = [slice(None)] * u.spec.dim
        dst = [slice(None)] * u.spec.dim
        src[axis], dst[axis] = slice(1, None), slice(None, -1)
        plus[tuple(dst)] = u.values[tuple(src)]
        src[axis], dst[axis] = slice(None, -1), slice(1, None)
        minus[tuple(dst)] = u.values[tuple(src)]
        grads.append((plus - minus) / (2.0 * h))
    return np.stack(grads, axis=-1)


def _raw_field(u: GridFunction, s: float) -> np.ndarray:
    """Unnormalized fractional gradient at cell centers (no convention constant).

    Uses the algebraic collapse: with the whole-space principal value equal to
    zero, the cell sum plus the exterior tail reduces to minus the convolution
    of ``u`` with the odd point-to-cell kernel.
    """
    vtab, moment = _tables(u.spec, s)
    g = _central_gradient(u)
    if u.spec.dim == 1:
        m = u.spec.cells_per_axis
        # field_i = sum_j u_j V[(i - j) + m - 1] + sum_j g_j M[(i - j) + m - 1]
        conv = np.convolve(u.values, vtab, mode="full")[m - 1 : 2 * m - 1]
        corr = np.convolve(g[:, 0], moment[::-1], mode="full")[m - 1 : 2 * m - 1]
        return (conv + corr)[:, None]
    m = u.spec.cells_per_axis
    size = 2 * m - 1
    n = 1
    while n < m + size:
        n *= 2
    fu = np.fft.rfft2(u.values, s=(n, n))
    out = np.empty(u.spec.shape + (2,))
    for k in range(2):
        fv = np.fft.rfft2(vtab[..., k], s=(n, n))
        conv = np.fft.irfft2(fu * fv, s=(n, n))
        out[..., k] = conv[m - 1 : 2 * m - 1, m - 1 : 2 * m - 1] + g[..., k] * c_self
    return out


def fractional_gradient(u: GridFunction, s: float) -> FractionalGradientField:
    """Fractional gradient by direct singular quadrature at cell centers.

    Inputs should discretize a Lipschitz compactly supported function;
    piecewise-constant data produces fields with cell-scale artifacts.
    """
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")
    c = convention_constant(u.spec.dim, s)
    return FractionalGradientField(u.spec, c * _raw_field(u, s), s, c)


def fractional_gradient_spectral(
    u: GridFunction, s: float, *, pad_factor: int = 8
) -> FractionalGradientField:
    """Spectral route: differentiate and convolve with the Riesz potential.

    Implements the Fourier multiplier ``(2 pi i xi)(2 pi |xi|)^(s-1)`` on a
    zero-padded periodic extension; the padding pushes the wrap-around of the
    slowly decaying potential away from the domain.  1D only; used as the
    cross-validation oracle for :func:`fractional_gradient`.
    """
    if u.spec.dim != 1:
        raise GridError("the spectral oracle is 1D")
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")
    m = u.spec.cells_per_axis
    n = pad_factor * m
    buf = np.zeros(n)
    start = (n - m) // 2
    buf[start : start + m] = u.values
    xi = np.fft.rfftfreq(n, d=u.spec.h)
    symbol = (2j * math.pi * xi) * np.where(xi > 0, (2.0 * math.pi * xi) ** (s - 1.0), 0.0)
    out = np.fft.irfft(np.fft.rfft(buf) * symbol, n=n)[start : start + m]
    return FractionalGradientField(u.spec, out[:, None], s, convention_constant(1, s))


def fractional_energy_density(u: GridFunction, s: float, p: float) -> GridFunction:
    """Per-cell ``|unnormalized fractional gradient|^p`` (no convention constant)."""
    raw = _raw_field(u, s)
    mag = np.sqrt(np.sum(raw**2, axis=-1))
    return u.with_values(mag**p)


# ---------------------------------------------------------------------------
# Reflection decomposition and the open polarization inequality probe
# ---------------------------------------------------------------------------


def _compose_reflection(u: GridFunction, hs: AlignedHalfSpace) -> GridFunction:
    """``u(sigma x)`` as a grid function; reflections leaving the grid read 0."""
    hs.validate(u.spec)
    m = u.spec.cells_per_axis
    partner = hs.partner_index(u.spec)
    ok = (partner >= 0) & (partner < m)
    idx = np.clip(partner, 0, m - 1)
    v = np.swapaxes(u.values, hs.axis, -1)
    out = np.where(ok, v[..., idx], 0.0)
    return u.with_values(np.swapaxes(out, hs.axis, -1))


def reflection_decomposition(
    u: GridFunction, hs: AlignedHalfSpace
) -> tuple[GridFunction, GridFunction]:
    """The pair ``v = u o sigma`` and ``w = u^H o sigma``.

    On the half-space side these satisfy ``u^H = v + (u - v)^+`` and
    ``w = u - (u - v)^+`` cell by cell (``u^H = max(u, v)``, ``w = min(u, v)``).
    """
    v = _compose_reflection(u, hs)
    w = _compose_reflection(polarize(u, hs), hs)
    return v, w


def polarization_inequality_probe(
    u: GridFunction, hs: AlignedHalfSpace, s: float, p: float, *, tol: float = 1e-10
) -> dict:
    """Per-cell comparison of the open two-point inequality for the density.

    Evaluates ``J(u^H) + J(w)`` against ``J(u) + J(v)`` on the half-space
    cells (``J`` the fractional energy density) and reports violations beyond
    ``tol`` relative to the local scale.  This is a numerical probe of an
    open question: the report is data, not an assertion.
    """
    uh = polarize(u, hs)
    v, w = reflection_decomposition(u, hs)
    j_u = fractional_energy_density(u, s, p).values
    j_uh = fractional_energy_density(uh, s, p).values
    j_v = fractional_energy_density(v, s, p).values
    j_w = fractional_energy_density(w, s, p).values

    side = hs.side_mask(u.spec)
    if u.spec.dim == 1:
        mask = side
    else:
        shape = [1, 1]
        shape[hs.axis] = u.spec.cells_per_axis
        mask = np.broadcast_to(side.reshape(shape), u.spec.shape)

    lhs = (j_uh + j_w)[mask]
    rhs = (j_u + j_v)[mask]
    scale = float(np.max(rhs)) if rhs.size else 0.0
    excess = lhs - rhs
    violated = excess > tol * max(scale, 1e-300)
    total_u = float(np.sum(j_u) * u.spec.cell_measure)
    split_u = float((np.sum(j_u[mask]) + np.sum(j_v[mask])) * u.spec.cell_measure)
    return {
        "cells": int(lhs.size),
        "violations": int(np.sum(violated)),
        "max_excess": float(np.max(excess)) if excess.size else 0.0,
        "scale": scale,
        "lhs_sum": float(np.sum(lhs) * u.spec.cell_measure),
        "rhs_sum": float(np.sum(rhs) * u.spec.cell_measure),
        "global_total": total_u,
        "global_split": split_u,
        "tolerance": tol,
    }
