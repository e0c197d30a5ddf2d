"""Cell-pair integrals of power kernels ``|x - y|^(-dim - alpha)``.

For two grid cells the double integral of the kernel depends only on the cell
offset vector, so a full pair table costs ``O(M^dim)`` memory.  In 1D the
integrals have closed forms built from the second antiderivative of
``t^(-1-alpha)``; in 2D they are computed from the correlation reduction

    J(d) = int |z|^(-2-alpha) T(z1 - d1 h) T(z2 - d2 h) dz,

with ``T`` the width-``h`` triangle (cell autocorrelation), by composite
Gauss-Legendre quadrature with dyadic refinement toward the singularity for
touching offsets.

Divergent entries are marked, not approximated: the diagonal always diverges,
1D touching cells diverge for ``alpha >= 1``, 2D edge neighbours for
``alpha >= 1`` and 2D corner neighbours for ``alpha >= 2``.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .grid import GridSpec

__all__ = [
    "second_antiderivative",
    "interval_pair_integral",
    "KernelTable1D",
    "KernelTable2D",
    "kernel_table",
    "WeightTable",
    "weight_table",
    "gauss_rectangle",
]

_TABLE_CACHE: dict = {}


def second_antiderivative(t, alpha: float):
    """``A`` with ``A'' (t) = t^(-1-alpha)``, on ``t > 0`` (branches at 0 and 1)."""
    t = np.asarray(t, dtype=float)
    if alpha == 1.0:
        with np.errstate(divide="ignore"):
            return -np.log(t)
    if alpha == 0.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(t == 0.0, 0.0, t * np.log(t) - t)
    with np.errstate(divide="ignore"):
        return t ** (1.0 - alpha) / (alpha * (alpha - 1.0))


def interval_pair_integral(a: float, b: float, c: float, d: float, alpha: float) -> float:
    """Exact ``int_a^b int_c^d |x-y|^(-1-alpha) dy dx`` for ``c >= b``.

    Returns ``inf`` when the intervals touch (``c == b``) and the integral
    diverges (``alpha >= 1``).
    """
    if not (b > a and d > c and c >= b):
        raise ValueError("need a < b <= c < d")
    if c == b and alpha >= 1.0:
        return math.inf
    A = lambda t: second_antiderivative(t, alpha)
    val = float(A(d - a) - A(d - b) - A(c - a) + A(c - b))
    return max(val, 0.0)


@dataclasses.dataclass(frozen=True)
class KernelTable1D:
    """Per-offset kernel integrals ``J[d]`` for 1D cells of width ``h``.

    ``J[d]`` is the double integral over two cells ``d`` apart; ``finite[d]``
    flags usable entries (``J[0]`` and, for ``alpha >= 1``, ``J[1]`` diverge).
    ``cum1[n] = sum_{d<=n} J[d]`` over finite entries supports run-block sums.
    """

    alpha: float
    h: float
    J: np.ndarray
    finite: np.ndarray

    @property
    def touching_divergent(self) -> bool:
        return bool(not self.finite[1]) if self.J.size > 1 else True

    def block_sum(self, a0: int, a1: int, b0: int, b1: int) -> float:
        """``sum_{i in [a0,a1), j in [b0,b1)} J[|i-j|]`` for disjoint blocks.

        The blocks must satisfy ``b0 >= a1`` (caller orders them) and must not
        touch a divergent offset unless that offset has zero pair count.
        """
        la, lb = a1 - a0, b1 - b0
        dmin, dmax = b0 - a1 + 1, b1 - a0 - 1
        d = np.arange(dmin, dmax + 1)
        counts = np.minimum.reduce([d - dmin + 1, dmax - d + 1, np.full(d.shape, la), np.full(d.shape, lb)])
        vals = self.J[d]
        if np.any(~self.finite[d] & (counts > 0)):
            return math.inf
        return float(np.sum(counts * vals))


def _build_table_1d(m: int, h: float, alpha: float) -> KernelTable1D:
    d = np.arange(m, dtype=float)
    A = lambda t: second_antiderivative(t, alpha)
    with np.errstate(invalid="ignore", divide="ignore"):
        J = A((d + 1.0) * h) - 2.0 * A(d * h) + A((d - 1.0) * h)
    finite = np.ones(m, dtype=bool)
    finite[0] = False
    if alpha >= 1.0 and m > 1:
        finite[1] = False
    J = np.where(finite, np.maximum(J, 0.0), math.inf)
    return KernelTable1D(alpha, h, J, finite)


# ---------------------------------------------------------------------------
# 2D quadrature
# ---------------------------------------------------------------------------

_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _GAUSS_CACHE:
        _GAUSS_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GAUSS_CACHE[order]


def gauss_rectangle(f, x0, x1, y0, y1, order: int = 20) -> float:
    """Tensor Gauss-Legendre integral of ``f(X, Y)`` over a rectangle."""
    if x1 <= x0 or y1 <= y0:
        return 0.0
    xs, wx = _gauss(order)
    mx, rx = 0.5 * (x0 + x1), 0.5 * (x1 - x0)
    my, ry = 0.5 * (y0 + y1), 0.5 * (y1 - y0)
    X = mx + rx * xs
    Y = my + ry * xs
    W = np.outer(wx, wx)
    return float(rx * ry * np.sum(W * f(X[:, None], Y[None, :])))


def _gauss_with_cuts(f, x0, x1, y0, y1, xcuts, ycuts, order: int) -> float:
    """Gauss integration after subdividing at interior kink lines."""
    xs = [x0] + [c for c in sorted(xcuts) if x0 < c < x1] + [x1]
    ys = [y0] + [c for c in sorted(ycuts) if y0 < c < y1] + [y1]
    total = 0.0
    for a, b in zip(xs[:-1], xs[1:]):
        for c, d in zip(ys[:-1], ys[1:]):
            total += gauss_rectangle(f, a, b, c, d, order)
    return total


def _triangle(z: np.ndarray, center: float, h: float) -> np.ndarray:
    return np.maximum(0.0, h - np.abs(z - center))


def _correlation_integrand(alpha: float, c1: float, c2: float, h: float):
    def f(z1, z2):
        r2 = z1 * z1 + z2 * z2
        return r2 ** (-(2.0 + alpha) / 2.0) * _triangle(z1, c1, h) * _triangle(z2, c2, h)

    return f


def _offset_integral_2d(d1: int, d2: int, h: float, alpha: float, order: int = 20) -> float:
    """``J`` for one 2D offset (both components nonnegative, not both zero)."""
    c1, c2 = d1 * h, d2 * h
    f = _correlation_integrand(alpha, c1, c2, h)
    x0, x1 = c1 - h, c1 + h
    y0, y1 = c2 - h, c2 + h
    cuts1 = (c1 - h, c1, c1 + h)
    cuts2 = (c2 - h, c2, c2 + h)
    if d1 >= 2 or d2 >= 2:
        # singularity outside the support box: plain subdivided Gauss
        return _gauss_with_cuts(f, x0, x1, y0, y1, cuts1, cuts2, order)

    # touching offsets: peel dyadic rings around the origin (the support box
    # lies inside max|z| <= 2h), then extrapolate the geometric tail
    total = 0.0
    rho = 2.0 * h
    pieces: list[float] = []
    for _ in range(48):
        inner = rho / 2.0
        piece = _ring_part(f, x0, x1, y0, y1, inner, rho, cuts1, cuts2, order)
        total += piece
        pieces.append(piece)
        rho = inner
        if piece <= 1e-15 * max(total, 1e-300):
            return total
    ratio = pieces[-1] / pieces[-2] if pieces[-2] > 0 else 0.0
    if 0.0 < ratio < 0.999:
        total += pieces[-1] * ratio / (1.0 - ratio)
    return total


def _ring_part(f, x0, x1, y0, y1, rin, rout, cuts1, cuts2, order) -> float:
    """Integral over the box intersected with ``rin < max(|z1|,|z2|) <= rout``."""
    total = 0.0
    big = _clip_rect(x0, x1, y0, y1, -rout, rout, -rout, rout)
    if big is None:
        return 0.0
    bx0, bx1, by0, by1 = big
    # big box minus inner square, as four strips
    strips = [
        (bx0, bx1, max(by0, rin), by1),              # top
        (bx0, bx1, by0, min(by1, -rin)),             # bottom
        (bx0, min(bx1, -rin), max(by0, -rin), min(by1, rin)),  # left middle
        (max(bx0, rin), bx1, max(by0, -rin), min(by1, rin)),   # right middle
    ]
    for sx0, sx1, sy0, sy1 in strips:
        if sx1 > sx0 and sy1 > sy0:
            total += _gauss_with_cuts(f, sx0, sx1, sy0, sy1, cuts1, cuts2, order)
    return total


def _clip_rect(x0, x1, y0, y1, cx0, cx1, cy0, cy1):
    a, b = max(x0, cx0), min(x1, cx1)
    c, d = max(y0, cy0), min(y1, cy1)
    if b <= a or d <= c:
        return None
    return a, b, c, d


@dataclasses.dataclass(frozen=True)
class KernelTable2D:
    """Per-offset kernel integrals ``J[|d1|, |d2|]`` for 2D cells.

    Entries are symmetric in the two offset components and in their signs.
    ``finite`` flags the usable entries per the divergence rules.
    """

    alpha: float
    h: float
    J: np.ndarray
    finite: np.ndarray


def _build_table_2d(m: int, h: float, alpha: float, order: int = 20) -> KernelTable2D:
    J = np.zeros((m, m))
    for d1 in range(m):
        for d2 in range(d1, m):
            if d1 == 0 and d2 == 0:
                continue
            val = _offset_integral_2d(d1, d2, h, alpha, order)
            J[d1, d2] = J[d2, d1] = val
    finite = np.ones((m, m), dtype=bool)
    finite[0, 0] = False
    J[0, 0] = math.inf
    if alpha >= 1.0:
        for a, b in ((0, 1), (1, 0)):
            if m > 1:
                finite[a, b] = False
                J[a, b] = math.inf
    if alpha >= 2.0 and m > 1:
        finite[1, 1] = False
        J[1, 1] = math.inf
    return KernelTable2D(alpha, h, J, finite)


def kernel_table(spec: GridSpec, alpha: float):
    """Cached pair-kernel table for ``|x-y|^(-dim-alpha)`` on ``spec``."""
    key = (spec.dim, spec.cells_per_axis, spec.half_width, float(alpha))
    if key not in _TABLE_CACHE:
        if spec.dim == 1:
            _TABLE_CACHE[key] = _build_table_1d(spec.cells_per_axis, spec.h, alpha)
        else:
            _TABLE_CACHE[key] = _build_table_2d(spec.cells_per_axis, spec.h, alpha)
    return _TABLE_CACHE[key]


# ---------------------------------------------------------------------------
# Bounded radial weights (for the Young-function two-point functional)
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class WeightTable:
    """Per-offset integrals of a bounded non-increasing radial weight.

    Uses subcell midpoint quadrature with ``refine`` subcells per axis.  The
    quadrature evaluates the weight at reflected-consistent offsets, so the
    pointwise monotonicity ``W(x, y) >= W(sigma x, y)`` for cells on the same
    side of a half-space survives discretization exactly.
    """

    W: np.ndarray
    h: float
    refine: int


def weight_table(spec: GridSpec, w, refine: int = 4) -> WeightTable:
    m, h, q = spec.cells_per_axis, spec.h, refine
    k = np.arange(-(q - 1), q)
    cnt = (q - np.abs(k)).astype(float)
    sub = h / q
    if spec.dim == 1:
        d = np.arange(m, dtype=float)[:, None]
        dist = np.abs(d * h + k[None, :] * sub)
        W = np.sum(cnt[None, :] * w(dist), axis=1) * sub * sub
    else:
        d = np.arange(m, dtype=float)
        z1 = d[:, None, None, None] * h + k[None, None, :, None] * sub
        z2 = d[None, :, None, None] * h + k[None, None, None, :] * sub
        dist = np.sqrt(z1 * z1 + z2 * z2)
        cc = cnt[:, None] * cnt[None, :]
        W = np.sum(cc[None, None, :, :] * w(dist), axis=(2, 3)) * sub**2 * sub**2
    return WeightTable(W, h, q)
