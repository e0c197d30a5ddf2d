"""Closed-form threshold energies of 1D piecewise-linear functions.

This is the analytic oracle the grid computations are validated against: a
function given as finitely many linear pieces, with the threshold energy
evaluated by enumerating piece pairs and integrating the kernel in closed
form over the exact region where the value difference exceeds the threshold.
It shares no code with the grid pair sums.

Every piece-pair integral reduces, in the rotated coordinates
``z = x - y, t = x + y``, to

    (1/2) * int |z|^(-1-p) * len(z) dz

over finitely many z-intervals on which the section length ``len(z)`` is
linear.  Three indicator shapes occur for pieces with slopes in ``{0, +-a}``:
constant (no restriction or a per-variable cut), a cut in ``z`` (equal
slopes), and a cut in ``t`` (opposite slopes).  General unequal slopes are
not needed and are rejected.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

__all__ = ["Piece", "PiecewiseLinear", "threshold_energy_exact", "OracleDivergence"]


class OracleDivergence(ArithmeticError):
    """The exact threshold energy is infinite (active jump at touching pieces)."""


@dataclasses.dataclass(frozen=True)
class Piece:
    """Linear piece ``u(x) = slope * x + intercept`` on ``[lo, hi]``."""

    lo: float
    hi: float
    slope: float
    intercept: float

    def value(self, x: float) -> float:
        return self.slope * x + self.intercept

    @property
    def is_const(self) -> bool:
        return self.slope == 0.0


@dataclasses.dataclass(frozen=True)
class PiecewiseLinear:
    """A compactly supported piecewise-linear function given by its pieces.

    Pieces must cover the support without overlap; the function is zero
    elsewhere (callers include explicit zero pieces when the zero region
    matters, which the builders here always do).
    """

    pieces: tuple[Piece, ...]

    @staticmethod
    def from_list(items) -> "PiecewiseLinear":
        pieces = tuple(Piece(*it) if not isinstance(it, Piece) else it for it in items)
        for a, b in zip(pieces[:-1], pieces[1:]):
            if b.lo < a.hi - 1e-15:
                raise ValueError("pieces overlap")
        return PiecewiseLinear(pieces)

    def value(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for pc in self.pieces:
            mask = (x >= pc.lo) & (x < pc.hi)
            out[mask] = pc.slope * x[mask] + pc.intercept
        return out


# ---------------------------------------------------------------------------
# Primitive: int |z|^(-1-p) (a z + b) dz over [z0, z1] with 0 not inside
# ---------------------------------------------------------------------------


def _anti_k(z: float, p: float) -> float:
    """Antiderivative of ``z^(-1-p)`` on ``z > 0``."""
    if p == 0.0:
        return math.log(z)
    return z ** (-p) / (-p)


def _anti_zk(z: float, p: float) -> float:
    """Antiderivative of ``z * z^(-1-p) = z^(-p)`` on ``z > 0``."""
    if p == 1.0:
        return math.log(z)
    return z ** (1.0 - p) / (1.0 - p)


def _linear_kernel_integral(z0: float, z1: float, a: float, b: float, p: float) -> float:
    """``int_{z0}^{z1} |z|^(-1-p) (a z + b) dz`` for an interval off 0.

    ``a z + b`` is the (nonnegative) section length on the interval.  Raises
    :class:`OracleDivergence` when the interval reaches 0 with a divergent
    integrand (constant part for any p >= 0, linear part for p >= 1).
    """
    if z1 <= z0:
        return 0.0
    if z0 < 0.0 < z1:
        raise ValueError("split intervals at z = 0 first")
    if z0 < 0.0:
        # mirror to positive z: |z| = -z, dz orientation preserved
        return _linear_kernel_integral(-z1, -z0, -a, b, p)
    if z0 == 0.0:
        if b > 1e-12 * max(abs(a) * z1, 1e-30):
            raise OracleDivergence("section of positive length touches z = 0")
        if p >= 1.0 and a != 0.0:
            raise OracleDivergence("linearly vanishing section at z = 0 still diverges")
        # pure a*z with p < 1: finite limit at 0
        return a * _anti_zk(z1, p)
    val = a * (_anti_zk(z1, p) - _anti_zk(z0, p)) + b * (_anti_k(z1, p) - _anti_k(z0, p))
    return val


# ---------------------------------------------------------------------------
# Rectangle geometry in (z, t) = (x - y, x + y) coordinates
# ---------------------------------------------------------------------------


def _section_bounds(z: float, rect) -> tuple[float, float]:
    """t-range of the rectangle section at fixed z (may be empty)."""
    x0, x1, y0, y1 = rect
    lo = max(2.0 * x0 - z, 2.0 * y0 + z)
    hi = min(2.0 * x1 - z, 2.0 * y1 + z)
    return lo, hi


def _integrate_over_rect(rect, p: float, z_windows, t_window=None) -> float:
    """``(1/2) iint_rect |x-y|^(-1-p) dx dy`` restricted to z- and t-windows.

    ``z_windows`` is a list of (lo, hi) intervals for ``z = x - y`` (use
    ``(-inf, inf)`` for no restriction); ``t_window`` optionally restricts
    ``t = x + y`` to one interval.  The rectangle section length in ``t`` is
    piecewise linear in ``z``; all breakpoints are enumerated explicitly.
    """
    x0, x1, y0, y1 = rect
    z_lo_all, z_hi_all = x0 - y1, x1 - y0
    total = 0.0
    for w_lo, w_hi in z_windows:
        lo = max(z_lo_all, w_lo)
        hi = min(z_hi_all, w_hi)
        if hi <= lo:
            continue
        # breakpoints of the section-length function
        brk = {lo, hi, 0.0, x0 - y0, x1 - y1}
        if t_window is not None:
            t0, t1 = t_window
            # where the t-clip changes the active bounds
            for tv in (t0, t1):
                brk.update({2.0 * x0 - tv, 2.0 * x1 - tv, tv - 2.0 * y0, tv - 2.0 * y1})
        cuts = sorted(b for b in brk if lo <= b <= hi)
        for za, zb in zip(cuts[:-1], cuts[1:]):
            if zb <= za:
                continue
            zm = 0.5 * (za + zb)
            # lo(z) = max of lines (slope, const); hi(z) = min of lines.
            lo_lines = [(-1.0, 2.0 * x0), (1.0, 2.0 * y0)]
            hi_lines = [(-1.0, 2.0 * x1), (1.0, 2.0 * y1)]
            if t_window is not None:
                lo_lines.append((0.0, t_window[0]))
                hi_lines.append((0.0, t_window[1]))
            lo_s, lo_c = max(lo_lines, key=lambda sc: sc[0] * zm + sc[1])
            hi_s, hi_c = min(hi_lines, key=lambda sc: sc[0] * zm + sc[1])
            if hi_s * zm + hi_c <= lo_s * zm + lo_c:
                continue
            # section length is exactly (hi_s - lo_s) z + (hi_c - lo_c) here
            a = hi_s - lo_s
            b = hi_c - lo_c
            total += 0.5 * _linear_kernel_integral(za, zb, a, b, p)
    return total


# ---------------------------------------------------------------------------
# Piece-pair contributions
# ---------------------------------------------------------------------------

_INF = math.inf


def _pair_windows(pa: Piece, pb: Piece, delta: float):
    """Indicator decomposition of ``|u(x) - u(y)| > delta`` on ``pa x pb``.

    Returns ``(z_windows, t_window, sub_rects)`` pieces: a list of
    ``(rect, z_windows, t_window)`` jobs whose union is the active region.
    ``x`` ranges over ``pa``, ``y`` over ``pb``.
    """
    rect = (pa.lo, pa.hi, pb.lo, pb.hi)
    sa, sb = pa.slope, pb.slope
    ca, cb = pa.intercept, pb.intercept
    jobs = []
    if sa == 0.0 and sb == 0.0:
        if abs(ca - cb) > delta:
            jobs.append((rect, [(-_INF, _INF)], None))
    elif sa == sb:
        # difference = sa * (x - y) + (ca - cb): cuts in z
        s, c = sa, ca - cb
        zp = (delta - c) / s
        zm = (-delta - c) / s
        lo, hi = min(zp, zm), max(zp, zm)
        jobs.append((rect, [(-_INF, lo), (hi, _INF)], None))
    elif sa == -sb:
        # difference = sa * (x + y) + (ca - cb): cuts in t
        s, c = sa, ca - cb
        tp = (delta - c) / s
        tm = (-delta - c) / s
        lo, hi = min(tp, tm), max(tp, tm)
        jobs.append((rect, [(-_INF, _INF)], (-_INF, lo)))
        jobs.append((rect, [(-_INF, _INF)], (hi, _INF)))
    elif sa == 0.0 or sb == 0.0:
        # difference linear in one variable: split that interval and recurse
        if sb == 0.0:
            # u(x) varies: |sa x + ca - cb| > delta
            s, c = sa, ca - cb
            cuts = sorted(((delta - c) / s, (-delta - c) / s))
            segs = _clip_segments(pa.lo, pa.hi, cuts)
            for (lo, hi, active) in segs:
                if active:
                    jobs.append(((lo, hi, pb.lo, pb.hi), [(-_INF, _INF)], None))
        else:
            s, c = -sb, ca - cb
            cuts = sorted(((delta - c) / s, (-delta - c) / s))
            segs = _clip_segments(pb.lo, pb.hi, cuts)
            for (lo, hi, active) in segs:
                if active:
                    jobs.append(((pa.lo, pa.hi, lo, hi), [(-_INF, _INF)], None))
    else:
        raise NotImplementedError("piece pairs with unrelated slopes are not supported")
    return jobs


def _clip_segments(lo: float, hi: float, cuts):
    """Split ``[lo, hi]`` at the two cuts; mark segments outside them active.

    The active set is ``{x : x < cuts[0] or x > cuts[1]}``.
    """
    c0, c1 = cuts
    segs = []
    a = max(lo, min(hi, c0))
    b = max(lo, min(hi, c1))
    if a > lo:
        segs.append((lo, a, True))
    if b > a:
        segs.append((a, b, False))
    if hi > b:
        segs.append((b, hi, True))
    return segs


def threshold_energy_exact(
    f: PiecewiseLinear,
    p: float,
    delta: float,
    *,
    x_window: tuple[float, float] | None = None,
    y_window: tuple[float, float] | None = None,
    ordered_factor: bool = True,
) -> float:
    """Exact threshold energy of a piecewise-linear function.

    Without windows this is the full double integral over both pair orders.
    With ``x_window``/``y_window`` the contribution of ``x`` in the first
    window against ``y`` in the second is returned (single orientation),
    matching restricted double integrals; set ``ordered_factor=False`` then.
    Raises :class:`OracleDivergence` when the energy is infinite.
    """
    dp = delta**p
    total = 0.0
    pieces = f.pieces
    for ia, pa in enumerate(pieces):
        for ib, pb in enumerate(pieces):
            if ib < ia:
                continue
            symmetric_double = ordered_factor and ib != ia
            ra = _clip_piece(pa, x_window)
            rb = _clip_piece(pb, y_window)
            if ra is None or rb is None:
                contrib = 0.0
            else:
                contrib = _pair_contribution(ra, rb, p, delta)
                if x_window is not None or y_window is not None:
                    # restricted integrals are not symmetric: also add the
                    # (pb in x-window) x (pa in y-window) orientation
                    if ib != ia:
                        ra2 = _clip_piece(pb, x_window)
                        rb2 = _clip_piece(pa, y_window)
                        if ra2 is not None and rb2 is not None:
                            contrib += _pair_contribution(ra2, rb2, p, delta)
                    symmetric_double = False
            total += 2.0 * contrib if symmetric_double else contrib
    return dp * total


def _clip_piece(pc: Piece, window) -> Piece | None:
    if window is None:
        return pc
    lo, hi = max(pc.lo, window[0]), min(pc.hi, window[1])
    if hi <= lo:
        return None
    return Piece(lo, hi, pc.slope, pc.intercept)


def _pair_contribution(pa: Piece, pb: Piece, p: float, delta: float) -> float:
    jobs = _pair_windows(pa, pb, delta)
    return sum(_integrate_over_rect(rect, p, zw, tw) for rect, zw, tw in jobs)
