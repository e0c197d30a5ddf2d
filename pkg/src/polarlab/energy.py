"""Threshold nonlocal energy, Gagliardo seminorm, and two-point functionals.

The central object is the jump-threshold energy

    E_delta(u) = double integral over {|u(x) - u(y)| > delta} of
                 delta^p / |x - y|^(dim + p),

computed exactly for piecewise-constant grid data as a sum of cell-pair
kernel integrals over the pairs whose value difference strictly exceeds the
threshold.  The comparison is exact on stored floats; a pair of touching
cells with an active indicator makes the energy Divergent, which is the true
value for the represented function.

All double sums here run over the grid box only: the represented function is
zero outside, and a cell value of magnitude above the threshold would in
truth also interact with the exterior.  Callers that care about that regime
choose domains with enough margin; the constant-function example
``E_delta(c) = 0`` fixes this convention.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .grid import GridFunction, discrete_gradient_energy
from .halfspaces import AlignedHalfSpace
from .kernels import KernelTable1D, KernelTable2D, WeightTable, kernel_table, weight_table
from .rearrange import CellPartition, polarization_partition

__all__ = [
    "KernelParams",
    "EnergyValue",
    "threshold_energy",
    "threshold_energy_restricted",
    "level_term",
    "swap_term",
    "polarization_defect",
    "angular_moment",
    "gagliardo_seminorm",
    "young_weight_energy",
    "YOUNG_FUNCTIONS",
    "RADIAL_WEIGHTS",
    "small_threshold_study",
    "smoothness_limit_study",
    "sobolev_ratio",
    "GuardError",
]


class GuardError(ValueError):
    """A resolution or parameter guard was violated (CLI exit code 3)."""


@dataclasses.dataclass(frozen=True)
class KernelParams:
    """Exponents of the pair kernels: power ``p``, jump threshold ``delta``,
    and fractional order ``s`` (only the fields an operation uses are read)."""

    p: float
    delta: float | None = None
    s: float | None = None

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.delta is not None and not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.s is not None and not 0 < self.s < 1:
            raise ValueError(f"s must be in (0, 1), got {self.s}")

    def require_delta(self) -> float:
        if self.delta is None:
            raise ValueError("this operation needs the jump threshold delta")
        return self.delta

    def require_s(self) -> float:
        if self.s is None:
            raise ValueError("this operation needs the fractional order s")
        return self.s


@dataclasses.dataclass(frozen=True)
class EnergyValue:
    """A nonlocal energy: a finite nonnegative number or symbolic Divergent."""

    value: float | None

    @staticmethod
    def finite(v: float) -> "EnergyValue":
        return EnergyValue(float(v))

    @staticmethod
    def divergent() -> "EnergyValue":
        return EnergyValue(None)

    @property
    def is_divergent(self) -> bool:
        return self.value is None

    def unwrap(self) -> float:
        if self.value is None:
            raise ValueError("energy is divergent")
        return self.value

    def to_jsonable(self):
        return {"value": "divergent" if self.is_divergent else self.value}

    def __float__(self) -> float:
        return math.inf if self.is_divergent else self.value


# ---------------------------------------------------------------------------
# Value runs (1D fast path)
# ---------------------------------------------------------------------------


def _runs_1d(values: np.ndarray) -> list[tuple[int, int, float]]:
    """Maximal constant runs as ``(start, stop, value)`` triples."""
    n = values.size
    cuts = np.nonzero(np.diff(values) != 0.0)[0] + 1
    starts = np.concatenate(([0], cuts))
    stops = np.concatenate((cuts, [n]))
    return [(int(a), int(b), float(values[a])) for a, b in zip(starts, stops)]


def _pair_sum_1d(values: np.ndarray, table: KernelTable1D, weight) -> float | None:
    """``sum_{i != j} weight(v_i, v_j) J(|i-j|)`` over ordered cell pairs.

    ``weight`` maps two value arrays elementwise to nonnegative factors with
    ``weight(v, v) == 0``.  Returns None (divergent) when a nonzero factor
    multiplies a divergent kernel entry, which with ``finite[1] == False``
    happens exactly when two touching cells differ actively.

    Piecewise-constant data is grouped into maximal runs, with run-pair
    kernel sums in closed form; data with many distinct values falls back to
    a blocked dense accumulation.
    """
    runs = _runs_1d(values)
    if len(runs) > 700:
        return _pair_sum_1d_dense(values, table, weight)
    nruns = len(runs)
    total = 0.0
    for a in range(nruns):
        a0, a1, va = runs[a]
        # within-run pairs have zero difference: weight(v, v) must be 0
        for b in range(a + 1, nruns):
            b0, b1, vb = runs[b]
            w = float(weight(np.float64(va), np.float64(vb)))
            if w == 0.0:
                continue
            if b == a + 1 and table.touching_divergent:
                return None
            s = table.block_sum(a0, a1, b0, b1)
            if math.isinf(s):
                return None
            total += 2.0 * w * s
    return total


def _pair_sum_1d_dense(values: np.ndarray, table: KernelTable1D, weight, block: int = 512) -> float | None:
    n = values.size
    dmin = 2 if table.touching_divergent else 1
    if table.touching_divergent and n > 1:
        if np.any(weight(values[1:], values[:-1]) != 0.0):
            return None
    jsafe = np.where(table.finite, table.J, 0.0)
    cols = np.arange(n)
    total = 0.0
    for b0 in range(0, n, block):
        b1 = min(b0 + block, n)
        d = np.abs(cols[None, :] - np.arange(b0, b1)[:, None])
        w = weight(values[b0:b1, None], values[None, :])
        w[d < dmin] = 0.0
        total += float(np.sum(w * jsafe[d]))
    return total


def threshold_energy(u: GridFunction, params: KernelParams) -> EnergyValue:
    """Jump-threshold nonlocal energy of ``u`` (both pair orders counted)."""
    delta = params.require_delta()
    p = params.p
    table = kernel_table(u.spec, p)
    dp = delta**p
    if u.spec.dim == 1:
        def w(va, vb):
            return np.where(np.abs(va - vb) > delta, dp, 0.0)

        s = _pair_sum_1d(u.values, table, w)
    else:
        def wm(row_a: np.ndarray, row_b: np.ndarray) -> np.ndarray:
            return np.where(np.abs(row_a[:, None] - row_b[None, :]) > delta, dp, 0.0)

        s = _pair_sum_2d_ordered(u.values, table, wm)
    return EnergyValue.divergent() if s is None else EnergyValue.finite(s)


def _pair_sum_2d_ordered(values: np.ndarray, table: KernelTable2D, weight_matrix) -> float | None:
    """Sum of ``w(v_i, v_j) J(i, j)`` over ordered 2D cell pairs ``i != j``."""
    m = values.shape[0]
    col = np.abs(np.arange(m)[:, None] - np.arange(m)[None, :])
    total = 0.0
    for r1 in range(m):
        for r2 in range(r1, m):
            da = r2 - r1
            w = weight_matrix(values[r1], values[r2])
            if da == 0:
                np.fill_diagonal(w, 0.0)  # i == j never contributes
            if not np.any(w):
                continue
            active = w != 0.0
            if np.any(active & ~table.finite[da][col]):
                return None
            contrib = float(np.sum(w[active] * table.J[da][col][active]))
            # rows (r1, r2) and (r2, r1) both occur as ordered pairs
            total += contrib if da == 0 else 2.0 * contrib
    return total


def threshold_energy_restricted(
    u: GridFunction, cells_o: np.ndarray, cells_p: np.ndarray, params: KernelParams
) -> EnergyValue:
    """Threshold energy restricted to ordered pairs ``(i in O, j in P)``."""
    delta = params.require_delta()
    p = params.p
    table = kernel_table(u.spec, p)
    flat = u.flat()
    o = np.asarray(cells_o, dtype=int)
    q = np.asarray(cells_p, dtype=int)
    if o.size == 0 or q.size == 0:
        return EnergyValue.finite(0.0)
    vo, vq = flat[o], flat[q]
    active = np.abs(vo[:, None] - vq[None, :]) > delta
    if u.spec.dim == 1:
        da = np.abs(o[:, None] - q[None, :])
        fin = table.finite[da]
        if np.any(active & ~fin & (o[:, None] != q[None, :])):
            return EnergyValue.divergent()
        active &= o[:, None] != q[None, :]
        return EnergyValue.finite(delta**p * float(np.sum(table.J[da][active])))
    m = u.spec.cells_per_axis
    r_o, c_o = o // m, o % m
    r_q, c_q = q // m, q % m
    da = np.abs(r_o[:, None] - r_q[None, :])
    db = np.abs(c_o[:, None] - c_q[None, :])
    same = (da == 0) & (db == 0)
    fin = table.finite[da, db]
    if np.any(active & ~fin & ~same):
        return EnergyValue.divergent()
    active &= ~same
    return EnergyValue.finite(delta**p * float(np.sum(table.J[da, db][active])))


# ---------------------------------------------------------------------------
# Two-point terms and the polarization defect
# ---------------------------------------------------------------------------


def level_term(v: GridFunction, i: int, j: int, params: KernelParams) -> float:
    """``delta^p`` if the flat cells ``i, j`` differ by more than the threshold."""
    delta = params.require_delta()
    flat = v.flat()
    return delta**params.p if abs(flat[i] - flat[j]) > delta else 0.0


def swap_term(
    u: GridFunction, hs: AlignedHalfSpace, i: int, j: int, params: KernelParams,
    partition: CellPartition | None = None,
) -> float:
    """Signed four-indicator combination driving the polarization defect.

    For ``i`` in the swap set and ``j`` in the keep set of the partition this
    is ``L(u, si, j) + L(u, i, sj) - L(u, i, j) - L(u, si, sj)`` with ``s``
    the reflection; its value lies in ``{-2, -1, 0, 1, 2} * delta^p``.
    """
    part = partition if partition is not None else polarization_partition(u, hs)
    if i not in part.swap_h or j not in part.keep_h:
        raise ValueError("swap_term requires i in swap_h and j in keep_h")
    si, sj = int(part.partner[i]), int(part.partner[j])
    return (
        level_term(u, si, j, params)
        + level_term(u, i, sj, params)
        - level_term(u, i, j, params)
        - level_term(u, si, sj, params)
    )


def polarization_defect(
    u: GridFunction, hs: AlignedHalfSpace, params: KernelParams
) -> EnergyValue:
    """Defect ``sum_{i in swap, j in keep} D(u,i,j) (J(i,j) - J(si,j))``.

    Equals half the polarization increment ``(E(u^H) - E(u)) / 2`` whenever
    both energies are finite.  Divergent when a nonzero four-indicator term
    multiplies a divergent kernel difference.
    """
    delta = params.require_delta()
    p = params.p
    part = polarization_partition(u, hs)
    A, B = part.swap_h, part.keep_h
    if A.size == 0 or B.size == 0:
        return EnergyValue.finite(0.0)
    table = kernel_table(u.spec, p)
    flat = u.flat()
    sA = part.partner[A]
    sB = part.partner[B]
    dp = delta**p

    def indic(x_idx, y_idx):
        return (np.abs(flat[x_idx][:, None] - flat[y_idx][None, :]) > delta).astype(float)

    D = dp * (indic(sA, B) + indic(A, sB) - indic(A, B) - indic(sA, sB))

    def kern(x_idx, y_idx):
        if u.spec.dim == 1:
            da = np.abs(x_idx[:, None] - y_idx[None, :])
            return table.J[da], table.finite[da]
        m = u.spec.cells_per_axis
        ra, ca = x_idx // m, x_idx % m
        rb, cb = y_idx // m, y_idx % m
        da = np.abs(ra[:, None] - rb[None, :])
        db = np.abs(ca[:, None] - cb[None, :])
        return table.J[da, db], table.finite[da, db]

    j_ab, fin_ab = kern(A, B)
    j_sab, fin_sab = kern(sA, B)
    nonzero = D != 0.0
    if np.any(nonzero & (~fin_ab | ~fin_sab)):
        return EnergyValue.divergent()
    diff = np.where(fin_ab & fin_sab, j_ab - j_sab, 0.0)
    return EnergyValue.finite(float(np.sum(D[nonzero] * diff[nonzero])))


# ---------------------------------------------------------------------------
# Angular constant and limits
# ---------------------------------------------------------------------------


def angular_moment(dim: int, p: float) -> float:
    """``int_{S^(dim-1)} |e . sigma|^p dsigma``: 2 in 1D, Beta-form in 2D."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if dim == 1:
        return 2.0
    if dim == 2:
        return 2.0 * math.sqrt(math.pi) * math.gamma((p + 1.0) / 2.0) / math.gamma(p / 2.0 + 1.0)
    raise ValueError(f"dim must be 1 or 2, got {dim}")


def small_threshold_study(
    build, p: float, deltas, *, cells_per_delta: int = 8, gradient_target: float | None = None
) -> list[dict]:
    """Threshold energy along ``delta -> 0`` against its gradient-energy limit.

    ``build(h)`` must return the profile discretized at resolution ``h``; the
    grid is refined with the threshold so that ``h <= delta / 8`` always holds
    (coarser grids corrupt the level-set geometry and are refused).
    Reports per row the energy and its ratio to
    ``(1/p) * angular_moment * discrete_gradient_energy``.
    """
    if p <= 1:
        raise ValueError("the small-threshold limit needs p > 1")
    if cells_per_delta < 8:
        raise GuardError("resolution guard: need h <= delta / 8")
    rows = []
    for delta in deltas:
        u = build(delta / cells_per_delta)
        if u.spec.h > delta / 8 * (1 + 1e-12):
            raise GuardError(f"h = {u.spec.h} exceeds delta/8 = {delta / 8}")
        energy = threshold_energy(u, KernelParams(p=p, delta=delta))
        grad = gradient_target if gradient_target is not None else discrete_gradient_energy(u, p)
        target = angular_moment(u.spec.dim, p) / p * grad
        rows.append(
            {
                "delta": delta,
                "h": u.spec.h,
                "energy": float(energy),
                "target": target,
                "ratio": float(energy) / target if target else math.nan,
            }
        )
    return rows


def smoothness_limit_study(
    build, p: float, s_values, *, cells: int | dict = 1024, gradient_target: float | None = None
) -> list[dict]:
    """``(1 - s) x`` Gagliardo seminorm along ``s -> 1``, with paired refinement.

    Reports the spec table target ``angular_moment * gradient_energy`` and,
    separately, the classical limit value ``angular_moment / p x gradient``.
    ``cells`` may be a dict mapping ``s`` to the cell count.
    """
    rows = []
    for s in s_values:
        m = cells[s] if isinstance(cells, dict) else cells
        u = build(m)
        grad = gradient_target if gradient_target is not None else discrete_gradient_energy(u, p)
        semi = gagliardo_seminorm(u, KernelParams(p=p, s=s), mode="smooth")
        val = (1.0 - s) * float(semi)
        k = angular_moment(u.spec.dim, p)
        rows.append(
            {
                "s": s,
                "cells": m,
                "h_pow_p1ms": u.spec.h ** (p * (1.0 - s)),
                "scaled_seminorm": val,
                "target": k * grad,
                "ratio": val / (k * grad) if grad else math.nan,
                "limit_value": k / p * grad,
                "ratio_to_limit": val / (k / p * grad) if grad else math.nan,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# Gagliardo seminorm
# ---------------------------------------------------------------------------


def gagliardo_seminorm(
    u: GridFunction, params: KernelParams, *, mode: str = "auto"
) -> EnergyValue:
    """Fractional seminorm ``sum |u_i - u_j|^p J_ps(i, j)`` over ordered pairs.

    mode="exact" evaluates the seminorm of the piecewise-constant function
    itself; it is finite only for ``p s < 1`` in 1D (touching cells diverge
    otherwise).  mode="smooth" treats the data as samples of a smooth
    function: separated pairs are exact, while touching pairs and the
    within-cell part use the local difference quotient against the kernel
    moment ``|x - y|^(p - dim - ps)``, a documented discretization model
    whose bias vanishes under refinement.  mode="auto" picks exact when the
    piecewise-constant seminorm is finite, else smooth.
    """
    p, s = params.p, params.require_s()
    ps = p * s
    if mode == "auto":
        mode = "exact" if ps < 1.0 else "smooth"
    if mode not in ("exact", "smooth"):
        raise ValueError(f"unknown mode {mode!r}")
    table = kernel_table(u.spec, ps)

    if mode == "exact":
        if u.spec.dim == 1:
            val = _pair_sum_1d(u.values, table, lambda a, b: np.abs(a - b) ** p)
        else:
            val = _pair_sum_2d_ordered(
                u.values, table, lambda ra, rb: np.abs(ra[:, None] - rb[None, :]) ** p
            )
        return EnergyValue.divergent() if val is None else EnergyValue.finite(val)

    if u.spec.dim != 1:
        raise ValueError("smooth-mode seminorm is implemented in 1D")
    h = u.spec.h
    v = u.values
    m = v.size
    # far pairs (offset >= 2): exact piecewise-constant contribution
    total = 0.0
    for d in range(2, m):
        diffs = np.abs(v[d:] - v[:-d])
        total += 2.0 * table.J[d] * float(np.sum(diffs**p))
    # local model: |u'|^p against int |x-y|^(p - 1 - ps) over touching cells
    # and over the cell itself (the piecewise-constant sum would lose the
    # within-cell mass that carries the whole s -> 1 limit)
    beta = p - ps  # > 0
    local = kernel_table(u.spec, -beta)  # kernel |z|^(beta - 1)
    k_touch = local.J[1]
    k_diag = 2.0 * h ** (beta + 1.0) / (beta * (beta + 1.0))
    slopes = np.abs(np.diff(v)) / h
    total += 2.0 * k_touch * float(np.sum(slopes**p))
    center = np.abs(np.concatenate(([v[1] - v[0]], v[2:] - v[:-2], [v[-1] - v[-2]]))) / np.concatenate(
        ([h], np.full(m - 2, 2.0 * h), [h])
    )
    total += k_diag * float(np.sum(center**p))
    return EnergyValue.finite(total)


# ---------------------------------------------------------------------------
# Young-function / bounded-weight two-point functional
# ---------------------------------------------------------------------------

YOUNG_FUNCTIONS = {
    "power": lambda t, p=2.0: t**p,
    "exp": lambda t: np.expm1(t),
    "shifted": lambda t, a=0.5: np.maximum(t - a, 0.0),
}

RADIAL_WEIGHTS = {
    "gauss": lambda r: np.exp(-(r**2)),
    "invpower": lambda r, beta=3.0: (1.0 + r) ** (-beta),
    "cutoff": lambda r, radius=1.0: (r <= radius).astype(float),
}


def young_weight_energy(
    u: GridFunction, G, w, *, refine: int = 4, wtable: WeightTable | None = None
) -> float:
    """``sum G(|u_i - u_j|) W(i, j)`` with a bounded non-increasing weight.

    ``G`` must be convex non-decreasing with ``G(0) = 0`` (use the
    ``YOUNG_FUNCTIONS`` menu); ``w`` bounded non-increasing radial (the
    ``RADIAL_WEIGHTS`` menu).  Singular weights belong to the kernel-energy
    paths, not here.
    """
    if wtable is None:
        wtable = weight_table(u.spec, w, refine)
    if not np.all(np.isfinite(wtable.W)):
        raise ValueError("weight table is not finite; unbounded weights are rejected")
    v = u.values
    if u.spec.dim == 1:
        m = v.size
        total = 0.0
        for d in range(1, m):
            diffs = np.abs(v[d:] - v[:-d])
            total += 2.0 * wtable.W[d] * float(np.sum(G(diffs)))
        # same-cell pairs: G(0) = 0
        return total
    m = v.shape[0]
    col = np.abs(np.arange(m)[:, None] - np.arange(m)[None, :])
    total = 0.0
    for r1 in range(m):
        for r2 in range(r1, m):
            da = r2 - r1
            g = G(np.abs(v[r1][:, None] - v[r2][None, :]))
            if da == 0:
                np.fill_diagonal(g, 0.0)
            contrib = float(np.sum(g * wtable.W[da][col]))
            total += contrib if da == 0 else 2.0 * contrib
    return total


# ---------------------------------------------------------------------------
# Superlevel Sobolev-type ratio (2D, 1 < p < 2)
# ---------------------------------------------------------------------------


def sobolev_ratio(u: GridFunction, params: KernelParams, lam: float) -> dict:
    """Both sides of the superlevel-set bound and their ratio.

    lhs is the ``L^(p*)`` mass of ``u`` above ``lam * delta`` with
    ``p* = dim p / (dim - p)``; rhs is ``E_delta(u)^(1/p)``.  Only defined
    for ``dim = 2`` and ``1 < p < 2`` (1D has no ``p < dim``).
    """
    delta = params.require_delta()
    p = params.p
    if u.spec.dim != 2:
        raise ValueError("sobolev_ratio requires dim = 2")
    if not 1.0 < p < 2.0:
        raise ValueError("sobolev_ratio requires 1 < p < dim = 2")
    pstar = u.spec.dim * p / (u.spec.dim - p)
    mask = np.abs(u.values) > lam * delta
    lhs = float((u.spec.cell_measure * np.sum(np.abs(u.values[mask]) ** pstar)) ** (1.0 / pstar))
    energy = threshold_energy(u, params)
    if energy.is_divergent:
        return {"lhs": lhs, "energy_root": math.inf, "ratio": 0.0}
    root = energy.unwrap() ** (1.0 / p)
    ratio = 0.0 if lhs == 0.0 else (lhs / root if root > 0 else math.inf)
    return {"lhs": lhs, "energy_root": root, "ratio": ratio}
