"""Reproduction studies: counterexample scans, defect decay, convergence runs.

Each study returns a :class:`~polarlab.reporting.StudyReport`; the CLI writes
them as CSV plus a manifest.  All randomness is seeded and all sweeps iterate
in parameter order, so reruns are byte-identical.
"""

from __future__ import annotations

import math

import numpy as np

from . import counterexample as cx
from .energy import (
    EnergyValue,
    KernelParams,
    polarization_defect,
    sobolev_ratio,
    threshold_energy,
)
from .grid import (
    GridFunction,
    GridSpec,
    LorentzParams,
    decay_bound_check,
    distribution_function,
    lp_norm,
)
from .halfspaces import AlignedHalfSpace, HalfSpaceSchedule
from .rearrange import iterate_polarization, polarize, schwarz_rearrange
from .reporting import StudyReport

__all__ = [
    "counterexample_scan",
    "vanishing_defect_study",
    "polarization_convergence_study",
    "decay_study",
    "schwarz_comparison_probe",
]


def _energy_or_nan(e: EnergyValue) -> float:
    return math.nan if e.is_divergent else e.unwrap()


def counterexample_scan(
    p: float,
    epsilon: float,
    deltas,
    *,
    cells_per_delta: int = 8,
    include_shifted: bool = False,
    defect_cell_limit: int = 60_000,
) -> StudyReport:
    """Oracle and grid energies of the counterexample across a threshold sweep.

    Per threshold: exact oracle energies of the profile and its polarization,
    the grid values, the three closed-form asymptotic terms (gain, ramp loss,
    far loss), and the defect.  The defect is reported through the exact
    half-increment identity; on grids below ``defect_cell_limit`` cells the
    direct pair-sum defect is evaluated as well.
    """
    rows = []
    hs = AlignedHalfSpace(0, 0, -1)  # the half-space [0, inf)
    for delta in deltas:
        spec = cx.CounterexampleSpec(
            delta=delta, epsilon=epsilon, p=p, cells_per_delta=cells_per_delta,
            half_width=4.0 if include_shifted else 3.0,
        )
        params = KernelParams(p=p, delta=delta)
        o_u = cx.oracle_energy(spec, "raw")
        o_uh = cx.oracle_energy(spec, "polarized")
        u = cx.build_profile_1d(spec)
        uh = polarize(u, hs)
        g_u = threshold_energy(u, params)
        g_uh = threshold_energy(uh, params)
        gain = cx.gain_term(spec)
        ramp_loss = cx.ramp_loss_term(spec)
        far_loss = cx.far_loss_term(spec)
        row = {
            "delta": delta,
            "epsilon": epsilon,
            "p": p,
            "oracle_u": o_u,
            "oracle_uh": o_uh,
            "oracle_diff": o_uh - o_u,
            "grid_u": _energy_or_nan(g_u),
            "grid_uh": _energy_or_nan(g_uh),
            "grid_diff": _energy_or_nan(g_uh) - _energy_or_nan(g_u),
            "rel_gap_u": abs(_energy_or_nan(g_u) - o_u) / o_u,
            "rel_gap_uh": abs(_energy_or_nan(g_uh) - o_uh) / o_uh,
            "gain": gain,
            "ramp_loss": ramp_loss,
            "far_loss": far_loss,
            "defect_half_diff": 0.5 * (o_uh - o_u),
            "gain_over_dlogd": gain / (delta * abs(math.log(delta))),
            "ramp_loss_over_epsdelta": ramp_loss / (epsilon * delta),
        }
        if u.spec.n_cells <= defect_cell_limit:
            row["defect_direct"] = _energy_or_nan(polarization_defect(u, hs, params))
        else:
            row["defect_direct"] = math.nan
        if include_shifted:
            sh = cx.shifted_pieces(spec)
            sh_pol = cx.shifted_pieces(spec, polarized=True)
            from .oracle import threshold_energy_exact

            row["oracle_shifted_u"] = threshold_energy_exact(sh, p, delta)
            row["oracle_shifted_uh"] = threshold_energy_exact(sh_pol, p, delta)
            row["oracle_shifted_diff"] = row["oracle_shifted_uh"] - row["oracle_shifted_u"]
        rows.append(row)
    return StudyReport(
        "counterexample_scan",
        {
            "p": p,
            "epsilon": epsilon,
            "deltas": list(deltas),
            "cells_per_delta": cells_per_delta,
            "include_shifted": include_shifted,
        },
        rows,
    )


def vanishing_defect_study(
    build,
    hs: AlignedHalfSpace,
    p: float,
    deltas,
    *,
    cells_per_delta: int = 8,
) -> StudyReport:
    """|defect| along a threshold sweep with refinement matched to the threshold.

    ``build(h)`` returns the (smooth) profile at resolution ``h``; each
    threshold uses ``h = delta / cells_per_delta`` so the discretization error
    scales with the threshold.  A log-log decay rate is fitted across the
    sweep.
    """
    rows = []
    for delta in sorted(deltas, reverse=True):
        u = build(delta / cells_per_delta)
        params = KernelParams(p=p, delta=delta)
        e_u = threshold_energy(u, params)
        e_uh = threshold_energy(polarize(u, hs), params)
        defect = 0.5 * (_energy_or_nan(e_uh) - _energy_or_nan(e_u))
        rows.append(
            {
                "delta": delta,
                "h": u.spec.h,
                "energy_u": _energy_or_nan(e_u),
                "energy_uh": _energy_or_nan(e_uh),
                "defect": defect,
                "abs_defect": abs(defect),
            }
        )
    ds = np.array([r["delta"] for r in rows])
    ab = np.array([r["abs_defect"] for r in rows])
    rate = math.nan
    if np.all(ab > 0) and ds.size >= 2:
        rate = float(np.polyfit(np.log(ds), np.log(ab), 1)[0])
    return StudyReport(
        "vanishing_defect",
        {"p": p, "deltas": sorted(deltas, reverse=True), "cells_per_delta": cells_per_delta,
         "halfspace": dataclass_dict(hs)},
        rows,
        meta={"fitted_loglog_rate": rate},
    )


def dataclass_dict(hs: AlignedHalfSpace) -> dict:
    return {"axis": hs.axis, "offset_cells": hs.offset_cells, "orientation": hs.orientation}


def polarization_convergence_study(
    u0: GridFunction, schedule: HalfSpaceSchedule, n_steps: int, p: float
) -> StudyReport:
    """Per-step distance to the Schwarz rearrangement under iterated polarization.

    Also reports the value-multiset checksum per step (must be constant) and a
    per-step monotonicity flag (exact non-increase of the error).
    """
    target = schwarz_rearrange(u0)
    base_sorted = np.sort(u0.flat())
    iterates, errors = iterate_polarization(u0, schedule, n_steps, p=p, track_error=True)
    rows = []
    prev = None
    for n, (it, err) in enumerate(zip(iterates, errors)):
        multiset_ok = bool(np.array_equal(np.sort(it.flat()), base_sorted))
        rows.append(
            {
                "step": n,
                "error": err,
                "multiset_constant": multiset_ok,
                "monotone": True if prev is None else bool(err <= prev),
            }
        )
        prev = err
    return StudyReport(
        "polarization_convergence",
        {"n_steps": n_steps, "p": p, "seed": schedule.seed,
         "grid": {"dim": u0.spec.dim, "cells": u0.spec.cells_per_axis, "half_width": u0.spec.half_width}},
        rows,
        meta={"initial_error": errors[0], "final_error": errors[-1],
              "target_norm": lp_norm(target, p)},
    )


def decay_study(
    u: GridFunction,
    p: float,
    theta: float,
    lam: float,
    deltas,
) -> StudyReport:
    """Superlevel decay of a nonnegative 2D profile against its energies.

    Per threshold: ``mu(lam * delta)``, the energies of ``u`` and of its
    rearrangement, and the empirical ratio
    ``mu * delta^(dim p/(dim-p)) / energy(u*)^(dim/(dim-p))``.  Also reports a
    truncated version of the integrability condition over the sweep and the
    pointwise decay bound of ``u*`` with the coefficient taken at
    ``q = dim p / (dim - p)``.
    """
    if u.spec.dim != 2 or not 1.0 < p < 2.0:
        raise ValueError("decay_study requires dim = 2 and 1 < p < 2")
    if np.any(u.values < 0):
        raise ValueError("decay_study requires a nonnegative profile")
    star = schwarz_rearrange(u)
    dist = distribution_function(u)
    pstar_exp = u.spec.dim * p / (u.spec.dim - p)
    rows = []
    for delta in sorted(deltas, reverse=True):
        params = KernelParams(p=p, delta=delta)
        e_u = threshold_energy(u, params)
        e_star = threshold_energy(star, params)
        mu = float(dist.mu(lam * delta))
        ratio = math.nan
        if not e_star.is_divergent and e_star.unwrap() > 0:
            ratio = mu * delta**pstar_exp / e_star.unwrap() ** (u.spec.dim / (u.spec.dim - p))
        sob = sobolev_ratio(u, params, lam)
        rows.append(
            {
                "delta": delta,
                "mu_at_lam_delta": mu,
                "energy_u": _energy_or_nan(e_u),
                "energy_star": _energy_or_nan(e_star),
                "superlevel_ratio": ratio,
                "sobolev_lhs": sob["lhs"],
                "sobolev_ratio": sob["ratio"],
            }
        )
    # truncated integrability sum: int I(u*)^(theta/p) ddelta/delta over the sweep
    ds = np.array(sorted(deltas))
    es = np.array([r["energy_star"] for r in rows])[::-1]
    vals = np.where(np.isnan(es), np.inf, es) ** (theta / p)
    cond = float(np.trapezoid(vals, np.log(ds))) if ds.size >= 2 else math.nan
    lor = LorentzParams(q=pstar_exp, theta=theta)
    bound = decay_bound_check(star, lor)
    return StudyReport(
        "decay_study",
        {"p": p, "theta": theta, "lambda": lam, "deltas": sorted(deltas, reverse=True)},
        rows,
        meta={
            "truncated_condition_integral": cond,
            "pointwise_coefficient": bound["coefficient"],
            "pointwise_violations": bound["violations"],
            "pointwise_max_excess": bound["max_excess"],
        },
    )


def schwarz_comparison_probe(
    spec: GridSpec, p: float, delta: float, n_trials: int, seed: int
) -> StudyReport:
    """Randomized comparison of the energies of ``u`` and of its rearrangement.

    Whether the rearrangement can increase the threshold energy is open; the
    probe only reports the observed sign pattern, flagging candidates where
    the rearranged energy exceeds the original beyond tolerance (these demand
    refinement confirmation, not a conclusion).
    """
    from .profiles import random_threshold_field

    rng = np.random.default_rng(seed)
    params = KernelParams(p=p, delta=delta)
    rows = []
    for k in range(n_trials):
        u = random_threshold_field(spec, rng, delta, support_margin=2)
        u = u.with_values(np.abs(u.values))
        e_u = threshold_energy(u, params)
        e_star = threshold_energy(schwarz_rearrange(u), params)
        fin = not (e_u.is_divergent or e_star.is_divergent)
        excess = (e_star.unwrap() - e_u.unwrap()) if fin else math.nan
        rows.append(
            {
                "trial": k,
                "energy_u": _energy_or_nan(e_u),
                "energy_star": _energy_or_nan(e_star),
                "excess": excess,
                "candidate": bool(fin and excess > 1e-10 * max(e_u.unwrap(), 1.0)),
            }
        )
    n_cand = sum(1 for r in rows if r["candidate"])
    return StudyReport(
        "schwarz_comparison_probe",
        {"p": p, "delta": delta, "n_trials": n_trials, "seed": seed,
         "grid": {"dim": spec.dim, "cells": spec.cells_per_axis, "half_width": spec.half_width}},
        rows,
        meta={"candidates": n_cand},
    )
