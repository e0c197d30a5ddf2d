"""Command-line interface for the energy computations and studies.

Commands: energy, counterexample, limits, polarize, decay, riesz,
inequality-suite.  Every command writes its outputs plus a JSON manifest into
``--out``; a rerun with the same configuration and seed is byte-identical.

Exit codes: 0 success, 2 invalid configuration, 3 resolution/parameter guard
violation, 4 internal numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import studies
from .counterexample import CounterexampleSpec, build_profile_1d
from .energy import (
    GuardError,
    KernelParams,
    RADIAL_WEIGHTS,
    YOUNG_FUNCTIONS,
    gagliardo_seminorm,
    small_threshold_study,
    smoothness_limit_study,
    threshold_energy,
    young_weight_energy,
)
from .grid import GridError, GridFunction, GridSpec
from .halfspaces import AlignedHalfSpace, HalfSpaceSchedule
from .profiles import cosine_bump, gaussian, profile_by_name, random_threshold_field
from .rearrange import polarize, schwarz_rearrange
from .reporting import StudyReport, write_text_atomic
from .riesz import (
    fractional_energy_density,
    fractional_gradient,
    fractional_gradient_spectral,
    polarization_inequality_probe,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GUARD = 3
EXIT_NUMERIC = 4


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as f:
        return json.load(f)


def _merged(args: argparse.Namespace, config: dict) -> dict:
    merged = dict(config)
    for k, v in vars(args).items():
        if v is not None and k not in ("command", "config"):
            merged[k] = v
    return merged


def _grid_from(cfg: dict, default_dim=1, default_hw=6.0, default_cells=512) -> GridSpec:
    return GridSpec(
        int(cfg.get("dim", default_dim)),
        float(cfg.get("half_width", default_hw)),
        int(cfg.get("cells", default_cells)),
    )


def _halfspace_from(cfg: dict) -> AlignedHalfSpace:
    hs = cfg.get("halfspace", {})
    return AlignedHalfSpace(
        int(hs.get("axis", 0)), int(hs.get("offset", 0)), int(hs.get("orientation", -1))
    )


def _write_manifest(out: str, name: str, cfg: dict, outputs: dict) -> None:
    manifest = {"command": name, "config": cfg, "outputs": outputs}
    write_text_atomic(
        os.path.join(out, f"{name}.run.json"),
        json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n",
    )


def _input_function(cfg: dict) -> GridFunction:
    if "input" in cfg and cfg["input"]:
        with open(cfg["input"]) as f:
            return GridFunction.from_json(f.read())
    spec = _grid_from(cfg)
    profile = cfg.get("profile", "gaussian")
    kwargs = cfg.get("profile_args", {})
    return profile_by_name(profile, spec, **kwargs)


def cmd_energy(cfg: dict) -> int:
    out = cfg["out"]
    u = _input_function(cfg)
    functional = cfg.get("functional", "threshold")
    p = float(cfg.get("p", 2.0))
    if functional == "threshold":
        params = KernelParams(p=p, delta=float(cfg.get("delta", 0.1)))
        result = threshold_energy(u, params).to_jsonable()
    elif functional == "gagliardo":
        params = KernelParams(p=p, s=float(cfg.get("s", 0.5)))
        result = gagliardo_seminorm(u, params, mode=cfg.get("mode", "auto")).to_jsonable()
    elif functional == "young":
        G = YOUNG_FUNCTIONS[cfg.get("young", "power")]
        w = RADIAL_WEIGHTS[cfg.get("weight", "invpower")]
        result = {"value": young_weight_energy(u, G, w)}
    else:
        raise ValueError(f"unknown functional {functional!r}")
    write_text_atomic(os.path.join(out, "energy.json"), json.dumps(result, sort_keys=True) + "\n")
    _write_manifest(out, "energy", cfg, {"energy": "energy.json"})
    return EXIT_OK


def cmd_counterexample(cfg: dict) -> int:
    out = cfg["out"]
    p = float(cfg.get("p", 2.0))
    eps = float(cfg.get("epsilon", 1e-2))
    deltas = cfg.get("deltas", [1e-3, 2e-3, 5e-3, 1e-2])
    report = studies.counterexample_scan(
        p,
        eps,
        [float(d) for d in deltas],
        cells_per_delta=int(cfg.get("cells_per_delta", 8)),
        include_shifted=bool(cfg.get("include_shifted", False)),
    )
    paths = report.write(out)
    paths["gain_dat"] = report.write_dat(out, "delta", "gain")
    paths["ramp_dat"] = report.write_dat(out, "delta", "ramp_loss")
    paths["far_dat"] = report.write_dat(out, "delta", "far_loss")
    _write_manifest(out, "counterexample", cfg, paths)
    return EXIT_OK


def cmd_limits(cfg: dict) -> int:
    out = cfg["out"]
    mode = cfg.get("mode", "small-threshold")
    p = float(cfg.get("p", 2.0))
    hw = float(cfg.get("half_width", 6.0))

    def build_h(h: float) -> GridFunction:
        m = round(2.0 * hw / h)
        m += m % 2
        return profile_by_name(cfg.get("profile", "gaussian"), GridSpec(1, hw, m))

    if mode == "small-threshold":
        deltas = [float(d) for d in cfg.get("deltas", [0.1, 0.05, 0.025])]
        rows = small_threshold_study(
            build_h, p, deltas, cells_per_delta=int(cfg.get("cells_per_delta", 8))
        )
        report = StudyReport("small_threshold_limit", {"p": p, "deltas": deltas}, rows)
    elif mode == "smoothness":
        svals = [float(s) for s in cfg.get("s_values", [0.9, 0.99, 0.999])]
        cells = {s: int(c) for s, c in zip(svals, cfg.get("cells_list", [512, 1024, 2048]))}

        def build_m(m: int) -> GridFunction:
            return profile_by_name(cfg.get("profile", "gaussian"), GridSpec(1, hw, m))

        rows = smoothness_limit_study(build_m, p, svals, cells=cells)
        report = StudyReport("smoothness_limit", {"p": p, "s_values": svals}, rows)
    else:
        raise ValueError(f"unknown limits mode {mode!r}")
    paths = report.write(out)
    _write_manifest(out, "limits", cfg, paths)
    return EXIT_OK


def cmd_polarize(cfg: dict) -> int:
    out = cfg["out"]
    dim = int(cfg.get("dim", 2))
    spec = GridSpec(dim, float(cfg.get("half_width", 2.0)), int(cfg.get("cells", 48)))
    profile = cfg.get("profile", "shifted-bump")
    if profile == "shifted-bump":
        center = [0.7] + [0.4] * (dim - 1)
        u0 = cosine_bump(spec, center=center, radius=float(cfg.get("radius", 0.9)))
    else:
        u0 = profile_by_name(profile, spec, **cfg.get("profile_args", {}))
    schedule = HalfSpaceSchedule(spec, seed=int(cfg.get("seed", 0)))
    report = studies.polarization_convergence_study(
        u0, schedule, int(cfg.get("steps", 200)), float(cfg.get("p", 2.0))
    )
    paths = report.write(out)
    _write_manifest(out, "polarize", cfg, paths)
    return EXIT_OK


def cmd_decay(cfg: dict) -> int:
    out = cfg["out"]
    spec = GridSpec(2, float(cfg.get("half_width", 2.0)), int(cfg.get("cells", 48)))
    u = cosine_bump(spec, radius=float(cfg.get("radius", 1.5)))
    report = studies.decay_study(
        u,
        float(cfg.get("p", 1.5)),
        float(cfg.get("theta", 2.0)),
        float(cfg.get("lambda", 1.0)),
        [float(d) for d in cfg.get("deltas", [0.2, 0.1, 0.05, 0.02])],
    )
    paths = report.write(out)
    _write_manifest(out, "decay", cfg, paths)
    return EXIT_OK


def cmd_riesz(cfg: dict) -> int:
    out = cfg["out"]
    s = float(cfg.get("s", 0.5))
    p = float(cfg.get("p", 2.0))
    mode = cfg.get("mode", "field")
    if mode == "field":
        u = _input_function(cfg)
        field = fractional_gradient(u, s)
        dens = fractional_energy_density(u, s, p)
        lines = ["index,center,component0" + (",component1" if u.spec.dim == 2 else "") + ",density"]
        coords = u.spec.center_coords()
        flat_v = field.vectors.reshape(-1, u.spec.dim)
        flat_d = dens.flat()
        centers = np.stack([c.ravel() for c in coords], axis=-1)
        for i in range(flat_v.shape[0]):
            cs = ";".join(format(c, ".17g") for c in centers[i])
            comps = ",".join(format(v, ".17g") for v in flat_v[i])
            lines.append(f"{i},{cs},{comps},{format(flat_d[i], '.17g')}")
        write_text_atomic(os.path.join(out, "riesz_field.csv"), "\n".join(lines) + "\n")
        _write_manifest(out, "riesz", cfg, {"field": "riesz_field.csv"})
        return EXIT_OK
    if mode == "probe":
        rng = np.random.default_rng(int(cfg.get("seed", 0)))
        spec = GridSpec(
            int(cfg.get("dim", 1)), float(cfg.get("half_width", 3.0)), int(cfg.get("cells", 128))
        )
        trials = int(cfg.get("trials", 100))
        rows = []
        candidates = []
        for k in range(trials):
            base = random_threshold_field(spec, rng, 1.0, support_margin=spec.cells_per_axis // 4,
                                          smooth_passes=8)
            hs = AlignedHalfSpace(int(rng.integers(spec.dim)), int(rng.integers(0, 3)),
                                  int(rng.choice([-1, 1])))
            try:
                rep = polarization_inequality_probe(base, hs, s, p)
            except GridError:
                continue
            rows.append({"trial": k, **{k2: v for k2, v in rep.items()}})
            if rep["violations"]:
                candidates.append({"trial": k, "halfspace": studies.dataclass_dict(hs), **rep})
        report = StudyReport("riesz_probe", {"s": s, "p": p, "trials": trials,
                                             "seed": int(cfg.get("seed", 0))}, rows,
                             meta={"candidate_count": len(candidates)})
        paths = report.write(out)
        if candidates:
            write_text_atomic(
                os.path.join(out, "riesz_probe_candidates.json"),
                json.dumps(candidates, indent=2, sort_keys=True) + "\n",
            )
            paths["candidates"] = "riesz_probe_candidates.json"
        _write_manifest(out, "riesz", cfg, paths)
        return EXIT_OK
    raise ValueError(f"unknown riesz mode {mode!r}")


def cmd_inequality_suite(cfg: dict) -> int:
    out = cfg["out"]
    seed = int(cfg.get("seed", 0))
    spec = GridSpec(int(cfg.get("dim", 1)), float(cfg.get("half_width", 1.0)),
                    int(cfg.get("cells", 40)))
    trials = int(cfg.get("trials", 50))
    delta = float(cfg.get("delta", 0.1))
    report = studies.schwarz_comparison_probe(spec, float(cfg.get("p", 2.0)), delta, trials, seed)
    paths = report.write(out)
    _write_manifest(out, "inequality-suite", cfg, paths)
    return EXIT_OK


_COMMANDS = {
    "energy": cmd_energy,
    "counterexample": cmd_counterexample,
    "limits": cmd_limits,
    "polarize": cmd_polarize,
    "decay": cmd_decay,
    "riesz": cmd_riesz,
    "inequality-suite": cmd_inequality_suite,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polarlab", description=__doc__)
    ap.add_argument("command", choices=sorted(_COMMANDS))
    ap.add_argument("--config", help="JSON config file; flags override its entries")
    ap.add_argument("--out", help="output directory", default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--threads", type=int, default=None,
                    help="accepted for interface stability; execution is single-process")
    ap.add_argument("--p", type=float, default=None)
    ap.add_argument("--delta", type=float, default=None)
    ap.add_argument("--s", type=float, default=None)
    ap.add_argument("--epsilon", type=float, default=None)
    ap.add_argument("--profile", default=None)
    ap.add_argument("--input", default=None, help="grid function JSON file")
    ap.add_argument("--functional", default=None)
    ap.add_argument("--mode", default=None)
    ap.add_argument("--steps", type=int, default=None)
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--cells", type=int, default=None)
    ap.add_argument("--dim", type=int, default=None)
    ap.add_argument("--half-width", dest="half_width", type=float, default=None)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        cfg = _merged(args, _load_config(args.config))
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: cannot read config: {e}", file=sys.stderr)
        return EXIT_CONFIG
    cfg.setdefault("out", "polarlab-out")
    cfg.setdefault("seed", 0)
    os.makedirs(cfg["out"], exist_ok=True)
    try:
        return _COMMANDS[args.command](cfg)
    except GuardError as e:
        print(f"guard violation: {e}", file=sys.stderr)
        return EXIT_GUARD
    except (GridError, ValueError, KeyError) as e:
        print(f"invalid configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
