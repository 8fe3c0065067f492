"""Command-line scenario runner.

Every subcommand reads an optional JSON config, fills in defaults, writes
its data files into ``--out`` and finishes with ``manifest.json`` echoing the
fully resolved configuration.  Exit codes: 0 ok, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .asymptotics import asymptotic_amplitude, bloch_integral
from .checks import run_all
from .ensemble import EnsembleError, EnsembleSpec, SpreadScenario, draw_disorder, run_ensemble
from .errors import ConfigurationError, NumericalError, ResourceError
from .export import write_csv, write_json, write_trajectory
from .model import LatticeParams, SiteField, build_auxiliary, build_chain, build_zigzag
from .observables import probe_trace, scatter_report, spread_metrics
from .propagator import InitialCondition, evolve, min_lattice_size
from .spectrum import band_table, dispersion_chain, saddle_constants

log = logging.getLogger("nhtransport")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

LOCALIZATION_SETTINGS = [
    {"label": "hermitian", "kappa": 0.0, "rho": 1.0, "gamma": 0.0, "phi": 0.0},
    {"label": "nh_phi0", "kappa": 0.3, "rho": 1.0, "gamma": 0.6, "phi": 0.0},
    {"label": "nh_phi_pi4", "kappa": 0.3, "rho": 1.0, "gamma": 0.6, "phi": "pi/4"},
    {"label": "nh_phi_pi2", "kappa": 0.3, "rho": 1.0, "gamma": 0.6, "phi": "pi/2"},
]


def _even(n: int) -> int:
    return n + (n % 2)


def _overrides(cfg: dict, args) -> dict:
    cfg = dict(cfg)
    for key, value in (("dt", args.dt), ("t_max", args.tmax), ("size", args.size)):
        if value is not None:
            cfg[key] = value
    return cfg


def _sample_every(dt: float, sample_dt: float) -> int:
    return max(1, int(round(sample_dt / dt)))


def _step(op, cfg, t_max):
    """Resolved step (exactly dividing ``t_max``) and sampling stride."""
    dt = cfgmod.number(cfg, "dt", None, minimum=1e-12)
    if dt is None:
        dt = 0.05 / op.rate_bound()
    nsteps = max(1, math.ceil(t_max / dt - 1e-9))
    dt = t_max / nsteps
    return dt, _sample_every(dt, cfgmod.number(cfg, "sample_dt", t_max / 200, minimum=1e-12))


def _potential(dis: dict, size: int) -> SiteField:
    if dis["kind"] == "uniform":
        return draw_disorder(dis["seed"], size, dis["delta"])
    if dis["kind"] == "defect_pair":
        return SiteField.defect_pair(size, dis["v0"], dis["n1"], dis["n2"])
    return SiteField.clean(size)


# ---------------------------------------------------------------------------
# subcommands


def cmd_band(cfg, args, out: Path) -> dict:
    params = cfgmod.lattice_params(cfg)
    phis = cfgmod.angle_list(cfg, "phis", [0.0, "pi/4", "pi/2"])
    points = cfgmod.number(cfg, "points", 512, minimum=2, integer=True)
    files = []
    for i, phi in enumerate(phis):
        p = LatticeParams(params.kappa, params.rho, params.gamma, phi)
        path = write_csv(out / f"band_{i}.csv", ["q", "re_e", "im_e", "re_de", "im_de", "re_d2e", "im_d2e"],
                         band_table(p, points))
        files.append({"file": path.name, "phi": phi})
    return {"params": params.as_dict(), "phis": phis, "points": points, "files": files}


def cmd_spread(cfg, args, out: Path) -> dict:
    params = cfgmod.lattice_params(cfg)
    t_max = float(cfgmod.number(cfg, "t_max", 30.0, minimum=0))
    margin = cfgmod.number(cfg, "margin", 40, minimum=0, integer=True)
    size = cfgmod.number(cfg, "size", None, minimum=4, integer=True)
    size = _even(size if size is not None else min_lattice_size(params, t_max, margin))
    dis = cfgmod.disorder_block(cfg, args.seed)
    init_cfg = dict(cfg.get("init") or {"kind": "single_site", "n0": 0})
    unknown = set(init_cfg) - {"kind", "n0", "w0", "q0"}
    if unknown:
        raise ConfigurationError(f"unknown init keys: {sorted(unknown)}")
    if init_cfg.get("kind", "single_site") == "gaussian":
        init = InitialCondition.gaussian(init_cfg.get("n0", 0), init_cfg.get("w0", 10.0),
                                         cfgmod.parse_angle(init_cfg.get("q0", 0.0)))
    else:
        init = InitialCondition.single_site(init_cfg.get("n0", 0))
    representation = cfg.get("representation", "chain")
    potential = _potential(dis, size)
    aux = cfgmod.auxiliary_params(cfg)
    if representation == "chain":
        op = build_chain(params, potential, size)
    elif representation == "zigzag":
        va, vb = potential.to_sublattices()
        op = build_zigzag(params, va, vb, size // 2)
    elif representation == "auxiliary":
        if aux is None:
            raise ConfigurationError("auxiliary representation needs epsilon, sigma, u_site")
        va, vb = potential.to_sublattices()
        op = build_auxiliary(params, aux, va, vb, size // 2)
    else:
        raise ConfigurationError(f"unknown representation {representation!r}")
    dt, every = _step(op, cfg, t_max)
    traj = evolve(op, init, t_max, dt, every)
    files = write_trajectory(out, "spread", traj, params.as_dict(), pgm=bool(cfg.get("pgm", True)))
    metrics = spread_metrics(traj)
    files["metrics"] = write_csv(out / "spread_metrics.csv", ["t", "ln_P", "mean", "sigma"], metrics.table()).name
    return {
        "params": params.as_dict(), "size": size, "offset": size // 2, "t_max": t_max, "dt": dt,
        "sample_every": every, "disorder": dis, "init": init.__dict__, "representation": representation,
        "auxiliary": None if aux is None else {"epsilon": aux.epsilon, "sigma": aux.sigma, "u_site": aux.u_site},
        "edge_touch": traj.edge_touch, "files": files,
    }


def cmd_ensemble(cfg, args, out: Path) -> dict:
    deltas = [float(d) for d in cfg.get("deltas", [0.5, 1.0, 1.5])]
    if not deltas or any(d < 0 for d in deltas):
        raise ConfigurationError("deltas must be a non-empty list of values >= 0")
    settings = cfg.get("settings", LOCALIZATION_SETTINGS)
    if not isinstance(settings, list) or not settings:
        raise ConfigurationError("settings must be a non-empty list")
    realizations = cfgmod.number(cfg, "realizations", 100, minimum=1, integer=True)
    size = _even(cfgmod.number(cfg, "size", 400, minimum=4, integer=True))
    t_max = float(cfgmod.number(cfg, "t_max", 100.0, minimum=0))
    sample_dt = float(cfgmod.number(cfg, "sample_dt", 1.0, minimum=1e-12))
    dt = cfgmod.number(cfg, "dt", None, minimum=1e-12)
    seed = args.seed if args.seed is not None else cfgmod.number(cfg, "seed", 0, minimum=0, integer=True)
    curves = []
    for s in settings:
        unknown = set(s) - (cfgmod.LATTICE_KEYS | {"label"})
        if unknown:
            raise ConfigurationError(f"unknown setting keys: {sorted(unknown)}")
        params = cfgmod.lattice_params(s)
        label = s.get("label", f"setting{len(curves)}")
        for delta in deltas:
            scenario = SpreadScenario(params, size, t_max, sample_dt, dt)
            spec = EnsembleSpec(realizations, seed, delta, scenario)
            res = run_ensemble(spec, threads=args.threads)
            stem = f"ensemble_{label}_delta{delta:g}"
            write_csv(out / f"{stem}.csv", ["t", "sigma_mean", "sigma_stderr"],
                      np.column_stack([res.times, res.sigma_mean, res.sigma_stderr]))
            step, every = scenario.grid(delta)
            write_json(out / f"{stem}.json", {"label": label, "delta": delta, "params": params.as_dict(),
                                              "seeds": res.seeds, "edge_touches": res.edge_touches,
                                              "dt": step, "sample_every": every})
            curves.append({"label": label, "delta": delta, "file": f"{stem}.csv",
                           "sigma_final": float(res.sigma_mean[-1]), "dt": step})
    return {"deltas": deltas, "settings": settings, "realizations": realizations, "size": size,
            "offset": size // 2, "t_max": t_max, "sample_dt": sample_dt, "base_seed": seed, "curves": curves}


def cmd_wavepacket(cfg, args, out: Path) -> dict:
    params = cfgmod.lattice_params(cfg)
    mode = cfg.get("mode", "defects")
    if mode not in ("defects", "disorder"):
        raise ConfigurationError(f"unknown wavepacket mode {mode!r}")
    w0 = float(cfgmod.number(cfg, "w0", 10.0, minimum=1e-9))
    q0s = cfgmod.angle_list(cfg, "q0s", ["-pi/2", "pi/2"])
    threshold = float(cfgmod.number(cfg, "pulse_threshold", 0.1, minimum=0))
    if mode == "defects":
        gap = float(cfgmod.number(cfg, "launch_gap", 4 * w0, minimum=0))
        v0 = float(cfgmod.number(cfg, "v0", 1.0))
        n1 = cfgmod.number(cfg, "n1", -20, integer=True)
        n2 = cfgmod.number(cfg, "n2", 0, integer=True)
        if n2 <= n1:
            raise ConfigurationError("need n1 < n2")
        dis = {"kind": "defect_pair", "v0": v0, "n1": n1, "n2": n2}
    else:
        dis = cfgmod.disorder_block(cfg, args.seed)
        if dis["kind"] != "uniform":
            dis = {"kind": "uniform", "delta": 1.0, "seed": args.seed or 0}
        # launch inside the disorder; "reflected" is whatever ends up behind the launch site
        gap = float(cfgmod.number(cfg, "launch_gap", 0.0, minimum=0))
        n1 = n2 = 0
    speeds = [dispersion_chain(q0, params).de.real for q0 in q0s]
    if any(abs(v) < 1e-9 for v in speeds):
        raise ConfigurationError("carrier wave number with zero group velocity")
    vmin = min(abs(v) for v in speeds)
    span = n2 - n1
    default_t = (5 * span + 11 * w0) / vmin if mode == "defects" else 10 * w0 / vmin
    t_max = float(cfgmod.number(cfg, "t_max", default_t, minimum=0))
    # 2 rho bounds |Re E'| over the whole band, so the fastest wavefront stays inside
    default_size = 2 * (math.ceil(2 * params.rho * t_max) + max(abs(n1), abs(n2)) + int(gap) + int(6 * w0))
    size = _even(cfgmod.number(cfg, "size", default_size, minimum=4, integer=True))
    potential = _potential(dis, size)
    op = build_chain(params, potential, size)
    dt, every = _step(op, cfg, t_max)
    runs = {}
    for q0, v in zip(q0s, speeds):
        direction = "right" if v > 0 else "left"
        n0 = int(round(n1 - gap)) if direction == "right" else int(round(n2 + gap))
        traj = evolve(op, InitialCondition.gaussian(n0, w0, q0), t_max, dt, every)
        report = scatter_report(traj, n1, n2, threshold, w0, direction)
        stem = f"wavepacket_{direction}"
        files = write_trajectory(out, stem, traj, params.as_dict(), pgm=bool(cfg.get("pgm", True)))
        files["probe"] = write_csv(out / f"{stem}_probe.csv", ["t", "probe_amplitude"],
                                   np.column_stack([traj.times, probe_trace(traj, report.probe_site)])).name
        runs[direction] = {"q0": q0, "n0": n0, "group_velocity": v, "report": report.__dict__,
                           "edge_touch": traj.edge_touch, "files": files}
    write_json(out / "scatter_report.json", runs)
    return {"params": params.as_dict(), "mode": mode, "w0": w0, "q0s": q0s, "disorder": dis,
            "launch_gap": gap, "pulse_threshold": threshold, "t_max": t_max, "size": size,
            "offset": size // 2, "dt": dt, "sample_every": every, "runs": runs}


def cmd_asymptotics(cfg, args, out: Path) -> dict:
    params = cfgmod.lattice_params(cfg)
    t = float(cfgmod.number(cfg, "time", cfgmod.number(cfg, "t_max", 20.0), minimum=1e-9))
    panels = cfgmod.number(cfg, "panels", 1024, minimum=64, integer=True)
    margin = cfgmod.number(cfg, "margin", 40, minimum=0, integer=True)
    size = _even(cfgmod.number(cfg, "size", min_lattice_size(params, t, margin), minimum=4, integer=True))
    sc = saddle_constants(params)
    op = build_chain(params, size=size)
    dt, _ = _step(op, cfg, t)
    traj = evolve(op, InitialCondition.single_site(0), t, dt, sample_every=1 << 40)
    n = traj.sites
    rows = np.column_stack([n, np.abs(bloch_integral(n, t, params, panels)),
                            np.abs(asymptotic_amplitude(n, t, sc)), np.abs(traj.physical())])
    path = write_csv(out / "asymptotics.csv", ["n", "abs_bloch", "abs_asymptotic", "abs_propagator"], rows)
    return {"params": params.as_dict(), "time": t, "panels": panels, "size": size, "offset": size // 2,
            "dt": dt, "saddle": sc.__dict__, "files": [path.name]}


def cmd_check(cfg, args, out: Path) -> dict:
    results = run_all(args.seed or 0)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    summary = {"checks": [{"name": n, "passed": bool(ok), "detail": d} for n, ok, d in results]}
    if not all(ok for _, ok, _ in results):
        write_json(out / "check.json", summary)
        raise NumericalError("invariant check failed")
    write_json(out / "check.json", summary)
    return summary


COMMANDS = {
    "band": cmd_band,
    "spread": cmd_spread,
    "ensemble": cmd_ensemble,
    "wavepacket": cmd_wavepacket,
    "asymptotics": cmd_asymptotics,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nhtransport", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON scenario file")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--seed", type=int, help="disorder seed (u64)")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--dt", type=float)
        p.add_argument("--tmax", type=float)
        p.add_argument("--size", type=int)
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.seed is not None and not 0 <= args.seed < 1 << 64:
            raise ConfigurationError("--seed must be an unsigned 64-bit integer")
        if args.threads < 1:
            raise ConfigurationError("--threads must be >= 1")
        cfg = cfgmod.load_config(args.config)
        cfgmod.validate_keys(cfg, args.command)
        cfg = _overrides(cfg, args)
        args.out.mkdir(parents=True, exist_ok=True)
        resolved = COMMANDS[args.command](cfg, args, args.out)
        write_json(args.out / "manifest.json", {"subcommand": args.command, "input": cfg, "resolved": resolved})
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, EnsembleError, ResourceError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
