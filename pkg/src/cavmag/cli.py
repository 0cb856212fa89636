"""Command-line front end: point evaluation, sweeps, optimization, critical
temperature and stability maps.

Exit codes: 0 success / stable point, 1 configuration error, 2 no steady
state (unstable point, infeasible box, vanished entanglement).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import (
    ConfigError,
    apply_set,
    available_presets,
    build_coupling,
    build_grid_specs,
    build_optimize_spec,
    build_system,
    build_tc,
    load_layers,
)
from .dynamics import SteadyStateError
from .gaussian import BIPARTITE_MEASURES, TRIPARTITE_MEASURES, GaussianError, full_report
from .model import EPS0, HBAR, KB, validate_regime
from .optimize import NonMonotoneProfile, OptimizeError, critical_temperature, maximize
from .sweep import emit_csv, run_grid


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="user configuration file")
    common.add_argument("--preset", metavar="NAME",
                        help="bundled preset name (see --list-presets)")
    common.add_argument("--set", metavar="KEY=VALUE", action="append",
                        default=[], dest="sets",
                        help="override a parameter (rates in omega_d units, "
                             "T in K) or a raw section.key")
    common.add_argument("--out", metavar="DIR", default="cavmag-out",
                        help="output directory (default: cavmag-out)")
    common.add_argument("--workers", type=int, default=1, metavar="N")
    common.add_argument("--seed", type=int, default=None, metavar="N",
                        help="override the optimizer seed")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="cavmag",
        description="Steady-state entanglement of a driven two-cavity "
                    "magnomechanical network",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--list-presets", action="store_true",
                        help="list bundled presets and exit")
    sub = parser.add_subparsers(dest="command")
    sub.add_parser("point", parents=[common],
                   help="evaluate every measure at one parameter point")
    sub.add_parser("sweep", parents=[common],
                   help="run the configured parameter sweeps to CSV")
    sub.add_parser("optimize", parents=[common],
                   help="maximize a measure over the configured box")
    sub.add_parser("tc", parents=[common],
                   help="critical temperature of the configured measure")
    sub.add_parser("stability-map", parents=[common],
                   help="sweep the stability flag only")
    return parser


def _resolve(args):
    cfg = load_layers(preset=args.preset, config_path=args.config)
    for assignment in args.sets:
        apply_set(cfg, assignment)
    params = build_system(cfg)
    coupling = build_coupling(cfg)
    return cfg, params, coupling


def _write_sidecar(out: Path, command: str, cfg, args) -> None:
    record = {
        "tool": "cavmag",
        "version": __version__,
        "command": command,
        "constants": {"hbar_J_s": HBAR, "k_B_J_per_K": KB, "eps0_F_per_m": EPS0},
        "config": cfg,
        "overrides": list(args.sets),
        "preset": args.preset,
        "seed": args.seed,
        "workers": args.workers,
    }
    (out / f"{command}.meta.json").write_text(
        json.dumps(record, sort_keys=True, indent=2) + "\n")


def _cplx(z) -> dict:
    return {"re": z.real, "im": z.imag}


def cmd_point(args) -> int:
    cfg, params, coupling = _resolve(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = full_report(params)
    warnings = validate_regime(params, report.steady, coupling)
    ss = report.steady
    wd = params.omega_d

    print("steady state:")
    for label, z in (("a1", ss.a1), ("a2", ss.a2), ("e", ss.e), ("n", ss.n)):
        print(f"  <{label}> = {z.real:+.6e} {z.imag:+.6e}j   (|{label}| = {abs(z):.4e})")
    print(f"  <x> = {ss.x_mean:+.6e}   <y> = {ss.y_mean:+.6e}")
    print(f"  delta_n_tilde = {ss.delta_n_tilde / wd:+.6f} omega_d")
    verdict = report.verdict
    print(f"stability: {'stable' if verdict.stable else 'UNSTABLE'} "
          f"(spectral abscissa {verdict.spectral_abscissa:+.4e} rad/s, "
          f"margin {verdict.margin:+.4e} rad/s)")
    print("bipartite log-negativities:")
    for mid, pair in BIPARTITE_MEASURES.items():
        value = report.bipartite.get(pair)
        print(f"  {mid:8s} = " + ("n/a" if value is None else f"{value:.6f}"))
    print("tripartite residual contangles (minimum over partitions):")
    for mid, triple in TRIPARTITE_MEASURES.items():
        rc = report.tripartite.get(triple)
        print(f"  {mid:8s} = " + ("n/a" if rc is None else f"{rc.r_min:.6f}"))
    if warnings:
        print("regime warnings:")
        for w in warnings:
            print(f"  - {w}")
    else:
        print("regime warnings: none")

    record = {
        "stable": report.stable,
        "spectral_abscissa_radps": verdict.spectral_abscissa,
        "margin_radps": verdict.margin,
        "steady_state": {
            "a1": _cplx(ss.a1), "a2": _cplx(ss.a2),
            "e": _cplx(ss.e), "n": _cplx(ss.n),
            "x": ss.x_mean, "y": ss.y_mean,
            "delta_n_tilde_radps": ss.delta_n_tilde,
        },
        "bipartite": {mid: report.bipartite.get(pair)
                      for mid, pair in BIPARTITE_MEASURES.items()},
        "tripartite": {
            mid: (None if report.tripartite.get(tr) is None else {
                "partitions": report.tripartite[tr].partitions,
                "r_min": report.tripartite[tr].r_min,
            })
            for mid, tr in TRIPARTITE_MEASURES.items()
        },
        "warnings": warnings,
    }
    (out / "point.json").write_text(json.dumps(record, sort_keys=True, indent=2) + "\n")
    _write_sidecar(out, "point", cfg, args)
    return 0 if report.stable else 2


def _run_sweeps(args, only_stability: bool) -> int:
    cfg, params, _ = _resolve(args)
    specs = build_grid_specs(cfg, params)
    if not specs:
        raise ConfigError("the configuration defines no [sweep] section")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, spec in specs:
        if only_stability and spec.measures:
            spec = type(spec)(axes=spec.axes, base=spec.base,
                              linkage=spec.linkage, measures=())
        progress = None
        if args.verbose:
            total = 1
            for a in spec.axes:
                total *= a.points
            progress = lambda done, total=total, name=name: print(
                f"[{name}] {done}/{total} rows", file=sys.stderr)
        result = run_grid(spec, workers=args.workers, progress=progress)
        destination = out / f"{name}.csv"
        emit_csv(result, destination)
        n_unstable = sum(1 for r in result.rows if r.stable is False)
        n_err = sum(1 for r in result.rows if r.error is not None)
        print(f"wrote {destination} ({len(result.rows)} rows, "
              f"{n_unstable} unstable, {n_err} errors)")
    _write_sidecar(out, "stability-map" if only_stability else "sweep", cfg, args)
    return 0


def cmd_sweep(args) -> int:
    return _run_sweeps(args, only_stability=False)


def cmd_stability_map(args) -> int:
    return _run_sweeps(args, only_stability=True)


def cmd_optimize(args) -> int:
    cfg, params, _ = _resolve(args)
    spec = build_optimize_spec(cfg, seed_override=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        report = maximize(spec, params)
    except OptimizeError as exc:
        print(f"optimization failed: {exc}", file=sys.stderr)
        return 2
    print(f"best {spec.measure} = {report.best_value:.6f} "
          f"after {report.evaluations} evaluations")
    for name, value in report.best_point.items():
        print(f"  {name} = {value:+.4f} omega_d")
    record = {
        "measure": spec.measure,
        "seed": spec.seed,
        "best_value": report.best_value,
        "best_point_wd": report.best_point,
        "evaluations": report.evaluations,
        "restarts": report.restarts,
    }
    (out / "optimize_report.json").write_text(
        json.dumps(record, sort_keys=True, indent=2) + "\n")
    trace_lines = ["restart,best_value,nfev"]
    for i, r in enumerate(report.restarts):
        trace_lines.append(f"{i},{format(r['best_value'], '.9g')},{r['nfev']}")
    (out / "optimize_trace.csv").write_text("\n".join(trace_lines) + "\n")
    _write_sidecar(out, "optimize", cfg, args)
    return 0


def cmd_tc(args) -> int:
    cfg, params, _ = _resolve(args)
    measure, t_max, tol = build_tc(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        t_c = critical_temperature(params, measure, t_max, tol=tol)
    except NonMonotoneProfile as exc:
        print(f"tc failed: {exc}", file=sys.stderr)
        for T, v in exc.samples:
            print(f"  T={T:.4f} K  {measure}={v:.6e}", file=sys.stderr)
        return 2
    except OptimizeError as exc:
        print(f"tc failed: {exc}", file=sys.stderr)
        return 2
    print(f"critical temperature for {measure}: {t_c * 1e3:.1f} mK "
          f"(threshold 1e-4, tolerance {tol * 1e3:.1f} mK)")
    (out / "tc.json").write_text(json.dumps(
        {"measure": measure, "T_c_K": t_c, "T_max_K": t_max, "tol_K": tol},
        sort_keys=True, indent=2) + "\n")
    _write_sidecar(out, "tc", cfg, args)
    return 0


_COMMANDS = {
    "point": cmd_point,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "tc": cmd_tc,
    "stability-map": cmd_stability_map,
}


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    if args.list_presets:
        for name in available_presets():
            print(name)
        return 0
    if args.command is None:
        parser.print_help()
        return 1
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (SteadyStateError, GaussianError) as exc:
        print(f"no steady state: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
