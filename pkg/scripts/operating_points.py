#!/usr/bin/env python3
"""Re-derive the four optimized operating points and their critical
temperatures, printing a summary table.

Usage:
    python scripts/operating_points.py [--seed N]
"""
import argparse
import sys

from cavmag.config import (
    build_optimize_spec,
    build_system,
    build_tc,
    load_layers,
)
from cavmag.optimize import OptimizeError, critical_temperature, maximize

PRESETS = ("table2_a1n", "table2_a1d", "table2_ne", "table2_de")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()

    print(f"{'preset':12s} {'measure':8s} {'best':>8s} "
          f"{'d1':>6s} {'d2':>6s} {'dnt':>6s} {'de':>6s} {'J':>5s} {'T_c':>8s}")
    for preset in PRESETS:
        cfg = load_layers(preset=preset)
        base = build_system(cfg)
        spec = build_optimize_spec(cfg, seed_override=args.seed)
        report = maximize(spec, base)
        bp = report.best_point
        wd = base.omega_d
        at_best = base.updated(
            delta_1=bp["delta_1"] * wd, delta_2=bp["delta_2"] * wd,
            delta_n_tilde_override=bp["delta_n_tilde"] * wd,
            delta_e=bp["delta_e"] * wd, J=bp["J"] * wd)
        measure, t_max, tol = build_tc(cfg)
        try:
            t_c = f"{critical_temperature(at_best, measure, t_max, tol=tol) * 1e3:6.1f}mK"
        except OptimizeError as exc:
            t_c = f"({exc})"
        print(f"{preset:12s} {spec.measure:8s} {report.best_value:8.4f} "
              f"{bp['delta_1']:+6.2f} {bp['delta_2']:+6.2f} "
              f"{bp['delta_n_tilde']:+6.2f} {bp['delta_e']:+6.2f} "
              f"{bp['J']:5.2f} {t_c:>8s}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
