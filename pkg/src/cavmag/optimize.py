"""Derivative-free maximization of an entanglement measure and critical-
temperature search.

The optimizer is a seeded multi-restart Nelder-Mead over a box in
(delta_1, delta_2, delta_n_tilde, delta_e, J), all in omega_d units.
Unstable points score zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .gaussian import MEASURE_IDS, measure_values, steady_covariance
from .model import SystemParams

OPT_PARAMS = ("delta_1", "delta_2", "delta_n_tilde", "delta_e", "J")

ENTANGLEMENT_FLOOR = 1e-4  # below this a measure counts as vanished
T_FLOOR = 1e-3  # kelvin


class OptimizeError(RuntimeError):
    pass


class NonMonotoneProfile(OptimizeError):
    """Measure-vs-temperature curve is not monotone decreasing."""

    def __init__(self, message: str, samples):
        super().__init__(message)
        self.samples = samples


@dataclass(frozen=True)
class OptimizeSpec:
    measure: str
    box: dict[str, tuple[float, float]]  # omega_d units; lo == hi pins a param
    restarts: int = 6
    max_evaluations: int = 2000
    seed: int = 0

    def __post_init__(self):
        if self.measure not in MEASURE_IDS:
            raise OptimizeError(f"unknown measure id {self.measure!r}")
        if not self.box:
            raise OptimizeError("empty optimization box")
        for name, (lo, hi) in self.box.items():
            if name not in OPT_PARAMS:
                raise OptimizeError(
                    f"unknown box parameter {name!r}; choose from {OPT_PARAMS}"
                )
            if lo > hi:
                raise OptimizeError(f"box for {name!r} has lo > hi")
        if self.restarts < 1:
            raise OptimizeError("restarts must be >= 1")
        if self.max_evaluations < 1:
            raise OptimizeError("max_evaluations must be >= 1")


@dataclass(frozen=True)
class OptimumReport:
    best_point: dict[str, float]  # omega_d units
    best_value: float
    evaluations: int
    restarts: list[dict] = field(default_factory=list)


def _point_params(base: SystemParams, names, x) -> SystemParams:
    wd = base.omega_d
    changes = {}
    for name, v in zip(names, x):
        key = "delta_n_tilde_override" if name == "delta_n_tilde" else name
        changes[key] = v * wd
    return base.updated(**changes)


def evaluate_measure(p: SystemParams, measure: str) -> float | None:
    """Measure value at one parameter point; None when there is no steady state."""
    _, _, V = steady_covariance(p)
    if V is None:
        return None
    return measure_values(V, [measure])[measure]


def maximize(spec: OptimizeSpec, base: SystemParams) -> OptimumReport:
    """Box-constrained maximization of one measure by seeded direct search.

    A deterministic random scan seeds the best `restarts` simplex starts;
    each restart runs bounded Nelder-Mead within the remaining evaluation
    budget.  The returned point is the best stable one encountered anywhere.
    """
    names = [n for n in OPT_PARAMS if n in spec.box]
    free = [n for n in names if spec.box[n][0] < spec.box[n][1]]
    fixed = {n: spec.box[n][0] for n in names if n not in free}
    rng = np.random.default_rng(spec.seed)

    state = {"evals": 0, "best": None}  # best: (value, point tuple)

    def objective(x_free) -> float:
        x_free = np.clip(
            x_free,
            [spec.box[n][0] for n in free],
            [spec.box[n][1] for n in free],
        ) if free else x_free
        point = dict(fixed)
        point.update(zip(free, x_free))
        state["evals"] += 1
        try:
            value = evaluate_measure(
                _point_params(base, point.keys(), point.values()), spec.measure
            )
        except Exception:
            value = None
        if value is None:
            return 0.0
        if state["best"] is None or value > state["best"][0]:
            state["best"] = (value, dict(point))
        return value

    restart_log: list[dict] = []
    if not free:
        value = objective(np.empty(0))
        if state["best"] is None:
            raise OptimizeError("no stable point found in the box")
        restart_log.append({"start": dict(fixed), "best_value": value, "nfev": 1})
        return OptimumReport(best_point=state["best"][1],
                             best_value=state["best"][0],
                             evaluations=state["evals"], restarts=restart_log)

    lo = np.array([spec.box[n][0] for n in free])
    hi = np.array([spec.box[n][1] for n in free])
    n_scan = min(max(8 * spec.restarts, 32), max(1, spec.max_evaluations // 4))
    scan = rng.uniform(lo, hi, size=(n_scan, len(free)))
    scan[0] = 0.5 * (lo + hi)
    scanned = sorted(
        ((objective(x), tuple(x)) for x in scan), key=lambda t: -t[0]
    )
    starts = [np.array(x) for _, x in scanned[: spec.restarts]]

    for start in starts:
        budget = spec.max_evaluations - state["evals"]
        if budget <= 0:
            break
        res = minimize(
            lambda x: -objective(x),
            start,
            method="Nelder-Mead",
            bounds=list(zip(lo, hi)),
            options={
                "maxfev": budget,
                "xatol": 1e-4,
                "fatol": 1e-10,
                "initial_simplex": _initial_simplex(start, lo, hi),
            },
        )
        restart_log.append({
            "start": dict(zip(free, (float(v) for v in start))),
            "best_value": float(-res.fun),
            "nfev": int(res.nfev),
        })

    if state["best"] is None:
        raise OptimizeError("no stable point found in the box")
    value, point = state["best"]
    return OptimumReport(best_point=point, best_value=value,
                         evaluations=state["evals"], restarts=restart_log)


def _initial_simplex(start, lo, hi):
    """Axis-aligned simplex around the start, kept inside the box."""
    n = len(start)
    simplex = np.tile(start, (n + 1, 1))
    for i in range(n):
        step = 0.05 * (hi[i] - lo[i])
        if start[i] + step > hi[i]:
            step = -step
        simplex[i + 1, i] += step
    return simplex


def critical_temperature(p: SystemParams, measure: str, T_max: float,
                         tol: float = 1e-3) -> float:
    """Temperature at which a measure first drops below 1e-4.

    Bisection on [1 mK, T_max] to within ``tol`` (default 1 mK), after a
    coarse scan that verifies a monotone-decreasing profile.
    """
    if measure not in MEASURE_IDS:
        raise OptimizeError(f"unknown measure id {measure!r}")
    if T_max <= T_FLOOR:
        raise OptimizeError(f"T_max must exceed the {T_FLOOR} K floor")

    def value_at(T: float) -> float:
        v = evaluate_measure(p.updated(T=T), measure)
        return 0.0 if v is None else v

    v_floor = value_at(T_FLOOR)
    if v_floor < ENTANGLEMENT_FLOOR:
        raise OptimizeError(
            f"not entangled at floor temperature ({measure}={v_floor:.3e} "
            f"at T={T_FLOOR} K)"
        )
    n_samples = 9
    temps = [T_FLOOR + i * (T_max - T_FLOOR) / (n_samples - 1)
             for i in range(n_samples)]
    samples = [(T, value_at(T)) for T in temps]
    slack = 1e-6 * v_floor
    for (_, v_lo), (_, v_hi) in zip(samples, samples[1:]):
        if v_hi > v_lo + slack:
            raise NonMonotoneProfile(
                f"non-monotone profile for {measure}; sampled curve attached",
                samples=samples,
            )
    below = [T for T, v in samples if v < ENTANGLEMENT_FLOOR]
    if not below:
        raise OptimizeError(
            f"{measure} still above {ENTANGLEMENT_FLOOR} at T_max={T_max} K"
        )
    hi = below[0]
    lo = max(T for T, v in samples if T < hi and v >= ENTANGLEMENT_FLOOR)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if value_at(mid) < ENTANGLEMENT_FLOOR:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
