"""Grid evaluation of entanglement measures with figure-ready CSV output.

Axis values are dimensionless (units of omega_d) except the temperature axis,
which is kelvin.  Rows are emitted in row-major order over the axes and the
engine gives identical results for any worker count.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .gaussian import MEASURE_IDS, measure_values, steady_covariance
from .model import EPS0, HBAR, KB, SystemParams

SWEEP_PARAMS = ("delta_1", "delta_2", "delta_e", "delta_n_tilde", "J", "T", "delta_a")
LINKAGES = ("independent", "symmetric", "antisymmetric")


class SweepSpecError(ValueError):
    pass


@dataclass(frozen=True)
class Axis:
    param: str
    lo: float
    hi: float
    points: int

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise SweepSpecError(
                f"unknown sweep parameter {self.param!r}; "
                f"choose from {SWEEP_PARAMS}"
            )
        if self.points < 2:
            raise SweepSpecError(
                f"axis {self.param!r} needs at least 2 points, got {self.points}"
            )
        if not self.lo < self.hi:
            raise SweepSpecError(
                f"axis {self.param!r} needs lo < hi, got [{self.lo}, {self.hi}]"
            )

    def values(self) -> list[float]:
        step = (self.hi - self.lo) / (self.points - 1)
        return [self.lo + i * step for i in range(self.points)]


@dataclass(frozen=True)
class GridSpec:
    axes: tuple[Axis, ...]
    base: SystemParams
    linkage: str = "independent"
    measures: tuple[str, ...] = ()

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise SweepSpecError("a grid has one or two axes")
        if self.linkage not in LINKAGES:
            raise SweepSpecError(
                f"unknown linkage {self.linkage!r}; choose from {LINKAGES}"
            )
        axis_params = [a.param for a in self.axes]
        if len(set(axis_params)) != len(axis_params):
            raise SweepSpecError("axes must sweep distinct parameters")
        for mid in self.measures:
            if mid not in MEASURE_IDS:
                raise SweepSpecError(
                    f"unknown measure id {mid!r}; choose from {MEASURE_IDS}"
                )
        if "delta_a" in axis_params and self.linkage == "independent":
            raise SweepSpecError(
                "a delta_a axis requires symmetric or antisymmetric linkage"
            )
        if self.linkage != "independent":
            for bad in ("delta_1", "delta_2"):
                if bad in axis_params:
                    raise SweepSpecError(
                        f"axis {bad!r} conflicts with linkage {self.linkage!r}; "
                        "sweep delta_a instead"
                    )
            # without a delta_a axis the base detunings carry the linkage
            if "delta_a" not in axis_params:
                if self.linkage == "symmetric" and self.base.delta_1 != self.base.delta_2:
                    raise SweepSpecError(
                        "symmetric linkage without a delta_a axis requires "
                        "base.delta_1 == base.delta_2"
                    )
                if self.linkage == "antisymmetric" and self.base.delta_1 != -self.base.delta_2:
                    raise SweepSpecError(
                        "antisymmetric linkage without a delta_a axis requires "
                        "base.delta_1 == -base.delta_2"
                    )

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(a.param for a in self.axes) + ("stable",) + self.measures


@dataclass(frozen=True)
class SweepRow:
    axis_values: tuple[float, ...]
    stable: bool | None  # None when the point errored before a verdict
    measures: dict[str, float] | None
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    columns: tuple[str, ...]
    rows: list[SweepRow]
    metadata: dict = field(default_factory=dict)


def _point_params(spec: GridSpec, axis_values) -> SystemParams:
    changes: dict[str, float] = {}
    wd = spec.base.omega_d
    for axis, value in zip(spec.axes, axis_values):
        if axis.param == "delta_a":
            if spec.linkage == "symmetric":
                changes["delta_1"] = value * wd
                changes["delta_2"] = value * wd
            else:  # antisymmetric: delta_a = -delta_1 = delta_2
                changes["delta_1"] = -value * wd
                changes["delta_2"] = value * wd
        elif axis.param == "delta_n_tilde":
            changes["delta_n_tilde_override"] = value * wd
        elif axis.param == "T":
            changes["T"] = value
        else:
            changes[axis.param] = value * wd
    return spec.base.updated(**changes)


def _evaluate(spec: GridSpec, axis_values) -> SweepRow:
    try:
        p = _point_params(spec, axis_values)
        _, verdict, V = steady_covariance(p)
        if V is None:
            return SweepRow(axis_values, stable=False, measures=None)
        return SweepRow(axis_values, stable=True,
                        measures=measure_values(V, spec.measures))
    except SweepSpecError:
        raise
    except Exception as exc:  # per-point failures never abort the sweep
        return SweepRow(axis_values, stable=None, measures=None, error=str(exc))


def grid_points(spec: GridSpec):
    """Row-major cartesian product of the axis values."""
    if len(spec.axes) == 1:
        return [(v,) for v in spec.axes[0].values()]
    outer, inner = spec.axes
    return [(u, v) for u in outer.values() for v in inner.values()]


def run_grid(spec: GridSpec, workers: int = 1,
             progress: "callable | None" = None) -> SweepResult:
    """Evaluate the requested measures at every grid point.

    ``workers`` > 1 evaluates points on a thread pool; results are reduced in
    row-major order and are identical to a serial run.  ``progress`` (if given)
    is called with the number of completed rows after each block.
    """
    points = grid_points(spec)
    if workers <= 1:
        rows = []
        for i, pt in enumerate(points):
            rows.append(_evaluate(spec, pt))
            if progress is not None and (i + 1) % 200 == 0:
                progress(i + 1)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda pt: _evaluate(spec, pt), points))
        if progress is not None:
            progress(len(points))
    metadata = {
        "tool": "cavmag",
        "version": __version__,
        "constants": {"hbar_J_s": HBAR, "k_B_J_per_K": KB, "eps0_F_per_m": EPS0},
        "base_params": spec.base.as_dict(),
        "grid": {
            "axes": [
                {"param": a.param, "lo": a.lo, "hi": a.hi, "points": a.points}
                for a in spec.axes
            ],
            "linkage": spec.linkage,
            "measures": list(spec.measures),
        },
        "axis_units": {
            a.param: ("K" if a.param == "T" else "omega_d") for a in spec.axes
        },
    }
    return SweepResult(columns=spec.columns, rows=rows, metadata=metadata)


def _cell(value) -> str:
    if value is None:
        return ""
    return format(value, ".9g")


def emit_csv(result: SweepResult, destination) -> None:
    """Write the sweep table (9 significant digits) plus a metadata sidecar.

    Unstable and errored points leave their measure cells empty, so plots can
    distinguish "no entanglement" from "no steady state".
    """
    destination = Path(destination)
    n_axes = result.columns.index("stable")
    lines = [",".join(result.columns)]
    for row in result.rows:
        cells = [_cell(v) for v in row.axis_values]
        cells.append("" if row.stable is None else ("1" if row.stable else "0"))
        for mid in result.columns[n_axes + 1:]:
            cells.append(_cell(None if row.measures is None else row.measures.get(mid)))
        lines.append(",".join(cells))
    destination.write_text("\n".join(lines) + "\n")
    sidecar = destination.with_name(destination.name + ".meta.json")
    sidecar.write_text(json.dumps(result.metadata, sort_keys=True, indent=2) + "\n")


def read_csv(path) -> SweepResult:
    """Parse a file produced by emit_csv back into a SweepResult.

    The metadata sidecar is loaded when present.  Round-tripping a parsed
    result through emit_csv reproduces the file byte for byte.
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    columns = tuple(lines[0].split(","))
    if "stable" not in columns:
        raise SweepSpecError(f"{path} is not a sweep table (no 'stable' column)")
    n_axes = columns.index("stable")
    measure_ids = columns[n_axes + 1:]
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        axis_values = tuple(float(c) for c in cells[:n_axes])
        stable_cell = cells[n_axes]
        stable = None if stable_cell == "" else stable_cell == "1"
        measures = None
        if stable:
            measures = {
                mid: float(cell)
                for mid, cell in zip(measure_ids, cells[n_axes + 1:])
                if cell != ""
            }
        rows.append(SweepRow(axis_values, stable, measures))
    metadata = {}
    sidecar = path.with_name(path.name + ".meta.json")
    if sidecar.exists():
        metadata = json.loads(sidecar.read_text())
    return SweepResult(columns=columns, rows=rows, metadata=metadata)
