"""Parameter sweeps over the (delta_c, delta2) plane, optimum scans and presets.

Grid points are independent; they are farmed out to a process pool and the
rows come back in a fixed axis2-major order, so output does not depend on the
number of workers.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NoRoot, NonUnique, NotConverged, ZeroPhotonNumber
from .model import ModelParams
from .spectrum import resonance_frequency
from .steady import (
    DEFAULT_FOCK_CUTOFF,
    ESCALATED_FOCK_CUTOFF,
    photon_distribution,
    photon_number,
    safe_g,
    solve_operating_point,
)

OBSERVABLES = ("n_s", "g12", "g13", "g22", "p_tilde")
G_ORDERS = {"g12": (1, 2), "g13": (1, 3), "g22": (2, 2)}
MODES = ("sweep", "scan-optimal", "correlate")
OVERLAYS = ("delta1_plus_over_g", "delta1_minus_over_g", "delta2_plus_over_g", "delta2_minus_over_g")


@dataclass(frozen=True)
class Axis:
    start: float
    stop: float
    num: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.start) and np.isfinite(self.stop)):
            raise ValueError("axis range must be finite")
        if int(self.num) != self.num or self.num < 1:
            raise ValueError(f"axis point count must be >= 1, got {self.num}")

    @classmethod
    def fixed(cls, value: float) -> "Axis":
        return cls(value, value, 1)

    def values(self) -> np.ndarray:
        if self.num == 1:
            return np.array([float(self.start)])
        return np.linspace(self.start, self.stop, int(self.num))


@dataclass(frozen=True)
class SweepSpec:
    model: ModelParams
    axis1: Axis = Axis(-4.0, 4.0, 101)
    axis2: Axis = Axis.fixed(0.0)
    observables: Tuple[str, ...] = ("n_s", "g12")
    fock_cutoff: int = DEFAULT_FOCK_CUTOFF
    escalate_to: Optional[int] = ESCALATED_FOCK_CUTOFF
    workers: int = 1
    two_level: bool = False
    mode: str = "sweep"
    tau_orders: Tuple[int, ...] = (1,)
    tau_max: float = 20.0
    tau_points: int = 200
    search_window: float = 4.0
    description: str = ""

    def __post_init__(self):
        bad = set(self.observables) - set(OBSERVABLES)
        if bad:
            raise ValueError(f"unknown observables {sorted(bad)}; choose from {OBSERVABLES}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def with_(self, **changes) -> "SweepSpec":
        return replace(self, **changes)

    def grid(self) -> List[Tuple[float, float]]:
        """Grid points ``(delta_c/g, delta2/delta_c)``, axis2-major."""
        return [(float(x), float(r2)) for r2 in self.axis2.values() for x in self.axis1.values()]


@dataclass
class ResultRow:
    delta_c_over_g: float
    delta2_ratio: float
    values: Dict[str, float] = field(default_factory=dict)
    fock_cutoff: int = DEFAULT_FOCK_CUTOFF
    truncation_suspect: bool = False
    undefined_correlation: bool = False
    degenerate_point: bool = False
    solver_error: str = ""

    def as_dict(self) -> Dict[str, object]:
        out = {"delta_c_over_g": self.delta_c_over_g, "delta2_ratio": self.delta2_ratio}
        out.update(self.values)
        out.update(fock_cutoff=self.fock_cutoff, truncation_suspect=int(self.truncation_suspect),
                   undefined_correlation=int(self.undefined_correlation),
                   degenerate_point=int(self.degenerate_point), solver_error=self.solver_error)
        return out


def value_columns(observables: Sequence[str]) -> List[str]:
    cols = []
    for obs in OBSERVABLES:
        if obs not in observables:
            continue
        if obs == "p_tilde":
            cols += ["p_tilde_1", "p_tilde_2"]
        elif obs == "n_s":
            cols.append("n_s")
        else:
            cols += [obs, f"log10_{obs}"]
    return cols


def result_columns(spec: SweepSpec) -> List[str]:
    return (["delta_c_over_g", "delta2_ratio"] + value_columns(spec.observables) + list(OVERLAYS)
            + ["fock_cutoff", "truncation_suspect", "undefined_correlation", "degenerate_point", "solver_error"])


def _log10(x: float) -> float:
    return math.log10(x) if x > 0 else (-math.inf if x == 0 else math.nan)


def evaluate_point(spec: SweepSpec, x: float, r2: float) -> ResultRow:
    """Steady state and equal-time observables at one grid point."""
    p = spec.model.at(x, r2)
    row = ResultRow(delta_c_over_g=x, delta2_ratio=r2, degenerate_point=(x == 0.0))
    cols = value_columns(spec.observables)
    try:
        res = solve_operating_point(p, spec.fock_cutoff, two_level=spec.two_level, escalate_to=spec.escalate_to)
    except (NonUnique, NotConverged) as exc:
        row.values = {c: math.nan for c in cols}
        row.solver_error = type(exc).__name__
        return row
    rho = res.rho
    row.fock_cutoff = res.fock_cutoff
    row.truncation_suspect = res.truncation_suspect
    vals: Dict[str, float] = {}
    for obs in spec.observables:
        if obs == "n_s":
            vals["n_s"] = photon_number(rho)
        elif obs == "p_tilde":
            try:
                _, pt = photon_distribution(rho)
                vals["p_tilde_1"], vals["p_tilde_2"] = float(pt[1]), float(pt[2])
            except ZeroPhotonNumber:
                vals["p_tilde_1"] = vals["p_tilde_2"] = math.nan
                row.undefined_correlation = True
        else:
            n, k = G_ORDERS[obs]
            g = safe_g(rho, n, k)
            if math.isnan(g):
                row.undefined_correlation = True
            vals[obs] = g
            vals[f"log10_{obs}"] = _log10(g)
    row.values = {c: vals[c] for c in cols}
    return row


def resonance_overlay(spec: SweepSpec, r2: float) -> Dict[str, float]:
    """Analytic one- and two-photon resonances (units of g) at ``delta2/delta_c = r2``."""
    out = {}
    for n in (1, 2):
        for branch, name in (("+", "plus"), ("-", "minus")):
            key = f"delta{n}_{name}_over_g"
            if spec.two_level:
                out[key] = (-1.0 if branch == "+" else 1.0) / math.sqrt(n)
                continue
            try:
                roots = resonance_frequency(n, branch, spec.model.delta1_ratio, r2, spec.model.g, spec.search_window)
                out[key] = min(roots, key=abs) / spec.model.g
            except NoRoot:
                out[key] = math.nan
    return out


def _point_task(args):
    spec, x, r2 = args
    return evaluate_point(spec, x, r2)


def _map(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


def run_sweep(spec: SweepSpec) -> List[ResultRow]:
    """Evaluate every grid point; one row per point, axis2-major.

    A failing point yields a flagged row rather than aborting the sweep.
    """
    grid = spec.grid()
    rows = _map(_point_task, [(spec, x, r2) for x, r2 in grid], spec.workers)
    overlays = {r2: resonance_overlay(spec, r2) for r2 in spec.axis2.values()}
    for row in rows:
        row.values.update(overlays[row.delta2_ratio])
    return rows


@dataclass
class OptimalRow:
    delta2_ratio: float
    g_opt: float
    n_s_opt: float
    delta_c_over_g: float
    flat: bool = False

    def as_dict(self):
        return {"delta2_ratio": self.delta2_ratio, "g12_opt": self.g_opt, "log10_g12_opt": _log10(self.g_opt),
                "n_s_opt": self.n_s_opt, "argmin_delta_c_over_g": self.delta_c_over_g, "flat": int(self.flat)}


OPTIMAL_COLUMNS = ["delta2_ratio", "g12_opt", "log10_g12_opt", "n_s_opt", "argmin_delta_c_over_g", "flat"]


def _g12_at(model, x, r2, fock_cutoff, two_level):
    res = solve_operating_point(model.at(x, r2), fock_cutoff, two_level=two_level, check_unique=False)
    return safe_g(res.rho, 1, 2), photon_number(res.rho)


def _optimal_task(args):
    model, r2, xs, fock_cutoff, two_level, xtol = args
    vals = np.array([_g12_at(model, x, r2, fock_cutoff, two_level)[0] for x in xs])
    if np.all(np.isnan(vals)):
        return OptimalRow(r2, math.nan, math.nan, math.nan, flat=True)
    i = int(np.nanargmin(vals))
    best_x, best_g = float(xs[i]), float(vals[i])
    flat = i == 0 or i == len(xs) - 1
    if not flat and vals[i - 1] > best_g < vals[i + 1]:
        res = minimize_scalar(lambda x: _g12_at(model, x, r2, fock_cutoff, two_level)[0],
                              bracket=(xs[i - 1], xs[i], xs[i + 1]), method="golden", options={"xtol": xtol})
        if np.isfinite(res.fun) and res.fun < best_g:
            best_x, best_g = float(res.x), float(res.fun)
    _, ns = _g12_at(model, best_x, r2, fock_cutoff, two_level)
    return OptimalRow(float(r2), best_g, ns, best_x, flat=flat)


def scan_optimal(delta2_ratios: Sequence[float], model: ModelParams, bracket=(-4.0, 4.0), grid_points: int = 81,
                 fock_cutoff: int = DEFAULT_FOCK_CUTOFF, two_level: bool = False, workers: int = 1,
                 xtol: float = 1e-6) -> List[OptimalRow]:
    """Minimum of g_1^(2)(0) over delta_c for each delta2/delta_c, with n_s at the minimum.

    The inner search is a grid over ``bracket`` (units of g) followed by a
    golden-section refinement around the best grid point. A minimum on the
    bracket edge is flagged ``flat``.
    """
    xs = np.linspace(bracket[0], bracket[1], grid_points) if grid_points > 1 else np.array([float(bracket[0])])
    tasks = [(model, float(r2), xs, fock_cutoff, two_level, xtol) for r2 in delta2_ratios]
    return _map(_optimal_task, tasks, workers)


# ---------------------------------------------------------------------------
# presets

BASE_MODEL = ModelParams(g=6.0, gamma=0.01, delta1_ratio=0.1)
PLANE_AXIS1 = Axis(-4.0, 4.0, 101)
PLANE_AXIS2 = Axis(-0.5, 0.1, 101)
LINE_AXIS1 = Axis(-4.0, 4.0, 401)

CAVITY_DRIVEN = BASE_MODEL.with_(eta=0.1, omega=0.0)
ATOM_DRIVEN = BASE_MODEL.with_(eta=0.0, omega=0.08)
BOTH_DRIVEN = BASE_MODEL.with_(eta=0.1, omega=0.08)


def _presets() -> Dict[str, SweepSpec]:
    p = {}
    for name in ("fig2a", "fig2b"):
        p[name] = SweepSpec(CAVITY_DRIVEN, PLANE_AXIS1, PLANE_AXIS2, ("n_s", "g12"),
                            description="cavity drive: g12(0) and n_s on the (delta_c, delta2) plane")
    p["fig2c"] = SweepSpec(CAVITY_DRIVEN, LINE_AXIS1, Axis.fixed(-0.4), ("n_s", "g12"),
                           description="cavity drive: g12(0) and n_s versus delta_c at delta2/delta_c=-0.4")
    p["fig2d"] = SweepSpec(CAVITY_DRIVEN, Axis(-1.41, 1.41, 2), Axis.fixed(-0.4), ("n_s", "g12", "p_tilde"),
                           mode="correlate", tau_orders=(1,),
                           description="cavity drive: g12(tau) and p_tilde(q) at delta_c/g=+-1.41")
    p["fig2e"] = SweepSpec(CAVITY_DRIVEN, Axis(-4.0, 4.0, 81), Axis(-0.5, 0.0, 21), ("n_s", "g12"),
                           mode="scan-optimal",
                           description="cavity drive: optimal g12(0) over delta_c and n_s there, versus delta2")
    for name in ("fig3a", "fig3b", "fig3c"):
        p[name] = SweepSpec(ATOM_DRIVEN, PLANE_AXIS1, PLANE_AXIS2, ("n_s", "g12", "g13"),
                            description="atom pump: g12(0), g13(0), n_s on the (delta_c, delta2) plane")
    for name in ("fig3d", "fig3e"):
        p[name] = SweepSpec(ATOM_DRIVEN, LINE_AXIS1, Axis.fixed(0.05), ("n_s", "g12", "g13", "g22"),
                            description="atom pump: g12(0), g13(0), n_s versus delta_c at delta2/delta_c=0.05")
    p["fig3f"] = SweepSpec(ATOM_DRIVEN, Axis.fixed(2.5), Axis.fixed(0.05), ("n_s", "g12", "g22"),
                           mode="correlate", tau_orders=(1, 2),
                           description="atom pump: g12(tau) and g22(tau) at delta_c/g=2.5, delta2/delta_c=0.05")
    for name in ("fig4a", "fig4b", "fig4c"):
        p[name] = SweepSpec(BOTH_DRIVEN, PLANE_AXIS1, PLANE_AXIS2, ("n_s", "g12", "g13"),
                            description="both drives: g12(0), g13(0), n_s on the (delta_c, delta2) plane; "
                                        "coexistence bound taken as delta2/delta_c < 0.04")
    p["twolevel-ref"] = SweepSpec(CAVITY_DRIVEN, Axis(-1.0, 1.0, 2), Axis.fixed(0.0), ("n_s", "g12"),
                                  two_level=True,
                                  description="two-level reference at delta_c/g=+-1 with the fig2 parameters")
    return p


PRESETS = _presets()


def preset(name: str) -> SweepSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}") from None


# ---------------------------------------------------------------------------
# config and CSV


def spec_from_config(cfg: Dict, base: Optional[SweepSpec] = None) -> SweepSpec:
    """Build a spec from a parsed TOML mapping with [model], [sweep], [numerics]."""
    base = base or SweepSpec(BASE_MODEL)
    model_cfg = dict(cfg.get("model", {}))
    model = base.model.with_(**model_cfg) if model_cfg else base.model
    sw = dict(cfg.get("sweep", {}))
    num = dict(cfg.get("numerics", {}))
    changes = {"model": model}
    for key in ("axis1", "axis2"):
        if key in sw:
            val = sw.pop(key)
            changes[key] = Axis.fixed(val) if np.isscalar(val) else Axis(*val)
    for key in ("observables", "tau_orders"):
        if key in sw:
            changes[key] = tuple(sw.pop(key))
    changes.update(sw)
    changes.update(num)
    return replace(base, **changes)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(rows: Iterable[Dict[str, object]], columns: Sequence[str], out=None) -> str:
    """Write dict rows as UTF-8 CSV; floats use the shortest round-trip repr."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in columns])
    text = buf.getvalue()
    if out is not None:
        Path(out).write_text(text, encoding="utf-8")
    return text


def read_csv(path_or_text) -> List[Dict[str, object]]:
    text = path_or_text
    if isinstance(path_or_text, Path) or (isinstance(path_or_text, str) and "\n" not in path_or_text):
        text = Path(path_or_text).read_text(encoding="utf-8")
    out = []
    for r in csv.DictReader(io.StringIO(text)):
        parsed = {}
        for k, v in r.items():
            try:
                parsed[k] = float(v)
            except ValueError:
                parsed[k] = v
        out.append(parsed)
    return out


def rows_to_csv(spec: SweepSpec, rows: Sequence[ResultRow], out=None) -> str:
    return write_csv((r.as_dict() for r in rows), result_columns(spec), out)


@dataclass
class CorrelationResult:
    row: ResultRow
    traces: Dict[int, object]


def run_correlate(spec: SweepSpec) -> List[CorrelationResult]:
    """Equal-time row plus g_n^(2)(tau) traces for every grid point of ``spec``."""
    from .errors import UndefinedCorrelation
    from .twotime import Propagator, default_tau_grid, g2_tau

    out = []
    tau = default_tau_grid(spec.tau_max, spec.tau_points)
    for x, r2 in spec.grid():
        row = evaluate_point(spec, x, r2)
        row.values.update(resonance_overlay(spec, r2))
        traces = {}
        if not row.solver_error:
            res = solve_operating_point(spec.model.at(x, r2), spec.fock_cutoff, two_level=spec.two_level,
                                        escalate_to=spec.escalate_to)
            prop = Propagator(res.liouvillian)
            for n in spec.tau_orders:
                try:
                    traces[n] = g2_tau(prop, res.rho, n, tau)
                except UndefinedCorrelation:
                    row.undefined_correlation = True
        out.append(CorrelationResult(row, traces))
    return out


def trace_filename(prefix: str, n: int, x: float, r2: float) -> str:
    return f"{prefix}_g{n}2tau_dc{x:+.6g}_d2{r2:+.6g}.csv"


TRACE_COLUMNS = ["tau_over_inv_kappa", "g_value"]
