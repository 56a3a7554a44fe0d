"""Scenario configuration, task orchestration, and result emission.

A scenario is a single JSON document: mesh extent and resolution, kernel
descriptor, the two rate fields (constant / cosine / gaussian_bump / table),
diffusivities, total mass, a task name, and task-specific options. Every run
writes its artifacts (CSV with 17-significant-digit floats, JSON headers) into
an output directory and returns a RunRecord listing the files, the wall time,
and the outcome of the task's invariant checks. Identical config and seed
produce byte-identical CSV output.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import cos, exp, pi

import numpy as np

from .dynamics import integrate_to
from .equilibria import (
    EquilibriumResult,
    ModelParams,
    disease_free,
    endemic_equilibrium,
    limit_profile_both_infinity,
    limit_profile_di_infinity,
    limit_profile_ds_infinity,
    limit_system_residual,
    solve_ratio_profile,
)
from .errors import ConfigError
from .mesh import Kernel, KernelSpec, Mesh1D, build_kernel, build_mesh, integrate
from .spectral import (
    REPORT_CSV_COLUMNS,
    RateFields,
    find_critical_dispersal,
    r0_all_routes,
    weighted_eigenvalue,
)

TASKS = ("spectrum", "equilibrium", "simulate", "sweep", "limits")
RATE_FAMILIES = ("constant", "cosine", "gaussian_bump", "table")
WORKERS_ENV = "NONLOCAL_SIS_WORKERS"

_RATE_FIELD_NAMES = {
    "constant": ("value",),
    "cosine": ("base", "amplitude", "frequency"),
    "gaussian_bump": ("base", "height", "width", "center"),
    "table": ("values", "x"),
}
_RATE_OPTIONAL = {"table": ("x",)}


def _fmt(value) -> str:
    """Locale-independent cell formatting; floats carry 17 significant digits."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class RateSpec:
    """One rate field: a named profile family plus its parameters."""

    family: str
    value: float | None = None
    base: float | None = None
    amplitude: float | None = None
    frequency: float | None = None
    height: float | None = None
    width: float | None = None
    center: float | None = None
    x: tuple[float, ...] | None = None
    values: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.family not in RATE_FAMILIES:
            raise ConfigError(f"rate family must be one of {RATE_FAMILIES}, got {self.family!r}")
        needed = _RATE_FIELD_NAMES[self.family]
        optional = _RATE_OPTIONAL.get(self.family, ())
        for name in needed:
            if getattr(self, name) is None and name not in optional:
                raise ConfigError(f"rate family {self.family!r} needs field {name!r}")
        for name in ("value", "base", "amplitude", "frequency", "height", "width",
                     "center", "x", "values"):
            if getattr(self, name) is not None and name not in needed:
                raise ConfigError(f"rate family {self.family!r} does not take field {name!r}")
        if self.family == "gaussian_bump" and not self.width > 0:
            raise ConfigError(f"gaussian_bump width must be > 0, got {self.width}")
        if self.family == "table":
            if len(self.values) < 2:
                raise ConfigError("table needs at least two values")
            if self.x is not None:
                if len(self.x) != len(self.values):
                    raise ConfigError("table x and values must have equal length")
                if np.any(np.diff(self.x) <= 0):
                    raise ConfigError("table x must be strictly increasing")

    def evaluate(self, mesh: Mesh1D) -> np.ndarray:
        """Field values at the mesh nodes; tables are linearly interpolated."""
        nodes = mesh.nodes
        if self.family == "constant":
            return np.full(mesh.n, float(self.value))
        if self.family == "cosine":
            return self.base + self.amplitude * np.cos(self.frequency * pi * nodes)
        if self.family == "gaussian_bump":
            return self.base + self.height * np.exp(-(((nodes - self.center) / self.width) ** 2))
        xs = np.asarray(self.x if self.x is not None
                        else np.linspace(mesh.a, mesh.b, len(self.values)), dtype=float)
        if nodes[0] < xs[0] or nodes[-1] > xs[-1]:
            raise ConfigError(
                f"table covers [{xs[0]:g}, {xs[-1]:g}] but mesh nodes need "
                f"[{nodes[0]:g}, {nodes[-1]:g}]"
            )
        return np.interp(nodes, xs, np.asarray(self.values, dtype=float))

    def to_dict(self) -> dict:
        out = {"family": self.family}
        for name in _RATE_FIELD_NAMES[self.family]:
            val = getattr(self, name)
            if val is not None:
                out[name] = list(val) if isinstance(val, tuple) else val
        return out

    @staticmethod
    def from_dict(raw: dict, label: str) -> "RateSpec":
        if not isinstance(raw, dict) or "family" not in raw:
            raise ConfigError(f"{label}: expected an object with a 'family' field")
        kwargs = {}
        for key, val in raw.items():
            if key == "family":
                continue
            if key in ("x", "values"):
                kwargs[key] = tuple(float(v) for v in val)
            else:
                kwargs[key] = float(val)
        try:
            return RateSpec(family=raw["family"], **kwargs)
        except TypeError as exc:
            raise ConfigError(f"{label}: unknown field in rate spec ({exc})") from exc
        except ConfigError as exc:
            raise ConfigError(f"{label}: {exc}") from exc


@dataclass(frozen=True)
class ScenarioConfig:
    a: float
    b: float
    n: int
    kernel: KernelSpec
    beta: RateSpec
    gamma: RateSpec
    d_S: float
    d_I: float
    N: float
    task: str
    options: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, got {self.task!r}")
        for name in ("d_S", "d_I", "N"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if not isinstance(self.options, dict):
            raise ConfigError("options must be an object")


def parse_config(raw: dict) -> ScenarioConfig:
    """Validate a JSON-shaped dict into a ScenarioConfig, with field-level errors."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("mesh", "kernel", "rates", "d_S", "d_I", "N", "task"):
        if key not in raw:
            raise ConfigError(f"config missing required field {key!r}")
    unknown = set(raw) - {"mesh", "kernel", "rates", "d_S", "d_I", "N", "task", "options"}
    if unknown:
        raise ConfigError(f"config has unknown fields: {sorted(unknown)}")
    mesh_raw = raw["mesh"]
    for key in ("a", "b", "n"):
        if key not in mesh_raw:
            raise ConfigError(f"mesh: missing field {key!r}")
    kernel_raw = dict(raw["kernel"])
    family = kernel_raw.pop("family", None)
    if family is None:
        raise ConfigError("kernel: missing field 'family'")
    try:
        kspec = KernelSpec(family=family, **{k: float(v) for k, v in kernel_raw.items()})
    except TypeError as exc:
        raise ConfigError(f"kernel: unknown field ({exc})") from exc
    rates_raw = raw["rates"]
    if "beta" not in rates_raw or "gamma" not in rates_raw:
        raise ConfigError("rates: need both 'beta' and 'gamma'")
    try:
        return ScenarioConfig(
            a=float(mesh_raw["a"]), b=float(mesh_raw["b"]), n=int(mesh_raw["n"]),
            kernel=kspec,
            beta=RateSpec.from_dict(rates_raw["beta"], "rates.beta"),
            gamma=RateSpec.from_dict(rates_raw["gamma"], "rates.gamma"),
            d_S=float(raw["d_S"]), d_I=float(raw["d_I"]), N=float(raw["N"]),
            task=raw["task"], options=dict(raw.get("options", {})),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"config field has wrong type: {exc}") from exc


def emit_config(cfg: ScenarioConfig) -> dict:
    """Inverse of parse_config: parse_config(emit_config(cfg)) == cfg."""
    kernel = {"family": cfg.kernel.family}
    for name in ("delta", "sigma", "cutoff"):
        val = getattr(cfg.kernel, name)
        if val is not None:
            kernel[name] = val
    return {
        "mesh": {"a": cfg.a, "b": cfg.b, "n": cfg.n},
        "kernel": kernel,
        "rates": {"beta": cfg.beta.to_dict(), "gamma": cfg.gamma.to_dict()},
        "d_S": cfg.d_S, "d_I": cfg.d_I, "N": cfg.N,
        "task": cfg.task, "options": dict(cfg.options),
    }


def load_config(path: str) -> ScenarioConfig:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return parse_config(raw)


@dataclass(frozen=True)
class RunRecord:
    config: dict
    outputs: tuple[str, ...]
    seconds: float
    checks: dict

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def build_problem(cfg: ScenarioConfig) -> tuple[Kernel, RateFields]:
    """Materialize mesh, kernel, and rate fields from a config."""
    mesh = build_mesh(cfg.a, cfg.b, cfg.n)
    kernel = build_kernel(mesh, cfg.kernel)
    fields = {}
    for label, spec in (("beta", cfg.beta), ("gamma", cfg.gamma)):
        vals = spec.evaluate(mesh)
        if not np.all(vals > 0):
            raise ConfigError(f"rates.{label}: evaluates to nonpositive values "
                              f"(min {vals.min():g})")
        fields[label] = vals
    return kernel, RateFields(fields["beta"], fields["gamma"])


def _workers(options: dict) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env is not None:
        try:
            count = int(env)
        except ValueError as exc:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from exc
    else:
        count = int(options.get("workers", 1))
    if count < 1:
        raise ConfigError(f"worker count must be >= 1, got {count}")
    return count


def _emit_equilibrium(out_dir: str, stem: str, mesh: Mesh1D,
                      result: EquilibriumResult) -> list[str]:
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    _write_csv(csv_path, ("node", "S_tilde", "I_tilde"),
               zip(mesh.nodes, result.S_tilde, result.I_tilde))
    json_path = os.path.join(out_dir, f"{stem}.json")
    _write_json(json_path, {"k": result.k, "kind": result.kind,
                            "iterations": result.iterations, "residual": result.residual})
    return [csv_path, json_path]


def _run_spectrum(cfg, kernel, rates, out_dir):
    report = r0_all_routes(kernel, cfg.d_I, rates)
    path = os.path.join(out_dir, "spectrum.csv")
    rec = report.to_record()
    _write_csv(path, REPORT_CSV_COLUMNS, [[rec[c] for c in REPORT_CSV_COLUMNS]])
    routes = (report.r0_weighted, report.r0_variational, report.r0_nextgen)
    spread = (max(routes) - min(routes)) / max(abs(r) for r in routes)
    return [path], {"route_agreement": spread <= 1e-7}


def _run_equilibrium(cfg, kernel, rates, out_dir):
    params = ModelParams(kernel=kernel, rates=rates, d_S=cfg.d_S, d_I=cfg.d_I, N=cfg.N)
    outputs = _emit_equilibrium(out_dir, "dfe", params.mesh, disease_free(params))
    checks = {}
    mu, _ = weighted_eigenvalue(kernel, cfg.d_I, rates)
    if 1.0 / mu > 1.0 + 1e-9:
        end = endemic_equilibrium(params)
        outputs += _emit_equilibrium(out_dir, "endemic", params.mesh, end)
        k_dev = float(np.abs(cfg.d_S * end.S_tilde + cfg.d_I * end.I_tilde - end.k).max())
        checks["endemic_residual"] = end.residual <= 1e-8
        checks["k_constant"] = k_dev <= 1e-8 * end.k
    return outputs, checks


def _initial_fields(cfg, mesh: Mesh1D) -> tuple[np.ndarray, np.ndarray]:
    spec = cfg.options.get("initial")
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("simulate: options.initial must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "constant":
        try:
            s, i = float(spec["S"]), float(spec["I"])
        except KeyError as exc:
            raise ConfigError(f"initial kind 'constant' needs field {exc}") from exc
        return np.full(mesh.n, s), np.full(mesh.n, i)
    if kind == "random_uniform":
        if "seed" not in spec:
            raise ConfigError("initial kind 'random_uniform' needs a 'seed'")
        rng = np.random.default_rng(int(spec["seed"]))
        low = float(spec.get("low", 0.5))
        high = float(spec.get("high", 1.5))
        if not 0 <= low < high:
            raise ConfigError(f"random_uniform needs 0 <= low < high, got {low}, {high}")
        mass_s = float(spec.get("mass_S", 0.5 * cfg.N))
        mass_i = float(spec.get("mass_I", 0.5 * cfg.N))
        S = rng.uniform(low, high, mesh.n)
        I = rng.uniform(low, high, mesh.n)
        return (mass_s / integrate(mesh, S)) * S, (mass_i / integrate(mesh, I)) * I
    raise ConfigError(f"unknown initial kind {kind!r}")


def _run_simulate(cfg, kernel, rates, out_dir):
    params = ModelParams(kernel=kernel, rates=rates, d_S=cfg.d_S, d_I=cfg.d_I, N=cfg.N)
    t_end = cfg.options.get("t_end")
    if t_end is None or not float(t_end) > 0:
        raise ConfigError("simulate: options.t_end must be a positive number")
    dt = cfg.options.get("dt")
    stride = cfg.options.get("sample_stride")
    S0, I0 = _initial_fields(cfg, params.mesh)
    endemic = endemic_equilibrium(params) if cfg.options.get("compare_endemic") else None
    result = integrate_to(params, S0, I0, float(t_end),
                          dt=None if dt is None else float(dt),
                          endemic=endemic,
                          sample_stride=None if stride is None else int(stride))
    traj_path = os.path.join(out_dir, "trajectory.csv")
    count = len(result.times)
    blanks = [None] * count
    _write_csv(traj_path, ("t", "mass", "dist_dfe", "dist_endemic", "lyapunov"),
               zip(result.times, result.mass, result.dist_dfe,
                   result.dist_endemic if result.dist_endemic is not None else blanks,
                   result.lyapunov if result.lyapunov is not None else blanks))
    outputs = [traj_path]
    for label, values in (("final_S", result.final_S), ("final_I", result.final_I)):
        path = os.path.join(out_dir, f"{label}.csv")
        _write_csv(path, ("node", "value"), zip(params.mesh.nodes, values))
        outputs.append(path)
    drift = float(np.abs(result.mass - result.mass[0]).max())
    checks = {"mass_conservation": drift <= 1e-10 * max(1.0, abs(result.mass[0]))}
    return outputs, checks


def _sweep_grid(cfg) -> np.ndarray:
    opts = cfg.options
    if "d_grid" in opts:
        grid = np.asarray([float(v) for v in opts["d_grid"]], dtype=float)
    else:
        try:
            lo, hi = float(opts["log10_from"]), float(opts["log10_to"])
            count = int(opts["count"])
        except KeyError as exc:
            raise ConfigError(f"sweep: need either d_grid or log10_from/log10_to/count "
                              f"(missing {exc})") from exc
        if count < 2 or not lo < hi:
            raise ConfigError("sweep: need count >= 2 and log10_from < log10_to")
        grid = np.logspace(lo, hi, count)
    if grid.size < 2 or np.any(np.diff(grid) <= 0) or not grid[0] > 0:
        raise ConfigError("sweep: d grid must be positive and strictly increasing")
    return grid


def _run_sweep(cfg, kernel, rates, out_dir):
    grid = _sweep_grid(cfg)
    workers = _workers(cfg.options)

    def point(d):
        return r0_all_routes(kernel, float(d), rates).to_record()

    if workers == 1:
        records = [point(d) for d in grid]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(point, grid))

    path = os.path.join(out_dir, "sweep.csv")
    _write_csv(path, REPORT_CSV_COLUMNS, ([r[c] for c in REPORT_CSV_COLUMNS] for r in records))

    lam = np.asarray([r["lambda_p"] for r in records])
    flips = np.nonzero(np.sign(lam[:-1]) * np.sign(lam[1:]) < 0)[0]
    summary = {"sign_changes": int(flips.size), "d_star": None, "bracket": None,
               "d_star_reason": None}
    if flips.size == 1:
        i = int(flips[0])
        found = find_critical_dispersal(kernel, rates, float(grid[i]), float(grid[i + 1]))
        summary["d_star"] = found.value
        summary["bracket"] = [float(grid[i]), float(grid[i + 1])]
        summary["d_star_reason"] = found.reason
    summary_path = os.path.join(out_dir, "sweep_summary.json")
    _write_json(summary_path, summary)
    checks = {"lambda_monotone": bool(np.all(np.diff(lam) >= -1e-10))}
    return [path, summary_path], checks


def _run_limits(cfg, kernel, rates, out_dir):
    mesh = kernel.mesh
    d_values = [float(v) for v in cfg.options.get("d_values", [10.0, 100.0, 1000.0])]
    if any(d <= 0 for d in d_values):
        raise ConfigError("limits: d_values must be positive")
    outputs, checks = [], {}

    s_bar, i_bar = limit_profile_both_infinity(rates, cfg.N, mesh)
    both_path = os.path.join(out_dir, "limit_both.json")
    _write_json(both_path, {"S": s_bar, "I": i_bar})
    outputs.append(both_path)

    theta = solve_ratio_profile(kernel, cfg.d_I, rates)
    res_theta = float(np.abs(
        cfg.d_I * (kernel.matrix @ theta - kernel.row_integral * theta)
        + (rates.beta - rates.gamma) * theta - rates.beta * theta**2 / (cfg.d_I + theta)
    ).max())
    S_ds, I_ds = limit_profile_ds_infinity(kernel, cfg.d_I, rates, cfg.N)
    ds_path = os.path.join(out_dir, "limit_ds_profile.csv")
    _write_csv(ds_path, ("node", "S", "I"), zip(mesh.nodes, S_ds, I_ds))
    outputs.append(ds_path)
    checks["ds_profile_residual"] = res_theta <= 1e-8

    S_di, i_star = limit_profile_di_infinity(kernel, cfg.d_S, rates, cfg.N)
    res_di = limit_system_residual(kernel, cfg.d_S, rates, cfg.N, S_di, i_star)
    di_path = os.path.join(out_dir, "limit_di_profile.csv")
    _write_csv(di_path, ("node", "S"), zip(mesh.nodes, S_di))
    di_json = os.path.join(out_dir, "limit_di.json")
    _write_json(di_json, {"I_star": i_star, "residual": res_di})
    outputs += [di_path, di_json]
    checks["di_profile_residual"] = res_di <= 1e-8

    for axis, (ds_of, di_of) in (("ds", (lambda d: d, lambda d: cfg.d_I)),
                                 ("di", (lambda d: cfg.d_S, lambda d: d)),
                                 ("both", (lambda d: d, lambda d: d))):
        for idx, d in enumerate(d_values):
            params = ModelParams(kernel=kernel, rates=rates,
                                 d_S=ds_of(d), d_I=di_of(d), N=cfg.N)
            end = endemic_equilibrium(params)
            outputs += _emit_equilibrium(out_dir, f"endemic_{axis}_{idx}", mesh, end)
            checks[f"endemic_{axis}_{idx}_residual"] = end.residual <= 1e-8
    index_path = os.path.join(out_dir, "limits_index.json")
    _write_json(index_path, {"d_values": d_values,
                             "axes": {"ds": "d_S varies, d_I fixed",
                                      "di": "d_I varies, d_S fixed",
                                      "both": "d_S = d_I vary together"}})
    outputs.append(index_path)
    return outputs, checks


_TASK_RUNNERS = {
    "spectrum": _run_spectrum,
    "equilibrium": _run_equilibrium,
    "simulate": _run_simulate,
    "sweep": _run_sweep,
    "limits": _run_limits,
}


def run(cfg: ScenarioConfig, out_dir: str) -> RunRecord:
    """Dispatch a scenario to its task pipeline and write artifacts into out_dir."""
    start = time.perf_counter()
    os.makedirs(out_dir, exist_ok=True)
    kernel, rates = build_problem(cfg)
    outputs, checks = _TASK_RUNNERS[cfg.task](cfg, kernel, rates, out_dir)
    checks = {name: bool(ok) for name, ok in checks.items()}
    missing = [p for p in outputs if not os.path.exists(p)]
    if missing:
        raise RuntimeError(f"emitted paths do not exist: {missing}")
    record = RunRecord(config=emit_config(cfg), outputs=tuple(outputs),
                       seconds=time.perf_counter() - start, checks=checks)
    _write_json(os.path.join(out_dir, "run_record.json"),
                {"config": record.config, "outputs": list(record.outputs),
                 "seconds": record.seconds, "checks": record.checks, "ok": record.ok})
    return record


def theorem_suite(out_dir: str) -> RunRecord:
    """Run the full acceptance battery and emit a pass/fail table.

    Failures are recorded in the table (and reflected in the record's checks),
    never raised.
    """
    from .acceptance import run_all

    start = time.perf_counter()
    os.makedirs(out_dir, exist_ok=True)
    results = run_all()
    table_path = os.path.join(out_dir, "suite.csv")
    _write_csv(table_path, ("number", "name", "passed", "seconds", "details"),
               ((r.number, r.name, r.passed, r.seconds, r.details.replace(",", ";"))
                for r in results))
    json_path = os.path.join(out_dir, "suite.json")
    _write_json(json_path, {"criteria": [
        {"number": r.number, "name": r.name, "passed": r.passed,
         "seconds": r.seconds, "details": r.details} for r in results]})
    checks = {f"criterion_{r.number:02d}_{r.name}": r.passed for r in results}
    return RunRecord(config={"task": "suite"}, outputs=(table_path, json_path),
                     seconds=time.perf_counter() - start, checks=checks)
