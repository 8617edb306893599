"""Experiment configuration, the run pipeline and CSV/JSON output.

A config is flat ``key=value`` text with dotted section prefixes::

    backend = torus
    flow.kind = ricci
    grid.n = 256
    time.t_end = 0.05
    metric.preset = conformal
    metric.u_cos = 0.1
    spectrum.c = 0.25, 0.5

Everything is parsed and validated before any computation starts.  Mode
lists give Fourier coefficients of modes 1, 2, ... in x.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import entropy as en
from . import flows as fl
from . import geometry as geo
from . import heat as ht
from . import spectrum as spc
from .errors import ConfigurationError, FlowLabError
from .sphere import sphere_flow, sphere_reports
from .verification import Verdict, at_least, at_most

DEFAULT_TOLERANCES = {
    "derivative": 1e-2,   # relative, formula vs finite difference
    "monotone": 1e-6,     # absolute slack on forward differences
    "convexity": 1e-8,    # absolute slack on second differences of E
    "mass": 1e-8,         # relative conjugate-heat mass drift
    "volume": 1e-3,       # dV/dt + int A dy
}

_CHOICES = {
    "backend": ("torus", "sphere"),
    "flow.kind": ("static", "ricci", "list", "rh"),
    "metric.preset": ("flat", "conformal", "diagonal"),
    "terminal.preset": ("uniform", "modes", "random"),
}
_FLOATS = ("flow.a_n", "flow.a0", "flow.decay_rate", "grid.len_x", "grid.len_y", "time.t_end",
           "time.cfl", "metric.scale", "aux.const", "terminal.amplitude", "sphere.s0", "sphere.vol_unit")
_INTS = ("grid.n", "seed", "sphere.dim", "sphere.steps")
_LISTS = ("metric.u_cos", "metric.u_sin", "metric.a_cos", "metric.a_sin", "metric.b_cos",
          "metric.b_sin", "aux.cos", "aux.sin", "terminal.cos", "terminal.sin",
          "spectrum.c", "entropy.k")

DEFAULTS = {
    "backend": "torus",
    "flow.kind": "ricci",
    "flow.a_n": "0.5",
    "flow.a0": "0.5",
    "flow.decay_rate": "0",
    "grid.n": "128",
    "grid.len_x": repr(2 * math.pi),
    "grid.len_y": repr(2 * math.pi),
    "time.dt": "auto",
    "time.t_end": "0.05",
    "time.cfl": repr(fl.DEFAULT_CFL),
    "metric.preset": "conformal",
    "metric.scale": "1",
    "metric.u_cos": "0.1",
    "metric.u_sin": "",
    "metric.a_cos": "",
    "metric.a_sin": "",
    "metric.b_cos": "",
    "metric.b_sin": "",
    "aux.const": "0",
    "aux.cos": "",
    "aux.sin": "1",
    "terminal.preset": "modes",
    "terminal.cos": "0.3",
    "terminal.sin": "0, 0.2",
    "terminal.amplitude": "0.3",
    "spectrum.c": "0.25",
    "entropy.k": "1",
    "entropy.w_tref": "auto",
    "entropy.wplus_tref": "none",
    "sphere.dim": "2",
    "sphere.s0": "1",
    "sphere.vol_unit": repr(4 * math.pi),
    "sphere.steps": "200",
    "output.dir": "flowlab_out",
    "output.name": "run",
    "seed": "0",
}


# -- configuration ------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment settings; ``raw`` echoes the effective key/values."""

    backend: str
    kind: fl.FlowKind
    n_points: int
    len_x: float
    len_y: float
    dt: Optional[float]
    t_end: float
    cfl: float
    metric_preset: str
    metric_scale: float
    modes: Dict[str, Tuple[float, ...]]
    aux_const: float
    terminal_preset: str
    terminal_amplitude: float
    c_values: Tuple[float, ...]
    k_values: Tuple[float, ...]
    w_tref: Optional[float]
    w_tref_auto: bool
    wplus_tref: Optional[float]
    sphere_dim: int
    sphere_s0: float
    sphere_vol_unit: float
    sphere_steps: int
    out_dir: str
    name: str
    seed: int
    tolerances: Dict[str, float]
    raw: Dict[str, str] = field(default_factory=dict)

    @property
    def grid(self) -> geo.GridSpec:
        return geo.GridSpec(self.n_points, self.len_x, self.len_y)


def parse_lines(text: str) -> Dict[str, str]:
    """Split ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _float(key, value):
    try:
        x = float(value)
    except ValueError:
        raise ConfigurationError(f"{key}: expected a number, got {value!r}") from None
    if not math.isfinite(x):
        raise ConfigurationError(f"{key}: value must be finite")
    return x


def _int(key, value):
    try:
        return int(value)
    except ValueError:
        raise ConfigurationError(f"{key}: expected an integer, got {value!r}") from None


def _list(key, value):
    return tuple(_float(key, v) for v in value.replace(",", " ").split())


def _optional(key, value, words):
    return None if value.lower() in words else _float(key, value)


def build_config(values: Dict[str, str]) -> ExperimentConfig:
    """Validate a key/value mapping into an :class:`ExperimentConfig`."""
    known = set(DEFAULTS)
    for key in values:
        if key not in known and not key.startswith("tol."):
            raise ConfigurationError(f"unknown config key {key!r}")
    raw = {**DEFAULTS, **values}

    for key, choices in _CHOICES.items():
        if raw[key] not in choices:
            raise ConfigurationError(f"{key}: expected one of {choices}, got {raw[key]!r}")
    f = {k: _float(k, raw[k]) for k in _FLOATS}
    i = {k: _int(k, raw[k]) for k in _INTS}
    lists = {k: _list(k, raw[k]) for k in _LISTS}

    tolerances = dict(DEFAULT_TOLERANCES)
    for key, value in values.items():
        if key.startswith("tol."):
            name = key[4:]
            if name not in tolerances:
                raise ConfigurationError(f"unknown tolerance {key!r}; known: {sorted(tolerances)}")
            tol = _float(key, value)
            if tol < 0:
                raise ConfigurationError(f"{key} must be nonnegative")
            tolerances[name] = tol

    tag = raw["flow.kind"]
    kind = {
        "static": fl.FlowKind.static,
        "ricci": fl.FlowKind.ricci,
        "list": lambda: fl.FlowKind.list_extended(f["flow.a_n"]),
        "rh": lambda: fl.FlowKind.ricci_harmonic(f["flow.a0"], f["flow.decay_rate"]),
    }[tag]()

    dt = _optional("time.dt", raw["time.dt"], ("auto",))
    if dt is not None and not dt > 0:
        raise ConfigurationError("time.dt must be positive or auto")
    t_end = f["time.t_end"]
    if not t_end > 0:
        raise ConfigurationError("time.t_end must be positive")
    if not 0 < f["time.cfl"] <= 1:
        raise ConfigurationError("time.cfl must lie in (0, 1]")
    if not lists["spectrum.c"]:
        raise ConfigurationError("spectrum.c needs at least one value")
    if not lists["entropy.k"]:
        raise ConfigurationError("entropy.k needs at least one value")
    w_auto = raw["entropy.w_tref"].lower() == "auto"
    w_tref = None if w_auto else _optional("entropy.w_tref", raw["entropy.w_tref"], ("none",))
    wplus = _optional("entropy.wplus_tref", raw["entropy.wplus_tref"], ("none",))
    if wplus is not None and not wplus < t_end:
        raise ConfigurationError("entropy.wplus_tref must be earlier than time.t_end")
    if not f["metric.scale"] > 0:
        raise ConfigurationError("metric.scale must be positive")
    if i["sphere.steps"] < 2:
        raise ConfigurationError("sphere.steps must be at least 2")

    cfg = ExperimentConfig(
        backend=raw["backend"], kind=kind, n_points=i["grid.n"],
        len_x=f["grid.len_x"], len_y=f["grid.len_y"], dt=dt, t_end=t_end, cfl=f["time.cfl"],
        metric_preset=raw["metric.preset"], metric_scale=f["metric.scale"],
        modes={k: v for k, v in lists.items() if k.startswith(("metric.", "aux.", "terminal."))},
        aux_const=f["aux.const"], terminal_preset=raw["terminal.preset"],
        terminal_amplitude=f["terminal.amplitude"],
        c_values=lists["spectrum.c"], k_values=lists["entropy.k"],
        w_tref=w_tref, w_tref_auto=w_auto, wplus_tref=wplus,
        sphere_dim=i["sphere.dim"], sphere_s0=f["sphere.s0"], sphere_vol_unit=f["sphere.vol_unit"],
        sphere_steps=i["sphere.steps"], out_dir=raw["output.dir"], name=raw["output.name"],
        seed=i["seed"], tolerances=tolerances, raw=dict(sorted(raw.items())),
    )
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig):
    """Check every downstream precondition without running anything."""
    if cfg.backend == "sphere":
        if cfg.kind.tag != "ricci":
            raise ConfigurationError("the sphere backend supports flow.kind = ricci only")
        if cfg.sphere_dim < 2:
            raise ConfigurationError("sphere.dim must be at least 2")
        if not cfg.sphere_s0 > 0 or not cfg.sphere_vol_unit > 0:
            raise ConfigurationError("sphere.s0 and sphere.vol_unit must be positive")
        t_star = cfg.sphere_s0 / (2 * (cfg.sphere_dim - 1))
        if not cfg.t_end < t_star:
            raise ConfigurationError(f"time.t_end must precede the blow-up time {t_star:.6g}")
        if cfg.w_tref is not None and not cfg.w_tref > cfg.t_end:
            raise ConfigurationError("entropy.w_tref must be later than time.t_end")
        return
    try:
        grid = cfg.grid
    except ValueError as exc:
        raise ConfigurationError(f"grid: {exc}") from None
    cfg.kind.check_horizon(cfg.t_end)
    initial_metric(cfg, grid)
    terminal_data(cfg, grid)
    if cfg.w_tref is not None and not cfg.w_tref > cfg.t_end:
        raise ConfigurationError("entropy.w_tref must be later than time.t_end")


def parse_config(text: str, overrides: Optional[Dict[str, str]] = None) -> ExperimentConfig:
    values = parse_lines(text)
    values.update(overrides or {})
    return build_config(values)


def load_config(path, overrides: Optional[Dict[str, str]] = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    values = parse_lines(text)
    values.setdefault("output.name", Path(path).stem)
    values.update(overrides or {})
    return build_config(values)


# -- initial data -----------------------------------------------------------------

def fourier_series(grid: geo.GridSpec, cos_coeffs, sin_coeffs, const=0.0):
    """const + sum_m cos_m cos(2 pi m x / L) + sin_m sin(2 pi m x / L), m = 1, 2, ..."""
    theta = 2 * np.pi * grid.x / grid.len_x
    out = np.full(grid.n_points, float(const))
    for m, coef in enumerate(cos_coeffs, 1):
        out += coef * np.cos(m * theta)
    for m, coef in enumerate(sin_coeffs, 1):
        out += coef * np.sin(m * theta)
    return out


def initial_metric(cfg: ExperimentConfig, grid: geo.GridSpec) -> geo.DiagonalMetric:
    m = cfg.modes
    try:
        with np.errstate(over="ignore"):
            if cfg.metric_preset == "flat":
                g = geo.DiagonalMetric.flat(grid)
            elif cfg.metric_preset == "conformal":
                g = geo.DiagonalMetric.conformal(grid, fourier_series(grid, m["metric.u_cos"], m["metric.u_sin"]))
            else:
                g = geo.DiagonalMetric(grid, np.exp(fourier_series(grid, m["metric.a_cos"], m["metric.a_sin"])),
                                       np.exp(fourier_series(grid, m["metric.b_cos"], m["metric.b_sin"])))
        return g.scaled(cfg.metric_scale) if cfg.metric_scale != 1 else g
    except ValueError as exc:
        raise ConfigurationError(f"metric: {exc}") from None


def aux_field(cfg: ExperimentConfig, grid: geo.GridSpec):
    return fourier_series(grid, cfg.modes["aux.cos"], cfg.modes["aux.sin"], cfg.aux_const)


def terminal_data(cfg: ExperimentConfig, grid: geo.GridSpec):
    """Positive terminal u (unnormalized; the heat solve normalizes it)."""
    if cfg.terminal_preset == "uniform":
        return np.ones(grid.n_points)
    if cfg.terminal_preset == "modes":
        return np.exp(fourier_series(grid, cfg.modes["terminal.cos"], cfg.modes["terminal.sin"]))
    rng = np.random.default_rng(cfg.seed)
    decay = 1.0 / np.arange(1, 4)
    return np.exp(cfg.terminal_amplitude * fourier_series(
        grid, rng.normal(size=3) * decay, rng.normal(size=3) * decay))


def initial_state(cfg: ExperimentConfig) -> fl.FlowState:
    grid = cfg.grid
    aux = aux_field(cfg, grid) if cfg.kind.aux_name else None
    return fl.make_state(cfg.kind, initial_metric(cfg, grid), aux)


# -- report -------------------------------------------------------------------------

def csv_header(k_values, c_values) -> List[str]:
    cols = ["t", "vol", "E", "E1_formula", "E1_fd", "E2_formula", "E2_fd"]
    cols += [f"F_{k:g}" for k in k_values]
    cols += [f"dF{k:g}_formula" for k in k_values]
    cols += ["W", "dW_formula", "Wplus", "dWplus_formula"]
    cols += [f"lambda_c{c:g}" for c in c_values]
    cols += [f"lambda_prime_formula_c{c:g}" for c in c_values]
    cols += [f"lambda_prime_fd_c{c:g}" for c in c_values]
    cols += [f"lambda_bar_c{c:g}" for c in c_values]
    cols += ["min_theta", "min_bmda"]
    return cols


def build_id() -> str:
    """Hash of the package sources, stable across runs of the same code."""
    h = hashlib.sha1()
    for path in sorted(Path(__file__).parent.glob("*.py")):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return h.hexdigest()[:12]


@dataclass
class RunReport:
    header: List[str]
    columns: Dict[str, np.ndarray]
    verdicts: List[Verdict]
    provenance: Dict[str, object]

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def n_rows(self) -> int:
        return len(self.columns["t"])

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for r in range(self.n_rows):
            w.writerow([f"{float(self.columns[c][r]):.17g}" for c in self.header])
        return buf.getvalue()

    def verdict_json(self) -> str:
        doc = {
            "passed": self.passed,
            "verdicts": [v.as_dict() for v in self.verdicts],
            "provenance": self.provenance,
        }
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n"

    def write(self, out_dir, name) -> Tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = out / f"{name}.csv", out / f"{name}.json"
        csv_path.write_text(self.csv_text())
        json_path.write_text(self.verdict_json())
        return csv_path, json_path


def _central(y, dt):
    return en._central(np.asarray(y, dtype=float), dt)


#: W and W_+ contain log tau and 1/tau terms; the central difference has relative
#: error about (dt/tau)^2 / 3, so formula-vs-difference checks use tau >= RESOLVED * dt
RESOLVED = 10.0


def _resolved(values, distance, dt):
    return np.where(distance >= RESOLVED * dt, values, np.nan)


def _residual_verdicts(cols, k_values, c_values, tol, has_w, has_wplus, w_tref=None, wplus_tref=None):
    out = [
        at_most("E' formula vs difference (relative)", en.relative_residual(cols["E1_formula"], cols["E1_fd"]), tol),
        at_most("E'' formula vs difference (relative)", en.relative_residual(cols["E2_formula"], cols["E2_fd"]), tol),
    ]
    dt = cols["t"][1] - cols["t"][0]
    for k in k_values:
        out.append(at_most(f"dF_{k:g} formula vs difference (relative)",
                           en.relative_residual(cols[f"dF{k:g}_formula"], _central(cols[f"F_{k:g}"], dt)), tol))
    t = cols["t"]
    if has_w:
        formula = _resolved(cols["dW_formula"], w_tref - t, dt)
        out.append(at_most("dW formula vs difference (relative, tau >= 10 dt)",
                           en.relative_residual(formula, _central(cols["W"], dt)), tol))
    if has_wplus:
        formula = _resolved(cols["dWplus_formula"], t - wplus_tref, dt)
        out.append(at_most("dW+ formula vs difference (relative, sigma >= 10 dt)",
                           en.relative_residual(formula, _central(cols["Wplus"], dt)), tol))
    for c in c_values:
        out.append(at_most(f"lambda' formula vs difference c={c:g} (relative)",
                           en.relative_residual(cols[f"lambda_prime_formula_c{c:g}"],
                                                cols[f"lambda_prime_fd_c{c:g}"]), tol))
    return out


def _split_unresolved(verdicts):
    """Drop verdicts with nothing to compare (runs too short); return their names."""
    kept = [v for v in verdicts if np.isfinite(v.measured)]
    return kept, [v.name for v in verdicts if not np.isfinite(v.measured)]


def _monotone_verdicts(cols, k_values, c_values, tols, has_w, has_wplus):
    """Monotonicity claims that hold when Theta >= 0 and B - Delta A >= 0."""
    slack = tols["monotone"]
    E = cols["E"]
    out = [at_least("E second differences", np.min(np.diff(E, 2)) if len(E) > 2 else 0.0, -tols["convexity"])]
    for k in k_values:
        if k >= 1:
            out.append(at_least(f"F_{k:g} min forward difference", en.min_forward_difference(cols[f"F_{k:g}"]), -slack))
    if has_w:
        out.append(at_least("W min forward difference", en.min_forward_difference(cols["W"]), -slack))
    if has_wplus:
        out.append(at_least("W+ min forward difference", en.min_forward_difference(cols["Wplus"]), -slack))
    for c in c_values:
        if c >= 0.25:
            out.append(at_least(f"lambda c={c:g} min forward difference",
                                en.min_forward_difference(cols[f"lambda_c{c:g}"]), -slack))
        if c == 0.25 and np.nanmax(cols[f"lambda_c{c:g}"]) <= 0:
            out.append(at_least("lambda_bar min forward difference (lambda <= 0)",
                                en.min_forward_difference(cols["lambda_bar_c0.25"]), -slack))
    return out


def _hypotheses_hold(s0: fl.FlowState) -> bool:
    """Theta >= 0 and B - Delta A >= 0 hold for every in-scope flow except a
    static metric with somewhere negative curvature."""
    if s0.kind.tag != "static":
        return True
    return float(geo.gauss_curvature(s0.metric).min()) >= -1e-12


def run_torus(cfg: ExperimentConfig) -> RunReport:
    s0 = initial_state(cfg)
    traj = fl.evolve(s0, cfg.t_end, cfg.dt, cfg.cfl)
    heat = ht.solve_backward(traj, terminal_data(cfg, s0.grid))
    w_tref = cfg.w_tref if not cfg.w_tref_auto else cfg.t_end + traj.dt
    series = en.build_series(traj, heat, en.SeriesConfig(
        k_values=cfg.k_values, w_tref=w_tref, wplus_tref=cfg.wplus_tref, slack=cfg.tolerances["monotone"]))
    if cfg.w_tref is None and not cfg.w_tref_auto:
        series.W[:] = np.nan
        series.dW_formula[:] = np.nan

    m = traj.n_full
    states = [traj.full_state(j) for j in range(m)]
    vol = np.array([geo.volume(s.metric) for s in states])
    cols = {
        "t": series.times, "vol": vol, "E": series.E,
        "E1_formula": series.E1_formula, "E1_fd": series.E1_fd,
        "E2_formula": series.E2_formula, "E2_fd": series.E2_fd,
        "W": series.W, "dW_formula": series.dW_formula,
        "Wplus": series.W_plus, "dWplus_formula": series.dWplus_formula,
        "min_theta": series.min_theta, "min_bmda": series.min_bmda,
    }
    for k in cfg.k_values:
        cols[f"F_{k:g}"] = series.F[k]
        cols[f"dF{k:g}_formula"] = series.dF_formula[k]
    for c in cfg.c_values:
        lam, lp, lbar = np.empty(m), np.empty(m), np.empty(m)
        prev = None
        for j, s in enumerate(states):
            eig = spc.lowest_eigenpair(s.metric, fl.trace_a(s), c, seed=cfg.seed, start=prev)
            prev = eig.eigenfunction
            lam[j] = eig.lam
            lp[j] = spc.lambda_prime_formula(s, eig, c)
            lbar[j] = spc.normalized_lambda(s.metric, eig.lam)
        cols[f"lambda_c{c:g}"] = lam
        cols[f"lambda_prime_formula_c{c:g}"] = lp
        cols[f"lambda_prime_fd_c{c:g}"] = _central(lam, traj.dt)
        cols[f"lambda_bar_c{c:g}"] = lbar

    tols = cfg.tolerances
    has_w = bool(np.isfinite(series.W).sum() > 2)
    has_wp = bool(np.isfinite(series.W_plus).sum() > 2)
    verdicts = _residual_verdicts(cols, cfg.k_values, cfg.c_values, tols["derivative"], has_w, has_wp,
                                  w_tref, cfg.wplus_tref)
    drift = np.abs(heat.masses() - heat.mass).max() / heat.mass
    verdicts.append(at_most("conjugate heat mass drift (relative)", drift, tols["mass"]))
    a_int = np.array([-geo.integrate(s.metric, fl.trace_a(s)) for s in states])
    dvol = _central(vol, traj.dt)
    gap = np.abs(dvol - a_int)
    verdicts.append(at_most("dV/dt + int A dy", np.nanmax(gap) if np.isfinite(gap).any() else np.nan, tols["volume"]))
    if _hypotheses_hold(s0):
        verdicts += _monotone_verdicts(cols, cfg.k_values, cfg.c_values, tols, has_w, has_wp)
    verdicts, skipped = _split_unresolved(verdicts)

    provenance = {
        "config": cfg.raw,
        "grid": {"n_points": cfg.n_points, "len_x": cfg.len_x, "len_y": cfg.len_y, "h": s0.grid.h},
        "dt": traj.dt,
        "steps": m - 1,
        "w_tref": w_tref if has_w else None,
        "skipped_checks": skipped,
        "build_id": build_id(),
    }
    return RunReport(csv_header(cfg.k_values, cfg.c_values), cols, verdicts, provenance)


def sphere_columns(cfg: ExperimentConfig):
    """Closed-form rows on an even time grid; also used to check CSV output."""
    n, s0, v0 = cfg.sphere_dim, cfg.sphere_s0, cfg.sphere_vol_unit
    t_star = s0 / (2 * (n - 1))
    steps = cfg.sphere_steps if cfg.dt is None else int(math.ceil(cfg.t_end / cfg.dt - 1e-9))
    times = np.linspace(0.0, cfg.t_end, steps + 1)
    dt = times[1] - times[0]
    w_tref = t_star if cfg.w_tref_auto else cfg.w_tref
    cols = {name: np.full(len(times), np.nan) for name in csv_header(cfg.k_values, cfg.c_values)}
    cols["t"] = times
    for j, t in enumerate(times):
        st = sphere_flow(s0, n, t, v0)
        wp = cfg.wplus_tref if cfg.wplus_tref is not None and t > cfg.wplus_tref else None
        for i, c in enumerate(cfg.c_values):
            for k in cfg.k_values:
                rep = sphere_reports(st, c, k, w_tref, wp)
                cols[f"F_{k:g}"][j] = rep.F_k
                cols[f"dF{k:g}_formula"][j] = rep.dF_k
            cols[f"lambda_c{c:g}"][j] = rep.lam
            cols[f"lambda_prime_formula_c{c:g}"][j] = rep.lam_prime
            cols[f"lambda_bar_c{c:g}"][j] = rep.lam_bar
        cols["vol"][j] = st.volume
        cols["E"][j], cols["E1_formula"][j], cols["E2_formula"][j] = rep.E, rep.E1, rep.E2
        if rep.W is not None:
            cols["W"][j], cols["dW_formula"][j] = rep.W, rep.dW
        if rep.W_plus is not None:
            cols["Wplus"][j], cols["dWplus_formula"][j] = rep.W_plus, rep.dW_plus
        cols["min_theta"][j] = 0.0
        cols["min_bmda"][j] = 0.0
    cols["E1_fd"] = _central(cols["E"], dt)
    cols["E2_fd"] = en._second(cols["E"], dt)
    for c in cfg.c_values:
        cols[f"lambda_prime_fd_c{c:g}"] = _central(cols[f"lambda_c{c:g}"], dt)
    return cols, dt, w_tref


def run_sphere(cfg: ExperimentConfig) -> RunReport:
    cols, dt, w_tref = sphere_columns(cfg)
    tols = cfg.tolerances
    has_w = w_tref is not None
    has_wp = bool(np.isfinite(cols["Wplus"]).sum() > 2)
    verdicts = _residual_verdicts(cols, cfg.k_values, cfg.c_values, tols["derivative"], has_w, has_wp,
                                  w_tref, cfg.wplus_tref)
    # -int A dy = -R V and V' = -R V exactly; the difference quotient is O(dt^2)
    a_int = -(cfg.sphere_dim * (cfg.sphere_dim - 1) / (cfg.sphere_s0 - 2 * (cfg.sphere_dim - 1) * cols["t"])) * cols["vol"]
    verdicts.append(at_most("dV/dt + int A dy (relative)",
                            en.relative_residual(a_int, _central(cols["vol"], dt)), tols["volume"]))
    verdicts += _monotone_verdicts(cols, cfg.k_values, cfg.c_values, tols, has_w, has_wp)
    verdicts, skipped = _split_unresolved(verdicts)
    provenance = {
        "config": cfg.raw,
        "sphere": {"dim": cfg.sphere_dim, "s0": cfg.sphere_s0, "vol_unit": cfg.sphere_vol_unit},
        "dt": dt,
        "steps": len(cols["t"]) - 1,
        "w_tref": w_tref,
        "skipped_checks": skipped,
        "build_id": build_id(),
    }
    return RunReport(csv_header(cfg.k_values, cfg.c_values), cols, verdicts, provenance)


def run(cfg: ExperimentConfig) -> RunReport:
    """Flow, backward heat solve, entropy and spectrum series, and verdicts."""
    return run_sphere(cfg) if cfg.backend == "sphere" else run_torus(cfg)


def scale_tolerances(cfg: ExperimentConfig, factor: float) -> ExperimentConfig:
    if not factor > 0:
        raise ConfigurationError("tolerance scale must be positive")
    return replace(cfg, tolerances={k: v * factor for k, v in cfg.tolerances.items()})


def sweep_values(spec: str) -> Tuple[str, List[str]]:
    """Parse ``key=v1,v2,...``."""
    if "=" not in spec:
        raise ConfigurationError(f"sweep parameter must look like key=v1,v2; got {spec!r}")
    key, values = (p.strip() for p in spec.split("=", 1))
    vals = [v.strip() for v in values.split(",") if v.strip()]
    if not vals:
        raise ConfigurationError(f"sweep parameter {key!r} has no values")
    return key, vals


def describe_error(exc: FlowLabError) -> str:
    """One-line message naming the failure and, when known, its time."""
    when = getattr(exc, "time", None)
    where = f" at t = {when:.6g}" if when is not None else ""
    return f"{type(exc).__name__}{where}: {exc}"
