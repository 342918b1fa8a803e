"""Sweep orchestration: JSON configs, per-point sampling, CSV tables, and text reports."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .asymptotics import estimate_taylor_moments, predict_q, randomwalk_closed_form
from .optimize import minimize
from .problems import RandomWalkProblem, build_problem, problem_optimize_options, problem_target
from .quality import estimate_q, fit_slope
from .samplers import METHODS, draw_ensemble, log_weights

log = logging.getLogger(__name__)

AXES = ("epsilon", "T", "n_dim")
CSV_COLUMNS = (
    "problem", "method", "axis", "axis_value", "dim", "n_samples", "seed", "q_hat", "q_se", "q_pred", "status",
)
# slopes of the guide lines drawn and fitted against, per sweep axis
DECLARED_SLOPES = {
    "epsilon": {"lm": 1, "rm": 1, "slm": 2, "srm": 2},
    "T": {"lm": 4, "rm": 4, "slm": 6, "srm": 6},
    "n_dim": {"lm": 1, "rm": 1, "slm": 2, "srm": 2},
}
MOMENT_SAMPLES = 10_000
MOMENT_SEED_SALT = 0x5EED
STATUS_OK = "ok"

_PROBLEM_AXES = {"random_walk": ("epsilon", "n_dim"), "quadratic": ("epsilon", "n_dim"), "lorenz63": ("epsilon", "T")}


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    params: dict
    methods: tuple
    axis: str
    values: tuple
    n_samples: int = 10_000
    seed: int = 0
    output_dir: str = "out"
    emit_predictions: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.problem not in _PROBLEM_AXES:
            raise ValueError(f"unknown problem {self.problem!r}")
        if not self.methods:
            raise ValueError("methods must be nonempty")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown methods {bad}; expected a subset of {METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("methods must not repeat")
        if self.axis not in _PROBLEM_AXES[self.problem]:
            raise ValueError(f"axis {self.axis!r} not available for {self.problem}")
        if self.axis in self.params:
            raise ValueError(f"{self.axis!r} is the sweep axis and cannot also be a fixed parameter")
        if not self.values:
            raise ValueError("sweep grid must be nonempty")
        if any(not (v > 0) for v in self.values):
            raise ValueError("sweep values must be positive")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("sweep values must be strictly increasing")
        if self.axis == "n_dim" and any(v != int(v) for v in self.values):
            raise ValueError("n_dim values must be integers")
        if self.n_samples < 2:
            raise ValueError("n_samples must be at least 2")
        # fail fast on bad problem parameters
        build_problem(self.problem, self.point_params(self.values[0]), self.seed)

    def point_params(self, value) -> dict:
        v = int(value) if self.axis == "n_dim" else float(value)
        return {**self.params, self.axis: v}

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        """Parse the JSON form; unknown keys at any level are rejected."""
        _check_keys(raw, {"problem", "methods", "sweep"}, {"n_samples", "seed", "output_dir", "emit_predictions"}, "config")
        prob = raw["problem"]
        _check_keys(prob, {"name"}, {"params"}, "problem")
        sweep = raw["sweep"]
        _check_keys(sweep, {"axis", "values"}, set(), "sweep")
        kw = {k: raw[k] for k in ("n_samples", "seed", "output_dir", "emit_predictions") if k in raw}
        for key, typ in (("n_samples", int), ("seed", int), ("emit_predictions", bool), ("output_dir", str)):
            if key in kw and (not isinstance(kw[key], typ) or (typ is int and isinstance(kw[key], bool))):
                raise ValueError(f"{key} must be of type {typ.__name__}")
        return cls(
            problem=prob["name"],
            params=dict(prob.get("params", {})),
            methods=tuple(raw["methods"]),
            axis=sweep["axis"],
            values=tuple(sweep["values"]),
            **kw,
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "problem": {"name": self.problem, "params": dict(self.params)},
            "methods": list(self.methods),
            "sweep": {"axis": self.axis, "values": list(self.values)},
            "n_samples": self.n_samples,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "emit_predictions": self.emit_predictions,
        }


def _check_keys(d, required: set, optional: set, where: str):
    if not isinstance(d, dict):
        raise ValueError(f"{where} must be a JSON object")
    unknown = set(d) - required - optional
    if unknown:
        raise ValueError(f"unknown keys in {where}: {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise ValueError(f"missing keys in {where}: {sorted(missing)}")


@dataclass(frozen=True)
class ResultRow:
    problem: str
    method: str
    axis: str
    axis_value: float
    dim: int
    n_samples: int
    seed: int
    q_hat: Optional[float] = None
    q_se: Optional[float] = None
    q_pred: Optional[float] = None
    status: str = STATUS_OK

    def __post_init__(self):
        # numpy scalars would leak their repr into the CSV
        for name in ("axis_value", "q_hat", "q_se", "q_pred"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, float(v))

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


def _predictions(cfg: ExperimentConfig, problem, t, m) -> dict:
    """q_pred per method; closed forms where they exist, Taylor moments otherwise."""
    preds: dict = {}
    need_moments = []
    for method in cfg.methods:
        if isinstance(problem, RandomWalkProblem) and method in ("lm", "rm"):
            preds[method] = randomwalk_closed_form(method, problem.n_dim, problem.alpha, problem.epsilon)
        else:
            need_moments.append(method)
    if need_moments:
        mom = estimate_taylor_moments(t, m, MOMENT_SAMPLES, (cfg.seed + MOMENT_SEED_SALT) % 2**64)
        for method in need_moments:
            # moments come from the eps-folded potential
            preds[method] = predict_q(method, t.dim, 1.0, mom)
    return preds


def _status(exc: Exception) -> str:
    # kept free of separators so the CSV stays one token per field
    return "failed:" + type(exc).__name__


def run_point(cfg: ExperimentConfig, value) -> list[ResultRow]:
    """All methods at one grid value; failures become row statuses."""
    base = dict(problem=cfg.problem, axis=cfg.axis, axis_value=float(value), n_samples=cfg.n_samples, seed=cfg.seed)
    try:
        problem = build_problem(cfg.problem, cfg.point_params(value), cfg.seed)
        t = problem_target(problem)
        m = minimize(t, problem_optimize_options(problem))
    except Exception as exc:  # noqa: BLE001 - the sweep must go on
        log.error("%s=%g: setup failed: %s", cfg.axis, value, exc)
        dim = int(value) if cfg.axis == "n_dim" else 0
        return [ResultRow(method=meth, dim=dim, status=_status(exc), **base) for meth in cfg.methods]

    preds: dict = {}
    if cfg.emit_predictions:
        try:
            preds = _predictions(cfg, problem, t, m)
        except Exception as exc:  # noqa: BLE001
            log.warning("%s=%g: predictions unavailable: %s", cfg.axis, value, exc)

    rows = []
    for method in cfg.methods:
        try:
            samples = draw_ensemble(method, t, m, cfg.n_samples, cfg.seed, workers=cfg.workers)
            rep = estimate_q(log_weights(samples))
        except Exception as exc:  # noqa: BLE001
            log.error("%s=%g %s: %s", cfg.axis, value, method, exc)
            rows.append(ResultRow(method=method, dim=t.dim, q_pred=preds.get(method), status=_status(exc), **base))
            continue
        log.info("%s=%g %s: Q=%.4g +- %.2g", cfg.axis, value, method, rep.q_hat, rep.q_se)
        rows.append(
            ResultRow(method=method, dim=t.dim, q_hat=rep.q_hat, q_se=rep.q_se, q_pred=preds.get(method), **base)
        )
    return rows


def run_sweep(cfg: ExperimentConfig) -> list[ResultRow]:
    """One row per (grid value, method), in grid order then method order."""
    table = []
    for value in cfg.values:
        table.extend(run_point(cfg, value))
    return table


# --- CSV --------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(table: Sequence[ResultRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in table:
            w.writerow([_fmt(getattr(row, c)) for c in CSV_COLUMNS])


def _opt_float(s: str) -> Optional[float]:
    return float(s) if s != "" else None


def read_csv(path) -> list[ResultRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {header}")
        out = []
        for rec in reader:
            r = dict(zip(CSV_COLUMNS, rec))
            out.append(
                ResultRow(
                    problem=r["problem"], method=r["method"], axis=r["axis"], axis_value=float(r["axis_value"]),
                    dim=int(r["dim"]), n_samples=int(r["n_samples"]), seed=int(r["seed"]),
                    q_hat=_opt_float(r["q_hat"]), q_se=_opt_float(r["q_se"]), q_pred=_opt_float(r["q_pred"]),
                    status=r["status"],
                )
            )
        return out


# --- summaries --------------------------------------------------------------


@dataclass
class MethodSummary:
    method: str
    n_ok: int
    slope: Optional[float] = None
    declared_slope: Optional[float] = None
    constant: Optional[float] = None
    constant_at: Optional[float] = None
    pred_ratios: list = field(default_factory=list)


def summarize(table: Sequence[ResultRow]) -> list[MethodSummary]:
    methods = list(dict.fromkeys(r.method for r in table))
    out = []
    for method in methods:
        rows = [r for r in table if r.method == method and r.ok and r.q_hat is not None and r.q_hat > 0]
        s = MethodSummary(method, len(rows))
        if rows:
            axis = rows[0].axis
            s.declared_slope = DECLARED_SLOPES.get(axis, {}).get(method)
            xs = [r.axis_value for r in rows]
            ys = [r.q_hat for r in rows]
            if len(set(xs)) >= 2:
                s.slope = fit_slope(xs, ys)[0]
            first = min(rows, key=lambda r: r.axis_value)
            p = s.declared_slope if s.declared_slope is not None else 0
            s.constant = first.q_hat / first.axis_value**p
            s.constant_at = first.axis_value
            s.pred_ratios = [r.q_hat / r.q_pred for r in rows if r.q_pred]
        out.append(s)
    return out


def report(table: Sequence[ResultRow]) -> str:
    """Per-method slope, constant at the smallest grid value, and q_hat/q_pred range."""
    lines = []
    axis = table[0].axis if table else "?"
    for s in summarize(table):
        if s.n_ok == 0:
            lines.append(f"{s.method}: no successful rows")
            continue
        parts = [f"{s.method}:"]
        parts.append(f"slope {s.slope:.3f}" if s.slope is not None else "slope n/a")
        if s.declared_slope is not None:
            parts.append(f"(declared {s.declared_slope})")
            parts.append(f"constant {s.constant:.4g} at {axis}={s.constant_at:g}")
        if s.pred_ratios:
            lo, hi = min(s.pred_ratios), max(s.pred_ratios)
            parts.append(f"q_hat/q_pred {lo:.3f}..{hi:.3f}")
        lines.append(" ".join(parts))
    n_fail = sum(not r.ok for r in table)
    lines.append(f"failures: {n_fail} of {len(table)} rows")
    return "\n".join(lines)


def geometric_anchor(xs, ys, slope: float) -> float:
    """C minimizing the log-residuals of y = C x^slope."""
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    return float(math.exp(np.mean(ly - slope * lx)))
