"""Parameter sweeps over (g, Omega'_R) and Delta_B scans of the dressed spectrum.

Config files are JSON::

    {
      "model":  {"g_B": 15, "delta_B": 15, "gamma_X": 0.1, "gamma_B": 0.1,
                 "E_R": 0.02, "E_L": 0.02},
      "axes":   [{"name": "g", "start": 5, "stop": 30, "count": 40},
                 {"name": "omega_R_det", "start": -40, "stop": 40, "count": 40}],
      "rules":  {"omega_L_det": "-g"},
      "n_max":  2,
      "branch": "upper",
      "filter_width": null,
      "output": {"path": "fig3.csv", "metadata": true}
    }

Axis and rule targets are ModelParams field names. Rules are arithmetic
expressions over model fields and axis values, evaluated in file order at
every grid point.
"""

from __future__ import annotations

import ast
import csv
import dataclasses
import io
import json
import logging
import math
import operator
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from qdpairs.dressed import cubic_shifts, diagonalize_manifolds, transition_table
from qdpairs.fock_basis import build_basis
from qdpairs.lindblad import SteadyStateError, build_liouvillian, shell_population, steady_state
from qdpairs.model import ModelParams, build_h0, rotating_frame_hamiltonian
from qdpairs.pairs import (
    PAIR_LABELS,
    CascadeBranch,
    ZeroPairFluxError,
    concurrence,
    eof_from_concurrence,
    lorentzian_weights,
    pair_density_matrix,
    transition_operators,
)

log = logging.getLogger(__name__)

PARAM_NAMES = tuple(f.name for f in dataclasses.fields(ModelParams))
SHELL_WARN = 1e-4


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# rule expressions

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCS = {"sqrt": math.sqrt, "abs": abs}


def _names_in(expr: str) -> set:
    return {
        n.id for n in ast.walk(ast.parse(expr, mode="eval"))
        if isinstance(n, ast.Name) and n.id not in _FUNCS
    }


def eval_rule(expr: str, env: Dict[str, float]) -> float:
    """Evaluate an arithmetic rule such as ``-g`` or ``g - 0.5*delta_B``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id not in env:
                raise ConfigError(f"rule refers to unknown name {node.id!r}")
            return float(env[node.id])
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return float(_FUNCS[node.func.id](ev(node.args[0])))
        raise ConfigError(f"unsupported syntax in rule {expr!r}")

    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse rule {expr!r}: {exc}") from exc
    return ev(tree)


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.start)])
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepConfig:
    model: ModelParams
    axes: Tuple[Axis, ...]
    rules: Tuple[Tuple[str, str], ...] = ()
    branch: CascadeBranch = CascadeBranch.UPPER
    n_max: int = 2
    filter_width: Optional[float] = None
    output: Optional[str] = None
    metadata: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": dataclasses.asdict(self.model),
            "axes": [dataclasses.asdict(a) for a in self.axes],
            "rules": dict(self.rules),
            "n_max": self.n_max,
            "branch": self.branch.value,
            "filter_width": self.filter_width,
            "output": {"path": self.output, "metadata": self.metadata},
        }

    def with_overrides(self, n_max=None, branch=None, output=None) -> "SweepConfig":
        changes = {}
        if n_max is not None:
            changes["n_max"] = _check_n_max(n_max)
        if branch is not None:
            changes["branch"] = CascadeBranch(branch)
        if output is not None:
            changes["output"] = output
        return dataclasses.replace(self, **changes)

    def params_at(self, *axis_values: float) -> ModelParams:
        values = dict(zip((a.name for a in self.axes), axis_values))
        env = dataclasses.asdict(self.model)
        env.update(values)
        for target, expr in self.rules:
            env[target] = eval_rule(expr, env)
        try:
            return self.model.replace(**{k: env[k] for k in PARAM_NAMES})
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"invalid parameters at {values}: {exc}") from exc

    def grid(self) -> List[Tuple[float, ...]]:
        """Grid points, first axis slowest."""
        if not self.axes:
            return [()]
        mesh = np.meshgrid(*[a.values() for a in self.axes], indexing="ij")
        return [tuple(float(m.flat[i]) for m in mesh) for i in range(mesh[0].size)]


def _check_n_max(n_max) -> int:
    if not isinstance(n_max, int) or isinstance(n_max, bool) or n_max < 2:
        raise ConfigError(f"n_max must be an integer >= 2 for the pair pipeline, got {n_max!r}")
    return n_max


def parse_config(data: Dict[str, Any], max_axes: int = 2) -> SweepConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - {"model", "axes", "rules", "n_max", "branch", "filter_width", "output"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    model_data = data.get("model", {})
    bad = set(model_data) - set(PARAM_NAMES)
    if bad:
        raise ConfigError(f"unknown model parameters: {sorted(bad)}")
    try:
        model = ModelParams(**{k: float(v) for k, v in model_data.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid model section: {exc}") from exc

    axes = []
    for entry in data.get("axes", []):
        try:
            ax = Axis(str(entry["name"]), float(entry["start"]), float(entry["stop"]), entry["count"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"axis needs name/start/stop/count: {entry!r}") from exc
        if ax.name not in PARAM_NAMES:
            raise ConfigError(f"axis {ax.name!r} is not a model parameter")
        if not isinstance(ax.count, int) or ax.count < 1:
            raise ConfigError(f"axis {ax.name!r}: count must be an integer >= 1")
        if ax.start > ax.stop:
            raise ConfigError(f"axis {ax.name!r}: start must be <= stop")
        axes.append(ax)
    if len(axes) > max_axes:
        raise ConfigError(f"at most {max_axes} axes supported")
    if len({a.name for a in axes}) != len(axes):
        raise ConfigError("axis names must be distinct")

    rules = data.get("rules", {})
    if not isinstance(rules, dict):
        raise ConfigError("rules must be an object mapping parameter -> expression")
    for target, expr in rules.items():
        if target not in PARAM_NAMES:
            raise ConfigError(f"rule target {target!r} is not a model parameter")
        if target in {a.name for a in axes}:
            raise ConfigError(f"rule target {target!r} is also an axis")
        if not isinstance(expr, str):
            raise ConfigError(f"rule for {target!r} must be a string expression")
        try:
            missing = _names_in(expr) - set(PARAM_NAMES)
        except SyntaxError as exc:
            raise ConfigError(f"cannot parse rule {expr!r}") from exc
        if missing:
            raise ConfigError(f"rule {target} = {expr!r} refers to undefined {sorted(missing)}")

    try:
        branch = CascadeBranch(data.get("branch", "upper"))
    except ValueError as exc:
        raise ConfigError("branch must be 'upper' or 'lower'") from exc
    filter_width = data.get("filter_width")
    if filter_width is not None and not (isinstance(filter_width, (int, float)) and filter_width > 0):
        raise ConfigError("filter_width must be a positive number or null")
    out = data.get("output", {}) or {}
    if not isinstance(out, dict):
        raise ConfigError("output must be an object")

    cfg = SweepConfig(
        model=model,
        axes=tuple(axes),
        rules=tuple(rules.items()),
        branch=branch,
        n_max=_check_n_max(data.get("n_max", 2)),
        filter_width=None if filter_width is None else float(filter_width),
        output=out.get("path"),
        metadata=bool(out.get("metadata", True)),
    )
    # surface rule/parameter errors now rather than mid-sweep
    for corner in _corners(cfg):
        cfg.params_at(*corner)
    return cfg


def _corners(cfg: SweepConfig):
    if not cfg.axes:
        return [()]
    ends = [(a.start, a.stop) for a in cfg.axes]
    return list(np.array(np.meshgrid(*ends, indexing="ij")).reshape(len(ends), -1).T)


def load_config(path, max_axes: int = 2) -> SweepConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(data, max_axes=max_axes)


# --------------------------------------------------------------------------
# single point


POINT_FIELDS = (
    "eof", "concurrence", "p_LR", "p_RL", "p_LL", "p_RR",
    "pair_flux", "residual", "shell_population", "shell_warning", "status",
)


def evaluate_point(
    p: ModelParams,
    n_max: int = 2,
    branch: CascadeBranch = CascadeBranch.UPPER,
    filter_width: Optional[float] = None,
    return_state: bool = False,
):
    """Run basis -> model -> steady state -> pair matrix -> EoF for one point.

    Failures are reported in ``status`` rather than raised. With
    ``return_state`` the steady state and pair matrix are returned as well.
    """
    branch = CascadeBranch(branch)
    basis = build_basis(n_max)
    rec: Dict[str, Any] = dict.fromkeys(POINT_FIELDS, float("nan"))
    rec.update(shell_warning=False, status="ok")
    ss = pm = None
    try:
        L = build_liouvillian(rotating_frame_hamiltonian(basis, p), p, basis)
        ss = steady_state(L)
    except SteadyStateError as exc:
        rec["status"] = "singular"
        log.warning("steady state failed at %s: %s", p, exc)
    if ss is not None:
        rec["residual"] = ss.residual
        shell = shell_population(ss.rho, basis)
        rec["shell_population"] = shell
        rec["shell_warning"] = shell > SHELL_WARN
        if shell > SHELL_WARN:
            log.warning("population %.3g at the photon truncation edge; raise n_max", shell)

        dressed = diagonalize_manifolds(build_h0(basis, p), basis, eps0=p.eps0)
        table = transition_table(dressed, basis)
        weights = None
        if filter_width is not None:
            weights = lorentzian_weights(dressed, p.omega_R_det + p.omega_L_det, filter_width)
        T = transition_operators(table, dressed, basis, branch, weights)
        omega1 = p.g if branch is CascadeBranch.UPPER else -p.g
        omega2 = p.omega_R_det + p.omega_L_det - omega1
        try:
            pm = pair_density_matrix(ss, T, omega1, omega2, branch)
        except ZeroPairFluxError:
            rec["status"] = "no_pair_flux"
            rec["pair_flux"] = 0.0
        else:
            c = concurrence(pm)
            rec["concurrence"] = c
            rec["eof"] = eof_from_concurrence(c)
            rec["pair_flux"] = pm.flux
            for lab, val in pm.populations().items():
                rec[f"p_{lab}"] = val
    if return_state:
        return rec, ss, pm
    return rec


def _point_task(args):
    cfg, values = args
    return evaluate_point(cfg.params_at(*values), cfg.n_max, cfg.branch, cfg.filter_width)


# --------------------------------------------------------------------------
# sweeps


@dataclass
class SweepResult:
    axis_names: Tuple[str, ...]
    shape: Tuple[int, ...]
    records: List[Dict[str, Any]] = field(repr=False)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.records], dtype=float).reshape(self.shape)

    @property
    def fieldnames(self) -> List[str]:
        return list(self.axis_names) + list(POINT_FIELDS)

    def summary(self) -> Dict[str, Any]:
        eofs = np.array([r["eof"] for r in self.records], dtype=float)
        out = {"points": len(self.records), "shape": self.shape,
               "failed": sum(r["status"] != "ok" for r in self.records)}
        if np.all(np.isnan(eofs)):
            out.update(max_eof=float("nan"), argmax=None)
        else:
            k = int(np.nanargmax(eofs))
            out.update(max_eof=float(eofs[k]),
                       argmax={n: self.records[k][n] for n in self.axis_names})
        return out


def run_sweep(cfg: SweepConfig, workers: int = 1, chunksize: Optional[int] = None) -> SweepResult:
    """Evaluate every grid point. Record order is grid order for any ``workers``."""
    points = cfg.grid()
    tasks = [(cfg, v) for v in points]
    if workers <= 1 or len(points) == 1:
        results = [_point_task(t) for t in tasks]
    else:
        chunksize = chunksize or max(1, len(tasks) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_point_task, tasks, chunksize=chunksize))
    names = tuple(a.name for a in cfg.axes)
    records = []
    for values, rec in zip(points, results):
        row = dict(zip(names, values))
        row.update(rec)
        records.append(row)
    shape = tuple(a.count for a in cfg.axes) or (1,)
    return SweepResult(names, shape, records)


SCAN_AMPLITUDES = tuple(
    (mid, f"T{j}", "R" if mid[0] == "L" else "L")
    for mid in ("L+", "L-", "R+", "R-") for j in (1, 2, 3)
)


def _scan_column(mid: str, triplet: str) -> str:
    return f"abs_gamma_{mid}_{triplet}"


def scan_fieldnames() -> List[str]:
    return ["delta_B", "a1", "a2", "a3"] + [_scan_column(m, t) for m, t, _ in SCAN_AMPLITUDES]


def dressed_scan(cfg: SweepConfig) -> List[Dict[str, float]]:
    """a_1..a_3 and |gamma| between one-excitation and triplet states versus Delta_B.

    Expects a single axis named ``delta_B``; g and g_B come from the model.
    """
    if len(cfg.axes) != 1 or cfg.axes[0].name != "delta_B":
        raise ConfigError("dressed-scan needs exactly one axis, named 'delta_B'")
    basis = build_basis(2)
    rows = []
    for delta_B in cfg.axes[0].values():
        p = cfg.params_at(float(delta_B))
        dressed = diagonalize_manifolds(build_h0(basis, p), basis, eps0=p.eps0)
        if p.delta_B > 0:
            a = cubic_shifts(p.g, p.g_B, p.delta_B)
        else:
            shifts = {s.label: s.energy_shift for s in dressed}
            a = tuple(-shifts[f"T{j}"] for j in (1, 2, 3))
        table = transition_table(dressed, basis)
        row = {"delta_B": p.delta_B, "a1": a[0], "a2": a[1], "a3": a[2]}
        for mid, t, pol in SCAN_AMPLITUDES:
            row[_scan_column(mid, t)] = abs(table.gamma(mid, t, pol))
        rows.append(row)
    return rows


# --------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def csv_text(fieldnames: Sequence[str], records: Sequence[Dict[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fieldnames)
    for r in records:
        w.writerow([_fmt(r[k]) for k in fieldnames])
    return buf.getvalue()


def atomic_write(path, text: str) -> None:
    """Write via a temp file in the target directory, then rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_metadata(path, cfg: SweepConfig, extra: Optional[Dict[str, Any]] = None) -> str:
    from qdpairs import __version__
    from qdpairs.fock_basis import ORDERING_VERSION

    meta = {"config": cfg.to_dict(), "version": __version__, "basis_ordering": ORDERING_VERSION}
    if extra:
        meta.update(extra)
    meta_path = str(path) + ".meta.json"
    atomic_write(meta_path, json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")
    return meta_path
