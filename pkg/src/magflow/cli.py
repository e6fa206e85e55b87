"""Command-line front end: ``magflow simulate | verify | scan | reduce``.

Exit codes: 0 ok, 2 configuration error, 3 integration failure,
4 verification failure, 5 hypothesis violated.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from importlib import metadata

import click
import numpy as np

from .dynamics import (
    FlowSpec,
    HypothesisViolated,
    StepFailure,
    circle_radius_from_trajectory,
    integrate,
    larmor_radius,
    pendulum_momentum_drift,
    pendulum_radius_formula,
    projected_circle,
    unit_speed_state,
)
from .integrals import InconsistentRanks, NotApplicable, _pair, build_catalog, jacobian_rank, random_points
from .phasecore import MagneticField, NotSkew, PhaseState, SystemParams, canonicalize_kappa
from .verification import (
    TARGETS,
    applicable_targets,
    certify_item,
    classify,
    leading_equal,
    reduction_run,
    run_target,
)

EXIT_OK, EXIT_CONFIG, EXIT_INTEGRATION, EXIT_VERIFICATION, EXIT_HYPOTHESIS = 0, 2, 3, 4, 5
FLOWS = {"sphere": "sphere", "ambient": "ambient_rn", "ambient_rn": "ambient_rn", "pendulum": "pendulum"}
SCAN_COLUMNS = [
    "config_hash",
    "n",
    "blocks",
    "m",
    "s",
    "seed",
    "t_end",
    "status",
    "max_drift",
    "drift",
    "independence_rank",
    "theorem",
    "ddim",
    "dind",
    "sum_ok",
    "error",
]


class ConfigError(ValueError):
    pass


class Exit(Exception):
    def __init__(self, code, message=""):
        super().__init__(message)
        self.code = code


# --- configuration ---------------------------------------------------------------


@dataclass
class RunConfig:
    n: int | None = None
    m: float = 1.0
    s: float = 1.0
    blocks: list | None = None
    matrix: list | None = None
    flow: str = "sphere"
    initial: dict | None = None
    seed: int = 0
    t_end: float | None = None  # None: the command's default
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    b: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    out: str = "."
    options: dict = field(default_factory=dict)

    def semantic(self) -> dict:
        """Fields that determine the result (output location excluded)."""
        d = asdict(self)
        d.pop("out")
        return d

    def hash(self) -> str:
        text = json.dumps(self.semantic(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def params(self) -> SystemParams:
        try:
            return SystemParams(self.n, self.m, self.s)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    def field(self) -> MagneticField:
        try:
            if self.matrix is not None:
                return canonicalize_kappa(np.array(self.matrix, dtype=float))
            return MagneticField.from_blocks(self.blocks, self.n)
        except (NotSkew, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    def initial_state(self) -> PhaseState:
        """Explicit ``initial`` or a seeded unit-speed point of T*S^{n-1}."""
        if self.initial is None:
            return unit_speed_state(self.n, self.seed, self.m)
        try:
            g = np.array(self.initial["gamma"], dtype=float)
            p = np.array(self.initial["p"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad initial state: {exc}") from None
        if g.shape != (self.n,) or p.shape != (self.n,):
            raise ConfigError("initial gamma and p need n entries each")
        st = PhaseState(g, p)
        if FLOWS[self.flow] != "ambient_rn" and not st.check_constraints():
            raise ConfigError("initial state violates |gamma| = 1, <p, gamma> = 0")
        return PhaseState(g, p, FLOWS[self.flow] != "ambient_rn")

    def validate(self) -> "RunConfig":
        if self.flow not in FLOWS:
            raise ConfigError(f"unknown flow {self.flow!r}; use sphere, ambient or pendulum")
        if FLOWS[self.flow] == "pendulum":
            if self.n not in (None, 3):
                raise ConfigError("the pendulum flow needs n = 3")
            self.n = 3
            if len(self.b) != 3:
                raise ConfigError("b needs three components")
            self.blocks, self.matrix = [0.0], None
        if (self.blocks is None) == (self.matrix is None):
            raise ConfigError("give exactly one of blocks or matrix")
        if self.matrix is not None:
            rows = len(self.matrix)
            if self.n is None:
                self.n = rows
            if rows != self.n or any(len(r) != rows for r in self.matrix):
                raise ConfigError("matrix must be n x n")
        else:
            self.blocks = [float(x) for x in self.blocks]
            if self.n is None:
                self.n = 2 * len(self.blocks)
            if len(self.blocks) != self.n // 2:
                raise ConfigError(f"n={self.n} needs {self.n // 2} blocks, got {len(self.blocks)}")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigError("tolerances must be positive")
        if self.t_end is not None and not math.isfinite(self.t_end):
            raise ConfigError("t_end must be finite")
        self.params()
        self.field()
        return self


def _parse_list(text, what):
    if text is None:
        return None
    try:
        return [float(x) for x in str(text).replace(" ", "").split(",") if x != ""]
    except ValueError:
        raise ConfigError(f"cannot parse {what} {text!r}") from None


def load_config(path=None, **overrides) -> RunConfig:
    """RunConfig from a JSON document, then non-None ``overrides``."""
    data = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    known = set(RunConfig.__dataclass_fields__)
    options = dict(data.pop("options", {}))
    for k in list(data):
        if k not in known:
            options[k] = data.pop(k)
    for k, v in overrides.items():
        if v is None:
            continue
        if k in known:
            data[k] = v
        else:
            options[k] = v
    if "blocks" in overrides and overrides["blocks"] is not None:
        data.pop("matrix", None)
    data["options"] = options
    try:
        cfg = RunConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return cfg.validate()


# --- report helpers -------------------------------------------------------------------


def _versions() -> dict:
    def ver(name):
        try:
            return metadata.version(name)
        except metadata.PackageNotFoundError:
            return "unknown"

    from . import _backend

    return {
        "magflow": ver("artifact"),
        "numpy": np.__version__,
        "scipy": ver("scipy"),
        "python": platform.python_version(),
        "kernel": _backend.BACKEND,
    }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, PhaseState):
        return {"gamma": _jsonable(np.asarray(x.gamma, dtype=float)), "p": _jsonable(np.asarray(x.p, dtype=float))}
    return x


def write_json(path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _provenance(cfg: RunConfig) -> dict:
    return {"seed": cfg.seed, "config_hash": cfg.hash(), "config": cfg.semantic(), "versions": _versions()}


def _outdir(cfg: RunConfig) -> str:
    os.makedirs(cfg.out, exist_ok=True)
    return cfg.out


# --- commands -------------------------------------------------------------------------


def _with_t_end(cfg: RunConfig, default: float) -> RunConfig:
    if cfg.t_end is None:
        cfg.t_end = default
    return cfg


def cmd_simulate(cfg: RunConfig) -> dict:
    cfg = _with_t_end(cfg, 100.0)
    params = cfg.params()
    kind = FLOWS[cfg.flow]
    fld = None if kind == "pendulum" else cfg.field()
    spec = FlowSpec(kind, params, fld, b=tuple(cfg.b))
    x0 = cfg.initial_state()
    try:
        traj = integrate(spec, x0, cfg.t_end, rtol=cfg.rel_tol, atol=cfg.abs_tol)
    except StepFailure as exc:
        raise Exit(EXIT_INTEGRATION, str(exc)) from None
    out = _outdir(cfg)
    csv_path = os.path.join(out, "trajectory.csv")
    traj.to_csv(csv_path)
    summary = {
        "provenance": _provenance(cfg),
        "flow": kind,
        "steps": len(traj.times) - 1,
        "nfev": traj.nfev,
        "drift": traj.drift,
        "max_drift": max(traj.drift.values()) if traj.drift else 0.0,
        "trajectory": os.path.basename(csv_path),
    }
    if kind != "ambient_rn":
        summary["max_constraint_residual"] = float(np.max(np.abs(traj.constraint_residuals())))
    if kind == "pendulum":
        summary["momentum_drift"] = pendulum_momentum_drift(traj)
        if not any(cfg.b):
            summary["circle_radius"] = circle_radius_from_trajectory(traj)
            summary["circle_radius_formula"] = pendulum_radius_formula(params.s)
            summary["unit_speed"] = bool(abs(np.linalg.norm(x0.p) - 1) < 1e-9)
    if kind == "ambient_rn":
        circles = []
        p0 = fld.to_canonical(np.asarray(x0.p, dtype=float))
        for i, k in enumerate(fld.blocks):
            if k == 0:
                continue
            canon = replace(traj, states=np.hstack([fld.to_canonical(traj.states[:, : params.n]), traj.states[:, params.n :]]))
            center, radius, period = projected_circle(canon, i)
            circles.append(
                {
                    "block": _pair(2 * i + 1, 2 * i + 2),
                    "center": center,
                    "radius": radius,
                    "radius_formula": larmor_radius(p0[2 * i : 2 * i + 2], k, params.s),
                    "period": period,
                    "period_formula": 2 * math.pi * params.m / abs(params.s * k),
                }
            )
        summary["circles"] = circles
    write_json(os.path.join(out, "summary.json"), summary)
    return summary


def cmd_verify(cfg: RunConfig, targets=None) -> dict:
    params = cfg.params()
    fld = cfg.field()
    blocks = tuple(fld.blocks)
    trials = cfg.options.get("trials")
    if targets:
        unknown = [t for t in targets if t not in TARGETS]
        if unknown:
            raise ConfigError(f"unknown targets {unknown}; choose from {list(TARGETS)}")
    else:
        targets = applicable_targets(params, blocks)
    verdicts = []
    for t in targets:
        try:
            entries = run_target(t, params, blocks, seed=cfg.seed, trials=trials)
        except (NotApplicable, HypothesisViolated) as exc:
            raise Exit(EXIT_HYPOTHESIS, f"{t}: {exc}") from None
        except StepFailure as exc:
            raise Exit(EXIT_INTEGRATION, f"{t}: {exc}") from None
        for e in entries:
            e["target"] = t
        verdicts += entries
    failed = [v for v in verdicts if v.get("asserted", True) and not v["holds"]]
    report = {
        "provenance": _provenance(cfg),
        "blocks": list(blocks),
        "targets": list(targets),
        "verdicts": verdicts,
        "all_hold": not failed,
    }
    out = _outdir(cfg)
    write_json(os.path.join(out, "report.json"), report)
    if failed:
        lines = [f"{v['target']}: {v.get('claim', '')} fails" + (f" at {_jsonable(v['counterexample'])}" if "counterexample" in v else "") for v in failed]
        raise Exit(EXIT_VERIFICATION, "\n".join(lines))
    return report


def scan_cell(cell: RunConfig) -> dict:
    """One grid cell: drift table, independence rank, certificate."""
    row = {
        "config_hash": cell.hash(),
        "n": cell.n,
        "blocks": ",".join(repr(b) for b in cell.blocks),
        "m": cell.m,
        "s": cell.s,
        "seed": cell.seed,
        "t_end": cell.t_end,
    }
    try:
        params = cell.params()
        fld = cell.field()
        cat = build_catalog(params, fld)
        traj = integrate(FlowSpec("sphere", params, fld), cell.initial_state(), cell.t_end, rtol=cell.rel_tol, atol=cell.abs_tol, integrals=cat.observables)
        row["drift"] = json.dumps(traj.drift, sort_keys=True)
        row["max_drift"] = max(traj.drift.values())
        base = ["H", "J"] + [f"Phi_{_pair(2 * i + 1, 2 * i + 2)}" for i in range(len(fld.blocks))]
        row["independence_rank"] = max(jacobian_rank(cat.select(base), p) for p in random_points(params.n, 20, cell.seed))
        items = classify(params.n, fld.blocks)
        if items:
            entry = certify_item(items[0], params, fld.blocks, cell.seed, exact=False)
            cert = entry.get("certificate", {})
            row.update(theorem=items[0], ddim=cert.get("ddim", ""), dind=cert.get("dind", ""), sum_ok=cert.get("sum_ok", ""))
            row["status"] = "ok" if entry["holds"] else "certificate_mismatch"
        else:
            row.update(theorem="unclassified", status="ok")
    except (StepFailure, InconsistentRanks, NotApplicable, ValueError) as exc:
        row.update(status="error", error=f"{type(exc).__name__}: {exc}")
    return row


def _read_store(path) -> dict:
    if not os.path.exists(path):
        return {}
    with open(path, newline="") as fh:
        return {r["config_hash"]: r for r in csv.DictReader(fh)}


def _append_rows(path, rows) -> None:
    new = not os.path.exists(path)
    with open(path, "a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SCAN_COLUMNS, restval="")
        if new:
            w.writeheader()
        for r in rows:
            w.writerow({k: r.get(k, "") for k in SCAN_COLUMNS})


def scan_grid(cfg: RunConfig) -> list:
    """Cells from ``options.grid`` (list of {n, blocks}) or the n x blocks
    product of the comma/semicolon lists given on the command line."""
    grid = cfg.options.get("grid")
    cells = []
    if grid:
        for g in grid:
            cells.append((int(g["n"]), [float(x) for x in g["blocks"]]))
    else:
        ns = cfg.options.get("n_list") or [cfg.n]
        bl = cfg.options.get("blocks_list") or [cfg.blocks]
        for n in ns:
            for b in bl:
                if len(b) == n // 2:
                    cells.append((int(n), list(b)))
    if not cells:
        raise ConfigError("scan grid is empty (block count must be n // 2)")
    return [replace(cfg, n=n, blocks=b, matrix=None, flow="sphere", options={}).validate() for n, b in cells]


def cmd_scan(cfg: RunConfig, jobs: int = 1) -> list:
    cfg = _with_t_end(cfg, 100.0)
    cells = scan_grid(cfg)
    out = _outdir(cfg)
    store = os.path.join(out, "scan_results.csv")
    known = _read_store(store)
    todo = [c for c in cells if c.hash() not in known]
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(scan_cell, todo))
    else:
        rows = [scan_cell(c) for c in todo]
    _append_rows(store, rows)  # single writer: only the parent touches the store
    fresh = {r["config_hash"]: r for r in rows}
    return [fresh.get(c.hash()) or dict(known[c.hash()], cached=True) for c in cells]


def cmd_reduce(cfg: RunConfig, r=None) -> dict:
    cfg = _with_t_end(cfg, 50.0)
    params = cfg.params()
    fld = cfg.field()
    blocks = tuple(fld.blocks)
    if r is None:
        r = leading_equal(blocks)
    x0 = cfg.initial_state() if cfg.initial is not None else None
    if x0 is not None and cfg.matrix is not None:
        x0 = PhaseState(fld.to_canonical(x0.gamma), fld.to_canonical(x0.p), True)
    try:
        run = reduction_run(params, blocks, r, seed=cfg.seed, t_end=cfg.t_end, rtol=cfg.rel_tol, atol=cfg.abs_tol, initial=x0)
    except HypothesisViolated as exc:
        raise Exit(EXIT_HYPOTHESIS, str(exc)) from None
    except StepFailure as exc:
        raise Exit(EXIT_INTEGRATION, str(exc)) from None
    reduced = run["reduced"]
    reduced_cfg = replace(cfg, initial={"gamma": list(map(float, reduced.gamma)), "p": list(map(float, reduced.p))}, blocks=list(blocks), matrix=None, options={})
    doc = {
        "provenance": _provenance(cfg),
        "r": r,
        "blocks": list(blocks),
        "R": run["R"],
        "R_complex": [[[z.real, z.imag] for z in row] for row in run["R_complex"]],
        "tail_rotation": run["Q"],
        "initial": run["initial"],
        "reduced_initial": reduced,
        "zeroed_coordinates": run["zeroed"],
        "invariance_drift": run["invariance_drift"],
        "integral_drift": run["integral_drift"],
        "reduced_config": reduced_cfg.semantic(),
    }
    out = _outdir(cfg)
    write_json(os.path.join(out, "reduce.json"), doc)
    write_json(os.path.join(out, "reduced_config.json"), reduced_cfg.semantic())
    return doc


# --- click wrappers --------------------------------------------------------------------


def _common(f):
    opts = [
        click.option("--config", "config", type=click.Path(dir_okay=False), help="JSON RunConfig file."),
        click.option("--out", default=None, help="Output directory."),
        click.option("--seed", type=int, default=None, help="Seed for initial states and sampling."),
        click.option("--rel-tol", type=float, default=None, help="Relative tolerance."),
        click.option("--abs-tol", type=float, default=None, help="Absolute tolerance."),
        click.option("--n", "n", type=str, default=None, help="Dimension (scan: comma list)."),
        click.option("--blocks", type=str, default=None, help="Block values, e.g. 1,2 (scan: ';' separated)."),
        click.option("--m", "m", type=float, default=None, help="Mass."),
        click.option("--s", "s", type=float, default=None, help="Charge parameter."),
        click.option("--t-end", type=float, default=None, help="Final time."),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _run(fn):
    try:
        fn()
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except Exit as exc:
        if str(exc):
            click.echo(str(exc), err=True)
        sys.exit(exc.code)


def _overrides(n, blocks, **kw):
    d = dict(kw)
    if n is not None:
        try:
            d["n"] = int(n)
        except ValueError:
            raise ConfigError(f"cannot parse n {n!r}") from None
    d["blocks"] = _parse_list(blocks, "blocks")
    return d


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Magnetic flows on spheres: simulation and certification."""


@main.command()
@_common
@click.option("--flow", type=click.Choice(sorted(FLOWS)), default=None, help="Flow kind.")
@click.option("--b", "b", type=str, default=None, help="Pendulum vector b, e.g. 0,0,1.")
def simulate(config, out, seed, rel_tol, abs_tol, n, blocks, m, s, t_end, flow, b):
    """Integrate one trajectory; write trajectory.csv and summary.json."""

    def go():
        cfg = load_config(
            config,
            **_overrides(n, blocks, out=out, seed=seed, rel_tol=rel_tol, abs_tol=abs_tol, m=m, s=s, t_end=t_end, flow=flow, b=_parse_list(b, "b")),
        )
        summary = cmd_simulate(cfg)
        click.echo(f"max drift {summary['max_drift']:.3e} over {summary['steps']} steps")
        if "circle_radius" in summary:
            click.echo(f"circle radius {summary['circle_radius']:.10f} (formula {summary['circle_radius_formula']:.10f})")
        for c in summary.get("circles", []):
            click.echo(f"block {c['block']}: radius {c['radius']:.10f}, period {c['period']:.10f}")

    _run(go)


@main.command()
@_common
@click.option("--targets", type=str, default=None, help="Comma list of target ids (default: all applicable).")
@click.option("--trials", type=int, default=None, help="Identity-test points per verdict.")
def verify(config, out, seed, rel_tol, abs_tol, n, blocks, m, s, t_end, targets, trials):
    """Certify lemmas and theorems; write report.json."""

    def go():
        cfg = load_config(config, **_overrides(n, blocks, out=out, seed=seed, rel_tol=rel_tol, abs_tol=abs_tol, m=m, s=s, t_end=t_end, trials=trials))
        tl = [t.strip() for t in targets.split(",")] if targets else None
        report = cmd_verify(cfg, tl)
        click.echo(f"{len(report['verdicts'])} verdicts, all hold")

    _run(go)


@main.command()
@_common
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker processes.")
def scan(config, out, seed, rel_tol, abs_tol, n, blocks, m, s, t_end, jobs):
    """Sweep (n, blocks) cells; append to scan_results.csv keyed by config hash."""

    def go():
        kw = dict(out=out, seed=seed, rel_tol=rel_tol, abs_tol=abs_tol, m=m, s=s, t_end=t_end)
        n_list = [int(x) for x in n.split(",")] if n else None
        b_list = [_parse_list(x, "blocks") for x in blocks.split(";")] if blocks else None
        over = dict(kw, n_list=n_list, blocks_list=b_list)
        if n_list:
            over["n"] = n_list[0]
        if b_list:
            over["blocks"] = b_list[0]
        if n_list and b_list and not any(len(b) == k // 2 for k in n_list for b in b_list):
            raise ConfigError("no (n, blocks) pair has n // 2 blocks")
        if n_list and b_list:
            # validate against a consistent representative pair
            pair = next((k, b) for k in n_list for b in b_list if len(b) == k // 2)
            over["n"], over["blocks"] = pair
        cfg = _with_t_end(load_config(config, **over), 100.0)
        if jobs < 1:
            raise ConfigError("--jobs must be positive")
        rows = cmd_scan(cfg, jobs)
        for r in rows:
            click.echo(
                f"{r['config_hash']} n={r['n']} blocks={r['blocks']} {r.get('status')} "
                f"drift={r.get('max_drift', '')} theorem={r.get('theorem', '')} "
                f"ddim={r.get('ddim', '')} dind={r.get('dind', '')}" + (" (cached)" if r.get("cached") else "")
            )

    _run(go)


@main.command()
@_common
@click.option("--r", "r", type=int, default=None, help="Number of equal leading blocks to reduce.")
def reduce(config, out, seed, rel_tol, abs_tol, n, blocks, m, s, t_end, r):
    """U(r) reduction of an initial state; write reduce.json."""

    def go():
        cfg = load_config(config, **_overrides(n, blocks, out=out, seed=seed, rel_tol=rel_tol, abs_tol=abs_tol, m=m, s=s, t_end=t_end))
        doc = cmd_reduce(cfg, r)
        click.echo(f"zeroed coordinates {doc['zeroed_coordinates']}: max |x| {doc['invariance_drift']:.3e}")

    _run(go)


if __name__ == "__main__":  # pragma: no cover
    main()
