"""Command-line front end.

    pvalfn {curve|ci|test|estimate|coverage} --model NAME (--data PATH | --inline "...")
           [--alpha A] [--method exact|mc|wilks|auto] [--mc-samples M] [--seed S]
           [--grid LO:HI:N ...] [--null SPEC] [--out PATH] [--format csv|json]

Options may also come from ``--config FILE.json`` (keys are the long option
names with dashes or underscores); flags given on the command line win.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from pvalfn import inference as inf
from pvalfn import rng
from pvalfn.datasets import BUNDLED, load_data
from pvalfn.mc import (
    DEFAULT_M_CURVE,
    DEFAULT_M_ENDPOINT,
    ContractError,
    Estimator,
    MonteCarloError,
    MonteCarloPlan,
    PValueCurve,
)
from pvalfn.models import BUILTIN_MODELS, DataSet, Model, ModelError, builtin_model
from pvalfn.numerics import BracketError, DomainError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

COMMANDS = ("curve", "ci", "test", "estimate", "coverage")
COVERAGE_ALPHAS = (0.01, 0.05, 0.1)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    model: str
    data: str | None = None
    inline: str | None = None
    constants: dict = field(default_factory=dict)
    alpha: float = 0.05
    method: str = "auto"
    mc_samples: int | None = None
    seed: int = 0
    estimator: str = "plain"
    workers: int = 1
    grid: list[str] = field(default_factory=list)
    null: str | None = None
    nuisance_box: str | None = None
    truth: str | None = None
    replicates: int = 2000
    n_obs: int | None = None
    out: str | None = None
    format: str = "csv"

    def plan_M(self) -> int:
        if self.mc_samples is not None:
            return self.mc_samples
        if self.command == "curve":
            return DEFAULT_M_CURVE
        if self.command == "coverage":
            return 1000
        return DEFAULT_M_ENDPOINT


# ---- argument handling ---------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pvalfn", description="p-value function inference")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file of option values (flags override)")
    p.add_argument("--model", choices=sorted(BUILTIN_MODELS))
    p.add_argument("--data", help=f"CSV path or bundled name ({', '.join(BUNDLED)})")
    p.add_argument("--inline", help="values inline: '1,2,3'; rows split by ';'; binomial 'y/n'")
    p.add_argument("--const", action="append", metavar="KEY=VALUE", help="model constant, e.g. n_trials=20")
    p.add_argument("--alpha", type=float)
    p.add_argument("--method", choices=[m.value for m in inf.Method])
    p.add_argument("--mc-samples", type=int, dest="mc_samples")
    p.add_argument("--seed", type=int)
    p.add_argument("--estimator", choices=[e.value for e in Estimator])
    p.add_argument("--workers", type=int)
    p.add_argument("--grid", action="append", metavar="LO:HI:N", help="one per interest component")
    p.add_argument("--null", help="H0: '6', '<=6', '>=6', '5:8', '1,2' or a box '0:1,2:3'")
    p.add_argument("--nuisance-box", dest="nuisance_box", metavar="LO:HI[,LO:HI...]",
                   help="search box for the sup-over-nuisance marginal p-value")
    p.add_argument("--truth", help="true parameter for coverage, comma-separated")
    p.add_argument("--replicates", type=int, help="coverage replicates N")
    p.add_argument("--n-obs", type=int, dest="n_obs", help="sample size for coverage datasets")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    return p


def _parse_const(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"constant '{item}' is not KEY=VALUE")
        try:
            out[key.strip()] = json.loads(val)
        except json.JSONDecodeError:
            raise ConfigError(f"constant '{item}' has a non-numeric value") from None
    return out


def build_config(argv=None) -> RunConfig:
    try:
        ns = _parser().parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            raise
        raise ConfigError("invalid command line") from None
    values: dict = {}
    if ns.config:
        try:
            raw = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        values.update({k.replace("-", "_"): v for k, v in raw.items()})
    flags = {k: v for k, v in vars(ns).items() if v is not None and k not in ("config", "const")}
    values.update(flags)
    consts = dict(values.pop("constants", {}) or {})
    consts.update(_parse_const(ns.const))
    values["constants"] = consts
    if "grid" in values and isinstance(values["grid"], str):
        values["grid"] = [values["grid"]]
    if "seed" not in values:
        env = os.environ.get("PVALFN_SEED")
        try:
            values["seed"] = int(env) if env is not None else 0
        except ValueError:
            raise ConfigError(f"PVALFN_SEED must be an integer, got '{env}'") from None
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if not values.get("model"):
        raise ConfigError("--model is required")
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.model not in BUILTIN_MODELS:
        raise ConfigError(f"unknown model '{cfg.model}'")
    if not 0.0 < float(cfg.alpha) < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {cfg.alpha}")
    if cfg.mc_samples is not None and cfg.mc_samples < 100:
        raise ConfigError("--mc-samples must be at least 100")
    if cfg.workers < 1:
        raise ConfigError("--workers must be positive")
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"unknown format '{cfg.format}'")
    if cfg.command == "test" and cfg.null is None:
        raise ConfigError("test needs --null")
    if cfg.command == "coverage":
        if cfg.truth is None:
            raise ConfigError("coverage needs --truth")
        if cfg.replicates < 100:
            raise ConfigError("coverage needs at least 100 replicates")
    elif cfg.data is None and cfg.inline is None:
        raise ConfigError("give --data or --inline")
    if cfg.data is not None and cfg.inline is not None:
        raise ConfigError("give only one of --data and --inline")


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"malformed {what}: '{text}'") from None


def parse_grid(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid '{spec}' is not LO:HI:N")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"grid '{spec}' is not LO:HI:N") from None
    if n < 1 or not lo <= hi or not (math.isfinite(lo) and math.isfinite(hi)):
        raise ConfigError(f"grid '{spec}' is empty or unbounded")
    return np.linspace(lo, hi, n)


def parse_region(spec: str, dim: int) -> inf.ParamRegion:
    """Null-hypothesis syntax.

    ``6`` point; ``<=6`` / ``>=6`` half lines; ``5:8`` interval; ``1,2`` a
    point in two dimensions; ``0:1,2:3`` a box (``:`` with an empty side is
    unbounded, e.g. ``:6``).
    """
    s = spec.strip().replace(" ", "")
    if not s:
        raise ConfigError("empty null hypothesis")
    try:
        if s.startswith("<="):
            return inf.ParamRegion.box([-math.inf], [float(s[2:])])
        if s.startswith(">="):
            return inf.ParamRegion.box([float(s[2:])], [math.inf])
        lo, hi = [], []
        for part in s.split(","):
            if ":" in part:
                a, b = part.split(":")
                lo.append(float(a) if a else -math.inf)
                hi.append(float(b) if b else math.inf)
            else:
                lo.append(float(part))
                hi.append(float(part))
        region = inf.ParamRegion.box(lo, hi)
    except ValueError as exc:
        raise ConfigError(f"malformed null '{spec}': {exc}") from None
    if region.dim != dim:
        raise ConfigError(f"null has dimension {region.dim}, interest dimension is {dim}")
    return region


def parse_box(spec: str) -> inf.ParamRegion:
    lo, hi = [], []
    for part in spec.split(","):
        a, sep, b = part.partition(":")
        try:
            lo.append(float(a))
            hi.append(float(b) if sep else float(a))
        except ValueError:
            raise ConfigError(f"malformed nuisance box '{spec}'") from None
    try:
        return inf.ParamRegion.box(lo, hi)
    except ValueError as exc:
        raise ConfigError(f"malformed nuisance box '{spec}': {exc}") from None


# ---- setup -----------------------------------------------------------------------


@dataclass
class Session:
    cfg: RunConfig
    model: Model
    data: DataSet | None
    digest: str
    plan: MonteCarloPlan
    method: inf.Method
    box: inf.ParamRegion | None


def _session(cfg: RunConfig) -> Session:
    data, digest = None, ""
    consts = dict(cfg.constants)
    if cfg.data is not None or cfg.inline is not None:
        data, file_consts, digest = load_data(cfg.model, cfg.data, cfg.inline)
        for k, v in file_consts.items():
            consts.setdefault(k, v)
    if cfg.model == "normal-random-effects" and "sigma" in consts:
        consts["sigma"] = np.asarray(consts["sigma"], dtype=float)
    model = builtin_model(cfg.model, consts)
    if data is not None:
        model.check_data(data)
    try:
        estimator = Estimator(cfg.estimator)
    except ValueError:
        raise ConfigError(f"unknown estimator '{cfg.estimator}'") from None
    proposal = None
    if estimator is Estimator.IMPORTANCE:
        # default proposal: the model at the MLE of the observed data
        if data is None:
            raise ConfigError("importance sampling needs observed data for its proposal")
        proposal = tuple(inf.max_pvalue_estimate(model, data).values)
    plan = MonteCarloPlan(M=cfg.plan_M(), base_seed=cfg.seed, estimator=estimator, proposal=proposal,
                          workers=cfg.workers)
    method = inf.resolve_method(model, cfg.method)
    box = parse_box(cfg.nuisance_box) if cfg.nuisance_box else None
    return Session(cfg, model, data, digest, plan, method, box)


# ---- output ----------------------------------------------------------------------


def _num(x: float) -> str:
    # repr round-trips doubles exactly
    return repr(float(x))


def curve_metadata(s: Session) -> dict:
    mc = s.method is inf.Method.MC
    return {
        "model": s.model.name,
        "constants": _jsonable(s.cfg.constants),
        "method": s.method.value,
        "M": s.plan.M if mc else None,
        "seed": s.plan.base_seed if mc else None,
        "estimator": s.plan.estimator.value if mc else None,
        "data": s.cfg.data if s.cfg.data is not None else None,
        "inline": s.cfg.inline,
        "data_sha256": s.digest,
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in np.asarray(obj).tolist()] if isinstance(obj, np.ndarray) else [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def write_curve(curve: PValueCurve, meta: dict, fmt: str) -> str:
    k = curve.grid.shape[1]
    cols = [f"theta_{i + 1}" for i in range(k)] + ["p", "std_err"]
    if fmt == "json":
        rows = [list(map(float, g)) + [float(p), float(e)] for g, p, e in zip(curve.grid, curve.p, curve.std_err)]
        body = ",\n  ".join(json.dumps(r) for r in rows)
        return (
            f'{{\n "metadata": {json.dumps(meta)},\n "columns": {json.dumps(cols)},\n "rows": [\n  {body}\n ]\n}}\n'
        )
    lines = [f"# {key}: {json.dumps(val)}" for key, val in meta.items()]
    lines.append(",".join(cols))
    for g, p, e in zip(curve.grid, curve.p, curve.std_err):
        lines.append(",".join([_num(x) for x in g] + [_num(p), _num(e)]))
    return "\n".join(lines) + "\n"


def read_curve(text: str) -> tuple[PValueCurve, dict]:
    """Parse a CurveFile written by :func:`write_curve` (either format)."""
    if text.lstrip().startswith("{"):
        obj = json.loads(text)
        meta, rows = obj["metadata"], np.array(obj["rows"], dtype=float)
    else:
        meta, body = {}, []
        for ln in text.splitlines():
            if ln.startswith("#"):
                key, _, val = ln[1:].strip().partition(":")
                meta[key.strip()] = json.loads(val)
            elif ln.strip():
                body.append(ln)
        rows = np.array([[float(v) for v in r.split(",")] for r in body[1:]], dtype=float)
    rows = rows.reshape(len(rows), -1)
    curve = PValueCurve(rows[:, :-2], rows[:, -2], rows[:, -1], meta.get("method", "exact"),
                        M=meta.get("M"), seed=meta.get("seed"))
    return curve, meta


def write_record(record: dict, fmt: str) -> str:
    rec = _jsonable(record)
    if fmt == "json":
        return json.dumps(rec, indent=1) + "\n"
    flat = {}
    for key, val in rec.items():
        flat[key] = json.dumps(val) if isinstance(val, (dict, list)) else val
    keys = list(flat)
    return ",".join(keys) + "\n" + ",".join(_cell(flat[k]) for k in keys) + "\n"


def _cell(v) -> str:
    if isinstance(v, float):
        return _num(v)
    s = "" if v is None else str(v)
    return '"' + s.replace('"', '""') + '"' if ("," in s or '"' in s) else s


def _emit(s: Session, text: str) -> None:
    if s.cfg.out:
        Path(s.cfg.out).write_text(text)


# ---- commands --------------------------------------------------------------------


def cmd_curve(s: Session) -> int:
    k = s.model.interest_dim
    if s.cfg.grid:
        if len(s.cfg.grid) != k:
            raise ConfigError(f"{s.model.name} needs {k} --grid spec(s)")
        axes = [parse_grid(g) for g in s.cfg.grid]
        grid = np.array(np.meshgrid(*axes, indexing="ij")).reshape(k, -1).T
    else:
        grid = inf.auto_grid(s.model, s.data, method=s.method, plan=s.plan)
    if s.model.interest_dim < s.model.param_dim or s.method is not inf.Method.MC:
        f = inf.pvalue_function(s.model, s.data, s.method, s.plan, s.box)
        vals = np.array([f(row) for row in grid])
        mc = s.method is inf.Method.MC
        curve = PValueCurve(grid, vals[:, 0], vals[:, 1], s.method.value,
                            s.plan.M * len(grid) if mc else 0, s.plan.M if mc else None,
                            s.plan.base_seed if mc else None)
    else:
        curve = inf.pvalue_curve(s.model, s.data, grid, s.method, s.plan)
    text = write_curve(curve, curve_metadata(s), s.cfg.format)
    i = int(np.argmax(curve.p))
    peak = ", ".join(f"{x:.6g}" for x in curve.grid[i])
    print(f"{s.model.name}: {len(curve)} grid points, method={s.method.value}, max p={curve.p[i]:.6g} at ({peak})")
    if s.cfg.out:
        _emit(s, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_ci(s: Session) -> int:
    if s.model.interest_dim != 1:
        raise ConfigError(f"{s.model.name} has a vector interest parameter; use the curve command")
    reg = inf.confidence_region(s.model, s.data, s.cfg.alpha, s.method, s.plan, nuisance_box=s.box)
    record = {
        "command": "ci",
        "model": s.model.name,
        "method": reg.method,
        "level": reg.level,
        "interval": reg.format(6),
        "segments": [asdict(seg) for seg in reg.segments],
        "unbounded_left": reg.unbounded[0],
        "unbounded_right": reg.unbounded[1],
        "M": s.plan.M if s.method is inf.Method.MC else None,
        "seed": s.plan.base_seed if s.method is inf.Method.MC else None,
        "data_sha256": s.digest,
    }
    print(f"{100 * reg.level:g}% region ({reg.method}): {reg.format(4)}")
    for seg in reg.segments:
        flags = f"left {'closed' if seg.lo_closed else 'open'}, right {'closed' if seg.hi_closed else 'open'}"
        err = f"; MC std err of endpoints {seg.lo_se:.2g}, {seg.hi_se:.2g}" if s.method is inf.Method.MC else ""
        print(f"  [{seg.lo:.8g}, {seg.hi:.8g}] {flags}{err}")
    for side, unb in zip(("left", "right"), reg.unbounded):
        if unb:
            print(f"  unbounded on the {side}: no crossing of alpha before the domain edge")
    if s.cfg.out:
        _emit(s, write_record(record, s.cfg.format))
    return EXIT_OK


def cmd_test(s: Session) -> int:
    null = parse_region(s.cfg.null, s.model.interest_dim)
    res = inf.test(s.model, null, s.data, s.cfg.alpha, s.method, s.plan, s.box)
    record = {
        "command": "test",
        "model": s.model.name,
        "method": s.method.value,
        "null": s.cfg.null,
        "p_value": res.p_value,
        "std_err": res.std_err,
        "alpha": res.alpha,
        "reject": res.reject,
        "M": s.plan.M if s.method is inf.Method.MC else None,
        "seed": s.plan.base_seed if s.method is inf.Method.MC else None,
        "data_sha256": s.digest,
    }
    floor = ""
    if s.method is inf.Method.MC and res.p_value == 0.0:
        floor = f" (< 1/M = {1.0 / s.plan.M:.1g})"
    print(f"H0: {s.cfg.null}  p = {res.p_value:.6g}{floor}  (std err {res.std_err:.2g}, {s.method.value})")
    print(f"{'reject' if res.reject else 'do not reject'} at alpha = {res.alpha:g}")
    if s.cfg.out:
        _emit(s, write_record(record, s.cfg.format))
    return EXIT_OK


def cmd_estimate(s: Session) -> int:
    est = inf.max_pvalue_estimate(s.model, s.data)
    record = {"command": "estimate", "model": s.model.name, **est.as_dict(), "data_sha256": s.digest}
    print("maximum p-value estimate (MLE): " + ", ".join(f"{k} = {v:.8g}" for k, v in est.as_dict().items()))
    if s.cfg.out:
        _emit(s, write_record(record, s.cfg.format))
    return EXIT_OK


@dataclass(frozen=True)
class CoverageReport:
    truth: tuple[float, ...]
    replicates: int
    alpha: float
    coverage: float
    std_err: float
    p_le: dict
    method: str


def coverage_study(model: Model, truth, n_obs, replicates: int, alpha: float, method, plan: MonteCarloPlan,
                   workers: int = 1) -> CoverageReport:
    """Simulate datasets at ``truth`` and check how often the region covers it.

    By region/test duality truth is inside C_alpha(y) exactly when
    p_y(truth) > alpha, so each replicate needs one p-value, not a full
    region. Replicate ``i`` uses dataset seed (seed, 1) row ``i`` and, for
    Monte Carlo, plan seed (seed, 2, i); the report does not depend on
    ``workers``.
    """
    truth = model.check_theta(truth)
    method = inf.resolve_method(model, method)
    datasets = model.sample(truth, rng.derive_seed(plan.base_seed, 1), replicates, n_obs)
    target = truth[: model.interest_dim]

    def one(i):
        sub = MonteCarloPlan(M=plan.M, base_seed=rng.derive_seed(plan.base_seed, 2, i), estimator=plan.estimator,
                             proposal=plan.proposal, chunk=plan.chunk)
        f = inf.pvalue_function(model, datasets[i], method, sub)
        return f(target)[0]

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            ps = np.array(list(ex.map(one, range(replicates))))
    else:
        ps = np.array([one(i) for i in range(replicates)])
    cov = float(np.mean(ps > alpha))
    se = math.sqrt(cov * (1.0 - cov) / replicates)
    p_le = {a: float(np.mean(ps <= a)) for a in COVERAGE_ALPHAS}
    return CoverageReport(tuple(float(x) for x in truth), replicates, alpha, cov, se, p_le, method.value)


def cmd_coverage(s: Session) -> int:
    truth = _floats(s.cfg.truth, "truth")
    n_obs = s.cfg.n_obs or (s.data.n if s.data is not None else None) or s.model.default_n_obs()
    if n_obs is None:
        raise ConfigError("coverage needs --n-obs (or data to take the sample size from)")
    try:
        s.model.check_theta(truth)
    except ModelError as exc:
        raise ConfigError(str(exc)) from None
    rep = coverage_study(s.model, truth, n_obs, s.cfg.replicates, s.cfg.alpha, s.method, s.plan, s.cfg.workers)
    print(f"coverage of the {100 * (1 - rep.alpha):g}% region at theta = {rep.truth}: "
          f"{rep.coverage:.4f} (std err {rep.std_err:.4f}, N = {rep.replicates}, {rep.method})")
    for a, v in rep.p_le.items():
        print(f"  P(p <= {a:g}) = {v:.4f}")
    record = {
        "command": "coverage",
        "model": s.model.name,
        "method": rep.method,
        "truth": list(rep.truth),
        "n_obs": n_obs,
        "replicates": rep.replicates,
        "alpha": rep.alpha,
        "coverage": rep.coverage,
        "std_err": rep.std_err,
        "p_le": {str(k): v for k, v in rep.p_le.items()},
        "M": s.plan.M if rep.method == "mc" else None,
        "seed": s.plan.base_seed,
    }
    if s.cfg.out:
        _emit(s, write_record(record, s.cfg.format))
    return EXIT_OK


HANDLERS = {
    "curve": cmd_curve,
    "ci": cmd_ci,
    "test": cmd_test,
    "estimate": cmd_estimate,
    "coverage": cmd_coverage,
}


def main(argv=None) -> int:
    try:
        cfg = build_config(argv)
        session = _session(cfg)
        return HANDLERS[cfg.command](session)
    except (ConfigError, ModelError, ContractError) as exc:
        print(f"pvalfn: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (inf.InferenceError, MonteCarloError, DomainError, BracketError, FloatingPointError) as exc:
        print(f"pvalfn: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"pvalfn: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
