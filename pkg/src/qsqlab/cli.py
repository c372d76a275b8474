"""Batch experiment runner: ``qsqlab <subcommand> --config cfg.json --seed 1 --out results/``.

Configs are single JSON documents.  Every experiment is a thin dispatcher onto
library functions; outputs are one CSV and one JSON report per run, written
atomically.  Exit codes: 0 success, 2 validation error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
import time
from typing import Any

import numpy as np

from . import __version__, ensembles, hardness, learners, oracles, problems, qmath

SCHEMA_VERSION = "1.0"
BUDGET_RULE = "k*n <= 30 (N^k amplitudes at most 2^30)"

EXPERIMENTS = {
    "variance": {
        "fields": {"ensemble": "{kind: Haar|CliffordUniform|Brickwork, n, d?, gateset?}",
                   "k": "copies (default 1)", "observable": "{pauli: label} | {random: hermitian|pauli|projector} | {pool: size}",
                   "samples": "Monte Carlo samples (default 10000)"},
        "csv": list(hardness.VarianceReport.CSV_FIELDS),
    },
    "levy": {
        "fields": {"n": "qubits (<= 10)", "k": "copies (1 or 2)", "tau": "deviation", "samples": "default 10000"},
        "csv": ["N", "k", "tau", "samples", "tail", "stderr", "bound", "holds"],
    },
    "learner": {
        "fields": {"learner": "|".join(learners.LEARNER_NAMES), "params": "learner parameters incl. tau",
                   "trials": "default 100", "policy": "Exact|QuantizeGrid|{kind: SeededUniform, seed, width}"},
        "csv": ["learner", "trials", "success_rate", "queries_min", "queries_max", "queries_mean"],
    },
    "bounds": {
        "fields": {"bound": "selflearn-basis | qnt-variance", "n": "qubits (selflearn-basis)", "beta": "default 1",
                   "variance_max": "qnt-variance", "tau": "qnt-variance"},
        "csv": ["bound_name", "triv", "frac", "qnt_lower", "lower_bound_value"],
    },
    "bp-probe": {
        "fields": {"n": "qubits (<= 10)", "layers": "default 1", "tau": "gradient threshold",
                   "samples": "default 200", "haar_post": "append a Haar layer (default true)", "audit": "finite-difference audits"},
        "csv": ["model", "n", "tau", "samples", "mean_gradient_variance", "max_tail_probability",
                "loss_variance", "concentrated"],
    },
    "moments": {
        "fields": {"ensemble": "as for variance", "t": "moment order", "samples": "default 1000"},
        "csv": ["ensemble", "t", "samples", "trace_distance", "stderr"],
    },
}
SUBCOMMAND_KIND = {"variance": "variance", "levy": "levy", "learn": "learner", "bounds": "bounds",
                   "bp-probe": "bp-probe", "moments": "moments"}


class ConfigError(ValueError):
    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


# ---------------------------------------------------------------- validation

def list_experiments() -> dict:
    return {k: {"fields": v["fields"], "csv_columns": v["csv"]} for k, v in EXPERIMENTS.items()}


def _num(cfg, key, diags, kind=float, lo=None, hi=None, required=True, path=None):
    path = path or key
    if key not in cfg:
        if required:
            diags.append(f"{path}: required")
        return None
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or (kind is int and not float(v).is_integer()):
        diags.append(f"{path}: expected {kind.__name__}, got {v!r}")
        return None
    if lo is not None and v < lo:
        diags.append(f"{path}: must be >= {lo}")
    if hi is not None and v > hi:
        diags.append(f"{path}: must be <= {hi}")
    return v


def _validate_ensemble(e, diags, path="ensemble"):
    if not isinstance(e, dict):
        diags.append(f"{path}: required object")
        return None
    kind = e.get("kind")
    if kind not in ("Haar", "CliffordUniform", "Brickwork"):
        diags.append(f"{path}.kind: one of Haar, CliffordUniform, Brickwork")
    n = _num(e, "n", diags, int, 1, 30, path=f"{path}.n")
    if kind == "Brickwork":
        _num(e, "d", diags, int, 1, path=f"{path}.d")
        if n is not None and n > 12:
            diags.append(f"{path}.n: brickwork statevector simulation limited to n <= 12")
        if e.get("gateset", "Haar4") not in ("Haar4", "CliffordLocal"):
            diags.append(f"{path}.gateset: one of Haar4, CliffordLocal")
    return n


def validate(config: Any) -> list[str]:
    """Diagnostics with field paths; empty when the config is runnable.  Never executes workloads."""
    diags: list[str] = []
    if not isinstance(config, dict):
        return ["<root>: config must be a JSON object"]
    if "seed" not in config:
        diags.append("seed: required")
    elif isinstance(config["seed"], bool) or not isinstance(config["seed"], int) or not 0 <= config["seed"] < 2**64:
        diags.append("seed: expected an unsigned 64-bit integer")
    kind = config.get("experiment")
    if kind not in EXPERIMENTS:
        diags.append(f"experiment: one of {sorted(EXPERIMENTS)}")
        return diags
    _num(config, "workers", diags, int, 1, required=False)
    c = config
    if kind == "variance":
        n = _validate_ensemble(c.get("ensemble"), diags)
        k = _num(c, "k", diags, int, 1, required=False) or 1
        _num(c, "samples", diags, int, 3, required=False)
        if n is not None and k * n > 30:
            diags.append(f"k*n: {k}*{n} = {k * n} exceeds budget; rule: {BUDGET_RULE}")
        if n is not None and n > 12:
            diags.append(f"ensemble.n: statevector sampling limited to n <= 12 ({n} given)")
        obs = c.get("observable", {"random": "hermitian"})
        if not isinstance(obs, dict) or len(obs) != 1 or next(iter(obs)) not in ("pauli", "random", "pool"):
            diags.append("observable: one of {pauli: label}, {random: kind}, {pool: size}")
        elif "pauli" in obs and n is not None and (len(obs["pauli"]) != n or set(obs["pauli"]) - set("IXYZ")):
            diags.append(f"observable.pauli: expected a length-{n} label over IXYZ")
        elif "random" in obs and obs["random"] not in ("hermitian", "pauli", "projector"):
            diags.append("observable.random: one of hermitian, pauli, projector")
        elif "pool" in obs:
            _num(obs, "pool", diags, int, 1, 100, path="observable.pool")
    elif kind == "levy":
        n = _num(c, "n", diags, int, 1, 10)
        k = _num(c, "k", diags, int, 1, 2)
        _num(c, "tau", diags, float, 0, 2)
        _num(c, "samples", diags, int, 1, required=False)
        if n is not None and k is not None and k * n > 30:
            diags.append(f"k*n: exceeds budget; rule: {BUDGET_RULE}")
    elif kind == "learner":
        if c.get("learner") not in learners.LEARNER_NAMES:
            diags.append(f"learner: one of {list(learners.LEARNER_NAMES)}")
        p = c.get("params")
        if not isinstance(p, dict):
            diags.append("params: required object")
        else:
            _num(p, "tau", diags, float, 0, 1, path="params.tau")
            need = {"parity": ["n"], "gaussian": ["l"], "zx": ["n"], "purity": ["delta"], "pure_state": ["eps"],
                    "tree": ["delta"]}.get(c.get("learner"), [])
            for key in need:
                _num(p, key, diags, int if key in ("n", "l") else float, 0, path=f"params.{key}")
            limits = {"parity": ("n", 20), "gaussian": ("l", 7), "zx": ("n", 10)}
            lim = limits.get(c.get("learner"))
            if lim and isinstance(p.get(lim[0]), int) and p[lim[0]] > lim[1]:
                diags.append(f"params.{lim[0]}: must be <= {lim[1]}")
        _num(c, "trials", diags, int, 1, required=False)
        if "policy" in c:
            try:
                oracles.make_policy(c["policy"])
            except (ValueError, TypeError, AttributeError) as exc:
                diags.append(f"policy: {exc}")
    elif kind == "bounds":
        b = c.get("bound")
        if b == "selflearn-basis":
            _num(c, "n", diags, int, 1, 30)
            _num(c, "beta", diags, float, 0, 1, required=False)
        elif b == "qnt-variance":
            _num(c, "variance_max", diags, float, 0)
            _num(c, "tau", diags, float, 0)
        else:
            diags.append("bound: one of selflearn-basis, qnt-variance")
    elif kind == "bp-probe":
        _num(c, "n", diags, int, 1, 10)
        _num(c, "layers", diags, int, 1, 20, required=False)
        _num(c, "tau", diags, float, 0)
        _num(c, "samples", diags, int, 3, required=False)
        _num(c, "audit", diags, int, 0, required=False)
    elif kind == "moments":
        n = _validate_ensemble(c.get("ensemble"), diags)
        t = _num(c, "t", diags, int, 1, 4)
        _num(c, "samples", diags, int, 2, required=False)
        if n is not None and t is not None and n * t > 12:
            diags.append(f"n*t: {n}*{t} exceeds the dense moment budget; rule: N^t <= 2^12")
    return diags


# ---------------------------------------------------------------- dispatch

def _ensemble(e) -> ensembles.UnitaryEnsemble:
    if e["kind"] == "Haar":
        return ensembles.UnitaryEnsemble.haar(2 ** e["n"])
    if e["kind"] == "CliffordUniform":
        return ensembles.UnitaryEnsemble.clifford(e["n"])
    return ensembles.UnitaryEnsemble.brickwork(e["n"], e["d"], e.get("gateset", "Haar4"))


def _run_variance(c, rng, seed, workers):
    E = _ensemble(c["ensemble"])
    n, k, samples = c["ensemble"]["n"], c.get("k", 1), c.get("samples", 10_000)
    obs = c.get("observable", {"random": "hermitian"})
    states = np.concatenate(ensembles.run_streams(lambda r, m: E.sample_states(r, m), seed, samples,
                                                  workers=workers))
    if "pool" in obs:
        src = None
        if E.kind == "CliffordUniform":
            src = lambda r: ensembles.random_stabilizer_states(n, r, 1)[0]  # noqa: E731
        pool = hardness.adversarial_pool(n, k, rng, obs["pool"], src)
        reps = [hardness.state_variance(E, O, k, rng=rng, states=states) for O in pool]
        return reps
    if "pauli" in obs:
        P = qmath.Observable(qmath.PauliWeyl.from_label(obs["pauli"]).dense(), op_norm=1.0, tag=obs["pauli"],
                             check=False)
    else:
        P = hardness.random_observable(2**n, rng, obs["random"])
    O = P if k == 1 else qmath.TensorSumObservable([(1.0, [P] * k)], tag=f"{P.tag}^{k}")
    rep = hardness.state_variance(E, O, k, rng=rng, states=states)
    if k == 1 and 2**n <= 2**12:
        rep.extra["closed_form"] = hardness.haar_variance_exact(P)
    return [rep]


class _Row:
    def __init__(self, d, fields):
        self.d, self.fields = d, fields

    def csv_row(self):
        return {f: self.d.get(f) for f in self.fields}

    def to_dict(self):
        return self.d


def run(config: dict, workers: int | None = None) -> dict:
    """Validate, dispatch and return the report (``results`` plus CSV rows)."""
    diags = validate(config)
    if diags:
        raise ConfigError(diags)
    kind, seed = config["experiment"], config["seed"]
    workers = workers or config.get("workers", 1)
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    fields = EXPERIMENTS[kind]["csv"]
    c = config
    if kind == "variance":
        rows = _run_variance(c, rng, seed, workers)
    elif kind == "levy":
        d = hardness.levy_tail_check(2 ** c["n"], c["k"], c["tau"], c.get("samples", 10_000), rng)
        rows = [_Row(d, fields)]
    elif kind == "learner":
        policy = oracles.make_policy(c.get("policy"))
        d = learners.run_learner_trials(c["learner"], c["params"], c.get("trials", 100), rng, policy)
        rows = [_Row(d, fields)]
    elif kind == "bounds":
        if c["bound"] == "selflearn-basis":
            rep = hardness.selflearn_basis_quantities(c["n"], c.get("beta", 1.0))
            rows = [_Row(rep.to_dict(), fields)]
        else:
            q = problems.qnt_via_variance(c["variance_max"], c["tau"])
            rows = [_Row({"bound_name": "qnt-variance", "qnt_lower": q, "lower_bound_value": q}, fields)]
    elif kind == "bp-probe":
        n, layers = c["n"], c.get("layers", 1)
        post = c.get("haar_post", True)

        def sampler(r):
            return hardness.CircuitModel(n, layers, post=ensembles.sample_haar(2**n, r) if post else None)

        rep = hardness.bp_probe(sampler, c["tau"], c.get("samples", 200), rng, audit=c.get("audit", 0))
        rows = [rep]
    else:
        E = _ensemble(c["ensemble"])
        dev, err = ensembles.design_deviation(E, c["t"], c.get("samples", 1000), rng)
        rows = [_Row({"ensemble": E.kind, "t": c["t"], "samples": c.get("samples", 1000),
                      "trace_distance": dev, "stderr": err}, fields)]
    elapsed = time.perf_counter() - t0
    return {
        "schema_version": SCHEMA_VERSION,
        "library_version": __version__,
        "experiment": kind,
        "config": config,
        "config_hash": config_hash(config),
        "results": [_jsonable(r.to_dict()) for r in rows],
        "csv_columns": fields,
        "csv_rows": [_jsonable(r.csv_row()) for r in rows],
        "wall_clock_seconds": elapsed,
    }


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def deterministic_payload(report: dict) -> str:
    """Canonical JSON of the report without wall-clock fields."""
    return json.dumps({k: v for k, v in report.items() if k != "wall_clock_seconds"}, sort_keys=True)


def _atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_outputs(report: dict, out: str) -> tuple[str, str]:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=report["csv_columns"], lineterminator="\n")
    w.writeheader()
    for r in report["csv_rows"]:
        w.writerow(r)
    stem = f"{report['experiment']}-{report['config_hash'][:12]}"
    csv_path, json_path = os.path.join(out, stem + ".csv"), os.path.join(out, stem + ".json")
    _atomic_write(csv_path, buf.getvalue())
    _atomic_write(json_path, json.dumps(report, sort_keys=True, indent=2) + "\n")
    return csv_path, json_path


def summary_table(report: dict) -> str:
    cols = report["csv_columns"]
    rows = [[_fmt(r.get(c)) for c in cols] for r in report["csv_rows"]]
    widths = [max(len(c), *(len(r[i]) for r in rows)) if rows else len(c) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(r, widths)) for r in rows]
    return "\n".join(lines)


def _fmt(v) -> str:
    return f"{v:.6g}" if isinstance(v, float) else str(v)


# ---------------------------------------------------------------- entry point

def _parse_value(s: str):
    try:
        return json.loads(s)
    except json.JSONDecodeError:
        return s


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qsqlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in list(SUBCOMMAND_KIND) + ["validate"]:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config file")
        s.add_argument("--seed", type=int, help="overrides config seed")
        s.add_argument("--out", default=None, help="output directory for CSV and JSON")
        s.add_argument("--workers", type=int, default=None)
        s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a top-level config field (value parsed as JSON)")
    sub.add_parser("list")
    return p


def load_config(args) -> dict:
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ConfigError(["<root>: config must be a JSON object"])
    for item in args.set:
        if "=" not in item:
            raise ConfigError([f"--set {item}: expected KEY=VALUE"])
        key, val = item.split("=", 1)
        cfg[key] = _parse_value(val)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.workers is not None:
        cfg["workers"] = args.workers
    if args.command in SUBCOMMAND_KIND:
        kind = SUBCOMMAND_KIND[args.command]
        if cfg.get("experiment", kind) != kind:
            raise ConfigError([f"experiment: config says {cfg['experiment']!r} but subcommand is {args.command!r}"])
        cfg["experiment"] = kind
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        print(json.dumps(list_experiments(), indent=2))
        return 0
    try:
        cfg = load_config(args)
        if args.command == "validate":
            diags = validate(cfg)
            print(json.dumps({"diagnostics": diags}, indent=2))
            return 2 if diags else 0
        report = run(cfg)
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(f"validation error: {d}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure inside a workload
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(summary_table(report))
    if args.out:
        paths = write_outputs(report, args.out)
        print("wrote " + ", ".join(paths))
    return 0


if __name__ == "__main__":
    sys.exit(main())
