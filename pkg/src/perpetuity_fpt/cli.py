"""Config-driven experiment runner.

Usage::

    perpetuity-fpt SUBCOMMAND CONFIG [--seed S] [--threads T] [--out-dir DIR]

CONFIG is a TOML file (or a JSON run manifest written by a previous run)::

    seed = 7
    threads = 1              # or "auto"

    [law]
    family = "lognormal_A_const_B"
    mean_log_a = -0.25
    var_log_a = 1.0

    [run]
    u = [1000.0]
    tau = [2.0, 4.0, 8.0]
    n_samples = 100000

    [output]
    dir = "results"

Each run writes ``<subcommand>.csv`` and ``<subcommand>_manifest.json`` to
the output directory.  Exit codes: 0 success, 2 configuration error, 3 a
precondition or numerical error raised by the library.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import cgf, estimators
from .errors import PerpetuityError, ValidationError
from .model import check_assumptions, law_from_mapping
from .process import default_horizon, first_passage, iterate_pairs, n_steps_for
from .rng import DEFAULT_SEED, stream

SUBCOMMANDS = ("analyze", "simulate", "estimate", "compare", "tail", "regimes", "petrov", "duality")
THREADS_ENV = "PERPETUITY_FPT_THREADS"
EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION = 0, 2, 3
PER_STEP_ROW_LIMIT = 10_000


@dataclass(frozen=True)
class RunSection:
    u: tuple = (1000.0,)
    tau: tuple = (2.0,)
    n_samples: int = 100_000
    method: str = estimators.CRUDE
    horizon_multiplier: float = 3.0
    burn_in: int = estimators.DEFAULT_BURN_IN
    n_terms: int = 256
    chunk_size: int = estimators.DEFAULT_CHUNK
    n_steps: int = 32
    n_paths: int = 1
    n_run: int = 1_000_000
    u_grid: object = "auto"
    n: tuple = (100,)
    c: float = 0.25
    gamma: float = 0.0
    alpha: object = None


@dataclass(frozen=True)
class OutputSection:
    dir: str = "results"


@dataclass(frozen=True)
class ExperimentConfig:
    law: dict
    run: RunSection = field(default_factory=RunSection)
    output: OutputSection = field(default_factory=OutputSection)
    seed: int = DEFAULT_SEED
    threads: object = 1

    def to_mapping(self):
        return {
            "seed": self.seed,
            "threads": self.threads,
            "law": dict(self.law),
            "run": {k: list(v) if isinstance(v, tuple) else v for k, v in dataclasses.asdict(self.run).items()},
            "output": dataclasses.asdict(self.output),
        }


# -- parsing -------------------------------------------------------------------


def _number_list(name, value, kind=float):
    vals = value if isinstance(value, (list, tuple)) else [value]
    out = []
    for v in vals:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(name, f"expected a number or list of numbers, got {v!r}")
        if kind is int and int(v) != v:
            raise ValidationError(name, f"expected integers, got {v!r}")
        out.append(kind(v))
    if not out:
        raise ValidationError(name, "must not be empty")
    return tuple(out)


def _int(name, value, minimum):
    if isinstance(value, bool) or not isinstance(value, int) and not (isinstance(value, float) and value.is_integer()):
        raise ValidationError(name, f"expected an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ValidationError(name, f"must be at least {minimum}")
    return value


def _float(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(name, f"expected a number, got {value!r}")
    return float(value)


def _parse_run(raw):
    known = {f.name for f in dataclasses.fields(RunSection)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValidationError(f"run.{unknown[0]}", "unknown key")
    kw = {}
    for key, value in raw.items():
        name = f"run.{key}"
        if key == "u":
            kw[key] = _number_list(name, value)
            if any(not u > 1 for u in kw[key]):
                raise ValidationError(name, "u must exceed 1")
        elif key == "tau":
            kw[key] = _number_list(name, value)
            if any(not t > 0 for t in kw[key]):
                raise ValidationError(name, "tau must be positive")
        elif key == "n":
            kw[key] = _number_list(name, value, int)
            if any(n < 1 for n in kw[key]):
                raise ValidationError(name, "n must be at least 1")
        elif key in ("n_samples", "n_terms", "chunk_size", "n_paths", "n_run"):
            kw[key] = _int(name, value, 1)
        elif key in ("burn_in", "n_steps"):
            kw[key] = _int(name, value, 0)
        elif key == "method":
            if value not in (estimators.CRUDE, estimators.IMPORTANCE, estimators.ENUMERATION):
                raise ValidationError(name, "expected crude, importance or enumeration")
            kw[key] = value
        elif key == "horizon_multiplier":
            kw[key] = _float(name, value)
            if not kw[key] > 0:
                raise ValidationError(name, "must be positive")
        elif key == "u_grid":
            if value == "auto":
                kw[key] = value
            else:
                grid = _number_list(name, value)
                if len(grid) < 3 or any(b <= a for a, b in zip(grid, grid[1:])):
                    raise ValidationError(name, "must be increasing with at least 3 points")
                kw[key] = grid
        elif key == "alpha":
            kw[key] = None if value is None else _float(name, value)
        else:  # c, gamma
            kw[key] = _float(name, value)
    return RunSection(**kw)


def parse_config(raw):
    """Validate a config mapping into an :class:`ExperimentConfig`."""
    if not isinstance(raw, dict):
        raise ValidationError("config", "expected a table at top level")
    unknown = sorted(set(raw) - {"law", "run", "output", "seed", "threads"})
    if unknown:
        raise ValidationError(unknown[0], "unknown key")
    if "law" not in raw or not isinstance(raw["law"], dict):
        raise ValidationError("law", "missing [law] section")
    law = dict(raw["law"])
    try:
        law_from_mapping(law)
    except ValidationError as exc:
        raise ValidationError(f"law.{exc.field}", exc.message) from None
    run = _parse_run(dict(raw.get("run", {})))
    out_raw = dict(raw.get("output", {}))
    if set(out_raw) - {"dir"}:
        raise ValidationError(f"output.{sorted(set(out_raw) - {'dir'})[0]}", "unknown key")
    output = OutputSection(**{k: str(v) for k, v in out_raw.items()})
    seed = _int("seed", raw.get("seed", DEFAULT_SEED), 0)
    if seed >= 2**64:
        raise ValidationError("seed", "must fit in 64 bits")
    threads = _parse_threads("threads", raw.get("threads", 1))
    return ExperimentConfig(law, run, output, seed, threads)


def _parse_threads(name, value):
    if value == "auto":
        return value
    if isinstance(value, str):
        try:
            value = int(value)
        except ValueError:
            raise ValidationError(name, "expected an integer or 'auto'") from None
    return _int(name, value, 1)


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError("config", f"cannot read {path}: {exc.strerror}") from None
    try:
        if path.suffix == ".json":
            raw = json.loads(text)
            raw = raw.get("config", raw)
        else:
            raw = tomllib.loads(text)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError("config", f"parse error: {exc}") from None
    return parse_config(raw)


def resolve_threads(threads):
    return os.cpu_count() or 1 if threads == "auto" else int(threads)


# -- output --------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.16e}"
    return "" if v is None else str(v)


def format_csv(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


# -- subcommands ---------------------------------------------------------------


def _mc_kwargs(cfg, threads):
    return {"seed": cfg.seed, "chunk_size": cfg.run.chunk_size, "threads": threads}


def cmd_analyze(law, cfg, threads):
    rep = check_assumptions(law, seed=cfg.seed)
    rows = []
    s = None
    for tau in cfg.run.tau:
        s = cgf.summarize(law, tau)
        lam, mu, s2 = cgf.log_moments(law, s.alpha_tau)
        rows.append({"tau": tau, "alpha": s.alpha_tau, "Lambda_alpha": lam, "mu": mu, "sigma2": s2,
                     "I_tau": s.I_tau, "regime": s.regime})
    cols = ["tau", "alpha", "Lambda_alpha", "mu", "sigma2", "I_tau", "regime"]
    return cols, rows, {"xi": s.xi, "rho": s.rho, "assumptions": dataclasses.asdict(rep)}


def cmd_simulate(law, cfg, threads):
    r = cfg.run
    rng = stream(cfg.seed, 0)
    fields = ["n", "Pi_n", "S_n", "Y_n", "Ybar_n", "M_n", "Ystar_n", "Mstar_n"]
    per_step = r.n_paths * (r.n_steps + 1) <= PER_STEP_ROW_LIMIT
    rows = []
    for path in range(r.n_paths):
        a, b = law.sample(rng, r.n_steps)
        recs = list(iterate_pairs(a, b)) if per_step else [_last(iterate_pairs(a, b))]
        for rec in recs:
            rows.append({"path": path, **dataclasses.asdict(rec)})
    extra = {}
    if len(r.u) and not per_step:
        u = r.u[0]
        horizon = default_horizon(law, u, r.horizon_multiplier)
        hits = [first_passage(law, u, horizon, rng).hit for _ in range(min(r.n_paths, 1000))]
        extra["passage_fraction"] = float(np.mean(hits))
    return ["path"] + fields, rows, extra


def _last(it):
    rec = None
    for rec in it:
        pass
    return rec


def _estimate_rows(law, cfg, threads):
    r = cfg.run
    rows = []
    for u in r.u:
        for tau in r.tau:
            e = estimators.prob_passage(law, u, tau, r.n_samples, method=r.method, alpha=r.alpha,
                                        **_mc_kwargs(cfg, threads))
            rows.append({"u": u, "tau": tau, "n_u": n_steps_for(u, tau), "method": e.method, "value": e.value,
                         "stderr": e.stderr, "ess": e.effective_sample_size})
    return rows


def cmd_estimate(law, cfg, threads):
    return ["u", "tau", "n_u", "method", "value", "stderr", "ess"], _estimate_rows(law, cfg, threads), {}


def cmd_compare(law, cfg, threads):
    r = cfg.run
    rows = _estimate_rows(law, cfg, threads)
    kw = _mc_kwargs(cfg, threads)
    c_m = None
    c_tau = {}
    constants = {}
    for row in rows:
        s = cgf.summarize(law, row["tau"])
        if s.regime == cgf.SMALL_TIME:
            if row["tau"] not in c_tau:
                c_tau[row["tau"]] = estimators.estimate_C_tau(law, row["tau"], r.n_terms, r.n_samples, **kw).value
                constants[f"C_tau[{row['tau']!r}]"] = c_tau[row["tau"]]
            p = estimators.predict(law, row["u"], row["tau"], C_tau=c_tau[row["tau"]])
        else:
            if c_m is None:
                c_m = estimators.estimate_CM_goldie(law, r.burn_in, r.n_samples, **kw).value
                constants["C_M"] = c_m
            p = estimators.predict(law, row["u"], row["tau"], C_M=c_m)
        row["prediction"] = p.value
        row["ratio"] = row["value"] / p.value if p.value > 0 else math.nan
    cols = ["u", "tau", "n_u", "method", "value", "stderr", "ess", "prediction", "ratio"]
    return cols, rows, {"constants": constants}


def cmd_tail(law, cfg, threads):
    r = cfg.run
    fit = estimators.tail_fit(law, r.n_run, r.u_grid, seed=cfg.seed, burn_in=r.burn_in)
    cols = ["u", "p_hat", "exceedances", "ci_low", "ci_high", "scaled", "dropped", "warning"]
    return cols, fit.table, {"xi_hat": fit.xi_hat, "C_hat": fit.C_hat, "warnings": list(fit.warnings)}


def cmd_regimes(law, cfg, threads):
    rows = []
    for tau in cfg.run.tau:
        rep = cgf.regime_report(law, tau, alpha=cfg.run.alpha)
        rows.append(dataclasses.asdict(rep))
    cols = ["tau", "alpha", "count1_gap", "count1_holds", "count2_witness", "count2_holds", "exponent_gap",
            "exponent_beta", "varrho", "applicable"]
    return cols, rows, {}


def cmd_petrov(law, cfg, threads):
    r = cfg.run
    rows = []
    for n in r.n:
        approx = estimators.petrov_tail(law, n, r.c, r.gamma)
        try:
            exact = estimators.gaussian_walk_tail(law, n, r.c, r.gamma)
        except PerpetuityError:
            exact = None
        rows.append({"n": n, "c": r.c, "gamma": r.gamma, "approximation": approx, "exact": exact,
                     "ratio": approx / exact if exact else None})
    return ["n", "c", "gamma", "approximation", "exact", "ratio"], rows, {}


def cmd_duality(law, cfg, threads):
    r = cfg.run
    kw = _mc_kwargs(cfg, threads)
    rows = []
    for u in r.u:
        for tau in r.tau:
            a = estimators.prob_passage(law, u, tau, r.n_samples, method=estimators.CRUDE, **kw)
            b = estimators.prob_exceedance_forward(law, u, tau, r.n_samples, **kw)
            se = math.hypot(a.stderr, b.stderr)
            rows.append({"u": u, "tau": tau, "n_u": n_steps_for(u, tau), "passage": a.value, "passage_se": a.stderr,
                         "forward": b.value, "forward_se": b.stderr,
                         "z": (a.value - b.value) / se if se > 0 else 0.0})
    return ["u", "tau", "n_u", "passage", "passage_se", "forward", "forward_se", "z"], rows, {}


COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "compare": cmd_compare,
    "tail": cmd_tail,
    "regimes": cmd_regimes,
    "petrov": cmd_petrov,
    "duality": cmd_duality,
}


def _versions():
    from . import __version__

    return {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__,
            "perpetuity_fpt": __version__}


def run(subcommand, cfg):
    """Execute ``subcommand`` and write its CSV and manifest; returns the manifest dict."""
    if subcommand not in COMMANDS:
        raise ValidationError("subcommand", f"expected one of {SUBCOMMANDS}")
    threads = resolve_threads(cfg.threads)
    law = law_from_mapping(cfg.law)
    t0 = time.perf_counter()
    cols, rows, results = COMMANDS[subcommand](law, cfg, threads)
    wall = time.perf_counter() - t0
    out = Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{subcommand}.csv"
    csv_path.write_text(format_csv(cols, rows))
    manifest = {
        "subcommand": subcommand,
        "config": cfg.to_mapping(),
        "seed": cfg.seed,
        "threads": threads,
        "versions": _versions(),
        "started": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "wall_time_s": wall,
        "csv": str(csv_path),
        "results": results,
    }
    (out / f"{subcommand}_manifest.json").write_text(json.dumps(manifest, indent=2, default=_json_default) + "\n")
    return manifest


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not serialisable: {type(obj).__name__}")


def build_parser():
    p = argparse.ArgumentParser(prog="perpetuity-fpt", description=__doc__.split("\n")[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("config", help="TOML config or JSON manifest")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", default=None, help=f"integer or 'auto'; overrides ${THREADS_ENV}")
    p.add_argument("--out-dir", default=None)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ValidationError("seed", "must fit in 64 bits")
            cfg = dataclasses.replace(cfg, seed=args.seed)
        threads = args.threads if args.threads is not None else os.environ.get(THREADS_ENV)
        if threads is not None:
            cfg = dataclasses.replace(cfg, threads=_parse_threads("threads", threads))
        if args.out_dir is not None:
            cfg = dataclasses.replace(cfg, output=OutputSection(args.out_dir))
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        manifest = run(args.subcommand, cfg)
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PerpetuityError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    print(manifest["csv"])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
