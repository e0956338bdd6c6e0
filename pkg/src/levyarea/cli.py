"""Command line front end.

Usage::

    levyarea <experiment> [--config FILE] [--set KEY=JSON ...] [--workers N]
    levyarea run FILE

Configurations are JSON objects with ``"schema_version": 1``; unknown keys
are rejected. The result document is written to ``output`` (default:
standard output) with sorted keys and no timestamps, so identical
configurations give byte-identical results. Exit status is 0 when the
experiment's check passes, 2 when it fails and 1 on errors.
"""

import argparse
import csv
import json
import math
import os
import secrets
import sys

import jsonschema
import numpy as np

from . import __version__
from .analysis import (c_irr, exp_moment_check, fit_scaling, independence_test, ks_gaussian_test,
                       markov_tail_check, second_moment_singular_coefficient)
from .checks import fn_sweep, hyp2f1_connection_sweep, hyp2f1_oracle_sweep, ipm_sweep, kernel_sweep
from .closed_form import IntegralArgs, PowerPair, i_minus, i_plus
from .errors import ConfigError, LevyAreaError
from .kernels import ModelParams, k_real
from .quadrature import connected_moment_trace
from .simulate import (B_CONVENTION, DEFAULT_SEED, RNG_NAME, PathEnsemble, TimeGrid, levy_area,
                       overlap_covariance, sample_paths)

SCHEMA_VERSION = 1
WORKERS_ENV = "LEVYAREA_WORKERS"
# alpha values where gamma factors used by the CLI hit poles (4 alpha N integer, N <= 3)
ALPHA_DENY = (1 / 12, 1 / 8, 1 / 6)
ALPHA_DENY_TOL = 1e-9

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_int_pos = {"type": "integer", "minimum": 1}
_seed = {"oneOf": [{"type": "integer", "minimum": 0, "maximum": 2 ** 63 - 1},
                   {"const": "random"}]}
_path = {"type": ["string", "null"]}
_tols = {"type": "object", "additionalProperties": _pos}

COMMON = {
    "schema_version": ({"const": SCHEMA_VERSION}, SCHEMA_VERSION),
    "experiment": ({"type": "string"}, None),
    "output": (_path, None),
    "csv": (_path, None),
    "tolerances": (_tols, {}),
}

_SIM = {
    "alpha": (_pos, 0.2),
    "eta": (_pos, 0.01),
    "step": (_pos, None),
    "n_paths": (_int_pos, 20000),
    "seed": (_seed, DEFAULT_SEED),
    "method": ({"enum": ["cholesky", "series"]}, "cholesky"),
    "cache": (_path, None),
}

EXPERIMENTS = {
    "hyp2f1-check": {"n_cases": (_int_pos, 500), "n_connection": (_int_pos, 200),
                     "seed": (_seed, 1)},
    "kernel-check": {"alpha": (_pos, 0.2), "eta": (_pos, 0.3), "n_points": (_int_pos, 50),
                     "seed": (_seed, 5)},
    "iminus": {"n_cases": (_int_pos, 100), "seed": (_seed, 3), "beta1": (_num, None),
               "beta2": (_num, None), "t": (_pos, 1.0),
               "a": ({"type": "array", "items": _num, "minItems": 2, "maxItems": 2}, None),
               "b": ({"type": "array", "items": _num, "minItems": 2, "maxItems": 2}, None)},
    "connected-moment": {"alpha": (_pos, 0.2), "eta": (_pos, 0.01), "t": (_pos, 1.0),
                         "N": (_int_pos, 1), "n_nodes": ({"type": ["integer", "null"]}, None),
                         "kernel": ({"enum": ["increment", "closed_form"]}, "increment")},
    "scaling-fit": {"alpha": (_pos, 0.2), "t": (_pos, 1.0), "N": (_int_pos, 1),
                    "etas": ({"type": "array", "items": _pos, "minItems": 3},
                             [0.04, 0.02, 0.01, 0.005]),
                    "correction_exponents": ({"type": "array", "items": _num}, []),
                    "reference": ({"oneOf": [{"enum": ["c_irr", "kernel"]}, _pos]}, "c_irr"),
                    "kernel": ({"enum": ["increment", "closed_form"]}, "increment")},
    "simulate": {**_SIM, "T": (_pos, 1.0)},
    "clt-test": {**_SIM, "n_paths": (_int_pos, 2000), "s": (_num, 0.0), "t": (_pos, 1.0),
                 "variance": ({"oneOf": [{"enum": ["c_irr", "kernel"]}, _pos]}, "c_irr")},
    "independence-test": {**_SIM, "n_paths": (_int_pos, 2000), "s": (_num, 0.0), "t": (_pos, 1.0),
                          "increments": ({"type": "array", "items": {
                              "type": "array", "prefixItems": [{"enum": [1, 2]}, _num, _num],
                              "minItems": 3, "maxItems": 3}}, None),
                          "overlap": ({"type": ["array", "null"], "items": _num,
                                       "minItems": 4, "maxItems": 4}, None)},
    "exp-moment": {**_SIM, "s": (_num, 0.0), "t": (_pos, 1.0),
                   "lambdas": ({"type": "array", "items": _num}, [0.5, 1.0, 2.0]),
                   "c0": (_pos, 2.0), "levels": ({"type": "array", "items": _pos}, [2.0, 3.0])},
    "fn-appendix": {"n_cases": (_int_pos, 50), "seed": (_seed, 4)},
}
EXPERIMENTS["iplus"] = dict(EXPERIMENTS["iminus"])

DEFAULT_TOLERANCES = {
    "hyp2f1-check": {"oracle_rtol": 1e-8, "connection_rtol": 1e-9},
    "kernel-check": {"rtol": 1e-6, "symmetry_atol": 1e-13},
    "iminus": {"rtol": 1e-7},
    "iplus": {"rtol": 1e-7},
    "connected-moment": {},
    "scaling-fit": {"slope_atol": 0.05, "coefficient_rtol": 0.05},
    "simulate": {"z_score": 3.0},
    "clt-test": {},
    "independence-test": {"overlap_rtol": 0.15},
    "exp-moment": {},
    "fn-appendix": {"rtol": 1e-6},
}


def _schema(name: str) -> dict:
    props = {k: v[0] for k, v in {**COMMON, **EXPERIMENTS[name]}.items()}
    return {"type": "object", "properties": props, "required": ["schema_version"],
            "additionalProperties": False}


def resolve_config(raw: dict, experiment: str | None = None) -> dict:
    """Validate a raw configuration and fill in defaults.

    Raises
    ------
    ConfigError
        On schema violations, unknown keys or an inadmissible ``alpha``.
    """
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    name = experiment or raw.get("experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    if raw.get("experiment", name) != name:
        raise ConfigError(f"config is for {raw['experiment']!r}, not {name!r}")
    try:
        jsonschema.validate(raw, _schema(name))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "config"
        raise ConfigError(f"{where}: {exc.message}") from None
    cfg = {k: v[1] for k, v in {**COMMON, **EXPERIMENTS[name]}.items()}
    cfg.update(raw)
    cfg["experiment"] = name
    tols = dict(DEFAULT_TOLERANCES[name])
    unknown = set(cfg["tolerances"]) - set(tols)
    if unknown:
        raise ConfigError(f"unknown tolerance keys {sorted(unknown)}")
    tols.update(cfg["tolerances"])
    cfg["tolerances"] = tols
    if "alpha" in cfg:
        a = cfg["alpha"]
        if not 0 < a < 0.25:
            raise ConfigError(f"alpha must lie in (0, 1/4) (got {a})")
        for bad in ALPHA_DENY:
            if abs(a - bad) < ALPHA_DENY_TOL:
                raise ConfigError(f"alpha = {a} is a degenerate value (deny-list {ALPHA_DENY})")
    if cfg.get("seed") == "random":
        cfg["seed"] = secrets.randbits(63)
    return cfg


def _clean(obj):
    """Make a result JSON-serializable with plain floats."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if not isinstance(x, int) else x for x in r])


# ---------------------------------------------------------------------------
# experiments; each returns (result dict, passed)
# ---------------------------------------------------------------------------

def _ensemble(cfg, workers, T):
    p = ModelParams(cfg["alpha"], cfg["eta"])
    step = cfg["step"] if cfg["step"] is not None else p.eta / 10
    grid = TimeGrid.uniform(T, step)
    path = cfg.get("cache")
    if path and os.path.exists(path):
        e = PathEnsemble.load(path)
        same = (e.params == p and e.seed == cfg["seed"] and e.n_paths == cfg["n_paths"]
                and e.method == cfg["method"] and np.array_equal(e.grid.points, grid.points))
        if same:
            return e
    e = sample_paths(p, grid, cfg["n_paths"], seed=cfg["seed"], method=cfg["method"], workers=workers)
    if path:
        e.save(path)
    return e


def _variance_target(choice, alpha, length):
    if choice == "c_irr":
        return c_irr(1, alpha) * length
    if choice == "kernel":
        return second_moment_singular_coefficient(alpha) * length
    return float(choice) * length


def run_hyp2f1_check(cfg, workers):
    tol = cfg["tolerances"]
    oracle = hyp2f1_oracle_sweep(cfg["n_cases"], seed=cfg["seed"])
    conn = hyp2f1_connection_sweep(cfg["n_connection"], seed=cfg["seed"] + 1)
    ok = oracle["max_rel_error"] <= tol["oracle_rtol"] and conn["max_rel_error"] <= tol["connection_rtol"]
    return {"oracle": oracle, "connection": conn}, ok


def run_kernel_check(cfg, workers):
    tol = cfg["tolerances"]
    p = ModelParams(cfg["alpha"], cfg["eta"])
    res = kernel_sweep(p, cfg["n_points"], seed=cfg["seed"])
    ok = (res["psd"] and res["hermitian_max_abs"] <= tol["symmetry_atol"]
          and res["integrated_identity_max_rel"] <= tol["rtol"])
    if "series_max_abs" in res:
        ok = ok and res["series_max_abs"] <= tol["rtol"]
    return res, ok


def _run_ipm(cfg, kind):
    tol = cfg["tolerances"]
    if cfg["beta1"] is not None:
        if cfg["beta2"] is None or cfg["a"] is None or cfg["b"] is None:
            raise ConfigError("beta1, beta2, a and b must be given together")
        args = IntegralArgs(cfg["t"], complex(*cfg["a"]), complex(*cfg["b"]))
        pp = PowerPair(cfg["beta1"], cfg["beta2"])
        val = (i_minus if kind == "minus" else i_plus)(pp, args)
        from .checks import _quad_ipm
        from .special_functions import principal_power
        sa = -1j if kind == "minus" else 1j

        def f(u):
            return principal_power(sa * (u - args.a), pp.beta1) * principal_power(-1j * (u - args.b), pp.beta2)

        ref = _quad_ipm(f, args.t, args.a.real, args.b, pp.beta2)
        err = abs(val - ref) / abs(ref)
        return {"value": val, "quadrature": ref, "rel_error": err}, err <= tol["rtol"]
    res = ipm_sweep(kind, cfg["n_cases"], seed=cfg["seed"])
    return res, res["max_rel_error"] <= tol["rtol"]


def run_connected_moment(cfg, workers):
    p = ModelParams(cfg["alpha"], cfg["eta"])
    val = connected_moment_trace(p, cfg["t"], cfg["N"], cfg["n_nodes"], kernel=cfg["kernel"])
    n = cfg["N"]
    return {"phi": val, "cumulant": math.factorial(2 * n - 1) * val}, True


def run_scaling_fit(cfg, workers):
    tol = cfg["tolerances"]
    a, t, n = cfg["alpha"], cfg["t"], cfg["N"]
    pairs = []
    for eta in cfg["etas"]:
        pairs.append((eta, connected_moment_trace(ModelParams(a, eta), t, n, kernel=cfg["kernel"])))
    expo = 4 * n * a - 1
    fit = fit_scaling(pairs, exponent=expo, correction_exponents=cfg["correction_exponents"])
    ref_spec = cfg["reference"]
    if ref_spec == "c_irr":
        ref = c_irr(n, a) * t
    elif ref_spec == "kernel":
        if n != 1:
            raise ConfigError("the kernel reference coefficient is available for N = 1 only")
        ref = second_moment_singular_coefficient(a) * t
    else:
        ref = float(ref_spec)
    coef_err = abs(fit.coefficient - ref) / abs(ref)
    ok = abs(fit.slope - expo) <= tol["slope_atol"] and coef_err <= tol["coefficient_rtol"]
    if cfg["csv"]:
        reg = [v - s for v, s in zip(fit.values, fit.singular)]
        _write_csv(cfg["csv"], ["eta", "raw_value", "regular_estimate", "singular_part", "fitted_value"],
                   zip(fit.etas, fit.values, reg, fit.singular, fit.fitted))
    res = {"etas": fit.etas, "values": fit.values, "slope": fit.slope, "intercept": fit.intercept,
           "residual": fit.residual, "expected_slope": expo, "regular_estimate": fit.regular_estimate,
           "coefficient": fit.coefficient, "amplitude": fit.amplitude, "reference_coefficient": ref,
           "coefficient_rel_error": coef_err, "corrections": fit.corrections}
    return res, ok


def run_simulate(cfg, workers):
    e = _ensemble(cfg, workers, cfg["T"])
    p = e.params
    T = float(e.grid.points[-1])
    x = e.B1[:, -1]
    var = float(np.var(x, ddof=1))
    target = float(k_real(p, T, T))
    se = target * math.sqrt(2 / max(e.n_paths - 1, 1))
    z = abs(var - target) / se if se > 0 else 0.0
    res = {"n_paths": e.n_paths, "grid_points": int(e.grid.points.size), "variance_B1_T": var,
           "covariance_k_real_T_T": target, "z_score": z, "cache": cfg["cache"]}
    return res, z <= cfg["tolerances"]["z_score"]


def run_clt_test(cfg, workers):
    e = _ensemble(cfg, workers, cfg["t"])
    area = levy_area(e, cfg["s"], cfg["t"])
    variance = _variance_target(cfg["variance"], cfg["alpha"], cfg["t"] - cfg["s"])
    rep = ks_gaussian_test(area.rescaled, variance)
    if cfg["csv"]:
        _write_csv(cfg["csv"], ["sample_index", "rescaled_area"],
                   ((i, v) for i, v in enumerate(area.rescaled)))
    return rep.as_dict(), rep.passed


def run_independence_test(cfg, workers):
    s, t = cfg["s"], cfg["t"]
    incs = cfg["increments"]
    if incs is None:
        quarter = (t - s) / 4
        incs = [[c, s + k * quarter, s + (k + 1) * quarter] for c in (1, 2) for k in range(4)]
        cfg["increments"] = incs
    T = max([t] + [i[2] for i in incs] + (cfg["overlap"][1::2] if cfg["overlap"] else []))
    e = _ensemble(cfg, workers, T)
    area = levy_area(e, s, t)
    rep = independence_test(e, area, [tuple(i) for i in incs])
    res = rep.as_dict()
    ok = rep.passed
    if cfg["overlap"]:
        s1, t1, s2, t2 = cfg["overlap"]
        cov = overlap_covariance(e, s1, t1, s2, t2)
        inter = max(0.0, min(t1, t2) - max(s1, s2))
        target = c_irr(1, cfg["alpha"]) * inter
        rel = abs(cov - target) / target if target > 0 else math.inf
        res["overlap"] = {"covariance": cov, "target": target, "rel_error": rel}
        ok = ok and rel <= cfg["tolerances"]["overlap_rtol"]
    return res, ok


def run_exp_moment(cfg, workers):
    e = _ensemble(cfg, workers, cfg["t"])
    area = levy_area(e, cfg["s"], cfg["t"])
    length = cfg["t"] - cfg["s"]
    rep = exp_moment_check(area.rescaled, cfg["lambdas"], length, cfg["alpha"], cfg["eta"], c0=cfg["c0"])
    tail = markov_tail_check(area.rescaled, length, cfg["alpha"], cfg["levels"], c0=cfg["c0"])
    return {"exp_moment": rep.as_dict(), "markov_tail": tail.as_dict()}, rep.passed and tail.passed


def run_fn_appendix(cfg, workers):
    res = fn_sweep(cfg["n_cases"], seed=cfg["seed"])
    return res, res["max_rel_error"] <= cfg["tolerances"]["rtol"]


RUNNERS = {
    "hyp2f1-check": run_hyp2f1_check,
    "kernel-check": run_kernel_check,
    "iminus": lambda cfg, w: _run_ipm(cfg, "minus"),
    "iplus": lambda cfg, w: _run_ipm(cfg, "plus"),
    "connected-moment": run_connected_moment,
    "scaling-fit": run_scaling_fit,
    "simulate": run_simulate,
    "clt-test": run_clt_test,
    "independence-test": run_independence_test,
    "exp-moment": run_exp_moment,
    "fn-appendix": run_fn_appendix,
}


def execute(cfg: dict, workers: int = 1) -> tuple:
    """Run a resolved configuration; return ``(document, passed)``."""
    result, passed = RUNNERS[cfg["experiment"]](cfg, workers)
    echo = {k: v for k, v in cfg.items()}
    doc = {
        "schema_version": SCHEMA_VERSION,
        "experiment": cfg["experiment"],
        "library_version": __version__,
        "b_convention": B_CONVENTION,
        "rng": RNG_NAME,
        "config": echo,
        "result": result,
        "pass": bool(passed),
    }
    return _clean(doc), bool(passed)


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def _default_workers():
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer") from None
    return os.cpu_count() or 1


def run(config_path, workers: int | None = None, overrides: dict | None = None,
        experiment: str | None = None) -> int:
    """Run the experiment described by a config file; return the exit code."""
    try:
        raw = _load_json(config_path) if config_path else {"schema_version": SCHEMA_VERSION}
        raw.update(overrides or {})
        cfg = resolve_config(raw, experiment)
        doc, passed = execute(cfg, workers if workers is not None else _default_workers())
        text = dumps(doc)
        if cfg["output"]:
            with open(cfg["output"], "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0 if passed else 2
    except LevyAreaError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error [levyarea.cli.IOError]: {exc}", file=sys.stderr)
        return 1


def _parse_set(items):
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


_FLAG_KEYS = ("alpha", "eta", "seed", "n_paths", "output", "csv", "cache")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levyarea", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a configuration file")
    r.add_argument("config")
    r.add_argument("--workers", type=int)
    for name in EXPERIMENTS:
        s = sub.add_parser(name, help=f"run the {name} experiment")
        s.add_argument("--config")
        s.add_argument("--set", action="append", metavar="KEY=JSON", help="override a config key")
        s.add_argument("--workers", type=int)
        s.add_argument("--alpha", type=float)
        s.add_argument("--eta", type=float)
        s.add_argument("--seed")
        s.add_argument("--n-paths", dest="n_paths", type=int)
        s.add_argument("--output")
        s.add_argument("--csv")
        s.add_argument("--cache")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return run(args.config, args.workers)
    try:
        overrides = _parse_set(args.set)
    except ConfigError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1
    for key in _FLAG_KEYS:
        val = getattr(args, key)
        if val is not None:
            if key == "seed" and val != "random":
                try:
                    val = int(val)
                except ValueError:
                    print("error [levyarea.cli.ConfigError]: seed must be an integer or 'random'",
                          file=sys.stderr)
                    return 1
            overrides[key] = val
    return run(args.config, args.workers, overrides, experiment=args.command)


if __name__ == "__main__":
    sys.exit(main())
