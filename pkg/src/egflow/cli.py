"""Command line entry point: ``egflow analyze|solve|scenario|map``."""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys

import numpy as np

from .errors import BlowupError, InvalidInputError, InvalidMetricError, NotHyperbolicError
from .flows import assemble_type_b, hyperbolicity_report, preset, ricci_discriminant_n3
from .scenarios import (
    DEFAULTS,
    RunReport,
    ScenarioConfig,
    hyperbolicity_map,
    run_scenario,
    run_solve,
    write_field_csv,
    write_report,
)
from .symmetric import elementary_symmetric, power_sums, sigma_from_tau, tau_from_sigma

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_HYPERBOLIC = 3
EXIT_TRUNCATED = 4

# keys with a dedicated ScenarioConfig field; everything else goes to params
CORE_KEYS = ("name", "grid", "t_end", "t_samples", "orientation", "scheme", "flow", "n", "out", "seed")


def _grid(text):
    parts = [p for p in str(text).replace(" ", "").split(",") if p]
    if len(parts) != 3:
        raise InvalidInputError("grid must be 'a,b,cells'")
    try:
        a, b, cells = float(eval_number(parts[0])), float(eval_number(parts[1])), int(parts[2])
    except ValueError as exc:
        raise InvalidInputError(f"bad grid {text!r}") from exc
    return (a, b, cells)


def eval_number(text):
    """Plain float, also accepting ``pi`` multiples such as ``2pi`` or ``-pi/2``."""
    t = str(text).strip().lower().replace("*", "")
    if "pi" not in t:
        return float(t)
    num, _, rest = t.partition("pi")
    coef = -1.0 if num == "-" else (1.0 if num in ("", "+") else float(num))
    val = coef * np.pi
    if rest.startswith("/"):
        val /= float(rest[1:])
    elif rest:
        raise ValueError(text)
    return val


def _floats(text):
    return [eval_number(p) for p in str(text).replace(" ", "").split(",") if p]


def _orientation(text):
    v = str(text).strip()
    if v in ("+1", "1", "+"):
        return 1
    if v in ("-1", "-"):
        return -1
    raise InvalidInputError("orientation must be +1 or -1")


def read_config(path):
    """Flat ``key = value`` pairs from an INI file (all sections merged)."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            text = fh.read()
        if not text.lstrip().startswith("["):
            text = "[run]\n" + text
        parser.read_string(text, source=path)
    except (OSError, configparser.Error) as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for sec in parser.sections():
        out.update(parser[sec])
    return out


def _merge(args, defaults_name=None):
    """Config file values overridden by explicit flags."""
    raw = read_config(args.config) if getattr(args, "config", None) else {}
    for item in getattr(args, "set", None) or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise InvalidInputError(f"--set expects KEY=VALUE, got {item!r}")
        raw[key.strip().replace("-", "_")] = val.strip()
    for key in ("grid", "t_end", "t_samples", "orientation", "scheme", "flow", "n", "out", "seed",
                "roots", "tau", "sigma", "lambda0", "psi", "boundary", "cfl", "s", "m", "axis2", "sigma2"):
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    return raw


def build_config(raw, name):
    try:
        grid = _grid(raw["grid"]) if "grid" in raw else None
        t_end = float(raw["t_end"]) if "t_end" in raw else None
        t_samples = int(raw["t_samples"]) if "t_samples" in raw else None
        orient = _orientation(raw["orientation"]) if "orientation" in raw else None
        n = int(raw["n"]) if "n" in raw else None
        seed = int(raw["seed"]) if "seed" in raw else None
    except (ValueError, TypeError) as exc:
        raise InvalidInputError(f"bad config value: {exc}") from exc
    params = {k: v for k, v in raw.items() if k not in CORE_KEYS}
    if "flow" in raw:
        params["flow"] = raw["flow"]
    if "n" in raw:
        params["n"] = n
    for key in ("beta", "y_min", "y_max", "sigma2", "decay_tol", "cfl"):
        if key in params:
            try:
                params[key] = eval_number(params[key])
            except ValueError as exc:
                raise InvalidInputError(f"bad value for {key}") from exc
    for key in ("quad_per_sample", "dense_samples", "sign_offset", "s", "m"):
        if key in params:
            params[key] = int(params[key])
    return ScenarioConfig(
        name=raw.get("name", name),
        grid=grid,
        t_end=t_end,
        t_samples=t_samples,
        orientation=orient,
        scheme=raw.get("scheme", "auto"),
        flow=raw.get("flow"),
        n=n,
        output=raw.get("out"),
        seed=seed,
        params=params,
    )


def _emit(report: RunReport, stream=None):
    stream = stream or sys.stdout
    json.dump(report.to_dict(), stream, indent=2)
    stream.write("\n")
    return EXIT_TRUNCATED if report.truncated else EXIT_OK


# ------------------------------------------------------------ subcommands


def cmd_scenario(args):
    raw = _merge(args)
    raw.pop("name", None)
    cfg = build_config(raw, args.name)
    cfg.name = args.name
    return _emit(run_scenario(cfg))


def cmd_solve(args):
    raw = _merge(args)
    cfg = build_config(raw, raw.get("name", "solve"))
    if cfg.grid is None or cfg.t_end is None or cfg.t_samples is None:
        raise InvalidInputError("solve needs grid, t_end and t_samples")
    return _emit(run_solve(cfg))


def _state_vectors(raw, n):
    given = [k for k in ("tau", "sigma", "roots") if k in raw]
    if len(given) != 1:
        raise InvalidInputError("give exactly one of --tau, --sigma, --roots")
    vals = np.array(_floats(raw[given[0]]))
    if given[0] == "roots":
        if len(vals) != n:
            raise InvalidInputError(f"need {n} roots")
        return power_sums(vals, n), elementary_symmetric(vals)
    if len(vals) != n:
        raise InvalidInputError(f"need {n} values")
    if given[0] == "tau":
        return vals, sigma_from_tau(vals)
    return tau_from_sigma(vals, n), vals


def cmd_analyze(args):
    raw = _merge(args)
    n = int(raw.get("n", 2))
    kind = raw.get("flow", "ricci_ex")
    kw = {k: int(raw[k]) for k in ("s", "m") if k in raw}
    fam = preset(kind, n, **kw)
    tau, sigma = _state_vectors(raw, n)
    system = assemble_type_b(fam, tau)
    rep = hyperbolicity_report(system)
    eig = np.asarray(rep.eigenvalues)
    out = {
        "flow": kind,
        "n": n,
        "tau": tau.tolist(),
        "sigma": sigma.tolist(),
        "classification": rep.classification,
        "method": rep.method,
        "eigenvalues": [float(v) for v in eig.real],
        "matrix": system.matrix.tolist(),
    }
    if kind == "ricci_ex" and n == 3:
        D, label = ricci_discriminant_n3(sigma)
        out["discriminant"] = float(D)
        out["discriminant_classification"] = label
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_map(args):
    raw = _merge(args)
    n = int(raw.get("n", 3))
    axis1 = _grid(raw.get("grid", "-6,6,100"))
    axis2 = _grid(raw["axis2"]) if "axis2" in raw else axis1
    fixed = eval_number(raw.get("sigma2", 0.0))
    a1, a2, codes, extra = hyperbolicity_map(raw.get("flow", "ricci_ex"), n, axis1, axis2, fixed)
    report = RunReport("map", "map", np.inf, 0.0)
    if "disagreements" in extra:
        report.add_metric("strict_region_vs_discriminant", extra["disagreements"], 0.5)
    outdir = raw.get("out")
    if outdir:
        os.makedirs(outdir, exist_ok=True)
        # x column: first axis, t column: second axis, value: 2 strict, 1 hyperbolic, 0 not
        write_field_csv(os.path.join(outdir, "map_class.csv"), a1, a2, codes.T)
        report.files.append("map_class.csv")
        report.files.append("map_report.json")
        write_report(os.path.join(outdir, "map_report.json"), report)
    return _emit(report)


# ----------------------------------------------------------------- parser


def _common(p, run_flags=True):
    p.add_argument("--config", help="INI file with key = value pairs")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="any config key")
    p.add_argument("--grid", help="a,b,cells")
    p.add_argument("--flow", help="ricci_ex, ent, power, constant, psi or inline (with --set f1=...)")
    p.add_argument("--n", help="number of power sums")
    p.add_argument("--s", help="order for ent")
    p.add_argument("--m", help="order for power")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", help="reserved; the solvers are deterministic")
    if run_flags:
        p.add_argument("--t-end", dest="t_end")
        p.add_argument("--t-samples", dest="t_samples")
        p.add_argument("--orientation", help="+1 or -1")
        p.add_argument("--scheme", choices=["auto", "characteristics", "conservation", "fd"])
        p.add_argument("--roots", help="';'-separated expressions in x")
        p.add_argument("--tau", help="';'-separated expressions in x")
        p.add_argument("--lambda0", help="initial curvature for psi flows")
        p.add_argument("--psi", help="polynomial coefficients c0,c1,...")
        p.add_argument("--boundary", choices=["periodic", "extrapolate"])
        p.add_argument("--cfl")


def build_parser():
    parser = argparse.ArgumentParser(prog="egflow", description="Extrinsic geometric flows along normal curves.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="hyperbolicity of a flow at one state")
    _common(p, run_flags=False)
    p.add_argument("--tau", help="comma-separated power sums")
    p.add_argument("--sigma", help="comma-separated elementary symmetric functions")
    p.add_argument("--roots", help="comma-separated principal curvatures")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("solve", help="evolve initial data from a config file")
    _common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("scenario", help="run a worked example")
    p.add_argument("name", choices=sorted(DEFAULTS))
    _common(p)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("map", help="hyperbolicity regions on a parameter grid")
    _common(p, run_flags=False)
    p.add_argument("--axis2", help="a,b,cells for the second axis")
    p.add_argument("--sigma2", help="fixed sigma_2 for n = 3")
    p.set_defaults(func=cmd_map)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except NotHyperbolicError as exc:
        print(f"egflow: refused: {exc} {json.dumps(exc.details, default=str)}", file=sys.stderr)
        return EXIT_NOT_HYPERBOLIC
    except BlowupError as exc:
        print(f"egflow: blow-up at t = {exc.blowup_time}", file=sys.stderr)
        return EXIT_TRUNCATED
    except (InvalidInputError, InvalidMetricError) as exc:
        print(f"egflow: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
