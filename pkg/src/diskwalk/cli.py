"""Command-line front end.

Exit codes: 0 success, 1 configuration or precondition error (including
unknown flags), 2 verification failure.  Every command that draws random
numbers needs ``--seed``; there is no clock-based default.

``--config FILE`` reads a flat JSON object whose keys are flag names
(``record-stride`` or ``record_stride``); flags given on the command line
override it and unknown keys are rejected.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .errors import DiskwalkError
from .geometry import Pole

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _complex(s) -> complex:
    if isinstance(s, (int, float, complex)):
        return complex(s)
    try:
        return complex(str(s).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {s!r}") from None


def _varsigma(s):
    if str(s) == "uniform":
        return "uniform"
    try:
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError("varsigma0 must be 'uniform' or a number") from None


def _floats(s):
    if isinstance(s, (list, tuple)):
        return [float(v) for v in s]
    try:
        return [float(v) for v in str(s).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _pos_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s!r}")
    return v


def _nonneg_int(s):
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {s!r}")
    return v


def _prob(s):
    v = float(s)
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError(f"p must lie in (0, 1], got {s!r}")
    return v


# (flag, type, default, help); default None means "must come from flag or config"
SEED = ("seed", _nonneg_int, None, "64-bit seed (required)")
LAW = ("law", str, "uniform", "uniform | paper-triangular | triangular:<mode> | table:<json>")
WORKERS = ("workers", int, 1, "threads; 0 uses every CPU")
POLE = ("pole-angle", float, 0.0, "angle of the pole alpha, radians")
Z0 = ("z0", _complex, 0j, "start point of the U-walk, e.g. 0.3+0.2j")
ZOPTS = [("p", _prob, 0.5, "heads probability"),
         ("tau0", float, 0.0, "initial tau"),
         ("varsigma0", _varsigma, "uniform", "'uniform' or a fixed value in [-pi/2, pi/2]")]
SIM = [SEED, ("steps", _nonneg_int, 1000, "steps per trajectory"),
       ("trajectories", _pos_int, 1, "number of trajectories"),
       ("record-stride", _pos_int, 1, "record every k-th step (final step always)"),
       LAW, POLE, ("out", str, None, "trajectory file"),
       ("format", str, "csv", "csv | jsonl"), ("svg", str, None, "also render an SVG"), WORKERS]

COMMANDS = {
    "simulate-u": ("simulate the U-walk", SIM + [Z0]),
    "simulate-z": ("simulate the two-pencil Z-walk", SIM + ZOPTS),
    "verify": ("run the exact-identity suite",
               [SEED, ("trials", _pos_int, 1000, "random cases"),
                ("steps", _pos_int, 200, "steps per case")]),
    "rates": ("escape rates against |E(gamma)|",
              [SEED, LAW, ("steps", _pos_int, 100_000, "n"), Z0,
               ("kind", str, "u", "u | z"), *ZOPTS[:1],
               ("tau0", float, 0.0, "Z-walk initial tau"),
               ("varsigma0", _varsigma, "uniform", "Z-walk initial varsigma"),
               ("delta", float, 0.1, "pole exclusion radius for the uniform rate"),
               ("grid", _pos_int, 100, "grid points for the uniform rate")]),
    "clt": ("CLT check of omega_n/sqrt(n) and the log pole distances",
            [SEED, LAW, ("steps", _pos_int, 1000, "n"), ("replicas", _pos_int, 5000, "walks"),
             ("thresholds", _floats, [1.0, 2.0, 3.0], "comma-separated s values"), Z0, WORKERS]),
    "lil": ("running LIL statistics",
            [SEED, LAW, ("steps", _pos_int, 10**6, "n_max"),
             ("normalizer", str, "standard", "standard | paper"), Z0,
             ("burn-in", _pos_int, 1000, "first step included in the sup"),
             ("kind", str, "u", "u | z"), ("p", _prob, 1.0, "Z-walk heads probability"),
             ("tau0", float, 0.0, "Z-walk initial tau"),
             ("varsigma0", _varsigma, 0.0, "Z-walk initial varsigma")]),
    "oscillation": ("extremes of omega for a driftless law",
                    [SEED, LAW, ("steps", _pos_int, 100_000, "n"),
                     ("threshold", float, None, "default factor*sigma*sqrt(n)"),
                     ("factor", float, 0.2, "threshold multiple of sigma*sqrt(n)"),
                     ("runs", _pos_int, 1, "independent runs (trajectories 0..runs-1)")]),
    "render": ("render a trajectory file as SVG",
               [("input", str, None, "trajectory CSV/JSONL (required)"),
                ("out", str, None, "SVG path (required)"), POLE,
                ("skip-fraction", float, 0.0, "drop this leading fraction of each trajectory")]),
}
REQUIRED = {"seed", "input"}


def _dest(flag):
    return flag.replace("-", "_")


def build_parser():
    parser = _Parser(prog="diskwalk", description="Random gyrotranslation walks on the Poincare disk.")
    parser.add_argument("--version", action="version", version=f"diskwalk {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, (help_, opts) in COMMANDS.items():
        p = sub.add_parser(name, help=help_, description=help_)
        for flag, typ, default, h in opts:
            shown = "" if default is None else f" (default: {default})"
            p.add_argument(f"--{flag}", dest=_dest(flag), type=typ, default=None, help=h + shown)
        p.add_argument("--config", default=None, help="flat JSON file of option values")
        p.add_argument("--json", action="store_true", help="print the report as JSON")
        p.add_argument("--report", default=None, help="also write the JSON report here")
    return parser


def resolve(args) -> dict:
    """Merge defaults < config file < flags; reject unknown config keys."""
    _, opts = COMMANDS[args.command]
    by_dest = {_dest(f): (f, t, d) for f, t, d, _ in opts}
    cfg = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config!r}: {exc}") from None
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a flat JSON object")
        for k, v in raw.items():
            d = _dest(k)
            if d in ("json", "report"):
                cfg[d] = v
                continue
            if d not in by_dest:
                raise UsageError(f"unknown config key {k!r} for {args.command}")
            if isinstance(v, (dict, list)) and d != "thresholds":
                raise UsageError(f"config key {k!r} must be a scalar")
            try:
                cfg[d] = by_dest[d][1](v) if v is not None else None
            except (argparse.ArgumentTypeError, ValueError, TypeError) as exc:
                raise UsageError(f"config key {k!r}: {exc}") from None
    out = {}
    for d, (flag, _, default) in by_dest.items():
        v = getattr(args, d)
        out[d] = v if v is not None else cfg.get(d, default)
        if out[d] is None and d in REQUIRED:
            raise UsageError(f"--{flag} is required for {args.command}")
    if args.command == "render" and out.get("out") is None:
        raise UsageError("--out is required for render")
    out["json"] = bool(args.json or cfg.get("json", False))
    out["report"] = args.report or cfg.get("report")
    return out


# -- commands ----------------------------------------------------------------


def _law(o):
    from .laws import parse_law
    return parse_law(o["law"])


def _workers(o):
    w = o.get("workers", 1)
    return None if w == 0 else w


def cmd_simulate(o, kind):
    from .io import render_pointcloud, write_trajectory
    from .walk import EnsembleConfig, run_ensemble

    if o["format"] not in ("csv", "jsonl"):
        raise UsageError("--format must be csv or jsonl")
    pole = Pole.from_angle(o["pole_angle"]) if o["pole_angle"] else Pole()
    extra = {"z0": o["z0"]} if kind == "u" else {"p": o["p"], "tau0": o["tau0"],
                                                  "varsigma0": o["varsigma0"]}
    cfg = EnsembleConfig(o["trajectories"], o["steps"], o["seed"], o["record_stride"],
                         _law(o), pole=pole, **extra)
    res = run_ensemble(cfg, kind, workers=_workers(o))
    rep = {"command": f"simulate-{kind}", "trajectories": cfg.trajectories, "steps": cfg.steps,
           "records": len(res), "seed": cfg.seed}
    if o["out"]:
        rep["written"] = write_trajectory(res, o["out"], o["format"])
        rep["out"] = o["out"]
    if o["svg"]:
        rep["svg"] = render_pointcloud(res, o["svg"], alpha=pole.alpha)
    finals = [b.last() for b in res.blocks]
    rep["final_tau_mean"] = sum(r.tau for r in finals) / len(finals)
    rep["saturated_final"] = sum(r.saturated for r in finals)
    return rep, EXIT_OK


def cmd_verify(o):
    from .verify import run_verification

    r = run_verification(o["trials"], o["steps"], o["seed"])
    rep = r.as_dict()
    rep["command"] = "verify"
    rep["checks_passed"] = sum(c.passed for c in r.checks)
    rep["checks_total"] = len(r.checks)
    return rep, EXIT_OK if r.passed else EXIT_VERIFY


def cmd_rates(o):
    from .analysis import escape_rate, step_law_moments, uniform_escape_rate, z_rate_report
    from .geometry import dist_from_origin_bipolar
    from .walk import EnsembleConfig, run_ensemble, start_bipolar

    law = _law(o)
    mom = step_law_moments(law)
    if o["kind"] == "z":
        cfg = EnsembleConfig(1, o["steps"], o["seed"], o["steps"], law, p=o["p"],
                             tau0=o["tau0"], varsigma0=o["varsigma0"])
        r = z_rate_report(cfg)
        rep = r.as_dict()
    elif o["kind"] == "u":
        cfg = EnsembleConfig(1, o["steps"], o["seed"], o["steps"], law, z0=o["z0"])
        vs0, t0 = start_bipolar(o["z0"], Pole())
        d0 = float(dist_from_origin_bipolar(t0, vs0))
        r = escape_rate(run_ensemble(cfg, "u").blocks[0], law, d0=d0)
        rep = r.as_dict()
        rep["uniform_escape_rate"] = uniform_escape_rate(law, o["delta"], o["grid"], o["steps"],
                                                         seed=o["seed"])
    else:
        raise UsageError("--kind must be u or z")
    rep.update(command="rates", law=o["law"], mean_gamma=mom.mean, var_gamma=mom.var,
               quadrature_error=mom.error)
    return rep, EXIT_OK


def cmd_clt(o):
    from .analysis import clt_report

    r = clt_report(_law(o), o["steps"], o["replicas"], o["thresholds"], seed=o["seed"],
                   z0=o["z0"], workers=_workers(o))
    rep = r.as_dict()
    rep["command"] = "clt"
    return rep, EXIT_OK


def cmd_lil(o):
    from .analysis import lil_report

    if o["normalizer"] not in ("standard", "paper"):
        raise UsageError("--normalizer must be standard or paper")
    r = lil_report(_law(o), o["steps"], o["normalizer"], seed=o["seed"], z0=o["z0"],
                   burn_in=o["burn_in"], kind=o["kind"], p=o["p"], tau0=o["tau0"],
                   varsigma0=o["varsigma0"])
    rep = r.as_dict()
    rep["command"] = "lil"
    return rep, EXIT_OK


def cmd_oscillation(o):
    from .analysis import oscillation_check

    law = _law(o)
    runs = [oscillation_check(law, o["steps"], o["threshold"], seed=o["seed"], trajectory=t,
                              factor=o["factor"]) for t in range(o["runs"])]
    rep = {"command": "oscillation", "runs": [dict(r.__dict__) for r in runs],
           "passed_runs": sum(r.passed for r in runs), "total_runs": len(runs),
           "oracle_probability": runs[0].oracle_probability, "threshold": runs[0].threshold}
    return rep, EXIT_OK


def cmd_render(o):
    from .io import read_trajectory, render_pointcloud

    try:
        recs = read_trajectory(o["input"])
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read {o['input']!r}: {exc}") from None
    if o["skip_fraction"]:
        from itertools import groupby
        kept = []
        for _, grp in groupby(recs, key=lambda r: r.traj):
            grp = list(grp)
            kept.extend(grp[int(len(grp) * o["skip_fraction"]):])
        recs = kept
    pole = Pole.from_angle(o["pole_angle"]) if o["pole_angle"] else Pole()
    summary = render_pointcloud(recs, o["out"], alpha=pole.alpha)
    return {"command": "render", "out": o["out"], **summary}, EXIT_OK


def _text(rep, indent=""):
    lines = []
    for k, v in rep.items():
        if isinstance(v, dict):
            lines.append(f"{indent}{k}:")
            lines.extend(_text(v, indent + "  "))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{indent}{k}:")
            for item in v:
                lines.append(indent + "  - " + ", ".join(f"{a}={_num(b)}" for a, b in item.items()))
        else:
            lines.append(f"{indent}{k}: {_num(v)}")
    return lines


def _num(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, complex):
        return repr(v)
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if hasattr(v, "item"):
        return _jsonable(v.item())
    return v


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_CONFIG
        o = resolve(args)
        cmd = args.command
        if cmd in ("simulate-u", "simulate-z"):
            rep, code = cmd_simulate(o, cmd[-1])
        else:
            rep, code = globals()[f"cmd_{cmd}"](o)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (DiskwalkError, ValueError) as exc:
        print(f"diskwalk: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rep = _jsonable(rep)
    if o["report"]:
        Path(o["report"]).write_text(json.dumps(rep, indent=2, sort_keys=True) + "\n")
    if o["json"]:
        print(json.dumps(rep, indent=2, sort_keys=True))
    else:
        print("\n".join(_text(rep)))
    return code


if __name__ == "__main__":
    sys.exit(main())
