"""Command-line drivers: ``sparsedom verify-maximal|verify-cz|verify-frac|sharpness|sparse-decompose``.

Exit status is 0 when every checked inequality held, 1 when one failed and 2 on
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import experiments as ex
from .constants import cz_exponent
from .errors import AdmissibilityError, DegenerateInputError, DepthInsufficientError, DyadicInputError
from .sharpness import sharpness
from .stepfun import StepFunction

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("sparsedom")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file supplying any option; flags override it")
    common.add_argument("--p", type=float, nargs="+", help="source exponent(s); trials cycle through the list")
    common.add_argument("--q", type=float, help="target exponent (derived from p, alpha, n when omitted)")
    common.add_argument("--alpha", type=float)
    common.add_argument("--n", type=int, help="dimension")
    common.add_argument("--root-level", type=int, dest="root_level")
    common.add_argument("--resolution-level", type=int, dest="resolution_level")
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--restarts", type=int, help="random restarts of the norm iteration")
    common.add_argument("--workers", type=int)
    common.add_argument("--out", help="report path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="sparsedom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify-maximal", parents=[common], help="weak and strong bounds for M_{alpha,mu}")
    cz = sub.add_parser("verify-cz", parents=[common], help="weighted bound for the sparse CZ operator")
    cz.add_argument("--no-chains", dest="chains", action="store_false", default=None)
    cz.add_argument("--duality", action="store_true", default=None)
    cz.add_argument("--a", type=float, help="stopping factor (>= 2)")
    fr = sub.add_parser("verify-frac", parents=[common], help="weighted bound for the sparse fractional operator")
    fr.add_argument("--no-chains", dest="chains", action="store_false", default=None)
    fr.add_argument("--a", type=float, help="stopping factor (>= 2)")
    sh = sub.add_parser("sharpness", parents=[common], help="exponent of [w]_Ap via power weights")
    sh.add_argument("--deltas", type=float, nargs="+")
    sh.add_argument("--depth", type=int, help="tower depth (default: chosen from delta)")
    sd = sub.add_parser("sparse-decompose", parents=[common], help="stopping-cube family of a step function")
    sd.add_argument("--input", required=False, help="StepFunction JSON file")
    sd.add_argument("--a", type=float)
    sd.add_argument("--alphas", type=float, nargs="*", help="alphas for the I^D / I^S comparison")
    return parser


def build_config(args: argparse.Namespace) -> ex.ExperimentConfig:
    values: dict = {}
    if args.config:
        try:
            values.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise DyadicInputError(f"cannot read config {args.config}: {exc}") from None
    for key, val in vars(args).items():
        if val is not None:
            values[key] = val
    known = {f.name for f in fields(ex.ExperimentConfig)}
    unknown = set(values) - known - {"command", "config", "verbose", "alphas"}
    if unknown:
        raise DyadicInputError(f"unknown config keys: {sorted(unknown)}")
    if isinstance(values.get("p"), (int, float)):
        values["p"] = [values["p"]]
    cfg = ex.ExperimentConfig(**{k: v for k, v in values.items() if k in known})
    if cfg.trials < 1:
        raise DyadicInputError("--trials must be positive")
    return cfg


def _emit(report: dict, rows: list[dict], cfg: ex.ExperimentConfig) -> None:
    if cfg.format == "csv":
        buf = io.StringIO()
        if rows:
            cols = sorted({k for r in rows for k in r}, key=lambda k: list(rows[0]).index(k) if k in rows[0] else 99)
            w = csv.DictWriter(buf, fieldnames=cols)
            w.writeheader()
            w.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps({**report, "rows": rows}, indent=2, default=str) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _summary(report: dict) -> str:
    keys = ("theorem", "trials", "ok_count", "worst_ratio", "max_ratio_over_bound", "slope", "ok")
    return "  ".join(f"{k}={report[k]}" for k in keys if k in report)


def run(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = build_config(args)
        if args.command == "verify-maximal":
            report, rows = ex.verify_maximal(cfg)
        elif args.command == "verify-cz":
            report, rows = ex.verify_cz(cfg)
            for p in cfg.p:
                print(f"# p={p:g}: exponent max(1, p'/p) = {cz_exponent(p):g}", file=sys.stderr)
        elif args.command == "verify-frac":
            report, rows = ex.verify_frac(cfg)
        elif args.command == "sharpness":
            p = cfg.p[0] if cfg.p else 1.5
            sr = sharpness(p, cfg.deltas, cfg.depth)
            report = sr.to_dict()
            rows = report.pop("rows")
            report["ok"] = True
        else:
            if not cfg.input:
                raise DyadicInputError("sparse-decompose needs --input")
            f = StepFunction.load(cfg.input)
            report = ex.decompose(f, cfg.a, args.alphas or [0.5])
            v = report["verification"]
            report["ok"] = v["is_sparse"] and v["exceptional_disjoint"] and all(
                d["sparse_le_dyadic"] for d in v["domination"])
            rows = []
    except (AdmissibilityError, DegenerateInputError, DyadicInputError, DepthInsufficientError, OSError,
            TypeError) as exc:
        print(f"sparsedom: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(report, rows, cfg)
    print(_summary(report), file=sys.stderr)
    return EXIT_OK if report.get("ok", False) else EXIT_VIOLATION


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
