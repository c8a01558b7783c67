"""Command-line front end.

Subcommands: ``estimate``, ``scree``, ``simulate``, ``mp`` and ``gap``.
Exit codes: 0 on success, 2 for input errors, 3 for numeric or regime errors.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import theory
from .angular import empirical_angular_covariance, frechet_margin_transform, read_csv, select_extremes
from .criteria import CriterionKind, estimate_p, select_regime
from .errors import InputError, NumericError
from .simulate import ModelSpec, resolve_k, run_experiment
from .spectrum import eigenvalues_descending, scree, write_scree_csv

SEED_ENV = "EXTREMAL_PCA_SEED"
EXIT_INPUT = 2
EXIT_NUMERIC = 3


def parse_k(text: str):
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid k {text!r}") from exc
    if value.is_integer() and "." not in text:
        return int(value)
    return value


def parse_k_grid(text: str):
    return [parse_k(t.strip()) for t in text.split(",") if t.strip()]


def config_hash(args: argparse.Namespace) -> str:
    cfg = {k: v for k, v in vars(args).items() if k not in ("out", "func")}
    blob = json.dumps(cfg, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _kinds_for(criterion: str, d: int, k: int) -> list[CriterionKind]:
    if criterion == "auto":
        return list(select_regime(d, k))
    return [CriterionKind(criterion)]


def _regime_label(kinds) -> str:
    kind = kinds[0]
    if kind.is_star:
        return "star"
    return "circ" if kind in (CriterionKind.AicCirc, CriterionKind.BicCirc) else "fixed"


def _load(args) -> np.ndarray:
    x = read_csv(args.input, delimiter=args.delimiter)
    if args.frechet_margins:
        x = frechet_margin_transform(x)
    return x


def estimate_report(x: np.ndarray, k: int, criterion: str = "auto", q=None) -> dict:
    """One row of the estimation report for a single extreme count ``k``."""
    n, d = x.shape
    if k >= n:
        raise InputError("k must be < n")
    kinds = _kinds_for(criterion, d, k)
    spectrum = eigenvalues_descending(empirical_angular_covariance(select_extremes(x, k)))
    curves = [estimate_p(spectrum, k, kind, q) for kind in kinds]
    return {
        "n": n,
        "d": d,
        "k": k,
        "c": round(d / k, 4),
        "regime": _regime_label(kinds),
        "p_hat": {cv.kind.value: cv.p_hat for cv in curves},
        "curves": [cv.to_dict() for cv in curves],
    }


def table_csv(reports: list[dict], header: str) -> str:
    """Reports laid out with one column per k, one row per criterion family."""
    lines = [f"# {header}"]
    lines.append("k," + ",".join(str(r["k"]) for r in reports))
    lines.append("c," + ",".join(f"{r['c']:.4f}" for r in reports))
    lines.append("regime," + ",".join(r["regime"] for r in reports))
    for family in ("aic", "bic"):
        cells = []
        for r in reports:
            hit = [p for kind, p in r["p_hat"].items() if CriterionKind(kind).family == family]
            cells.append(str(hit[0]) if hit else "")
        if any(cells):
            lines.append(family + "," + ",".join(cells))
    return "\n".join(lines) + "\n"


def cmd_estimate(args) -> int:
    x = _load(args)
    n = x.shape[0]
    specs = args.k_grid if args.k_grid else [args.k]
    if specs == [None]:
        raise InputError("estimate needs --k or --k-grid")
    ks = [resolve_k(s, n) for s in specs]
    reports = [estimate_report(x, k, args.criterion, args.q) for k in ks]
    h = config_hash(args)
    if args.format == "json":
        text = json.dumps({"config_hash": h, "reports": reports}, indent=2) + "\n"
    else:
        text = table_csv(reports, f"config-hash={h}")
    _emit(text, args.out)
    return 0


def cmd_scree(args) -> int:
    x = _load(args)
    n, d = x.shape
    if args.k is None:
        raise InputError("scree needs --k")
    k = resolve_k(args.k, n)
    if k >= n:
        raise InputError("k must be < n")
    spectrum = eigenvalues_descending(empirical_angular_covariance(select_extremes(x, k)))
    table = scree(spectrum, min(k, d) - 1)
    header = f"config-hash={config_hash(args)} k={k} d={d}"
    if args.out:
        stem = Path(args.out)
        write_scree_csv(stem.with_name(stem.name + "_scaled.csv"), table.scaled, table.lambda1, header)
        write_scree_csv(stem.with_name(stem.name + "_increments.csv"), table.increments, table.lambda1, header)
    else:
        for name, vals in (("scaled", table.scaled), ("increments", table.increments)):
            sys.stdout.write(f"# {name} {header}\nindex,value\n")
            sys.stdout.writelines(f"{i},{float(v)!r}\n" for i, v in enumerate(vals, start=1))
    return 0


def _read_model_spec(text: str) -> ModelSpec:
    path = Path(text)
    if not text.lstrip().startswith("{") and path.exists():
        text = path.read_text()
    return ModelSpec.from_json(text)


def cmd_simulate(args) -> int:
    if not args.model_spec:
        raise InputError("simulate needs --model-spec")
    spec = _read_model_spec(args.model_spec)
    if args.seed is not None:
        spec = ModelSpec.from_dict({**spec.to_dict(), "seed": args.seed})
    kinds = _kinds_for(args.criterion, spec.d, spec.k_count)
    result = run_experiment(spec, args.reps, kinds, args.q, workers=args.workers)
    h = config_hash(args)
    csv_text = result.to_csv(f"config-hash={h}")
    summary = json.dumps({"config_hash": h, **result.summary()}, indent=2, sort_keys=True) + "\n"
    if args.out:
        out = Path(args.out)
        out.write_text(csv_text)
        out.with_name(out.stem + ".summary.json").write_text(summary)
    elif args.format == "json":
        sys.stdout.write(summary)
    else:
        sys.stdout.write(csv_text)
    return 0


def cmd_mp(args) -> int:
    c = theory.aspect_ratio(args.c)
    a, b = theory.mp_support(c)
    blocks = [f"# config-hash={config_hash(args)} c={c!r} point_mass={theory.mp_point_mass(c)!r}"]
    xs = args.x if args.x else list(np.linspace(a, b, args.points))
    blocks.append("x,density,cdf")
    blocks += [f"{x!r},{theory.mp_density(x, c)!r},{theory.mp_cdf(x, c)!r}" for x in map(float, xs)]
    if args.alpha:
        blocks.append("alpha,quantile")
        blocks += [f"{al!r},{theory.mp_quantile(al, c)!r}" for al in args.alpha]
    if args.phi:
        blocks.append("x,phi_c")
        blocks += [f"{x!r},{theory.phi_c(x, c)!r}" for x in args.phi]
    _emit("\n".join(blocks) + "\n", args.out)
    return 0


def gap_rows(xis, cs) -> list[dict]:
    rows = []
    for c in cs:
        c = theory.aspect_ratio(c)
        for xi in xis:
            row = {"xi": xi, "c": c, "distant": theory.distant_spike_check(xi, c)}
            row["condition"] = "gap" if c < 1 else "modified-gap"
            if row["distant"]:
                res = theory.applicable_gap(xi, c)
                row.update(margin=res.margin, satisfied=res.satisfied)
            else:
                row.update(condition="inapplicable", margin=float("nan"), satisfied=False)
            rows.append(row)
    return rows


def cmd_gap(args) -> int:
    rows = gap_rows(args.xi, args.c)
    lines = [f"# config-hash={config_hash(args)}", "xi,c,distant,condition,margin,satisfied"]
    lines += [
        f"{r['xi']!r},{r['c']!r},{str(r['distant']).lower()},{r['condition']},{r['margin']!r},{str(r['satisfied']).lower()}"
        for r in rows
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


CRITERIA = ["auto"] + [kind.value for kind in CriterionKind]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="extremal-pca", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def data_opts(p):
        p.add_argument("--input", required=True, help="CSV file, one observation per row")
        p.add_argument("--delimiter", default=",")
        p.add_argument("--k", type=parse_k, help="extreme count or fraction of n in (0, 1)")
        p.add_argument("--frechet-margins", action="store_true", help="rank-transform columns to standard Fréchet")
        p.add_argument("--out")

    p = sub.add_parser("estimate", help="estimate the number of spiked eigenvalues")
    data_opts(p)
    p.add_argument("--k-grid", type=parse_k_grid, help="comma-separated k values; one report column each")
    p.add_argument("--q", type=int)
    p.add_argument("--criterion", choices=CRITERIA, default="auto")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("scree", help="scaled eigenvalues and increments")
    data_opts(p)
    p.set_defaults(func=cmd_scree)

    p = sub.add_parser("simulate", help="replicate p_hat on a generative model")
    p.add_argument("--model-spec", required=True, help="JSON text or path to a JSON file")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--q", type=int)
    p.add_argument("--criterion", choices=CRITERIA, default="auto")
    seed_default = os.environ.get(SEED_ENV)
    p.add_argument("--seed", type=int, default=int(seed_default) if seed_default else None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", help="long-format CSV path; a .summary.json is written beside it")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mp", help="Marčenko–Pastur density, CDF, quantiles and phi_c")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--x", type=float, nargs="+")
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--alpha", type=float, nargs="+")
    p.add_argument("--phi", type=float, nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_mp)

    p = sub.add_parser("gap", help="gap-condition margins over a grid of spikes and ratios")
    p.add_argument("--xi", type=float, nargs="+", required=True)
    p.add_argument("--c", type=float, nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gap)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    print(f"config-hash: {config_hash(args)}", file=sys.stderr)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
