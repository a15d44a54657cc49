"""Command-line front end.

Exit codes: 0 success, 2 bad input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import math
import sys

import numpy as np

from .auc_bounds import bound_report, feasible_region_curve, feasible_region_tail
from .chow_liu import chow_liu_tree
from .divergences import divergences_from_spectrum
from .errors import CovselError, NumericalError, ValidationError
from .generators import (
    SensorLayout,
    chain_model,
    kernel_network,
    load_matrix_csv,
    star_model,
    toeplitz_equicorrelation,
)
from .graph_model import covariance_select, read_edges
from .matrix_core import spectrum_of
from .report import assess
from .spectral_auc import auc_complement
from .tree_sampler import (
    edge_swap_chain,
    ensemble_metrics,
    enumerate_spanning_trees,
    uniform_spanning_tree,
)

logger = logging.getLogger("covselauc")

SWEEP_COLUMNS = [
    "family", "n", "param", "runs", "failures", "kl", "reverse_kl", "jeffreys", "auc",
    "one_minus_auc", "log10_one_minus_auc", "auc_lower", "auc_upper",
    "auc_lower_asymptotic", "auc_upper_asymptotic", "one_minus_lower", "one_minus_upper",
]


def _int_range(text: str) -> range:
    try:
        lo, hi = (int(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:STOP, got {text!r}") from None
    if lo < 2 or hi < lo:
        raise argparse.ArgumentTypeError(f"need 2 <= START <= STOP, got {text!r}")
    return range(lo, hi + 1)


def _geom_grid(text: str) -> np.ndarray:
    try:
        start, stop, num = text.split(":")
        start, stop, num = float(start), float(stop), int(num)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:STOP:NUM, got {text!r}") from None
    if not (0 < start <= stop) or num < 1:
        raise argparse.ArgumentTypeError(f"need 0 < START <= STOP and NUM >= 1, got {text!r}")
    return np.geomspace(start, stop, num)


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _write_rows(rows: list[dict], columns: list[str], fmt: str, out) -> None:
    if fmt == "json":
        json.dump(rows, out, indent=2)
        out.write("\n")
        return
    w = csv.DictWriter(out, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def _metrics(sigma, model) -> dict:
    spec = spectrum_of(sigma, model)
    div = divergences_from_spectrum(spec)
    b = bound_report(spec, div)
    tail = auc_complement(spec)
    return {
        "kl": div.kl, "reverse_kl": div.reverse_kl, "jeffreys": div.jeffreys,
        "auc": 1.0 - tail, "one_minus_auc": tail,
        "log10_one_minus_auc": math.log10(tail) if tail > 0 else -math.inf,
        "auc_lower": b.lower, "auc_upper": b.upper,
        "auc_lower_asymptotic": b.lower_asymptotic, "auc_upper_asymptotic": b.upper_asymptotic,
        "one_minus_lower": b.one_minus_lower, "one_minus_upper": b.one_minus_upper,
    }


def cmd_analyze(args) -> int:
    if (args.tree is None) == (not args.chow_liu):
        raise ValidationError("give exactly one of a tree file or --chow-liu")
    sigma = load_matrix_csv(args.matrix, normalize=args.normalize)
    structure = chow_liu_tree(sigma) if args.chow_liu else read_edges(args.tree, sigma.n)
    rep = assess(sigma, structure, mc_samples=args.mc, seed=args.seed, strict=not args.allow_cyclic)
    data = rep.to_dict()
    with _output(args.out) as out:
        if args.format == "json":
            json.dump(data, out, indent=2)
            out.write("\n")
        else:
            flat = {k: v for k, v in data.items() if k != "diagnostics"}
            flat["lambdas"] = ";".join(repr(x) for x in rep.lambdas)
            flat["alphas"] = ";".join(repr(x) for x in rep.alphas)
            flat["trace_delta"] = rep.diagnostics["trace_delta"]
            flat["edges"] = ";".join(f"{u}-{v}" for u, v in rep.diagnostics["edges"])
            _write_rows([flat], list(flat), "csv", out)
    return 0


def _sweep_rows(args) -> list[dict]:
    rows = []
    for n in args.n_range:
        if args.family in ("toeplitz-star", "toeplitz-chain"):
            if args.rho is None:
                raise ValidationError("--rho is required for Toeplitz families")
            sigma = toeplitz_equicorrelation(n, args.rho)
            model = (star_model if args.family == "toeplitz-star" else chain_model)(n, args.rho)
            row = {"family": args.family, "n": n, "param": args.rho, "runs": 1, "failures": 0}
            row.update(_metrics(sigma, model))
            rows.append(row)
            continue
        # kernel-2d: average over seeded layouts, Chow-Liu model each time
        seeds = np.random.SeedSequence(args.seed).spawn(args.runs)
        collected, failures = [], 0
        for ss in seeds:
            try:
                sigma = kernel_network(SensorLayout.random(n, np.random.default_rng(ss), args.sigma))
                model = covariance_select(sigma, chow_liu_tree(sigma))
                collected.append(_metrics(sigma, model))
            except CovselError as exc:
                failures += 1
                logger.warning("n=%d layout skipped: %s", n, exc)
        if not collected:
            raise NumericalError(f"every kernel layout failed at n={n}")
        row = {"family": args.family, "n": n, "param": args.sigma,
               "runs": len(collected), "failures": failures}
        for key in collected[0]:
            row[key] = float(np.mean([c[key] for c in collected]))
        # log of the averaged tail, as plotted; not the average of logs
        row["log10_one_minus_auc"] = math.log10(row["one_minus_auc"])
        rows.append(row)
    return rows


def cmd_sweep(args) -> int:
    rows = _sweep_rows(args)
    with _output(args.out) as out:
        _write_rows(rows, SWEEP_COLUMNS, args.format, out)
    return 0


def cmd_trees(args) -> int:
    sigma = load_matrix_csv(args.matrix, normalize=args.normalize)
    if args.enumerate:
        trees = enumerate_spanning_trees(sigma.n)
    elif args.samples:
        rng = np.random.default_rng(args.seed)
        if args.sampler == "wilson":
            trees = [uniform_spanning_tree(sigma.n, rng) for _ in range(args.samples)]
        else:
            trees = edge_swap_chain(sigma.n, args.samples, rng)
    else:
        raise ValidationError("give --samples S or --enumerate")
    ens = ensemble_metrics(sigma, trees)
    if ens.failures:
        print(f"{ens.failures} tree(s) skipped", file=sys.stderr)
    with _output(args.out) as out:
        ens.write_csv(out)
    return 0


def cmd_feasible_region(args) -> int:
    rows = []
    for a in args.a_grid:
        auc, d = feasible_region_curve(float(a))
        rows.append({"a": float(a), "auc": auc, "d": d, "one_minus_auc": feasible_region_tail(a),
                     "asymptote": 1.0 - math.exp(-d - 1.0)})
    with _output(args.out) as out:
        _write_rows(rows, ["a", "auc", "d", "one_minus_auc", "asymptote"], args.format, out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="covselauc",
                                description="Quality of Gaussian covariance-selection models.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt_default):
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--format", choices=["json", "csv"], default=fmt_default)
        sp.add_argument("--seed", type=int, default=0)

    a = sub.add_parser("analyze", help="report on one matrix and structure")
    a.add_argument("matrix")
    a.add_argument("tree", nargs="?", help="edge list, one 'u,v' per line (0-based)")
    a.add_argument("--chow-liu", action="store_true", help="use the Chow-Liu tree")
    a.add_argument("--mc", type=int, metavar="N", help="add a Monte Carlo AUC with N samples")
    a.add_argument("--normalize", action="store_true", help="rescale a covariance to correlation")
    a.add_argument("--allow-cyclic", action="store_true",
                   help="warn instead of failing when a cyclic structure breaks the selection rules")
    common(a, "json")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="metrics versus dimension for a matrix family")
    s.add_argument("--family", required=True, choices=["toeplitz-star", "toeplitz-chain", "kernel-2d"])
    s.add_argument("--n-range", type=_int_range, required=True, metavar="START:STOP")
    s.add_argument("--rho", type=float)
    s.add_argument("--sigma", type=float, default=1.0, help="kernel bandwidth (kernel-2d)")
    s.add_argument("--runs", type=int, default=100, help="layouts per n (kernel-2d)")
    common(s, "csv")
    s.set_defaults(func=cmd_sweep)

    t = sub.add_parser("trees", help="per-tree KL and AUC over a tree ensemble")
    t.add_argument("matrix")
    g = t.add_mutually_exclusive_group(required=True)
    g.add_argument("--samples", type=int)
    g.add_argument("--enumerate", action="store_true")
    t.add_argument("--sampler", choices=["wilson", "edge-swap"], default="wilson")
    t.add_argument("--normalize", action="store_true")
    t.add_argument("--out")
    t.add_argument("--seed", type=int, default=0)
    t.set_defaults(func=cmd_trees)

    f = sub.add_parser("feasible-region", help="boundary of the (AUC, KL) feasible region")
    f.add_argument("--a-grid", type=_geom_grid, default=_geom_grid("1e-3:1e3:61"),
                   metavar="START:STOP:NUM", help="geometric grid of the boundary parameter")
    f.add_argument("--out")
    f.add_argument("--format", choices=["json", "csv"], default="csv")
    f.set_defaults(func=cmd_feasible_region)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
