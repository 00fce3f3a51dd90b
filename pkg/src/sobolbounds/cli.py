"""Command line front-end.

Subcommands::

    sobolbounds bounds    --config run.json [--seed N] [--out DIR] [--format json|csv] [--quadrature]
    sobolbounds spectrum  --config run.json [--out DIR]
    sobolbounds oracle    --config run.json [--format json|csv]
    sobolbounds benchmark [--out DIR] [--format json|csv]

The config file is the JSON tree documented in :mod:`sobolbounds.config`.
``bounds`` writes ``report.json`` and ``summary.csv`` into the output
directory and echoes one of them on stdout.  Exit status is 0 for a completed
run (per-estimator failures are recorded in the report; ``--strict`` turns
them into status 1) and 2 for fatal errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

from .config import load_config
from .distributions import uniform
from .errors import SobolBoundsError
from .estimators import pdo_der_lower_bound
from .oracle import anova_decomposition, total_variance
from .runner import _jsonable, run, write_report
from .sample import center, quadrature_sample
from .spectral import basis_for
from .testfunctions import analytic_indices, g_sobol, linear_interaction

log = logging.getLogger("sobolbounds")

CACHE_DIR = Path(".sobolbounds-cache")
BENCH_A_LINEAR = (0.0, 0.5, 1.0, 2.0)
BENCH_A_GSOBOL = (0.0, 1.0, 4.5, 9.0)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, default=_jsonable) + "\n"


def _dump_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _config(args):
    if not args.config:
        raise SobolBoundsError("--config is required")
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.seeds = [args.seed]
    if getattr(args, "quadrature", False):
        cfg.mode = "quadrature"
    if getattr(args, "format", None):
        cfg.fmt = args.format
    if getattr(args, "out", None):
        cfg.out_dir = args.out
    return cfg.validate()


def cmd_bounds(args) -> int:
    cfg = _config(args)
    report = run(cfg, cache_dir=None if args.no_cache else Path(cfg.out_dir) / CACHE_DIR)
    jpath, cpath = write_report(report, cfg.out_dir)
    if cfg.fmt == "csv":
        sys.stdout.write(cpath.read_text())
    else:
        sys.stdout.write(jpath.read_text())
    failed = [
        (r["name"], e["estimator"], e["error"])
        for r in report["results"] for e in r["estimates"] if e.get("error")
    ]
    for name, estimator, err in failed:
        print(f"note: {estimator} on {name}: {err}", file=sys.stderr)
    return 1 if failed and args.strict else 0


def cmd_spectrum(args) -> int:
    cfg = _config(args)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for name, dist in zip(cfg.names, cfg.inputs):
        basis = basis_for(dist, cfg.K, cfg.M, cfg.weight,
                          cache_dir=None if args.no_cache else out / CACHE_DIR)
        path = out / f"spectrum-{name}.json"
        basis.save(path)
        rows.append({"input": name, "source": basis.source, "file": str(path),
                     **{f"lambda_{k}": float(v) for k, v in enumerate(basis.eigenvalues)}})
    sys.stdout.write(_dump_csv(rows) if cfg.fmt == "csv" else _dump_json(rows))
    return 0


def cmd_oracle(args) -> int:
    cfg = _config(args)
    if cfg.model is None:
        raise SobolBoundsError("the oracle needs a named model, not a CSV sample")
    terms = anova_decomposition(cfg.model, cfg.inputs, cfg.quad_order)
    D = terms[()]
    rows = []
    for I, v in sorted(terms.items(), key=lambda kv: (len(kv[0]), kv[0])):
        if not I:
            continue
        rows.append({
            "subset": ",".join(cfg.names[j] for j in I),
            "D_I": v,
            "D_I_tot": total_variance(terms, I),
            "S_I": v / D if D > 0 else math.nan,
        })
    if cfg.fmt == "csv":
        sys.stdout.write(_dump_csv(rows))
    else:
        sys.stdout.write(_dump_json({"schema": 1, "variance": D, "terms": rows}))
    return 0


def benchmark_tables(quad_order: int = 16) -> dict:
    """Quadrature reproduction of the linear-interaction and g-Sobol tables."""
    linear = []
    dists = [uniform(-0.5, 0.5)] * 2
    bases = [basis_for(d, 2) for d in dists]
    for a in BENCH_A_LINEAR:
        model = linear_interaction(a)
        s = center(quadrature_sample(model, dists, quad_order))
        terms = anova_decomposition(model, dists, quad_order)
        lb = pdo_der_lower_bound(s, bases, 0)
        ref = analytic_indices("linear_interaction", {"a": a}, 0)
        linear.append({
            "a": a, "D_1": terms[(0,)], "D_1_tot": total_variance(terms, (0,)),
            "LB_1": lb.main_effect, "LB_1_tot": lb.value,
            "LB_1_exact": ref["lb_main"], "LB_1_tot_exact": ref["lb_total"],
        })

    gs = []
    a = BENCH_A_GSOBOL
    model = g_sobol(a)
    dists = [uniform(-0.5, 0.5)] * len(a)
    bases = [basis_for(d, 2) for d in dists]
    s = center(quadrature_sample(model, dists, quad_order))
    terms = anova_decomposition(model, dists, quad_order)
    for i in range(len(a)):
        lb = pdo_der_lower_bound(s, bases, i, eigen_index=2)
        ref = analytic_indices("g_sobol", {"a": list(a)}, i)
        gs.append({
            "i": i + 1, "a_i": a[i], "D_i": terms[(i,)], "D_i_tot": total_variance(terms, (i,)),
            "LB_i": lb.main_effect, "LB_i_tot": lb.value,
            "LB_i_exact": ref["lb_main"], "LB_i_tot_exact": ref["lb_total"],
        })
    return {"linear_interaction": linear, "g_sobol": gs}


def cmd_benchmark(args) -> int:
    tables = benchmark_tables()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "benchmark.json").write_text(_dump_json(tables))
        for name, rows in tables.items():
            (out / f"benchmark-{name}.csv").write_text(_dump_csv(rows))
    if args.format == "csv":
        for name, rows in tables.items():
            sys.stdout.write(f"# {name}\n" + _dump_csv(rows))
    else:
        sys.stdout.write(_dump_json(tables))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sobolbounds", description="Lower and upper bounds of Sobol' indices.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--config", metavar="PATH", help="JSON run configuration")
        sp.add_argument("--out", metavar="DIR", help="output directory (overrides config)")
        sp.add_argument("--format", choices=("json", "csv"), help="stdout format")
        sp.add_argument("--no-cache", action="store_true", help="do not read or write cached spectra")
        if seed:
            sp.add_argument("--seed", type=int, help="single seed replacing the configured list")
            sp.add_argument("--quadrature", action="store_true", help="tensor quadrature instead of Monte Carlo")

    b = sub.add_parser("bounds", help="run the configured estimators")
    common(b)
    b.add_argument("--strict", action="store_true", help="exit 1 if any estimator failed")
    b.set_defaults(func=cmd_bounds)

    s = sub.add_parser("spectrum", help="solve and save the eigenbasis of each input")
    common(s, seed=False)
    s.set_defaults(func=cmd_spectrum)

    o = sub.add_parser("oracle", help="exact ANOVA variances by quadrature (d <= 4)")
    common(o, seed=False)
    o.set_defaults(func=cmd_oracle)

    k = sub.add_parser("benchmark", help="linear-interaction and g-Sobol reference tables")
    k.add_argument("--out", metavar="DIR")
    k.add_argument("--format", choices=("json", "csv"), default="json")
    k.set_defaults(func=cmd_benchmark)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SobolBoundsError, ValueError, OSError) as exc:
        print(f"sobolbounds: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
