"""Batch runs: config in, report dict (and files) out."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import estimators as est
from .config import RunConfig
from .errors import SobolBoundsError
from .oracle import anova_decomposition, total_variance
from .sample import boundary_faces, center, draw_sample, quadrature_sample
from .spectral import basis_for

log = logging.getLogger(__name__)

SCHEMA = 1
CSV_COLUMNS = ("variable", "estimator", "value", "ci_lo", "ci_hi", "n", "seed")


class _Lazy:
    """Computes a value once; re-raises the same failure on every access."""

    def __init__(self, fn):
        self.fn = fn
        self.done = False
        self.exc = None
        self.val = None

    def get(self):
        if not self.done:
            try:
                self.val = self.fn()
            except SobolBoundsError as exc:
                self.exc = exc
            self.done = True
        if self.exc is not None:
            raise self.exc
        return self.val


def _faces(cfg: RunConfig, variables):
    faces = []
    if "fisher" in cfg.estimators:
        faces += boundary_faces(cfg.inputs, variables)
    if "monomial" in cfg.estimators:
        for i in variables:
            d = cfg.inputs[i]
            if d.family == "uniform" and d.support == (0.0, 1.0):
                faces.append((i, 1.0))
    return sorted(set(faces))


def _statistic(name: str, cfg: RunConfig, bases, i: int):
    if name == "pdo":
        return lambda s: est.pdo_lower_bound(s, bases.get(), i, cfg.eigen_index)
    if name == "pdo-der":
        return lambda s: est.pdo_der_lower_bound(s, bases.get(), i, cfg.eigen_index)
    if name == "fisher":
        return lambda s: est.fisher_lower_bound(s, cfg.inputs, i)
    if name == "monomial":
        return lambda s: est.monomial_lower_bound(s, cfg.inputs, i, cfg.monomial_degree)
    if name == "dgsm-upper":
        return lambda s: est.dgsm_upper(s, bases.get()[i], i)
    raise KeyError(name)


def run(cfg: RunConfig, cache_dir=None) -> dict:
    """Evaluate every requested estimator for every variable and seed.

    Failures of one estimator (unsupported law, missing data, ...) are recorded
    in its slot and never abort the run.
    """
    variables = cfg.variables if cfg.variables is not None else list(range(cfg.d))
    bases = _Lazy(lambda: [basis_for(d, cfg.K, cfg.M, cfg.weight, cache_dir=cache_dir) for d in cfg.inputs])
    anova = _Lazy(lambda: anova_decomposition(cfg.model, cfg.inputs, cfg.quad_order))
    faces = _faces(cfg, variables)

    if cfg.mode == "quadrature":
        passes = [None]
    elif cfg.csv_sample is not None:
        passes = cfg.seeds[:1]
    else:
        passes = cfg.seeds

    results = []
    for seed in passes:
        if cfg.mode == "quadrature":
            sample = quadrature_sample(cfg.model, cfg.inputs, cfg.quad_order, cfg.has_gradients, faces)
        elif cfg.csv_sample is not None:
            sample = cfg.csv_sample
        else:
            sample = draw_sample(cfg.model, cfg.inputs, cfg.n, seed, cfg.has_gradients, faces)
        sample = center(sample)
        variance = sample.variance()
        for i in variables:
            entries = []
            for k, name in enumerate(cfg.estimators):
                try:
                    record = _one(name, k, cfg, sample, bases, anova, i, seed).to_dict()
                except SobolBoundsError as exc:
                    log.info("%s on input %d: %s", name, i, exc)
                    record = {"kind": None, "error": type(exc).__name__, "message": str(exc)}
                except NotImplementedError as exc:
                    record = {"kind": None, "error": "MissingGradients", "message": str(exc)}
                entries.append({"estimator": name, **record})
            results.append({
                "variable": i,
                "name": cfg.names[i],
                "seed": seed,
                "variance": variance,
                "estimates": entries,
            })
    return {"schema": SCHEMA, "config": cfg.to_dict(), "results": results}


def _one(name, k, cfg: RunConfig, sample, bases, anova, i, seed) -> est.BoundEstimate:
    if name == "pick-freeze":
        if cfg.model is None:
            raise SobolBoundsError("pick-freeze needs a model, not a CSV sample")
        n = cfg.pick_freeze_n or cfg.n
        return est.pick_freeze_total(cfg.model, cfg.inputs, i, n, 0 if seed is None else seed)
    if name == "oracle":
        if cfg.model is None:
            raise SobolBoundsError("the quadrature oracle needs a model, not a CSV sample")
        terms = anova.get()
        return est.BoundEstimate(
            total_variance(terms, (i,)), "OracleExact", "D_i_tot", i,
            {"main": terms[(i,)]}, variance=terms[()],
        )
    stat = _statistic(name, cfg, bases, i)
    value = stat(sample)
    if sample.is_quadrature or not cfg.B:
        return value
    boot_seed = [0 if seed is None else seed, i, k]
    lo, hi = est.bootstrap_ci(lambda s: stat(center_fresh(s)).value, sample, cfg.B, cfg.level, boot_seed)
    return est.attach_ci(value, lo, hi, cfg.level)


def center_fresh(s):
    """Re-center a bootstrap resample around its own mean."""
    return center(replace(s, centered=False))


def summary_rows(report: dict) -> list[dict]:
    rows = []
    for res in report["results"]:
        for e in res["estimates"]:
            if e.get("error"):
                continue
            ci = e.get("ci") or {}
            rows.append({
                "variable": res["name"],
                "estimator": e["estimator"],
                "value": e["value"],
                "ci_lo": ci.get("lo", ""),
                "ci_hi": ci.get("hi", ""),
                "n": e["n_used"],
                "seed": "" if res["seed"] is None else res["seed"],
            })
    return rows


def write_report(report: dict, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jpath = out / "report.json"
    jpath.write_text(json.dumps(report, indent=2, default=_jsonable) + "\n")
    cpath = out / "summary.csv"
    with open(cpath, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(summary_rows(report))
    return jpath, cpath


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")
