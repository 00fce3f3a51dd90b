"""Evaluation samples: the data every estimator reads.

A sample is either a crude Monte Carlo draw (equal weights) or a tensor
quadrature design (probability weights); estimators only ever take weighted
means, so they run unchanged on both.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .quadrature import tensor_rule


@dataclass(frozen=True, eq=False)
class EvaluationSample:
    """Design points, model outputs and optional gradients.

    ``faces`` maps ``(variable, value)`` to the outputs with that coordinate
    pinned to ``value`` (row-aligned with ``design``); the monomial bound and
    the boundary-corrected Fisher bound use them.
    """

    design: np.ndarray
    outputs: np.ndarray
    gradients: np.ndarray | None = None
    centered: bool = False
    seed: int | None = None
    weights: np.ndarray | None = None
    faces: dict = field(default_factory=dict)

    def __post_init__(self):
        design = np.atleast_2d(np.asarray(self.design, dtype=float))
        outputs = np.asarray(self.outputs, dtype=float).ravel()
        if design.shape[0] != outputs.size:
            raise ValueError(f"{design.shape[0]} design rows but {outputs.size} outputs")
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "outputs", outputs)
        if self.gradients is not None:
            grads = np.asarray(self.gradients, dtype=float)
            if grads.shape != design.shape:
                raise ValueError(f"gradients shape {grads.shape} != design shape {design.shape}")
            object.__setattr__(self, "gradients", grads)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float).ravel()
            if w.size != outputs.size:
                raise ValueError("weights must be row-aligned with the design")
            object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.outputs.size

    @property
    def d(self) -> int:
        return self.design.shape[1]

    @property
    def is_quadrature(self) -> bool:
        return self.weights is not None

    def mean(self, values) -> float:
        values = np.asarray(values, dtype=float)
        if self.weights is None:
            return float(np.mean(values))
        return float(np.sum(self.weights * values))

    def variance(self) -> float:
        """Output variance: unbiased for Monte Carlo, exact under quadrature weights."""
        if self.weights is None:
            return float(np.var(self.outputs, ddof=1)) if self.n > 1 else 0.0
        m = self.mean(self.outputs)
        return self.mean((self.outputs - m) ** 2)

    def take(self, rows) -> "EvaluationSample":
        """Row subset (with repetition), keeping every row-aligned array paired."""
        rows = np.asarray(rows)
        if self.weights is not None:
            raise ValueError("resampling a quadrature design is meaningless")
        return replace(
            self,
            design=self.design[rows],
            outputs=self.outputs[rows],
            gradients=None if self.gradients is None else self.gradients[rows],
            faces={k: v[rows] for k, v in self.faces.items()},
        )

    def to_csv(self, path) -> None:
        header = [f"x{j + 1}" for j in range(self.d)] + ["y"]
        cols = [self.design, self.outputs[:, None]]
        if self.gradients is not None:
            header += [f"dy{j + 1}" for j in range(self.d)]
            cols.append(self.gradients)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(np.hstack(cols).tolist())

    @classmethod
    def from_csv(cls, path) -> "EvaluationSample":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader)]
            rows = np.array([[float(v) for v in row] for row in reader if row], dtype=float)
        xcols = [k for k, h in enumerate(header) if h.startswith("x")]
        dcols = [k for k, h in enumerate(header) if h.startswith("dy")]
        if "y" not in header or not xcols:
            raise ValueError(f"{path}: expected header x1..xd,y[,dy1..dyd], got {header}")
        if dcols and len(dcols) != len(xcols):
            raise ValueError(f"{path}: {len(xcols)} inputs but {len(dcols)} gradient columns")
        rows = rows.reshape(-1, len(header))
        return cls(
            design=rows[:, xcols],
            outputs=rows[:, header.index("y")],
            gradients=rows[:, dcols] if dcols else None,
        )


def center(s: EvaluationSample) -> EvaluationSample:
    """Shift outputs (and face outputs) by their mean; gradients are untouched."""
    if s.centered:
        return s
    m = s.mean(s.outputs)
    return replace(
        s,
        outputs=s.outputs - m,
        faces={k: v - m for k, v in s.faces.items()},
        centered=True,
    )


def _evaluate(model, design, gradients, faces):
    outputs = model.evaluate(design)
    grads = model.gradient(design) if gradients and model.has_gradient else None
    face_out = {}
    for i, value in faces:
        face_out[(i, float(value))] = model.face_evaluate(i, value, design)
    return outputs, grads, face_out


def draw_sample(model, dists, n: int, seed: int, gradients: bool = True, faces=()) -> EvaluationSample:
    """Crude Monte Carlo sample of ``model`` under independent inputs ``dists``.

    Each coordinate gets its own child seed, so adding inputs never changes
    the draws of the existing ones.
    """
    if len(dists) != model.dimension:
        raise ValueError(f"model has {model.dimension} inputs, {len(dists)} distributions given")
    children = np.random.SeedSequence(seed).spawn(len(dists))
    design = np.column_stack(
        [dist.sample(n, np.random.default_rng(child)) for dist, child in zip(dists, children)]
    )
    outputs, grads, face_out = _evaluate(model, design, gradients, faces)
    return EvaluationSample(design, outputs, grads, seed=seed, faces=face_out)


def quadrature_sample(model, dists, order: int = 16, gradients: bool = True, faces=()) -> EvaluationSample:
    """Tensor Gauss design of ``model``; splits each axis at the model's kinks."""
    if len(dists) != model.dimension:
        raise ValueError(f"model has {model.dimension} inputs, {len(dists)} distributions given")
    design, weights, _ = tensor_rule(dists, order, model.kinks)
    outputs, grads, face_out = _evaluate(model, design, gradients, faces)
    return EvaluationSample(design, outputs, grads, weights=weights, faces=face_out)


def boundary_faces(dists, variables=None):
    """``(i, endpoint)`` pairs for finite endpoints where the density is non-zero."""
    out = []
    for i, dist in enumerate(dists):
        if variables is not None and i not in variables:
            continue
        for end in dist.support:
            if np.isfinite(end) and dist.pdf(end) > 0:
                out.append((i, float(end)))
    return out
