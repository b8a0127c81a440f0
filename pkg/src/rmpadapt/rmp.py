"""Motion policy algebra: structured policies, pull-back and metric-weighted sum.

A policy is a pair ``(f, A)``: a desired acceleration and a positive
semi-definite metric stating how much the policy cares about each
direction.  Singular metrics are first-class citizens; all inversions
go through the Moore-Penrose pseudo-inverse with singular values below
``1e-10`` of the largest one truncated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import BadParams, DimensionMismatch, EmptyList, NotSymmetric
from .geometry import Chart

PINV_RCOND = 1e-10
SYMMETRY_TOL = 1e-9


def _pinv(a: np.ndarray) -> np.ndarray:
    return np.linalg.pinv(a, rcond=PINV_RCOND, hermitian=True)


@dataclass(frozen=True, eq=False)
class MotionPolicy:
    """Acceleration and metric on one manifold."""

    accel: np.ndarray
    metric: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.accel, dtype=float).reshape(-1)
        a = np.asarray(self.metric, dtype=float)
        if a.shape != (f.shape[0], f.shape[0]):
            raise DimensionMismatch(f"metric shape {a.shape} does not match accel dim {f.shape[0]}")
        object.__setattr__(self, "accel", f)
        object.__setattr__(self, "metric", a)

    @property
    def dim(self) -> int:
        return self.accel.shape[0]


@dataclass(frozen=True, eq=False)
class PolicySpec:
    """A structured policy: potential gradient plus damping on a chart.

    ``gradient`` must be the analytic gradient of ``potential``;
    ``metric_fn(coords, velocity)`` returns the PSD metric at that state;
    ``optimum`` is the coordinate vector minimizing the potential.
    """

    name: str
    category: str                       # "mission" | "safety"
    chart: Chart
    potential: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    metric_fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    damping: float
    optimum: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.damping < 0.0:
            raise BadParams("damping must be >= 0")
        if self.category not in ("mission", "safety"):
            raise BadParams(f"unknown policy category '{self.category}'")
        if self.optimum is not None:
            object.__setattr__(self, "optimum", np.asarray(self.optimum, dtype=float).reshape(-1))


def evaluate(spec: PolicySpec, coords: np.ndarray, velocity: np.ndarray) -> MotionPolicy:
    """Structured policy value: f = -grad(x) - beta*xdot, A = metric(x, xdot)."""
    coords = np.asarray(coords, dtype=float).reshape(-1)
    velocity = np.asarray(velocity, dtype=float).reshape(-1)
    if coords.shape != velocity.shape:
        raise DimensionMismatch("coords and velocity dims differ")
    f = -np.asarray(spec.gradient(coords), dtype=float) - spec.damping * velocity
    a = np.asarray(spec.metric_fn(coords, velocity), dtype=float)
    return MotionPolicy(f, a)


def pullback(policy: MotionPolicy, jacobian: np.ndarray) -> MotionPolicy:
    """Express a policy from a manifold in the configuration space below it."""
    j = np.asarray(jacobian, dtype=float)
    if j.ndim != 2 or j.shape[0] != policy.dim:
        raise DimensionMismatch(f"jacobian shape {j.shape} does not match policy dim {policy.dim}")
    ja = j.T @ policy.metric
    metric = ja @ j
    accel = _pinv(metric) @ (ja @ policy.accel)
    return MotionPolicy(accel, metric)


def rmp_sum(policies: Sequence[MotionPolicy]) -> MotionPolicy:
    """Metric-weighted combination; the neutral element is a zero metric."""
    if not policies:
        raise EmptyList("rmp_sum needs at least one policy")
    dim = policies[0].dim
    metric = np.zeros((dim, dim))
    forced = np.zeros(dim)
    for p in policies:
        if p.dim != dim:
            raise DimensionMismatch("policies live on different dimensions")
        metric = metric + p.metric
        forced = forced + p.metric @ p.accel
    return MotionPolicy(_pinv(metric) @ forced, metric)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray   # descending, clamped to >= 0
    eigenvectors: np.ndarray  # columns, matching order


def spectral(metric: np.ndarray) -> SpectralDecomposition:
    """Eigen-decomposition of a symmetric PSD metric, eigenvalues descending.

    Tiny negative eigenvalues (>= -1e-10) are clamped to zero; anything
    more negative raises, as does an asymmetric input.
    """
    a = np.asarray(metric, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"metric must be square, got {a.shape}")
    if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_TOL:
        raise NotSymmetric("metric is not symmetric")
    vals, vecs = np.linalg.eigh(a)
    if vals[0] < -1e-10:
        raise BadParams(f"metric has negative eigenvalue {vals[0]:.3e}")
    vals = np.clip(vals, 0.0, None)
    order = np.argsort(-vals, kind="stable")
    return SpectralDecomposition(vals[order], vecs[:, order])
