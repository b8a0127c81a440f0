"""Operator intent inference and mission-policy re-weighting.

Per control tick the operator input and robot motion on the input
manifold define a desired-potential gradient; each mission policy gets

  * a conditional likelihood: metric-weighted cosine alignment between
    the desired gradient and the policy gradient, mapped to [0, 1];
  * a prior: spectral projection of the distance to the policy optimum,
    discounted by the input magnitude;

and the product ranks the policies for the greedy scale update: scales
of policies that do not conflict with the already-accumulated motion
rise by one step, conflicting ones fall, everything clamped to [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BadParams, DimensionMismatch
from .geometry import wrap_diff
from .policies import HumanView
from .rmp import _pinv, spectral

DEGENERATE_NORM = 1e-9     # below this metric-weighted norm a direction carries no evidence
EIGENVALUE_FLOOR = 1e-12   # eigenpairs at or below are excluded from the prior exponent


@dataclass(frozen=True)
class AdaptationConfig:
    gain: np.ndarray              # K, positive-definite (d_H x d_H)
    scale_step: float = 0.02      # per-tick scale increment
    conflict_tol: float = 0.15    # |cosine| dead band treated as non-conflicting
    update_rate: float = 100.0    # Hz, informational

    def __post_init__(self):
        k = np.asarray(self.gain, dtype=float)
        if k.ndim == 1:
            k = np.diag(k)
        if k.ndim != 2 or k.shape[0] != k.shape[1]:
            raise BadParams("gain must be a square matrix or a diagonal vector")
        if np.max(np.abs(k - k.T)) > 1e-9:
            raise BadParams("gain must be symmetric")
        if np.min(np.linalg.eigvalsh(k)) <= 0.0:
            raise BadParams("gain must be positive definite")
        if not (0.0 < self.scale_step <= 1.0):
            raise BadParams("scale_step must be in (0, 1]")
        if self.conflict_tol < 0.0:
            raise BadParams("conflict_tol must be >= 0")
        object.__setattr__(self, "gain", k)


@dataclass(frozen=True, eq=False)
class LikelihoodReport:
    neg_desired_gradient: np.ndarray   # hdot + K u  (= -grad of the desired potential)
    conditional: np.ndarray
    prior: np.ndarray
    likelihood: np.ndarray


def clamp_unit(u: np.ndarray) -> np.ndarray:
    """Operator input ingestion: renormalize anything outside the unit ball."""
    u = np.asarray(u, dtype=float).reshape(-1).copy()
    if not np.all(np.isfinite(u)):
        raise BadParams("operator input must be finite")
    n = float(np.linalg.norm(u))
    if n > 1.0 + 1e-9:
        u /= n
    return u


def desired_gradient(hdot: np.ndarray, u: np.ndarray, cfg: AdaptationConfig) -> np.ndarray:
    """Negative gradient of the operator's implied potential: hdot + K u."""
    hdot = np.asarray(hdot, dtype=float).reshape(-1)
    u = np.asarray(u, dtype=float).reshape(-1)
    if hdot.shape[0] != cfg.gain.shape[0] or u.shape[0] != cfg.gain.shape[0]:
        raise DimensionMismatch("hdot/u dimension does not match the adaptation gain")
    return hdot + cfg.gain @ u


def conditional_likelihood(neg_grad_des: np.ndarray, grad: np.ndarray,
                           metric: np.ndarray) -> float:
    """(1 + metric-weighted cosine)/2 between desired and policy gradients.

    Returns the neutral 0.5 when either gradient carries no weight under
    the policy metric (operator idle at rest, or policy at its optimum).
    """
    gd = -np.asarray(neg_grad_des, dtype=float)
    gi = np.asarray(grad, dtype=float)
    a = np.asarray(metric, dtype=float)
    na = float(np.sqrt(max(gd @ a @ gd, 0.0)))
    nb = float(np.sqrt(max(gi @ a @ gi, 0.0)))
    if na < DEGENERATE_NORM or nb < DEGENERATE_NORM:
        return 0.5
    cos = float(np.clip((gd @ a @ gi) / (na * nb), -1.0, 1.0))
    return 0.5 * (1.0 + cos)


def policy_prior(view: HumanView, h: np.ndarray, u: np.ndarray) -> float:
    """Eigenvalue-weighted Gaussian score of the distance to the optimum.

    A full-magnitude input wipes the distance term (prior -> 1); an idle
    operator leaves the artificial regions of attraction fully active.
    """
    h = np.asarray(h, dtype=float).reshape(-1)
    dec = spectral(view.metric(h))
    total = float(np.sum(dec.eigenvalues))
    if total <= EIGENVALUE_FLOOR:
        return 1.0
    delta = h - view.optimum
    for i, period in enumerate(view.periods):
        if period is not None:
            delta[i] = wrap_diff(delta[i], period)
    discount = 1.0 - min(float(np.linalg.norm(u)), 1.0)
    value = 0.0
    for lam, vec in zip(dec.eigenvalues, dec.eigenvectors.T):
        if lam <= EIGENVALUE_FLOOR:
            continue
        proj = discount * float(vec @ delta)
        value += float(np.exp(-proj * proj / (2.0 * lam))) * lam / total
    # the convex combination can land one ulp above 1 in float arithmetic
    return float(min(value, 1.0))


def policy_likelihoods(views: Sequence[HumanView], h: np.ndarray, hdot: np.ndarray,
                       u: np.ndarray, cfg: AdaptationConfig) -> LikelihoodReport:
    neg_des = desired_gradient(hdot, u, cfg)
    cond = np.array([conditional_likelihood(neg_des, v.gradient(h), v.metric(h)) for v in views])
    prior = np.array([policy_prior(v, h, u) for v in views])
    return LikelihoodReport(neg_desired_gradient=neg_des, conditional=cond,
                            prior=prior, likelihood=cond * prior)


def policy_scaling(policies: Sequence[tuple], likelihood: np.ndarray,
                   alpha: np.ndarray, cfg: AdaptationConfig) -> np.ndarray:
    """Greedy scale update over policies sorted by likelihood.

    ``policies`` holds (accel, metric, gradient) triples on the input
    manifold.  Exactly one +-scale_step update is applied per policy
    (before clamping); each policy then joins the running metric-weighted
    combination with its fresh scale, so lower-ranked policies are judged
    against everything already admitted.
    """
    n = len(policies)
    likelihood = np.asarray(likelihood, dtype=float).reshape(-1)
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    if likelihood.shape[0] != n or alpha.shape[0] != n:
        raise DimensionMismatch("likelihood/alpha length does not match the policy list")
    if n == 0:
        return alpha.copy()
    dim = np.asarray(policies[0][2]).shape[0]
    order = np.lexsort((np.arange(n), -likelihood))   # descending likelihood, ties by index
    sum_af = np.zeros(dim)
    sum_ag = np.zeros(dim)
    sum_a = np.zeros((dim, dim))
    out = alpha.copy()
    for j in order:
        f, a, g = (np.asarray(t, dtype=float) for t in policies[j])
        grad_cum = _pinv(sum_a) @ sum_ag
        na = float(np.sqrt(max(grad_cum @ sum_a @ grad_cum, 0.0)))
        nb = float(np.sqrt(max(g @ sum_a @ g, 0.0)))
        if na <= 1e-12 or nb <= 1e-12:
            gamma = 0.0   # nothing admitted yet, or no overlap: non-conflicting
        else:
            gamma = float((grad_cum @ sum_a @ g) / (na * nb))
        if abs(gamma) <= cfg.conflict_tol:
            out[j] += cfg.scale_step
        else:
            out[j] -= cfg.scale_step
        out[j] = float(np.clip(out[j], 0.0, 1.0))
        sum_af += out[j] * (a @ f)
        sum_ag += out[j] * (a @ g)
        sum_a += out[j] * a
    return out


def adaptation_step(views: Sequence[HumanView], h: np.ndarray, hdot: np.ndarray,
                    u: np.ndarray, alpha: np.ndarray,
                    cfg: AdaptationConfig) -> tuple[np.ndarray, LikelihoodReport]:
    """One re-weighting tick; pure in its inputs, returns (new scales, report)."""
    u = clamp_unit(u)
    report = policy_likelihoods(views, h, hdot, u, cfg)
    triples = []
    for v in views:
        g = v.gradient(h)
        triples.append((-g, v.metric(h), g))
    new_alpha = policy_scaling(triples, report.likelihood, alpha, cfg)
    return new_alpha, report
