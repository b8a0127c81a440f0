from __future__ import annotations

import numpy as np
import pytest

from rmpadapt.errors import BadParams, DimensionMismatch, EmptyList, NotSymmetric
from rmpadapt.geometry import Chart, Pose
from rmpadapt.policies import AttractorParams
from rmpadapt.rmp import MotionPolicy, PolicySpec, evaluate, pullback, rmp_sum, spectral

from conftest import random_psd


def identity_chart(dim: int) -> Chart:
    return Chart(name=f"id{dim}", dim=dim,
                 map_fn=lambda pose: np.zeros(dim),
                 jacobian_fn=lambda pose: np.zeros((dim, 6)))


def quadratic_spec(dim: int, center, weight: float, stiffness: float, damping: float) -> PolicySpec:
    center = np.asarray(center, dtype=float)

    def potential(x):
        d = x - center
        return 0.5 * stiffness * float(d @ d)

    return PolicySpec(name="quad", category="mission", chart=identity_chart(dim),
                      potential=potential,
                      gradient=lambda x: stiffness * (x - center),
                      metric_fn=lambda x, v: weight * np.eye(dim),
                      damping=damping)


def random_policy(rng, dim, singular=False) -> MotionPolicy:
    return MotionPolicy(rng.normal(size=dim), random_psd(rng, dim, singular=singular))


class TestEvaluate:
    def test_hand_example(self):
        spec = quadratic_spec(2, [0, 0], weight=1.0, stiffness=1.0, damping=2.0)
        pol = evaluate(spec, np.array([1.0, 0.0]), np.array([0.0, 3.0]))
        assert np.allclose(pol.accel, [-1.0, -6.0], atol=1e-12)
        assert np.allclose(pol.metric, np.eye(2), atol=1e-12)

    def test_accel_affine_in_velocity(self):
        spec = quadratic_spec(3, [1, 2, 3], weight=2.0, stiffness=5.0, damping=1.7)
        rng = np.random.default_rng(0)
        x = rng.normal(size=3)
        v1, v2 = rng.normal(size=3), rng.normal(size=3)
        d = evaluate(spec, x, v1).accel - evaluate(spec, x, v2).accel
        assert np.allclose(d, -1.7 * (v1 - v2), atol=1e-12)

    def test_dimension_mismatch(self):
        spec = quadratic_spec(2, [0, 0], 1.0, 1.0, 0.0)
        with pytest.raises(DimensionMismatch):
            evaluate(spec, np.zeros(2), np.zeros(3))

    def test_category_validated(self):
        with pytest.raises(BadParams):
            PolicySpec(name="x", category="other", chart=identity_chart(1),
                       potential=lambda x: 0.0, gradient=lambda x: np.zeros(1),
                       metric_fn=lambda x, v: np.eye(1), damping=0.0)
        with pytest.raises(BadParams):
            quadratic_spec(1, [0], 1.0, 1.0, damping=-0.1)


class TestPullback:
    def test_hand_example(self):
        pol = pullback(MotionPolicy([3.0], [[2.0]]), np.array([[1.0, 0.0]]))
        assert np.allclose(pol.metric, [[2.0, 0.0], [0.0, 0.0]], atol=1e-12)
        assert np.allclose(pol.accel, [3.0, 0.0], atol=1e-12)

    def test_identity_jacobian_is_noop(self):
        rng = np.random.default_rng(1)
        pol = random_policy(rng, 4)
        out = pullback(pol, np.eye(4))
        assert np.allclose(out.accel, pol.accel, atol=1e-9)
        assert np.allclose(out.metric, pol.metric, atol=1e-12)

    def test_shape_checked(self):
        with pytest.raises(DimensionMismatch):
            pullback(MotionPolicy([1.0], [[1.0]]), np.zeros((2, 6)))

    def test_metric_stays_psd(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            pol = random_policy(rng, 3, singular=True)
            j = rng.normal(size=(3, 6))
            out = pullback(pol, j)
            assert np.min(np.linalg.eigvalsh(0.5 * (out.metric + out.metric.T))) > -1e-9


class TestSum:
    def test_hand_example(self):
        a = MotionPolicy([2.0, 0.0], np.diag([1.0, 0.0]))
        b = MotionPolicy([0.0, 4.0], np.diag([0.0, 1.0]))
        out = rmp_sum([a, b])
        assert np.allclose(out.metric, np.eye(2), atol=1e-12)
        assert np.allclose(out.accel, [2.0, 4.0], atol=1e-12)

    def test_zero_metric_is_neutral(self):
        rng = np.random.default_rng(3)
        pols = [random_policy(rng, 3) for _ in range(3)]
        ghost = MotionPolicy(rng.normal(size=3) * 100.0, np.zeros((3, 3)))
        base = rmp_sum(pols)
        with_ghost = rmp_sum(pols + [ghost])
        assert np.allclose(base.accel, with_ghost.accel, atol=1e-9)
        assert np.allclose(base.metric, with_ghost.metric, atol=1e-12)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(4)
        pols = [random_policy(rng, 4, singular=(i % 2 == 0)) for i in range(5)]
        ref = rmp_sum(pols)
        for _ in range(5):
            perm = rng.permutation(5)
            out = rmp_sum([pols[i] for i in perm])
            assert np.allclose(out.accel, ref.accel, atol=1e-8)
            assert np.allclose(out.metric, ref.metric, atol=1e-10)

    def test_associative(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            p1, p2, p3 = (random_policy(rng, 3) for _ in range(3))
            nested = rmp_sum([rmp_sum([p1, p2]), p3])
            flat = rmp_sum([p1, p2, p3])
            assert np.allclose(nested.accel, flat.accel, atol=1e-8)
            assert np.allclose(nested.metric, flat.metric, atol=1e-10)

    def test_empty_rejected(self):
        with pytest.raises(EmptyList):
            rmp_sum([])

    def test_mixed_dims_rejected(self):
        with pytest.raises(DimensionMismatch):
            rmp_sum([MotionPolicy([1.0], [[1.0]]), MotionPolicy([1.0, 2.0], np.eye(2))])


class TestPullbackSumCommute:
    def test_shared_jacobian(self):
        # combining upstairs then pulling back equals pulling back then combining
        rng = np.random.default_rng(6)
        for trial in range(30):
            dim = int(rng.integers(1, 4))
            pols = [random_policy(rng, dim, singular=(trial % 3 == 0)) for _ in range(3)]
            j = rng.normal(size=(dim, 6))
            a = pullback(rmp_sum(pols), j)
            b = rmp_sum([pullback(p, j) for p in pols])
            assert np.allclose(a.metric, b.metric, atol=1e-9)
            assert np.allclose(a.metric @ a.accel, b.metric @ b.accel, atol=1e-7)


class TestLyapunov:
    def test_instantaneous_energy_rate(self):
        # with constant scalar metrics the combined field dissipates the
        # metric-weighted energy at exactly -sum(w_i * beta_i) * |v|^2
        rng = np.random.default_rng(7)
        specs = [quadratic_spec(2, rng.normal(size=2), weight=float(rng.uniform(0.2, 2.0)),
                                stiffness=float(rng.uniform(0.5, 4.0)),
                                damping=float(rng.uniform(0.5, 4.0))) for _ in range(3)]
        for _ in range(200):
            x, v = rng.normal(size=2), rng.normal(size=2)
            combined = rmp_sum([evaluate(s, x, v) for s in specs])
            weights = [s.metric_fn(x, v)[0, 0] for s in specs]
            rate = float(v @ combined.metric @ combined.accel
                         + sum(w * (s.gradient(x) @ v) for w, s in zip(weights, specs)))
            expected = -sum(w * s.damping for w, s in zip(weights, specs)) * float(v @ v)
            assert rate <= 1e-9
            assert abs(rate - expected) < 1e-9

    def test_trajectory_energy_descends(self):
        specs = [quadratic_spec(2, [1.0, 0.0], 1.0, 4.0, 4.0),
                 quadratic_spec(2, [0.0, -1.0], 0.5, 2.0, 4.0),
                 quadratic_spec(2, [-1.0, 1.0], 2.0, 1.0, 4.0)]
        total_w = sum(s.metric_fn(None, None)[0, 0] for s in specs)

        def energy(x, v):
            return 0.5 * total_w * float(v @ v) + sum(
                s.metric_fn(x, v)[0, 0] * s.potential(x) for s in specs)

        x, v = np.array([2.0, 2.0]), np.array([0.0, 0.0])
        dt = 1e-3
        prev = energy(x, v)
        for _ in range(10_000):
            acc = rmp_sum([evaluate(s, x, v) for s in specs]).accel
            v = v + dt * acc
            x = x + dt * v
            cur = energy(x, v)
            assert cur <= prev + 1e-6   # slack covers integrator discretization
            prev = cur
        # settles at the weighted compromise of the three centers, at rest
        compromise = np.array([2.0, 1.0]) / 7.0
        # slowest mode decays at 2 - sqrt(2) per second; 10 s leaves ~5e-3
        assert np.linalg.norm(v) < 1e-2
        assert np.linalg.norm(x - compromise) < 1e-2


class TestSpectral:
    def test_descending_and_reconstructs(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            a = random_psd(rng, 4)
            dec = spectral(a)
            assert np.all(np.diff(dec.eigenvalues) <= 1e-12)
            assert np.all(dec.eigenvalues >= 0.0)
            recon = (dec.eigenvectors * dec.eigenvalues) @ dec.eigenvectors.T
            assert np.allclose(recon, a, atol=1e-9)

    def test_tiny_negative_clamped(self):
        dec = spectral(np.diag([1.0, -5e-11]))
        assert dec.eigenvalues[1] == 0.0

    def test_negative_rejected(self):
        with pytest.raises(BadParams):
            spectral(np.diag([1.0, -1.0]))

    def test_asymmetric_rejected(self):
        with pytest.raises(NotSymmetric):
            spectral(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_nonsquare_rejected(self):
        with pytest.raises(DimensionMismatch):
            spectral(np.zeros((2, 3)))


class TestMotionPolicyValidation:
    def test_metric_shape(self):
        with pytest.raises(DimensionMismatch):
            MotionPolicy([1.0, 2.0], np.eye(3))

    def test_attractor_params_validated(self):
        with pytest.raises(BadParams):
            AttractorParams(gain=-1.0)
