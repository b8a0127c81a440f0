import numpy as np
import pytest

from rmpadapt.geometry import Chart, CylinderChart, Pose, chart_apply, quat_exp, quat_mul, wrap_diff


def make_cylinder(radius: float = 0.4) -> CylinderChart:
    return CylinderChart(origin=np.zeros(3), axis=np.array([0.0, 0.0, 1.0]),
                         radius=radius, seam_reference=np.array([1.0, 0.0, 0.0]))


def perturb_pose(pose: Pose, xi: np.ndarray) -> Pose:
    """Move a pose along a twist direction: world position, body rotation."""
    return Pose(pose.position + xi[:3], quat_mul(pose.orientation, quat_exp(xi[3:])))


def fd_jacobian(chart: Chart, pose: Pose, eps: float = 1e-6) -> np.ndarray:
    """Central-difference chart Jacobian, wrapping circular axes."""
    jac = np.zeros((chart.dim, 6))
    for k in range(6):
        xi = np.zeros(6)
        xi[k] = eps
        diff = chart_apply(chart, perturb_pose(pose, xi)) - chart_apply(chart, perturb_pose(pose, -xi))
        for i, period in enumerate(chart.periods):
            if period is not None:
                diff[i] = wrap_diff(diff[i], period)
        jac[:, k] = diff / (2.0 * eps)
    return jac


def fd_gradient(potential, x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    g = np.zeros_like(np.asarray(x, dtype=float))
    for k in range(g.shape[0]):
        dx = np.zeros_like(g)
        dx[k] = eps
        g[k] = (potential(x + dx) - potential(x - dx)) / (2.0 * eps)
    return g


def random_pose_near_cylinder(rng: np.random.Generator, cyl: CylinderChart) -> Pose:
    """A pose in the operating region: off the axis, tool roughly inward."""
    theta = rng.uniform(-2.6, 2.6)
    z = rng.uniform(-0.3, 1.3)
    standoff = rng.uniform(-0.15, 0.5)
    position = cyl.surface_point(z, theta, standoff)
    ideal = cyl.frame_orientation(theta, rng.uniform(-1.2, 1.2))
    tilt = rng.uniform(-0.35, 0.35, size=3)
    return Pose(position, quat_mul(ideal, quat_exp(tilt)))


def random_psd(rng: np.random.Generator, dim: int, singular: bool = False) -> np.ndarray:
    b = rng.normal(size=(dim, dim))
    a = b @ b.T
    if singular:
        u, s, vt = np.linalg.svd(a)
        s[rng.integers(0, dim)] = 0.0
        a = (u * s) @ u.T
    return a


@pytest.fixture(scope="session")
def ref_scenario():
    from rmpadapt import reference_scenario
    return reference_scenario()


@pytest.fixture(scope="session")
def perfect_trace(ref_scenario):
    """Full six-task closed-loop run, shared read-only across test modules."""
    from rmpadapt import run_episode
    from rmpadapt.operators import make_operator
    return run_episode(ref_scenario, make_operator("perfect"), seed=0)
