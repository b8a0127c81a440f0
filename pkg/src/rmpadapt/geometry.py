"""Poses, twists, quaternion helpers and the cylinder chart family.

Conventions used throughout the package:

* quaternions are unit, ordered ``[w, x, y, z]``, body-to-world;
* a twist is ``(linear, angular)`` with the linear velocity in the world
  frame and the angular velocity in the body frame, matching the
  integrator update ``position += linear*dt``,
  ``orientation = orientation * exp(angular*dt)``;
* chart Jacobians are therefore ``d(coords)/d(world linear, body angular)``,
  shape ``(dim, 6)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, SingularPose

AXIS_DISTANCE_EPS = 1e-6  # below this distance to the cylinder axis the charts are undefined


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # unrolled 3-vector cross product; np.cross pays dispatch overhead that
    # dominates the control loop when called hundreds of times per tick
    return np.array([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


# ---------------------------------------------------------------- quaternions

def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise ValueError("cannot normalize a zero quaternion")
    q = q / n
    # canonical sign keeps traces reproducible across equivalent inputs
    if q[0] < 0.0:
        q = -q
    return q


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_conj(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate a body-frame vector into the world frame."""
    qv = np.asarray(q[1:4])
    t = 2.0 * _cross(qv, v)
    return np.asarray(v) + q[0] * t + _cross(qv, t)


def quat_exp(rotvec: np.ndarray) -> np.ndarray:
    """Unit quaternion for a rotation vector (axis * angle)."""
    rotvec = np.asarray(rotvec, dtype=float)
    angle = np.linalg.norm(rotvec)
    half = 0.5 * angle
    if angle < 1e-12:
        # second-order series; keeps exp exact to float precision near zero
        w = 1.0 - half * half / 2.0
        xyz = 0.5 * rotvec
    else:
        w = np.cos(half)
        xyz = np.sin(half) / angle * rotvec
    return quat_normalize(np.concatenate(([w], xyz)))


def quat_log(q: np.ndarray) -> np.ndarray:
    """Rotation vector of a unit quaternion, angle in [0, pi]."""
    q = quat_normalize(q)
    s = np.linalg.norm(q[1:4])
    if s < 1e-12:
        return 2.0 * q[1:4]
    angle = 2.0 * np.arctan2(s, q[0])
    return angle / s * q[1:4]


def quat_from_matrix(m: np.ndarray) -> np.ndarray:
    """Shepperd's method, branch on the largest diagonal term."""
    m = np.asarray(m, dtype=float)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0.0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (m[2, 1] - m[1, 2]) / s,
                      (m[0, 2] - m[2, 0]) / s,
                      (m[1, 0] - m[0, 1]) / s])
    elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
        s = np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        q = np.array([(m[2, 1] - m[1, 2]) / s,
                      0.25 * s,
                      (m[0, 1] + m[1, 0]) / s,
                      (m[0, 2] + m[2, 0]) / s])
    elif m[1, 1] >= m[2, 2]:
        s = np.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        q = np.array([(m[0, 2] - m[2, 0]) / s,
                      (m[0, 1] + m[1, 0]) / s,
                      0.25 * s,
                      (m[1, 2] + m[2, 1]) / s])
    else:
        s = np.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
        q = np.array([(m[1, 0] - m[0, 1]) / s,
                      (m[0, 2] + m[2, 0]) / s,
                      (m[1, 2] + m[2, 1]) / s,
                      0.25 * s])
    return quat_normalize(q)


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def orientation_error(qa: np.ndarray, qb: np.ndarray) -> float:
    """Geodesic angle between two orientations, in [0, pi]."""
    d = abs(float(np.dot(quat_normalize(qa), quat_normalize(qb))))
    return 2.0 * float(np.arccos(min(1.0, d)))


def wrap_diff(delta, period: float):
    """Map a difference on a circle of the given period into (-period/2, period/2]."""
    half = 0.5 * period
    return half - np.mod(half - delta, period)


# ------------------------------------------------------------- pose and twist

@dataclass(frozen=True, eq=False)
class Pose:
    position: np.ndarray
    orientation: np.ndarray  # unit quaternion [w, x, y, z]

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3).copy())
        object.__setattr__(self, "orientation", quat_normalize(self.orientation))

    def rotate(self, v_body: np.ndarray) -> np.ndarray:
        return quat_rotate(self.orientation, v_body)


@dataclass(frozen=True, eq=False)
class Twist:
    linear: np.ndarray   # m/s, world frame
    angular: np.ndarray  # rad/s, body frame

    def __post_init__(self):
        object.__setattr__(self, "linear", np.asarray(self.linear, dtype=float).reshape(3).copy())
        object.__setattr__(self, "angular", np.asarray(self.angular, dtype=float).reshape(3).copy())

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.linear, self.angular])

    @staticmethod
    def from_vector(v: np.ndarray) -> "Twist":
        v = np.asarray(v, dtype=float).reshape(6)
        return Twist(v[:3], v[3:])


ZERO_TWIST = Twist(np.zeros(3), np.zeros(3))


# -------------------------------------------------------------------- charts

@dataclass(frozen=True)
class Chart:
    """A differentiable map from poses to manifold coordinates.

    ``periods[i]`` is the wrap period of output axis ``i`` (None for
    non-circular axes); consumers use it to take wrapped differences.
    """

    name: str
    dim: int
    map_fn: Callable[[Pose], np.ndarray]
    jacobian_fn: Callable[[Pose], np.ndarray]
    periods: tuple = ()

    def __post_init__(self):
        if not self.periods:
            object.__setattr__(self, "periods", tuple([None] * self.dim))
        if len(self.periods) != self.dim:
            raise DimensionMismatch(f"chart '{self.name}': {len(self.periods)} periods for dim {self.dim}")


def chart_apply(chart: Chart, pose: Pose) -> np.ndarray:
    x = np.asarray(chart.map_fn(pose), dtype=float).reshape(-1)
    if x.shape[0] != chart.dim:
        raise DimensionMismatch(f"chart '{chart.name}' returned {x.shape[0]} coords, expected {chart.dim}")
    return x


def chart_jacobian(chart: Chart, pose: Pose) -> np.ndarray:
    j = np.asarray(chart.jacobian_fn(pose), dtype=float)
    if j.shape != (chart.dim, 6):
        raise DimensionMismatch(f"chart '{chart.name}' jacobian shape {j.shape}, expected {(chart.dim, 6)}")
    return j


class SurfaceFrame(NamedTuple):
    """Local cylinder quantities at the foot point of a position."""
    z: float        # height along the axis
    theta: float    # chart angle in (-pi, pi], zero at the seam reference
    s: float        # arc length radius*theta
    rho: float      # distance to the axis
    d: float        # distance to the surface (rho - radius)
    normal: np.ndarray    # outward unit normal
    tangent: np.ndarray   # azimuthal unit tangent (axis x normal)


def _basis_twists() -> np.ndarray:
    return np.eye(6)


@dataclass(frozen=True, eq=False)
class CylinderChart:
    """Chart family for an inspected cylinder.

    The surface chart ``(z, s, phi)`` doubles as the operator input
    manifold; sibling charts expose the coordinates needed by the
    individual policies.  The angular seam (chart discontinuity) sits
    diametrically opposite ``seam_reference``.
    """

    origin: np.ndarray
    axis: np.ndarray
    radius: float
    seam_reference: np.ndarray          # unit vector, chart angle zero
    tool_axis: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    tool_up: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    up_reference: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float).reshape(3).copy())
        for name in ("axis", "seam_reference", "tool_axis", "tool_up", "up_reference"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(3)
            n = np.linalg.norm(v)
            if n < 1e-12:
                raise ValueError(f"{name} must be a nonzero vector")
            object.__setattr__(self, name, v / n)
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")
        # seam reference must have a component perpendicular to the axis
        e1 = self.seam_reference - np.dot(self.seam_reference, self.axis) * self.axis
        n = np.linalg.norm(e1)
        if n < 1e-9:
            raise ValueError("seam_reference is parallel to the cylinder axis")
        object.__setattr__(self, "seam_reference", e1 / n)

    # ------------------------------------------------------------- frame math

    @property
    def _e2(self) -> np.ndarray:
        return _cross(self.axis, self.seam_reference)

    def frame_at(self, position: np.ndarray) -> SurfaceFrame:
        rel = np.asarray(position, dtype=float) - self.origin
        z = float(np.dot(self.axis, rel))
        r_vec = rel - z * self.axis
        rho = float(np.linalg.norm(r_vec))
        if rho < AXIS_DISTANCE_EPS:
            raise SingularPose(f"position within {AXIS_DISTANCE_EPS} m of the cylinder axis")
        normal = r_vec / rho
        theta = float(np.arctan2(np.dot(normal, self._e2), np.dot(normal, self.seam_reference)))
        tangent = _cross(self.axis, normal)
        return SurfaceFrame(z=z, theta=theta, s=self.radius * theta, rho=rho,
                            d=rho - self.radius, normal=normal, tangent=tangent)

    def surface_point(self, z: float, theta: float, standoff: float = 0.0) -> np.ndarray:
        n = np.cos(theta) * self.seam_reference + np.sin(theta) * self._e2
        return self.origin + z * self.axis + (self.radius + standoff) * n

    def frame_orientation(self, theta: float, tool_angle: float) -> np.ndarray:
        """Orientation with the tool axis on -normal and the tool up rotated
        by ``tool_angle`` about the normal from the projected up reference."""
        n = np.cos(theta) * self.seam_reference + np.sin(theta) * self._e2
        z_p = self.up_reference - np.dot(self.up_reference, n) * n
        nz = np.linalg.norm(z_p)
        if nz < 1e-9:
            raise SingularPose("up reference is parallel to the surface normal")
        z_p = z_p / nz
        u_dir = np.cos(tool_angle) * z_p + np.sin(tool_angle) * _cross(n, z_p)
        w_a = -n
        w_u = u_dir - np.dot(u_dir, w_a) * w_a
        w_u = w_u / np.linalg.norm(w_u)
        world = np.column_stack([w_a, w_u, _cross(w_a, w_u)])
        body = np.column_stack([self.tool_axis, self.tool_up,
                                _cross(self.tool_axis, self.tool_up)])
        return quat_from_matrix(world @ body.T)

    def target_pose(self, z: float, theta: float, standoff: float, tool_angle: float) -> Pose:
        return Pose(self.surface_point(z, theta, standoff), self.frame_orientation(theta, tool_angle))

    # -------------------------------------------------- differential building blocks

    def _linear_rows(self, fr: SurfaceFrame):
        row_z = np.concatenate([self.axis, np.zeros(3)])
        row_s = np.concatenate([(self.radius / fr.rho) * fr.tangent, np.zeros(3)])
        row_d = np.concatenate([fr.normal, np.zeros(3)])
        return row_z, row_s, row_d

    def _phi_terms(self, pose: Pose, fr: SurfaceFrame):
        u = pose.rotate(self.tool_up)
        n = fr.normal
        z_p = self.up_reference - np.dot(self.up_reference, n) * n
        u_p = u - np.dot(u, n) * n
        b = float(np.dot(_cross(z_p, u_p), n))
        c = float(np.dot(z_p, u_p))
        if b * b + c * c < 1e-18:
            raise SingularPose("tool up axis is parallel to the surface normal")
        return u, n, z_p, u_p, b, c

    def _phi_value(self, pose: Pose, fr: SurfaceFrame) -> float:
        *_, b, c = self._phi_terms(pose, fr)
        return float(np.arctan2(b, c))

    def _phi_row(self, pose: Pose, fr: SurfaceFrame) -> np.ndarray:
        u, n, z_p, u_p, b, c = self._phi_terms(pose, fr)
        rot = quat_to_matrix(pose.orientation)
        row = np.zeros(6)
        for k, xi in enumerate(_basis_twists()):
            dp, dw_body = xi[:3], xi[3:]
            dn = fr.tangent * (np.dot(fr.tangent, dp) / fr.rho)
            dw_world = rot @ dw_body
            du = _cross(dw_world, u)
            dz_p = -(np.dot(self.up_reference, dn) * n + np.dot(self.up_reference, n) * dn)
            du_p = du - (np.dot(du, n) + np.dot(u, dn)) * n - np.dot(u, n) * dn
            db = float(np.dot(_cross(dz_p, u_p) + _cross(z_p, du_p), n)
                       + np.dot(_cross(z_p, u_p), dn))
            dc = float(np.dot(dz_p, u_p) + np.dot(z_p, du_p))
            row[k] = (c * db - b * dc) / (b * b + c * c)
        return row

    def _alignment_terms(self, pose: Pose, fr: SurfaceFrame):
        e = pose.rotate(self.tool_axis)
        w = -fr.normal
        c = float(np.clip(np.dot(e, w), -1.0, 1.0))
        if c <= -1.0 + 1e-9:
            raise SingularPose("tool axis anti-aligned with the inward normal")
        return e, w, c

    @staticmethod
    def _kappa(c: float):
        # kappa = theta/sin(theta) expressed through c = cos(theta), with its derivative
        if c > 1.0 - 1e-6:
            t2 = 2.0 * (1.0 - c)
            kappa = 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0
            dkappa = -(1.0 / 3.0 + 2.0 * t2 / 15.0)
        else:
            s2 = 1.0 - c * c
            kappa = np.arccos(c) / np.sqrt(s2)
            dkappa = (c * kappa - 1.0) / s2
        return float(kappa), float(dkappa)

    def _alignment_value(self, pose: Pose, fr: SurfaceFrame) -> np.ndarray:
        e, _, c = self._alignment_terms(pose, fr)
        kappa, _ = self._kappa(c)
        return kappa * np.array([np.dot(e, fr.tangent), np.dot(e, self.axis)])

    def _alignment_rows(self, pose: Pose, fr: SurfaceFrame) -> np.ndarray:
        e, w, c = self._alignment_terms(pose, fr)
        kappa, dkappa = self._kappa(c)
        g = np.array([np.dot(e, fr.tangent), np.dot(e, self.axis)])
        rot = quat_to_matrix(pose.orientation)
        rows = np.zeros((2, 6))
        for k, xi in enumerate(_basis_twists()):
            dp, dw_body = xi[:3], xi[3:]
            dn = fr.tangent * (np.dot(fr.tangent, dp) / fr.rho)
            dt = -fr.normal * (np.dot(fr.tangent, dp) / fr.rho)
            de = _cross(rot @ dw_body, e)
            dw = -dn
            dc = float(np.dot(de, w) + np.dot(e, dw))
            dg = np.array([np.dot(de, fr.tangent) + np.dot(e, dt), np.dot(de, self.axis)])
            rows[:, k] = dkappa * dc * g + kappa * dg
        return rows

    # ------------------------------------------------------------ chart objects

    def surface_chart(self) -> Chart:
        """Operator input manifold: (z, arc length s, tool rotation phi)."""
        def _map(pose: Pose) -> np.ndarray:
            fr = self.frame_at(pose.position)
            return np.array([fr.z, fr.s, self._phi_value(pose, fr)])

        def _jac(pose: Pose) -> np.ndarray:
            fr = self.frame_at(pose.position)
            row_z, row_s, _ = self._linear_rows(fr)
            return np.vstack([row_z, row_s, self._phi_row(pose, fr)])

        return Chart("cylinder_surface", 3, _map, _jac,
                     (None, 2.0 * np.pi * self.radius, 2.0 * np.pi))

    def position_chart(self) -> Chart:
        """Inspection position manifold: (z, s, distance to surface)."""
        def _map(pose: Pose) -> np.ndarray:
            fr = self.frame_at(pose.position)
            return np.array([fr.z, fr.s, fr.d])

        def _jac(pose: Pose) -> np.ndarray:
            fr = self.frame_at(pose.position)
            return np.vstack(self._linear_rows(fr))

        return Chart("cylinder_position", 3, _map, _jac,
                     (None, 2.0 * np.pi * self.radius, None))

    def distance_chart(self) -> Chart:
        def _map(pose: Pose) -> np.ndarray:
            return np.array([self.frame_at(pose.position).d])

        def _jac(pose: Pose) -> np.ndarray:
            fr = self.frame_at(pose.position)
            return np.concatenate([fr.normal, np.zeros(3)]).reshape(1, 6)

        return Chart("surface_distance", 1, _map, _jac)

    def rotation_chart(self) -> Chart:
        """Tool rotation about the surface normal, alone."""
        def _map(pose: Pose) -> np.ndarray:
            fr = self.frame_at(pose.position)
            return np.array([self._phi_value(pose, fr)])

        def _jac(pose: Pose) -> np.ndarray:
            fr = self.frame_at(pose.position)
            return self._phi_row(pose, fr).reshape(1, 6)

        return Chart("tool_rotation", 1, _map, _jac, (2.0 * np.pi,))

    def alignment_chart(self) -> Chart:
        """Tool-axis misalignment from the inward normal as a 2-D rotation
        vector in the (tangent, axis) basis; its norm is the tilt angle."""
        def _map(pose: Pose) -> np.ndarray:
            fr = self.frame_at(pose.position)
            return self._alignment_value(pose, fr)

        def _jac(pose: Pose) -> np.ndarray:
            fr = self.frame_at(pose.position)
            return self._alignment_rows(pose, fr)

        return Chart("normal_alignment", 2, _map, _jac)
