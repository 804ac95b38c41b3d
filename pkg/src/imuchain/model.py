"""Assembled kinematic model: joints, link transforms, FK / IK, export.

Joint i contributes offset_i (fixed transform from the previous joint's
rotating frame) followed by a rotation about axis_i.  An IMU-pair estimate
becomes the offset of the next joint via the known mounting geometry of
the two sensors.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, UnreachableTargetError
from .estimator import RelativePoseEstimate
from .transforms import (
    RigidTransform,
    axis_angle_rotation,
    rotation_to_rpy,
    rpy_to_rotation,
)


@dataclass(frozen=True)
class JointModel:
    """Axis in the joint's rotating frame plus the offset leading to it."""

    axis: np.ndarray
    offset: RigidTransform = field(default_factory=RigidTransform)
    covariance_summary: float = None  # sqrt(tr Sigma_r) of the estimate, m

    def __post_init__(self):
        a = np.asarray(self.axis, dtype=float)
        if a.shape != (3,) or abs(np.linalg.norm(a) - 1.0) > 1e-9:
            raise InvalidInputError("joint axis must be a unit 3-vector")
        object.__setattr__(self, "axis", a)

    def to_dict(self) -> dict:
        return {
            "axis": self.axis.tolist(),
            "offset": self.offset.to_dict(),
            "covariance_summary": self.covariance_summary,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "JointModel":
        return cls(
            axis=np.asarray(d["axis"], dtype=float),
            offset=RigidTransform.from_dict(d["offset"]),
            covariance_summary=d.get("covariance_summary"),
        )


@dataclass(frozen=True)
class EstimatedModel:
    joints: tuple
    end_effector: RigidTransform = field(default_factory=RigidTransform)

    def __post_init__(self):
        object.__setattr__(self, "joints", tuple(self.joints))
        if not self.joints:
            raise InvalidInputError("model needs at least one joint")

    @property
    def n_joints(self) -> int:
        return len(self.joints)

    def to_dict(self) -> dict:
        return {
            "joints": [j.to_dict() for j in self.joints],
            "end_effector": self.end_effector.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EstimatedModel":
        return cls(
            joints=tuple(JointModel.from_dict(j) for j in d["joints"]),
            end_effector=RigidTransform.from_dict(d["end_effector"])
            if "end_effector" in d else RigidTransform(),
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "EstimatedModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def compose_joint_pose(estimate, imu_a_pose: RigidTransform,
                       imu_p_pose: RigidTransform) -> RigidTransform:
    """Joint-to-joint transform from an IMU-pair estimate.

    imu_a_pose is IMU A's mounting pose in the upstream joint's rotating
    frame; imu_p_pose is IMU P's pose in the downstream joint's frame.
    """
    if isinstance(estimate, RelativePoseEstimate):
        t_ap = RigidTransform(estimate.rotation, estimate.r_hat)
    else:
        t_ap = estimate
    return imu_a_pose @ t_ap @ imu_p_pose.inverse()


def forward_kinematics(model: EstimatedModel, angles) -> RigidTransform:
    """End-effector pose for the given joint angles."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if angles.shape != (model.n_joints,):
        raise InvalidInputError(
            "expected %d joint angles, got %s" % (model.n_joints, angles.shape)
        )
    pose = RigidTransform()
    for joint, th in zip(model.joints, angles):
        pose = pose @ joint.offset @ RigidTransform(
            axis_angle_rotation(joint.axis, float(th)), np.zeros(3)
        )
    return pose @ model.end_effector


def _position_jacobian(model, angles):
    """Columns z_i x (p_ee - p_i) for each revolute joint."""
    pose = RigidTransform()
    axes = []
    origins = []
    for joint, th in zip(model.joints, angles):
        pose = pose @ joint.offset
        axes.append(pose.rotation @ joint.axis)
        origins.append(pose.translation)
        pose = pose @ RigidTransform(
            axis_angle_rotation(joint.axis, float(th)), np.zeros(3)
        )
    p_ee = (pose @ model.end_effector).translation
    jac = np.stack(
        [np.cross(ax, p_ee - og) for ax, og in zip(axes, origins)], axis=1
    )
    return jac, p_ee


def solve_ik(model: EstimatedModel, target, tol: float = 1e-4,
             max_iters: int = 200, seed: int = 0) -> np.ndarray:
    """Joint angles whose forward kinematics reach the target position.

    Damped least squares on the position error, with a handful of random
    restarts when an attempt stalls.  Raises UnreachableTargetError with
    the best angles and residual when no attempt gets within tol.
    """
    target = np.asarray(target, dtype=float)
    if target.shape != (3,):
        raise InvalidInputError("target must be a 3-vector")
    rng = np.random.default_rng(seed)
    best_angles = None
    best_err = np.inf
    n = model.n_joints
    starts = [np.zeros(n)] + [rng.uniform(-np.pi, np.pi, n) for _ in range(4)]
    iters_per_start = max(1, max_iters // len(starts))
    for theta0 in starts:
        theta = theta0.copy()
        lam = 1e-3
        jac, p = _position_jacobian(model, theta)
        err = target - p
        for _ in range(iters_per_start):
            step = jac.T @ np.linalg.solve(
                jac @ jac.T + lam * lam * np.eye(3), err
            )
            trial = theta + step
            jac_t, p_t = _position_jacobian(model, trial)
            err_t = target - p_t
            if np.linalg.norm(err_t) < np.linalg.norm(err):
                theta, jac, p, err = trial, jac_t, p_t, err_t
                lam = max(lam * 0.5, 1e-6)
            else:
                lam = min(lam * 4.0, 1e3)
            if np.linalg.norm(err) < tol:
                break
        res = float(np.linalg.norm(err))
        if res < best_err:
            best_err = res
            best_angles = theta
        if best_err < tol:
            return np.mod(best_angles + np.pi, 2.0 * np.pi) - np.pi
    raise UnreachableTargetError(
        "inverse kinematics stopped %.4g m from the target" % best_err,
        angles=np.mod(best_angles + np.pi, 2.0 * np.pi) - np.pi,
        residual=best_err,
    )


def model_from_chain(chain, end_effector=None) -> EstimatedModel:
    """Ground-truth model of a simulated chain (for checks and demos)."""
    joints = tuple(
        JointModel(axis=link.joint_axis, offset=link.joint_transform)
        for link in chain.links
    )
    return EstimatedModel(
        joints=joints,
        end_effector=chain.end_effector if end_effector is None else end_effector,
    )


def to_urdf(model: EstimatedModel, name: str = "estimated_chain") -> str:
    """URDF-flavored XML with the same content as the JSON form.

    Covariance summaries ride along as an <uncertainty> child of each
    joint, which standard URDF parsers ignore.
    """
    robot = ET.Element("robot", name=name)
    ET.SubElement(robot, "link", name="link0")
    for i, joint in enumerate(model.joints):
        child = "link%d" % (i + 1)
        ET.SubElement(robot, "link", name=child)
        j = ET.SubElement(robot, "joint", name="joint%d" % (i + 1),
                          type="revolute")
        ET.SubElement(j, "parent", link="link%d" % i)
        ET.SubElement(j, "child", link=child)
        rpy = rotation_to_rpy(joint.offset.rotation)
        ET.SubElement(
            j, "origin",
            xyz=" ".join("%.17g" % v for v in joint.offset.translation),
            rpy=" ".join("%.17g" % v for v in rpy),
        )
        ET.SubElement(j, "axis", xyz=" ".join("%.17g" % v for v in joint.axis))
        if joint.covariance_summary is not None:
            ET.SubElement(j, "uncertainty",
                          position="%.17g" % joint.covariance_summary)
    ET.SubElement(robot, "link", name="end_effector")
    j = ET.SubElement(robot, "joint", name="end_effector_joint", type="fixed")
    ET.SubElement(j, "parent", link="link%d" % len(model.joints))
    ET.SubElement(j, "child", link="end_effector")
    rpy = rotation_to_rpy(model.end_effector.rotation)
    ET.SubElement(
        j, "origin",
        xyz=" ".join("%.17g" % v for v in model.end_effector.translation),
        rpy=" ".join("%.17g" % v for v in rpy),
    )
    ET.indent(robot)
    return ET.tostring(robot, encoding="unicode") + "\n"


def from_urdf(text: str) -> EstimatedModel:
    """Parse the XML produced by to_urdf back into a model."""
    root = ET.fromstring(text)
    joints = []
    end_effector = RigidTransform()
    for j in root.iter("joint"):
        origin = j.find("origin")
        xyz = np.array([float(v) for v in origin.get("xyz").split()])
        rpy = np.array([float(v) for v in origin.get("rpy").split()])
        pose = RigidTransform(rpy_to_rotation(rpy), xyz)
        if j.get("type") == "fixed":
            end_effector = pose
            continue
        axis = np.array([float(v) for v in j.find("axis").get("xyz").split()])
        unc = j.find("uncertainty")
        joints.append(
            JointModel(
                axis=axis / np.linalg.norm(axis), offset=pose,
                covariance_summary=float(unc.get("position"))
                if unc is not None else None,
            )
        )
    return EstimatedModel(joints=tuple(joints), end_effector=end_effector)
