import math

import numpy as np
import pytest

from gaitlab.errors import InvalidInputError, OutOfReachError
from gaitlab.pose import (
    AbstractPose,
    ArmJoints,
    JointPose,
    LegGeometry,
    LegJoints,
    abstract_to_joint,
    foot_fk,
    foot_ik,
    joint_to_abstract,
)


def test_zero_joints_map_to_zero_abstract():
    a = joint_to_abstract(JointPose())
    assert np.allclose(a.to_array(), 0.0)


def test_knee_retraction_value():
    j = JointPose(left_leg=LegJoints(knee_pitch=math.pi / 2))
    a = joint_to_abstract(j)
    assert abs(a.left_leg.eta - (1 - math.cos(math.pi / 4))) < 1e-12
    assert abs(a.left_leg.ly - math.pi / 4) < 1e-12


def test_leg_angle_arithmetic():
    j = JointPose(left_leg=LegJoints(hip_pitch=0.1, knee_pitch=0.2, ankle_pitch=-0.3))
    a = joint_to_abstract(j)
    assert abs(a.left_leg.ly - 0.2) < 1e-12
    assert abs(a.left_leg.fy - 0.0) < 1e-12


def test_inverse_of_knee_example():
    pose = AbstractPose()
    pose.left_leg.eta = 1 - math.cos(math.pi / 4)
    j = abstract_to_joint(pose)
    assert abs(j.left_leg.knee_pitch - math.pi / 2) < 1e-12


def test_zero_abstract_maps_to_zero_joints():
    j = abstract_to_joint(AbstractPose())
    a = joint_to_abstract(j)
    assert np.allclose(a.to_array(), 0.0)


def random_joint_pose(rng):
    def leg():
        return LegJoints(
            hip_yaw=rng.uniform(-1, 1),
            hip_roll=rng.uniform(-1, 1),
            hip_pitch=rng.uniform(-1, 1),
            knee_pitch=rng.uniform(0, math.pi - 0.01),
            ankle_pitch=rng.uniform(-1, 1),
            ankle_roll=rng.uniform(-1, 1),
        )

    def arm():
        return ArmJoints(
            shoulder_pitch=rng.uniform(-1, 1),
            shoulder_roll=rng.uniform(-1, 1),
            elbow_pitch=rng.uniform(0, math.pi - 0.01),
        )

    return JointPose(leg(), leg(), arm(), arm())


def joints_to_vector(j):
    out = []
    for leg in (j.left_leg, j.right_leg):
        out += [leg.hip_yaw, leg.hip_roll, leg.hip_pitch, leg.knee_pitch, leg.ankle_pitch, leg.ankle_roll]
    for arm in (j.left_arm, j.right_arm):
        out += [arm.shoulder_pitch, arm.shoulder_roll, arm.elbow_pitch]
    return np.array(out)


def test_round_trip_1000_random_poses():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        j = random_joint_pose(rng)
        j2 = abstract_to_joint(joint_to_abstract(j))
        assert np.max(np.abs(joints_to_vector(j) - joints_to_vector(j2))) < 1e-9


def test_abstract_round_trip():
    rng = np.random.default_rng(6)
    for _ in range(500):
        a = joint_to_abstract(random_joint_pose(rng))
        a2 = joint_to_abstract(abstract_to_joint(a))
        assert np.max(np.abs(a.to_array() - a2.to_array())) < 1e-9


def test_eta_monotone_in_knee():
    knees = np.linspace(0, math.pi - 1e-6, 200)
    etas = [
        joint_to_abstract(JointPose(left_leg=LegJoints(knee_pitch=k))).left_leg.eta
        for k in knees
    ]
    assert all(b > a for a, b in zip(etas, etas[1:]))


def test_eta_out_of_range_rejected():
    pose = AbstractPose()
    pose.right_leg.eta = 1.5
    with pytest.raises(InvalidInputError):
        abstract_to_joint(pose)


def mirror_joints(j):
    def mleg(leg):
        return LegJoints(
            hip_yaw=-leg.hip_yaw,
            hip_roll=-leg.hip_roll,
            hip_pitch=leg.hip_pitch,
            knee_pitch=leg.knee_pitch,
            ankle_pitch=leg.ankle_pitch,
            ankle_roll=-leg.ankle_roll,
        )

    def marm(arm):
        return ArmJoints(arm.shoulder_pitch, -arm.shoulder_roll, arm.elbow_pitch)

    return JointPose(mleg(j.right_leg), mleg(j.left_leg), marm(j.right_arm), marm(j.left_arm))


def mirror_abstract(a):
    arr = a.to_array().copy()
    out = np.empty_like(arr)
    out[0:6], out[6:12] = arr[6:12].copy(), arr[0:6].copy()
    out[12:15], out[15:18] = arr[15:18].copy(), arr[12:15].copy()
    for idx in (0, 2, 3, 6, 8, 9, 12, 15):  # lateral/yaw components flip sign
        out[idx] = -out[idx]
    return AbstractPose.from_array(out)


def test_mirror_commutes_with_abstract_map():
    rng = np.random.default_rng(9)
    for _ in range(300):
        j = random_joint_pose(rng)
        a1 = joint_to_abstract(mirror_joints(j))
        a2 = mirror_abstract(joint_to_abstract(j))
        assert np.max(np.abs(a1.to_array() - a2.to_array())) < 1e-12


def test_foot_ik_extended_leg():
    geom = LegGeometry(0.3, 0.3)
    hp, hr, knee = foot_ik([0, 0, -(0.6 - 1e-6)], geom)
    assert abs(knee) < 1e-2
    assert abs(hp) < 1e-2
    assert abs(hr) < 1e-12


def test_foot_ik_law_of_cosines_fold():
    geom = LegGeometry(0.3, 0.3)
    hp, hr, knee = foot_ik([0, 0, -0.3], geom)
    assert abs(knee - 2 * math.pi / 3) < 1e-9
    assert np.allclose(foot_fk(hp, hr, knee, geom), [0, 0, -0.3], atol=1e-9)


def test_foot_ik_lateral_offset():
    geom = LegGeometry(0.3, 0.3)
    target = np.array([0.0, 0.05, -0.5])
    hp, hr, knee = foot_ik(target, geom)
    assert abs(hr - math.atan2(0.05, 0.5)) < 1e-12
    assert np.allclose(foot_fk(hp, hr, knee, geom), target, atol=1e-9)


def test_foot_ik_matches_forward_kinematics():
    rng = np.random.default_rng(12)
    geom = LegGeometry(0.3, 0.25)
    lo = abs(geom.thigh - geom.shank) + 1e-6
    hi = geom.thigh + geom.shank - 1e-6
    n = 0
    while n < 1000:
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        if v[2] > -0.2:  # keep targets below the hip
            continue
        d = rng.uniform(lo + 1e-3, hi - 1e-3)
        target = v * d
        hp, hr, knee = foot_ik(target, geom)
        assert np.allclose(foot_fk(hp, hr, knee, geom), target, atol=1e-9)
        n += 1


def test_foot_ik_out_of_reach():
    geom = LegGeometry(0.3, 0.2)
    with pytest.raises(OutOfReachError, match="exceeds max reach"):
        foot_ik([0, 0, -0.6], geom)
    with pytest.raises(OutOfReachError, match="below min reach"):
        foot_ik([0, 0, -0.05], geom)


def test_leg_geometry_validation():
    with pytest.raises(InvalidInputError):
        LegGeometry(0.0, 0.3)
