"""Deterministic procedural motion data (a phase-driven humanoid "walk")."""

import numpy as np
from scipy.spatial.transform import Rotation

from .bvh import serialize_bvh
from .errors import InvalidParameterError
from .motion import Joint, Skeleton, WorldMotion

# depth-first order, so any prefix is a valid tree and BVH round trips keep indices
_HUMANOID = [
    ("Hips", None, (0.0, 0.0, 0.0)),
    ("Spine", "Hips", (0.0, 0.10, 0.0)),
    ("Spine1", "Spine", (0.0, 0.12, 0.0)),
    ("Spine2", "Spine1", (0.0, 0.12, 0.0)),
    ("Neck", "Spine2", (0.0, 0.15, 0.0)),
    ("Head", "Neck", (0.0, 0.10, 0.0)),
    ("LeftShoulder", "Spine2", (0.05, 0.12, 0.0)),
    ("LeftArm", "LeftShoulder", (0.12, 0.0, 0.0)),
    ("LeftForeArm", "LeftArm", (0.28, 0.0, 0.0)),
    ("LeftHand", "LeftForeArm", (0.25, 0.0, 0.0)),
    ("LeftHandIndex", "LeftHand", (0.08, 0.0, 0.0)),
    ("RightShoulder", "Spine2", (-0.05, 0.12, 0.0)),
    ("RightArm", "RightShoulder", (-0.12, 0.0, 0.0)),
    ("RightForeArm", "RightArm", (-0.28, 0.0, 0.0)),
    ("RightHand", "RightForeArm", (-0.25, 0.0, 0.0)),
    ("RightHandIndex", "RightHand", (-0.08, 0.0, 0.0)),
    ("LeftUpLeg", "Hips", (0.09, -0.05, 0.0)),
    ("LeftLeg", "LeftUpLeg", (0.0, -0.42, 0.0)),
    ("LeftFoot", "LeftLeg", (0.0, -0.42, 0.0)),
    ("LeftToe", "LeftFoot", (0.0, -0.05, 0.12)),
    ("RightUpLeg", "Hips", (-0.09, -0.05, 0.0)),
    ("RightLeg", "RightUpLeg", (0.0, -0.42, 0.0)),
    ("RightFoot", "RightLeg", (0.0, -0.42, 0.0)),
    ("RightToe", "RightFoot", (0.0, -0.05, 0.12)),
]

FOOT_NAMES = ("LeftFoot", "LeftToe", "RightFoot", "RightToe")


def humanoid_skeleton(joints=24):
    if joints < 1:
        raise InvalidParameterError("need at least one joint")
    rows = list(_HUMANOID[:joints])
    for t in range(joints - len(rows)):
        rows.append((f"Tail{t + 1}", "Hips" if t == 0 else f"Tail{t}", (0.0, -0.02, -0.1)))
    names = [r[0] for r in rows]
    sk = [Joint(n, None if p is None else names.index(p), off) for n, p, off in rows]
    feet = [names.index(n) for n in FOOT_NAMES if n in names]
    leaves = [k for k in range(len(sk)) if not any(j.parent == k for j in sk)]
    ends = [(k, (0.0, 0.05, 0.0)) for k in leaves]
    return Skeleton(tuple(sk), tuple(feet), tuple(ends))


def walk_motion(skeleton: Skeleton, frames=500, seed=1, fps=30.0):
    """A walk with slowly drifting cadence, amplitude and heading.

    Everything is derived from ``seed`` through one numpy Generator.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(frames) / fps
    f0 = rng.uniform(0.8, 1.4)
    mod_period = rng.uniform(4.0, 9.0)
    cadence = f0 * (1.0 + 0.2 * np.sin(2 * np.pi * t / mod_period + rng.uniform(0, 2 * np.pi)))
    phase = 2 * np.pi * np.cumsum(cadence) / fps
    amp = 1.0 + 0.35 * np.sin(2 * np.pi * t / rng.uniform(3.0, 7.0) + rng.uniform(0, 2 * np.pi))
    style = rng.uniform(0.6, 1.4, size=4)  # legs, arms, torso, bounce

    J = skeleton.num_joints
    euler = np.zeros((frames, J, 3))  # X, Y, Z degrees
    names = skeleton.names

    def put(name, axis, values):
        if name in names:
            euler[:, names.index(name), axis] += values

    s = np.sin(phase)
    c = np.cos(phase)
    legs, arms, torso, bounce = style
    put("LeftUpLeg", 0, -28 * legs * amp * s)
    put("RightUpLeg", 0, 28 * legs * amp * s)
    put("LeftLeg", 0, 35 * legs * amp * np.maximum(0.0, np.sin(phase + np.pi / 2)))
    put("RightLeg", 0, 35 * legs * amp * np.maximum(0.0, np.sin(phase - np.pi / 2)))
    put("LeftFoot", 0, 12 * legs * c)
    put("RightFoot", 0, -12 * legs * c)
    put("LeftArm", 1, 25 * arms * amp * s)
    put("RightArm", 1, 25 * arms * amp * s)
    put("LeftArm", 2, -70.0)
    put("RightArm", 2, 70.0)
    put("LeftForeArm", 1, 20 * arms * (1 + 0.5 * np.sin(phase + 1.0)))
    put("RightForeArm", 1, -20 * arms * (1 + 0.5 * np.sin(phase + 1.0 + np.pi)))
    put("Spine", 1, 6 * torso * s)
    put("Spine1", 0, 4 * torso * np.sin(2 * phase))
    put("Neck", 0, 3 * torso * np.sin(2 * phase + 0.5))
    put("Head", 1, -5 * torso * s)
    for k, name in enumerate(names):
        if name.startswith("Tail"):
            euler[:, k, 1] += 15 * np.sin(phase - 0.6 * k)

    # low-frequency wobble on every joint so windows are not exact repeats
    for k in range(J):
        for axis in range(3):
            fr = rng.uniform(0.05, 0.4, size=2)
            ph = rng.uniform(0, 2 * np.pi, size=2)
            euler[:, k, axis] += 3.0 * np.sin(2 * np.pi * fr[:, None] * t + ph[:, None]).sum(0)

    heading = np.deg2rad(20.0) * np.sin(2 * np.pi * t / rng.uniform(8.0, 16.0))
    euler[:, 0, 1] += np.rad2deg(heading)

    speed = 0.7 * legs * cadence * amp
    step = speed / fps
    root = np.zeros((frames, 3))
    root[1:, 0] = np.cumsum(step[1:] * np.sin(heading[1:]))
    root[1:, 2] = np.cumsum(step[1:] * np.cos(heading[1:]))
    root[:, 1] = 0.95 + 0.025 * bounce * np.sin(2 * phase)

    zyx = euler[..., [2, 1, 0]].reshape(-1, 3)
    xyzw = Rotation.from_euler("ZYX", zyx, degrees=True).as_quat()
    quats = xyzw[:, [3, 0, 1, 2]].reshape(frames, J, 4)
    quats /= np.linalg.norm(quats, axis=-1, keepdims=True)
    return WorldMotion(root, quats)


def fixture(joints=24, frames=500, seed=1, fps=30.0):
    sk = humanoid_skeleton(joints)
    return sk, walk_motion(sk, frames, seed, fps)


def fixture_bvh(joints=24, frames=500, seed=1, fps=30.0) -> bytes:
    sk, w = fixture(joints, frames, seed, fps)
    return serialize_bvh(sk, w, fps)
