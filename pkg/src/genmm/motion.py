"""Skeleton and motion types, feature-space conversion and forward kinematics.

Feature rows use a fixed column layout::

    [ joint 0 6D | joint 1 6D | ... | root displacement (3) | contacts (C) ]
"""

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from . import rotations
from .errors import InvalidInputError

Q = 6  # rotation features per joint


@dataclass(frozen=True)
class Joint:
    name: str
    parent: Optional[int]
    offset: Tuple[float, float, float]


@dataclass(frozen=True, eq=False)
class Skeleton:
    joints: Tuple[Joint, ...]
    foot_joints: Tuple[int, ...] = ()
    # BVH End Site offsets keyed by joint index; kept for export only
    end_sites: Tuple[Tuple[int, Tuple[float, float, float]], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "joints", tuple(self.joints))
        object.__setattr__(self, "foot_joints", tuple(int(i) for i in self.foot_joints))
        object.__setattr__(self, "end_sites", tuple(self.end_sites))
        if not self.joints:
            raise InvalidInputError("skeleton has no joints")
        if self.joints[0].parent is not None:
            raise InvalidInputError("joint 0 must be the root")
        for k, j in enumerate(self.joints[1:], start=1):
            if j.parent is None:
                raise InvalidInputError(f"joint {j.name!r} has no parent; only joint 0 may be root")
            if not 0 <= j.parent < k:
                raise InvalidInputError(f"joint {j.name!r} is not topologically ordered")
        if len(set(self.foot_joints)) != len(self.foot_joints):
            raise InvalidInputError("duplicate foot joints")
        for f in self.foot_joints:
            if not 0 <= f < len(self.joints):
                raise InvalidInputError(f"foot joint index {f} out of range")

    @property
    def num_joints(self):
        return len(self.joints)

    @property
    def num_contacts(self):
        return len(self.foot_joints)

    @property
    def names(self):
        return [j.name for j in self.joints]

    @property
    def parents(self):
        return [-1 if j.parent is None else j.parent for j in self.joints]

    @property
    def offsets(self):
        return np.array([j.offset for j in self.joints], dtype=np.float64)

    def index(self, name):
        for k, j in enumerate(self.joints):
            if j.name == name:
                return k
        raise KeyError(name)

    def children(self, k):
        return [i for i, j in enumerate(self.joints) if j.parent == k]

    def chain_length(self, k):
        """Summed bone length from the root down to joint k."""
        total = 0.0
        while self.joints[k].parent is not None:
            total += float(np.linalg.norm(self.joints[k].offset))
            k = self.joints[k].parent
        return total

    def leg_length(self):
        if not self.foot_joints:
            return 0.0
        return max(self.chain_length(f) for f in self.foot_joints)

    def feature_width(self):
        return self.num_joints * Q + 3 + self.num_contacts


@dataclass(frozen=True, eq=False)
class WorldMotion:
    root_positions: np.ndarray  # (H, 3)
    rotations: np.ndarray  # (H, J, 4) local joint quaternions, wxyz

    def __post_init__(self):
        pos = np.asarray(self.root_positions, dtype=np.float64)
        rot = np.asarray(self.rotations, dtype=np.float64)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise InvalidInputError(f"root positions must be (H, 3), got {pos.shape}")
        if rot.ndim != 3 or rot.shape[2] != 4 or rot.shape[0] != pos.shape[0]:
            raise InvalidInputError(f"rotations must be (H, J, 4), got {rot.shape}")
        if rot.size and np.any(np.abs(np.linalg.norm(rot, axis=-1) - 1.0) > rotations.UNIT_TOL):
            raise InvalidInputError("rotations must be unit quaternions")
        object.__setattr__(self, "root_positions", pos)
        object.__setattr__(self, "rotations", rotations.canonicalize(rot))

    @property
    def frames(self):
        return self.root_positions.shape[0]

    @property
    def num_joints(self):
        return self.rotations.shape[1]


@dataclass(frozen=True, eq=False)
class MotionFeatures:
    rows: np.ndarray  # (H, J*Q + 3 + C)
    num_joints: int
    num_contacts: int
    initial_root_position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    fps: float = 30.0

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2:
            raise InvalidInputError("feature rows must be a 2D matrix")
        width = self.num_joints * Q + 3 + self.num_contacts
        if rows.shape[1] != width:
            raise InvalidInputError(
                f"expected {width} feature columns for {self.num_joints} joints and "
                f"{self.num_contacts} contacts, got {rows.shape[1]}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "initial_root_position",
                           np.asarray(self.initial_root_position, dtype=np.float64).reshape(3))

    @property
    def frames(self):
        return self.rows.shape[0]

    @property
    def width(self):
        return self.rows.shape[1]

    @property
    def rotation_columns(self):
        return np.arange(self.num_joints * Q)

    @property
    def velocity_columns(self):
        start = self.num_joints * Q
        return np.arange(start, start + 3)

    @property
    def contact_columns(self):
        start = self.num_joints * Q + 3
        return np.arange(start, start + self.num_contacts)

    def rotations_6d(self):
        return self.rows[:, : self.num_joints * Q].reshape(self.frames, self.num_joints, Q)

    def velocities(self):
        return self.rows[:, self.velocity_columns]

    def contacts(self):
        return self.rows[:, self.contact_columns]

    def binary_contacts(self, threshold=0.5):
        return self.contacts() >= threshold

    def with_rows(self, rows):
        return replace(self, rows=rows)


def joint_columns(j):
    return np.arange(j * Q, (j + 1) * Q)


def forward_kinematics(w: WorldMotion, s: Skeleton, return_rotations=False):
    """World-space joint positions (H, J, 3)."""
    if w.num_joints != s.num_joints:
        raise InvalidInputError(
            f"motion has {w.num_joints} joints but skeleton has {s.num_joints}")
    local = rotations.quat_to_matrix(w.rotations)  # (H, J, 3, 3)
    offsets = s.offsets
    H, J = w.frames, s.num_joints
    glob_rot = np.empty((H, J, 3, 3))
    pos = np.empty((H, J, 3))
    glob_rot[:, 0] = local[:, 0]
    pos[:, 0] = w.root_positions
    for k in range(1, J):
        p = s.joints[k].parent
        glob_rot[:, k] = glob_rot[:, p] @ local[:, k]
        pos[:, k] = pos[:, p] + glob_rot[:, p] @ offsets[k]
    if return_rotations:
        return pos, glob_rot
    return pos


def default_contact_threshold(s: Skeleton, fps: float):
    """0.2 leg lengths per second, expressed per frame."""
    return 0.2 * s.leg_length() / fps


def contact_labels(w: WorldMotion, s: Skeleton, threshold):
    """Binary (H, C) labels: 1 where the foot speed (per frame) is below threshold.

    Velocity at frame i is the backward difference; frame 0 reuses frame 1's.
    """
    if not s.foot_joints:
        return np.zeros((w.frames, 0))
    pos = forward_kinematics(w, s)[:, list(s.foot_joints)]
    vel = np.zeros(pos.shape[:2])
    vel[1:] = np.linalg.norm(np.diff(pos, axis=0), axis=-1)
    vel[0] = vel[1] if w.frames > 1 else 0.0
    return (vel < threshold).astype(np.float64)


def to_features(w: WorldMotion, s: Skeleton, contact_velocity_threshold=None, fps=30.0):
    if w.frames < 2:
        raise InvalidInputError("need at least 2 frames to compute root displacements")
    if w.num_joints != s.num_joints:
        raise InvalidInputError(
            f"motion has {w.num_joints} joints but skeleton has {s.num_joints}")
    if contact_velocity_threshold is None:
        contact_velocity_threshold = default_contact_threshold(s, fps)
    H = w.frames
    rot6 = rotations.quat_to_6d(w.rotations).reshape(H, -1)
    vel = np.zeros((H, 3))
    vel[1:] = np.diff(w.root_positions, axis=0)
    contacts = contact_labels(w, s, contact_velocity_threshold)
    rows = np.concatenate([rot6, vel, contacts], axis=1)
    return MotionFeatures(rows, s.num_joints, s.num_contacts,
                          initial_root_position=w.root_positions[0].copy(), fps=fps)


def from_features(m: MotionFeatures, s: Skeleton) -> WorldMotion:
    if m.num_joints != s.num_joints or m.num_contacts != s.num_contacts:
        raise InvalidInputError("feature layout does not match skeleton")
    quats = rotations.sixd_to_quat(m.rotations_6d())
    pos = m.initial_root_position + np.cumsum(m.velocities(), axis=0)
    return WorldMotion(pos, quats)


def stack_features(ms: Sequence[MotionFeatures]):
    """Pool rows of several feature sets (same layout) into one matrix."""
    return np.concatenate([m.rows for m in ms], axis=0)
