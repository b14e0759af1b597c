"""Skeleton partitions and temporal patch extraction."""

import json
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import (InvalidInputError, MissingOverlapError, NonSubtreeError, TooShortError,
                     UncoveredJointError, UnknownJointError)
from .motion import Q, MotionFeatures, Skeleton


@dataclass(frozen=True)
class Part:
    name: str
    joints: Tuple[int, ...]
    includes_root_channels: bool
    contacts: Tuple[int, ...]  # indices into the skeleton's foot list

    def columns(self, num_joints):
        """Feature-column indices of this part, in full-layout order."""
        cols = [np.arange(j * Q, (j + 1) * Q) for j in self.joints]
        base = num_joints * Q
        if self.includes_root_channels:
            cols.append(np.arange(base, base + 3))
        cols.append(np.asarray([base + 3 + c for c in self.contacts], dtype=np.int64))
        return np.concatenate(cols).astype(np.int64)


@dataclass(frozen=True)
class SkeletonPartition:
    parts: Tuple[Part, ...]
    num_joints: int
    num_contacts: int

    def __len__(self):
        return len(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def part(self, name):
        for p in self.parts:
            if p.name == name:
                return p
        raise KeyError(name)

    def column_sets(self):
        return [p.columns(self.num_joints) for p in self.parts]

    def column_counts(self):
        width = self.num_joints * Q + 3 + self.num_contacts
        counts = np.zeros(width, dtype=np.int64)
        for cols in self.column_sets():
            counts[cols] += 1
        return counts


def make_part(name, joints, s: Skeleton):
    joints = tuple(sorted(set(int(j) for j in joints)))
    contacts = tuple(c for c, f in enumerate(s.foot_joints) if f in joints)
    return Part(name, joints, 0 in joints, contacts)


def default_partition(s: Skeleton) -> SkeletonPartition:
    return SkeletonPartition((make_part("body", range(s.num_joints), s),),
                             s.num_joints, s.num_contacts)


def _check_subtree(name, joints, s: Skeleton):
    tops = [j for j in joints if s.joints[j].parent not in joints]
    if len(tops) != 1:
        names = [s.joints[j].name for j in tops]
        raise NonSubtreeError(f"part {name!r} is not a connected sub-tree (roots: {names})")


def partition_from_names(parts, s: Skeleton) -> SkeletonPartition:
    """Build and validate a partition from {part name: [joint names]}."""
    if not parts:
        raise InvalidInputError("partition has no parts")
    index = {j.name: k for k, j in enumerate(s.joints)}
    built = []
    for name, joint_names in parts.items():
        ids = set()
        for jn in joint_names:
            if jn not in index:
                raise UnknownJointError(f"part {name!r} names unknown joint {jn!r}")
            ids.add(index[jn])
        if not ids:
            raise InvalidInputError(f"part {name!r} is empty")
        _check_subtree(name, ids, s)
        built.append(make_part(name, ids, s))

    covered = set().union(*(p.joints for p in built))
    missing = [s.joints[k].name for k in range(s.num_joints) if k not in covered]
    if missing:
        raise UncoveredJointError(f"joints not covered by any part: {missing}")

    # parts must be linked into one component through shared joints
    if len(built) > 1:
        seen = {0}
        frontier = [0]
        while frontier:
            a = frontier.pop()
            for b in range(len(built)):
                if b not in seen and set(built[a].joints) & set(built[b].joints):
                    seen.add(b)
                    frontier.append(b)
        if len(seen) != len(built):
            lonely = [built[b].name for b in range(len(built)) if b not in seen]
            raise MissingOverlapError(
                f"parts {lonely} share no joint with the rest of the partition")
    return SkeletonPartition(tuple(built), s.num_joints, s.num_contacts)


def load_partition(path_or_obj, s: Skeleton) -> SkeletonPartition:
    """Load ``{"parts": {"<name>": ["<joint>", ...]}}`` from a path or parsed object."""
    if isinstance(path_or_obj, dict):
        obj = path_or_obj
    else:
        with open(path_or_obj) as f:
            obj = json.load(f)
    if not isinstance(obj, dict) or not isinstance(obj.get("parts"), dict):
        raise InvalidInputError('partition must be a JSON object {"parts": {...}}')
    return partition_from_names(obj["parts"], s)


@dataclass(frozen=True, eq=False)
class PatchSet:
    part: int
    size: int
    windows: np.ndarray  # (N, size * part_columns), frame-major
    starts: np.ndarray  # (N,)
    sources: np.ndarray  # (N,) exemplar id per window

    def __len__(self):
        return self.windows.shape[0]

    @property
    def part_columns(self):
        return self.windows.shape[1] // self.size


def window_matrix(rows, p):
    """(H, C) -> (H - p + 1, p * C), each row one flattened window."""
    H, C = rows.shape
    if H < p:
        raise TooShortError(f"motion has {H} frames, patch size is {p}")
    win = sliding_window_view(rows, p, axis=0)  # (N, C, p)
    return np.ascontiguousarray(win.transpose(0, 2, 1)).reshape(H - p + 1, p * C)


def extract_patches(m: MotionFeatures, part: Part, p, part_index=0, source=0,
                    columns=None) -> PatchSet:
    cols = part.columns(m.num_joints) if columns is None else columns
    win = window_matrix(m.rows[:, cols], p)
    n = win.shape[0]
    return PatchSet(part_index, p, win, np.arange(n), np.full(n, source))


def concat_patches(sets):
    sets = list(sets)
    first = sets[0]
    for ps in sets[1:]:
        if ps.size != first.size or ps.windows.shape[1] != first.windows.shape[1]:
            raise InvalidInputError("cannot concatenate patch sets with different layouts")
    return PatchSet(first.part, first.size,
                    np.concatenate([s.windows for s in sets]),
                    np.concatenate([s.starts for s in sets]),
                    np.concatenate([s.sources for s in sets]))
