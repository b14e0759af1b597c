"""Coarse-to-fine synthesis and the constrained application modes."""

import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .errors import (InvalidInputError, InvalidParameterError, LayoutMismatchError,
                     OutputTooShortError)
from .matching import column_weight_vector, match_and_blend, prepare_keys
from .motion import Q, MotionFeatures, Skeleton
from .patching import Part, SkeletonPartition, default_partition
from .pyramid import PyramidSchedule, build_schedule, resample, round_half_up, stage_lengths


@dataclass
class SynthesisConfig:
    patch_size: int = 11
    K: int = 4
    alpha: float = 0.01
    iterations: int = 5
    ratio: float = 4 / 3
    length: Optional[int] = None  # output frames; None = first exemplar's length
    seed: int = 0
    noise_sigma: float = 1.0
    weights: Optional[Dict[str, float]] = None

    def __post_init__(self):
        if self.patch_size < 2:
            raise InvalidParameterError("patch size must be >= 2")
        if self.K < 1:
            raise InvalidParameterError("K must be >= 1")
        if not self.alpha > 0:
            raise InvalidParameterError("alpha must be > 0")
        if self.iterations < 0:
            raise InvalidParameterError("iterations must be >= 0")
        if not self.ratio > 1:
            raise InvalidParameterError("ratio must be > 1")
        if self.length is not None and self.length < self.patch_size:
            raise OutputTooShortError(
                f"output length {self.length} is shorter than the patch size {self.patch_size}")


@dataclass
class CompletionConstraint:
    """Pin the columns of ``part`` to a (resampled) given motion."""
    part: Part
    given: MotionFeatures


@dataclass
class KeyframeConstraint:
    """Coarsest-stage frame index -> full feature row."""
    frames: Dict[int, np.ndarray]


@dataclass
class LoopConstraint:
    pass


Constraint = Union[CompletionConstraint, KeyframeConstraint, LoopConstraint]


@dataclass
class StageRecord:
    stage: int
    exemplar_lengths: List[int]
    frames: int
    seconds: float


def keyframe_index(i1, F1, Fs):
    if F1 == 1:
        return 0
    return round_half_up(i1 * (Fs - 1) / (F1 - 1))


class _Projector:
    """Constraint projection for one stage. Order: completion, keyframes, loop."""

    def __init__(self, constraints, Fs, F1):
        self.ops = []
        for c in constraints:
            if isinstance(c, CompletionConstraint):
                cols = c.part.columns(c.given.num_joints)
                vals = resample(c.given, Fs).rows[:, cols]
                self.ops.append((0, cols, vals))
        for c in constraints:
            if isinstance(c, KeyframeConstraint):
                for i1, row in sorted(c.frames.items()):
                    self.ops.append((1, keyframe_index(i1, F1, Fs), np.asarray(row)))
        for c in constraints:
            if isinstance(c, LoopConstraint):
                self.ops.append((2, None, None))

    def __call__(self, m: MotionFeatures):
        if not self.ops:
            return m
        rows = m.rows.copy()
        loop_cols = np.concatenate([m.rotation_columns, m.contact_columns])
        for kind, where, vals in self.ops:
            if kind == 0:
                rows[:, where] = vals
            elif kind == 1:
                rows[where] = vals
            else:
                rows[-1, loop_cols] = rows[0, loop_cols]
        return m.with_rows(rows)


def _validate_constraints(constraints, width, F1):
    for c in constraints:
        if isinstance(c, CompletionConstraint):
            if c.given.width != width:
                raise LayoutMismatchError("completion motion has a different feature layout")
            if c.given.frames < 2:
                raise InvalidInputError("completion motion needs at least 2 frames")
        elif isinstance(c, KeyframeConstraint):
            for i1, row in c.frames.items():
                if not 0 <= i1 < F1:
                    raise InvalidInputError(
                        f"keyframe index {i1} outside the coarsest stage [0, {F1})")
                if np.asarray(row).shape != (width,):
                    raise LayoutMismatchError(f"keyframe {i1} row has the wrong width")
        elif not isinstance(c, LoopConstraint):
            raise InvalidInputError(f"unknown constraint {c!r}")


def plan_schedule(part_exemplars, config: SynthesisConfig, F):
    lengths = [m.frames for exs in part_exemplars for m in exs]
    return build_schedule(min(lengths), F, config.patch_size, config.K, config.ratio)


def _run(part_exemplars, partition: SkeletonPartition, config: SynthesisConfig,
         constraints=(), template: MotionFeatures = None, log=None):
    p = config.patch_size
    F = config.length if config.length is not None else template.frames
    sched = plan_schedule(part_exemplars, config, F)
    S = sched.stages
    T_min = min(m.frames for exs in part_exemplars for m in exs)
    width = template.width
    _validate_constraints(constraints, width, sched.synthesis_lengths[0])

    # one pyramid per distinct exemplar object
    pyramids = {}
    for exs in part_exemplars:
        for m in exs:
            if id(m) in pyramids:
                continue
            if m.frames == T_min:
                lens = sched.exemplar_lengths
            else:
                lens = stage_lengths(m.frames, S, config.ratio, p)
            pyramids[id(m)] = [resample(m, L) for L in lens]

    # noise statistics from the coarsest exemplars of each column's first owning part
    mean = np.zeros(width)
    std = np.zeros(width)
    seen = np.zeros(width, dtype=bool)
    for part, exs in zip(partition.parts, part_exemplars):
        cols = part.columns(partition.num_joints)
        cols = cols[~seen[cols]]
        if not len(cols):
            continue
        pooled = np.concatenate([pyramids[id(m)][0].rows[:, cols] for m in exs])
        mean[cols] = pooled.mean(axis=0)
        std[cols] = pooled.std(axis=0)
        seen[cols] = True

    rng = np.random.default_rng(config.seed)
    F1 = sched.synthesis_lengths[0]
    noise = rng.standard_normal((F1, width))
    cur = template.with_rows(mean + config.noise_sigma * std * noise)

    weights = None
    if config.weights:
        weights = column_weight_vector(template, config.weights)

    for s in range(S):
        t0 = time.perf_counter()
        Fs = sched.synthesis_lengths[s]
        stage_ex = [[pyramids[id(m)][s] for m in exs] for exs in part_exemplars]
        keys = prepare_keys(stage_ex, partition, p, weights)
        project = _Projector(constraints, Fs, F1)
        cur = project(cur)
        cur = match_and_blend(cur, None, partition, p, config.alpha, config.iterations,
                              project=project, keys=keys)
        cur = project(cur)
        assert cur.frames == Fs
        if log is not None:
            lens = sorted({pyr[s].frames for pyr in pyramids.values()})
            log.append(StageRecord(s + 1, lens, Fs, time.perf_counter() - t0))
        if s + 1 < S:
            cur = resample(cur, sched.synthesis_lengths[s + 1])
    return cur


def _check_layout(exemplars, skeleton):
    for m in exemplars:
        if m.num_joints != skeleton.num_joints or m.num_contacts != skeleton.num_contacts:
            raise LayoutMismatchError("exemplar feature layout does not match the skeleton")


def synthesize(exemplars: Sequence[MotionFeatures], skeleton: Skeleton,
               partition: Optional[SkeletonPartition] = None,
               config: Optional[SynthesisConfig] = None,
               constraints: Sequence[Constraint] = (), log=None) -> MotionFeatures:
    """Synthesize a new motion from one or more exemplars sharing ``skeleton``.

    The coarsest stage starts from per-column Gaussian noise (exemplar mean and
    standard deviation), seeded by ``config.seed``.
    """
    config = config or SynthesisConfig()
    exemplars = list(exemplars)
    if not exemplars:
        raise InvalidInputError("at least one exemplar is required")
    _check_layout(exemplars, skeleton)
    partition = partition or default_partition(skeleton)
    part_exemplars = [exemplars] * len(partition)
    return _run(part_exemplars, partition, config, constraints, exemplars[0], log)


def schedule_for(exemplars, config: SynthesisConfig) -> PyramidSchedule:
    F = config.length if config.length is not None else exemplars[0].frames
    return plan_schedule([exemplars], config, F)


def reassembly_sources(sources, target: Skeleton, partition: SkeletonPartition, part_map):
    """Build per-part exemplars in the target layout.

    ``sources`` is a list of (Skeleton, MotionFeatures). ``part_map`` maps part
    name -> source index, or -> {"input": i, "joints": [source joint names]}
    with names listed in the order the part's joints appear in the target.
    Joints are otherwise matched by name. A part holding the target root takes
    the source's root displacement.
    """
    out = []
    proxies = {}
    for part in partition.parts:
        if part.name not in part_map:
            raise InvalidInputError(f"part {part.name!r} has no source in the map")
        entry = part_map[part.name]
        if isinstance(entry, dict):
            src_i = int(entry["input"])
            names = list(entry.get("joints") or [target.joints[j].name for j in part.joints])
        else:
            src_i = int(entry)
            names = [target.joints[j].name for j in part.joints]
        if not 0 <= src_i < len(sources):
            raise InvalidInputError(f"part {part.name!r} maps to missing input {src_i}")
        src_skel, src_feat = sources[src_i]
        if len(names) != len(part.joints):
            raise LayoutMismatchError(
                f"part {part.name!r} has {len(part.joints)} joints but source {src_i} "
                f"maps {len(names)}")
        try:
            src_joints = [src_skel.index(n) for n in names]
        except KeyError as e:
            raise LayoutMismatchError(
                f"part {part.name!r}: joint {e.args[0]!r} not found in source {src_i}") from None
        src_contacts = []
        for c in part.contacts:
            tj = target.foot_joints[c]
            sj = src_joints[part.joints.index(tj)]
            if sj not in src_skel.foot_joints:
                raise LayoutMismatchError(
                    f"part {part.name!r}: contact joint {target.joints[tj].name!r} maps to "
                    f"a non-contact joint in source {src_i}")
            src_contacts.append(src_skel.foot_joints.index(sj))

        src_cols = [np.arange(j * Q, (j + 1) * Q) for j in src_joints]
        base = src_skel.num_joints * Q
        if part.includes_root_channels:
            src_cols.append(np.arange(base, base + 3))
        src_cols.append(np.asarray([base + 3 + c for c in src_contacts], dtype=np.int64))
        src_cols = np.concatenate(src_cols).astype(np.int64)
        dst_cols = part.columns(target.num_joints)

        key = (src_i, tuple(dst_cols), tuple(src_cols))
        if key not in proxies:
            rows = np.zeros((src_feat.frames, target.feature_width()))
            rows[:, dst_cols] = src_feat.rows[:, src_cols]
            proxies[key] = MotionFeatures(rows, target.num_joints, target.num_contacts,
                                          src_feat.initial_root_position, src_feat.fps)
        out.append([proxies[key]])
    return out


def synthesize_reassembly(sources, target: Skeleton, partition: SkeletonPartition, part_map,
                          config: Optional[SynthesisConfig] = None,
                          constraints: Sequence[Constraint] = (), log=None) -> MotionFeatures:
    """Each part draws keys only from its mapped source; overlaps bridge sources."""
    config = config or SynthesisConfig()
    part_exemplars = reassembly_sources(sources, target, partition, part_map)
    template = part_exemplars[0][0]
    if config.length is None:
        config = SynthesisConfig(**{**config.__dict__, "length": sources[0][1].frames})
    return _run(part_exemplars, partition, config, constraints, template, log)
