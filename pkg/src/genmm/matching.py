"""Generative patch matching: distances, per-key normalization, nearest
neighbours, average voting and cross-part assembly."""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .motion import Q, MotionFeatures
from .patching import PatchSet, SkeletonPartition, window_matrix

# largest (queries x keys) matrix materialized in one piece
MAX_DENSE_ENTRIES = 2 ** 26


@dataclass(frozen=True, eq=False)
class MatchAssignment:
    keys: np.ndarray  # (N,) index into the key PatchSet
    sources: np.ndarray  # (N,) exemplar id of the matched key


def squared_distances(x, y, yy=None):
    """All-pairs squared L2 between rows of x (n, d) and y (m, d)."""
    xx = np.einsum("ij,ij->i", x, x)
    if yy is None:
        yy = np.einsum("ij,ij->i", y, y)
    d = xx[:, None] + yy[None, :] - 2.0 * (x @ y.T)
    np.maximum(d, 0.0, out=d)
    return d


def pairwise_distances(X: PatchSet, Y: PatchSet):
    if X.size != Y.size or X.windows.shape[1] != Y.windows.shape[1]:
        raise InvalidInputError(
            f"patch layout mismatch: {X.windows.shape[1]} vs {Y.windows.shape[1]} values "
            f"per window (sizes {X.size}, {Y.size})")
    if X.part != Y.part:
        raise InvalidInputError(f"patch sets belong to different parts ({X.part}, {Y.part})")
    return squared_distances(X.windows, Y.windows)


def normalize(D, alpha):
    """Divide each key column by alpha plus its minimum over queries."""
    if not alpha > 0:
        raise InvalidParameterError(f"alpha must be > 0, got {alpha}")
    D = np.asarray(D, dtype=np.float64)
    return D / (alpha + D.min(axis=0, keepdims=True))


def assign(Dhat, sources=None) -> MatchAssignment:
    Dhat = np.asarray(Dhat)
    if Dhat.ndim != 2 or Dhat.shape[1] == 0:
        raise InvalidInputError("no keys to match against")
    keys = np.argmin(Dhat, axis=1)  # first minimum wins ties
    src = np.zeros_like(keys) if sources is None else np.asarray(sources)[keys]
    return MatchAssignment(keys, src)


def nearest_keys(x, y, alpha, yy=None, max_entries=MAX_DENSE_ENTRIES):
    """Row-wise argmin of the normalized distance matrix.

    Above ``max_entries`` the keys are processed in column blocks; each block
    holds every query, so its column minima are final and no second pass is
    needed.
    """
    if not alpha > 0:
        raise InvalidParameterError(f"alpha must be > 0, got {alpha}")
    n, m = x.shape[0], y.shape[0]
    if m == 0:
        raise InvalidInputError("no keys to match against")
    if yy is None:
        yy = np.einsum("ij,ij->i", y, y)
    if n * m <= max_entries:
        D = squared_distances(x, y, yy)
        return np.argmin(D / (alpha + D.min(axis=0)), axis=1)

    step = max(1, max_entries // max(n, 1))
    best = np.full(n, np.inf)
    arg = np.zeros(n, dtype=np.int64)
    for lo in range(0, m, step):
        hi = min(m, lo + step)
        D = squared_distances(x, y[lo:hi], yy[lo:hi])
        Dh = D / (alpha + D.min(axis=0))
        j = np.argmin(Dh, axis=1)
        v = Dh[np.arange(n), j]
        better = v < best  # strict: earlier blocks keep ties
        best[better] = v[better]
        arg[better] = j[better] + lo
    return arg


def blend(assignment: MatchAssignment, Y: PatchSet, out_frames):
    """Average voting of matched key windows into (out_frames, part_columns)."""
    p = Y.size
    n = out_frames - p + 1
    if len(assignment.keys) != n:
        raise InvalidInputError(
            f"assignment covers {len(assignment.keys)} windows, expected {n}")
    C = Y.part_columns
    patches = Y.windows[assignment.keys].reshape(n, p, C)
    return vote(patches, out_frames)


def vote(patches, out_frames):
    n, p, C = patches.shape
    acc = np.zeros((out_frames, C))
    cnt = np.zeros((out_frames, 1))
    for k in range(p):
        acc[k:k + n] += patches[:, k]
        cnt[k:k + n] += 1.0
    return acc / cnt


def assemble(partials, partition: SkeletonPartition, template: MotionFeatures):
    """Merge per-part feature blocks; columns shared by parts are averaged."""
    frames = {p.shape[0] for p in partials}
    if len(frames) != 1:
        raise InvalidInputError(f"partial motions have different frame counts: {sorted(frames)}")
    if len(partials) != len(partition):
        raise InvalidInputError("one partial motion per part is required")
    H = frames.pop()
    acc = np.zeros((H, template.width))
    counts = partition.column_counts()
    for part, values in zip(partition.parts, partials):
        acc[:, part.columns(partition.num_joints)] += values
    if np.any(counts == 0):
        raise InvalidInputError("partition leaves some feature columns unowned")
    return template.with_rows(acc / counts)


def column_weight_vector(m: MotionFeatures, weights):
    """Per-column weights from {"rotation", "velocity", "contact"} group weights."""
    w = np.ones(m.width)
    if not weights:
        return w
    unknown = set(weights) - {"rotation", "velocity", "contact"}
    if unknown:
        raise InvalidParameterError(f"unknown channel groups {sorted(unknown)}")
    for key, cols in (("rotation", m.rotation_columns), ("velocity", m.velocity_columns),
                      ("contact", m.contact_columns)):
        v = float(weights.get(key, 1.0))
        if v < 0:
            raise InvalidParameterError(f"channel weight {key} must be >= 0")
        w[cols] = v
    return w


class PartKeys:
    """Key windows of one part, pooled over that part's exemplars."""

    def __init__(self, exemplars: Sequence[MotionFeatures], columns, p, scale=None):
        wins = [window_matrix(m.rows[:, columns], p) for m in exemplars]
        self.windows = np.concatenate(wins)
        self.sources = np.concatenate([np.full(len(w), i) for i, w in enumerate(wins)])
        self.columns = columns
        self.size = p
        # sqrt of column weights, tiled over the window; None means unweighted
        self.scale = scale
        self.search = self.windows if scale is None else self.windows * scale
        self.norms = np.einsum("ij,ij->i", self.search, self.search)


def _tile_scale(weights, columns, p):
    if weights is None:
        return None
    w = np.sqrt(weights[columns])
    if np.all(w == 1.0):
        return None
    return np.tile(w, p)


def prepare_keys(part_exemplars, partition: SkeletonPartition, p, weights=None):
    keys = []
    for part, exemplars in zip(partition.parts, part_exemplars):
        cols = part.columns(partition.num_joints)
        keys.append(PartKeys(exemplars, cols, p, _tile_scale(weights, cols, p)))
    return keys


def match_step(cur: MotionFeatures, keys, partition, alpha, max_entries=MAX_DENSE_ENTRIES):
    partials = []
    for k in keys:
        x = window_matrix(cur.rows[:, k.columns], k.size)
        if k.scale is not None:
            x = x * k.scale
        idx = nearest_keys(x, k.search, alpha, k.norms, max_entries)
        n = x.shape[0]
        patches = k.windows[idx].reshape(n, k.size, len(k.columns))
        partials.append(vote(patches, cur.frames))
    return assemble(partials, partition, cur)


def match_and_blend(guess: MotionFeatures, exemplars: Sequence[MotionFeatures],
                    partition: SkeletonPartition, p, alpha, E,
                    part_exemplars=None, project: Optional[Callable] = None,
                    column_weights=None, keys=None, max_entries=MAX_DENSE_ENTRIES):
    """E rounds of extract / match / blend / assemble on ``guess``.

    ``part_exemplars`` restricts each part's keys to its own exemplar list
    (motion reassembly); by default every part draws from all exemplars.
    ``project`` is applied to the guess before every round.
    """
    if E < 0:
        raise InvalidParameterError("E must be >= 0")
    if guess.frames < p:
        raise InvalidInputError(f"guess has {guess.frames} frames, patch size is {p}")
    if keys is None:
        if part_exemplars is None:
            part_exemplars = [list(exemplars)] * len(partition)
        for exs in part_exemplars:
            for m in exs:
                if m.frames < p:
                    raise InvalidInputError(f"exemplar has {m.frames} frames, patch size is {p}")
                if m.width != guess.width:
                    raise InvalidInputError("exemplar and guess feature layouts differ")
        keys = prepare_keys(part_exemplars, partition, p, column_weights)
    cur = guess
    for _ in range(E):
        if project is not None:
            cur = project(cur)
        cur = match_step(cur, keys, partition, alpha, max_entries)
    return cur
