"""Evaluation metrics: coverage, local/global patch distance, set diversity."""

from dataclasses import asdict, dataclass, field
from typing import Dict, Optional, Sequence, Union

import numpy as np

from . import rotations
from .errors import InvalidInputError, TooShortError
from .matching import squared_distances
from .motion import MotionFeatures, WorldMotion
from .patching import window_matrix

LOCAL_WINDOW = 11
GLOBAL_WINDOW = 61
COVERAGE_THRESHOLD = 0.05

_BLOCK = 2 ** 24


def _as_list(x):
    if isinstance(x, MotionFeatures):
        return [x]
    return list(x)


def _windows(ms, window):
    out = []
    for m in ms:
        if m.frames < window:
            raise TooShortError(f"motion has {m.frames} frames, metric window is {window}")
        out.append(window_matrix(m.rows, window))
    return np.concatenate(out)


def _check_widths(a, b):
    widths = {m.width for m in a} | {m.width for m in b}
    if len(widths) != 1:
        raise InvalidInputError(f"feature layouts differ: widths {sorted(widths)}")


def _min_dist(queries, keys):
    """For each query row, the minimum squared L2 distance to any key row."""
    yy = np.einsum("ij,ij->i", keys, keys)
    step = max(1, _BLOCK // max(len(keys), 1))
    out = np.empty(len(queries))
    for lo in range(0, len(queries), step):
        d = squared_distances(queries[lo:lo + step], keys, yy)
        out[lo:lo + step] = d.min(axis=1)
    return out


def patch_distance(generated, exemplars, window=LOCAL_WINDOW):
    """Mean over generated windows of the per-element squared distance to the
    closest exemplar window."""
    gen, ex = _as_list(generated), _as_list(exemplars)
    _check_widths(gen, ex)
    g = _windows(gen, window)
    e = _windows(ex, window)
    return float(np.mean(_min_dist(g, e)) / g.shape[1])


def coverage(generated, exemplars, window=LOCAL_WINDOW, rel_threshold=COVERAGE_THRESHOLD):
    """Fraction of exemplar windows with a generated window closer than
    ``rel_threshold`` times the mean per-column exemplar variance."""
    gen, ex = _as_list(generated), _as_list(exemplars)
    _check_widths(gen, ex)
    g = _windows(gen, window)
    e = _windows(ex, window)
    var = float(np.mean(np.concatenate([m.rows for m in ex]).var(axis=0)))
    d = _min_dist(e, g) / e.shape[1]
    return float(np.mean(d < rel_threshold * var))


def set_diversity(samples: Sequence[WorldMotion], exemplar: WorldMotion):
    """Std of 6D joint rotations across samples, averaged over frames, joints and
    components, divided by the exemplar's mean temporal std of the same."""
    samples = list(samples)
    if len(samples) < 2:
        raise InvalidInputError("set diversity needs at least 2 samples")
    shapes = {s.rotations.shape for s in samples}
    if len(shapes) != 1:
        raise InvalidInputError(f"samples have different shapes: {sorted(shapes)}")
    if samples[0].num_joints != exemplar.num_joints:
        raise InvalidInputError("samples and exemplar have different joint counts")
    stack = np.stack([rotations.quat_to_6d(s.rotations) for s in samples])  # (N, H, J, 6)
    spread = stack.std(axis=0).mean()
    ref = rotations.quat_to_6d(exemplar.rotations).std(axis=0).mean()
    if ref == 0:
        raise InvalidInputError("exemplar rotations have zero variance")
    return float(spread / ref)


def frame_shuffled(m: MotionFeatures, length, seed=0):
    """Baseline: exemplar frames in random order, tiled to ``length`` frames."""
    rng = np.random.default_rng(seed)
    reps = -(-length // m.frames)
    order = np.concatenate([rng.permutation(m.frames) for _ in range(reps)])[:length]
    return m.with_rows(m.rows[order])


@dataclass
class MetricsReport:
    coverage: float
    local_patch_distance: float
    global_patch_distance: float
    set_diversity: Optional[float]
    params: Dict[str, Union[int, float]] = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def evaluate(generated: Sequence[MotionFeatures], exemplars: Sequence[MotionFeatures],
             local=LOCAL_WINDOW, global_=GLOBAL_WINDOW, threshold=COVERAGE_THRESHOLD,
             generated_world=None, exemplar_world=None) -> MetricsReport:
    """Per-sample coverage and patch distances averaged over ``generated``;
    set diversity when world motions for at least two samples are given."""
    generated = list(generated)
    if not generated:
        raise InvalidInputError("no generated motions")
    cov = np.mean([coverage(g, exemplars, local, threshold) for g in generated])
    loc = np.mean([patch_distance(g, exemplars, local) for g in generated])
    glo = np.mean([patch_distance(g, exemplars, global_) for g in generated])
    div = None
    if generated_world is not None and exemplar_world is not None and len(generated_world) >= 2:
        div = set_diversity(generated_world, exemplar_world)
    params = {"local_window": local, "global_window": global_, "coverage_threshold": threshold,
              "coverage_window": local, "samples": len(generated)}
    return MetricsReport(float(cov), float(loc), float(glo), div, params)
