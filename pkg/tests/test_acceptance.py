"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line (visible with ``pytest -v``/``-s``).
"""

import time

import numpy as np
import pytest

from genmm import bvh, metrics, rotations
from genmm.cli import main
from genmm.fixtures import fixture_bvh
from genmm.matching import assign, match_and_blend, normalize, squared_distances
from genmm.motion import from_features, to_features
from genmm.patching import default_partition, partition_from_names
from genmm.pyramid import build_schedule
from genmm.synthesis import (CompletionConstraint, KeyframeConstraint, LoopConstraint,
                             SynthesisConfig, keyframe_index, schedule_for, synthesize,
                             synthesize_reassembly)

from conftest import random_quats
from test_matching import naive_argmin, naive_distances, naive_normalize
from test_patching import LOWER, upper_names


@pytest.fixture
def report(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


def test_1_performance(walk, report):
    sk, w, _ = walk
    t0 = time.perf_counter()
    feats = to_features(w, sk)
    out = synthesize([feats], sk, config=SynthesisConfig(length=1000, seed=0))
    from_features(out, sk)
    dt = time.perf_counter() - t0
    report(1, dt <= 2.0 and out.frames == 1000, f"1000 frames from 500x24 in {dt:.3f}s (<= 2.0s)")


def test_2_fixed_point(walk, report):
    sk, _, f = walk
    t0 = time.perf_counter()
    out = match_and_blend(f, [f], default_partition(sk), 11, 0.01, 1)
    dt = time.perf_counter() - t0
    err = float(np.abs(out.rows - f.rows).max())
    report(2, err <= 1e-6 and dt < 1.0, f"max error {err:.2e} (<= 1e-6), {dt:.3f}s (< 1s)")


def test_3_oracle_equivalence(report):
    rng = np.random.default_rng(2024)
    worst = [0.0, 0.0]
    argmin_ok = True
    for _ in range(200):
        n, m = rng.integers(1, 101, size=2)
        d = int(rng.integers(1, 8))
        x, y = rng.normal(size=(n, d)), rng.normal(size=(m, d))
        Dn = naive_distances(x, y)
        worst[0] = max(worst[0], float(np.abs(squared_distances(x, y) - Dn).max()))
        alpha = float(rng.uniform(1e-3, 1.0))
        Dh = normalize(Dn, alpha)
        worst[1] = max(worst[1], float(np.abs(Dh - naive_normalize(Dn, alpha)).max()))
        argmin_ok &= bool(np.array_equal(assign(Dh).keys, naive_argmin(Dh)))
    ok = worst[0] <= 1e-6 and worst[1] <= 1e-6 and argmin_ok
    report(3, ok, f"200 instances: distance err {worst[0]:.1e}, normalize err {worst[1]:.1e}, "
                  f"argmin identical={argmin_ok}")


def test_4_determinism_and_diversity(tmp_path, walk, report):
    src = tmp_path / "walk.bvh"
    src.write_bytes(fixture_bvh(24, 500, 1))
    outs = []
    for name in ("a", "b"):
        out = tmp_path / f"{name}.bvh"
        assert main(["synth", "--input", str(src), "--seed", "7", "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    identical = outs[0] == outs[1]

    sk, w, f = walk
    samples = [from_features(synthesize([f], sk, config=SynthesisConfig(seed=s)), sk)
               for s in range(20)]
    div = metrics.set_diversity(samples, w)
    report(4, identical and div > 0,
           f"byte-identical reruns={identical}, set diversity over 20 seeds {div:.3f} (> 0)")


def test_5_convexity_and_coverage(walk, report):
    sk, _, f = walk
    out = synthesize([f], sk, config=SynthesisConfig(seed=0))
    lo, hi = f.rows.min(0), f.rows.max(0)
    excess = float(max((lo - out.rows).max(), (out.rows - hi).max(), 0.0))
    cov = metrics.coverage(out, [f])
    base = metrics.coverage(metrics.frame_shuffled(f, out.frames, seed=0), [f])
    report(5, excess <= 1e-6 and cov >= base,
           f"bound excess {excess:.1e} (<= 1e-6), coverage {cov:.3f} >= shuffled {base:.3f}")


def test_6_alpha_direction(five_exemplars, report):
    sk, feats = five_exemplars
    cov = {}
    for alpha in (0.01, 100.0):
        out = synthesize(feats, sk, config=SynthesisConfig(alpha=alpha, length=400, seed=0))
        cov[alpha] = metrics.coverage(out, feats)
    report(6, cov[0.01] >= cov[100.0],
           f"coverage(alpha=0.01) {cov[0.01]:.3f} >= coverage(alpha=100) {cov[100.0]:.3f}")


def test_7_application_contracts(walk, five_exemplars, report):
    sk, _, f = walk
    checks = {}

    loop = synthesize([f], sk, config=SynthesisConfig(length=300, seed=1),
                      constraints=[LoopConstraint()])
    rc = loop.rotation_columns
    q = from_features(loop, sk).rotations
    interior = rotations.geodesic_angle(q[1:], q[:-1]).max()
    seam = rotations.geodesic_angle(q[-1], q[0]).max()
    checks["loop"] = bool(np.array_equal(loop.rows[0, rc], loop.rows[-1, rc]) and seam <= interior)

    cfg = SynthesisConfig(length=400, seed=2)
    F1 = schedule_for([f], cfg).synthesis_lengths[0]
    picks = {0: f.rows[5], F1 // 3: f.rows[120], F1 - 1: f.rows[480]}
    key = synthesize([f], sk, config=cfg, constraints=[KeyframeConstraint(picks)])
    checks["keyframe"] = all(np.array_equal(key.rows[keyframe_index(i, F1, 400)], row)
                             for i, row in picks.items())

    halves = partition_from_names({"upper": upper_names(sk), "lower": LOWER}, sk)
    given = five_exemplars[1][4]  # a different walk, 220 frames
    lower = halves.part("lower")
    comp = synthesize([f], sk, halves, SynthesisConfig(length=given.frames, seed=3),
                      [CompletionConstraint(lower, given)])
    cols = lower.columns(sk.num_joints)
    checks["completion"] = bool(np.array_equal(comp.rows[:, cols], given.rows[:, cols]))

    cfg = SynthesisConfig(length=300, seed=4)
    plain = synthesize([f], sk, halves, cfg)
    re = synthesize_reassembly([(sk, f)], sk, halves, {"upper": 0, "lower": 0}, cfg)
    checks["reassembly"] = bool(np.array_equal(plain.rows, re.rows))

    report(7, all(checks.values()), ", ".join(f"{k}={v}" for k, v in checks.items()))


def test_8_schedule(report):
    s = build_schedule(500, 1000, 11, 4, 4 / 3)
    got = (s.stages, s.exemplar_lengths[0], s.exemplar_lengths[-1], s.synthesis_lengths[-1])
    report(8, got == (10, 44, 500, 1000), f"S, T_1, T_S, F_S = {got} (expect (10, 44, 500, 1000))")


def test_9_round_trips(walk, report):
    sk, w, f = walk
    text = fixture_bvh(24, 120, 6)
    doc = bvh.parse_bvh(text)
    sk2, w2 = bvh.to_world_motion(doc)
    again = bvh.serialize_bvh(sk2, w2, 1.0 / doc.frame_time)
    doc2 = bvh.parse_bvh(again)
    bvh_err = float(np.abs(doc2.motion - doc.motion).max())
    idem = bvh.serialize_bvh(*bvh.to_world_motion(doc2), 1.0 / doc2.frame_time) == again

    qs = random_quats(np.random.default_rng(9), 1000)
    q_back = rotations.sixd_to_quat(rotations.quat_to_6d(qs))
    q_err = float(np.abs(q_back - rotations.canonicalize(qs)).max())

    w_back = from_features(f, sk)
    f_err = max(float(np.abs(w_back.root_positions - w.root_positions).max()),
                float(np.abs(w_back.rotations - w.rotations).max()))
    ok = bvh_err <= 1e-5 and idem and q_err <= 1e-6 and f_err <= 1e-5
    report(9, ok, f"bvh err {bvh_err:.1e} idempotent={idem}, quat-6D err {q_err:.1e}, "
                  f"features err {f_err:.1e}")
