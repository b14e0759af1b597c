import json

import numpy as np
import pytest

from genmm import bvh
from genmm.cli import main
from genmm.fixtures import FOOT_NAMES

from test_patching import LOWER, upper_names


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    walk = d / "walk.bvh"
    other = d / "other.bvh"
    assert main(["fixture", "--frames", "200", "--seed", "1", "--out", str(walk)]) == 0
    assert main(["fixture", "--frames", "150", "--seed", "2", "--out", str(other)]) == 0
    return d, walk, other


def motion(path):
    return bvh.parse_bvh(path.read_bytes()).motion


def test_fixture_deterministic_and_parses(tmp_path, files):
    _, walk, _ = files
    again = tmp_path / "again.bvh"
    assert main(["fixture", "--frames", "200", "--seed", "1", "--out", str(again)]) == 0
    assert again.read_bytes() == walk.read_bytes()
    doc = bvh.parse_bvh(walk.read_bytes())
    assert doc.frame_count == 200 and len(doc.joints()) == 24
    sk, w, fps = bvh.read_bvh(str(walk))
    round_trip = bvh.parse_bvh(bvh.serialize_bvh(sk, w, fps))
    np.testing.assert_allclose(round_trip.motion, doc.motion, atol=1e-5)


def test_synth_doubles_and_is_reproducible(tmp_path, files):
    _, walk, _ = files
    a, b = tmp_path / "a.bvh", tmp_path / "b.bvh"
    args = ["synth", "--input", str(walk), "--length", "2x", "--seed", "7"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert motion(a).shape[0] == 400
    manifest = json.loads((tmp_path / "a.bvh.manifest.json").read_text())
    assert manifest["seed"] == 7
    assert manifest["schedule"]["synthesis_lengths"][-1] == 400
    assert len(manifest["stages"]) == manifest["schedule"]["stages"]
    c = tmp_path / "c.bvh"
    assert main(["synth", "--input", str(walk), "--length", "2x", "--seed", "8",
                 "--out", str(c)]) == 0
    assert c.read_bytes() != a.read_bytes()


def test_manifest_replay(tmp_path, files):
    _, walk, _ = files
    a, r = tmp_path / "a.bvh", tmp_path / "r.bvh"
    assert main(["synth", "--input", str(walk), "--length", "150", "--seed", "3",
                 "--alpha", "0.05", "--out", str(a)]) == 0
    assert main(["synth", "--from-manifest", str(a) + ".manifest.json", "--out", str(r)]) == 0
    assert r.read_bytes() == a.read_bytes()


def test_length_too_short_is_data_error(tmp_path, files):
    _, walk, _ = files
    assert main(["synth", "--input", str(walk), "--length", "5",
                 "--out", str(tmp_path / "x.bvh")]) == 3


def test_usage_errors(tmp_path, files):
    _, walk, _ = files
    assert main(["synth", "--bogus"]) == 2
    assert main(["synth", "--input", str(walk)]) == 2
    assert main(["keyframe", "--input", str(walk), "--out", str(tmp_path / "k.bvh")]) == 2


def test_loop(tmp_path, files):
    _, walk, _ = files
    out = tmp_path / "loop.bvh"
    assert main(["loop", "--input", str(walk), "--length", "150", "--seed", "4",
                 "--out", str(out)]) == 0
    m = motion(out)
    np.testing.assert_array_equal(m[0, 3:], m[-1, 3:])  # every rotation channel


def write_partition(d, sk):
    path = d / "halves.json"
    path.write_text(json.dumps({"parts": {"upper": upper_names(sk), "lower": LOWER}}))
    return path


def test_completion(tmp_path, files):
    _, walk, other = files
    sk, _, _ = bvh.read_bvh(str(walk))
    part = write_partition(tmp_path, sk)
    out = tmp_path / "comp.bvh"
    assert main(["complete", "--input", str(walk), "--given", str(other), "--given-part",
                 "lower", "--partition", str(part), "--seed", "2", "--out", str(out)]) == 0
    _, w_out, _ = bvh.read_bvh(str(out))
    _, w_given, _ = bvh.read_bvh(str(other))
    assert w_out.frames == w_given.frames
    lower = [sk.index(n) for n in LOWER]
    dots = np.abs(np.sum(w_out.rotations[:, lower] * w_given.rotations[:, lower], axis=-1))
    assert dots.min() > 1 - 1e-9


def test_keyframe(tmp_path, files):
    _, walk, _ = files
    out = tmp_path / "key.bvh"
    assert main(["keyframe", "--input", str(walk), "--length", "120", "--seed", "1",
                 "--keyframes", '{"0": 50}', "--out", str(out)]) == 0
    _, w_out, _ = bvh.read_bvh(str(out))
    _, w_in, _ = bvh.read_bvh(str(walk))
    dots = np.abs(np.sum(w_out.rotations[0] * w_in.rotations[50], axis=-1))
    assert dots.min() > 1 - 1e-9


def test_reassemble_identity_map_equals_synth(tmp_path, files):
    _, walk, _ = files
    sk, _, _ = bvh.read_bvh(str(walk))
    part = write_partition(tmp_path, sk)
    a, b = tmp_path / "plain.bvh", tmp_path / "re.bvh"
    common = ["--input", str(walk), "--length", "160", "--seed", "9", "--partition", str(part)]
    assert main(["synth", *common, "--out", str(a)]) == 0
    assert main(["reassemble", *common, "--map", '{"upper": 0, "lower": 0}',
                 "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_metrics(tmp_path, files, capsys):
    _, walk, _ = files
    out = tmp_path / "m.json"
    assert main(["metrics", "--generated", str(walk), "--exemplar", str(walk),
                 "--threshold", "0.1", "--local", "9", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["coverage"] == 1.0
    assert rep["params"]["coverage_threshold"] == 0.1
    assert rep["params"]["local_window"] == 9
    assert rep["params"]["global_window"] == 61
    assert main(["metrics", "--generated", str(walk), "--exemplar", str(walk)]) == 0
    assert json.loads(capsys.readouterr().out)["coverage"] == 1.0


def test_malformed_bvh(tmp_path, files):
    _, walk, _ = files
    bad = tmp_path / "bad.bvh"
    bad.write_text("HIERARCHY\nROOT Hips\n{\n  OFFSET 0 0\n")
    assert main(["metrics", "--generated", str(bad), "--exemplar", str(walk)]) == 3
    assert main(["synth", "--input", str(bad), "--out", str(tmp_path / "o.bvh")]) == 3


def test_feet_flag(tmp_path, files):
    _, walk, _ = files
    out = tmp_path / "feet.bvh"
    assert main(["synth", "--input", str(walk), "--length", "60", "--feet", *FOOT_NAMES[:2],
                 "--out", str(out)]) == 0
