import warnings

import numpy as np
import pytest

from genmm import bvh
from genmm.errors import (BvhSyntaxError, ChannelCountMismatchError, InvalidInputError,
                          UnsupportedChannelLayoutError)
from genmm.fixtures import fixture_bvh
from genmm.motion import WorldMotion, forward_kinematics

S2 = np.sqrt(2) / 2

MINIMAL = """HIERARCHY
ROOT Hips
{
  OFFSET 0 0 0
  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
  End Site
  {
    OFFSET 0 1 0
  }
}
MOTION
Frames: 2
Frame Time: 0.0333333
0 1 2 0 0 0
1 1 2 90 0 0
"""

TWO_JOINT = """HIERARCHY
ROOT root
{
\tOFFSET 0 0 0
\tCHANNELS 6 Xposition Yposition Zposition Yrotation Xrotation Zrotation
\tJOINT arm
\t{
\t\tOFFSET 1 0 0
\t\tCHANNELS 6 Xposition Yposition Zposition Xrotation Zrotation Yrotation
\t\tEnd Site
\t\t{
\t\t\tOFFSET 0.5 0 0
\t\t}
\t}
}
MOTION
Frames: 3
Frame Time: 0.04
0 0 0 10 20 30 5 5 5 -40 50 60
1 0 0 -170 80 179 5 5 5 0 0 0
2 0.5 0 45 -45 90 5 5 5 12.5 -7 3
"""


def docs_close(a, b, tol=1e-5):
    ja, jb = a.joints(), b.joints()
    assert [j.name for j in ja] == [j.name for j in jb]
    assert [j.channels for j in ja] == [j.channels for j in jb]
    for x, y in zip(ja, jb):
        np.testing.assert_allclose(x.offset, y.offset, atol=tol)
        assert (x.end_site is None) == (y.end_site is None)
    assert abs(a.frame_time - b.frame_time) <= tol
    np.testing.assert_allclose(a.motion, b.motion, atol=tol)


def test_minimal_document():
    doc = bvh.parse_bvh(MINIMAL)
    assert len(doc.joints()) == 1
    assert doc.frame_count == 2
    assert doc.total_channels == 6
    assert doc.root.end_site == (0.0, 1.0, 0.0)
    assert doc.root.channels[3:] == ["Zrotation", "Xrotation", "Yrotation"]


def test_crlf_and_bytes():
    doc = bvh.parse_bvh(MINIMAL.replace("\n", "\r\n").encode())
    docs_close(doc, bvh.parse_bvh(MINIMAL))


@pytest.mark.parametrize("text", [MINIMAL, TWO_JOINT, fixture_bvh(24, 30, 2).decode()],
                         ids=["minimal", "two-joint", "fixture"])
def test_document_round_trip(text):
    doc = bvh.parse_bvh(text)
    again = bvh.parse_bvh(bvh.dump_document(doc))
    docs_close(doc, again)
    docs_close(again, bvh.parse_bvh(bvh.dump_document(again)), tol=0)


def test_channel_count_mismatch():
    text = MINIMAL.replace("1 1 2 90 0 0", "1 1 2 90 0")
    with pytest.raises(ChannelCountMismatchError) as e:
        bvh.parse_bvh(text)
    assert e.value.line == 15


def test_non_numeric_datum():
    with pytest.raises(BvhSyntaxError) as e:
        bvh.parse_bvh(MINIMAL.replace("1 1 2 90 0 0", "1 1 abc 90 0 0"))
    assert (e.value.line, e.value.column) == (15, 5)


def test_syntax_error_location():
    with pytest.raises(BvhSyntaxError) as e:
        bvh.parse_bvh(MINIMAL.replace("OFFSET 0 0 0", "OFSET 0 0 0"))
    assert (e.value.line, e.value.column) == (4, 3)


def test_frame_count_mismatch():
    with pytest.raises(BvhSyntaxError):
        bvh.parse_bvh(MINIMAL.replace("Frames: 2", "Frames: 3"))


def test_bad_frame_time():
    with pytest.raises(BvhSyntaxError):
        bvh.parse_bvh(MINIMAL.replace("0.0333333", "0"))


def test_zero_euler_is_identity():
    text = MINIMAL.replace("1 1 2 90 0 0", "1 1 2 0 0 0")
    sk, w = bvh.to_world_motion(bvh.parse_bvh(text))
    np.testing.assert_allclose(w.rotations[:, 0], [[1, 0, 0, 0]] * 2, atol=1e-12)
    np.testing.assert_allclose(w.root_positions, [[0, 1, 2], [1, 1, 2]])


def test_zrotation_in_zxy_order():
    sk, w = bvh.to_world_motion(bvh.parse_bvh(MINIMAL))
    np.testing.assert_allclose(w.rotations[1, 0], [S2, 0, 0, S2], atol=1e-6)
    assert sk.end_sites == ((0, (0.0, 1.0, 0.0)),)


def test_euler_order_matrix_oracle():
    from genmm.rotations import quat_to_matrix

    def R(axis, deg):
        a = np.deg2rad(deg)
        c, s = np.cos(a), np.sin(a)
        return {"X": np.array([[1, 0, 0], [0, c, -s], [0, s, c]]),
                "Y": np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]]),
                "Z": np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])}[axis]

    doc = bvh.parse_bvh(TWO_JOINT)
    with pytest.warns(UserWarning):
        sk, w = bvh.to_world_motion(doc)
    for f, row in enumerate(doc.motion):
        root = R("Y", row[3]) @ R("X", row[4]) @ R("Z", row[5])
        arm = R("X", row[9]) @ R("Z", row[10]) @ R("Y", row[11])
        np.testing.assert_allclose(quat_to_matrix(w.rotations[f, 0]), root, atol=1e-9)
        np.testing.assert_allclose(quat_to_matrix(w.rotations[f, 1]), arm, atol=1e-9)


def test_missing_rotation_channels():
    text = MINIMAL.replace("CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation",
                           "CHANNELS 3 Xposition Yposition Zposition").replace(
        "0 1 2 0 0 0", "0 1 2").replace("1 1 2 90 0 0", "1 1 2")
    with pytest.raises(UnsupportedChannelLayoutError, match="Hips"):
        bvh.to_world_motion(bvh.parse_bvh(text))


def test_serialize_empty_motion_rejected():
    sk, w = bvh.to_world_motion(bvh.parse_bvh(MINIMAL))
    with pytest.raises(InvalidInputError):
        bvh.serialize_bvh(sk, WorldMotion(np.zeros((0, 3)), np.zeros((0, 1, 4))), 30)


@pytest.mark.parametrize("text", [TWO_JOINT, fixture_bvh(24, 40, 5).decode()],
                         ids=["two-joint", "fixture"])
def test_world_round_trip(text):
    doc = bvh.parse_bvh(text)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sk, w = bvh.to_world_motion(doc)
    out = bvh.serialize_bvh(sk, w, 1 / doc.frame_time)
    doc2 = bvh.parse_bvh(out)
    sk2, w2 = bvh.to_world_motion(doc2)
    # ZYX output order everywhere
    assert all(j.channels[-3:] == ["Zrotation", "Yrotation", "Xrotation"] for j in doc2.joints())
    np.testing.assert_allclose(forward_kinematics(w, sk), forward_kinematics(w2, sk2), atol=1e-4)
    # idempotent once in canonical form
    docs_close(doc2, bvh.parse_bvh(bvh.serialize_bvh(sk2, w2, 1 / doc2.frame_time)))


def test_euler_folding_range():
    text = MINIMAL.replace("1 1 2 90 0 0", "1 1 2 180 0 0")
    sk, w = bvh.to_world_motion(bvh.parse_bvh(text))
    doc = bvh.parse_bvh(bvh.serialize_bvh(sk, w, 30))
    rot = doc.motion[:, 3:]
    assert np.all(rot > -180) and np.all(rot <= 180)


def test_scale_applies_to_lengths():
    sk, w = bvh.to_world_motion(bvh.parse_bvh(MINIMAL), scale=0.01)
    np.testing.assert_allclose(w.root_positions[1], [0.01, 0.01, 0.02])
    out = bvh.parse_bvh(bvh.serialize_bvh(sk, w, 30, scale=0.01))
    np.testing.assert_allclose(out.motion[1, :3], [1, 1, 2], atol=1e-6)


def test_default_foot_detection():
    sk, _ = bvh.to_world_motion(bvh.parse_bvh(fixture_bvh(24, 5, 1)))
    assert [sk.joints[f].name for f in sk.foot_joints] == [
        "LeftFoot", "LeftToe", "RightFoot", "RightToe"]
    sk, _ = bvh.to_world_motion(bvh.parse_bvh(fixture_bvh(24, 5, 1)), foot_names=["LeftToe"])
    assert sk.num_contacts == 1
