"""BVH reader/writer.

``parse_bvh``/``dump_document`` work on the raw document and keep channel
orders verbatim. ``to_world_motion``/``serialize_bvh`` bridge to the
Skeleton/WorldMotion types; output files always use ZYX Euler order.
"""

import re
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import (BvhSyntaxError, ChannelCountMismatchError, InvalidInputError,
                     UnsupportedChannelLayoutError)
from .motion import Joint, Skeleton, WorldMotion

_POS = ("Xposition", "Yposition", "Zposition")
_ROT = ("Xrotation", "Yrotation", "Zrotation")
_VALID_CHANNELS = set(_POS + _ROT)

DEFAULT_FOOT_PATTERN = re.compile(r"foot|toe", re.IGNORECASE)


@dataclass
class BvhJoint:
    name: str
    offset: Tuple[float, float, float]
    channels: List[str]
    children: List["BvhJoint"] = field(default_factory=list)
    end_site: Optional[Tuple[float, float, float]] = None


@dataclass
class BvhDocument:
    root: BvhJoint
    frame_time: float
    motion: np.ndarray  # (frame_count, total_channels)

    @property
    def frame_count(self):
        return self.motion.shape[0]

    def joints(self):
        """Depth-first joint list (the motion-channel order)."""
        out = []

        def visit(j):
            out.append(j)
            for c in j.children:
                visit(c)

        visit(self.root)
        return out

    @property
    def total_channels(self):
        return sum(len(j.channels) for j in self.joints())


class _Tokens:
    def __init__(self, lines):
        self.toks = []
        for ln, line in enumerate(lines, start=1):
            for m in re.finditer(r"\S+", line):
                self.toks.append((m.group(0), ln, m.start() + 1))
        self.i = 0

    def peek(self):
        if self.i >= len(self.toks):
            return None
        return self.toks[self.i][0]

    def where(self):
        if self.i >= len(self.toks):
            if self.toks:
                _, ln, col = self.toks[-1]
                return ln, col
            return 1, 1
        return self.toks[self.i][1:]

    def next(self, what="token"):
        if self.i >= len(self.toks):
            ln, col = self.where()
            raise BvhSyntaxError(f"unexpected end of file, expected {what}", ln, col)
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok, ln, col = self.next(repr(value))
        if tok != value:
            raise BvhSyntaxError(f"expected {value!r}, got {tok!r}", ln, col)

    def number(self):
        tok, ln, col = self.next("number")
        try:
            return float(tok)
        except ValueError:
            raise BvhSyntaxError(f"expected number, got {tok!r}", ln, col) from None

    def integer(self):
        tok, ln, col = self.next("integer")
        try:
            return int(tok)
        except ValueError:
            raise BvhSyntaxError(f"expected integer, got {tok!r}", ln, col) from None


def _parse_joint(toks, name):
    toks.expect("{")
    offset = None
    channels = []
    children = []
    end_site = None
    while True:
        tok, ln, col = toks.next("joint body")
        if tok == "}":
            break
        if tok == "OFFSET":
            offset = (toks.number(), toks.number(), toks.number())
        elif tok == "CHANNELS":
            n = toks.integer()
            for _ in range(n):
                ch, cln, ccol = toks.next("channel name")
                if ch not in _VALID_CHANNELS:
                    raise BvhSyntaxError(f"unknown channel {ch!r}", cln, ccol)
                channels.append(ch)
        elif tok == "JOINT":
            child_name, _, _ = toks.next("joint name")
            children.append(_parse_joint(toks, child_name))
        elif tok == "End":
            toks.expect("Site")
            toks.expect("{")
            toks.expect("OFFSET")
            end_site = (toks.number(), toks.number(), toks.number())
            toks.expect("}")
        else:
            raise BvhSyntaxError(f"unexpected token {tok!r} in joint {name!r}", ln, col)
    if offset is None:
        offset = (0.0, 0.0, 0.0)
    return BvhJoint(name, offset, channels, children, end_site)


def parse_bvh(data) -> BvhDocument:
    """Parse BVH text (str or bytes; LF or CRLF)."""
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8-sig")
    lines = data.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    try:
        motion_at = next(i for i, l in enumerate(lines) if l.strip() == "MOTION")
    except StopIteration:
        raise BvhSyntaxError("missing MOTION section", len(lines), 1) from None

    toks = _Tokens(lines[:motion_at])
    toks.expect("HIERARCHY")
    toks.expect("ROOT")
    root_name, _, _ = toks.next("root name")
    root = _parse_joint(toks, root_name)
    if toks.peek() is not None:
        _, ln, col = toks.next()
        raise BvhSyntaxError("trailing content after hierarchy", ln, col)

    header = []
    body_start = motion_at + 1
    while len(header) < 2:
        if body_start >= len(lines):
            raise BvhSyntaxError("missing Frames/Frame Time header", body_start, 1)
        line = lines[body_start].strip()
        body_start += 1
        if line:
            header.append((line, body_start))
    (frames_line, fl), (time_line, tl) = header
    m = re.fullmatch(r"Frames:\s*(\S+)", frames_line)
    if not m:
        raise BvhSyntaxError("expected 'Frames: <n>'", fl, 1)
    try:
        n_frames = int(m.group(1))
    except ValueError:
        raise BvhSyntaxError(f"bad frame count {m.group(1)!r}", fl, 1) from None
    m = re.fullmatch(r"Frame Time:\s*(\S+)", time_line)
    if not m:
        raise BvhSyntaxError("expected 'Frame Time: <seconds>'", tl, 1)
    try:
        frame_time = float(m.group(1))
    except ValueError:
        raise BvhSyntaxError(f"bad frame time {m.group(1)!r}", tl, 1) from None
    if not frame_time > 0:
        raise BvhSyntaxError("frame time must be positive", tl, 1)

    doc = BvhDocument(root, frame_time, np.zeros((0, 0)))
    n_ch = doc.total_channels
    rows = []
    for ln in range(body_start, len(lines)):
        line = lines[ln]
        if not line.strip():
            continue
        vals = []
        for mt in re.finditer(r"\S+", line):
            try:
                vals.append(float(mt.group(0)))
            except ValueError:
                raise BvhSyntaxError(f"non-numeric motion datum {mt.group(0)!r}",
                                     ln + 1, mt.start() + 1) from None
        if len(vals) != n_ch:
            raise ChannelCountMismatchError(
                f"expected {n_ch} channel values, found {len(vals)}", ln + 1, 1)
        rows.append(vals)
    if len(rows) != n_frames:
        raise BvhSyntaxError(f"header declares {n_frames} frames but {len(rows)} found",
                             len(lines), 1)
    doc.motion = np.array(rows, dtype=np.float64).reshape(n_frames, n_ch)
    return doc


def _fmt(x):
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def dump_document(doc: BvhDocument) -> bytes:
    out = ["HIERARCHY"]

    def write(j, depth):
        ind = "\t" * depth
        out.append(f"{ind}{'ROOT' if depth == 0 else 'JOINT'} {j.name}")
        out.append(f"{ind}{{")
        out.append(f"{ind}\tOFFSET {' '.join(_fmt(v) for v in j.offset)}")
        out.append(f"{ind}\tCHANNELS {len(j.channels)}" +
                   "".join(f" {c}" for c in j.channels))
        for c in j.children:
            write(c, depth + 1)
        if j.end_site is not None:
            out.append(f"{ind}\tEnd Site")
            out.append(f"{ind}\t{{")
            out.append(f"{ind}\t\tOFFSET {' '.join(_fmt(v) for v in j.end_site)}")
            out.append(f"{ind}\t}}")
        out.append(f"{ind}}}")

    write(doc.root, 0)
    out.append("MOTION")
    out.append(f"Frames: {doc.frame_count}")
    out.append(f"Frame Time: {doc.frame_time:.8f}")
    for row in doc.motion:
        out.append(" ".join(_fmt(v) for v in row))
    return ("\n".join(out) + "\n").encode("ascii")


def to_world_motion(doc: BvhDocument, scale=1.0, foot_names: Optional[Sequence[str]] = None):
    """Convert a parsed document to (Skeleton, WorldMotion).

    ``foot_names`` selects contact joints; by default every joint whose name
    contains "foot" or "toe" is used.
    """
    joints = doc.joints()
    parent_of = {}

    def link(j, parent):
        parent_of[id(j)] = parent
        for c in j.children:
            link(c, j)

    link(doc.root, None)
    index_of = {id(j): k for k, j in enumerate(joints)}

    H = doc.frame_count
    J = len(joints)
    quats = np.empty((H, J, 4))
    root_pos = None
    col = 0
    sk_joints = []
    end_sites = []
    for k, j in enumerate(joints):
        chans = j.channels
        cols = {c: col + i for i, c in enumerate(chans)}
        col += len(chans)
        pos_ch = [c for c in chans if c in _POS]
        rot_ch = [c for c in chans if c in _ROT]
        if len(rot_ch) != 3 or len(set(rot_ch)) != 3:
            raise UnsupportedChannelLayoutError(
                f"joint {j.name!r} must declare exactly 3 rotation channels, has {chans}")
        if k == 0:
            if sorted(pos_ch) != list(_POS):
                raise UnsupportedChannelLayoutError(
                    f"root joint {j.name!r} must declare 3 position channels, has {chans}")
            root_pos = np.stack([doc.motion[:, cols[c]] for c in _POS], axis=1) * scale
        elif pos_ch:
            warnings.warn(f"ignoring position channels on non-root joint {j.name!r}; "
                          "its OFFSET is used as a rigid offset")
        order = "".join(c[0] for c in rot_ch)
        angles = np.stack([doc.motion[:, cols[c]] for c in rot_ch], axis=1)
        if H:
            xyzw = Rotation.from_euler(order, angles, degrees=True).as_quat()
            quats[:, k] = xyzw[:, [3, 0, 1, 2]]
        parent = parent_of[id(j)]
        sk_joints.append(Joint(j.name, None if parent is None else index_of[id(parent)],
                               tuple(float(v) * scale for v in j.offset)))
        if j.end_site is not None:
            end_sites.append((k, tuple(float(v) * scale for v in j.end_site)))

    if foot_names is None:
        feet = [k for k, j in enumerate(joints) if DEFAULT_FOOT_PATTERN.search(j.name)]
    else:
        names = [j.name for j in joints]
        feet = []
        for n in foot_names:
            if n not in names:
                raise InvalidInputError(f"unknown foot joint {n!r}")
            feet.append(names.index(n))
    skel = Skeleton(tuple(sk_joints), tuple(feet), tuple(end_sites))
    if root_pos is None:
        root_pos = np.zeros((H, 3))
    return skel, WorldMotion(root_pos, quats)


def _fold(deg):
    # (-180, 180]
    deg = np.where(deg <= -180.0 + 1e-9, deg + 360.0, deg)
    return np.where(deg > 180.0, deg - 360.0, deg)


def world_to_document(s: Skeleton, w: WorldMotion, fps, scale=1.0) -> BvhDocument:
    if w.frames == 0:
        raise InvalidInputError("cannot serialize an empty motion")
    if w.num_joints != s.num_joints:
        raise InvalidInputError("motion/skeleton joint count mismatch")
    end_sites = dict(s.end_sites)
    nodes = []
    for k, j in enumerate(s.joints):
        chans = ["Zrotation", "Yrotation", "Xrotation"]
        if k == 0:
            chans = list(_POS) + chans
        off = tuple(v / scale for v in j.offset)
        site = end_sites.get(k)
        if site is None and not s.children(k):
            site = (0.0, 0.0, 0.0)
        elif site is not None:
            site = tuple(v / scale for v in site)
        nodes.append(BvhJoint(j.name, off, chans, [], site))
    for k, j in enumerate(s.joints):
        if j.parent is not None:
            nodes[j.parent].children.append(nodes[k])
    doc = BvhDocument(nodes[0], 1.0 / fps, np.zeros((0, 0)))

    xyzw = w.rotations[..., [1, 2, 3, 0]].reshape(-1, 4)
    eul = Rotation.from_quat(xyzw).as_euler("ZYX", degrees=True)
    eul = _fold(eul).reshape(w.frames, s.num_joints, 3)
    # motion columns follow the hierarchy's depth-first order
    dfs = [id(n) for n in doc.joints()]
    pos_of = {id(n): k for k, n in enumerate(nodes)}
    cols = [w.root_positions / scale]
    for nid in dfs:
        cols.append(eul[:, pos_of[nid]])
    doc.motion = np.concatenate(cols, axis=1)
    return doc


def serialize_bvh(s: Skeleton, w: WorldMotion, fps, scale=1.0) -> bytes:
    return dump_document(world_to_document(s, w, fps, scale))


def read_bvh(path, scale=1.0, foot_names=None):
    """Load a file; returns (Skeleton, WorldMotion, fps)."""
    with open(path, "rb") as f:
        doc = parse_bvh(f.read())
    skel, motion = to_world_motion(doc, scale=scale, foot_names=foot_names)
    return skel, motion, 1.0 / doc.frame_time


def write_bvh(path, s, w, fps, scale=1.0):
    with open(path, "wb") as f:
        f.write(serialize_bvh(s, w, fps, scale))
