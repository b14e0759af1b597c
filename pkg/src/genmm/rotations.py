"""Rotation codecs. Quaternions are (w, x, y, z); 6D is the first two matrix
columns concatenated, (c0, c1)."""

import numpy as np

from .errors import DegenerateRotationError, InvalidInputError

UNIT_TOL = 1e-6


def canonicalize(q):
    """Flip quaternions so the scalar part is non-negative."""
    q = np.asarray(q, dtype=np.float64)
    sign = np.where(q[..., :1] < 0.0, -1.0, 1.0)
    return q * sign


def quat_to_matrix(q):
    q = np.asarray(q, dtype=np.float64)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    m = np.empty(q.shape[:-1] + (3, 3))
    m[..., 0, 0] = 1 - 2 * (y * y + z * z)
    m[..., 0, 1] = 2 * (x * y - w * z)
    m[..., 0, 2] = 2 * (x * z + w * y)
    m[..., 1, 0] = 2 * (x * y + w * z)
    m[..., 1, 1] = 1 - 2 * (x * x + z * z)
    m[..., 1, 2] = 2 * (y * z - w * x)
    m[..., 2, 0] = 2 * (x * z - w * y)
    m[..., 2, 1] = 2 * (y * z + w * x)
    m[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return m


def matrix_to_quat(m):
    """Shepperd's method, vectorized. Output is canonicalized (w >= 0)."""
    m = np.asarray(m, dtype=np.float64)
    m00, m11, m22 = m[..., 0, 0], m[..., 1, 1], m[..., 2, 2]
    trace = m00 + m11 + m22
    # pick the numerically largest of 4w^2, 4x^2, 4y^2, 4z^2
    cand = np.stack([trace, m00, m11, m22], axis=-1)
    best = np.argmax(cand, axis=-1)
    q = np.empty(m.shape[:-2] + (4,))

    sel = best == 0
    s = np.sqrt(np.maximum(1.0 + trace[sel], 0.0)) * 2
    q[sel, 0] = 0.25 * s
    q[sel, 1] = (m[sel, 2, 1] - m[sel, 1, 2]) / s
    q[sel, 2] = (m[sel, 0, 2] - m[sel, 2, 0]) / s
    q[sel, 3] = (m[sel, 1, 0] - m[sel, 0, 1]) / s

    sel = best == 1
    s = np.sqrt(np.maximum(1.0 + m00[sel] - m11[sel] - m22[sel], 0.0)) * 2
    q[sel, 0] = (m[sel, 2, 1] - m[sel, 1, 2]) / s
    q[sel, 1] = 0.25 * s
    q[sel, 2] = (m[sel, 0, 1] + m[sel, 1, 0]) / s
    q[sel, 3] = (m[sel, 0, 2] + m[sel, 2, 0]) / s

    sel = best == 2
    s = np.sqrt(np.maximum(1.0 + m11[sel] - m00[sel] - m22[sel], 0.0)) * 2
    q[sel, 0] = (m[sel, 0, 2] - m[sel, 2, 0]) / s
    q[sel, 1] = (m[sel, 0, 1] + m[sel, 1, 0]) / s
    q[sel, 2] = 0.25 * s
    q[sel, 3] = (m[sel, 1, 2] + m[sel, 2, 1]) / s

    sel = best == 3
    s = np.sqrt(np.maximum(1.0 + m22[sel] - m00[sel] - m11[sel], 0.0)) * 2
    q[sel, 0] = (m[sel, 1, 0] - m[sel, 0, 1]) / s
    q[sel, 1] = (m[sel, 0, 2] + m[sel, 2, 0]) / s
    q[sel, 2] = (m[sel, 1, 2] + m[sel, 2, 1]) / s
    q[sel, 3] = 0.25 * s

    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    return canonicalize(q)


def quat_to_6d(q):
    """Unit quaternion(s) (..., 4) -> 6D (..., 6)."""
    q = np.asarray(q, dtype=np.float64)
    norm = np.linalg.norm(q, axis=-1)
    if np.any(np.abs(norm - 1.0) > UNIT_TOL):
        raise InvalidInputError("quaternion is not unit-norm")
    m = quat_to_matrix(q)
    return np.concatenate([m[..., :, 0], m[..., :, 1]], axis=-1)


def sixd_to_matrix(r, eps=1e-8):
    """Gram-Schmidt two columns into a proper rotation matrix.

    Raises DegenerateRotationError for a near-zero first column or near-parallel
    columns; the error carries the flat index of the first bad element.
    """
    r = np.asarray(r, dtype=np.float64)
    a, b = r[..., :3], r[..., 3:6]
    na = np.linalg.norm(a, axis=-1, keepdims=True)
    bad = na[..., 0] <= eps
    x = a / np.where(na > eps, na, 1.0)
    b_perp = b - np.sum(x * b, axis=-1, keepdims=True) * x
    nb = np.linalg.norm(b_perp, axis=-1, keepdims=True)
    bad |= nb[..., 0] <= eps
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        raise DegenerateRotationError("degenerate 6D rotation", *_frame_joint(idx))
    y = b_perp / nb
    z = np.cross(x, y)
    return np.stack([x, y, z], axis=-1)


def _frame_joint(idx):
    idx = [int(i) for i in idx]
    if len(idx) >= 2:
        return idx[0], idx[1]
    if len(idx) == 1:
        return idx[0], None
    return None, None


def sixd_to_quat(r):
    return matrix_to_quat(sixd_to_matrix(r))


def quat_mul(a, b):
    aw, ax, ay, az = np.moveaxis(np.asarray(a, dtype=np.float64), -1, 0)
    bw, bx, by, bz = np.moveaxis(np.asarray(b, dtype=np.float64), -1, 0)
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ], axis=-1)


def geodesic_angle(qa, qb):
    """Rotation angle (radians) between unit quaternions, sign-insensitive."""
    d = np.abs(np.sum(np.asarray(qa) * np.asarray(qb), axis=-1))
    return 2.0 * np.arccos(np.clip(d, 0.0, 1.0))
