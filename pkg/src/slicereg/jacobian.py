"""Real Jacobian of a slice function in the basis {1, I, J, IJ}.

At ``y = alpha + I beta`` write ``q = df/dx(y)`` and ``p = J f'_s(y)`` in
coordinates; the Jacobian is::

    [[q0, -q1, p0, -p1],
     [q1,  q0, p1,  p0],
     [q2, -q3, p2, -p3],
     [q3,  q2, p3,  p2]]

i.e. ``df_y(v) = pi_I(v) q + pi_I^perp(v) f'_s(y)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quaternion as Q
from ._kernels import det_formula
from .slicefn import SliceFunction

RANK_TOL = 1e-8


@dataclass(frozen=True)
class JacobianMatrix:
    matrix: np.ndarray
    I: Q.ImaginaryUnit
    J: Q.ImaginaryUnit
    is_real_point: bool

    def basis(self) -> np.ndarray:
        return basis_rows(self.I.arr[None], self.J.arr[None])[0]

    def to_json(self) -> dict:
        return {"matrix": self.matrix.tolist(), "I": self.I.q.to_list(), "J": self.J.q.to_list(),
                "real_point": self.is_real_point}


def basis_rows(I: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Rows ``1, I, J, IJ`` as an ``(n, 4, 4)`` orthogonal matrix per point."""
    n = I.shape[0]
    B = np.empty((n, 4, 4))
    B[:, 0] = np.array([1.0, 0, 0, 0])
    B[:, 1] = I
    B[:, 2] = J
    B[:, 3] = Q.qmul(I, J)
    return B


def _orthogonal_units(I: np.ndarray) -> np.ndarray:
    """Vectorised :func:`quaternion.orthogonal_unit`."""
    basis = np.eye(4)[1:]
    pick = np.argmin(np.abs(I @ basis.T), axis=1)
    e = basis[pick]
    v = e - np.sum(e * I, axis=1, keepdims=True) * I
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _frames(q: np.ndarray, J=None):
    alpha, beta, I, is_real = Q.decompose_array(q)
    if J is None:
        Jm = _orthogonal_units(I)
    else:
        Jm = np.broadcast_to(Q.as_qarray(Q.unit_quaternion(J)), I.shape).copy()
        Jm = Jm - np.sum(Jm * I, axis=1, keepdims=True) * I
        nrm = np.linalg.norm(Jm, axis=1, keepdims=True)
        if np.any(nrm < 1e-8):
            raise ValueError("J must not be parallel to I")
        Jm = Jm / nrm
    return alpha, beta, I, Jm, is_real


def derivative_data(f: SliceFunction, q, check: bool = True):
    """``(df/dx(y), f'_s(y))`` as ``(n, 4)`` arrays."""
    q = np.atleast_2d(Q.as_qarray(q))
    dq = f.derivative_array(q, check)
    s = f.spherical_array(q, check=False)
    return dq, s


def jacobian_matrices(f: SliceFunction, q, J=None, check: bool = True):
    """Analytic Jacobians at an ``(n, 4)`` array; returns ``(M, I, J, is_real)``."""
    q = np.atleast_2d(Q.as_qarray(q))
    _, _, I, Jm, is_real = _frames(q, J)
    dq, s = derivative_data(f, q, check)
    B = basis_rows(I, Jm)
    qc = np.einsum("nij,nj->ni", B, dq)
    pc = np.einsum("nij,nj->ni", B, Q.qmul(Jm, s))
    M = np.empty((q.shape[0], 4, 4))
    for col, c in ((0, qc), (2, pc)):
        M[:, :, col] = c
        M[:, :, col + 1] = np.stack((-c[:, 1], c[:, 0], -c[:, 3], c[:, 2]), axis=1)
    return M, I, Jm, is_real


def jacobian_matrix(f: SliceFunction, y, J=None) -> JacobianMatrix:
    M, I, Jm, is_real = jacobian_matrices(f, Q.as_qarray(y), J)
    return JacobianMatrix(M[0], Q.ImaginaryUnit(Q.Quaternion.from_array(I[0])),
                          Q.ImaginaryUnit(Q.Quaternion.from_array(Jm[0])), bool(is_real[0]))


def det_formula_array(f: SliceFunction, q, check: bool = True) -> np.ndarray:
    """``<q, s>^2 + <q, I s>^2`` off the real axis, ``|q|^4`` on it."""
    q = np.atleast_2d(Q.as_qarray(q))
    _, _, I, is_real = Q.decompose_array(q)
    dq, s = derivative_data(f, q, check)
    d = det_formula(np.ascontiguousarray(dq), np.ascontiguousarray(s), np.ascontiguousarray(I))
    n2 = np.sum(dq * dq, axis=1)
    return np.where(is_real, n2 * n2, d)


def jacobian_det(f: SliceFunction, y, route: str = "formula") -> float:
    """Determinant by the closed formula (default) or the 4x4 matrix (``route="matrix"``)."""
    if route == "formula":
        return float(det_formula_array(f, Q.as_qarray(y))[0])
    if route == "matrix":
        return float(np.linalg.det(jacobian_matrix(f, y).matrix))
    raise ValueError(f"unknown route {route!r}")


def differential_apply(f: SliceFunction, y, v) -> Q.Quaternion:
    """``df_y(v) = pi_I(v) df/dx(y) + pi_I^perp(v) f'_s(y)``."""
    y = Q.as_qarray(y)
    v = Q.Quaternion.coerce(v)
    dq, s = derivative_data(f, y)
    c = Q.decompose(Q.Quaternion.from_array(y))
    vp = Q.project(v, c.J)
    return Q.Quaternion.from_array(Q.qmul(vp.arr, dq[0]) + Q.qmul((v - vp).arr, s[0]))


def rank_from_matrix(M: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    sv = np.linalg.svd(np.atleast_3d(M) if M.ndim == 3 else M[None], compute_uv=False)
    top = sv[:, :1]
    return np.where(top[:, 0] == 0, 0, np.sum(sv > tol * np.maximum(top, 1e-300), axis=1))


def rank(f: SliceFunction, y, tol: float = RANK_TOL) -> int:
    """Rank of the analytic Jacobian: 0, 2 or 4 (0 or 4 at real points)."""
    jm = jacobian_matrix(f, y)
    r = int(rank_from_matrix(jm.matrix, tol)[0])
    if jm.is_real_point:
        r = 0 if r < 2 else 4
    return r


def jacobian_fd(f: SliceFunction, q, J=None, h: float | None = None) -> np.ndarray:
    """Central-difference Jacobians in the same basis (one Richardson level)."""
    q = np.atleast_2d(Q.as_qarray(q))
    _, _, I, Jm, _ = _frames(q, J)
    B = basis_rows(I, Jm)
    hs = (1e-5 * np.maximum(1.0, np.linalg.norm(q, axis=1)) if h is None
          else np.full(q.shape[0], float(h)))
    M = np.empty((q.shape[0], 4, 4))
    for k in range(4):
        e = B[:, k]

        def diff(t):
            up = f.eval_array(q + t[:, None] * e, check=False)
            dn = f.eval_array(q - t[:, None] * e, check=False)
            return (up - dn) / (2 * t[:, None])

        d = (4 * diff(hs / 2) - diff(hs)) / 3
        M[:, :, k] = np.einsum("nij,nj->ni", B, d)
    return M


def det_relative_error(a, b) -> np.ndarray:
    """Pointwise ``|a - b| / |a|`` (zero when both vanish)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.abs(a - b) / np.abs(a)
    return np.where(a == b, 0.0, r)
