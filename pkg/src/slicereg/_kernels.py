"""Hot numeric kernels.

Each kernel exists twice: a loop version compiled with numba and a vectorised
numpy version. The public name is bound to one of them at import time
according to :mod:`slicereg._backend`. Both versions are importable under
their private names so the benchmark and the tests can compare them.
"""
import numpy as np

from ._backend import njit, pick


# -- quaternion product -------------------------------------------------------

def _qmul_np(a, b):
    a0, a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    b0, b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        (
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ),
        axis=-1,
    )


@njit
def _qmul_loop(a, b):
    n = a.shape[0]
    out = np.empty((n, 4))
    for t in range(n):
        a0, a1, a2, a3 = a[t, 0], a[t, 1], a[t, 2], a[t, 3]
        b0, b1, b2, b3 = b[t, 0], b[t, 1], b[t, 2], b[t, 3]
        out[t, 0] = a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3
        out[t, 1] = a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2
        out[t, 2] = a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1
        out[t, 3] = a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0
    return out


def _qmul_nb(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    shape = np.broadcast_shapes(a.shape, b.shape)
    a2 = np.ascontiguousarray(np.broadcast_to(a, shape)).reshape(-1, 4)
    b2 = np.ascontiguousarray(np.broadcast_to(b, shape)).reshape(-1, 4)
    return _qmul_loop(a2, b2).reshape(shape)


qmul_batch = pick(_qmul_nb, _qmul_np)


# -- polynomial stems ---------------------------------------------------------
# F(a + ib) = sum (a + ib)^n c_n. Horner keeps the accumulator as A + i*b*B so
# that B is F2/b exactly, including at b = 0.

def _poly_horner_np(coeffs, alpha, beta):
    alpha = alpha[:, None]
    b2 = (beta * beta)[:, None]
    A = np.broadcast_to(coeffs[-1], (alpha.shape[0], 4)).copy()
    B = np.zeros_like(A)
    for n in range(coeffs.shape[0] - 2, -1, -1):
        A, B = A * alpha - b2 * B + coeffs[n], A + alpha * B
    return A, B


@njit
def _poly_horner_loop(coeffs, alpha, beta):
    m = alpha.shape[0]
    d = coeffs.shape[0]
    A = np.empty((m, 4))
    B = np.empty((m, 4))
    for t in range(m):
        a = alpha[t]
        b2 = beta[t] * beta[t]
        for r in range(4):
            acc_a = coeffs[d - 1, r]
            acc_b = 0.0
            for n in range(d - 2, -1, -1):
                new_a = acc_a * a - b2 * acc_b + coeffs[n, r]
                acc_b = acc_a + a * acc_b
                acc_a = new_a
            A[t, r] = acc_a
            B[t, r] = acc_b
    return A, B


def _poly_horner_nb(coeffs, alpha, beta):
    return _poly_horner_loop(
        np.ascontiguousarray(coeffs, dtype=np.float64),
        np.ascontiguousarray(alpha, dtype=np.float64),
        np.ascontiguousarray(beta, dtype=np.float64),
    )


poly_horner = pick(_poly_horner_nb, _poly_horner_np)


# -- Jacobian determinant via the Euclidean formula ---------------------------

def _det_formula_np(q, s, unit):
    a = np.sum(q * s, axis=-1)
    b = np.sum(q * _qmul_np(unit, s), axis=-1)
    return a * a + b * b


@njit
def _det_formula_loop(q, s, unit):
    n = q.shape[0]
    out = np.empty(n)
    for t in range(n):
        u0, u1, u2, u3 = unit[t, 0], unit[t, 1], unit[t, 2], unit[t, 3]
        s0, s1, s2, s3 = s[t, 0], s[t, 1], s[t, 2], s[t, 3]
        w0 = u0 * s0 - u1 * s1 - u2 * s2 - u3 * s3
        w1 = u0 * s1 + u1 * s0 + u2 * s3 - u3 * s2
        w2 = u0 * s2 - u1 * s3 + u2 * s0 + u3 * s1
        w3 = u0 * s3 + u1 * s2 - u2 * s1 + u3 * s0
        a = q[t, 0] * s0 + q[t, 1] * s1 + q[t, 2] * s2 + q[t, 3] * s3
        b = q[t, 0] * w0 + q[t, 1] * w1 + q[t, 2] * w2 + q[t, 3] * w3
        out[t] = a * a + b * b
    return out


def _det_formula_nb(q, s, unit):
    return _det_formula_loop(
        np.ascontiguousarray(q, dtype=np.float64),
        np.ascontiguousarray(s, dtype=np.float64),
        np.ascontiguousarray(unit, dtype=np.float64),
    )


det_formula = pick(_det_formula_nb, _det_formula_np)


# -- grid seeding -------------------------------------------------------------

def _local_minima_np(v):
    """Interior grid nodes not larger than any of their 8 neighbours."""
    c = v[1:-1, 1:-1]
    ok = np.isfinite(c)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            nb = v[1 + di:v.shape[0] - 1 + di, 1 + dj:v.shape[1] - 1 + dj]
            ok &= c <= nb
    i, j = np.nonzero(ok)
    return np.stack((i + 1, j + 1), axis=-1)


@njit
def _local_minima_loop(v):
    n0, n1 = v.shape
    out = np.empty((n0 * n1, 2), dtype=np.int64)
    k = 0
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            c = v[i, j]
            if not np.isfinite(c):
                continue
            ok = True
            for di in range(-1, 2):
                for dj in range(-1, 2):
                    if (di != 0 or dj != 0) and not (c <= v[i + di, j + dj]):
                        ok = False
            if ok:
                out[k, 0] = i
                out[k, 1] = j
                k += 1
    return out[:k]


def _local_minima_nb(v):
    return _local_minima_loop(np.ascontiguousarray(v, dtype=np.float64))


local_minima = pick(_local_minima_nb, _local_minima_np)


def _sign_cells_np(u, v):
    """Cells of the grid where both ``u`` and ``v`` change sign."""
    def changes(w):
        corners = np.stack((w[:-1, :-1], w[1:, :-1], w[:-1, 1:], w[1:, 1:]))
        return (corners.min(axis=0) <= 0) & (corners.max(axis=0) >= 0)

    ok = changes(u) & changes(v)
    i, j = np.nonzero(ok)
    return np.stack((i, j), axis=-1)


@njit
def _sign_cells_loop(u, v):
    n0, n1 = u.shape
    out = np.empty(((n0 - 1) * (n1 - 1), 2), dtype=np.int64)
    k = 0
    for i in range(n0 - 1):
        for j in range(n1 - 1):
            umin = min(u[i, j], u[i + 1, j], u[i, j + 1], u[i + 1, j + 1])
            umax = max(u[i, j], u[i + 1, j], u[i, j + 1], u[i + 1, j + 1])
            vmin = min(v[i, j], v[i + 1, j], v[i, j + 1], v[i + 1, j + 1])
            vmax = max(v[i, j], v[i + 1, j], v[i, j + 1], v[i + 1, j + 1])
            if umin <= 0.0 <= umax and vmin <= 0.0 <= vmax:
                out[k, 0] = i
                out[k, 1] = j
                k += 1
    return out[:k]


def _sign_cells_nb(u, v):
    return _sign_cells_loop(
        np.ascontiguousarray(u, dtype=np.float64),
        np.ascontiguousarray(v, dtype=np.float64),
    )


sign_cells = pick(_sign_cells_nb, _sign_cells_np)


# -- injectivity probes -------------------------------------------------------

def _min_separation_np(x, fx):
    """Smallest ``|f(a)-f(b)| / |a-b|`` over distinct sample pairs."""
    dx = np.linalg.norm(x[:, None, :] - x[None, :, :], axis=-1)
    df = np.linalg.norm(fx[:, None, :] - fx[None, :, :], axis=-1)
    iu = np.triu_indices(x.shape[0], k=1)
    return float(np.min(df[iu] / dx[iu]))


@njit
def _min_separation_loop(x, fx):
    n, d = x.shape
    best = np.inf
    for a in range(n):
        for b in range(a + 1, n):
            sx = 0.0
            sf = 0.0
            for r in range(d):
                t = x[a, r] - x[b, r]
                sx += t * t
                t = fx[a, r] - fx[b, r]
                sf += t * t
            if sx > 0.0:
                ratio = np.sqrt(sf / sx)
                if ratio < best:
                    best = ratio
    return best


def _min_separation_nb(x, fx):
    return float(_min_separation_loop(
        np.ascontiguousarray(x, dtype=np.float64),
        np.ascontiguousarray(fx, dtype=np.float64),
    ))


min_separation = pick(_min_separation_nb, _min_separation_np)
