"""Grid seeding and Newton-type polishing shared by the fiber and singular-set code."""
from __future__ import annotations

import numpy as np

from ._kernels import local_minima, sign_cells

MAX_ITER = 50
STEP_TOL = 1e-12


def half_plane_grid(region, n: int, beta_floor: float):
    """``n x n`` node grid over ``region = (a0, a1, b0, b1)`` with ``beta >= beta_floor``."""
    a0, a1, b0, b1 = region
    b0 = max(b0, beta_floor)
    a = np.linspace(a0, a1, n)
    b = np.linspace(b0, b1, n)
    A, B = np.meshgrid(a, b, indexing="ij")
    return A, B


def seeds_from_grid(A, B, mag, u=None, v=None, cap: int = 400):
    """Seeds at local minima of ``mag`` plus cells where ``u`` and ``v`` both change sign."""
    pts = []
    idx = local_minima(np.where(np.isfinite(mag), mag, np.inf))
    if idx.size:
        order = np.argsort(mag[idx[:, 0], idx[:, 1]])[:cap]
        idx = idx[order]
        pts.append(np.stack((A[idx[:, 0], idx[:, 1]], B[idx[:, 0], idx[:, 1]]), axis=1))
    if u is not None:
        cells = sign_cells(np.nan_to_num(u, nan=1.0), np.nan_to_num(v, nan=1.0))
        if cells.size:
            cells = cells[:cap]
            i, j = cells[:, 0], cells[:, 1]
            pts.append(np.stack((0.5 * (A[i, j] + A[i + 1, j + 1]),
                                 0.5 * (B[i, j] + B[i + 1, j + 1])), axis=1))
    # the lowest edge row often hosts minima that local_minima skips
    edge = np.argsort(mag[:, 0])[:4]
    pts.append(np.stack((A[edge, 0], B[edge, 0]), axis=1))
    out = np.concatenate(pts) if pts else np.zeros((0, 2))
    return out[np.all(np.isfinite(out), axis=1)]


def schroder_newton(fun, z0: np.ndarray, iters: int = MAX_ITER, reflect: bool = True):
    """Vectorised multiple-root Newton ``z <- z - n n' / (n'^2 - n n'')``.

    ``fun(z)`` returns ``(n, dn, d2n)`` for a complex array ``z``. Iterates
    with negative imaginary part are mirrored when ``reflect`` is set; this is
    valid for functions with ``n(conj z) = conj n(z)``.
    """
    z = np.asarray(z0, dtype=complex).copy()
    active = np.ones(z.shape, dtype=bool)
    for _ in range(iters):
        if not active.any():
            break
        za = z[active]
        n, dn, d2 = fun(za)
        den = dn * dn - n * d2
        with np.errstate(all="ignore"):
            step = np.where(den != 0, n * dn / den, np.where(dn != 0, n / np.where(dn != 0, dn, 1), 0))
        step = np.where(np.isfinite(step), step, 0)
        # damp wild steps
        big = np.abs(step) > 1.0 + np.abs(za)
        step[big] *= (1.0 + np.abs(za[big])) / np.abs(step[big])
        zn = za - step
        if reflect:
            zn = np.where(zn.imag < 0, np.conj(zn), zn)
        z[active] = zn
        done = np.abs(step) <= STEP_TOL * (1.0 + np.abs(zn))
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    return z


def gauss_newton(resid, jac, x0: np.ndarray, iters: int = MAX_ITER, tol: float = STEP_TOL):
    """Batched Gauss-Newton with pseudo-inverse steps.

    ``resid(x)`` maps ``(k, d)`` to ``(k, m)``; ``jac(x)`` to ``(k, m, d)``.
    """
    x = np.array(x0, dtype=float)
    active = np.ones(x.shape[0], dtype=bool)
    for _ in range(iters):
        if not active.any():
            break
        xa = x[active]
        r = resid(xa)
        Jm = jac(xa)
        ok = np.all(np.isfinite(r), axis=1) & np.all(np.isfinite(Jm), axis=(1, 2))
        step = np.zeros_like(xa)
        if ok.any():
            step[ok] = np.einsum("kij,kj->ki", np.linalg.pinv(Jm[ok], rcond=1e-12), r[ok])
        scale = 1.0 + np.linalg.norm(xa, axis=1)
        big = np.linalg.norm(step, axis=1) > 0.5 * scale
        step[big] *= (0.5 * scale[big] / np.linalg.norm(step[big], axis=1))[:, None]
        x[active] = xa - step
        done = (np.linalg.norm(step, axis=1) <= tol * scale) | ~ok
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    return x


def dedupe(points: np.ndarray, radius: float = 1e-7, key=None) -> np.ndarray:
    """Drop points within ``radius (1 + |p|)`` of an earlier kept point.

    With ``key`` (one value per point, smaller is better) the best
    representative of each cluster is kept.
    """
    if points.shape[0] == 0:
        return points
    order = np.argsort(key) if key is not None else np.lexsort(points.T[::-1])
    kept = []
    for i in order:
        p = points[i]
        if all(np.linalg.norm(p - points[k]) > radius * (1.0 + np.linalg.norm(p)) for k in kept):
            kept.append(i)
    kept.sort(key=lambda k: tuple(points[k]))
    return points[kept]


def polish_quaternion(f, x: np.ndarray, c: np.ndarray, iters: int = 8) -> np.ndarray:
    """Gauss-Newton on ``f(x) = c`` in H using the analytic Jacobian."""
    from .jacobian import basis_rows, jacobian_matrices

    x = np.atleast_2d(np.array(x, dtype=float))
    best = x.copy()
    best_r = np.linalg.norm(f.eval_array(x, check=False) - c, axis=1)
    for _ in range(iters):
        M, I, Jm, _ = jacobian_matrices(f, x, check=False)
        B = basis_rows(I, Jm)
        r = c - f.eval_array(x, check=False)
        coords = np.einsum("kij,kj->ki", B, r)
        step_c = np.einsum("kij,kj->ki", np.linalg.pinv(M, rcond=1e-10), coords)
        x = x + np.einsum("kji,kj->ki", B, step_c)
        rn = np.linalg.norm(f.eval_array(x, check=False) - c, axis=1)
        better = np.isfinite(rn) & (rn < best_r)
        best[better] = x[better]
        best_r[better] = rn[better]
        x = best.copy()
    return best


def sphere_points(alpha: float, beta: float, units: np.ndarray) -> np.ndarray:
    out = units * beta
    out[:, 0] = alpha
    return out


__all__ = ["half_plane_grid", "seeds_from_grid", "schroder_newton", "gauss_newton", "dedupe",
           "polish_quaternion", "sphere_points"]
