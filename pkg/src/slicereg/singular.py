"""Singular set N_f: membership, sphere sections, degenerate set and dimension triples."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quaternion as Q
from ._roots import dedupe, gauss_newton, half_plane_grid, seeds_from_grid
from .domain import DomainError
from .fibers import WingSetReport, degenerate_points, find_wings, solve_fiber
from .jacobian import derivative_data, det_formula_array
from .slicefn import SliceFunction

TOL_SINGULAR = 1e-8
TOL_SPHERE = 1e-9
SLICE_GRID = 60
N_UNITS = 12
WITNESS_DIST = 1e-5

ADMISSIBLE = frozenset({
    (-1, -1, -1), (-1, -1, 2), (-1, 2, -1), (-1, 2, 2), (-1, 3, -1), (-1, 3, 2),
    (2, -1, 2), (2, 2, -1), (2, 2, 2), (3, -1, -1), (3, -1, 2),
})
ADMISSIBLE_SLICE = frozenset(t for t in ADMISSIBLE if t[1] == -1)


# -- membership -----------------------------------------------------------------------------

def singular_residuals(f: SliceFunction, q, check: bool = True):
    """``(<df/dx, f'_s>, <df/dx, I f'_s>, scale)`` per point; real points use ``|df/dx|``."""
    q = np.atleast_2d(Q.as_qarray(q))
    alpha, beta, I, is_real = Q.decompose_array(q)
    dq, s = derivative_data(f, q, check)
    r1 = Q.qdot(dq, s)
    r2 = Q.qdot(dq, Q.qmul(I, s))
    scale = 1.0 + np.linalg.norm(dq, axis=1) + np.linalg.norm(s, axis=1)
    nd = np.linalg.norm(dq, axis=1)
    r1 = np.where(is_real, nd, r1)
    r2 = np.where(is_real, 0.0, r2)
    return r1, r2, scale, is_real


def in_singular_set_array(f: SliceFunction, q, tol: float = TOL_SINGULAR, check: bool = True):
    r1, r2, scale, is_real = singular_residuals(f, q, check)
    nonreal = (np.abs(r1) < tol * scale**2) & (np.abs(r2) < tol * scale**2)
    return np.where(is_real, r1 < tol * scale, nonreal)


def in_singular_set(f: SliceFunction, y, tol: float = TOL_SINGULAR) -> bool:
    """Whether the real Jacobian of ``f`` at ``y`` is singular."""
    return bool(in_singular_set_array(f, Q.as_qarray(y), tol)[0])


# -- sphere sections --------------------------------------------------------------------------

@dataclass
class SphereSection:
    """``N_f`` intersected with the sphere ``S_y = alpha + S_H beta``."""

    sphere: tuple
    kind: str
    points: list = field(default_factory=list)
    circle: dict | None = None
    p: Q.Quaternion | None = None
    q: Q.Quaternion | None = None

    def contains_unit(self, J, tol: float = 1e-6) -> bool:
        J = Q.as_qarray(Q.Quaternion.coerce(J))[1:]
        if self.kind == "WholeSphere":
            return True
        if self.kind in ("Point", "TwoPoints"):
            return any(np.linalg.norm(J - Q.as_qarray(p)[1:]) < tol for p in self.points)
        if self.kind == "Circle":
            c = np.asarray(self.circle["center"])
            nrm = np.asarray(self.circle["normal"])
            return abs((J - c) @ nrm) < tol and abs(np.linalg.norm(J - c) - self.circle["radius"]) < tol
        return False

    def to_json(self) -> dict:
        return {"sphere": list(map(float, self.sphere)), "kind": self.kind,
                "points": [Q.Quaternion.coerce(p).to_list() for p in self.points],
                "circle": self.circle,
                "p": None if self.p is None else self.p.to_list(),
                "q": None if self.q is None else self.q.to_list()}


def _f_tilde(f: SliceFunction, x: np.ndarray) -> np.ndarray:
    dq, s = derivative_data(f, x, check=False)
    return Q.qmul(dq, Q.qconj(s))


def sphere_section(f: SliceFunction, y) -> SphereSection:
    """Points ``alpha + J beta`` of ``S_y`` where ``J_f`` is singular.

    With ``f~ = df/dx conj(f'_s)`` affine on ``S_y`` as ``p + J q``, the
    conditions read ``p0 - <J, q_v> = 0`` and ``q0 + <J, p_v> = 0``: two
    linear equations in the unit ``J``.
    """
    yq = Q.Quaternion.coerce(y)
    c = Q.decompose(yq)
    if c.beta == 0.0:
        raise ValueError("sphere_section needs a non-real point")
    if not f.domain.contains_quaternion(yq):
        raise DomainError(f"{yq} is outside {f.domain.describe()}")
    alpha, beta, I = c.alpha, c.beta, c.J.arr
    x = np.stack((I * beta, -I * beta))
    x[:, 0] = alpha
    ft = _f_tilde(f, x)
    p = 0.5 * (ft[0] + ft[1])
    q = Q.qmul(-I, 0.5 * (ft[0] - ft[1]))
    A = np.stack((q[1:], p[1:]))
    rhs = np.array([p[0], -q[0]])
    scale = 1.0 + np.abs(p).max() + np.abs(q).max()
    sec = SphereSection((alpha, beta), "Empty", p=Q.Quaternion.from_array(p),
                        q=Q.Quaternion.from_array(q))
    U, sv, Vt = np.linalg.svd(A)
    r = int(np.sum(sv > TOL_SPHERE * scale))
    if r == 0:
        sec.kind = "WholeSphere" if np.abs(rhs).max() < TOL_SPHERE * scale else "Empty"
        return sec
    j0 = Vt[:r].T @ ((U[:, :r].T @ rhs) / sv[:r])
    if np.abs(A @ j0 - rhs).max() > TOL_SPHERE * scale:
        return sec
    null = Vt[r:]
    d = np.linalg.norm(j0)

    def unit(v):
        return Q.Quaternion(0.0, *v)

    if abs(d - 1.0) <= TOL_SPHERE:
        sec.kind = "Point"
        sec.points = [unit(j0 / d)]
    elif d < 1.0:
        h = math.sqrt(1.0 - d * d)
        if r == 2:
            sec.kind = "TwoPoints"
            sec.points = [unit(j0 - h * null[0]), unit(j0 + h * null[0])]
        else:
            normal = Vt[0]
            sec.kind = "Circle"
            sec.circle = {"center": j0.tolist(), "radius": h, "normal": normal.tolist()}
            sec.points = [unit(j0 + h * null[0]), unit(j0 + h * null[1])]
    return sec


# -- degenerate set ---------------------------------------------------------------------------

@dataclass
class DegenerateSet:
    """Zero set of ``F2`` in D+ (equivalently of ``f'_s`` off the real axis)."""

    kind: str
    spheres: list = field(default_factory=list)
    curve: np.ndarray | None = None
    d: int = -1
    refinement: dict = field(default_factory=dict)
    axis: np.ndarray | None = None

    def distance(self, f: SliceFunction, alpha, beta) -> np.ndarray:
        """Distance proxy in the ``(alpha, beta)`` half plane (exact for spheres).

        For curves the first-order estimate ``|u| / |grad u|`` is capped by
        the distance to the sampled curve points, since it blows up where the
        gradient vanishes.
        """
        a = np.atleast_1d(np.asarray(alpha, float))
        b = np.atleast_1d(np.asarray(beta, float))
        if self.kind == "Empty":
            return np.full(a.shape, np.inf)
        if self.kind == "Spheres":
            S = np.asarray(self.spheres)
            return np.min(np.hypot(a[:, None] - S[None, :, 0], b[:, None] - S[None, :, 1]), axis=1)
        F1, F2 = f.stem.eval(a, b)
        D1, D2 = f.stem.derivative().eval(a, b)
        u = F2 @ self.axis
        g = np.hypot(D2 @ self.axis, D1 @ self.axis)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.where(g > 0, np.abs(u) / g, np.where(u == 0, 0.0, np.inf))
        if self.curve is not None and self.curve.shape[0]:
            C = self.curve
            near = np.min(np.hypot(a[:, None] - C[None, :, 0], b[:, None] - C[None, :, 1]), axis=1)
            d = np.minimum(d, near)
        return d

    def to_json(self) -> dict:
        out = {"kind": self.kind, "d": self.d, "refinement": self.refinement}
        if self.kind == "Spheres":
            out["spheres"] = [[float(a), float(b)] for a, b in self.spheres]
        if self.kind == "Curve":
            out["curve"] = self.curve.tolist()
        return out


def _real_axis(f: SliceFunction) -> np.ndarray | None:
    cls = f.classify()
    if cls.is_slice_preserving:
        return np.array([1.0, 0.0, 0.0, 0.0])
    if cls.in_tilde_R and cls.witness_a is not None:
        a = cls.witness_a.arr
        return a / np.linalg.norm(a)
    return None


def _curve_cells(f: SliceFunction, axis: np.ndarray, n: int, region):
    A, B = half_plane_grid(region, n, max(f.domain.margin, 1e-3))
    _, F2 = f.stem.eval(A.ravel(), B.ravel())
    u = (F2 @ axis).reshape(A.shape)
    u = np.where(np.isfinite(u), u, 0.0)
    s = np.sign(u)
    horiz = np.argwhere(s[:-1, :] * s[1:, :] < 0)
    vert = np.argwhere(s[:, :-1] * s[:, 1:] < 0)
    pts = []
    for i, j in horiz:
        t = u[i, j] / (u[i, j] - u[i + 1, j])
        pts.append((A[i, j] + t * (A[i + 1, j] - A[i, j]), B[i, j]))
    for i, j in vert:
        t = u[i, j] / (u[i, j] - u[i, j + 1])
        pts.append((A[i, j], B[i, j] + t * (B[i, j + 1] - B[i, j])))
    return np.array(pts).reshape(-1, 2)


def _zero_cells_vector(f: SliceFunction, n: int, region) -> int:
    A, B = half_plane_grid(region, n, max(f.domain.margin, 1e-3))
    F1, F2 = f.stem.eval(A.ravel(), B.ravel())
    D1, _ = f.stem.derivative().eval(A.ravel(), B.ravel())
    h = max(A[1, 0] - A[0, 0], B[0, 1] - B[0, 0])
    mag = np.linalg.norm(F2, axis=1)
    return int(np.sum(mag < 0.75 * h * np.linalg.norm(D1, axis=1)))


def degenerate_set(f: SliceFunction, grid: int = 200, region=None) -> DegenerateSet:
    """Zeros of ``F2``: a real-scalar level curve (tilde-R) or isolated spheres."""
    reg = f.domain.region() if region is None else region
    cls = f.classify()
    if cls.is_slice_constant:
        _, F2 = f.stem.eval(np.array([reg[0] + 0.5]), np.array([1.0]))
        if np.linalg.norm(F2) == 0.0:
            return DegenerateSet("Curve", curve=np.zeros((0, 2)), d=4)
        return DegenerateSet("Empty")
    axis = _real_axis(f)
    if axis is not None:
        pts = _curve_cells(f, axis, grid, reg)
        fine = _curve_cells(f, axis, 2 * grid, reg)
        ref = {"cells": [int(pts.shape[0]), int(fine.shape[0])],
               "ratio": float(fine.shape[0] / pts.shape[0]) if pts.shape[0] else None}
        if pts.shape[0] == 0:
            return DegenerateSet("Empty", refinement=ref, axis=axis)
        return DegenerateSet("Curve", curve=pts, d=3, refinement=ref, axis=axis)
    pts = degenerate_points(f, grid, reg)
    c1, c2 = _zero_cells_vector(f, grid, reg), _zero_cells_vector(f, 2 * grid, reg)
    ref = {"cells": [c1, c2], "ratio": float(c2 / c1) if c1 else None}
    if pts.shape[0] == 0:
        return DegenerateSet("Empty", refinement=ref)
    return DegenerateSet("Spheres", spheres=[tuple(map(float, p)) for p in pts], d=2,
                         refinement=ref)


# -- wings as a distance ----------------------------------------------------------------------

def wing_distance(f: SliceFunction, wings: WingSetReport, x: np.ndarray) -> np.ndarray:
    """``beta |f(x) - c| / |F2(z)|`` minimised over wing values ``c``.

    For ``x = alpha + J beta`` this is ``|J - phi_c(z)| beta``, the distance to
    the wing point of ``W_{f,c}`` over the same ``z``.
    """
    x = np.atleast_2d(x)
    alpha, beta, _, _ = Q.decompose_array(x)
    if wings.kind == "Empty":
        return np.full(x.shape[0], np.inf)
    if wings.kind == "WholeDomain":
        return np.zeros(x.shape[0])
    fx = f.eval_array(x, check=False)
    _, F2 = f.stem.eval(alpha, beta)
    if wings.kind in ("Circle", "Sphere"):
        d = fx - wings.center.arr
        inplane = d @ wings.plane.T
        off = d - inplane @ wings.plane
        gap = np.sqrt(np.sum(off**2, axis=1)
                      + (np.linalg.norm(inplane, axis=1) - wings.radius) ** 2)
    else:
        vals = np.array([Q.as_qarray(v) for v in wings.values])
        gap = np.min(np.linalg.norm(fx[:, None] - vals[None], axis=2), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return beta * gap / np.linalg.norm(F2, axis=1)


# -- extra singular points --------------------------------------------------------------------

@dataclass
class ExtraSingular:
    m: int
    witnesses: list = field(default_factory=list)
    units: int = 0
    grid: int = 0
    notes: list = field(default_factory=list)


def _slice_system(f: SliceFunction, J: np.ndarray):
    def g(z):
        x = np.zeros((z.shape[0], 4))
        x[:, 0] = z[:, 0]
        x[:, 1:] = J[1:] * z[:, 1:2]
        r1, r2, scale, _ = singular_residuals(f, x, check=False)
        return np.stack((r1, r2), axis=1) / scale[:, None] ** 2

    return g


def _fd_jac(g, z, h=1e-6):
    out = np.empty((z.shape[0], 2, 2))
    for k in range(2):
        e = np.zeros(2)
        e[k] = h * 1.0
        out[:, :, k] = (g(z + e) - g(z - e)) / (2 * h)
    return out


def singular_slice_roots(f: SliceFunction, J, grid: int = SLICE_GRID, region=None) -> np.ndarray:
    """Points ``(alpha, beta)`` of ``C_J+`` where ``J_f`` is singular."""
    J = Q.as_qarray(Q.Quaternion.coerce(J))
    reg = f.domain.region() if region is None else region
    A, B = half_plane_grid(reg, grid, max(f.domain.margin, 1e-3))
    g = _slice_system(f, J)
    # exponential stems overflow in far corners of the box; those rows are discarded
    with np.errstate(over="ignore", invalid="ignore"):
        v = g(np.stack((A.ravel(), B.ravel()), axis=1))
        u1, u2 = v[:, 0].reshape(A.shape), v[:, 1].reshape(A.shape)
        mag = np.hypot(u1, u2)
        seeds = seeds_from_grid(A, B, mag, u1, u2, cap=60)
        if seeds.shape[0] == 0:
            return np.zeros((0, 2))
        z = gauss_newton(g, lambda z: _fd_jac(g, z), seeds, iters=40)
        res = np.abs(g(z)).max(axis=1)
    ok = np.isfinite(res) & (res < 1e-10) & (z[:, 1] > 0)
    ok &= f.domain.contains_complex(z[:, 0], z[:, 1])
    ok &= (z[:, 0] >= reg[0]) & (z[:, 0] <= reg[1]) & (z[:, 1] <= reg[3])
    return dedupe(z[ok], 1e-6, key=res[ok])


def extra_singular_dimension(f: SliceFunction, dset: DegenerateSet, wings: WingSetReport,
                             grid: int = SLICE_GRID, n_units: int = N_UNITS,
                             extra_points=()) -> ExtraSingular:
    """``m_f``: 2 when a singular point off ``D_f`` and ``W_f`` is found, else -1."""
    cls = f.classify()
    units = list(Q.fibonacci_units(n_units))
    if cls.preserved_slice is not None:
        units += [cls.preserved_slice.arr, -cls.preserved_slice.arr]
    scale = 1.0 + max(abs(v) for v in f.domain.region() if math.isfinite(v))
    out = ExtraSingular(-1, units=len(units), grid=grid)

    def off_sets(x):
        alpha, beta, _, _ = Q.decompose_array(x)
        dd = dset.distance(f, alpha, beta)
        dw = wing_distance(f, wings, x)
        return np.minimum(dd, dw) > WITNESS_DIST * scale

    cand = [Q.as_qarray(Q.Quaternion.coerce(p)) for p in extra_points]
    if cand:
        c = np.array(cand)
        good = in_singular_set_array(f, c, check=False) & off_sets(c)
        out.witnesses += [Q.Quaternion.from_array(p) for p in c[good]]
    for J in units:
        if out.witnesses:
            break
        z = singular_slice_roots(f, J, grid)
        if z.shape[0] == 0:
            continue
        x = np.zeros((z.shape[0], 4))
        x[:, 0] = z[:, 0]
        x[:, 1:] = J[1:] * z[:, 1:2]
        good = off_sets(x)
        out.witnesses += [Q.Quaternion.from_array(p) for p in x[good]]
    if out.witnesses:
        out.m = 2
    else:
        out.notes.append(f"no singular point off D_f and W_f on {len(units)} slices, grid {grid}")
    return out


# -- dimension triple -------------------------------------------------------------------------

@dataclass
class DimensionTriple:
    """``(d_f, w_f, m_f)`` with ``n_f = max``; ``whole`` marks ``N_f = Omega``."""

    d: int
    w: int
    m: int
    whole: bool = False
    evidence: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return 4 if self.whole else max(self.d, self.w, self.m)

    @property
    def triple(self) -> tuple:
        return (self.d, self.w, self.m)

    def admissible(self, product: bool = True) -> bool:
        return self.whole or self.triple in (ADMISSIBLE if product else ADMISSIBLE_SLICE)

    def to_json(self) -> dict:
        if self.whole:
            return {"N_f": "Omega", "n": 4}
        return {"d": self.d, "w": self.w, "m": self.m, "n": self.n}


def _wing_dim(rep: WingSetReport) -> int:
    return {"Empty": -1, "One": 2, "Two": 2, "Circle": 3}.get(rep.kind, 3)


def dimension_triple(f: SliceFunction, grid: int = SLICE_GRID, degenerate_grid: int = 200,
                     n_units: int = N_UNITS, hints=(), seed: int = 3) -> DimensionTriple:
    """Classify ``N_f`` by the dimensions of ``D_f``, ``W_f`` minus ``D_f`` and the rest.

    ``hints`` are extra candidate points tested before the slice search.
    """
    cls = f.classify()
    if cls.is_slice_constant:
        return DimensionTriple(4, 4, 4, whole=True, evidence={"note": "slice constant"})
    dset = degenerate_set(f, degenerate_grid)
    wings = find_wings(f, seed=seed)
    w = _wing_dim(wings)
    extra = extra_singular_dimension(f, dset, wings, grid, n_units, hints)
    product = f.domain.is_product
    if extra.m == -1 and dset.d == 2 and w == -1 and product:
        extra = extra_singular_dimension(f, dset, wings, 2 * grid, 3 * n_units, hints)
        extra.notes.append("escalated search")
    t = DimensionTriple(dset.d, w, extra.m, evidence={
        "degenerate": dset, "wings": wings, "extra": extra})
    if not t.admissible(product):
        t.evidence["violation"] = f"{t.triple} is not admissible"
    return t


def distance_to_df_wf(f: SliceFunction, x, triple: DimensionTriple) -> float:
    x = np.atleast_2d(Q.as_qarray(Q.Quaternion.coerce(x)))
    alpha, beta, _, _ = Q.decompose_array(x)
    dset = triple.evidence["degenerate"]
    wings = triple.evidence["wings"]
    return float(min(dset.distance(f, alpha, beta)[0], wing_distance(f, wings, x)[0]))


# -- point clouds and branching ---------------------------------------------------------------

def singular_point_cloud(f: SliceFunction, triple: DimensionTriple, n: int = 200,
                         rng: np.random.Generator | None = None) -> list:
    """Rows ``(x0, x1, x2, x3, det, set)`` sampling ``D_f``, ``W_f`` and the extra part."""
    rng = np.random.default_rng(42) if rng is None else rng
    rows = []

    def emit(x, tag):
        if x.shape[0] == 0:
            return
        det = det_formula_array(f, x, check=False)
        rows.extend((*map(float, p), float(d), tag) for p, d in zip(x, det))

    dset = triple.evidence.get("degenerate")
    if dset is not None and dset.kind != "Empty":
        base = np.asarray(dset.spheres if dset.kind == "Spheres" else dset.curve)
        pick = base[rng.integers(0, base.shape[0], n)]
        u = Q.random_units(rng, n)
        x = u * pick[:, 1:2]
        x[:, 0] = pick[:, 0]
        emit(x, "Df")
    wings = triple.evidence.get("wings")
    if wings is not None and wings.wings:
        z = f.domain.sample_d_plus(n, rng)
        for wg in wings.wings:
            x = wg.points(z[:, 0], z[:, 1])
            emit(x[np.all(np.isfinite(x), axis=1)], "Wf")
    extra = triple.evidence.get("extra")
    if extra is not None and extra.m == 2:
        pts = [p.arr for p in extra.witnesses]
        for J in Q.fibonacci_units(min(max(n // 4, 16), 64)):
            z = singular_slice_roots(f, J)
            x = np.zeros((z.shape[0], 4))
            x[:, 0] = z[:, 0]
            x[:, 1:] = J[1:] * z[:, 1:2]
            if x.shape[0]:
                alpha, beta, _, _ = Q.decompose_array(x)
                far = np.minimum(dset.distance(f, alpha, beta), wing_distance(f, wings, x))
                pts += list(x[far > WITNESS_DIST])
        emit(np.array(pts).reshape(-1, 4), "Nf_extra")
    return rows


def local_injectivity_failure(f: SliceFunction, y, radius: float = 0.2, eps: float = 0.05,
                              tries: int = 12, rng: np.random.Generator | None = None):
    """Two distinct points within ``radius`` of ``y`` with equal images, or ``None``."""
    rng = np.random.default_rng(0) if rng is None else rng
    y = Q.as_qarray(Q.Quaternion.coerce(y))
    alpha, beta = y[0], np.linalg.norm(y[1:])
    box = (alpha - radius, alpha + radius, max(beta - radius, 0.0), beta + radius)
    for _ in range(tries):
        v = rng.normal(size=4)
        x1 = y + eps * v / np.linalg.norm(v)
        if not f.domain.contains_qarray(x1[None])[0]:
            continue
        c = f.eval_array(x1[None], check=False)[0]
        desc = solve_fiber(f, c, grid=80, region=box)
        for p in desc.isolated_points + [Q.real_q(a) for a in desc.real_zeros]:
            p = Q.as_qarray(p)
            if np.linalg.norm(p - y) < radius and np.linalg.norm(p - x1) > 1e-4:
                if np.linalg.norm(f.eval_array(p[None], check=False)[0] - c) < 1e-6:
                    return Q.Quaternion.from_array(x1), Q.Quaternion.from_array(p)
    return None


__all__ = [
    "ADMISSIBLE", "ADMISSIBLE_SLICE", "DegenerateSet", "DimensionTriple", "ExtraSingular",
    "SphereSection", "degenerate_set", "dimension_triple", "distance_to_df_wf",
    "extra_singular_dimension", "in_singular_set", "in_singular_set_array",
    "local_injectivity_failure", "singular_point_cloud", "singular_residuals",
    "singular_slice_roots", "sphere_section", "wing_distance",
]


# -- maximum modulus --------------------------------------------------------------------------

def _ball_points(center, radius, n, rng, boundary):
    v = rng.normal(size=(n, 4))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    rad = radius if boundary else radius * rng.uniform(0.0, 1.0, (n, 1)) ** 0.25
    return center + rad * v


def max_modulus_on_ball(f: SliceFunction, center, radius: float, n: int = 10000,
                        rng: np.random.Generator | None = None, polish: int = 20):
    """``(max |f| over n interior samples, max |f| over the boundary sphere)``.

    The boundary value starts from ``n`` samples and the best ``polish`` of
    them are refined by projected gradient ascent on the sphere, so it is a
    lower bound for the true boundary maximum that is much tighter than raw
    sampling when ``|f|`` varies quickly.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    c = Q.as_qarray(Q.Quaternion.coerce(center))
    inner = _ball_points(c, radius, n, rng, False)
    bnd = _ball_points(c, radius, n, rng, True)
    m_in = float(np.linalg.norm(f.eval_array(inner, check=False), axis=1).max())
    mod = np.linalg.norm(f.eval_array(bnd, check=False), axis=1)

    def on_sphere(x):
        d = x - c
        return c + radius * d / np.linalg.norm(d, axis=1, keepdims=True)

    def val(x):
        return np.linalg.norm(f.eval_array(x, check=False), axis=1)

    x = bnd[np.argsort(mod)[::-1][:polish]]
    v = val(x)
    step = 0.1 * radius
    h = 1e-6 * (1.0 + np.linalg.norm(c))
    for _ in range(60):
        g = np.stack([(val(x + h * e) - val(x - h * e)) / (2 * h) for e in np.eye(4)], axis=1)
        n_out = (x - c) / radius
        g -= np.sum(g * n_out, axis=1, keepdims=True) * n_out
        gn = np.linalg.norm(g, axis=1, keepdims=True)
        trial = on_sphere(x + step * g / np.where(gn > 0, gn, 1.0))
        tv = val(trial)
        up = tv > v
        x[up], v[up] = trial[up], tv[up]
        if not up.any():
            step *= 0.5
            if step < 1e-10 * radius:
                break
    return m_in, float(max(mod.max(), v.max()))

