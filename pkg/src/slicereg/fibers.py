"""Fibers f^{-1}(c): real, spherical and isolated zeros of f - c, wings, multiplicity."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from . import quaternion as Q
from . import stem as S
from ._roots import (
    dedupe,
    gauss_newton,
    half_plane_grid,
    polish_quaternion,
    schroder_newton,
    seeds_from_grid,
)
from .domain import PLANE_MINUS_REALS, SymmetricDomain
from .slicefn import SliceFunction

TAU_FIBER = 1e-8
TOL_POLY_NORMAL = 1e-10
TOL_SAMPLED_NORMAL = 1e-7
WING_RADIUS = 2.5
DEFAULT_GRID = 400


class DegeneratePointError(ValueError):
    """``F2`` vanishes at the requested point, so ``phi`` is undefined there."""


class ZeroOfGError(ValueError):
    """The one-slice function passed to the Schwarz construction has a zero."""


class NonPolynomialError(TypeError):
    pass


class UnboundedNearRWarning(UserWarning):
    pass


# -- stem jets ------------------------------------------------------------------

def stem_jets(F: S.Stem, alpha, beta, order: int = 2):
    """``[(F1, F2), (F1', F2'), ...]`` up to ``order`` complex derivatives."""
    out = [F.eval(alpha, beta)]
    D = F
    for _ in range(order):
        D = D.derivative()
        out.append(D.eval(alpha, beta))
    return out


def _wing_region(domain: SymmetricDomain):
    a0, a1, b0, b1 = domain.region()
    return max(a0, -WING_RADIUS), min(a1, WING_RADIUS), b0, min(b1, WING_RADIUS)


def _normal_parts(F1, F2, c):
    G1 = F1 - c
    n1 = Q.qdot(G1, G1) - Q.qdot(F2, F2)
    n2 = 2.0 * Q.qdot(G1, F2)
    scale = 1.0 + Q.qdot(G1, G1) + Q.qdot(F2, F2)
    return n1, n2, scale


# -- normal test ---------------------------------------------------------------------

def normal_vanishes(f: SliceFunction, c, exact: bool | None = None, n: int = 200,
                    rng: np.random.Generator | None = None) -> bool:
    """Whether ``N(f - c)`` vanishes identically.

    Polynomial stems are decided on the coefficients of the normal polynomial;
    otherwise ``|F1 - c|^2 = |F2|^2`` and ``<F1 - c, F2> = 0`` are tested at
    ``n`` samples of D+.
    """
    c = Q.as_qarray(Q.Quaternion.coerce(c))
    if f.stem.is_polynomial and exact is not False:
        Pst = S.stem_add(f.stem, S.PolyStem([-c]))
        N = S.stem_mul(Pst, S.stem_conj(Pst))
        scale = (1.0 + np.abs(Pst.coeffs).max()) ** 2
        return bool(np.abs(N.coeffs).max() < TOL_POLY_NORMAL * scale)
    if exact:
        raise NonPolynomialError("exact normal test needs a polynomial stem")
    rng = np.random.default_rng(11) if rng is None else rng
    z = f.domain.sample_d_plus(n, rng, region=_wing_region(f.domain))
    F1, F2 = f.stem.eval(z[:, 0], z[:, 1])
    n1, n2, scale = _normal_parts(F1, F2, c)
    r = np.maximum(np.abs(n1), np.abs(n2)) / scale
    r = r[np.isfinite(r)]
    return bool(r.size and r.max() < TOL_SAMPLED_NORMAL)


# -- wings ---------------------------------------------------------------------------

def _phi_raw(F1, F2, c):
    return Q.qmul(c - F1, Q.qinv(F2))


def wing_phi(f: SliceFunction, c, z) -> Q.ImaginaryUnit:
    """``phi_z = (c - F1(z)) F2(z)^{-1}`` at one point ``z = (alpha, beta)`` of D+."""
    alpha, beta = z
    c = Q.as_qarray(Q.Quaternion.coerce(c))
    F1, F2 = f.stem.eval(alpha, beta)
    scale = 1.0 + np.linalg.norm(F1) + np.linalg.norm(c)
    if np.linalg.norm(F2) <= 1e-12 * scale:
        raise DegeneratePointError(f"F2 vanishes at {z}; phi is not computed there")
    phi = _phi_raw(F1, F2, c)[0]
    if abs(phi[0]) > 1e-9 or abs(np.linalg.norm(phi) - 1.0) > 1e-9:
        raise ValueError(f"{Q.Quaternion.from_array(c)} is not a wing value at {z}")
    return Q.ImaginaryUnit.normalize(Q.Quaternion.from_array(phi))


@dataclass
class Wing:
    """The wing ``{alpha + phi(z) beta : z in D+}`` of ``f`` over ``value``."""

    value: Q.Quaternion
    f: SliceFunction = field(repr=False)
    planar: bool = False
    unit: Q.ImaginaryUnit | None = None
    degenerate: list = field(default_factory=list)

    def phi(self, alpha, beta) -> np.ndarray:
        """``phi`` on arrays; rows where ``F2`` vanishes are NaN."""
        F1, F2 = self.f.stem.eval(alpha, beta)
        small = np.linalg.norm(F2, axis=1) <= 1e-12 * (1.0 + np.linalg.norm(F1, axis=1))
        with np.errstate(all="ignore"):
            out = _phi_raw(F1, F2, self.value.arr)
        out[small] = np.nan
        return out

    def points(self, alpha, beta) -> np.ndarray:
        a = np.atleast_1d(np.asarray(alpha, dtype=float))
        b = np.atleast_1d(np.asarray(beta, dtype=float))
        out = self.phi(a, b) * b[:, None]
        out[:, 0] = a
        return out

    def to_json(self) -> dict:
        return {"value": _clean(self.value.arr), "planar": self.planar,
                "unit": None if self.unit is None else _clean(self.unit.arr),
                "degenerate": [list(map(float, z)) for z in self.degenerate]}


def make_wing(f: SliceFunction, c, n: int = 64) -> Wing:
    c = Q.Quaternion.coerce(c)
    z = f.domain.sample_d_plus(n, np.random.default_rng(5), region=_wing_region(f.domain))
    w = Wing(c, f)
    ph = w.phi(z[:, 0], z[:, 1])
    ph = ph[np.all(np.isfinite(ph), axis=1)]
    if ph.shape[0] and np.abs(ph - ph[0]).max() < 1e-9:
        w.planar = True
        w.unit = Q.ImaginaryUnit.normalize(Q.Quaternion.from_array(ph[0]))
    w.degenerate = [tuple(map(float, p)) for p in degenerate_points(f)]
    return w


@dataclass
class WingSetReport:
    """Wing values of ``f``.

    ``kind`` is one of ``Empty``, ``One``, ``Two``, ``Circle``, ``Sphere`` or
    ``WholeDomain``. For circles ``center``, ``radius`` and ``plane`` (an
    orthonormal basis of the circle's 2-plane) describe the value set.
    """

    kind: str
    values: list = field(default_factory=list)
    wings: list = field(default_factory=list, repr=False)
    center: Q.Quaternion | None = None
    radius: float | None = None
    plane: np.ndarray | None = None
    nullity: int | None = None
    witness_check: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def count(self) -> float:
        return {"Empty": 0, "One": 1, "Two": 2}.get(self.kind, math.inf)

    def circle_values(self, n: int) -> np.ndarray:
        if self.kind != "Circle":
            raise ValueError("not a circle of wings")
        t = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        return (self.center.arr[None] + self.radius * (np.cos(t)[:, None] * self.plane[0]
                                                       + np.sin(t)[:, None] * self.plane[1]))

    def contains_value(self, c, tol: float = 1e-7) -> bool:
        c = Q.as_qarray(Q.Quaternion.coerce(c))
        if self.kind in ("Empty",):
            return False
        if self.kind in ("One", "Two"):
            return any(np.linalg.norm(c - Q.as_qarray(v)) <= tol * (1 + np.linalg.norm(c))
                       for v in self.values)
        if self.kind in ("Circle", "Sphere"):
            d = c - self.center.arr
            basis = self.plane
            inplane = basis.T @ (basis @ d)
            off = np.linalg.norm(d - inplane)
            return off <= tol and abs(np.linalg.norm(d) - self.radius) <= tol
        return True

    def to_json(self) -> dict:
        out = {"kind": self.kind, "values": [_clean(Q.as_qarray(v)) for v in self.values]}
        if self.kind in ("Circle", "Sphere"):
            out["center"] = _clean(self.center.arr)
            out["radius"] = float(self.radius)
            out["plane"] = [_clean(v) for v in self.plane]
        return out


def _clean(v, tol: float = 1e-10) -> list:
    v = np.where(np.abs(v) < tol, 0.0, np.asarray(v, dtype=float))
    r = np.round(v)
    v = np.where(np.abs(v - r) < tol, r, v)
    return [float(x) + 0.0 for x in v]


def _wing_linear_system(f: SliceFunction, n: int, rng):
    z = f.domain.sample_d_plus(n, rng, region=_wing_region(f.domain))
    F1, F2 = f.stem.eval(z[:, 0], z[:, 1])
    ok = np.all(np.isfinite(F1), axis=1) & np.all(np.isfinite(F2), axis=1)
    F1, F2 = F1[ok], F2[ok]
    m = F1.shape[0]
    A = np.zeros((2 * m, 5))
    b = np.zeros(2 * m)
    A[:m, :4] = 2.0 * F1
    A[:m, 4] = -1.0
    b[:m] = Q.qdot(F1, F1) - Q.qdot(F2, F2)
    A[m:, :4] = F2
    b[m:] = Q.qdot(F1, F2)
    w = np.linalg.norm(np.column_stack((A, b)), axis=1)
    w[w == 0] = 1.0
    return A / w[:, None], b / w


def find_wings(f: SliceFunction, n: int = 400, seed: int = 3, verify: bool = True) -> WingSetReport:
    """Wing values of ``f`` on a product domain.

    ``N(f - c) = 0`` reads ``2<F1, c> - |c|^2 = |F1|^2 - |F2|^2`` and
    ``<F2, c> = <F1, F2>``: linear in ``(c, s = |c|^2)``. The sampled system
    gives an affine solution set whose intersection with ``s = |c|^2`` is a
    sphere inside an affine subspace, which fixes the kind of ``W_f``.
    """
    if not f.domain.is_product:
        return WingSetReport("Empty", notes=["slice domain: no wings"])
    cls = f.classify()
    if cls.is_slice_constant:
        return WingSetReport("WholeDomain", notes=["slice constant"])
    if cls.in_tilde_R:
        return WingSetReport("Empty", notes=["tilde-R and not slice constant"])

    rng = np.random.default_rng(seed)
    A, b = _wing_linear_system(f, n, rng)
    U, sv, Vt = np.linalg.svd(A, full_matrices=True)
    r = int(np.sum(sv > 1e-9 * sv[0]))
    Ur, Vr = U[:, :r], Vt[:r].T
    u0 = Vr @ ((Ur.T @ b) / sv[:r])
    resid = np.abs(A @ u0 - b).max()
    null = Vt[r:].T
    m = null.shape[1]
    report_notes = [f"nullity {m}", f"consistency residual {resid:.2e}"]
    if resid > 1e-8:
        return WingSetReport("Empty", nullity=m, notes=report_notes + ["inconsistent system"])

    c0, s0 = u0[:4], u0[4]
    Nc, Ns = null[:4], null[4]
    if m == 0:
        cstar, rho, basis = c0, s0 - c0 @ c0, np.zeros((0, 4))
        rho = -abs(rho) if abs(rho) > 1e-8 * (1 + s0) else 0.0
    else:
        Qm = Nc.T @ Nc
        bq = 2.0 * Nc.T @ c0 - Ns
        k = c0 @ c0 - s0
        sol = np.linalg.solve(Qm, bq)
        tstar = -0.5 * sol
        rho = 0.25 * bq @ sol - k
        cstar = c0 + Nc @ tstar
        basis = np.linalg.qr(Nc)[0].T
    tol = 1e-8 * (1.0 + cstar @ cstar)
    if rho < -tol:
        rep = WingSetReport("Empty", nullity=m, notes=report_notes)
    elif rho <= tol or m == 0:
        rep = WingSetReport("One", values=[Q.Quaternion.from_array(_clean(cstar))], nullity=m,
                            notes=report_notes)
    else:
        rad = math.sqrt(rho)
        if m == 1:
            vals = sorted((_clean(cstar - rad * basis[0]), _clean(cstar + rad * basis[0])))
            rep = WingSetReport("Two", values=[Q.Quaternion.from_array(v) for v in vals],
                                nullity=m, notes=report_notes)
        else:
            kind = "Circle" if m == 2 else "Sphere"
            rep = WingSetReport(kind, center=Q.Quaternion.from_array(_clean(cstar)), radius=rad,
                                plane=np.array([_clean(v) for v in basis]), nullity=m,
                                notes=report_notes)
    if rep.kind in ("Circle", "Sphere"):
        reps = rep.circle_values(4) if rep.kind == "Circle" else (
            rep.center.arr + rep.radius * rep.plane)
        rep.values = [Q.Quaternion.from_array(_clean(v)) for v in reps]
        if rep.kind == "Circle" and cls.in_tilde_C:
            rep.witness_check = _circle_witness_check(rep, cls)
    if not cls.in_tilde_C and rep.count > 2:
        rep.notes.append("more than two wings reported for a function outside tilde-C")
    if verify and rep.values:
        bad = [v for v in rep.values if not normal_vanishes(f, v, exact=False)]
        if bad:
            rep.notes.append(f"{len(bad)} value(s) failed the sampled normal test")
    rep.wings = [make_wing(f, v) for v in rep.values]
    return rep


def _circle_witness_check(rep: WingSetReport, cls) -> dict:
    """Compare the circle with ``|c - b| = |d - b|``, ``(c - d) a^{-1} in C_J^perp``."""
    a = cls.witness_a.arr
    bq = cls.witness_b.arr
    J = cls.tilde_unit
    K1 = Q.orthogonal_unit(J).arr
    K2 = Q.qmul(J.arr, K1)
    dirs = np.stack((Q.qmul(K1, a), Q.qmul(K2, a)))
    dirs = np.linalg.qr(dirs.T)[0].T
    proj = dirs.T @ (dirs @ rep.plane.T)
    return {
        "center_offset": float(np.linalg.norm(rep.center.arr - bq)),
        "plane_offset": float(np.linalg.norm(proj - rep.plane.T)),
        "radius_spread": float(np.ptp([np.linalg.norm(Q.as_qarray(v) - bq) for v in rep.values])),
    }


def harvest_wing_values(f: SliceFunction, n_grid: int = 50, n_units: int = 6, seed: int = 3,
                        n_test: int = 200, keep: int = 40) -> np.ndarray:
    """Wing values found by sampling ``c = f(x)`` and refining ``c`` directly.

    Independent of :func:`find_wings`: candidates are values of ``f`` on the
    slices ``C_i, C_j`` and random units (both half planes), ranked by the
    sampled normal residual, then polished by Gauss-Newton in ``c`` alone.
    Returns the clustered values as a ``(k, 4)`` array.
    """
    rng = np.random.default_rng(seed)
    a0, a1, b0, b1 = _wing_region(f.domain)
    m = f.domain.margin
    a = np.linspace(a0, a1, n_grid)
    b = np.linspace(max(b0, m), b1, n_grid)
    A, B = (g.ravel() for g in np.meshgrid(a, b, indexing="ij"))
    units = np.concatenate((np.eye(4)[1:3], Q.random_units(rng, n_units)))
    cands = []
    for u in units:
        for sgn in (1.0, -1.0):
            vals = f.eval_slice(A, B, sgn * u)
            cands.append(vals[np.all(np.isfinite(vals), axis=1)])
    cands = np.unique(np.round(np.concatenate(cands), 6), axis=0)

    z = f.domain.sample_d_plus(n_test, rng, region=(a0, a1, b0, b1))
    F1, F2 = f.stem.eval(z[:, 0], z[:, 1])
    ok = np.all(np.isfinite(F1), axis=1) & np.all(np.isfinite(F2), axis=1)
    F1, F2 = F1[ok], F2[ok]
    w = 1.0 / (1.0 + Q.qdot(F1, F1) + Q.qdot(F2, F2))

    def resid(c):
        G = F1[None] - c[:, None]
        r1 = (np.einsum("kni,kni->kn", G, G) - Q.qdot(F2, F2)[None]) * w
        r2 = np.einsum("kni,ni->kn", G, F2) * w
        return np.concatenate((r1, r2), axis=1)

    def jac(c):
        G = F1[None] - c[:, None]
        return np.concatenate((-2.0 * G * w[None, :, None],
                               -np.broadcast_to(F2 * w[:, None], G.shape)), axis=1)

    score = np.concatenate([np.abs(resid(ch)).max(axis=1) for ch in np.array_split(cands, 64)])
    seeds = cands[np.argsort(score)[:keep]]
    c = gauss_newton(resid, jac, seeds)
    r = np.abs(resid(c)).max(axis=1)
    good = c[r < 1e-10]
    return dedupe(good, 1e-6, key=r[r < 1e-10])


def wing_selection(f: SliceFunction, c, r: float = 0.0) -> SliceFunction:
    """``g(x) = c + (x - r)(f(x) - c)``; ``g^{-1}(c) = W_{g,c} = W_{f,c}`` is its only wing."""
    c = Q.as_qarray(Q.Quaternion.coerce(c))
    eps = np.logspace(-2, -6, 5)
    th = np.linspace(0.2, np.pi - 0.2, 5)
    E, T = np.meshgrid(eps, th)
    F1, F2 = f.stem.eval(r + (E * np.cos(T)).ravel(), (E * np.sin(T)).ravel())
    if not np.all(np.isfinite(F1)) or max(np.abs(F1).max(), np.abs(F2).max()) > 1e8:
        warnings.warn(f"|f| looks unbounded near r = {r}", UnboundedNearRWarning, stacklevel=2)
    lin = S.PolyStem([[-r, 0, 0, 0], [1.0, 0, 0, 0]])
    g = S.stem_add(S.PolyStem([c]), S.stem_mul(lin, S.stem_add(f.stem, S.PolyStem([-c]))))
    return SliceFunction(g, f.domain, f"wing_selection({f.name})")


def schwarz_construct(g, domain: SymmetricDomain | None = None, n: int = 400) -> SliceFunction:
    """``f = g`` on C_i+ and ``-1/conj(g(xbar))`` on C_-i+, for nowhere-zero ``g``."""
    domain = PLANE_MINUS_REALS if domain is None else domain
    g = S.as_holo(g)
    z = domain.sample_d_plus(n, np.random.default_rng(2))
    zc = z[:, 0] + 1j * z[:, 1]
    gv = g(zc)
    dg_fn = g.derivative()
    dg = dg_fn(zc)
    if np.all(np.abs(dg) <= 1e-12 * (1.0 + np.abs(gv))):
        raise ValueError("g must not be constant")
    # Newton from the samples closest to a zero; a relative size test fails for fast-growing g
    with np.errstate(all="ignore"):
        ratio = np.abs(gv / dg)
    w = zc[np.argsort(np.where(np.isfinite(ratio), ratio, np.inf))[:20]]
    with np.errstate(all="ignore"):
        for _ in range(40):
            w = w - g(w) / dg_fn(w)
        step = np.abs(g(w) / dg_fn(w))
    hit = np.isfinite(w) & (step <= 1e-10 * (1.0 + np.abs(w))) & (w.imag > 0)
    if np.any(hit & domain.contains_complex(w.real, np.abs(w.imag))):
        raise ZeroOfGError("g has a zero in D+")
    return SliceFunction(S.schwarz_stem(g, domain), domain, "schwarz")


# -- degenerate points (zeros of F2 in D+) --------------------------------------------------

def _f2_grid(f: SliceFunction, grid: int, region=None):
    reg = f.domain.region() if region is None else region
    A, B = half_plane_grid(reg, grid, max(f.domain.margin, 1e-6 * (reg[3] - reg[2])))
    F1, F2 = f.stem.eval(A.ravel(), B.ravel())
    return A, B, F1.reshape(A.shape + (4,)), F2.reshape(A.shape + (4,))


def degenerate_points(f: SliceFunction, grid: int = 200, region=None) -> np.ndarray:
    """Isolated zeros ``(alpha, beta)`` of ``F2`` in D+ (grid seeds + Gauss-Newton)."""
    A, B, F1, F2 = _f2_grid(f, grid, region)
    mag = np.linalg.norm(F2, axis=-1) / (1.0 + np.linalg.norm(F1, axis=-1))
    seeds = seeds_from_grid(A, B, mag)
    if seeds.shape[0] == 0:
        return np.zeros((0, 2))
    D = f.stem.derivative()

    def resid(x):
        return f.stem.eval(x[:, 0], x[:, 1])[1]

    def jac(x):
        D1, D2 = D.eval(x[:, 0], x[:, 1])
        return np.stack((D2, D1), axis=-1)

    x = gauss_newton(resid, jac, seeds)
    x[:, 1] = np.abs(x[:, 1])
    x[np.abs(x) < 1e-15] = 0.0
    G1, G2 = f.stem.eval(x[:, 0], x[:, 1])
    D1, _ = D.eval(x[:, 0], x[:, 1])
    r = np.linalg.norm(G2, axis=1) / (1.0 + np.linalg.norm(G1, axis=1) + np.linalg.norm(D1, axis=1))
    ok = (r < 1e-10) & (x[:, 1] > 0) & f.domain.contains_complex(x[:, 0], x[:, 1])
    a0, a1, b0, b1 = f.domain.region() if region is None else region
    ok &= (x[:, 0] >= a0 - 1e-9) & (x[:, 0] <= a1 + 1e-9) & (x[:, 1] <= b1 + 1e-9)
    return dedupe(x[ok], 1e-7, key=r[ok])


# -- fibers ----------------------------------------------------------------------------------

@dataclass
class FiberDescription:
    """Classified fiber ``f^{-1}(c)`` within the search box.

    ``case`` is 1 (f constant equal to c), 2 (the fiber is ``D_f`` plus the
    wing over ``c``) or 3 (finitely many real points, spheres and isolated
    non-real points).
    """

    value: Q.Quaternion
    real_zeros: list = field(default_factory=list)
    spherical_zeros: list = field(default_factory=list)
    isolated_points: list = field(default_factory=list)
    wing: Wing | None = None
    is_constant_fiber: bool = False
    degenerate_spheres: list = field(default_factory=list)
    case: int = 3
    max_residual: float = 0.0
    bbox: tuple = ()

    @property
    def is_empty(self) -> bool:
        return not (self.real_zeros or self.spherical_zeros or self.isolated_points
                    or self.wing or self.is_constant_fiber or self.degenerate_spheres)

    @property
    def point_count(self) -> float:
        if self.wing is not None or self.is_constant_fiber or self.spherical_zeros \
                or self.degenerate_spheres:
            return math.inf
        return len(self.real_zeros) + len(self.isolated_points)

    def to_json(self) -> dict:
        return {
            "value": _clean(self.value.arr),
            "case": self.case,
            "constant": self.is_constant_fiber,
            "real_zeros": [float(a) for a in self.real_zeros],
            "spherical_zeros": [[float(a), float(b)] for a, b in self.spherical_zeros],
            "isolated_points": [list(map(float, p.arr)) for p in self.isolated_points],
            "wing": None if self.wing is None else self.wing.to_json(),
            "degenerate_spheres": [[float(a), float(b)] for a, b in self.degenerate_spheres],
            "max_residual": float(self.max_residual),
            "within_box": list(self.bbox),
        }


def fiber_normal_fun(f: SliceFunction, c: np.ndarray):
    """``z -> (n, n', n'')`` for the holomorphic ``n = N(f - c)`` read as a complex scalar."""
    F = f.stem
    D = F.derivative()
    E = D.derivative()

    def fun(z):
        a, b = z.real, z.imag
        F1, F2 = F.eval(a, b)
        D1, D2 = D.eval(a, b)
        E1, E2 = E.eval(a, b)
        G1 = F1 - c
        dot = Q.qdot
        n = (dot(G1, G1) - dot(F2, F2)) + 2j * dot(G1, F2)
        dn = 2 * (dot(G1, D1) - dot(F2, D2)) + 2j * (dot(D1, F2) + dot(G1, D2))
        d2 = 2 * (dot(D1, D1) + dot(G1, E1) - dot(D2, D2) - dot(F2, E2)) \
            + 2j * (dot(E1, F2) + 2 * dot(D1, D2) + dot(G1, E2))
        return n, dn, d2

    return fun


def solve_fiber(f: SliceFunction, c, grid: int = DEFAULT_GRID, region=None) -> FiberDescription:
    """Classify ``f^{-1}(c)`` inside the domain's bounding box."""
    cq = Q.Quaternion.coerce(c)
    c = cq.arr
    reg = f.domain.region() if region is None else region
    desc = FiberDescription(cq, bbox=tuple(reg))
    tau = TAU_FIBER * (1.0 + np.linalg.norm(c))

    if normal_vanishes(f, cq):
        z = f.domain.sample_d_plus(64, np.random.default_rng(1), region=_wing_region(f.domain))
        F1, F2 = f.stem.eval(z[:, 0], z[:, 1])
        if np.abs(F1 - c).max() < tau and np.abs(F2).max() < tau:
            desc.case = 1
            desc.is_constant_fiber = True
            return desc
        desc.case = 2
        desc.degenerate_spheres = [tuple(map(float, p)) for p in degenerate_points(f, region=reg)]
        if f.domain.is_product:
            desc.wing = make_wing(f, cq)
        return desc

    fun = fiber_normal_fun(f, c)
    floor = f.domain.margin if f.domain.is_product else 0.0
    A, B = half_plane_grid(reg, grid, floor)
    zg = (A + 1j * B).ravel()
    F1, F2 = f.stem.eval(zg.real, zg.imag)
    n1, n2, scale = _normal_parts(F1, F2, c)
    mag = (np.hypot(n1, n2) / scale).reshape(A.shape)
    seeds = seeds_from_grid(A, B, mag, n1.reshape(A.shape), n2.reshape(A.shape))
    if seeds.shape[0] == 0:
        return desc
    z = schroder_newton(fun, seeds[:, 0] + 1j * seeds[:, 1], reflect=True)
    z = z[np.isfinite(z)]
    n, _, _ = fun(z)
    F1, F2 = f.stem.eval(z.real, z.imag)
    _, _, sc = _normal_parts(F1, F2, c)
    rel = np.abs(n) / sc
    a0, a1, b0, b1 = reg
    pad = 1e-9 * (1 + abs(a0) + abs(a1) + b1)
    keep = (rel < 1e-8) & (z.real >= a0 - pad) & (z.real <= a1 + pad) & (z.imag <= b1 + pad)
    keep &= f.domain.contains_complex(z.real, z.imag) | (z.imag <= 1e-7 * (1 + np.abs(z)))
    pts = np.stack((z.real, z.imag), axis=1)[keep]
    pts = dedupe(pts, 1e-7, key=rel[keep])

    resid = []
    for alpha, beta in pts:
        if beta <= 1e-7 * (1.0 + abs(alpha)):
            if f.domain.is_product:
                continue
            x = polish_quaternion(f, Q.real_q(alpha), c)[0]
            x[1:] = 0.0
            r = np.linalg.norm(f.eval_array(x, check=False)[0] - c)
            if r < tau:
                desc.real_zeros.append(float(x[0]))
                resid.append(r)
            continue
        G1, G2 = f.stem.eval(alpha, beta)
        if np.linalg.norm(G2) <= 1e-6 * (1.0 + np.linalg.norm(G1)):
            zz = _polish_sphere(f, alpha, beta, c)
            G1, G2 = f.stem.eval(*zz)
            r = max(np.linalg.norm(G1 - c), np.linalg.norm(G2))
            if r < tau:
                desc.spherical_zeros.append((float(zz[0]), float(abs(zz[1]))))
                resid.append(r)
                continue
        phi = _phi_raw(G1, G2, c)[0]
        phi[0] = 0.0
        phi /= np.linalg.norm(phi)
        x0 = phi * beta
        x0[0] = alpha
        x = polish_quaternion(f, x0, c)[0]
        r = np.linalg.norm(f.eval_array(x, check=False)[0] - c)
        desc.isolated_points.append(Q.Quaternion.from_array(x))
        resid.append(r)
    desc.real_zeros = _unique_sorted(desc.real_zeros)
    desc.max_residual = float(max(resid)) if resid else 0.0
    return desc


def _unique_sorted(v, tol=1e-7):
    out = []
    for a in sorted(v):
        if not out or abs(a - out[-1]) > tol * (1 + abs(a)):
            out.append(a)
    return out


def _polish_sphere(f: SliceFunction, alpha: float, beta: float, c: np.ndarray):
    D = f.stem.derivative()

    def resid(x):
        F1, F2 = f.stem.eval(x[:, 0], x[:, 1])
        return np.concatenate((F1 - c, F2), axis=1)

    def jac(x):
        D1, D2 = D.eval(x[:, 0], x[:, 1])
        top = np.stack((D1, -D2), axis=-1)
        bot = np.stack((D2, D1), axis=-1)
        return np.concatenate((top, bot), axis=1)

    x = gauss_newton(resid, jac, np.array([[alpha, beta]]), iters=20)[0]
    return float(x[0]), float(x[1])


# -- total multiplicity -------------------------------------------------------------------------

def normal_polynomial(f: SliceFunction, c=None) -> np.ndarray:
    """Real coefficients (ascending) of ``N(f - c)`` for a polynomial ``f``."""
    if not f.stem.is_polynomial:
        raise NonPolynomialError("total multiplicity needs a polynomial stem")
    Pst = f.stem if c is None else S.stem_add(f.stem, S.PolyStem([-Q.as_qarray(Q.Quaternion.coerce(c))]))
    N = S.stem_mul(Pst, S.stem_conj(Pst))
    return N.coeffs[:, 0].copy()


def multiplicity_split(f: SliceFunction, y):
    """``(s, g)`` with ``N(f - f(y)) = Delta_y^s g`` and ``Delta_y`` not dividing ``g``."""
    yq = Q.Quaternion.coerce(y)
    fy = f.eval_array(yq.arr, check=False)[0]
    Pst = S.stem_add(f.stem, S.PolyStem([-fy]))
    N = S.stem_mul(Pst, S.stem_conj(Pst)).coeffs[:, 0]
    scale = np.abs(N).max()
    if scale == 0.0:
        raise ValueError("f - f(y) vanishes identically")
    delta = np.array([yq.norm2(), -2.0 * yq.w, 1.0])
    s = 0
    g = N.copy()
    while g.size > 2:
        quo, rem = P.polydiv(g, delta)
        if np.abs(rem).max(initial=0.0) > 1e-9 * max(scale, np.abs(g).max()):
            break
        g = P.polytrim(quo, 0.0) if quo.size else quo
        s += 1
    return s, g


def total_multiplicity(f: SliceFunction, y) -> int:
    """Largest ``s`` with ``Delta_y^s`` dividing ``N(f - f(y))``."""
    if not f.stem.is_polynomial:
        raise NonPolynomialError("total multiplicity needs a polynomial stem")
    return multiplicity_split(f, y)[0]
