"""Slice functions f = I(F) on circular domains."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import quaternion as Q
from .domain import DomainError, SymmetricDomain, merge_domains
from .stem import (
    PolyStem,
    ReciprocalStem,
    Stem,
    StemError,
    as_stem,
    stem_add,
    stem_conj,
    stem_mul,
    stem_rscale,
)

CLASS_SAMPLES = 200
CLASS_SEED = 7
TOL_SC = 1e-10
TOL_REAL = 1e-10
TOL_PLANE = 1e-9


class NormalVanishesError(ArithmeticError):
    """The normal function is identically zero, so there is no reciprocal."""


@dataclass(frozen=True)
class FunctionClass:
    """Algebraic class flags with witnesses and the residuals that decided them.

    ``witness_a``/``witness_b`` realise ``f = g a + b`` with ``g`` slice
    preserving (tilde-R) or ``C_J``-preserving (tilde-C, ``J = tilde_unit``).
    """

    is_slice_constant: bool
    is_slice_preserving: bool
    preserved_slice: Q.ImaginaryUnit | None
    in_tilde_R: bool
    in_tilde_C: bool
    witness_a: Q.Quaternion | None = None
    witness_b: Q.Quaternion | None = None
    tilde_unit: Q.ImaginaryUnit | None = None
    residuals: dict = field(default_factory=dict)

    @property
    def is_one_slice_preserving(self) -> bool:
        return self.preserved_slice is not None

    def to_json(self) -> dict:
        enc = lambda q: None if q is None else Q.Quaternion.coerce(q).to_list()  # noqa: E731
        return {
            "slice_constant": self.is_slice_constant,
            "slice_preserving": self.is_slice_preserving,
            "preserved_slice": enc(self.preserved_slice),
            "tilde_R": self.in_tilde_R,
            "tilde_C": self.in_tilde_C,
            "witness_a": enc(self.witness_a),
            "witness_b": enc(self.witness_b),
            "tilde_unit": enc(self.tilde_unit),
            "residuals": {k: float(v) for k, v in self.residuals.items()},
        }


class SliceFunction:
    """``f(alpha + J beta) = F1(z) + J F2(z)`` for the stem ``F``."""

    def __init__(self, stem: Stem, domain: SymmetricDomain | None = None, name: str = ""):
        self.stem = stem
        self.domain = stem.domain if domain is None else domain
        self.name = name
        self._class = None

    def __repr__(self):
        return f"SliceFunction({self.name or type(self.stem).__name__}, {self.domain.describe()})"

    # -- evaluation ---------------------------------------------------------------

    def _check(self, alpha, beta):
        ok = self.domain.contains_complex(alpha, beta)
        if not np.all(ok):
            bad = np.flatnonzero(~np.atleast_1d(ok))[0]
            a, b = np.atleast_1d(alpha)[bad], np.atleast_1d(beta)[bad]
            raise DomainError(f"point with (alpha, beta) = ({a:g}, {b:g}) is outside "
                              f"{self.domain.describe()}")

    def eval_array(self, q, check: bool = True) -> np.ndarray:
        """Vectorised evaluation on an ``(n, 4)`` array; NaN marks singular points."""
        q = np.atleast_2d(Q.as_qarray(q))
        alpha, beta, units, _ = Q.decompose_array(q)
        if check:
            self._check(alpha, beta)
        F1, F2 = self.stem.eval(alpha, beta)
        return F1 + Q.qmul(units, F2)

    def eval_slice(self, alpha, beta, unit) -> np.ndarray:
        """Values at ``alpha + unit * beta`` for arrays ``alpha, beta`` (any sign of beta)."""
        F1, F2 = self.stem.eval(alpha, beta)
        return F1 + Q.qmul(Q.as_qarray(Q.unit_quaternion(unit)), F2)

    def eval(self, q) -> Q.Quaternion:
        v = self.eval_array(Q.as_qarray(q))[0]
        if not np.all(np.isfinite(v)):
            raise StemError(f"{self!r} is singular at {Q.Quaternion.coerce(q)}")
        return Q.Quaternion.from_array(v)

    __call__ = eval

    def derivative_array(self, q, check: bool = True) -> np.ndarray:
        return self.slice_derivative().eval_array(q, check)

    def spherical_array(self, q, check: bool = True) -> np.ndarray:
        """``f'_s`` on an ``(n, 4)`` array; constant on each sphere."""
        q = np.atleast_2d(Q.as_qarray(q))
        alpha, beta, _, _ = Q.decompose_array(q)
        if check:
            self._check(alpha, beta)
        _, H = self.stem.eval_hat(alpha, beta)
        return H

    def spherical_derivative(self, q) -> Q.Quaternion:
        """``f'_s(q) = F2(z)/beta``; at real points of a slice domain, ``f'(q)``."""
        return Q.Quaternion.from_array(self.spherical_array(Q.as_qarray(q))[0])

    def spherical_value(self, q) -> Q.Quaternion:
        """``f^o_s(q) = F1(z)``."""
        alpha, beta, _, _ = Q.decompose_array(Q.as_qarray(q))
        self._check(alpha, beta)
        F1, _ = self.stem.eval(alpha, beta)
        return Q.Quaternion.from_array(F1[0])

    # -- algebra --------------------------------------------------------------------

    def _wrap(self, stem: Stem, other: "SliceFunction | None" = None, name: str = ""):
        dom = self.domain if other is None else merge_domains(self.domain, other.domain)
        return SliceFunction(stem, dom, name)

    def slice_product(self, other) -> "SliceFunction":
        """``f . g = I(FG)``."""
        other = as_slice_function(other)
        return self._wrap(stem_mul(self.stem, other.stem), other)

    def conjugate(self) -> "SliceFunction":
        return self._wrap(stem_conj(self.stem))

    def normal(self) -> "SliceFunction":
        """``N(f) = f . f^c``, a slice preserving function."""
        return self._wrap(stem_mul(self.stem, stem_conj(self.stem)))

    def slice_derivative(self) -> "SliceFunction":
        return self._wrap(self.stem.derivative())

    def reciprocal(self) -> "SliceFunction":
        """``f^{-.} = N(f)^{-1} f^c``."""
        z = self.domain.sample_d_plus(64, np.random.default_rng(CLASS_SEED))
        F1, F2 = self.stem.eval(z[:, 0], z[:, 1])
        n1 = Q.qdot(F1, F1) - Q.qdot(F2, F2)
        n2 = 2.0 * Q.qdot(F1, F2)
        scale = 1.0 + np.max(Q.qdot(F1, F1) + Q.qdot(F2, F2))
        if np.max(np.hypot(n1, n2)) < 1e-12 * scale:
            raise NormalVanishesError(f"N({self!r}) vanishes identically")
        return self._wrap(ReciprocalStem(self.stem))

    def right_scale(self, a) -> "SliceFunction":
        return self._wrap(stem_rscale(self.stem, a))

    def __add__(self, other):
        other = as_slice_function(other)
        return self._wrap(stem_add(self.stem, other.stem), other)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_slice_function(other)
        return self._wrap(stem_add(self.stem, stem_rscale(other.stem, -1.0)), other)

    def __rsub__(self, other):
        return as_slice_function(other) - self

    def __neg__(self):
        return self.right_scale(-1.0)

    def __mul__(self, other):
        return self.slice_product(other)

    def __rmul__(self, other):
        return as_slice_function(other).slice_product(self)

    # -- classification --------------------------------------------------------------

    @property
    def is_polynomial(self) -> bool:
        return self.stem.is_polynomial

    def classify(self) -> FunctionClass:
        """Class flags; computed once and cached."""
        if self._class is None:
            self._class = _classify(self)
        return self._class


def as_slice_function(x) -> SliceFunction:
    if isinstance(x, SliceFunction):
        return x
    return SliceFunction(as_stem(x))


def identity(domain: SymmetricDomain | None = None) -> SliceFunction:
    from .domain import WHOLE_PLANE

    return SliceFunction(PolyStem([0.0, 1.0], domain or WHOLE_PLANE), name="x")


def polynomial(coeffs, domain: SymmetricDomain | None = None, name: str = "") -> SliceFunction:
    """``sum x^n a_n`` with quaternion coefficients on the right."""
    from .domain import WHOLE_PLANE

    return SliceFunction(PolyStem(coeffs, domain or WHOLE_PLANE), name=name)


# -- classification internals ---------------------------------------------------------

def _principal_axis(v: np.ndarray):
    """Best-fit line through the origin for 3-vectors ``v``; returns (axis, residual)."""
    if v.shape[0] == 0 or not np.any(v):
        return None, 0.0
    _, s, vt = np.linalg.svd(v, full_matrices=False)
    axis = vt[0]
    resid = np.linalg.norm(v - np.outer(v @ axis, axis), axis=1).max()
    return axis, float(resid)


def _unit_from_axis(axis) -> Q.ImaginaryUnit:
    a = np.concatenate(([0.0], axis / np.linalg.norm(axis)))
    # fix the sign so the first non-negligible component is positive
    k = int(np.argmax(np.abs(a) > 1e-12))
    if a[k] < 0:
        a = -a
    return Q.ImaginaryUnit(Q.Quaternion.from_array(a))


def _classify(f: SliceFunction) -> FunctionClass:
    rng = np.random.default_rng(CLASS_SEED)
    z = f.domain.sample_d_plus(CLASS_SAMPLES, rng)
    F1, F2 = f.stem.eval(z[:, 0], z[:, 1])
    good = np.all(np.isfinite(F1), axis=1) & np.all(np.isfinite(F2), axis=1)
    F1, F2 = F1[good], F2[good]
    scale = 1.0 + max(np.abs(F1).max(initial=0.0), np.abs(F2).max(initial=0.0))
    res = {}

    # slice constant: F' == 0
    D = f.stem.derivative()
    if D.is_polynomial:
        d_res = float(np.abs(D.coeffs).max())
    else:
        D1, D2 = D.eval(z[good, 0], z[good, 1])
        d_res = float(np.nanmax(np.abs(np.concatenate((D1, D2)))))
    res["derivative"] = d_res / scale
    sc = d_res <= TOL_SC * scale

    # slice preserving: real-valued components
    if f.stem.is_polynomial:
        im_res = float(np.abs(f.stem.coeffs[:, 1:]).max())
    else:
        im_res = float(max(np.abs(F1[:, 1:]).max(), np.abs(F2[:, 1:]).max()))
    res["imaginary"] = im_res / scale
    sp = im_res <= TOL_REAL * scale

    # one-slice preserving: imaginary parts on a common line
    preserved = None
    if not sp:
        axis, r = _principal_axis(np.concatenate((F1[:, 1:], F2[:, 1:])))
        res["plane"] = r / scale
        if r <= TOL_PLANE * scale:
            preserved = _unit_from_axis(axis)

    # tilde classes with the witness a = F2(z0)
    k0 = int(np.argmax(Q.qnorm(F2))) if F2.shape[0] else 0
    tilde_r = tilde_c = False
    wa = wb = None
    tunit = None
    if sc or sp:
        tilde_r = tilde_c = True
        wa, wb = Q.ONE, Q.Quaternion()
        tunit = preserved
    elif F2.shape[0] and Q.qnorm(F2[k0]) > 1e-12 * scale:
        a = F2[k0]
        ainv = Q.qinv(a)
        u = Q.qmul(F2, ainv)
        v = Q.qmul(F1, ainv)
        sa = scale / np.linalg.norm(a)
        # tilde-R: F2 a^-1 real and Im(F1 a^-1) constant
        r_u = np.abs(u[:, 1:]).max()
        r_v = np.abs(v[:, 1:] - v[k0, 1:]).max()
        res["tilde_R"] = max(r_u, r_v) / sa
        if max(r_u, r_v) <= TOL_PLANE * sa:
            tilde_r = tilde_c = True
            wa = Q.Quaternion.from_array(a)
            wb = Q.Quaternion.from_array(Q.qmul(np.concatenate(([0.0], v[k0, 1:])), a))
        else:
            axis, r_u = _principal_axis(u[:, 1:])
            if axis is None or r_u > TOL_PLANE * sa:
                res["tilde_C"] = r_u / sa
            else:
                J = _unit_from_axis(axis)
                jv = J.arr[1:]
                # perpendicular part of F1 a^-1 must be constant
                perp = v[:, 1:] - np.outer(v[:, 1:] @ jv, jv)
                r_v = np.abs(perp - perp[k0]).max()
                res["tilde_C"] = max(r_u, r_v) / sa
                if r_v <= TOL_PLANE * sa:
                    tilde_c = True
                    tunit = J
                    wa = Q.Quaternion.from_array(a)
                    wb = Q.Quaternion.from_array(Q.qmul(np.concatenate(([0.0], perp[k0])), a))
    if preserved is not None and not tilde_c:
        tilde_c = True
        tunit = preserved
        wa, wb = Q.ONE, Q.Quaternion()

    return FunctionClass(
        is_slice_constant=sc,
        is_slice_preserving=sp,
        preserved_slice=preserved,
        in_tilde_R=tilde_r,
        in_tilde_C=tilde_c,
        witness_a=wa,
        witness_b=wb,
        tilde_unit=tunit,
        residuals=res,
    )


# -- sampled identities ------------------------------------------------------------------

def representation_residual(f: SliceFunction, n: int = 1000, rng=None) -> float:
    """Max relative violation of ``f(a+Ib) = (f(x)+f(xbar))/2 - (I/2) J (f(x)-f(xbar))``."""
    rng = np.random.default_rng(0) if rng is None else rng
    z = f.domain.sample_d_plus(n, rng)
    I = Q.random_units(rng, n)
    J = Q.random_units(rng, n)
    a, b = z[:, 0], z[:, 1]
    fx = _slice_vals(f, a, b, J)
    fxb = _slice_vals(f, a, -b, J)
    fy = _slice_vals(f, a, b, I)
    rhs = 0.5 * (fx + fxb) - 0.5 * Q.qmul(I, Q.qmul(J, fx - fxb))
    scale = 1.0 + np.linalg.norm(fx, axis=1) + np.linalg.norm(fxb, axis=1)
    return float(np.nanmax(np.linalg.norm(fy - rhs, axis=1) / scale))


def _slice_vals(f: SliceFunction, a, b, units) -> np.ndarray:
    F1, F2 = f.stem.eval(a, b)
    return F1 + Q.qmul(units, F2)
