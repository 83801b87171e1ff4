"""Holomorphic stem functions F = F1 + iota F2 : D -> H (x) C.

A stem is an immutable expression tree. Evaluation is vectorised: every node
maps arrays ``alpha, beta`` of shape ``(n,)`` to a pair ``(F1, F2)`` of
``(n, 4)`` quaternion arrays. Polynomial subtrees are folded into a single
:class:`PolyStem` at construction, so products, sums and conjugates of
polynomials stay exact.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as P

from . import quaternion as Q
from ._kernels import poly_horner, qmul_batch
from .domain import WHOLE_PLANE, DomainError, SymmetricDomain, merge_domains

# below this |beta| the F2/beta quotient is replaced by dF1/dalpha
HAT_SWITCH = 1e-5
RECIP_EPS = 1e-12
FD_STEP = 1e-6


class StemError(ArithmeticError):
    """Evaluation hit a singular point (e.g. a zero of the normal stem)."""


# -- scalar holomorphic building blocks --------------------------------------

class HoloFn:
    """A holomorphic map of one complex variable, vectorised over ``z``."""

    def __call__(self, z):
        raise NotImplementedError

    def derivative(self) -> "HoloFn":
        raise NotImplementedError

    def reflect(self) -> "HoloFn":
        """Schwarz reflection ``z -> conj(g(conj z))``."""
        raise NotImplementedError

    def reciprocal(self) -> "HoloFn":
        raise NotImplementedError

    def to_ast(self):
        raise TypeError(f"{type(self).__name__} has no JSON form")


def _trim(c):
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    nz = np.flatnonzero(c != 0)
    return c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=complex)


class RatExp(HoloFn):
    """``num(z) / den(z) * exp(ex(z))`` with complex polynomial coefficients.

    Coefficients are in ascending order. The family is closed under
    differentiation, reciprocals and reflection, which keeps every derived
    stem exact.
    """

    def __init__(self, num=(1,), den=(1,), ex=(0,)):
        self.num = _trim(num)
        self.den = _trim(den)
        self.ex = _trim(ex)
        if not np.any(self.den):
            raise ValueError("denominator is identically zero")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        v = P.polyval(z, self.num) / P.polyval(z, self.den)
        if np.any(self.ex):
            v = v * np.exp(P.polyval(z, self.ex))
        return v

    def derivative(self) -> "RatExp":
        n, d, e = self.num, self.den, self.ex
        top = P.polysub(P.polymul(P.polyder(n), d), P.polymul(n, P.polyder(d)))
        top = P.polyadd(top, P.polymul(P.polymul(n, d), P.polyder(e)))
        return RatExp(top, P.polymul(d, d), e)

    def reflect(self) -> "RatExp":
        return RatExp(np.conj(self.num), np.conj(self.den), np.conj(self.ex))

    def reciprocal(self) -> "RatExp":
        return RatExp(self.den, self.num, -self.ex)

    def scaled(self, s: complex) -> "RatExp":
        return RatExp(self.num * s, self.den, self.ex)

    def to_ast(self):
        enc = lambda c: [[float(v.real), float(v.imag)] for v in c]  # noqa: E731
        out = {"num": enc(self.num)}
        if len(self.den) > 1 or self.den[0] != 1:
            out["den"] = enc(self.den)
        if np.any(self.ex):
            out["exp"] = enc(self.ex)
        return out

    def __repr__(self):
        return f"RatExp(num={self.num.tolist()}, den={self.den.tolist()}, ex={self.ex.tolist()})"


class CallableHolo(HoloFn):
    """Wrap a user callable; derivatives fall back to central differences.

    The fallback uses step ``h = 1e-6 max(1, |z|)`` and one Richardson level.
    """

    def __init__(self, fn, dfn=None):
        self.fn = fn
        self.dfn = dfn

    def __call__(self, z):
        return np.asarray(self.fn(np.asarray(z, dtype=complex)), dtype=complex)

    def derivative(self) -> "CallableHolo":
        if self.dfn is not None:
            return CallableHolo(self.dfn)
        fn = self.fn

        def d(z):
            z = np.asarray(z, dtype=complex)
            h = FD_STEP * np.maximum(1.0, np.abs(z))
            d1 = (fn(z + h) - fn(z - h)) / (2 * h)
            d2 = (fn(z + h / 2) - fn(z - h / 2)) / h
            return (4 * d2 - d1) / 3

        return CallableHolo(d)

    def reflect(self) -> "CallableHolo":
        fn, dfn = self.fn, self.dfn
        rd = None if dfn is None else (lambda z: np.conj(dfn(np.conj(z))))
        return CallableHolo(lambda z: np.conj(fn(np.conj(z))), rd)

    def reciprocal(self) -> "CallableHolo":
        fn, dfn = self.fn, self.dfn
        rd = None if dfn is None else (lambda z: -dfn(z) / fn(z) ** 2)
        return CallableHolo(lambda z: 1.0 / fn(z), rd)

    def scaled(self, s: complex) -> "CallableHolo":
        fn, dfn = self.fn, self.dfn
        return CallableHolo(lambda z: s * fn(z), None if dfn is None else (lambda z: s * dfn(z)))


def as_holo(g) -> HoloFn:
    if isinstance(g, HoloFn):
        return g
    if callable(g):
        return CallableHolo(g)
    raise TypeError(f"cannot interpret {g!r} as a holomorphic function")


# -- stem nodes ---------------------------------------------------------------

class Stem:
    """Base class of stem-function expression nodes."""

    domain: SymmetricDomain = WHOLE_PLANE

    def __init__(self):
        self._deriv = None

    # subclasses implement
    def _eval(self, alpha, beta):
        raise NotImplementedError

    def _derivative(self) -> "Stem":
        raise NotImplementedError

    def to_ast(self) -> dict:
        raise NotImplementedError

    # public surface
    @property
    def is_polynomial(self) -> bool:
        return False

    def eval(self, alpha, beta):
        """Vectorised ``(F1, F2)``; singular points come back as NaN."""
        a, b = _as_points(alpha, beta)
        return self._eval(a, b)

    def eval_hat(self, alpha, beta):
        """``(F1, F2hat)`` with ``F2hat = F2/beta`` extended across the real axis."""
        a, b = _as_points(alpha, beta)
        F1, F2 = self._eval(a, b)
        H = np.empty_like(F2)
        small = np.abs(b) <= HAT_SWITCH * (1.0 + np.abs(a))
        big = ~small
        H[big] = F2[big] / b[big, None]
        if np.any(small):
            # F2 is odd in beta and dF2/dbeta = dF1/dalpha, so F2/beta -> F1'
            D1, _ = self.derivative()._eval(a[small], b[small])
            H[small] = D1
        return F1, H

    def derivative(self) -> "Stem":
        if self._deriv is None:
            self._deriv = self._derivative()
        return self._deriv

    # algebra sugar
    def __add__(self, other):
        return stem_add(self, as_stem(other))

    def __radd__(self, other):
        return stem_add(as_stem(other), self)

    def __sub__(self, other):
        return stem_add(self, stem_rscale(as_stem(other), -1.0))

    def __rsub__(self, other):
        return stem_add(as_stem(other), stem_rscale(self, -1.0))

    def __neg__(self):
        return stem_rscale(self, -1.0)

    def __mul__(self, other):
        return stem_mul(self, as_stem(other))

    def __rmul__(self, other):
        return stem_mul(as_stem(other), self)


def _as_points(alpha, beta):
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    b = np.atleast_1d(np.asarray(beta, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    return np.ascontiguousarray(a.ravel()), np.ascontiguousarray(b.ravel())


class PolyStem(Stem):
    """Stem of ``p(x) = sum x^n a_n`` (coefficients on the right)."""

    def __init__(self, coeffs, domain: SymmetricDomain = WHOLE_PLANE):
        super().__init__()
        c = np.atleast_2d(np.asarray([Q.as_qarray(a) for a in coeffs], dtype=float))
        nz = np.flatnonzero(np.any(c != 0, axis=1))
        self.coeffs = c[: nz[-1] + 1] if nz.size else np.zeros((1, 4))
        self.domain = domain

    @property
    def is_polynomial(self) -> bool:
        return True

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def _eval(self, alpha, beta):
        A, B = poly_horner(self.coeffs, alpha, beta)
        return A, B * beta[:, None]

    def eval_hat(self, alpha, beta):
        a, b = _as_points(alpha, beta)
        return poly_horner(self.coeffs, a, b)

    def _derivative(self):
        if self.degree == 0:
            return PolyStem([0.0], self.domain)
        n = np.arange(1, self.degree + 1, dtype=float)[:, None]
        return PolyStem(self.coeffs[1:] * n, self.domain)

    def is_zero(self, tol=0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs) <= tol))

    def to_ast(self):
        return {"op": "poly", "coeffs": self.coeffs.tolist()}

    def __repr__(self):
        return f"PolyStem({self.coeffs.tolist()})"


class ConstStem(Stem):
    """Slice-constant stem: ``(c1, c2)`` on D+, extended even-odd to D-."""

    def __init__(self, c1, c2, domain: SymmetricDomain = WHOLE_PLANE):
        super().__init__()
        self.c1 = Q.as_qarray(c1).astype(float)
        self.c2 = Q.as_qarray(c2).astype(float)
        self.domain = domain

    def _eval(self, alpha, beta):
        n = alpha.shape[0]
        F1 = np.broadcast_to(self.c1, (n, 4)).copy()
        F2 = np.sign(beta)[:, None] * self.c2
        return F1, F2

    def _derivative(self):
        return PolyStem([0.0], self.domain)

    def to_ast(self):
        return {"op": "const", "c1": self.c1.tolist(), "c2": self.c2.tolist()}


class TwoSidedStem(Stem):
    """Stem of the slice function equal to ``g(z)`` on C_J+ and ``conj(k(z))``
    on C_{-J}+, both embedded in C_J (``z = alpha + i beta``, ``beta > 0``).

    ``g`` and ``k`` are holomorphic. On D+:
    ``F1 = (g + conj k)/2``, ``F2 = -(J/2)(g - conj k)``; D- follows by the
    even-odd rule. The derivative is again of this form with ``g', k'``.
    """

    def __init__(self, unit, g: HoloFn, k: HoloFn, domain: SymmetricDomain = WHOLE_PLANE,
                 ast: dict | None = None):
        super().__init__()
        self.unit = Q.unit_quaternion(unit)
        self.g = as_holo(g)
        self.k = as_holo(k)
        self.domain = domain
        self._ast = ast

    def _eval(self, alpha, beta):
        z = alpha + 1j * np.abs(beta)
        gv = self.g(z)
        hv = np.conj(self.k(z))
        F1 = Q.complex_to_q(0.5 * (gv + hv), self.unit)
        F2 = Q.complex_to_q(-0.5j * (gv - hv), self.unit)
        F2 *= np.sign(beta)[:, None]
        return F1, F2

    def _derivative(self):
        ast = None
        if self._ast is not None:
            ast = {"op": "deriv", "arg": self._ast}
        return TwoSidedStem(self.unit, self.g.derivative(), self.k.derivative(),
                            self.domain, ast)

    def to_ast(self):
        if self._ast is not None:
            return self._ast
        raise TypeError("stem built from python callables has no JSON form")


class SumStem(Stem):
    def __init__(self, a: Stem, b: Stem):
        super().__init__()
        self.a, self.b = a, b
        self.domain = merge_domains(a.domain, b.domain)

    def _eval(self, alpha, beta):
        A1, A2 = self.a._eval(alpha, beta)
        B1, B2 = self.b._eval(alpha, beta)
        return A1 + B1, A2 + B2

    def _derivative(self):
        return stem_add(self.a.derivative(), self.b.derivative())

    def to_ast(self):
        return {"op": "add", "args": [self.a.to_ast(), self.b.to_ast()]}


class ProductStem(Stem):
    def __init__(self, a: Stem, b: Stem):
        super().__init__()
        self.a, self.b = a, b
        self.domain = merge_domains(a.domain, b.domain)

    def _eval(self, alpha, beta):
        A1, A2 = self.a._eval(alpha, beta)
        B1, B2 = self.b._eval(alpha, beta)
        return (qmul_batch(A1, B1) - qmul_batch(A2, B2),
                qmul_batch(A1, B2) + qmul_batch(A2, B1))

    def _derivative(self):
        return stem_add(stem_mul(self.a.derivative(), self.b),
                        stem_mul(self.a, self.b.derivative()))

    def to_ast(self):
        return {"op": "mul", "args": [self.a.to_ast(), self.b.to_ast()]}


class RightScaleStem(Stem):
    def __init__(self, a: Stem, s):
        super().__init__()
        self.a = a
        self.s = Q.as_qarray(s).astype(float)
        self.domain = a.domain

    def _eval(self, alpha, beta):
        A1, A2 = self.a._eval(alpha, beta)
        return qmul_batch(A1, self.s), qmul_batch(A2, self.s)

    def _derivative(self):
        return stem_rscale(self.a.derivative(), self.s)

    def to_ast(self):
        return {"op": "rscale", "arg": self.a.to_ast(), "by": self.s.tolist()}


class ConjStem(Stem):
    def __init__(self, a: Stem):
        super().__init__()
        self.a = a
        self.domain = a.domain

    def _eval(self, alpha, beta):
        A1, A2 = self.a._eval(alpha, beta)
        return Q.qconj(A1), Q.qconj(A2)

    def _derivative(self):
        return stem_conj(self.a.derivative())

    def to_ast(self):
        return {"op": "conj", "arg": self.a.to_ast()}


class ReciprocalStem(Stem):
    """Stem of the slice reciprocal: ``N(F)^{-1} F^c``.

    ``N(F) = F F^c = (|F1|^2 - |F2|^2) + iota 2<F1, F2>`` is central, so the
    result is a two-sided inverse of ``F``. Points where ``|N(F)|`` falls
    below ``1e-12 (1 + |F1|^2 + |F2|^2)`` evaluate to NaN.
    """

    def __init__(self, a: Stem):
        super().__init__()
        self.a = a
        self.domain = a.domain

    def _eval(self, alpha, beta):
        A1, A2 = self.a._eval(alpha, beta)
        n1 = Q.qdot(A1, A1) - Q.qdot(A2, A2)
        n2 = 2.0 * Q.qdot(A1, A2)
        nn = n1 * n1 + n2 * n2
        scale = 1.0 + Q.qdot(A1, A1) + Q.qdot(A2, A2)
        bad = np.sqrt(nn) < RECIP_EPS * scale
        with np.errstate(divide="ignore", invalid="ignore"):
            c1, c2 = Q.qconj(A1), Q.qconj(A2)
            R1 = (n1[:, None] * c1 + n2[:, None] * c2) / nn[:, None]
            R2 = (n1[:, None] * c2 - n2[:, None] * c1) / nn[:, None]
        R1[bad] = np.nan
        R2[bad] = np.nan
        return R1, R2

    def _derivative(self):
        return stem_rscale(stem_mul(stem_mul(self, self.a.derivative()), self), -1.0)

    def to_ast(self):
        return {"op": "recip", "arg": self.a.to_ast()}


# -- combinators ---------------------------------------------------------------

def as_stem(x) -> Stem:
    if isinstance(x, Stem):
        return x
    return PolyStem([Q.as_qarray(x)])


def _poly_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Convolution ``c_n = sum_{m+l=n} a_m b_l`` with quaternion products."""
    out = np.zeros((a.shape[0] + b.shape[0] - 1, 4))
    for m in range(a.shape[0]):
        out[m:m + b.shape[0]] += qmul_batch(np.broadcast_to(a[m], b.shape), b)
    return out


def stem_add(a: Stem, b: Stem) -> Stem:
    if a.is_polynomial and b.is_polynomial:
        n = max(a.coeffs.shape[0], b.coeffs.shape[0])
        c = np.zeros((n, 4))
        c[: a.coeffs.shape[0]] += a.coeffs
        c[: b.coeffs.shape[0]] += b.coeffs
        return PolyStem(c, merge_domains(a.domain, b.domain))
    if a.is_polynomial and a.is_zero():
        return b
    if b.is_polynomial and b.is_zero():
        return a
    return SumStem(a, b)


def stem_mul(a: Stem, b: Stem) -> Stem:
    """Complexified product ``(F1G1 - F2G2) + iota (F1G2 + F2G1)``.

    Two polynomial stems multiply by coefficient convolution.
    """
    dom = merge_domains(a.domain, b.domain)
    if a.is_polynomial and b.is_polynomial:
        return PolyStem(_poly_mul(a.coeffs, b.coeffs), dom)
    for x, y in ((a, b), (b, a)):
        if x.is_polynomial and x.is_zero():
            return PolyStem([0.0], dom)
    if b.is_polynomial and b.degree == 0:
        if np.array_equal(b.coeffs[0], [1.0, 0, 0, 0]):
            return a
        return stem_rscale(a, b.coeffs[0])
    if a.is_polynomial and a.degree == 0 and np.array_equal(a.coeffs[0], [1.0, 0, 0, 0]):
        return b
    return ProductStem(a, b)


def stem_rscale(a: Stem, s) -> Stem:
    s = Q.as_qarray(s).astype(float)
    if a.is_polynomial:
        return PolyStem(qmul_batch(a.coeffs, np.broadcast_to(s, a.coeffs.shape)), a.domain)
    if isinstance(a, RightScaleStem):
        return RightScaleStem(a.a, Q.qmul(a.s, s))
    return RightScaleStem(a, s)


def stem_conj(a: Stem) -> Stem:
    """``F^c = conj(F1) + iota conj(F2)``."""
    if a.is_polynomial:
        return PolyStem(Q.qconj(a.coeffs), a.domain)
    if isinstance(a, ConjStem):
        return a.a
    return ConjStem(a)


def stem_reciprocal(a: Stem) -> Stem:
    return ReciprocalStem(a)


def stem_derivative(a: Stem) -> Stem:
    return a.derivative()


def eval_stem(F: Stem, alpha: float, beta: float, check_domain: bool = True):
    """Evaluate at one point; returns two :class:`~slicereg.quaternion.Quaternion`.

    Raises :class:`DomainError` outside the stem's domain and
    :class:`StemError` at singular points.
    """
    if check_domain and not F.domain.contains_complex(alpha, beta):
        raise DomainError(f"({alpha}, {beta}) is outside {F.domain.describe()}")
    F1, F2 = F.eval(alpha, beta)
    if not (np.all(np.isfinite(F1)) and np.all(np.isfinite(F2))):
        raise StemError(f"stem is singular at ({alpha}, {beta})")
    return Q.Quaternion.from_array(F1[0]), Q.Quaternion.from_array(F2[0])


def f2_hat(F: Stem, alpha: float, beta: float) -> Q.Quaternion:
    """``F2/beta``, continued to the real axis by ``dF2/dbeta``."""
    _, H = F.eval_hat(alpha, beta)
    return Q.Quaternion.from_array(H[0])


# -- named constructors ---------------------------------------------------------

def poly(coeffs, domain: SymmetricDomain = WHOLE_PLANE) -> PolyStem:
    return PolyStem(coeffs, domain)


def eta(domain: SymmetricDomain | None = None) -> ConstStem:
    """Slice-constant stem ``(1/2, -i/2)``; equals 1 on C_i+ and 0 on C_{-i}+."""
    from .domain import PLANE_MINUS_REALS

    return ConstStem([0.5, 0, 0, 0], [0, -0.5, 0, 0], domain or PLANE_MINUS_REALS)


def from_slice(unit, g, domain: SymmetricDomain = WHOLE_PLANE) -> TwoSidedStem:
    """Slice extension of a C_J-valued holomorphic ``g`` defined on D.

    ``F1(z) = (g(z) + g(conj z))/2`` and ``F2(z) = -(J/2)(g(z) - g(conj z))``,
    with ``g`` read through ``a + ib -> a + J b``.
    """
    g = as_holo(g)
    ast = None
    if isinstance(g, RatExp):
        ast = {"op": "from_slice", "J": Q.unit_quaternion(unit).to_list(), "g": g.to_ast()}
    return TwoSidedStem(unit, g, g.reflect(), domain, ast)


def schwarz_stem(g, domain: SymmetricDomain | None = None) -> TwoSidedStem:
    """Stem equal to ``g`` on C_i+ and ``-1/conj(g(conj x))`` on C_{-i}+.

    On D+ this gives ``F1 = (g - 1/conj g)/2`` and ``F2 = -(i/2)(g + 1/conj g)``.
    """
    from .domain import PLANE_MINUS_REALS

    g = as_holo(g)
    k = g.reciprocal().scaled(-1.0)
    ast = None
    if isinstance(g, RatExp):
        ast = {"op": "schwarz", "g": g.to_ast()}
    return TwoSidedStem(Q.I, g, k, domain or PLANE_MINUS_REALS, ast)


def identity_stem() -> PolyStem:
    return PolyStem([[0.0, 0, 0, 0], [1.0, 0, 0, 0]])


def unit_stem() -> PolyStem:
    return PolyStem([[1.0, 0, 0, 0]])


# -- invariant checks -------------------------------------------------------------

def even_odd_residual(F: Stem, alpha, beta) -> float:
    """Largest relative violation of ``F1(conj z) = F1(z)``, ``F2(conj z) = -F2(z)``."""
    a, b = _as_points(alpha, beta)
    F1, F2 = F.eval(a, b)
    G1, G2 = F.eval(a, -b)
    scale = 1.0 + np.linalg.norm(F1, axis=-1) + np.linalg.norm(F2, axis=-1)
    r = (np.linalg.norm(F1 - G1, axis=-1) + np.linalg.norm(F2 + G2, axis=-1)) / scale
    return float(np.nanmax(r))


def cauchy_riemann_residual(F: Stem, alpha, beta, h: float = 1e-5) -> np.ndarray:
    """Relative CR residual per point, from central differences.

    Returns ``(|dF1/da - dF2/db| + |dF1/db + dF2/da|) / (1 + |dF/da|)``.
    """
    a, b = _as_points(alpha, beta)
    hs = h * np.maximum(1.0, np.hypot(a, b))
    Fa1, Fa2 = F.eval(a + hs, b)
    Fb1, Fb2 = F.eval(a - hs, b)
    Fc1, Fc2 = F.eval(a, b + hs)
    Fd1, Fd2 = F.eval(a, b - hs)
    d1a = (Fa1 - Fb1) / (2 * hs[:, None])
    d2a = (Fa2 - Fb2) / (2 * hs[:, None])
    d1b = (Fc1 - Fd1) / (2 * hs[:, None])
    d2b = (Fc2 - Fd2) / (2 * hs[:, None])
    r = np.linalg.norm(d1a - d2b, axis=-1) + np.linalg.norm(d1b + d2a, axis=-1)
    mag = np.linalg.norm(d1a, axis=-1) + np.linalg.norm(d2a, axis=-1)
    return r / (1.0 + mag)


def stem_product_value(A1, A2, B1, B2):
    """Pointwise product in H (x) C of two already evaluated stem values."""
    return (qmul_batch(A1, B1) - qmul_batch(A2, B2),
            qmul_batch(A1, B2) + qmul_batch(A2, B1))


def normal_values(F1, F2, c=None):
    """``(n1, n2)`` with ``N(F - c) = n1 + iota n2`` evaluated pointwise."""
    G1 = F1 if c is None else F1 - Q.as_qarray(c)
    return Q.qdot(G1, G1) - Q.qdot(F2, F2), 2.0 * Q.qdot(G1, F2)


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise StemError("non-finite stem value")


__all__ = [
    "HoloFn", "RatExp", "CallableHolo", "Stem", "PolyStem", "ConstStem", "TwoSidedStem",
    "SumStem", "ProductStem", "RightScaleStem", "ConjStem", "ReciprocalStem",
    "StemError", "DomainError", "as_stem", "stem_add", "stem_mul", "stem_rscale",
    "stem_conj", "stem_reciprocal", "stem_derivative", "eval_stem", "f2_hat", "poly",
    "eta", "from_slice", "schwarz_stem", "identity_stem", "unit_stem",
    "even_odd_residual", "cauchy_riemann_residual", "stem_product_value", "normal_values",
]
