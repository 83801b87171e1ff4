"""Quaternion arithmetic in double precision.

Values are available both as the immutable :class:`Quaternion` type and as
plain float arrays of shape ``(..., 4)`` holding ``(w, x, y, z)``. The array
helpers are what the numerical code uses; the dataclasses are the public
surface.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import qmul_batch

EPS_REAL = 1e-12
TAU_UNIT = 1e-12


@dataclass(frozen=True)
class Quaternion:
    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        a = np.asarray(a, dtype=float).reshape(4)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    @classmethod
    def coerce(cls, q) -> "Quaternion":
        if isinstance(q, Quaternion):
            return q
        if isinstance(q, ImaginaryUnit):
            return q.q
        if np.isscalar(q):
            return cls(float(q))
        return cls.from_array(q)

    @property
    def arr(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def to_list(self) -> list[float]:
        return [self.w, self.x, self.y, self.z]

    @property
    def real(self) -> float:
        return self.w

    @property
    def imag(self) -> "Quaternion":
        return Quaternion(0.0, self.x, self.y, self.z)

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm2(self) -> float:
        return self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z

    def __abs__(self) -> float:
        return math.sqrt(self.norm2())

    def inverse(self) -> "Quaternion":
        n = self.norm2()
        if n == 0.0:
            raise ZeroDivisionError("quaternion 0 has no inverse")
        return Quaternion(self.w / n, -self.x / n, -self.y / n, -self.z / n)

    def dot(self, other) -> float:
        return float(np.dot(self.arr, Quaternion.coerce(other).arr))

    def __add__(self, other):
        o = Quaternion.coerce(other)
        return Quaternion(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)

    __radd__ = __add__

    def __sub__(self, other):
        o = Quaternion.coerce(other)
        return Quaternion(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)

    def __rsub__(self, other):
        return Quaternion.coerce(other) - self

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if np.isscalar(other):
            s = float(other)
            return Quaternion(self.w * s, self.x * s, self.y * s, self.z * s)
        return mul(self, Quaternion.coerce(other))

    def __rmul__(self, other):
        if np.isscalar(other):
            return self * other
        return mul(Quaternion.coerce(other), self)

    def __truediv__(self, other):
        if np.isscalar(other):
            return self * (1.0 / float(other))
        return self * Quaternion.coerce(other).inverse()

    def isclose(self, other, tol: float = 1e-12) -> bool:
        return abs(self - Quaternion.coerce(other)) <= tol * (1.0 + abs(self))

    def __repr__(self) -> str:
        return f"Quaternion({self.w!r}, {self.x!r}, {self.y!r}, {self.z!r})"


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)

CONSTANTS = {"1": ONE, "i": I, "j": J, "k": K}


@dataclass(frozen=True)
class ImaginaryUnit:
    """A unit of S_H, i.e. a purely imaginary quaternion of norm one."""

    q: Quaternion

    def __post_init__(self):
        q = Quaternion.coerce(self.q)
        if abs(q.w) > TAU_UNIT * (1.0 + abs(q)) or abs(abs(q) - 1.0) > TAU_UNIT:
            raise ValueError(f"{q} is not an imaginary unit")
        object.__setattr__(self, "q", q)

    @classmethod
    def normalize(cls, v) -> "ImaginaryUnit":
        """Build a unit from the imaginary part of ``v``; rejects tiny inputs."""
        v = Quaternion.coerce(v)
        im = v.imag
        n = abs(im)
        if n <= EPS_REAL * (1.0 + abs(v)):
            raise ValueError(f"cannot normalise {v}: imaginary part vanishes")
        return cls(im / n)

    @property
    def arr(self) -> np.ndarray:
        return self.q.arr

    def __neg__(self) -> "ImaginaryUnit":
        return ImaginaryUnit(-self.q)


@dataclass(frozen=True)
class SliceCoordinates:
    alpha: float
    beta: float
    J: ImaginaryUnit
    is_real: bool

    def recompose(self) -> Quaternion:
        return Quaternion(self.alpha) + self.J.q * self.beta


# -- operations on the dataclasses -------------------------------------------

def mul(a, b) -> Quaternion:
    a = Quaternion.coerce(a)
    b = Quaternion.coerce(b)
    return Quaternion(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )


def decompose(q) -> SliceCoordinates:
    """Write ``q = alpha + J*beta`` with ``beta >= 0``.

    Real quaternions (``|Im q| <= 1e-12 (1 + |q|)``) get ``beta = 0`` and the
    placeholder unit ``i`` with ``is_real`` set.
    """
    q = Quaternion.coerce(q)
    im = q.imag
    beta = abs(im)
    if beta <= EPS_REAL * (1.0 + abs(q)):
        return SliceCoordinates(q.w, 0.0, ImaginaryUnit(I), True)
    return SliceCoordinates(q.w, beta, ImaginaryUnit(im / beta), False)


def hermitian_product(u, v, unit) -> tuple[float, float]:
    """Return ``(<u, v>, <I u, v>)``.

    The C_I-valued Hermitian product ``pi_I(u conj(v))`` equals
    ``re - I * im`` for the returned pair.
    """
    u = Quaternion.coerce(u)
    v = Quaternion.coerce(v)
    iu = unit_quaternion(unit) * u
    return u.dot(v), iu.dot(v)


def project(q, unit) -> Quaternion:
    """Orthogonal projection onto C_I = Span(1, I)."""
    q = Quaternion.coerce(q)
    u = unit_quaternion(unit)
    return Quaternion(q.w) + u * q.dot(u)


def project_perp(q, unit) -> Quaternion:
    q = Quaternion.coerce(q)
    return q - project(q, unit)


def characteristic_poly_eval(y, x) -> Quaternion:
    """Delta_y(x) = x^2 - 2 Re(y) x + |y|^2."""
    y = Quaternion.coerce(y)
    x = Quaternion.coerce(x)
    return x * x - x * (2.0 * y.w) + Quaternion(y.norm2())


def unit_quaternion(unit) -> Quaternion:
    if isinstance(unit, ImaginaryUnit):
        return unit.q
    return ImaginaryUnit(Quaternion.coerce(unit)).q


def orthogonal_unit(unit) -> ImaginaryUnit:
    """Deterministic unit orthogonal to ``unit``.

    Picks the basis unit among i, j, k least aligned with ``unit`` and
    applies one Gram-Schmidt step.
    """
    u = unit_quaternion(unit).arr
    basis = np.eye(4)[1:]
    e = basis[int(np.argmin(np.abs(basis @ u)))]
    v = e - np.dot(e, u) * u
    return ImaginaryUnit(Quaternion.from_array(v / np.linalg.norm(v)))


# -- array helpers (shape (..., 4)) ------------------------------------------

def as_qarray(q) -> np.ndarray:
    if isinstance(q, (Quaternion, ImaginaryUnit)):
        return Quaternion.coerce(q).arr
    a = np.asarray(q, dtype=float)
    if a.ndim == 0:
        return np.array([float(a), 0.0, 0.0, 0.0])
    if a.shape[-1] != 4:
        raise ValueError(f"expected trailing dimension 4, got shape {a.shape}")
    return a


def qmul(a, b) -> np.ndarray:
    return qmul_batch(as_qarray(a), as_qarray(b))


def qconj(a) -> np.ndarray:
    a = as_qarray(a)
    return a * np.array([1.0, -1.0, -1.0, -1.0])


def qnorm(a) -> np.ndarray:
    return np.linalg.norm(as_qarray(a), axis=-1)


def qdot(a, b) -> np.ndarray:
    return np.sum(as_qarray(a) * as_qarray(b), axis=-1)


def qinv(a) -> np.ndarray:
    a = as_qarray(a)
    return qconj(a) / np.sum(a * a, axis=-1, keepdims=True)


def real_q(x) -> np.ndarray:
    """Embed real numbers as quaternions."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape + (4,))
    out[..., 0] = x
    return out


def complex_to_q(zc, unit=I) -> np.ndarray:
    """Embed complex numbers into C_J via ``a + ib -> a + J b``."""
    zc = np.asarray(zc, dtype=complex)
    u = unit_quaternion(unit).arr
    out = np.multiply.outer(zc.imag, u)
    out[..., 0] += zc.real
    return out


def decompose_array(q) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised :func:`decompose`: returns ``alpha, beta, units, is_real``."""
    q = np.atleast_2d(as_qarray(q))
    alpha = q[:, 0].copy()
    im = q.copy()
    im[:, 0] = 0.0
    beta = np.linalg.norm(im, axis=-1)
    is_real = beta <= EPS_REAL * (1.0 + np.linalg.norm(q, axis=-1))
    units = np.zeros_like(q)
    safe = ~is_real
    units[safe] = im[safe] / beta[safe, None]
    units[is_real] = I.arr
    beta = np.where(is_real, 0.0, beta)
    return alpha, beta, units, is_real


def random_units(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` uniformly distributed imaginary units as a (n, 4) array."""
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    out = np.zeros((n, 4))
    out[:, 1:] = v
    return out


def fibonacci_units(n: int) -> np.ndarray:
    """Quasi-uniform imaginary units (Fibonacci lattice on S^2)."""
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    r = np.sqrt(1.0 - z * z)
    phi = k * math.pi * (3.0 - math.sqrt(5.0)) + 0.3
    out = np.zeros((n, 4))
    out[:, 1] = r * np.cos(phi)
    out[:, 2] = r * np.sin(phi)
    out[:, 3] = z
    return out
