"""Conjugation-symmetric open sets D of C and their circularizations.

A quaternion ``q`` lies in the circularization of D exactly when the complex
number ``Re(q) + i|Im(q)|`` lies in D, so every membership question reduces
to the planar shapes below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .quaternion import Quaternion, decompose_array

DEFAULT_BBOX = (-5.0, 5.0, 0.0, 5.0)

SHAPES = ("plane", "disk", "annulus", "rectangle")


class DomainError(ValueError):
    """A point lies outside the domain of a function."""


class EmptyDomainError(DomainError):
    """Sampling could not find points of the requested region."""


@dataclass(frozen=True)
class SymmetricDomain:
    """One of the supported shapes, optionally with the real axis removed.

    ``params`` by shape:

    * ``plane``: none
    * ``disk``: ``center`` (real), ``radius``
    * ``annulus``: ``center`` (real), ``r_in``, ``r_out`` (``r_out`` may be inf)
    * ``rectangle``: ``a_min``, ``a_max``, ``b_max`` (the strip ``|beta| < b_max``)

    ``bbox = (a_min, a_max, b_min, b_max)`` bounds all sampling and grid work
    in the ``(alpha, beta)`` half plane; it matters for unbounded shapes.
    """

    shape: str = "plane"
    params: tuple = ()
    minus_reals: bool = False
    bbox: tuple = DEFAULT_BBOX
    delta: float | None = None
    _p: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        names = {
            "plane": (),
            "disk": ("center", "radius"),
            "annulus": ("center", "r_in", "r_out"),
            "rectangle": ("a_min", "a_max", "b_max"),
        }[self.shape]
        if len(self.params) != len(names):
            raise ValueError(f"{self.shape} expects parameters {names}")
        p = dict(zip(names, (float(v) for v in self.params)))
        if self.shape == "disk" and p["radius"] <= 0:
            raise ValueError("disk radius must be positive")
        if self.shape == "annulus" and not 0 <= p["r_in"] < p["r_out"]:
            raise ValueError("annulus needs 0 <= r_in < r_out")
        if self.shape == "rectangle" and not (p["a_min"] < p["a_max"] and p["b_max"] > 0):
            raise ValueError("degenerate rectangle")
        object.__setattr__(self, "_p", p)
        object.__setattr__(self, "bbox", tuple(float(v) for v in self.bbox))

    # -- constructors ----------------------------------------------------------

    @classmethod
    def plane(cls, minus_reals=False, **kw):
        return cls("plane", (), minus_reals, **kw)

    @classmethod
    def disk(cls, center, radius, minus_reals=False, **kw):
        return cls("disk", (center, radius), minus_reals, **kw)

    @classmethod
    def annulus(cls, center, r_in, r_out, minus_reals=False, **kw):
        return cls("annulus", (center, r_in, r_out), minus_reals, **kw)

    @classmethod
    def rectangle(cls, a_min, a_max, b_max, minus_reals=False, **kw):
        return cls("rectangle", (a_min, a_max, b_max), minus_reals, **kw)

    def with_bbox(self, bbox) -> "SymmetricDomain":
        return replace(self, bbox=tuple(bbox))

    # -- classification ---------------------------------------------------------

    @property
    def kind(self) -> str:
        """``"product"`` when D misses the real axis, ``"slice"`` otherwise."""
        return "product" if self.minus_reals else "slice"

    @property
    def is_product(self) -> bool:
        return self.kind == "product"

    def region(self) -> tuple[float, float, float, float]:
        """Bounding box of D+ clipped to ``bbox``."""
        a0, a1, b0, b1 = self.bbox
        p = self._p
        if self.shape == "disk":
            a0, a1 = max(a0, p["center"] - p["radius"]), min(a1, p["center"] + p["radius"])
            b1 = min(b1, p["radius"])
        elif self.shape == "annulus" and math.isfinite(p["r_out"]):
            a0, a1 = max(a0, p["center"] - p["r_out"]), min(a1, p["center"] + p["r_out"])
            b1 = min(b1, p["r_out"])
        elif self.shape == "rectangle":
            a0, a1 = max(a0, p["a_min"]), min(a1, p["a_max"])
            b1 = min(b1, p["b_max"])
        return a0, a1, max(b0, 0.0), b1

    @property
    def margin(self) -> float:
        if self.delta is not None:
            return self.delta
        a0, a1, b0, b1 = self.region()
        return 1e-3 * math.hypot(a1 - a0, 2.0 * (b1 - b0))

    # -- membership -------------------------------------------------------------

    def contains_complex(self, alpha, beta, margin: float = 0.0):
        """Membership of ``alpha + i beta``; vectorised over array inputs.

        With ``margin > 0`` the point must also keep that distance from the
        boundary of D.
        """
        a = np.asarray(alpha, dtype=float)
        b = np.asarray(beta, dtype=float)
        p = self._p
        m = margin
        if self.shape == "plane":
            ok = np.ones(np.broadcast(a, b).shape, dtype=bool)
        elif self.shape == "disk":
            ok = np.hypot(a - p["center"], b) < p["radius"] - m
        elif self.shape == "annulus":
            r = np.hypot(a - p["center"], b)
            ok = (r > p["r_in"] + m) & (r < p["r_out"] - m)
        else:
            ok = (a > p["a_min"] + m) & (a < p["a_max"] - m) & (np.abs(b) < p["b_max"] - m)
        if self.minus_reals:
            ok = ok & (np.abs(b) > m)
        if ok.ndim == 0:
            return bool(ok)
        return ok

    def contains_quaternion(self, q) -> bool:
        return bool(self.contains_qarray(Quaternion.coerce(q).arr)[0])

    def contains_qarray(self, q: np.ndarray) -> np.ndarray:
        # same real-axis snapping as evaluation, so membership and eval agree
        alpha, beta, _, _ = decompose_array(q)
        return self.contains_complex(alpha, beta)

    # -- sampling ---------------------------------------------------------------

    def sample_d_plus(self, n: int, rng: np.random.Generator | None = None,
                      region=None, max_refine: int = 6) -> np.ndarray:
        """``n`` points ``(alpha, beta)`` of D+ at least ``margin`` inside D.

        Jittered grid over the region (default :meth:`region`), refined until
        enough points land inside D. Returns an array of shape ``(n, 2)``.
        """
        if n < 1:
            raise ValueError("n must be positive")
        rng = np.random.default_rng(0) if rng is None else rng
        a0, a1, b0, b1 = self.region() if region is None else region
        m = self.margin
        b0 = max(b0, m)
        if not (a1 > a0 and b1 > b0):
            raise EmptyDomainError(f"empty sampling region for {self}")
        side = max(int(math.ceil(math.sqrt(n))), 2)
        for _ in range(max_refine):
            da = (a1 - a0) / side
            db = (b1 - b0) / side
            ga, gb = np.meshgrid(a0 + da * (np.arange(side) + 0.5),
                                 b0 + db * (np.arange(side) + 0.5), indexing="ij")
            pa = ga.ravel() + da * (rng.random(side * side) - 0.5) * 0.9
            pb = gb.ravel() + db * (rng.random(side * side) - 0.5) * 0.9
            ok = self.contains_complex(pa, pb, margin=m) & (pb > 0)
            if ok.sum() >= n:
                idx = np.flatnonzero(ok)
                pick = np.sort(rng.choice(idx, size=n, replace=False))
                return np.stack((pa[pick], pb[pick]), axis=-1)
            side *= 2
        raise EmptyDomainError(f"could not draw {n} samples from D+ of {self}")

    def sample_quaternions(self, n: int, rng: np.random.Generator | None = None,
                           region=None) -> np.ndarray:
        """Random points of the circularization with ``beta > 0``."""
        from .quaternion import random_units

        rng = np.random.default_rng(0) if rng is None else rng
        z = self.sample_d_plus(n, rng, region=region)
        units = random_units(rng, n)
        q = units * z[:, 1:2]
        q[:, 0] = z[:, 0]
        return q

    # -- serialisation ----------------------------------------------------------

    def to_json(self) -> dict:
        out = {"shape": self.shape, **{k: _json_float(v) for k, v in self._p.items()},
               "minus_reals": self.minus_reals, "bbox": list(self.bbox)}
        if self.delta is not None:
            out["delta"] = self.delta
        return out

    @classmethod
    def from_json(cls, d: dict) -> "SymmetricDomain":
        shape = d.get("shape", "plane")
        names = {"plane": (), "disk": ("center", "radius"),
                 "annulus": ("center", "r_in", "r_out"),
                 "rectangle": ("a_min", "a_max", "b_max")}
        if shape not in names:
            raise ValueError(f"unknown shape {shape!r}")
        params = tuple(float(d[k]) for k in names[shape])
        return cls(shape, params, bool(d.get("minus_reals", False)),
                   tuple(d.get("bbox", DEFAULT_BBOX)), d.get("delta"))

    def describe(self) -> str:
        body = ", ".join(f"{k}={v:g}" for k, v in self._p.items())
        tail = " minus reals" if self.minus_reals else ""
        return f"{self.shape}({body}){tail}"


def _json_float(v: float):
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


WHOLE_PLANE = SymmetricDomain.plane()
PLANE_MINUS_REALS = SymmetricDomain.plane(minus_reals=True)
PUNCTURED_PLANE = SymmetricDomain.annulus(0.0, 0.0, math.inf)


def merge_domains(a: SymmetricDomain, b: SymmetricDomain) -> SymmetricDomain:
    """Common domain of two stems; the whole plane is compatible with anything."""
    if a == b:
        return a
    if a.shape == "plane" and not a.minus_reals:
        return b
    if b.shape == "plane" and not b.minus_reals:
        return a
    raise DomainError(f"domain mismatch: {a.describe()} vs {b.describe()}")
