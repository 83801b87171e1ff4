"""JSON function ASTs and the named example functions.

AST grammar (quaternion literals are ``[w,x,y,z]``, a number, or one of the
names ``1, i, j, k`` with an optional leading minus sign)::

    {"op": "poly", "coeffs": [q0, q1, ...]}      sum x^n q_n
    {"op": "x"}                                  identity
    {"op": "const", "value": q}                  constant function
    {"op": "eta"}                                eta(x) = (1 - I_x i)/2 on H minus R
    {"op": "slice_const", "c1": q, "c2": q}      slice constant stem (c1, c2)
    {"op": "eta_g", "g": G}                      eta(x) g(z_x), g on C_i+
    {"op": "from_slice", "J": q, "g": G}         slice extension of g: C -> C_J
    {"op": "schwarz", "g": G}                    g on C_i+, -1/conj(g(xbar)) on C_-i+
    {"op": "add" | "mul", "args": [A, B, ...]}
    {"op": "sub", "args": [A, B]}
    {"op": "rscale", "arg": A, "by": q}
    {"op": "conj" | "recip" | "deriv", "arg": A}

``G`` describes a complex function ``num(z)/den(z) * exp(ex(z))`` as
``{"num": [[re, im], ...], "den": [...], "exp": [...]}`` (ascending order).
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import quaternion as Q
from . import stem as S
from .domain import PLANE_MINUS_REALS, PUNCTURED_PLANE, SymmetricDomain
from .slicefn import SliceFunction


class ASTError(ValueError):
    """Malformed function description."""


def parse_quaternion(v) -> np.ndarray:
    if isinstance(v, str):
        s = v.strip()
        sign = -1.0 if s.startswith("-") else 1.0
        s = s.lstrip("+-")
        if s not in Q.CONSTANTS:
            raise ASTError(f"unknown constant {v!r}")
        return sign * Q.CONSTANTS[s].arr
    if isinstance(v, (int, float)):
        return Q.real_q(float(v))
    a = np.asarray(v, dtype=float)
    if a.shape != (4,):
        raise ASTError(f"quaternion literal needs 4 components, got {v!r}")
    return a


def parse_holo(g) -> S.RatExp:
    if not isinstance(g, dict) or "num" not in g:
        raise ASTError(f"bad complex function spec {g!r}")

    def cx(key, default):
        raw = g.get(key, default)
        return np.array([complex(*c) if isinstance(c, (list, tuple)) else complex(c) for c in raw])

    return S.RatExp(cx("num", [[1, 0]]), cx("den", [[1, 0]]), cx("exp", [[0, 0]]))


def parse_ast(ast: dict, domain: SymmetricDomain | None = None) -> S.Stem:
    """Build a stem from its JSON description."""
    if not isinstance(ast, dict) or "op" not in ast:
        raise ASTError(f"AST node without 'op': {ast!r}")
    op = ast["op"]
    dom = PLANE_MINUS_REALS if domain is None or not domain.is_product else domain
    try:
        if op == "poly":
            return S.PolyStem([parse_quaternion(c) for c in ast["coeffs"]])
        if op == "x":
            return S.identity_stem()
        if op == "const":
            return S.PolyStem([parse_quaternion(ast["value"])])
        if op == "eta":
            return S.eta(dom)
        if op == "slice_const":
            return S.ConstStem(parse_quaternion(ast["c1"]), parse_quaternion(ast["c2"]), dom)
        if op == "eta_g":
            g = parse_holo(ast["g"])
            return S.TwoSidedStem(Q.I, g, S.RatExp([0]), dom, ast=dict(ast))
        if op == "from_slice":
            unit = Q.Quaternion.from_array(parse_quaternion(ast["J"]))
            base = domain if domain is not None else S.WHOLE_PLANE
            return S.from_slice(unit, parse_holo(ast["g"]), base)
        if op == "schwarz":
            return S.schwarz_stem(parse_holo(ast["g"]), dom)
        if op in ("add", "mul"):
            args = [parse_ast(a, domain) for a in ast["args"]]
            if not args:
                raise ASTError(f"{op} needs arguments")
            out = args[0]
            for a in args[1:]:
                out = S.stem_add(out, a) if op == "add" else S.stem_mul(out, a)
            return out
        if op == "sub":
            a, b = (parse_ast(x, domain) for x in ast["args"])
            return S.stem_add(a, S.stem_rscale(b, -1.0))
        if op == "rscale":
            return S.stem_rscale(parse_ast(ast["arg"], domain), parse_quaternion(ast["by"]))
        if op == "conj":
            return S.stem_conj(parse_ast(ast["arg"], domain))
        if op == "recip":
            return S.stem_reciprocal(parse_ast(ast["arg"], domain))
        if op == "deriv":
            return parse_ast(ast["arg"], domain).derivative()
    except KeyError as e:
        raise ASTError(f"{op} node is missing field {e}") from None
    raise ASTError(f"unknown op {op!r}")


# -- named functions -----------------------------------------------------------------

X = {"op": "x"}
ETA = {"op": "eta"}
EXP_G = {"num": [[1, 0]], "exp": [[0, 0], [0, -2], [1, 0]]}  # e^{z^2 - 2zi}


def _poly(*coeffs):
    return {"op": "poly", "coeffs": list(coeffs)}


def _mul(*args):
    return {"op": "mul", "args": list(args)}


_F5 = _mul(_poly(0, "j", 1), ETA)
_RECIP_X = {"op": "recip", "arg": X}


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    ast: dict
    domain: SymmetricDomain
    description: str
    triple: tuple | None = None
    witness: tuple | None = None
    row: int | None = None

    def function(self) -> SliceFunction:
        return SliceFunction(parse_ast(self.ast, self.domain), self.domain, self.name)


_H_R = PLANE_MINUS_REALS
_I = (0.0, 1.0, 0.0, 0.0)

_ENTRIES = [
    RegistryEntry("x", X, _H_R, "x", (-1, -1, -1), None, 1),
    RegistryEntry("f1", _poly(0, [0, -2, 0, 0], 1), _H_R, "x^2 - 2xi",
                  (-1, -1, 2), _I, 2),
    RegistryEntry("f2", _mul(X, ETA), _H_R, "x eta(x)", (-1, 2, -1), None, 3),
    RegistryEntry("eta_exp", {"op": "eta_g", "g": EXP_G}, _H_R, "eta(x) e^{z^2 - 2zi}",
                  (-1, 2, 2), _I, 4),
    RegistryEntry("f3", {"op": "sub", "args": [_mul({"op": "add", "args": [X, _RECIP_X]}, ETA),
                                               _RECIP_X]},
                  _H_R, "(x + 1/x) eta(x) - 1/x", (-1, 3, -1), None, 5),
    RegistryEntry("schwarz_exp", {"op": "schwarz", "g": EXP_G}, _H_R,
                  "eta(x) e_x - eta^c(x) / conj(e_x)", (-1, 3, 2), _I, 6),
    RegistryEntry("f7", _mul(_poly(4, 0, 1), _poly(-1, [0, -2, 0, 0], 1)), _H_R,
                  "(x^2 + 4)(x^2 - 2xi - 1)", (2, -1, 2), _I, 7),
    RegistryEntry("f2star", _mul(_poly(1, 0, 1), ETA), _H_R, "(x^2 + 1) eta(x)",
                  (2, 2, -1), None, 8),
    RegistryEntry("eta_q3", {"op": "eta_g", "g": {"num": [[3, 0], [0, -2], [1, 0]]}}, _H_R,
                  "eta(x)(z^2 - 2zi + 3)", (2, 2, 2), _I, 9),
    RegistryEntry("x2", _poly(0, 0, 1), _H_R, "x^2", (3, -1, -1), None, 10),
    RegistryEntry("x3p3x", _poly(0, 3, 0, 1), _H_R, "x^3 + 3x", (3, -1, 2), _I, 11),
    RegistryEntry("eta", ETA, _H_R, "eta(x) = (1 - I_x i)/2"),
    RegistryEntry("f4", _poly(0, "j", "i", 1), _H_R, "x^3 + x^2 i + xj"),
    RegistryEntry("f5", _F5, _H_R, "(x^2 + xj) . eta"),
    RegistryEntry("f6", _mul(_poly("j", 1), ETA), _H_R, "(x + j) . eta"),
    RegistryEntry("f5star", _mul(_poly(1, 0, 1), _F5), _H_R, "(x^2 + 1) f5"),
    RegistryEntry("xminv", {"op": "sub", "args": [X, _RECIP_X]}, PUNCTURED_PLANE, "x - 1/x"),
    RegistryEntry("g_mmp", {"op": "recip", "arg": {"op": "add", "args": [
        {"op": "const", "value": "i"}, _mul(X, ETA)]}}, _H_R, "(i + x eta)^{-.}"),
]

REGISTRY = {e.name: e for e in _ENTRIES}
TABLE = sorted((e for e in _ENTRIES if e.row is not None), key=lambda e: e.row)
ALIASES = {"f2*": "f2star", "f5*": "f5star", "id": "x", "identity": "x"}


def get_entry(name: str) -> RegistryEntry:
    key = ALIASES.get(name, name)
    if key not in REGISTRY:
        raise KeyError(f"unknown function {name!r}; known: {', '.join(sorted(REGISTRY))}")
    return REGISTRY[key]


def get(name: str) -> SliceFunction:
    return get_entry(name).function()


def load_function(spec: str) -> SliceFunction:
    """A registry name, a JSON AST string, or ``@file.json`` with ``{"ast", "domain"}``."""
    spec = spec.strip()
    if spec.startswith("@"):
        with open(spec[1:]) as fh:
            doc = json.load(fh)
    elif spec.startswith("{"):
        doc = json.loads(spec)
    else:
        return get(spec)
    if "op" in doc:
        doc = {"ast": doc}
    domain = SymmetricDomain.from_json(doc["domain"]) if "domain" in doc else None
    stem = parse_ast(doc["ast"], domain)
    return SliceFunction(stem, domain or stem.domain, doc.get("name", ""))
