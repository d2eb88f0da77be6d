"""Spec files, module serialization, CSV/SVG tables and the run cache.

Rationals travel as ``"p/q"`` strings (integers are also accepted); JSON
floats are rejected outright.  All JSON output uses sorted keys and a fixed
layout so identical inputs give byte-identical files.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import jsonschema

from .errors import BmqError
from .lattice import Halfspace, HPolytope
from .model import ManifoldSpec, Piece, ZComponent
from .virtmod import AsymptoticProfile, Ray, VirtualTModule, canonicalize, multiplicity


class SpecParseError(BmqError):
    pass


_RATIONAL = {"type": ["string", "integer"]}
_POLYTOPE = {
    "type": "object",
    "required": ["halfspaces"],
    "additionalProperties": False,
    "properties": {
        "halfspaces": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["normal", "bound"],
                "additionalProperties": False,
                "properties": {
                    "normal": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
                    "bound": _RATIONAL,
                    "closed": {"type": "boolean"},
                },
            },
        }
    },
}
SPEC_SCHEMA = {
    "type": "object",
    "required": ["m", "d", "pieces", "z_components", "base_piece"],
    "additionalProperties": False,
    "properties": {
        "m": {"type": "integer", "minimum": 1},
        "d": {"type": "integer", "minimum": 1},
        "base_piece": {"type": ["string", "null"]},
        "pieces": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id"],
                "additionalProperties": False,
                "properties": {"id": {"type": "string"}, "regions": {"type": "array", "items": _POLYTOPE}},
            },
        },
        "z_components": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "a_hat", "ratios", "leaf_polytope", "side_plus", "side_minus"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string"},
                    "a_hat": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
                    "ratios": {"type": "array", "items": _RATIONAL, "minItems": 1},
                    "leaf_polytope": _POLYTOPE,
                    "leaf_polytope_minus": _POLYTOPE,
                    "side_plus": {"type": "string"},
                    "side_minus": {"type": "string"},
                    "threshold_override": _RATIONAL,
                },
            },
        },
    },
}
POLYTOPE_SCHEMA = _POLYTOPE


def parse_rational(x: str | int) -> Fraction:
    if isinstance(x, bool):
        raise SpecParseError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    s = x.strip()
    num, _, den = s.partition("/")
    try:
        n = int(num)
        d = int(den) if den else 1
    except ValueError:
        raise SpecParseError(f"not a rational \"p/q\" string: {x!r}") from None
    if d == 0:
        raise SpecParseError(f"zero denominator in {x!r}")
    return Fraction(n, d)


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _reject_float(text: str):
    raise SpecParseError(f"float literal {text} not allowed; write rationals as \"p/q\" strings")


def loads_json(text: str) -> Any:
    try:
        return json.loads(text, parse_float=_reject_float)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _validate(doc: Any, schema: dict, what: str) -> None:
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(doc), key=lambda e: list(e.path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise SpecParseError(f"{what} schema error at {where}: {e.message}")


def polytope_from_json(doc: dict, dim: int | None = None) -> HPolytope:
    hs = []
    for h in doc["halfspaces"]:
        hs.append(Halfspace(tuple(h["normal"]), parse_rational(h["bound"]), h.get("closed", True)))
    if not hs and dim is None:
        raise SpecParseError("cannot infer the dimension of a polytope without halfspaces")
    d = dim if dim is not None else len(hs[0].normal)
    try:
        return HPolytope(tuple(hs), d)
    except ValueError as exc:
        raise SpecParseError(str(exc)) from None


def polytope_to_json(p: HPolytope) -> dict:
    return {
        "halfspaces": [
            {"normal": list(h.normal), "bound": format_rational(h.bound), "closed": h.closed} for h in p.halfspaces
        ]
    }


def spec_from_json(doc: Any) -> ManifoldSpec:
    _validate(doc, SPEC_SCHEMA, "spec")
    d = doc["d"]
    pieces = tuple(
        Piece(p["id"], tuple(polytope_from_json(r, d) for r in p.get("regions", []))) for p in doc["pieces"]
    )
    zs = []
    for z in doc["z_components"]:
        zs.append(
            ZComponent(
                z["id"],
                tuple(parse_rational(r) for r in z["ratios"]),
                tuple(z["a_hat"]),
                polytope_from_json(z["leaf_polytope"], d),
                z["side_plus"],
                z["side_minus"],
                parse_rational(z["threshold_override"]) if "threshold_override" in z else None,
                polytope_from_json(z["leaf_polytope_minus"], d) if "leaf_polytope_minus" in z else None,
            )
        )
    return ManifoldSpec(doc["m"], d, pieces, tuple(zs), doc["base_piece"])


def spec_to_json(spec: ManifoldSpec) -> dict:
    zs = []
    for z in spec.z_components:
        e = {
            "id": z.id,
            "a_hat": list(z.a_hat),
            "ratios": [format_rational(r) for r in z.modular_ratios],
            "leaf_polytope": polytope_to_json(z.leaf_polytope),
            "side_plus": z.side_plus_piece,
            "side_minus": z.side_minus_piece,
        }
        if z.threshold_override is not None:
            e["threshold_override"] = format_rational(z.threshold_override)
        if z.leaf_polytope_minus is not None:
            e["leaf_polytope_minus"] = polytope_to_json(z.leaf_polytope_minus)
        zs.append(e)
    return {
        "m": spec.m,
        "d": spec.d,
        "base_piece": spec.base_piece,
        "pieces": [{"id": p.id, "regions": [polytope_to_json(r) for r in p.regions]} for p in spec.pieces],
        "z_components": zs,
    }


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def load_spec(path: str | os.PathLike) -> ManifoldSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecParseError(f"cannot read {path}: {exc.strerror}") from None
    return spec_from_json(loads_json(text))


def load_polytope(path: str | os.PathLike) -> HPolytope:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecParseError(f"cannot read {path}: {exc.strerror}") from None
    doc = loads_json(text)
    _validate(doc, POLYTOPE_SCHEMA, "polytope")
    return polytope_from_json(doc)


# ---------------------------------------------------------------------------
# modules


def module_to_json(v: VirtualTModule) -> dict:
    return {
        "d": v.d,
        "finite": [{"weight": list(k), "mult": m} for k, m in v.finite],
        "rays": [{"base": list(r.base), "dir": list(r.dir), "value": r.value} for r in v.rays],
    }


def module_from_json(doc: dict) -> VirtualTModule:
    return canonicalize(
        doc["d"],
        [(tuple(e["weight"]), e["mult"]) for e in doc["finite"]],
        [Ray(tuple(r["base"]), tuple(r["dir"]), r["value"]) for r in doc["rays"]],
    )


def profile_to_json(p: AsymptoticProfile) -> dict:
    return {
        "xi": list(p.xi) if p.xi is not None else None,
        "c_plus": p.c_plus,
        "c_minus": p.c_minus,
        "lambda0": p.lambda0,
        "off_axis_clean": p.off_axis_clean,
        "multi_direction": p.multi_direction,
        "periodic": p.periodic,
    }


def window_rows(v: VirtualTModule, window: Sequence[tuple[int, int]]):
    for x in itertools.product(*[range(a, b + 1) for a, b in window]):
        yield x, multiplicity(v, x)


def module_to_csv(v: VirtualTModule, window: Sequence[tuple[int, int]]) -> str:
    header = ",".join([f"w{i + 1}" for i in range(v.d)] + ["mult"])
    lines = [header] + [",".join(map(str, x + (m,))) for x, m in window_rows(v, window)]
    return "\n".join(lines) + "\n"


def module_to_svg(v: VirtualTModule, window: Sequence[tuple[int, int]], cell: int = 14) -> str:
    """Stem plot for d = 1, signed heat map for d = 2."""
    rows = list(window_rows(v, window))
    vmax = max((abs(m) for _, m in rows), default=0) or 1
    out = []
    if v.d == 1:
        (lo, hi), = window
        h = 10 * cell
        W = (hi - lo + 1) * cell + 2 * cell
        mid = h // 2
        out.append(f'<line x1="{cell}" y1="{mid}" x2="{W - cell}" y2="{mid}" stroke="#888"/>')
        for (x,), m in rows:
            cx = cell + (x - lo) * cell + cell // 2
            y = mid - int(m / vmax * (mid - cell))
            color = "#1f5fbf" if m >= 0 else "#bf3f1f"
            out.append(f'<line x1="{cx}" y1="{mid}" x2="{cx}" y2="{y}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<circle cx="{cx}" cy="{y}" r="3" fill="{color}"><title>{x}: {m}</title></circle>')
    elif v.d == 2:
        (lx, hx), (ly, hy) = window
        W, h = (hx - lx + 1) * cell, (hy - ly + 1) * cell
        for (x, y), m in rows:
            a = abs(m) / vmax
            rgb = (255, int(255 * (1 - a)), int(255 * (1 - a))) if m < 0 else (int(255 * (1 - a)), int(255 * (1 - a)), 255)
            px, py = (x - lx) * cell, (hy - y) * cell
            out.append(
                f'<rect x="{px}" y="{py}" width="{cell}" height="{cell}" fill="rgb{rgb}" stroke="#ddd">'
                f"<title>({x},{y}): {m}</title></rect>"
            )
    else:
        raise ValueError("SVG output only for d <= 2")
    head = f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{h}" viewBox="0 0 {W} {h}">'
    return "\n".join([head, *out, "</svg>"]) + "\n"


# ---------------------------------------------------------------------------
# cache


def spec_digest(spec: ManifoldSpec) -> str:
    return hashlib.sha256(dumps(spec_to_json(spec)).encode("utf-8")).hexdigest()


class RunCache:
    """Content-addressed store of quantization results."""

    def __init__(self, root: str | os.PathLike | None = None):
        root = root or os.environ.get("BMQ_CACHE_DIR") or Path.home() / ".cache" / "bmquant"
        self.root = Path(root)

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def get(self, key: str) -> str | None:
        try:
            return self._path(key).read_text(encoding="utf-8")
        except OSError:
            return None

    def put(self, key: str, text: str) -> None:
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
