"""JSON file formats for graphs, caps, patterns and solve reports.

Floats are written with 17 significant digits so that a write/read round
trip reproduces every double exactly.  Readers raise :class:`ParseError`
naming the offending line (for malformed JSON) or field.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Union

from .cellular import CellularMap, WeightedIncidence
from .errors import HypattError
from .lorentz import OrientedCircle
from .patterns import CirclePattern

PathLike = Union[str, Path]


class ParseError(HypattError, ValueError):
    """A file is not valid JSON or does not have the expected fields."""


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with floats at 17 significant digits; keys keep insertion order."""
    return _dump(obj, 0, indent) + "\n"


def _dump(obj: Any, level: int, indent: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"cannot serialize {obj}")
        text = format(obj, ".17g")
        # keep floats recognisable as floats on the way back in
        return text if any(c in text for c in ".en") else text + ".0"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, level + 1, indent)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj):
            return "[" + ", ".join(_dump(x, level + 1, indent) for x in obj) + "]"
        items = [pad + _dump(x, level + 1, indent) for x in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return _dump(obj.item(), level, indent)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def loads(text: str, source: str = "<input>") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def read_json(path: PathLike) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8 ({exc.reason})") from exc
    return loads(text, str(path))


def write_text(path: PathLike, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


# field helpers ---------------------------------------------------------------


def _field(obj: Any, key: str, where: str) -> Any:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    if key not in obj:
        raise ParseError(f"{where}: missing field '{key}'")
    return obj[key]


def _int(x: Any, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ParseError(f"{where}: expected an integer, got {x!r}")
    return x


def _num(x: Any, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"{where}: expected a number, got {x!r}")
    return float(x)


def _list(x: Any, where: str, length: int | None = None) -> list:
    if not isinstance(x, list):
        raise ParseError(f"{where}: expected a list")
    if length is not None and len(x) != length:
        raise ParseError(f"{where}: expected {length} entries, got {len(x)}")
    return x


# circles ---------------------------------------------------------------------


def circle_to_json(c: OrientedCircle) -> dict:
    return {"n": [float(v) for v in c.n], "d": float(c.d)}


def circle_from_json(obj: Any, where: str) -> OrientedCircle:
    n = _list(_field(obj, "n", where), f"{where}.n", 3)
    d = _num(_field(obj, "d", where), f"{where}.d")
    try:
        return OrientedCircle(tuple(_num(v, f"{where}.n[{k}]") for k, v in enumerate(n)), d)
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from exc


# graphs ----------------------------------------------------------------------


def graph_to_json(g: WeightedIncidence) -> dict:
    return {
        "vertices": g.map.vertex_count,
        "faces": [list(f) for f in g.map.faces],
        "weights": [[i, j, float(w)] for i, j, w in g.triples()],
    }


def graph_from_json(obj: Any) -> WeightedIncidence:
    n = _int(_field(obj, "vertices", "graph"), "vertices")
    if n <= 0:
        raise ParseError("vertices: must be positive")
    faces = []
    for fi, face in enumerate(_list(_field(obj, "faces", "graph"), "faces")):
        verts = [_int(v, f"faces[{fi}][{k}]") for k, v in enumerate(_list(face, f"faces[{fi}]"))]
        if not verts:
            raise ParseError(f"faces[{fi}]: empty face")
        for k, v in enumerate(verts):
            if not 0 <= v < n:
                raise ParseError(f"faces[{fi}][{k}]: vertex {v} out of range 0..{n - 1}")
        faces.append(tuple(verts))
    triples = []
    for t, row in enumerate(_list(_field(obj, "weights", "graph"), "weights")):
        i, j, w = _list(row, f"weights[{t}]", 3)
        triples.append((_int(i, f"weights[{t}][0]"), _int(j, f"weights[{t}][1]"), _num(w, f"weights[{t}][2]")))
    m = CellularMap(n, tuple(faces))
    edges = set(m.edges)
    for t, (i, j, _) in enumerate(triples):
        if (min(i, j), max(i, j), 0) not in edges:
            raise ParseError(f"weights[{t}]: ({i}, {j}) is not an edge of the map")
    try:
        g = WeightedIncidence.from_triples(m, triples)
    except ValueError as exc:
        raise ParseError(f"weights: {exc}") from exc
    extra = set(g.w) - edges
    if extra:
        raise ParseError(f"weights: more weights than edges for {sorted(extra)[:3]}")
    return g


def read_graph(path: PathLike) -> WeightedIncidence:
    return graph_from_json(read_json(path))


# caps ------------------------------------------------------------------------


def caps_to_json(caps) -> dict:
    return {"caps": [circle_to_json(c) for c in caps]}


def caps_from_json(obj: Any) -> list[OrientedCircle]:
    items = _list(_field(obj, "caps", "caps file"), "caps")
    return [circle_from_json(c, f"caps[{k}]") for k, c in enumerate(items)]


def read_caps(path: PathLike) -> list[OrientedCircle]:
    return caps_from_json(read_json(path))


# patterns --------------------------------------------------------------------


def pattern_to_json(p: CirclePattern) -> dict:
    out: dict[str, Any] = {
        "circles": [circle_to_json(c) for c in p.circles],
        "caps": [circle_to_json(c) for c in p.caps],
        "incidences": [[i, j] for i, j in p.incidences],
        "edges": [[i, k, float(a)] for i, k, a in p.edges],
    }
    if p.points:
        out["points"] = [list(x) for x in p.points]
    return out


def pattern_from_json(obj: Any) -> CirclePattern:
    circles = [circle_from_json(c, f"circles[{k}]") for k, c in enumerate(_list(_field(obj, "circles", "pattern"), "circles"))]
    caps = [circle_from_json(c, f"caps[{k}]") for k, c in enumerate(_list(obj.get("caps", []), "caps"))]
    points = []
    for k, x in enumerate(_list(obj.get("points", []), "points")):
        points.append(tuple(_num(v, f"points[{k}][{a}]") for a, v in enumerate(_list(x, f"points[{k}]", 3))))
    sites = len(caps) if caps else len(points)
    incidences = []
    for k, row in enumerate(_list(_field(obj, "incidences", "pattern"), "incidences")):
        i, j = (_int(v, f"incidences[{k}][{a}]") for a, v in enumerate(_list(row, f"incidences[{k}]", 2)))
        if not (0 <= i < len(circles) and 0 <= j < sites):
            raise ParseError(f"incidences[{k}]: index out of range")
        incidences.append((i, j))
    edges = []
    for k, row in enumerate(_list(_field(obj, "edges", "pattern"), "edges")):
        i, j, a = _list(row, f"edges[{k}]", 3)
        i, j = _int(i, f"edges[{k}][0]"), _int(j, f"edges[{k}][1]")
        if not (0 <= i < len(circles) and 0 <= j < len(circles)):
            raise ParseError(f"edges[{k}]: index out of range")
        edges.append((i, j, _num(a, f"edges[{k}][2]")))
    return CirclePattern(tuple(circles), tuple(caps), tuple(incidences), tuple(edges), tuple(points))


def read_pattern(path: PathLike) -> CirclePattern:
    return pattern_from_json(read_json(path))


def report_to_json(report) -> dict:
    """A solve report is a pattern file with three extra fields."""
    out = pattern_to_json(report.pattern)
    out["residual"] = float(report.residual_norm)
    out["iterations"] = int(report.iterations)
    out["restarts"] = int(report.restarts_used)
    return out


def report_from_json(obj: Any) -> tuple[CirclePattern, float, int, int]:
    pattern = pattern_from_json(obj)
    return (
        pattern,
        _num(_field(obj, "residual", "report"), "residual"),
        _int(_field(obj, "iterations", "report"), "iterations"),
        _int(_field(obj, "restarts", "report"), "restarts"),
    )
