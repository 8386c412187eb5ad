"""SteinLib STP and JSON serialization for instances and solutions."""

from __future__ import annotations

import json
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

from .graph import InstanceError, SteinerInstance, SteinerTree, Weight, as_weight

STP_MAGIC = "33D32945 STP File, STP Format Version 1.0"


class STPParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_stp(text: str, id: str | None = None) -> SteinerInstance:
    """Parse a SteinLib STP file. File ids are 1-based, returned ids 0-based.

    Accepts ``E u v w`` and ``E u v`` (weight 1). A ``Coordinates`` section is
    honoured only when it gives every node a point inside the unit square;
    anything else is treated as a non-geometric instance.
    """
    section = None
    seen_sections: set[str] = set()
    nodes = n_edges = n_terms = None
    nodes_line = edges_line = terms_line = 0
    edges: list[tuple[int, int, Weight]] = []
    terminals: list[int] = []
    coords: dict[int, tuple[float, float]] = {}
    name = id
    graph_end = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        key = tokens[0].lower()
        if key == "eof":
            break
        if key == "section":
            if section is not None:
                raise STPParseError(f"SECTION {tokens[1:]} opened before END", lineno)
            if len(tokens) < 2:
                raise STPParseError("SECTION without a name", lineno)
            section = tokens[1].lower()
            seen_sections.add(section)
            continue
        if key == "end":
            if section is None:
                raise STPParseError("END outside a section", lineno)
            if section == "graph":
                graph_end = lineno
            section = None
            continue
        if section is None:
            if lineno == 1 or key.startswith("33d32945"):
                continue
            raise STPParseError(f"content outside a section: {line!r}", lineno)

        try:
            if section == "comment":
                if key == "name" and name is None:
                    name = line.split(None, 1)[1].strip().strip('"') if len(tokens) > 1 else ""
            elif section == "graph":
                if key == "nodes":
                    nodes, nodes_line = int(tokens[1]), lineno
                elif key == "edges":
                    n_edges, edges_line = int(tokens[1]), lineno
                elif key == "e":
                    if len(tokens) not in (3, 4):
                        raise STPParseError("edge line needs 'E u v [w]'", lineno)
                    u, v = int(tokens[1]) - 1, int(tokens[2]) - 1
                    w = as_weight(tokens[3]) if len(tokens) == 4 else 1
                    if nodes is not None and not (0 <= u < nodes and 0 <= v < nodes):
                        raise STPParseError(f"edge endpoint outside 1..{nodes}", lineno)
                    edges.append((u, v, w))
                elif key in ("a", "arcs"):
                    raise STPParseError("directed arcs are not supported", lineno)
                else:
                    raise STPParseError(f"unknown Graph keyword {tokens[0]!r}", lineno)
            elif section == "terminals":
                if key == "terminals":
                    n_terms, terms_line = int(tokens[1]), lineno
                elif key == "t":
                    terminals.append(int(tokens[1]) - 1)
                elif key in ("root", "rootp", "tp"):
                    pass
                else:
                    raise STPParseError(f"unknown Terminals keyword {tokens[0]!r}", lineno)
            elif section == "coordinates":
                if key == "dd" and len(tokens) >= 4:
                    coords[int(tokens[1]) - 1] = (float(tokens[2]), float(tokens[3]))
        except (IndexError, ValueError, InstanceError) as exc:
            if isinstance(exc, STPParseError):
                raise
            raise STPParseError(f"malformed line {line!r}: {exc}", lineno) from None

    if section is not None:
        raise STPParseError(f"section {section!r} not closed", lineno)
    for required in ("graph", "terminals"):
        if required not in seen_sections:
            raise STPParseError(f"missing SECTION {required.capitalize()}", lineno)
    if nodes is None:
        raise STPParseError("Graph section does not declare Nodes", graph_end or lineno)
    if n_edges is not None and n_edges != len(edges):
        raise STPParseError(f"declared Edges {n_edges} but found {len(edges)} E lines", edges_line)
    if n_terms is not None and n_terms != len(terminals):
        raise STPParseError(f"declared Terminals {n_terms} but found {len(terminals)} T lines", terms_line)
    bad = [t + 1 for t in terminals if not 0 <= t < nodes]
    if bad:
        raise STPParseError(f"terminal ids {bad} outside 1..{nodes}", terms_line or lineno)

    point_list = None
    if len(coords) == nodes and all(0 <= x <= 1 and 0 <= y <= 1 for x, y in coords.values()):
        point_list = tuple(coords[i] for i in range(nodes))
    try:
        return SteinerInstance(nodes, tuple(edges), tuple(terminals), point_list, name or "")
    except InstanceError as exc:
        raise STPParseError(str(exc), graph_end or nodes_line) from None


def _stp_weight(w: Weight) -> str:
    if isinstance(w, int):
        return str(w)
    den = w.denominator
    for p in (2, 5):
        while den % p == 0:
            den //= p
    if den != 1:
        raise ValueError(f"weight {w} has no finite decimal form for STP output")
    with localcontext() as ctx:
        ctx.prec = 60
        return format(Decimal(w.numerator) / Decimal(w.denominator), "f")


def serialize_stp(instance: SteinerInstance) -> str:
    lines = [STP_MAGIC, "", "SECTION Comment", f'Name "{instance.id}"', "END", "",
             "SECTION Graph", f"Nodes {instance.n}", f"Edges {len(instance.edges)}"]
    lines += [f"E {u + 1} {v + 1} {_stp_weight(w)}" for u, v, w in instance.edges]
    lines += ["END", "", "SECTION Terminals", f"Terminals {len(instance.terminals)}"]
    lines += [f"T {t + 1}" for t in instance.terminals]
    lines += ["END", ""]
    if instance.coords is not None:
        lines.append("SECTION Coordinates")
        lines += [f"DD {i + 1} {x!r} {y!r}" for i, (x, y) in enumerate(instance.coords)]
        lines += ["END", ""]
    lines.append("EOF")
    return "\n".join(lines) + "\n"


def _json_weight(w: Weight):
    return w if isinstance(w, int) else str(w)


def instance_to_dict(instance: SteinerInstance) -> dict:
    return {
        "id": instance.id,
        "n": instance.n,
        "edges": [[u, v, _json_weight(w)] for u, v, w in instance.edges],
        "terminals": list(instance.terminals),
        "coords": None if instance.coords is None else [list(c) for c in instance.coords],
    }


def instance_from_dict(data: dict) -> SteinerInstance:
    coords = data.get("coords")
    return SteinerInstance(
        n=int(data["n"]),
        edges=tuple((int(u), int(v), as_weight(w)) for u, v, w in data["edges"]),
        terminals=tuple(int(t) for t in data["terminals"]),
        coords=None if coords is None else tuple((x, y) for x, y in coords),
        id=str(data.get("id", "")),
    )


def dumps_instance(instance: SteinerInstance) -> str:
    return json.dumps(instance_to_dict(instance), separators=(",", ":"))


def loads_instance(text: str) -> SteinerInstance:
    return instance_from_dict(json.loads(text))


def load_instance(path: str | Path) -> SteinerInstance:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".stp":
        return parse_stp(text, id=None)
    return loads_instance(text)


def save_instance(instance: SteinerInstance, path: str | Path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".stp":
        path.write_text(serialize_stp(instance))
    else:
        path.write_text(dumps_instance(instance) + "\n")


def solution_to_dict(tree: SteinerTree, runtime_ms: float | None = None, **extra) -> dict:
    out = {
        "cost": _json_weight(tree.cost),
        "edges": [[u, v, _json_weight(w)] for u, v, w in tree.edges],
        "runtime_ms": runtime_ms,
    }
    out.update(extra)
    return out


def weight_from_json(value) -> Weight:
    return Fraction(value) if isinstance(value, str) else value
