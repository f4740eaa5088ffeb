"""GraphML and DOT serialization of coauthorship graphs.

Both writers are deterministic (sorted vertices and edges, ``repr`` for
floats) and both readers accept what the writers produce, so a graph
survives a write/read round trip with its keys, domain labels, betweenness
values and edge weights intact.
"""
from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Mapping

from .graph import CoauthorshipGraph, Vertex

__all__ = ["read_dot", "read_graphml", "to_dot", "to_graphml", "write_dot", "write_graphml"]

NS = "http://graphml.graphdrawing.org/xmlns"

# Fill colors per domain-label set, in the spirit of a two-/three-domain
# color coding; anything else falls back to grey.
PALETTE = {
    ("NNM", "RET"): "#e6550d",
    ("EECS", "NNM"): "#3182bd",
    ("EECS", "RET"): "#31a354",
    ("EECS", "NNM", "RET"): "#756bb1",
}
FALLBACK_COLOR = "#969696"


def _domains_str(domains) -> str:
    return ";".join(sorted(domains))


def _parse_domains(s: str) -> frozenset[str]:
    return frozenset(x for x in s.split(";") if x)


def _window_str(window) -> str:
    return f"{window[0]}:{window[1]}" if window else ""


def _parse_window(s: str):
    if not s:
        return None
    a, b = s.split(":")
    return int(a), int(b)


# -- GraphML -----------------------------------------------------------------------

def to_graphml(g: CoauthorshipGraph, betweenness: Mapping[str, float] | None = None) -> str:
    root = ET.Element("graphml", {"xmlns": NS})
    keys = [
        ("g_name", "graph", "name", "string"),
        ("g_window", "graph", "window", "string"),
        ("g_min_copubs", "graph", "min_copubs", "int"),
        ("v_key", "node", "key", "string"),
        ("v_domains", "node", "domains", "string"),
        ("v_betweenness", "node", "betweenness", "double"),
        ("e_weight", "edge", "weight", "int"),
    ]
    for kid, target, name, typ in keys:
        ET.SubElement(root, "key", {"id": kid, "for": target, "attr.name": name, "attr.type": typ})
    graph = ET.SubElement(root, "graph", {"id": g.name or "G", "edgedefault": "undirected"})
    for kid, value in (("g_name", g.name), ("g_window", _window_str(g.window)), ("g_min_copubs", str(g.min_copubs))):
        ET.SubElement(graph, "data", {"key": kid}).text = value
    for v, attrs in g.vertices.items():
        node = ET.SubElement(graph, "node", {"id": v})
        ET.SubElement(node, "data", {"key": "v_key"}).text = v
        ET.SubElement(node, "data", {"key": "v_domains"}).text = _domains_str(attrs.domains)
        if betweenness is not None:
            ET.SubElement(node, "data", {"key": "v_betweenness"}).text = repr(float(betweenness.get(v, 0.0)))
    for (a, b), w in g.edges.items():
        edge = ET.SubElement(graph, "edge", {"source": a, "target": b})
        ET.SubElement(edge, "data", {"key": "e_weight"}).text = str(w)
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def write_graphml(g: CoauthorshipGraph, path: str | Path, betweenness: Mapping[str, float] | None = None) -> None:
    Path(path).write_text(to_graphml(g, betweenness), encoding="utf-8")


def read_graphml(source: str | Path) -> tuple[CoauthorshipGraph, dict[str, float]]:
    """Parse a GraphML file (or string) into a graph and its betweenness map."""
    text = Path(source).read_text(encoding="utf-8") if not str(source).lstrip().startswith("<") else str(source)
    root = ET.fromstring(text)
    q = lambda tag: f"{{{NS}}}{tag}"
    names = {k.get("id"): k.get("attr.name") for k in root.iter(q("key"))}
    graph = root.find(q("graph"))
    if graph is None:
        raise ValueError("GraphML document has no <graph> element")

    def data(el) -> dict[str, str]:
        return {names.get(d.get("key"), d.get("key")): (d.text or "") for d in el.findall(q("data"))}

    meta = data(graph)
    vertices, bc = {}, {}
    for node in graph.findall(q("node")):
        d = data(node)
        v = node.get("id")
        vertices[v] = Vertex(_parse_domains(d.get("domains", "")))
        if "betweenness" in d:
            bc[v] = float(d["betweenness"])
    edges = {}
    for edge in graph.findall(q("edge")):
        d = data(edge)
        edges[(edge.get("source"), edge.get("target"))] = int(d.get("weight", "1"))
    g = CoauthorshipGraph(
        vertices,
        edges,
        meta.get("name", graph.get("id", "")),
        _parse_window(meta.get("window", "")),
        int(meta.get("min_copubs", "1") or 1),
    )
    return g, bc


# -- DOT ---------------------------------------------------------------------------

def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g: CoauthorshipGraph, betweenness: Mapping[str, float] | None = None) -> str:
    """DOT text; vertex width grows with betweenness, edge pen width with weight."""
    bc = dict(betweenness or {})
    top = max(bc.values(), default=0.0)
    lines = [
        f"graph {_q(g.name or 'G')} {{",
        f"  graph [window={_q(_window_str(g.window))}, min_copubs={g.min_copubs}];",
        "  node [shape=circle, style=filled, fixedsize=true, label=\"\"];",
    ]
    for v, attrs in g.vertices.items():
        b = float(bc.get(v, 0.0))
        width = 0.2 + (0.8 * b / top if top > 0 else 0.0)
        color = PALETTE.get(tuple(sorted(attrs.domains)), FALLBACK_COLOR)
        lines.append(
            f"  {_q(v)} [domains={_q(_domains_str(attrs.domains))}, betweenness={b!r}, "
            f"width={width:.4f}, fillcolor={_q(color)}];"
        )
    for (a, b), w in g.edges.items():
        lines.append(f"  {_q(a)} -- {_q(b)} [weight={w}, penwidth={w}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_dot(g: CoauthorshipGraph, path: str | Path, betweenness: Mapping[str, float] | None = None) -> None:
    Path(path).write_text(to_dot(g, betweenness), encoding="utf-8")


_ID = r'"(?:[^"\\]|\\.)*"|[A-Za-z0-9_.]+'
_VAL = r'"(?:[^"\\]|\\.)*"|[A-Za-z0-9_.+\-#]+'
_ATTR_RE = re.compile(rf"\s*({_ID})\s*=\s*({_VAL})\s*,?")
_HEADER_RE = re.compile(rf"^\s*(?:strict\s+)?graph\s+({_ID})?\s*\{{\s*$")
_EDGE_RE = re.compile(rf"^\s*({_ID})\s*--\s*({_ID})\s*(?:\[(.*)\])?\s*;?\s*$")
_NODE_RE = re.compile(rf"^\s*({_ID})\s*(?:\[(.*)\])?\s*;?\s*$")


def _unq(s: str) -> str:
    if s.startswith('"'):
        return re.sub(r"\\(.)", r"\1", s[1:-1])
    return s


def _attrs(s: str | None) -> dict[str, str]:
    out = {}
    if s:
        for k, v in _ATTR_RE.findall(s):
            out[_unq(k)] = _unq(v)
    return out


def read_dot(source: str | Path) -> tuple[CoauthorshipGraph, dict[str, float]]:
    """Parse the DOT subset written by ``to_dot``."""
    text = str(source) if "{" in str(source) else Path(source).read_text(encoding="utf-8")
    lines = [l for l in text.splitlines() if l.strip()]
    m = _HEADER_RE.match(lines[0])
    if not m:
        raise ValueError("not an undirected DOT graph")
    name = _unq(m.group(1) or "")
    meta: dict[str, str] = {}
    vertices, edges, bc = {}, {}, {}
    for line in lines[1:]:
        s = line.strip()
        if s == "}":
            break
        if s.startswith(("graph [", "graph[")):
            meta.update(_attrs(s[s.index("[") + 1 : s.rindex("]")]))
            continue
        if s.startswith(("node [", "edge [", "node[", "edge[")):
            continue
        em = _EDGE_RE.match(s)
        if em:
            a, b = _unq(em.group(1)), _unq(em.group(2))
            edges[(a, b)] = int(_attrs(em.group(3)).get("weight", "1"))
            continue
        nm = _NODE_RE.match(s)
        if not nm:
            raise ValueError(f"cannot parse DOT line: {s}")
        v = _unq(nm.group(1))
        a = _attrs(nm.group(2))
        vertices[v] = Vertex(_parse_domains(a.get("domains", "")))
        if "betweenness" in a:
            bc[v] = float(a["betweenness"])
    g = CoauthorshipGraph(vertices, edges, name, _parse_window(meta.get("window", "")), int(meta.get("min_copubs", "1")))
    return g, bc
