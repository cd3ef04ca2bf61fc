"""Undirected friendship graph among bots: closeness, giant component, affinity clustering, export."""
from __future__ import annotations

import csv
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from botspotter.corpus import User
from botspotter.domain import UNKNOWN
from botspotter.errors import DataError


@dataclass
class FriendshipGraph:
    nodes: list[str]
    edges: set[tuple[str, str]]
    attrs: dict[str, dict] = field(default_factory=dict)

    def __post_init__(self):
        self.nodes = sorted(self.nodes)
        for a, b in self.edges:
            if a == b or a > b:
                raise ValueError(f"edge ({a}, {b}) is not a canonical undirected pair")
        for n in self.nodes:
            self.attrs.setdefault(n, {})

    @property
    def index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.nodes)}

    def sorted_edges(self) -> list[tuple[str, str]]:
        return sorted(self.edges)

    def adjacency(self) -> csr_matrix:
        idx = self.index
        n = len(self.nodes)
        if not self.edges:
            return csr_matrix((n, n))
        rows, cols = [], []
        for a, b in self.edges:
            rows += [idx[a], idx[b]]
            cols += [idx[b], idx[a]]
        return csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))

    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency().sum(axis=1)).ravel()

    def subgraph(self, keep: Iterable[str]) -> "FriendshipGraph":
        keep = set(keep)
        return FriendshipGraph(
            nodes=[n for n in self.nodes if n in keep],
            edges={e for e in self.edges if e[0] in keep and e[1] in keep},
            attrs={n: dict(self.attrs[n]) for n in self.nodes if n in keep},
        )


def build_graph(users: Mapping[str, User], labels: Mapping[str, str] | None = None) -> FriendshipGraph:
    """One node per given user; an edge wherever either side lists the other as follower or following."""
    nodes = set(users)
    edges = set()
    for uid, u in users.items():
        for other in (u.followers | u.followings) & nodes:
            if other != uid:
                edges.add((uid, other) if uid < other else (other, uid))
    g = FriendshipGraph(sorted(nodes), edges)
    for n in g.nodes:
        g.attrs[n]["label"] = (labels or {}).get(n, UNKNOWN)
    return g


def closeness_centrality(g: FriendshipGraph) -> dict[str, float]:
    """(n_c - 1) / sum of hop distances to the other nodes of the same component; 0 if isolated."""
    if not g.nodes:
        return {}
    dist = shortest_path(g.adjacency(), method="D", directed=False, unweighted=True)
    reach = np.isfinite(dist)
    n_c = reach.sum(axis=1)
    total = np.where(reach, dist, 0.0).sum(axis=1)
    close = np.where(total > 0, (n_c - 1) / np.where(total > 0, total, 1.0), 0.0)
    return {n: float(c) for n, c in zip(g.nodes, close)}


def components(g: FriendshipGraph) -> list[list[str]]:
    if not g.nodes:
        return []
    _, lab = connected_components(g.adjacency(), directed=False)
    groups: dict[int, list[str]] = {}
    for n, c in zip(g.nodes, lab):
        groups.setdefault(int(c), []).append(n)
    return list(groups.values())


def giant_component(g: FriendshipGraph) -> FriendshipGraph:
    """Largest component; on a size tie, the one holding the smallest node id."""
    comps = components(g)
    if not comps:
        return g.subgraph([])
    best = min(comps, key=lambda c: (-len(c), min(c)))
    return g.subgraph(best)


def annotate_centrality(g: FriendshipGraph) -> FriendshipGraph:
    """Store closeness and its min-max rescaling (`size`) on every node."""
    close = closeness_centrality(g)
    if close:
        lo, hi = min(close.values()), max(close.values())
        for n, c in close.items():
            g.attrs[n]["closeness"] = c
            g.attrs[n]["size"] = (c - lo) / (hi - lo) if hi > lo else 1.0
    return g


@dataclass
class AgreementResult:
    observed: float
    baseline_mean: float
    baseline_std: float
    n_edges: int


def _same_label_fraction(edges, labels: Mapping[str, str | None]) -> float:
    hits = sum(1 for a, b in edges if labels.get(a) is not None and labels.get(a) == labels.get(b))
    return hits / len(edges)


def rewire(edges: list[tuple[str, str]], rng: np.random.Generator, swaps_per_edge: int = 10
           ) -> list[tuple[str, str]]:
    """Degree-preserving double-edge swaps that never create self-loops or duplicates."""
    edges = list(edges)
    present = set(edges)
    m = len(edges)
    if m < 2:
        return edges
    for _ in range(swaps_per_edge * m):
        i, j = rng.integers(0, m, 2)
        if i == j:
            continue
        (a, b), (c, d) = edges[i], edges[j]
        if rng.random() < 0.5:
            c, d = d, c
        if len({a, b, c, d}) < 4:
            continue
        e1 = (a, d) if a < d else (d, a)
        e2 = (c, b) if c < b else (b, c)
        if e1 in present or e2 in present:
            continue
        present -= {edges[i], edges[j]}
        present |= {e1, e2}
        edges[i], edges[j] = e1, e2
    return edges


def cluster_affinity_agreement(g: FriendshipGraph, single_labels: Mapping[str, str | None],
                               samples: int = 20, seed: int = 0) -> AgreementResult:
    """Share of edges joining two bots with the same single-party label, next to the same
    share on degree-preserving rewirings of the graph."""
    edges = g.sorted_edges()
    if not edges:
        raise DataError("agreement is undefined on a graph without edges")
    observed = _same_label_fraction(edges, single_labels)
    rng = np.random.default_rng(seed)
    base = [_same_label_fraction(rewire(edges, rng), single_labels) for _ in range(samples)]
    return AgreementResult(observed, float(np.mean(base)), float(np.std(base)), len(edges))


# --- export -----------------------------------------------------------------------

GEXF_NS = "http://gexf.net/1.3"
VIZ_NS = "http://gexf.net/1.3/viz"


def write_gexf(g: FriendshipGraph, path: str | Path) -> None:
    ET.register_namespace("", GEXF_NS)
    ET.register_namespace("viz", VIZ_NS)
    root = ET.Element(f"{{{GEXF_NS}}}gexf", {"version": "1.3"})
    graph = ET.SubElement(root, f"{{{GEXF_NS}}}graph", {"mode": "static", "defaultedgetype": "undirected"})
    attrs = ET.SubElement(graph, f"{{{GEXF_NS}}}attributes", {"class": "node"})
    ET.SubElement(attrs, f"{{{GEXF_NS}}}attribute", {"id": "affinity", "title": "affinity", "type": "string"})
    ET.SubElement(attrs, f"{{{GEXF_NS}}}attribute", {"id": "closeness", "title": "closeness", "type": "double"})
    nodes = ET.SubElement(graph, f"{{{GEXF_NS}}}nodes")
    for n in g.nodes:
        a = g.attrs[n]
        el = ET.SubElement(nodes, f"{{{GEXF_NS}}}node", {"id": n, "label": a.get("label", UNKNOWN)})
        av = ET.SubElement(el, f"{{{GEXF_NS}}}attvalues")
        ET.SubElement(av, f"{{{GEXF_NS}}}attvalue", {"for": "affinity", "value": a.get("label", UNKNOWN)})
        ET.SubElement(av, f"{{{GEXF_NS}}}attvalue", {"for": "closeness", "value": repr(a.get("closeness", 0.0))})
        ET.SubElement(el, f"{{{VIZ_NS}}}size", {"value": repr(a.get("size", 0.0))})
        ET.SubElement(el, f"{{{VIZ_NS}}}position",
                      {"x": repr(a.get("x", 0.0)), "y": repr(a.get("y", 0.0)), "z": "0.0"})
    edges = ET.SubElement(graph, f"{{{GEXF_NS}}}edges")
    for i, (a, b) in enumerate(g.sorted_edges()):
        ET.SubElement(edges, f"{{{GEXF_NS}}}edge", {"id": str(i), "source": a, "target": b})
    ET.indent(root)
    ET.ElementTree(root).write(path, encoding="UTF-8", xml_declaration=True)


def read_gexf(path: str | Path) -> FriendshipGraph:
    ns = {"g": GEXF_NS, "viz": VIZ_NS}
    root = ET.parse(path).getroot()
    nodes, attrs = [], {}
    for el in root.iterfind(".//g:nodes/g:node", ns):
        n = el.get("id")
        nodes.append(n)
        a = {"label": el.get("label")}
        for av in el.iterfind("g:attvalues/g:attvalue", ns):
            if av.get("for") == "closeness":
                a["closeness"] = float(av.get("value"))
        size = el.find("viz:size", ns)
        pos = el.find("viz:position", ns)
        if size is not None:
            a["size"] = float(size.get("value"))
        if pos is not None:
            a["x"], a["y"] = float(pos.get("x")), float(pos.get("y"))
        attrs[n] = a
    edges = set()
    for el in root.iterfind(".//g:edges/g:edge", ns):
        a, b = el.get("source"), el.get("target")
        edges.add((a, b) if a < b else (b, a))
    return FriendshipGraph(nodes, edges, attrs)


def write_graph_csvs(g: FriendshipGraph, nodes_path: str | Path, edges_path: str | Path) -> None:
    with open(nodes_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["uid", "label", "degree", "closeness", "size", "x", "y"])
        for n, deg in zip(g.nodes, g.degrees()):
            a = g.attrs[n]
            w.writerow([n, a.get("label", UNKNOWN), int(deg), repr(a.get("closeness", 0.0)),
                        repr(a.get("size", 0.0)), repr(a.get("x", 0.0)), repr(a.get("y", 0.0))])
    with open(edges_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source", "target"])
        w.writerows(g.sorted_edges())
