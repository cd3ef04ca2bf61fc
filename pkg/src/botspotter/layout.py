"""ForceAtlas2-style layout: linear attraction on edges, degree-weighted repulsion, central
gravity, and the adaptive per-node speed (swinging/traction) scheme of the Gephi algorithm."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from botspotter.errors import DataError
from botspotter.graph import FriendshipGraph


@dataclass(frozen=True)
class LayoutParams:
    iterations: int = 100
    scaling: float = 2.0
    gravity: float = 1.0
    seed: int = 0
    jitter_tolerance: float = 1.0
    strong_gravity: bool = False
    linlog: bool = False
    prevent_overlap: bool = False
    node_radius: float = 1.0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.scaling <= 0:
            raise ValueError("scaling must be > 0")
        if self.gravity < 0:
            raise ValueError("gravity must be >= 0")


def _forces(pos, mass, src, dst, p: LayoutParams) -> np.ndarray:
    n = len(pos)
    f = np.zeros_like(pos)
    if n > 1:
        x, y = pos[:, 0], pos[:, 1]
        dx = x[:, None] - x[None, :]
        dy = y[:, None] - y[None, :]
        d2 = dx * dx + dy * dy
        np.fill_diagonal(d2, np.inf)
        mm = mass[:, None] * mass[None, :]
        if p.prevent_overlap:
            dist = np.sqrt(d2)
            gap = dist - 2 * p.node_radius
            coef = np.where(gap > 0, p.scaling * mm / np.where(gap > 0, gap, 1.0) / dist,
                            100.0 * p.scaling * mm / dist)
        else:
            coef = p.scaling * mm / d2
        coef[~np.isfinite(coef)] = 0.0
        # sum_j coef_ij (p_i - p_j) without materializing the pairwise differences
        f += pos * coef.sum(axis=1)[:, None] - coef @ pos
    if p.gravity > 0:
        r = np.sqrt((pos ** 2).sum(axis=1))
        if p.strong_gravity:
            g = p.gravity * mass
            f -= pos * g[:, None]
        else:
            g = np.where(r > 0, p.gravity * mass / np.where(r > 0, r, 1.0), 0.0)
            f -= pos * g[:, None]
    if len(src):
        d = pos[src] - pos[dst]
        if p.linlog or p.prevent_overlap:
            dist = np.sqrt((d ** 2).sum(axis=1))
            if p.prevent_overlap:
                eff = np.maximum(dist - 2 * p.node_radius, 0.0)
            else:
                eff = dist
            mag = np.log1p(eff) if p.linlog else eff
            scale = np.where(dist > 0, mag / np.where(dist > 0, dist, 1.0), 0.0)
            pull = d * scale[:, None]
        else:
            pull = d
        np.add.at(f, src, -pull)
        np.add.at(f, dst, pull)
    return f


def layout_force(g: FriendshipGraph, params: LayoutParams = LayoutParams()) -> dict[str, tuple[float, float]]:
    """Run `params.iterations` steps from seeded random positions; returns node -> (x, y)."""
    n = len(g.nodes)
    if n == 0:
        raise DataError("cannot lay out an empty graph")
    rng = np.random.default_rng(params.seed)
    pos = rng.uniform(-1.0, 1.0, (n, 2)) * np.sqrt(n) * 10.0
    idx = g.index
    edges = g.sorted_edges()
    src = np.array([idx[a] for a, _ in edges], dtype=np.int64)
    dst = np.array([idx[b] for _, b in edges], dtype=np.int64)
    mass = g.degrees() + 1.0

    speed, efficiency = 1.0, 1.0
    old = np.zeros_like(pos)
    for _ in range(params.iterations):
        f = _forces(pos, mass, src, dst, params)
        swinging = mass * np.sqrt(((old - f) ** 2).sum(axis=1))
        traction = 0.5 * mass * np.sqrt(((old + f) ** 2).sum(axis=1))
        total_swing, total_traction = swinging.sum(), traction.sum()

        est_jitter = 0.05 * np.sqrt(n)
        jitter = params.jitter_tolerance * max(
            np.sqrt(est_jitter), min(10.0, est_jitter * total_traction / n ** 2))
        if total_traction > 0 and total_swing / total_traction > 2.0:
            if efficiency > 0.05:
                efficiency *= 0.5
            jitter = max(jitter, params.jitter_tolerance)
        if total_swing > 0:
            target = jitter * efficiency * total_traction / total_swing
        else:
            target = np.inf
        if total_swing > jitter * total_traction:
            if efficiency > 0.05:
                efficiency *= 0.7
        elif speed < 1000:
            efficiency *= 1.3
        speed = speed + min(target - speed, 0.5 * speed)

        factor = speed / (1.0 + np.sqrt(speed * swinging))
        pos = pos + f * factor[:, None]
        old = f
        if not np.all(np.isfinite(pos)):
            raise DataError("layout diverged (non-finite positions)")
    return {node: (float(x), float(y)) for node, (x, y) in zip(g.nodes, pos)}


def apply_layout(g: FriendshipGraph, params: LayoutParams = LayoutParams()) -> FriendshipGraph:
    if g.nodes:
        for node, (x, y) in layout_force(g, params).items():
            g.attrs[node]["x"], g.attrs[node]["y"] = x, y
    return g
