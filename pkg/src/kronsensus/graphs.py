"""Directed graphs with self-loops: degrees, connectivity, de Bruijn and
Cayley generators, and the communication graph of a strategy matrix.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from . import config
from .errors import DomainError, SizeError
from .groups import AbelianGroup
from .matlin import as_matrix

Arc = tuple[int, int]


@dataclass(frozen=True)
class DirectedGraph:
    """Vertices ``0..vertex_count-1`` and a set of ordered arcs ``(tail, head)``."""

    vertex_count: int
    arcs: frozenset[Arc]

    def __init__(self, vertex_count: int, arcs: Iterable[Arc] = ()):
        if vertex_count < 1:
            raise DomainError(f"vertex_count must be positive, got {vertex_count}")
        arcset = frozenset((int(i), int(j)) for i, j in arcs)
        for i, j in arcset:
            if not (0 <= i < vertex_count and 0 <= j < vertex_count):
                raise DomainError(f"arc {(i, j)} has an endpoint outside [0, {vertex_count})")
        object.__setattr__(self, "vertex_count", int(vertex_count))
        object.__setattr__(self, "arcs", arcset)

    def __len__(self):
        return self.vertex_count

    def adjacency(self) -> np.ndarray:
        """0/1 matrix with ``A[i, j] = 1`` iff ``(i, j)`` is an arc."""
        a = np.zeros((self.vertex_count, self.vertex_count), dtype=np.int64)
        if self.arcs:
            idx = np.array(sorted(self.arcs))
            a[idx[:, 0], idx[:, 1]] = 1
        return a

    def successors(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for i, j in sorted(self.arcs):
            out[i].append(j)
        return out

    def reversed(self) -> "DirectedGraph":
        return DirectedGraph(self.vertex_count, ((j, i) for i, j in self.arcs))

    def is_subgraph_of(self, other: "DirectedGraph") -> bool:
        return self.vertex_count == other.vertex_count and self.arcs <= other.arcs

    def relabeled(self, mapping) -> "DirectedGraph":
        """Image of the graph under the vertex map ``v -> mapping[v]``."""
        return DirectedGraph(self.vertex_count, ((mapping[i], mapping[j]) for i, j in self.arcs))


@dataclass(frozen=True)
class DegreeProfile:
    in_degrees: tuple[int, ...]
    out_degrees: tuple[int, ...]

    @property
    def max_in(self) -> int:
        return max(self.in_degrees)

    @property
    def max_out(self) -> int:
        return max(self.out_degrees)

    def is_in_regular(self, degree: int | None = None) -> bool:
        first = self.in_degrees[0] if degree is None else degree
        return all(d == first for d in self.in_degrees)

    def is_out_regular(self, degree: int | None = None) -> bool:
        first = self.out_degrees[0] if degree is None else degree
        return all(d == first for d in self.out_degrees)


def degree_profile(g: DirectedGraph) -> DegreeProfile:
    """In/out degrees counted with self-loops."""
    ins = [0] * g.vertex_count
    outs = [0] * g.vertex_count
    for i, j in g.arcs:
        outs[i] += 1
        ins[j] += 1
    return DegreeProfile(tuple(ins), tuple(outs))


def de_bruijn_graph(n: int, k: int, *, max_vertices: int | None = None) -> DirectedGraph:
    """De Bruijn graph on ``n**k`` vertices with arcs ``i -> (n*i + j) mod n**k``."""
    if n < 2 or k < 1:
        raise DomainError(f"need n >= 2 and k >= 1, got n={n}, k={k}")
    cap = config.caps.max_product_entries if max_vertices is None else max_vertices
    if n**k > cap:
        raise SizeError(f"de Bruijn graph with {n}**{k} vertices exceeds the cap of {cap}")
    size = n**k
    return DirectedGraph(size, ((i, (n * i + j) % size) for i in range(size) for j in range(n)))


def cayley_graph(group_dims, s: Iterable) -> DirectedGraph:
    """Cayley graph on ``Z_{d1} x ... x Z_{dm}``: arc ``(g, h)`` iff ``h - g`` is in ``s``.

    Elements of ``s`` may use negative representatives (``-1`` means ``d - 1``).
    """
    group = group_dims if isinstance(group_dims, AbelianGroup) else AbelianGroup(group_dims)
    support = {group.canonical(x) for x in s}
    arcs = []
    for g in group.elements():
        gi = group.index(g)
        for x in support:
            arcs.append((gi, group.index(group.add(g, x))))
    return DirectedGraph(group.order, arcs)


def communication_graph(m, zero_tol: float = config.ZERO_TOL) -> DirectedGraph:
    """Arc ``(j, i)`` for every entry with ``|m[i, j]| > zero_tol``.

    Agent ``i`` reads the state of agent ``j`` whenever ``m[i, j]`` is
    nonzero, so information flows from ``j`` to ``i``.
    """
    m = as_matrix(m, square=True)
    rows, cols = np.nonzero(np.abs(m) > zero_tol)
    return DirectedGraph(m.shape[0], zip(cols.tolist(), rows.tolist()))


def _reachable(succ: list[list[int]], start: int) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in succ[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def is_strongly_connected(g: DirectedGraph) -> bool:
    """Every vertex reaches every other: one forward and one backward search from vertex 0."""
    if len(_reachable(g.successors(), 0)) != g.vertex_count:
        return False
    return len(_reachable(g.reversed().successors(), 0)) == g.vertex_count


def is_connected(g: DirectedGraph) -> bool:
    """For every pair, at least one of the two is joined to the other by a path.

    This is the weak notion used for unordered pairs; a graph is connected in
    this sense iff its condensation is a path, which we test by comparing
    reachability sets directly.
    """
    succ = g.successors()
    reach = [_reachable(succ, v) for v in range(g.vertex_count)]
    return all(j in reach[i] or i in reach[j] for i in range(g.vertex_count) for j in range(i + 1, g.vertex_count))


# --- export ---------------------------------------------------------------------


def format_edge_list(g: DirectedGraph) -> str:
    lines = [f"vertices {g.vertex_count}"]
    lines.extend(f"{i} {j}" for i, j in sorted(g.arcs))
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> DirectedGraph:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    head = lines[0].split() if lines else []
    if len(head) != 2 or head[0] != "vertices":
        raise DomainError("edge list must start with 'vertices N'")
    arcs = []
    for ln in lines[1:]:
        i, j = ln.split()
        arcs.append((int(i), int(j)))
    return DirectedGraph(int(head[1]), arcs)


def write_edge_list(path, g: DirectedGraph) -> Path:
    path = Path(path)
    path.write_text(format_edge_list(g))
    return path


def to_dot(g: DirectedGraph, name: str = "G") -> str:
    lines = [f"digraph {name} {{"]
    lines.extend(f"  {v};" for v in range(g.vertex_count))
    lines.extend(f"  {i} -> {j};" for i, j in sorted(g.arcs))
    lines.append("}")
    return "\n".join(lines) + "\n"
