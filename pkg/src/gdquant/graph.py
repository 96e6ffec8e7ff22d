"""Strongly connected components of the transition graph and the order on them."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import UnknownComponent

INCOMPARABLE = "incomparable"
FIRST_PRECEDES = "first_precedes"
SECOND_PRECEDES = "second_precedes"


def strongly_connected_components(adjacency) -> list:
    """Tarjan's algorithm, iterative.  Components come back sorted by their
    smallest vertex, each as a sorted list."""
    adj = np.asarray(adjacency, dtype=bool)
    n = adj.shape[0]
    succ = [np.flatnonzero(row).tolist() for row in adj]
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    comps = []
    counter = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, pos = work[-1]
            if pos < len(succ[v]):
                work[-1] = (v, pos + 1)
                w = succ[v][pos]
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    comps.sort(key=lambda c: c[0])
    return comps


@dataclass(frozen=True, eq=False)
class SccDecomposition:
    """SCC partition of a directed graph with its condensation.

    ``reach[a, b]`` is True when component ``b`` can be reached from ``a``
    (reflexive).  A component is ``trivial`` when it is a single vertex
    without a self-loop.
    """

    components: tuple
    component_of: tuple
    condensation_edges: tuple
    reach: np.ndarray
    trivial: tuple
    adjacency: np.ndarray

    def __len__(self):
        return len(self.components)

    def precedes(self, a: int, b: int) -> bool:
        return a != b and bool(self.reach[a, b])

    @property
    def nontrivial(self) -> list:
        return [k for k, t in enumerate(self.trivial) if not t]

    @property
    def is_irreducible(self) -> bool:
        return len(self.components) == 1

    def topological_order(self) -> list:
        indeg = [0] * len(self.components)
        for _, b in self.condensation_edges:
            indeg[b] += 1
        out = {k: [] for k in range(len(self.components))}
        for a, b in self.condensation_edges:
            out[a].append(b)
        ready = deque(k for k, d in enumerate(indeg) if d == 0)
        order = []
        while ready:
            k = ready.popleft()
            order.append(k)
            for b in out[k]:
                indeg[b] -= 1
                if indeg[b] == 0:
                    ready.append(b)
        if len(order) != len(self.components):
            raise RuntimeError("condensation has a cycle")
        return order

    def to_dot(self) -> str:
        lines = ["digraph condensation {"]
        for k, comp in enumerate(self.components):
            label = ",".join(str(v + 1) for v in comp)
            style = ", style=dashed" if self.trivial[k] else ""
            lines.append(f'  H{k + 1} [label="{{{label}}}"{style}];')
        for a, b in self.condensation_edges:
            lines.append(f"  H{a + 1} -> H{b + 1};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def decompose(adjacency) -> SccDecomposition:
    adj = np.array(adjacency, dtype=bool)
    adj.setflags(write=False)
    comps = strongly_connected_components(adj)
    comp_of = [0] * adj.shape[0]
    for k, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = k
    edges = sorted({(comp_of[i], comp_of[j]) for i, j in zip(*np.nonzero(adj))
                    if comp_of[i] != comp_of[j]})
    m = len(comps)
    reach = np.eye(m, dtype=bool)
    for a, b in edges:
        reach[a, b] = True
    # Warshall closure; m is at most the vertex count
    for k in range(m):
        reach |= reach[:, [k]] & reach[[k], :]
    reach.setflags(write=False)
    trivial = tuple(len(c) == 1 and not adj[c[0], c[0]] for c in comps)
    return SccDecomposition(tuple(tuple(c) for c in comps), tuple(comp_of), tuple(edges),
                            reach, trivial, adj)


def scc_decompose(system) -> SccDecomposition:
    """SCC decomposition of the transition graph of ``system``."""
    dec = decompose(system.support)
    if not any(len(c) >= 2 for c in dec.components):
        raise AssertionError("fan-out >= 2 forces a component with at least two vertices")
    return dec


@dataclass(frozen=True)
class ComparabilityVerdict:
    class_m: tuple
    pairwise: dict
    witness_paths: dict

    @property
    def all_incomparable(self) -> bool:
        return all(rel == INCOMPARABLE for rel in self.pairwise.values())

    def to_json(self, dec: SccDecomposition) -> dict:
        pairs = []
        for (a, b), rel in sorted(self.pairwise.items()):
            w = self.witness_paths.get((a, b))
            pairs.append({"a": a + 1, "b": b + 1, "relation": rel,
                          "witness": None if w is None else [v + 1 for v in w]})
        return {
            "components": [[v + 1 for v in c] for c in dec.components],
            "class_m": [k + 1 for k in self.class_m],
            "pairs": pairs,
        }


def shortest_path(adjacency, sources, targets) -> tuple | None:
    """Breadth-first shortest path from any source to any target.

    Sources and neighbours are visited in ascending index order, so among
    equally short paths the lexicographically smallest discovery wins.
    """
    adj = np.asarray(adjacency, dtype=bool)
    targets = set(targets)
    parent = {}
    queue = deque()
    for s in sorted(sources):
        parent[s] = None
        queue.append(s)
    while queue:
        v = queue.popleft()
        for w in np.flatnonzero(adj[v]).tolist():
            if w in parent:
                continue
            parent[w] = v
            if w in targets:
                path = [w]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return tuple(reversed(path))
            queue.append(w)
    return None


def comparability(dec: SccDecomposition, class_m) -> ComparabilityVerdict:
    """Pairwise order relations among the components listed in ``class_m``.

    Comparable pairs get a shortest witness path from the earlier component
    into the later one.
    """
    class_m = tuple(sorted(int(k) for k in class_m))
    if not class_m:
        raise ValueError("class_m must not be empty")
    for k in class_m:
        if not 0 <= k < len(dec.components):
            raise UnknownComponent(f"no component with index {k}")
    pairwise = {}
    witnesses = {}
    for a, b in combinations(class_m, 2):
        if dec.precedes(a, b):
            pairwise[(a, b)] = FIRST_PRECEDES
            src, dst = a, b
        elif dec.precedes(b, a):
            pairwise[(a, b)] = SECOND_PRECEDES
            src, dst = b, a
        else:
            pairwise[(a, b)] = INCOMPARABLE
            continue
        witnesses[(a, b)] = shortest_path(dec.adjacency, dec.components[src], dec.components[dst])
    return ComparabilityVerdict(class_m, pairwise, witnesses)
