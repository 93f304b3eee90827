"""QPU interconnect graphs with routing and link-cost accounting."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .circuit import COMMUNICATION, ENVIRONMENT, PROCESSING

KINDS = ("line", "ring", "star", "custom")


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class QPU:
    id: int
    processing: tuple[int, ...]
    communication: tuple[int, ...]


@dataclass(frozen=True)
class Topology:
    """QPU graph plus the circuit-qubit layout it implies.

    QPU ids run 1..n. Qubits are numbered processing first (one block per QPU),
    then communication qubits, then a single shared environment qubit.
    """

    kind: str
    qpus: tuple[QPU, ...]
    edges: frozenset
    root: int
    env_qubit: int

    def __post_init__(self):
        _validate(self)

    @property
    def n(self) -> int:
        return len(self.qpus)

    @property
    def ids(self) -> list[int]:
        return [q.id for q in self.qpus]

    @property
    def n_qubits(self) -> int:
        return self.env_qubit + 1

    def qpu(self, qpu_id: int) -> QPU:
        for q in self.qpus:
            if q.id == qpu_id:
                return q
        raise TopologyError(f"no QPU with id {qpu_id}")

    def neighbors(self, qpu_id: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == qpu_id:
                out.append(b)
            elif b == qpu_id:
                out.append(a)
        return sorted(out)

    def adjacent(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def degree(self, qpu_id: int) -> int:
        return len(self.neighbors(qpu_id))

    def roles(self) -> dict[int, str]:
        roles = {}
        for q in self.qpus:
            roles.update({p: PROCESSING for p in q.processing})
            roles.update({c: COMMUNICATION for c in q.communication})
        roles[self.env_qubit] = ENVIRONMENT
        return roles

    def processing_qubits(self) -> list[int]:
        return [p for q in self.qpus for p in q.processing]

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def _validate(t: Topology) -> None:
    if t.kind not in KINDS:
        raise TopologyError(f"unknown topology kind {t.kind!r}; choose from {KINDS}")
    ids = t.ids
    if len(set(ids)) != len(ids):
        raise TopologyError("duplicate QPU ids")
    if t.root not in ids:
        raise TopologyError(f"root {t.root} is not a QPU")
    for a, b in t.edges:
        if a == b:
            raise TopologyError(f"self-loop on QPU {a}")
        if a > b:
            raise TopologyError("edges must be stored as (low, high) pairs")
        if a not in ids or b not in ids:
            raise TopologyError(f"edge ({a}, {b}) references an unknown QPU")
    if len(ids) > 1 and len(_bfs_parents(t, ids[0])) != len(ids):
        raise TopologyError("topology graph is not connected")
    n, m = len(ids), len(t.edges)
    degrees = sorted(t.degree(i) for i in ids)
    if t.kind == "line" and n > 1 and (m != n - 1 or degrees[-1] > 2):
        raise TopologyError("line must be a single path")
    if t.kind == "ring" and (m != n or set(degrees) != {2}):
        raise TopologyError("ring must be a single cycle")
    if t.kind == "star" and n > 1 and (m != n - 1 or t.degree(t.root) != n - 1):
        raise TopologyError("star needs one hub adjacent to all other QPUs")


def _normalize_edges(edges: Iterable[Sequence[int]]) -> frozenset:
    out = set()
    for e in edges:
        a, b = (int(x) for x in e)
        key = (min(a, b), max(a, b))
        if key in out:
            raise TopologyError(f"duplicate edge {key}")
        out.add(key)
    return frozenset(out)


def build_topology(kind: str, n: int, edges, root: int = 1, n_comm: int = 2) -> Topology:
    """Assemble a topology with the standard qubit layout."""
    if n < 1:
        raise TopologyError("need at least one QPU")
    if n_comm < 2:
        raise TopologyError("each QPU needs two communication qubits for pass-through")
    qpus = []
    for i in range(1, n + 1):
        comm_start = n + (i - 1) * n_comm
        qpus.append(QPU(i, (i - 1,), tuple(range(comm_start, comm_start + n_comm))))
    env = n + n * n_comm
    return Topology(kind, tuple(qpus), _normalize_edges(edges), int(root), env)


def make_line(n: int) -> Topology:
    if n < 2:
        raise TopologyError("line needs n >= 2")
    return build_topology("line", n, [(i, i + 1) for i in range(1, n)], root=1)


def make_ring(n: int) -> Topology:
    if n < 3:
        raise TopologyError("ring needs n >= 3")
    return build_topology("ring", n, [(i, i % n + 1) for i in range(1, n + 1)], root=1)


def make_star(n: int) -> Topology:
    if n < 2:
        raise TopologyError("star needs n >= 2")
    return build_topology("star", n, [(1, j) for j in range(2, n + 1)], root=1)


def make_topology(kind: str, n: int) -> Topology:
    makers = {"line": make_line, "ring": make_ring, "star": make_star}
    if kind not in makers:
        raise TopologyError(f"no canonical constructor for {kind!r}; use build_topology")
    return makers[kind](n)


def _bfs_parents(t: Topology, source: int) -> dict[int, int | None]:
    parents: dict[int, int | None] = {source: None}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in t.neighbors(u):
            if v not in parents:
                parents[v] = u
                queue.append(v)
    return parents


def shortest_path(t: Topology, a: int, b: int) -> list[int]:
    """BFS path from ``a`` to ``b``; neighbors expand in ascending id order."""
    for x in (a, b):
        if x not in t.ids:
            raise TopologyError(f"QPU {x} is not in the topology")
    parents = _bfs_parents(t, a)
    if b not in parents:
        raise TopologyError(f"QPU {b} unreachable from {a}")
    path = [b]
    while path[-1] != a:
        path.append(parents[path[-1]])
    return path[::-1]


def hop_distance(t: Topology, a: int, b: int) -> int:
    return len(shortest_path(t, a, b)) - 1


def link_cost_formula(kind: str, n: int) -> int:
    """Closed-form entanglement-link total for root fan-out GHZ generation."""
    if kind == "line":
        if n < 2:
            raise TopologyError("line needs n >= 2")
        return n * (n - 1) // 2
    if kind == "ring":
        if n < 3:
            raise TopologyError("ring needs n >= 3")
        return n * n // 4 if n % 2 == 0 else (n - 1) * (n + 1) // 4
    if kind == "star":
        if n < 2:
            raise TopologyError("star needs n >= 2")
        return n - 1
    raise TopologyError(f"no closed-form cost for topology kind {kind!r}")


def counted_link_cost(t: Topology) -> int:
    """Sum of root-to-QPU hop distances."""
    return sum(hop_distance(t, t.root, v) for v in t.ids if v != t.root)
