"""Cat-comm remote CNOT over noisy, possibly multi-hop, optical links.

Every QPU owns two communication qubits: slot 0 receives an incoming pair half
and slot 1 sends. A pair half crossing an intermediate QPU is swapped from the
inbound to the outbound slot, handed to the next QPU's inbound slot and then
suffers that link's traversal noise. Noise acts only on link traversals (and,
when enabled, on idle qubits); SWAPs are ideal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .circuit import COMMUNICATION, Circuit, CircuitError, Measure
from .noise import CollisionKind, NoiseParams, append_collision, insert_channel_traversal
from .topology import Topology, TopologyError, shortest_path

INBOUND, OUTBOUND = 0, 1


@dataclass(frozen=True)
class LinkEndpoints:
    qpu_a: int
    qpu_b: int
    comm_a: int
    comm_b: int
    env: int

    def check(self, c: Circuit) -> None:
        if len({self.comm_a, self.comm_b, self.env}) != 3 or self.qpu_a == self.qpu_b:
            raise CircuitError(f"link endpoints must be distinct: {self}")
        for q in (self.comm_a, self.comm_b):
            if c.role(q) != COMMUNICATION:
                raise CircuitError(f"qubit {q} is not a communication qubit")


@dataclass(frozen=True)
class RcnotPlan:
    control_proc: int
    target_proc: int
    path: tuple[int, ...]
    clbits: tuple[int, int]

    @property
    def hops(self) -> int:
        return len(self.path) - 1


def new_circuit(t: Topology) -> Circuit:
    return Circuit(t.n_qubits, 0, t.roles())


def build_bell_link(c: Circuit, link: LinkEndpoints, params: NoiseParams) -> Circuit:
    """Noisy Bell pair: H, CNOT, then the transmitted half crosses the link."""
    link.check(c)
    c.h(link.comm_a)
    c.cnot(link.comm_a, link.comm_b)
    insert_channel_traversal(c, link.comm_b, link.env, params)
    return c


def _idle_round(c: Circuit, qubits: Sequence[int], env: int, params: NoiseParams) -> None:
    if params.idle_damping_theta <= 0:
        return
    for q in qubits:
        append_collision(c, q, env, params.idle_damping_theta, CollisionKind.IDLE)


def _check_path(t: Topology, path: Sequence[int]) -> None:
    if len(path) < 2:
        raise TopologyError("a path needs at least two QPUs")
    if len(set(path)) != len(path):
        raise TopologyError(f"path revisits a QPU: {list(path)}")
    for a, b in zip(path, path[1:]):
        if not t.adjacent(a, b):
            raise TopologyError(f"QPUs {a} and {b} are not adjacent")


def distribute_entanglement(
    c: Circuit,
    t: Topology,
    path: Sequence[int],
    params: NoiseParams,
    idle_qubits: Sequence[int] = (),
) -> tuple[int, int]:
    """Share a Bell pair between the first and last QPU of ``path``.

    Returns ``(source_comm, destination_comm)``.
    """
    _check_path(t, path)
    env = t.env_qubit
    src = t.qpu(path[0]).communication[OUTBOUND]
    carrier = t.qpu(path[1]).communication[INBOUND]
    c.label(f"link {path[0]}-{path[1]}")
    build_bell_link(c, LinkEndpoints(path[0], path[1], src, carrier, env), params)
    _idle_round(c, [src, *idle_qubits], env, params)
    for here, nxt in zip(path[1:-1], path[2:]):
        out = t.qpu(here).communication[OUTBOUND]
        nxt_in = t.qpu(nxt).communication[INBOUND]
        c.label(f"swap through {here}, link {here}-{nxt}")
        c.swap(carrier, out)
        c.reset(carrier)
        c.swap(out, nxt_in)
        c.reset(out)
        carrier = nxt_in
        insert_channel_traversal(c, carrier, env, params)
        _idle_round(c, [src, *idle_qubits], env, params)
    return src, carrier


def remote_cnot(
    c: Circuit,
    t: Topology,
    plan: RcnotPlan,
    params: NoiseParams,
    idle_qubits: Sequence[int] | None = None,
) -> Circuit:
    """Append a cat-comm CNOT from ``plan.control_proc`` to ``plan.target_proc``.

    ``idle_qubits`` (default: the control) pick up idle collisions while the
    pair is being distributed; they are no-ops unless idle damping is on.
    """
    m1, m2 = plan.clbits
    if m1 == m2:
        raise CircuitError("remote CNOT needs two distinct clbits")
    written = {inst.clbit for inst in c.instructions if isinstance(inst, Measure)}
    if m1 in written or m2 in written:
        raise CircuitError(f"clbits {plan.clbits} already used")
    if plan.control_proc == plan.target_proc:
        raise CircuitError("control and target must differ")
    if idle_qubits is None:
        idle_qubits = (plan.control_proc,)
    c.label(f"rcnot q{plan.control_proc} -> q{plan.target_proc} via {'-'.join(map(str, plan.path))}")
    src, dst = distribute_entanglement(c, t, plan.path, params, idle_qubits)
    # cat-entangler
    c.cnot(plan.control_proc, src)
    c.measure(src, m1)
    c.c_if(m1, 1, "X", [dst])
    c.cnot(dst, plan.target_proc)
    # cat-disentangler
    c.h(dst)
    c.measure(dst, m2)
    c.c_if(m2, 1, "Z", [plan.control_proc])
    c.reset(src)
    c.reset(dst)
    return c


def rcnot_circuit(t: Topology, control_qpu: int, target_qpu: int, params: NoiseParams, path=None):
    """Stand-alone remote CNOT between the first processing qubits of two QPUs.

    Returns ``(circuit, plan)``; the path defaults to the BFS shortest path.
    """
    path = tuple(path) if path is not None else tuple(shortest_path(t, control_qpu, target_qpu))
    c = new_circuit(t)
    plan = RcnotPlan(t.qpu(control_qpu).processing[0], t.qpu(target_qpu).processing[0], path, tuple(c.add_clbits(2)))
    remote_cnot(c, t, plan, params)
    return c, plan
