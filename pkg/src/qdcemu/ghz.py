"""GHZ-state compiler: Hadamard on the root, then a remote CNOT fan-out."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .catcomm import RcnotPlan, new_circuit, remote_cnot
from .circuit import Circuit
from .noise import NoiseParams
from .states import PureState
from .topology import Topology, shortest_path


@dataclass(frozen=True)
class GhzPlan:
    root_proc: int
    rcnots: tuple[RcnotPlan, ...]

    @property
    def total_links(self) -> int:
        return sum(p.hops for p in self.rcnots)


def compile_ghz(t: Topology, params: Optional[NoiseParams] = None) -> tuple[GhzPlan, Circuit]:
    """Root fan-out GHZ circuit over the first processing qubit of every QPU.

    Targets are visited in ascending QPU id, each over its BFS shortest path
    from the root. With idle damping enabled, the root and every processing
    qubit already in the GHZ register idle while each new pair is distributed.
    """
    params = NoiseParams() if params is None else params
    c = new_circuit(t)
    root_proc = t.qpu(t.root).processing[0]
    c.label(f"ghz {t.kind} n={t.n} root={t.root}")
    c.h(root_proc)
    plans = []
    entangled = [root_proc]
    for v in sorted(t.ids):
        if v == t.root:
            continue
        plan = RcnotPlan(root_proc, t.qpu(v).processing[0], tuple(shortest_path(t, t.root, v)), tuple(c.add_clbits(2)))
        remote_cnot(c, t, plan, params, idle_qubits=tuple(entangled))
        entangled.append(plan.target_proc)
        plans.append(plan)
    return GhzPlan(root_proc, tuple(plans)), c


def ghz_state(n: int) -> PureState:
    vec = np.zeros(2**n, dtype=complex)
    vec[0] = vec[-1] = 1 / np.sqrt(2)
    return PureState(vec)
