"""Exact branch-tracking and sampled-trajectory circuit execution.

Both backends keep only *live* qubits in the dense state. A qubit becomes live
the first time an instruction touches it (it is tensored in as |0>), and is
dropped again right after a Reset, where it is exactly |0> and in a product
state with everything else. This keeps the shared environment qubit and the
pool of communication qubits from inflating the register.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

from .circuit import Circuit, CircuitError, Conditional, Gate, Label, Measure, Reset
from .states import (
    MixedState,
    PureState,
    StateError,
    _apply_matrix_pure,
    _conjugate_mixed,
    measure_sampled,
    measurement_branches,
    partial_trace,
    reduced_pure_fidelity,
    reset_qubit,
)

_X = np.array([[0, 1], [1, 0]], dtype=complex)


class _Layout:
    """Map from circuit qubits to positions in the live dense register."""

    def __init__(self):
        self.slots: list[int] = []

    def __contains__(self, q):
        return q in self.slots

    def index(self, q: int) -> int:
        return self.slots.index(q)


def _grow_pure(vec: np.ndarray) -> np.ndarray:
    # new qubit is the most significant one, in |0>
    return np.concatenate([vec, np.zeros_like(vec)])


def _grow_mixed(rho: np.ndarray) -> np.ndarray:
    d = rho.shape[0]
    out = np.zeros((2 * d, 2 * d), dtype=complex)
    out[:d, :d] = rho
    return out


def _drop_pure(vec: np.ndarray, n: int, pos: int) -> np.ndarray:
    t = vec.reshape((2,) * n)
    return np.take(t, 0, axis=n - 1 - pos).reshape(-1)


def _drop_mixed(rho: np.ndarray, n: int, pos: int) -> np.ndarray:
    t = rho.reshape((2,) * (2 * n))
    t = np.take(t, 0, axis=2 * n - 1 - pos)
    t = np.take(t, 0, axis=n - 1 - pos)
    d = 2 ** (n - 1)
    return t.reshape(d, d)


def _touched(inst) -> tuple[int, ...]:
    if isinstance(inst, Gate):
        return inst.targets
    if isinstance(inst, Conditional):
        return inst.inner.targets
    if isinstance(inst, (Measure, Reset)):
        return (inst.qubit,)
    return ()


@dataclass
class BranchState:
    """One classical branch of an exact execution.

    ``state`` covers only ``qubits`` (circuit indices, in state-qubit order);
    every other circuit qubit is |0>. ``clbits`` holds None for bits never
    measured or already merged away.
    """

    probability: float
    state: MixedState
    clbits: tuple[Optional[int], ...]
    qubits: tuple[int, ...]

    def reduced(self, keep: Sequence[int]) -> MixedState:
        return _reduce(self.state.rho, self.qubits, keep)


def _reduce(rho: np.ndarray, qubits: Sequence[int], keep: Sequence[int]) -> MixedState:
    qubits = list(qubits)
    for q in keep:
        if q not in qubits:
            rho = _grow_mixed(rho)
            qubits.append(q)
    return partial_trace(MixedState(rho), [qubits.index(q) for q in keep])


@dataclass
class ExactResult:
    branches: list[BranchState]
    n_qubits: int

    def merged(self, keep: Optional[Sequence[int]] = None) -> MixedState:
        """Probability-weighted mixture of all branches, reduced to ``keep``."""
        keep = list(range(self.n_qubits)) if keep is None else list(keep)
        total = None
        for b in self.branches:
            part = b.probability * b.reduced(keep).rho
            total = part if total is None else total + part
        return MixedState(total)

    @property
    def total_probability(self) -> float:
        return float(sum(b.probability for b in self.branches))


def execute_exact(circuit: Circuit, merge: bool = True) -> ExactResult:
    """Deterministic density-matrix execution with explicit classical branches.

    With ``merge`` set, branches that differ only in clbits that are never read
    again are summed together, which keeps the branch count bounded by the
    number of simultaneously live classical bits.
    """
    circuit.validate()
    last_use = circuit.clbit_last_use()
    layout = _Layout()
    empty = (None,) * circuit.n_clbits
    branches: list[tuple[float, np.ndarray, tuple]] = [(1.0, np.ones((1, 1), dtype=complex), empty)]

    for i, inst in enumerate(circuit.instructions):
        if isinstance(inst, Label):
            continue
        for q in _touched(inst):
            if q not in layout:
                layout.slots.append(q)
                branches = [(p, _grow_mixed(r), c) for p, r, c in branches]
        n = len(layout.slots)

        if isinstance(inst, Gate):
            pos = [layout.index(t) for t in inst.targets]
            u = inst.unitary()
            branches = [(p, _conjugate_mixed(r, n, u, pos), c) for p, r, c in branches]
        elif isinstance(inst, Conditional):
            pos = [layout.index(t) for t in inst.inner.targets]
            u = inst.inner.unitary()
            branches = [
                (p, _conjugate_mixed(r, n, u, pos) if c[inst.clbit] == inst.value else r, c)
                for p, r, c in branches
            ]
        elif isinstance(inst, Measure):
            pos = layout.index(inst.qubit)
            split = []
            for p, r, c in branches:
                for pb, post, bit in measurement_branches(MixedState(r), pos):
                    bits = list(c)
                    bits[inst.clbit] = bit
                    split.append((p * pb, post.rho, tuple(bits)))
            branches = split
        elif isinstance(inst, Reset):
            pos = layout.index(inst.qubit)
            branches = [(p, _drop_mixed(reset_qubit(MixedState(r), pos).rho, n, pos), c) for p, r, c in branches]
            layout.slots.pop(pos)

        if merge:
            dead = [cb for cb, last in last_use.items() if last == i]
            if dead:
                branches = _merge(branches, dead)

    return ExactResult(
        [BranchState(p, MixedState(r), c, tuple(layout.slots)) for p, r, c in branches],
        circuit.n_qubits,
    )


def _merge(branches, dead_clbits):
    groups: dict[tuple, list] = {}
    for p, r, c in branches:
        bits = list(c)
        for cb in dead_clbits:
            bits[cb] = None
        key = tuple(bits)
        if key in groups:
            g = groups[key]
            g[1] = g[1] + p * r
            g[0] += p
        else:
            groups[key] = [p, p * r]
    return [(p, r / p, key) for key, (p, r) in groups.items()]


@dataclass
class Trajectory:
    shot: int
    clbits: tuple[Optional[int], ...]
    amplitudes: np.ndarray
    qubits: tuple[int, ...]
    n_qubits: int

    def full_state(self) -> PureState:
        """Expand to every circuit qubit (idle qubits are |0>)."""
        vec = self.amplitudes
        order = list(self.qubits)
        for q in range(self.n_qubits):
            if q not in order:
                vec = _grow_pure(vec)
                order.append(q)
        n = self.n_qubits
        t = vec.reshape((2,) * n)
        # axis n-1-j holds circuit qubit order[j]; want axis n-1-q for qubit q
        axes = [n - 1 - order.index(n - 1 - a) for a in range(n)]
        return PureState(np.transpose(t, axes).reshape(-1))

    def fidelity(self, keep: Sequence[int], target: PureState) -> float:
        vec = self.amplitudes
        qubits = list(self.qubits)
        for q in keep:
            if q not in qubits:
                vec = _grow_pure(vec)
                qubits.append(q)
        return reduced_pure_fidelity(vec, len(qubits), [qubits.index(q) for q in keep], target)


def shot_rng(seed: int, shot: int) -> np.random.Generator:
    """Independent, reproducible stream for one shot."""
    return np.random.default_rng([int(seed), int(shot)])


def run_trajectory(circuit: Circuit, rng: np.random.Generator, shot: int = 0) -> Trajectory:
    layout = _Layout()
    vec = np.ones(1, dtype=complex)
    clbits: list[Optional[int]] = [None] * circuit.n_clbits
    for inst in circuit.instructions:
        if isinstance(inst, Label):
            continue
        for q in _touched(inst):
            if q not in layout:
                layout.slots.append(q)
                vec = _grow_pure(vec)
        n = len(layout.slots)
        if isinstance(inst, Gate):
            vec = _apply_matrix_pure(vec, n, inst.unitary(), [layout.index(t) for t in inst.targets])
        elif isinstance(inst, Conditional):
            if clbits[inst.clbit] == inst.value:
                pos = [layout.index(t) for t in inst.inner.targets]
                vec = _apply_matrix_pure(vec, n, inst.inner.unitary(), pos)
        elif isinstance(inst, Measure):
            bit, post = measure_sampled(PureState(vec), layout.index(inst.qubit), rng)
            clbits[inst.clbit] = bit
            vec = post.amplitudes
        elif isinstance(inst, Reset):
            pos = layout.index(inst.qubit)
            bit, post = measure_sampled(PureState(vec), pos, rng)
            vec = post.amplitudes
            if bit:
                vec = _apply_matrix_pure(vec, n, _X, [pos])
            vec = _drop_pure(vec, n, pos)
            layout.slots.pop(pos)
    return Trajectory(shot, tuple(clbits), vec, tuple(layout.slots), circuit.n_qubits)


def iter_trajectories(circuit: Circuit, shots: int, seed: int) -> Iterator[Trajectory]:
    if shots < 1:
        raise CircuitError("shots must be at least 1")
    circuit.validate()
    for shot in range(shots):
        yield run_trajectory(circuit, shot_rng(seed, shot), shot)


@dataclass
class TrajectoryResult:
    outcomes: np.ndarray
    fidelities: Optional[np.ndarray]

    @property
    def shots(self) -> int:
        return len(self.outcomes)

    @property
    def mean(self) -> float:
        return float(np.mean(self.fidelities))

    @property
    def stderr(self) -> float:
        if self.shots < 2:
            return 0.0
        return float(np.std(self.fidelities, ddof=1) / np.sqrt(self.shots))


def execute_trajectories(
    circuit: Circuit,
    shots: int,
    seed: int,
    keep: Optional[Sequence[int]] = None,
    target: Optional[PureState] = None,
) -> TrajectoryResult:
    """Sample ``shots`` trajectories.

    ``outcomes`` is a (shots, n_clbits) integer array with -1 for unset bits.
    When ``target`` is given, each shot's fidelity of the reduced state on
    ``keep`` against ``target`` is recorded; the mean is an unbiased estimate
    of the exact-backend fidelity.
    """
    if target is not None and keep is None:
        raise StateError("fidelity estimation needs the kept qubits")
    outcomes = np.full((shots, circuit.n_clbits), -1, dtype=np.int8) if shots > 0 else None
    fids = [] if target is not None else None
    for traj in iter_trajectories(circuit, shots, seed):
        outcomes[traj.shot] = [-1 if b is None else b for b in traj.clbits]
        if fids is not None:
            fids.append(traj.fidelity(keep, target))
    return TrajectoryResult(outcomes, None if fids is None else np.array(fids))
