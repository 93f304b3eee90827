"""Benchmark experiments: link cost, RCNOT hop sweep, GHZ fidelity, RCNOT tomography."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .catcomm import RcnotPlan, new_circuit, remote_cnot
from .circuit import PROCESSING, Circuit, GATE_MATRICES
from .config import CostRow, ExperimentConfig, FidelityResult, params_echo
from .execute import execute_exact, execute_trajectories
from .ghz import compile_ghz, ghz_state
from .noise import NoiseParams
from .states import MixedState, PureState, apply_unitary, fidelity_with_pure
from .topology import (
    Topology,
    build_topology,
    counted_link_cost,
    link_cost_formula,
    make_line,
    make_topology,
)

SWEEP_INPUTS = ("00", "10", "+0")
BASIS_INPUTS = ("00", "01", "10", "11")


class InvariantError(RuntimeError):
    """A result violated an invariant the harness guarantees."""


def _single(ch: str) -> np.ndarray:
    return PureState.from_label(ch).amplitudes


def two_qubit_input(label: str) -> PureState:
    """``label`` is written control-then-target; control is qubit 0."""
    control, target = label
    return PureState(np.kron(_single(target), _single(control)))


def ideal_cnot_output(label: str) -> PureState:
    return apply_unitary(two_qubit_input(label), GATE_MATRICES["CNOT"], [0, 1])


def prepare(c: Circuit, qubit: int, ch: str) -> None:
    if ch == "1":
        c.x(qubit)
    elif ch == "+":
        c.h(qubit)
    elif ch != "0":
        raise ValueError(f"unsupported input preparation {ch!r}")


def evaluate(circuit: Circuit, keep: Sequence[int], target: PureState, config: ExperimentConfig):
    """(fidelity, stderr) of the reduced output on ``keep`` against ``target``."""
    if config.backend == "exact":
        rho = execute_exact(circuit).merged(keep)
        return fidelity_with_pure(rho, target), 0.0
    res = execute_trajectories(circuit, config.shots, config.seed, keep=keep, target=target)
    return min(max(res.mean, 0.0), 1.0), res.stderr


def _topology_for(config: ExperimentConfig, kind: str, n: int) -> Topology:
    if kind == "custom":
        return build_topology("custom", n, config.edges, root=config.root)
    return make_topology(kind, n)


def run_cost(config: ExperimentConfig) -> list[CostRow]:
    rows = []
    for n in config.n_values or [config.n_qpus]:
        for kind in config.kinds:
            if kind == "ring" and n < 3:
                continue
            t = _topology_for(config, kind, n)
            formula = None if kind == "custom" else link_cost_formula(kind, n)
            counted = counted_link_cost(t)
            if formula is not None and formula != counted:
                raise InvariantError(f"{kind}({n}): counted links {counted} != closed form {formula}")
            rows.append(CostRow(kind, n, formula, counted))
    return rows


def rcnot_sweep_circuit(hops: int, label: str, params: NoiseParams) -> tuple[Circuit, list[int]]:
    """Remote CNOT from QPU 1 to QPU hops+1 of a line, with prepared inputs.

    Returns the circuit and ``[control, target]`` processing qubits.
    """
    t = make_line(hops + 1)
    c = new_circuit(t)
    control, target = t.qpu(1).processing[0], t.qpu(hops + 1).processing[0]
    prepare(c, control, label[0])
    prepare(c, target, label[1])
    plan = RcnotPlan(control, target, tuple(range(1, hops + 2)), tuple(c.add_clbits(2)))
    remote_cnot(c, t, plan, params)
    return c, [control, target]


def _sweep_point(args) -> FidelityResult:
    config, hops, label = args
    start = time.perf_counter()
    c, keep = rcnot_sweep_circuit(hops, label, config.noise)
    f, se = evaluate(c, keep, ideal_cnot_output(label), config)
    return FidelityResult(
        "rcnot_sweep", "line", hops + 1, hops, label, f, se, params_echo(config.noise),
        (time.perf_counter() - start) * 1e3,
    )


def _ghz_point(args) -> FidelityResult:
    config, kind = args
    start = time.perf_counter()
    t = _topology_for(config, kind, config.n_qpus)
    plan, c = compile_ghz(t, config.noise)
    f, se = evaluate(c, t.processing_qubits(), ghz_state(t.n), config)
    return FidelityResult(
        "ghz", kind, t.n, plan.total_links, "ghz", f, se, params_echo(config.noise),
        (time.perf_counter() - start) * 1e3,
    )


def _map(fn: Callable, items: list, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def run_rcnot_sweep(config: ExperimentConfig, max_hops: Optional[int] = None, jobs: int = 1) -> list[FidelityResult]:
    """State fidelity of the remote CNOT for 1..max_hops hops and three inputs."""
    max_hops = config.max_hops if max_hops is None else max_hops
    if max_hops < 1:
        raise ValueError("max_hops must be at least 1")
    items = [(config, k, label) for k in range(1, max_hops + 1) for label in SWEEP_INPUTS]
    return _map(_sweep_point, items, jobs)


def run_ghz(config: ExperimentConfig, jobs: int = 1) -> list[FidelityResult]:
    """GHZ fidelity on the processing register for each configured topology kind.

    The ``hops`` field of each record carries the plan's total link count.
    """
    if config.n_qpus < 3:
        raise ValueError("GHZ benchmark needs at least 3 QPUs")
    return _map(_ghz_point, [(config, k) for k in config.kinds], jobs)


def cnot_choi_target() -> PureState:
    """(CNOT on data) |Phi+>|Phi+>, with data qubits 0,1 and references 2,3."""
    psi = PureState.zero(4)
    for ref, data in ((2, 0), (3, 1)):
        psi = apply_unitary(psi, GATE_MATRICES["H"], [ref])
        psi = apply_unitary(psi, GATE_MATRICES["CNOT"], [ref, data])
    return apply_unitary(psi, GATE_MATRICES["CNOT"], [0, 1])


def rcnot_choi(
    hops: int,
    params: NoiseParams,
    body: Optional[Callable[[Circuit, Topology, int, int], None]] = None,
) -> MixedState:
    """Normalized Choi state of the channel on (control, target) processing qubits.

    Each data qubit starts maximally entangled with a fresh reference qubit; the
    returned state is ordered (control, target, ref_control, ref_target).
    ``body`` appends the process under test; it defaults to the remote CNOT.
    """
    t = make_line(hops + 1)
    control, target = t.qpu(1).processing[0], t.qpu(hops + 1).processing[0]
    ref_c, ref_t = t.n_qubits, t.n_qubits + 1
    roles = t.roles()
    roles.update({ref_c: PROCESSING, ref_t: PROCESSING})
    c = Circuit(t.n_qubits + 2, 0, roles)
    for ref, data in ((ref_c, control), (ref_t, target)):
        c.h(ref)
        c.cnot(ref, data)
    if body is None:
        plan = RcnotPlan(control, target, tuple(range(1, hops + 2)), tuple(c.add_clbits(2)))
        remote_cnot(c, t, plan, params)
    else:
        body(c, t, control, target)
    return execute_exact(c).merged([control, target, ref_c, ref_t])


def process_fidelity_cnot(choi: MixedState) -> float:
    return fidelity_with_pure(choi, cnot_choi_target())


@dataclass
class TomographyReport:
    hops: int
    choi: MixedState
    process_fidelity: float
    basis_fidelities: dict[str, float]

    @property
    def average_basis_fidelity(self) -> float:
        return float(np.mean(list(self.basis_fidelities.values())))

    def records(self, params: dict) -> list[FidelityResult]:
        n = self.hops + 1
        out = [FidelityResult("tomography", "line", n, self.hops, "process", self.process_fidelity, 0.0, params)]
        for label, f in self.basis_fidelities.items():
            out.append(FidelityResult("tomography", "line", n, self.hops, label, f, 0.0, params))
        return out


def run_tomography(config: ExperimentConfig, hops: Optional[int] = None) -> TomographyReport:
    if config.backend != "exact":
        raise ValueError("tomography is only supported on the exact backend")
    hops = config.hops if hops is None else hops
    choi = rcnot_choi(hops, config.noise)
    basis = {}
    for label in BASIS_INPUTS:
        c, keep = rcnot_sweep_circuit(hops, label, config.noise)
        basis[label] = fidelity_with_pure(execute_exact(c).merged(keep), ideal_cnot_output(label))
    return TomographyReport(hops, choi, process_fidelity_cnot(choi), basis)
