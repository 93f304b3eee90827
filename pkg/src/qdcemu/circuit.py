"""Circuit representation with mid-circuit measurement and classical feedforward."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .states import StateError, UnitaryMatrix

PROCESSING = "processing"
COMMUNICATION = "communication"
ENVIRONMENT = "environment"
ROLES = (PROCESSING, COMMUNICATION, ENVIRONMENT)

_S2 = 1 / np.sqrt(2)
GATE_MATRICES = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    # two-qubit matrices: operand 0 is the least-significant bit
    "CNOT": np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}
GATE_ARITY = {"H": 1, "X": 1, "Z": 1, "CNOT": 2, "SWAP": 2, "U2q": 2}


class CircuitError(ValueError):
    """Malformed instruction or circuit."""


@dataclass(frozen=True)
class Gate:
    name: str
    targets: tuple[int, ...]
    params: tuple[float, ...] = ()
    matrix: Optional[np.ndarray] = field(default=None, compare=False, repr=False)
    tag: str = ""

    def unitary(self) -> np.ndarray:
        return self.matrix if self.name == "U2q" else GATE_MATRICES[self.name]

    def text(self) -> str:
        name = self.name
        if self.name == "U2q":
            inner = " ".join([self.tag] + [f"{p:.9f}" for p in self.params]).strip()
            name = f"U2q[{inner}]" if inner else "U2q"
        return name + " " + " ".join(f"q{t}" for t in self.targets)


@dataclass(frozen=True)
class Measure:
    qubit: int
    clbit: int

    def text(self) -> str:
        return f"MEASURE q{self.qubit} -> c{self.clbit}"


@dataclass(frozen=True)
class Reset:
    qubit: int

    def text(self) -> str:
        return f"RESET q{self.qubit}"


@dataclass(frozen=True)
class Conditional:
    clbit: int
    value: int
    inner: Gate

    def text(self) -> str:
        return f"IF c{self.clbit}=={self.value} {self.inner.text()}"


@dataclass(frozen=True)
class Label:
    note: str

    def text(self) -> str:
        return f"# {self.note}"


Instruction = Union[Gate, Measure, Reset, Conditional, Label]


def make_gate(name: str, targets: Sequence[int], matrix=None, params=(), tag: str = "") -> Gate:
    if name not in GATE_ARITY:
        raise CircuitError(f"unknown gate {name!r}; choose from {sorted(GATE_ARITY)}")
    targets = tuple(int(t) for t in targets)
    if len(targets) != GATE_ARITY[name]:
        raise CircuitError(f"{name} takes {GATE_ARITY[name]} qubit(s), got {len(targets)}")
    if len(set(targets)) != len(targets):
        raise CircuitError(f"{name} targets must be distinct, got {targets}")
    if name == "U2q":
        if matrix is None:
            raise CircuitError("U2q needs a matrix")
        try:
            u = UnitaryMatrix(matrix)
        except StateError as exc:
            raise CircuitError(f"U2q rejected: {exc}") from None
        if u.k_qubits != 2:
            raise CircuitError("U2q matrix must be 4x4")
        matrix = u.matrix
    elif matrix is not None:
        raise CircuitError(f"{name} takes no matrix")
    return Gate(name, targets, tuple(float(p) for p in params), matrix, tag)


class Circuit:
    """Ordered instruction list over ``n_qubits`` qubits and ``n_clbits`` bits.

    The append methods are the only way to change a circuit.
    """

    def __init__(self, n_qubits: int, n_clbits: int = 0, roles: Optional[Mapping[int, str]] = None):
        if n_qubits < 1:
            raise CircuitError("a circuit needs at least one qubit")
        self.n_qubits = int(n_qubits)
        self.n_clbits = int(n_clbits)
        self._instructions: list[Instruction] = []
        self.roles: dict[int, str] = {}
        for q, role in (roles or {}).items():
            self.set_role(q, role)

    @property
    def instructions(self) -> tuple[Instruction, ...]:
        return tuple(self._instructions)

    def __len__(self):
        return len(self._instructions)

    def set_role(self, qubit: int, role: str) -> None:
        if role not in ROLES:
            raise CircuitError(f"unknown role {role!r}; choose from {ROLES}")
        self._check_qubit(qubit)
        self.roles[int(qubit)] = role

    def role(self, qubit: int) -> Optional[str]:
        return self.roles.get(qubit)

    def add_clbits(self, k: int) -> list[int]:
        start = self.n_clbits
        self.n_clbits += k
        return list(range(start, start + k))

    def _check_qubit(self, q: int) -> None:
        if not 0 <= q < self.n_qubits:
            raise CircuitError(f"qubit {q} out of range (n_qubits={self.n_qubits})")

    def _check_clbit(self, c: int) -> None:
        if not 0 <= c < self.n_clbits:
            raise CircuitError(f"clbit {c} out of range (n_clbits={self.n_clbits})")

    def append(self, inst: Instruction) -> "Circuit":
        if isinstance(inst, Gate):
            for t in inst.targets:
                self._check_qubit(t)
        elif isinstance(inst, Measure):
            self._check_qubit(inst.qubit)
            self._check_clbit(inst.clbit)
        elif isinstance(inst, Reset):
            self._check_qubit(inst.qubit)
        elif isinstance(inst, Conditional):
            if not isinstance(inst.inner, Gate):
                raise CircuitError("conditionals may only wrap a gate")
            if inst.value not in (0, 1):
                raise CircuitError("conditional value must be 0 or 1")
            self._check_clbit(inst.clbit)
            for t in inst.inner.targets:
                self._check_qubit(t)
        elif not isinstance(inst, Label):
            raise CircuitError(f"not an instruction: {inst!r}")
        self._instructions.append(inst)
        return self

    def append_standard_gate(self, name: str, targets: Sequence[int], matrix=None, params=(), tag=""):
        return self.append(make_gate(name, targets, matrix=matrix, params=params, tag=tag))

    def h(self, q):
        return self.append_standard_gate("H", [q])

    def x(self, q):
        return self.append_standard_gate("X", [q])

    def z(self, q):
        return self.append_standard_gate("Z", [q])

    def cnot(self, control, target):
        return self.append_standard_gate("CNOT", [control, target])

    def swap(self, a, b):
        return self.append_standard_gate("SWAP", [a, b])

    def u2q(self, matrix, a, b, params=(), tag=""):
        return self.append_standard_gate("U2q", [a, b], matrix=matrix, params=params, tag=tag)

    def measure(self, qubit, clbit):
        return self.append(Measure(int(qubit), int(clbit)))

    def reset(self, qubit):
        return self.append(Reset(int(qubit)))

    def c_if(self, clbit, value, name, targets, matrix=None):
        gate = make_gate(name, targets, matrix=matrix)
        return self.append(Conditional(int(clbit), int(value), gate))

    def label(self, text: str):
        return self.append(Label(text))

    def validate(self) -> None:
        """Static checks: every clbit is measured at most once and before it is read."""
        written: set[int] = set()
        for i, inst in enumerate(self._instructions):
            if isinstance(inst, Measure):
                if inst.clbit in written:
                    raise CircuitError(f"instruction {i}: clbit c{inst.clbit} written twice")
                written.add(inst.clbit)
            elif isinstance(inst, Conditional):
                if inst.clbit not in written:
                    raise CircuitError(f"instruction {i}: clbit c{inst.clbit} read before measurement")

    def clbit_last_use(self) -> dict[int, int]:
        last: dict[int, int] = {}
        for i, inst in enumerate(self._instructions):
            if isinstance(inst, (Measure, Conditional)):
                last[inst.clbit] = i
        return last

    def qubits_with_role(self, role: str) -> list[int]:
        return sorted(q for q, r in self.roles.items() if r == role)

    def dump(self) -> str:
        lines = [f"circuit qubits={self.n_qubits} clbits={self.n_clbits}"]
        for role in ROLES:
            qs = self.qubits_with_role(role)
            if qs:
                lines.append(f"{role}: " + " ".join(f"q{q}" for q in qs))
        for i, inst in enumerate(self._instructions):
            lines.append(f"{i:04d} {inst.text()}")
        return "\n".join(lines) + "\n"
