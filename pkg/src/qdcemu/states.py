"""Dense pure/mixed state backend.

Qubit index 0 is the least-significant bit of a basis-state index. Internally
a state is reshaped into a tensor with one axis per qubit, so qubit ``q`` of an
``n``-qubit register lives on axis ``n - 1 - q``.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

ATOL = 1e-10

MAX_PURE_QUBITS = 24
MAX_MIXED_QUBITS = 12


class StateError(ValueError):
    """Raised for bad qubit indices or non-physical operators."""


def _as_matrix(matrix, name: str) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise StateError(f"{name} must be a square matrix, got shape {m.shape}")
    dim = m.shape[0]
    k = dim.bit_length() - 1
    if dim < 2 or 2**k != dim:
        raise StateError(f"{name} dimension {dim} is not a power of two")
    return m


class UnitaryMatrix:
    """A k-qubit unitary; ``matrix`` uses the same LSB-first ordering as states."""

    def __init__(self, matrix, atol: float = ATOL):
        m = _as_matrix(matrix, "unitary")
        if not np.allclose(m.conj().T @ m, np.eye(m.shape[0]), rtol=0, atol=atol):
            raise StateError("matrix is not unitary")
        self.matrix = m
        self.k_qubits = m.shape[0].bit_length() - 1

    def dagger(self) -> "UnitaryMatrix":
        return UnitaryMatrix(self.matrix.conj().T)

    def __repr__(self):
        return f"UnitaryMatrix(k_qubits={self.k_qubits})"


class KrausChannel:
    """A trace-preserving k-qubit channel given by its Kraus operators."""

    def __init__(self, operators: Iterable, atol: float = ATOL):
        ops = [_as_matrix(k, "Kraus operator") for k in operators]
        if not ops:
            raise StateError("a channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        if any(k.shape != (dim, dim) for k in ops):
            raise StateError("Kraus operators have mismatched shapes")
        total = sum(k.conj().T @ k for k in ops)
        if not np.allclose(total, np.eye(dim), rtol=0, atol=atol):
            raise StateError("channel is not trace preserving")
        self.operators = ops
        self.k_qubits = dim.bit_length() - 1

    def __repr__(self):
        return f"KrausChannel(k_qubits={self.k_qubits}, n_ops={len(self.operators)})"


class PureState:
    def __init__(self, amplitudes, normalize: bool = False):
        vec = np.array(amplitudes, dtype=complex).reshape(-1)
        n = vec.size.bit_length() - 1
        if vec.size < 1 or 2**n != vec.size:
            raise StateError(f"amplitude vector length {vec.size} is not a power of two")
        if n > MAX_PURE_QUBITS:
            raise StateError(f"{n} qubits exceeds the dense statevector ceiling")
        if normalize:
            vec = vec / np.linalg.norm(vec)
        self.amplitudes = vec
        self.n_qubits = n

    @classmethod
    def zero(cls, n_qubits: int) -> "PureState":
        vec = np.zeros(2**n_qubits, dtype=complex)
        vec[0] = 1.0
        return cls(vec)

    @classmethod
    def from_label(cls, label: str) -> "PureState":
        """Product state from a ket label; the *rightmost* character is qubit 0.

        Characters: ``0 1 + -``.
        """
        single = {
            "0": np.array([1, 0], dtype=complex),
            "1": np.array([0, 1], dtype=complex),
            "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
            "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
        }
        vec = np.array([1], dtype=complex)
        for ch in label:
            if ch not in single:
                raise StateError(f"unknown label character {ch!r}")
            vec = np.kron(vec, single[ch])
        return cls(vec)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def to_density(self) -> "MixedState":
        return MixedState(np.outer(self.amplitudes, self.amplitudes.conj()))

    def copy(self) -> "PureState":
        return PureState(self.amplitudes.copy())

    def __repr__(self):
        return f"PureState(n_qubits={self.n_qubits})"


class MixedState:
    def __init__(self, rho):
        rho = np.array(rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise StateError(f"density matrix must be square, got {rho.shape}")
        n = rho.shape[0].bit_length() - 1
        if 2**n != rho.shape[0]:
            raise StateError(f"density matrix dimension {rho.shape[0]} is not a power of two")
        if n > MAX_MIXED_QUBITS:
            raise StateError(f"{n} qubits exceeds the dense density-matrix ceiling")
        self.rho = rho
        self.n_qubits = n

    @classmethod
    def zero(cls, n_qubits: int) -> "MixedState":
        return PureState.zero(n_qubits).to_density()

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "MixedState":
        d = 2**n_qubits
        return cls(np.eye(d, dtype=complex) / d)

    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))

    def purity(self) -> float:
        return float(np.real(np.vdot(self.rho, self.rho)))

    def validate(self, atol: float = 1e-9, psd_floor: float = -1e-8) -> None:
        """Full physicality check (Hermitian, unit trace, PSD). Cubic cost."""
        if np.max(np.abs(self.rho - self.rho.conj().T)) > atol:
            raise StateError("density matrix is not Hermitian")
        if abs(self.trace() - 1.0) > atol:
            raise StateError(f"density matrix trace is {self.trace()}")
        if np.linalg.eigvalsh(self.rho).min() < psd_floor:
            raise StateError("density matrix is not positive semidefinite")

    def copy(self) -> "MixedState":
        return MixedState(self.rho.copy())

    def __repr__(self):
        return f"MixedState(n_qubits={self.n_qubits})"


def _check_targets(n_qubits: int, targets: Sequence[int]) -> list[int]:
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise StateError(f"duplicate target qubits {targets}")
    for t in targets:
        if not 0 <= t < n_qubits:
            raise StateError(f"qubit {t} out of range for {n_qubits} qubits")
    return targets


def _apply_on_axes(tensor: np.ndarray, op: np.ndarray, axes: list[int]) -> np.ndarray:
    """Contract a (2^k x 2^k) operator into ``tensor`` along ``axes``.

    ``axes[j]`` holds operator qubit j (LSB first).
    """
    k = len(axes)
    # operator tensor axes: (out_{k-1} .. out_0, in_{k-1} .. in_0)
    op_t = op.reshape((2,) * (2 * k))
    in_axes = [2 * k - 1 - j for j in range(k)]
    out = np.tensordot(op_t, tensor, axes=(in_axes, axes))
    # result leading axes are out_{k-1}..out_0; move them back to `axes`
    src = list(range(k))
    dst = [axes[k - 1 - i] for i in range(k)]
    return np.moveaxis(out, src, dst)


def _row_axes(n: int, targets: Sequence[int]) -> list[int]:
    return [n - 1 - t for t in targets]


def _apply_matrix_pure(vec: np.ndarray, n: int, op: np.ndarray, targets) -> np.ndarray:
    t = vec.reshape((2,) * n)
    return _apply_on_axes(t, op, _row_axes(n, targets)).reshape(-1)


def _conjugate_mixed(rho: np.ndarray, n: int, op: np.ndarray, targets) -> np.ndarray:
    """Return op rho op^dagger with op embedded on ``targets``."""
    t = rho.reshape((2,) * (2 * n))
    rows = _row_axes(n, targets)
    t = _apply_on_axes(t, op, rows)
    t = _apply_on_axes(t, op.conj(), [a + n for a in rows])
    return t.reshape(2**n, 2**n)


def apply_unitary(state, u: UnitaryMatrix, targets: Sequence[int]):
    """Apply ``u`` to ``targets``; targets[0] is the unitary's qubit 0."""
    if not isinstance(u, UnitaryMatrix):
        u = UnitaryMatrix(u)
    targets = _check_targets(state.n_qubits, targets)
    if u.k_qubits != len(targets):
        raise StateError(f"{u.k_qubits}-qubit unitary applied to {len(targets)} targets")
    if isinstance(state, PureState):
        return PureState(_apply_matrix_pure(state.amplitudes, state.n_qubits, u.matrix, targets))
    if isinstance(state, MixedState):
        return MixedState(_conjugate_mixed(state.rho, state.n_qubits, u.matrix, targets))
    raise TypeError(f"unsupported state type {type(state).__name__}")


def apply_kraus(state: MixedState, ch: KrausChannel, targets: Sequence[int]) -> MixedState:
    targets = _check_targets(state.n_qubits, targets)
    if ch.k_qubits != len(targets):
        raise StateError(f"{ch.k_qubits}-qubit channel applied to {len(targets)} targets")
    n = state.n_qubits
    out = np.zeros_like(state.rho)
    for k in ch.operators:
        out += _conjugate_mixed(state.rho, n, k, targets)
    return MixedState(out)


def _projector(outcome: int) -> np.ndarray:
    p = np.zeros((2, 2), dtype=complex)
    p[outcome, outcome] = 1.0
    return p


def outcome_probabilities(state, qubit: int) -> tuple[float, float]:
    """Born probabilities (p0, p1) for a Z measurement of ``qubit``."""
    (qubit,) = _check_targets(state.n_qubits, [qubit])
    n = state.n_qubits
    axis = n - 1 - qubit
    if isinstance(state, PureState):
        probs = np.abs(state.amplitudes.reshape((2,) * n)) ** 2
        p1 = float(np.take(probs, 1, axis=axis).sum())
        p0 = float(np.take(probs, 0, axis=axis).sum())
    else:
        diag = np.real(np.diagonal(state.rho)).reshape((2,) * n)
        p0 = float(np.take(diag, 0, axis=axis).sum())
        p1 = float(np.take(diag, 1, axis=axis).sum())
    return p0, p1


def project(state: PureState, qubit: int, outcome: int) -> PureState:
    """Collapse ``qubit`` onto ``outcome`` and renormalize."""
    p = outcome_probabilities(state, qubit)[outcome]
    if p <= 0.0:
        raise StateError(f"outcome {outcome} on qubit {qubit} has zero probability")
    vec = _apply_matrix_pure(state.amplitudes, state.n_qubits, _projector(outcome), [qubit])
    return PureState(vec / np.sqrt(p))


def measure_sampled(state: PureState, qubit: int, rng) -> tuple[int, PureState]:
    """Sample a Z measurement of ``qubit``.

    ``rng`` is a :class:`numpy.random.Generator` or a float in [0, 1); outcome 1
    is drawn when the uniform variate is at least p0.
    """
    p0, _ = outcome_probabilities(state, qubit)
    u = float(rng) if isinstance(rng, (float, int)) else float(rng.random())
    outcome = 0 if u < p0 else 1
    return outcome, project(state, qubit, outcome)


def measurement_branches(state: MixedState, qubit: int, atol: float = 1e-14):
    """All outcomes of a Z measurement: ``[(p, post_state, bit), ...]``.

    Branches with probability below ``atol`` are dropped.
    """
    branches = []
    for bit, p in enumerate(outcome_probabilities(state, qubit)):
        if p <= atol:
            continue
        rho = _conjugate_mixed(state.rho, state.n_qubits, _projector(bit), [qubit])
        branches.append((p, MixedState(rho / p), bit))
    return branches


_X = np.array([[0, 1], [1, 0]], dtype=complex)
_LOWER = np.array([[0, 1], [0, 0]], dtype=complex)


def reset_qubit(state, qubit: int):
    """Measure-and-flip reset to |0>.

    For mixed states this is the channel P0 rho P0 + X P1 rho P1 X. Pure states
    are accepted only when the result stays pure (qubit already in a product
    state with the rest), otherwise use the trajectory backend.
    """
    (qubit,) = _check_targets(state.n_qubits, [qubit])
    if isinstance(state, MixedState):
        return apply_kraus(state, KrausChannel([_projector(0), _LOWER]), [qubit])
    raise TypeError("reset_qubit expects a MixedState; sample pure-state resets instead")


def partial_trace(state: MixedState, keep: Iterable[int]) -> MixedState:
    """Reduced state on ``keep``; the output orders kept qubits as given."""
    keep = _check_targets(state.n_qubits, list(keep))
    if not keep:
        raise StateError("keep set must be nonempty")
    n = state.n_qubits
    t = state.rho.reshape((2,) * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    rows = list(letters[:n])
    cols = list(letters[n : 2 * n])
    for q in range(n):
        if q not in keep:
            cols[n - 1 - q] = rows[n - 1 - q]
    # output: kept qubit keep[j] becomes new qubit j, i.e. axis m-1-j
    m = len(keep)
    out_rows = [rows[n - 1 - keep[m - 1 - i]] for i in range(m)]
    out_cols = [cols[n - 1 - keep[m - 1 - i]] for i in range(m)]
    spec = "".join(rows) + "".join(cols) + "->" + "".join(out_rows) + "".join(out_cols)
    reduced = np.einsum(spec, t)
    return MixedState(reduced.reshape(2**m, 2**m))


def reduced_pure_fidelity(vec: np.ndarray, n: int, keep: Sequence[int], target: PureState) -> float:
    """<psi|Tr_rest(|v><v|)|psi> without forming the density matrix."""
    keep = _check_targets(n, keep)
    m = len(keep)
    if target.n_qubits != m:
        raise StateError("target dimension does not match kept qubits")
    t = vec.reshape((2,) * n)
    keep_axes = [n - 1 - keep[m - 1 - i] for i in range(m)]
    rest_axes = [a for a in range(n) if a not in keep_axes]
    mat = np.transpose(t, keep_axes + rest_axes).reshape(2**m, -1)
    overlap = target.amplitudes.conj() @ mat
    return float(np.real(np.vdot(overlap, overlap)))


def fidelity_with_pure(rho: MixedState, target: PureState, atol: float = ATOL) -> float:
    """<psi|rho|psi>, clamped to [0, 1] after a tolerance check."""
    if rho.n_qubits != target.n_qubits:
        raise StateError(
            f"dimension mismatch: {rho.n_qubits}-qubit state vs {target.n_qubits}-qubit target"
        )
    psi = target.amplitudes
    f = complex(psi.conj() @ rho.rho @ psi)
    if abs(f.imag) > atol or f.real < -atol or f.real > 1 + atol:
        raise StateError(f"fidelity {f} is not a probability")
    return min(max(f.real, 0.0), 1.0)


def tensor(*states: MixedState) -> MixedState:
    """Tensor product; the first argument occupies the lowest qubit indices."""
    rho = np.array([[1.0]], dtype=complex)
    for s in states:
        rho = np.kron(s.rho, rho)
    return MixedState(rho)
