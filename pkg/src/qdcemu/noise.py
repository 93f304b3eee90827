"""Collisional noise: exchange unitaries, calibrated fiber loss, reset-per-collision."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .circuit import ENVIRONMENT, Circuit, CircuitError
from .states import KrausChannel, UnitaryMatrix

HALF_PI = math.pi / 2
_EPS = 1e-12


class NoiseError(ValueError):
    pass


class CollisionKind(enum.Enum):
    TRANSDUCTION = "transduction"
    FIBER = "fiber"
    IDLE = "idle"


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not (-_EPS <= theta <= HALF_PI + _EPS) or math.isnan(theta):
        raise NoiseError(f"collision angle {theta} outside [0, pi/2]")
    return min(max(theta, 0.0), HALF_PI)


def exchange_unitary(kappa: float, delta_t: float = 1.0) -> UnitaryMatrix:
    """exp(-i H dt) for the flip-flop coupling H = kappa (s+ s- + s- s+).

    Qubit 0 of the returned matrix is the system (carrier), qubit 1 the
    environment. The |00> and |11> sectors are untouched; on the one-excitation
    sector the evolution is cos(theta) I - i sin(theta) X with theta = kappa*dt.
    """
    theta = _check_theta(kappa * delta_t)
    c, s = math.cos(theta), math.sin(theta)
    u = np.eye(4, dtype=complex)
    u[1, 1] = u[2, 2] = c
    u[1, 2] = u[2, 1] = -1j * s
    return UnitaryMatrix(u)


def effective_damping_channel(theta: float) -> KrausChannel:
    """Single-collision channel on the carrier after tracing out a fresh |0> env.

    Amplitude damping with gamma = sin(theta)^2.
    """
    theta = _check_theta(theta)
    k0 = np.diag([1.0, math.cos(theta)]).astype(complex)
    k1 = np.zeros((2, 2), dtype=complex)
    k1[0, 1] = math.sin(theta)
    return KrausChannel([k0, k1])


def theta_from_attenuation(alpha_per_km: float, length_km: float, n_collisions: int) -> float:
    """Per-collision angle so that ``n_collisions`` collisions lose 1 - exp(-alpha L)."""
    if n_collisions < 1:
        raise NoiseError("need at least one collision to spread the loss over")
    if alpha_per_km < 0 or length_km < 0:
        raise NoiseError("attenuation and length must be non-negative")
    gamma_c = -math.expm1(-alpha_per_km * length_km / n_collisions)
    return math.asin(math.sqrt(gamma_c))


def damping_gamma(theta: float) -> float:
    return math.sin(theta) ** 2


@dataclass
class NoiseParams:
    """Collisional-model configuration.

    ``kappa_F=None`` means the fiber angle is calibrated from
    ``attenuation_per_km`` and ``fiber_length_km``; an explicit value overrides
    the calibration.
    """

    kappa_T: float = 0.5
    kappa_F: Optional[float] = None
    delta_t: float = 1.0
    n_coll_T: int = 1
    n_coll_F: int = 4
    fiber_length_km: float = 0.01
    attenuation_per_km: float = 0.0392
    idle_damping_theta: float = 0.0

    def __post_init__(self):
        if self.kappa_T < 0 or (self.kappa_F is not None and self.kappa_F < 0):
            raise NoiseError("couplings must be non-negative")
        if self.delta_t < 0:
            raise NoiseError("delta_t must be non-negative")
        _check_theta(self.kappa_T * self.delta_t)
        if self.kappa_F is not None:
            _check_theta(self.kappa_F * self.delta_t)
        _check_theta(self.idle_damping_theta)
        if self.n_coll_T < 0 or self.n_coll_F < 0:
            raise NoiseError("collision counts must be non-negative")
        if self.attenuation_per_km < 0 or self.fiber_length_km < 0:
            raise NoiseError("attenuation and fiber length must be non-negative")

    @classmethod
    def noiseless(cls) -> "NoiseParams":
        return cls(kappa_T=0.0, kappa_F=0.0)

    @property
    def theta_T(self) -> float:
        return self.kappa_T * self.delta_t

    @property
    def theta_F(self) -> float:
        if self.kappa_F is not None:
            return self.kappa_F * self.delta_t
        if self.n_coll_F == 0:
            return 0.0
        return theta_from_attenuation(self.attenuation_per_km, self.fiber_length_km, self.n_coll_F)

    def traversal_survival(self) -> float:
        """Probability that an excitation survives one full link traversal (1 - gamma)."""
        return math.cos(self.theta_T) ** (4 * self.n_coll_T) * math.cos(self.theta_F) ** (2 * self.n_coll_F)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseParams":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise NoiseError(f"unknown noise field(s): {', '.join(sorted(unknown))}")
        return cls(**data)


def append_collision(c: Circuit, carrier: int, env: int, theta: float, kind: CollisionKind) -> Circuit:
    """One collision: exchange unitary on (carrier, env), then reset env."""
    u = exchange_unitary(theta, 1.0)
    c.u2q(u.matrix, carrier, env, params=(theta,), tag=kind.value)
    c.reset(env)
    return c


def insert_channel_traversal(c: Circuit, carrier: int, env: int, params: NoiseParams) -> Circuit:
    """Sender transducer, fiber, receiver transducer, each as reset collisions."""
    if carrier == env:
        raise CircuitError("carrier and environment qubit must differ")
    if c.role(env) != ENVIRONMENT:
        raise CircuitError(f"qubit {env} does not have the environment role")
    if c.role(carrier) == ENVIRONMENT:
        raise CircuitError(f"carrier qubit {carrier} is an environment qubit")
    for _ in range(params.n_coll_T):
        append_collision(c, carrier, env, params.theta_T, CollisionKind.TRANSDUCTION)
    theta_f = params.theta_F
    for _ in range(params.n_coll_F):
        append_collision(c, carrier, env, theta_f, CollisionKind.FIBER)
    for _ in range(params.n_coll_T):
        append_collision(c, carrier, env, params.theta_T, CollisionKind.TRANSDUCTION)
    return c
