"""A single collision between a carrier qubit and a fresh environment qubit.

Tracing out the environment after the exchange unitary leaves amplitude
damping with gamma = sin^2(kappa * dt).
"""

import numpy as np

from qdcemu.noise import NoiseParams, effective_damping_channel, exchange_unitary, theta_from_attenuation
from qdcemu.states import PureState, apply_kraus, apply_unitary, partial_trace

theta = 0.5
u = exchange_unitary(theta)
print("exchange unitary at theta = 0.5:")
print(np.round(u.matrix, 4))

# carrier in |1> on qubit 0, environment in |0> on qubit 1
joint = PureState.from_label("01")
after = apply_unitary(joint, u, [0, 1]).to_density()
carrier = partial_trace(after, [0])
print("excited population after one collision:", carrier.rho[1, 1].real)
print("cos^2(theta)                          :", np.cos(theta) ** 2)

same = apply_kraus(PureState.from_label("1").to_density(), effective_damping_channel(theta), [0])
print("Kraus channel agrees:", np.allclose(same.rho, carrier.rho))

# Fiber collisions are calibrated so the total loss matches exp(-alpha L),
# no matter how finely the fiber is sliced.
for m in (1, 2, 4, 8):
    th = theta_from_attenuation(0.0392, 0.01, m)
    print(f"n_coll_F = {m}: theta = {th:.6f}, total damping = {1 - np.cos(th) ** (2 * m):.6e}")

p = NoiseParams()
print("survival of |1> across one default link:", p.traversal_survival())
