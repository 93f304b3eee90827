"""GHZ fidelity across topologies of four QPUs.

Both backends are used here.  The exact one tracks every measurement branch,
the trajectory one samples them with a seeded generator.
"""

from qdcemu.config import ExperimentConfig
from qdcemu.execute import execute_exact, execute_trajectories
from qdcemu.ghz import compile_ghz, ghz_state
from qdcemu.harness import run_ghz
from qdcemu.noise import NoiseParams
from qdcemu.states import fidelity_with_pure
from qdcemu.topology import make_star

for r in run_ghz(ExperimentConfig("ghz", n_qpus=4)):
    print(f"{r.kind:>5}: {r.hops} links, fidelity {r.fidelity:.6f}")

# Turning on idle damping penalises topologies that keep qubits waiting longer.
print()
for r in run_ghz(ExperimentConfig("ghz", n_qpus=4, noise=NoiseParams(idle_damping_theta=0.1))):
    print(f"{r.kind:>5} with idle noise: fidelity {r.fidelity:.6f}")

# Cross-check the star with sampled trajectories.
star = make_star(4)
plan, circuit = compile_ghz(star, NoiseParams())
keep = star.processing_qubits()
exact = fidelity_with_pure(execute_exact(circuit).merged(keep), ghz_state(4))
sampled = execute_trajectories(circuit, 2000, seed=7, keep=keep, target=ghz_state(4))
print()
print(f"star exact {exact:.4f}, trajectories {sampled.mean:.4f} +/- {sampled.stderr:.4f}")
