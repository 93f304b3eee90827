"""Process fidelity of the remote CNOT from its Choi state."""

from qdcemu.config import ExperimentConfig
from qdcemu.harness import run_tomography
from qdcemu.noise import NoiseParams

for hops in (1, 2, 3):
    rep = run_tomography(ExperimentConfig("tomography", hops=hops))
    print(f"{hops} hop(s): process fidelity {rep.process_fidelity:.6f}, "
          f"mean basis-state fidelity {rep.average_basis_fidelity:.6f}")

rep = run_tomography(ExperimentConfig("tomography", noise=NoiseParams.noiseless()))
print("noiseless:", rep.process_fidelity)
