"""Remote CNOT across a chain of QPUs, and how its fidelity falls with distance."""

from qdcemu.config import ExperimentConfig
from qdcemu.harness import ideal_cnot_output, rcnot_sweep_circuit, run_rcnot_sweep
from qdcemu.execute import execute_exact
from qdcemu.noise import NoiseParams
from qdcemu.states import fidelity_with_pure

# Without noise the protocol reproduces a local CNOT on every input.
for label in ("00", "01", "10", "11", "+0"):
    c, keep = rcnot_sweep_circuit(2, label, NoiseParams.noiseless())
    f = fidelity_with_pure(execute_exact(c).merged(keep), ideal_cnot_output(label))
    print(f"noiseless, 2 hops, input {label}: fidelity {f:.12f}")

# With the default couplings, each extra hop adds another lossy link.
results = run_rcnot_sweep(ExperimentConfig("rcnot_sweep"))
print()
print(f"{'hops':>4} {'input':>6} {'fidelity':>10}")
for r in results:
    print(f"{r.hops:>4} {r.input:>6} {r.fidelity:>10.6f}")

# The circuit itself can be inspected as text.
c, _ = rcnot_sweep_circuit(1, "10", NoiseParams())
print()
print(c.dump())
