"""How many Bell links does each topology spend to build a GHZ state?

The root QPU performs one remote CNOT per other QPU, and every remote CNOT
consumes one link per hop of its shortest path.  Counting hops directly
should agree with the closed forms.
"""

from qdcemu.topology import counted_link_cost, link_cost_formula, make_topology

print(f"{'n':>3} {'line':>6} {'ring':>6} {'star':>6}")
for n in range(3, 11):
    row = [counted_link_cost(make_topology(kind, n)) for kind in ("line", "ring", "star")]
    assert row == [link_cost_formula(kind, n) for kind in ("line", "ring", "star")]
    print(f"{n:>3} {row[0]:>6} {row[1]:>6} {row[2]:>6}")

# The line grows quadratically while the star grows linearly.
