"""
The monotone v-sequence
=======================

Starting from ``v_1 = eps * u`` on a space-time window, each step builds a
candidate from a supersolution ``w`` and a weight ``beta`` chosen to satisfy
two feasibility inequalities, then takes a pointwise maximum.  The run below
reports the sign diagnostic of every accepted step and whether ``v`` stayed
pinned on the window.
"""
import numpy as np

from pclab import BoxDomain, SourceSpec, TimeGrid, basis_field
from pclab.claims import VSequenceProblem, v_sequence_run

dom = BoxDomain(1, np.pi, 127)
problem = VSequenceProblem(basis_field(dom, 1, mode_cap=127), SourceSpec.constant(1.0, bounds=(1.0, 1.0)),
                           TimeGrid(64.0, 400), omega=((np.pi / 4, 3 * np.pi / 4),), eps=0.5)
print("time window:", problem.window)

rep = v_sequence_run(problem, iterations=6)
for s in rep.states[1:]:
    print(f"k={s.k}: |Psi(T)| = {s.psi_T_norm:.3e}, sign {s.sign:+.2e}, increment {s.increment:.3e}, "
          f"pinned {s.pinned}")
print("largest monotonicity violation:", rep.max_monotone_violation)
print("final parallel residual:", rep.final_residual)

# Starting from eps * u everywhere at eps = 0.5 leaves no feasible weight.
stuck = v_sequence_run(problem, iterations=2, v1_mode="everywhere")
print("everywhere start:", stuck.accepted, "steps; stopped by", stuck.stopped_by)
