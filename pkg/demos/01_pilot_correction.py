"""
Undoing a channel rotation with pilot qubits
============================================

A data qubit crosses a channel that applies an unknown phase rotation.  A
pilot qubit that crossed the same channel carries the angle, and one
interaction with it either undoes the rotation or doubles it.
"""

import numpy as np

from pilotqkd import pilot
from pilotqkd import quantum as qc
from pilotqkd.channel import rotate

rng = np.random.default_rng(7)

# the channel gate is diagonal: diag(e^{i theta/2}, e^{-i theta/2})
theta = 1.3
print(np.round(qc.gate_u_theta(theta), 4))

# damage |+> and try a single correction
psi = qc.plus_state()
damaged = rotate(psi, theta, [0])
print("fidelity after channel:", round(qc.fidelity(damaged, psi), 4))

ok, out = pilot.correction_attempt(damaged, 0, theta, rng)
print("attempt succeeded:", ok)
target = psi if ok else rotate(psi, 2 * theta, [0])
print("fidelity with expected branch:", round(qc.fidelity(out, target), 12))

# the 'correct' outcome has Born probability one half, whatever theta and psi are
print("p(success) =", pilot.attempt_success_probability(damaged, 0, theta))

# a string of pilots with doubling angles keeps retrying
chain = pilot.PilotString(theta, 5)
print("pilot angles:", [round(a, 3) for a in chain.angles])
res = pilot.correction_chain(damaged, 0, chain, rng)
print(res.success, res.attempts_used, res.transcript)

# Monte Carlo success rate against 1 - 2^-xi
for xi in range(1, 7):
    wins = sum(pilot.correction_chain(damaged, 0, pilot.PilotString(theta, xi), rng).success
               for _ in range(4000))
    print(f"xi={xi}: simulated {wins / 4000:.4f}  exact {1 - 2.0**-xi:.4f}")

# protecting xi attempts costs r pilots
for b in pilot.budget_table(range(2, 7)):
    print(b.xi, b.r, b.p_success)
print("r(10) =", pilot.pilot_requirement(10))
