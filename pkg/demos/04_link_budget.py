"""
How many pilots a satellite pass can afford
===========================================

The link delivers f * T * delta qubits per stationarity window.  Pilots come
out of that budget; the rest carry data.
"""

from pilotqkd import link, pilot
from pilotqkd.channel import orbit_windows

print("windows (s):", {o.name: t for o, t in orbit_windows().items()})

for row in link.meo_table(window_s=0.5, delta=5e-5, xi=5):
    print(f"{row.rep_rate_hz:>8.0e} Hz  raw={row.raw_qubits:>11,}  tx={row.transmittable:>7,}  "
          f"data={row.corrected_data:>7,}  D={row.redundancy_percent:.4f}%")

# a window too short for the requested string
try:
    link.budget_row(100e6, 0.5, 5e-5, 10)
except link.InfeasibleBudget as exc:
    print("infeasible:", exc)

# the pilot count grows roughly like xi * 2^xi
print([pilot.pilot_requirement(x) for x in range(1, 11)])
