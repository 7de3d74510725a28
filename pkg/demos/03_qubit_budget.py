"""Predicting a transmon's surface-loss-limited Q and budgeting the barrier.

The measured interface tangents, rescaled to single-photon powers, are
combined with the qubit's simulated surface participations.  Comparing
the prediction with the measured Q isolates the loss of the junction
barrier itself through its share of the circuit's electric energy.
"""

from qlb.qubit import (
    JunctionDims,
    QubitGeometry,
    TangentSet,
    junction_capacitance,
    junction_energy_fraction,
    predict_q,
    solve_barrier_tangent,
    three_way_budget,
    predict_inv_q,
)
from qlb.uncert import UValue

geom = QubitGeometry(
    p_capacitor=0.983e-4,
    p_ms_leads=0.160e-4,
    p_ma_leads=0.013e-4,
    c_shunt=96.0,
    junction=JunctionDims(UValue(200, 50), UValue(200, 50), UValue(2.0, 0.5)),
)
tangents = TangentSet(
    tan_capacitor=UValue(7.8e-4, 0.4e-4),
    tan_alox_leads=UValue(2.99e-3, 0.23e-3),
    tan_ms_leads=UValue(10.4e-4, 0.1e-4),
    regime="single-photon",
)
q_measured = UValue(9.74e6, 0.33e6)

q = predict_q(geom, tangents)
print(f"surface-limited Q = {q.value:.3e} +- {q.sigma:.1e}")

c_jj = junction_capacitance(geom.junction)
frac = junction_energy_fraction(c_jj, geom.c_shunt)
print(f"junction capacitance = {c_jj.value:.2f} +- {c_jj.sigma:.2f} fF "
      f"({100 * frac.value:.2f}% of circuit energy)")

solve = solve_barrier_tangent(q_measured, predict_inv_q(geom, tangents),
                              c_jj, geom.c_shunt)
print(f"barrier tangent = {solve.tan_barrier.value:.2e} "
      f"+- {solve.tan_barrier.sigma:.1e}")
print(f"barrier-limited Q = {solve.limiting_q.value:.2e}")

print("\nthree-way loss budget of the measured qubit:")
for channel, v in three_way_budget(geom, tangents, q_measured, c_jj).items():
    print(f"  {channel:15s} {v.value:5.1f} +- {v.sigma:4.1f} %")
