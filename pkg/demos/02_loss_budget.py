"""Solving the per-interface loss budget from treatment-resolved tangents.

Three surface treatments (fresh HF strip, HF plus 90 days of oxide
regrowth, untreated) give three fitted surface tangents.  Because the
oxide thickness differs between them while the other interfaces do not,
the system can be inverted for the intrinsic oxide, hydrocarbon, and
combined metal-substrate/substrate-air tangents.
"""

from qlb.budget import ParticipationConfig, solve_budget
from qlb.uncert import UValue

cfg = ParticipationConfig()  # shipped participation ratios, t0 = 3 nm

result = solve_budget(
    tan_hf=UValue(1.77e-3, 0.08e-3),
    tan_hf90=UValue(2.51e-3, 0.29e-3),
    tan_untreated=UValue(3.19e-3, 0.22e-3),
    t_hf=UValue(1.90, 0.05),
    t_hf90=UValue(3.11, 0.09),
    t_untreated_ox=UValue(2.69, 0.07),
    t_hc=UValue(0.52),
    cfg=cfg,
)

print(f"tan(oxide)       = {result.tan_alox.value:.3e} +- {result.tan_alox.sigma:.1e}")
print(f"tan(MS+SA)       = {result.tan_ms_sa.value:.3e} +- {result.tan_ms_sa.sigma:.1e}")
print(f"tan(hydrocarbon) = {result.tan_hc.value:.3e} +- {result.tan_hc.sigma:.1e}")
print("\nuntreated-device loss budget:")
for channel, frac in result.fractions.items():
    print(f"  {channel:12s} {frac.value:5.1f} +- {frac.sigma:4.1f} %")
print(f"  (renormalization factor {result.renormalization:.4f})")
