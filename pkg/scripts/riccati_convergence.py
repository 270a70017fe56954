"""Richardson slopes of the truncated Riccati residual against the predicted order.

Usage: python scripts/riccati_convergence.py
"""
from painleve_stokes.painleve_catalog import PainleveInstance, PainleveTag, lambda0_candidates
from painleve_stokes.wkb_riccati import GradedPotential, richardson_slope, wkb_pair

inst = PainleveInstance(PainleveTag.II, {"c": 1j})
t = 0.7 + 0.3j
cases = {
    "airy": (GradedPotential.airy(), [0.9 + 0.3j, 1.4 - 0.5j]),
    "weber c=i": (GradedPotential.weber(1j), [2.5 + 0.5j, 3 - 1j]),
    "Q_II0": (GradedPotential.from_instance(inst, t, lambda0_candidates(inst, t)[0]), [2 + 1j, 2.5 - 0.5j]),
}
for name, (pot, xs) in cases.items():
    s, _ = wkb_pair(pot, 8)
    print(name)
    for N in range(1, 8):
        rep = richardson_slope(pot, s, N, xs)
        print(f"  N={N}  slope={rep.slope:+.3f}  predicted={rep.predicted:+.1f}  {'ok' if rep.passed else 'off'}")
