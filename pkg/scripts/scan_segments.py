"""Segment counts along parameter lines: scale invariance for P_II and a P_III'(D6) scan.

Usage: python scripts/scan_segments.py
"""
import numpy as np

from painleve_stokes.saddle_detector import scan_parameter

print("P_II, c on i[0.2, 3]")
for r in scan_parameter("II", "c", np.linspace(0.2j, 3j, 15)):
    print(f"  c={r.value:.3g}  segments={r.count}  periods/2pi={[round(p.real / (2 * np.pi), 6) for p in r.periods]}")

print("P_II, c off the imaginary axis (no real periods expected)")
for r in scan_parameter("II", "c", [0.1 + 1j, 0.5 + 1j, 1 + 1j]):
    print(f"  c={r.value:.3g}  segments={r.count}  near-degenerate={r.near_degenerate}")

print("P_III'(D6), c0 on i[0.1, 0.9], c_inf = i")
for r in scan_parameter("III_D6", "c0", np.linspace(0.1j, 0.9j, 9), {"c_inf": 1j}):
    kinds = ",".join(r.kinds) if r.error is None else r.error
    print(f"  c0={r.value:.3g}  segments={r.count}  {kinds}")
