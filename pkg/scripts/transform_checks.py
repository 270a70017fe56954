"""Build top-order transforms and print their identity checks.

Usage: python scripts/transform_checks.py
"""
from painleve_stokes.painleve_catalog import PainleveInstance, PainleveTag
from painleve_stokes.transform_builder import build_transform

runs = [
    ("P_II c=i -> self", PainleveInstance(PainleveTag.II, {"c": 1j}), {}),
    ("P_III'(D7) c=i -> self", PainleveInstance(PainleveTag.III_D7, {"c": 1j}), {}),
    ("P_III'(D7) c=i -> c=1.1i", PainleveInstance(PainleveTag.III_D7, {"c": 1j}),
     {"target_c": 1.1j, "check_k": False}),
    ("P_III'(D6) -> P_II", PainleveInstance(PainleveTag.III_D6, {"c0": 0.5j, "c_inf": 1j}), {"src_index": 1}),
    ("P_III'(D6) loop -> P_III'(D7)", PainleveInstance(PainleveTag.III_D6, {"c0": 0.5j, "c_inf": 1j}),
     {"src_index": 3}),
    ("P_II c=2i -> rotated segment", PainleveInstance(PainleveTag.II, {"c": 2j}), {"tgt_index": 1}),
]
for name, inst, kw in runs:
    top = build_transform(inst, **kw)
    print(name, f"c={top.c:.6g}")
    for k, v in top.checks().items():
        print(f"  {k:30s} {v:.3e}")
