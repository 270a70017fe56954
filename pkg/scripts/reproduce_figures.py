"""Write graph JSON and SVG for the u-plane figures and the P_I SL example.

Usage: python scripts/reproduce_figures.py [outdir]
"""
import pathlib
import sys

from painleve_stokes.cli_io import main

out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "figures")
out.mkdir(parents=True, exist_ok=True)
runs = {
    "p2_uplane": ["graph", "--eq", "P_II", "--param", "c=0+1i", "--uplane"],
    "d7_uplane": ["graph", "--eq", "P_III_D7", "--param", "c=0+1i", "--uplane"],
    "d6_vplane": ["graph", "--eq", "P_III_D6", "--param", "c0=0+0.5i", "--param", "c_inf=0+1i"],
    "p1_sl_t-6": ["graph", "--eq", "P_I", "--sl", "--t", "-6"],
    "p2_sl_mid": ["graph", "--eq", "P_II", "--param", "c=0+1i", "--sl", "--t", "0.557339277576+1.13372879114i"],
}
for name, argv in runs.items():
    code = main(argv + ["--out", str(out / f"{name}.json"), "--svg", str(out / f"{name}.svg")])
    print(f"{name}: exit {code}")
