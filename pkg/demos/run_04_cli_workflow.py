"""
End-to-end experiment through the command line
==============================================

Equivalent shell session::

    armtune simulate --out out/sim
    armtune tune --seed 3 --out out/tune
    armtune compare --gains out/tune/best_gains --out out/compare
"""

from pathlib import Path

from armtune.cli import main

out = Path("out")
config = out / "experiment.ini"
out.mkdir(exist_ok=True)
config.write_text(
    "[sim]\n"
    "stride = 10          # keep every 10th sample in the CSV\n"
    "[ga]\n"
    "seed = 3\n"
    "workers = 2\n"
)

print("simulate ->", main(["simulate", "--config", str(config), "--out", str(out / "sim")]))
print((out / "sim" / "metrics.txt").read_text())

print("tune ->", main(["tune", "--config", str(config), "--out", str(out / "tune")]))
print((out / "tune" / "tune_summary.txt").read_text())

code = main(["compare", "--config", str(config), "--gains", str(out / "tune" / "best_gains"),
             "--out", str(out / "compare")])
print("compare ->", code, "(0 = tuned gains beat the baseline on ISE)")
