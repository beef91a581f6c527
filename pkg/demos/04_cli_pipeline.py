"""The batch front end on a bundled configuration.

Equivalent shell session::

    thermospec temperature --config bundled:golden_mean --out run
    thermospec spectrum    --config bundled:golden_mean --out run
    thermospec verify      --config bundled:golden_mean --out run

Every file written carries the config hash, seed and tolerances, and a
second run with the same config reproduces the bytes exactly.
"""
import json
import sys
import tempfile
from pathlib import Path

from thermospec.cli import main, read_csv

out = Path(tempfile.mkdtemp(prefix="thermospec-demo-"))
for command in ("temperature", "spectrum", "verify"):
    code = main([command, "--config", "bundled:golden_mean", "--out", str(out)])
    print(f"[{command} exited with {code}]\n")

rows = read_csv(out / "temperature.csv")
print("q = 0 row of temperature.csv:", next(r for r in rows if float(r["q"]) == 0.0))
head = [line for line in (out / "temperature.csv").read_text().splitlines()
        if line.startswith("#")]
print("metadata header:\n  " + "\n  ".join(head))

verdict = json.loads((out / "verify.json").read_text())
print("\nverify.json overall:", verdict["overall"])
print(f"outputs left in {out}")
sys.exit(0 if verdict["overall"] == "PASS" else 1)
