#!/usr/bin/env python3
"""End-to-end checks of the varkahler CLI against the bundled example configs.

Usage: check_cli.py <path-to-varkahler-binary> <repo-root>
"""
import csv
import json
import math
import subprocess
import sys
import tempfile
from pathlib import Path


def run(binary, *args, expect=0):
    r = subprocess.run([str(binary), *args], capture_output=True, text=True)
    if r.returncode != expect:
        raise SystemExit(
            f"FAIL: {' '.join(args)} exited {r.returncode}, expected {expect}\n{r.stderr}"
        )
    return r


def main():
    binary = Path(sys.argv[1]).resolve()
    root = Path(sys.argv[2]).resolve()
    tmp = Path(tempfile.mkdtemp(prefix="vkcli-"))

    # fig3_panel_d: trajectory must match the exact orbit (cos t, -sin t)
    out_a = tmp / "a"
    out_a.mkdir()
    run(binary, "evolve", "--config", str(root / "examples/fig3_panel_d.toml"),
        "--out", str(out_a))
    worst = 0.0
    with open(out_a / "trajectory.csv") as f:
        for row in csv.reader(f):
            if row[0].startswith("#"):
                continue
            t, x1, x2 = float(row[0]), float(row[1]), float(row[2])
            worst = max(worst, abs(x1 - math.cos(t)), abs(x2 + math.sin(t)))
    assert worst < 1e-6, f"trajectory deviates from exact orbit by {worst:.3e}"

    # determinism: identical config -> byte-identical trajectory.csv
    out_a2 = tmp / "a2"
    out_a2.mkdir()
    run(binary, "evolve", "--config", str(root / "examples/fig3_panel_d.toml"),
        "--out", str(out_a2))
    assert (out_a / "trajectory.csv").read_bytes() == (out_a2 / "trajectory.csv").read_bytes(), \
        "trajectory.csv is not deterministic"

    # free_boson_spectrum: eigenfrequencies {omega0, 2 omega0}
    out_b = tmp / "b"
    out_b.mkdir()
    run(binary, "spectrum", "--config", str(root / "examples/free_boson_spectrum.toml"),
        "--out", str(out_b))
    spec = json.loads((out_b / "spectrum.json").read_text())
    freqs = spec["frequencies"]
    assert len(freqs) == 2, f"expected 2 positive frequencies, got {freqs}"
    assert abs(freqs[0] - 1.3) < 1e-9 and abs(freqs[1] - 2.6) < 1e-9, f"bad frequencies {freqs}"
    meta = json.loads((out_b / "meta.json").read_text())
    assert "wall_time_s" in meta and "tolerances" in meta and "version" in meta

    # exit-code contract
    bad = tmp / "bad.toml"
    bad.write_text('[family]\npreset = "bloch"\nnope = 1\n')
    run(binary, "evolve", "--config", str(bad), "--out", str(tmp), expect=2)
    empty_task = tmp / "empty.toml"
    empty_task.write_text(
        '[family]\npreset = "bloch"\n[hamiltonian]\npauli = [0,0,0,1]\n[task]\n')
    run(binary, "evolve", "--config", str(empty_task), "--out", str(tmp), expect=2)
    run(binary, "verify", "no-such-suite", expect=2)
    nonstat = tmp / "nonstat.toml"
    nonstat.write_text(
        '[family]\npreset = "bloch"\nx0 = [0.4, 0.0]\n[hamiltonian]\npauli = [0,0.7,0,1]\n')
    run(binary, "spectrum", "--config", str(nonstat), "--out", str(tmp), expect=3)

    # fast verify subset
    r = run(binary, "verify", "kahler-core")
    assert "3 of 3 criteria passed" in r.stdout, r.stdout

    print("all CLI checks passed")


if __name__ == "__main__":
    main()
