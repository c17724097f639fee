#!/usr/bin/env python3
"""Builds the levitodyn_py extension, imports it, and exercises every export.

Run from anywhere inside the repository:

    python3 python/smoke_test.py
"""

import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent

CONFIG = """
[particle]
mass_kg = 2.0e-18
inertia_kgm2 = [1.0e-32, 1.1e-32, 0.9e-32]
volume_m3 = 1.0e-21
chi0 = 0.25
delta_chi = [0.05, -0.02, 0.1]

[trap]
power_w = 0.5
cross_section_m2 = 2.3e-12
wavelength_m = 1.55e-6
waist_m = 1.2e-6
rayleigh_range_m = 3.5e-6
a1 = 0.9
a2 = 1.1
bx = 1.0
by = 0.3

[gas]
gamma_c_hz = 0.0
temperature_k = 300.0
molecule_mass_kg = 4.8e-26

[detector]
axis = [0.0, 0.0, 1.0]
half_angle_rad = 0.6
eta = 0.9

[integrator]
dt_s = 2.0e-9
duration_s = 2.0e-6
seed = 7
stride = 10

[currents]
sweep = "beta"
start = 0.4
stop = 2.6
points = 11
"""


def build_extension() -> Path:
    subprocess.run(
        ["cargo", "build", "-p", "levitodyn-py", "--release"],
        cwd=REPO,
        check=True,
    )
    built = REPO / "target" / "release" / "liblevitodyn_py.so"
    target = Path(__file__).resolve().parent / "levitodyn_py.so"
    shutil.copy2(built, target)
    return target


def main() -> int:
    build_extension()
    sys.path.insert(0, str(Path(__file__).resolve().parent))
    import levitodyn_py as ld

    cfg = ld.Config(CONFIG)

    # config validation surfaces as ValueError with the offending field
    try:
        ld.Config(CONFIG.replace("waist_m = 1.2e-6", "waist_m = -1.0"))
    except ValueError as err:
        assert "waist" in str(err), err
    else:
        raise AssertionError("negative waist accepted")

    # conservative trajectory: energy drift below 1e-6
    trace = ld.simulate(cfg)
    assert len(trace["t"]) > 50
    drift = abs(trace["energy"][-1] - trace["energy"][0]) / abs(trace["energy"][0])
    assert drift < 1e-6, drift

    # same seed, byte-equal physics
    again = ld.simulate(cfg, seed=7)
    assert trace["x"] == again["x"] and trace["J"] == again["J"]

    # current sweep: total equals the sum of the four pieces
    sweep = ld.currents(cfg, threads=2)
    for k in range(len(sweep["value"])):
        total = sweep["j0"][k] + sweep["jt"][k] + sweep["jr"][k] + sweep["jrt"][k]
        assert math.isclose(sweep["total"][k], total, rel_tol=1e-12)

    # quantum toy model: purity stays in (0, 1]
    q = ld.Config(
        CONFIG
        + "\n[quantum]\nmodel = \"translational\"\nfock_dim = 12\n"
        + "dt_s = 1.0e-9\nduration_s = 2.0e-7\nstride = 10\n"
    )
    sme = ld.sme(q)
    assert all(0.0 < p <= 1.0 + 1e-9 for p in sme["purity"])

    # psd pipeline over a written trace
    p = ld.Config(
        CONFIG.replace("duration_s = 2.0e-6", "duration_s = 4.0e-5")
        .replace("stride = 10", "stride = 2")
        + "\n[initial]\nposition_m = [1.0e-7, 0.0, 0.0]\n"
        + "\n[psd]\ninput = \"trace.csv\"\ncolumn = \"x\"\nsegment_length = 1024\n"
    )
    with tempfile.TemporaryDirectory() as out:
        ld.simulate(p, out_dir=out)
        spectrum = ld.psd(p, out)
    assert len(spectrum["frequency_hz"]) > 100

    # standalone primitives
    freqs, psd_vals = ld.welch_psd(
        1000.0,
        [math.sin(2 * math.pi * 100.0 * k / 1000.0) for k in range(4096)],
        1024,
    )
    peak = freqs[max(range(len(psd_vals)), key=psd_vals.__getitem__)]
    assert abs(peak - 100.0) < 1.0, peak

    fit = ld.lorentzian_fit(
        freqs,
        [1e-6 + 1.0 / (1.0 + ((f - 100.0) / 5.0) ** 2) for f in freqs],
        (50.0, 150.0),
    )
    assert abs(fit["center"] - 100.0) < 0.5, fit

    rot = ld.rotation_from_euler(0.3, 1.1, -0.4)
    for i in range(3):
        dot = sum(rot[i][k] * rot[i][k] for k in range(3))
        assert abs(dot - 1.0) < 1e-12

    c = ld.gradient_coupling((0.3, 1.1, -0.4), 0.25, (0.05, -0.02, 0.1), 1.0, 0.3)
    iso = ld.gradient_coupling((0.3, 1.1, -0.4), 0.25, (0.0, 0.0, 0.0), 1.0, 0.3)
    assert math.isclose(iso, 0.25, rel_tol=1e-12)
    assert c != iso

    # self-checks all green
    results = ld.check(cfg)
    assert len(results) >= 6
    assert all(passed for _, passed, _ in results), results

    print("smoke test: all checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
