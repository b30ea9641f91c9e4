"""Acceptance criteria, one test per criterion.

Each test records a ``criterion N: PASS|FAIL ...`` line that the terminal
summary prints in order, then asserts the criterion at its stated tolerance.
"""

import functools
import hashlib
import os

import pytest

from conftest import ACCEPTANCE_LINES
from pathlab.cli import run as cli_run
from pathlab.experiments import run_experiment

pytestmark = pytest.mark.acceptance


@functools.lru_cache(maxsize=None)
def _run(name):
    return run_experiment(name)


def _record(n, title, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {n}: {'PASS' if ok else 'FAIL'} {title}: {detail}")
    assert ok, f"criterion {n} ({title}) failed: {detail}"


def _rate(name, scheme=None):
    res = _run(name)
    rows = [r for r in res.report_rows if scheme is None or r["scheme"] == scheme]
    assert rows, f"no rate row {scheme!r} in {name}"
    return rows[0]


def test_criterion_01_oracle_agreement():
    ok = _run("oracle-agreement").report("all_within_tolerance") is True
    _record(1, "oracle agreement", ok, f"all_within_tolerance={ok}")


def test_criterion_02_free_sanity():
    err = _run("free-sanity").report("max_error")
    _record(2, "free sanity", err < 1e-6, f"max error {err:.2e} (< 1e-6)")


def test_criterion_03_ho_slicing_rate():
    s = _rate("ho-slicing-rate")["slope"]
    _record(3, "oscillator slicing rate", abs(s - 1) <= 0.3, f"slope {s:.3f} (1 +- 0.3)")


def test_criterion_04_midpoint_orders():
    v1 = _rate("midpoint-rule-orders", "midpoint_v1")["slope"]
    v2 = _rate("midpoint-rule-orders", "midpoint_v2")["slope"]
    avg = _rate("midpoint-rule-orders", "midpoint_avg")["slope"]
    ok = abs(v1 - 1) <= 0.2 and abs(v2 - 1) <= 0.2 and abs(avg - 2) <= 0.2 and avg - max(v1, v2) >= 0.5
    _record(4, "midpoint rule orders", ok, f"V1 {v1:.3f}, V2 {v2:.3f}, avg {avg:.3f}")


@pytest.mark.parametrize("order", [1, 2])
def test_criterion_05_taylor_rates(order):
    s = _rate(f"taylor-rate-N{order}")["slope"]
    _record(5, f"rough parametrix rate N={order}", abs(s - order) <= 0.4, f"slope {s:.3f} ({order} +- 0.4)")


@pytest.mark.parametrize("order", [1, 2])
def test_criterion_06_hbar_uniformity(order):
    rows = {r["quantity"]: r["value"] for r in _run("hbar-uniformity").report_rows if r["order"] == order}
    slopes = [v for k, v in rows.items() if k.startswith("slope(")]
    spread, scaled = rows["slope_spread"], rows["scaled_error_spread"]
    ok = all(abs(s - order) <= 0.4 for s in slopes) and spread <= 0.8 and scaled < 3
    detail = f"slopes {', '.join(f'{s:.3f}' for s in slopes)}, slope spread {spread:.4f}, scaled error spread {scaled:.3f} (< 3)"
    _record(6, f"hbar uniformity N={order}", ok, detail)


def test_criterion_07_trotter_strong():
    rows = _run("trotter-strong-convergence").report_rows
    worst = max(abs(r["slope"] - 1) for r in rows)
    _record(7, "Trotter strong convergence", worst <= 0.3, f"max |slope - 1| {worst:.3f} over {len(rows)} fits")


def test_criterion_08_trotter_pointwise():
    res = _run("trotter-pointwise")
    ratio, inv, var = (res.report(k) for k in ("final_over_initial", "non_decreasing_steps", "boundedness_variation"))
    ok = ratio < 0.1 and inv <= 1 and var < 0.5
    _record(8, "Trotter pointwise", ok, f"final/initial {ratio:.3f}, inversions {inv}, variation {var:.2e}")


def test_criterion_09_exceptional_times():
    res = _run("exceptional-times")
    cases, leaks = res.report("cases_within_threshold"), res.report("kernels_returned_within_threshold")
    _record(9, "exceptional times", cases > 0 and leaks == 0, f"{leaks} kernels returned over {cases} guarded cases")


def test_criterion_10_gabor_norm_equivalence():
    rows = _run("gabor-norm-equivalence").report_rows
    pair = [r for r in rows if not r["quantity"].endswith("/L2")]
    cmax = max(float(r["constant"]) for r in pair)
    l2 = next(float(r["constant"]) for r in rows if r["quantity"] == "stft/L2")
    _record(10, "modulation norm equivalence", cmax <= 10 and l2 < 1e-6, f"max pairwise constant {cmax:.3f} (<= 10), stft/L2 spread {l2:.1e}")


def test_criterion_11_fio_decay():
    rows = _run("fio-decay-metaplectic").report_rows
    dec = min(r["decay_exponent"] for r in rows if r["chi"] == "matching")
    grow = min(r["growth_s0_to_s4"] for r in rows if r["chi"] == "identity")
    _record(11, "Gabor matrix decay of metaplectic operators", dec > 6 and grow > 10, f"min matching decay {dec:.1f} (> 6), min identity growth {grow:.1f} (> 10)")


def test_criterion_12_frame_bounds():
    v = _run("frame-bounds").report("max_relative_violation")
    _record(12, "frame bounds", v <= 1e-8, f"max relative violation {v:.1e}")


DETERMINISM = [
    ("midpoint-rule-orders", {}),
    ("exceptional-times", {}),
    ("fourier-sharpness", {}),
    ("ho-slicing-rate", {"n_points": "512"}),
]


def _digests(d):
    return {f: hashlib.sha256(open(os.path.join(d, f), "rb").read()).hexdigest() for f in sorted(os.listdir(d))}


def test_criterion_13_determinism(tmp_path):
    differ = []
    for name, over in DETERMINISM:
        a = cli_run(name, over, output_dir=str(tmp_path / name / "a"))
        b = cli_run(name, over, output_dir=str(tmp_path / name / "b"))
        if _digests(a) != _digests(b) or len(_digests(a)) != 3:
            differ.append(name)
    _record(13, "determinism", not differ, f"{len(DETERMINISM) - len(differ)}/{len(DETERMINISM)} experiments byte-identical" + (f"; differ: {differ}" if differ else ""))
