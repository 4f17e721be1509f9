"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, repeated in the terminal summary
under "acceptance criteria".
"""

import os
from pathlib import Path

import numpy as np
import pytest

from hybridreach import BallSet, BoxSet, SchemeConfig, Solver, VehicleModel
from hybridreach.cli import main
from hybridreach.oracle import analytic_autonomy, convergence_table
from hybridreach.verify import (
    UPPER_BOUND_C,
    check_bounds_and_floor,
    check_consistency,
    check_monotonicity,
    check_oracle,
    check_single_mode,
    upper_bound_run,
)

pytestmark = pytest.mark.slow

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "vehicle.cfg"
PARAMS = {"a_x": 0.1, "a_y": 0.15, "u_max": 0.07, "delta": 2.0}
DX_LIST = (0.05, 0.04, 0.03, 0.02)
RUN_LIMIT_S = 600.0


def _table(x0, y0):
    cfg = SchemeConfig(dp=0.05, horizon=10.0, tol=0.0)
    return convergence_table([(x0, y0)], DX_LIST, cfg, PARAMS)


def _eps_detail(rows):
    return ", ".join(f"dx={r.dx:g}: s*={r.estimate} eps={r.error if r.error is None else round(r.error, 4)}"
                     for r in rows)


def test_criterion_1_first_instance(record_criterion):
    rows = _table(0.3, 0.8)
    eps = [r.error for r in rows]
    reached = all(e is not None for e in eps)
    decreasing = reached and all(b < a for a, b in zip(eps, eps[1:]))
    fine_ok = reached and eps[-1] <= 0.15
    fast = all(r.runtime <= RUN_LIMIT_S for r in rows)
    ok = decreasing and fine_ok and fast
    detail = (f"{_eps_detail(rows)}; decreasing={decreasing}, eps(0.02)<=0.15: {fine_ok}, "
              f"max runtime {max(r.runtime for r in rows):.1f}s")
    record_criterion("1 convergence (0.3,0.8)", ok, detail)
    assert ok, detail


def test_criterion_2_second_instance(record_criterion):
    rows = _table(0.5, 0.5)
    eps = {r.dx: r.error for r in rows}
    reached = all(e is not None for e in eps.values())
    ok = reached and eps[0.02] <= 0.5 and all(eps[dx] < 1.0 for dx in DX_LIST if dx != 0.05)
    detail = _eps_detail(rows)
    record_criterion("2 convergence (0.5,0.5)", ok, detail)
    assert ok, detail


def test_criterion_3_oracle(record_criterion):
    assert analytic_autonomy(0.3, 0.8, 0.1, 0.15, 0.07) == pytest.approx(5.545455, abs=1e-6)
    assert analytic_autonomy(0.5, 0.5, 0.1, 0.15, 0.07) == pytest.approx(6.590909, abs=1e-6)
    check = check_oracle(random_sets=50, seed=3)
    record_criterion("3 oracle cross-check", check.passed, check.detail)
    assert check.passed, check.detail


def test_criterion_4_monotonicity(record_criterion):
    check = check_monotonicity(pairs=100, seed=4)
    record_criterion("4 scheme monotonicity", check.passed, check.detail)
    assert check.passed, check.detail


def test_criterion_5_consistency(record_criterion):
    check = check_consistency(samples=1000, seed=5)
    record_criterion("5 consistency", check.passed, check.detail)
    assert check.passed, check.detail


def test_criterion_6_bounds_and_floor(record_criterion):
    check = check_bounds_and_floor(dx=0.05, horizon=3.0)
    record_criterion("6 bounds and obstacle floor", check.passed, check.detail)
    assert check.passed, check.detail


def test_criterion_7_single_mode(record_criterion):
    check = check_single_mode(dx=0.025, probes=100, seed=7)
    record_criterion("7 single-mode reduction", check.passed, check.detail)
    assert check.passed, check.detail


def test_criterion_8_upper_bound(record_criterion):
    # seed differs from the calibration seed (1000)
    draws, violations, slack = upper_bound_run(dx=0.05, samples=200, seed=8)
    frac = 1 - len(violations) / len(draws)
    ok = len(draws) == 200 and frac >= 0.99
    detail = f"C={UPPER_BOUND_C}, {len(draws) - len(violations)}/{len(draws)} within slack {slack:.4f}"
    record_criterion("8 trajectory upper bound", ok, detail)
    assert ok, detail


def test_criterion_9_determinism(tmp_path, record_criterion):
    counts = sorted({1, 4, os.cpu_count() or 1})
    outs = []
    for w in counts:
        d = tmp_path / f"w{w}"
        assert main(["solve", "--config", str(CONFIG), "--out", str(d), "--workers", str(w), "--seed", "0"]) == 0
        outs.append(d)
    names = sorted(str(p.relative_to(outs[0])) for p in outs[0].rglob("*.csv"))
    same = bool(names)
    for d in outs[1:]:
        other = sorted(str(p.relative_to(d)) for p in d.rglob("*.csv"))
        same &= other == names and all((outs[0] / n).read_bytes() == (d / n).read_bytes() for n in names)
    detail = f"workers {counts}: {len(names)} CSV files {'identical' if same else 'differ'}"
    record_criterion("9 determinism", same, detail)
    assert same, detail


def test_snapshot_exports(record_criterion):
    times = (2.65, 3.00, 3.75)
    model = VehicleModel(0.1, 0.15, 0.07, 2.0, BoxSet([0, 0], [1, 1]), BallSet([0.3, 0.8], 0.05))
    res = Solver(model, SchemeConfig(dx=0.025, horizon=4.0, snapshot_times=times)).run()
    by_n = {r.n: r for r in res.records}
    parts = []
    ok = True
    for s in times:
        n = int(round(s / res.grid.dt))
        exported = n in res.min_maps and n in by_n
        nonempty = exported and not by_n[n].empty
        ok &= nonempty
        count = int(np.count_nonzero(by_n[n].mask)) if exported else 0
        parts.append(f"s={s}: exported={exported} reachable nodes={count}")
    record_criterion("snapshot exports (s=2.65, 3.00, 3.75)", ok, "; ".join(parts))
    assert ok, "; ".join(parts)
