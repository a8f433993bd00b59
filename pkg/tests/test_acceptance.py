"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL
line (run with `pytest -s tests/test_acceptance.py` to see them inline).

Every tolerance and runtime limit is pinned here.  Criterion 7's first
clause (the four-decade Mertens ratio chain) is asserted exactly as stated;
it fails on the true Mobius values because |M(N)|/N rises from N=1e3
(|2|/1e3) to N=1e4 (|-23|/1e4) before falling.  The failure is intentional
and documented: the remaining clauses of criterion 7 pass.
"""

import math
import time
from fractions import Fraction as F

import pytest

from mulab.experiments import (
    run_appendix_exact,
    run_block_machinery,
    run_dirichlet_cert,
    run_example33,
    run_indicator_blocks,
    run_piece_bound_random,
    run_round_trips,
    run_value_bound,
)
from mulab.fixedpoint import sqrt_const
from mulab.phases import PolyPhase, power_phase
from mulab.phase_sums import (
    ap_correlation,
    short_interval_sup_average,
    weighted_average,
)
from mulab.sieves import mertens_trace

SEED = 1729


def report(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'} - {detail}")


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def test_criterion_01_appendix_exactness():
    with Timer() as t:
        res = run_appendix_exact({"seed": SEED, "cases": 500})
    ok = res["passed"] and t.elapsed < 10.0
    report(1, ok, f"exact identities "
                  f"({res['closed_vs_iterated_ok']}/500 closed-form, "
                  f"{res['equivalence_cases']} equivalence cases, "
                  f"{t.elapsed:.1f}s < 10s)")
    assert res["passed"]
    assert t.elapsed < 10.0


def test_criterion_02_value_bound():
    with Timer() as t:
        res = run_value_bound({"seed": SEED, "trials": 1000})
    ok = res["passed"] and t.elapsed < 5.0
    report(2, ok, f"growth bound held in {res['bound_held']}/1000 windows "
                  f"({t.elapsed:.1f}s < 5s)")
    assert res["passed"]
    assert t.elapsed < 5.0


def test_criterion_03_piece_bound():
    with Timer() as t:
        res = run_piece_bound_random({"seed": SEED, "trials": 200, "m": 8, "k": 3})
    ok = res["passed"] and t.elapsed < 60.0
    report(3, ok, f"recursion={res['recursion_ok']}, "
                  f"random {res['random_bound_ok']}/200 below bound, "
                  f"fixed examples={res['fixed_examples_ok']} "
                  f"({t.elapsed:.1f}s < 60s)")
    assert res["passed"]
    assert t.elapsed < 60.0


def test_criterion_04_block_machinery():
    with Timer() as t:
        res = run_block_machinery(
            {"seed": SEED, "trials": 100, "p": 10 ** 4, "jmax": 6, "lmax": 4}
        )
    ok = res["passed"] and t.elapsed < 30.0
    report(4, ok, f"containments {res['containment_ok']}/100, inequality "
                  f"{res['inequality_ok']}/{res['inequality_checked']} "
                  f"({t.elapsed:.1f}s < 30s)")
    assert res["passed"]
    assert t.elapsed < 30.0


def test_criterion_05_indicator_block_growth():
    with Timer() as t:
        res = run_indicator_blocks({"p": 10 ** 6, "jmax": 18})
    ok = res["passed"] and t.elapsed < 120.0
    report(5, ok, f"counts below bound={res['below_bound']}, "
                  f"log|B_J|/J nonincreasing from J=8="
                  f"{res['nonincreasing_from_8']}, "
                  f"|B_18|={res['counts'][-1]} ({t.elapsed:.1f}s < 120s)")
    assert res["passed"]
    assert t.elapsed < 120.0


def test_criterion_06_bracket_second_difference():
    with Timer() as t:
        res = run_example33({"n": 10 ** 5, "tolerance": 1e-9})
    ok = res["passed"] and t.elapsed < 30.0
    report(6, ok, f"partition={res['partition_ok']}, max residual "
                  f"{res['max_residual']:.2e} <= 1e-9, cases "
                  f"{res['case_counts']} ({t.elapsed:.1f}s < 30s)")
    assert res["passed"]
    assert t.elapsed < 30.0


def test_criterion_07_pnt_and_disjointness_trends(mu_table, mu_weights):
    with Timer() as t:
        decades = [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6]
        trace = mertens_trace(mu_table, decades)
        ratios = [abs(m) / n for n, m in trace]
        mertens_strictly_decreasing = all(
            b < a for a, b in zip(ratios, ratios[1:])
        )
        cps = [10 ** 4, 10 ** 6]
        lin = weighted_average(
            mu_weights, PolyPhase([0, sqrt_const(2)]), 10 ** 6, cps
        ).moduli()
        pw = weighted_average(
            mu_weights, power_phase(3, 2), 10 ** 6, cps
        ).moduli()
        lin_decay = lin[0][1] / lin[1][1]
        pow_decay = pw[0][1] / pw[1][1]
        decay_ok = lin_decay >= 2.0 and pow_decay >= 2.0
    ok = mertens_strictly_decreasing and decay_ok and t.elapsed < 180.0
    report(
        7, ok,
        f"|M|/N over decades {[f'{r:.2e}' for r in ratios]} strictly "
        f"decreasing={mertens_strictly_decreasing} (fails on true Mobius "
        f"values: M(1e3)=2, M(1e4)=-23); "
        f"phase-decay factors {lin_decay:.1f}x / {pow_decay:.1f}x >= 2 "
        f"PASS ({t.elapsed:.1f}s < 180s)",
    )
    assert decay_ok
    assert t.elapsed < 180.0
    # stated as written; see the module docstring for why this is red
    assert mertens_strictly_decreasing


def test_criterion_08_dirichlet_certificates():
    with Timer() as t:
        res = run_dirichlet_cert(
            {"seed": SEED, "trials": 100, "lmax": 2, "qmax": 8}
        )
    ok = res["passed"] and t.elapsed < 10.0
    report(8, ok, f"{res['certified']}/100 certificates re-verified "
                  f"({t.elapsed:.1f}s < 10s)")
    assert res["passed"]
    assert t.elapsed < 10.0


def test_criterion_09_progression_correlation_trend(mu_weights):
    with Timer() as t:
        hs = (10, 100, 1000)
        reports = [
            ap_correlation(mu_weights, PolyPhase([0]), 1, h, 10 ** 6)
            for h in hs
        ]
        values = [r.value for r in reports]
        comparisons = [r.comparison for r in reports]
        decreasing = all(b < a for a, b in zip(values, values[1:]))
        below = all(v < 10.0 * c for v, c in zip(values, comparisons))
    ok = decreasing and below and t.elapsed < 120.0
    report(9, ok, f"values {[f'{v:.2e}' for v in values]} decreasing="
                  f"{decreasing}, below 10x comparison={below} "
                  f"({t.elapsed:.1f}s < 120s)")
    assert decreasing and below
    assert t.elapsed < 120.0


def test_criterion_10_short_interval_surrogate(mu_weights):
    with Timer() as t:
        family = [
            PolyPhase([F(a0, 16), F(a1, 16)])
            for a0 in range(16)
            for a1 in range(16)
        ]
        v10 = short_interval_sup_average(mu_weights, family, 10 ** 5, 10)
        v100 = short_interval_sup_average(mu_weights, family, 10 ** 5, 100)
    ok = v100 < v10 and t.elapsed < 300.0
    report(10, ok, f"finite-grid lower-bound surrogate: h=10 -> {v10:.4f}, "
                   f"h=100 -> {v100:.4f}, decreasing={v100 < v10} "
                   f"({t.elapsed:.1f}s < 300s)")
    assert v100 < v10
    assert t.elapsed < 300.0


def test_criterion_11_round_trips(tmp_path):
    with Timer() as t:
        res = run_round_trips({"seed": SEED, "n": 10 ** 5}, tmp_path)
    ok = res["passed"] and t.elapsed < 10.0
    report(11, ok, f"cache={res['cache_ok']}, "
                   f"concat zero-residual={res['concat_zero_residual']}, "
                   f"diff*sigma identity={res['diff_sigma_identity']} "
                   f"({t.elapsed:.1f}s < 10s)")
    assert res["passed"]
    assert t.elapsed < 10.0
