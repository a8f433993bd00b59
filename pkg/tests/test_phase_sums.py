"""Average and correlation functionals: exact small cases, triangle and
cancellation identities at the documented tolerance, and the brute-force
approximation witness with an independently re-checked certificate."""

import cmath
import math
import random
from fractions import Fraction as F

import mpmath
import numpy as np
import pytest

from mulab.errors import ResourceBudgetError
from mulab.fixedpoint import sqrt_const
from mulab.phases import ConcatPhase, PolyPhase, power_phase
from mulab.phase_sums import (
    SUM_TOLERANCE,
    ap_correlation,
    blockwise_abs_average,
    checkpoint_grid,
    dirichlet_approx,
    phase_table,
    residue_masked,
    shift_self_correlation,
    short_interval_sup_average,
    unit_weights,
    weighted_average,
    weights_from_table,
    zero_weights,
)

mpmath.mp.prec = 256


class TestWeights:
    def test_residue_mask(self):
        w = residue_masked(unit_weights(20), 3, 1)
        vals = w.values
        for n in range(1, 21):
            assert vals[n] == (1 if n % 3 == 1 else 0)
        assert w.label == "one|1mod3"

    def test_empty_mask_zeroes_range(self):
        w = residue_masked(unit_weights(10), 50, 45)
        assert int(np.abs(w.values).sum()) == 0

    def test_bad_mask(self):
        with pytest.raises(ValueError):
            residue_masked(unit_weights(10), 3, 3)


class TestCheckpointGrid:
    def test_exact_count_and_endpoint(self):
        for n, c in ((10 ** 6, 20), (1000, 7), (50, 50), (5, 10)):
            pts = checkpoint_grid(n, c)
            assert len(pts) == min(c, n)
            assert pts[-1] == n
            assert pts == sorted(set(pts))


class TestWeightedAverage:
    def test_zero_weights_vanish(self):
        rep = weighted_average(zero_weights(100), PolyPhase([0, F(1, 3)]), 100, 5)
        assert all(r.modulus == 0.0 for r in rep.rows)

    def test_mu_constant_phase_small(self, mu_weights):
        rep = weighted_average(mu_weights, PolyPhase([0]), 10, [10])
        assert rep.rows[-1].real == pytest.approx(-0.1, abs=1e-15)
        assert rep.rows[-1].imag == 0.0

    def test_triangle_inequality(self, mu_weights):
        rep = weighted_average(mu_weights, PolyPhase([0, sqrt_const(2)]),
                               5000, 10)
        assert all(r.modulus <= 1.0 + 1e-12 for r in rep.rows)

    def test_full_period_cancellation(self):
        # unit weights, linear phase a/b: any b consecutive full periods
        # cancel exactly (up to the documented accumulation tolerance)
        for a, b in ((1, 7), (3, 8), (2, 5)):
            n = b * 600
            rep = weighted_average(unit_weights(n), PolyPhase([0, F(a, b)]),
                                   n, [n])
            assert rep.rows[-1].modulus <= SUM_TOLERANCE * n

    def test_row_count_contract(self, mu_weights):
        rep = weighted_average(mu_weights, PolyPhase([0]), 10 ** 4, 20)
        assert len(rep.rows) == 20

    def test_linear_irrational_phase_decays(self, mu_weights):
        # |(1/N) sum mu(n) e(sqrt2 n)| smaller at N=1e6 than at N=1e3
        rep = weighted_average(mu_weights, PolyPhase([0, sqrt_const(2)]),
                               10 ** 6, [10 ** 3, 10 ** 6])
        mods = [m for _, m in rep.moduli()]
        assert mods[1] < mods[0]

    def test_range_validation(self):
        with pytest.raises(ValueError):
            weighted_average(unit_weights(10), PolyPhase([0]), 100, 5)

    def test_csv_and_json_reports(self, tmp_path, mu_weights):
        rep = weighted_average(mu_weights, PolyPhase([0]), 1000, 5)
        csv_path = tmp_path / "trace.csv"
        json_path = tmp_path / "trace.json"
        rep.write_csv(csv_path)
        rep.write_json(json_path)
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "N,avg_real,avg_imag,avg_modulus"
        assert len(lines) == 6
        assert '"schema_version": 1' in json_path.read_text()


class TestBlockwise:
    def test_unit_weights_constant_phase(self):
        avg, per_block = blockwise_abs_average(
            unit_weights(100), PolyPhase([0]), [0, 10, 40, 100]
        )
        assert per_block == [9.0, 30.0, 60.0]  # block [0,10) sums n=1..9
        assert avg == pytest.approx(0.99)

    def test_agrees_with_direct_block_sums(self, mu_weights):
        phase = PolyPhase([0, F(1, 5)])
        bps = [0, 8, 20, 50]
        avg, blocks = blockwise_abs_average(mu_weights, phase, bps)
        w = mu_weights.values
        for (lo, hi), got in zip(zip(bps, bps[1:]), blocks):
            direct = sum(
                int(w[n]) * cmath.exp(2j * math.pi * float(phase.frac(n)))
                for n in range(max(lo, 1), hi)
            )
            assert abs(abs(direct) - got) < 1e-10


class TestShortInterval:
    def test_zero_weights(self):
        fam = [PolyPhase([0])]
        assert short_interval_sup_average(zero_weights(500), fam, 100, 10) == 0.0

    def test_constant_family_unit_weights(self):
        fam = [PolyPhase([0])]
        v = short_interval_sup_average(unit_weights(500), fam, 100, 10)
        assert v == pytest.approx(1.0)

    def test_monotone_in_family(self, mu_weights):
        base = [PolyPhase([0, F(j, 8)]) for j in range(4)]
        extra = base + [PolyPhase([0, F(j, 8)]) for j in range(4, 8)]
        lo = short_interval_sup_average(mu_weights, base, 2000, 20)
        hi = short_interval_sup_average(mu_weights, extra, 2000, 20)
        assert hi >= lo

    def test_range_validation(self):
        with pytest.raises(ValueError):
            short_interval_sup_average(unit_weights(100), [PolyPhase([0])],
                                       100, 10)


class TestApCorrelation:
    def test_zero_weights(self):
        rep = ap_correlation(zero_weights(200), PolyPhase([0]), 1, 3, 50)
        assert rep.value == 0.0

    def test_unit_weights_constant_phase(self):
        rep = ap_correlation(unit_weights(200), PolyPhase([0]), 1, 3, 50)
        assert rep.value == pytest.approx(1.0)

    def test_nonnegative_and_has_comparison(self, mu_weights):
        rep = ap_correlation(mu_weights, PolyPhase([0]), 2, 10, 5000)
        assert rep.value >= 0.0
        # s = 2: s/phi(s) = 2
        assert rep.comparison == pytest.approx(
            2.0 * math.log(math.log(10)) / math.log(10)
        )

    def test_h_minimum(self):
        with pytest.raises(ValueError):
            ap_correlation(unit_weights(100), PolyPhase([0]), 1, 2, 10)


class TestShiftSelfCorrelation:
    def test_constant_table(self):
        assert shift_self_correlation(np.ones(100), 7, 90) == 0.0

    def test_period_two(self):
        g = np.tile([1.0, -1.0], 100)
        assert shift_self_correlation(g, 1, 150) == pytest.approx(4.0)
        assert shift_self_correlation(g, 2, 150) == 0.0

    def test_zero_shift(self):
        rng = np.random.default_rng(131)
        g = rng.normal(size=64) + 1j * rng.normal(size=64)
        assert shift_self_correlation(g, 0, 64) == 0.0

    def test_phase_table_input(self):
        tab = phase_table(PolyPhase([0, F(1, 2)]), 64)  # e(n/2) = (-1)^n
        assert shift_self_correlation(tab, 1, 32) == pytest.approx(4.0)
        assert shift_self_correlation(tab, 2, 32) == pytest.approx(0.0)


class TestDirichlet:
    def test_rational_exact_hit(self):
        wit = dirichlet_approx([F(1, 3)], 3)
        assert (wit.t, wit.nearest, wit.max_err) == (3, [1], 0.0)

    def test_sqrt2(self):
        wit = dirichlet_approx([sqrt_const(2)], 3)
        assert wit.t == 2 and wit.nearest == [3]
        assert wit.max_err == pytest.approx(abs(2 * math.sqrt(2) - 3), abs=1e-12)
        assert wit.max_err <= 1 / 3

    def test_integer_vector(self):
        wit = dirichlet_approx([F(5), F(7)], 4)
        assert wit.t == 1 and wit.max_err == 0.0

    def test_certificates_random(self):
        rng = random.Random(137)
        for _ in range(60):
            L = rng.randrange(1, 3)
            q = rng.randrange(2, 9)
            thetas = []
            for _ in range(L):
                if rng.random() < 0.5:
                    thetas.append(F(rng.randrange(0, 512), 512))
                else:
                    thetas.append(sqrt_const(rng.choice((2, 3, 5, 7))))
            wit = dirichlet_approx(thetas, q)
            assert 1 <= wit.t <= q ** L
            # independent re-evaluation at 384-bit precision
            for th, a in zip(thetas, wit.nearest):
                x = (mpmath.mpf(th.mantissa) / 2 ** 96
                     if not isinstance(th, F)
                     else mpmath.mpf(th.numerator) / th.denominator)
                assert abs(wit.t * x - a) <= mpmath.mpf(1) / q + mpmath.mpf(2) ** -80

    def test_budget(self):
        with pytest.raises(ResourceBudgetError):
            dirichlet_approx([F(1, 3)] * 10, 8, budget=1000)


class TestConcatInSums:
    def test_blockwise_equals_full_sum_at_boundaries(self, mu_weights):
        # summing a concatenation block by block or straight through is the
        # same thing; the two presentations of the average agree at block ends
        bps = [0, 16, 48, 96, 200]
        pieces = [PolyPhase([0, F(j, 7)]) for j in range(4)] + [PolyPhase([0])]
        concat = ConcatPhase(bps, pieces)
        rep = weighted_average(mu_weights, concat, 199, [199])
        w = mu_weights.values
        direct = sum(
            int(w[n]) * cmath.exp(2j * math.pi * float(concat.frac(n)))
            for n in range(1, 200)
        )
        assert abs(rep.rows[-1].real * 199 - direct.real) < 1e-9
        assert abs(rep.rows[-1].imag * 199 - direct.imag) < 1e-9
