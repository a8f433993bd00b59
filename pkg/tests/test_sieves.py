"""Sieve tables against a trial-division oracle, Mertens sums, pretentious
distance, and the packed cache format (including corruption handling)."""

import random
import struct
import zlib
from fractions import Fraction as F

import numpy as np
import pytest

from mulab.errors import (
    CacheChecksumError,
    CacheMagicError,
    CacheVersionError,
    ResourceBudgetError,
)
from mulab.sieves import (
    MobiusTable,
    load_cache,
    m_estimate,
    mertens,
    mertens_trace,
    pretentious_distance_sq,
    primes_up_to,
    save_cache,
    sieve_liouville,
    sieve_mobius,
    sieve_phi,
)


def factorize(n):
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def mu_oracle(n):
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return (-1) ** len(f)


def lambda_oracle(n):
    return (-1) ** sum(factorize(n).values())


def phi_oracle(n):
    out = n
    for p in factorize(n):
        out = out // p * (p - 1)
    return out


class TestMobius:
    def test_definition_examples(self, mu_table):
        assert mu_table.value(1) == 1
        assert mu_table.value(12) == 0
        assert mu_table.value(30) == -1

    def test_primes_give_minus_one(self, mu_table):
        for p in primes_up_to(10 ** 4):
            assert mu_table.value(int(p)) == -1

    def test_full_oracle_small(self, mu_table):
        vals = mu_table.values(1, 10 ** 4 + 1)
        for n in range(1, 10 ** 4 + 1):
            assert vals[n - 1] == mu_oracle(n)

    def test_oracle_random_points(self, mu_table):
        rng = random.Random(53)
        vals = mu_table.weight_array()
        for _ in range(10 ** 4):
            n = rng.randrange(1, mu_table.n_max + 1)
            assert vals[n] == mu_oracle(n)

    def test_mobius_inversion(self, mu_table):
        vals = mu_table.weight_array()
        for n in range(1, 10 ** 4 + 1):
            total = sum(int(vals[d]) for d in range(1, n + 1) if n % d == 0)
            assert total == (1 if n == 1 else 0)

    def test_multiplicativity_spot(self, mu_table):
        import math

        rng = random.Random(59)
        done = 0
        while done < 200:
            a = rng.randrange(2, 1000)
            b = rng.randrange(2, 1000)
            if math.gcd(a, b) != 1:
                continue
            assert mu_table.value(a * b) == mu_table.value(a) * mu_table.value(b)
            done += 1


class TestMertens:
    def test_m_of_one(self, mu_table):
        assert mertens(mu_table, 1) == 1

    def test_m_of_ten(self, mu_table):
        assert mertens(mu_table, 10) == -1

    def test_trace_matches_cumsum_oracle(self, mu_table):
        vals = mu_table.values(1, 5001).astype(np.int64)
        csum = np.cumsum(vals)
        pts = [1, 2, 17, 100, 999, 5000]
        assert mertens_trace(mu_table, pts) == [
            (n, int(csum[n - 1])) for n in pts
        ]

    def test_known_decades(self, mu_table):
        assert dict(mertens_trace(mu_table, [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6])) \
            == {10 ** 3: 2, 10 ** 4: -23, 10 ** 5: -48, 10 ** 6: 212}

    def test_overall_pnt_trend(self, mu_table):
        # |M(N)|/N at 1e6 is strictly smaller than at 1e3
        tr = dict(mertens_trace(mu_table, [10 ** 3, 10 ** 6]))
        assert abs(tr[10 ** 6]) / 10 ** 6 < abs(tr[10 ** 3]) / 10 ** 3


class TestLiouvillePhi:
    def test_lambda_examples(self):
        lam = sieve_liouville(1000)
        assert lam.value(8) == -1
        assert lam.value(1) == 1

    def test_lambda_oracle_random(self):
        lam = sieve_liouville(10 ** 6)
        vals = lam.weight_array()
        rng = random.Random(61)
        for _ in range(10 ** 4):
            n = rng.randrange(1, 10 ** 6)
            assert vals[n] == lambda_oracle(n)

    def test_phi_examples(self):
        phi = sieve_phi(100)
        assert phi.value(1) == 1
        assert phi.value(10) == 4

    def test_phi_oracle(self):
        phi = sieve_phi(10 ** 4)
        for n in range(1, 10 ** 4 + 1):
            assert phi.value(n) == phi_oracle(n)
        for p in primes_up_to(10 ** 4):
            assert phi.value(int(p)) == int(p) - 1

    def test_phi_oracle_random_points(self):
        phi = sieve_phi(10 ** 6)
        rng = random.Random(63)
        for _ in range(10 ** 4):
            n = rng.randrange(1, 10 ** 6)
            assert phi.value(n) == phi_oracle(n)


class TestPretentious:
    def test_unimodular_constant_vanishes(self):
        assert pretentious_distance_sq(lambda p: 1.0, 0.0, 1000) == 0.0

    def test_mu_weights_double_prime_sum(self):
        got = pretentious_distance_sq(lambda p: -1.0, 0.0, 100)
        direct = 2 * sum(1.0 / p for p in primes_up_to(100))
        assert abs(got - direct) < 1e-12

    def test_monotone_in_x(self, mu_table):
        w = mu_table.weight_array().astype(float)
        prev = -1.0
        for x in (10, 100, 1000, 10 ** 4):
            v = pretentious_distance_sq(w, 0.0, x)
            assert v >= prev
            prev = v

    def test_domain_error(self):
        with pytest.raises(ValueError):
            pretentious_distance_sq(lambda p: 2.0, 0.0, 50)

    def test_grid_estimate_is_min(self):
        grid = [-1.0, 0.0, 1.0]
        best, best_t = m_estimate(lambda p: 1.0, grid, 500)
        assert best == 0.0 and best_t == 0.0


class TestPersistence:
    def test_round_trip_identity(self, tmp_path):
        table = sieve_mobius(10 ** 5)
        path = tmp_path / "mu.bin"
        save_cache(table, path)
        loaded = load_cache(path)
        assert loaded.n_max == table.n_max
        assert np.array_equal(loaded.packed, table.packed)
        assert loaded.checksum == table.checksum

    def test_rewrite_is_byte_identical(self, tmp_path):
        table = sieve_mobius(12345)
        p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
        save_cache(table, p1)
        save_cache(table, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_truncated_file_is_checksum_error(self, tmp_path):
        table = sieve_mobius(10 ** 4)
        path = tmp_path / "mu.bin"
        save_cache(table, path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-10])
        with pytest.raises(CacheChecksumError):
            load_cache(path)

    def test_corrupted_payload_is_checksum_error(self, tmp_path):
        table = sieve_mobius(10 ** 4)
        path = tmp_path / "mu.bin"
        save_cache(table, path)
        blob = bytearray(path.read_bytes())
        blob[20] ^= 0xFF
        path.write_bytes(bytes(blob))
        with pytest.raises(CacheChecksumError, match="CRC mismatch"):
            load_cache(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "x.bin"
        path.write_bytes(b"NOPE" + bytes(20))
        with pytest.raises(CacheMagicError):
            load_cache(path)

    def test_version_bump_names_versions(self, tmp_path):
        table = sieve_mobius(100)
        path = tmp_path / "mu.bin"
        save_cache(table, path)
        blob = bytearray(path.read_bytes())
        blob[4] = 0x02
        path.write_bytes(bytes(blob))
        with pytest.raises(CacheVersionError, match="0x02.*0x01"):
            load_cache(path)

    def test_lambda_uses_same_container(self, tmp_path):
        lam = sieve_liouville(5000)
        path = tmp_path / "lambda.bin"
        save_cache(lam, path)
        loaded = load_cache(path)
        assert np.array_equal(loaded.values(1, 5001), lam.values(1, 5001))


class TestBudget:
    def test_budget_error_mentions_remedy(self):
        with pytest.raises(ResourceBudgetError, match="budget"):
            sieve_mobius(10 ** 9, memory_budget=1000)


class TestPackedInvariants:
    def test_reserved_code_rejected(self):
        table = sieve_mobius(64)
        bad = table.packed.copy()
        bad[0] |= 0b11  # force code 11 at n = 1
        broken = MobiusTable(64, bad)
        with pytest.raises(Exception, match="reserved code"):
            broken.values(1, 65)
