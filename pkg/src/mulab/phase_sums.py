"""Weighted exponential-sum averages and correlation functionals.

The running average (1/N) sum_{n<=N} w(n) e(f(n)) is accumulated with
compensated (Neumaier) summation across numpy chunk sums; the documented
relative tolerance is 1e-12 for N up to 1e8.  Weights are exact integers in
{-1, 0, +1} (mu, lambda, constant 1, residue-class masks).  Weight tables
and phases are immutable; ranges can be partitioned into disjoint chunks
whose partial sums recombine within the same tolerance.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from ._util import atomic_write_text
from .errors import ResourceBudgetError
from .fixedpoint import SCALE, FixedReal
from .phases import Phase
from .sieves import MobiusTable, PhiTable, sieve_phi

_CHUNK = 1 << 16

#: documented accumulation tolerance for |average| identities
SUM_TOLERANCE = 1e-12


# ---------------------------------------------------------------------------
# weights


@dataclass
class WeightTable:
    """w[n] for 1 <= n <= n_max, exact int8 in {-1, 0, +1}; w[0] = 0."""

    values: np.ndarray
    label: str

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.int8)
        if self.values.ndim != 1 or self.values.size < 2:
            raise ValueError("weight table needs entries for n >= 1")
        self.values[0] = 0

    @property
    def n_max(self) -> int:
        return self.values.size - 1


def weights_from_table(table: MobiusTable) -> WeightTable:
    return WeightTable(table.weight_array().copy(), table.label)


def unit_weights(n_max: int) -> WeightTable:
    w = np.ones(n_max + 1, dtype=np.int8)
    return WeightTable(w, "one")


def zero_weights(n_max: int) -> WeightTable:
    return WeightTable(np.zeros(n_max + 1, dtype=np.int8), "zero")


def residue_masked(base: WeightTable, q: int, a: int) -> WeightTable:
    """Keep w(n) only on n = a (mod q)."""
    if q < 1 or not 0 <= a < q:
        raise ValueError("need q >= 1 and 0 <= a < q")
    w = base.values.copy()
    ns = np.arange(w.size)
    w[ns % q != a] = 0
    return WeightTable(w, f"{base.label}|{a}mod{q}")


# ---------------------------------------------------------------------------
# compensated accumulation


class _Neumaier:
    __slots__ = ("s", "c")

    def __init__(self) -> None:
        self.s = 0.0
        self.c = 0.0

    def add(self, x: float) -> None:
        t = self.s + x
        if abs(self.s) >= abs(x):
            self.c += (self.s - t) + x
        else:
            self.c += (x - t) + self.s
        self.s = t

    @property
    def value(self) -> float:
        return self.s + self.c


# ---------------------------------------------------------------------------
# sum reports


@dataclass
class Checkpoint:
    n: int
    real: float
    imag: float

    @property
    def modulus(self) -> float:
        return math.hypot(self.real, self.imag)


@dataclass
class SumReport:
    """Running averages (1/N) sum w(n) e(f(n)) at checkpoint values of N."""

    phase: str
    weights: str
    n_max: int
    rows: list[Checkpoint]
    meta: dict = field(default_factory=dict)

    @property
    def final(self) -> complex:
        last = self.rows[-1]
        return complex(last.real, last.imag)

    def moduli(self) -> list[tuple[int, float]]:
        return [(r.n, r.modulus) for r in self.rows]

    def write_csv(self, path: str | Path) -> None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "avg_real", "avg_imag", "avg_modulus"])
        for r in self.rows:
            w.writerow([r.n, f"{r.real:.15e}", f"{r.imag:.15e}",
                        f"{r.modulus:.15e}"])
        atomic_write_text(Path(path), buf.getvalue())

    def write_json(self, path: str | Path) -> None:
        doc = {
            "schema_version": 1,
            "phase": self.phase,
            "weights": self.weights,
            "n_max": self.n_max,
            "tolerance": SUM_TOLERANCE,
            "checkpoints": [
                {"N": r.n, "real": r.real, "imag": r.imag,
                 "modulus": r.modulus}
                for r in self.rows
            ],
            **self.meta,
        }
        atomic_write_text(Path(path), json.dumps(doc, indent=2, sort_keys=True) + "\n")


def checkpoint_grid(n_max: int, count: int) -> list[int]:
    """`count` distinct log-spaced checkpoints in [1, n_max], ending at n_max."""
    if count < 1:
        raise ValueError("need at least one checkpoint")
    count = min(count, n_max)
    steps = max(count - 1, 1)
    pts = {min(max(int(round(n_max ** (i / steps))), 1), n_max)
           for i in range(count)}
    pts.add(n_max)
    n = 1
    while len(pts) < count and n <= n_max:  # pad after rounding collisions
        pts.add(n)
        n += 1
    return sorted(pts)


def weighted_average(
    weights: WeightTable,
    phase: Phase,
    n_max: int,
    checkpoints: int | Sequence[int] = 20,
) -> SumReport:
    """Checkpoint trace of (1/N) sum_{n=1..N} w(n) e(f(n))."""
    if n_max > weights.n_max:
        raise ValueError(
            f"n_max={n_max} exceeds weight table range {weights.n_max}"
        )
    cps = (checkpoint_grid(n_max, checkpoints)
           if isinstance(checkpoints, int) else sorted(set(checkpoints)))
    if not cps or cps[-1] > n_max or cps[0] < 1:
        raise ValueError("checkpoints must lie in [1, n_max]")
    phase.check_range(n_max)
    acc_re, acc_im = _Neumaier(), _Neumaier()
    rows: list[Checkpoint] = []
    prev = 1
    w = weights.values
    for cp in cps:
        for start in range(prev, cp + 1, _CHUNK):
            cnt = min(_CHUNK, cp + 1 - start)
            fr = phase.frac_chunk(start, cnt)
            ang = (2.0 * math.pi) * fr
            ws = w[start : start + cnt].astype(np.float64)
            acc_re.add(float(np.sum(ws * np.cos(ang))))
            acc_im.add(float(np.sum(ws * np.sin(ang))))
        prev = cp + 1
        rows.append(Checkpoint(cp, acc_re.value / cp, acc_im.value / cp))
    return SumReport(phase.describe(), weights.label, n_max, rows)


def blockwise_abs_average(
    weights: WeightTable,
    phase: Phase,
    breakpoints: Sequence[int],
) -> tuple[float, list[float]]:
    """(1/N_m) sum_i |sum_{N_i <= n < N_{i+1}} w(n) e(f(n))| over the given
    breakpoints N_0 < ... < N_m (the blockwise side of the short-interval
    equivalence; its partner is `short_interval_sup_average`)."""
    bps = [int(b) for b in breakpoints]
    if len(bps) < 2 or any(b >= a for b, a in zip(bps, bps[1:])):
        raise ValueError("need at least two increasing breakpoints")
    if bps[-1] - 1 > weights.n_max:
        raise ValueError("breakpoints exceed weight range")
    per_block = []
    w = weights.values
    for lo, hi in zip(bps, bps[1:]):
        lo = max(lo, 1)
        if hi <= lo:
            per_block.append(0.0)
            continue
        fr = phase.frac_chunk(lo, hi - lo)
        ang = 2.0 * math.pi * fr
        ws = w[lo:hi].astype(np.float64)
        per_block.append(abs(complex(np.sum(ws * np.cos(ang)),
                                     np.sum(ws * np.sin(ang)))))
    return sum(per_block) / bps[-1], per_block


def short_interval_sup_average(
    weights: WeightTable,
    family: Sequence[Phase],
    X: int,
    h: int,
) -> float:
    """(1/(X h)) sum_{x=X}^{2X-1} max_{p in family} |sum_{x<=n<x+h} w(n) e(p(n))|.

    The integral over x in [X, 2X] is discretized at unit steps (with integer
    h the integrand is a step function between integers).  Maximizing over a
    finite family yields a lower bound for the sup over all degree-<k
    polynomials; reports must label it as such.
    """
    if h < 1 or X < 1 or not family:
        raise ValueError("need h >= 1, X >= 1, nonempty family")
    top = 2 * X + h - 1  # largest n used is 2X - 1 + h - 1
    if top > weights.n_max:
        raise ValueError(f"need weights up to {top}, have {weights.n_max}")
    w = weights.values[X : top + 1].astype(np.float64)
    count = top + 1 - X
    best = np.zeros(X)
    for p in family:
        p.check_range(top)
        fr = p.frac_chunk(X, count)
        z = w * np.exp(2j * np.pi * fr)
        c = np.concatenate([[0.0 + 0.0j], np.cumsum(z)])
        win = np.abs(c[h:] - c[:-h])  # |sum over [x, x+h)| for x = X..
        np.maximum(best, win[:X], out=best)
    return float(best.sum()) / (X * h)


@dataclass
class ApCorrelation:
    value: float
    comparison: float  # (s/phi(s)) * log log h / log h
    s: int
    h: int
    n_max: int


def ap_correlation(
    weights: WeightTable,
    phase: Phase,
    s: int,
    h: int,
    n_max: int,
    phi_table: PhiTable | None = None,
) -> ApCorrelation:
    """(1/N) sum_{n=1..N} |(1/h) sum_{l=1..h} w(n+ls) e(f(n+ls))|^2.

    The report carries the comparison quantity (s/phi(s)) log log h / log h.
    """
    if s < 1 or h < 3:
        raise ValueError("need s >= 1 and h >= 3")
    top = n_max + h * s
    if top > weights.n_max:
        raise ValueError(f"need weights up to {top}, have {weights.n_max}")
    phase.check_range(top)
    z = np.zeros(top + 1, dtype=np.complex128)
    for start in range(1, top + 1, _CHUNK):
        cnt = min(_CHUNK, top + 1 - start)
        fr = phase.frac_chunk(start, cnt)
        ws = weights.values[start : start + cnt].astype(np.float64)
        z[start : start + cnt] = ws * np.exp(2j * np.pi * fr)
    acc = np.zeros(n_max, dtype=np.complex128)
    for l in range(1, h + 1):
        acc += z[1 + l * s : 1 + l * s + n_max]
    value = float(np.mean(np.abs(acc / h) ** 2))
    if phi_table is None or phi_table.n_max < s:
        phi_table = sieve_phi(s)
    comparison = (s / phi_table.value(s)) * math.log(math.log(h)) / math.log(h)
    return ApCorrelation(value, comparison, s, h, n_max)


def shift_self_correlation(values: Sequence[complex], shift: int, n_max: int) -> float:
    """(1/N) sum_{n=0}^{N-1} |g(n+shift) - g(n)|^2 over a complex table."""
    if shift < 0 or n_max < 1:
        raise ValueError("need shift >= 0, n_max >= 1")
    g = np.asarray(values, dtype=np.complex128)
    if n_max + shift > g.size:
        raise ValueError(f"table of {g.size} values cannot shift by {shift}")
    d = g[shift : shift + n_max] - g[:n_max]
    return float(np.mean(np.abs(d) ** 2))


def phase_table(phase: Phase, n_max: int) -> np.ndarray:
    """e(f(n)) for n = 0..n_max-1 as a complex table."""
    phase.check_range(n_max - 1)
    out = np.empty(n_max, dtype=np.complex128)
    for start in range(0, n_max, _CHUNK):
        cnt = min(_CHUNK, n_max - start)
        out[start : start + cnt] = np.exp(2j * np.pi * phase.frac_chunk(start, cnt))
    return out


# ---------------------------------------------------------------------------
# simultaneous Dirichlet approximation (brute force)


@dataclass
class DirichletWitness:
    t: int
    nearest: list[int]
    max_err: float
    strict: bool  # whether max_j ||t theta_j|| < 1/q strictly


def dirichlet_approx(
    thetas: Sequence, q: int, budget: int = 10 ** 7
) -> DirichletWitness:
    """Smallest t in [1, q^L] with max_j ||t theta_j|| < 1/q (strict), by
    brute-force scan; if no strict witness exists the smallest boundary case
    ||t theta_j|| = 1/q is returned (the pigeonhole guarantee is <= 1/q).

    The certificate is re-checkable: nearest[j] is the closest integer to
    t*theta_j and max_err the largest |t theta_j - nearest[j]|.
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    if not thetas:
        raise ValueError("need at least one theta")
    L = len(thetas)
    limit = q ** L
    if limit > budget:
        raise ResourceBudgetError(
            f"q^L = {limit} exceeds the scan budget {budget}; "
            f"reduce q or the number of thetas"
        )
    reps: list[tuple[int, int]] = []  # (numerator, unit): theta ~= num/unit
    for th in thetas:
        if isinstance(th, FixedReal):
            reps.append((th.mantissa, SCALE))
        else:
            fr = Fraction(th)
            reps.append((fr.numerator, fr.denominator))

    def distances(t: int) -> tuple[bool, bool, list[int], Fraction]:
        ok_strict, ok_weak = True, True
        nearest = []
        worst = Fraction(0)
        for num, unit in reps:
            v = t * num
            a = (2 * v + unit) // (2 * unit)  # nearest integer
            err = Fraction(abs(v - a * unit), unit)
            nearest.append(a)
            if err > worst:
                worst = err
            if err * q > 1:
                ok_strict = ok_weak = False
                break
            if err * q == 1:
                ok_strict = False
        return ok_strict, ok_weak, nearest, worst

    boundary: DirichletWitness | None = None
    for t in range(1, limit + 1):
        ok_strict, ok_weak, nearest, worst = distances(t)
        if ok_strict:
            return DirichletWitness(t, nearest, float(worst), True)
        if ok_weak and boundary is None:
            boundary = DirichletWitness(t, nearest, float(worst), False)
    if boundary is not None:
        return boundary
    raise ArithmeticError(
        "no witness within the pigeonhole range; this cannot happen"
    )
