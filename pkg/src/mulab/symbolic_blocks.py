"""Block extraction and entropy estimation for finite-range sequences.

For a finite prefix s(0..P-1) over a small alphabet, four families of
length-J windows are counted:

* all blocks         windows at every start <= P-J
* regular blocks     windows at starts l*J
* effective blocks   blocks occurring at least `threshold` times (finite
                     surrogate for "occurs infinitely often")
* regularly effective    regular blocks recurring at least `threshold`
                     times among the regular positions

The counts are exact (hashed tuples of symbols, no approximate matching);
the per-J entropy estimates log|B_J|/J are finite-prefix estimates, which
the report rows label explicitly.  Scans are pure functions of the
immutable prefix; counting unions over disjoint start ranges commute, so
callers may shard long prefixes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from ._util import atomic_write_text
from .errors import PrecisionError, WindowTooShortError
from .exact_calculus import frac_part
from .fixedpoint import FRAC_BITS, SCALE, FixedReal, sqrt_const
from .phases import Phase

Block = tuple[int, ...]


@dataclass
class SymbolSeq:
    """Finite prefix of a sequence over the alphabet {0..alphabet_size-1}."""

    symbols: np.ndarray
    alphabet_size: int

    def __post_init__(self) -> None:
        self.symbols = np.asarray(self.symbols)
        if self.symbols.ndim != 1 or self.symbols.size < 1:
            raise ValueError("symbols must be a nonempty 1-d array")
        if self.alphabet_size < 1:
            raise ValueError("alphabet_size must be >= 1")
        if int(self.symbols.min()) < 0 or int(self.symbols.max()) >= self.alphabet_size:
            raise ValueError("symbol outside alphabet range")

    @staticmethod
    def from_list(symbols: Sequence[int], alphabet_size: int) -> "SymbolSeq":
        dtype = np.uint8 if alphabet_size <= 256 else np.int64
        return SymbolSeq(np.array(symbols, dtype=dtype), alphabet_size)

    def __len__(self) -> int:
        return int(self.symbols.size)


def save_symbols(seq: SymbolSeq, data_path: str | Path) -> Path:
    """Raw byte file plus JSON header `<data_path>.json`."""
    data_path = Path(data_path)
    if seq.alphabet_size > 256:
        raise ValueError("raw byte export needs alphabet_size <= 256")
    data_path.write_bytes(seq.symbols.astype(np.uint8).tobytes())
    header = {
        "schema_version": 1,
        "alphabet_size": seq.alphabet_size,
        "length": len(seq),
        "data": data_path.name,
    }
    hdr = data_path.with_suffix(data_path.suffix + ".json")
    hdr.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    return hdr


def load_symbols(header_path: str | Path) -> SymbolSeq:
    header_path = Path(header_path)
    header = json.loads(header_path.read_text())
    data = (header_path.parent / header["data"]).read_bytes()
    arr = np.frombuffer(data, dtype=np.uint8)
    if arr.size != header["length"]:
        raise ValueError(
            f"{header_path}: header says {header['length']} symbols, "
            f"file holds {arr.size}"
        )
    return SymbolSeq(arr.copy(), int(header["alphabet_size"]))


# ---------------------------------------------------------------------------
# window counting


def _window_code_counts(
    symbols: np.ndarray, J: int, starts: np.ndarray, base: int
) -> dict[Block, int]:
    """Exact occurrence counts of the J-windows at the given starts."""
    if starts.size == 0:
        return {}
    if base ** J < 1 << 62:
        codes = np.zeros(symbols.size - J + 1, dtype=np.int64)
        s64 = symbols.astype(np.int64)
        for j in range(J):
            codes = codes * base + s64[j : symbols.size - J + 1 + j]
        uniq, counts = np.unique(codes[starts], return_counts=True)
        out = {}
        for code, cnt in zip(uniq.tolist(), counts.tolist()):
            block = []
            for _ in range(J):
                code, r = divmod(code, base)
                block.append(r)
            out[tuple(reversed(block))] = cnt
        return out
    windows = np.lib.stride_tricks.sliding_window_view(symbols, J)[starts]
    rows = np.ascontiguousarray(windows)
    uniq, counts = np.unique(
        rows.view([("", rows.dtype)] * J), return_counts=True
    )
    return {
        tuple(int(v) for v in row): int(cnt)
        for row, cnt in zip(uniq.tolist(), counts.tolist())
    }


@dataclass
class BlockIndex:
    """The four window families of one prefix at window length J."""

    J: int
    prefix_len: int
    threshold: int
    tail_start: int
    all_blocks: dict[Block, int]
    regular_blocks: dict[Block, int]
    effective_blocks: dict[Block, int]
    regularly_effective_blocks: dict[Block, int]

    def counts(self) -> tuple[int, int, int, int]:
        return (
            len(self.all_blocks),
            len(self.regular_blocks),
            len(self.effective_blocks),
            len(self.regularly_effective_blocks),
        )


def index_blocks(
    seq: SymbolSeq,
    J: int,
    effective_threshold: int = 2,
    tail_start: int = 0,
) -> BlockIndex:
    """Exact counts of the four J-block families on the prefix.

    "Effective" is finitely surrogated by an occurrence count of at least
    `effective_threshold`; `tail_start` restricts counted occurrences to
    starts >= tail_start.  Both knobs are echoed in the result.
    """
    P = len(seq)
    if not 1 <= J <= P:
        raise WindowTooShortError(f"need 1 <= J <= {P}, got {J}")
    if effective_threshold < 2:
        raise ValueError("effective_threshold must be >= 2")
    if not 0 <= tail_start <= P - J:
        raise ValueError("tail_start outside the prefix")
    base = seq.alphabet_size
    starts_all = np.arange(tail_start, P - J + 1)
    first_reg = ((tail_start + J - 1) // J) * J
    starts_reg = np.arange(first_reg, P - J + 1, J)
    all_counts = _window_code_counts(seq.symbols, J, starts_all, base)
    reg_counts = _window_code_counts(seq.symbols, J, starts_reg, base)
    eff = {b: c for b, c in all_counts.items() if c >= effective_threshold}
    reg_eff = {b: c for b, c in reg_counts.items() if c >= effective_threshold}
    return BlockIndex(
        J, P, effective_threshold, tail_start,
        all_counts, reg_counts, eff, reg_eff,
    )


@dataclass
class EntropyRow:
    J: int
    count_all: int
    count_regular: int
    count_effective: int
    count_reg_effective: int
    entropy_estimate: float  # log|B_J|/J on the finite prefix


def entropy_curve(
    seq: SymbolSeq,
    J_max: int,
    effective_threshold: int = 2,
    tail_start: int = 0,
) -> list[EntropyRow]:
    """Per-J counts of all four families plus the finite-prefix estimate
    log|B_J|/J.  These are prefix estimates of a limit, reported side by
    side; no equality between the four columns is asserted."""
    if J_max > len(seq):
        raise WindowTooShortError("J_max exceeds the prefix length")
    rows = []
    for J in range(1, J_max + 1):
        idx = index_blocks(seq, J, effective_threshold, tail_start)
        a, r, e, re_ = idx.counts()
        rows.append(EntropyRow(J, a, r, e, re_, math.log(a) / J))
    return rows


def write_entropy_csv(rows: Sequence[EntropyRow], path: str | Path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        ["J", "count_all", "count_regular", "count_effective",
         "count_reg_effective", "entropy_estimate"]
    )
    for r in rows:
        w.writerow(
            [r.J, r.count_all, r.count_regular, r.count_effective,
             r.count_reg_effective, f"{r.entropy_estimate:.10f}"]
        )
    atomic_write_text(Path(path), buf.getvalue())


def block_count_inequality_check(seq: SymbolSeq, J: int, l: int) -> bool:
    """Check |B_{lJ}| <= J * |B_J^r|^(l+1) on the edge-safe prefix region.

    Left-side windows are drawn only from starts <= P - (l+1)J so every one
    of them is covered by l+1 successive regular J-blocks inside the prefix.
    Always true; returned rather than asserted so callers can tabulate.
    """
    P = len(seq)
    if l < 1 or J < 1:
        raise ValueError("need J >= 1, l >= 1")
    if (l + 1) * J > P:
        raise WindowTooShortError("window (l+1)*J exceeds the prefix")
    starts_left = np.arange(0, P - (l + 1) * J + 1)
    left = len(_window_code_counts(seq.symbols, l * J, starts_left, seq.alphabet_size))
    reg = index_blocks(seq, J).regular_blocks
    return left <= J * len(reg) ** (l + 1)


# ---------------------------------------------------------------------------
# quantization


def quantize_gn(y_values: Sequence, N: int) -> SymbolSeq:
    """Symbol t = floor(N * {y}), alphabet {0..N-1}.

    {y} in [t/N, (t+1)/N) maps to t; the boundary {y} = t/N belongs to cell
    t exactly when y is exact (Fraction or dyadic FixedReal).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    syms = []
    for y in y_values:
        if isinstance(y, FixedReal):
            t = (N * y.frac_mantissa()) >> FRAC_BITS
        elif isinstance(y, Fraction):
            f = frac_part(y)
            t = (N * f.numerator) // f.denominator
        elif isinstance(y, int):
            t = 0
        else:
            t = int(N * (y - math.floor(y)))
        syms.append(min(t, N - 1))
    return SymbolSeq.from_list(syms, N)


# ---------------------------------------------------------------------------
# the comparison-set indicator and its block growth


@dataclass
class IndicatorReport:
    length: int
    tie_count: int
    tie_positions: list[int]
    tie_bits: int
    phase1: str
    phase2: str


def indicator_set(
    p1: Phase, p2: Phase, P: int, tie_bits: int = 64
) -> tuple[SymbolSeq, IndicatorReport]:
    """Binary prefix of 1_{ {p1(n)} < {p2(n)} } for n = 0..P-1.

    Comparison is exact on the representations; positions where the two
    fractional parts agree to within 2^-tie_bits are flagged in the report
    rather than silently resolved.  Raises PrecisionError when the
    representation error itself cannot support the comparison.
    """
    if P < 1:
        raise ValueError("P must be >= 1")
    for ph in (p1, p2):
        bound = ph.err_bound(P - 1)
        if bound > 2.0 ** -tie_bits:
            need = FRAC_BITS + math.ceil(math.log2(bound / 2.0 ** -tie_bits))
            raise PrecisionError(
                f"{ph.describe()}: representation error {bound:.3e} at "
                f"n={P - 1} cannot support {tie_bits}-bit comparisons; "
                f"about {need} fractional bits would be required"
            )
    u1, it1 = p1.frac_units(0, P)
    u2, it2 = p2.frac_units(0, P)
    syms = np.zeros(P, dtype=np.uint8)
    ties: list[int] = []
    if u1 == u2:
        tie_gap = u1 >> tie_bits
        for n, (a, b) in enumerate(zip(it1, it2)):
            d = a - b
            if d < 0:
                syms[n] = 1
            if -tie_gap < d < tie_gap:
                ties.append(n)
    else:
        tie_gap = u1 * u2 >> tie_bits
        for n, (a, b) in enumerate(zip(it1, it2)):
            d = a * u2 - b * u1
            if d < 0:
                syms[n] = 1
            if -tie_gap < d < tie_gap:
                ties.append(n)
    report = IndicatorReport(
        P, len(ties), ties[:64], tie_bits, p1.describe(), p2.describe()
    )
    return SymbolSeq(syms, 2), report


def indicator_block_bound(J: int, k: int) -> int:
    """Proved polynomial bound 8^(2k) (2k+1) 2^(2k) (k+2)^(2k) J^(2k(k+1))
    for the number of J-blocks of a comparison-set indicator built from two
    polynomials of degree < k."""
    return 8 ** (2 * k) * (2 * k + 1) * 2 ** (2 * k) * (k + 2) ** (2 * k) \
        * J ** (2 * k * (k + 1))


# ---------------------------------------------------------------------------
# the bracket-product second difference, label by label


@dataclass
class Example33Report:
    length: int
    case_counts: tuple[int, int, int, int]
    max_residual: float
    argmax: int
    tie_count: int
    partition_ok: bool


def bracket_second_difference_labels(P: int) -> tuple[SymbolSeq, Example33Report]:
    """Label n by the ordering of {sqrt2 n}, {sqrt2(n+1)}, {sqrt2(n+2)} and
    check the matching piecewise formula for the second difference of
    f(n) = sqrt3 * n * {sqrt2 n}.

    Cases (symbols 1..4):
      1: {s2(n+2)} > {s2(n+1)} > {s2 n}        D2 f = 2 sqrt3 (sqrt2 - 1)
      2: {s2(n+2)} < {s2(n+1)} < {s2 n}        D2 f = 2 sqrt3 (sqrt2 - 2)
      3: {s2(n+2)} > {s2(n+1)}, {s2(n+1)} < {s2 n}   ... + sqrt3 * n
      4: {s2(n+2)} < {s2(n+1)}, {s2(n+1)} > {s2 n}   ... - sqrt3 * n

    Returns the labels and a report with the maximum |D2 f(n) - formula(n)|
    over n < P, evaluated in 96-fractional-bit fixed point.
    """
    if P < 3:
        raise ValueError("need P >= 3")
    s2, s3 = sqrt_const(2), sqrt_const(3)
    two_s3 = s3.mul_int(2)
    a1 = two_s3 * (s2 - FixedReal.from_fraction(1))  # 2 sqrt3 (sqrt2 - 1)
    a2 = two_s3 * (s2 - FixedReal.from_fraction(2))  # 2 sqrt3 (sqrt2 - 2)

    def f_val(n: int, frac_m: int) -> FixedReal:
        return s3.mul_int(n) * FixedReal(frac_m, s2.err_ulp * n)

    labels = np.zeros(P, dtype=np.uint8)
    counts = [0, 0, 0, 0]
    ties = 0
    ok = True
    worst = -1
    worst_n = 0
    fm = [(s2.mantissa * n) % SCALE for n in range(3)]
    fv = [f_val(n, fm[n]) for n in range(3)]
    step = s2.mantissa
    for n in range(P):
        c0, c1, c2 = fm[0], fm[1], fm[2]
        if c0 == c1 or c1 == c2:
            ties += 1
            ok = False
            label = 0
        elif c2 > c1 and c1 > c0:
            label = 1
        elif c2 < c1 and c1 < c0:
            label = 2
        elif c2 > c1 and c1 < c0:
            label = 3
        else:
            label = 4
        labels[n] = label
        if label:
            counts[label - 1] += 1
            d2 = fv[2] - fv[1] - fv[1] + fv[0]
            if label == 1:
                formula = a1
            elif label == 2:
                formula = a2
            elif label == 3:
                formula = a1 + s3.mul_int(n)
            else:
                formula = a2 - s3.mul_int(n)
            resid = abs(d2.mantissa - formula.mantissa)
            if resid > worst:
                worst, worst_n = resid, n
        if n + 3 < P + 2:
            nxt = (fm[2] + step) % SCALE
            fm = [fm[1], fm[2], nxt]
            fv = [fv[1], fv[2], f_val(n + 3, nxt)]
    report = Example33Report(
        P, tuple(counts), worst / SCALE, worst_n, ties, ok
    )
    return SymbolSeq(labels, 5), report
