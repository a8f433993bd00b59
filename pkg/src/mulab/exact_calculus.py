"""Exact-rational difference calculus.

Everything in this module works on plain sequences of `fractions.Fraction`
and performs no rounding anywhere; it is the oracle layer the floating-point
modules are tested against.  Sequences are windows indexed from 0; the
absolute position of the window is the caller's bookkeeping.  Every
function is pure on immutable inputs: results are bit-identical no matter
how calls are scheduled across threads or processes.

The k-th forward difference of f is
    (D^k f)(n) = sum_{l=0..k} (-1)^(k-l) C(k,l) f(n+l),
its inverse (up to an initial value) is the running sum `sigma`, and the
unique degree-<k polynomial through k window values is recovered by
`lagrange_poly`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, lcm
from typing import Iterable, Sequence

from .errors import WindowTooShortError

RationalLike = Fraction | int | str
RationalSeq = list[Fraction]


def as_fractions(values: Iterable[RationalLike]) -> RationalSeq:
    """Coerce a sequence of ints/strings/Fractions to exact Fractions."""
    return [Fraction(v) for v in values]


def frac_part(x: Fraction) -> Fraction:
    """Exact fractional part {x} in [0, 1)."""
    return x - (x.numerator // x.denominator)


@dataclass(frozen=True)
class RationalPoly:
    """Univariate polynomial with exact rational coefficients, ascending degree.

    The zero polynomial has degree -1 (empty coefficient tuple).
    """

    coeffs: tuple[Fraction, ...]

    @staticmethod
    def from_coeffs(coeffs: Iterable[RationalLike]) -> "RationalPoly":
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        return RationalPoly(tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: RationalLike) -> Fraction:
        x = Fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def window(self, length: int) -> RationalSeq:
        """Evaluations at 0..length-1."""
        return [self(n) for n in range(length)]


def diff(seq: Sequence[RationalLike], k: int) -> RationalSeq:
    """k-th difference of a window, by the closed binomial formula.

    Returns the length-(J-k) sequence; agrees exactly with k applications
    of the one-step difference.
    """
    xs = as_fractions(seq)
    if k < 0:
        raise ValueError("k must be >= 0")
    if k >= len(xs):
        raise WindowTooShortError(
            f"k-th difference needs window length > k ({k} >= {len(xs)})"
        )
    if k == 0:
        return xs
    weights = [(-1) ** (k - l) * comb(k, l) for l in range(k + 1)]
    return [
        sum((w * xs[n + l] for l, w in enumerate(weights)), Fraction(0))
        for n in range(len(xs) - k)
    ]


def sigma(seq: Sequence[RationalLike], initial: RationalLike = 0) -> RationalSeq:
    """Running-sum inverse of the one-step difference.

    g(0) = initial and g(n+1) = g(n) + f(n), so the output has one more
    entry than the input and diff(sigma(f, c), 1) == f exactly.
    """
    out = [Fraction(initial)]
    for v in seq:
        out.append(out[-1] + Fraction(v))
    return out


def lagrange_poly(values: Sequence[RationalLike]) -> RationalPoly:
    """The unique degree-<k polynomial q with q(j) = values[j], j = 0..k-1.

    Built from the product form sum_j f(j) prod_{i != j} (y - i)/(j - i).
    """
    vals = as_fractions(values)
    k = len(vals)
    if k == 0:
        raise ValueError("lagrange_poly needs at least one value")
    total = [Fraction(0)] * k
    for j, fj in enumerate(vals):
        if fj == 0:
            continue
        num = [Fraction(1)]
        den = 1
        for i in range(k):
            if i == j:
                continue
            # multiply num by (y - i)
            nxt = [Fraction(0)] * (len(num) + 1)
            for d, c in enumerate(num):
                nxt[d] -= c * i
                nxt[d + 1] += c
            num = nxt
            den *= j - i
        scale = fj / den
        for d, c in enumerate(num):
            total[d] += scale * c
    return RationalPoly.from_coeffs(total)


@lru_cache(maxsize=1 << 16)
def lagrange_coeff(n: int, j: int, k: int) -> int:
    """The integer prod_{0<=i<k, i != j} (n - i)/(j - i).

    Equals 1 at n = j, 0 at the other interpolation nodes 0..k-1, and the
    signed double-binomial closed form for n >= k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0 <= j <= k - 1:
        raise ValueError(f"j must lie in [0, {k - 1}], got {j}")
    num = 1
    den = 1
    for i in range(k):
        if i == j:
            continue
        num *= n - i
        den *= j - i
    q, r = divmod(num, den)
    if r:
        raise ArithmeticError("lagrange coefficient was not an integer")
    return q


def reconstruct_coeffs(j: int, k: int) -> list[int]:
    """Coefficients a_k..a_j with
    sum_l a_l (D^k f)(n+l-k) = f(n+j) - sum_m f(n+m) prod_{i != m} (j-i)/(m-i)
    for every f and n.  a_l = C(j-l+k-1, k-1), and 0 <= a_l <= j^(k-1).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if j < k:
        raise ValueError(f"need j >= k, got j={j}, k={k}")
    return [comb(j - l + k - 1, k - 1) for l in range(k, j + 1)]


def value_bound(k: int, c: RationalLike, j: int) -> Fraction:
    """The window-growth bound (k+1) * j^k * c."""
    c = Fraction(c)
    if c <= 0:
        raise ValueError("c must be positive")
    if j < k:
        raise ValueError("need j >= k")
    return (k + 1) * Fraction(j) ** k * c


def value_bound_holds(seq: Sequence[RationalLike], k: int, c: RationalLike) -> bool:
    """Checker for the growth bound on a window satisfying its hypotheses.

    Hypotheses: (a) |D^k f(j)| <= c on the window, (b) f(j) in [0, c] for
    j < k.  Raises ValueError when they fail (the bound says nothing then);
    otherwise reports whether |f(j)| <= (k+1) j^k c for j = k..J-1.
    """
    xs = as_fractions(seq)
    c = Fraction(c)
    if c <= 0:
        raise ValueError("c must be positive")
    if len(xs) <= k:
        raise WindowTooShortError("window must be longer than k")
    if any(not (0 <= xs[j] <= c) for j in range(k)):
        raise ValueError("hypothesis (b) violated: initial values outside [0, c]")
    if any(abs(d) > c for d in diff(xs, k)):
        raise ValueError("hypothesis (a) violated: |D^k f| exceeds c")
    return all(abs(xs[j]) <= value_bound(k, c, j) for j in range(k, len(xs)))


def frac_diff_equivalence(xs: Sequence[RationalLike], k: int) -> tuple[bool, bool]:
    """Evaluate the two equivalent fractional-part conditions on a window.

    (i)  {sum_l (-1)^(k-l) C(k,l) {x_{n+l}}} = 0 for n = 0..J-1-k;
    (ii) {x_n} = {sum_j {x_j} prod_{i != j} (n-i)/(j-i)} for n = 0..J-1.

    Both are decided in exact integer arithmetic on a common denominator;
    the two booleans are provably always equal.
    """
    vals = [x if isinstance(x, Fraction) else Fraction(x) for x in xs]
    J = len(vals)
    if not J > k >= 0:
        raise ValueError(f"need len(xs) > k >= 0, got J={J}, k={k}")
    fr = [frac_part(x) for x in vals]
    d = lcm(*(f.denominator for f in fr))
    a = [f.numerator * (d // f.denominator) for f in fr]  # {x_i} scaled by d
    weights = [(-1) ** (k - l) * comb(k, l) for l in range(k + 1)]
    cond1 = all(
        sum(w * a[n + l] for l, w in enumerate(weights)) % d == 0
        for n in range(J - k)
    )
    # n < k is the interpolation-node range where (ii) holds identically
    cond2 = all(
        (sum(a[j] * lagrange_coeff(n, j, k) for j in range(k)) - a[n]) % d == 0
        for n in range(k, J)
    )
    return cond1, cond2


def extend_y(
    init: Sequence[RationalLike],
    g_vals: Sequence[RationalLike],
    m_len: int,
) -> RationalSeq:
    """Forward solution Y of D^k Y(j) = g(j) with Y(0..k-1) = init.

    The j-th unknown enters with coefficient C(k,k) = 1, so the linear
    system is solved by forward substitution, never by matrix inversion.
    With g = 0 this reproduces the Lagrange extension of the initial values.
    """
    init = as_fractions(init)
    g = as_fractions(g_vals)
    k = len(init)
    if m_len < k:
        raise ValueError(f"m_len must be >= k = {k}")
    if len(g) < m_len - k:
        raise WindowTooShortError(
            f"need at least {m_len - k} g-values, got {len(g)}"
        )
    if k == 0:
        return g[: m_len]
    y = list(init)
    low_weights = [(-1) ** (k - l) * comb(k, l) for l in range(k)]
    for n in range(m_len - k):
        y.append(g[n] - sum((w * y[n + l] for l, w in enumerate(low_weights)), Fraction(0)))
    return y[: m_len]
