"""Exact Omega histograms over n <= x for a linear-form product.

Responsibility: empirical counting only.  Each segment sieves the form
values by every prime up to sqrt(max |value|): the residue classes
hit by a form are marked and divided out with multiplicity, and any
leftover cofactor > 1 is prime.  This is exact, not probabilistic.
Segments are independent, so threading changes nothing but wall time.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .arithmetic import LinearSystem, arithmetic_tables
from .errors import BudgetExceeded

DEFAULT_X_CAP = 100_000_000
DEFAULT_SEGMENT = 1 << 17


@dataclass(frozen=True)
class OmegaHistogram:
    """counts[k] = #{n <= x : L(n) != 0, Omega(L(n)) = k}; n with
    L(n) = 0 are excluded and counted separately."""

    L: LinearSystem
    x: int
    counts: dict[int, int]
    excluded: int

    def total(self) -> int:
        return sum(self.counts.values()) + self.excluded

    def count_at_most(self, r: int) -> int:
        return sum(c for k, c in self.counts.items() if k <= r)


def _segment_histogram(L: LinearSystem, lo: int, hi: int, primes: np.ndarray):
    """Histogram of Omega(L(n)) for n in [lo, hi)."""
    n = np.arange(lo, hi, dtype=np.int64)
    omega_total = np.zeros(hi - lo, dtype=np.int32)
    zero_any = np.zeros(hi - lo, dtype=bool)
    for a, b in L.forms:
        vals = a * n + b
        av = np.abs(vals)
        zero = av == 0
        zero_any |= zero
        residual = np.where(zero, np.int64(1), av)
        omega = np.zeros(hi - lo, dtype=np.int32)
        vmax = int(residual.max(initial=1))
        for p in primes:
            p = int(p)
            if p * p > vmax:
                break
            if a % p == 0:
                continue  # gcd(a,b)=1 keeps p away from every value
            c = (-b) * pow(a % p, -1, p) % p
            off = (c - lo) % p
            idx = np.arange(off, hi - lo, p, dtype=np.int64)
            if idx.size == 0:
                continue
            cur = idx[residual[idx] % p == 0]
            while cur.size:
                residual[cur] //= p
                omega[cur] += 1
                cur = cur[residual[cur] % p == 0]
        omega += residual > 1
        omega_total += omega
    keep = ~zero_any
    hist = np.bincount(omega_total[keep])
    counts = Counter({k: int(v) for k, v in enumerate(hist) if v})
    return counts, int(zero_any.sum())


def omega_profile(L: LinearSystem, x: int, segment_size: int = DEFAULT_SEGMENT,
                  threads: int = 1, x_cap: int = DEFAULT_X_CAP) -> OmegaHistogram:
    """Exact histogram of Omega(L(n)) over 1 <= n <= x.

    Deterministic regardless of segment size or thread count: segment
    results are integer counters merged by addition.
    """
    x = int(x)
    if x < 0:
        raise ValueError("x must be >= 0")
    if x > x_cap:
        raise BudgetExceeded(f"x = {x} above cap {x_cap}")
    if x == 0:
        return OmegaHistogram(L, 0, {}, 0)
    vmax = 1
    for a, b in L.forms:
        vmax = max(vmax, abs(a * 1 + b), abs(a * x + b))
    primes = arithmetic_tables(max(math.isqrt(vmax) + 1, 3)).primes
    spans = [(lo, min(lo + segment_size, x + 1))
             for lo in range(1, x + 1, segment_size)]
    counts = Counter()
    excluded = 0
    if threads <= 1:
        results = [_segment_histogram(L, lo, hi, primes) for lo, hi in spans]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                lambda span: _segment_histogram(L, span[0], span[1], primes), spans))
    for c, ex in results:
        counts.update(c)
        excluded += ex
    return OmegaHistogram(L, x, dict(sorted(counts.items())), excluded)


def count_at_most(L: LinearSystem, x: int, r: int, **kwargs) -> int:
    """#{n <= x : L(n) != 0 and Omega(L(n)) <= r}."""
    return omega_profile(L, x, **kwargs).count_at_most(r)


@dataclass(frozen=True)
class DensityReport:
    """Almost-prime count against the x/log^kappa(x) comparator.  The
    ratio carries no pass/fail semantics; its trend across x is the
    interesting output."""

    L_label: str
    x: int
    r: int
    count: int
    comparator: float
    ratio: float

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True)


def density_report(L: LinearSystem, x: int, r: int, **kwargs) -> DensityReport:
    if x < 3:
        raise ValueError("x must be >= 3")
    count = count_at_most(L, x, r, **kwargs)
    comparator = x / math.log(x) ** L.kappa
    return DensityReport(L.label(), x, r, count, comparator, count / comparator)


def histogram_to_csv(hist: OmegaHistogram) -> str:
    lines = ["omega,count"]
    lines += [f"{k},{v}" for k, v in sorted(hist.counts.items())]
    return "\n".join(lines) + "\n"
