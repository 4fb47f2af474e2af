"""Integer substrate: linear-form systems, local densities, multiplicative
functions f and f', singular products, Mertens-type sums and prime tables.

A system is a product of integer linear forms a_i*n + b_i.  The local
density rho(d) counts roots of the product mod d; for squarefree d it is
multiplicative, and f(d) = d/rho(d), f' = f * mu (Dirichlet convolution
on squarefree arguments, so f'(p) = f(p) - 1).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import (
    DensityZero,
    GcdViolation,
    LimitTooLarge,
    ZeroDiscriminant,
    ZeroFactor,
    ZeroValue,
)

# Residue scanning below this bound doubles as an oracle for the
# root-solving path (cross-checked in the test suite).
_SCAN_LIMIT = 50

DEFAULT_TABLE_CAP = 200_000_000

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@dataclass(frozen=True)
class LinearSystem:
    """Validated product of linear forms with cached discriminant."""

    forms: tuple[tuple[int, int], ...]
    kappa: int
    delta: int

    def value(self, n: int) -> int:
        """Product of all form values at n."""
        out = 1
        for a, b in self.forms:
            out *= a * n + b
        return out

    def label(self) -> str:
        if all(a == 1 for a, _ in self.forms):
            return "{" + ",".join(str(b) for _, b in self.forms) + "}"
        return str(list(map(list, self.forms)))


@dataclass(frozen=True)
class AdmissibilityReport:
    """Result of the rho(p) < p check.

    ``admissible`` covers the primes p <= kappa required by the sieve
    hypothesis.  ``extended_ok`` additionally covers every prime dividing
    the discriminant; since rho(p) <= kappa < p for p > kappa this extra
    check can never fail, but it is reported separately.
    """

    admissible: bool
    failing_prime: int | None
    extended_ok: bool
    extended_failing_prime: int | None
    checked_primes: tuple[int, ...]


def build_system(forms) -> LinearSystem:
    """Validate a list of (a, b) pairs and return a LinearSystem.

    Raises GcdViolation when some gcd(a_i, b_i) != 1 and ZeroDiscriminant
    when the discriminant vanishes (covers a_i = 0 and repeated or
    proportional forms).
    """
    if not forms:
        raise ValueError("need at least one linear form")
    canon = []
    for a, b in forms:
        a, b = int(a), int(b)
        if math.gcd(a, b) != 1:
            raise GcdViolation(f"gcd({a},{b}) = {math.gcd(a, b)} != 1")
        canon.append((a, b))
    delta = _discriminant(canon)
    if delta == 0:
        raise ZeroDiscriminant("discriminant is zero (zero or proportional forms)")
    return LinearSystem(tuple(canon), len(canon), delta)


def _discriminant(forms) -> int:
    d = 1
    for a, _ in forms:
        d *= a
    for t in range(len(forms)):
        at, bt = forms[t]
        for s in range(t + 1, len(forms)):
            a_s, b_s = forms[s]
            d *= at * b_s - a_s * bt
    return d


def discriminant(L: LinearSystem) -> int:
    """Exact discriminant prod a_i * prod_{t<s} (a_t b_s - a_s b_t)."""
    return L.delta


def from_offsets(offsets) -> LinearSystem:
    """System with forms n + h for each offset h."""
    return build_system([(1, int(h)) for h in offsets])


def parse_tuple_spec(text: str) -> LinearSystem:
    """Parse a tuple spec: a JSON file path, inline JSON {"forms": ...},
    or the shorthand "0,2,6" meaning forms n + h_i."""
    text = text.strip()
    if os.path.exists(text):
        with open(text) as fh:
            data = json.load(fh)
        return build_system(data["forms"])
    if text.startswith("{"):
        return build_system(json.loads(text)["forms"])
    return from_offsets(int(part) for part in text.split(","))


@lru_cache(maxsize=None)
def _rho_prime(L: LinearSystem, p: int) -> int:
    if p <= _SCAN_LIMIT:
        return sum(1 for n in range(p) if L.value(n) % p == 0)
    return len(_roots_mod_prime(L, p))


def _roots_mod_prime(L: LinearSystem, p: int):
    """Distinct roots of L(n) = 0 mod p.

    A form with p | a_i contributes no root: gcd(a_i, b_i) = 1 forces
    p to miss b_i, so a_i*n + b_i is never divisible by p.
    """
    roots = set()
    for a, b in L.forms:
        if a % p == 0:
            continue
        roots.add((-b) * pow(a, -1, p) % p)
    return sorted(roots)


def rho(L: LinearSystem, d: int, tables: "ArithmeticTables | None" = None) -> int:
    """Number of n mod d with L(n) = 0 (mod d).

    Multiplicative over the prime factors for squarefree d; rho(1) = 1.
    Non-squarefree d falls back to a direct root count mod d (documented
    extension used only by diagnostics, e.g. checking rho(p^2) bounds).
    """
    d = int(d)
    if d < 1:
        raise ValueError("modulus must be positive")
    if d == 1:
        return 1
    factors = factorize(d)
    if all(e == 1 for _, e in factors):
        out = 1
        for p, _ in factors:
            out *= _rho_prime(L, p)
        return out
    return sum(1 for n in range(d) if L.value(n) % d == 0)


def roots_mod_squarefree(L: LinearSystem, d: int) -> list[int]:
    """All residues c mod squarefree d with L(c) = 0 (mod d), via CRT."""
    if d == 1:
        return [0]
    roots = [0]
    mod = 1
    for p, e in factorize(d):
        if e > 1:
            raise ValueError("modulus must be squarefree")
        proots = _roots_mod_prime(L, p)
        if p <= _SCAN_LIMIT:
            proots = [n for n in range(p) if L.value(n) % p == 0]
        new = []
        inv = pow(mod, -1, p)
        for r in roots:
            for rp in proots:
                # n = r (mod mod), n = rp (mod p)
                t = ((rp - r) * inv) % p
                new.append(r + mod * t)
        roots = new
        mod *= p
    return sorted(roots)


def is_admissible(L: LinearSystem) -> AdmissibilityReport:
    """Check rho(p) < p for all primes p <= kappa (sieve hypothesis).

    Primes dividing the discriminant are checked as well and reported
    separately; for p > kappa the bound rho(p) <= kappa < p makes that
    part automatic.
    """
    failing = None
    small = [p for p in _primes_upto_list(max(L.kappa, 2)) if p <= L.kappa]
    for p in small:
        if _rho_prime(L, p) >= p:
            failing = p
            break
    ext_failing = None
    delta_primes = sorted({p for p, _ in factorize(abs(L.delta))})
    for p in delta_primes:
        if _rho_prime(L, p) >= p:
            ext_failing = p
            break
    checked = tuple(sorted(set(small) | set(delta_primes)))
    return AdmissibilityReport(
        admissible=failing is None,
        failing_prime=failing,
        extended_ok=ext_failing is None,
        extended_failing_prime=ext_failing,
        checked_primes=checked,
    )


def f_values(L: LinearSystem, d: int) -> tuple[Fraction, Fraction]:
    """Exact (f(d), f'(d)) for squarefree d: f(d) = d/rho(d),
    f'(d) = prod_{p|d} (f(p) - 1)."""
    if d == 1:
        return Fraction(1), Fraction(1)
    f = Fraction(1)
    fp = Fraction(1)
    for p, e in factorize(d):
        if e > 1:
            raise ValueError("f is defined on squarefree arguments")
        r = _rho_prime(L, p)
        if r == 0:
            raise DensityZero(f"rho({p}) = 0")
        f *= Fraction(p, r)
        fp *= Fraction(p, r) - 1
    return f, fp


def V_product(L: LinearSystem, z: float, exact: bool = False,
              tables: "ArithmeticTables | None" = None):
    """Singular product prod_{p<z} (1 - rho(p)/p).

    Strictly positive for admissible systems; raises ZeroFactor when some
    rho(p) = p.  Float by default, exact Fraction on request.
    """
    primes = _primes_below(z, tables)
    if exact:
        out = Fraction(1)
        for p in primes:
            r = _rho_prime(L, int(p))
            if r == p:
                raise ZeroFactor(f"rho({p}) = {p}")
            out *= Fraction(p - r, p)
        return out
    out = 1.0
    for p in primes:
        r = _rho_prime(L, int(p))
        if r == p:
            raise ZeroFactor(f"rho({p}) = {p}")
        out *= 1.0 - r / p
    return out


def H_sum(L: LinearSystem, s: float,
          tables: "ArithmeticTables | None" = None) -> tuple[float, float]:
    """Weighted Mertens sum sum_{p<s} rho(p) log(p)/p.

    Returns (value, residual) where residual = value - kappa*log(s);
    the residual stays O(1) because rho(p) = kappa for all but finitely
    many primes.
    """
    primes = _primes_below(s, tables)
    value = math.fsum(_rho_prime(L, int(p)) * math.log(p) / p for p in primes)
    return value, value - L.kappa * math.log(s)


def omega_L(L: LinearSystem, n: int,
            tables: "ArithmeticTables | None" = None) -> int:
    """Omega(|L(n)|): prime factors of the product counted with
    multiplicity.  Raises ZeroValue when a form vanishes at n."""
    total = 0
    for a, b in L.forms:
        v = a * n + b
        if v == 0:
            raise ZeroValue(f"form {a}*n+{b} vanishes at n={n}")
        total += omega(abs(v), tables)
    return total


def omega(m: int, tables: "ArithmeticTables | None" = None) -> int:
    """Omega(m) for m >= 1, with multiplicity."""
    if m < 1:
        raise ValueError("omega needs a positive integer")
    count = 0
    if tables is not None and m <= tables.limit:
        lpf = tables.least_prime_factor
        while m > 1:
            m //= int(lpf[m])
            count += 1
        return count
    for _, e in factorize(m):
        count += e
    return count


# ----------------------------------------------------------------------
# factorization / primality helpers

def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for 64-bit-ish integers."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    x0, c = 2, 1
    while True:
        x = y = x0
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
        x0 += 1
        c += 1


def factorize(n: int) -> list[tuple[int, int]]:
    """Sorted (prime, exponent) pairs of |n|, n != 0."""
    n = abs(int(n))
    if n == 0:
        raise ValueError("cannot factor 0")
    out = {}
    for p in (2, 3, 5):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    d = 7
    wheel = (4, 2, 4, 2, 4, 6, 2, 6)
    i = 0
    while d * d <= n and d < 100_000:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += wheel[i]
        i = (i + 1) % 8
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_rho(m)
        stack.append(d)
        stack.append(m // d)
    return sorted(out.items())


# ----------------------------------------------------------------------
# sieve tables

@dataclass(frozen=True)
class ArithmeticTables:
    """Sieve output up to ``limit`` (inclusive): ascending primes,
    least-prime-factor array and Moebius array."""

    limit: int
    primes: np.ndarray
    least_prime_factor: np.ndarray
    moebius: np.ndarray

    def mu(self, d: int) -> int:
        return int(self.moebius[d])

    def is_squarefree(self, d: int) -> bool:
        return self.moebius[d] != 0

    def nu(self, d: int) -> int:
        """Number of distinct prime factors, from the lpf table."""
        count = 0
        lpf = self.least_prime_factor
        while d > 1:
            p = int(lpf[d])
            count += 1
            while d % p == 0:
                d //= p
        return count


def arithmetic_tables(limit: int, cap: int = DEFAULT_TABLE_CAP) -> ArithmeticTables:
    """Sieve primes, least prime factors and Moebius values up to limit."""
    limit = int(limit)
    if limit < 2:
        raise ValueError("limit must be >= 2")
    if limit > cap:
        raise LimitTooLarge(f"limit {limit} exceeds cap {cap}")
    lpf = np.zeros(limit + 1, dtype=np.int64)
    for p in range(2, limit + 1):
        if lpf[p] == 0:
            sl = lpf[p::p]
            sl[sl == 0] = p
    primes = np.flatnonzero(lpf[2:] == np.arange(2, limit + 1)) + 2
    mu = np.ones(limit + 1, dtype=np.int8)
    mu[0] = 0
    for p in primes:
        mu[p::p] *= -1
        if p * p <= limit:
            mu[p * p::p * p] = 0
    return ArithmeticTables(limit, primes.astype(np.int64), lpf, mu)


@lru_cache(maxsize=64)
def _primes_upto_list(limit: int) -> tuple[int, ...]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, int(limit ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = b"\x00" * len(sieve[p * p::p])
    return tuple(i for i in range(2, limit + 1) if sieve[i])


def _primes_below(z: float, tables: "ArithmeticTables | None" = None):
    """Primes strictly below z."""
    if z <= 2:
        return ()
    hi = int(math.ceil(z)) - 1 if float(z).is_integer() else int(math.floor(z))
    if tables is not None and tables.limit >= hi:
        return tuple(int(p) for p in tables.primes[tables.primes <= hi])
    return tuple(p for p in _primes_upto_list(hi))
