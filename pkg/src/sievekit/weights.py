"""Richert weights, Selberg lambda/zeta weight systems, and the exact
decomposition of the weighted sieve sum into main and remainder terms.

The lambda system lives on the squarefree support {nu : nu | P(z'),
nu < xi}.  The dual coordinates zeta are defined by

    mu(r) zeta_r / f'(r) = sum_{d < xi/r} lambda_{dr} / f(dr)

and inverted by

    mu(d) lambda_d / f(d) = sum_{r < xi/d} zeta_{dr} / f'(dr).

For a concrete instance A = {L(n) : n <= x} the weighted sum

    sum_n (sum_{d|L(n), d|P(z)} a_d) (sum_{nu|L(n), nu|P(z')} lambda_nu)^2

decomposes exactly as x*S + E with S the zeta-diagonalized main term and
E the remainder sum over exact R_d = |A_d| - x rho(d)/d.  The identity
is linear in the a_d, so exact mode snapshots any real weights into
dyadic rationals and verifies a residual of exactly zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .arithmetic import (
    LinearSystem,
    _primes_below,
    _rho_prime,
    f_values,
    is_prime,
    roots_mod_squarefree,
    V_product,
)
from .errors import (
    BudgetExceeded,
    DivisionByZero,
    DomainError,
    SupportEmpty,
    ZeroFactor,
)
from .moments import SievePolynomial

SUPPORT_NODE_BUDGET = 10_000_000
GSUM_NODE_BUDGET = 100_000_000

try:
    import numba as _numba
    import numpy as _np
except Exception:  # pragma: no cover
    _numba = None


# ----------------------------------------------------------------------
# Richert weights


@dataclass(frozen=True)
class RichertWeights:
    """Logarithmic weights: b at 1, -b at primes below y,
    -log(z/d)/log(z) at primes in [y, z), zero elsewhere."""

    b: float
    y: float
    z: float

    def __post_init__(self):
        if self.b <= 0:
            raise DomainError("b must be positive")
        if not (1.0 < self.y <= self.z):
            raise DomainError("need 1 < y <= z")


def richert_a(W: RichertWeights, d: int) -> float:
    """Weight a_d per the four-case definition."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if d == 1:
        return W.b
    if not is_prime(d) or d >= W.z:
        return 0.0
    if d < W.y:
        return -W.b
    return -math.log(W.z / d) / math.log(W.z)


# ----------------------------------------------------------------------
# squarefree support enumeration


def support_elements(xi: float, z_prime: float,
                     budget: int = SUPPORT_NODE_BUDGET) -> list[tuple[int, tuple[int, ...]]]:
    """Squarefree m < xi with all prime factors < z', as (m, primes)
    pairs sorted by m.  DFS over ascending primes; BudgetExceeded when
    the lattice has more than ``budget`` nodes."""
    if xi <= 1:
        raise SupportEmpty("xi <= 1 leaves no support")
    primes = [p for p in _primes_below(min(z_prime, xi))]
    out = [(1, ())]
    stack = [(1, (), 0)]
    while stack:
        m, pf, i = stack.pop()
        for k in range(i, len(primes)):
            p = primes[k]
            mp = m * p
            if mp >= xi:
                break
            out.append((mp, pf + (p,)))
            if len(out) > budget:
                raise BudgetExceeded("support lattice above node budget")
            stack.append((mp, pf + (p,), k + 1))
    out.sort()
    return out


# ----------------------------------------------------------------------
# lambda / zeta systems


@dataclass
class LambdaSystem:
    """zeta/lambda weight pair over the squarefree support.

    Values are Fractions in exact mode, floats otherwise.  lambda_1 != 0
    is required; normalized() returns lambda'_nu = lambda_nu / lambda_1.
    """

    L: LinearSystem
    xi: float
    z_prime: float
    support: tuple[int, ...]
    zeta: dict
    lam: dict
    exact: bool

    def normalized(self) -> dict:
        l1 = self.lam[1]
        if l1 == 0:
            raise DivisionByZero("lambda_1 = 0")
        return {nu: v / l1 for nu, v in self.lam.items()}

    def to_json(self) -> dict:
        def enc(v):
            return str(v) if isinstance(v, Fraction) else v
        return {
            "forms": [list(f) for f in self.L.forms],
            "xi": self.xi,
            "z_prime": self.z_prime,
            "exact": self.exact,
            "support": list(self.support),
            "zeta": {str(m): enc(v) for m, v in self.zeta.items()},
            "lambda": {str(m): enc(v) for m, v in self.lam.items()},
        }


def _f_tables(L, support_factored, exact):
    """Per-element f and f' over the support, exact or float."""
    f = {}
    fp = {}
    for m, pf in support_factored:
        if m == 1:
            f[1] = Fraction(1) if exact else 1.0
            fp[1] = Fraction(1) if exact else 1.0
            continue
        fm, fpm = f_values(L, m)
        if fpm == 0:
            raise DivisionByZero(f"f'({m}) = 0")
        f[m] = fm if exact else float(fm)
        fp[m] = fpm if exact else float(fpm)
    return f, fp


def _divisors_from_primes(pf):
    divs = [1]
    for p in pf:
        divs += [d * p for d in divs]
    return divs


def zeta_from_poly(P: SievePolynomial, xi: float, z_prime: float,
                   exact: bool = False) -> dict:
    """zeta_r = P(log(xi/r)/log z') over the support.  In exact mode the
    float value is snapshotted into a dyadic rational so the inversion
    relations can be verified exactly."""
    u = math.log(xi) / math.log(z_prime)
    if P.u < u * (1.0 - 1e-12):
        raise DomainError(f"P defined on [0,{P.u}] but u = {u:.6g}")
    out = {}
    for m, _ in support_elements(xi, z_prime):
        w = math.log(xi / m) / math.log(z_prime)
        val = P.star(w)
        out[m] = Fraction(val) if exact else val
    return out


def lambda_from_zeta(L: LinearSystem, xi: float, z_prime: float, zeta: dict,
                     exact: bool = True) -> dict:
    """Invert mu(d) lambda_d / f(d) = sum_{r < xi/d} zeta_{dr}/f'(dr)."""
    sf = support_elements(xi, z_prime)
    f, fp = _f_tables(L, sf, exact)
    acc = {m: (Fraction(0) if exact else 0.0) for m, _ in sf}
    for m, pf in sf:
        term = zeta[m] / fp[m]
        for d in _divisors_from_primes(pf):
            acc[d] += term
    lam = {}
    for m, pf in sf:
        mu = -1 if len(pf) % 2 else 1
        lam[m] = mu * f[m] * acc[m]
    return lam


def zeta_from_lambda(L: LinearSystem, xi: float, z_prime: float, lam: dict,
                     exact: bool = True) -> dict:
    """The defining direction mu(r) zeta_r / f'(r) = sum lambda_{dr}/f(dr)."""
    sf = support_elements(xi, z_prime)
    f, fp = _f_tables(L, sf, exact)
    acc = {m: (Fraction(0) if exact else 0.0) for m, _ in sf}
    for m, pf in sf:
        term = lam[m] / f[m]
        for r in _divisors_from_primes(pf):
            acc[r] += term
    zeta = {}
    for m, pf in sf:
        mu = -1 if len(pf) % 2 else 1
        zeta[m] = mu * fp[m] * acc[m]
    return zeta


def build_lambda_system(L: LinearSystem, xi: float, z_prime: float,
                        zeta=None, P: SievePolynomial | None = None,
                        exact: bool = True) -> LambdaSystem:
    """Assemble a LambdaSystem from explicit zeta values, a polynomial
    (zeta_r = P(log(xi/r)/log z')), or the classical choice zeta = 1
    when neither is given."""
    sf = support_elements(xi, z_prime)
    support = tuple(m for m, _ in sf)
    if zeta is None and P is not None:
        zeta = zeta_from_poly(P, xi, z_prime, exact=exact)
    elif zeta is None:
        one = Fraction(1) if exact else 1.0
        zeta = {m: one for m in support}
    elif not isinstance(zeta, dict):
        zeta = {m: zeta(m) for m in support}
    lam = lambda_from_zeta(L, xi, z_prime, zeta, exact=exact)
    if lam[1] == 0:
        raise DivisionByZero("lambda_1 = 0")
    return LambdaSystem(L, xi, z_prime, support, dict(zeta), lam, exact)


# ----------------------------------------------------------------------
# G sums


def G_sum(L: LinearSystem, r: float, z_prime: float, exact: bool = False,
          budget: int | None = None):
    """G(r, z') = sum over squarefree m < r, m | P(z'), of 1/f'(m).

    Exact Fraction mode enumerates the support; float mode runs an
    iterative DFS (numba-accelerated when available)."""
    if r <= 1:
        raise SupportEmpty("r <= 1 leaves no support")
    if exact:
        total = Fraction(0)
        for m, _ in support_elements(r, z_prime, budget or SUPPORT_NODE_BUDGET):
            total += 1 / f_values(L, m)[1]
        return total
    primes = [p for p in _primes_below(min(z_prime, r))]
    wts = []
    for p in primes:
        rho_p = _rho_prime(L, p)
        if rho_p == p:
            raise ZeroFactor(f"rho({p}) = {p}: f'({p}) = 0 pole")
        wts.append(rho_p / (p - rho_p))  # 1/f'(p)
    budget = budget or GSUM_NODE_BUDGET
    if _numba is not None and len(primes) > 25:
        total, nodes = _gsum_numba(
            _np.asarray(primes, dtype=_np.float64),
            _np.asarray(wts, dtype=_np.float64),
            float(r), budget)
        if math.isnan(total):
            raise BudgetExceeded("G-sum DFS above node budget")
        return float(total)
    return _gsum_python(primes, wts, r, budget)


def _gsum_python(primes, wts, cap, budget):
    total = 1.0  # m = 1 term
    nodes = 1
    n = len(primes)
    stack = [(0, 1.0, 1.0)]
    while stack:
        i0, m, w = stack.pop()
        for i in range(i0, n):
            mp = m * primes[i]
            if mp >= cap:
                break
            wp = w * wts[i]
            total += wp
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded("G-sum DFS above node budget")
            stack.append((i + 1, mp, wp))
    return total


if _numba is not None:
    @_numba.njit(cache=False)
    def _gsum_numba(primes, wts, cap, budget):  # pragma: no cover - thin kernel
        n = primes.shape[0]
        total = 1.0
        nodes = 1
        stack_i = _np.zeros(64, dtype=_np.int64)
        stack_m = _np.ones(64, dtype=_np.float64)
        stack_w = _np.ones(64, dtype=_np.float64)
        top = 0
        stack_i[0] = 0
        while top >= 0:
            i = stack_i[top]
            m = stack_m[top]
            w = stack_w[top]
            if i >= n or m * primes[i] >= cap:
                top -= 1
                continue
            stack_i[top] = i + 1
            mp = m * primes[i]
            wp = w * wts[i]
            total += wp
            nodes += 1
            if nodes > budget:
                return _np.nan, nodes
            top += 1
            stack_i[top] = i + 1
            stack_m[top] = mp
            stack_w[top] = wp
        return total, nodes


def g_sum_report(L: LinearSystem, r: float, z_prime: float, J) -> dict:
    """Compare G(r, z') with its sieve-density approximation
    j_kappa(log r/log z') / V(z')."""
    g = G_sum(L, r, z_prime)
    tau = math.log(r) / math.log(z_prime)
    v = V_product(L, z_prime)
    approx = J.j(tau) / v
    return {"G": g, "tau": tau, "V": v, "approx": approx, "ratio": g / approx}


# ----------------------------------------------------------------------
# concrete instances and the exact decomposition


@dataclass(frozen=True)
class SieveInstance:
    """A = {L(n) : 1 <= n <= x} with exact remainders
    R_d = |A_d| - x*rho(d)/d for squarefree d."""

    L: LinearSystem
    x: int

    def count_multiples(self, d: int) -> int:
        """|A_d| = #{n <= x : L(n) = 0 mod d}, counted by residue class."""
        if d == 1:
            return self.x
        total = 0
        for c in roots_mod_squarefree(self.L, d):
            if c == 0:
                total += self.x // d
            elif c <= self.x:
                total += (self.x - c) // d + 1
        return total

    def remainder(self, d: int) -> Fraction:
        """Exact R_d = |A_d| - x*rho(d)/d."""
        from .arithmetic import rho
        return self.count_multiples(d) - Fraction(self.x * rho(self.L, d), d)


@dataclass(frozen=True)
class Decomposition:
    """Exact split lhs = x*main + error plus the residual of the identity."""

    lhs: object
    main: object
    error: object
    residual: object
    mode: str


def _exact_weight(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(float(v))


def s_main(inst_or_L, W: RichertWeights, S: LambdaSystem,
           exact: bool = True, relaxed: bool = False):
    """Main term: sum over support m and d in {1} u {primes < z},
    (d, m) = 1 unless relaxed, of  (1/f'(m)) (a_d/f(d))
    (sum_{r|d} mu(r) zeta_{rm})^2.

    The relaxed variant drops the coprimality condition; with Richert
    weights the dropped terms are non-positive, so relaxed <= strict."""
    L = inst_or_L.L if isinstance(inst_or_L, SieveInstance) else inst_or_L
    sf = support_elements(S.xi, S.z_prime)
    f, fp = _f_tables(L, sf, exact)
    zeta = S.zeta
    zero = Fraction(0) if exact else 0.0
    primes_z = [p for p in _primes_below(W.z)]
    a_vals = {1: _exact_weight(W.b) if exact else W.b}
    for p in primes_z:
        a = richert_a(W, p)
        if a != 0.0:
            a_vals[p] = _exact_weight(a) if exact else a
    f_of_p = {}
    for p in primes_z:
        fv, _ = f_values(L, p)
        f_of_p[p] = fv if exact else float(fv)
    terms = []
    for m, pf in sf:
        zm = zeta[m]
        # d = 1
        terms.append(a_vals[1] * zm * zm / fp[m])
        for p in primes_z:
            if p not in a_vals:
                continue
            if not relaxed and m % p == 0:
                continue
            if relaxed and m % p == 0:
                inner = zm  # zeta_{pm} vanishes: pm is not squarefree
            else:
                inner = zm - zeta.get(p * m, zero)
            terms.append(a_vals[p] / f_of_p[p] * inner * inner / fp[m])
    if exact:
        return sum(terms, Fraction(0))
    return math.fsum(terms)


def e_error(inst: SieveInstance, W: RichertWeights, S: LambdaSystem,
            exact: bool = True, budget: int = SUPPORT_NODE_BUDGET):
    """Remainder term sum_{d, nu1, nu2} a_d lambda_nu1 lambda_nu2
    R_[d,nu1,nu2], grouped by the joint modulus m = [d, nu1, nu2]."""
    d_list = [(1, _exact_weight(W.b) if exact else W.b)]
    for p in _primes_below(W.z):
        a = richert_a(W, p)
        if a != 0.0:
            d_list.append((p, _exact_weight(a) if exact else a))
    lam = S.lam
    support = S.support
    if len(support) ** 2 * len(d_list) > budget:
        raise BudgetExceeded("error-term triple sum above budget")
    coeff = {}
    zero = Fraction(0) if exact else 0.0
    for n1 in support:
        l1 = lam[n1]
        for n2 in support:
            l12 = l1 * lam[n2]
            nn = n1 * n2 // math.gcd(n1, n2)
            for d, a in d_list:
                m = nn if nn % d == 0 else nn * d
                coeff[m] = coeff.get(m, zero) + a * l12
    terms = []
    for m, cval in sorted(coeff.items()):
        rm = inst.remainder(m)
        terms.append(cval * (rm if exact else float(rm)))
    if exact:
        return sum(terms, Fraction(0))
    return math.fsum(terms)


def weighted_sum_direct(inst: SieveInstance, W: RichertWeights, S: LambdaSystem,
                        exact: bool = True):
    """Left side by exhaustive enumeration over n <= x."""
    L = inst.L
    primes_z = [(p, _exact_weight(richert_a(W, p)) if exact else richert_a(W, p))
                for p in _primes_below(W.z) if richert_a(W, p) != 0.0]
    b = _exact_weight(W.b) if exact else W.b
    lam = S.lam
    support = S.support
    zero = Fraction(0) if exact else 0.0
    total = zero
    terms = []
    for n in range(1, inst.x + 1):
        v = L.value(n)
        av = abs(v)
        a_sum = b
        for p, ap in primes_z:
            if av % p == 0:
                a_sum = a_sum + ap
        l_sum = zero
        for nu in support:
            if av % nu == 0:
                l_sum = l_sum + lam[nu]
        terms.append(a_sum * l_sum * l_sum)
    if exact:
        return sum(terms, Fraction(0))
    return math.fsum(terms)


def decompose(inst: SieveInstance, W: RichertWeights, S: LambdaSystem,
              exact: bool = True, x_cap: int = 1_000_000) -> Decomposition:
    """Evaluate both sides of the sieve identity on a concrete instance.

    Returns (lhs, main, error, residual) with residual =
    lhs - (x*main + error); exactly zero in exact mode."""
    if inst.x > x_cap:
        raise BudgetExceeded(f"x = {inst.x} above enumeration cap {x_cap}")
    if S.z_prime > W.z:
        raise DomainError("need z' <= z")
    lhs = weighted_sum_direct(inst, W, S, exact=exact)
    main = s_main(inst, W, S, exact=exact)
    err = e_error(inst, W, S, exact=exact)
    residual = lhs - (inst.x * main + err)
    return Decomposition(lhs, main, err, residual, "exact" if exact else "float")


def error_bound_analytic(L: LinearSystem, z: float, xi: float) -> float:
    """Crude analytic envelope z * xi^2 / V(z)^7 for the remainder term."""
    v = V_product(L, z)
    return z * xi * xi / v ** 7


def lambda_system_to_json(S: LambdaSystem, path: str | None = None) -> str:
    text = json.dumps(S.to_json(), indent=1, sort_keys=True)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
