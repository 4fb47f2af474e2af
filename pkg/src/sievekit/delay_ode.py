"""Solver for the sieve delay differential equation

    w j'(w) = kappa j(w) - kappa j(w - 1),
    j(w) = c_kappa w^kappa on (0, 1],   j(w) = 0 for w <= 0,

with c_kappa = exp(-gamma*kappa)/Gamma(kappa+1), plus the saddle-point
approximation to j'.

The solver tracks the normalized solution q = j/c_kappa through the
scaled variable g(w) = q(w) * w^(-kappa).  Method of steps: on each unit
interval (m, m+1] the delayed term is known and

    g(w) = g(m) - kappa * int_m^w t^(-kappa-1) q(t-1) dt

is evaluated by expanding the integrand in a Chebyshev basis and
integrating term by term.  g has O(1) relative variation per interval
for every kappa (q itself spans hundreds of orders of magnitude, which
is why a direct polynomial representation of q would lose all relative
accuracy at large kappa).  On (0, 1], g = 1 identically, so q = w^kappa
is represented exactly there.

Linear values of q overflow doubles once kappa*log(w) grows past ~709
(around kappa = 150); j and j' themselves stay O(1) and are always
computed through logs, and every evaluator has a log-scaled variant.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C

from .errors import OutOfRange, OutOfValidity, RangeOverflow, ToleranceNotMet

EULER_GAMMA = 0.5772156649015328606065120900824024

MAX_DEGREE = 256
# g(w_max) ~ exp((gamma-1)*kappa) underflows doubles near kappa ~ 1700.
MAX_KAPPA = 1500

_LOG_TINY = -745.0


@dataclass(frozen=True)
class CKappa:
    """log c_kappa and, when representable, its linear value."""

    log: float
    value: float | None


def c_kappa(kappa: int) -> CKappa:
    """c_kappa = exp(-gamma*kappa)/Gamma(kappa+1), computed in log domain."""
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    log_c = -EULER_GAMMA * kappa - math.lgamma(kappa + 1)
    return CKappa(log_c, math.exp(log_c) if log_c > _LOG_TINY else None)


@dataclass(frozen=True)
class SaddleParams:
    """Shift parameters for the saddle-point formula, u = kappa - 1/3 - d."""

    kappa: int
    d: float = -2.0 / 9.0

    def __post_init__(self):
        if self.u <= 0:
            raise ValueError("u = kappa - 1/3 - d must be positive")

    @property
    def u(self) -> float:
        return self.kappa - 1.0 / 3.0 - self.d


class JFunction:
    """Solved delay ODE on [0, w_max].

    Interval (m, m+1] stores Chebyshev coefficients of the scaled
    solution g(w) = q(w) * w^(-kappa); on (0, 1] the solution q = w^kappa
    is exact.  Instances are immutable after solve and cheap to evaluate.
    """

    __slots__ = ("kappa", "w_max", "tol", "degree", "log_c", "_coeffs")

    def __init__(self, kappa, w_max, tol, degree, log_c, coeffs):
        self.kappa = kappa
        self.w_max = w_max
        self.tol = tol
        self.degree = degree
        self.log_c = log_c
        self._coeffs = coeffs

    # -- scaled representation ------------------------------------------

    def _check(self, w: float):
        if w > self.w_max * (1.0 + 1e-12) + 1e-12:
            raise OutOfRange(f"w = {w} beyond solved range {self.w_max}")

    def _interval(self, w: float) -> int:
        m = int(math.ceil(w)) - 1
        return min(max(m, 1), len(self._coeffs))

    def g(self, w: float) -> float:
        """q(w) * w^(-kappa); equals 1 on (0, 1]."""
        self._check(w)
        if w <= 1.0:
            return 1.0
        m = self._interval(w)
        return float(C.chebval(2.0 * (w - m) - 1.0, self._coeffs[m - 1]))

    # -- normalized solution q = j / c_kappa -----------------------------

    def log_q(self, w: float) -> float:
        if w <= 0.0:
            return -math.inf
        self._check(w)
        if w <= 1.0:
            return self.kappa * math.log(w)
        return self.kappa * math.log(w) + math.log(self.g(w))

    def q(self, w: float) -> float:
        if w <= 0.0:
            return 0.0
        lq = self.log_q(w)
        if lq > 709.0:
            raise RangeOverflow("linear q overflows; use log_q")
        return math.exp(lq)

    def log_q_prime(self, w: float) -> float:
        """log of q'(w) = kappa*(q(w) - q(w-1))/w."""
        if w <= 0.0:
            return -math.inf if (w < 0.0 or self.kappa > 1) else 0.0
        self._check(w)
        if w <= 1.0:
            return math.log(self.kappa) + (self.kappa - 1) * math.log(w)
        lq, lqd = self.log_q(w), self.log_q(w - 1.0)
        if lqd == -math.inf:
            diff = lq
        else:
            ratio = lqd - lq
            if ratio >= 0.0:  # flat to machine precision
                return -math.inf
            diff = lq + math.log1p(-math.exp(ratio))
        return math.log(self.kappa) + diff - math.log(w)

    def q_prime(self, w: float) -> float:
        lqp = self.log_q_prime(w)
        if lqp > 709.0:
            raise RangeOverflow("linear q' overflows; use log_q_prime")
        return math.exp(lqp) if lqp > _LOG_TINY else 0.0

    # -- j itself ---------------------------------------------------------

    def log_j(self, w: float) -> float:
        return self.log_c + self.log_q(w)

    def j(self, w: float) -> float:
        lj = self.log_j(w)
        return math.exp(lj) if lj > _LOG_TINY else 0.0

    def log_j_prime(self, w: float) -> float:
        return self.log_c + self.log_q_prime(w)

    def j_prime(self, w: float) -> float:
        lj = self.log_j_prime(w)
        return math.exp(lj) if lj > _LOG_TINY else 0.0

    # -- diagnostics ------------------------------------------------------

    def representation_residual(self, w: float) -> float:
        """Relative DDE residual of the stored representation at w,

            (w q'_rep - kappa q + kappa q(w-1)) / (kappa q),

        where q'_rep differentiates the interval polynomial (the exposed
        q' uses the DDE identity itself and would be trivially exact).
        """
        self._check(w)
        if w <= 1.0:
            return 0.0
        m = self._interval(w)
        coeffs = self._coeffs[m - 1]
        x = 2.0 * (w - m) - 1.0
        g = float(C.chebval(x, coeffs))
        gp = 2.0 * float(C.chebval(x, C.chebder(coeffs)))
        # w*q'_rep - kappa*q = w^kappa * (w*gp)  after cancellation
        delay_scaled = math.exp(self.log_q(w - 1.0) - self.kappa * math.log(w))
        residual_scaled = w * gp + self.kappa * delay_scaled
        return residual_scaled / (self.kappa * g)

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "kappa": self.kappa,
            "w_max": self.w_max,
            "tol": self.tol,
            "degree": self.degree,
            "log_c": self.log_c,
            "coeffs": [c.tolist() for c in self._coeffs],
        }

    @classmethod
    def from_json(cls, data: dict) -> "JFunction":
        return cls(
            int(data["kappa"]),
            float(data["w_max"]),
            float(data["tol"]),
            int(data["degree"]),
            float(data["log_c"]),
            [np.asarray(c, dtype=float) for c in data["coeffs"]],
        )


def _solve_interval(kappa, m, coeffs, g_left, n):
    """Chebyshev coefficients of g on [m, m+1] plus a truncation estimate."""
    nodes = np.cos(np.pi * (2.0 * np.arange(n + 1) + 1.0) / (2.0 * (n + 1)))
    t = m + 0.5 * (nodes + 1.0)
    if m == 1:
        g_prev = np.ones_like(t)
    else:
        # t - 1 lies in [m-1, m]; local coordinate of that interval
        g_prev = C.chebval(2.0 * (t - m) - 1.0, coeffs[m - 2])
    with np.errstate(under="ignore"):
        integrand = np.exp(kappa * np.log1p(-1.0 / t) - np.log(t)) * g_prev
    fc = C.chebfit(nodes, integrand, n)
    hc = 0.5 * C.chebint(fc)
    gc = -kappa * hc
    gc[0] += g_left + kappa * float(C.chebval(-1.0, hc))
    tail = abs(fc[-1]) + abs(fc[-2])
    return gc, kappa * tail


def solve_j(kappa: int, w_max: float, tol: float = 1e-10, degree: int = 32,
            cache_dir: str | None = None) -> JFunction:
    """Solve the delay ODE for j_kappa on [0, w_max] by method of steps.

    Each unit interval is solved by Chebyshev collocation of the scaled
    update; the degree escalates (up to 256) until the truncation
    estimate drops below tol relative to g, else ToleranceNotMet.
    ``cache_dir`` enables a JSON cache keyed by (kappa, w_max, tol,
    degree).
    """
    kappa = int(kappa)
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    if kappa > MAX_KAPPA:
        raise RangeOverflow(f"kappa > {MAX_KAPPA}: scaled solution underflows")
    if not 1.0 <= w_max <= kappa + 2.0 + 1e-9:
        raise ValueError("need 1 <= w_max <= kappa + 2")
    if degree < 4:
        raise ValueError("degree must be >= 4")

    cache_path = None
    if cache_dir is not None:
        key = f"jfun_k{kappa}_w{w_max:.6g}_t{tol:.3g}_d{degree}.json"
        cache_path = os.path.join(cache_dir, key)
        if os.path.exists(cache_path):
            with open(cache_path) as fh:
                return JFunction.from_json(json.load(fh))

    n_intervals = max(int(math.ceil(w_max)) - 1, 0)
    coeffs: list[np.ndarray] = []
    g_left = 1.0
    max_deg = degree
    for m in range(1, n_intervals + 1):
        n = degree
        while True:
            gc, err = _solve_interval(kappa, m, coeffs, g_left, n)
            g_right = float(C.chebval(1.0, gc))
            if err <= tol * max(abs(g_left), abs(g_right)):
                break
            if n >= MAX_DEGREE:
                raise ToleranceNotMet(
                    f"interval ({m},{m+1}]: estimate {err:.3g} above tol at degree {n}")
            n *= 2
        max_deg = max(max_deg, n)
        coeffs.append(gc)
        g_left = g_right

    jf = JFunction(kappa, float(w_max), tol, max_deg, c_kappa(kappa).log, coeffs)
    if cache_path is not None:
        os.makedirs(cache_dir, exist_ok=True)
        with open(cache_path, "w") as fh:
            json.dump(jf.to_json(), fh)
    return jf


def eval_j(J: JFunction, w: float, order: int = 0, scale: str = "linear"):
    """j (order 0) or j' (order 1) at w; zero for w <= 0, OutOfRange
    beyond w_max.  scale="log" returns the natural log (-inf at zeros)."""
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    if scale not in ("linear", "log"):
        raise ValueError("scale must be 'linear' or 'log'")
    if order == 0:
        return J.j(w) if scale == "linear" else J.log_j(w)
    return J.j_prime(w) if scale == "linear" else J.log_j_prime(w)


def saddle_j_prime(sp: SaddleParams, w: float) -> tuple[float, float]:
    """Main term of the saddle-point formula for j'(u - w), u = kappa-1/3-d:

        (pi*kappa)^(-1/2) exp(-w^2/kappa) (1 - 2dw/kappa - (4/9)w^3/kappa^2)

    valid for 0 <= w <= kappa^(3/5).  Returns (value, envelope) where
    envelope = (1/kappa + w^6/kappa^4)/sqrt(pi*kappa) is the shape of the
    neglected remainder (its absolute constant is calibrated in tests,
    not claimed).
    """
    k = sp.kappa
    if w < 0.0 or w > k ** 0.6:
        raise OutOfValidity(f"saddle formula needs 0 <= w <= kappa^(3/5) = {k ** 0.6:.3f}")
    base = math.exp(-w * w / k) / math.sqrt(math.pi * k)
    value = base * (1.0 - 2.0 * sp.d * w / k - (4.0 / 9.0) * w ** 3 / k ** 2)
    envelope = (1.0 / k + w ** 6 / k ** 4) / math.sqrt(math.pi * k)
    return value, envelope


@dataclass(frozen=True)
class TailReport:
    """Grid check of j(u-w) <= exp(-w^2/kappa) on (kappa^(3/5), u]."""

    max_violation: float
    worst_w: float | None
    n_checked: int


def tail_check(J: JFunction, u: float, n_grid: int = 512) -> TailReport:
    """Verify the tail inequality j(u-w) <= exp(-w^2/kappa) on a grid
    over (kappa^(3/5), u].  max_violation <= 0 means no violation."""
    if u > J.w_max * (1.0 + 1e-12):
        raise OutOfRange("u beyond solved range")
    k = J.kappa
    lo = k ** 0.6
    if lo >= u:
        return TailReport(-math.inf, None, 0)
    ws = np.linspace(lo, u, n_grid + 1)[1:]
    worst = -math.inf
    worst_w = None
    for w in ws:
        viol = J.j(u - float(w)) - math.exp(-float(w) ** 2 / k)
        if viol > worst:
            worst = viol
            worst_w = float(w)
    return TailReport(worst, worst_w, len(ws))
