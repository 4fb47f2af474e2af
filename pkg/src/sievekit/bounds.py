"""Parameter selection and the r_kappa bound table.

The explicit bound is the smallest integer r exceeding

    (1/2) k log k + (1 + gamma/2 + log 4) k + (13/18) sqrt(k/pi)

(plus an optional slack * log k modelling the unstated O-constant),
subject to the structural floor r > 2k - 10/9.  The numeric bound drives
the same positivity condition

    b(r) * I1 - kappa * I2 - kappa * I3 > 0,    b(r) = r + 1 - kappa*(1 + 2u/l),

directly from quadrature of the solved delay ODE, with the canonical
choices u = kappa - 1/9, l = 2*kappa and P = 1 unless overridden.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .delay_ode import EULER_GAMMA, JFunction, solve_j
from .errors import InfeasibleB
from .moments import MainIntegrals, SievePolynomial, main_integrals

LINEAR_COEFF = 1.0 + EULER_GAMMA / 2.0 + math.log(4.0)

DDE_KAPPA_CAP = 120


@dataclass(frozen=True)
class SieveParameters:
    """Exponent bookkeeping (x is never instantiated): y = x^(1/alpha),
    z = x^(1/U), z' = x^(1/V), xi = z'^u."""

    kappa: int
    u: float
    l: float
    U: float
    V: float
    alpha: float
    delta: float
    eps: float
    b: float
    r: int

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in
                ("kappa", "u", "l", "U", "V", "alpha", "delta", "eps", "b", "r")}


def choose_params(kappa: int, r: int, delta: float = 0.0, eps: float = 0.0,
                  alpha: float | None = None) -> SieveParameters:
    """Canonical parameters u = kappa - 1/9, l = 2*kappa, U = 1 + 2u/l
    (+delta), V = l*U, b = r + 1 - (kappa + eps)*U.

    delta and eps are the vanishing slacks; they default to 0 and are
    exposed for sensitivity runs.  Raises InfeasibleB when b <= 0, which
    for zero slacks happens exactly when r <= 2*kappa - 10/9."""
    if kappa < 2:
        raise ValueError("kappa must be >= 2")
    u = kappa - 1.0 / 9.0
    l = 2.0 * kappa
    U = 1.0 + 2.0 * u / l + delta
    V = l * U
    b = r + 1.0 - (kappa + eps) * U
    if b <= 0.0:
        raise InfeasibleB(f"b = {b:.6g} <= 0 for r = {r} (floor 2k-10/9 = {2*kappa-10/9:.4f})")
    if alpha is None:
        # p^2-removal needs 1/U < 1 - 1/alpha; keep a comfortable margin
        alpha = 10.0 * U / (U - 1.0)
    if 1.0 / U >= 1.0 - 1.0 / alpha:
        raise ValueError("alpha too small: need 1/U < 1 - 1/alpha")
    if u > l:
        raise ValueError("need u <= l")
    return SieveParameters(kappa, u, l, U, V, alpha, delta, eps, b, int(r))


def explicit_terms(kappa: int) -> tuple[float, float, float]:
    """The three displayed main terms of the bound."""
    return (0.5 * kappa * math.log(kappa),
            LINEAR_COEFF * kappa,
            (13.0 / 18.0) * math.sqrt(kappa / math.pi))


def r_floor(kappa: int) -> int:
    """Smallest integer r with r > 2*kappa - 10/9."""
    return math.floor(2.0 * kappa - 10.0 / 9.0) + 1


def r_bound_explicit(kappa: int, slack: float = 0.0) -> int:
    """Smallest integer strictly above the displayed main terms plus
    slack*log(kappa), never below the floor r > 2*kappa - 10/9."""
    if kappa < 2:
        raise ValueError("kappa must be >= 2")
    t1, t2, t3 = explicit_terms(kappa)
    bound = t1 + t2 + t3 + slack * math.log(kappa)
    return max(math.floor(bound) + 1, r_floor(kappa))


@dataclass(frozen=True)
class NumericBound:
    """Positivity threshold computed from quadrature."""

    kappa: int
    u: float
    l: float
    r: int
    integrals: MainIntegrals
    b_needed: float

    def b(self, r: int) -> float:
        return r + 1.0 - self.kappa * (1.0 + 2.0 * self.u / self.l)

    def margin(self, r: int) -> float:
        i = self.integrals
        return self.b(r) * i.i1 - self.kappa * (i.i2 + i.i3)

    def margin_samples(self, lo_off: int = -2, hi_off: int = 5) -> list[tuple[int, float]]:
        return [(r, self.margin(r)) for r in range(self.r + lo_off, self.r + hi_off + 1)]


def r_bound_numeric(kappa: int, l: float | None = None, u: float | None = None,
                    P: SievePolynomial | None = None, J: JFunction | None = None,
                    atol: float = 1e-8) -> NumericBound:
    """Smallest integer r with positive margin b(r)*I1 - kappa*(I2+I3),
    margin strictly increasing in r since I1 > 0."""
    if kappa < 2:
        raise ValueError("kappa must be >= 2")
    if u is None:
        u = kappa - 1.0 / 9.0
    if l is None:
        l = 2.0 * kappa
    if P is None:
        P = SievePolynomial.one(u)
    if J is None:
        J = solve_j(kappa, max(u, 1.0))
    ints = main_integrals(kappa, u, l, P, J=J, atol=atol)
    b_needed = kappa * (ints.i2 + ints.i3) / ints.i1
    # b(r) = r + 1 - kappa(1 + 2u/l) > b_needed
    r_min = math.floor(b_needed - 1.0 + kappa * (1.0 + 2.0 * u / l)) + 1
    return NumericBound(kappa, u, l, r_min, ints, b_needed)


@dataclass(frozen=True)
class BoundRow:
    kappa: int
    r_explicit: int
    r_numeric: int | None
    term_half_klogk: float
    term_linear: float
    term_sqrt: float
    margin_at_r: float | None
    note: str = ""


def table(kappas, numeric: bool = True, slack: float = 0.0,
          dde_cap: int = DDE_KAPPA_CAP, atol: float = 1e-8,
          threads: int = 1) -> list[BoundRow]:
    """One BoundRow per kappa, ordered by kappa.  The numeric column is
    omitted (with a reason) beyond the DDE cap.  Rows are independent;
    ``threads`` parallelizes across kappa with output order fixed."""

    def one_row(kappa: int) -> BoundRow:
        t1, t2, t3 = explicit_terms(kappa)
        r_exp = r_bound_explicit(kappa, slack=slack)
        r_num = None
        margin = None
        note = ""
        if numeric and kappa <= dde_cap:
            nb = r_bound_numeric(kappa, atol=atol)
            r_num = nb.r
            margin = nb.margin(nb.r)
        elif numeric:
            note = f"numeric column needs kappa <= {dde_cap}"
        return BoundRow(kappa, r_exp, r_num, t1, t2, t3, margin, note)

    ks = sorted(set(int(k) for k in kappas))
    if threads <= 1:
        return [one_row(k) for k in ks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one_row, ks))


def table_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kappa", "r_explicit", "r_numeric", "term_half_klogk",
                     "term_linear", "term_sqrt", "margin_at_r", "note"])
    for r in rows:
        writer.writerow([
            r.kappa, r.r_explicit,
            "" if r.r_numeric is None else r.r_numeric,
            f"{r.term_half_klogk:.12g}", f"{r.term_linear:.12g}",
            f"{r.term_sqrt:.12g}",
            "" if r.margin_at_r is None else f"{r.margin_at_r:.12g}",
            r.note,
        ])
    return buf.getvalue()


def table_to_json(rows) -> str:
    return json.dumps([r.__dict__ for r in rows], indent=1)
