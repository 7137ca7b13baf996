"""Closed-form balanced-growth-path quantities.

Notation for rates: ``h_hat`` is the growth rate of human capital, ``theta``
the common rate of consumption, physical capital and output, ``l_hat`` the
common rate of labor, distracting time and effective labor.  All three share
the denominator ``1 - sigma*(2 + gamma)``, which is negative whenever
``sigma > 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, DivergenceError, DomainError
from .model import Params


@dataclass(frozen=True)
class ValidationReport:
    basic_domain: bool
    denominator_ok: bool
    convergence_regime: bool
    bgp_feasible: bool
    h_hat: float
    messages: tuple = field(default=())

    @property
    def ok(self):
        return (self.basic_domain and self.denominator_ok
                and self.convergence_regime and self.bgp_feasible)

    def flags(self):
        return {
            "basic_domain": self.basic_domain,
            "denominator_ok": self.denominator_ok,
            "convergence_regime": self.convergence_regime,
            "bgp_feasible": self.bgp_feasible,
        }


@dataclass(frozen=True)
class BgpRates:
    h_hat: float
    theta: float
    l_hat: float
    lambda1_hat: float
    lambda2_hat: float
    x: float
    mpk: float
    effort_bgp: float
    ies: float
    verified_convergence: bool

    FIELDS = ("h_hat", "theta", "l_hat", "lambda1_hat", "lambda2_hat",
              "x", "mpk", "effort_bgp", "ies")

    def as_dict(self):
        return {name: getattr(self, name) for name in self.FIELDS}


def _denominator(p: Params):
    return 1.0 - p.sigma * (2.0 + p.gamma)


def _checked_denominator(p: Params):
    d = _denominator(p)
    if d == 0:
        raise DegenerateError(
            f"1 - sigma*(2+gamma) vanishes at sigma={p.sigma}, gamma={p.gamma}")
    return d


def validate_params(p: Params) -> ValidationReport:
    """Flag which regime a parameter set falls in.  Never raises."""
    msgs = []
    basic = p.sigma > 0 and p.sigma != 1 and p.gamma > 0 and 0 < p.rho < 1 and 0 < p.beta < 1
    if not basic:
        msgs.append("rho must lie in (0, 1)")
    d = _denominator(p)
    denom_ok = d != 0
    if not denom_ok:
        msgs.append("1 - sigma*(2+gamma) = 0: growth rates undefined")
    regime = p.sigma > 1 and p.rho < 1
    if not regime:
        msgs.append("outside the convergence regime (needs sigma > 1 and rho < 1)")
    h_hat = (p.gamma + p.sigma) * (p.rho - 1.0) / d if denom_ok else math.nan
    feasible = denom_ok and 0.0 < h_hat < 1.0
    if denom_ok and not feasible:
        msgs.append(f"h_hat = {h_hat:.6g} outside (0, 1): no balanced path with 0 < s < l")
    return ValidationReport(basic, denom_ok, regime, feasible, h_hat, tuple(msgs))


def bgp_rates(p: Params) -> BgpRates:
    """All closed-form balanced-growth quantities for ``p``.

    Values are computed even outside the convergence regime; such results
    carry ``verified_convergence=False``.  ``ies`` is NaN when ``h_hat`` is 0.
    """
    d = _checked_denominator(p)
    rm1 = p.rho - 1.0
    h_hat = (p.gamma + p.sigma) * rm1 / d
    theta = (1.0 + p.gamma) * rm1 / d
    l_hat = (1.0 - p.sigma) * rm1 / d
    ies = (1.0 - h_hat) / (p.gamma * h_hat) if h_hat != 0 else math.nan
    return BgpRates(
        h_hat=h_hat,
        theta=theta,
        l_hat=l_hat,
        lambda1_hat=-p.sigma * theta,
        lambda2_hat=rm1,
        x=(1.0 - p.sigma) * theta - p.rho,
        mpk=(p.rho + p.sigma * theta) / p.beta,
        effort_bgp=1.0 - h_hat,
        ies=ies,
        verified_convergence=p.sigma > 1 and p.rho < 1,
    )


def prop1_identity(rates: BgpRates) -> float:
    """``theta - (h_hat + 2*l_hat - l_hat)``; zero up to rounding."""
    return rates.theta - (rates.h_hat + 2.0 * rates.l_hat - rates.l_hat)


def corollary1_output_rate(p: Params, rates: BgpRates) -> float:
    """Output growth from log-differentiating the production function."""
    x_hat = rates.h_hat + 2.0 * rates.l_hat - rates.l_hat
    return p.beta * rates.theta + (1.0 - p.beta) * x_hat


def marginal_utility_elasticity(p: Params, s, l):
    """Elasticity of the marginal payoff of distracting time, ``gamma*s/(l-s)``."""
    if not 0 < s < l:
        raise DomainError(f"need 0 < s < l, got s={s}, l={l}")
    return p.gamma * s / (l - s)


def ies_distraction(p: Params) -> float:
    """Intertemporal elasticity of substitution of distracting time on the BGP.

    Closed form in the primitives; equals ``(1 - h_hat)/(gamma*h_hat)``.
    """
    if p.rho == 1:
        raise DegenerateError("IES undefined at rho = 1 (h_hat = 0)")
    num = (1.0 + p.gamma) * (1.0 - p.sigma) - p.rho * (p.gamma + p.sigma)
    den = p.gamma * (p.gamma + p.sigma) * (p.rho - 1.0)
    return num / den


def ies_limit_scan(p: Params, gammas):
    """``[(gamma, IES)]`` over ``gammas`` with the other primitives of ``p`` fixed."""
    out = []
    for g in gammas:
        q = Params(p.sigma, float(g), p.rho, p.beta)
        out.append((float(g), ies_distraction(q)))
    return out


def convergence_exponent(p: Params) -> float:
    """Exponent ``x`` of the discounted payoff integrand along the BGP."""
    d = _checked_denominator(p)
    return (1.0 + p.gamma) * (1.0 - p.sigma) * (p.rho - 1.0) / d - p.rho


def utility_closed_form(p: Params, c0, l0, s0) -> float:
    """Discounted payoff of the balanced path started at ``(c0, l0, s0)``.

    Both payoff terms decay at the common exponent ``x``, so the integral is
    ``(A1 - A2) / (-x)``.
    """
    x = convergence_exponent(p)
    if x >= 0:
        raise DivergenceError(f"convergence exponent x = {x} is not negative")
    if c0 <= 0 or not 0 <= s0 < l0:
        raise DomainError(f"need c0 > 0 and 0 <= s0 < l0, got {c0}, {s0}, {l0}")
    a1 = c0 ** (1.0 - p.sigma) / (1.0 - p.sigma)
    a2 = (l0 - s0) ** (1.0 + p.gamma) / (1.0 + p.gamma)
    return (a1 - a2) * (-1.0 / x)


def rates_row(p: Params) -> dict:
    """Flat mapping of rates and validation flags, used by the CLI tables."""
    report = validate_params(p)
    row = {"sigma": p.sigma, "gamma": p.gamma, "rho": p.rho, "beta": p.beta}
    try:
        rates = bgp_rates(p)
        row.update(rates.as_dict())
    except DegenerateError:
        row.update({name: np.nan for name in BgpRates.FIELDS})
    row.update(report.flags())
    return row
