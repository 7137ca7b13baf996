"""Primitive functions of the home-office growth model.

The planner chooses consumption ``c``, labor ``l`` and distracting time ``s``
(with effective labor ``w = l - s``) given physical capital ``k``, human
capital ``h`` and their shadow prices ``lambda1``, ``lambda2``.  Production
uses the effective input ``X = (h / l) * w**2``.

Every function here is pure.  Inputs outside the model's domain raise
:class:`~wfh_growth.errors.DomainError`; nothing is clamped.  The payoff,
production and Hamiltonian accept numpy arrays in the control fields so grid
searches can evaluate them in one call.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Params:
    """Model primitives.

    sigma : consumption curvature (> 0, != 1)
    gamma : curvature of the displeasure of effective labor (> 0)
    rho   : continuous-time discount rate (> 0; the balanced path needs < 1)
    beta  : capital share (0 < beta < 1)

    ``rho >= 1`` is accepted so the patient limit can be evaluated; whether a
    parameter set supports a convergent balanced path is reported by
    :func:`wfh_growth.bgp.validate_params`.
    """

    sigma: float
    gamma: float
    rho: float
    beta: float

    def __post_init__(self):
        for name in ("sigma", "gamma", "rho", "beta"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        if self.sigma <= 0 or self.sigma == 1:
            raise DomainError(f"sigma must be > 0 and != 1, got {self.sigma}")
        if self.gamma <= 0:
            raise DomainError(f"gamma must be > 0, got {self.gamma}")
        if self.rho <= 0:
            raise DomainError(f"rho must be > 0, got {self.rho}")
        if not 0 < self.beta < 1:
            raise DomainError(f"beta must lie in (0, 1), got {self.beta}")


@dataclass(frozen=True)
class CapitalState:
    k: float
    h: float


@dataclass(frozen=True)
class Costates:
    lambda1: float
    lambda2: float


@dataclass(frozen=True)
class Controls:
    c: float
    s: float
    l: float

    @property
    def effective_labor(self):
        return self.l - self.s


@dataclass(frozen=True)
class ExtendedState:
    """Time plus the four-dimensional ODE state."""

    t: float
    state: CapitalState
    costates: Costates

    @classmethod
    def from_values(cls, t, k, h, lambda1, lambda2):
        return cls(t, CapitalState(k, h), Costates(lambda1, lambda2))

    def as_tuple(self):
        return (self.state.k, self.state.h, self.costates.lambda1, self.costates.lambda2)


def _check_controls(ctr: Controls, allow_zero_labor: bool = False):
    c, s, l = ctr.c, ctr.s, ctr.l
    if np.any(np.asarray(c) <= 0):
        raise DomainError("consumption must be positive")
    if np.any(np.asarray(l) <= 0):
        raise DomainError("labor must be positive")
    if np.any(np.asarray(s) < 0):
        raise DomainError("distracting time must be non-negative")
    w = np.asarray(l) - np.asarray(s)
    if allow_zero_labor:
        if np.any(w < 0):
            raise DomainError("distracting time exceeds labor (s > l)")
    elif np.any(w <= 0):
        raise DomainError("effective labor l - s must be positive")


def _check_state(st: CapitalState):
    if not (st.k > 0 and st.h > 0):
        raise DomainError(f"capital stocks must be positive, got k={st.k}, h={st.h}")


def _check_costates(co: Costates):
    if not (math.isfinite(co.lambda1) and math.isfinite(co.lambda2)):
        raise DomainError("costates must be finite")


def effort(s, l):
    """Share of effort devoted to goods production, ``1 - s/l``."""
    if l <= 0:
        raise DomainError(f"labor must be positive, got l={l}")
    if s < 0 or s > l:
        raise DomainError(f"need 0 <= s <= l, got s={s}, l={l}")
    return 1.0 - s / l


def utility(p: Params, ctr: Controls):
    """Instantaneous payoff ``c^(1-sigma)/(1-sigma) - (l-s)^(1+gamma)/(1+gamma)``.

    Zero effective labor (``s == l``) is allowed here; it only zeroes the
    displeasure term.
    """
    _check_controls(ctr, allow_zero_labor=True)
    w = ctr.l - ctr.s
    return (np.power(ctr.c, 1 - p.sigma) / (1 - p.sigma)
            - np.power(w, 1 + p.gamma) / (1 + p.gamma))


def effective_input(st: CapitalState, ctr: Controls):
    """``X = (h / l) * (l - s)**2``, the labor input of the goods sector."""
    w = ctr.l - ctr.s
    return st.h / ctr.l * w * w


def production(p: Params, st: CapitalState, ctr: Controls):
    """Cobb-Douglas output ``k^beta * X^(1-beta)``."""
    _check_state(st)
    _check_controls(ctr)
    X = effective_input(st, ctr)
    return st.k ** p.beta * np.power(X, 1 - p.beta)


def average_product(p: Params, st: CapitalState, ctr: Controls):
    """``k^(beta-1) * X^(1-beta)``, i.e. ``y / k``.

    This is the quantity held constant at ``(rho + sigma*theta)/beta`` on the
    balanced path; the marginal product of capital is ``beta`` times it.
    """
    _check_state(st)
    _check_controls(ctr)
    X = effective_input(st, ctr)
    return st.k ** (p.beta - 1) * np.power(X, 1 - p.beta)


def hamiltonian(p: Params, xs: ExtendedState, ctr: Controls):
    """Current-value Hamiltonian ``V + lambda1*(f - c) + lambda2*h*s/l``."""
    _check_costates(xs.costates)
    st, co = xs.state, xs.costates
    return (utility(p, ctr)
            + co.lambda1 * (production(p, st, ctr) - ctr.c)
            + co.lambda2 * st.h * ctr.s / ctr.l)


def _partial_terms(p: Params, xs: ExtendedState, ctr: Controls):
    """Additive terms of each Hamiltonian partial, keyed by variable.

    Summing a row gives the partial; the largest absolute term is the natural
    scale for normalizing residuals.
    """
    _check_state(xs.state)
    _check_costates(xs.costates)
    _check_controls(ctr)
    k, h = xs.state.k, xs.state.h
    lam1, lam2 = xs.costates.lambda1, xs.costates.lambda2
    c, s, l = ctr.c, ctr.s, ctr.l
    b = p.beta
    w = l - s
    X = h / l * w * w
    # lambda1 times dy/dX
    lam_fx = lam1 * (1 - b) * k ** b * X ** (-b)
    wg = w ** p.gamma
    return {
        "c": (c ** (-p.sigma), -lam1),
        "s": (wg, -2.0 * lam_fx * h * w / l, lam2 * h / l),
        "l": (-wg, lam_fx * h * (1.0 - (s / l) ** 2), -lam2 * h * s / (l * l)),
        "k": (lam1 * b * k ** (b - 1) * X ** (1 - b),),
        "h": (lam_fx * w * w / l, lam2 * s / l),
    }


def hamiltonian_partials(p: Params, xs: ExtendedState, ctr: Controls):
    """Analytic partials ``(H_c, H_s, H_l, H_k, H_h)``."""
    terms = _partial_terms(p, xs, ctr)
    return tuple(math.fsum(terms[v]) for v in ("c", "s", "l", "k", "h"))


def partial_scales(p: Params, xs: ExtendedState, ctr: Controls):
    """Largest absolute additive term of each partial, same order as the partials."""
    terms = _partial_terms(p, xs, ctr)
    return tuple(max(abs(t) for t in terms[v]) for v in ("c", "s", "l", "k", "h"))


def foc_residuals(p: Params, xs: ExtendedState, ctr: Controls):
    """``(H_c, H_s, H_l)``; all zero iff the controls satisfy the FOCs."""
    return np.array(hamiltonian_partials(p, xs, ctr)[:3])


def normalized_foc_residuals(p: Params, xs: ExtendedState, ctr: Controls):
    """FOC residuals divided by the largest additive term of each condition."""
    terms = _partial_terms(p, xs, ctr)
    out = np.empty(3)
    for i, v in enumerate(("c", "s", "l")):
        out[i] = math.fsum(terms[v]) / max(abs(t) for t in terms[v])
    return out


def ode_rhs(p: Params, xs: ExtendedState, ctr: Controls):
    """Time derivatives ``(dk, dh, dlambda1, dlambda2)`` of the optimality system."""
    _, _, _, H_k, H_h = hamiltonian_partials(p, xs, ctr)
    k, h, lam1, lam2 = xs.as_tuple()
    dk = production(p, xs.state, ctr) - ctr.c
    dh = h * ctr.s / ctr.l
    dlam1 = p.rho * lam1 - H_k
    dlam2 = p.rho * lam2 - H_h
    return (float(dk), float(dh), float(dlam1), float(dlam2))
