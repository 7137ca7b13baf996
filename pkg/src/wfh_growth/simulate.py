"""Balanced-path initial conditions, trajectory integration and verification.

The four-dimensional system (k, h, lambda1, lambda2) is integrated in logs.
On a balanced path every log is linear in time, so the one-step integrator
reproduces it up to rounding, and departures show up as curvature.

The balanced path is locally unstable: small errors grow at the rate of the
largest real eigenvalue of the linearized system.  When ``beta*(2 + gamma)``
is above one that rate can be large (about 6.7 at sigma=3, gamma=2, rho=0.8,
beta=0.3), which limits the horizon that double precision can follow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq

from .bgp import BgpRates, bgp_rates, corollary1_output_rate, prop1_identity, utility_closed_form, validate_params
from .errors import (BracketingError, DivergenceError, InsufficientDataError, IntegrationError,
                     ModelError)
from .integrator import IntegratorStats, dopri5
from .model import (CapitalState, Controls, Costates, ExtendedState, Params, average_product,
                    effort, normalized_foc_residuals, ode_rhs, production, utility)
from .controls import solve_controls

SERIES = ("k", "h", "c", "s", "l", "lambda1", "lambda2", "y", "tv1", "tv2")


def _bgp_point(p: Params, rates: BgpRates, h0, l0):
    """Balanced-path point with labor ``l0``; only the summed s/l condition is left open."""
    s0 = rates.h_hat * l0
    w0 = l0 - s0
    X0 = h0 / l0 * w0 * w0
    k0 = X0 * rates.mpk ** (1.0 / (p.beta - 1.0))
    c0 = k0 * (rates.mpk - rates.theta)
    lam1 = c0 ** (-p.sigma)
    lam2 = l0 * w0 ** p.gamma / h0
    return k0, c0, s0, w0, X0, lam1, lam2


def _balance_residual(p, rates, h0, log_l0):
    """log of ``(1-beta) lambda1 k^beta X^-beta w / lambda2``; NaN if infeasible."""
    l0 = math.exp(log_l0)
    k0, c0, s0, w0, X0, lam1, lam2 = _bgp_point(p, rates, h0, l0)
    if not (w0 > 0 and c0 > 0 and s0 >= 0 and k0 > 0):
        return math.nan
    lhs = (math.log1p(-p.beta) + math.log(lam1) + p.beta * math.log(k0)
           - p.beta * math.log(X0) + math.log(w0))
    return lhs - math.log(lam2)


def bgp_find_l0(p: Params, h0=1.0, rtol=1e-12, max_log_width=600.0) -> float:
    """Labor level that puts the balanced-path point on the summed s/l condition.

    The residual is a power law in ``l0``, hence monotone in ``log l0``.  The
    bracket around ``log l0 = 0`` is widened geometrically until it changes
    sign, then refined with Brent's method.
    """
    if not h0 > 0:
        raise ValueError(f"h0 must be positive, got {h0}")
    try:
        rates = bgp_rates(p)
    except ModelError as exc:
        raise BracketingError(f"no balanced path: {exc}", interval=None) from exc

    def g(u):
        try:
            return _balance_residual(p, rates, h0, u)
        except (OverflowError, ValueError):
            return math.nan

    a, b = -1.0, 1.0
    ga, gb = g(a), g(b)
    while not (ga * gb <= 0):
        width = b - a
        if 3 * width > max_log_width:
            raise BracketingError(f"no sign change for log(l0) in [{a:g}, {b:g}]",
                                  interval=(math.exp(a), math.exp(b)))
        a, b = a - width, b + width
        ga, gb = g(a), g(b)
    if ga == 0:
        return math.exp(a)
    if gb == 0:
        return math.exp(b)
    root = brentq(g, a, b, xtol=1e-14, rtol=max(rtol, 4 * np.finfo(float).eps), maxiter=500)
    return math.exp(root)


def bgp_initial_state(p: Params, h0=1.0):
    """``(ExtendedState at t=0, Controls)`` lying on the balanced growth path."""
    rates = bgp_rates(p)
    l0 = bgp_find_l0(p, h0)
    k0, c0, s0, w0, X0, lam1, lam2 = _bgp_point(p, rates, h0, l0)
    xs = ExtendedState(0.0, CapitalState(k0, h0), Costates(lam1, lam2))
    return xs, Controls(c0, s0, l0)


@dataclass(frozen=True)
class TrajectoryRecord:
    t: float
    k: float
    h: float
    lambda1: float
    lambda2: float
    c: float
    s: float
    l: float
    y: float
    effort: float
    mpk: float
    residuals: tuple
    tv1: float
    tv2: float

    CSV_COLUMNS = ("t", "k", "h", "lambda1", "lambda2", "c", "s", "l", "y", "effort",
                   "mpk", "res1", "res2", "res3", "tv1", "tv2")

    def csv_values(self):
        return (self.t, self.k, self.h, self.lambda1, self.lambda2, self.c, self.s, self.l,
                self.y, self.effort, self.mpk, *self.residuals, self.tv1, self.tv2)


@dataclass
class Trajectory:
    params: Params
    records: list
    stats: IntegratorStats = field(default_factory=IntegratorStats)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def times(self):
        return self.column("t")


def make_record(p: Params, t, k, h, lam1, lam2) -> TrajectoryRecord:
    ctr = solve_controls(p, k, h, lam1, lam2)
    xs = ExtendedState(t, CapitalState(k, h), Costates(lam1, lam2))
    disc = math.exp(-p.rho * t)
    return TrajectoryRecord(
        t=t, k=k, h=h, lambda1=lam1, lambda2=lam2,
        c=ctr.c, s=ctr.s, l=ctr.l,
        y=float(production(p, xs.state, ctr)),
        effort=effort(ctr.s, ctr.l),
        mpk=float(average_product(p, xs.state, ctr)),
        residuals=tuple(float(r) for r in normalized_foc_residuals(p, xs, ctr)),
        tv1=k * lam1 * disc,
        tv2=h * lam2 * disc,
    )


def _log_rhs(p: Params):
    def rhs(t, z):
        k, h, lam1, lam2 = np.exp(z)
        try:
            ctr = solve_controls(p, k, h, lam1, lam2)
            xs = ExtendedState(t, CapitalState(k, h), Costates(lam1, lam2))
            dk, dh, dl1, dl2 = ode_rhs(p, xs, ctr)
        except ModelError as exc:
            raise IntegrationError(f"derivative evaluation failed at t = {t}: {exc}", t=t) from exc
        return np.array([dk / k, dh / h, dl1 / lam1, dl2 / lam2])
    return rhs


def integrate(p: Params, x0: ExtendedState, t_end, tol=1e-9, records=200) -> Trajectory:
    """Integrate the optimality system from ``x0`` up to time ``t_end``.

    Controls are re-solved from the first-order conditions at every derivative
    evaluation.  Records are emitted at ``records`` evenly spaced times
    (a single record when ``t_end`` equals the start time).
    """
    t0 = x0.t
    if t_end < t0:
        raise ValueError(f"t_end = {t_end} precedes the start time {t0}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    z0 = np.log(np.array(x0.as_tuple(), dtype=float))
    if t_end == t0:
        t_out = np.array([t0])
    else:
        if records < 2:
            raise ValueError("need at least 2 records for a nonempty interval")
        t_out = np.linspace(t0, t_end, records)
    atol = tol * np.maximum(np.abs(z0), 1.0)
    try:
        zs, stats = dopri5(_log_rhs(p), z0, t_out, rtol=tol, atol=atol)
    except IntegrationError as exc:
        done_t, done_z = exc.partial if exc.partial is not None else (t_out[:0], np.empty((0, 4)))
        partial = Trajectory(p, _records(p, x0, done_t, done_z))
        raise IntegrationError(str(exc), t=exc.t, partial=partial) from exc
    return Trajectory(p, _records(p, x0, t_out, zs), stats)


def _records(p, x0, t_out, zs):
    recs = []
    for t, z in zip(t_out, zs):
        k, h, lam1, lam2 = (float(v) for v in np.exp(z))
        if t == x0.t:
            k, h, lam1, lam2 = x0.as_tuple()
        try:
            recs.append(make_record(p, float(t), k, h, lam1, lam2))
        except ModelError as exc:
            raise IntegrationError(f"record at t = {t} failed: {exc}", t=float(t)) from exc
    return recs


def log_slope(t, values):
    """Least-squares slope of ``log(values)`` against ``t``."""
    return float(np.polyfit(t, np.log(values), 1)[0])


def estimate_growth_rates(traj: Trajectory, burn_in_fraction=0.1) -> dict:
    """Log-linear regression slope of each series after discarding a burn-in."""
    n = len(traj.records)
    start = int(math.floor(burn_in_fraction * n))
    if n - start < 10:
        raise InsufficientDataError(f"{n - start} records after burn-in, need at least 10")
    t = traj.times[start:]
    return {name: log_slope(t, traj.column(name)[start:]) for name in SERIES}


def discounted_utility(p: Params, traj: Trajectory) -> float:
    """Simpson quadrature of ``exp(-rho t) V`` plus the closed-form balanced-path tail."""
    x = bgp_rates(p).x
    if x >= 0:
        raise DivergenceError(f"convergence exponent x = {x} is not negative")
    t = traj.times
    V = np.array([float(utility(p, Controls(r.c, r.s, r.l))) for r in traj.records])
    body = float(simpson(np.exp(-p.rho * t) * V, x=t)) if t.size > 1 else 0.0
    last = traj.records[-1]
    a1 = last.c ** (1.0 - p.sigma) / (1.0 - p.sigma)
    a2 = (last.l - last.s) ** (1.0 + p.gamma) / (1.0 + p.gamma)
    tail = math.exp(-p.rho * last.t) * (a1 - a2) * (-1.0 / x)
    return body + tail


@dataclass(frozen=True)
class Check:
    name: str
    expected: float
    observed: float
    tolerance: float
    passed: bool
    note: str = ""

    @property
    def deviation(self):
        return abs(self.observed - self.expected)


def _abs_check(name, expected, observed, tol):
    ok = bool(np.isfinite(observed)) and abs(observed - expected) <= tol
    return Check(name, float(expected), float(observed), tol, ok)


def _rel_drift_check(name, reference, series, tol):
    drift = float(np.max(np.abs(series - reference)) / abs(reference))
    return Check(name, 0.0, drift, tol, bool(drift <= tol), f"reference {reference:.12g}")


@dataclass
class VerificationReport:
    params: Params
    closed_form: BgpRates | None = None
    empirical: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    numeric_utility: float = math.nan
    closed_form_utility: float = math.nan
    trajectory: Trajectory | None = None

    @property
    def passed(self):
        return bool(self.checks) and all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]


RATE_TOL = 1e-5
DRIFT_TOL = 1e-7
RESIDUAL_TOL = 1e-8
TRANSVERSALITY_TOL = 1e-6
UTILITY_RTOL = 1e-6
IDENTITY_TOL = 1e-12


def verify_bgp(p: Params, h0=1.0, t_end=20.0, tol=1e-9, records=200,
               burn_in_fraction=0.1, lambda2_factor=1.0) -> VerificationReport:
    """Integrate from the balanced-path point and compare with the closed forms.

    ``lambda2_factor`` scales the initial human-capital price; any value other
    than 1 starts the system off the balanced path (a negative control).
    """
    report = VerificationReport(p)
    v = validate_params(p)
    if not v.ok:
        report.checks.append(Check("regime", 1.0, 0.0, 0.0, False, "; ".join(v.messages)))
        return report
    rates = bgp_rates(p)
    report.closed_form = rates
    report.checks.append(_abs_check("prop1_identity", 0.0, prop1_identity(rates), IDENTITY_TOL))
    report.checks.append(_abs_check("corollary1_output_rate", rates.theta,
                                    corollary1_output_rate(p, rates), IDENTITY_TOL))
    try:
        x0, _ = bgp_initial_state(p, h0)
        if lambda2_factor != 1.0:
            x0 = ExtendedState.from_values(x0.t, x0.state.k, x0.state.h, x0.costates.lambda1,
                                           x0.costates.lambda2 * lambda2_factor)
        traj = integrate(p, x0, t_end, tol=tol, records=records)
    except IntegrationError as exc:
        # keep checking whatever was integrated before the failure
        report.checks.append(Check("pipeline", 0.0, math.nan, 0.0, False, str(exc)))
        traj = exc.partial
        if traj is None or len(traj.records) < 2:
            return report
    except ModelError as exc:
        report.checks.append(Check("pipeline", 0.0, math.nan, 0.0, False, str(exc)))
        return report
    report.trajectory = traj
    try:
        emp = estimate_growth_rates(traj, burn_in_fraction)
    except InsufficientDataError as exc:
        report.checks.append(Check("growth_rates", 0.0, math.nan, 0.0, False, str(exc)))
        return report
    report.empirical = emp

    expected = {"k": rates.theta, "h": rates.h_hat, "c": rates.theta, "s": rates.l_hat,
                "l": rates.l_hat, "lambda1": rates.lambda1_hat, "lambda2": rates.lambda2_hat,
                "y": rates.theta}
    for name, value in expected.items():
        report.checks.append(_abs_check(f"rate_{name}", value, emp[name], RATE_TOL))

    res = np.array([r.residuals for r in traj.records])
    report.checks.append(_abs_check("foc_residual_max", 0.0, float(np.max(np.abs(res))), RESIDUAL_TOL))

    k, c, s, l, y = (traj.column(n) for n in ("k", "c", "s", "l", "y"))
    report.checks.append(_rel_drift_check("drift_s_over_l", rates.h_hat, s / l, DRIFT_TOL))
    report.checks.append(_rel_drift_check("drift_c_over_k", rates.mpk - rates.theta, c / k, DRIFT_TOL))
    report.checks.append(_rel_drift_check("drift_mpk", rates.mpk, traj.column("mpk"), DRIFT_TOL))
    report.checks.append(_rel_drift_check("drift_y_over_k", rates.mpk, y / k, DRIFT_TOL))
    report.checks.append(_rel_drift_check("drift_effort", rates.effort_bgp, traj.column("effort"), DRIFT_TOL))

    for name in ("tv1", "tv2"):
        report.checks.append(_abs_check(f"{name}_slope", rates.x, emp[name], TRANSVERSALITY_TOL))
        decreasing = bool(np.all(np.diff(traj.column(name)) < 0))
        report.checks.append(Check(f"{name}_decreasing", 1.0, float(decreasing), 0.0, decreasing))

    first = traj.records[0]
    try:
        report.closed_form_utility = utility_closed_form(p, first.c, first.l, first.s)
        report.numeric_utility = discounted_utility(p, traj)
        rel = abs(report.numeric_utility - report.closed_form_utility) / abs(report.closed_form_utility)
        report.checks.append(Check("utility", report.closed_form_utility, report.numeric_utility,
                                   UTILITY_RTOL, bool(rel <= UTILITY_RTOL), f"relative error {rel:.3g}"))
    except ModelError as exc:
        report.checks.append(Check("utility", math.nan, math.nan, UTILITY_RTOL, False, str(exc)))
    return report
