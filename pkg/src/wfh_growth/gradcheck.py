"""Finite-difference check of the analytic Hamiltonian partials."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import (CapitalState, Controls, Costates, ExtendedState, Params, hamiltonian,
                    hamiltonian_partials, partial_scales)

VARIABLES = ("c", "s", "l", "k", "h")


def _perturbed(xs: ExtendedState, ctr: Controls, var, value):
    if var in ("c", "s", "l"):
        return xs, replace(ctr, **{var: value})
    return replace(xs, state=replace(xs.state, **{var: value})), ctr


def _current(xs, ctr, var):
    return getattr(ctr, var) if var in ("c", "s", "l") else getattr(xs.state, var)


def finite_difference_partials(p: Params, xs: ExtendedState, ctr: Controls, rel_step=1e-6):
    """Central differences of the Hamiltonian, step ``rel_step * |variable|``."""
    if not rel_step > 0:
        raise ValueError(f"finite-difference step must be positive, got {rel_step}")
    out = []
    for var in VARIABLES:
        x = _current(xs, ctr, var)
        dx = rel_step * abs(x)
        hp = hamiltonian(p, *_perturbed(xs, ctr, var, x + dx))
        hm = hamiltonian(p, *_perturbed(xs, ctr, var, x - dx))
        out.append(float(hp - hm) / (2.0 * dx))
    return tuple(out)


def random_point(rng: np.random.Generator):
    """A random interior point of the model's domain (any parameter regime)."""
    sigma = 1.0
    while abs(sigma - 1.0) < 0.05:
        sigma = rng.uniform(0.2, 4.0)
    p = Params(sigma, rng.uniform(0.3, 3.0), rng.uniform(0.05, 0.95), rng.uniform(0.1, 0.9))
    k, h, lam1, lam2, c = np.exp(rng.uniform(np.log(0.2), np.log(5.0), size=5))
    l = float(np.exp(rng.uniform(np.log(0.3), np.log(3.0))))
    s = float(rng.uniform(0.05, 0.9)) * l
    xs = ExtendedState(0.0, CapitalState(float(k), float(h)), Costates(float(lam1), float(lam2)))
    return p, xs, Controls(float(c), s, l)


@dataclass(frozen=True)
class GradCheckResult:
    max_rel_error: float
    per_variable: dict
    points: int
    seed: int

    def passed(self, tol=1e-6):
        return self.max_rel_error < tol


def relative_errors(p: Params, xs: ExtendedState, ctr: Controls, rel_step=1e-6):
    """Per-partial ``|analytic - fd|`` over the partial's magnitude.

    The magnitude is the larger of the partial itself and its largest additive
    term, so near-cancelling partials are not judged on a vanishing scale.
    """
    analytic = hamiltonian_partials(p, xs, ctr)
    fd = finite_difference_partials(p, xs, ctr, rel_step)
    scales = partial_scales(p, xs, ctr)
    return tuple(abs(a - f) / max(abs(a), abs(f), sc)
                 for a, f, sc in zip(analytic, fd, scales))


def gradient_check(points=100, seed=0, rel_step=1e-6) -> GradCheckResult:
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(VARIABLES, 0.0)
    for _ in range(points):
        errs = relative_errors(*random_point(rng), rel_step=rel_step)
        for var, e in zip(VARIABLES, errs):
            worst[var] = max(worst[var], e)
    return GradCheckResult(max(worst.values()), worst, points, seed)
