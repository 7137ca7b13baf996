"""Instantaneous controls from the first-order conditions.

Adding the s- and l-conditions eliminates ``w**gamma`` and leaves

    (1 - beta) * lambda1 * k**beta * X**(-beta) * w = lambda2,

and substituting that back into the s-condition gives ``w**gamma = lambda2*h/l``.
With ``l = lambda2*h / w**gamma`` the first identity collapses to a power law in
``w`` alone, which is solved in logs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import DegenerateError, DomainError, InfeasibleDistractionError, NoInteriorMaximumError
from .model import CapitalState, Controls, Costates, ExtendedState, Params, hamiltonian


def solve_controls(p: Params, k, h, lambda1, lambda2) -> Controls:
    """Interior solution ``(c, s, l)`` of the first-order conditions.

    Raises
    ------
    DomainError
        If any input is not strictly positive.
    DegenerateError
        If ``1 - beta*(2 + gamma) == 0``.
    InfeasibleDistractionError
        If the stationary point has ``s < 0``.
    """
    if not (k > 0 and h > 0 and lambda1 > 0 and lambda2 > 0):
        raise DomainError(
            f"solve_controls needs positive inputs, got k={k}, h={h}, "
            f"lambda1={lambda1}, lambda2={lambda2}")
    expo = 1.0 - p.beta * (2.0 + p.gamma)
    if expo == 0:
        raise DegenerateError(f"1 - beta*(2+gamma) vanishes at beta={p.beta}, gamma={p.gamma}")
    log_l2 = math.log(lambda2)
    log_w = ((1.0 - p.beta) * log_l2 - math.log1p(-p.beta)
             - math.log(lambda1) - p.beta * math.log(k)) / expo
    w = math.exp(log_w)
    l = math.exp(log_l2 + math.log(h) - p.gamma * log_w)
    s = l - w
    if s < 0:
        raise InfeasibleDistractionError(
            f"first-order conditions give s = {s:.6g} < 0 (w = {w:.6g}, l = {l:.6g})")
    c = math.exp(-math.log(lambda1) / p.sigma)
    return Controls(c, s, l)


@dataclass(frozen=True)
class GridSpec:
    """Search box for :func:`brute_force_controls`.

    ``c`` and ``l`` are searched on log-spaced grids; distracting time is
    searched as the fraction ``q = s/l`` on ``[0, q_max]``.
    """

    c_range: tuple = (1e-3, 1e3)
    l_range: tuple = (1e-3, 1e3)
    q_max: float = 1.0 - 1e-9
    points: int = 61
    refine_points: int = 11
    refine_iters: int = 60


def _hamiltonian_grid(p, xs, log_c, log_l, q):
    C, L, Q = np.meshgrid(np.exp(log_c), np.exp(log_l), q, indexing="ij")
    return hamiltonian(p, xs, Controls(C, Q * L, L))


def _polish(p, xs, best, bounds):
    """Nelder-Mead on ``(log c, log l, logit q)`` from the grid incumbent.

    Points on the q-edge are left alone: the logit map cannot represent them.
    """
    q = best[2]
    if not 0.0 < q < 1.0 or q >= bounds[2, 1]:
        return best

    def neg_h(u):
        qq = 1.0 / (1.0 + math.exp(-u[2]))
        l = math.exp(u[1])
        try:
            return -float(hamiltonian(p, xs, Controls(math.exp(u[0]), qq * l, l)))
        except (DomainError, OverflowError):
            return math.inf

    u0 = np.array([best[0], best[1], math.log(q / (1.0 - q))])
    res = minimize(neg_h, u0, method="Nelder-Mead",
                   options={"xatol": 1e-11, "fatol": 1e-15, "maxiter": 20000, "maxfev": 40000})
    if not res.fun <= neg_h(u0):
        return best
    out = np.array([res.x[0], res.x[1], 1.0 / (1.0 + math.exp(-res.x[2]))])
    return np.clip(out, bounds[:, 0], bounds[:, 1])


def brute_force_controls(p: Params, k, h, lambda1, lambda2, grid: GridSpec = GridSpec()) -> Controls:
    """Maximize the Hamiltonian over a box by repeated grid zooming.

    Independent of the first-order conditions; meant as a test oracle for
    :func:`solve_controls`.  Raises :class:`NoInteriorMaximumError` when the
    best point ends on the edge of the box (including ``s = 0``).
    """
    xs = ExtendedState(0.0, CapitalState(k, h), Costates(lambda1, lambda2))
    bounds = np.array([
        [math.log(grid.c_range[0]), math.log(grid.c_range[1])],
        [math.log(grid.l_range[0]), math.log(grid.l_range[1])],
        [0.0, grid.q_max],
    ])
    lo, hi = bounds[:, 0].copy(), bounds[:, 1].copy()
    axes = [np.linspace(lo[d], hi[d], grid.points) for d in range(3)]
    H = _hamiltonian_grid(p, xs, *axes)
    idx = np.unravel_index(np.argmax(H), H.shape)
    best = np.array([axes[d][idx[d]] for d in range(3)])
    best_val = H[idx]
    half = np.array([2.0 * (axes[d][1] - axes[d][0]) for d in range(3)])
    shrinks = 0
    for _ in range(20 * grid.refine_iters):
        if shrinks >= grid.refine_iters:
            break
        lo = np.maximum(best - half, bounds[:, 0])
        hi = np.minimum(best + half, bounds[:, 1])
        axes = [np.linspace(lo[d], hi[d], grid.refine_points) for d in range(3)]
        H = _hamiltonian_grid(p, xs, *axes)
        idx = np.unravel_index(np.argmax(H), H.shape)
        if H[idx] >= best_val:
            best = np.array([axes[d][idx[d]] for d in range(3)])
            best_val = H[idx]
        # an incumbent on the edge of a box that is not the domain edge means the
        # maximum may lie outside: move the box, keep its size
        at_box_edge = any(
            (idx[d] == 0 and lo[d] > bounds[d, 0]) or
            (idx[d] == grid.refine_points - 1 and hi[d] < bounds[d, 1])
            for d in range(3))
        if not at_box_edge:
            half = half * 0.5
            shrinks += 1
    best = _polish(p, xs, best, bounds)
    c, l, q = math.exp(best[0]), math.exp(best[1]), best[2]
    found = Controls(c, q * l, l)
    # linspace rounding leaves ~1e-17 offsets, so compare against a sliver of the width
    sliver = 1e-9 * (bounds[:, 1] - bounds[:, 0])
    on_edge = [
        best[d] <= bounds[d, 0] + sliver[d] or best[d] >= bounds[d, 1] - sliver[d]
        for d in range(3)
    ]
    if any(on_edge):
        names = [name for name, e in zip(("c", "l", "s/l"), on_edge) if e]
        raise NoInteriorMaximumError(
            f"Hamiltonian maximum lies on the search boundary in {', '.join(names)}",
            best=found)
    return found
