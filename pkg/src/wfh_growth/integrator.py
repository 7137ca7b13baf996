"""Dormand-Prince 5(4) with embedded error control.

Steps are shortened to land exactly on every requested output time, so no
interpolation is involved in the recorded values.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IntegrationError, StepSizeUnderflowError

# Butcher tableau (Dormand & Prince 1980); the last stage is FSAL.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [np.array(row) for row in [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


@dataclass
class IntegratorStats:
    steps: int = 0
    rejections: int = 0
    evaluations: int = 0


def _error_norm(err, y, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def dopri5(fun, y0, t_out, rtol=1e-9, atol=1e-12, first_step=None, max_steps=100_000):
    """Integrate ``y' = fun(t, y)`` and return the solution at each of ``t_out``.

    Parameters
    ----------
    fun : callable
        ``fun(t, y) -> ndarray``.
    y0 : array_like
        State at ``t_out[0]``.
    t_out : array_like
        Strictly increasing output times; the first one is the initial time.
    rtol, atol : float or array_like
        Local error is kept below ``atol + rtol*|y|`` in the RMS norm.

    Returns
    -------
    ys : ndarray, shape (len(t_out), n)
    stats : IntegratorStats

    An :class:`IntegrationError` raised by ``fun`` propagates with the outputs
    completed so far attached as ``partial``.
    """
    t_out = np.asarray(t_out, dtype=float)
    y = np.array(y0, dtype=float)
    atol = np.broadcast_to(np.asarray(atol, dtype=float), y.shape)
    stats = IntegratorStats()
    ys = np.empty((t_out.size, y.size))
    ys[0] = y
    if t_out.size == 1:
        return ys, stats

    t = t_out[0]
    span = t_out[-1] - t
    f = np.asarray(fun(t, y), dtype=float)
    stats.evaluations += 1
    h = first_step if first_step is not None else _initial_step(fun, t, y, f, rtol, atol, span, stats)
    K = np.empty((7, y.size))
    for i_out in range(1, t_out.size):
        target = t_out[i_out]
        while t < target:
            if stats.steps + stats.rejections >= max_steps:
                raise StepSizeUnderflowError(f"step budget exhausted at t = {t}", t=t)
            min_step = 16 * np.spacing(max(abs(t), abs(target)))
            if h < min_step:
                raise StepSizeUnderflowError(f"step size {h:.3g} underflowed at t = {t}", t=t)
            last = t + h >= target
            step = target - t if last else h
            K[0] = f
            try:
                for s in range(1, 7):
                    K[s] = fun(t + _C[s] * step, y + step * (_A[s] @ K[:s]))
            except IntegrationError as exc:
                exc.partial = (t_out[:i_out].copy(), ys[:i_out].copy())
                raise
            stats.evaluations += 6
            y_new = y + step * (_B5 @ K)
            err = step * (_E @ K)
            en = _error_norm(err, y, y_new, rtol, atol)
            if not np.isfinite(en):
                stats.rejections += 1
                h = step * MIN_FACTOR
                continue
            if en <= 1.0:
                t = target if last else t + step
                y = y_new
                f = K[6].copy()
                stats.steps += 1
                factor = MAX_FACTOR if en == 0 else min(MAX_FACTOR, SAFETY * en ** -0.2)
                # a step clipped to the output grid says nothing about the natural step
                h = max(h, step * factor) if last else step * factor
            else:
                stats.rejections += 1
                h = step * max(MIN_FACTOR, SAFETY * en ** -0.2)
        ys[i_out] = y
    return ys, stats


def _initial_step(fun, t, y, f, rtol, atol, span, stats):
    """Starting step from the usual two-evaluation heuristic."""
    scale = atol + rtol * np.abs(y)
    d0 = np.sqrt(np.mean((y / scale) ** 2))
    d1 = np.sqrt(np.mean((f / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = np.asarray(fun(t + h0, y + h0 * f), dtype=float)
    stats.evaluations += 1
    d2 = np.sqrt(np.mean(((f1 - f) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)
