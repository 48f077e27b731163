"""Quadrature helpers shared by the fixed-point operators and the verifiers.

The Picard maps need the running integral at every node of a uniform grid,
so a vectorized cumulative composite Simpson rule is implemented here.  On
pairs of intervals the rule integrates the interpolating parabola over both
halves; the half-interval weights are the standard (5, 8, -1)/12 ones, which
keeps the scheme fourth order at every node, not just the even ones.

Identity checks on assembled profiles integrate on the profile's own
(non-uniform) grid; those go through :func:`scipy.integrate.simpson` /
``cumulative_simpson`` so the defect measures solution error rather than
resampling error.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import cumulative_simpson as _scipy_cumulative_simpson
from scipy.integrate import simpson as _scipy_simpson


def cumulative_simpson_uniform(y: np.ndarray, h: float) -> np.ndarray:
    """Running integral of samples ``y`` on a uniform grid with spacing ``h``.

    Returns an array ``I`` with ``I[0] = 0`` and ``I[k] ~ int_0^{k h} y``.
    Fourth-order accurate at every node for smooth integrands.
    """
    y = np.asarray(y, dtype=float)
    m = y.size
    out = np.zeros(m)
    if m < 2:
        return out
    if m == 2:
        out[1] = 0.5 * h * (y[0] + y[1])
        return out

    # Integral over the first and second halves of each interval pair, both
    # from the parabola through (y[i], y[i+1], y[i+2]).  Pairing a "first"
    # with the matching "second" reproduces the classic Simpson pair, whose
    # symmetric h^4 error terms cancel; composing one-sided halves instead
    # would accumulate them and lose an order globally.
    first = h / 12.0 * (5.0 * y[:-2] + 8.0 * y[1:-1] - y[2:])
    second = h / 12.0 * (-y[:-2] + 8.0 * y[1:-1] + 5.0 * y[2:])

    inc = np.empty(m - 1)
    even_idx = np.arange(0, m - 2, 2)
    inc[even_idx] = first[even_idx]
    odd_idx = np.arange(1, m - 1, 2)
    inc[odd_idx] = second[odd_idx - 1]
    if (m - 1) % 2 == 1:
        # odd interval count: close with the trailing-parabola half rule
        inc[m - 2] = second[m - 3]
    if m >= 4:
        # cubic startup: the first two intervals from the cubic through the
        # first four nodes, so integrands vanishing like s^3 at the origin
        # (the degenerate-moment case) keep their first-node accuracy; the
        # two increments still sum to the classic Simpson pair over [0, 2h].
        inc[0] = h / 24.0 * (9.0 * y[0] + 19.0 * y[1] - 5.0 * y[2] + y[3])
        inc[1] = h / 24.0 * (-y[0] + 13.0 * y[1] + 13.0 * y[2] - y[3])
    np.cumsum(inc, out=out[1:])
    return out


def cumulative_on_grid(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Running integral of ``y`` sampled on the (possibly non-uniform) ``x``."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.size < 3:
        out = np.zeros(y.size)
        if y.size == 2:
            out[1] = 0.5 * (x[1] - x[0]) * (y[0] + y[1])
        return out
    return _scipy_cumulative_simpson(y, x=x, initial=0.0)


def integral_on_grid(y: np.ndarray, x: np.ndarray) -> float:
    """Composite Simpson integral of ``y`` over the full extent of ``x``."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.size < 2:
        return 0.0
    if y.size == 2:
        return 0.5 * (x[1] - x[0]) * (y[0] + y[1])
    return float(_scipy_simpson(y, x=x))
