"""Closed-form integrals of exponentials on an interval.

All helpers are written in sinc form so they stay accurate when the
frequency difference goes to zero (degenerate eigenvalues, diagonal Gram
entries). Arguments broadcast like numpy ufuncs.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import exprel

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]

# below this |w t| the power series of (e^{wt} - 1) / w is used
_SERIES_THRESHOLD = 1e-2


def _half_sinc(w: ArrayLike, length: float) -> FloatArray:
    # sin(wL/2) / (wL/2); np.sinc is the normalized sinc
    return np.asarray(np.sinc(np.asarray(w, dtype=float) * length / (2 * np.pi)))


def cos_integral(w: ArrayLike, start: float, length: float) -> FloatArray:
    """Integral of cos(w t) over [start, start + length]."""
    w = np.asarray(w, dtype=float)
    center = start + length / 2
    return np.asarray(length * np.cos(w * center) * _half_sinc(w, length))


def sin_integral(w: ArrayLike, start: float, length: float) -> FloatArray:
    """Integral of sin(w t) over [start, start + length]."""
    w = np.asarray(w, dtype=float)
    center = start + length / 2
    return np.asarray(length * np.sin(w * center) * _half_sinc(w, length))


def exp_integral(w: ArrayLike, start: float, length: float) -> ComplexArray:
    """Integral of exp(i w t) over [start, start + length]."""
    w = np.asarray(w, dtype=float)
    center = start + length / 2
    return np.asarray(length * np.exp(1j * w * center) * _half_sinc(w, length))


def decay_integral(s: ArrayLike, start: float, length: float) -> FloatArray:
    """Integral of exp(-s t) over [start, start + length] for real s."""
    s = np.asarray(s, dtype=float)
    return np.asarray(np.exp(-s * start) * length * exprel(-s * length))


def exprel_integral(w: ArrayLike, t: ArrayLike) -> ComplexArray:
    """Integral of exp(w r) for r in [0, t], complex w, elementwise.

    Equals ``(exp(w t) - 1) / w`` with the limit ``t`` at ``w = 0``.
    """
    w = np.asarray(w, dtype=complex)
    t = np.asarray(t, dtype=float)
    w, t = np.broadcast_arrays(w, t)
    x = w * t
    small = np.abs(x) < _SERIES_THRESHOLD
    out = np.empty(x.shape, dtype=complex)
    xs = x[small]
    out[small] = t[small] * (1 + xs / 2 * (1 + xs / 3 * (1 + xs / 4 * (1 + xs / 5))))
    big = ~small
    out[big] = (np.exp(x[big]) - 1) / w[big]
    return out


def format_float(value: float) -> str:
    """Format a float with 17 significant digits (exact round trip)."""
    return f"{value:.17g}"
