"""Causal convolution and the exact recurrent reference path.

The FFT path and the direct O(L^2) summation are deliberately independent
implementations of the same contract; tests hold them to 1e-10 of each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DivergedStateError
from .ssm import DiscreteSystem

_DIVERGENCE_LIMIT = 1e100


@dataclass(frozen=True)
class SequenceBatch:
    """Real-valued sequences, shaped (batch, length, features)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 3:
            raise DimensionError("expected (batch, length, features) values")
        if not np.all(np.isfinite(v)):
            raise DimensionError("non-finite sequence values")
        object.__setattr__(self, "values", v)

    @property
    def batch(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]

    @property
    def features(self) -> int:
        return self.values.shape[2]


def next_pow2(n: int) -> int:
    """Smallest power of two >= n (and >= 1)."""
    return 1 << max(0, int(n - 1).bit_length())


def causal_conv_fft(taps: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Non-circular causal convolution, truncated to the input length.

    y[k] = sum_{d=0}^{min(k, L_k - 1)} taps[d] * u[k - d]

    Both operands are zero-padded to the next power of two at or above
    L + L_k - 1, so the circular transform realizes an exact linear
    convolution. Works on the last axis; leading axes of ``u`` broadcast.
    """
    taps = np.asarray(taps, dtype=float)
    u = np.asarray(u, dtype=float)
    l = u.shape[-1]
    if taps.ndim != 1 or taps.size == 0:
        raise DimensionError("taps must be a nonempty 1-D sequence")
    size = next_pow2(l + taps.shape[0] - 1)
    y = np.fft.irfft(np.fft.rfft(u, n=size) * np.fft.rfft(taps, n=size), n=size)
    return y[..., :l]


def causal_conv_direct(taps: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Direct-summation twin of ``causal_conv_fft`` (1-D only, O(L^2))."""
    taps = np.asarray(taps, dtype=float)
    u = np.asarray(u, dtype=float)
    l = u.shape[0]
    y = np.zeros(l)
    for d in range(min(taps.shape[0], l)):
        y[d:] += taps[d] * u[: l - d]
    return y


def recurrent_s4(d: DiscreteSystem, u: np.ndarray) -> np.ndarray:
    """Step the discrete SSM x_k = a_bar x_{k-1} + b_bar u_k, y_k = <c_bar, x_k>.

    Starts from x_{-1} = 0 and returns the real part of the output sequence.
    This is the exact reference dynamics every kernel path is checked against.
    """
    u = np.asarray(u, dtype=float)
    x = np.zeros(d.n, dtype=complex)
    y = np.empty(u.shape[0])
    for k, uk in enumerate(u):
        x = d.a_bar @ x + d.b_bar * uk
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > _DIVERGENCE_LIMIT:
            raise DivergedStateError(k)
        y[k] = np.vdot(d.c_bar, x).real
    return y
