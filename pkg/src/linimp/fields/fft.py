"""Radix-2 unitary discrete Fourier transform."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidLength


def _check_length(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise InvalidLength(f"transform length {n} is not a power of two")
    return n.bit_length() - 1


def _bit_reverse(n: int, bits: int) -> np.ndarray:
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def _transform(x: np.ndarray, sign: int) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    n = x.shape[-1]
    bits = _check_length(n)
    y = x[..., _bit_reverse(n, bits)].copy()
    half = 1
    while half < n:
        # butterflies of length 2*half, vectorised over blocks and leading axes
        w = np.exp(sign * 1j * np.pi * np.arange(half) / half)
        y = y.reshape(*x.shape[:-1], n // (2 * half), 2, half)
        even = y[..., 0, :].copy()
        odd = y[..., 1, :] * w
        y[..., 0, :] = even + odd
        y[..., 1, :] = even - odd
        y = y.reshape(x.shape)
        half *= 2
    return y / np.sqrt(n)


def fft(values, inverse: bool = False) -> np.ndarray:
    """Unitary DFT along the last axis: X_k = n^{-1/2} sum_j x_j e^{-2 pi i jk/n}.

    Parameters
    ----------
    values : array_like
        Complex samples; the last axis must have power-of-two length.
    inverse : bool
        Apply the inverse (conjugate) transform instead.
    """
    return _transform(values, +1 if inverse else -1)


def ifft(values) -> np.ndarray:
    return _transform(values, +1)


def dft_direct(values, inverse: bool = False) -> np.ndarray:
    """O(n^2) reference transform with the same normalisation as :func:`fft`."""
    x = np.asarray(values, dtype=complex)
    n = x.shape[-1]
    sign = 1 if inverse else -1
    jk = np.outer(np.arange(n), np.arange(n))
    return x @ np.exp(sign * 2j * np.pi * jk / n).T / np.sqrt(n)
