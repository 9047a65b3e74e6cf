"""Server-side scaling of the superposed signal back into model-update units.

The server estimates the mean update as s_hat = y / (alpha * N). The policies
differ only in the denoising factor alpha:

- fading:            alpha = mean of the active effective gains,
- mse:               alpha minimizing the aggregation mean-square error,
                     (sum of squared gains + phi) / (sum of gains),
- variance-analytic: alpha = sqrt(sum of expected squared gains + phi) / N,
                     which assumes unit per-dimension update power,
- variance-empirical: the same idea without channel state: alpha =
                     sqrt(||y||^2 / dim) / N, the raw per-dimension second
                     moment of the received signal (no mean subtraction).

The mse and fading factors need per-device channel knowledge; the empirical
variance factor needs only the received vector.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DegenerateChannelError, DomainError, EmptyActiveSetError


def fading_alpha(amplitudes) -> float:
    """Average effective gain over the active set."""
    amplitudes = np.asarray(amplitudes, dtype=float)
    if len(amplitudes) == 0:
        raise EmptyActiveSetError("fading_alpha: no active devices")
    return float(np.mean(amplitudes))


def mse_alpha(amplitudes, squared_gains, phi: float) -> float:
    """MSE-optimal factor (sum_m a_m^2 + phi) / (sum_m a_m)."""
    amplitudes = np.asarray(amplitudes, dtype=float)
    squared_gains = np.asarray(squared_gains, dtype=float)
    if len(amplitudes) == 0:
        raise EmptyActiveSetError("mse_alpha: no active devices")
    if len(amplitudes) != len(squared_gains):
        raise DomainError("mse_alpha: amplitudes and squared gains must align")
    if phi < 0.0:
        raise DomainError("mse_alpha: phi must be >= 0")
    denom = float(np.sum(amplitudes))
    if denom <= 0.0:
        raise DegenerateChannelError("mse_alpha: sum of amplitudes is not positive")
    return (float(np.sum(squared_gains)) + phi) / denom


def mse_objective(alpha: float, amplitudes, phi: float, n_active: int, dim: int) -> float:
    """Aggregation MSE for equal updates of unit per-dimension power.

    (dim / N^2) * sum_m (a_m / alpha - 1)^2 + dim * phi / (alpha^2 N^2)
    """
    if alpha <= 0.0:
        raise DomainError("mse_objective: alpha must be > 0")
    amplitudes = np.asarray(amplitudes, dtype=float)
    misalign = float(np.sum((amplitudes / alpha - 1.0) ** 2))
    return dim / n_active ** 2 * misalign + dim * phi / (alpha ** 2 * n_active ** 2)


def variance_alpha_analytic(expected_sq_gains, phi: float) -> float:
    """sqrt(sum_m P_up d_m^-xi + phi) / N from expected channel statistics."""
    expected_sq_gains = np.asarray(expected_sq_gains, dtype=float)
    n = len(expected_sq_gains)
    if n == 0:
        raise EmptyActiveSetError("variance_alpha_analytic: no active devices")
    if phi < 0.0 or np.any(expected_sq_gains < 0.0):
        raise DomainError("variance_alpha_analytic: powers must be >= 0")
    return math.sqrt(float(np.sum(expected_sq_gains)) + phi) / n


def variance_alpha_empirical(received: np.ndarray, n_active: int) -> float:
    """sqrt(||y||^2 / dim) / N: per-dimension RMS of the received signal itself."""
    if n_active < 1:
        raise EmptyActiveSetError("variance_alpha_empirical: no active devices")
    received = np.asarray(received, dtype=float)
    if received.size == 0:
        raise DomainError("variance_alpha_empirical: empty received vector")
    return math.sqrt(float(np.mean(received ** 2))) / n_active


def denoise(received: np.ndarray, alpha: float, n_active: int) -> np.ndarray:
    """Scale the superposition back to an estimate of the mean update: y / (alpha N)."""
    if n_active < 1:
        raise EmptyActiveSetError("denoise: no active devices")
    if alpha <= 0.0:
        raise DegenerateChannelError(f"denoise: non-positive factor alpha = {alpha!r}")
    return received / (alpha * n_active)


def ideal_aggregate(updates) -> np.ndarray:
    """What the server wants: the plain mean of the local updates."""
    if len(updates) == 0:
        raise EmptyActiveSetError("ideal_aggregate: no active devices")
    return np.mean(np.stack(updates), axis=0)


def aggregation_error(estimate: np.ndarray, ideal: np.ndarray) -> float:
    """Squared Euclidean distance ||s_hat - s||^2."""
    diff = np.asarray(estimate) - np.asarray(ideal)
    return float(np.dot(diff, diff))
