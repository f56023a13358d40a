"""Temporal autocorrelation, average power and power spectral density.

The forecasting path uses the biased linear-lag estimator

    gamma(i) = 1/(n+1) * sum_{k=i}^{n} s_k * s_{k-i}

verbatim. The circular estimator lives only in the Wiener-Khinchin
self-test, where the DFT identity holds exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_series


@dataclass(frozen=True)
class AutocorrVector:
    gamma: np.ndarray
    n: int

    def __len__(self):
        return self.gamma.size


@dataclass(frozen=True)
class PowerSpectrum:
    density: np.ndarray

    @property
    def frequencies(self) -> np.ndarray:
        """Normalized frequencies ``k / N`` of each bin."""
        return np.arange(self.density.size) / self.density.size


def autocorr(series) -> AutocorrVector:
    """Biased linear-lag autocorrelation ``gamma(0..n)`` of ``s_0..s_n``."""
    s = check_series(series, min_length=1)
    size = s.size
    gamma = np.correlate(s, s, mode="full")[size - 1:] / size
    gamma[0] = np.dot(s, s) / size
    return AutocorrVector(gamma=gamma, n=size - 1)


def avg_power(series) -> float:
    """Mean squared value; identical to ``autocorr(series).gamma[0]``."""
    s = check_series(series, min_length=1)
    return float(np.dot(s, s) / s.size)


def psd(series) -> PowerSpectrum:
    """Periodogram ``|DFT(s)|^2 / (n+1)`` over the finite window."""
    s = check_series(series, min_length=2)
    spectrum = np.fft.fft(s)
    density = (spectrum.real ** 2 + spectrum.imag ** 2) / s.size
    return PowerSpectrum(density=density)


def circular_autocorr(series) -> np.ndarray:
    """``r(k) = 1/N * sum_t s_t * s_{(t-k) mod N}`` evaluated lag by lag."""
    s = check_series(series, min_length=1)
    size = s.size
    return np.array([np.dot(s, np.roll(s, k)) for k in range(size)]) / size


def wiener_khinchin_residual(series, circular: bool = True) -> float:
    """Max absolute gap between the DFT of the autocorrelation and the PSD.

    With ``circular=True`` the identity is exact, so the residual only
    reflects rounding. With ``circular=False`` the linear ``gamma`` is
    wrapped onto the same N-point grid (lags up to N/2 on each side); the
    residual is then the truncation error of the finite window, reported
    relative to the mean spectral density.
    """
    s = check_series(series, min_length=4)
    size = s.size
    density = psd(s).density
    if circular:
        r = circular_autocorr(s)
    else:
        gamma = autocorr(s).gamma
        r = np.zeros(size)
        half = size // 2
        r[: half + 1] = gamma[: half + 1]
        r[size - half:] = gamma[1: half + 1][::-1]
        if size % 2 == 0:
            r[half] = gamma[half]
    transformed = np.fft.fft(r)
    residual = float(np.max(np.abs(transformed - density)))
    if not circular:
        scale = float(density.mean())
        return residual / scale if scale > 0 else residual
    return residual
