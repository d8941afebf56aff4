"""Smoothing filters applied before detection.

* a windowed-sinc (Hamming) linear-phase FIR low-pass for the inertial axes,
* a sampled-Gaussian kernel for the pressure channels,
* a heavy 23-tap smoother for the whole-foot pressure sum.

All filters are zero-phase (centered) and pad by replicating the first/last
sample, so output length equals input length and stance plateaus touching the
record boundary are not pulled toward zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EvenTaps, InvalidCutoff, InvalidSigma, TooShort

DC_TOL = 1e-9
PSUM_TAPS = 23
# nominal label only: a 0.02 Hz cutoff is not realizable with 23 taps at 66 Hz
PSUM_NOMINAL_CUTOFF_HZ = 0.02


@dataclass(frozen=True)
class FirFilter:
    coefficients: tuple[float, ...]
    description: str = ""

    def __post_init__(self):
        if len(self.coefficients) % 2 == 0:
            raise EvenTaps(f"{len(self.coefficients)} taps; a centered filter needs an odd count")

    @property
    def taps(self) -> np.ndarray:
        return np.asarray(self.coefficients, dtype=np.float64)

    @property
    def num_taps(self) -> int:
        return len(self.coefficients)

    def frequency_response(self, freqs_hz, sample_rate_hz: float) -> np.ndarray:
        """Complex response H(f) = sum_k w_k exp(-j 2 pi f k / fs), k centered."""
        w = self.taps
        k = np.arange(len(w)) - len(w) // 2
        f = np.atleast_1d(np.asarray(freqs_hz, dtype=np.float64))
        return np.exp(-2j * np.pi * np.outer(f, k) / sample_rate_hz) @ w


@dataclass(frozen=True)
class GaussKernel:
    sigma: float
    taps: tuple[float, ...]


def _check_odd(num_taps: int) -> None:
    if num_taps < 1 or num_taps % 2 == 0:
        raise EvenTaps(f"number of taps must be odd and positive, got {num_taps}")


def design_lowpass(cutoff_hz: float, sample_rate_hz: float, num_taps: int) -> FirFilter:
    """Hamming-windowed sinc low-pass, normalized to unity DC gain."""
    nyquist = sample_rate_hz / 2.0
    if not 0.0 < cutoff_hz < nyquist:
        raise InvalidCutoff(f"cutoff {cutoff_hz} Hz outside (0, {nyquist}) Hz")
    _check_odd(num_taps)
    fc = cutoff_hz / sample_rate_hz
    k = np.arange(num_taps) - num_taps // 2
    h = 2.0 * fc * np.sinc(2.0 * fc * k) * np.hamming(num_taps)
    h = h / h.sum()
    # exact symmetry; numpy's window can differ by an ulp between mirrored taps
    h = 0.5 * (h + h[::-1])
    return FirFilter(tuple(h.tolist()), f"hamming windowed-sinc lowpass fc={cutoff_hz} Hz fs={sample_rate_hz} Hz taps={num_taps}")


def apply_fir(f: FirFilter, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("apply_fir expects a 1-D sequence")
    w = f.taps
    half = len(w) // 2
    if half == 0:
        return x * w[0]
    padded = np.pad(x, half, mode="edge")
    # taps are symmetric so convolution equals correlation
    return np.convolve(padded, w, mode="valid")


def gauss_kernel(sigma: float = 5.0, taps: int = 7) -> GaussKernel:
    if not sigma > 0:
        raise InvalidSigma(f"sigma must be positive, got {sigma}")
    _check_odd(taps)
    k = np.arange(taps) - taps // 2
    g = np.exp(-(k.astype(np.float64) ** 2) / (2.0 * sigma * sigma))
    g = g / g.sum()
    g = 0.5 * (g + g[::-1])
    return GaussKernel(float(sigma), tuple(g.tolist()))


def gauss_smooth(x, sigma: float = 5.0, taps: int = 7) -> np.ndarray:
    kern = gauss_kernel(sigma, taps)
    return apply_fir(FirFilter(kern.taps, f"gauss sigma={sigma} taps={taps}"), x)


def pressure_sum_filter(num_taps: int = PSUM_TAPS) -> FirFilter:
    """The 23-tap heavy smoother for the pressure sum.

    This is the low-cutoff limit of the windowed-sinc design (the sinc term
    flattens to a constant), i.e. a normalized Hamming window.
    """
    _check_odd(num_taps)
    h = np.hamming(num_taps) if num_taps > 1 else np.ones(1)
    h = h / h.sum()
    h = 0.5 * (h + h[::-1])
    return FirFilter(
        tuple(h.tolist()),
        f"pressure-sum smoother taps={num_taps} (nominal cutoff {PSUM_NOMINAL_CUTOFF_HZ} Hz)",
    )


def pressure_sum_smooth(P, num_taps: int = PSUM_TAPS) -> np.ndarray:
    P = np.asarray(P, dtype=np.float64)
    if len(P) < num_taps:
        raise TooShort(f"pressure sum has {len(P)} samples, need at least {num_taps}")
    return apply_fir(pressure_sum_filter(num_taps), P)


def filter_columns(f: FirFilter, X) -> np.ndarray:
    """Apply ``f`` to every column of a 2-D array."""
    X = np.asarray(X, dtype=np.float64)
    if len(X) == 0:
        return X.copy()
    return np.column_stack([apply_fir(f, X[:, j]) for j in range(X.shape[1])])
