"""Trigonometric interpolation of sampled closed curves."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class PeriodicCurve:
    """A smooth closed curve known at ``N`` uniform samples over one period.

    Evaluation anywhere uses the trigonometric interpolant; the Nyquist mode
    of an even ``N`` is split symmetrically so that the interpolant is real.
    """

    period: float
    samples: np.ndarray  # (N, d), samples[i] = x(i * period / N)
    _coef: np.ndarray = field(init=False, repr=False)
    _freq: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or len(s) < 4:
            raise DomainError("need at least 4 samples of a vector-valued curve")
        if not self.period > 0:
            raise DomainError("period must be positive")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        N = len(s)
        c = np.fft.fft(s, axis=0) / N
        k = np.fft.fftfreq(N, d=1.0 / N)
        if N % 2 == 0:
            c = c.copy()
            c[N // 2] *= 0.5
            c = np.concatenate([c, c[N // 2:N // 2 + 1]])
            k = np.concatenate([k, [N // 2]])
        object.__setattr__(self, "_coef", c)
        object.__setattr__(self, "_freq", k)

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) * (self.period / self.n_samples)

    def __call__(self, t, derivative: int = 0) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        w = TWO_PI / self.period
        ph = np.exp(1j * w * np.multiply.outer(t, self._freq))
        c = self._coef
        if derivative:
            c = c * ((1j * w * self._freq) ** derivative)[:, None]
        return (ph @ c).real

    def derivative_samples(self, order: int = 1) -> np.ndarray:
        """Spectral derivative at the sample times."""
        N = self.n_samples
        k = np.fft.fftfreq(N, d=1.0 / N)
        if N % 2 == 0 and order % 2 == 1:
            k[N // 2] = 0.0
        w = TWO_PI / self.period
        c = np.fft.fft(self.samples, axis=0) * ((1j * w * k) ** order)[:, None]
        return np.fft.ifft(c, axis=0).real

    def resample(self, N: int, shift: float = 0.0) -> "PeriodicCurve":
        t = shift + np.arange(N) * (self.period / N)
        return PeriodicCurve(self.period, self(t))

    def spectrum_tail(self) -> float:
        """Relative size of the upper-quarter Fourier modes (resolution check)."""
        a = np.abs(self._coef[:-1] if self.n_samples % 2 == 0 else self._coef)
        k = np.abs(self._freq[: len(a)])
        top = a[k >= self.n_samples // 4].max(initial=0.0)
        return float(top / max(a.max(), 1e-300))


def cumulative_integral(f: np.ndarray, period: float) -> tuple[np.ndarray, float]:
    """Spectral antiderivative ``F(t_i) = int_0^{t_i} f`` of uniform periodic samples.

    Returns the values at the sample times and the integral over one period.
    """
    f = np.asarray(f, dtype=float)
    N = len(f)
    c = np.fft.fft(f) / N
    total = c[0].real * period
    k = np.fft.fftfreq(N, d=1.0 / N)
    w = TWO_PI / period
    safe = np.where(k == 0, 1.0, k)
    g = np.where(k == 0, 0.0, c / (1j * w * safe))
    if N % 2 == 0:
        g[N // 2] = 0.0
    periodic = np.fft.ifft(g * N).real
    t = np.arange(N) * (period / N)
    return c[0].real * t + periodic - periodic[0], float(total)


def reparametrize(curve: PeriodicCurve, rate: np.ndarray, n_out: int | None = None,
                 newton_steps: int = 8) -> PeriodicCurve:
    """Change the time variable of a closed curve.

    ``rate`` holds ``d(new time)/d(old time) > 0`` at the sample times of
    ``curve``.  The result is sampled uniformly in the new time; the new
    sample positions are found by Newton iteration on the spectral
    antiderivative of ``rate``.
    """
    rate = np.asarray(rate, dtype=float)
    if np.any(rate <= 0):
        raise DomainError("reparametrization rate must be positive")
    N = curve.n_samples
    n_out = n_out or N
    F, total = cumulative_integral(rate, curve.period)
    mean_rate = total / curve.period
    s_grid = curve.times
    wiggle = PeriodicCurve(curve.period, (F - mean_rate * s_grid)[:, None])
    speed = PeriodicCurve(curve.period, rate[:, None])
    targets = np.arange(n_out) * (total / n_out)
    s = np.interp(targets, np.append(F, total), np.append(s_grid, curve.period))
    for _ in range(newton_steps):
        Fs = mean_rate * s + wiggle(s)[:, 0]
        step = (Fs - targets) / speed(s)[:, 0]
        s = s - step
        if np.max(np.abs(step)) <= 1e-15 * curve.period:
            break
    return PeriodicCurve(total, curve(s))
