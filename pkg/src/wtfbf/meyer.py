"""Lemarie-Meyer wavelet and scaling filters in the Fourier domain.

Conventions: f_hat(xi) = int f(x) exp(-i x xi) dx. The wavelet transform
psi_hat(xi) = exp(i xi / 2) b(xi) with b real, even and supported in
2pi/3 <= |xi| <= 8pi/3, so that psi is real and symmetric about t = -1/2.
"""
from dataclasses import dataclass, field

import numpy as np

TWO_PI_3 = 2.0 * np.pi / 3.0
FOUR_PI_3 = 4.0 * np.pi / 3.0
EIGHT_PI_3 = 8.0 * np.pi / 3.0


def nu(x):
    """Transition polynomial x^4 (35 - 84x + 70x^2 - 20x^3), clipped to [0, 1]."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return x**4 * (35.0 - 84.0 * x + 70.0 * x**2 - 20.0 * x**3)


@dataclass(frozen=True)
class MeyerFilterBank:
    """Immutable Meyer filter bank with a per-grid cache of sampled filters."""

    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def aux_polynomial(self, x):
        return nu(x)

    def psi_abs(self, xi):
        """b(xi) = |psi_hat(xi)|."""
        a = np.abs(np.asarray(xi, dtype=float))
        out = np.zeros_like(a)
        lo = (a > TWO_PI_3) & (a <= FOUR_PI_3)
        hi = (a > FOUR_PI_3) & (a < EIGHT_PI_3)
        out[lo] = np.sin(0.5 * np.pi * nu(3.0 * a[lo] / (2.0 * np.pi) - 1.0))
        out[hi] = np.cos(0.5 * np.pi * nu(3.0 * a[hi] / (4.0 * np.pi) - 1.0))
        return out

    def psi_hat(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.exp(0.5j * xi) * self.psi_abs(xi)

    def phi_hat(self, xi):
        a = np.abs(np.asarray(xi, dtype=float))
        out = np.zeros_like(a)
        out[a <= TWO_PI_3] = 1.0
        mid = (a > TWO_PI_3) & (a < FOUR_PI_3)
        out[mid] = np.cos(0.5 * np.pi * nu(3.0 * a[mid] / (2.0 * np.pi) - 1.0))
        return out

    def level_filter(self, j, xi):
        """Filter of level j on frequencies xi: phi_hat for j = -1, else psi_hat(2^-j xi)."""
        if j == -1:
            return self.phi_hat(xi).astype(complex)
        return self.psi_hat(np.ldexp(np.asarray(xi, dtype=float), -j))

    def sampled(self, j, n, dx):
        """Level-j filter on the FFT frequencies of an n-point grid with spacing dx (cached)."""
        key = (int(j), int(n), float(dx))
        out = self._cache.get(key)
        if out is None:
            xi = 2.0 * np.pi * np.fft.fftfreq(n, dx)
            out = self.level_filter(j, xi)
            out.setflags(write=False)
            self._cache[key] = out
        return out


DEFAULT_BANK = MeyerFilterBank()


def psi_hat(bank, xi):
    return bank.psi_hat(xi)


def phi_hat(bank, xi):
    return bank.phi_hat(xi)


def atom_samples(bank, j, k, n, dx, scaling=False):
    """Samples of psi(2^j t - k) (or phi(t - k) when scaling) on a periodic grid.

    The grid is t_m = m dx, m = 0..n-1, with period n dx; values are the
    periodized atom, obtained from the filter by inverse FFT.
    """
    xi = 2.0 * np.pi * np.fft.fftfreq(n, dx)
    if scaling:
        g = bank.phi_hat(xi).astype(complex)
        shift = float(k)
        scale = 1.0
    else:
        g = bank.psi_hat(np.ldexp(xi, -j))
        shift = k * 2.0**-j
        scale = 2.0**-j
    spec = scale * g * np.exp(-1j * xi * shift)
    return np.real(np.fft.ifft(spec)) / dx
