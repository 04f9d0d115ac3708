"""Periodic grid functions with cached Fourier coefficients."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


class SpectralField:
    """Real samples of a periodic function on ``[-L/2, L/2)``.

    Samples live at ``x_j = -L/2 + j L / n``.  The real FFT of the samples
    (numpy's unnormalized ``rfft`` convention) is computed on first use and
    cached; a field built from modes synthesizes its samples lazily the same
    way.  Instances are treated as immutable: operations return new fields.
    """

    __slots__ = ("n", "domain_length", "_values", "_modes")

    def __init__(self, values=None, domain_length: float = 2 * np.pi, *, modes=None, n=None):
        if values is None and modes is None:
            raise ParameterError("SpectralField needs values or modes")
        if values is not None:
            values = np.asarray(values, dtype=float)
            if values.ndim != 1:
                raise ParameterError("values must be one-dimensional")
            n = values.size
        else:
            modes = np.asarray(modes, dtype=complex)
            if n is None:
                n = 2 * (modes.size - 1)
            if modes.size != n // 2 + 1:
                raise ParameterError(f"expected {n // 2 + 1} modes for n={n}, got {modes.size}")
        if not _is_power_of_two(n) or n < 8:
            raise ParameterError(f"grid size must be a power of two >= 8, got {n}")
        if not domain_length > 0:
            raise ParameterError(f"domain length must be positive, got {domain_length}")
        self.n = int(n)
        self.domain_length = float(domain_length)
        self._values = values
        self._modes = modes

    @classmethod
    def from_function(cls, func, n: int, domain_length: float) -> "SpectralField":
        return cls(func(grid(n, domain_length)), domain_length)

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = np.fft.irfft(self._modes, n=self.n)
        return self._values

    @property
    def modes(self) -> np.ndarray:
        if self._modes is None:
            self._modes = np.fft.rfft(self._values)
        return self._modes

    @property
    def dx(self) -> float:
        return self.domain_length / self.n

    @property
    def x(self) -> np.ndarray:
        return grid(self.n, self.domain_length)

    @property
    def wavenumbers(self) -> np.ndarray:
        return wavenumbers(self.n, self.domain_length)

    def with_values(self, values) -> "SpectralField":
        return SpectralField(values, self.domain_length)

    def with_modes(self, modes) -> "SpectralField":
        return SpectralField(modes=modes, n=self.n, domain_length=self.domain_length)

    def derivative(self) -> "SpectralField":
        k = self.wavenumbers.astype(complex)
        if self.n % 2 == 0:
            k[-1] = 0.0  # Nyquist mode has no well-defined odd derivative
        return self.with_modes(1j * k * self.modes)

    def evaluate(self, points, chunk: int = 256) -> np.ndarray:
        """Trigonometric interpolant at arbitrary points (periodic)."""
        points = np.atleast_1d(np.asarray(points, dtype=float))
        c = self.modes / self.n
        k = self.wavenumbers
        weights = np.full(c.size, 2.0)
        weights[0] = 1.0
        weights[-1] = 1.0  # Nyquist (n even)
        coef = weights * c
        out = np.empty(points.size)
        shifted = points + 0.5 * self.domain_length
        for start in range(0, points.size, chunk):
            p = shifted[start:start + chunk]
            phase = np.exp(1j * np.outer(p, k))
            out[start:start + chunk] = (phase @ coef).real
        return out

    def l2_norm(self) -> float:
        return float(np.sqrt(self.dx * np.sum(self.values ** 2)))

    def __repr__(self) -> str:
        return f"SpectralField(n={self.n}, domain_length={self.domain_length})"


def grid(n: int, domain_length: float) -> np.ndarray:
    return -0.5 * domain_length + domain_length * np.arange(n) / n


def wavenumbers(n: int, domain_length: float) -> np.ndarray:
    """Nonnegative angular wavenumbers matching ``rfft`` ordering."""
    return 2.0 * np.pi * np.arange(n // 2 + 1) / domain_length


def parseval_weights(n: int) -> np.ndarray:
    """Multiplicities of rfft modes in the full two-sided spectrum."""
    w = np.full(n // 2 + 1, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    return w
