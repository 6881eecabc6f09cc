"""Uniform position/momentum lattices and wavefunctions living on them.

Momentum amplitudes use the unitary convention

    phi(p_j) = (2 pi hbar)^(-1/2) * sum_i psi(x_i) exp(-i p_j x_i / hbar) dx

so that sums weighted by ``dx`` and ``dp`` approximate the continuum
integrals directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

NORM_TOL = 1e-8


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and self.mass > 0):
            raise ValueError(f"hbar and mass must be positive, got {self.hbar}, {self.mass}")


@dataclass(frozen=True)
class Grid:
    """Periodic lattice of ``n`` nodes ``x_min + i*dx`` covering [x_min, x_max)."""

    x_min: float
    x_max: float
    n: int
    hbar: float = 1.0
    x: np.ndarray = field(init=False, repr=False, compare=False)
    momenta: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.n
        if isinstance(n, bool) or int(n) != n or n < 16 or (int(n) & (int(n) - 1)):
            raise ValueError(f"grid size must be a power of two >= 16, got {n}")
        if not self.x_max > self.x_min:
            raise ValueError(f"x_max must exceed x_min, got [{self.x_min}, {self.x_max}]")
        object.__setattr__(self, "n", int(n))
        x = self.x_min + self.dx * np.arange(self.n)
        # fftshifted order: j = -n/2, ..., n/2 - 1
        j = np.arange(-self.n // 2, self.n // 2)
        p = 2 * np.pi * self.hbar * j / (self.n * self.dx)
        x.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "momenta", p)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def dp(self) -> float:
        return 2 * np.pi * self.hbar / (self.n * self.dx)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    def contains(self, X: float) -> bool:
        return self.x_min <= X <= self.x_max


def make_grid(x_min: float, x_max: float, n: int, hbar: float = 1.0) -> Grid:
    return Grid(float(x_min), float(x_max), n, float(hbar))


@dataclass(frozen=True)
class WaveFunction:
    grid: Grid
    amps: np.ndarray
    time: float = 0.0
    constants: PhysicalConstants = PhysicalConstants()

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex)
        if amps.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} amplitudes, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        if self.constants.hbar != self.grid.hbar:
            raise ValueError("grid and constants disagree on hbar")
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2) * self.grid.dx)

    def replace(self, amps: np.ndarray, time: float) -> "WaveFunction":
        return WaveFunction(self.grid, amps, time, self.constants)

    def momentum(self) -> np.ndarray:
        return to_momentum(self)


def to_momentum(psi: WaveFunction) -> np.ndarray:
    """Momentum amplitudes on ``psi.grid.momenta`` (fftshifted order)."""
    g = psi.grid
    phase = np.exp(-1j * g.momenta * g.x_min / g.hbar)
    return g.dx / np.sqrt(2 * np.pi * g.hbar) * phase * np.fft.fftshift(np.fft.fft(psi.amps))


def from_momentum(grid: Grid, phi: np.ndarray) -> np.ndarray:
    """Inverse of :func:`to_momentum`; returns position amplitudes."""
    phase = np.exp(1j * grid.momenta * grid.x_min / grid.hbar)
    return np.fft.ifft(np.fft.ifftshift(phi * phase)) * np.sqrt(2 * np.pi * grid.hbar) / grid.dx


def momentum_norm2(grid: Grid, phi: np.ndarray) -> float:
    return float(np.sum(np.abs(phi) ** 2) * grid.dp)


def evaluate_at(grid: Grid, phi: np.ndarray, X: float, derivative: bool = False) -> complex:
    """Band-limited interpolant of psi (or d psi/dx) at an arbitrary point X."""
    p = grid.momenta
    kernel = np.exp(1j * p * X / grid.hbar)
    if derivative:
        kernel = kernel * (1j * p / grid.hbar)
    return complex(np.sum(kernel * phi) * grid.dp / np.sqrt(2 * np.pi * grid.hbar))


def edge_probability(psi: WaveFunction, fraction: float = 1 / 32) -> float:
    """Probability held in the outer ``fraction`` of the grid on each side."""
    k = max(1, int(psi.grid.n * fraction))
    w = np.abs(psi.amps) ** 2
    return float((w[:k].sum() + w[-k:].sum()) * psi.grid.dx)


Observable = Literal["position", "momentum", "kinetic_energy", "position_variance"]


def expectation(psi: WaveFunction, observable: Observable) -> float:
    n2 = psi.norm2
    if abs(n2 - 1) > NORM_TOL:
        raise ValueError(f"wavefunction not normalized (norm^2 = {n2!r})")
    g = psi.grid
    rho = np.abs(psi.amps) ** 2 * g.dx
    if observable == "position":
        return float(np.sum(rho * g.x))
    if observable == "position_variance":
        mean = np.sum(rho * g.x)
        return float(np.sum(rho * (g.x - mean) ** 2))
    w = np.abs(to_momentum(psi)) ** 2 * g.dp
    if observable == "momentum":
        return float(np.sum(w * g.momenta))
    if observable == "kinetic_energy":
        return float(np.sum(w * g.momenta**2) / (2 * psi.constants.mass))
    raise ValueError(f"unknown observable {observable!r}")
