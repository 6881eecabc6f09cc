"""Initial wavepackets and crossing-state overlaps."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qgrid import Grid, PhysicalConstants, WaveFunction, to_momentum

EDGE_AMPLITUDE_TOL = 1e-10


@dataclass(frozen=True)
class GaussianSpec:
    x0: float
    p0: float
    sigma_q: float

    def __post_init__(self):
        if not self.sigma_q > 0:
            raise ValueError(f"sigma_q must be positive, got {self.sigma_q}")


@dataclass(frozen=True)
class CrossingAmplitude:
    value: complex
    branch: int
    point: float

    @property
    def density(self) -> float:
        return abs(self.value) ** 2


def parse_branch(alpha) -> int:
    if alpha in (1, "+", "plus"):
        return 1
    if alpha in (-1, "-", "minus"):
        return -1
    raise ValueError(f"branch must be '+' or '-', got {alpha!r}")


def gaussian(spec: GaussianSpec, grid: Grid, constants: PhysicalConstants | None = None) -> WaveFunction:
    """Minimum-uncertainty packet with <(q - x0)^2> = sigma_q^2, normalized on the grid."""
    constants = constants or PhysicalConstants(hbar=grid.hbar)
    x = grid.x
    amps = np.exp(-((x - spec.x0) ** 2) / (4 * spec.sigma_q**2) + 1j * spec.p0 * x / constants.hbar)
    peak = (2 * np.pi * spec.sigma_q**2) ** -0.25
    # the periodic image of the right edge sits at x_max
    edge = peak * max(abs(amps[0]), np.exp(-((grid.x_max - spec.x0) ** 2) / (4 * spec.sigma_q**2)))
    if edge > EDGE_AMPLITUDE_TOL:
        raise ValueError(
            f"Gaussian centred at {spec.x0} with width {spec.sigma_q} leaks off "
            f"[{grid.x_min}, {grid.x_max}] (edge amplitude {edge:.3g})"
        )
    amps /= np.sqrt(np.sum(np.abs(amps) ** 2) * grid.dx)
    return WaveFunction(grid, amps, 0.0, constants)


def crossing_kernel(grid: Grid, constants: PhysicalConstants, X: float, alpha: int) -> np.ndarray:
    """Momentum-space weights of <u_alpha| so that chi = sum(kernel * phi)."""
    p = grid.momenta
    # Theta(alpha p) drops p = 0, where sqrt|p| vanishes anyway
    speed = np.where(alpha * p > 0, np.abs(p) / constants.mass, 0.0)
    return np.sqrt(speed) * np.exp(1j * p * X / constants.hbar) * grid.dp / np.sqrt(2 * np.pi * constants.hbar)


def crossing_amplitude(psi: WaveFunction, X: float, alpha) -> CrossingAmplitude:
    a = parse_branch(alpha)
    if not psi.grid.contains(X):
        raise ValueError(f"X={X} outside grid [{psi.grid.x_min}, {psi.grid.x_max}]")
    kernel = crossing_kernel(psi.grid, psi.constants, X, a)
    return CrossingAmplitude(complex(np.sum(kernel * to_momentum(psi))), a, float(X))
