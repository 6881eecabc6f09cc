"""Free and split-operator time evolution, and the probability current."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .qgrid import WaveFunction, edge_probability, evaluate_at, from_momentum, to_momentum

LEAK_TOL = 1e-8


class LeakageError(RuntimeError):
    """Probability reached the periodic boundary during evolution."""

    def __init__(self, step: int, prob: float):
        super().__init__(f"edge probability {prob:.3g} exceeds {LEAK_TOL:g} at step {step}")
        self.step = step
        self.prob = prob


@dataclass(frozen=True)
class Potential:
    """V(x) by kind: ``free``, ``square_barrier``, ``harmonic`` or ``tabulated``."""

    kind: str = "free"
    height: float = 0.0
    left: float = 0.0
    right: float = 0.0
    omega: float = 0.0
    center: float = 0.0
    values: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in ("free", "square_barrier", "harmonic", "tabulated"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "square_barrier" and not self.left < self.right:
            raise ValueError(f"barrier needs left < right, got [{self.left}, {self.right}]")
        if self.kind == "harmonic" and not self.omega > 0:
            raise ValueError(f"harmonic potential needs omega > 0, got {self.omega}")
        if self.kind == "tabulated":
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @classmethod
    def free(cls) -> "Potential":
        return cls("free")

    @classmethod
    def square_barrier(cls, height: float, left: float, right: float) -> "Potential":
        return cls("square_barrier", height=height, left=left, right=right)

    @classmethod
    def harmonic(cls, omega: float, center: float = 0.0) -> "Potential":
        return cls("harmonic", omega=omega, center=center)

    @classmethod
    def tabulated(cls, values) -> "Potential":
        return cls("tabulated", values=tuple(np.asarray(values, dtype=float)))

    def sample(self, x: np.ndarray, mass: float) -> np.ndarray:
        if self.kind == "free":
            return np.zeros_like(x)
        if self.kind == "square_barrier":
            # cell-averaged, so the lattice barrier keeps its exact width
            dx = x[1] - x[0]
            overlap = np.clip(np.minimum(x + dx / 2, self.right) - np.maximum(x - dx / 2, self.left), 0.0, dx)
            return self.height * overlap / dx
        if self.kind == "harmonic":
            return 0.5 * mass * self.omega**2 * (x - self.center) ** 2
        v = np.asarray(self.values)
        if v.shape != x.shape:
            raise ValueError(f"tabulated potential has {v.size} values, grid has {x.size}")
        return v.copy()


@dataclass(frozen=True)
class EvolutionParams:
    dt: float
    steps: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps}")


def free_phase(psi: WaveFunction, duration: float) -> np.ndarray:
    m, hbar = psi.constants.mass, psi.constants.hbar
    return np.exp(-1j * psi.grid.momenta**2 * duration / (2 * m * hbar))


def evolve_free(psi: WaveFunction, duration: float) -> WaveFunction:
    phi = to_momentum(psi) * free_phase(psi, duration)
    return psi.replace(from_momentum(psi.grid, phi), psi.time + duration)


class SplitStepper:
    """Strang splitting exp(-iV dt/2) exp(-iT dt) exp(-iV dt/2) in FFT order.

    ``dt`` may be negative for backward evolution.
    """

    def __init__(self, psi: WaveFunction, V: Potential, dt: float):
        g, c = psi.grid, psi.constants
        self.dt = dt
        self.grid = g
        self.half_v = np.exp(-0.5j * V.sample(g.x, c.mass) * dt / c.hbar)
        p = np.fft.ifftshift(g.momenta)
        self.kinetic = np.exp(-1j * p**2 * dt / (2 * c.mass * c.hbar))

    def step(self, amps: np.ndarray, count: int = 1) -> np.ndarray:
        # adjacent half potential steps merge into one full step
        if count < 1:
            return amps
        full_v = self.half_v**2
        a = amps * self.half_v
        for k in range(count):
            a = np.fft.ifft(np.fft.fft(a) * self.kinetic)
            a *= full_v if k < count - 1 else self.half_v
        return a


def evolve_potential(
    psi: WaveFunction,
    V: Potential,
    params: EvolutionParams,
    check_every: int = 100,
    on_sample: Callable[[int, np.ndarray], None] | None = None,
) -> WaveFunction:
    """Apply ``params.steps`` Strang steps of size ``params.dt``.

    Edge probability is checked every ``check_every`` steps and at the end;
    :class:`LeakageError` carries the offending step index.
    """
    stepper = SplitStepper(psi, V, params.dt)
    amps = psi.amps.copy()
    done = 0
    while done < params.steps:
        chunk = min(check_every, params.steps - done)
        amps = stepper.step(amps, chunk)
        done += chunk
        _check_leak(psi, amps, done)
        if on_sample is not None:
            on_sample(done, amps)
    return psi.replace(amps, psi.time + params.dt * params.steps)


def _check_leak(psi: WaveFunction, amps: np.ndarray, step: int) -> None:
    prob = edge_probability(psi.replace(amps, psi.time))
    if prob > LEAK_TOL:
        raise LeakageError(step, prob)


def current_density(psi: WaveFunction, X: float) -> float:
    """J = (hbar/m) Im(psi* dpsi/dx) at X, using the band-limited interpolant."""
    g = psi.grid
    if not g.contains(X):
        raise ValueError(f"X={X} outside grid [{g.x_min}, {g.x_max}]")
    phi = to_momentum(psi)
    val = evaluate_at(g, phi, X)
    der = evaluate_at(g, phi, X, derivative=True)
    return float(psi.constants.hbar / psi.constants.mass * (val.conjugate() * der).imag)
