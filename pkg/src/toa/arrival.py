"""Time-of-arrival distributions at a fixed point X.

``kijowski_free`` gives the free-motion distribution, one density per
crossing branch; ``arrival_general`` replaces free evolution by evolution
under an arbitrary potential while keeping the same crossing states. The
latter is reported raw: it need not integrate to one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig, load_preset
from .propagate import EvolutionParams, Potential, SplitStepper, _check_leak, free_phase
from .qgrid import Grid, PhysicalConstants, WaveFunction, to_momentum, NORM_TOL
from .states import crossing_kernel


@dataclass
class ArrivalSeries:
    X: float
    times: np.ndarray
    pi_plus: np.ndarray
    pi_minus: np.ndarray
    j: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.times)
        for name in ("pi_plus", "pi_minus") + (("j",) if self.j is not None else ()):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} does not share the time lattice")
        if np.any(self.pi_plus < 0) or np.any(self.pi_minus < 0):
            raise ValueError("arrival densities must be nonnegative")

    @property
    def total(self) -> np.ndarray:
        return self.pi_plus + self.pi_minus

    def window_integrals(self) -> dict:
        t = self.times
        if len(t) < 2:
            return {"plus": 0.0, "minus": 0.0}
        return {
            "plus": float(np.trapezoid(self.pi_plus, t)),
            "minus": float(np.trapezoid(self.pi_minus, t)),
        }

    def peak_time(self, branch: str = "plus") -> float:
        pi = self.pi_plus if branch == "plus" else self.pi_minus
        return float(self.times[int(np.argmax(pi))])


def _check_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("time lattice must be a non-empty 1-D sequence")
    if np.any(np.diff(t) < 0):
        raise ValueError("time lattice must be nondecreasing")
    return t


def _check_state(psi: WaveFunction, X: float) -> None:
    if abs(psi.norm2 - 1) > NORM_TOL:
        raise ValueError(f"initial state not normalized (norm^2 = {psi.norm2!r})")
    if not psi.grid.contains(X):
        raise ValueError(f"X={X} outside grid [{psi.grid.x_min}, {psi.grid.x_max}]")


def kijowski_free(psi0: WaveFunction, X: float, times, with_current: bool = False) -> ArrivalSeries:
    """Free-motion arrival density at nominal times T (relative to ``psi0.time``).

    Free evolution is diagonal in momentum, so every T is evaluated exactly
    from the initial momentum amplitudes.
    """
    t = _check_times(times)
    _check_state(psi0, X)
    g, c = psi0.grid, psi0.constants
    phi = to_momentum(psi0)
    k_plus = crossing_kernel(g, c, X, 1)
    k_minus = crossing_kernel(g, c, X, -1)
    pi_plus = np.empty_like(t)
    pi_minus = np.empty_like(t)
    j = np.empty_like(t) if with_current else None
    for i, T in enumerate(t):
        phi_t = phi * free_phase(psi0, T)
        pi_plus[i] = abs(np.sum(k_plus * phi_t)) ** 2
        pi_minus[i] = abs(np.sum(k_minus * phi_t)) ** 2
        if with_current:
            j[i] = _current_from_phi(g, c, phi_t, X)
    return ArrivalSeries(float(X), t, pi_plus, pi_minus, j, {"potential": "free"})


def _current_from_phi(g: Grid, c: PhysicalConstants, phi: np.ndarray, X: float) -> float:
    kernel = np.exp(1j * g.momenta * X / c.hbar) * g.dp / np.sqrt(2 * np.pi * c.hbar)
    val = np.sum(kernel * phi)
    der = np.sum(kernel * (1j * g.momenta / c.hbar) * phi)
    return float(c.hbar / c.mass * (val.conjugate() * der).imag)


def arrival_general(
    psi0: WaveFunction,
    V: Potential,
    X: float,
    times,
    params: EvolutionParams,
    with_current: bool = False,
    check_every: int = 100,
) -> ArrivalSeries:
    """Arrival density under ``V`` from a single Strang sweep.

    Every sample time must lie on the ``params.dt`` lattice measured from
    ``psi0.time``; ``params.steps`` is ignored. Negative times are reached
    by evolving backwards first.
    """
    t = _check_times(times)
    _check_state(psi0, X)
    dt = params.dt
    idx = np.rint(t / dt)
    if np.any(np.abs(idx * dt - t) > 1e-9 * max(1.0, np.abs(t).max())):
        raise ValueError(f"sample times must be integer multiples of dt={dt}")
    idx = idx.astype(np.int64)
    g, c = psi0.grid, psi0.constants
    k_plus = crossing_kernel(g, c, X, 1)
    k_minus = crossing_kernel(g, c, X, -1)

    amps = psi0.amps.copy()
    if idx[0] < 0:
        amps = SplitStepper(psi0, V, -dt).step(amps, int(-idx[0]))
        _check_leak(psi0, amps, int(idx[0]))
    stepper = SplitStepper(psi0, V, dt)
    if idx[0] > 0:
        amps = stepper.step(amps, int(idx[0]))
        _check_leak(psi0, amps, int(idx[0]))

    pi_plus = np.empty_like(t)
    pi_minus = np.empty_like(t)
    j = np.empty_like(t) if with_current else None
    current = int(idx[0])
    since_check = 0
    for i, target in enumerate(idx):
        gap = int(target) - current
        amps = stepper.step(amps, gap)
        current = int(target)
        since_check += gap
        if since_check >= check_every or i == len(idx) - 1:
            _check_leak(psi0, amps, current)
            since_check = 0
        phi = to_momentum(psi0.replace(amps, 0.0))
        pi_plus[i] = abs(np.sum(k_plus * phi)) ** 2
        pi_minus[i] = abs(np.sum(k_minus * phi)) ** 2
        if with_current:
            j[i] = _current_from_phi(g, c, phi, X)
    return ArrivalSeries(float(X), t, pi_plus, pi_minus, j, {"potential": V.kind, "dt": dt})


def run_config(cfg: RunConfig, X: float | None = None) -> ArrivalSeries:
    """Arrival series (with current) for a parsed run configuration."""
    X = cfg.X[0] if X is None else X
    if cfg.method == "exact":
        return kijowski_free(cfg.psi0, X, cfg.times, with_current=True)
    return arrival_general(cfg.psi0, cfg.potential, X, cfg.times, cfg.params, with_current=True)


def figure2_run(X: float) -> ArrivalSeries:
    """Pi_+ and the current density at X for the committed barrier-collision preset.

    Gaussian x0 = p0 = 5, sigma_q = 1, mass 1/2, barrier of height 40 on
    [12, 12.5]; see ``presets/figure2.yaml`` for the discretization.
    """
    cfg = load_preset("figure2")
    if not cfg.grid.contains(X):
        raise ValueError(f"X={X} outside grid [{cfg.grid.x_min}, {cfg.grid.x_max}]")
    return run_config(cfg, X)
