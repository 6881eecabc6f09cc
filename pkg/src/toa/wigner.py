"""Time-energy moments and minimum-uncertainty energy amplitudes.

Working in units where the energy spread about E0 is one, the states that
minimise tau for a given ratio E0/eps are the lowest Dirichlet eigenstates
of the half-line oscillator

    -hbar^2 eta'' + lam (E - E0)^2 eta = mu eta,   eta(0) = eta(E_max) = 0,

with the multiplier ``lam`` tuned so that the second moment about E0 is one
(so that tau^2 = mu - lam). The profile is discretized with linear finite
elements, which makes the computed tau an upper bound on the exact one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal, solve_banded

from .qgrid import NORM_TOL, WaveFunction, to_momentum
from .states import parse_branch

DEFAULT_NODES = 8001
EPS2_TOL = 1e-8
MAX_NEWTON = 50
TAIL_TOL = 1e-10


class ConvergenceError(RuntimeError):
    """The multiplier search failed to satisfy the energy-spread constraint."""


@dataclass(frozen=True)
class EtaProfile:
    E_grid: np.ndarray
    values: np.ndarray

    @property
    def dE(self) -> float:
        return float(self.E_grid[1] - self.E_grid[0])

    def dilate(self, eps: float) -> "EtaProfile":
        """Profile for spread ``eps`` built from this unit-spread one."""
        return EtaProfile(self.E_grid * eps, self.values / math.sqrt(eps))


@dataclass(frozen=True)
class MomentReport:
    tau2: float
    eps2: float
    t0: float
    E0: float


@dataclass(frozen=True)
class MinUncertaintyState:
    ratio: float
    eta: EtaProfile
    lambda_prime: float
    tau: float
    epsilon: float
    mean_E: float
    iterations: int
    residual: float
    converged: bool = True
    hbar: float = 1.0

    @property
    def eps_tau(self) -> float:
        return self.epsilon * self.tau

    @property
    def mean_E_over_eps(self) -> float:
        return self.mean_E / self.epsilon


def _trapz(y: np.ndarray, dx: float) -> float:
    return float(dx * (y.sum() - 0.5 * (y[0] + y[-1])))


def tau_squared(chi, times, t0: float = 0.0, edge_tol: float = 1e-8) -> float:
    """Second moment of |chi(t)|^2 about t0 on a uniform time lattice."""
    chi = np.asarray(chi)
    t = np.asarray(times, dtype=float)
    if chi.shape != t.shape or t.size < 3:
        raise ValueError("chi and times must be matching 1-D arrays of length >= 3")
    w = np.abs(chi) ** 2
    peak = w.max()
    if not peak > 0:
        raise ValueError("chi has zero total weight")
    if max(w[0], w[-1]) > edge_tol * peak:
        raise ValueError("|chi|^2 has not decayed at the window edges")
    dt = t[1] - t[0]
    return _trapz(w * (t - t0) ** 2, dt) / _trapz(w, dt)


def epsilon_squared(eta: EtaProfile, E0: float) -> float:
    w = np.abs(eta.values) ** 2
    return _trapz(w * (eta.E_grid - E0) ** 2, eta.dE) / _trapz(w, eta.dE)


def mean_energy(eta: EtaProfile) -> float:
    w = np.abs(eta.values) ** 2
    return _trapz(w * eta.E_grid, eta.dE) / _trapz(w, eta.dE)


def tau_from_eta(eta: EtaProfile, hbar: float = 1.0, t0: float = 0.0) -> float:
    """tau^2 from the energy-side derivative (not its square root)."""
    v = np.asarray(eta.values)
    scale = np.abs(v).max()
    if abs(v[0]) > 1e-8 * scale or abs(v[-1]) > 1e-8 * scale:
        raise ValueError("eta must vanish at both ends of the energy lattice")
    eta0 = v * np.exp(-1j * eta.E_grid * t0 / hbar) if t0 else v
    d = np.gradient(eta0, eta.dE)
    return hbar**2 * _trapz(np.abs(d) ** 2, eta.dE) / _trapz(np.abs(eta0) ** 2, eta.dE)


def moments(chi, times, eta: EtaProfile, t0: float, E0: float) -> MomentReport:
    return MomentReport(tau_squared(chi, times, t0), epsilon_squared(eta, E0), t0, E0)


def energy_amplitude(psi0: WaveFunction, alpha, X: float = 0.0, E_grid=None, n_energy: int = 4001) -> EtaProfile:
    """eta(E) for the crossing state of branch ``alpha`` at X.

    With this choice of |u>, eta is the ordinary energy amplitude
    ``exp(i p X / hbar) (m / 2E)^(1/4) phi(alpha sqrt(2 m E))``, which is
    evaluated from the exact Fourier sum of the lattice wavefunction.
    """
    a = parse_branch(alpha)
    if abs(psi0.norm2 - 1) > NORM_TOL:
        raise ValueError(f"initial state not normalized (norm^2 = {psi0.norm2!r})")
    g, c = psi0.grid, psi0.constants
    if E_grid is None:
        # cover the occupied part of the momentum lattice on this branch
        w = np.abs(to_momentum(psi0)) ** 2
        occupied = (a * g.momenta > 0) & (w > 1e-16 * w.max())
        p_top = np.abs(g.momenta[occupied]).max() + 4 * g.dp if occupied.any() else g.dp
        E_grid = np.linspace(0.0, p_top**2 / (2 * c.mass), n_energy)
    E = np.asarray(E_grid, dtype=float)
    p = a * np.sqrt(2 * c.mass * E)
    # (m/2E)^(1/4) blows up at E=0; the Jacobian-weighted amplitude vanishes there
    with np.errstate(divide="ignore"):
        jac = np.where(E > 0, (c.mass / (2 * np.where(E > 0, E, 1.0))) ** 0.25, 0.0)
    phi = np.empty(E.size, dtype=complex)
    for s in range(0, E.size, 512):
        pp = p[s : s + 512, None]
        phi[s : s + 512] = np.exp(-1j * pp * g.x / c.hbar) @ psi0.amps * g.dx / math.sqrt(2 * math.pi * c.hbar)
    eta = np.exp(1j * p * X / c.hbar) * jac * phi
    return EtaProfile(E, eta)


def eta_norm2(eta: EtaProfile) -> float:
    return _trapz(np.abs(eta.values) ** 2, eta.dE)


# --- constrained eigenproblem ---------------------------------------------
#
# eta is expanded in piecewise-linear hat functions on a uniform lattice with
# eta(0) = eta(E_max) = 0. Every functional (norm, spread, tau^2, <E>) is
# evaluated exactly for that piecewise-linear eta, so the discrete minimum
# is attained by an admissible continuous profile and tau can only be
# overestimated. The stationarity condition is the tridiagonal pencil
#
#     (hbar^2 K + lam W) v = mu M v.

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(3)


@dataclass
class _Pencil:
    E: np.ndarray
    h: float
    K: tuple  # (diag, off) stiffness
    M: tuple  # mass
    W: tuple  # mass weighted by (E - E0)^2
    W1: tuple  # mass weighted by E


def _weighted_mass(E: np.ndarray, weight) -> tuple[np.ndarray, np.ndarray]:
    """Exact hat-function mass matrix for a polynomial weight of degree <= 2."""
    h = E[1] - E[0]
    left = E[:-1]
    # per element: integrals of phi_a phi_b w with phi_a = 1 - s, phi_b = s
    s = 0.5 * (_GAUSS_X + 1)
    wq = 0.5 * _GAUSS_W * h
    w = weight(left[:, None] + h * s[None, :])
    aa = (w * (1 - s) ** 2) @ wq
    bb = (w * s**2) @ wq
    ab = (w * s * (1 - s)) @ wq
    diag = aa[1:] + bb[:-1]  # interior nodes 1..n-2
    off = ab[1:-1]
    return diag, off


def _pencil(E0: float, h: float, nodes: int) -> _Pencil:
    E = h * np.arange(nodes)
    m = nodes - 2
    K = (np.full(m, 2.0 / h), np.full(m - 1, -1.0 / h))
    M = (np.full(m, 4 * h / 6), np.full(m - 1, h / 6))
    W = _weighted_mass(E, lambda x: (x - E0) ** 2)
    W1 = _weighted_mass(E, lambda x: x)
    return _Pencil(E, h, K, M, W, W1)


def _element_integral(E: np.ndarray, v: np.ndarray, weight=None) -> float:
    """Integral of weight * eta^2 for the piecewise-linear eta with interior values v.

    Summed element by element from nonnegative Gauss terms, so there is no
    cancellation between diagonal and off-diagonal contributions.
    """
    h = E[1] - E[0]
    full = np.concatenate(([0.0], v, [0.0]))
    a, b = full[:-1], full[1:]
    s = 0.5 * (_GAUSS_X + 1)
    vals = a[:, None] * (1 - s) + b[:, None] * s
    w = vals**2 if weight is None else vals**2 * weight(E[:-1, None] + h * s)
    return float(np.sum(w @ (0.5 * _GAUSS_W * h)))


def _stiffness(h: float, v: np.ndarray) -> float:
    d = np.diff(np.concatenate(([0.0], v, [0.0])))
    return float(d @ d / h)


def _quad(T: tuple, v: np.ndarray) -> float:
    d, o = T
    return float(v @ (d * v) + 2 * (v[:-1] @ (o * v[1:])))


def _matvec(T: tuple, v: np.ndarray) -> np.ndarray:
    d, o = T
    out = d * v
    out[1:] += o * v[:-1]
    out[:-1] += o * v[1:]
    return out


@dataclass
class _Solve:
    lam: float
    E: np.ndarray
    eta: np.ndarray
    mu: float
    tau2: float
    eps2: float
    mean_E: float
    residual: float


def _lowest_eigenpair(A: tuple, M: tuple) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of the symmetric tridiagonal pencil A v = mu M v.

    The mass-lumped problem (M -> row sums) is an ordinary tridiagonal one
    whose lowest eigenvalue LAPACK brackets by bisection; it sits O(h^2)
    from the target. Shifted inverse iteration on the pencil, then Rayleigh
    quotient refinement, converges onto the nodeless ground state.
    """
    lumped = M[0].copy()
    lumped[1:] += M[1]
    lumped[:-1] += M[1]
    s = 1 / np.sqrt(lumped)
    mu0 = float(eigvalsh_tridiagonal(A[0] * s * s, A[1] * s[:-1] * s[1:], select="i", select_range=(0, 0))[0])
    n = A[0].size
    v = np.ones(n)
    mu = mu0
    for k in range(8):
        band = np.zeros((3, n))
        band[0, 1:] = A[1] - mu * M[1]
        band[1] = A[0] - mu * M[0]
        band[2, :-1] = A[1] - mu * M[1]
        try:
            w = solve_banded((1, 1), band, _matvec(M, v))
        except np.linalg.LinAlgError:
            break
        v = w / math.sqrt(_quad(M, w))
        new = _quad(A, v)
        if abs(new - mu) <= 1e-15 * abs(new) and k > 0:
            mu = new
            break
        mu = new
    if v.sum() < 0:
        v = -v
    return mu, v


def _solve_fixed(lam: float, E0: float, hbar: float, h: float, nodes: int) -> _Solve:
    P = _pencil(E0, h, nodes)
    A = (hbar**2 * P.K[0] + lam * P.W[0], hbar**2 * P.K[1] + lam * P.W[1])
    mu, v = _lowest_eigenpair(A, P.M)
    r = _matvec(A, v) - mu * _matvec(P.M, v)
    residual = float(np.linalg.norm(r) / (abs(mu) * np.linalg.norm(_matvec(P.M, v))))
    norm = _element_integral(P.E, v)
    eta = np.zeros(nodes)
    eta[1:-1] = v / math.sqrt(norm)
    return _Solve(
        lam=lam,
        E=P.E,
        eta=eta,
        mu=mu,
        tau2=hbar**2 * _stiffness(h, v) / norm,
        eps2=_element_integral(P.E, v, lambda x: (x - E0) ** 2) / norm,
        mean_E=_element_integral(P.E, v, lambda x: x) / norm,
        residual=residual,
    )


def is_nodeless(values: np.ndarray, floor: float = 1e-12) -> bool:
    """No sign change among samples above ``floor`` times the peak."""
    v = np.asarray(values)
    sig = v[np.abs(v) > floor * np.abs(v).max()]
    return bool(np.all(sig > 0) or np.all(sig < 0))


def _tail_ok(eta: np.ndarray) -> bool:
    # the last tenth of the lattice must be empty
    tail = eta[-max(2, eta.size // 10) :]
    return float(np.abs(tail).max()) < TAIL_TOL * float(np.abs(eta).max())


def _solve(lam: float, E0: float, hbar: float, nodes: int) -> _Solve:
    # The spacing depends on the oscillator length only, never on E0: in the
    # Gaussian regime every row then carries the same O(h^2) bias, and the
    # tiny true decrease of eps*tau between rows is not swamped by a
    # row-dependent discretization error. ``nodes`` is the count at E0 <= 0.
    width = math.sqrt(hbar) * lam ** -0.25
    h = 12 * width / (nodes - 1)
    E_max = max(E0, 0.0) + 12 * width
    for _ in range(20):
        count = int(math.ceil(E_max / h - 1e-9)) + 1
        s = _solve_fixed(lam, E0, hbar, h, count)
        if _tail_ok(s.eta):
            if not is_nodeless(s.eta):
                raise ConvergenceError(f"eigenvector for lambda'={lam} is not the nodeless ground state")
            return s
        E_max *= 1.5
    raise ConvergenceError(f"eta tail does not decay for lambda'={lam}")


def minimize_uncertainty(
    ratio: float,
    hbar: float = 1.0,
    nodes: int = DEFAULT_NODES,
    lambda_guess: float | None = None,
) -> MinUncertaintyState:
    """Minimum-tau state for E0/eps = ``ratio`` in eps = 1 units.

    Newton-Raphson on f(ln lam') = eps^2 - 1 with a centred-secant slope;
    falls back to bisection once a sign change is bracketed.
    """
    ratio = float(ratio)
    if not ratio > -1:
        raise ValueError(f"E0/eps must exceed -1, got {ratio}")
    E0 = ratio
    s = math.log(lambda_guess or _initial_guess(ratio, hbar))
    lo = hi = None  # ln lam with f > 0 / f < 0
    best = None
    for it in range(1, MAX_NEWTON + 1):
        sol = _solve(math.exp(s), E0, hbar, nodes)
        f = sol.eps2 - 1
        if best is None or abs(f) < abs(best.eps2 - 1):
            best = sol
        if abs(f) < EPS2_TOL:
            return _package(ratio, sol, it, hbar)
        # eps^2 decreases as lam grows
        if f > 0:
            lo = s if lo is None else max(lo, s)
        else:
            hi = s if hi is None else min(hi, s)
        d = 1e-4
        fp = _solve(math.exp(s + d), E0, hbar, nodes).eps2
        fm = _solve(math.exp(s - d), E0, hbar, nodes).eps2
        slope = (fp - fm) / (2 * d)
        step = -f / slope if slope < 0 else (1.0 if f > 0 else -1.0)
        step = max(-2.0, min(2.0, step))
        new = s + step
        if lo is not None and hi is not None and not (lo < new < hi):
            new = 0.5 * (lo + hi)
        s = new
    raise ConvergenceError(
        f"no multiplier met the spread constraint for E0/eps={ratio} "
        f"(best |eps^2-1| = {abs(best.eps2 - 1):.3g})"
    )


def _initial_guess(ratio: float, hbar: float) -> float:
    # Gaussian limit lam' = hbar^2/4 for large ratios, exact 9/4 hbar^2 at 0;
    # towards -1 the state hugs E = 0 and the multiplier blows up
    if ratio >= 2:
        return 0.25 * hbar**2
    if ratio >= 0:
        return 2.25 * hbar**2
    return 2.25 * hbar**2 / (1 + ratio) ** 1.5


def _package(ratio: float, sol: _Solve, iterations: int, hbar: float) -> MinUncertaintyState:
    eta = EtaProfile(sol.E, sol.eta)
    return MinUncertaintyState(
        ratio=ratio,
        eta=eta,
        lambda_prime=sol.lam,
        tau=math.sqrt(sol.tau2),
        epsilon=math.sqrt(sol.eps2),
        mean_E=sol.mean_E,
        iterations=iterations,
        residual=sol.residual,
        hbar=hbar,
    )


@dataclass(frozen=True)
class CurveRow:
    ratio: float
    mean_E_over_eps: float
    eps_tau: float
    lambda_prime: float
    iterations: int
    converged: bool
    error: str = ""


def wigner_curve(ratio_min: float, ratio_max: float, steps: int, hbar: float = 1.0, nodes: int = DEFAULT_NODES) -> list[CurveRow]:
    """Sweep E0/eps on a uniform lattice, continuing lambda' from row to row.

    Rows that fail to converge are kept, flagged and filled with NaN.
    """
    if not -1 < ratio_min <= ratio_max:
        raise ValueError(f"need -1 < ratio_min <= ratio_max, got {ratio_min}, {ratio_max}")
    if int(steps) != steps or steps < 1 or (steps == 1 and ratio_min != ratio_max):
        raise ValueError(f"steps must be a positive integer (1 only for a single ratio), got {steps}")
    ratios = np.linspace(ratio_min, ratio_max, int(steps))
    rows = []
    guess = None
    for r in ratios:
        try:
            st = minimize_uncertainty(float(r), hbar=hbar, nodes=nodes, lambda_guess=guess)
        except ConvergenceError as exc:
            rows.append(CurveRow(float(r), math.nan, math.nan, math.nan, MAX_NEWTON, False, str(exc)))
            continue
        guess = st.lambda_prime
        rows.append(CurveRow(float(r), st.mean_E_over_eps, st.eps_tau, st.lambda_prime, st.iterations, True))
    return rows
