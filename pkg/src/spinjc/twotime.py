"""Master-equation propagation and delayed photon correlations.

Two-time functions use the quantum regression theorem: the conditioned
operator ``a^n rho_s a^dag^n`` is propagated with the same Liouvillian and
read out with ``a^dag^n a^n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .errors import IntegrationFailure, UndefinedCorrelation
from .hilbert import fock_annihilation
from .steady import MOMENT_NOISE_FLOOR, UNDEFINED_DENOMINATOR, DensityMatrix, Superoperator, unvec, vec

METHODS = ("dop853", "expm_multiply", "dense_expm")
DENSE_FALLBACK_DIM = 2000


def default_tau_grid(t_max: float = 20.0, points: int = 200, t_min: float = 1e-3) -> np.ndarray:
    """``tau = 0`` followed by ``points`` log-spaced delays up to ``t_max`` (units of 1/kappa)."""
    return np.concatenate([[0.0], np.logspace(math.log10(t_min), math.log10(t_max), points)])


@dataclass(frozen=True)
class Propagator:
    L: Superoperator
    method: str = "dop853"
    abs_tol: float = 1e-12
    rel_tol: float = 1e-9
    t_max: float = 50.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")

    def with_tolerances(self, abs_tol: float, rel_tol: float) -> "Propagator":
        return Propagator(self.L, self.method, abs_tol, rel_tol, self.t_max)


def _dense_path(L, v0, times):
    Ld = L.toarray()
    out = np.empty((len(times), len(v0)), dtype=complex)
    v, t_prev = v0, 0.0
    cache = {}
    for i, t in enumerate(times):
        dt = t - t_prev
        if dt > 0:
            key = round(dt, 15)
            if key not in cache:
                cache[key] = scipy.linalg.expm(Ld * dt)
            v = cache[key] @ v
        out[i] = v
        t_prev = t
    return out


def _expm_multiply_path(L, v0, times):
    out = np.empty((len(times), len(v0)), dtype=complex)
    v, t_prev = v0, 0.0
    for i, t in enumerate(times):
        dt = t - t_prev
        if dt > 0:
            v = spla.expm_multiply(L * dt, v)
        out[i] = v
        t_prev = t
    return out


def propagate(prop: Propagator, v0: np.ndarray, times: Sequence[float]) -> np.ndarray:
    """Vectorized states at each of ``times`` (sorted, non-negative), one row per time.

    Evolution is checkpointed: a single integration pass covers the whole
    grid. The state is not renormalized along the way.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a non-empty 1-D sequence")
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be non-negative and sorted")
    L = prop.L.matrix
    v0 = np.asarray(v0, dtype=complex)
    if prop.method == "dense_expm":
        return _dense_path(L, v0, times)
    if prop.method == "expm_multiply":
        return _expm_multiply_path(L, v0, times)
    if times[-1] == 0:
        return np.tile(v0, (len(times), 1))
    if L.nnz == 0:
        return np.tile(v0, (len(times), 1))
    sol = solve_ivp(lambda t, y: L @ y, (0.0, float(times[-1])), v0, method="DOP853", t_eval=times,
                    rtol=prop.rel_tol, atol=prop.abs_tol)
    if sol.success:
        return sol.y.T
    diagnostics = {"message": sol.message, "nfev": sol.nfev, "t_reached": float(sol.t[-1]) if len(sol.t) else 0.0}
    if prop.L.dim <= DENSE_FALLBACK_DIM:
        return _dense_path(L, v0, times)
    raise IntegrationFailure(f"DOP853 failed: {sol.message}", diagnostics)


def spectral_gap(L: Superoperator) -> float:
    """Slowest nonzero relaxation rate, ``-max Re(lambda)`` over the non-stationary eigenvalues of L.

    Dense eigensolve up to ``DENSE_FALLBACK_DIM``, shift-invert Arnoldi above.
    """
    if L.dim <= DENSE_FALLBACK_DIM:
        ev = np.linalg.eigvals(L.matrix.toarray())
    else:
        ev = spla.eigs(L.matrix.tocsc(), k=8, sigma=0, return_eigenvectors=False)
    rates = np.sort(-ev.real)
    return float(rates[1])


def evolve(prop: Propagator, rho0: DensityMatrix, t: float) -> DensityMatrix:
    if t < 0:
        raise ValueError("t must be non-negative")
    v = propagate(prop, vec(rho0.matrix), [0.0, t])[-1]
    return DensityMatrix(rho0.space, unvec(v, rho0.space.total_dim))


def evolve_many(prop: Propagator, rho0: DensityMatrix, times: Sequence[float]):
    d = rho0.space.total_dim
    return [DensityMatrix(rho0.space, unvec(v, d)) for v in propagate(prop, vec(rho0.matrix), times)]


def _trace_weights(op_dense: np.ndarray) -> np.ndarray:
    # w @ vec(X) == tr(A X) under column stacking
    return op_dense.ravel(order="C")


@dataclass
class CorrelationTrace:
    n: int
    tau: np.ndarray
    values: np.ndarray

    def rows(self):
        for t, v in zip(self.tau, self.values):
            yield {"tau_over_inv_kappa": float(t), "g_value": float(v)}

    @property
    def at_zero(self) -> float:
        return float(self.values[0])


def g2_tau(prop: Propagator, rho_s: DensityMatrix, n: int, tau_grid: Optional[Iterable[float]] = None
           ) -> CorrelationTrace:
    """g_n^(2)(tau) = <a^dag^n(0) a^dag^n(tau) a^n(tau) a^n(0)> / <a^dag^n a^n>^2."""
    if n not in (1, 2):
        raise ValueError(f"bundle order must be 1 or 2, got {n}")
    tau = default_tau_grid() if tau_grid is None else np.asarray(list(tau_grid), dtype=float)
    space = rho_s.space
    an = (fock_annihilation(space) ** n).matrix
    cond = an @ rho_s.matrix @ an.conj().T.toarray()
    weight = float(np.real(np.trace(cond)))
    if weight < max(UNDEFINED_DENOMINATOR, MOMENT_NOISE_FLOOR):
        raise UndefinedCorrelation(f"<a^dag^{n} a^{n}> = {weight:.3g}")
    readout = _trace_weights((an.conj().T @ an).toarray())
    # scaled by a constant so the integrator's absolute tolerance is meaningful
    states = propagate(prop, vec(cond / weight), tau)
    values = np.real(states @ readout) / weight
    return CorrelationTrace(n=n, tau=tau, values=values)
