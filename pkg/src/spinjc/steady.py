"""Liouvillian construction, stationary states and equal-time photon statistics.

Density matrices are vectorized by column stacking, ``vec(rho) =
rho.flatten(order="F")``, so that ``vec(A rho B) = (B^T kron A) vec(rho)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    DimensionError,
    NonUnique,
    NotConverged,
    TruncationSuspect,
    UndefinedCorrelation,
    ZeroPhotonNumber,
)
from .hilbert import HilbertSpace, SparseOperator, number_operator
from .model import ModelParams, model_operators

log = logging.getLogger(__name__)

DEFAULT_FOCK_CUTOFF = 10
ESCALATED_FOCK_CUTOFF = 14
TRUNCATION_TOL = 1e-6
RESIDUAL_TOL = 1e-10
UNIQUENESS_TOL = 1e-8
PIVOT_RATIO_TOL = 1e-11
UNDEFINED_DENOMINATOR = 1e-30
# moments below this are round-off from the linear solve, not photons
MOMENT_NOISE_FLOOR = 1e-13


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).flatten(order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape((dim, dim), order="F")


@dataclass(frozen=True)
class Superoperator:
    space: HilbertSpace
    matrix: sp.csr_matrix
    provenance: Tuple[str, ...] = ()

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = self.space.total_dim
        return unvec(self.matrix @ vec(rho), d)


@dataclass(frozen=True)
class DensityMatrix:
    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = self.space.total_dim
        if m.shape != (d, d):
            raise DimensionError(f"density matrix shape {m.shape} does not match total_dim {d}")
        object.__setattr__(self, "matrix", m)

    def check(self, herm_tol: float = 1e-10, trace_tol: float = 1e-10, pos_tol: float = 1e-8):
        """Raise ``ValueError`` if Hermiticity, unit trace or positivity fail."""
        m = self.matrix
        herm = float(np.abs(m - m.conj().T).max())
        if herm > herm_tol:
            raise ValueError(f"density matrix not Hermitian (max deviation {herm:.3g})")
        tr = np.trace(m)
        if abs(tr - 1) > trace_tol:
            raise ValueError(f"density matrix trace {tr} differs from 1")
        lo = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
        if lo < -pos_tol:
            raise ValueError(f"density matrix has negative eigenvalue {lo:.3g}")
        return self

    @classmethod
    def pure(cls, state) -> "DensityMatrix":
        return cls(state.space, state.projector())

    def photon_probabilities(self) -> np.ndarray:
        return photon_probabilities(self)


def build_liouvillian(H: SparseOperator, channels: Iterable[Tuple[SparseOperator, float]],
                      herm_tol: float = 1e-12) -> Superoperator:
    """L rho = -i[H, rho] + sum_k rate_k/2 (2 o rho o^dag - o^dag o rho - rho o^dag o)."""
    if not H.is_hermitian(herm_tol):
        raise ValueError("Hamiltonian is not Hermitian")
    space = H.space
    d = space.total_dim
    eye = sp.identity(d, dtype=complex, format="csr")
    h = H.matrix
    L = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    tags = [f"H(nnz={H.nnz})"]
    for op, rate in channels:
        if rate < 0:
            raise ValueError(f"negative dissipation rate {rate}")
        if op.space != space:
            raise DimensionError("collapse operator lives on a different space")
        if rate == 0:
            tags.append("inert")
            continue
        o = op.matrix
        ono = (o.conj().T @ o).tocsr()
        L = L + (rate / 2) * (2 * sp.kron(o.conj(), o) - sp.kron(eye, ono) - sp.kron(ono.T, eye))
        tags.append(f"D(rate={rate:g})")
    L = sp.csr_matrix(L)
    L.eliminate_zeros()
    return Superoperator(space=space, matrix=L, provenance=tuple(tags))


def _pinned_solve(L: sp.csr_matrix, d: int, pin: int) -> Tuple[np.ndarray, float]:
    """Solve L x = 0 with row ``pin`` (a diagonal element's equation) replaced by tr = 1.

    Returns the solution and the smallest-to-largest pivot ratio of the LU
    factorization of the pinned system.
    """
    D = d * d
    keep = np.ones(D)
    keep[pin] = 0.0
    diag_idx = np.arange(d) * (d + 1)
    trace_row = sp.csr_matrix((np.ones(d), (np.full(d, pin), diag_idx)), shape=(D, D))
    A = (sp.diags(keep) @ L + trace_row).tocsc()
    b = np.zeros(D, dtype=complex)
    b[pin] = 1.0
    try:
        lu = spla.splu(A, permc_spec="MMD_ATA")
    except RuntimeError as exc:
        raise NonUnique(f"pinned Liouvillian is singular ({exc})") from exc
    pivots = np.abs(lu.U.diagonal())
    ratio = float(pivots.min() / pivots.max())
    if not ratio > 0:
        raise NonUnique("pinned Liouvillian has a zero pivot; null space is degenerate")
    x = lu.solve(b)
    for _ in range(2):
        r = b - A @ x
        if np.abs(r).max() < 1e-15:
            break
        x = x + lu.solve(r)
    return x, ratio


def steady_state(L: Superoperator, check_unique: bool = True, truncation_tol: float = TRUNCATION_TOL,
                 residual_tol: float = RESIDUAL_TOL) -> DensityMatrix:
    """Stationary state with ``L rho = 0`` and unit trace.

    The equation for ``rho[0, 0]`` is swapped for the trace constraint and
    the sparse system is solved directly. A degenerate null space makes this
    pinned system singular. With ``check_unique``, an exactly singular
    factorization raises :class:`NonUnique`, and a nearly singular one
    (pivot ratio below ``PIVOT_RATIO_TOL``) triggers a second solve pinning
    ``rho[-1, -1]``; disagreement also raises :class:`NonUnique`.
    """
    d = L.space.total_dim
    x, pivot_ratio = _pinned_solve(L.matrix, d, 0)
    if not np.all(np.isfinite(x)):
        raise NonUnique("pinned solve produced non-finite values")
    residual = float(np.abs(L.matrix @ x).max())
    if residual > residual_tol:
        raise NotConverged(f"steady-state residual {residual:.3g} above {residual_tol:.1g}")
    if check_unique and pivot_ratio < PIVOT_RATIO_TOL:
        x2, _ = _pinned_solve(L.matrix, d, d * d - 1)
        if not np.all(np.isfinite(x2)) or float(np.abs(x - x2).max()) > UNIQUENESS_TOL:
            raise NonUnique("steady state depends on the pinned element; null space is degenerate")
    m = unvec(x, d)
    m = 0.5 * (m + m.conj().T)
    rho = DensityMatrix(L.space, m)
    top = float(photon_probabilities(rho)[-1])
    if top > truncation_tol:
        raise TruncationSuspect(f"population {top:.3g} at Fock cutoff {L.space.fock_cutoff}",
                                rho=rho, top_population=top)
    return rho


@dataclass
class SteadyResult:
    rho: DensityMatrix
    liouvillian: Superoperator
    truncation_suspect: bool = False
    notes: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def fock_cutoff(self) -> int:
        return self.rho.space.fock_cutoff


def solve_operating_point(p: ModelParams, fock_cutoff: int = DEFAULT_FOCK_CUTOFF, two_level: bool = False,
                          escalate_to: Optional[int] = ESCALATED_FOCK_CUTOFF,
                          check_unique: bool = True) -> SteadyResult:
    """Build and solve one parameter point, raising the cutoff once on truncation trouble."""
    cutoffs = [fock_cutoff]
    if escalate_to is not None and escalate_to > fock_cutoff:
        cutoffs.append(escalate_to)
    for i, nmax in enumerate(cutoffs):
        space = HilbertSpace(fock_cutoff=nmax, spin_dim=2 if two_level else 3)
        H, channels = model_operators(p, space, two_level=two_level)
        L = build_liouvillian(H, channels)
        try:
            return SteadyResult(steady_state(L, check_unique=check_unique), L)
        except TruncationSuspect as exc:
            if i == len(cutoffs) - 1:
                log.warning("truncation suspect at cutoff %d: %s", nmax, exc)
                return SteadyResult(exc.rho, L, truncation_suspect=True, notes=(str(exc),))
            log.info("escalating Fock cutoff %d -> %d", nmax, cutoffs[i + 1])
    raise AssertionError("unreachable")


def expectation(rho: DensityMatrix, op: SparseOperator) -> complex:
    if op.space != rho.space:
        raise DimensionError("operator and state live on different spaces")
    return complex(np.sum(op.matrix.multiply(rho.matrix.T)))


def photon_number(rho: DensityMatrix) -> float:
    val = expectation(rho, number_operator(rho.space))
    if abs(val.imag) > 1e-10:
        raise ValueError(f"photon number has imaginary part {val.imag:.3g}")
    return val.real


def photon_probabilities(rho: DensityMatrix) -> np.ndarray:
    """p(q) = tr(|q><q| rho), summed over the atomic levels."""
    s = rho.space
    diag = np.real(np.diagonal(rho.matrix))
    return diag.reshape(s.fock_dim, s.spin_dim).sum(axis=1)


def photon_distribution(rho: DensityMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """``(p, p_tilde)`` with p_tilde(q) = q p(q) / n_s, the share of photons in q-photon states."""
    p = photon_probabilities(rho)
    q = np.arange(len(p))
    ns = float(q @ p)
    if ns < 1e-14:
        raise ZeroPhotonNumber(f"n_s = {ns:.3g}; photon-number fraction undefined")
    return p, q * p / ns


def factorial_moment(rho: DensityMatrix, m: int) -> float:
    """<(a^dag)^m a^m> = sum_q p(q) q!/(q-m)!."""
    p = photon_probabilities(rho)
    q = np.arange(len(p), dtype=float)
    falling = np.ones_like(q)
    for j in range(m):
        falling *= np.clip(q - j, 0, None)
    return float(falling @ p)


def equal_time_g(rho: DensityMatrix, n: int, k: int) -> float:
    """Zero-delay bundle correlation <a^dag^{nk} a^{nk}> / <a^dag^n a^n>^k.

    Undefined when the denominator is at the solver's round-off level.
    """
    if n < 1 or k < 2:
        raise ValueError(f"need n >= 1 and k >= 2, got n={n}, k={k}")
    if n * k > rho.space.fock_cutoff:
        raise DimensionError(f"g_{n}^({k}) needs fock_cutoff >= {n * k}, have {rho.space.fock_cutoff}")
    den = factorial_moment(rho, n)
    if den < max(UNDEFINED_DENOMINATOR, MOMENT_NOISE_FLOOR):
        raise UndefinedCorrelation(f"<a^dag^{n} a^{n}> = {den:.3g}")
    return max(factorial_moment(rho, n * k), 0.0) / den ** k


def safe_g(rho: DensityMatrix, n: int, k: int) -> float:
    """:func:`equal_time_g` returning NaN instead of raising on an undefined value."""
    try:
        return equal_time_g(rho, n, k)
    except UndefinedCorrelation:
        return math.nan
