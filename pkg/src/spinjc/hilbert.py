"""Truncated Fock x spin Hilbert spaces and sparse operator algebra.

Basis ordering is Fock-major: ``index = n * spin_dim + s`` with the spin
levels ordered (g, r, m) for spin-1 and (g, e) for the two-level atom.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError

DROP_TOL = 1e-15

SPIN1_LABELS = ("g", "r", "m")
TWO_LEVEL_LABELS = ("g", "e")


@dataclass(frozen=True)
class HilbertSpace:
    """Cavity mode truncated at ``fock_cutoff`` photons times a spin factor."""

    fock_cutoff: int
    spin_dim: int = 3

    def __post_init__(self):
        if int(self.fock_cutoff) != self.fock_cutoff or self.fock_cutoff < 1:
            raise DimensionError(f"fock_cutoff must be an integer >= 1, got {self.fock_cutoff!r}")
        if self.spin_dim not in (1, 2, 3):
            raise DimensionError(f"spin_dim must be 1, 2 or 3, got {self.spin_dim!r}")

    @property
    def fock_dim(self) -> int:
        return self.fock_cutoff + 1

    @property
    def total_dim(self) -> int:
        return self.fock_dim * self.spin_dim

    @property
    def spin_labels(self) -> Tuple[str, ...]:
        return {3: SPIN1_LABELS, 2: TWO_LEVEL_LABELS, 1: ("",)}[self.spin_dim]

    def index(self, n: int, spin: Union[int, str] = 0) -> int:
        """Flat basis index of ``|n, spin>``."""
        if isinstance(spin, str):
            spin = self.spin_labels.index(spin)
        if not (0 <= n <= self.fock_cutoff and 0 <= spin < self.spin_dim):
            raise DimensionError(f"|{n}, {spin}> is outside {self}")
        return n * self.spin_dim + spin

    def label(self, index: int) -> Tuple[int, int]:
        if not 0 <= index < self.total_dim:
            raise DimensionError(f"index {index} outside [0, {self.total_dim})")
        return divmod(index, self.spin_dim)

    def photon_numbers(self) -> np.ndarray:
        """Photon number of every basis state, in basis order."""
        return np.repeat(np.arange(self.fock_dim), self.spin_dim)


def _clean(matrix) -> sp.csr_matrix:
    m = sp.csr_matrix(matrix, dtype=complex, copy=True)
    small = np.abs(m.data) < DROP_TOL
    if small.any():
        m.data[small] = 0.0
    m.eliminate_zeros()
    m.sort_indices()
    return m


class SparseOperator:
    """Complex sparse matrix bound to a :class:`HilbertSpace`.

    Instances are treated as immutable; every algebraic operation returns a
    new operator.
    """

    __slots__ = ("space", "_m", "_hermitian")

    def __init__(self, space: HilbertSpace, matrix):
        m = _clean(matrix)
        if m.shape != (space.total_dim, space.total_dim):
            raise DimensionError(f"matrix shape {m.shape} does not match total_dim {space.total_dim}")
        self.space = space
        self._m = m
        self._hermitian: Dict[float, bool] = {}

    @property
    def matrix(self) -> sp.csr_matrix:
        return self._m.copy()

    @property
    def shape(self):
        return self._m.shape

    @property
    def nnz(self) -> int:
        return self._m.nnz

    def toarray(self) -> np.ndarray:
        return self._m.toarray()

    def dag(self) -> "SparseOperator":
        return SparseOperator(self.space, self._m.conj().T)

    def trace(self) -> complex:
        return complex(self._m.diagonal().sum())

    def is_hermitian(self, tol: float = 1e-14) -> bool:
        if tol not in self._hermitian:
            diff = self._m - self._m.conj().T
            self._hermitian[tol] = diff.nnz == 0 or float(np.abs(diff.data).max()) <= tol
        return self._hermitian[tol]

    def _check(self, other: "SparseOperator"):
        if not isinstance(other, SparseOperator):
            return NotImplemented
        if other.space != self.space:
            raise DimensionError(f"operator spaces differ: {self.space} vs {other.space}")
        return other._m

    def __add__(self, other):
        m = self._check(other)
        if m is NotImplemented:
            return m
        return SparseOperator(self.space, self._m + m)

    def __sub__(self, other):
        m = self._check(other)
        if m is NotImplemented:
            return m
        return SparseOperator(self.space, self._m - m)

    def __neg__(self):
        return SparseOperator(self.space, -self._m)

    def __mul__(self, scalar):
        if isinstance(scalar, SparseOperator) or not np.isscalar(scalar):
            return NotImplemented
        return SparseOperator(self.space, self._m * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return SparseOperator(self.space, self._m / scalar)

    def __matmul__(self, other):
        if isinstance(other, SparseOperator):
            return SparseOperator(self.space, self._m @ self._check(other))
        return self._m @ other

    def __pow__(self, k: int) -> "SparseOperator":
        if int(k) != k or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = sp.identity(self.space.total_dim, dtype=complex, format="csr")
        for _ in range(int(k)):
            out = self._m @ out
        return SparseOperator(self.space, out)

    def __repr__(self):
        return f"SparseOperator(dim={self.space.total_dim}, nnz={self.nnz})"


def identity(space: HilbertSpace) -> SparseOperator:
    return SparseOperator(space, sp.identity(space.total_dim, format="csr"))


def commutator(a: SparseOperator, b: SparseOperator) -> SparseOperator:
    return a @ b - b @ a


def max_abs(op: SparseOperator) -> float:
    m = op.matrix
    return float(np.abs(m.data).max()) if m.nnz else 0.0


def tensor_lift(op, factor: str, space: HilbertSpace) -> SparseOperator:
    """Embed a single-factor operator into ``space``.

    ``factor`` is ``"fock"`` (op is ``fock_dim`` square) or ``"spin"``
    (op is ``spin_dim`` square). A :class:`SparseOperator` on a one-factor
    space is accepted as well as any array-like.
    """
    m = op.matrix if isinstance(op, SparseOperator) else sp.csr_matrix(op)
    if factor == "fock":
        if m.shape != (space.fock_dim, space.fock_dim):
            raise DimensionError(f"Fock factor must be {space.fock_dim}x{space.fock_dim}, got {m.shape}")
        full = sp.kron(m, sp.identity(space.spin_dim), format="csr")
    elif factor == "spin":
        if m.shape != (space.spin_dim, space.spin_dim):
            raise DimensionError(f"spin factor must be {space.spin_dim}x{space.spin_dim}, got {m.shape}")
        full = sp.kron(sp.identity(space.fock_dim), m, format="csr")
    else:
        raise ValueError(f"factor must be 'fock' or 'spin', got {factor!r}")
    return SparseOperator(space, full)


def bare_annihilation(fock_cutoff: int) -> sp.csr_matrix:
    n = np.arange(1, fock_cutoff + 1)
    return sp.diags(np.sqrt(n), 1, shape=(fock_cutoff + 1, fock_cutoff + 1), format="csr", dtype=complex)


@lru_cache(maxsize=64)
def fock_annihilation(space: HilbertSpace) -> SparseOperator:
    """Cavity lowering operator ``a`` lifted to ``space``; ``a|0> = 0``."""
    return tensor_lift(bare_annihilation(space.fock_cutoff), "fock", space)


@lru_cache(maxsize=64)
def number_operator(space: HilbertSpace) -> SparseOperator:
    return SparseOperator(space, sp.diags(space.photon_numbers().astype(complex), format="csr"))


@lru_cache(maxsize=64)
def spin_projector(space: HilbertSpace, i: Union[int, str], j: Union[int, str]) -> SparseOperator:
    """``|i><j|`` on the spin factor, identity on the cavity."""
    labels = space.spin_labels
    i = labels.index(i) if isinstance(i, str) else i
    j = labels.index(j) if isinstance(j, str) else j
    m = sp.csr_matrix(([1.0], ([i], [j])), shape=(space.spin_dim, space.spin_dim))
    return tensor_lift(m, "spin", space)


@dataclass(frozen=True)
class Spin1Operators:
    sz: SparseOperator
    sp: SparseOperator
    sm: SparseOperator
    proj: Dict[Tuple[str, str], SparseOperator] = field(repr=False)

    @property
    def sx(self) -> SparseOperator:
        return (self.sp + self.sm) * 0.5

    @property
    def sy(self) -> SparseOperator:
        return (self.sp - self.sm) * (-0.5j)


@lru_cache(maxsize=64)
def spin1_operators(space: HilbertSpace) -> Spin1Operators:
    """Spin-1 matrices built from the level projectors.

    ``Sz = s_mm - s_gg`` and ``S- = sqrt(2) (s_gr + s_rm)``.
    """
    if space.spin_dim != 3:
        raise DimensionError(f"spin-1 operators need spin_dim=3, got {space.spin_dim}")
    proj = {(i, j): spin_projector(space, i, j) for i in SPIN1_LABELS for j in SPIN1_LABELS}
    sz = proj["m", "m"] - proj["g", "g"]
    sm = (proj["g", "r"] + proj["r", "m"]) * np.sqrt(2.0)
    return Spin1Operators(sz=sz, sp=sm.dag(), sm=sm, proj=proj)


@dataclass(frozen=True)
class StateVector:
    space: HilbertSpace
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.space.total_dim,):
            raise DimensionError(f"amplitude vector of length {amps.shape} for total_dim {self.space.total_dim}")
        if self.normalized and abs(np.vdot(amps, amps).real - 1.0) > 1e-12:
            raise ValueError("state flagged normalized but norm^2 deviates from 1 by more than 1e-12")
        object.__setattr__(self, "amplitudes", amps)

    def component(self, n: int, spin: Union[int, str]) -> complex:
        return complex(self.amplitudes[self.space.index(n, spin)])

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


def basis_state(space: HilbertSpace, n: int, spin: Union[int, str] = 0) -> StateVector:
    amps = np.zeros(space.total_dim, dtype=complex)
    amps[space.index(n, spin)] = 1.0
    return StateVector(space, amps)
