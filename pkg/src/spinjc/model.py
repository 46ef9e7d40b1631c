"""Spin-1 Jaynes-Cummings Hamiltonian, drives, dissipation channels and symmetries.

All rates and detunings are in units of the cavity decay rate ``kappa``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError
from .hilbert import (
    HilbertSpace,
    SparseOperator,
    fock_annihilation,
    identity,
    number_operator,
    spin1_operators,
    spin_projector,
)

KAPPA_HZ = 2 * math.pi * 160e3  # cavity linewidth used as the energy unit, in rad/s


class DispersiveRegimeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters in units of kappa.

    The Zeeman shifts are given as ratios to ``delta_c`` so that they follow
    the cavity detuning during a sweep. ``delta1_override`` and
    ``delta2_override`` pin absolute values instead.
    """

    g: float = 6.0
    gamma: float = 0.01
    eta: float = 0.0
    omega: float = 0.0
    delta_c: float = 0.0
    delta1_ratio: float = 0.1
    delta2_ratio: float = 0.0
    kappa: float = 1.0
    delta1_override: Optional[float] = None
    delta2_override: Optional[float] = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        for name in ("g", "eta", "omega", "delta_c", "delta1_ratio", "delta2_ratio"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def delta1(self) -> float:
        if self.delta1_override is not None:
            return self.delta1_override
        return self.delta1_ratio * self.delta_c

    @property
    def delta2(self) -> float:
        if self.delta2_override is not None:
            return self.delta2_override
        return self.delta2_ratio * self.delta_c

    def at(self, delta_c_over_g: float, delta2_ratio: Optional[float] = None) -> "ModelParams":
        """Copy placed at ``delta_c = delta_c_over_g * g`` (figure-axis units)."""
        kw = {"delta_c": delta_c_over_g * self.g}
        if delta2_ratio is not None:
            kw["delta2_ratio"] = delta2_ratio
        return replace(self, **kw)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class RawParams:
    """Bare level-scheme parameters before adiabatic elimination."""

    g1: float
    Omega1: float
    Delta: float
    Delta_c_prime: float
    Delta_r: float = 0.0
    Delta_m: float = 0.0

    def dispersive(self, threshold: float = 0.1) -> bool:
        if self.Delta == 0:
            return False
        return abs(self.g1 / self.Delta) < threshold and abs(self.Omega1 / self.Delta) < threshold


def effective_params(raw: RawParams, gamma: float = 0.01, eta: float = 0.0, omega: float = 0.0,
                     kappa: float = 1.0) -> ModelParams:
    """Effective spin-1 parameters from the Raman-coupled level scheme.

    ``g = -g1*Omega1/Delta``, ``delta_c = Delta_c' - g1**2/Delta``,
    ``delta1 = Delta_m/2`` and ``delta2 = Delta_m/2 - Delta_r``. The Zeeman
    shifts are returned as absolute overrides.
    """
    if raw.Delta == 0:
        raise ZeroDivisionError("atom-cavity detuning Delta must be non-zero")
    if not raw.dispersive():
        warnings.warn("|g1/Delta| or |Omega1/Delta| is not small; adiabatic elimination is questionable",
                      DispersiveRegimeWarning, stacklevel=2)
    g = -raw.g1 * raw.Omega1 / raw.Delta
    delta_c = raw.Delta_c_prime - raw.g1 ** 2 / raw.Delta
    d1 = raw.Delta_m / 2
    d2 = raw.Delta_m / 2 - raw.Delta_r
    r1 = d1 / delta_c if delta_c else 0.0
    r2 = d2 / delta_c if delta_c else 0.0
    return ModelParams(g=g, gamma=gamma, eta=eta, omega=omega, delta_c=delta_c, delta1_ratio=r1,
                       delta2_ratio=r2, kappa=kappa, delta1_override=d1, delta2_override=d2)


def _require_spin1(space: HilbertSpace):
    if space.spin_dim != 3:
        raise DimensionError(f"spin-1 model needs spin_dim=3, got {space.spin_dim}")


def build_hamiltonian(p: ModelParams, space: HilbertSpace, include_drives: bool = True) -> SparseOperator:
    """Spin-1 JCM in the rotating frame, optionally with cavity and atom drives.

    H = dc a^dag a + d1 Sz + d2 Sz^2 + g/sqrt2 (a^dag S- + a S+)
        + Omega (s_gm + s_mg) + eta (a^dag + a)
    """
    _require_spin1(space)
    a = fock_annihilation(space)
    s = spin1_operators(space)
    h = (number_operator(space) * p.delta_c
         + s.sz * p.delta1
         + (s.sz @ s.sz) * p.delta2
         + (a.dag() @ s.sm + a @ s.sp) * (p.g / math.sqrt(2)))
    if include_drives:
        h = h + drive_hamiltonian(p, space)
    return h


def drive_hamiltonian(p: ModelParams, space: HilbertSpace) -> SparseOperator:
    _require_spin1(space)
    a = fock_annihilation(space)
    s = spin1_operators(space)
    return (s.proj["g", "m"] + s.proj["m", "g"]) * p.omega + (a.dag() + a) * p.eta


def build_level_hamiltonian(delta_c: float, delta_r: float, delta_m: float, g: float,
                            space: HilbertSpace) -> SparseOperator:
    """Undriven Hamiltonian written with level projectors and level detunings.

    Equals :func:`build_hamiltonian` (no drives) plus ``(d1 - d2) * I`` when
    ``delta_r = d1 - d2`` and ``delta_m = 2 d1``.
    """
    _require_spin1(space)
    a = fock_annihilation(space)
    s = spin1_operators(space).proj
    return (number_operator(space) * delta_c
            + s["r", "r"] * delta_r
            + s["m", "m"] * delta_m
            + (a.dag() @ s["g", "r"] + a @ s["r", "g"]) * g
            + (a.dag() @ s["r", "m"] + a @ s["m", "r"]) * g)


def build_two_level_jcm(p: ModelParams, space: HilbertSpace, include_drives: bool = True) -> SparseOperator:
    """Two-level reference with the qubit on cavity resonance.

    H = dc a^dag a + dc s_ee + g (a^dag s_ge + a s_eg) + eta (a^dag + a)
    """
    if space.spin_dim != 2:
        raise DimensionError(f"two-level model needs spin_dim=2, got {space.spin_dim}")
    a = fock_annihilation(space)
    sge = spin_projector(space, "g", "e")
    h = number_operator(space) * p.delta_c + spin_projector(space, "e", "e") * p.delta_c \
        + (a.dag() @ sge + a @ sge.dag()) * p.g
    if include_drives:
        h = h + (a.dag() + a) * p.eta
    return h


def excitation_number(space: HilbertSpace) -> SparseOperator:
    """N = a^dag a + Sz + 1, conserved by the undriven Hamiltonian."""
    _require_spin1(space)
    return number_operator(space) + spin1_operators(space).sz + identity(space)


def u1_rotation(theta: float, space: HilbertSpace) -> SparseOperator:
    """R = exp[i theta (a^dag a + Sz)]; diagonal in the product basis."""
    _require_spin1(space)
    gen = (number_operator(space) + spin1_operators(space).sz).matrix.diagonal().real
    return SparseOperator(space, sp.diags(np.exp(1j * theta * gen), format="csr"))


def collapse_operators(p: ModelParams, space: HilbertSpace) -> List[Tuple[SparseOperator, float]]:
    """Dissipation channels ``(operator, rate)``, each entering as ``rate/2 * D[op]``.

    Cavity loss ``(a, kappa)`` plus atomic decay ``(S-, gamma)`` for spin-1,
    or ``(s_ge, gamma)`` for the two-level reference. A zero rate is kept.
    """
    if p.kappa < 0 or p.gamma < 0:
        raise ValueError("dissipation rates must be non-negative")
    a = fock_annihilation(space)
    if space.spin_dim == 3:
        atom = spin1_operators(space).sm
    elif space.spin_dim == 2:
        atom = spin_projector(space, "g", "e")
    else:
        raise DimensionError("collapse operators need an atomic factor")
    return [(a, p.kappa), (atom, p.gamma)]


def model_operators(p: ModelParams, space: HilbertSpace, two_level: bool = False):
    """Hamiltonian and channels for the spin-1 model or the two-level reference."""
    if two_level:
        return build_two_level_jcm(p, space), collapse_operators(p, space)
    return build_hamiltonian(p, space), collapse_operators(p, space)


def physical_frequency(value_in_kappa: float) -> float:
    """Convert a rate in units of kappa to Hz (ordinary frequency)."""
    return value_in_kappa * KAPPA_HZ / (2 * math.pi)
