"""Dressed-state spectrum of the undriven spin-1 JCM.

Within the excitation block ``N = n`` the basis is ``(|n,g>, |n-1,r>,
|n-2,m>)`` (truncated for n < 2). Block energies are measured from the bare
vacuum ``|0,g>``, so a zero eigenvalue means the n-excitation state is
resonant with n drive photons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import NoRoot
from .hilbert import HilbertSpace, StateVector

SCAN_POINTS = 2000
BRANCHES = ("+", "0", "-")


@dataclass(frozen=True)
class DressedBlock:
    n: int
    matrix: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def eigvals(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def eigh(self):
        return np.linalg.eigh(self.matrix)


def dressed_block(n: int, delta_c: float, delta1: float, delta2: float, g: float) -> DressedBlock:
    if n < 0:
        raise ValueError(f"excitation number must be >= 0, got {n}")
    diag = [n * delta_c, (n - 1) * delta_c + delta1 - delta2, (n - 2) * delta_c + 2 * delta1]
    full = np.array([
        [diag[0], math.sqrt(n) * g, 0.0],
        [math.sqrt(n) * g, diag[1], math.sqrt(max(n - 1, 0)) * g],
        [0.0, math.sqrt(max(n - 1, 0)) * g, diag[2]],
    ])
    size = min(n + 1, 3)
    m = full[:size, :size] if n > 0 else np.zeros((1, 1))
    return DressedBlock(n=n, matrix=m.astype(float))


def block_basis_indices(n: int, space: HilbertSpace) -> List[int]:
    """Indices of ``|n,g>, |n-1,r>, |n-2,m>`` (those that exist) in ``space``."""
    return [space.index(n - k, k) for k in range(min(n + 1, 3))]


def closed_form_energies(n: int, delta_c: float, delta2: float, g: float) -> Tuple[float, float, float]:
    """``(E_plus, E_zero, E_minus)`` of block n, valid when ``delta1 == delta_c``."""
    root = math.sqrt((2 * n - 1) * g ** 2 + delta2 ** 2 / 4)
    base = n * delta_c - delta2 / 2
    return base + root, n * delta_c, base - root


def dark_state(n: int, space: Optional[HilbertSpace] = None) -> StateVector:
    """Zero-energy middle-branch state of block n at ``delta_c = 0``.

    sqrt((n-1)/(2n-1)) |n,g> - sqrt(n/(2n-1)) |n-2,m>, the null vector of
    the block with couplings sqrt(n) g and sqrt(n-1) g. The coefficients
    with n and n-1 interchanged are not annihilated by the block.
    """
    if n < 2:
        raise ValueError(f"the dark state needs n >= 2, got {n}")
    space = space or HilbertSpace(fock_cutoff=n, spin_dim=3)
    amps = np.zeros(space.total_dim, dtype=complex)
    amps[space.index(n, "g")] = math.sqrt((n - 1) / (2 * n - 1))
    amps[space.index(n - 2, "m")] = -math.sqrt(n / (2 * n - 1))
    return StateVector(space, amps)


def closed_form_resonance(n: int, delta2: float, g: float) -> Tuple[float, float]:
    """``(Delta_{n,+}, Delta_{n,-})`` for ``delta1 == delta_c`` at fixed absolute ``delta2``."""
    root = math.sqrt((2 * n - 1) * g ** 2 + delta2 ** 2 / 4)
    return (delta2 / 2 - root) / n, (delta2 / 2 + root) / n


def _block_at(n, delta_c, delta1_ratio, delta2_ratio, g):
    return dressed_block(n, delta_c, delta1_ratio * delta_c, delta2_ratio * delta_c, g)


def _det(n, delta_c, r1, r2, g):
    return float(np.linalg.det(_block_at(n, delta_c, r1, r2, g).matrix))


def _dets(n, xs, r1, r2, g):
    xs = np.asarray(xs, dtype=float)
    size = min(n + 1, 3) if n > 0 else 1
    m = np.zeros((len(xs), 3, 3))
    m[:, 0, 0] = n * xs
    m[:, 1, 1] = (n - 1) * xs + (r1 - r2) * xs
    m[:, 2, 2] = (n - 2) * xs + 2 * r1 * xs
    m[:, 0, 1] = m[:, 1, 0] = math.sqrt(n) * g
    m[:, 1, 2] = m[:, 2, 1] = math.sqrt(max(n - 1, 0)) * g
    if n == 0:
        return np.zeros(len(xs))
    return np.linalg.det(m[:, :size, :size])


def root_branch(n: int, delta_c: float, delta1_ratio: float, delta2_ratio: float, g: float) -> str:
    """Which dressed branch has its zero crossing at ``delta_c``.

    The eigenvalue closest to zero is located in the sorted spectrum: the
    top eigenvalue is the ``+`` branch, the bottom one ``-``, anything in
    between the middle ``0`` branch.
    """
    vals = _block_at(n, delta_c, delta1_ratio, delta2_ratio, g).eigvals()
    i = int(np.argmin(np.abs(vals)))
    if len(vals) == 1:
        return "0"
    if i == len(vals) - 1:
        return "+"
    if i == 0:
        return "-"
    return "0"


@dataclass(frozen=True)
class Root:
    delta_c: float
    branch: str
    residual: float


def _window(search_window, g):
    if np.isscalar(search_window):
        return -abs(search_window) * abs(g), abs(search_window) * abs(g)
    lo, hi = search_window
    return lo * abs(g), hi * abs(g)


def find_roots(n: int, delta1_ratio: float, delta2_ratio: float, g: float,
               search_window=4.0, points: int = SCAN_POINTS, xtol: float = 1e-10) -> List[Root]:
    """All zero crossings of det M(delta_c) in the window (in units of g).

    Coarse scan at ``points`` samples, then bisection to ``xtol * g``.
    """
    lo, hi = _window(search_window, g)
    xs = np.linspace(lo, hi, points)
    dets = _dets(n, xs, delta1_ratio, delta2_ratio, g)
    tol = xtol * abs(g)
    found = []
    for i in range(points - 1):
        a, b = xs[i], xs[i + 1]
        fa, fb = dets[i], dets[i + 1]
        if fa == 0.0:
            found.append(a)
            continue
        if fa * fb > 0 or fb == 0.0:
            continue
        while b - a > tol:
            mid = 0.5 * (a + b)
            fm = _det(n, mid, delta1_ratio, delta2_ratio, g)
            if fm == 0.0:
                a = b = mid
                break
            if fa * fm < 0:
                b = mid
            else:
                a, fa = mid, fm
        found.append(0.5 * (a + b))
    if dets[-1] == 0.0:
        found.append(xs[-1])
    roots = []
    for x in found:
        vals = _block_at(n, x, delta1_ratio, delta2_ratio, g).eigvals()
        roots.append(Root(delta_c=float(x), branch=root_branch(n, x, delta1_ratio, delta2_ratio, g),
                          residual=float(np.min(np.abs(vals)))))
    return roots


def resonance_frequency(n: int, branch: str, delta1_ratio: float, delta2_ratio: float, g: float,
                        search_window=4.0) -> List[float]:
    """n-photon drive resonances ``Delta_{n,branch}`` with detunings tied to ``delta_c``.

    Returns every root of the requested branch inside the window (usually
    one), sorted. ``search_window`` is a half-width or ``(lo, hi)`` in units
    of g. Raises :class:`NoRoot` if there is none.
    """
    if branch not in BRANCHES:
        raise ValueError(f"branch must be one of {BRANCHES}, got {branch!r}")
    roots = [r.delta_c for r in find_roots(n, delta1_ratio, delta2_ratio, g, search_window)
             if r.branch == branch]
    if not roots:
        raise NoRoot(f"no {branch} root for n={n} at ratios ({delta1_ratio}, {delta2_ratio}) "
                     f"in window {_window(search_window, g)}")
    return sorted(roots)


@dataclass
class ResonanceCurve:
    n: int
    branch: str
    samples: List[Tuple[float, float]] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)

    def ratios(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    def roots_over_g(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])

    def rows(self):
        for (ratio, root), res in zip(self.samples, self.residuals):
            yield {"n": self.n, "branch": self.branch, "delta2_ratio": ratio,
                   "delta_c_over_g": root, "residual": res}


def resonance_curve(n: int, branch: str, delta1_ratio: float, delta2_ratios: Sequence[float], g: float,
                    search_window=4.0) -> ResonanceCurve:
    """Resonance position versus ``delta2/delta_c``; NaN where no root lies in the window.

    When a branch has several roots, the one of smallest magnitude is kept.
    """
    curve = ResonanceCurve(n=n, branch=branch)
    for r2 in delta2_ratios:
        try:
            roots = resonance_frequency(n, branch, delta1_ratio, r2, g, search_window)
        except NoRoot:
            curve.samples.append((float(r2), math.nan))
            curve.residuals.append(math.nan)
            continue
        x = min(roots, key=abs)
        res = float(np.min(np.abs(_block_at(n, x, delta1_ratio, r2, g).eigvals())))
        curve.samples.append((float(r2), x / g))
        curve.residuals.append(res)
    return curve


def resonance_crossing(n_a: int, n_b: int, branch: str, delta1_ratio: float, g: float,
                       ratio_range=(-0.5, 0.0), points: int = 101, search_window=4.0) -> float:
    """``delta2/delta_c`` where resonances of orders ``n_a`` and ``n_b`` coincide."""
    from scipy.optimize import brentq

    def gap(r2):
        xa = min(resonance_frequency(n_a, branch, delta1_ratio, r2, g, search_window), key=abs)
        xb = min(resonance_frequency(n_b, branch, delta1_ratio, r2, g, search_window), key=abs)
        return xa - xb

    rs = np.linspace(ratio_range[0], ratio_range[1], points)
    vals = []
    for r in rs:
        try:
            vals.append(gap(r))
        except NoRoot:
            vals.append(math.nan)
    for i in range(points - 1):
        if np.isfinite(vals[i]) and np.isfinite(vals[i + 1]) and vals[i] * vals[i + 1] <= 0:
            if vals[i] == 0:
                return float(rs[i])
            return float(brentq(gap, rs[i], rs[i + 1], xtol=1e-12))
    raise NoRoot(f"resonances n={n_a} and n={n_b} do not cross in {ratio_range}")
