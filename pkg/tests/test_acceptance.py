"""Acceptance criteria 1-6, each at its stated tolerance.

Every check records a line through the ``acceptance`` fixture; the terminal
summary prints one PASS/FAIL line per criterion.
"""

import math
import time

import numpy as np
import pytest
import scipy.linalg

from spinjc.errors import NoRoot
from spinjc.hilbert import HilbertSpace, commutator, max_abs
from spinjc.model import ModelParams, build_hamiltonian, collapse_operators, excitation_number, u1_rotation
from spinjc.spectrum import (
    closed_form_energies,
    dark_state,
    dressed_block,
    resonance_crossing,
    resonance_frequency,
)
from spinjc.steady import (
    DensityMatrix,
    build_liouvillian,
    equal_time_g,
    photon_number,
    solve_operating_point,
    vec,
)
from spinjc.sweep import ATOM_DRIVEN, CAVITY_DRIVEN, scan_optimal
from spinjc.twotime import Propagator, default_tau_grid, evolve, g2_tau, spectral_gap

G = 6.0


def within_factor(value, target, factor):
    return target / factor <= value <= target * factor


def check(acceptance, crit, label, ok, detail=""):
    acceptance(crit, label, ok, detail)
    assert ok, f"{label}: {detail}"


@pytest.fixture(scope="module")
def single_photon_root():
    (x,) = resonance_frequency(1, "-", 0.1, -0.4, G)
    return x / G


@pytest.fixture(scope="module")
def two_photon_root():
    (x,) = resonance_frequency(2, "-", 0.1, 0.05, G)
    return x / G


@pytest.fixture(scope="module")
def bundle_point():
    res = solve_operating_point(ATOM_DRIVEN.at(2.5, 0.05))
    return res, Propagator(res.liouvillian)


# --- 1. cavity-driven blockade -------------------------------------------------

@pytest.mark.parametrize("sign", [1, -1])
def test_c1_blockade_at_single_photon_resonance(acceptance, single_photon_root, sign):
    x = sign * single_photon_root
    t0 = time.perf_counter()
    rho = solve_operating_point(CAVITY_DRIVEN.at(x, -0.4), fock_cutoff=10).rho
    g12, ns = equal_time_g(rho, 1, 2), photon_number(rho)
    elapsed = time.perf_counter() - t0
    check(acceptance, 1, f"g12(0) at dc/g={x:+.4f} within x2 of 7.5e-5", within_factor(g12, 7.5e-5, 2),
          f"g12={g12:.3e}")
    check(acceptance, 1, f"n_s >= 0.03 at dc/g={x:+.4f}", ns >= 0.03, f"n_s={ns:.5f}")
    check(acceptance, 1, "runtime < 10 s per point", elapsed < 10, f"{elapsed:.3f} s")


# --- 2. two-photon bundles -------------------------------------------------------

def test_c2_equal_time_near_two_photon_resonance(acceptance, two_photon_root):
    rho = solve_operating_point(ATOM_DRIVEN.at(two_photon_root, 0.05)).rho
    g12, g13 = equal_time_g(rho, 1, 2), equal_time_g(rho, 1, 3)
    check(acceptance, 2, f"g12(0) = 1.1 +- 20% at dc/g={two_photon_root:.4f}", abs(g12 - 1.1) <= 0.2 * 1.1,
          f"g12={g12:.4f}")
    check(acceptance, 2, f"g13(0) within x2 of 1.2e-4 at dc/g={two_photon_root:.4f}",
          within_factor(g13, 1.2e-4, 2), f"g13={g13:.3e}")


def test_c2_bundle_correlation_at_2p5(acceptance, bundle_point):
    res, _ = bundle_point
    g22 = equal_time_g(res.rho, 2, 2)
    check(acceptance, 2, "g22(0) within x2 of 4.9e-5 at dc/g=2.5", within_factor(g22, 4.9e-5, 2),
          f"g22={g22:.3e} (ratio {g22 / 4.9e-5:.2f})")


def test_c2_single_photon_bunching_at_2p5(acceptance, bundle_point):
    res, prop = bundle_point
    trace = g2_tau(prop, res.rho, 1)
    ok = bool(np.all(trace.values[1:] < trace.at_zero))
    check(acceptance, 2, "g12(0) > g12(tau) on the default grid", ok,
          f"g12(0)={trace.at_zero:.4f}, max tau>0 {trace.values[1:].max():.4f}")


def test_c2_bundle_antibunching_at_2p5(acceptance, bundle_point):
    res, prop = bundle_point
    trace = g2_tau(prop, res.rho, 2)
    below = trace.tau[1:][trace.values[1:] <= trace.at_zero]
    ok = below.size == 0
    detail = f"g22(0)={trace.at_zero:.3e}, min {trace.values.min():.3e}"
    if not ok:
        detail += f"; below g22(0) for tau in [{below.min():.3g}, {below.max():.3g}]"
    check(acceptance, 2, "g22(0) < g22(tau) on the default grid", ok, detail)


# --- 3. two-level reference ------------------------------------------------------

@pytest.fixture(scope="module")
def two_level_values():
    return {x: equal_time_g(solve_operating_point(CAVITY_DRIVEN.at(x, 0.0), two_level=True).rho, 1, 2)
            for x in (-1.0, 1.0)}


@pytest.mark.parametrize("x", [-1.0, 1.0])
def test_c3_two_level_reference(acceptance, two_level_values, x):
    g12 = two_level_values[x]
    check(acceptance, 3, f"two-level g12(0) = 7.0e-2 +- 20% at dc/g={x:+.0f}", abs(g12 - 0.07) <= 0.2 * 0.07,
          f"g12={g12:.4e}")


def test_c3_three_orders_of_magnitude(acceptance, two_level_values):
    (opt,) = scan_optimal([-0.4], CAVITY_DRIVEN, grid_points=81)
    ratio = opt.g_opt / min(two_level_values.values())
    check(acceptance, 3, "spin-1 optimum / two-level < 1e-2", ratio < 1e-2,
          f"{opt.g_opt:.3e} / {min(two_level_values.values()):.3e} = {ratio:.2e}")


# --- 4. spectrum analytics -------------------------------------------------------

def test_c4_closed_form_energies(acceptance):
    rng = np.random.default_rng(4)
    worst = 0.0
    for n in range(1, 7):
        for dc, d2 in rng.uniform(-30, 30, size=(50, 2)):
            exact = np.sort(closed_form_energies(n, dc, d2, G))
            vals = dressed_block(n, dc, dc, d2, G).eigvals()
            if n == 1:
                # two-state block: the middle closed-form level has no partner state
                exact = exact[[0, 2]]
            worst = max(worst, np.abs(exact - vals).max())
    check(acceptance, 4, "closed form == block eigensolve (delta1 = delta_c, n <= 6)", worst < 1e-12,
          f"max dev {worst:.2e}")


def test_c4_dark_state_vector(acceptance):
    v = dark_state(2)
    got = np.array([v.component(2, "g"), v.component(1, "r"), v.component(0, "m")]).real
    target = np.array([math.sqrt(2 / 3), 0.0, -math.sqrt(1 / 3)])
    null = np.abs(dressed_block(2, 0.0, 0.0, 0.0, G).matrix @ target).max()
    check(acceptance, 4, "dark_state(2) = (sqrt(2/3), 0, -sqrt(1/3))", np.allclose(got, target, atol=1e-14),
          f"got ({got[0]:.6f}, {got[1]:.1f}, {got[2]:.6f}); |M v_target| = {null:.3f}")


@pytest.mark.parametrize("n,r2,target", [(1, -0.4, 1.41), (2, 0.05, 2.4)])
def test_c4_resonance_positions(acceptance, n, r2, target):
    plus = resonance_frequency(n, "+", 0.1, r2, G)
    minus = resonance_frequency(n, "-", 0.1, r2, G)
    vals = [x / G for x in plus + minus]
    ok = len(vals) == 2 and all(abs(abs(v) - target) / target < 0.01 for v in vals) and vals[0] < 0 < vals[1]
    check(acceptance, 4, f"n={n} resonances at +-{target} g within 1%", ok, f"{vals[0]:+.5f}, {vals[1]:+.5f}")


def test_c4_one_two_photon_crossing(acceptance):
    x = resonance_crossing(1, 2, "-", 0.1, G)
    check(acceptance, 4, "Delta_1,- / Delta_2,- crossing in [-0.15, -0.05]", -0.15 <= x <= -0.05, f"at {x:.6f}")


def test_c4_no_single_photon_root_past_divergence(acceptance):
    missing = []
    for r2 in (0.045, 0.05, 0.08, 0.1):
        try:
            resonance_frequency(1, "-", 0.1, r2, G)
        except NoRoot:
            missing.append(r2)
    present = resonance_frequency(1, "-", 0.1, 0.035, G)
    ok = missing == [0.045, 0.05, 0.08, 0.1] and len(present) == 1
    check(acceptance, 4, "NoRoot for n=1 beyond delta2/delta_c ~ 0.04", ok,
          f"NoRoot at {missing}; root at 0.035: {present[0] / G:.4f} g")


# --- 5. property suites ----------------------------------------------------------

def test_c5_hamiltonian_symmetries(acceptance):
    rng = np.random.default_rng(5)
    s = HilbertSpace(6)
    herm, comm, rot = True, 0.0, 0.0
    for _ in range(20):
        dc, r1, r2, g = rng.uniform(-10, 10), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 10)
        p = ModelParams(g=g, delta_c=dc, delta1_ratio=r1, delta2_ratio=r2)
        herm &= build_hamiltonian(p.with_(eta=rng.uniform(0, 1), omega=rng.uniform(0, 1)), s).is_hermitian(1e-14)
        h = build_hamiltonian(p, s)
        comm = max(comm, max_abs(commutator(h, excitation_number(s))))
        for theta in (0.3, math.pi / 2, 2.1):
            r = u1_rotation(theta, s)
            rot = max(rot, max_abs(r.dag() @ h @ r - h))
    check(acceptance, 5, "H Hermitian", herm)
    check(acceptance, 5, "[H, N] = 0 at eta = Omega = 0", comm < 1e-13, f"max {comm:.1e}")
    check(acceptance, 5, "U(1) invariance at eta = Omega = 0", rot < 1e-12, f"max {rot:.1e}")


def test_c5_trace_preservation(acceptance):
    p = ModelParams(g=G, gamma=0.01, eta=0.1, omega=0.08, delta_c=8.0, delta2_ratio=-0.4)
    s = HilbertSpace(6)
    L = build_liouvillian(build_hamiltonian(p, s), collapse_operators(p, s))
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(10):
        m = rng.normal(size=(s.total_dim,) * 2) + 1j * rng.normal(size=(s.total_dim,) * 2)
        worst = max(worst, abs(np.trace(L.apply(m + m.conj().T))))
    check(acceptance, 5, "tr(L rho) = 0", worst < 1e-12, f"max {worst:.1e}")


OPERATING_POINTS = [(CAVITY_DRIVEN, 1.41, -0.4), (ATOM_DRIVEN, 2.39, 0.05), (ATOM_DRIVEN, 2.5, 0.05),
                    (ATOM_DRIVEN, 0.0, 0.05)]


def test_c5_steady_residual(acceptance):
    worst = 0.0
    for model, x, r2 in OPERATING_POINTS:
        res = solve_operating_point(model.at(x, r2))
        worst = max(worst, np.abs(res.liouvillian.matrix @ vec(res.rho.matrix)).max())
    check(acceptance, 5, "steady-state residual < 1e-10", worst < 1e-10, f"max {worst:.1e}")


def test_c5_driven_cavity_oracle(acceptance):
    worst = 0.0
    for eta in (0.05, 0.1, 0.3):
        for dc in (-2.0, 0.0, 0.7, 3.0):
            ns = photon_number(solve_operating_point(ModelParams(g=0.0, eta=eta, delta_c=dc), 12).rho)
            worst = max(worst, abs(ns - eta ** 2 / (dc ** 2 + 0.25)))
    check(acceptance, 5, "driven damped cavity n_s oracle to 1e-8", worst < 1e-8, f"max dev {worst:.1e}")


def test_c5_dense_expm_oracle(acceptance):
    p = ModelParams(g=G, gamma=0.01, eta=0.1, omega=0.08, delta_c=4.0, delta2_ratio=-0.4)
    s = HilbertSpace(3)
    L = build_liouvillian(build_hamiltonian(p, s), collapse_operators(p, s))
    d = s.total_dim
    mixed = 0.5 * np.eye(d) / d
    mixed[0, 0] += 0.5
    rho0 = DensityMatrix(s, mixed)
    worst = 0.0
    for t in (0.1, 1.0, 5.0):
        ref = scipy.linalg.expm(L.matrix.toarray() * t) @ vec(rho0.matrix)
        worst = max(worst, np.abs(vec(evolve(Propagator(L), rho0, t).matrix) - ref).max())
    check(acceptance, 5, "propagation matches dense expm at cutoff 3 to 1e-8", worst < 1e-8, f"max {worst:.1e}")


@pytest.mark.parametrize("model,x,r2", [(CAVITY_DRIVEN, 1.41, -0.4), (ATOM_DRIVEN, 2.5, 0.05)])
def test_c5_correlation_trace_limits(acceptance, model, x, r2):
    res = solve_operating_point(model.at(x, r2))
    prop = Propagator(res.liouvillian)
    gap = spectral_gap(res.liouvillian)
    t_inf = max(50.0, 25.0 / gap)
    for n in (1, 2):
        trace = g2_tau(prop, res.rho, n, np.concatenate([default_tau_grid(), [50.0, t_inf]]))
        g0 = equal_time_g(res.rho, n, 2)
        check(acceptance, 5, f"tau=0 consistency g{n}2 at dc/g={x}", abs(trace.at_zero / g0 - 1) < 1e-6,
              f"rel {abs(trace.at_zero / g0 - 1):.1e}")
        late = trace.values[-1]
        check(acceptance, 5, f"tau->inf gives 1 for g{n}2 at dc/g={x}", abs(late - 1) < 1e-3,
              f"|g-1|={abs(late - 1):.1e} at tau={t_inf:.0f} (slowest rate {gap:.3f}); "
              f"at tau=50: {abs(trace.values[-2] - 1):.1e}")


@pytest.mark.parametrize("model,x,r2", [(CAVITY_DRIVEN, 1.41, -0.4), (ATOM_DRIVEN, 2.39, 0.05),
                                        (CAVITY_DRIVEN, 0.8, -0.2)])
def test_c5_mirror_symmetry(acceptance, model, x, r2):
    a = solve_operating_point(model.at(x, r2)).rho
    b = solve_operating_point(model.at(-x, r2)).rho
    dn = abs(photon_number(b) / photon_number(a) - 1)
    dg = abs(equal_time_g(b, 1, 2) / equal_time_g(a, 1, 2) - 1)
    check(acceptance, 5, f"dc <-> -dc symmetry at |dc/g|={x}", dn < 1e-2 and dg < 1e-2,
          f"n_s rel {dn:.1e}, g12 rel {dg:.1e}")


@pytest.mark.parametrize("model,x,r2", OPERATING_POINTS)
def test_c5_cutoff_doubling(acceptance, model, x, r2):
    lo = solve_operating_point(model.at(x, r2), 10, escalate_to=None).rho
    hi = solve_operating_point(model.at(x, r2), 20, escalate_to=None).rho
    rel = max(abs(f(hi) / f(lo) - 1) for f in (photon_number, lambda r: equal_time_g(r, 1, 2),
                                               lambda r: equal_time_g(r, 1, 3)))
    check(acceptance, 5, f"cutoff 10 -> 20 stable at dc/g={x}, d2={r2}", rel < 1e-3, f"max rel {rel:.1e}")


# --- 6. dark-state branch --------------------------------------------------------

def test_c6_dark_state_signature(acceptance):
    xs = [-0.05, -0.02, 0.0, 0.02, 0.05]
    rhos = [solve_operating_point(ATOM_DRIVEN.at(x, 0.05)).rho for x in xs]
    ns = [photon_number(r) for r in rhos]
    centre = rhos[2]
    g12, g13 = equal_time_g(centre, 1, 2), equal_time_g(centre, 1, 3)
    is_max = ns[2] > ns[1] > ns[0] and ns[2] > ns[3] > ns[4]
    check(acceptance, 6, "n_s local maximum at dc = 0", is_max, "n_s=" + ", ".join(f"{v:.5f}" for v in ns))
    check(acceptance, 6, "g12(0) > 1 and g13(0) > 1 at dc = 0", g12 > 1 and g13 > 1,
          f"g12={g12:.3f}, g13={g13:.3f}")
