"""Acceptance criteria at full scale.  Criterion 4 takes tens of minutes."""

import math

import numpy as np
import pytest
import scipy.integrate
import scipy.linalg

from diracloc.analysis import (delocalization_experiment, eigenfunction_decay,
                               localization_experiment, mass_gap_experiment, nrl_experiment,
                               zitterbewegung_experiment)
from diracloc.disorder import DisorderSpec, sample_potential
from diracloc.dynamics import (diagonalize, evolve_state, launch_state, moment_series,
                               time_averaged_moment)
from diracloc.lattice import (LatticeConfig, SpinorState, build_dirac, free_dirac_dispersion,
                              position_operator)
from diracloc.transfer import lyapunov_exponent, spectral_radius, transfer_matrix

STEPS = 10 ** 6
REALIZATIONS = 32
SQ3 = math.sqrt(3.0)
HALF = 1 / math.sqrt(2.0)


def _gamma(E, m, v, record):
    est = lyapunov_exponent(E, DisorderSpec(v=v, p=0.5, seed=0), m, 1.0, STEPS, REALIZATIONS)
    record("gamma", f"{est.gamma:.4g}+-{est.std_error:.2g} (m={m}, v={v:.4g}, E={E:.4g})")
    return est


@pytest.mark.criterion(1)
@pytest.mark.parametrize("E", [0.5, -0.5])
def test_c1_massless_critical(E, record_property):
    assert _gamma(E, 0.0, 0.5, record_property).gamma <= 1e-3


@pytest.mark.criterion(1)
def test_c1_massive_v_special(record_property):
    assert _gamma(0.0, 1.0, SQ3, record_property).gamma <= 1e-3


@pytest.mark.criterion(1)
@pytest.mark.parametrize("s1,s2", [(1, 1), (1, -1), (-1, 1), (-1, -1)])
def test_c1_massive_v_half(s1, s2, record_property):
    assert _gamma(s1 * HALF + s2 * SQ3, 1.0, HALF, record_property).gamma <= 2e-3


@pytest.mark.criterion(2)
@pytest.mark.parametrize("m,v,E", [(0.0, 0.5, 0.2), (1.0, SQ3, 0.5)])
def test_c2_positive_off_critical(m, v, E, record_property):
    est = _gamma(E, m, v, record_property)
    assert est.gamma >= 10 * est.std_error
    assert est.gamma >= 0.01


@pytest.mark.criterion(2)
@pytest.mark.parametrize("E", [1.5, -1.5])
def test_c2_hyperbolic_contrast(E, record_property):
    assert _gamma(E, 0.0, 1.5, record_property).gamma >= 0.5


@pytest.mark.criterion(3)
def test_c3_transfer_exactness():
    rng = np.random.default_rng(2024)
    draws = zip(rng.uniform(-5, 5, 10 ** 4), rng.uniform(-3, 3, 10 ** 4),
                rng.uniform(0, 3, 10 ** 4), rng.uniform(0.1, 5, 10 ** 4))
    for E, V, m, c in draws:
        T = transfer_matrix(E, V, m, c)
        assert abs(T[0, 0] * T[1, 1] - T[0, 1] * T[1, 0] - 1.0) <= 1e-12 * max(1.0, np.abs(T).max() ** 2)
    for v, c in [(0.5, 1.0), (0.3, 2.0), (1.0, 1.0), (1.5, 1.0)]:
        assert np.array_equal(transfer_matrix(v, v, 0.0, c), np.eye(2))
        a = 2 * v / c
        assert np.array_equal(transfer_matrix(v, -v, 0.0, c), np.array([[1 - a * a, a], [-a, 1.0]]))
        rho = spectral_radius(transfer_matrix(v, -v, 0.0, c))
        assert rho == 1.0 if v <= c else rho > 1.0
    assert spectral_radius(transfer_matrix(1.5, -1.5, 0.0, 1.0)) == pytest.approx((7 + math.sqrt(45)) / 2)


@pytest.mark.criterion(4)
@pytest.mark.slow
def test_c4_massless_delocalization(record_property):
    r = delocalization_experiment(v=0.5, c=1.0, p=0.5, sizes=(2001,), n_realizations=16)
    for key in ("alpha_N2001", "r2_N2001", "fit_window_N2001", "contrast_alpha_N2001"):
        record_property(key, r.measured[key])
    assert r.series["moments_N2001"].flagged.sum() == 0
    assert r.passed, r.checks


@pytest.mark.criterion(5)
@pytest.mark.parametrize("m,v", [(1.0, 1.0), (0.0, 1.5)])
def test_c5_localization(m, v, record_property):
    r = localization_experiment(m=m, v=v, c=1.0, p=0.5, n_sites=201, n_realizations=16)
    for key in ("rho", "alpha_late", "size_deviation"):
        record_property(f"{key}(m={m:g},v={v:g})", f"{r.measured[key]:.4g}")
    assert r.passed, r.checks


@pytest.mark.criterion(6)
def test_c6_mass_gap(record_property):
    r = mass_gap_experiment(masses=(1e-3,), c=1.0, v=0.5, p=0.5)
    for key in ("C_m0.001", "C_doubled_m0.001", "linearity_ratio"):
        record_property(key, f"{r.measured[key]:.4g}")
    assert r.passed, r.checks


@pytest.mark.criterion(7)
@pytest.mark.parametrize("v", [0.5, 0.0])
def test_c7_nonrelativistic_limit(v, record_property):
    r = nrl_experiment(m=1.0, c_list=(5.0, 10.0, 20.0), v=v, t_grid=(0.0, 1.0, 2.0, 5.0))
    record_property(f"eps_t5(v={v:g})",
                    ", ".join(f"{r.measured[f'eps_c{c:g}_t5']:.3g}" for c in (5, 10, 20)))
    assert r.checks["decreasing_t5"]["passed"]
    assert r.passed, r.checks


@pytest.mark.criterion(8)
def test_c8_zitterbewegung(record_property):
    r = zitterbewegung_experiment()
    for key in ("ring_eigen_deviation", "a_squared_deviation", "ehrenfest_error", "dominant_omega"):
        record_property(key, f"{r.measured[key]:.3g}")
    record_property("band", f"[{r.measured['band_lo']:.3g}, {r.measured['band_hi']:.3g}]")
    assert r.passed, r.checks


@pytest.mark.criterion(9)
def test_c9_eigenfunction_decay(record_property):
    cfg = LatticeConfig(801, "open", 1.0, 1.0)
    r = eigenfunction_decay(cfg, DisorderSpec(v=1.0, p=0.5, seed=0))
    for key in ("kappa_median", "relative_deviation_median", "n_fitted"):
        record_property(key, f"{r.measured[key]:.3g}")
    assert r.passed, r.checks


def _instances():
    yield LatticeConfig(401, "open", 0.0, 1.0), DisorderSpec(v=0.5, seed=0)
    yield LatticeConfig(403, "open", 1.0, 1.0), DisorderSpec(v=1.0, seed=0)


@pytest.mark.criterion(10)
def test_c10_unitarity_and_energy(record_property):
    worst_norm = worst_energy = 0.0
    for cfg, spec in _instances():
        H = build_dirac(cfg, sample_potential(spec, cfg.n_sites, 0))
        plan = diagonalize(H, position_operator(cfg))
        psi0 = SpinorState.gaussian(cfg.n_sites, cfg.center, 5.0, 0.7).vector
        e0 = np.real(np.vdot(psi0, H @ psi0))
        for t in (1.0, 10.0, 100.0, 1e3, 1e5):
            psi = evolve_state(plan, psi0, t)
            worst_norm = max(worst_norm, abs(np.linalg.norm(psi) - 1.0))
            worst_energy = max(worst_energy, abs(np.real(np.vdot(psi, H @ psi)) - e0) / abs(e0))
    record_property("norm_deviation", f"{worst_norm:.2g}")
    record_property("energy_deviation", f"{worst_energy:.2g}")
    assert worst_norm <= 1e-10
    assert worst_energy <= 1e-9


@pytest.mark.criterion(10)
def test_c10_closed_form_vs_quadrature(record_property):
    cfg = LatticeConfig(32, "open", 0.5, 1.0)
    H = build_dirac(cfg, sample_potential(DisorderSpec(v=0.5, seed=1), 32, 0))
    plan = diagonalize(H, position_operator(cfg))
    psi0 = launch_state(32).vector
    t, steps = 6.0, 30000
    step = scipy.linalg.expm(-1j * (t / steps) * H.matrix)
    psi = psi0.astype(complex)
    vals = np.empty(steps + 1)
    for k in range(steps + 1):
        vals[k] = np.sum(plan.coordinates ** 2 * np.abs(psi) ** 2)
        psi = step @ psi
    ref = scipy.integrate.trapezoid(vals, dx=t / steps) / t
    rel = abs(time_averaged_moment(plan, psi0, t) - ref) / ref
    record_property("closed_form_rel_error", f"{rel:.2g}")
    assert rel <= 1e-6


@pytest.mark.criterion(10)
def test_c10_free_dispersion():
    cfg = LatticeConfig(128, "periodic", 0.7, 1.3)
    evals = diagonalize(build_dirac(cfg, np.zeros(128))).eigenvalues
    assert np.max(np.abs(evals - free_dirac_dispersion(cfg))) <= 1e-10


@pytest.mark.criterion(10)
def test_c10_bit_identical_reruns():
    spec = DisorderSpec(v=0.5, seed=7)
    a = lyapunov_exponent(0.3, spec, 0.0, 1.0, 10 ** 5, 4, threads=2)
    b = lyapunov_exponent(0.3, spec, 0.0, 1.0, 10 ** 5, 4, threads=1)
    assert a.samples.tobytes() == b.samples.tobytes()
    cfg = LatticeConfig(101, "open", 0.0, 1.0)
    grid = np.geomspace(1, 30, 10)
    s1 = moment_series(cfg, spec, grid, 3)
    s2 = moment_series(cfg, spec, grid, 3, threads=2)
    assert s1.values.tobytes() == s2.values.tobytes()
    r1 = localization_experiment(t_grid=np.geomspace(1, 100, 24), n_sites=61, n_realizations=2)
    r2 = localization_experiment(t_grid=np.geomspace(1, 100, 24), n_sites=61, n_realizations=2)
    assert r1.to_json() == r2.to_json()
