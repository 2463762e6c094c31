import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from diracloc.disorder import DisorderSpec, sample_potential
from diracloc.lattice import LatticeConfig, build_dirac
from diracloc.transfer import (critical_energies, eigen_recursion, energy_sweep,
                               lyapunov_exponent, propagate_transfer, refined_energy_grid,
                               spectral_radius, transfer_matrix, write_sweep_csv)


def test_determinant_is_one_symbolically():
    E, V, m, c = sp.symbols("E V m c", real=True)
    T = sp.Matrix([[1 + (m ** 2 * c ** 4 - (E - V) ** 2) / c ** 2, (m * c ** 2 + E - V) / c],
                   [(m * c ** 2 - E + V) / c, 1]])
    assert sp.simplify(T.det()) == 1
    num = transfer_matrix(0.3, -0.2, 0.7, 1.1)
    sym = np.array(T.subs({E: 0.3, V: -0.2, m: 0.7, c: 1.1}).evalf(), dtype=float)
    np.testing.assert_allclose(num, sym, rtol=1e-14)


def test_determinant_random_draws():
    rng = np.random.default_rng(0)
    for _ in range(10 ** 4):
        E, V = rng.uniform(-3, 3, 2)
        m, c = rng.uniform(0, 2), rng.uniform(0.2, 3)
        assert abs(np.linalg.det(transfer_matrix(E, V, m, c)) - 1) <= 1e-12


@pytest.mark.parametrize("v,c", [(0.5, 1.0), (0.3, 2.0), (1.5, 1.0)])
def test_massless_critical_matrices(v, c):
    r = 2 * v / c
    np.testing.assert_array_equal(transfer_matrix(v, -v, 0.0, c), [[1 - r ** 2, r], [-r, 1]])
    np.testing.assert_array_equal(transfer_matrix(v, v, 0.0, c), np.eye(2))
    a, b = transfer_matrix(v, -v, 0.0, c), transfer_matrix(v, v, 0.0, c)
    assert np.all(a @ b - b @ a == 0)


def test_spectral_radius():
    assert spectral_radius(np.eye(2)) == 1.0
    for v in (0.1, 0.5, 0.9, 1.0):
        assert spectral_radius(transfer_matrix(v, -v, 0.0, 1.0)) == 1.0
    rho = spectral_radius(transfer_matrix(1.5, -1.5, 0.0, 1.0))
    assert rho == pytest.approx((7 + math.sqrt(45)) / 2, rel=1e-14)
    assert rho == pytest.approx(np.max(np.abs(np.linalg.eigvals(transfer_matrix(1.5, -1.5, 0, 1)))))
    assert spectral_radius(np.diag([3.0, 0.5])) == 3.0


def test_propagate_identity_factors():
    log_sum, frame = propagate_transfer(0.5, np.full(1000, 0.5), LatticeConfig(4, mass=0.0))
    assert log_sum == pytest.approx(0.5 * math.log(2), abs=1e-14)
    np.testing.assert_allclose(frame, np.eye(2) / math.sqrt(2))


def test_propagate_elliptic_powers_stay_bounded():
    cfg = LatticeConfig(4, mass=0.0, light_speed=1.0)
    T = transfer_matrix(0.5, -0.5, 0.0, 1.0)
    # powers of an elliptic SL(2,R) matrix: conjugate to a rotation, so norms are bounded
    w, P = np.linalg.eig(T)
    bound = np.linalg.norm(P) * np.linalg.norm(np.linalg.inv(P))
    for n in (10, 1000, 10 ** 6):
        log_sum, _ = propagate_transfer(0.5, np.full(n, -0.5), cfg)
        assert log_sum <= math.log(bound) + 1e-9
        if n <= 1000:
            direct = np.linalg.norm(np.linalg.matrix_power(T, n))
            assert log_sum == pytest.approx(math.log(direct), abs=1e-9)
    assert propagate_transfer(0.5, np.full(10 ** 6, -0.5), cfg)[0] / 10 ** 6 < 1e-5


def test_propagate_matches_direct_product():
    rng = np.random.default_rng(3)
    V = rng.choice([-0.7, 0.7], size=60)
    cfg = LatticeConfig(4, mass=0.4, light_speed=1.2)
    prod = np.eye(2)
    for x in V:
        prod = transfer_matrix(0.9, x, 0.4, 1.2) @ prod
    log_sum, frame = propagate_transfer(0.9, V, cfg)
    np.testing.assert_allclose(math.exp(log_sum) * frame, prod, rtol=1e-10)


def test_propagate_renormalizes_without_overflow():
    cfg = LatticeConfig(4, mass=0.0, light_speed=1.0)
    log_sum, frame = propagate_transfer(1.5, np.full(10 ** 5, -1.5), cfg)
    rho = (7 + math.sqrt(45)) / 2
    assert math.isfinite(log_sum)
    # the eigenbasis prefactor contributes O(1/n) to the rate
    assert log_sum / 10 ** 5 == pytest.approx(math.log(rho), abs=1e-4)
    assert np.linalg.norm(frame) == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(E=st.floats(-2.5, 2.5), m=st.floats(0, 1.5), c=st.floats(0.5, 2.0),
       seed=st.integers(0, 10 ** 6))
def test_recursion_solves_eigen_equation(E, m, c, seed):
    n = 16
    V = sample_potential(DisorderSpec(v=0.6, seed=seed), n).values
    psi = eigen_recursion(E, V, m, c, start=(1.0, 0.0))
    H = build_dirac(LatticeConfig(n, "open", m, c), V).matrix
    resid = (H - E * np.eye(2 * n)) @ psi.vector
    # row 0 of the upper block sees psi-_{-1} (= 0 here, so it holds too); the last lower row sees psi+_n
    interior = np.ones(2 * n, bool)
    interior[2 * n - 1] = False
    scale = max(1.0, np.max(np.abs(psi.vector))) * max(1.0, abs(E), m * c * c, c)
    assert np.max(np.abs(resid[interior])) <= 1e-10 * scale


def test_lyapunov_vanishes_at_massless_critical_energy():
    est = lyapunov_exponent(0.5, DisorderSpec(v=0.5, p=0.5, seed=1), 0.0, 1.0, 10 ** 6, 4)
    assert 0 <= est.gamma <= 1e-3


def test_lyapunov_free_band():
    est = lyapunov_exponent(1.0, DisorderSpec(kind="constant_zero"), 0.0, 1.0, 10 ** 5, 2)
    assert est.gamma <= 1e-3
    assert not est.resolved and math.isinf(est.loc_length)


def test_lyapunov_positive_when_hyperbolic():
    est = lyapunov_exponent(1.5, DisorderSpec(v=1.5, seed=2), 0.0, 1.0, 10 ** 5, 4)
    assert est.gamma > 0.5
    assert est.resolved and est.loc_length == pytest.approx(1 / est.gamma)


def test_lyapunov_disjoint_streams_agree():
    spec = DisorderSpec(v=0.5, seed=4)
    a = lyapunov_exponent(0.2, spec, 0.0, 1.0, 10 ** 5, 8, stream_offset=0)
    b = lyapunov_exponent(0.2, spec, 0.0, 1.0, 10 ** 5, 8, stream_offset=100)
    assert abs(a.gamma - b.gamma) <= 4 * math.hypot(a.std_error, b.std_error)


def test_lyapunov_threads_do_not_change_result():
    spec = DisorderSpec(v=0.5, seed=4)
    a = lyapunov_exponent(0.2, spec, 0.0, 1.0, 10 ** 4, 6, threads=1)
    b = lyapunov_exponent(0.2, spec, 0.0, 1.0, 10 ** 4, 6, threads=3)
    assert a.gamma == b.gamma and np.array_equal(a.samples, b.samples)


def test_lyapunov_rejects_short_runs():
    with pytest.raises(ValueError):
        lyapunov_exponent(0.2, DisorderSpec(), 0.0, 1.0, 100, 2)


def test_critical_energy_catalogue():
    s = critical_energies(0.0, 1.0, 0.5)
    assert s.regime == "massless" and sorted(s.energies) == [-0.5, 0.5]
    s = critical_energies(1.0, 1.0, math.sqrt(3))
    assert s.regime == "massive_v_eq_special" and s.energies == (0.0,)
    s = critical_energies(1.0, 1.0, 0.9)
    assert s.regime == "none" and s.energies == ()
    s = critical_energies(1.0, 1.0, 1 / math.sqrt(2))
    assert s.regime == "massive_v_eq_c_over_sqrt2"
    expected = sorted(a / math.sqrt(2) + b * math.sqrt(3) for a in (1, -1) for b in (1, -1))
    np.testing.assert_allclose(s.energies, expected)


def test_critical_energy_exclusions():
    assert critical_energies(0.0, 1.0, 1 / math.sqrt(2)).regime == "none"
    assert critical_energies(0.0, 1.0, 1.5).regime == "none"
    assert critical_energies(0.0, 2.0, 2.0).regime == "massless"
    # relative tolerance 1e-9 on the special values
    assert critical_energies(1.0, 1.0, math.sqrt(3) * (1 + 1e-11)).regime == "massive_v_eq_special"
    assert critical_energies(1.0, 1.0, math.sqrt(3) * (1 + 1e-6)).regime == "none"


def test_refined_grid_and_sweep_csv(tmp_path):
    grid = refined_energy_grid(np.linspace(-1, 1, 5), 0.0, 1.0, 0.5, width=0.05, levels=2)
    for e in (0.5, 0.45, 0.55, 0.475, 0.525, -0.5):
        assert np.any(np.isclose(grid, e))
    ests = energy_sweep([0.0, 0.2], DisorderSpec(v=0.5), 0.0, 1.0, 10 ** 4, 2)
    path = write_sweep_csv(ests, tmp_path / "sweep.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "energy,gamma,std_error,loc_length,n_steps,n_realizations"
    assert len(lines) == 3
