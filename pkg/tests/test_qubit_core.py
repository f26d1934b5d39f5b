import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from qmonopole import qubit_core as qc
from qmonopole.errors import BoundaryDegeneracy, DegeneratePoint, DegenerateSpectrum

thetas = st.floats(0.0, math.pi)
phis = st.floats(0.0, 2 * math.pi, exclude_max=True)
rates = st.floats(-300.0, 300.0).filter(lambda v: abs(v) > 1e-3)
omegas = st.floats(1e-2, 300.0)


@st.composite
def drive_params(draw):
    return qc.DriveParams(draw(rates), draw(st.floats(-300.0, 300.0)), draw(omegas))


def _same_ray(a, b, tol):
    return abs(abs(np.vdot(a, b)) - 1.0) < tol


def test_mhz_inputs_are_converted_to_angular_units():
    p = qc.DriveParams.from_mhz(30, 0, 10)
    assert p.delta1 == pytest.approx(2 * math.pi * 30, rel=1e-15)
    assert p.omega_n == pytest.approx(2 * math.pi * 10, rel=1e-15)


def test_negative_rabi_amplitude_rejected():
    with pytest.raises(ValueError):
        qc.DriveParams(1.0, 0.0, -1.0)


def test_sphere_point_ranges():
    qc.SpherePoint(math.pi, 0.0)
    with pytest.raises(ValueError):
        qc.SpherePoint(3.2, 0.0)
    with pytest.raises(ValueError):
        qc.SpherePoint(1.0, 2 * math.pi)


def test_hamiltonian_at_north_pole_is_diagonal():
    p = qc.DriveParams.from_mhz(30, 0, 10)
    h = qc.build_hamiltonian(p, 0.0, 0.3)
    assert np.allclose(h, 0.5 * p.delta1 * qc.SIGMA_Z, atol=1e-12)


def test_equator_sphere_case_matches_hand_written_matrix():
    p = qc.DriveParams(2.0, 0.0, 2.0)
    h = qc.build_hamiltonian(p, math.pi / 2, 0.0)
    assert np.allclose(h, qc.SIGMA_X, atol=1e-15)


@given(drive_params(), thetas, phis)
def test_hamiltonian_is_hermitian_and_traceless(p, theta, phi):
    h = qc.build_hamiltonian(p, theta, phi)
    assert np.allclose(h, h.conj().T, atol=1e-12)
    assert abs(np.trace(h)) < 1e-12


@given(drive_params(), thetas, phis)
def test_spectrum_is_plus_minus_half_field_length(p, theta, phi):
    delta, omega = p.detuning(theta), p.rabi(theta)
    radius = math.hypot(delta, omega)
    assume(radius > 1e-6)
    es = qc.eigenstates(p, theta, phi)
    assert es.e_ground == pytest.approx(-radius / 2, abs=1e-9 * max(1.0, radius))
    assert es.e_excited == pytest.approx(radius / 2, abs=1e-9 * max(1.0, radius))


@given(drive_params(), thetas, phis)
def test_gauge_fixed_eigenvectors_have_real_nonnegative_first_component(p, theta, phi):
    assume(math.hypot(p.detuning(theta), p.rabi(theta)) > 1e-6)
    es = qc.eigenstates(p, theta, phi)
    for psi in (es.psi_ground, es.psi_excited):
        if abs(psi[0]) >= qc.GAUGE_TOL:
            assert psi[0].imag == 0.0 and psi[0].real > 0
        else:
            assert psi[1].imag == 0.0 and psi[1].real > 0


@given(drive_params(), thetas, phis)
def test_analytic_eigenstates_solve_the_eigenproblem(p, theta, phi):
    radius = math.hypot(p.detuning(theta), p.rabi(theta))
    assume(radius > 1e-6)
    ground, excited = qc.analytic_eigenstates(p, theta, phi)
    h = qc.build_hamiltonian(p, theta, phi)
    for psi, e in ((ground, -radius / 2), (excited, radius / 2)):
        assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(h @ psi - e * psi) < 1e-9 * max(1.0, radius)
    es = qc.eigenstates(p, theta, phi)
    assert _same_ray(ground, es.psi_ground, 1e-9)
    assert _same_ray(excited, es.psi_excited, 1e-9)


def test_analytic_states_are_vectorized():
    p = qc.DriveParams.from_mhz(30, 5, 10)
    th, ph = np.meshgrid(np.linspace(0.1, 3.0, 5), np.linspace(0, 6, 4), indexing="ij")
    g, e = qc.analytic_eigenstates(p, th, ph)
    assert g.shape == e.shape == (5, 4, 2)
    assert np.allclose(np.abs(qc.overlap(g, e)), 0.0, atol=1e-12)


def test_sphere_section_points_along_the_polar_direction():
    theta, phi = 1.1, 2.3
    psi = qc.sphere_section(theta, phi)
    bloch = [qc.expectation(psi, s).real for s in (qc.SIGMA_X, qc.SIGMA_Y, qc.SIGMA_Z)]
    expected = [math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]
    assert np.allclose(bloch, expected, atol=1e-14)


def test_degenerate_point_raises():
    p = qc.DriveParams.from_mhz(30, 0, 10)
    with pytest.raises(DegeneratePoint):
        qc.eigenstates(p.with_delta2(p.delta1), math.pi, 0.0)
    with pytest.raises(DegeneratePoint):
        qc.analytic_eigenstates(p.with_delta2(-p.delta1), 0.0, 0.0)
    with pytest.raises(DegenerateSpectrum):
        qc.eigensystem(np.zeros((2, 2)))


@pytest.mark.parametrize(
    "ratio, enclosed", [(0.0, 1), (0.5, 1), (-0.9, 1), (1.1, 0), (-2.0, 0)]
)
def test_degeneracy_enclosure(ratio, enclosed):
    p = qc.DriveParams.from_mhz(30, 0, 10).with_ratio(ratio)
    assert qc.degeneracy_enclosed(p) == enclosed
    assert qc.expected_chern(p, "ground") == enclosed
    assert qc.expected_chern(p, "excited") == -enclosed


def test_enclosure_orientation_follows_sign_of_delta1():
    p = qc.DriveParams(-10.0, 0.0, 5.0)
    assert qc.expected_chern(p, "ground") == -1


def test_enclosure_boundary_and_bad_input():
    with pytest.raises(BoundaryDegeneracy):
        qc.degeneracy_enclosed(qc.DriveParams(1.0, -1.0, 1.0))
    with pytest.raises(ValueError):
        qc.degeneracy_enclosed(qc.DriveParams(0.0, 0.5, 1.0))
    with pytest.raises(ValueError):
        qc.band_sign("middle")


@given(drive_params(), st.floats(0.05, 3.09), phis)
def test_analytic_hamiltonian_derivatives_match_finite_differences(p, theta, phi):
    h = 1e-6
    dt, dp = qc.hamiltonian_derivatives(p, theta, phi)
    fd_t = (qc.build_hamiltonian(p, theta + h, phi) - qc.build_hamiltonian(p, theta - h, phi)) / (2 * h)
    fd_p = (qc.build_hamiltonian(p, theta, phi + h) - qc.build_hamiltonian(p, theta, phi - h)) / (2 * h)
    scale = max(1.0, abs(p.delta1), p.omega_n)
    assert np.allclose(dt, fd_t, atol=1e-6 * scale)
    assert np.allclose(dp, fd_p, atol=1e-6 * scale)


@given(drive_params(), thetas, phis)
def test_hamiltonian_hermiticity_is_exact(p, theta, phi):
    h = qc.build_hamiltonian(p, theta, phi)
    assert np.array_equal(h, h.conj().T)
    assert h[0, 0] + h[1, 1] == 0


def test_analytic_and_numeric_eigenvectors_agree_on_many_random_points():
    rng = np.random.default_rng(1)
    n = 1000
    d1 = rng.choice([-1.0, 1.0], n) * rng.uniform(1.0, 300.0, n)
    d2 = rng.uniform(-300.0, 300.0, n)
    om = rng.uniform(0.1, 300.0, n)
    th = rng.uniform(0.0, math.pi, n)
    ph = rng.uniform(0.0, 2 * math.pi, n)
    worst = 0.0
    for k in range(n):
        p = qc.DriveParams(d1[k], d2[k], om[k])
        if math.hypot(p.detuning(th[k]), p.rabi(th[k])) < 1e-6:
            continue
        g, e = qc.analytic_eigenstates(p, th[k], ph[k])
        es = qc.eigenstates(p, th[k], ph[k])
        worst = max(worst, abs(abs(np.vdot(g, es.psi_ground)) - 1), abs(abs(np.vdot(e, es.psi_excited)) - 1))
    assert worst < 1e-10


@given(
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
)
def test_gauge_convention_is_idempotent(a, b):
    once = qc.apply_gauge(np.array([a, b]))
    assert np.array_equal(qc.apply_gauge(once), once)
