import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmonopole import qubit_core as qc
from qmonopole import topology as tp
from qmonopole.errors import BoundaryDegeneracy, DegenerateOnLoop, InvalidCharge
from qmonopole.geometry import StateMap

BASE = qc.DriveParams.from_mhz(30, 0, 10)
SPHERE = qc.DriveParams.from_mhz(10, 0, 10)


@st.composite
def gapped_params(draw):
    d1 = draw(st.sampled_from([-1, 1])) * draw(st.floats(30.0, 250.0))
    ratio = draw(st.floats(-3.0, 3.0).filter(lambda r: abs(abs(r) - 1) > 0.05))
    return qc.DriveParams(d1, ratio * d1, draw(st.floats(10.0, 250.0)))


@pytest.mark.parametrize("ratio", [0.0, 0.5, -0.5, 0.9, -0.9, 1.1, -1.1, 2.0, -2.0])
@pytest.mark.parametrize("band", ["ground", "excited"])
def test_plaquette_chern_is_an_exact_integer(ratio, band):
    p = BASE.with_ratio(ratio)
    res = tp.chern_plaquette(p, band)
    assert res.residual < 1e-10
    assert res.rounded == qc.expected_chern(p, band)


@given(gapped_params())
def test_band_sum_rule(p):
    g = tp.chern_plaquette(p, "ground").value
    e = tp.chern_plaquette(p, "excited").value
    assert abs(g + e) < 1e-10


@given(gapped_params())
def test_plaquette_agrees_with_enclosure_law(p):
    assert tp.chern_plaquette(p, "ground").rounded == qc.expected_chern(p, "ground")


@given(st.integers(-3, 3), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_plaquette_chern_is_gauge_invariant(winding, a, b):
    def twist(t, p):
        return winding * p + a * np.cos(t) + b * np.sin(t) * np.cos(p)

    assert tp.chern_plaquette(BASE, "ground", gauge=twist).value == pytest.approx(1.0, abs=1e-10)


def test_plaquette_grid_contract_and_boundary():
    with pytest.raises(ValueError):
        tp.chern_plaquette(BASE, grid=(16, 16))
    with pytest.raises(BoundaryDegeneracy):
        tp.chern_plaquette(BASE.with_ratio(1.0))


def test_plaquette_flux_density_tracks_spectral_curvature():
    n = 96
    theta = tp.midpoints(0.0, math.pi, n)
    phi = 2 * math.pi * np.arange(n) / n
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    flux = tp.plaquette_flux(qc.eigenstates(SPHERE, tt, pp).psi_ground)
    # interior plaquette between rows i, i+1 has area dtheta*dphi
    area = (math.pi / n) * (2 * math.pi / n)
    centre = 0.5 * (theta[:-1] + theta[1:])
    assert np.allclose(flux[1:-1].mean(axis=1) / area, 0.5 * np.sin(centre), atol=1e-3)


@pytest.mark.parametrize("theta", [0.4, 1.0, math.pi / 2, 2.0])
def test_berry_phase_of_sphere_loop_is_half_solid_angle(theta):
    smap = StateMap.ground(SPHERE)
    phase = tp.berry_phase_loop(smap, theta, n_phi=512)
    expected = math.pi * (1 - math.cos(theta))
    assert abs(np.angle(np.exp(1j * (phase - expected)))) < 1e-4


def test_berry_phase_errors():
    with pytest.raises(ValueError):
        tp.berry_phase_loop(StateMap.sphere(), 0.0)
    with pytest.raises(DegenerateOnLoop):
        # no transverse drive: Delta vanishes on the whole equator
        tp.berry_phase_loop(StateMap.ground(qc.DriveParams(1.0, 0.0, 0.0), numeric=True), math.pi / 2)


@pytest.mark.parametrize("ratio", [0.0, 0.5, -1.5])
def test_spectral_quadrature_route(ratio):
    p = BASE.with_ratio(ratio)
    res = tp.chern_spectral_quadrature(p, "ground")
    assert abs(res.value - qc.expected_chern(p, "ground")) < 1e-3


@pytest.mark.parametrize("g", [0.5, -0.5, 1.0, -1.0, 1.5, -1.5])
def test_wu_yang_route_gives_2g(g):
    assert tp.wu_yang_chern(g).value == pytest.approx(2 * g, abs=1e-12)


def test_wu_yang_warns_on_non_dirac_charge():
    with pytest.warns(InvalidCharge):
        tp.wu_yang_chern(0.3)


@given(st.integers(-5, 5))
def test_transition_function_winding(n):
    assert tp.transition_function_chern(n).value == pytest.approx(n, abs=1e-12)


def test_transition_sweep_records_failures():
    curve = tp.transition_sweep(BASE, [2.0, -1.0, 0.0, 1.0], "ground")
    assert list(curve.ratios) == [-1.0, 0.0, 1.0, 2.0]
    assert math.isnan(curve.chern[0]) and math.isnan(curve.chern[2])
    assert curve.chern[1] == pytest.approx(1.0) and curve.chern[3] == pytest.approx(0.0, abs=1e-10)
    assert set(curve.notes) == {-1.0, 1.0}


def test_chern_number_dispatch():
    assert tp.chern_number(BASE, route="plaquette").rounded == 1
    assert tp.chern_number(BASE, route="spectral_quadrature", grid=(64, 64)).rounded == 1
    with pytest.raises(ValueError):
        tp.chern_number(BASE, route="two_patch")


def test_chern_result_rounding():
    r = tp.ChernResult(0.9996, "x")
    assert r.rounded == 1 and r.residual == pytest.approx(4e-4)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert math.isnan(tp.ChernResult(math.nan, "x").residual)


def _random_params(rng, n, margin):
    out = []
    while len(out) < n:
        d1 = rng.choice([-1.0, 1.0]) * rng.uniform(10.0, 40.0)
        ratio = rng.uniform(-2.5, 2.5)
        if abs(abs(ratio) - 1.0) >= margin:
            out.append(qc.DriveParams.from_mhz(d1, ratio * d1, abs(d1) * rng.uniform(0.2, 1.2)))
    return out


def test_plaquette_is_integer_on_a_random_sweep():
    for p in _random_params(np.random.default_rng(100), 100, margin=0.01):
        res = tp.chern_plaquette(p, "ground")
        assert res.residual < 1e-10
        assert res.rounded == qc.expected_chern(p, "ground")


def test_spectral_route_agrees_with_plaquette_on_random_sets():
    for p in _random_params(np.random.default_rng(20), 20, margin=0.2):
        plaq = tp.chern_plaquette(p, "ground").value
        g = tp.chern_spectral_quadrature(p, "ground")
        e = tp.chern_spectral_quadrature(p, "excited")
        assert abs(g.value - plaq) < 1e-3
        assert abs(g.value + e.value) < 1e-12
