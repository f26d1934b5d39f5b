"""First Chern numbers of the driven-qubit eigenbundles.

Four routes are provided:

* ``plaquette`` - lattice field strength from link variables (integer exact);
* ``spectral_quadrature`` - midpoint quadrature of the sum-over-states curvature;
* ``dynamical`` - integral of the curvature extracted from simulated ramps
  (see :mod:`qmonopole.dynamics`);
* ``two_patch`` - equatorial line integral of the difference of the north
  and south patch potentials of a monopole.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import qubit_core as qc
from .errors import BoundaryDegeneracy, DegenerateOnLoop, DegenerateSpectrum, InvalidCharge, QMonopoleError
from .geometry import StateMap, berry_curvature_spectral, midpoints, pairwise_sum

ROUTES = ("plaquette", "spectral_quadrature", "dynamical", "two_patch")
LINK_TOL = 1e-10


@dataclass(frozen=True)
class ChernResult:
    value: float
    route: str
    grid: tuple = ()
    rounded: int = field(init=False)
    residual: float = field(init=False)

    def __post_init__(self):
        if math.isfinite(self.value):
            r = int(round(self.value))
            object.__setattr__(self, "rounded", r)
            object.__setattr__(self, "residual", abs(self.value - r))
        else:
            object.__setattr__(self, "rounded", 0)
            object.__setattr__(self, "residual", math.nan)


@dataclass(frozen=True)
class TransitionCurve:
    band: str
    route: str
    ratios: np.ndarray
    chern: np.ndarray
    notes: dict = field(default_factory=dict)


def _check_not_boundary(params: qc.DriveParams):
    if abs(params.delta2) == abs(params.delta1):
        raise BoundaryDegeneracy("|delta2| == |delta1|: Chern number ill-defined")


def _links(psi_a, psi_b):
    ov = qc.overlap(psi_a, psi_b)
    mag = np.abs(ov)
    if np.any(mag < LINK_TOL):
        raise DegenerateOnLoop("vanishing overlap between neighbouring states")
    return ov / mag


def berry_phase_loop(state_map: StateMap, theta: float, n_phi: int = 64) -> float:
    """Discrete Wilson-loop Berry phase around the constant-theta circle, in (-pi, pi]."""
    if math.sin(theta) <= 1e-6:
        raise ValueError("loop too close to a pole (sin(theta) <= 1e-6)")
    if n_phi < 16:
        raise ValueError("n_phi must be >= 16")
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    try:
        psi = state_map(np.full(n_phi, theta), phi)
    except DegenerateSpectrum as exc:
        raise DegenerateOnLoop(str(exc)) from None
    prod = np.prod(_links(psi, np.roll(psi, -1, axis=0)))
    phase = -float(np.angle(prod))
    return math.pi if phase == -math.pi else phase


def _band_states(params, band, theta, phi, gauge):
    try:
        es = qc.eigenstates(params, theta, phi)
    except DegenerateSpectrum as exc:
        raise BoundaryDegeneracy(f"degeneracy on the grid: {exc}") from None
    psi = es.state(band)
    if gauge is not None:
        psi = psi * np.exp(1j * np.asarray(gauge(theta, phi)))[..., None]
    return psi


def plaquette_flux(psi: np.ndarray) -> np.ndarray:
    """Berry flux through every cell of a (n_theta, n_phi, 2) state lattice.

    Returns an (n_theta + 1, n_phi) array: the interior plaquettes between
    consecutive theta rows, preceded by the north cap (one row, flux in the
    first column) and followed by the south cap.  Every link is shared by two
    cells with opposite orientation, so the total is 2 pi times an integer.
    """
    u_t = _links(psi[:-1], psi[1:])  # theta_i -> theta_{i+1}
    u_p = _links(psi, np.roll(psi, -1, axis=1))  # phi_j -> phi_{j+1}
    loop = u_t * u_p[1:] * np.conj(np.roll(u_t, -1, axis=1)) * np.conj(u_p[:-1])
    interior = -np.angle(loop)
    n_phi = psi.shape[1]
    north = np.zeros(n_phi)
    south = np.zeros(n_phi)
    north[0] = -np.angle(np.prod(u_p[0]))
    south[0] = np.angle(np.prod(u_p[-1]))
    return np.vstack([north, interior, south])


def chern_plaquette(
    params: qc.DriveParams,
    band: str = "ground",
    grid=(48, 48),
    gauge: Optional[Callable] = None,
) -> ChernResult:
    """Integer Chern number from link variables on an open (theta, phi) grid.

    The grid uses cell-centred theta rows so the poles are never sampled;
    the polar caps are closed with the Wilson-loop phase of the first and
    last rows.  ``gauge`` injects a phase twist exp(i*gauge(theta, phi)).
    """
    n_theta, n_phi = grid
    if n_theta < 24 or n_phi < 24:
        raise ValueError("plaquette grid must be at least 24x24")
    _check_not_boundary(params)
    theta = midpoints(0.0, math.pi, n_theta)
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    psi = _band_states(params, band, tt, pp, gauge)
    flux = plaquette_flux(psi)
    return ChernResult(pairwise_sum(flux) / (2 * math.pi), "plaquette", (n_theta, n_phi))


def chern_spectral_quadrature(params: qc.DriveParams, band: str = "ground", grid=(128, 128)) -> ChernResult:
    """Midpoint quadrature of the sum-over-states Berry curvature over the sphere."""
    n_theta, n_phi = grid
    if n_theta < 24 or n_phi < 24:
        raise ValueError("quadrature grid must be at least 24x24")
    _check_not_boundary(params)
    tt, pp = np.meshgrid(midpoints(0.0, math.pi, n_theta), midpoints(0.0, 2 * math.pi, n_phi), indexing="ij")
    try:
        f = berry_curvature_spectral(params, tt, pp, band)
    except DegenerateSpectrum as exc:
        raise BoundaryDegeneracy(str(exc)) from None
    cell = (math.pi / n_theta) * (2 * math.pi / n_phi)
    return ChernResult(pairwise_sum(f) * cell / (2 * math.pi), "spectral_quadrature", (n_theta, n_phi))


def _check_charge(g_charge: float):
    twice = 2 * g_charge
    if abs(twice - round(twice)) > 1e-12:
        warnings.warn(f"magnetic charge g={g_charge} violates the Dirac condition", InvalidCharge, stacklevel=3)


def wu_yang_chern(g_charge: float, r: float = 1.0, n_phi: int = 64) -> ChernResult:
    """(1/2 pi) * loop integral over the equator of (A_N - A_S) . dl."""
    from .monopole_fields import MonopoleConfig, SpacePoint, vector_potential

    if r <= 0:
        raise ValueError("radius must be positive")
    if n_phi < 16:
        raise ValueError("n_phi must be >= 16")
    _check_charge(g_charge)
    cfg = MonopoleConfig(g_charge, check=False)
    phi = midpoints(0.0, 2 * math.pi, n_phi)
    diff = np.array(
        [
            vector_potential(cfg, SpacePoint(r, math.pi / 2, p), "north")
            - vector_potential(cfg, SpacePoint(r, math.pi / 2, p), "south")
            for p in phi
        ]
    )
    dl = r * math.sin(math.pi / 2) * (2 * math.pi / n_phi)
    return ChernResult(pairwise_sum(diff * dl) / (2 * math.pi), "two_patch", (1, n_phi))


def transition_function_chern(winding: int, n_phi: int = 64) -> ChernResult:
    """Chern number of the bundle glued by Gamma_NS = exp(i n phi).

    Computed as the accumulated phase of the transition function around the
    equator, (1/2 pi) sum_k arg(Gamma(phi_{k+1}) / Gamma(phi_k)).
    """
    if n_phi <= 2 * abs(winding):
        raise ValueError("n_phi too small to resolve the winding")
    phi = 2 * math.pi * np.arange(n_phi + 1) / n_phi
    gamma = np.exp(1j * winding * phi)
    steps = np.angle(gamma[1:] / gamma[:-1])
    return ChernResult(pairwise_sum(steps) / (2 * math.pi), "two_patch", (1, n_phi))


def chern_number(params: qc.DriveParams, band: str = "ground", route: str = "plaquette", grid=None, **kwargs) -> ChernResult:
    if route == "plaquette":
        return chern_plaquette(params, band, grid or (48, 48), **kwargs)
    if route == "spectral_quadrature":
        return chern_spectral_quadrature(params, band, grid or (128, 128))
    if route == "dynamical":
        from .dynamics import RampProtocol, dynamical_chern

        protocol = RampProtocol(params, t_ramp=kwargs.pop("t_ramp", 1.0), initial=band, **kwargs)
        return dynamical_chern(protocol)
    raise ValueError(f"route {route!r} does not apply to a drive family")


def transition_sweep(
    template: qc.DriveParams,
    ratios: Sequence[float],
    band: str = "ground",
    route: str = "plaquette",
    grid=None,
    **kwargs,
) -> TransitionCurve:
    """Chern number versus delta2/delta1; failed points become NaN with a note."""
    ratios = np.sort(np.asarray(ratios, dtype=float))
    values = np.empty(ratios.size)
    notes = {}
    for i, ratio in enumerate(ratios):
        try:
            values[i] = chern_number(template.with_ratio(ratio), band, route, grid, **dict(kwargs)).value
        except QMonopoleError as exc:
            values[i] = math.nan
            notes[float(ratio)] = f"{type(exc).__name__}: {exc}"
    return TransitionCurve(band, route, ratios, values, notes)
