"""Quantum geometric tensor, Fubini-Study metric, Berry curvature and the
classical surface invariants (Christoffel symbols, Gauss and geodesic
curvature) derived from the metric.

Coordinates are (theta, phi) = (lambda^1, lambda^2).  Every routine
broadcasts over array-valued ``theta``/``phi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import qubit_core as qc
from .errors import DegenerateNeighborhood, DegenerateSpectrum, SingularMetric

POLE_TOL = 1e-6
SQRT_G_TOL = 1e-9
DEFAULT_STATE_STEP = 1e-4
DEFAULT_METRIC_STEP = 1e-3

MAP_KINDS = ("analytic_ground", "analytic_excited", "sphere_section", "numeric_ground", "numeric_excited")


@dataclass(frozen=True)
class StateMap:
    """Smooth map (theta, phi) -> normalized state.

    ``gauge`` optionally multiplies the output by exp(i*gauge(theta, phi)),
    which is how gauge-invariance checks inject a twist.
    """

    kind: str
    params: Optional[qc.DriveParams] = None
    gauge: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in MAP_KINDS:
            raise ValueError(f"unknown state map kind {self.kind!r}")
        if self.kind != "sphere_section" and self.params is None:
            raise ValueError(f"state map {self.kind!r} needs DriveParams")

    @classmethod
    def ground(cls, params, numeric=False):
        return cls("numeric_ground" if numeric else "analytic_ground", params)

    @classmethod
    def excited(cls, params, numeric=False):
        return cls("numeric_excited" if numeric else "analytic_excited", params)

    @classmethod
    def band(cls, params, band, numeric=False):
        return cls.ground(params, numeric) if qc.band_sign(band) > 0 else cls.excited(params, numeric)

    @classmethod
    def sphere(cls):
        return cls("sphere_section")

    def with_gauge(self, gauge: Callable) -> "StateMap":
        return StateMap(self.kind, self.params, gauge)

    def __call__(self, theta, phi) -> np.ndarray:
        if self.kind == "sphere_section":
            psi = qc.sphere_section(theta, phi)
        elif self.kind.startswith("analytic"):
            band = "ground" if self.kind.endswith("ground") else "excited"
            psi = qc.analytic_band_state(self.params, theta, phi, band)
        else:
            es = qc.eigenstates(self.params, theta, phi)
            psi = es.psi_ground if self.kind.endswith("ground") else es.psi_excited
        if self.gauge is not None:
            psi = psi * np.exp(1j * np.asarray(self.gauge(theta, phi)))[..., None]
        return psi


@dataclass(frozen=True)
class QgtSample:
    q_tt: np.ndarray
    q_tp: np.ndarray
    q_pt: np.ndarray
    q_pp: np.ndarray
    theta: np.ndarray
    phi: np.ndarray


@dataclass(frozen=True)
class MetricSample:
    e: np.ndarray
    f: np.ndarray
    g: np.ndarray
    theta: np.ndarray = None
    phi: np.ndarray = None

    @property
    def det(self):
        return self.e * self.g - self.f**2

    def scaled(self, factor: float) -> "MetricSample":
        return MetricSample(factor * self.e, factor * self.f, factor * self.g, self.theta, self.phi)


@dataclass(frozen=True)
class ChristoffelSample:
    """gamma[s, m, n] = Gamma^s_{mn}, index 0 = theta, 1 = phi."""

    gamma: np.ndarray
    theta: np.ndarray
    phi: np.ndarray

    def __getitem__(self, idx):
        return self.gamma[idx]


@dataclass(frozen=True)
class CurvatureInvariants:
    sqrt_g: np.ndarray
    gauss_k: np.ndarray
    kappa_g: np.ndarray
    area_element: np.ndarray
    line_element: np.ndarray


MetricField = Callable[..., MetricSample]


# --------------------------------------------------------------------------
# quantum geometric tensor

_STENCILS = {
    2: ((-1, 1), np.array([-0.5, 0.5])),
    4: ((-2, -1, 1, 2), np.array([1 / 12, -2 / 3, 2 / 3, -1 / 12])),
}


def _aligned(state_map, psi0, theta, phi):
    try:
        psi = state_map(theta, phi)
    except DegenerateSpectrum as exc:
        raise DegenerateNeighborhood(f"stencil touches a degeneracy: {exc}") from None
    ov = qc.overlap(psi0, psi)
    mag = np.abs(ov)
    if np.any(mag < 1e-8):
        raise DegenerateNeighborhood("neighbor state orthogonal to center state")
    return psi * (np.conj(ov) / mag)[..., None]


def state_derivatives(state_map: StateMap, theta, phi, h: float = DEFAULT_STATE_STEP, order: int = 2):
    """Center state and phase-aligned central-difference derivatives (d_theta, d_phi)."""
    if not 1e-6 <= h <= 1e-2:
        raise ValueError(f"step h={h} outside [1e-6, 1e-2]")
    offsets, weights = _STENCILS[order]
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    theta, phi = np.broadcast_arrays(theta, phi)
    try:
        psi0 = state_map(theta, phi)
    except DegenerateSpectrum as exc:
        raise DegenerateNeighborhood(f"center point degenerate: {exc}") from None
    d_t = sum(w * _aligned(state_map, psi0, theta + k * h, phi) for k, w in zip(offsets, weights)) / h
    d_p = sum(w * _aligned(state_map, psi0, theta, phi + k * h) for k, w in zip(offsets, weights)) / h
    return psi0, d_t, d_p


def qgt_from_derivatives(psi, d_t, d_p, theta, phi) -> QgtSample:
    a_t = qc.overlap(psi, d_t)  # <psi|d_t psi>
    a_p = qc.overlap(psi, d_p)

    def q(da, db, a_a, a_b):
        # <da|db> - <da|psi><psi|db>
        return qc.overlap(da, db) - np.conj(a_a) * a_b

    return QgtSample(
        q_tt=q(d_t, d_t, a_t, a_t),
        q_tp=q(d_t, d_p, a_t, a_p),
        q_pt=q(d_p, d_t, a_p, a_t),
        q_pp=q(d_p, d_p, a_p, a_p),
        theta=theta,
        phi=phi,
    )


def qgt_finite_difference(state_map: StateMap, theta, phi, h: float = DEFAULT_STATE_STEP, order: int = 2) -> QgtSample:
    """Q_{mu nu} = <d_mu psi|d_nu psi> - <d_mu psi|psi><psi|d_nu psi> by central differences."""
    psi, d_t, d_p = state_derivatives(state_map, theta, phi, h, order)
    return qgt_from_derivatives(psi, d_t, d_p, np.asarray(theta), np.asarray(phi))


def fubini_study_metric(q: QgtSample) -> MetricSample:
    return MetricSample(e=q.q_tt.real, f=q.q_tp.real, g=q.q_pp.real, theta=q.theta, phi=q.phi)


def berry_curvature_qgt(q: QgtSample):
    """F_{theta phi} = -2 Im Q_{theta phi}."""
    return -2.0 * q.q_tp.imag


def berry_curvature_spectral(params: qc.DriveParams, theta, phi, band: str = "ground"):
    """Two-level sum-over-states curvature from the analytic parameter derivatives of H."""
    es = qc.eigenstates(params, theta, phi)
    dh_t, dh_p = qc.hamiltonian_derivatives(params, theta, phi)
    if qc.band_sign(band) > 0:
        psi_n, psi_m = es.psi_ground, es.psi_excited
    else:
        psi_n, psi_m = es.psi_excited, es.psi_ground
    gap = es.e_excited - es.e_ground
    m_t = np.einsum("...i,...ij,...j->...", np.conj(psi_n), dh_t, psi_m)  # <n|dH_t|m>
    m_p = np.einsum("...i,...ij,...j->...", np.conj(psi_m), dh_p, psi_n)  # <m|dH_p|n>
    # i [X - conj(X)] = -2 Im X
    return -2.0 * np.imag(m_t * m_p) / gap**2


def berry_curvature_closed_form(params: qc.DriveParams, theta, phi, band: str = "ground"):
    """Solid-angle form F = +-1/2 d.(d_theta d x d_phi d)/|d|^3 (used as an independent check)."""
    hx, hy, hz = qc.field_vector(params, theta, phi)
    d = np.stack(np.broadcast_arrays(hx, hy, hz), axis=-1)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    dw = 0.5 * params.omega_n * np.cos(theta)
    w = 0.5 * params.rabi(theta)
    dt = np.stack(np.broadcast_arrays(dw * np.cos(phi), dw * np.sin(phi), -0.5 * params.delta1 * np.sin(theta)), axis=-1)
    dp = np.stack(np.broadcast_arrays(-w * np.sin(phi), w * np.cos(phi), 0.0 * w), axis=-1)
    triple = np.sum(d * np.cross(dt, dp), axis=-1)
    return qc.band_sign(band) * 0.5 * triple / np.linalg.norm(d, axis=-1) ** 3


# --------------------------------------------------------------------------
# metric fields and classical surface invariants


def fs_metric_field(state_map: StateMap, h: float = DEFAULT_STATE_STEP, order: int = 2) -> MetricField:
    """Fubini-Study metric of ``state_map`` as a callable (theta, phi) -> MetricSample."""

    def metric(theta, phi):
        return fubini_study_metric(qgt_finite_difference(state_map, theta, phi, h=h, order=order))

    return metric


def round_sphere_metric(radius: float = 0.5) -> MetricField:
    """Exact metric r^2 (d theta^2 + sin^2 theta d phi^2)."""
    r2 = radius**2

    def metric(theta, phi):
        theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
        return MetricSample(r2 * np.ones_like(theta), np.zeros_like(theta), r2 * np.sin(theta) ** 2, theta, phi)

    return metric


def _metric_tensor(m: MetricSample):
    return np.stack([np.stack([m.e, m.f], -1), np.stack([m.f, m.g], -1)], -2)


def _check_regular(m: MetricSample):
    det = m.det
    if np.any(det <= SQRT_G_TOL**2):
        raise SingularMetric("metric determinant vanishes (sqrt(g) <= 1e-9)")


def christoffel(metric_field: MetricField, theta, phi, h: float = DEFAULT_METRIC_STEP) -> ChristoffelSample:
    """Gamma^s_{mn} = 1/2 g^{sl} (d_n g_{ml} + d_m g_{nl} - d_l g_{mn}) by central differences."""
    return _christoffel(metric_field, theta, phi, h)[0]


def _christoffel(metric_field, theta, phi, h):
    """Christoffel symbols and the metric at the center point."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    if np.any(np.sin(theta) < POLE_TOL):
        raise SingularMetric("Christoffel symbols requested at a coordinate pole")
    m0 = metric_field(theta, phi)
    _check_regular(m0)
    g = _metric_tensor(m0)
    g_inv = np.linalg.inv(g)
    # dg[..., l, m, n] = d_l g_{mn}
    dg_t = (_metric_tensor(metric_field(theta + h, phi)) - _metric_tensor(metric_field(theta - h, phi))) / (2 * h)
    dg_p = (_metric_tensor(metric_field(theta, phi + h)) - _metric_tensor(metric_field(theta, phi - h))) / (2 * h)
    dg = np.stack([dg_t, dg_p], axis=-3)
    # lowered symbol Gamma_{l m n} = 1/2 (d_n g_{ml} + d_m g_{nl} - d_l g_{mn})
    lowered = 0.5 * (
        np.einsum("...nml->...lmn", dg) + np.einsum("...mnl->...lmn", dg) - dg
    )
    gamma = np.einsum("...sl,...lmn->...smn", g_inv, lowered)
    return ChristoffelSample(np.moveaxis(gamma, (-3, -2, -1), (0, 1, 2)), theta, phi), m0


def gauss_curvature(metric_field: MetricField, theta, phi, h: float = DEFAULT_METRIC_STEP):
    """K = (1/sqrt g)[d_phi(sqrt g Gamma^phi_{tt}/E) - d_theta(sqrt g Gamma^phi_{tp}/E)]."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    m0 = metric_field(theta, phi)
    _check_regular(m0)

    def term(t, p, m, n):
        gam, mt = _christoffel(metric_field, t, p, h)
        return np.sqrt(mt.det) * gam[1, m, n] / mt.e

    d_phi = (term(theta, phi + h, 0, 0) - term(theta, phi - h, 0, 0)) / (2 * h)
    d_theta = (term(theta + h, phi, 0, 1) - term(theta - h, phi, 0, 1)) / (2 * h)
    return (d_phi - d_theta) / np.sqrt(m0.det)


def geodesic_curvature(metric_field: MetricField, theta, phi, h: float = DEFAULT_METRIC_STEP):
    """kappa_g = sqrt(g) G^{-3/2} Gamma^theta_{phi phi} along a constant-theta curve.

    With this sign the curve bounds the region of larger theta on its left;
    the region of smaller theta sees -kappa_g.
    """
    gam, m0 = _christoffel(metric_field, theta, phi, h)
    return np.sqrt(m0.det) * m0.g ** (-1.5) * gam[0, 1, 1]


def curvature_invariants(metric_field: MetricField, theta, phi, h: float = DEFAULT_METRIC_STEP) -> CurvatureInvariants:
    m0 = metric_field(theta, phi)
    sqrt_g = np.sqrt(np.maximum(m0.det, 0.0))
    return CurvatureInvariants(
        sqrt_g=sqrt_g,
        gauss_k=gauss_curvature(metric_field, theta, phi, h),
        kappa_g=geodesic_curvature(metric_field, theta, phi, h),
        area_element=sqrt_g,
        line_element=np.sqrt(m0.g),
    )


# --------------------------------------------------------------------------
# Gauss-Bonnet


def midpoints(lo: float, hi: float, n: int) -> np.ndarray:
    return lo + (np.arange(n) + 0.5) * (hi - lo) / n


def pairwise_sum(values: np.ndarray) -> float:
    """Deterministic pairwise summation over a flattened C-order array."""
    v = np.ascontiguousarray(values, dtype=float).ravel()
    while v.size > 1:
        if v.size % 2:
            v = np.append(v, 0.0)
        v = v[0::2] + v[1::2]
    return float(v[0]) if v.size else 0.0


@dataclass(frozen=True)
class GaussBonnetResult:
    theta_cap: float
    bulk: float
    boundary: float
    euler_estimate: float
    north_bulk: float
    north_boundary: float
    south_bulk: float
    south_boundary: float

    @property
    def total(self) -> float:
        return self.bulk + self.boundary


def _bulk_integral(metric_field, lo, hi, n_theta, n_phi, h):
    if hi <= lo:
        return 0.0
    th = midpoints(lo, hi, n_theta)
    ph = midpoints(0.0, 2 * math.pi, n_phi)
    tt, pp = np.meshgrid(th, ph, indexing="ij")
    k = gauss_curvature(metric_field, tt, pp, h)
    ds = np.sqrt(metric_field(tt, pp).det)
    cell = (hi - lo) / n_theta * (2 * math.pi / n_phi)
    return pairwise_sum(k * ds) * cell


def _boundary_integral(metric_field, theta_c, n_phi, h):
    ph = midpoints(0.0, 2 * math.pi, n_phi)
    tt = np.full_like(ph, theta_c)
    kg = geodesic_curvature(metric_field, tt, ph, h)
    dl = np.sqrt(metric_field(tt, ph).g)
    return pairwise_sum(kg * dl) * (2 * math.pi / n_phi)


def gauss_bonnet_check(
    state_map: StateMap,
    theta_cap: float,
    grid=(256, 256),
    metric_field: Optional[MetricField] = None,
    h: float = DEFAULT_METRIC_STEP,
) -> GaussBonnetResult:
    """Bulk and boundary Gauss-Bonnet terms for the sphere split at ``theta_cap``.

    The sphere is covered by a northern patch (theta <= theta_cap) and a
    southern patch (theta >= theta_cap) sharing the constant-theta circle.
    ``bulk`` sums K dS over both patches and ``boundary`` sums kappa_g dl over
    both patch boundaries, each with its own orientation.  Each patch is a
    disk contributing 2 pi, so (bulk + boundary) / 2 pi estimates chi(S^2) = 2.
    With theta_cap = pi the northern patch is the closed sphere and there is
    no boundary.
    """
    n_theta, n_phi = grid
    if n_theta < 64 or n_phi < 64:
        raise ValueError("Gauss-Bonnet grid must be at least 64x64")
    if not 0 < theta_cap <= math.pi:
        raise ValueError("theta_cap must lie in (0, pi]")
    if metric_field is None:
        metric_field = fs_metric_field(state_map, h=DEFAULT_METRIC_STEP, order=4)
    closed = math.isclose(theta_cap, math.pi)
    north_bulk = _bulk_integral(metric_field, 0.0, theta_cap, n_theta, n_phi, h)
    if closed:
        south_bulk = north_boundary = south_boundary = 0.0
    else:
        south_bulk = _bulk_integral(metric_field, theta_cap, math.pi, n_theta, n_phi, h)
        ring = _boundary_integral(metric_field, theta_cap, n_phi, h)
        south_boundary = ring
        north_boundary = -ring
    bulk = north_bulk + south_bulk
    boundary = north_boundary + south_boundary
    return GaussBonnetResult(
        theta_cap=theta_cap,
        bulk=bulk,
        boundary=boundary,
        euler_estimate=(bulk + boundary) / (2 * math.pi),
        north_bulk=north_bulk,
        north_boundary=north_boundary,
        south_bulk=south_bulk,
        south_boundary=south_boundary,
    )
