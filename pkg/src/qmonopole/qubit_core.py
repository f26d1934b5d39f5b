"""Driven two-level Hamiltonian family, its eigensystem and degeneracy bookkeeping.

Basis convention: |0> = |e> = (1, 0) is the excited bare state and
|1> = |g> = (0, 1) the bare ground state.  Frequencies are angular, in
rad/us, with hbar = 1.

All functions broadcast over array-valued ``theta``/``phi``; Hamiltonians
have shape ``(..., 2, 2)`` and states ``(..., 2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryDegeneracy, DegeneratePoint, DegenerateSpectrum

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

KET_E = np.array([1, 0], dtype=complex)
KET_G = np.array([0, 1], dtype=complex)
KET_S = np.array([1, 1], dtype=complex) / math.sqrt(2)

DEGENERACY_TOL = 1e-12
GAUGE_TOL = 1e-12
TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class DriveParams:
    """Ellipsoidal drive family: Delta = delta1 cos(theta) + delta2, Omega = omega_n sin(theta)."""

    delta1: float
    delta2: float
    omega_n: float

    def __post_init__(self):
        if self.omega_n < 0:
            raise ValueError(f"omega_n must be >= 0, got {self.omega_n}")

    @classmethod
    def from_mhz(cls, delta1_mhz: float, delta2_mhz: float, omega_mhz: float) -> "DriveParams":
        return cls(TWO_PI * delta1_mhz, TWO_PI * delta2_mhz, TWO_PI * omega_mhz)

    def with_delta2(self, delta2: float) -> "DriveParams":
        return DriveParams(self.delta1, delta2, self.omega_n)

    def with_ratio(self, delta2_over_delta1: float) -> "DriveParams":
        return DriveParams(self.delta1, delta2_over_delta1 * self.delta1, self.omega_n)

    def detuning(self, theta):
        return self.delta1 * np.cos(theta) + self.delta2

    def rabi(self, theta):
        return self.omega_n * np.sin(theta)


@dataclass(frozen=True)
class SpherePoint:
    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < TWO_PI:
            raise ValueError(f"phi must lie in [0, 2pi), got {self.phi}")


@dataclass(frozen=True)
class EigenSystem:
    e_ground: np.ndarray
    e_excited: np.ndarray
    psi_ground: np.ndarray
    psi_excited: np.ndarray

    def state(self, band: str) -> np.ndarray:
        return self.psi_ground if _check_band(band) == "ground" else self.psi_excited

    def energy(self, band: str) -> np.ndarray:
        return self.e_ground if _check_band(band) == "ground" else self.e_excited


def _check_band(band: str) -> str:
    if band not in ("ground", "excited"):
        raise ValueError(f"band must be 'ground' or 'excited', got {band!r}")
    return band


def band_sign(band: str) -> int:
    return 1 if _check_band(band) == "ground" else -1


def pauli_matrix(hx, hy, hz) -> np.ndarray:
    """Return hx*sx + hy*sy + hz*sz with broadcasting, shape (..., 2, 2)."""
    hx, hy, hz = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (hx, hy, hz)))
    out = np.empty(hx.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = hz
    out[..., 0, 1] = hx - 1j * hy
    out[..., 1, 0] = hx + 1j * hy
    out[..., 1, 1] = -hz
    return out


def field_vector(params: DriveParams, theta, phi):
    """Components (hx, hy, hz) of H = h . sigma."""
    omega = params.rabi(theta)
    return 0.5 * omega * np.cos(phi), 0.5 * omega * np.sin(phi), 0.5 * params.detuning(theta)


def build_hamiltonian(params: DriveParams, theta, phi) -> np.ndarray:
    """H = 1/2 [Delta sz + Omega cos(phi) sx + Omega sin(phi) sy]."""
    return pauli_matrix(*field_vector(params, theta, phi))


def hamiltonian_derivatives(params: DriveParams, theta, phi):
    """Analytic (dH/dtheta, dH/dphi)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    d_omega = params.omega_n * np.cos(theta)
    omega = params.rabi(theta)
    dh_theta = pauli_matrix(
        0.5 * d_omega * np.cos(phi), 0.5 * d_omega * np.sin(phi), -0.5 * params.delta1 * np.sin(theta)
    )
    dh_phi = pauli_matrix(-0.5 * omega * np.sin(phi), 0.5 * omega * np.cos(phi), np.zeros_like(omega))
    return dh_theta, dh_phi


def apply_gauge(psi: np.ndarray) -> np.ndarray:
    """Fix the phase: <0|psi> real and >= 0, or <1|psi> real positive if <0|psi> ~ 0."""
    psi = np.asarray(psi, dtype=complex)
    use_first = np.abs(psi[..., 0]) >= GAUGE_TOL
    ref = np.where(use_first, psi[..., 0], psi[..., 1])
    mag = np.abs(ref)
    # already fixed (or zero) references are left untouched so the map is idempotent
    done = ((ref.imag == 0) & (ref.real >= 0)) | (mag == 0)
    # angle() rather than conj(ref)/|ref|, which loses accuracy for subnormal references
    phase = np.where(done, 1.0, np.exp(-1j * np.angle(ref)))
    out = psi * phase[..., None]
    out[..., 0] = np.where(use_first, mag, out[..., 0])
    out[..., 1] = np.where(use_first, out[..., 1], mag)
    return out


def eigensystem(h: np.ndarray) -> EigenSystem:
    """Ascending eigenpairs of (a stack of) 2x2 Hermitian matrices, gauge fixed."""
    h = np.asarray(h, dtype=complex)
    if h.shape[-2:] != (2, 2):
        raise ValueError(f"expected (..., 2, 2) matrices, got shape {h.shape}")
    w, v = np.linalg.eigh(h)
    if np.any(w[..., 1] - w[..., 0] < DEGENERACY_TOL):
        raise DegenerateSpectrum("eigenvalue gap below 1e-12 rad/us")
    return EigenSystem(
        e_ground=w[..., 0],
        e_excited=w[..., 1],
        psi_ground=apply_gauge(v[..., :, 0]),
        psi_excited=apply_gauge(v[..., :, 1]),
    )


def eigenstates(params: DriveParams, theta, phi) -> EigenSystem:
    try:
        return eigensystem(build_hamiltonian(params, theta, phi))
    except DegenerateSpectrum as exc:
        raise DegeneratePoint(str(exc)) from None


def analytic_eigenstates(params: DriveParams, theta, phi):
    """Closed-form (ground, excited) eigenstates, phase e^{i phi} on |1>.

    Uses (Omega/2, e^{i phi}(E - Delta/2)), or the equivalent
    (E + Delta/2, e^{i phi} Omega/2) where that one is better conditioned
    (near the poles the first form goes 0/0 for one of the bands).
    """
    return analytic_band_state(params, theta, phi, "ground"), analytic_band_state(params, theta, phi, "excited")


def analytic_band_state(params: DriveParams, theta, phi, band: str = "ground"):
    """Closed-form eigenstate of a single band (see ``analytic_eigenstates``)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    delta = params.detuning(theta)
    omega = params.rabi(theta)
    delta, omega, phi = np.broadcast_arrays(delta, omega, phi)
    radius = np.hypot(omega, delta)
    if np.any(radius < DEGENERACY_TOL):
        raise DegeneratePoint("Delta = Omega = 0: eigenstates undefined")
    energy = -0.5 * band_sign(band) * radius
    a1, b1 = omega / 2, energy - delta / 2
    a2, b2 = energy + delta / 2, omega / 2
    use_first = a1**2 + b1**2 >= a2**2 + b2**2
    sgn = np.where(a2 >= 0, 1.0, -1.0)
    a = np.where(use_first, a1, sgn * a2)
    b = np.where(use_first, b1, sgn * b2)
    norm = np.hypot(a, b)
    return np.stack([a / norm + 0j, np.exp(1j * phi) * b / norm], axis=-1)


def sphere_section(theta, phi) -> np.ndarray:
    """cos(theta/2)|0> + e^{i phi} sin(theta/2)|1> (spin along the polar direction)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    theta, phi = np.broadcast_arrays(theta, phi)
    return np.stack([np.cos(theta / 2) + 0j, np.exp(1j * phi) * np.sin(theta / 2)], axis=-1)


def degeneracy_enclosed(params: DriveParams) -> int:
    """1 if the point Delta = Omega = 0 lies strictly inside the swept ellipsoid, else 0."""
    if params.delta1 == 0:
        raise ValueError("delta1 must be nonzero")
    if abs(params.delta2) == abs(params.delta1):
        raise BoundaryDegeneracy("|delta2| == |delta1|: degeneracy on the manifold")
    top = np.sign(params.delta1 + params.delta2)
    bottom = np.sign(-params.delta1 + params.delta2)
    return int(top != bottom)


def expected_chern(params: DriveParams, band: str) -> int:
    """Integer Chern number predicted by enclosure; orientation flips with sign(delta1)."""
    return degeneracy_enclosed(params) * band_sign(band) * int(np.sign(params.delta1))


def expectation(psi: np.ndarray, op: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...ij,...j->...", np.conj(psi), op, psi)


def overlap(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """<a|b> along the last axis."""
    return np.sum(np.conj(a) * b, axis=-1)
