"""Real-space Dirac / Wu-Yang monopole: field, flux, patch potentials, curl checks,
and the rotating synthetic-field Hamiltonian that realizes the same family.

Vectors are returned in the spherical basis (r, theta, phi).  Lengths and
charges are dimensionless.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import qubit_core as qc
from .errors import InvalidCharge, OriginSingularity, StringSingularity

AXIS_TOL = 1e-6
ORIGIN_TOL = 1e-9


@dataclass(frozen=True)
class SpacePoint:
    r: float
    theta: float
    phi: float

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError(f"radius must be positive, got {self.r}")


@dataclass(frozen=True)
class MonopoleConfig:
    g_charge: float
    check: bool = True

    def __post_init__(self):
        if self.check:
            twice = 2 * self.g_charge
            if abs(twice - round(twice)) > 1e-12:
                warnings.warn(f"g={self.g_charge}: 2g is not an integer", InvalidCharge, stacklevel=3)


NORTH = MonopoleConfig(0.5)
SOUTH = MonopoleConfig(-0.5)


@dataclass(frozen=True)
class SyntheticFieldConfig:
    """Rotating field B = (B1 sin t cos w0 t, B1 sin t sin w0 t, B1 cos t + B2) with t = theta_drive."""

    b1: float
    b2: float
    theta_drive: float
    omega0: float
    m_b: float = 1.0

    def __post_init__(self):
        if self.b1 < 0:
            raise ValueError("b1 must be >= 0")


def dirac_field(cfg: MonopoleConfig, p: SpacePoint) -> np.ndarray:
    """B = g r_hat / r^2."""
    if p.r <= ORIGIN_TOL:
        raise OriginSingularity("monopole field is singular at the origin")
    return np.array([cfg.g_charge / p.r**2, 0.0, 0.0])


def monopole_flux(cfg: MonopoleConfig, r: float = 1.0, grid=(32, 32)) -> float:
    """Flux of B through the sphere of radius r.

    Gauss-Legendre nodes in theta and a uniform periodic rule in phi, both of
    which integrate smooth integrands on the sphere to near machine precision.
    """
    n_theta, n_phi = grid
    if n_theta < 32 or n_phi < 32:
        raise ValueError("flux grid must be at least 32x32")
    if r <= 0:
        raise ValueError("radius must be positive")
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = 0.5 * math.pi * (x + 1)
    w_theta = 0.5 * math.pi * w
    phi = 2 * math.pi * (np.arange(n_phi) + 0.5) / n_phi
    b_r = np.array([[dirac_field(cfg, SpacePoint(r, t, p))[0] for p in phi] for t in theta])
    integrand = b_r * r**2 * np.sin(theta)[:, None]
    return float(np.sum(w_theta[:, None] * integrand) * (2 * math.pi / n_phi))


def vector_potential(cfg: MonopoleConfig, p: SpacePoint, patch: str = "north") -> float:
    """A_phi on the north patch, g(1 - cos t)/(r sin t), or the south patch, -g(1 + cos t)/(r sin t)."""
    if patch == "north":
        if p.theta >= math.pi - AXIS_TOL:
            raise StringSingularity("north-patch potential is singular on the negative z axis")
        if p.theta <= AXIS_TOL:
            return 0.0
        return cfg.g_charge * (1 - math.cos(p.theta)) / (p.r * math.sin(p.theta))
    if patch == "south":
        if p.theta <= AXIS_TOL:
            raise StringSingularity("south-patch potential is singular on the positive z axis")
        if p.theta >= math.pi - AXIS_TOL:
            return 0.0
        return -cfg.g_charge * (1 + math.cos(p.theta)) / (p.r * math.sin(p.theta))
    raise ValueError(f"patch must be 'north' or 'south', got {patch!r}")


def patch_potential(cfg: MonopoleConfig, patch: str) -> Callable[[float, float, float], np.ndarray]:
    def field(r, theta, phi):
        return np.array([0.0, 0.0, vector_potential(cfg, SpacePoint(r, theta, phi), patch)])

    return field


def spherical_curl(field: Callable, r: float, theta: float, phi: float, h: float = 1e-4) -> np.ndarray:
    """Central-difference curl of a vector field given in the spherical basis."""

    def comp(i, dr=0.0, dt=0.0, dp=0.0):
        return field(r + dr, theta + dt, phi + dp)[i]

    s = math.sin(theta)
    d_theta_sin_aphi = (math.sin(theta + h) * comp(2, dt=h) - math.sin(theta - h) * comp(2, dt=-h)) / (2 * h)
    d_phi_atheta = (comp(1, dp=h) - comp(1, dp=-h)) / (2 * h)
    d_phi_ar = (comp(0, dp=h) - comp(0, dp=-h)) / (2 * h)
    d_r_r_aphi = ((r + h) * comp(2, dr=h) - (r - h) * comp(2, dr=-h)) / (2 * h)
    d_r_r_atheta = ((r + h) * comp(1, dr=h) - (r - h) * comp(1, dr=-h)) / (2 * h)
    d_theta_ar = (comp(0, dt=h) - comp(0, dt=-h)) / (2 * h)
    return np.array(
        [
            (d_theta_sin_aphi - d_phi_atheta) / (r * s),
            (d_phi_ar / s - d_r_r_aphi) / r,
            (d_r_r_atheta - d_theta_ar) / r,
        ]
    )


def spherical_divergence(field: Callable, r: float, theta: float, phi: float, h: float = 1e-4) -> float:
    s = math.sin(theta)
    d_r = ((r + h) ** 2 * field(r + h, theta, phi)[0] - (r - h) ** 2 * field(r - h, theta, phi)[0]) / (2 * h)
    d_t = (math.sin(theta + h) * field(r, theta + h, phi)[1] - math.sin(theta - h) * field(r, theta - h, phi)[1]) / (2 * h)
    d_p = (field(r, theta, phi + h)[2] - field(r, theta, phi - h)[2]) / (2 * h)
    return d_r / r**2 + d_t / (r * s) + d_p / (r * s)


def curl_check(cfg: MonopoleConfig, p: SpacePoint, patch: str = "north", h: float = 1e-4) -> np.ndarray:
    """Finite-difference curl of a patch potential; equals the monopole field on the patch."""
    string_side = p.theta > math.pi / 2 if patch == "north" else p.theta < math.pi / 2
    if string_side and p.r * math.sin(p.theta) <= 10 * h:
        raise StringSingularity(f"point too close to the {patch}-patch string axis")
    return spherical_curl(patch_potential(cfg, patch), p.r, p.theta, p.phi, h)


def field_divergence(cfg: MonopoleConfig, p: SpacePoint, h: float = 1e-4) -> float:
    return spherical_divergence(lambda r, t, f: dirac_field(cfg, SpacePoint(r, t, f)), p.r, p.theta, p.phi, h)


def synthetic_hamiltonian(cfg: SyntheticFieldConfig, t: float, as_printed: bool = False) -> np.ndarray:
    """Spin in the rotating synthetic field, phase phi = omega0 * t.

    Default: M_b [B_x cos(phi) sx + B_y sin(phi) sy + B_z sz].  With
    ``as_printed`` the alternative form M_b [B_x cos(phi) sx + B_y cos(phi) sy
    + M_b B_z sz] is returned for comparison; it does not map onto the
    qubit drive family.
    """
    phi = cfg.omega0 * t
    bxy = cfg.b1 * math.sin(cfg.theta_drive)
    bz = cfg.b1 * math.cos(cfg.theta_drive) + cfg.b2
    if as_printed:
        return cfg.m_b * qc.pauli_matrix(bxy * math.cos(phi), bxy * math.cos(phi), cfg.m_b * bz)
    return cfg.m_b * qc.pauli_matrix(bxy * math.cos(phi), bxy * math.sin(phi), bz)


def synthetic_drive_params(cfg: SyntheticFieldConfig) -> qc.DriveParams:
    """Drive-family parameters equivalent to the synthetic field: delta1 = omega_n = 2 M_b B1, delta2 = 2 M_b B2."""
    return qc.DriveParams(2 * cfg.m_b * cfg.b1, 2 * cfg.m_b * cfg.b2, 2 * cfg.m_b * cfg.b1)
