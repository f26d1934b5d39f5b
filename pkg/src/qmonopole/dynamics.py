"""Ramp dynamics: Schrodinger propagation along theta(t) = pi t / t_ramp, curvature
extraction from <sigma_y>, the dynamical Chern number and fidelity maps.

Sign convention for the extracted curvature: F = +<dH/dphi> / v_theta, which
gives F = +1/2 sin(theta) for the ground band on the sphere.  The
generalized force is M_phi = -<dH/dphi> and therefore equals -v_theta F to
first order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import qubit_core as qc
from .errors import DegenerateSpectrum, NormDrift
from .results import SweepResult
from .topology import ChernResult

NORM_TOL = 1e-7
SQRT3 = math.sqrt(3.0)
INITIAL_STATES = ("ground", "excited", "g", "e")
TARGETS = {"bare_g": qc.KET_G, "bare_e": qc.KET_E, "degenerate_s": qc.KET_S}

CONVENTIONS = {
    "curvature": "F_theta_phi = +<dH/dphi>/v_theta = (omega_n sin(theta) / 2 v_theta) <sigma_y>",
    "generalized_force": "M_phi = -<dH/dphi> = -v_theta F_theta_phi + O(v^2)",
}


@dataclass(frozen=True)
class RampProtocol:
    """Linear ramp theta(t) = pi t / t_ramp at fixed phi.

    ``initial`` is 'ground'/'excited' (the bare state that is the
    instantaneous eigenstate at theta = 0) or an explicit bare state 'g'/'e'.
    ``dt`` defaults to t_ramp / 4000.
    """

    params: qc.DriveParams
    t_ramp: float
    phi_fixed: float = 0.0
    dt: Optional[float] = None
    initial: str = "ground"
    method: str = "magnus4"

    def __post_init__(self):
        if self.t_ramp <= 0:
            raise ValueError("t_ramp must be positive")
        if self.dt is None:
            object.__setattr__(self, "dt", self.t_ramp / 4000)
        if not 0 < self.dt <= self.t_ramp / 200:
            raise ValueError(f"dt must lie in (0, t_ramp/200], got {self.dt}")
        if self.initial not in INITIAL_STATES:
            raise ValueError(f"initial must be one of {INITIAL_STATES}")
        if self.method not in ("magnus4", "rk4"):
            raise ValueError("method must be 'magnus4' or 'rk4'")

    @property
    def velocity(self) -> float:
        return math.pi / self.t_ramp

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_ramp / self.dt - 1e-9))

    def theta_at(self, t):
        return np.pi * np.asarray(t) / self.t_ramp

    def initial_state(self) -> np.ndarray:
        return initial_bare_state(self.params, self.initial)


def initial_bare_state(params: qc.DriveParams, initial: str) -> np.ndarray:
    if initial == "g":
        return qc.KET_G.copy()
    if initial == "e":
        return qc.KET_E.copy()
    top = params.delta1 + params.delta2  # detuning at theta = 0
    if top == 0:
        raise DegenerateSpectrum("bare states degenerate at theta = 0")
    ground = qc.KET_G if top > 0 else qc.KET_E
    excited = qc.KET_E if top > 0 else qc.KET_G
    return (ground if initial == "ground" else excited).copy()


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (..., n_t, 2)
    sigma_y_expect: np.ndarray
    theta_values: np.ndarray
    max_norm_drift: float = 0.0


@dataclass(frozen=True)
class QuenchCurvature:
    theta: np.ndarray
    f_theta_phi: np.ndarray
    quench_velocity: float
    sigma_phi: np.ndarray
    convention: str = CONVENTIONS["curvature"]


# --------------------------------------------------------------------------
# propagation


def _field(params_arrays, theta, phi):
    """h with H = h . sigma, vectorized over a batch of (delta1, delta2, omega_n)."""
    d1, d2, om = params_arrays
    w = 0.5 * om * math.sin(theta)
    return np.stack([w * math.cos(phi), w * math.sin(phi), 0.5 * (d1 * math.cos(theta) + d2)], axis=-1)


def _exp_step(k, psi):
    """exp(-i k.sigma) psi for a batch of real 3-vectors k."""
    norm = np.linalg.norm(k, axis=-1)
    c = np.cos(norm)
    sinc = np.where(norm > 0, np.sin(norm) / np.where(norm > 0, norm, 1.0), 1.0)
    kx, ky, kz = (k[..., i] * sinc for i in range(3))
    a, b = psi[..., 0], psi[..., 1]
    # (c I - i n.sigma sin) psi
    na = c * a - 1j * (kz * a + (kx - 1j * ky) * b)
    nb = c * b - 1j * ((kx + 1j * ky) * a - kz * b)
    return np.stack([na, nb], axis=-1)


def _apply_h(h, psi):
    a, b = psi[..., 0], psi[..., 1]
    hx, hy, hz = h[..., 0], h[..., 1], h[..., 2]
    return np.stack([hz * a + (hx - 1j * hy) * b, (hx + 1j * hy) * a - hz * b], axis=-1)


def _step(method, pars, protocol, t, dt, psi):
    theta = lambda tau: math.pi * tau / protocol.t_ramp  # noqa: E731
    phi = protocol.phi_fixed
    if method == "magnus4":
        c1, c2 = 0.5 - SQRT3 / 6, 0.5 + SQRT3 / 6
        h1 = _field(pars, theta(t + c1 * dt), phi)
        h2 = _field(pars, theta(t + c2 * dt), phi)
        # exp(Omega_4), Omega_4 = -i dt/2 (H1 + H2) - (sqrt3/12) dt^2 [H2, H1]
        k = 0.5 * dt * (h1 + h2) + (SQRT3 / 6) * dt**2 * np.cross(h2, h1)
        return _exp_step(k, psi)
    # classical RK4 with H at t, t + dt/2, t + dt
    ha = _field(pars, theta(t), phi)
    hm = _field(pars, theta(t + 0.5 * dt), phi)
    hb = _field(pars, theta(t + dt), phi)
    f1 = -1j * _apply_h(ha, psi)
    f2 = -1j * _apply_h(hm, psi + 0.5 * dt * f1)
    f3 = -1j * _apply_h(hm, psi + 0.5 * dt * f2)
    f4 = -1j * _apply_h(hb, psi + dt * f3)
    return psi + dt / 6 * (f1 + 2 * f2 + 2 * f3 + f4)


def _batch_params(params_list):
    return tuple(np.array([getattr(p, k) for p in params_list], dtype=float) for k in ("delta1", "delta2", "omega_n"))


def propagate(protocol: RampProtocol, params_list=None, initial_states=None, stop_times=None, record=True):
    """Integrate i dpsi/dt = H(theta(t)) psi for a batch of drive parameters sharing a ramp.

    Returns ``(times, states, stop_states)``.  ``states`` is shaped
    (batch, n_t, 2) when ``record`` is set and (batch, 1, 2), the final
    state only, otherwise.  ``stop_states`` maps each of ``stop_times`` to
    the batch of states at that (arbitrary) time, reached with a partial
    final step.
    """
    params_list = list(params_list or [protocol.params])
    pars = _batch_params(params_list)
    if initial_states is None:
        initial_states = [initial_bare_state(p, protocol.initial) for p in params_list]
    psi = np.array(initial_states, dtype=complex).reshape(len(params_list), 2)
    dt, n = protocol.dt, protocol.n_steps
    times = np.minimum(np.arange(n + 1) * dt, protocol.t_ramp)
    recorded = [psi] if record else None
    stops = sorted(set(float(s) for s in (stop_times if stop_times is not None else [])))
    stop_states = {}
    si = 0
    for i in range(n):
        t0, t1 = times[i], times[i + 1]
        while si < len(stops) and stops[si] <= t1:
            tau = stops[si] - t0
            stop_states[stops[si]] = psi if tau <= 0 else _step(protocol.method, pars, protocol, t0, tau, psi)
            si += 1
        psi = _step(protocol.method, pars, protocol, t0, t1 - t0, psi)
        if record:
            recorded.append(psi)
    for s in stops[si:]:
        stop_states[s] = psi
    states = np.stack(recorded, axis=1) if record else psi[:, None, :]
    return times, states, stop_states


def sigma_y(psi):
    """<sigma_y> = 2 Im(conj(a0) a1)."""
    return 2.0 * np.imag(np.conj(psi[..., 0]) * psi[..., 1])


def evolve(protocol: RampProtocol) -> Trajectory:
    """Propagate the ramp from the bare initial state, recording <sigma_y> at every step."""
    times, states, _ = propagate(protocol)
    states = states[0]
    drift = float(np.max(np.abs(np.linalg.norm(states, axis=-1) - 1.0)))
    if drift > NORM_TOL:
        raise NormDrift(f"norm drift {drift:.3e} exceeds {NORM_TOL:g}; reduce dt")
    return Trajectory(times, states, sigma_y(states), protocol.theta_at(times), drift)


def extract_curvature(
    traj: Trajectory,
    protocol: RampProtocol,
    shots: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> QuenchCurvature:
    """Pointwise F = (omega_n sin(theta) / 2 v) <sigma_phi> along the ramp.

    sigma_phi = -sin(phi) sx + cos(phi) sy, i.e. sigma_y at phi = 0.  With
    ``shots`` the expectation value is replaced by a binomial
    projective-measurement estimate with that many shots per point.
    """
    phi = protocol.phi_fixed
    if phi == 0.0:
        s_phi = traj.sigma_y_expect
    else:
        op = -math.sin(phi) * qc.SIGMA_X + math.cos(phi) * qc.SIGMA_Y
        s_phi = qc.expectation(traj.states, op).real
    if shots:
        rng = rng if rng is not None else np.random.default_rng(0)
        p_up = np.clip(0.5 * (1 + s_phi), 0.0, 1.0)
        s_phi = 2.0 * rng.binomial(shots, p_up) / shots - 1.0
    v = protocol.velocity
    f = protocol.params.omega_n * np.sin(traj.theta_values) / (2 * v) * s_phi
    return QuenchCurvature(traj.theta_values, f, v, s_phi)


def generalized_force(traj: Trajectory, protocol: RampProtocol, t_index: int) -> float:
    """M_phi = -<psi(t)| dH/dphi |psi(t)>."""
    theta = traj.theta_values[t_index]
    _, dh_phi = qc.hamiltonian_derivatives(protocol.params, theta, protocol.phi_fixed)
    return float(-qc.expectation(traj.states[t_index], dh_phi).real)


def dynamical_chern(protocol: RampProtocol, shots: Optional[int] = None, rng=None) -> ChernResult:
    """Trapezoidal integral of the extracted curvature over theta in [0, pi]."""
    traj = evolve(protocol)
    curv = extract_curvature(traj, protocol, shots=shots, rng=rng)
    value = float(np.trapezoid(curv.f_theta_phi, curv.theta))
    return ChernResult(value, "dynamical", (protocol.n_steps + 1,))


# --------------------------------------------------------------------------
# fidelity maps


def _final_states(template, ratios, protocol, initial, stop_thetas):
    params_list = [template.with_ratio(r) for r in ratios]
    proto = replace(protocol, params=params_list[0], initial=initial)
    inits = [initial_bare_state(p, initial) for p in params_list]
    stop_times = [th / math.pi * proto.t_ramp for th in stop_thetas]
    _, _, stops = propagate(proto, params_list, inits, stop_times=stop_times, record=False)
    return {th: stops[float(st)] for th, st in zip(stop_thetas, stop_times)}


def fidelity_map(
    template: qc.DriveParams,
    ratios: Sequence[float],
    theta_meas: Sequence[float],
    protocol: RampProtocol,
    target: str = "bare_e",
    initial: str = "g",
) -> SweepResult:
    """|<target|psi(t_meas)>|^2 over (theta_meas, delta2/delta1), long form."""
    if target not in TARGETS:
        raise ValueError(f"target must be one of {sorted(TARGETS)}")
    ratios = np.sort(np.asarray(ratios, dtype=float))
    thetas = sorted(float(t) for t in theta_meas)
    if not len(ratios) or not thetas:
        raise ValueError("empty sweep grid")
    finals = _final_states(template, ratios, protocol, initial, thetas)
    ket = TARGETS[target]
    rows = []
    for th in thetas:
        fid = np.abs(finals[th] @ np.conj(ket)) ** 2
        rows.extend([th, float(r), float(f), target] for r, f in zip(ratios, fid))
    meta = {"initial": initial, "target": target, "t_ramp_us": protocol.t_ramp, "dt_us": protocol.dt}
    return SweepResult(["theta_meas", "delta2_over_delta1", "fidelity", "target"], rows, meta)


CUT_COLUMNS = ["delta2_over_delta1", "g_stay", "g_flip", "e_stay", "e_flip", "s_from_e", "s_from_g"]


def fidelity_cut_theta_pi(template: qc.DriveParams, ratios: Sequence[float], protocol: RampProtocol) -> SweepResult:
    """Fidelities of the ramp end states (theta = pi) versus delta2/delta1.

    ``g_stay`` = |<g|psi_g>|^2, ``g_flip`` = |<e|psi_g>|^2 and likewise for a
    start in |e>; ``s_from_e``/``s_from_g`` are overlaps with
    (|e> + |g>)/sqrt(2).
    """
    ratios = np.sort(np.asarray(ratios, dtype=float))
    from_g = _final_states(template, ratios, protocol, "g", [math.pi])[math.pi]
    from_e = _final_states(template, ratios, protocol, "e", [math.pi])[math.pi]

    def fid(states, ket):
        return np.abs(states @ np.conj(ket)) ** 2

    cols = [
        fid(from_g, qc.KET_G),
        fid(from_g, qc.KET_E),
        fid(from_e, qc.KET_E),
        fid(from_e, qc.KET_G),
        fid(from_e, qc.KET_S),
        fid(from_g, qc.KET_S),
    ]
    rows = [[float(r)] + [float(c[i]) for c in cols] for i, r in enumerate(ratios)]
    meta = {"theta_meas": math.pi, "t_ramp_us": protocol.t_ramp, "dt_us": protocol.dt}
    return SweepResult(list(CUT_COLUMNS), rows, meta)
