"""Ramp-time study of the dynamical curvature extraction.

For each ramp time: the dynamical Chern number and its error, the largest
pointwise deviation from the spectral curvature on theta in [0.2 pi, 0.8 pi],
the mean deviation there, and the precession amplitude expected from the
sudden start of the ramp, omega_n^2 sin(theta) / (2 delta1^2) at theta = pi/2.
The integrator step is also halved to show the numbers are converged.

    python3 scripts/convergence_study.py
"""
import argparse
import math
from dataclasses import replace

import numpy as np

from qmonopole import dynamics as dyn
from qmonopole import qubit_core as qc
from qmonopole.geometry import berry_curvature_spectral
from qmonopole.results import SweepResult, write_output
from qmonopole.topology import chern_plaquette


def window_stats(protocol):
    curv = dyn.extract_curvature(dyn.evolve(protocol), protocol)
    mask = (curv.theta >= 0.2 * math.pi) & (curv.theta <= 0.8 * math.pi)
    diff = curv.f_theta_phi[mask] - berry_curvature_spectral(protocol.params, curv.theta[mask], 0.0)
    return float(np.max(np.abs(diff))), float(np.mean(diff))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--delta1-mhz", type=float, default=30.0)
    ap.add_argument("--delta2-mhz", type=float, default=0.0)
    ap.add_argument("--omega-mhz", type=float, default=10.0)
    ap.add_argument("--t-ramp-us", default="0.5,0.75,1,1.5,2,3,4,10,20")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    params = qc.DriveParams.from_mhz(args.delta1_mhz, args.delta2_mhz, args.omega_mhz)
    truth = chern_plaquette(params).value
    amplitude = params.omega_n**2 / (2 * params.delta1**2)
    rows = []
    for t_ramp in (float(v) for v in args.t_ramp_us.split(",")):
        protocol = dyn.RampProtocol(params, t_ramp)
        fine = replace(protocol, dt=protocol.dt / 4)
        c = dyn.dynamical_chern(protocol).value
        c_fine = dyn.dynamical_chern(fine).value
        worst, mean = window_stats(protocol)
        rows.append([t_ramp, c, abs(c - truth), abs(c_fine - truth), worst, mean, amplitude])
    columns = ["t_ramp_us", "chern_dynamical", "chern_error", "chern_error_dt_over_4", "max_abs_dF", "mean_dF", "precession_amplitude"]
    write_output(SweepResult(columns, rows, {"chern_truth": truth}), args.out)


if __name__ == "__main__":
    main()
