"""Fidelity maps over (theta_meas, delta2/delta1) and the theta = pi cut.

    python3 scripts/fidelity_maps.py --t-ramp-us 20 --map map.csv --cut cut.csv
"""
import argparse
import math

import numpy as np

from qmonopole import dynamics as dyn
from qmonopole import qubit_core as qc
from qmonopole.results import SweepResult, write_output


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--delta1-mhz", type=float, default=30.0)
    ap.add_argument("--omega-mhz", type=float, default=10.0)
    ap.add_argument("--t-ramp-us", type=float, default=20.0)
    ap.add_argument("--ratios", type=int, default=81)
    ap.add_argument("--thetas", type=int, default=41)
    ap.add_argument("--map", dest="map_out", default="fidelity_map.csv")
    ap.add_argument("--cut", dest="cut_out", default="fidelity_cut.csv")
    args = ap.parse_args()

    template = qc.DriveParams.from_mhz(args.delta1_mhz, 0.0, args.omega_mhz)
    protocol = dyn.RampProtocol(template, args.t_ramp_us)
    ratios = np.linspace(-2.0, 2.0, args.ratios)
    thetas = np.linspace(0.0, math.pi, args.thetas)

    parts = []
    for initial, target in (("g", "bare_e"), ("e", "bare_g"), ("g", "degenerate_s"), ("e", "degenerate_s")):
        res = dyn.fidelity_map(template, ratios, thetas, protocol, target=target, initial=initial)
        parts.extend([initial] + row for row in res.rows)
    write_output(
        SweepResult(["initial", "theta_meas", "delta2_over_delta1", "fidelity", "target"], parts, {"t_ramp_us": args.t_ramp_us}),
        args.map_out,
    )
    cut = dyn.fidelity_cut_theta_pi(template, np.linspace(0.0, 2.0, 4 * args.ratios), protocol)
    write_output(cut, args.cut_out)


if __name__ == "__main__":
    main()
