"""Chern number of both bands versus delta2/delta1 by three routes.

    python3 scripts/transition_curve.py --out transition.csv
"""
import argparse

import numpy as np

from qmonopole import qubit_core as qc
from qmonopole.results import SweepResult, write_output
from qmonopole.topology import transition_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--delta1-mhz", type=float, default=30.0)
    ap.add_argument("--omega-mhz", type=float, default=10.0)
    ap.add_argument("--count", type=int, default=81)
    ap.add_argument("--t-ramp-us", type=float, default=2.0, help="ramp time for the dynamical route")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    template = qc.DriveParams.from_mhz(args.delta1_mhz, 0.0, args.omega_mhz)
    ratios = np.linspace(-2.0, 2.0, args.count)
    ratios = np.where(np.isclose(np.abs(ratios), 1.0), np.sign(ratios) * (1 + 1e-6), ratios)

    columns, data = ["delta2_over_delta1"], [ratios]
    for band in ("ground", "excited"):
        for route, kwargs in (
            ("plaquette", {}),
            ("spectral_quadrature", {}),
            ("dynamical", {"t_ramp": args.t_ramp_us}),
        ):
            curve = transition_sweep(template, ratios, band, route, **kwargs)
            columns.append(f"chern_{band}_{route}")
            data.append(curve.chern)
    rows = [list(map(float, r)) for r in zip(*data)]
    meta = {"delta1_mhz": args.delta1_mhz, "omega_mhz": args.omega_mhz, "t_ramp_us": args.t_ramp_us}
    write_output(SweepResult(columns, rows, meta), args.out)


if __name__ == "__main__":
    main()
