#!/usr/bin/env python3
"""Measure how fast endemic equilibria approach their large-diffusivity limits.

For a fixed heterogeneous rate pair, the endemic equilibrium is solved on a
grid of diffusivities.  Each solution is compared against the corresponding
closed-form limit profile: sending the susceptible diffusivity to infinity
flattens the susceptibles onto a ratio profile, while sending the infected
diffusivity to infinity flattens the infecteds onto a constant.  The emitted
CSV lists the sup-norm relative error of both fields against each limit, so
plotting error versus diffusivity exposes the O(1/d) convergence rate.
"""

from __future__ import annotations

import argparse
import csv
import pathlib
import sys

import numpy as np

from nonlocal_sis import (
    KernelSpec,
    ModelParams,
    RateFields,
    build_kernel,
    build_mesh,
    endemic_equilibrium,
    limit_profile_di_infinity,
    limit_profile_ds_infinity,
    limit_system_residual,
)


def relative_sup_error(field: np.ndarray, limit: np.ndarray | float) -> float:
    limit = np.asarray(limit, dtype=float)
    return float(np.abs(field - limit).max() / np.abs(limit).max())


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--n", type=int, default=200, help="mesh resolution")
    parser.add_argument("--d-max", type=float, default=1000.0,
                        help="largest diffusivity in the sweep")
    parser.add_argument("--count", type=int, default=6,
                        help="number of diffusivity values")
    args = parser.parse_args(argv)

    mesh = build_mesh(-1.0, 1.0, args.n)
    kernel = build_kernel(mesh, KernelSpec(family="triangle", delta=0.5))
    beta = 1.0 + 0.8 * np.cos(np.pi * mesh.nodes)
    gamma = np.full(args.n, 0.8)
    rates = RateFields(beta, gamma)
    total_mass = 2.0
    fixed_d = 1.0

    S_ds, I_ds = limit_profile_ds_infinity(kernel, fixed_d, rates, total_mass)
    S_di, i_star = limit_profile_di_infinity(kernel, fixed_d, rates, total_mass)
    print(f"infected-diffusivity limit residual: "
          f"{limit_system_residual(kernel, fixed_d, rates, total_mass, S_di, i_star):.2e}")

    d_values = np.logspace(np.log10(args.d_max) - (args.count - 1) * 0.5,
                           np.log10(args.d_max), args.count)
    rows = []
    for d in d_values:
        end_ds = endemic_equilibrium(ModelParams(
            kernel=kernel, rates=rates, d_S=float(d), d_I=fixed_d, N=total_mass))
        end_di = endemic_equilibrium(ModelParams(
            kernel=kernel, rates=rates, d_S=fixed_d, d_I=float(d), N=total_mass))
        row = {
            "d": float(d),
            "rel_err_S_large_dS": relative_sup_error(end_ds.S_tilde, S_ds),
            "rel_err_I_large_dS": relative_sup_error(end_ds.I_tilde, I_ds),
            "rel_err_S_large_dI": relative_sup_error(end_di.S_tilde, S_di),
            "rel_err_I_large_dI": relative_sup_error(end_di.I_tilde, i_star),
        }
        rows.append(row)
        print(f"d={d:10.3f}  large-d_S errors ({row['rel_err_S_large_dS']:.2e}, "
              f"{row['rel_err_I_large_dS']:.2e})  large-d_I errors "
              f"({row['rel_err_S_large_dI']:.2e}, {row['rel_err_I_large_dI']:.2e})")

    out_dir = pathlib.Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "limit_convergence.csv"
    with open(out_path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(rows[0]))
        writer.writeheader()
        for row in rows:
            writer.writerow({key: f"{value:.17g}" for key, value in row.items()})
    print(f"wrote {out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
