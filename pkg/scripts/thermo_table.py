"""Closed-form thermal averages against quadrature, and the two-point function at low temperature."""

import math

import numpy as np

from canonmoments.thermo import (
    bessel_k0,
    coefficient_report,
    ensemble_averages,
    log_partition_function,
    log_partition_function_quadrature,
    quadrature_averages,
    two_point_function,
)


def main():
    print(f"{'beta':>8} {'omega':>8} {'dlnZ':>10} {'<E>':>12} {'dE':>10} {'<U>':>12} {'dU':>10}")
    for beta in np.geomspace(0.1, 100, 5):
        for omega in np.geomspace(0.1, 100, 5):
            dz = log_partition_function_quadrature(beta, omega) - log_partition_function(beta, omega)
            cf, qa = ensemble_averages(beta, omega), quadrature_averages(beta, omega)
            print(f"{beta:8.3g} {omega:8.3g} {dz:10.1e} {cf.E:12.6g} {qa.E - cf.E:10.1e} {cf.U:12.6g} {qa.U - cf.U:10.1e}")
    print()
    for beta in (1e2, 1e3, 1e4, 1e6):
        a = ensemble_averages(beta, 1.0)
        print(f"beta={beta:g}: <E>-1/4 = {a.E - 0.25:.3e}  <U>-1/4 = {a.U - 0.25:.3e}  2/beta = {2 / beta:.3e}")
    print()
    for r in (0.5, 1.0, 2.0):
        g = two_point_function(r, 1.0, 1e6)
        k = bessel_k0(r) / (2 * math.pi)
        print(f"r={r}: G={g:.10f}  K0/2pi={k:.10f}  rel={g / k - 1:.2e}")
    print(coefficient_report())


if __name__ == "__main__":
    main()
