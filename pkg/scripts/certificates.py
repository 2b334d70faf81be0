"""Bracket-closure and truncation-scaling certificates for every realization."""

from canonmoments.realizations import closure_certificate, get_realization, truncation_scaling_certificate
from canonmoments.reconstruction import impurity_candidates


def main():
    for name in ("order2", "order3_systematic", "twodof_order2"):
        rep = closure_certificate(get_realization(name), n_points=50)
        print(f"closure {name}: {len(rep.pairs)} pairs, max rel error {rep.max_rel_error:.2e}")
    rep = truncation_scaling_certificate("order3_ansatz")
    for k, v in sorted(rep.third_third.items()):
        print(f"scaling {k}: {v:.3f}")
    for k, v in sorted(rep.casimir.items()):
        print(f"scaling {k}: {v:.3f}")
    for name in ("order2", "order3_systematic", "order3_ansatz", "twodof_order2", "order4_ansatz"):
        print(f"impurity candidates {name}: {impurity_candidates(name)}")


if __name__ == "__main__":
    main()
