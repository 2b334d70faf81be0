"""All-orders and second-order ground-state estimates next to exact diagonalization."""

import json

from canonmoments.effective import exact_ground_state, ground_state_estimate
from canonmoments.potentials import abs_potential, harmonic, relativistic_sqrt


def main():
    rows = []
    for V in (abs_potential(), relativistic_sqrt(), harmonic()):
        row = {"potential": V.label, "exact": exact_ground_state(V)}
        for model in ("all_orders", "order2"):
            if model == "order2" and not V.smooth:
                continue
            est = ground_state_estimate(V, 0.25, model=model)
            row[model] = {"q": est.q, "s": est.s, "E": est.E}
        rows.append(row)
        print(json.dumps(row, sort_keys=True))


if __name__ == "__main__":
    main()
