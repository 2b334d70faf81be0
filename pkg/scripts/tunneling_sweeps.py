"""Tunneling time and exit momentum against gamma, and escape status against V_top."""

import argparse
import csv
from pathlib import Path

import numpy as np

from canonmoments.dynamics import BarrierSpec, tunneling_sweep


def write(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["param", "time", "exit_q", "exit_pi", "status"])
        for r in rows:
            w.writerow([r.param, r.time, r.exit_q, r.exit_pi, r.status])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/sweeps")
    ap.add_argument("--t-max", type=float, default=20.0)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base = BarrierSpec(1.0, 0.1, 0.25)
    gammas = np.round(np.linspace(0.05, 0.3, 11), 4)
    for model in ("all_orders", "order2"):
        rows = tunneling_sweep(base, "gamma", gammas, model, args.t_max)
        write(out / f"gamma_{model}.csv", rows)
        for r in rows:
            print(model, "gamma", r.param, r.status, r.time)
    tops = [1.0, 2.0, 5.0, 10.0, 15.0, 20.0]
    for model in ("all_orders", "order2"):
        rows = tunneling_sweep(base, "V_top", tops, model, args.t_max)
        write(out / f"vtop_{model}.csv", rows)
        for r in rows:
            print(model, "V_top", r.param, r.status, r.time)


if __name__ == "__main__":
    main()
