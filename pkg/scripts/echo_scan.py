"""Scan echo, free-induction and two-measurement signals against first-pulse time.

Prints a CSV table: t1, W_idle(2 t1), W_echo(2 t1), O_2(2 t1, t1), and the
reconstruction 2 O_2 - O_1 of the echo from measurement data.
"""
import argparse
import sys

import numpy as np

from ddmeas import HilbertDims, Schedule, random_model
from ddmeas.protocols import O_signal, O_subset, W_signal, plus_state


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--env-dim", type=int, default=4)
    p.add_argument("--kind", choices=("general", "pure_dephasing"), default="pure_dephasing")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--t-max", type=float, default=3.0)
    args = p.parse_args(argv)

    model = random_model(HilbertDims(2, args.env_dim), args.kind, args.seed)
    rho0 = plus_state(model)
    print("t1,W_idle,W_echo,O_2,echo_from_O")
    for t1 in np.linspace(args.t_max / args.points, args.t_max, args.points):
        s = Schedule((t1, 2 * t1))
        w_idle = W_signal(model, rho0, s, "i")
        w_echo = W_signal(model, rho0, s, "x")
        o2 = O_signal(model, rho0, s)
        rebuilt = 2 * o2 - O_subset(model, rho0, s, ())
        print(f"{t1:.4f},{w_idle:.10f},{w_echo:.10f},{o2:.10f},{rebuilt:.10f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
