"""Outcome statistics with and without resets to |+> between measurements.

Under pure dephasing the two tables are a permutation of each other; with a
transverse coupling the correspondence breaks. Prints both cases side by side.
"""
import argparse
import sys

from ddmeas import HilbertDims, Schedule, random_model
from ddmeas.dephasing import relabel, repreparation_probabilities
from ddmeas.protocols import outcome_label, outcome_probabilities, plus_state


def record(m):
    return "".join(outcome_label(x) for x in m)


def table(kind, env_dim, seed, times):
    model = random_model(HilbertDims(2, env_dim), kind, seed)
    s = Schedule(times)
    rho0 = plus_state(model)
    p = outcome_probabilities(model, rho0, s).select("P", s)
    p_r = repreparation_probabilities(model, rho0, s).select("P_R", s)
    print(f"# {kind}  env_dim={env_dim} seed={seed}")
    print(f"{'record':>10} {'P':>12} {'reset rec':>10} {'P_R':>12} {'diff':>10}")
    worst = 0.0
    for m in sorted(p, key=lambda r: [-x for x in r]):
        r = relabel(m)
        diff = abs(p[m] - p_r[r])
        worst = max(worst, diff)
        print(f"{record(m):>10} {p[m]:12.8f} {record(r):>10} {p_r[r]:12.8f} {diff:10.2e}")
    print(f"max diff {worst:.3e}\n")
    return worst


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--env-dim", type=int, default=2)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--times", type=float, nargs="+", default=[0.5, 1.1, 1.8])
    args = ap.parse_args(argv)
    times = tuple(args.times)
    table("pure_dephasing", args.env_dim, args.seed, times)
    table("general", args.env_dim, args.seed, times)
    return 0


if __name__ == "__main__":
    sys.exit(main())
