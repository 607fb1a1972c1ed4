"""Equilibrium and kinetic sampling on a tiny network, checked against exact
probabilities.

    python demos/sampling_diagnostics.py --samples 100000
"""
import argparse
import itertools
import math

import numpy as np

from mdlnr import WeightedNetwork, boltzmann_exact, sample_equilibrium, sample_kinetic


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--coupling", type=float, default=0.6)
    ap.add_argument("--zero-valued", action="store_true")
    args = ap.parse_args()

    net = WeightedNetwork(2, {(0, 1): args.coupling})
    theta = np.array([0.3, -0.2])
    data, diag = sample_equilibrium(net, theta, args.samples, rng=0,
                                    zero_valued=args.zero_valued)
    configs, p = boltzmann_exact(net, theta, args.zero_valued)
    X = data.states.T
    print("state\texact\tsampled")
    emp = []
    for c, pc in zip(configs, p):
        f = np.mean(np.all(X == c, axis=1))
        emp.append(f)
        print(f"{tuple(int(v) for v in c)}\t{pc:.4f}\t{f:.4f}")
    print(f"total variation {0.5 * np.abs(np.array(emp) - p).sum():.4f}")
    print(f"diagnostics {diag.to_dict()}")

    if args.zero_valued:
        return
    traj = sample_kinetic(net, theta, args.samples, rng=1).states
    W = net.to_dense()
    print("\nx(t)\tnode\tP(up) exact\tobserved")
    for c in itertools.product([-1, 1], repeat=2):
        at = np.all(traj[:, :-1].T == c, axis=1)
        s = W @ np.array(c, float) + theta
        for i in range(2):
            print(f"{c}\t{i}\t{math.exp(s[i]) / (2 * math.cosh(s[i])):.4f}\t\t"
                  f"{np.mean(traj[i, 1:][at] == 1):.4f}")


if __name__ == "__main__":
    main()
