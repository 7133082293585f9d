"""Friction force against velocity at three temperatures.

Prints |F| on a coarse velocity grid for T = 0, beta = 1 and beta = 0.1,
then the split into the three force terms at one velocity.  Pass
``--plot out.png`` to save a figure (needs matplotlib).
"""
import argparse

import numpy as np

from qfriction import ZERO_TEMPERATURE, ModelParams, friction_force, velocity_sweep

W, O, A = 0.03, 0.01, 1e-6
BETAS = (ZERO_TEMPERATURE, 1.0, 0.1)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--plot", help="save a log-log figure to this path")
    args = ap.parse_args()

    grid = np.linspace(0.05, 0.9, 12)
    curves = {}
    for beta in BETAS:
        t = velocity_sweep(ModelParams(W, O, a=A, beta=beta), grid, jobs=None)
        curves[beta] = np.abs(np.array(t.column("total"), dtype=float))

    print("      v" + "".join(f"{'|F| beta=' + str(b):>18}" for b in BETAS))
    for i, v in enumerate(grid):
        print(f"{v:7.3f}" + "".join(f"{curves[b][i]:18.6e}" for b in BETAS))

    fb = friction_force(ModelParams(W, O, a=A, v=0.3, beta=1.0))
    print("\nv = 0.3, beta = 1")
    for name in ("f1", "f2", "f3"):
        term = getattr(fb, name) * getattr(fb, name + "_prefactor") + 0.0
        print(f"  {name}: {term: .6e}")
    print(f"  total: {fb.total: .6e}  (error {fb.error_estimate:.1e}, converged {fb.converged})")

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots()
        for beta in BETAS:
            ax.loglog(grid, curves[beta], marker="o", label=f"beta = {beta}")
        ax.set_xlabel("v / c")
        ax.set_ylabel("|F|")
        ax.legend()
        fig.savefig(args.plot, dpi=150)


if __name__ == "__main__":
    main()
