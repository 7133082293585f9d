"""Decoherence time against velocity at three temperatures.

Uses plate coupling ``a**1.5 * lambda = 0.01``.  The last column group
shows the time in seconds for ``a = 1e-6`` m.
"""
import numpy as np

from qfriction import ZERO_TEMPERATURE, ModelParams, PerturbativeBreakdown, decoherence_time

W, O, A = 0.03, 0.01, 1e-6
BETAS = (ZERO_TEMPERATURE, 1.0, 0.1)


def main():
    grid = np.linspace(0.0, 0.95, 8)
    print("      v" + "".join(f"{'t_d beta=' + str(b):>18}" for b in BETAS) + f"{'seconds (T=0)':>18}")
    for v in grid:
        cells, seconds = [], float("nan")
        for beta in BETAS:
            p = ModelParams(W, O, a=A, v=float(v), beta=beta).with_plate_coupling(0.01)
            try:
                d = decoherence_time(p)
            except PerturbativeBreakdown:
                cells.append(float("nan"))
                continue
            cells.append(d.t_d)
            if beta == ZERO_TEMPERATURE:
                seconds = d.t_d_seconds
        print(f"{v:7.3f}" + "".join(f"{c:18.6e}" for c in cells) + f"{seconds:18.6e}")


if __name__ == "__main__":
    main()
