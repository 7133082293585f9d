"""Decoherence time against plate frequency near resonance.

Sweeps ``o_tilde`` around ``w_tilde = 0.03`` at ``v = 0.01`` and reports
where the decoherence time is shortest.  Points where the bracket turns
non-positive are skipped.
"""
import numpy as np

from qfriction import ModelParams, resonance_sweep

W = 0.03


def main():
    # 24 points step over o_tilde = w_tilde exactly, where the integrals are slowest
    grid = np.linspace(0.005, 0.06, 24)
    for beta in (1.0, 10.0):
        p0 = ModelParams(W, 0.01, v=0.01, beta=beta).with_plate_coupling(0.01)
        t = resonance_sweep(p0, grid, jobs=None)
        o = np.array(t.column(t.columns[0]), dtype=float)
        td = np.array([np.nan if x is None else x for x in t.column("t_d")], dtype=float)
        k = int(np.nanargmin(td))
        print(f"beta = {beta}: shortest t_d = {td[k]:.6e} at o_tilde = {o[k]:.5f}"
              f" ({np.isnan(td).sum()} points skipped)")


if __name__ == "__main__":
    main()
