"""Shapley posterior means and intervals for one covariate, individuals ordered by mean."""
import sys

import matplotlib.pyplot as plt
import pandas as pd


def main(shapley_tsv, covariate, out="shapley.png"):
    df = pd.read_csv(shapley_tsv, sep="\t")
    d = df[df.covariate == covariate].sort_values("phi_mean").reset_index(drop=True)
    covers = (d.phi_lower <= 0) & (d.phi_upper >= 0)
    fig, ax = plt.subplots(figsize=(10, 4))
    ax.vlines(d.index, d.phi_lower, d.phi_upper, colors=["grey" if c else "tab:red" for c in covers], lw=0.8)
    ax.plot(d.index, d.phi_mean, "k.", ms=3)
    ax.axhline(0, color="k", lw=0.5)
    ax.set_xlabel("individual")
    ax.set_ylabel(f"Shapley value: {covariate}")
    fig.tight_layout()
    fig.savefig(out, dpi=150)


if __name__ == "__main__":
    main(*sys.argv[1:])
