"""Sensitivity against specificity from roc.tsv, one curve per method."""
import sys

import matplotlib.pyplot as plt
import pandas as pd


def main(eval_dir, out="roc.png"):
    df = pd.read_csv(f"{eval_dir}/roc.tsv", sep="\t")
    fig, ax = plt.subplots(figsize=(5, 5))
    for m, g in df.groupby("method"):
        g = g.sort_values("specificity")
        ax.plot(g.specificity, g.sensitivity, marker="o", label=m)
    ax.set_xlabel("specificity")
    ax.set_ylabel("sensitivity")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)


if __name__ == "__main__":
    main(*sys.argv[1:])
