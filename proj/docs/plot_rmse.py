"""rMSE per coefficient from `linkshrink evaluate`, mains then interactions, each sorted by |truth|."""
import sys

import matplotlib.pyplot as plt
import pandas as pd


def main(eval_dir, out="rmse.png"):
    df = pd.read_csv(f"{eval_dir}/rmse.tsv", sep="\t")
    df = df[df.coefficient != "alpha"]
    is_int = df.coefficient.str.contains(":")
    ordered = pd.concat([
        df[~is_int].reindex(df[~is_int].truth.abs().sort_values(ascending=False).index),
        df[is_int].reindex(df[is_int].truth.abs().sort_values(ascending=False).index),
    ])
    methods = [c for c in df.columns if c not in ("coefficient", "truth", "label")]
    fig, ax = plt.subplots(figsize=(12, 4))
    for m in methods:
        ax.plot(range(len(ordered)), ordered[m].values, marker=".", lw=0.8, label=m)
    ax.axvline((~is_int).sum() - 0.5, color="k", lw=2)
    ax.set_xlabel("coefficient (mains | interactions, by |master estimate|)")
    ax.set_ylabel("rMSE")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)


if __name__ == "__main__":
    main(*sys.argv[1:])
