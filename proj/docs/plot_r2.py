"""In-bag and out-of-bag R^2 per method from `linkshrink evaluate`."""
import sys

import matplotlib.pyplot as plt
import pandas as pd


def main(eval_dir, out="r2.png"):
    df = pd.read_csv(f"{eval_dir}/r2.tsv", sep="\t")
    long = df.melt(id_vars=["method", "replicate"], value_vars=["in_bag", "out_of_bag"], var_name="set", value_name="r2")
    groups = [(m, s) for m in df.method.unique() for s in ("in_bag", "out_of_bag")]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.boxplot([long[(long.method == m) & (long.set == s)].r2 for m, s in groups])
    ax.set_xticks(range(1, len(groups) + 1), [f"{m}\n{s}" for m, s in groups])
    ax.set_ylabel("R2")
    fig.tight_layout()
    fig.savefig(out, dpi=150)


if __name__ == "__main__":
    main(*sys.argv[1:])
