"""Write a random unit-weight Gset file with the size of the standard G1 instance.

The original G1 file is not bundled. This stand-in has the same node and edge
counts (800, 19176) and is enough to exercise parsing speed and cut plumbing.

    python scripts/make_gset_g1_like.py data/g1_like.gset --seed 9
"""

import argparse

import numpy as np


def g1_like_text(seed: int = 9, n: int = 800, m: int = 19176) -> str:
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    pick = np.sort(rng.choice(iu.size, size=m, replace=False))
    lines = [f"{n} {m}"] + [f"{i + 1} {j + 1} 1" for i, j in zip(iu[pick], ju[pick])]
    return "\n".join(lines) + "\n"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out")
    ap.add_argument("--seed", type=int, default=9)
    ap.add_argument("--nodes", type=int, default=800)
    ap.add_argument("--edges", type=int, default=19176)
    args = ap.parse_args()
    with open(args.out, "w") as fh:
        fh.write(g1_like_text(args.seed, args.nodes, args.edges))


if __name__ == "__main__":
    main()
