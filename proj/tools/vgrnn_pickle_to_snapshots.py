#!/usr/bin/env python3
"""Convert a VGRNN-style ``adj_time_list`` pickle into a snapshot list.

The pickle holds one adjacency matrix per step (scipy sparse or dense). The
output has one ``i j k`` line per undirected edge with i < j and k the
0-based step, which is what the ``snapshots`` manifest format reads.
"""

import argparse
import pickle
import sys

import numpy as np


def load_adjacency_list(path):
    with open(path, "rb") as fh:
        try:
            return pickle.load(fh)
        except UnicodeDecodeError:
            fh.seek(0)
            return pickle.load(fh, encoding="latin1")


def edges_of(matrix):
    if hasattr(matrix, "tocoo"):
        coo = matrix.tocoo()
        rows, cols = coo.row, coo.col
        keep = coo.data != 0
        rows, cols = rows[keep], cols[keep]
    else:
        rows, cols = np.nonzero(np.asarray(matrix))
    pairs = {(int(min(i, j)), int(max(i, j))) for i, j in zip(rows, cols) if i != j}
    return sorted(pairs)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("pickle", help="path to adj_time_list.pickle")
    parser.add_argument("output", help="snapshot list to write")
    args = parser.parse_args(argv)

    adjs = load_adjacency_list(args.pickle)
    nodes = 0
    total = 0
    with open(args.output, "w") as out:
        out.write("# i j k\n")
        for k, adj in enumerate(adjs):
            nodes = max(nodes, adj.shape[0])
            for i, j in edges_of(adj):
                out.write(f"{i} {j} {k}\n")
                total += 1
    print(f"nodes={nodes} edges={total} steps={len(adjs)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
