#!/usr/bin/env python3
"""Convert a citation-network distribution to the holograph dataset format.

Two source layouts are understood:

  linqs  <name>.content + <name>.cites, as distributed by LINQS
         (Cora: 2708 nodes, 1433 binary features, 7 classes).
  npz    a sparse-CSR .npz with adj_*, attr_* and labels arrays, as used by
         the nettack / PPRGo / gnn-benchmark repositories (cora_ml.npz,
         citeseer.npz, amazon_electronics_photo.npz).

The output directory receives features.csv, labels.csv and edges.tsv plus
counts.json with the node, edge, feature and class counts that
`load_dataset` must report for the converted files.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np


def read_linqs(content: Path, cites: Path):
    ids, rows, names = [], [], []
    for line in content.read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        ids.append(parts[0])
        rows.append([float(v) for v in parts[1:-1]])
        names.append(parts[-1])
    index = {pid: i for i, pid in enumerate(ids)}
    classes = sorted(set(names))
    labels = np.array([classes.index(n) for n in names], dtype=np.int64)
    edges, dropped = [], 0
    for line in cites.read_text().splitlines():
        parts = line.split()
        if len(parts) != 2:
            continue
        a, b = (index.get(p) for p in parts)
        if a is None or b is None:
            dropped += 1
            continue
        edges.append((a, b))
    if dropped:
        print(f"dropped {dropped} citations to papers without content", file=sys.stderr)
    return np.array(rows), labels, np.array(edges, dtype=np.int64).reshape(-1, 2)


def read_npz(path: Path):
    import scipy.sparse as sp

    with np.load(path, allow_pickle=True) as z:
        adj = sp.csr_matrix((z["adj_data"], z["adj_indices"], z["adj_indptr"]), shape=z["adj_shape"])
        if "attr_data" in z:
            attr = sp.csr_matrix((z["attr_data"], z["attr_indices"], z["attr_indptr"]), shape=z["attr_shape"])
            features = attr.toarray()
        else:
            features = z["attr_matrix"]
        labels = np.asarray(z["labels"], dtype=np.int64)
    coo = adj.tocoo()
    return np.asarray(features, dtype=float), labels, np.stack([coo.row, coo.col], axis=1)


def filter_like_loader(features, labels, edges):
    """Symmetrise, drop self-loops and duplicates, then repeatedly remove
    nodes with no edges or an all-zero feature row."""
    pairs = {(min(a, b), max(a, b)) for a, b in edges.tolist() if a != b}
    keep = np.ones(len(labels), dtype=bool)
    while True:
        degree = np.zeros(len(labels), dtype=np.int64)
        for a, b in pairs:
            degree[a] += 1
            degree[b] += 1
        now = keep & (degree > 0) & np.any(features != 0, axis=1)
        if (now == keep).all():
            break
        keep = now
        pairs = {(a, b) for a, b in pairs if keep[a] and keep[b]}
    new_id = np.cumsum(keep) - 1
    kept_pairs = sorted((int(new_id[a]), int(new_id[b])) for a, b in pairs)
    return features[keep], labels[keep], kept_pairs


def number(v: float) -> str:
    return format(v, ".17g")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("source", nargs="+", type=Path, help="<name>.content <name>.cites, or one .npz file")
    ap.add_argument("--out", type=Path, required=True, help="output dataset directory")
    args = ap.parse_args()

    if len(args.source) == 1 and args.source[0].suffix == ".npz":
        features, labels, edges = read_npz(args.source[0])
    elif len(args.source) == 2:
        content, cites = sorted(args.source, key=lambda p: p.suffix != ".content")
        features, labels, edges = read_linqs(content, cites)
    else:
        ap.error("expected one .npz file or a .content/.cites pair")

    classes = int(labels.max()) + 1
    features, labels, edges = filter_like_loader(features, labels, edges)

    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "features.csv", "w", newline="\n") as f:
        for row in features:
            f.write(",".join(number(v) for v in row) + "\n")
    with open(args.out / "labels.csv", "w", newline="\n") as f:
        f.writelines(f"{int(l)}\n" for l in labels)
    with open(args.out / "edges.tsv", "w", newline="\n") as f:
        f.writelines(f"{a}\t{b}\n" for a, b in edges)
    counts = {"nodes": len(labels), "edges": len(edges), "features": features.shape[1], "classes": classes}
    (args.out / "counts.json").write_text(json.dumps(counts, indent=2) + "\n")
    print(json.dumps(counts))


if __name__ == "__main__":
    main()
