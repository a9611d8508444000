#!/usr/bin/env python3
"""Convert a GML network file into the edge-list/label format used here.

Usage: convert_gml.py input.gml output_dir [--label-attr NAME]
"""
import argparse
import pathlib

import networkx as nx


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("gml", help="input GML file")
    parser.add_argument("out_dir", help="directory for edges.txt / labels.txt")
    parser.add_argument("--label-attr", default=None,
                        help="node attribute holding the community id (e.g. 'value')")
    args = parser.parse_args()

    graph = nx.read_gml(args.gml, label="id")
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "edges.txt", "w") as f:
        f.write(f"# converted from {pathlib.Path(args.gml).name}\n")
        for u, v in graph.edges():
            f.write(f"{u} {v}\n")

    if args.label_attr:
        with open(out / "labels.txt", "w") as f:
            for n in graph.nodes():
                f.write(f"{n} {graph.nodes[n][args.label_attr]}\n")

    print(f"{graph.number_of_nodes()} nodes, {graph.number_of_edges()} edges -> {out}")


if __name__ == "__main__":
    main()
