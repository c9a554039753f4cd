"""Regenerate the ideal Pegasus P16 / Zephyr Z12 host edge lists used in tests.

Needs ``dwave-networkx`` (not a dependency of the package):

    pip install dwave-networkx
    python scripts/make_topology_fixtures.py tests/fixtures
"""

import gzip
import sys
from pathlib import Path

import dwave_networkx as dnx


def dump(graph, path: Path, label: str) -> None:
    edges = sorted(tuple(sorted(e)) for e in graph.edges())
    with gzip.open(path, "wt", encoding="utf-8") as fh:
        fh.write(f"# {label}: {graph.number_of_nodes()} nodes, {len(edges)} edges (ideal, linear labels)\n")
        for u, v in edges:
            fh.write(f"{u} {v}\n")


def main(outdir: str) -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    dump(dnx.pegasus_graph(16), out / "pegasus16.edges.gz", "Pegasus P16")
    dump(dnx.zephyr_graph(12), out / "zephyr12.edges.gz", "Zephyr Z12")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures")
