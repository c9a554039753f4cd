"""Node-disjoint native embeddings of the ANNNI interaction graph.

A native embedding is an injective map pattern-node -> host-node under which
every pattern edge lands on a host edge (non-induced subgraph isomorphism).
The search is a complete backtracking search: it returns ``None`` only when no
embedding exists, unless a node-expansion budget runs out first, in which
case :class:`SearchBudgetExhausted` is raised.
"""

from __future__ import annotations

import gzip
import json
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

__all__ = [
    "HostGraph",
    "PatternGraph",
    "SearchBudgetExhausted",
    "circulant",
    "find_embedding",
    "find_disjoint_embeddings",
    "is_valid_embedding",
    "read_edge_list",
    "write_edge_list",
    "write_embeddings",
    "load_embeddings",
    "DEFAULT_BUDGET",
]

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**8
EMBEDDING_FORMAT = "annni-embeddings"


class SearchBudgetExhausted(RuntimeError):
    """The node-expansion budget ran out before the search finished."""


def _edge_set(edges: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    out = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise ValueError(f"self-loop on node {u}")
        out.add((u, v) if u < v else (v, u))
    return tuple(sorted(out))


@dataclass(frozen=True, eq=False)
class HostGraph:
    """Undirected hardware graph with integer (possibly sparse) node ids."""

    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], nodes: Iterable[int] = ()) -> "HostGraph":
        edges = _edge_set(edges)
        node_set = {int(x) for x in nodes}
        for u, v in edges:
            node_set.update((u, v))
        return cls(tuple(sorted(node_set)), edges)

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        adj: dict[int, set[int]] = {u: set() for u in self.nodes}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return {u: frozenset(nb) for u, nb in adj.items()}

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True, eq=False)
class PatternGraph:
    n: int
    edges: tuple[tuple[int, int], ...]

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        adj: dict[int, set[int]] = {u: set() for u in range(self.n)}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return {u: frozenset(nb) for u, nb in adj.items()}


def circulant(n: int, offsets: Iterable[int] = (1, 2)) -> PatternGraph:
    """Circulant graph ``C_n(offsets)``; ``C_n(1, 2)`` is the ANNNI ring."""
    if n < 5:
        raise ValueError(f"C_n(1,2) needs n >= 5 for distinct edges, got {n}")
    edges = _edge_set((i, (i + d) % n) for i in range(n) for d in offsets)
    return PatternGraph(n, edges)


def _search_order(pattern: PatternGraph) -> list[int]:
    adj = pattern.adjacency
    order = [max(range(pattern.n), key=lambda u: (len(adj[u]), -u))]
    placed = set(order)
    while len(order) < pattern.n:
        nxt = max(
            (u for u in range(pattern.n) if u not in placed),
            key=lambda u: (len(adj[u] & placed), len(adj[u]), -u),
        )
        order.append(nxt)
        placed.add(nxt)
    return order


def find_embedding(pattern: PatternGraph, host: HostGraph, excluded: Iterable[int] = (),
                   budget: int | None = None) -> dict[int, int] | None:
    """Find one embedding of ``pattern`` into ``host`` avoiding ``excluded``.

    Host candidates are tried in descending degree, ties by id, so the result
    is deterministic.  ``budget`` caps the number of node expansions.
    """
    excluded = set(excluded)
    padj = pattern.adjacency
    if pattern.n > len(host) - len(excluded & set(host.nodes)):
        return None
    hadj = {u: nb - excluded for u, nb in host.adjacency.items() if u not in excluded}
    hdeg = {u: len(nb) for u, nb in hadj.items()}

    order = _search_order(pattern)
    pos = {u: k for k, u in enumerate(order)}
    back = [[w for w in padj[u] if pos[w] < k] for k, u in enumerate(order)]
    need = [len(padj[u]) for u in order]
    rank = sorted(hadj, key=lambda u: (-hdeg[u], u))

    mapping: dict[int, int] = {}
    used: set[int] = set()
    expansions = 0
    limit = budget if budget is not None else float("inf")

    def candidates(k: int):
        if not back[k]:
            return [u for u in rank if u not in used and hdeg[u] >= need[k]]
        first, *rest = back[k]
        cand = set(hadj[mapping[first]])
        for w in rest:
            cand &= hadj[mapping[w]]
        cand -= used
        return sorted((u for u in cand if hdeg[u] >= need[k]), key=lambda u: (-hdeg[u], u))

    def free_ok(k: int, host_node: int) -> bool:
        # every still-unmapped pattern neighbour needs a free host neighbour
        pending = need[k] - len(back[k])
        if pending <= 0:
            return True
        free = sum(1 for x in hadj[host_node] if x not in used)
        return free >= pending

    def extend(k: int) -> bool:
        nonlocal expansions
        if k == pattern.n:
            return True
        u = order[k]
        for h in candidates(k):
            expansions += 1
            if expansions > limit:
                raise SearchBudgetExhausted(f"gave up after {expansions - 1} node expansions")
            if not free_ok(k, h):
                continue
            mapping[u] = h
            used.add(h)
            if extend(k + 1):
                return True
            del mapping[u]
            used.discard(h)
        return False

    if extend(0):
        return {u: mapping[u] for u in range(pattern.n)}
    return None


def is_valid_embedding(pattern: PatternGraph, host: HostGraph, embedding: Mapping[int, int]) -> bool:
    if sorted(embedding) != list(range(pattern.n)):
        return False
    image = list(embedding.values())
    if len(set(image)) != len(image):
        return False
    hadj = host.adjacency
    if any(x not in hadj for x in image):
        return False
    return all(embedding[v] in hadj[embedding[u]] for u, v in pattern.edges)


def find_disjoint_embeddings(pattern: PatternGraph, host: HostGraph, budget: int | None = None,
                             limit: int | None = None) -> list[dict[int, int]]:
    """Greedily collect pairwise node-disjoint embeddings until none is left.

    ``budget`` applies per single-embedding search; when it runs out the loop
    stops and logs a warning, keeping the embeddings found so far.  Hosts
    with more than 1000 nodes default to :data:`DEFAULT_BUDGET`.
    """
    if budget is None and len(host) > 1000:
        budget = DEFAULT_BUDGET
    taken: set[int] = set()
    found: list[dict[int, int]] = []
    while limit is None or len(found) < limit:
        try:
            emb = find_embedding(pattern, host, taken, budget=budget)
        except SearchBudgetExhausted as exc:
            log.warning("embedding search stopped after %d embeddings: %s", len(found), exc)
            break
        if emb is None:
            break
        found.append(emb)
        taken.update(emb.values())
    return found


# -- file formats -------------------------------------------------------------

def read_edge_list(path: str | Path) -> HostGraph:
    """Read ``u v`` pairs, one per line; ``#`` starts a comment.  ``.gz`` files are decompressed."""
    edges = []
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'u v', got {line.strip()!r}")
            try:
                edges.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: node ids must be integers") from None
    return HostGraph.from_edges(edges)


def write_edge_list(host: HostGraph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {len(host.nodes)} nodes, {len(host.edges)} edges\n")
        for u, v in host.edges:
            fh.write(f"{u} {v}\n")


def write_embeddings(embeddings: list[Mapping[int, int]], path: str | Path, **meta) -> None:
    """Write embeddings as JSON lists of ``[logical, physical]`` pairs."""
    doc = {
        "format": EMBEDDING_FORMAT,
        "version": 1,
        **meta,
        "embeddings": [[[int(k), v] for k, v in sorted(emb.items())] for emb in embeddings],
    }
    Path(path).write_text(json.dumps(doc, indent=1), encoding="utf-8")


def load_embeddings(path: str | Path) -> list[dict[int, int]]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(doc, dict):
        if doc.get("format", EMBEDDING_FORMAT) != EMBEDDING_FORMAT:
            raise ValueError(f"{path}: unknown embedding format {doc.get('format')!r}")
        doc = doc["embeddings"]
    out = []
    for k, emb in enumerate(doc):
        if isinstance(emb, Mapping):
            out.append({int(a): b for a, b in emb.items()})
        else:
            pairs = [tuple(p) for p in emb]
            if any(len(p) != 2 for p in pairs):
                raise ValueError(f"{path}: embedding {k} must be a list of [logical, physical] pairs")
            out.append({int(a): b for a, b in pairs})
    return out
