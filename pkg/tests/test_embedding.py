import itertools
import json
from pathlib import Path

import networkx as nx
import numpy as np
import pytest
from networkx.algorithms import isomorphism

from annni_gibbs.embedding import (
    HostGraph,
    SearchBudgetExhausted,
    circulant,
    find_disjoint_embeddings,
    find_embedding,
    is_valid_embedding,
    load_embeddings,
    read_edge_list,
    write_edge_list,
    write_embeddings,
)

FIXTURES = Path(__file__).parent / "fixtures"


def relabel(pattern, offset):
    return [(u + offset, v + offset) for u, v in pattern.edges]


def brute_force_exists(pattern, host):
    """Try every injective map with numpy; only feasible for tiny hosts."""
    nodes = list(host.nodes)
    idx = {u: k for k, u in enumerate(nodes)}
    adj = np.zeros((len(nodes), len(nodes)), dtype=bool)
    for u, v in host.edges:
        adj[idx[u], idx[v]] = adj[idx[v], idx[u]] = True
    perms = np.array(list(itertools.permutations(range(len(nodes)), pattern.n)), dtype=np.int64)
    if perms.size == 0:
        return False
    ok = np.ones(len(perms), dtype=bool)
    for u, v in pattern.edges:
        ok &= adj[perms[:, u], perms[:, v]]
    return bool(ok.any())


def vf2_exists(pattern, host):
    g = nx.Graph(host.edges)
    g.add_nodes_from(host.nodes)
    matcher = isomorphism.GraphMatcher(g, nx.Graph(pattern.edges))
    return matcher.subgraph_is_monomorphic()


def random_host(rng, size, p):
    edges = [(u, v) for u in range(size) for v in range(u + 1, size) if rng.random() < p]
    return HostGraph.from_edges(edges, nodes=range(size))


def test_circulant_shapes():
    c12 = circulant(12)
    assert len(c12.edges) == 24
    assert all(len(nb) == 4 for nb in c12.adjacency.values())
    assert (1, 11) in c12.edges
    c5 = circulant(5)
    assert set(c5.edges) == set(itertools.combinations(range(5), 2))
    with pytest.raises(ValueError):
        circulant(4)


def test_host_graph_dedup_and_self_loops():
    host = HostGraph.from_edges([(1, 2), (2, 1), (5, 3)], nodes=[9])
    assert host.edges == ((1, 2), (3, 5))
    assert host.nodes == (1, 2, 3, 5, 9)
    with pytest.raises(ValueError):
        HostGraph.from_edges([(1, 1)])


def test_embed_into_itself():
    c12 = circulant(12)
    host = HostGraph.from_edges(c12.edges)
    emb = find_embedding(c12, host)
    assert emb is not None and is_valid_embedding(c12, host, emb)


def test_missing_edge_host_has_none():
    c12 = circulant(12)
    host = HostGraph.from_edges(c12.edges[1:])
    assert find_embedding(c12, host) is None
    assert find_disjoint_embeddings(c12, host) == []


def test_c24_host_has_none():
    assert find_embedding(circulant(12), HostGraph.from_edges(circulant(24).edges)) is None


def test_three_disjoint_copies():
    c12 = circulant(12)
    host = HostGraph.from_edges([e for k in range(3) for e in relabel(c12, 100 * k)])
    found = find_disjoint_embeddings(c12, host)
    assert len(found) == 3
    images = [set(e.values()) for e in found]
    assert all(a.isdisjoint(b) for a, b in itertools.combinations(images, 2))
    assert all(is_valid_embedding(c12, host, e) for e in found)


def test_small_host():
    host = HostGraph.from_edges(circulant(11).edges)
    assert find_disjoint_embeddings(circulant(12), host) == []


def test_excluded_nodes_respected():
    c12 = circulant(12)
    host = HostGraph.from_edges([e for k in range(2) for e in relabel(c12, 100 * k)])
    emb = find_embedding(c12, host, excluded={0})
    assert emb is not None and set(emb.values()) == set(range(100, 112))


def test_extra_host_edges_allowed():
    c12 = circulant(12)
    host = HostGraph.from_edges(list(c12.edges) + [(0, 6), (3, 9)])
    assert find_embedding(c12, host) is not None


def test_deterministic():
    rng = np.random.default_rng(3)
    host = random_host(rng, 40, 0.5)
    pattern = circulant(7)
    assert find_disjoint_embeddings(pattern, host) == find_disjoint_embeddings(pattern, host)


def test_budget_exhaustion_is_distinct():
    pattern = circulant(12)
    host = HostGraph.from_edges(circulant(24).edges)
    with pytest.raises(SearchBudgetExhausted):
        find_embedding(pattern, host, budget=5)


def test_is_valid_embedding_rejects():
    c5 = circulant(5)
    host = HostGraph.from_edges(c5.edges)
    assert is_valid_embedding(c5, host, {i: i for i in range(5)})
    assert not is_valid_embedding(c5, host, {0: 0, 1: 0, 2: 2, 3: 3, 4: 4})
    assert not is_valid_embedding(c5, host, {i: i for i in range(4)})
    host2 = HostGraph.from_edges(c5.edges[1:], nodes=range(5))
    assert not is_valid_embedding(c5, host2, {i: i for i in range(5)})


@pytest.mark.parametrize("seed", range(30))
def test_against_numpy_brute_force(seed):
    rng = np.random.default_rng(seed)
    size = int(rng.integers(5, 9))
    host = random_host(rng, size, float(rng.uniform(0.5, 0.95)))
    pattern = circulant(int(rng.integers(5, min(size, 7) + 1)))
    emb = find_embedding(pattern, host)
    assert (emb is not None) == brute_force_exists(pattern, host)
    if emb is not None:
        assert is_valid_embedding(pattern, host, emb)


@pytest.mark.parametrize("seed", range(30))
def test_against_vf2(seed):
    rng = np.random.default_rng(1000 + seed)
    size = int(rng.integers(12, 65))
    host = random_host(rng, size, float(rng.uniform(0.15, 0.45)))
    pattern = circulant(int(rng.choice([6, 8, 12])))
    found = find_disjoint_embeddings(pattern, host)
    assert bool(found) == vf2_exists(pattern, host)
    for emb in found:
        assert is_valid_embedding(pattern, host, emb)
    images = [set(e.values()) for e in found]
    assert all(a.isdisjoint(b) for a, b in itertools.combinations(images, 2))
    # greedy stops only when the remaining host is exhausted
    used = set().union(*images) if images else set()
    rest = HostGraph.from_edges([e for e in host.edges if not set(e) & used],
                                nodes=[u for u in host.nodes if u not in used])
    assert not vf2_exists(pattern, rest)


def test_edge_list_round_trip(tmp_path):
    host = HostGraph.from_edges([(5, 9), (9, 30), (2, 5)])
    write_edge_list(host, tmp_path / "h.edges")
    back = read_edge_list(tmp_path / "h.edges")
    assert back.edges == host.edges and back.nodes == host.nodes


@pytest.mark.parametrize("text", ["1 2 3\n", "a b\n", "4 4\n"])
def test_edge_list_errors(tmp_path, text):
    (tmp_path / "h.edges").write_text(text)
    with pytest.raises(ValueError):
        read_edge_list(tmp_path / "h.edges")


def test_embedding_file_round_trip(tmp_path):
    embs = [{0: 10, 1: 11}, {0: 20, 1: 21}]
    write_embeddings(embs, tmp_path / "e.json", pattern="test")
    doc = json.loads((tmp_path / "e.json").read_text())
    assert doc["embeddings"][0] == [[0, 10], [1, 11]]
    assert load_embeddings(tmp_path / "e.json") == embs
    (tmp_path / "bare.json").write_text(json.dumps([[[0, 3], [1, 4]]]))
    assert load_embeddings(tmp_path / "bare.json") == [{0: 3, 1: 4}]
    (tmp_path / "bad.json").write_text(json.dumps({"format": "other", "embeddings": []}))
    with pytest.raises(ValueError):
        load_embeddings(tmp_path / "bad.json")


@pytest.mark.slow
@pytest.mark.parametrize("name,nodes,edges", [("pegasus16", 5640, 40484), ("zephyr12", 4800, 45864)])
def test_topology_fixture_counts(name, nodes, edges):
    host = read_edge_list(FIXTURES / f"{name}.edges.gz")
    assert (len(host.nodes), len(host.edges)) == (nodes, edges)
    pattern = circulant(12)
    found = find_disjoint_embeddings(pattern, host)
    print(f"{name}: {len(found)} disjoint embeddings")
    assert found and all(is_valid_embedding(pattern, host, e) for e in found)
    used = [u for e in found for u in e.values()]
    assert len(used) == len(set(used))
