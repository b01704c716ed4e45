"""Shared fixtures and random-network factories for the test suite."""
import numpy as np
import pytest

from syncgap import network_from_edges

# The 5-node reference network used across the suite: a 3-node strongly
# connected upstream block driving a mutually coupled pair, unit weights.
N5_EDGES = [
    ("1", "2", 1.0), ("2", "3", 1.0), ("3", "1", 1.0), ("3", "2", 1.0),
    ("1", "4", 1.0), ("1", "5", 1.0), ("4", "5", 1.0), ("5", "4", 1.0),
]

N5_CSV = "src,dst,weight\n" + "".join(
    f"{s},{d},{w:g}\n" for s, d, w in N5_EDGES)


@pytest.fixture
def n5():
    return network_from_edges(N5_EDGES)


@pytest.fixture
def n5_csv(tmp_path):
    path = tmp_path / "n5.csv"
    path.write_text(N5_CSV, encoding="utf-8")
    return path


def random_rooted_digraph(rng, n):
    """Digraph guaranteed a rooted spanning tree: random tree plus extras.

    Weights are drawn from U[0.5, 2] so the spectrum stays well scaled.
    """
    labels = [str(i + 1) for i in range(n)]
    edges = []
    present = set()
    for i in range(1, n):
        parent = int(rng.integers(0, i))
        edges.append((labels[parent], labels[i], float(rng.uniform(0.5, 2.0))))
        present.add((labels[parent], labels[i]))
    for _ in range(int(rng.integers(0, 2 * n + 1))):
        i, j = (int(x) for x in rng.integers(0, n, size=2))
        if i == j or (labels[i], labels[j]) in present:
            continue
        present.add((labels[i], labels[j]))
        edges.append((labels[i], labels[j], float(rng.uniform(0.5, 2.0))))
    return network_from_edges(edges, labels=labels)


def random_symmetric_network(rng, n):
    """Connected network with symmetric weights (undirected in effect)."""
    labels = [str(i + 1) for i in range(n)]
    edges = []
    pairs = set()
    for i in range(1, n):
        parent = int(rng.integers(0, i))
        w = float(rng.uniform(0.5, 2.0))
        edges += [(labels[parent], labels[i], w), (labels[i], labels[parent], w)]
        pairs.add(frozenset((labels[parent], labels[i])))
    for _ in range(int(rng.integers(0, n + 1))):
        i, j = (int(x) for x in rng.integers(0, n, size=2))
        key = frozenset((labels[i], labels[j]))
        if i == j or key in pairs:
            continue
        pairs.add(key)
        w = float(rng.uniform(0.5, 2.0))
        edges += [(labels[i], labels[j], w), (labels[j], labels[i], w)]
    return network_from_edges(edges, labels=labels)


def random_two_block_network(rng, n_up, n_down):
    """Two strongly connected blocks joined by upstream -> downstream links."""
    up = [f"u{i}" for i in range(n_up)]
    down = [f"d{i}" for i in range(n_down)]
    edges = []
    present = set()

    def add(src, dst, w):
        if src != dst and (src, dst) not in present:
            present.add((src, dst))
            edges.append((src, dst, float(w)))

    for block in (up, down):
        m = len(block)
        if m > 1:
            for i in range(m):
                add(block[i], block[(i + 1) % m], rng.uniform(0.5, 2.0))
            for _ in range(int(rng.integers(0, m + 1))):
                i, j = (int(x) for x in rng.integers(0, m, size=2))
                add(block[i], block[j], rng.uniform(0.5, 2.0))
    n_cut = int(rng.integers(1, n_up * n_down + 1))
    for _ in range(n_cut):
        i = int(rng.integers(0, n_up))
        j = int(rng.integers(0, n_down))
        add(up[i], down[j], rng.uniform(0.5, 2.0))
    if not any(s in up and d in down for s, d, _ in edges):
        add(up[0], down[0], 1.0)
    return network_from_edges(edges, labels=up + down)
