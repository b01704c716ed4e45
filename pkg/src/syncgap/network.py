"""Weighted directed networks: ingestion, Laplacians, and component structure.

The weight convention follows the coupled-oscillator equations of motion:
``W[i, j]`` is the strength of the interaction *from node j to node i*, so
row ``i`` collects the in-edges of node ``i``.  The directed Laplacian is
``L = D - W`` with ``D`` the diagonal matrix of row sums of ``W``.

Networks are immutable once constructed; all functions here are pure.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import BlockFormError, EdgeListError

__all__ = [
    "Network",
    "Laplacian",
    "Decomposition",
    "BlockForm",
    "load_network",
    "read_network",
    "network_from_edges",
    "network_from_json",
    "network_to_json",
    "laplacian",
    "decompose",
    "has_rooted_spanning_tree",
    "block_form",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Network:
    """Weighted directed network over labelled nodes.

    Attributes
    ----------
    labels : tuple of str
        Node identifiers in input-appearance order.  This order fixes the
        matrix indexing and every block ordering derived downstream.
    weights : ndarray, shape (n, n)
        Nonnegative weight matrix, ``weights[i, j]`` = strength from node
        ``labels[j]`` to node ``labels[i]``.  Zero diagonal.
    """

    labels: tuple[str, ...]
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        n = len(self.labels)
        if w.shape != (n, n):
            raise ValueError(f"weight matrix shape {w.shape} does not match {n} labels")
        if len(set(self.labels)) != n:
            raise ValueError("duplicate node labels")
        if not np.all(np.isfinite(w)):
            raise ValueError("non-finite weight")
        if np.any(w < 0):
            raise ValueError("negative weight")
        if np.any(np.diag(w) != 0):
            raise ValueError("self-loop (nonzero diagonal) not allowed")
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        object.__setattr__(self, "weights", _frozen(w))
        if n > 1 and not _weakly_connected(self.weights):
            raise ValueError("network is not weakly connected")

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        """Matrix index of a node label."""
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise KeyError(f"unknown node {label!r}") from None

    def weight(self, src: str, dst: str) -> float:
        return float(self.weights[self.index(dst), self.index(src)])

    def edges(self) -> list[tuple[str, str, float]]:
        """All edges as (src, dst, weight), ordered by (src, dst) index."""
        out = []
        for j, src in enumerate(self.labels):
            for i, dst in enumerate(self.labels):
                if self.weights[i, j] != 0.0:
                    out.append((src, dst, float(self.weights[i, j])))
        return out

    def with_edge(self, src: str, dst: str, dw: float) -> "Network":
        """New network with ``dw`` added to the weight of ``src -> dst``."""
        i, j = self.index(dst), self.index(src)
        if i == j:
            raise ValueError("self-loop")
        w = self.weights.copy()
        w[i, j] += dw
        if w[i, j] < 0:
            raise ValueError(f"edge {src}->{dst}: weight would become negative")
        return Network(self.labels, w)

    def scaled(self, c: float) -> "Network":
        """All weights multiplied by ``c > 0``."""
        if c <= 0:
            raise ValueError("scale factor must be positive")
        return Network(self.labels, c * self.weights)


@dataclass(frozen=True)
class Laplacian:
    """Directed graph Laplacian ``matrix = diag(degrees) - W``."""

    matrix: np.ndarray
    degrees: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))
        object.__setattr__(self, "degrees", _frozen(self.degrees))


@dataclass(frozen=True)
class Decomposition:
    """Strongly connected components plus the structure between them.

    ``components`` partition the node set and are numbered by the smallest
    input-order index they contain.  ``condensation`` lists the directed
    edges of the (acyclic) component graph as index pairs into
    ``components``.  ``cutset_edges`` are the individual network edges that
    cross from one component to another.
    """

    components: tuple[tuple[str, ...], ...]
    condensation: tuple[tuple[int, int], ...]
    cutset_edges: tuple[tuple[str, str, float], ...]


@dataclass(frozen=True)
class BlockForm:
    """Two-component triangular splitting of a Laplacian.

    Row/column order inside each block follows ``upstream`` and
    ``downstream`` (input-appearance order).  The full Laplacian in the
    order ``upstream + downstream`` is exactly
    ``[[upstream_lap, 0], [-cut_matrix, downstream_block]]`` where
    ``downstream_block = downstream_lap + diag(cut_degrees)``.
    """

    upstream: tuple[str, ...]
    downstream: tuple[str, ...]
    upstream_lap: np.ndarray          # Laplacian of the upstream subnetwork
    downstream_lap: np.ndarray        # Laplacian of the downstream subnetwork
    cut_matrix: np.ndarray            # (n_down, n_up) cutset weights
    cut_degrees: np.ndarray           # row sums of cut_matrix
    network: Network = field(repr=False)

    def __post_init__(self):
        for name in ("upstream_lap", "downstream_lap", "cut_matrix", "cut_degrees"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def downstream_block(self) -> np.ndarray:
        """The diagonal block acting on the downstream nodes."""
        return self.downstream_lap + np.diag(self.cut_degrees)

    @property
    def node_order(self) -> tuple[str, ...]:
        return self.upstream + self.downstream

    def reassemble(self) -> np.ndarray:
        """Full Laplacian in block node order."""
        n1, n2 = len(self.upstream), len(self.downstream)
        full = np.zeros((n1 + n2, n1 + n2))
        full[:n1, :n1] = self.upstream_lap
        full[n1:, :n1] = -self.cut_matrix
        full[n1:, n1:] = self.downstream_block
        return full


def _weakly_connected(w: np.ndarray) -> bool:
    n = w.shape[0]
    adj = (w != 0) | (w.T != 0)
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        i = stack.pop()
        for j in np.flatnonzero(adj[i]):
            if not seen[j]:
                seen[j] = True
                stack.append(int(j))
    return bool(seen.all())


def network_from_edges(edges, labels=None) -> Network:
    """Build a network from (src, dst, weight) triples.

    Node order is first-appearance order over the edge list (src before
    dst within a row) unless ``labels`` pins it explicitly.
    """
    edges = [(str(s), str(d), float(w)) for s, d, w in edges]
    if labels is None:
        labels = []
        for s, d, _ in edges:
            if s not in labels:
                labels.append(s)
            if d not in labels:
                labels.append(d)
    labels = [str(x) for x in labels]
    idx = {lab: k for k, lab in enumerate(labels)}
    w = np.zeros((len(labels), len(labels)))
    for s, d, wt in edges:
        if w[idx[d], idx[s]] != 0.0:
            raise ValueError(f"duplicate edge {s}->{d}")
        w[idx[d], idx[s]] = wt
    return Network(tuple(labels), w)


def load_network(text: str) -> Network:
    """Parse an edge-list CSV document into a :class:`Network`.

    Format: header ``src,dst,weight``, one edge per row, ``#`` starts a
    comment line, UTF-8, LF or CRLF.  Weights must be finite nonnegative
    decimals; self-loops and duplicate (src, dst) rows are rejected.  The
    loaded network must be weakly connected.  All failures raise
    :class:`EdgeListError` carrying the offending line number.
    """
    rows = []
    header_seen = False
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if not header_seen:
            if [p.lower() for p in parts] != ["src", "dst", "weight"]:
                raise EdgeListError("expected header 'src,dst,weight'", line=lineno)
            header_seen = True
            continue
        if len(parts) != 3:
            raise EdgeListError(f"expected 3 fields, got {len(parts)}", line=lineno)
        src, dst, wtext = parts
        if not src or not dst:
            raise EdgeListError("empty node identifier", line=lineno)
        try:
            w = float(wtext)
        except ValueError:
            raise EdgeListError(f"cannot parse weight {wtext!r}", line=lineno) from None
        if not np.isfinite(w):
            raise EdgeListError(f"non-finite weight {wtext!r}", line=lineno)
        if w < 0:
            raise EdgeListError(f"negative weight {w}", line=lineno)
        if src == dst:
            raise EdgeListError(f"self-loop on node {src!r}", line=lineno)
        rows.append((lineno, src, dst, w))
    if not header_seen:
        raise EdgeListError("empty document (missing header)", line=1)
    if not rows:
        raise EdgeListError("no edges", line=1)

    labels: list[str] = []
    seen_pairs: dict[tuple[str, str], int] = {}
    for lineno, src, dst, _ in rows:
        if (src, dst) in seen_pairs:
            raise EdgeListError(
                f"duplicate edge {src}->{dst} (first on line {seen_pairs[(src, dst)]})",
                line=lineno,
            )
        seen_pairs[(src, dst)] = lineno
        if src not in labels:
            labels.append(src)
        if dst not in labels:
            labels.append(dst)

    idx = {lab: k for k, lab in enumerate(labels)}
    w = np.zeros((len(labels), len(labels)))
    for _, src, dst, wt in rows:
        w[idx[dst], idx[src]] = wt
    try:
        return Network(tuple(labels), w)
    except ValueError as exc:
        raise EdgeListError(str(exc)) from exc


def read_network(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return load_network(fh.read())


def network_to_json(net: Network) -> dict:
    """JSON-ready document: ``{"nodes": [...], "edges": [{src,dst,w}]}``."""
    return {
        "nodes": list(net.labels),
        "edges": [{"src": s, "dst": d, "w": w} for s, d, w in net.edges()],
    }


def network_from_json(doc) -> Network:
    """Inverse of :func:`network_to_json`; accepts a dict or a JSON string."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    edges = [(e["src"], e["dst"], e["w"]) for e in doc["edges"]]
    return network_from_edges(edges, labels=doc.get("nodes"))


def laplacian(net: Network) -> Laplacian:
    """``L = D - W`` with ``D`` the diagonal of row sums of ``W``."""
    deg = net.weights.sum(axis=1)
    return Laplacian(np.diag(deg) - net.weights, deg)


def _tarjan_sccs(adj: list[list[int]]) -> list[list[int]]:
    """Iterative Tarjan; components in reverse topological discovery order."""
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    sccs: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            while pi < len(adj[v]):
                u = adj[v][pi]
                pi += 1
                if index[u] == -1:
                    work[-1] = (v, pi)
                    work.append((u, 0))
                    advanced = True
                    break
                if on_stack[u]:
                    low[v] = min(low[v], index[u])
            if advanced:
                continue
            work.pop()
            if low[v] == index[v]:
                comp = []
                while True:
                    u = stack.pop()
                    on_stack[u] = False
                    comp.append(u)
                    if u == v:
                        break
                sccs.append(comp)
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return sccs


def decompose(net: Network) -> Decomposition:
    """Strongly connected components, condensation DAG, and cutset edges."""
    w = net.weights
    n = net.n
    adj = [list(np.flatnonzero(w[:, j]).astype(int)) for j in range(n)]  # j -> its targets
    sccs = _tarjan_sccs(adj)
    # deterministic numbering: by smallest contained node index
    sccs.sort(key=min)
    comp_of = np.empty(n, dtype=int)
    for k, comp in enumerate(sccs):
        for v in comp:
            comp_of[v] = k
    components = tuple(tuple(net.labels[v] for v in sorted(comp)) for comp in sccs)

    cond = set()
    cutset = []
    dst_idx, src_idx = np.nonzero(w)
    order = np.lexsort((dst_idx, src_idx))
    for k in order:
        i, j = int(dst_idx[k]), int(src_idx[k])  # edge j -> i
        if comp_of[j] != comp_of[i]:
            cond.add((int(comp_of[j]), int(comp_of[i])))
            cutset.append((net.labels[j], net.labels[i], float(w[i, j])))
    return Decomposition(components, tuple(sorted(cond)), tuple(cutset))


def has_rooted_spanning_tree(net: Network) -> bool:
    """True iff some node reaches every other node along directed paths.

    Equivalent to the condensation having exactly one source component.
    """
    dec = decompose(net)
    in_deg = [0] * len(dec.components)
    for _, b in dec.condensation:
        in_deg[b] += 1
    return sum(1 for d in in_deg if d == 0) == 1


def _strongly_connected_subset(net: Network, idx: np.ndarray) -> bool:
    if len(idx) == 1:
        return True
    sub = net.weights[np.ix_(idx, idx)]
    adj = [list(np.flatnonzero(sub[:, j]).astype(int)) for j in range(len(idx))]
    return len(_tarjan_sccs(adj)) == 1


def block_form(net: Network, upstream, downstream) -> BlockForm:
    """Split a network into an upstream and a downstream block.

    Preconditions: the two node sets partition the network, each induces a
    strongly connected (or singleton) subnetwork, there are no edges from
    ``downstream`` back to ``upstream``, and at least one cutset edge runs
    ``upstream -> downstream``.  Violations raise :class:`BlockFormError`.
    """
    up_set = {str(x) for x in upstream}
    down_set = {str(x) for x in downstream}
    if up_set & down_set or up_set | down_set != set(net.labels):
        raise BlockFormError("upstream/downstream do not partition the node set")
    up_idx = np.array([k for k, lab in enumerate(net.labels) if lab in up_set], dtype=int)
    down_idx = np.array([k for k, lab in enumerate(net.labels) if lab in down_set], dtype=int)

    w = net.weights
    if np.any(w[np.ix_(up_idx, down_idx)] != 0):
        raise BlockFormError("edges from downstream to upstream exist")
    cut = w[np.ix_(down_idx, up_idx)]
    if not np.any(cut):
        raise BlockFormError("cutset is empty (no upstream -> downstream edge)")
    if not _strongly_connected_subset(net, up_idx):
        raise BlockFormError("upstream set is not strongly connected")
    if not _strongly_connected_subset(net, down_idx):
        raise BlockFormError("downstream set is not strongly connected")

    full = laplacian(net).matrix
    l1 = full[np.ix_(up_idx, up_idx)]
    cut_deg = cut.sum(axis=1)
    # slice the exact diagonal block, then peel off the cutset degrees
    l2 = full[np.ix_(down_idx, down_idx)] - np.diag(cut_deg)
    return BlockForm(
        upstream=tuple(net.labels[k] for k in up_idx),
        downstream=tuple(net.labels[k] for k in down_idx),
        upstream_lap=l1,
        downstream_lap=l2,
        cut_matrix=cut,
        cut_degrees=cut_deg,
        network=net,
    )
