"""First-order response of the spectral gap to structural edits.

Everything here answers one question: if the weight of a (possibly absent)
link changes a little, how does the gap eigenvalue move?  The general path
uses the left/right eigenvector pair of the full Laplacian.  For networks
that split into an upstream and a downstream block, the block path computes
the same derivative from downstream quantities plus a resolvent solve, which
is both cheaper and structurally informative: the sign of the slope is
readable off a small coupling matrix.  A finite-difference probe with
eigenvalue-branch matching serves as an independent check on either path.

Slopes are derivatives with respect to a scale parameter ``eps`` multiplying
the whole perturbation, evaluated at ``eps = 0``; each edge entry ``dw``
fixes that edge's share of the direction.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import BlockFormError, BranchError, DegenerateGapError
from .network import BlockForm, Network, block_form, decompose
from .spectra import (SpectralGap, _as_matrix, _inverse_iteration, _orient,
                      _realify, eigen_all, spectral_gap)

__all__ = [
    "Perturbation",
    "edge_perturbation",
    "perturbation",
    "sensitivity_general",
    "feedback_slope",
    "BlockEigenview",
    "block_eigenview",
    "BlockSensitivity",
    "sensitivity_block",
    "CutsetSensitivity",
    "cutset_sensitivity",
    "fd_oracle",
    "RankedLink",
    "classify_links",
]

#: |Re slope| at or below this counts as "neutral" in link rankings.
VERDICT_TOL = 1e-10


@dataclass(frozen=True)
class Perturbation:
    """A direction in weight space, stored as edge deltas plus its Laplacian.

    ``matrix`` is the derivative of the Laplacian along this direction (node
    order = ``labels``): for each edge ``src -> dst`` with delta ``dw`` it
    adds ``dw`` at (dst, dst) and ``-dw`` at (dst, src), keeping row sums at
    zero.  ``eps_max`` is the largest scale that keeps every touched weight
    nonnegative (``inf`` when no delta is negative).
    """

    labels: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix, dtype=float)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def eps_max(self, net: Network) -> float:
        self._check(net)
        lim = np.inf
        for src, dst, dw in self.edges:
            if dw < 0:
                lim = min(lim, net.weight(src, dst) / (-dw))
        return float(lim)

    def apply(self, net: Network, eps: float = 1.0) -> Network:
        """Network with every edge delta scaled by ``eps`` applied."""
        self._check(net)
        out = net
        for src, dst, dw in self.edges:
            out = out.with_edge(src, dst, eps * dw)
        return out

    def _check(self, net: Network):
        if net.labels != self.labels:
            raise ValueError("perturbation was built for a different node order")


def perturbation(net: Network, edges) -> Perturbation:
    """Perturbation from (src, dst, dw) triples.

    Deltas may be negative only on existing edges; duplicates and
    self-loops are rejected.
    """
    seen = set()
    cleaned = []
    n = net.n
    mat = np.zeros((n, n))
    for src, dst, dw in edges:
        src, dst, dw = str(src), str(dst), float(dw)
        i, j = net.index(dst), net.index(src)
        if i == j:
            raise ValueError(f"self-loop {src}->{dst}")
        if (src, dst) in seen:
            raise ValueError(f"duplicate edge {src}->{dst}")
        seen.add((src, dst))
        if dw == 0.0:
            raise ValueError(f"zero delta on {src}->{dst}")
        if dw < 0.0 and net.weights[i, j] == 0.0:
            raise ValueError(f"cannot decrease absent edge {src}->{dst}")
        mat[i, i] += dw
        mat[i, j] -= dw
        cleaned.append((src, dst, dw))
    if not cleaned:
        raise ValueError("empty perturbation")
    return Perturbation(net.labels, tuple(cleaned), mat)


def edge_perturbation(net: Network, src: str, dst: str, dw: float = 1.0) -> Perturbation:
    return perturbation(net, [(src, dst, dw)])


def _require_simple(gap: SpectralGap):
    if not gap.simple:
        raise DegenerateGapError(
            f"gap {gap.value:.6g} is within {gap.separation:.3g} of another "
            "eigenvalue; first-order slopes are undefined"
        )


def sensitivity_general(net: Network, pert: Perturbation, gap: SpectralGap | None = None,
                        seed: int = 0) -> complex:
    """d(gap)/d(eps) from the left/right eigenvector pair of the Laplacian."""
    pert._check(net)
    if gap is None:
        gap = spectral_gap(net, seed=seed)
    _require_simple(gap)
    denom = np.vdot(gap.left, gap.right)
    return complex(np.vdot(gap.left, pert.matrix @ gap.right) / denom)


def feedback_slope(left_vec, coupling, right_vec) -> complex:
    """Gap slope from downstream eigenvectors and a coupling matrix.

    Evaluates ``-<left, coupling @ right> / <left, right>`` -- the closed
    form the block path produces once the coupling matrix is known.
    Exposed separately so the formula can be checked on hand-built inputs.
    """
    lv = np.asarray(left_vec)
    rv = np.asarray(right_vec)
    return complex(-np.vdot(lv, np.asarray(coupling) @ rv) / np.vdot(lv, rv))


def _block_vectors(bf: BlockForm, value: complex, seed: int):
    """Left/right eigenvector pair of the downstream block at ``value``."""
    b = bf.downstream_block
    scale = max(1.0, float(np.linalg.norm(b, np.inf)))
    eig_b = eigen_all(b)
    if np.min(np.abs(eig_b - value)) > 1e-8 * scale:
        raise BlockFormError(
            f"gap {value:.6g} is not an eigenvalue of the downstream block; "
            "the block path does not apply"
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    s = _orient(_inverse_iteration(b, value, rng, scale))
    q = _orient(_inverse_iteration(b.conj().T, np.conj(value), rng, scale))
    if abs(complex(value).imag) <= 1e-9 * scale:
        s = _realify(s)
        q = _realify(q)
    s = s / np.linalg.norm(s)
    q = q / np.linalg.norm(q)
    if abs(np.vdot(q, s)) <= 1e-12:
        raise BlockFormError("downstream eigenvalue is defective; block path refused")
    return q, s


def _resolvent_solve(bf: BlockForm, value: complex, rhs: np.ndarray) -> np.ndarray:
    l1 = bf.upstream_lap
    eig_l1 = eigen_all(l1)
    scale = max(1.0, float(np.linalg.norm(l1, np.inf)))
    if np.min(np.abs(eig_l1 - value)) <= 1e-10 * scale:
        raise BlockFormError(
            f"gap {value:.6g} is also an eigenvalue of the upstream block; "
            "the resolvent is singular"
        )
    a = l1 - value * np.eye(l1.shape[0])
    return scipy.linalg.solve(a, rhs)


@dataclass(frozen=True)
class BlockEigenview:
    """How the gap eigenpair of a two-block network splits across the blocks.

    When the gap lives in the downstream block, the full right eigenvector
    is (0, downstream_right) and the full left eigenvector is
    (response, downstream_left), with
    ``response^H = downstream_left^H C (L1 - gap)^-1``.  ``upstream_right``
    is kept explicitly (always zero) because its vanishing is what makes
    cutset-weight changes first-order invisible on the right.
    """

    value: complex
    downstream_left: np.ndarray
    downstream_right: np.ndarray
    response: np.ndarray
    upstream_right: np.ndarray


def block_eigenview(bf: BlockForm, gap: SpectralGap | None = None,
                    seed: int = 0) -> BlockEigenview:
    """Split the gap eigenpair of a two-block network across its blocks.

    Raises :class:`BlockFormError` when the gap does not sit in the
    downstream block (or is shared with the upstream one, which makes the
    resolvent singular).
    """
    net = bf.network
    if gap is None:
        gap = spectral_gap(net, seed=seed)
    _require_simple(gap)
    q, s = _block_vectors(bf, gap.value, seed)
    response = scipy.linalg.solve(
        (bf.upstream_lap - gap.value * np.eye(len(bf.upstream))).conj().T,
        bf.cut_matrix.conj().T @ q,
    )
    response = _realify(np.ascontiguousarray(response))
    upstream_right = np.zeros(len(bf.upstream))
    for v in (q, s, response, upstream_right):
        v.flags.writeable = False
    return BlockEigenview(
        value=complex(gap.value), downstream_left=q, downstream_right=s,
        response=response, upstream_right=upstream_right,
    )


@dataclass(frozen=True)
class BlockSensitivity:
    """Slope of the gap under feedback links, with the pieces that build it.

    For new links running downstream -> upstream with weights ``delta``
    (entry [upstream node, downstream node]), the slope is
    ``feedback_slope(downstream_left, coupling, downstream_right)`` where
    ``coupling = C (L1 - gap)^-1 delta`` maps downstream deviations through
    the upstream block and back via the existing cutset ``C``.

    ``response`` is the upstream part of the full left eigenvector
    (``response^H = downstream_left^H C (L1 - gap)^-1``) and
    ``upstream_right`` the upstream part of the full right eigenvector,
    which the triangular structure forces to zero.  ``general_slope``
    repeats the computation on the full Laplacian; the two must agree, and
    disagreement raises rather than returning silently.
    """

    slope: complex
    coupling: np.ndarray
    response: np.ndarray
    upstream_right: np.ndarray
    downstream_left: np.ndarray
    downstream_right: np.ndarray
    general_slope: complex


def sensitivity_block(bf: BlockForm, pert: Perturbation, gap: SpectralGap | None = None,
                      seed: int = 0) -> BlockSensitivity:
    """Gap slope for feedback links via the downstream block and a resolvent.

    Every edge of ``pert`` must run from a downstream node to an upstream
    node.  The gap must be simple, must be an eigenvalue of the downstream
    block, and must not be an eigenvalue of the upstream block.
    """
    net = bf.network
    pert._check(net)
    up_set, down_set = set(bf.upstream), set(bf.downstream)
    for src, dst, _ in pert.edges:
        if src not in down_set or dst not in up_set:
            raise BlockFormError(
                f"edge {src}->{dst} is not a feedback link (downstream -> upstream)"
            )

    if gap is None:
        gap = spectral_gap(net, seed=seed)
    _require_simple(gap)
    q, s = _block_vectors(bf, gap.value, seed)

    delta = np.zeros((len(bf.upstream), len(bf.downstream)))
    up_index = {lab: k for k, lab in enumerate(bf.upstream)}
    down_index = {lab: k for k, lab in enumerate(bf.downstream)}
    for src, dst, dw in pert.edges:
        delta[up_index[dst], down_index[src]] = dw

    coupling = bf.cut_matrix @ _resolvent_solve(bf, gap.value, delta)
    # response^H = q^H C (L1 - gap)^{-1}; solve on the conjugate transpose
    response = scipy.linalg.solve(
        (bf.upstream_lap - gap.value * np.eye(len(bf.upstream))).conj().T,
        bf.cut_matrix.conj().T @ q,
    )
    slope = feedback_slope(q, coupling, s)

    general = sensitivity_general(net, pert, gap=gap)
    if abs(slope - general) > 1e-9 * max(1.0, abs(slope)):
        raise BlockFormError(
            f"block slope {slope:.12g} disagrees with the general path {general:.12g}"
        )
    coupling = _realify(np.ascontiguousarray(coupling))
    response = _realify(np.ascontiguousarray(response))
    upstream_right = np.zeros(len(bf.upstream))
    for v in (coupling, response, upstream_right, q, s):
        v.flags.writeable = False
    return BlockSensitivity(
        slope=slope, coupling=coupling, response=response,
        upstream_right=upstream_right, downstream_left=q, downstream_right=s,
        general_slope=complex(general),
    )


@dataclass(frozen=True)
class CutsetSensitivity:
    """Slope of the gap when cutset links (upstream -> downstream) change.

    Only the added in-degrees matter at first order:
    ``slope = <q, D s> / <q, s>`` with ``D`` the diagonal of per-node added
    in-weight.  With nonnegative deltas and the Perron pair positive, the
    slope is nonnegative: strengthening the cutset can only push the gap up
    (or leave it, when the deltas miss the support of the pair).
    """

    slope: float
    downstream_left: np.ndarray
    downstream_right: np.ndarray
    general_slope: complex


def cutset_sensitivity(bf: BlockForm, pert: Perturbation, gap: SpectralGap | None = None,
                       seed: int = 0) -> CutsetSensitivity:
    """Gap slope for changes to upstream -> downstream links."""
    net = bf.network
    pert._check(net)
    up_set, down_set = set(bf.upstream), set(bf.downstream)
    for src, dst, _ in pert.edges:
        if src not in up_set or dst not in down_set:
            raise BlockFormError(
                f"edge {src}->{dst} is not a cutset link (upstream -> downstream)"
            )

    if gap is None:
        gap = spectral_gap(net, seed=seed)
    _require_simple(gap)
    if abs(gap.value.imag) > 1e-9 * max(1.0, abs(gap.value)):
        raise BlockFormError("cutset slope formula assumes a real (Perron) gap")
    q, s = _block_vectors(bf, gap.value, seed)

    added = np.zeros(len(bf.downstream))
    down_index = {lab: k for k, lab in enumerate(bf.downstream)}
    for _, dst, dw in pert.edges:
        added[down_index[dst]] += dw
    slope = np.vdot(q, added * s) / np.vdot(q, s)

    general = sensitivity_general(net, pert, gap=gap)
    if abs(slope - general) > 1e-9 * max(1.0, abs(slope)):
        raise BlockFormError(
            f"cutset slope {slope:.12g} disagrees with the general path {general:.12g}"
        )
    for v in (q, s):
        v.flags.writeable = False
    return CutsetSensitivity(
        slope=float(np.real(slope)), downstream_left=q, downstream_right=s,
        general_slope=complex(general),
    )


def _matched_branch(mat: np.ndarray, target: complex, scale: float) -> complex:
    lam = np.linalg.eigvals(mat)
    d = np.abs(lam - target)
    order = np.argsort(d)
    d1 = float(d[order[0]])
    d2 = float(d[order[1]]) if len(lam) > 1 else np.inf
    if d2 <= max(2.0 * d1, 1e-12 * scale):
        raise BranchError(
            f"eigenvalue branches at distance {d1:.3g} and {d2:.3g} from "
            f"{target:.6g} cannot be told apart; shrink the step"
        )
    return complex(lam[order[0]])


def fd_oracle(net, pert: Perturbation, eps: float = 1e-6, scheme: str = "forward") -> complex:
    """Finite-difference slope of the gap along ``pert``.

    The default is the plain forward quotient
    ``(gap(L + eps*Ltilde) - gap(L)) / eps``, which carries an O(eps) bias;
    ``scheme="central"`` cancels the second-order term at the cost of a
    second eigensolve.  Eigenvalue branches are matched by nearest distance
    in each probe, and :class:`BranchError` is raised when the match is
    ambiguous (the runner-up branch sits within a factor two of the best).
    This is the independent check for the eigenvector-based slopes.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    mat = _as_matrix(net)
    if isinstance(net, Network):
        pert._check(net)
    scale = max(1.0, float(np.linalg.norm(mat, np.inf)))
    lam = eigen_all(mat)
    nonzero = lam[np.abs(lam) > 1e-9 * scale]
    if len(nonzero) != mat.shape[0] - 1:
        raise DegenerateGapError("zero eigenvalue is not simple")
    target = complex(nonzero[0])

    plus = _matched_branch(mat + eps * pert.matrix, target, scale)
    if scheme == "forward":
        return (plus - target) / eps
    if scheme == "central":
        minus = _matched_branch(mat - eps * pert.matrix, target, scale)
        return (plus - minus) / (2.0 * eps)
    raise ValueError(f"unknown scheme {scheme!r}")


@dataclass(frozen=True)
class RankedLink:
    """One row of a link ranking.

    ``coupling`` holds the block-path coupling matrix when that path
    applied to the candidate (single feedback link on a two-component
    network), else ``None``.
    """

    src: str
    dst: str
    dw: float
    slope: complex
    verdict: str
    coupling: np.ndarray | None = None


def _verdict(slope: complex) -> str:
    if slope.real < -VERDICT_TOL:
        return "decreases"
    if slope.real > VERDICT_TOL:
        return "increases"
    return "neutral"


def _two_block_split(net: Network) -> BlockForm | None:
    """The unique upstream/downstream split, when the network has one."""
    dec = decompose(net)
    if len(dec.components) != 2 or len(dec.condensation) != 1:
        return None
    a, b = dec.condensation[0]
    try:
        return block_form(net, dec.components[a], dec.components[b])
    except BlockFormError:
        return None


def classify_links(net: Network, candidates="all-absent-edges", dw: float = 1.0,
                   top: int | None = None, seed: int = 0) -> list[RankedLink]:
    """Rank candidate link edits by their first-order effect on the gap.

    ``candidates`` selects the edit family:

    - ``"all-absent-edges"`` (or ``"absent"``): every directed link not
      present in the network;
    - ``"absent-symmetric"``: every node pair with no link either way,
      adding both directions at once (``dw`` each);
    - ``"cutset"``: reinforcement of each existing between-component link;
    - an explicit iterable of ``(src, dst)`` or ``(src, dst, dw)`` tuples.

    Rows come back sorted by slope real part ascending (most gap-decreasing
    first), then imaginary part, then node order.  On two-component
    networks, single feedback candidates additionally carry the block-path
    coupling matrix, cross-checked against the general slope.
    """
    gap = spectral_gap(net, seed=seed)
    _require_simple(gap)
    denom = np.vdot(gap.left, gap.right)

    entries: list[tuple[tuple[str, str, float], ...]] = []
    if isinstance(candidates, str):
        if candidates in ("all-absent-edges", "absent"):
            for j, src in enumerate(net.labels):
                for i, dst in enumerate(net.labels):
                    if i != j and net.weights[i, j] == 0.0:
                        entries.append(((src, dst, dw),))
        elif candidates == "absent-symmetric":
            for a in range(net.n):
                for b in range(a + 1, net.n):
                    if net.weights[a, b] == 0.0 and net.weights[b, a] == 0.0:
                        la, lb = net.labels[a], net.labels[b]
                        entries.append(((la, lb, dw), (lb, la, dw)))
        elif candidates == "cutset":
            for src, dst, _w in decompose(net).cutset_edges:
                entries.append(((src, dst, dw),))
        else:
            raise ValueError(f"unknown candidate family {candidates!r}")
    else:
        for item in candidates:
            item = tuple(item)
            if len(item) == 2:
                entries.append(((str(item[0]), str(item[1]), dw),))
            elif len(item) == 3:
                entries.append(((str(item[0]), str(item[1]), float(item[2])),))
            else:
                raise ValueError(f"candidate {item!r} is not (src, dst[, dw])")

    bf = _two_block_split(net)
    down_set = set(bf.downstream) if bf is not None else set()
    up_set = set(bf.upstream) if bf is not None else set()

    rows = []
    for edges in entries:
        pert = perturbation(net, edges)
        slope = complex(np.vdot(gap.left, pert.matrix @ gap.right) / denom)
        src, dst, d0 = edges[0]
        coupling = None
        if (bf is not None and len(edges) == 1
                and src in down_set and dst in up_set):
            try:
                coupling = sensitivity_block(bf, pert, gap=gap, seed=seed).coupling
            except BlockFormError:
                coupling = None
        rows.append(RankedLink(src, dst, d0, slope, _verdict(slope), coupling))

    rows.sort(key=lambda r: (r.slope.real, r.slope.imag,
                             net.index(r.src), net.index(r.dst)))
    if top is not None:
        rows = rows[:max(0, int(top))]
    return rows
