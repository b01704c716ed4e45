"""Laplacian spectra: the spectral gap, eigenvectors, and positivity certificates.

The spectral gap of a directed Laplacian is the nonzero eigenvalue with the
smallest real part (ties broken by imaginary part).  Its real part governs
the linear stability of the synchronized state, so everything downstream --
link ranking, stability margins, critical-coupling comparisons -- keys off
the value computed here.

Eigenvalues come from the dense QR solver; the associated left/right
eigenvector pair is recomputed independently by seeded inverse iteration so
the result does not depend on LAPACK's (unspecified) eigenvector phase
conventions.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DegenerateGapError, DegenerateZeroError
from .network import Laplacian, Network, laplacian

__all__ = [
    "eigen_all",
    "SpectralGap",
    "spectral_gap",
    "PerronCertificate",
    "perron_certificate",
    "GershgorinReport",
    "gershgorin",
]

#: |lambda| <= ZERO_TOL_FACTOR * max(1, ||L||_inf) counts as a zero mode.
ZERO_TOL_FACTOR = 1e-9
#: the gap is "simple" when no other nonzero eigenvalue sits closer than
#: GAP_TOL_FACTOR * max(1, ||L||_inf).
GAP_TOL_FACTOR = 1e-8
#: eigenvalues of a non-normal matrix closer than this (times scale) are a
#: single numerically multiple eigenvalue; ~100*sqrt(machine eps), the
#: resolution limit of a backward-stable dense solver on a defective pair.
CLUSTER_TOL_FACTOR = 1e-6


def _as_matrix(obj) -> np.ndarray:
    if isinstance(obj, Network):
        return laplacian(obj).matrix
    if isinstance(obj, Laplacian):
        return obj.matrix
    m = np.asarray(obj, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    return m


def _refine_clusters(lam: np.ndarray, mat: np.ndarray) -> np.ndarray:
    """Snap numerically coincident eigenvalues of a non-normal matrix to
    their cluster mean.

    A defective (Jordan) eigenvalue of multiplicity k is resolved by the QR
    solver only to O(eps^(1/k)); the individual cluster members are noise.
    The cluster mean is a trace of the invariant subspace and accurate to
    O(eps), so members closer than the solver's resolution are reported at
    that mean.  Normal matrices are left untouched: their eigenvalues are
    perfectly conditioned, and genuinely close pairs must survive.
    """
    scale = max(1.0, float(np.linalg.norm(mat, np.inf)))
    tol = CLUSTER_TOL_FACTOR * scale
    commutator = mat @ mat.T - mat.T @ mat
    if np.max(np.abs(commutator)) <= 1e-12 * scale * scale:
        return lam

    n = len(lam)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(lam[i] - lam[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = lam.copy()
    for members in groups.values():
        if len(members) > 1:
            out[members] = lam[members].mean()
    return out


def eigen_all(obj) -> np.ndarray:
    """All eigenvalues, sorted by (real part, imaginary part) ascending.

    Numerically multiple eigenvalues of non-normal matrices are reported
    at their cluster mean (see :func:`_refine_clusters`).
    """
    mat = _as_matrix(obj)
    lam = np.linalg.eigvals(mat)
    lam = _refine_clusters(lam, mat)
    return lam[np.lexsort((lam.imag, lam.real))]


@dataclass(frozen=True)
class SpectralGap:
    """The gap eigenvalue with a matched left/right eigenvector pair.

    ``right`` has unit 2-norm with its largest-magnitude entry rotated to
    the positive real axis; ``left`` satisfies ``left.conj() @ L ==
    value * left.conj()`` and is scaled so ``left.conj() @ right == 1``.
    ``separation`` is the distance from ``value`` to the nearest other
    nonzero eigenvalue, and ``simple`` states whether that clearance
    exceeds the working tolerance (first-order sensitivity requires it).
    """

    value: complex
    right: np.ndarray
    left: np.ndarray
    eigenvalues: np.ndarray
    separation: float
    simple: bool
    residual: float

    @property
    def real_part(self) -> float:
        return float(self.value.real)


def _split_zero(lam: np.ndarray, scale: float):
    zero_tol = ZERO_TOL_FACTOR * scale
    is_zero = np.abs(lam) <= zero_tol
    n_zero = int(is_zero.sum())
    if n_zero != 1:
        raise DegenerateZeroError(
            f"found {n_zero} eigenvalues within {zero_tol:g} of zero; "
            "the network must have a rooted spanning tree (exactly one zero mode)"
        )
    return lam[~is_zero]


def _inverse_iteration(mat: np.ndarray, shift: complex, rng, scale: float,
                       max_iter: int = 60) -> np.ndarray:
    """Dominant near-null vector of ``mat - shift*I`` from a seeded start."""
    n = mat.shape[0]
    eye = np.eye(n)
    # an exactly singular LU is possible when the shift is exact; treat the
    # zero-pivot warning as a miss and nudge the shift off by epsilon
    for attempt in range(4):
        eps = scale * 1e-13 * (10.0 ** attempt) * (attempt > 0)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
                lu = scipy.linalg.lu_factor(mat - (shift + eps) * eye)
        except (scipy.linalg.LinAlgError, scipy.linalg.LinAlgWarning):
            continue
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        x /= np.linalg.norm(x)
        for _ in range(max_iter):
            y = scipy.linalg.lu_solve(lu, x)
            ny = np.linalg.norm(y)
            if not np.isfinite(ny) or ny == 0.0:
                break
            x = y / ny
            res = np.linalg.norm(mat @ x - shift * x)
            if res <= 1e-12 * scale:
                return x
        else:
            # ran the full budget; accept if the residual is merely decent
            if np.linalg.norm(mat @ x - shift * x) <= 1e-8 * scale:
                return x
    raise ConvergenceError(f"inverse iteration did not converge for shift {shift:g}")


def _orient(vec: np.ndarray) -> np.ndarray:
    """Rotate the phase so the largest-magnitude entry is real positive."""
    k = int(np.argmax(np.abs(vec)))
    return vec * (np.abs(vec[k]) / vec[k])


def _realify(vec: np.ndarray) -> np.ndarray:
    """Drop a negligible imaginary part; keep the vector complex otherwise."""
    if np.max(np.abs(vec.imag)) <= 1e-8 * np.max(np.abs(vec.real)):
        return np.ascontiguousarray(vec.real)
    return vec


def spectral_gap(obj, seed: int = 0) -> SpectralGap:
    """Spectral gap of a Laplacian with its eigenvector pair.

    Raises :class:`DegenerateZeroError` when the zero eigenvalue is not
    simple.  A nearly repeated gap does *not* raise here -- the ``simple``
    flag carries that verdict so report code can still show the spectrum --
    but sensitivity routines refuse to use such a gap.
    """
    mat = _as_matrix(obj)
    scale = max(1.0, float(np.linalg.norm(mat, np.inf)))
    lam = eigen_all(mat)
    nonzero = _split_zero(lam, scale)
    value = complex(nonzero[0])

    others = nonzero[1:]
    separation = float(np.min(np.abs(others - value))) if len(others) else float("inf")
    simple = separation > GAP_TOL_FACTOR * scale

    rng = np.random.Generator(np.random.PCG64(seed))
    right = _inverse_iteration(mat, value, rng, scale)
    left = _inverse_iteration(mat.conj().T, np.conj(value), rng, scale)

    # one refinement pass: re-estimate the eigenvalue from the two-sided
    # Rayleigh quotient, then polish both vectors at the refined shift
    denom = np.vdot(left, right)
    if abs(denom) > 1e-13:
        refined = complex(np.vdot(left, mat @ right) / denom)
        if abs(refined - value) <= max(separation / 4, 1e-9 * scale):
            right = _inverse_iteration(mat, refined, rng, scale)
            left = _inverse_iteration(mat.conj().T, np.conj(refined), rng, scale)
            value = refined

    right = _orient(right)
    left = _orient(left)
    if abs(value.imag) <= 1e-9 * scale:
        value = complex(value.real)
        right = _realify(right)
        left = _realify(left)
    right = right / np.linalg.norm(right)
    denom = np.vdot(left, right)
    if abs(denom) <= 1e-12:
        raise DegenerateGapError(
            "left/right eigenvectors of the gap are numerically orthogonal; "
            "the eigenvalue is defective or too close to another branch"
        )
    left = left / np.conj(denom)

    residual = float(
        max(
            np.linalg.norm(mat @ right - value * right),
            np.linalg.norm(mat.conj().T @ left - np.conj(value) * left),
        )
    )
    eig_sorted = eigen_all(mat)
    eig_sorted.flags.writeable = False
    r = right.copy()
    r.flags.writeable = False
    l_ = left.copy()
    l_.flags.writeable = False
    return SpectralGap(
        value=value,
        right=r,
        left=l_,
        eigenvalues=eig_sorted,
        separation=separation,
        simple=bool(simple),
        residual=residual,
    )


@dataclass(frozen=True)
class PerronCertificate:
    """Positivity certificate for the real spectrum bound of a Z-matrix.

    For ``B`` with nonpositive off-diagonal entries, write ``B = s*I - N``
    with ``s = max(diag(B))`` so that ``N >= 0`` entrywise.  The smallest
    real part over the spectrum of ``B`` equals ``s`` minus the Perron root
    of ``N``, which a damped power iteration pins down without any general
    eigensolver; ``right_vec`` and ``left_vec`` are the associated
    (entrywise nonnegative, unit-norm) Perron vectors.  ``positive``
    certifies that every eigenvalue of ``B`` has real part strictly above
    zero.
    """

    shift: float
    nonneg: np.ndarray
    perron_root: float
    right_vec: np.ndarray
    left_vec: np.ndarray
    min_real_eig: float
    positive: bool
    iterations: int

    def __post_init__(self):
        for name in ("nonneg", "right_vec", "left_vec"):
            a = np.ascontiguousarray(getattr(self, name), dtype=float)
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    def summary(self) -> str:
        verdict = "positive" if self.positive else "NOT positive"
        return (
            f"min Re(eig) = {self.shift:.12g} - {self.perron_root:.12g} "
            f"= {self.min_real_eig:.12g} ({verdict})"
        )


def _power_iteration(damped: np.ndarray, start: np.ndarray, tol: float, max_iter: int):
    x = start / np.linalg.norm(start)
    rho_est = 0.0
    for it in range(1, max_iter + 1):
        y = damped @ x
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            return 0.0, x, it
        x = y / ny
        if abs(ny - rho_est) <= tol * max(1.0, ny):
            return ny, x, it
        rho_est = ny
    raise ConvergenceError(f"power iteration did not settle within {max_iter} steps")


def perron_certificate(block: np.ndarray, seed: int = 0,
                       tol: float = 1e-12, max_iter: int = 100_000) -> PerronCertificate:
    """Certify the minimum real eigenvalue of a Z-matrix via its Perron root.

    The power iteration runs on ``N + c*I`` with ``c = 0.5*max(1, s)``; the
    damping makes the Perron root strictly dominant even for matrices whose
    nonnegative part is periodic (e.g. a pure swap).  The root is
    cross-checked against the dense spectrum and must agree to 1e-8 of the
    matrix scale, otherwise :class:`ConvergenceError` is raised.
    """
    b = np.asarray(block, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError("expected a square matrix")
    off = b - np.diag(np.diag(b))
    if np.any(off > 0):
        raise ValueError("matrix has positive off-diagonal entries; not a Z-matrix")

    s = float(np.max(np.diag(b)))
    n_mat = s * np.eye(b.shape[0]) - b
    c = 0.5 * max(1.0, s)
    damped = n_mat + c * np.eye(b.shape[0])

    rng = np.random.Generator(np.random.PCG64(seed))
    start = rng.random(b.shape[0]) + 0.5  # strictly positive start
    rho_r, right, it_r = _power_iteration(damped, start, tol, max_iter)
    rho_l, left, it_l = _power_iteration(damped.T, start, tol, max_iter)

    perron = 0.5 * (rho_r + rho_l) - c
    scale = max(1.0, float(np.linalg.norm(b, np.inf)))
    direct = float(np.max(eigen_all(n_mat).real))
    if abs(perron - direct) > 1e-8 * scale or abs(rho_r - rho_l) > 1e-8 * scale:
        raise ConvergenceError(
            f"power iteration estimate {perron:.12g} disagrees with the dense "
            f"spectrum {direct:.12g}"
        )
    min_real = s - perron
    return PerronCertificate(
        shift=s,
        nonneg=n_mat,
        perron_root=perron,
        right_vec=right,
        left_vec=left,
        min_real_eig=min_real,
        positive=bool(min_real > 0.0),
        iterations=max(it_r, it_l),
    )


@dataclass(frozen=True)
class GershgorinReport:
    """Row disks of a matrix and the positivity bound they imply.

    ``lower_bound`` = min over rows of (center - radius).  When it is
    nonnegative every eigenvalue has nonnegative real part; this is cruder
    than the Perron certificate but requires no iteration at all.
    """

    centers: np.ndarray
    radii: np.ndarray
    lower_bound: float
    nonnegative: bool
    diagonally_dominant: bool


def gershgorin(block: np.ndarray) -> GershgorinReport:
    b = np.asarray(block, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError("expected a square matrix")
    centers = np.diag(b).copy()
    radii = np.abs(b - np.diag(np.diag(b))).sum(axis=1)
    lower = float(np.min(centers - radii))
    centers.flags.writeable = False
    radii.flags.writeable = False
    return GershgorinReport(
        centers=centers,
        radii=radii,
        lower_bound=lower,
        nonnegative=bool(lower >= 0.0),
        diagonally_dominant=bool(np.all(np.abs(np.diag(b)) >= radii)),
    )
