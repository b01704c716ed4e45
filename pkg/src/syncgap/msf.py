"""Master-stability evaluation: Lyapunov exponents of the variational blocks,
the critical coupling, and the synchronizability verdict.

Linearizing the coupled network around the synchronous orbit and
diagonalizing over the Laplacian spectrum leaves one three-dimensional
variational block per eigenvalue: ``v' = (Df(x(t)) - nu*Gamma) v`` with
``nu`` the product of coupling strength and eigenvalue.  The largest
Lyapunov exponent of that block as a function of ``nu`` is the master
stability curve; its first downward zero crossing is the critical coupling,
and the network synchronizes when coupling times gap clears it.

Exponents come from the standard renormalize-and-average tangent method on
a jitted RK4 stepper.  Only real ``nu`` is supported: both shipped scenarios
have purely real transverse spectra, and the complex half-plane would
require a complex-state integrator for no current benefit.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConvergenceError, NoCrossingError, SimulationError
from .models import ModelSpec
from .network import Network
from .spectra import spectral_gap

__all__ = [
    "LyapunovEstimate",
    "lyapunov_max",
    "MsfCurve",
    "critical_coupling",
    "StabilityReport",
    "stability_check",
]

#: fixed pre-transient state from which every reference orbit starts
X_START = (0.1, 0.2, 0.3)


@dataclass(frozen=True)
class LyapunovEstimate:
    """Largest Lyapunov exponent with a block-averaged standard error."""

    value: float
    stderr: float
    renorms: int
    averaging_time: float

    def __float__(self) -> float:
        return self.value


def lyapunov_max(model: ModelSpec, nu: float, gamma, *, dt: float = 1e-3,
                 t_transient: float = 500.0, t_total: float = 2e4,
                 renorm_interval: float = 1.0, seed: int = 0,
                 n_blocks: int = 20, stderr_tol: float | None = None) -> LyapunovEstimate:
    """Largest Lyapunov exponent of ``v' = (Df(x(t)) - nu*gamma) v``.

    The reference orbit starts from ``X_START``, runs ``t_transient`` time
    units to settle on the attractor, then the tangent (seeded random
    direction) is renormalized every ``renorm_interval``.  The standard
    error comes from splitting the log-growth record into ``n_blocks``
    contiguous blocks.  Same seed and steps give a bitwise identical
    result.
    """
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    if dt <= 0 or t_total <= 0 or renorm_interval <= 0:
        raise ValueError("dt, t_total and renorm_interval must be positive")
    gamma = np.ascontiguousarray(gamma, dtype=float)
    if gamma.shape != (3, 3):
        raise ValueError("gamma must be a 3x3 matrix")

    mid = model.kernel_id
    params = model.kernel_params
    x0 = _kernels.relax(mid, params, np.asarray(X_START, dtype=float), dt,
                        int(round(t_transient / dt)))
    if not np.all(np.isfinite(x0)):
        raise SimulationError("reference orbit escaped during the transient")

    rng = np.random.Generator(np.random.PCG64(seed))
    v0 = rng.standard_normal(3)
    v0 /= np.linalg.norm(v0)

    renorm_every = max(1, int(round(renorm_interval / dt)))
    n_steps = int(round(t_total / dt))
    n_renorm = n_steps // renorm_every
    if n_renorm < n_blocks:
        raise ValueError("averaging time too short for the requested block count")

    logs = _kernels.benettin(mid, params, x0, v0, float(nu), gamma, dt,
                             n_steps, renorm_every)
    if len(logs) < n_renorm:
        raise SimulationError(
            "reference orbit escaped during averaging",
            time=len(logs) * renorm_interval,
        )

    span = renorm_every * dt
    value = float(logs.sum() / (n_renorm * span))
    per_block = n_renorm // n_blocks
    block_means = logs[: n_blocks * per_block].reshape(n_blocks, per_block)
    block_rates = block_means.sum(axis=1) / (per_block * span)
    stderr = float(block_rates.std(ddof=1) / np.sqrt(n_blocks))
    if stderr_tol is not None and stderr > stderr_tol:
        raise ConvergenceError(
            f"exponent {value:.6g} has standard error {stderr:.2g} "
            f"above the requested {stderr_tol:.2g}"
        )
    return LyapunovEstimate(value=value, stderr=stderr, renorms=n_renorm,
                            averaging_time=n_renorm * span)


@dataclass(frozen=True)
class MsfCurve:
    """Master stability curve on a grid, with the refined critical coupling.

    ``crossings`` lists every sign-change bracket on the grid (both
    directions, so non-monotone curve shapes are surfaced rather than
    hidden); ``alpha_c`` refines the first downward crossing by bisection.
    ``tail_negative`` states whether the exponent stays negative from that
    crossing to the end of the grid.
    """

    nu: np.ndarray
    exponents: np.ndarray
    stderrs: np.ndarray
    alpha_c: float
    crossings: tuple[tuple[float, float], ...]
    tail_negative: bool

    def __post_init__(self):
        for name in ("nu", "exponents", "stderrs"):
            a = np.ascontiguousarray(getattr(self, name), dtype=float)
            a.flags.writeable = False
            object.__setattr__(self, name, a)


def _resolve_threads(threads: int | None) -> int:
    if threads is None:
        env = os.environ.get("SYNCGAP_THREADS", "")
        threads = int(env) if env.strip() else (os.cpu_count() or 1)
    return max(1, int(threads))


def critical_coupling(model: ModelSpec, gamma, nu_max: float, n_grid: int = 24, *,
                      dt: float = 1e-3, t_transient: float = 500.0,
                      t_total: float = 2e4, renorm_interval: float = 1.0,
                      seed: int = 0, refine_width: float = 1e-3,
                      threads: int | None = None) -> MsfCurve:
    """Master stability curve on ``[0, nu_max]`` plus the refined crossing.

    Grid points are independent and evaluated concurrently up to
    ``threads`` workers (default: ``SYNCGAP_THREADS`` or the CPU count);
    the result does not depend on scheduling.  Raises
    :class:`NoCrossingError` when the exponent never crosses from positive
    to negative on the grid.
    """
    if n_grid < 20:
        raise ValueError("grid resolution must be at least 20 points")
    if nu_max <= 0:
        raise ValueError("nu_max must be positive")

    grid = np.linspace(0.0, float(nu_max), int(n_grid))

    def point(nu: float) -> LyapunovEstimate:
        return lyapunov_max(model, nu, gamma, dt=dt, t_transient=t_transient,
                            t_total=t_total, renorm_interval=renorm_interval,
                            seed=seed)

    workers = _resolve_threads(threads)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            estimates = list(pool.map(point, grid))
    else:
        estimates = [point(nu) for nu in grid]
    lam = np.array([e.value for e in estimates])
    err = np.array([e.stderr for e in estimates])

    crossings = []
    first_down = None
    for i in range(len(grid) - 1):
        if lam[i] > 0.0 >= lam[i + 1]:
            crossings.append((float(grid[i]), float(grid[i + 1])))
            if first_down is None:
                first_down = i
        elif lam[i] <= 0.0 < lam[i + 1]:
            crossings.append((float(grid[i]), float(grid[i + 1])))
    if first_down is None:
        raise NoCrossingError(
            f"exponent never crosses zero downward on [0, {nu_max:g}] "
            f"({n_grid} points); raise nu_max or refine the grid"
        )

    lo, hi = float(grid[first_down]), float(grid[first_down + 1])
    while hi - lo > refine_width:
        mid = 0.5 * (lo + hi)
        if point(mid).value > 0.0:
            lo = mid
        else:
            hi = mid
    alpha_c = 0.5 * (lo + hi)

    after = grid > alpha_c
    tail_negative = bool(np.all(lam[after] < 0.0)) if after.any() else True
    return MsfCurve(nu=grid, exponents=lam, stderrs=err, alpha_c=float(alpha_c),
                    crossings=tuple(crossings), tail_negative=tail_negative)


@dataclass(frozen=True)
class StabilityReport:
    """Synchronizability verdict for a network at a given coupling strength.

    ``drive`` is coupling strength times the real part of the spectral gap;
    the synchronous state is linearly stable when it exceeds the critical
    coupling, and ``margin`` is the (signed) clearance.
    """

    gap: complex
    alpha: float
    drive: float
    alpha_c: float
    margin: float
    synchronizable: bool
    gap_complex: bool


def stability_check(net: Network, model: ModelSpec, gamma, alpha: float,
                    alpha_c: float | MsfCurve | None = None, *,
                    nu_max: float | None = None, n_grid: int = 24,
                    seed: int = 0, dt: float = 1e-3, t_total: float = 2e4) -> StabilityReport:
    """Evaluate the stability condition ``alpha * Re(gap) > alpha_c``.

    ``alpha_c`` may be a precomputed number, a full :class:`MsfCurve`, or
    ``None`` to compute the curve here (grid up to ``nu_max``, defaulting
    to twice the drive).  Passing a precomputed value is cheap and keeps
    repeated verdicts consistent.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    gap = spectral_gap(net, seed=seed)
    drive = float(alpha * gap.value.real)
    if isinstance(alpha_c, MsfCurve):
        alpha_c = alpha_c.alpha_c
    if alpha_c is None:
        span = nu_max if nu_max is not None else max(2.0 * drive, 1.0)
        curve = critical_coupling(model, gamma, span, n_grid, dt=dt,
                                  t_total=t_total, seed=seed)
        alpha_c = curve.alpha_c
    alpha_c = float(alpha_c)
    margin = drive - alpha_c
    return StabilityReport(
        gap=complex(gap.value),
        alpha=float(alpha),
        drive=drive,
        alpha_c=alpha_c,
        margin=margin,
        synchronizable=bool(margin > 0.0),
        gap_complex=bool(abs(gap.value.imag) > 1e-9),
    )
