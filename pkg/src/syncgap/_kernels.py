"""Jit-compiled inner loops: RK4 steppers for single nodes, tangent pairs,
and coupled networks.

Everything here works on plain float64 arrays and scalar model ids so numba
can compile it once and reuse it across models.  The public modules wrap
these kernels with validation, seeding, and result types; nothing below
raises -- failures are signalled through truncated or negative return
values, which the wrappers translate into exceptions.

Model ids: 0 = three-variable bursting neuron, 1 = three-variable chaotic
rotor, 2 = linear decay (calibration only).  Parameter packing is fixed by
``models.ModelSpec.kernel_params``.
"""
from __future__ import annotations

import numpy as np
from numba import njit

HR = 0
ROSSLER = 1
LINEAR = 2

#: any state component beyond this magnitude counts as an escaped trajectory
ESCAPE = 1.0e6


@njit(cache=True, inline="always")
def _field(mid, p, x, out):
    if mid == 0:
        out[0] = x[1] + p[0] * x[0] * x[0] - x[0] ** 3 - x[2] + p[3]
        out[1] = 1.0 - 5.0 * x[0] * x[0] - x[1]
        out[2] = p[1] * (p[2] * (x[0] - p[4]) - x[2])
    elif mid == 1:
        out[0] = -x[1] - x[2]
        out[1] = x[0] + p[0] * x[1]
        out[2] = p[1] + x[2] * (x[0] - p[2])
    else:
        out[0] = -x[0]
        out[1] = -x[1]
        out[2] = -x[2]


@njit(cache=True, inline="always")
def _jvp(mid, p, x, v, out):
    if mid == 0:
        out[0] = (2.0 * p[0] * x[0] - 3.0 * x[0] * x[0]) * v[0] + v[1] - v[2]
        out[1] = -10.0 * x[0] * v[0] - v[1]
        out[2] = p[1] * p[2] * v[0] - p[1] * v[2]
    elif mid == 1:
        out[0] = -v[1] - v[2]
        out[1] = v[0] + p[0] * v[1]
        out[2] = x[2] * v[0] + (x[0] - p[2]) * v[2]
    else:
        out[0] = -v[0]
        out[1] = -v[1]
        out[2] = -v[2]


@njit(cache=True, nogil=True)
def relax(mid, p, x0, dt, n_steps):
    """Integrate a single uncoupled node; returns the final state."""
    x = x0.copy()
    k1 = np.empty(3)
    k2 = np.empty(3)
    k3 = np.empty(3)
    k4 = np.empty(3)
    xa = np.empty(3)
    for _ in range(n_steps):
        _field(mid, p, x, k1)
        for d in range(3):
            xa[d] = x[d] + 0.5 * dt * k1[d]
        _field(mid, p, xa, k2)
        for d in range(3):
            xa[d] = x[d] + 0.5 * dt * k2[d]
        _field(mid, p, xa, k3)
        for d in range(3):
            xa[d] = x[d] + dt * k3[d]
        _field(mid, p, xa, k4)
        for d in range(3):
            x[d] += dt / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d])
    return x


@njit(cache=True, nogil=True)
def benettin(mid, p, x0, v0, nu, gam, dt, n_steps, renorm_every):
    """Joint RK4 of a reference orbit and one tangent vector.

    The tangent obeys ``v' = (Df(x) - nu*gam) v`` and is renormalized every
    ``renorm_every`` steps; the per-interval log growth factors come back
    as an array.  A truncated array (fewer than ``n_steps // renorm_every``
    entries) means the reference orbit escaped.
    """
    x = x0.copy()
    v = v0.copy()
    nrm = 0.0
    for d in range(3):
        nrm += v[d] * v[d]
    nrm = np.sqrt(nrm)
    for d in range(3):
        v[d] /= nrm
    n_renorm = n_steps // renorm_every
    logs = np.empty(n_renorm)
    kx1 = np.empty(3); kx2 = np.empty(3); kx3 = np.empty(3); kx4 = np.empty(3)
    kv1 = np.empty(3); kv2 = np.empty(3); kv3 = np.empty(3); kv4 = np.empty(3)
    xa = np.empty(3); va = np.empty(3)
    for r in range(n_renorm):
        for _ in range(renorm_every):
            _field(mid, p, x, kx1)
            _jvp(mid, p, x, v, kv1)
            for d in range(3):
                kv1[d] -= nu * (gam[d, 0] * v[0] + gam[d, 1] * v[1] + gam[d, 2] * v[2])
            for d in range(3):
                xa[d] = x[d] + 0.5 * dt * kx1[d]
                va[d] = v[d] + 0.5 * dt * kv1[d]
            _field(mid, p, xa, kx2)
            _jvp(mid, p, xa, va, kv2)
            for d in range(3):
                kv2[d] -= nu * (gam[d, 0] * va[0] + gam[d, 1] * va[1] + gam[d, 2] * va[2])
            for d in range(3):
                xa[d] = x[d] + 0.5 * dt * kx2[d]
                va[d] = v[d] + 0.5 * dt * kv2[d]
            _field(mid, p, xa, kx3)
            _jvp(mid, p, xa, va, kv3)
            for d in range(3):
                kv3[d] -= nu * (gam[d, 0] * va[0] + gam[d, 1] * va[1] + gam[d, 2] * va[2])
            for d in range(3):
                xa[d] = x[d] + dt * kx3[d]
                va[d] = v[d] + dt * kv3[d]
            _field(mid, p, xa, kx4)
            _jvp(mid, p, xa, va, kv4)
            for d in range(3):
                kv4[d] -= nu * (gam[d, 0] * va[0] + gam[d, 1] * va[1] + gam[d, 2] * va[2])
            for d in range(3):
                x[d] += dt / 6.0 * (kx1[d] + 2.0 * kx2[d] + 2.0 * kx3[d] + kx4[d])
                v[d] += dt / 6.0 * (kv1[d] + 2.0 * kv2[d] + 2.0 * kv3[d] + kv4[d])
        nrm = 0.0
        for d in range(3):
            nrm += v[d] * v[d]
        nrm = np.sqrt(nrm)
        ok = np.isfinite(nrm) and nrm > 0.0
        for d in range(3):
            if not np.isfinite(x[d]) or x[d] > ESCAPE or x[d] < -ESCAPE:
                ok = False
        if not ok:
            return logs[:r]
        logs[r] = np.log(nrm)
        for d in range(3):
            v[d] /= nrm
    return logs


@njit(cache=True, nogil=True)
def _coupled_rhs(mid, p, wmat, hmat, x, out, buf):
    """out[i] = f(x[i]) + H @ sum_j wmat[i,j] (x[j] - x[i]).

    ``wmat`` already carries the global coupling strength.  The pairwise
    difference form vanishes identically when all rows of ``x`` agree, so
    the synchronized manifold is preserved to the last bit.
    """
    n = x.shape[0]
    for i in range(n):
        for d in range(3):
            acc = 0.0
            for j in range(n):
                w = wmat[i, j]
                if w != 0.0:
                    acc += w * (x[j, d] - x[i, d])
            buf[i, d] = acc
    for i in range(n):
        _field(mid, p, x[i], out[i])
        for d in range(3):
            acc = 0.0
            for k in range(3):
                acc += hmat[d, k] * buf[i, k]
            out[i, d] += acc


@njit(cache=True, nogil=True)
def integrate_coupled(mid, p, wmat, hmat, x, dt, n_steps, stride, rec, rec_pos, step0):
    """RK4 the coupled network for ``n_steps``, recording decimated states.

    ``x`` is advanced in place.  States are written into ``rec`` whenever
    the global step count (``step0`` + local step) is divisible by
    ``stride``; the return value is the next free record slot, or, if any
    component went non-finite or past the escape bound, the negative of the
    offending global step.
    """
    n = x.shape[0]
    k1 = np.empty((n, 3)); k2 = np.empty((n, 3)); k3 = np.empty((n, 3)); k4 = np.empty((n, 3))
    xa = np.empty((n, 3)); buf = np.empty((n, 3))
    ri = rec_pos
    for s in range(n_steps):
        _coupled_rhs(mid, p, wmat, hmat, x, k1, buf)
        for i in range(n):
            for d in range(3):
                xa[i, d] = x[i, d] + 0.5 * dt * k1[i, d]
        _coupled_rhs(mid, p, wmat, hmat, xa, k2, buf)
        for i in range(n):
            for d in range(3):
                xa[i, d] = x[i, d] + 0.5 * dt * k2[i, d]
        _coupled_rhs(mid, p, wmat, hmat, xa, k3, buf)
        for i in range(n):
            for d in range(3):
                xa[i, d] = x[i, d] + dt * k3[i, d]
        _coupled_rhs(mid, p, wmat, hmat, xa, k4, buf)
        for i in range(n):
            for d in range(3):
                x[i, d] += dt / 6.0 * (k1[i, d] + 2.0 * k2[i, d] + 2.0 * k3[i, d] + k4[i, d])
        gs = step0 + s + 1
        for i in range(n):
            for d in range(3):
                xv = x[i, d]
                if not np.isfinite(xv) or xv > ESCAPE or xv < -ESCAPE:
                    return -gs
        if gs % stride == 0:
            for i in range(n):
                for d in range(3):
                    rec[ri, i, d] = x[i, d]
            ri += 1
    return ri
