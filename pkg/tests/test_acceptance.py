"""Acceptance gate: one numbered pass/fail line per criterion (run with -s).

Each test prints ``[criterion N] label: PASS`` or ``FAIL`` and the suite
covers exact surrogate-network algebra, formula-vs-oracle agreement,
symmetric monotonicity, the block spectrum identity, the tangent-space
engine, the two bundled failure scenarios, and integrator order plus
byte determinism.
"""
import json
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from conftest import (N5_CSV, random_rooted_digraph, random_symmetric_network,
                      random_two_block_network)
from syncgap import (BranchError, DegenerateGapError, bundled_scenario, cli,
                     block_eigenview, block_form, critical_coupling, decompose,
                     edge_perturbation, eigen_all, fd_oracle, feedback_slope,
                     first_sustained_desync, hindmarsh_rose, identity_coupling,
                     integrate, load_network, lyapunov_max, network_from_edges,
                     perron_certificate, perturbation, roessler,
                     sensitivity_general, spectral_gap, stability_check)
from syncgap import _kernels
from syncgap.msf import X_START


@contextmanager
def verdict(number, label):
    try:
        yield
    except BaseException:
        print(f"\n[criterion {number}] {label}: FAIL")
        raise
    print(f"\n[criterion {number}] {label}: PASS")


@pytest.fixture(scope="session")
def ro_curve():
    return critical_coupling(roessler(), identity_coupling(), 0.3, n_grid=20)


@pytest.fixture(scope="session")
def hr_curve():
    return critical_coupling(hindmarsh_rose(), np.diag([1.0, 0.0, 0.0]), 2.0,
                             n_grid=20)


def test_criterion_1_surrogate_algebra(n5):
    with verdict(1, "surrogate network exact algebra"):
        gap = spectral_gap(n5)
        assert abs(gap.value - 1.0) <= 1e-9

        view = block_eigenview(block_form(n5, ("1", "2", "3"), ("4", "5")),
                               gap=gap)
        s = np.full(2, 1 / np.sqrt(2))
        assert np.linalg.norm(view.upstream_right) <= 1e-9
        assert np.linalg.norm(view.downstream_left - s) <= 1e-9
        assert np.linalg.norm(view.downstream_right - s) <= 1e-9

        lam = sorted(eigen_all(n5), key=lambda z: (z.real, z.imag))
        expected = [0.0, 1.0, 2.0, 2.0, 3.0]
        for got, want in zip(lam, expected):
            assert abs(got.real - want) <= 1e-8
            assert abs(got.imag) <= 1e-8


def test_criterion_2_feedback_rate_hand_value():
    with verdict(2, "two-block feedback rate -1/2"):
        q = s = np.array([1.0, 1.0])
        m = 0.5 * np.array([[0.0, 1.0], [0.0, 1.0]])
        assert abs(feedback_slope(q, m, s) - (-0.5)) <= 1e-12


def test_criterion_3_sensitivity_vs_oracle(n5):
    with verdict(3, "perturbation formula vs finite differences"):
        gap = spectral_gap(n5)
        fb = edge_perturbation(n5, "4", "1")
        assert abs(sensitivity_general(n5, fb, gap=gap) - (-1.0)) <= 1e-9
        assert abs(fd_oracle(n5, fb, eps=1e-6) - (-1.0)) <= 1e-3
        cut = edge_perturbation(n5, "1", "4")
        assert abs(sensitivity_general(n5, cut, gap=gap) - 0.5) <= 1e-9
        assert abs(fd_oracle(n5, cut, eps=1e-6) - 0.5) <= 1e-3

        agree = checked = trial = 0
        while checked < 100:
            trial += 1
            rng = np.random.default_rng(9000 + trial)
            net = random_rooted_digraph(rng, int(rng.integers(3, 11)))
            nodes = net.labels
            i, j = rng.choice(len(nodes), size=2, replace=False)
            src, dst = nodes[int(i)], nodes[int(j)]
            pert = edge_perturbation(net, src, dst, float(rng.uniform(0.5, 2.0)))
            try:
                g = spectral_gap(net)
                if not g.simple:
                    continue
                slope = sensitivity_general(net, pert, gap=g)
                fd = fd_oracle(net, pert)
            except (DegenerateGapError, BranchError):
                continue
            checked += 1
            if abs(slope - fd) <= 1e-3 * max(1.0, abs(slope)):
                agree += 1
        assert agree >= 99


def test_criterion_4_symmetric_monotonicity():
    with verdict(4, "symmetric reinforcement never lowers the gap"):
        checked = trial = 0
        while checked < 200:
            trial += 1
            rng = np.random.default_rng(11000 + trial)
            net = random_symmetric_network(rng, int(rng.integers(3, 9)))
            nodes = net.labels
            i, j = rng.choice(len(nodes), size=2, replace=False)
            a, b = nodes[int(i)], nodes[int(j)]
            pert = perturbation(net, [(a, b, 1.0), (b, a, 1.0)])
            try:
                gap = spectral_gap(net)
                if not gap.simple:
                    continue
                slope = sensitivity_general(net, pert, gap=gap)
            except DegenerateGapError:
                continue
            checked += 1
            assert slope.real >= -1e-10

        path = load_network("src,dst,weight\na,b,1\nb,a,1\nb,c,1\nc,b,1\n")
        lam = sorted(z.real for z in eigen_all(path))
        assert abs(lam[1] - 1.0) <= 1e-8
        tri = path.with_edge("a", "c", 1.0).with_edge("c", "a", 1.0)
        lam_tri = sorted(z.real for z in eigen_all(tri))
        assert abs(lam_tri[1] - 3.0) <= 1e-8


def test_criterion_5_block_spectrum_identity():
    with verdict(5, "triangular block spectrum and Perron certificate"):
        for trial in range(100):
            rng = np.random.default_rng(13000 + trial)
            net = random_two_block_network(rng, int(rng.integers(1, 5)),
                                           int(rng.integers(2, 6)))
            dec = decompose(net)
            bf = block_form(net, dec.components[0], dec.components[1])
            whole = sorted(eigen_all(net), key=lambda z: (z.real, z.imag))
            parts = np.concatenate([eigen_all(bf.upstream_lap),
                                    eigen_all(bf.downstream_block)])
            # greedy nearest matching avoids tie-order flips in the sort
            remaining = list(parts)
            worst = 0.0
            for z in whole:
                dists = [abs(z - w) for w in remaining]
                k = int(np.argmin(dists))
                worst = max(worst, dists[k])
                remaining.pop(k)
            assert worst <= 1e-8

            cert = perron_certificate(bf.downstream_block)
            block_min = min(z.real for z in eigen_all(bf.downstream_block))
            assert abs(cert.min_real_eig - block_min) <= 1e-8
            assert cert.positive
            assert np.all(cert.right_vec > 0) and np.all(cert.left_vec > 0)


def test_criterion_6_tangent_engine_calibration(ro_curve):
    with verdict(6, "exponent calibration and identity-coupling shift"):
        v0 = np.array([1.0, 0.0, 0.0])
        logs = _kernels.benettin(_kernels.LINEAR, np.zeros(5),
                                 np.array(X_START), v0, 0.0, np.eye(3),
                                 1e-3, 200_000, 1000)
        assert abs(logs.sum() / (len(logs) * 1.0) - (-1.0)) <= 1e-6

        ro = roessler()
        gamma = identity_coupling()
        lam0 = lyapunov_max(ro, 0.0, gamma).value
        for nu in np.linspace(0.0, 0.9, 10):
            lam = lyapunov_max(ro, float(nu), gamma).value
            assert abs(lam - (lam0 - nu)) <= 0.01
        assert abs(ro_curve.alpha_c - lam0) <= 0.01


def test_criterion_7_hr_critical_coupling_bound(hr_curve):
    with verdict(7, "bursting-neuron critical coupling below 0.96"):
        assert 0.0 < hr_curve.alpha_c < 0.96
        assert hr_curve.tail_negative


def test_criterion_8_functional_failure(ro_curve, hr_curve):
    with verdict(8, "bundled scenarios lose synchrony after the added link"):
        for name, curve in (("fig1_hr", hr_curve), ("fig1_roessler", ro_curve)):
            sc = bundled_scenario(name)
            traj = integrate(sc)

            quiet = (traj.times >= 1500.0) & (traj.times <= 2000.0)
            assert traj.sync_error[quiet].max() < 1e-3, name

            event = sc.events[0]
            assert (event.src, event.dst, event.weight) == ("4", "1", 0.4)
            t_fail = first_sustained_desync(traj, threshold=1e-1, sustain=10,
                                            after=event.time)
            assert t_fail is not None and t_fail < 4000.0, name

            pre = stability_check(sc.network, sc.model, sc.coupling,
                                  sc.alpha, alpha_c=curve)
            post_net = sc.network.with_edge(event.src, event.dst, event.weight)
            post = stability_check(post_net, sc.model, sc.coupling,
                                   sc.alpha, alpha_c=curve)
            assert pre.margin > 0.0 and pre.synchronizable, name
            assert post.margin < 0.0 and not post.synchronizable, name


def test_criterion_9_order_and_determinism(tmp_path):
    with verdict(9, "fourth-order convergence and byte determinism"):
        net = network_from_edges([("a", "b", 1.0), ("b", "a", 1.0)])
        ro = roessler()
        wmat = np.ascontiguousarray(0.2 * net.weights)

        def endpoint(dt, t=2.0):
            state = np.array([[0.1, 0.2, 0.3], [0.101, 0.201, 0.301]])
            n = int(round(t / dt))
            rec = np.empty((2, 2, 3))
            rec[0] = state
            ret = _kernels.integrate_coupled(_kernels.ROSSLER,
                                             ro.kernel_params, wmat,
                                             np.eye(3), state, dt, n, n,
                                             rec, 1, 0)
            assert ret > 0
            return state.copy()

        ref = endpoint(0.00125)
        ratio = (np.linalg.norm(endpoint(0.02) - ref)
                 / np.linalg.norm(endpoint(0.01) - ref))
        assert 16.0 * 0.8 <= ratio <= 16.0 * 1.2

        doc = {
            "model": {"name": "roessler"}, "coupling": "identity",
            "alpha": 0.2, "t_end": 5.0, "dt": 0.01, "record_stride": 10,
            "seed": 0, "magnitude": 1e-3,
            "network": {"nodes": ["a", "b"],
                        "edges": [{"src": "a", "dst": "b", "w": 1.0},
                                  {"src": "b", "dst": "a", "w": 1.0}]},
            "events": [{"t": 2.5, "src": "a", "dst": "b", "weight": 0.1}],
        }
        spath = tmp_path / "scenario.json"
        spath.write_text(json.dumps(doc), encoding="utf-8")
        outs = (tmp_path / "run1", tmp_path / "run2")
        for out in outs:
            assert cli.main(["simulate", "--input", str(spath),
                             "--out", str(out)]) == 0
        names = sorted(p.name for p in outs[0].iterdir())
        assert names == sorted(p.name for p in outs[1].iterdir())
        for name in names:
            a = Path(outs[0] / name).read_bytes()
            b = Path(outs[1] / name).read_bytes()
            assert a == b, f"{name} differs between identical runs"
