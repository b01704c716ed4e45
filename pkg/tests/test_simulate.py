"""Scenario validation, the coupled integrator, and run post-processing."""
import numpy as np
import pytest

from conftest import N5_EDGES
from syncgap import (Event, Scenario, SimulationError, Trajectory,
                     bundled_scenario, bundled_scenario_names,
                     first_sustained_desync, integrate, network_from_edges,
                     roessler, scenario_from_json, scenario_to_json,
                     sync_error_series)


def ring(weight=1.0):
    return network_from_edges([("a", "b", weight), ("b", "c", weight),
                               ("c", "a", weight)])


def pair_scenario(**kw):
    base = dict(network=network_from_edges([("a", "b", 1.0), ("b", "a", 1.0)]),
                model=roessler(), coupling=np.eye(3), alpha=0.2,
                t_end=5.0, dt=0.01, record_stride=10, seed=0)
    base.update(kw)
    return Scenario(**base)


def test_scenario_validation():
    net = ring()
    ok = dict(network=net, model=roessler(), coupling=np.eye(3), alpha=0.1,
              t_end=1.0, dt=0.01)
    Scenario(**ok)
    with pytest.raises(ValueError):
        Scenario(**{**ok, "alpha": -0.1})
    with pytest.raises(ValueError):
        Scenario(**{**ok, "dt": 0.0})
    with pytest.raises(ValueError):
        Scenario(**{**ok, "magnitude": -1e-3})
    with pytest.raises(ValueError):
        Scenario(**{**ok, "record_stride": 0})
    with pytest.raises(ValueError):
        Scenario(**{**ok, "record_stride": 1.5})
    with pytest.raises(ValueError):
        Scenario(**{**ok, "t_end": 1.005})            # not a whole step count
    with pytest.raises(ValueError):
        Scenario(**{**ok, "coupling": np.eye(2)})
    with pytest.raises(ValueError):
        Scenario(**{**ok, "probe_component": 3})
    with pytest.raises(KeyError):
        Scenario(**{**ok, "probe_pair": ("a", "zz")})


def test_event_validation():
    net = ring()
    ok = dict(network=net, model=roessler(), coupling=np.eye(3), alpha=0.1,
              t_end=1.0, dt=0.01)
    Scenario(**ok, events=(Event(0.5, "a", "c", 1.0),))
    Scenario(**ok, events=(Event(1.0, "a", "c", 1.0),))   # boundary is legal
    with pytest.raises(ValueError):
        Scenario(**ok, events=(Event(0.005, "a", "c", 1.0),))  # off-grid
    with pytest.raises(ValueError):
        Scenario(**ok, events=(Event(0.0, "a", "c", 1.0),))
    with pytest.raises(ValueError):
        Scenario(**ok, events=(Event(1.5, "a", "c", 1.0),))
    with pytest.raises(ValueError):
        Scenario(**ok, events=(Event(0.5, "a", "a", 1.0),))
    with pytest.raises(ValueError):
        Scenario(**ok, events=(Event(0.5, "a", "c", -1.0),))
    with pytest.raises(KeyError):
        Scenario(**ok, events=(Event(0.5, "a", "zz", 1.0),))

    sc = Scenario(**ok, events=(Event(0.7, "a", "c", 1.0),
                                Event(0.2, "b", "a", 0.5)))
    assert [e.time for e in sc.events] == [0.2, 0.7]      # sorted


def test_probe_defaults():
    sc = pair_scenario()
    assert sc.probe == ("a", "b")
    explicit = pair_scenario(probe_pair=("b", "a"), probe_component=2)
    assert explicit.probe == ("b", "a")


def test_trajectory_shapes_and_grid():
    sc = pair_scenario(t_end=0.55, record_stride=10)
    traj = integrate(sc)
    assert traj.labels == ("a", "b")
    assert traj.states.shape == (6, 2, 3)                 # 55//10 + 1 records
    assert np.allclose(traj.times, np.arange(6) * 0.1)
    assert traj.sync_error.shape == (6,)
    assert not traj.states.flags.writeable


def test_zero_magnitude_keeps_exact_sync():
    traj = integrate(pair_scenario(magnitude=0.0, t_end=20.0))
    assert np.all(traj.sync_error == 0.0)
    assert np.array_equal(traj.states[:, 0, :], traj.states[:, 1, :])


def test_seed_reproducibility():
    a = integrate(pair_scenario(seed=7))
    b = integrate(pair_scenario(seed=7))
    c = integrate(pair_scenario(seed=8))
    assert np.array_equal(a.states, b.states)
    assert not np.array_equal(a.states, c.states)


def test_label_order_only_permutes_states():
    fwd = network_from_edges([("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)])
    rev = network_from_edges([("c", "a", 1.0), ("b", "c", 1.0), ("a", "b", 1.0)])
    assert fwd.labels != rev.labels
    kw = dict(model=roessler(), coupling=np.eye(3), alpha=0.1, t_end=10.0,
              dt=0.01, seed=4)
    t_fwd = integrate(Scenario(network=fwd, **kw))
    t_rev = integrate(Scenario(network=rev, **kw))
    for lab in ("a", "b", "c"):
        i, j = t_fwd.labels.index(lab), t_rev.labels.index(lab)
        assert np.array_equal(t_fwd.states[:, i, :], t_rev.states[:, j, :])
    assert np.array_equal(t_fwd.sync_error, t_rev.sync_error)


def test_zero_weight_event_is_inert():
    plain = integrate(pair_scenario(t_end=10.0))
    noop = integrate(pair_scenario(t_end=10.0,
                                   events=(Event(5.0, "a", "b", 0.0),)))
    assert np.array_equal(plain.states, noop.states)


def test_event_changes_dynamics_after_its_time():
    plain = integrate(pair_scenario(t_end=10.0, alpha=0.05))
    bumped = integrate(pair_scenario(t_end=10.0, alpha=0.05,
                                     events=(Event(5.0, "a", "b", 3.0),)))
    pre = plain.times <= 5.0
    assert np.array_equal(plain.states[pre], bumped.states[pre])
    assert not np.array_equal(plain.states[~pre], bumped.states[~pre])


def test_escape_raises_with_time():
    sc = pair_scenario(coupling=-np.eye(3), alpha=5.0, t_end=50.0, seed=1)
    with pytest.raises(SimulationError) as exc:
        integrate(sc)
    assert exc.value.time is not None
    assert 0.0 < exc.value.time < 50.0


def test_sync_error_series_variants():
    traj = integrate(pair_scenario(t_end=10.0, seed=2))
    default = sync_error_series(traj)
    assert np.array_equal(default, traj.sync_error)
    default[0] = 99.0                                     # returned copy is ours
    assert traj.sync_error[0] != 99.0

    pair = sync_error_series(traj, ("a", "b"))
    diff = traj.states[:, 0, :] - traj.states[:, 1, :]
    assert np.array_equal(pair, np.abs(diff).max(axis=1))

    signed = sync_error_series(traj, ("a", "b"), component=1)
    assert np.array_equal(signed, diff[:, 1])
    assert np.array_equal(sync_error_series(traj, ("b", "a"), component=1),
                          -signed)

    with pytest.raises(ValueError):
        sync_error_series(traj, None, component=0)
    with pytest.raises(KeyError):
        sync_error_series(traj, ("a", "zz"))
    with pytest.raises(IndexError):
        sync_error_series(traj, ("a", "b"), component=5)


def synthetic_trajectory(flags):
    n = len(flags)
    err = np.where(np.asarray(flags, dtype=bool), 1.0, 0.01)
    return Trajectory(labels=("a", "b"), times=np.arange(n, dtype=float),
                      states=np.zeros((n, 2, 3)), sync_error=err)


def test_first_sustained_desync():
    flags = np.zeros(30, dtype=bool)
    flags[3:8] = True        # 5 samples: too short
    flags[15:27] = True      # 12 samples: sustained
    traj = synthetic_trajectory(flags)
    assert first_sustained_desync(traj, threshold=0.1, sustain=10) == 15.0
    assert first_sustained_desync(traj, threshold=0.1, sustain=5) == 3.0
    assert first_sustained_desync(traj, threshold=0.1, sustain=13) is None
    assert first_sustained_desync(traj, threshold=0.1, sustain=10,
                                  after=15.5) == 16.0
    assert first_sustained_desync(traj, threshold=2.0) is None


def test_scenario_json_round_trip():
    sc = pair_scenario(events=(Event(2.0, "a", "b", 0.5),),
                       probe_pair=("b", "a"), probe_component=2,
                       name="demo", note="round trip", alpha_reference=0.4,
                       magnitude=5e-4, seed=11)
    doc = scenario_to_json(sc)
    back = scenario_from_json(doc)
    assert back.network.labels == sc.network.labels
    assert np.array_equal(back.network.weights, sc.network.weights)
    assert back.model == sc.model
    assert np.array_equal(back.coupling, sc.coupling)
    assert (back.alpha, back.t_end, back.dt) == (sc.alpha, sc.t_end, sc.dt)
    assert back.events == sc.events
    assert back.probe_pair == ("b", "a") and back.probe_component == 2
    assert (back.name, back.note) == ("demo", "round trip")
    assert back.alpha_reference == 0.4
    assert (back.seed, back.magnitude, back.record_stride) == (11, 5e-4, 10)

    import json
    again = scenario_from_json(json.dumps(doc))           # string form
    assert again.events == sc.events


def test_scenario_json_coupling_keyword():
    doc = scenario_to_json(pair_scenario())
    doc["coupling"] = "x"
    sc = scenario_from_json(doc)
    assert np.array_equal(sc.coupling, np.diag([1.0, 0.0, 0.0]))


def test_bundled_scenarios():
    assert bundled_scenario_names() == ["fig1_hr", "fig1_roessler"]
    hr = bundled_scenario("fig1_hr")
    assert hr.model.name == "hindmarsh_rose"
    assert hr.alpha == 0.96
    assert np.array_equal(hr.coupling, np.diag([1.0, 0.0, 0.0]))
    assert hr.network.labels == ("1", "2", "3", "4", "5")
    assert np.array_equal(hr.network.weights,
                          network_from_edges(N5_EDGES).weights)
    assert hr.events == (Event(2000.0, "4", "1", 0.4),)
    assert hr.probe == ("1", "5") and hr.probe_component == 0
    assert (hr.t_end, hr.dt, hr.record_stride) == (4000.0, 0.01, 10)

    ro = bundled_scenario("fig1_roessler")
    assert ro.model.name == "roessler"
    assert ro.alpha == 0.092
    assert np.array_equal(ro.coupling, np.eye(3))
    assert ro.events == hr.events

    with pytest.raises(KeyError):
        bundled_scenario("fig2")
