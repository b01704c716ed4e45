"""Direct integration of coupled oscillator networks with scripted link edits.

A :class:`Scenario` bundles everything a run needs: the network, the node
model, the coupling matrix and strength, the time grid, seeded initial
conditions, and a list of timed structural events (link additions).  The
integrator is fixed-step classical RK4 on the stacked network state, with
the event weights spliced in between steps.

Initial conditions follow a fixed recipe: one uncoupled node is integrated
for 500 time units from a documented start state to land on the attractor,
then every node starts from that state plus small seeded uniform offsets.
Internally nodes are processed in sorted-label order regardless of input
order, so relabeling or reordering a network permutes the trajectory
bitwise instead of merely approximately.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import _kernels
from .errors import SimulationError
from .models import ModelSpec, coupling_by_name, model_by_name
from .msf import X_START
from .network import Network, network_from_json, network_to_json

__all__ = [
    "Event",
    "Scenario",
    "Trajectory",
    "integrate",
    "sync_error_series",
    "first_sustained_desync",
    "scenario_to_json",
    "scenario_from_json",
    "read_scenario",
    "bundled_scenario",
    "bundled_scenario_names",
]

#: settle time (time units) for the single-node attractor relaxation
SETTLE_TIME = 500.0


@dataclass(frozen=True)
class Event:
    """Add ``weight`` to the link ``src -> dst`` at time ``time``."""

    time: float
    src: str
    dst: str
    weight: float


@dataclass(frozen=True)
class Scenario:
    """A fully specified network integration run."""

    network: Network
    model: ModelSpec
    coupling: np.ndarray
    alpha: float
    t_end: float
    dt: float = 0.01
    events: tuple[Event, ...] = ()
    seed: int = 0
    magnitude: float = 1e-3
    record_stride: int = 10
    probe_pair: tuple[str, str] | None = None
    probe_component: int = 0
    name: str = ""
    note: str = ""
    alpha_reference: float | None = None

    def __post_init__(self):
        cpl = np.ascontiguousarray(self.coupling, dtype=float)
        if cpl.shape != (3, 3) or not np.all(np.isfinite(cpl)):
            raise ValueError("coupling must be a finite 3x3 matrix")
        cpl.flags.writeable = False
        object.__setattr__(self, "coupling", cpl)
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        if self.magnitude < 0:
            raise ValueError("magnitude must be nonnegative")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError("record_stride must be a positive integer")
        object.__setattr__(self, "record_stride", int(self.record_stride))
        n_total = self.t_end / self.dt
        if abs(n_total - round(n_total)) > 1e-6:
            raise ValueError("t_end must be an integer number of steps")

        events = tuple(sorted(self.events, key=lambda e: e.time))
        for ev in events:
            if not (0.0 < ev.time <= self.t_end):
                raise ValueError(f"event time {ev.time} outside (0, t_end]")
            steps = ev.time / self.dt
            if abs(steps - round(steps)) > 1e-9 * max(1.0, abs(steps)):
                raise ValueError(
                    f"event time {ev.time} is not aligned to the dt={self.dt} grid"
                )
            self.network.index(ev.src)
            self.network.index(ev.dst)
            if ev.src == ev.dst:
                raise ValueError("event would create a self-loop")
            if not np.isfinite(ev.weight) or ev.weight < 0:
                raise ValueError("event weight must be finite and nonnegative")
        object.__setattr__(self, "events", events)

        if self.probe_pair is not None:
            a, b = self.probe_pair
            self.network.index(a)
            self.network.index(b)
            object.__setattr__(self, "probe_pair", (str(a), str(b)))
        if self.probe_component not in (0, 1, 2):
            raise ValueError("probe_component must be 0, 1 or 2")

    @property
    def probe(self) -> tuple[str, str]:
        """The node pair whose component difference reports emit."""
        if self.probe_pair is not None:
            return self.probe_pair
        return (self.network.labels[0], self.network.labels[-1])


@dataclass(frozen=True)
class Trajectory:
    """Recorded states on a uniform time grid, in input label order."""

    labels: tuple[str, ...]
    times: np.ndarray
    states: np.ndarray
    sync_error: np.ndarray

    def __post_init__(self):
        for name in ("times", "states", "sync_error"):
            a = np.ascontiguousarray(getattr(self, name), dtype=float)
            a.flags.writeable = False
            object.__setattr__(self, name, a)


def _attractor_state(model: ModelSpec, dt: float) -> np.ndarray:
    x = _kernels.relax(model.kernel_id, model.kernel_params,
                       np.asarray(X_START, dtype=float), dt,
                       int(round(SETTLE_TIME / dt)))
    if not np.all(np.isfinite(x)):
        raise SimulationError("single-node relaxation escaped; check model parameters")
    return x


def integrate(sc: Scenario) -> Trajectory:
    """Run a scenario; deterministic for a fixed seed.

    Raises :class:`SimulationError` with the failure time if any state
    component leaves the escape bound or goes non-finite.
    """
    net = sc.network
    n = net.n
    order = sorted(range(n), key=lambda k: net.labels[k])
    inv = np.argsort(order)
    wmat = np.ascontiguousarray(sc.alpha * net.weights[np.ix_(order, order)])
    label_pos = {net.labels[k]: i for i, k in enumerate(order)}

    x_att = _attractor_state(sc.model, sc.dt)
    rng = np.random.Generator(np.random.PCG64(sc.seed))
    state = np.tile(x_att, (n, 1))
    if sc.magnitude > 0:
        state = state + rng.uniform(-sc.magnitude, sc.magnitude, size=(n, 3))
    state = np.ascontiguousarray(state)

    n_total = int(round(sc.t_end / sc.dt))
    stride = sc.record_stride
    n_rec = n_total // stride + 1
    rec = np.empty((n_rec, n, 3))
    rec[0] = state

    # group events by their step index; integrate the gaps between them
    event_steps: dict[int, list[Event]] = {}
    for ev in sc.events:
        event_steps.setdefault(int(round(ev.time / sc.dt)), []).append(ev)
    boundaries = sorted(set(event_steps) | {n_total})

    mid, params = sc.model.kernel_id, sc.model.kernel_params
    step = 0
    rec_pos = 1
    for boundary in boundaries:
        if boundary > step:
            ret = _kernels.integrate_coupled(
                mid, params, wmat, sc.coupling, state, sc.dt,
                boundary - step, stride, rec, rec_pos, step,
            )
            if ret < 0:
                raise SimulationError("state escaped the integration bound",
                                      time=-ret * sc.dt)
            rec_pos = int(ret)
            step = boundary
        for ev in event_steps.get(boundary, ()):
            wmat[label_pos[ev.dst], label_pos[ev.src]] += sc.alpha * ev.weight

    states = np.ascontiguousarray(rec[:, inv, :])
    times = np.arange(n_rec) * (sc.dt * stride)
    spread = states.max(axis=1) - states.min(axis=1)   # (n_rec, 3)
    return Trajectory(
        labels=net.labels,
        times=times,
        states=states,
        sync_error=spread.max(axis=1),
    )


def sync_error_series(traj: Trajectory, pair: tuple[str, str] | None = None,
                      component: int | None = None) -> np.ndarray:
    """Synchronization-error time series.

    Default: the worst pairwise infinity-norm difference (same as
    ``traj.sync_error``).  With ``pair``, restrict to two nodes; with
    ``component`` as well, return the signed componentwise difference.
    """
    if pair is None:
        if component is not None:
            raise ValueError("component requires a node pair")
        return traj.sync_error.copy()
    a, b = (str(x) for x in pair)
    try:
        i, j = traj.labels.index(a), traj.labels.index(b)
    except ValueError as exc:
        raise KeyError(f"unknown node in pair {pair!r}") from exc
    diff = traj.states[:, i, :] - traj.states[:, j, :]
    if component is None:
        return np.abs(diff).max(axis=1)
    if component not in (0, 1, 2):
        raise IndexError("component must be 0, 1 or 2")
    return diff[:, component].copy()


def first_sustained_desync(traj: Trajectory, threshold: float = 1e-1,
                           sustain: int = 10, after: float | None = None) -> float | None:
    """First time the error exceeds ``threshold`` for ``sustain`` samples.

    Transient single-sample excursions do not count; ``after`` restricts
    the search to later times (e.g. past a structural event).  Returns the
    starting time of the sustained excursion, or ``None``.
    """
    mask = traj.sync_error > threshold
    if after is not None:
        mask &= traj.times > after
    run = 0
    for k, flag in enumerate(mask):
        run = run + 1 if flag else 0
        if run >= sustain:
            return float(traj.times[k - sustain + 1])
    return None


def scenario_to_json(sc: Scenario) -> dict:
    doc = {
        "name": sc.name,
        "note": sc.note,
        "model": {"name": sc.model.name, "params": sc.model.param_dict},
        "coupling": [list(row) for row in np.asarray(sc.coupling)],
        "alpha": sc.alpha,
        "dt": sc.dt,
        "t_end": sc.t_end,
        "record_stride": sc.record_stride,
        "seed": sc.seed,
        "magnitude": sc.magnitude,
        "network": network_to_json(sc.network),
        "events": [
            {"t": ev.time, "src": ev.src, "dst": ev.dst, "weight": ev.weight}
            for ev in sc.events
        ],
    }
    if sc.alpha_reference is not None:
        doc["alpha_reference"] = sc.alpha_reference
    if sc.probe_pair is not None:
        doc["probe"] = {"pair": list(sc.probe_pair), "component": sc.probe_component}
    return doc


def scenario_from_json(doc) -> Scenario:
    """Build a scenario from a JSON document (dict or string)."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    model_doc = doc["model"]
    model = model_by_name(model_doc["name"], **model_doc.get("params", {}))
    probe = doc.get("probe", {})
    events = tuple(
        Event(time=float(e["t"]), src=str(e["src"]), dst=str(e["dst"]),
              weight=float(e["weight"]))
        for e in doc.get("events", ())
    )
    return Scenario(
        network=network_from_json(doc["network"]),
        model=model,
        coupling=coupling_by_name(doc["coupling"]),
        alpha=float(doc["alpha"]),
        t_end=float(doc["t_end"]),
        dt=float(doc.get("dt", 0.01)),
        events=events,
        seed=int(doc.get("seed", 0)),
        magnitude=float(doc.get("magnitude", 1e-3)),
        record_stride=int(doc.get("record_stride", 10)),
        probe_pair=tuple(probe["pair"]) if "pair" in probe else None,
        probe_component=int(probe.get("component", 0)),
        name=str(doc.get("name", "")),
        note=str(doc.get("note", "")),
        alpha_reference=(float(doc["alpha_reference"])
                         if "alpha_reference" in doc else None),
    )


def read_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return scenario_from_json(json.load(fh))


def bundled_scenario_names() -> list[str]:
    root = resources.files("syncgap").joinpath("scenarios")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_scenario(name: str) -> Scenario:
    """Load a scenario shipped with the package (see bundled_scenario_names)."""
    root = resources.files("syncgap").joinpath("scenarios")
    ref = root.joinpath(f"{name}.json")
    if not ref.is_file():
        raise KeyError(
            f"no bundled scenario {name!r}; available: {bundled_scenario_names()}"
        )
    return scenario_from_json(ref.read_text(encoding="utf-8"))
