"""Command-line front end: reproducible analysis runs with file outputs.

Four subcommands (``analyze``, ``rank``, ``msf``, ``simulate``) wire the
library into directory-per-run artifact sets: delimited data plus JSON
reports, a ``manifest.json`` with sha256 hashes of every artifact, and
(unless ``--no-figures``) rendered PNG figures.  Simulation runs also emit
a gnuplot script so the plots can be regenerated without Python.

Exit codes: 0 success; 2 unreadable or invalid input; 3 degenerate
spectrum or no critical-coupling crossing (``analyze`` still writes its
report in that case, with the degeneracy flagged); 1 other failures.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import plotting
from .errors import (BranchError, ConvergenceError, DegenerateGapError,
                     DegenerateZeroError, EdgeListError, NoCrossingError,
                     SyncgapError)
from .models import coupling_by_name, model_by_name
from .msf import critical_coupling
from .network import decompose, has_rooted_spanning_tree, network_to_json, read_network
from .sensitivity import (_two_block_split, block_eigenview, classify_links,
                          edge_perturbation, fd_oracle, perturbation)
from .simulate import (bundled_scenario, bundled_scenario_names,
                       first_sustained_desync, integrate, read_scenario,
                       scenario_to_json, sync_error_series)
from .spectra import eigen_all, gershgorin, perron_certificate, spectral_gap

__all__ = ["main"]

#: Report-level failure threshold for the sustained-desynchronization time.
DESYNC_THRESHOLD = 1e-1
DESYNC_SUSTAIN = 10


# ---------------------------------------------------------------------------
# serialization helpers

def _g(x) -> str:
    """Shortest decimal that round-trips a float (for CSV cells)."""
    return format(float(x), ".17g")


def _cnum(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _vec(v) -> list:
    a = np.asarray(v)
    if np.iscomplexobj(a):
        return [_cnum(z) for z in a]
    return [float(x) for x in a]


def _mat(m) -> list:
    return [_vec(row) for row in np.asarray(m)]


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path: Path, doc) -> Path:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _prep_out(out) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _finish(out: Path, command: str, config: dict, artifacts) -> None:
    """Write the manifest: resolved configuration plus artifact hashes.

    Deliberately no timestamps or host details -- two runs with the same
    configuration must produce byte-identical manifests.
    """
    manifest = {
        "command": command,
        "config": config,
        "artifacts": {p.name: _sha256(p) for p in artifacts},
    }
    _write_json(out / "manifest.json", manifest)


# ---------------------------------------------------------------------------
# analyze

def cmd_analyze(args) -> int:
    net = read_network(args.input)
    out = _prep_out(args.out)
    dec = decompose(net)
    lam = eigen_all(net)

    report = {
        "network": network_to_json(net),
        "components": [list(c) for c in dec.components],
        "condensation": [list(e) for e in dec.condensation],
        "cutset_edges": [[s, d, w] for s, d, w in dec.cutset_edges],
        "rooted_spanning_tree": has_rooted_spanning_tree(net),
        "eigenvalues": [_cnum(z) for z in lam],
        "degenerate": False,
    }

    gap = None
    try:
        gap = spectral_gap(net, seed=args.seed)
        report["zero_simple"] = True
    except DegenerateZeroError as exc:
        report["zero_simple"] = False
        report["gap"] = None
        report["degenerate"] = True
        report["degenerate_reason"] = str(exc)

    if gap is not None:
        report["gap"] = {
            "value": _cnum(gap.value),
            "complex": gap.value.imag != 0.0,
            "simple": gap.simple,
            "separation": gap.separation,
            "residual": gap.residual,
            "right": _vec(gap.right),
            "left": _vec(gap.left),
        }
        if not gap.simple:
            report["degenerate"] = True
            report["degenerate_reason"] = (
                f"gap is within {gap.separation:.3g} of another eigenvalue"
            )

    bf = _two_block_split(net)
    if bf is None:
        report["two_block"] = None
    else:
        block = bf.downstream_block
        blk = {
            "upstream": list(bf.upstream),
            "downstream": list(bf.downstream),
            "upstream_eigenvalues": [_cnum(z) for z in eigen_all(bf.upstream_lap)],
            "downstream_eigenvalues": [_cnum(z) for z in eigen_all(block)],
        }
        try:
            cert = perron_certificate(block)
            blk["perron"] = {
                "shift": cert.shift,
                "perron_root": cert.perron_root,
                "min_real_eig": cert.min_real_eig,
                "positive": cert.positive,
                "iterations": cert.iterations,
                "right_vec": _vec(cert.right_vec),
                "left_vec": _vec(cert.left_vec),
            }
        except (ValueError, ConvergenceError) as exc:
            blk["perron"] = {"error": str(exc)}
        gersh = gershgorin(block)
        blk["gershgorin"] = {
            "centers": _vec(gersh.centers),
            "radii": _vec(gersh.radii),
            "lower_bound": gersh.lower_bound,
            "nonnegative": gersh.nonnegative,
            "diagonally_dominant": gersh.diagonally_dominant,
        }
        if gap is not None and gap.simple:
            try:
                view = block_eigenview(bf, gap=gap, seed=args.seed)
                blk["gap_in_downstream"] = True
                blk["downstream_left"] = _vec(view.downstream_left)
                blk["downstream_right"] = _vec(view.downstream_right)
                blk["upstream_response"] = _vec(view.response)
                blk["upstream_right"] = _vec(view.upstream_right)
            except SyncgapError as exc:
                blk["gap_in_downstream"] = False
                blk["gap_location_note"] = str(exc)
        report["two_block"] = blk

    artifacts = [_write_json(out / "report.json", report)]
    if not args.no_figures:
        artifacts.append(plotting.spectrum_figure(
            lam, gap.value if gap is not None else None, out / "spectrum.png"))
    config = {"input": str(args.input), "seed": args.seed,
              "figures": not args.no_figures}
    _finish(out, "analyze", config, artifacts)

    if report["degenerate"]:
        print(f"syncgap: degenerate spectrum: {report['degenerate_reason']}",
              file=sys.stderr)
        return 3
    return 0


# ---------------------------------------------------------------------------
# rank

def _parse_candidates(spec: str):
    """Family name, or comma-separated ``src->dst[=dw]`` triples."""
    spec = spec.strip()
    if spec in ("all-absent-edges", "absent", "absent-symmetric", "cutset"):
        return spec
    items = []
    for chunk in spec.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        head, _, dw_part = chunk.partition("=")
        src, arrow, dst = head.partition("->")
        src, dst = src.strip(), dst.strip()
        if not arrow or not src or not dst:
            raise ValueError(
                f"candidate {chunk!r} is not 'src->dst' or 'src->dst=dw', "
                "and not a known family (all-absent-edges, absent-symmetric, cutset)"
            )
        if dw_part:
            items.append((src, dst, float(dw_part)))
        else:
            items.append((src, dst))
    if not items:
        raise ValueError("empty candidate list")
    return items


def _row_perturbation(net, family, row):
    """Rebuild the perturbation a ranking row was scored with."""
    if family == "absent-symmetric":
        return perturbation(net, [(row.src, row.dst, row.dw),
                                  (row.dst, row.src, row.dw)])
    return edge_perturbation(net, row.src, row.dst, row.dw)


def cmd_rank(args) -> int:
    net = read_network(args.input)
    candidates = _parse_candidates(args.candidates)
    out = _prep_out(args.out)

    rows = classify_links(net, candidates, top=args.top, seed=args.seed)

    family = candidates if isinstance(candidates, str) else None
    oracle_cols = {}
    if args.oracle:
        for row in rows:
            pert = _row_perturbation(net, family, row)
            try:
                fd = fd_oracle(net, pert)
                oracle_cols[(row.src, row.dst)] = (fd, abs(fd - row.slope))
            except BranchError:
                oracle_cols[(row.src, row.dst)] = (None, None)

    header = ["src", "dst", "dw", "slope_re", "slope_im", "verdict"]
    if args.oracle:
        header += ["oracle_re", "oracle_im", "oracle_dev"]
    csv_rows = []
    json_rows = []
    for row in rows:
        cells = [row.src, row.dst, _g(row.dw),
                 _g(row.slope.real), _g(row.slope.imag), row.verdict]
        entry = {
            "src": row.src, "dst": row.dst, "dw": row.dw,
            "slope": _cnum(row.slope), "verdict": row.verdict,
            "coupling": _mat(row.coupling) if row.coupling is not None else None,
        }
        if args.oracle:
            fd, dev = oracle_cols[(row.src, row.dst)]
            if fd is None:
                cells += ["nan", "nan", "nan"]
                entry["oracle"] = None
            else:
                cells += [_g(fd.real), _g(fd.imag), _g(dev)]
                entry["oracle"] = _cnum(fd)
                entry["oracle_dev"] = dev
        csv_rows.append(cells)
        json_rows.append(entry)

    artifacts = [
        _write_csv(out / "ranking.csv", header, csv_rows),
        _write_json(out / "ranking.json", {
            "network": network_to_json(net),
            "candidates": args.candidates,
            "rows": json_rows,
        }),
    ]
    if not args.no_figures and rows:
        artifacts.append(plotting.ranking_figure(rows, out / "ranking.png"))
    config = {"input": str(args.input), "seed": args.seed,
              "candidates": args.candidates, "top": args.top,
              "oracle": bool(args.oracle), "figures": not args.no_figures}
    _finish(out, "rank", config, artifacts)
    return 0


# ---------------------------------------------------------------------------
# msf

def cmd_msf(args) -> int:
    model = model_by_name(args.model)
    gamma = coupling_by_name(args.coupling)
    out = _prep_out(args.out)

    curve = critical_coupling(model, gamma, args.nu_max, n_grid=args.grid,
                              dt=args.dt, t_total=args.t_total, seed=args.seed)

    artifacts = [
        _write_csv(out / "msf_curve.csv", ("nu", "lambda_max", "stderr"),
                   [(_g(nu), _g(ex), _g(se)) for nu, ex, se
                    in zip(curve.nu, curve.exponents, curve.stderrs)]),
        _write_json(out / "msf.json", {
            "model": args.model,
            "coupling": args.coupling,
            "alpha_c": curve.alpha_c,
            "crossings": [[a, b] for a, b in curve.crossings],
            "tail_negative": curve.tail_negative,
        }),
    ]
    if not args.no_figures:
        artifacts.append(plotting.msf_figure(curve, out / "msf.png"))
    config = {"model": args.model, "coupling": args.coupling,
              "nu_max": args.nu_max, "grid": args.grid, "dt": args.dt,
              "t_total": args.t_total, "seed": args.seed,
              "figures": not args.no_figures}
    _finish(out, "msf", config, artifacts)
    print(f"alpha_c = {curve.alpha_c:.6g}")
    return 0


# ---------------------------------------------------------------------------
# simulate

def _load_scenario(spec: str):
    path = Path(spec)
    if path.is_file():
        return read_scenario(path)
    if "/" not in spec and "\\" not in spec and not spec.endswith(".json"):
        return bundled_scenario(spec)
    raise OSError(f"scenario file not found: {spec}")


def _gnuplot_script(events) -> str:
    lines = [
        "# Synchronization-error plots; render with: gnuplot plot.gp",
        "set datafile separator ','",
        "set terminal pngcairo size 900,640",
        "set xlabel 't'",
        "set key top left",
    ]
    for ev in events:
        lines.append(f"set arrow from {_g(ev.time)}, graph 0 "
                     f"to {_g(ev.time)}, graph 1 nohead dashtype 3")
    lines += [
        "",
        "set output 'sync_error_gp.png'",
        "set ylabel 'sync error'",
        "set logscale y",
        "plot 'sync_error.csv' skip 1 using 1:2 with lines lw 1 "
        "title 'max pairwise spread', \\",
        f"     {DESYNC_THRESHOLD:g} with lines dashtype 2 title 'failure threshold'",
        "",
        "unset logscale y",
        "set output 'probe_difference_gp.png'",
        "set ylabel 'probe difference'",
        "plot 'sync_error.csv' skip 1 using 1:3 with lines lw 1 "
        "title 'probe pair difference'",
    ]
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    sc = _load_scenario(args.input)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.dt is not None:
        overrides["dt"] = args.dt
    if args.alpha is not None:
        overrides["alpha"] = args.alpha
    if overrides:
        sc = dataclasses.replace(sc, **overrides)
    out = _prep_out(args.out)

    traj = integrate(sc)
    probe_a, probe_b = sc.probe
    probe = sync_error_series(traj, pair=(probe_a, probe_b),
                              component=sc.probe_component)

    traj_rows = []
    for k, t in enumerate(traj.times):
        tg = _g(t)
        for i, node in enumerate(traj.labels):
            x, y, z = traj.states[k, i, :]
            traj_rows.append((tg, node, _g(x), _g(y), _g(z)))
    err_rows = [(_g(t), _g(e), _g(d))
                for t, e, d in zip(traj.times, traj.sync_error, probe)]

    desync = first_sustained_desync(traj, threshold=DESYNC_THRESHOLD,
                                    sustain=DESYNC_SUSTAIN)
    last_event = max((ev.time for ev in sc.events), default=None)
    summary = {
        "desync_threshold": DESYNC_THRESHOLD,
        "desync_sustain_samples": DESYNC_SUSTAIN,
        "first_sustained_desync": desync,
        "max_sync_error": float(traj.sync_error.max()),
        "final_sync_error": float(traj.sync_error[-1]),
        "events": [{"t": ev.time, "src": ev.src, "dst": ev.dst,
                    "weight": ev.weight} for ev in sc.events],
    }
    if last_event is not None:
        before = traj.times <= last_event
        summary["max_sync_error_before_last_event"] = float(
            traj.sync_error[before].max())
        summary["first_sustained_desync_after_last_event"] = (
            first_sustained_desync(traj, threshold=DESYNC_THRESHOLD,
                                   sustain=DESYNC_SUSTAIN, after=last_event))

    scenario_doc = scenario_to_json(sc)
    artifacts = [
        _write_csv(out / "trajectory.csv", ("t", "node", "x", "y", "z"), traj_rows),
        _write_csv(out / "sync_error.csv", ("t", "sync_error", "diff_selected"),
                   err_rows),
        _write_json(out / "scenario.json", scenario_doc),
        _write_json(out / "summary.json", summary),
    ]
    gp = out / "plot.gp"
    gp.write_text(_gnuplot_script(sc.events), encoding="utf-8")
    artifacts.append(gp)
    if not args.no_figures:
        artifacts.append(plotting.trajectory_figure(
            traj, probe,
            f"x[{probe_a}] - x[{probe_b}] (component {sc.probe_component})",
            out / "trajectory.png",
            event_times=[ev.time for ev in sc.events],
            threshold=DESYNC_THRESHOLD))
    config = {"input": str(args.input), "scenario": scenario_doc,
              "figures": not args.no_figures}
    _finish(out, "simulate", config, artifacts)
    if desync is None:
        print("no sustained desynchronization")
    else:
        print(f"sustained desynchronization from t = {desync:g}")
    return 0


# ---------------------------------------------------------------------------
# wiring

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="syncgap",
        description="Spectral-gap synchronizability analysis of weighted "
                    "directed oscillator networks.",
    )
    sub = ap.add_subparsers(dest="command", metavar="command", required=True)

    p = sub.add_parser("analyze", help="components, spectrum, gap, block certificates")
    p.add_argument("--input", required=True, help="edge-list CSV (src,dst,weight)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("rank", help="rank link edits by gap sensitivity")
    p.add_argument("--input", required=True, help="edge-list CSV (src,dst,weight)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--candidates", default="all-absent-edges",
                   help="all-absent-edges | absent-symmetric | cutset | "
                        "'src->dst[=dw],...' (default: %(default)s)")
    p.add_argument("--top", type=int, default=None, help="keep only the first k rows")
    p.add_argument("--oracle", action="store_true",
                   help="append finite-difference agreement columns")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("msf", help="master stability curve and critical coupling")
    p.add_argument("--model", required=True, help="hindmarsh_rose | roessler")
    p.add_argument("--coupling", default="identity",
                   help="identity | x | 3x3 via JSON scenario (default: %(default)s)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--grid", type=int, default=24, help="grid points on [0, nu-max]")
    p.add_argument("--nu-max", type=float, required=True, dest="nu_max")
    p.add_argument("--t-total", type=float, default=2e4, dest="t_total",
                   help="averaging time per exponent (default: %(default)s)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_msf)

    p = sub.add_parser("simulate", help="integrate a scenario and report failure times")
    p.add_argument("--input", required=True,
                   help="scenario JSON path, or a bundled name: "
                        + ", ".join(bundled_scenario_names()))
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override scenario seed")
    p.add_argument("--dt", type=float, default=None, help="override scenario dt")
    p.add_argument("--alpha", type=float, default=None,
                   help="override scenario coupling strength")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_simulate)

    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EdgeListError as exc:
        print(f"syncgap: invalid input: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as exc:
        print(f"syncgap: invalid input: {exc}", file=sys.stderr)
        return 2
    except (DegenerateZeroError, DegenerateGapError, NoCrossingError) as exc:
        print(f"syncgap: {exc}", file=sys.stderr)
        return 3
    except SyncgapError as exc:
        print(f"syncgap: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
