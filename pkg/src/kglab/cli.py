"""Experiment runner.

Subcommands: evolve, hegerfeldt, propagator, report.  Every command is a
pure function of its config file: identical configs produce byte-identical
outputs regardless of KGLAB_THREADS.  Exit status 0 means every verdict
passed, 1 means at least one verdict failed, 2 means a config or IO error
(reported as JSON on stderr).  The CLI computes nothing itself; every
emitted number comes from a module operation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import diagnostics, posfreq, propagator
from .config import (
    ConfigError,
    EvolveConfig,
    HegerfeldtConfig,
    PropagatorConfig,
    GridSection,
    load_config,
)
from .dispersion import Mass
from .evolution import (
    CauchyData,
    EvolutionConfig,
    energy,
    evolve_local_fd,
    evolve_spectral,
    joint_support_radius,
    leapfrog_energy,
)
from .io import field_to_csv, field_to_json, propagator_slice_to_csv, write_csv, write_json
from .propagator import QuadratureSpec
from .runtime import parallel_map

__all__ = ["main"]

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_ERROR = 2


def _verdict(value, passed: bool) -> dict:
    return {"value": value, "passed": bool(passed)}


def _write_field(field, stem: Path, out_format: str) -> None:
    if out_format == "csv":
        field_to_csv(field, stem.with_suffix(".csv"))
    else:
        field_to_json(field, stem.with_suffix(".json"))


def _run_evolve(cfg: EvolveConfig, out: Path) -> int:
    grid = cfg.grid.build()
    mass = Mass(cfg.mass)
    data = CauchyData(cfg.state.build_phi(grid), cfg.state.build_pi(grid), mass)
    r0 = joint_support_radius(data, cfg.support_threshold)
    margin = cfg.cone_margin_cells * grid.dx
    e0 = energy(data)
    evo = EvolutionConfig(method=cfg.method, dt=cfg.dt)

    def one_time(t: float):
        if cfg.method == "spectral-exact":
            state = evolve_spectral(data, t)
        else:
            state = evolve_local_fd(data, t, evo)
        return (
            state,
            energy(state),
            joint_support_radius(state, cfg.support_threshold),
            diagnostics.cone_leakage(state.phi, r0, t, margin),
            diagnostics.boundary_floor(state.phi),
        )

    results = parallel_map(one_time, cfg.times)
    # the leapfrog scheme conserves its own quadratic form, not the
    # continuum energy
    q0 = leapfrog_energy(data, cfg.dt) if cfg.method == "local-fd" else None
    rows = []
    leakages = []
    floors = []
    drifts = []
    for t, (state, e_t, radius, leakage, floor) in zip(cfg.times, results):
        rows.append((t, e_t, radius, leakage))
        leakages.append(leakage)
        floors.append(floor)
        if cfg.method == "spectral-exact":
            drifts.append(abs(e_t - e0) / e0 if e0 > 0 else 0.0)
        else:
            drifts.append(abs(leapfrog_energy(state, cfg.dt) - q0) / q0 if q0 > 0 else 0.0)
        if t in cfg.snapshot_times:
            idx = cfg.times.index(t)
            _write_field(state.phi, out / f"snapshot_{idx:03d}", cfg.out_format)
    write_csv(out / "series.csv", ["t", "energy", "joint_support_radius", "cone_leakage"], rows)

    peak = float(np.max(np.abs(data.phi.values)))
    drift = max(drifts)
    verdicts = {
        "cone_leakage": _verdict(max(leakages), max(leakages) < cfg.leakage_ceiling),
        "energy_drift": _verdict(drift, drift < (1e-12 if cfg.method == "spectral-exact" else 1e-6)),
        "boundary_floor": _verdict(max(floors), max(floors) < 1e-10 * peak),
    }
    report = {
        "command": "evolve",
        "grid": {"n": grid.n, "dx": grid.dx, "L": grid.L},
        "mass": cfg.mass,
        "method": cfg.method,
        "times": list(cfg.times),
        "initial_energy": e0,
        "initial_support_radius": r0,
        "cone_margin": margin,
        "verdicts": verdicts,
    }
    write_json(out / "report.json", report)
    return EXIT_PASS if all(v["passed"] for v in verdicts.values()) else EXIT_FAIL


def _hegerfeldt_rows(cfg: HegerfeldtConfig, grid_section: GridSection, r0: float, margin: float):
    grid = grid_section.build()
    mass = Mass(cfg.mass)
    psi0 = cfg.state.build_phi(grid)
    zero = CauchyData(psi0, cfg.state.build_pi(grid), mass)

    def one_time(t: float):
        psi_t = posfreq.evolve_positive(psi0, mass, t)
        leak = diagnostics.cone_leakage(psi_t, r0, t, margin)
        tail = diagnostics.fit_exponential_tail(psi_t, cfg.window)
        spectral_t = evolve_spectral(zero, t)
        contrast = diagnostics.cone_leakage(spectral_t.phi, r0, t, margin)
        return leak, tail, contrast

    return parallel_map(one_time, cfg.times)


def _run_hegerfeldt(cfg: HegerfeldtConfig, out: Path) -> int:
    grid = cfg.grid.build()
    mass = Mass(cfg.mass)
    psi0 = cfg.state.build_phi(grid)
    r0 = diagnostics.support_radius(psi0, cfg.support_threshold)
    margin = cfg.cone_margin_cells * grid.dx
    rows = _hegerfeldt_rows(cfg, cfg.grid, r0, margin)

    leak_rows = []
    contrast_rows = []
    for t, (leak, tail, contrast) in zip(cfg.times, rows):
        leak_rows.append((t, leak, tail.rate, tail.r2, tail.window[0], tail.window[1]))
        contrast_rows.append((t, leak, contrast))
    write_csv(
        out / "leakage.csv",
        ["t", "leakage_fraction", "fitted_rate", "fit_r2", "window_lo", "window_hi"],
        leak_rows,
    )
    write_csv(
        out / "contrast.csv",
        ["t", "positive_frequency_leakage", "spectral_leakage"],
        contrast_rows,
    )

    witness = posfreq.positivity_tail_witness(psi0, mass)
    witness_report = diagnostics.support_report(
        witness, threshold=cfg.support_threshold, window=cfg.window
    )
    (out / "witness_report.json").write_text(witness_report.to_json())

    leaks = [row[0] for row in rows]
    contrasts = [row[2] for row in rows]
    snap_idx = cfg.times.index(cfg.snapshot_time)
    snap_tail = rows[snap_idx][1]

    doubling = None
    if cfg.grid_doubling_check:
        # same cone edge (base-grid support radius and margin) isolates
        # the resolution dependence, which is what rules out aliasing
        doubled = GridSection(n=2 * cfg.grid.n, dx=cfg.grid.dx / 2.0)
        rows2 = _hegerfeldt_rows(cfg, doubled, r0, margin)
        rel = max(abs(b[0] / a[0] - 1.0) for a, b in zip(rows, rows2))
        doubling = _verdict(rel, rel < cfg.doubling_tolerance)

    floor_at = min(cfg.times, key=lambda t: abs(t - 0.01))
    verdicts = {
        "leakage_floor": _verdict(
            leaks[cfg.times.index(floor_at)], leaks[cfg.times.index(floor_at)] > cfg.leakage_floor
        ),
        "leakage_monotone": _verdict(
            leaks, all(a < b for a, b in zip(leaks, leaks[1:]))
        ),
        "spectral_contrast": _verdict(max(contrasts), max(contrasts) < cfg.contrast_ceiling),
        "witness_rate": _verdict(
            witness_report.tail_rate,
            abs(witness_report.tail_rate / cfg.mass - 1.0) < cfg.rate_band
            and witness_report.fit_r2 > cfg.min_r2,
        ),
        "snapshot_rate": _verdict(
            snap_tail.rate,
            abs(snap_tail.rate / cfg.mass - 1.0) < cfg.rate_band and snap_tail.r2 > cfg.min_r2,
        ),
    }
    if doubling is not None:
        verdicts["grid_doubling_stability"] = doubling

    report = {
        "command": "hegerfeldt",
        "grid": {"n": grid.n, "dx": grid.dx, "L": grid.L},
        "mass": cfg.mass,
        "times": list(cfg.times),
        "support_radius": r0,
        "window": list(cfg.window),
        "snapshot_time": cfg.snapshot_time,
        "verdicts": verdicts,
    }
    write_json(out / "report.json", report)
    return EXIT_PASS if all(v["passed"] for v in verdicts.values()) else EXIT_FAIL


def _run_propagator(cfg: PropagatorConfig, out: Path) -> int:
    grid = cfg.grid.build()
    mass = Mass(cfg.mass)
    quad = QuadratureSpec(
        cutoff=cfg.quadrature.cutoff,
        eps_base=cfg.quadrature.eps_base,
        rungs=cfg.quadrature.rungs,
        residual_tol=cfg.quadrature.residual_tol,
        band_fraction=cfg.quadrature.band_fraction,
    )

    def one_time(t: float):
        sample = propagator.pauli_jordan(t, grid, mass, quad)
        bridge = propagator.bridge_identity_error(sample)
        scan = None
        if t != 0.0:
            scan = propagator.spacelike_suppression_scan(
                t, grid, mass, cfg.margin, quad, cfg.ratio_ceiling
            )
        return sample, bridge, scan

    results = parallel_map(one_time, cfg.times)
    verdicts = {}
    slices = []
    all_converged = True
    for idx, (t, (sample, bridge, scan)) in enumerate(zip(cfg.times, results)):
        propagator_slice_to_csv(sample, out / f"slice_{idx:03d}.csv")
        write_json(
            out / f"slice_{idx:03d}.meta.json",
            {
                "t": t,
                "mass": cfg.mass,
                "residual": sample.residual,
                "converged": sample.converged,
                "flags": list(sample.flags),
                "quadrature": sample.quad.metadata(),
            },
        )
        entry = {
            "t": t,
            "residual": sample.residual,
            "converged": sample.converged,
            "multiplier_error": bridge,
        }
        all_converged = all_converged and sample.converged
        verdicts[f"multiplier_identity_t{idx}"] = _verdict(
            bridge, bridge < cfg.multiplier_error_ceiling
        )
        if scan is not None:
            entry["spacelike_max"] = scan.spacelike_max
            entry["timelike_max"] = scan.timelike_max
            entry["ratio"] = scan.ratio
            verdicts[f"spacelike_suppression_t{idx}"] = _verdict(scan.ratio, scan.passed)
        else:
            zero_max = float(np.max(np.abs(sample.delta.values)))
            entry["zero_slice_max"] = zero_max
            verdicts[f"zero_slice_t{idx}"] = _verdict(zero_max, zero_max < cfg.zero_slice_ceiling)
        slices.append(entry)
    verdicts["quadrature_converged"] = _verdict(all_converged, all_converged)

    report = {
        "command": "propagator",
        "grid": {"n": grid.n, "dx": grid.dx, "L": grid.L},
        "mass": cfg.mass,
        "margin": cfg.margin,
        "slices": slices,
        "verdicts": verdicts,
    }
    write_json(out / "report.json", report)
    if not all_converged:
        return EXIT_FAIL
    return EXIT_PASS if all(v["passed"] for v in verdicts.values()) else EXIT_FAIL


def _run_report(path: Path) -> int:
    with open(path) as fh:
        report = json.load(fh)
    print(f"command: {report.get('command', '?')}")
    for key in sorted(report):
        if key in ("verdicts", "slices", "command"):
            continue
        print(f"  {key}: {report[key]}")
    verdicts = report.get("verdicts", {})
    width = max((len(k) for k in verdicts), default=0)
    for name in sorted(verdicts):
        entry = verdicts[name]
        status = "PASS" if entry.get("passed") else "FAIL"
        print(f"  {name.ljust(width)}  {status}  value={entry.get('value')}")
    return EXIT_PASS


_RUNNERS = {
    "evolve": _run_evolve,
    "hegerfeldt": _run_hegerfeldt,
    "propagator": _run_propagator,
}


def _error_json(kind: str, message: str, rule: str | None = None) -> str:
    payload = {"error": {"kind": kind, "message": message}}
    if rule is not None:
        payload["error"]["rule"] = rule
    return json.dumps(payload, sort_keys=True)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="kglab", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _RUNNERS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, type=Path)
        cmd.add_argument("--out", required=True, type=Path)
        cmd.add_argument("--format", choices=("csv", "json"), default=None)
    rep = sub.add_parser("report")
    rep.add_argument("path", type=Path)
    args = parser.parse_args(argv)

    try:
        if args.subcommand == "report":
            return _run_report(args.path)
        cfg = load_config(args.config, args.subcommand)
        if args.format is not None:
            cfg = type(cfg)(**{**cfg.__dict__, "out_format": args.format})
        args.out.mkdir(parents=True, exist_ok=True)
        return _RUNNERS[args.subcommand](cfg, args.out)
    except ConfigError as exc:
        print(_error_json("config", exc.message, exc.rule), file=sys.stderr)
        return EXIT_ERROR
    except (OSError, json.JSONDecodeError) as exc:
        print(_error_json("io", str(exc)), file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(_error_json("precondition", str(exc)), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
