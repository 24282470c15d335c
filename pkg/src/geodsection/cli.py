"""Command line front end.

Exit codes: 0 ok, 1 usage or config error, 2 audit or verification failure,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .closedform import RevolutionProfile, billiard_second_iterate, clairaut_g, ellipsoid_g, predicted_return, return_angle_function
from .config import RunConfig, load_config
from .errors import ConfigError, GeodSectionError, UnsupportedSurface
from .flow import integrate, trajectory_rows
from .section import estimate_epsilon, random_page_points, return_map
from .surface import Ellipsoid, Revolution, audit_surface, project_to_surface

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_NUMERIC = 0, 1, 2, 3
TAU_SLACK = 1e-6
TWO_PI = 2.0 * math.pi


def _out_dir(cfg: RunConfig, override: str | None) -> Path:
    return Path(override or cfg.output.directory)


def _wants(cfg: RunConfig, fmt: str) -> bool:
    return fmt in cfg.output.formats


def _row_seeds(seed: int, count: int):
    return np.random.SeedSequence(seed).spawn(count)


def _run_audit(cfg: RunConfig):
    surface = cfg.surface.build()
    return audit_surface(surface, cfg.audit.samples, cfg.audit.strip_halfwidth, cfg.audit.seed)


def cmd_audit(cfg: RunConfig, out: Path, args) -> int:
    report, _ = _run_audit(cfg)
    path = io.write_json(out / "audit.json", {"report": report.to_dict()}, cfg.resolved())
    verdict = "PASS" if report.passed else "FAIL"
    print(f"audit {verdict}: symmetry={report.symmetry.ok} definiteness={report.definiteness.classification} "
          f"epsilon={report.epsilon_estimate:.6g} -> {path}")
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_epsilon(cfg: RunConfig, out: Path, args) -> int:
    surface = cfg.surface.build()
    eps, witness = estimate_epsilon(surface, cfg.audit.samples, cfg.audit.seed, return_witness=True)
    payload = {"epsilon": eps, "witness": {"x": witness.x, "y": witness.y}, "samples": cfg.audit.samples}
    if _wants(cfg, "json"):
        io.write_json(out / "epsilon.json", payload, cfg.resolved())
    print(f"epsilon = {eps!r}")
    return EXIT_OK


def cmd_flow(cfg: RunConfig, out: Path, args) -> int:
    surface = cfg.surface.build()
    block = cfg.flow
    if block.x is not None:
        if len(block.x) != surface.ambient_dim or len(block.y) != surface.ambient_dim:
            raise ConfigError(f"flow.x and flow.y need {surface.ambient_dim} entries")
        start = project_to_surface(surface, block.x, block.y)
    else:
        start = random_page_points(surface, 1, np.random.SeedSequence(block.seed))[0]
    traj = integrate(surface, start, block.time, cfg.integrator.build(), record=True)
    d = surface.ambient_dim
    header = ["t", *io.axis_names("x", d), *io.axis_names("y", d), "abs_f", "abs_y_dot_grad", "norm_y_minus_1", "unwrapped_angle"]
    if _wants(cfg, "csv"):
        io.write_csv(out / "trajectory.csv", header, trajectory_rows(surface, traj), cfg.resolved())
    final = traj.final
    summary = {
        "start": {"x": start.x, "y": start.y},
        "end": {"x": final.phase.x, "y": final.phase.y},
        "time": final.time,
        "unwrapped_angle": final.unwrapped_angle,
        "steps": len(traj.states) - 1,
        "max_raw_drift": traj.max_drift,
    }
    if _wants(cfg, "json"):
        io.write_json(out / "flow.json", summary, cfg.resolved())
    print(f"flow: t = {final.time!r}, angle = {final.unwrapped_angle:.12g}, steps = {summary['steps']}")
    return EXIT_OK


def _section_row(payload):
    """One sweep row; runs in worker processes, so it rebuilds everything from plain data."""
    cfg_data, index, seed_seq = payload
    cfg = RunConfig.model_validate(cfg_data)
    surface = cfg.surface.build()
    start = random_page_points(surface, 1, seed_seq, cfg.sweep.min_y0)[0]
    try:
        rec = return_map(surface, start, cfg.integrator.build())
    except GeodSectionError as exc:
        return index, start, None, f"{type(exc).__name__}: {exc}".replace("\n", " ")
    return index, start, rec, ""


def _map_rows(func, payloads, jobs: int):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(func, payloads))
    return [func(p) for p in payloads]


def cmd_section(cfg: RunConfig, out: Path, args) -> int:
    report, normalized = _run_audit(cfg)
    if not report.passed and not args.force:
        io.write_json(out / "audit.json", {"report": report.to_dict()}, cfg.resolved())
        print("section: audit failed (use --force to sweep anyway)", file=sys.stderr)
        return EXIT_VERIFY
    eps = report.epsilon_estimate
    bound = TWO_PI / eps if eps > 0 else math.inf
    data = cfg.resolved()
    data["surface"]["sign_normalized"] = normalized.sign_normalized
    seeds = _row_seeds(cfg.sweep.seed, cfg.sweep.starts)
    results = _map_rows(_section_row, [(data, i, s) for i, s in enumerate(seeds)], cfg.sweep.jobs)
    d = normalized.ambient_dim
    header = [
        "row",
        *io.axis_names("start_x", d),
        *io.axis_names("start_y", d),
        *io.axis_names("end_x", d),
        *io.axis_names("end_y", d),
        "tau",
        "angle_total",
        "max_drift",
        "steps",
        "tau_bound",
        "error",
    ]
    rows, taus, drifts, errors, over = [], [], [], 0, 0
    for index, start, rec, err in results:
        if rec is None:
            errors += 1
            rows.append([index, *start.x, *start.y, *([None] * 2 * d), None, None, None, None, bound, err])
            continue
        taus.append(rec.tau)
        drifts.append(rec.max_drift)
        if rec.tau > bound * (1 + TAU_SLACK):
            over += 1
        rows.append([index, *start.x, *start.y, *rec.end.x, *rec.end.y, rec.tau, rec.angle_total, rec.max_drift, rec.steps, bound, err])
    max_tau = max(taus, default=math.nan)
    max_drift = max(drifts, default=math.nan)
    rows.append(["summary", *([None] * 4 * d), max_tau, None, max_drift, None, bound, f"errors={errors} over_bound={over}"])
    if _wants(cfg, "csv"):
        io.write_csv(out / "section.csv", header, rows, cfg.resolved())
    if _wants(cfg, "json"):
        io.write_json(
            out / "section.json",
            {"epsilon": eps, "tau_bound": bound, "max_tau": max_tau, "max_drift": max_drift, "rows": len(results),
             "errors": errors, "over_bound": over, "audit": report.to_dict()},
            cfg.resolved(),
        )
    print(f"section: {len(results)} starts, max tau = {max_tau:.10g}, bound 2pi/eps = {bound:.10g}, errors = {errors}")
    if errors:
        return EXIT_NUMERIC
    return EXIT_VERIFY if over else EXIT_OK


def _compare_row(payload):
    cfg_data, index, seed_seq = payload
    cfg = RunConfig.model_validate(cfg_data)
    surface = cfg.surface.build()
    start = random_page_points(surface, 1, seed_seq, cfg.sweep.min_y0)[0]
    try:
        rec = return_map(surface, start, cfg.integrator.build())
    except GeodSectionError as exc:
        return index, start, None, None, f"{type(exc).__name__}: {exc}".replace("\n", " ")
    xe, ye = predicted_return(surface, start.x, start.y)
    diff = float(np.max(np.abs(np.concatenate([rec.end.x - xe, rec.end.y - ye]))))
    billiard = None
    if cfg.compare.billiard:
        xv = start.x[1:] / np.linalg.norm(start.x[1:])
        xb, _ = billiard_second_iterate(xv, start.y[1:])
        billiard = float(np.max(np.abs(rec.end.x[1:] / np.linalg.norm(rec.end.x[1:]) - xb)))
    return index, start, rec, (diff, billiard), ""


def _g_table(surface) -> list[list]:
    rows = []
    ts = [round(0.1 * k, 1) for k in range(1, 10)]
    if isinstance(surface, Ellipsoid):
        a0 = surface.semiaxes[0]
        prof = RevolutionProfile.sine(a0)
        for t in ts:
            g_e, g_c = ellipsoid_g(t, a0), clairaut_g(t, prof)
            rows.append([t, f"ellipsoid a0={a0!r}", g_e, g_c, 4 * math.acos(t), abs(g_e - g_c)])
    elif isinstance(surface, Revolution):
        for t in ts:
            g_c = clairaut_g(t, surface.profile)
            g_0 = 4 * math.acos(t)
            rows.append([t, f"revolution a={surface.profile.text}", None, g_c, g_0, abs(g_c - g_0)])
    return rows


def cmd_compare(cfg: RunConfig, out: Path, args) -> int:
    surface = cfg.surface.build()
    if isinstance(surface, Ellipsoid) and not surface.is_revolution:
        raise UnsupportedSurface("compare needs ellipsoid semiaxes of the form (a0, 1, ..., 1)")
    return_angle_function(surface)
    seeds = _row_seeds(cfg.compare.seed, cfg.compare.starts)
    data = cfg.resolved()
    results = _map_rows(_compare_row, [(data, i, s) for i, s in enumerate(seeds)], cfg.sweep.jobs)
    d = surface.ambient_dim
    header = ["row", *io.axis_names("start_x", d), *io.axis_names("start_y", d), "t", "G", "tau", "max_coordinate_error", "billiard_error", "error"]
    g_of = return_angle_function(surface)
    rows, worst, errors = [], 0.0, 0
    for index, start, rec, diffs, err in results:
        t = min(float(np.linalg.norm(start.y[1:])), 1.0)
        if rec is None:
            errors += 1
            rows.append([index, *start.x, *start.y, t, None, None, None, None, err])
            continue
        worst = max(worst, diffs[0])
        rows.append([index, *start.x, *start.y, t, g_of(t), rec.tau, diffs[0], diffs[1], err])
    if _wants(cfg, "csv"):
        io.write_csv(out / "compare.csv", header, rows, cfg.resolved())
        table = _g_table(surface)
        if table:
            io.write_csv(out / "g_table.csv", ["t", "surface", "G_closed", "G_clairaut", "G_billiard", "abs_diff"], table, cfg.resolved())
    ok = worst < cfg.compare.tolerance
    if _wants(cfg, "json"):
        io.write_json(
            out / "compare.json",
            {"max_coordinate_error": worst, "tolerance": cfg.compare.tolerance, "passed": ok and not errors, "errors": errors},
            cfg.resolved(),
        )
    print(f"compare: {len(results)} starts, max coordinate error = {worst:.3e} (tolerance {cfg.compare.tolerance:g})")
    if errors:
        return EXIT_NUMERIC
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {
    "audit": (cmd_audit, "check symmetry, definiteness and epsilon; writes audit.json"),
    "flow": (cmd_flow, "integrate one trajectory; writes trajectory.csv and flow.json"),
    "section": (cmd_section, "sweep return maps over random page starts; writes section.csv"),
    "compare": (cmd_compare, "numeric return maps against closed forms; writes compare.csv"),
    "epsilon": (cmd_epsilon, "estimate the angular bound epsilon"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geodsection", description="Global hypersurfaces of section for geodesic flows.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", "-c", help="JSON run configuration")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config value, e.g. integrator.base_step=1e-4 (repeatable)")
        p.add_argument("--out", help="output directory (overrides output.directory)")
        if name == "section":
            p.add_argument("--force", action="store_true", help="sweep even if the audit fails")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    func = COMMANDS[args.command][0]
    try:
        cfg = load_config(args.config, args.overrides)
        return func(cfg, _out_dir(cfg, args.out), args)
    except GeodSectionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
