"""Command-line front end: run scenarios, validate gains, run property suites."""
from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from .control import check_matrices_W1_W2_M, validate_c
from .exceptions import DomainInvalid, GeoAttError, InfeasibleGoal
from .geometry import bound_ledger, default_domain_caps, estimate_quadratic_bounds
from .sim import euler313_demo, load_scenario, monitors, run, scenario_from_dict, write_csv
from . import verify as verify_mod

EXIT_OK = 0
EXIT_PROPERTY_FAILURE = 1
EXIT_CONSTRAINT_VIOLATED = 2
EXIT_INVALID_CONFIG = 3
EXIT_INFEASIBLE = 4

log = logging.getLogger("geoatt.cli")

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

# scenario-file keys that --override may introduce even when absent
_OPTIONAL_KEYS = {"T", "dt", "seed", "substeps", "mode", "Omega0",
                  "disturbance", "waypoints", "gravity", "notes"}


def _configure_logging():
    level = os.environ.get("GEOATT_LOG_LEVEL", "warn").lower()
    logging.basicConfig(level=_LOG_LEVELS.get(level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _parse_override(text: str) -> tuple[list[str], object]:
    if "=" not in text:
        raise DomainInvalid(f"override must look like key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.split("."), value


def _apply_override(cfg: dict, path: list[str], value) -> None:
    node = cfg
    for part in path[:-1]:
        if not isinstance(node, dict) or part not in node:
            raise DomainInvalid(f"override key {'.'.join(path)!r} not in config")
        node = node[part]
    leaf = path[-1]
    if not isinstance(node, dict):
        raise DomainInvalid(f"override key {'.'.join(path)!r} not in config")
    if leaf not in node and not (node is cfg and leaf in _OPTIONAL_KEYS):
        raise DomainInvalid(f"override key {'.'.join(path)!r} not in config")
    node[leaf] = value


def _load_config(path: str, overrides, dt, duration, seed) -> dict:
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainInvalid(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise DomainInvalid(f"config {path} must be a JSON object")
    for text in overrides or []:
        key_path, value = _parse_override(text)
        _apply_override(cfg, key_path, value)
    if dt is not None:
        cfg["dt"] = dt
    if duration is not None:
        cfg["T"] = duration
    if seed is not None:
        cfg["seed"] = seed
    return cfg


def _simulate_one(path: str, out_dir: str, overrides, dt, duration, seed):
    """Run one config; returns (summary dict, exit code)."""
    t0 = time.perf_counter()
    cfg = _load_config(path, overrides, dt, duration, seed)
    scenario = scenario_from_dict(cfg)
    tl = run(scenario)
    wall = time.perf_counter() - t0
    report = monitors(tl)
    code = EXIT_OK if tl.complete else EXIT_CONSTRAINT_VIOLATED

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(tl, out / f"{scenario.name}.csv")
    summary = {
        "schema": 1,
        "scenario": scenario.name,
        "mode": tl.mode,
        "terminal_psi": report["terminal_psi"],
        "terminal_delta_error": report["terminal_delta_error"],
        "min_margin_deg": report["min_margin_deg"],
        "lyapunov_violations": report["lyapunov_violations"],
        "wall_time_s": wall,
        "complete": tl.complete,
        "violation": tl.violation,
        "exit_status": code,
    }
    (out / f"{scenario.name}.summary.json").write_text(
        json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return summary, code


def cmd_simulate(args) -> int:
    worst = EXIT_OK
    results = []
    jobs = [(path, args.out, args.override, args.dt, args.duration, args.seed)
            for path in args.config]
    try:
        if args.batch and len(jobs) > 1:
            with concurrent.futures.ProcessPoolExecutor() as pool:
                futures = [pool.submit(_simulate_one, *job) for job in jobs]
                outcomes = [f.result() for f in futures]
        else:
            outcomes = [_simulate_one(*job) for job in jobs]
    except InfeasibleGoal as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (DomainInvalid, GeoAttError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_CONFIG

    for summary, code in outcomes:
        results.append(summary)
        worst = max(worst, code)

    header = f"{'scenario':<28} {'terminal_psi':>14} {'min_margin_deg':>15} {'wall_s':>8} {'status':>8}"
    print(header)
    print("-" * len(header))
    for s in results:
        margin = min(s["min_margin_deg"]) if s["min_margin_deg"] else float("nan")
        status = "ok" if s["complete"] else "violated"
        print(f"{s['scenario']:<28} {s['terminal_psi']:>14.4e} "
              f"{margin:>15.3f} {s['wall_time_s']:>8.2f} {status:>8}")
    return worst


def cmd_validate_gains(args) -> int:
    try:
        scenario = load_scenario(args.config)
        p = scenario.params
        psi_cap, _ = default_domain_caps(p.G, scenario.cones)
        ledgers = []
        for cone in scenario.cones:
            beta_cap = 0.9 * cone.cos_theta
            ledgers.append(bound_ledger(p.G, cone, p.alpha, psi_cap, beta_cap))
        worst = max(ledgers, key=lambda led: led.H)

        n1, n2 = estimate_quadratic_bounds(
            scenario.Rd, scenario.r, scenario.cones, p.G, p.alpha,
            psi_cap, min(led.beta_cap for led in ledgers),
            samples=args.samples, seed=args.seed)
    except (DomainInvalid, GeoAttError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_CONFIG

    n1_safe = 0.5 * n1  # sampled estimate, halved as a safety margin
    print(f"scenario: {scenario.name}")
    for i, led in enumerate(ledgers):
        print(f"cone {i + 1}: h1={led.h1:.6g} h2={led.h2:.6g} h3={led.h3:.6g} "
              f"b1={led.b1:.6g} b2={led.b2:.6g}")
        print(f"         psi_cap={led.psi_cap:.6g} beta_cap={led.beta_cap:.6g} "
              f"cA={led.cA:.6g} cB={led.cB:.6g}")
        print(f"         |E|<={led.normE_bound:.6g} |F|<={led.normF_bound:.6g} "
              f"|e_RA|<={led.eRA_bound:.6g} |e_RB|<={led.eRB_bound:.6g} H={led.H:.6g}")
    print(f"sampled quadratic constants (estimate): n1={n1:.6g} n2={n2:.6g} "
          f"(n1 used with 2x margin: {n1_safe:.6g})")

    ok, c_max = validate_c(p, worst, n1_safe)
    print(f"c = {p.c:g}, c_max = {c_max:.6g} -> {'OK' if ok else 'OUT OF RANGE'}")

    report = check_matrices_W1_W2_M(p, worst, n1_safe, n2)
    for name in ("W1", "W2", "M"):
        verdict = "positive definite" if report[f"{name}_positive_definite"] \
            else "NOT positive definite"
        print(f"{name}: {verdict}")
    return EXIT_OK


def cmd_demo_euler(args) -> int:
    rows = euler313_demo(theta2_window_deg=tuple(args.window),
                         samples=args.samples)
    lines = ["t,theta1,theta2,theta3,rate1,rate2,rate3,singular"]
    for s in rows:
        lines.append(f"{s.t:.17g},{s.theta1:.17g},{s.theta2:.17g},{s.theta3:.17g},"
                     f"{s.rate1:.17g},{s.rate2:.17g},{s.rate3:.17g},{int(s.singular)}")
    try:
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    max_rate1 = max(abs(s.rate1) for s in rows)
    flagged = sum(s.singular for s in rows)
    print(f"wrote {len(rows)} samples to {args.out} ({flagged} flagged singular)")
    print(f"max |rate1| = {max_rate1:.6g} rad/s")
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        results = verify_mod.run_all(seed=args.seed, samples=args.samples,
                                     fault=args.inject_fault)
    except DomainInvalid as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    failed = False
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failed = failed or not ok
    return EXIT_PROPERTY_FAILURE if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geoatt",
        description="Constrained geometric attitude control simulations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run scenario configs, write CSV + summary")
    p_sim.add_argument("--config", action="append", required=True,
                       help="scenario JSON file (repeatable)")
    p_sim.add_argument("--out", default=".", help="output directory")
    p_sim.add_argument("--override", action="append", default=[],
                       metavar="K=V", help="config override, dotted keys (repeatable)")
    p_sim.add_argument("--dt", type=float, default=None)
    p_sim.add_argument("--duration", type=float, default=None)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--batch", action="store_true",
                       help="fan configs across worker processes")
    p_sim.set_defaults(func=cmd_simulate)

    p_val = sub.add_parser("validate-gains", help="print bound ledger and gain verdicts")
    p_val.add_argument("--config", required=True)
    p_val.add_argument("--samples", type=int, default=20_000)
    p_val.add_argument("--seed", type=int, default=0)
    p_val.set_defaults(func=cmd_validate_gains)

    p_euler = sub.add_parser("demo-euler", help="3-1-3 Euler-angle singularity sweep")
    p_euler.add_argument("--out", default="euler_demo.csv")
    p_euler.add_argument("--window", type=float, nargs=2, default=[0.0, 180.0],
                         metavar=("LO", "HI"), help="theta2 window in degrees")
    p_euler.add_argument("--samples", type=int, default=721)
    p_euler.set_defaults(func=cmd_demo_euler)

    p_verify = sub.add_parser("verify", help="run the property suites")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--samples", type=int, default=10_000)
    p_verify.add_argument("--inject-fault", default=None, help=argparse.SUPPRESS)
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
