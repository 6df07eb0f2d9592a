"""Command-line entry point: verify, optimize, compress, dynamics.

Exit codes: 0 success, 1 tolerance or verification failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .dynamics import SweepConfig, dynamics_sweep, rows_to_csv
from .optimizer import ZERO_COST, OptimizerConfig, multi_step_infidelity
from .spin_algebra import (
    algebra_checks,
    conjugation_checks,
    difference_embedding_residual,
    hopping_embedding_residual,
)
from .trotter import (
    SCHEME_NAMES,
    block_unitaries,
    compress,
    get_scheme,
    optimize_reflection,
    step_angle,
)
from .turnover import subspace_suite, turnover_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SUITE_TOLERANCE = {"algebra": 1e-14, "turnover": 1e-12, "subspace": 1e-12}
# Constraint offset used by --break-constraint
BROKEN_OFFSET = 0.1


class UsageError(Exception):
    pass


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=False)


def write_manifest(out: Path, command: str, config, seed, started: str) -> Path:
    """Write ``<out>.manifest.json`` beside an output file."""
    digest = hashlib.sha256(_dump(config).encode()).hexdigest()
    manifest = {
        "command": command,
        "config_sha256": digest,
        "rng_seed": seed,
        "version": __version__,
        "started": started,
        "finished": _now(),
        "output": out.name,
    }
    path = out.with_name(out.name + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _write_output(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def _pool_map(fn, items, jobs: int):
    """Ordered map over a bounded process pool; runs inline for one job."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))


# --- verify ---------------------------------------------------------------------


def _algebra_suite(offset: float) -> dict[str, float]:
    checks = {}
    for rep in ("adjoint", "standard"):
        checks.update({f"{rep}: {k}": v for k, v in algebra_checks(rep).items()})
    checks.update({f"conjugation: {k}": v for k, v in conjugation_checks().items()})
    checks["4x4 two-qubit embedding"] = hopping_embedding_residual()
    if offset:
        checks["deliberate mismatch"] = offset
    return checks


def run_suite(name: str, samples: int, seed: int, offset: float) -> dict[str, float]:
    if name == "algebra":
        return _algebra_suite(offset)
    if name == "turnover":
        return turnover_suite(samples, seed, offset)
    if name == "subspace":
        return subspace_suite(max(1, min(samples, 25)), seed, offset)
    raise UsageError(f"unknown suite {name!r}")


def cmd_verify(args) -> int:
    names = list(SUITE_TOLERANCE) if args.suite == "all" else [args.suite]
    offset = BROKEN_OFFSET if args.break_constraint else 0.0
    report, ok = {}, True
    for name in names:
        tol = args.tolerance if args.tolerance is not None else SUITE_TOLERANCE[name]
        checks = run_suite(name, args.samples, args.seed, offset)
        worst = max(checks.values())
        passed = worst < tol
        ok &= passed
        report[name] = {"max_residual": worst, "tolerance": tol, "passed": passed, "checks": checks}
        print(f"{name:<10} max residual {worst:.3e}  tol {tol:.0e}  {'PASS' if passed else 'FAIL'}")
    # informational only: the 4x4 form I2(x)A - A(x)I2 is nilpotent and never matches
    report["notes"] = {"literal I2xA - AxI2 embedding residual": difference_embedding_residual()}
    if args.out:
        _write_output(Path(args.out), json.dumps(report, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


# --- optimize -------------------------------------------------------------------


def _theta_for(theta_spec, J: float) -> float:
    if isinstance(theta_spec, (int, float)) and not isinstance(theta_spec, bool):
        return float(theta_spec)
    if isinstance(theta_spec, dict) and set(theta_spec) == {"t", "steps"}:
        return step_angle(J, float(theta_spec["t"]), int(theta_spec["steps"]))
    raise UsageError('"theta" must be a number or {"t": ..., "steps": ...}')


def load_optimize_config(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    unknown = set(data) - {"J", "schemes", "nb", "theta", "optimizer"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    cfg = {
        "J": [float(j) for j in data.get("J", [0.1, 0.55, 1.0])],
        "schemes": list(data.get("schemes", SCHEME_NAMES)),
        "nb": [int(n) for n in data.get("nb", [1, 2, 3, 4, 5])],
        "theta": data.get("theta", {"t": 5.0, "steps": 200}),
        "optimizer": dict(data.get("optimizer", {})),
    }
    for s in cfg["schemes"]:
        if s not in SCHEME_NAMES:
            raise UsageError(f"unknown scheme {s!r}")
    if any(n < 1 for n in cfg["nb"]):
        raise UsageError("nb values must be >= 1")
    for J in cfg["J"]:
        _theta_for(cfg["theta"], J)
    try:
        OptimizerConfig.from_dict(cfg["optimizer"])
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad optimizer settings: {exc}") from exc
    return cfg


def _report_infidelity(c: float) -> tuple[float, float]:
    c = 0.0 if c < ZERO_COST else float(c)
    return c, math.log10(max(c, ZERO_COST))


def _optimize_job(job) -> dict:
    scheme, J, nb, theta, opt = job
    cfg = OptimizerConfig.from_dict(opt)
    res = optimize_reflection(scheme, theta, nb, cfg)
    c, lg = _report_infidelity(res.best_infidelity)
    return {
        "scheme": scheme,
        "J": J,
        "nb": nb,
        "theta": theta,
        "params": [float(p) for p in res.best_params],
        "infidelity": c,
        "log10_infidelity": lg,
        "restarts": [float(r) for r in res.restart_infidelities],
        "seed": cfg.rng_seed,
    }


def optimize_grid(cfg: dict, seed: int | None, jobs: int) -> list[dict]:
    opt = dict(cfg["optimizer"])
    if seed is not None:
        opt["rng_seed"] = seed
    grid = [
        (scheme, J, nb, _theta_for(cfg["theta"], J), opt)
        for J in cfg["J"] for scheme in cfg["schemes"] for nb in cfg["nb"]
    ]
    return _pool_map(_optimize_job, grid, jobs)


def format_table(records: list[dict]) -> str:
    nbs = sorted({r["nb"] for r in records})
    lines = []
    for J in dict.fromkeys(r["J"] for r in records):
        lines.append(f"J = {J}")
        lines.append("scheme " + "".join(f"{'nb=' + str(n):>9}" for n in nbs))
        for scheme in dict.fromkeys(r["scheme"] for r in records if r["J"] == J):
            cells = {r["nb"]: r["log10_infidelity"] for r in records if r["J"] == J and r["scheme"] == scheme}
            lines.append(f"{scheme:<7}" + "".join(f"{cells[n]:>9.2f}" if n in cells else f"{'':>9}" for n in nbs))
    return "\n".join(lines)


def cmd_optimize(args) -> int:
    started = _now()
    cfg = load_optimize_config(args.config)
    records = optimize_grid(cfg, args.seed, args.jobs)
    text = "".join(_dump(r) + "\n" for r in records)
    table = format_table(records)
    if args.out:
        out = Path(args.out)
        _write_output(out, text)
        write_manifest(out, "optimize", cfg, args.seed, started)
        print(table)
    else:
        sys.stdout.write(text)
        print(table, file=sys.stderr)
    if args.tolerance is not None and any(r["infidelity"] > args.tolerance for r in records):
        return EXIT_FAIL
    return EXIT_OK


# --- compress -------------------------------------------------------------------


def _resolve_theta(args, J: float) -> float:
    if args.theta is not None:
        return float(args.theta)
    return step_angle(J, args.t, args.steps)


def _load_params(path: str, scheme: str, nb: int) -> list[float]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read parameters {path}: {exc.strerror}") from exc
    candidates = []
    for line in text.splitlines():
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            obj = None
        if obj is not None:
            candidates.append(obj)
    if not candidates:
        try:
            candidates = [json.loads(text)]
        except json.JSONDecodeError as exc:
            raise UsageError(f"parameters file {path} is not JSON: {exc}") from exc
    for obj in candidates:
        if isinstance(obj, list):
            return [float(p) for p in obj]
        if isinstance(obj, dict) and "params" in obj:
            if obj.get("scheme", scheme) == scheme and int(obj.get("nb", nb)) == nb:
                return [float(p) for p in obj["params"]]
    raise UsageError(f"no parameters for scheme={scheme}, nb={nb} in {path}")


def cmd_compress(args) -> int:
    started = _now()
    spec = get_scheme(args.scheme)
    if args.steps < args.nb + 1:
        raise UsageError(f"need --steps >= --nb + 1 (got steps={args.steps}, nb={args.nb})")
    theta = _resolve_theta(args, args.J)
    print(f"per-step angle theta = -J t / steps = {theta:.12g}", file=sys.stderr)
    opt_cfg = OptimizerConfig(rng_seed=args.seed if args.seed is not None else 0)
    if args.auto:
        params = [float(p) for p in optimize_reflection(spec, theta, args.nb, opt_cfg).best_params]
    elif args.params_file:
        params = _load_params(args.params_file, spec.name, args.nb)
    else:
        raise UsageError("pass --params-file or --auto")
    if len(params) != spec.param_count:
        raise UsageError(f"{spec.name} takes {spec.param_count} parameters, got {len(params)}")
    wl, wr = block_unitaries(spec, theta, params)
    block_infidelity, _ = _report_infidelity(multi_step_infidelity(wl, wr, args.nb))
    circuit, report = compress(spec, theta, args.steps, args.nb, params)
    result = {
        "scheme": spec.name,
        "J": args.J,
        "nb": args.nb,
        "steps": args.steps,
        "theta": theta,
        "params": params,
        "block_infidelity": block_infidelity,
        "report": report.to_dict(),
        "circuit": circuit.to_dict(),
    }
    text = _dump(result) + "\n"
    if args.out:
        out = Path(args.out)
        _write_output(out, text)
        write_manifest(out, "compress", {k: v for k, v in vars(args).items() if k != "func"}, args.seed, started)
    else:
        sys.stdout.write(text)
    r = report
    print(f"{r.original_gate_count} -> {r.compressed_gate_count} gates, {r.substitutions_performed} "
          f"substitutions, {r.gates_merged} merged, block infidelity {block_infidelity:.3e}", file=sys.stderr)
    limit = args.max_infidelity if args.max_infidelity is not None else args.tolerance
    if limit is not None and block_infidelity > limit:
        print(f"block infidelity {block_infidelity:.3e} exceeds {limit:.3e}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# --- dynamics -------------------------------------------------------------------


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


class _ParamSource:
    """Fitted W_R angles for compressed methods, optimised on demand."""

    def __init__(self, t_total: float, seed: int, params_file: str | None):
        self.t_total = t_total
        self.seed = seed
        self.params_file = params_file

    def __call__(self, scheme, n_steps, nb, J):
        if self.params_file:
            return _load_params(self.params_file, scheme, nb)
        theta = step_angle(J, self.t_total, n_steps)
        res = optimize_reflection(scheme, theta, nb, OptimizerConfig(rng_seed=self.seed))
        return [float(p) for p in res.best_params]


def _dynamics_job(job):
    J, methods, t_total, dt, boundary, seed, params_file = job
    cfg = SweepConfig([J], methods, t_total, dt, boundary)
    return dynamics_sweep(cfg, _ParamSource(t_total, seed, params_file))


def svg_plot(rows, J: float, width: int = 640, height: int = 400) -> str:
    """Minimal standalone SVG: exact curve as a polyline, other methods as dots."""
    pad = 50
    ts = [r[1] for r in rows]
    t_max = max(ts) if ts else 1.0
    t_max = t_max or 1.0

    def xy(t, p):
        return pad + (width - 2 * pad) * t / t_max, height - pad - (height - 2 * pad) * p

    palette = ["#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
    ]
    for k in range(6):
        t = t_max * k / 5
        x, y = xy(t, 0)
        parts.append(f'<line x1="{x:.2f}" y1="{y:.2f}" x2="{x:.2f}" y2="{y + 5:.2f}" stroke="black"/>')
        parts.append(f'<text x="{x:.2f}" y="{y + 18:.2f}" font-size="11" text-anchor="middle">{t:.2g}</text>')
        p = k / 5
        x, y = xy(0, p)
        parts.append(f'<line x1="{x - 5:.2f}" y1="{y:.2f}" x2="{x:.2f}" y2="{y:.2f}" stroke="black"/>')
        parts.append(f'<text x="{x - 8:.2f}" y="{y + 4:.2f}" font-size="11" text-anchor="end">{p:.1f}</text>')
    parts.append(f'<text x="{width / 2:.0f}" y="{height - 10}" font-size="12" text-anchor="middle">t</text>')
    parts.append(f'<text x="15" y="{height / 2:.0f}" font-size="12">p</text>')
    parts.append(f'<text x="{width / 2:.0f}" y="25" font-size="13" text-anchor="middle">J = {J}</text>')
    methods = list(dict.fromkeys(r[2] for r in rows))
    dot_colour = iter(palette * 4)
    for m in methods:
        pts = [xy(r[1], r[3]) for r in rows if r[2] == m]
        if m == "exact":
            coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
            parts.append(f'<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="{coords}"/>')
        else:
            colour = next(dot_colour)
            parts.append(f'<g fill="{colour}"><title>{m}</title>')
            parts.extend(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="1.8"/>' for x, y in pts)
            parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_dynamics(args) -> int:
    started = _now()
    methods = [m for m in args.methods.split(",") if m.strip()]
    for m in methods:
        kind = m.split(":")[0]
        if kind not in ("exact", "trotter", "compressed"):
            raise UsageError(f"unknown method {m!r}")
    seed = args.seed if args.seed is not None else 0
    jobs = [(J, methods, args.t_total, args.dt, args.boundary, seed, args.params_file) for J in args.J]
    per_J = _pool_map(_dynamics_job, jobs, args.jobs)
    rows = [r for chunk in per_J for r in chunk]
    text = rows_to_csv(rows)
    if args.out:
        out = Path(args.out)
        _write_output(out, text)
        write_manifest(out, "dynamics", {k: v for k, v in vars(args).items() if k != "func"}, seed, started)
        base = out.with_suffix("")
    else:
        sys.stdout.write(text)
        base = Path("dynamics")
    if args.svg:
        for J, chunk in zip(args.J, per_J):
            _write_output(base.with_name(f"{base.name}_J{J:g}.svg"), svg_plot(chunk, J))
    return EXIT_OK


# --- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes")
    common.add_argument("--out", default=None, help="output file")
    common.add_argument("--tolerance", type=float, default=None, help="pass/fail threshold override")

    parser = argparse.ArgumentParser(prog="qutrit-ybe", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run exact identity suites")
    p.add_argument("--suite", choices=["algebra", "turnover", "subspace", "all"], default="all")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--break-constraint", action="store_true",
                   help="offset the merged angle to produce a designed failure")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("optimize", parents=[common], help="fit mirrored steps over a J x scheme x nb grid")
    p.add_argument("config", help="JSON config with J, schemes, nb, theta, optimizer")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("compress", parents=[common], help="compress a Trotter circuit")
    p.add_argument("--scheme", required=True, choices=SCHEME_NAMES)
    p.add_argument("--J", type=float, required=True)
    p.add_argument("--t", type=float, default=5.0)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--theta", type=float, default=None, help="per-step angle; overrides --t/--steps")
    p.add_argument("--nb", type=int, required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--params-file", default=None)
    src.add_argument("--auto", action="store_true", help="optimise W_R angles first")
    p.add_argument("--max-infidelity", type=float, default=None)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("dynamics", parents=[common], help="return probability of |202>")
    p.add_argument("--J", type=_float_list, default=[0.1, 0.55, 1.0])
    p.add_argument("--methods", default="exact")
    p.add_argument("--t-total", type=float, default=5.0)
    p.add_argument("--dt", type=float, default=0.025)
    p.add_argument("--boundary", choices=["open", "periodic"], default="open")
    p.add_argument("--params-file", default=None)
    p.add_argument("--svg", action="store_true", help="write one SVG plot per J")
    p.set_defaults(func=cmd_dynamics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
