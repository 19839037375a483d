"""Command-line entry point: ``qdcsim <command> [options]``.

Every command evaluates its result, cross-checks it against an independent
closed form, and only then writes output. Exit codes:

    0  success, all cross-checks passed
    1  runtime or I/O failure
    2  usage error
    3  an internal cross-check failed

Failures print a JSON error object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .analysis import concurrence, concurrence_from_purity, intensity, morphing_grid
from .circuits import (
    EntanglerParams,
    HybridParams,
    entangler_closed_form,
    entangler_elements,
    entangler_state,
    hybrid_closed_form,
    hybrid_state,
)
from .classical import MIXTURE_SEED, classical_search, strategy_count
from .sampling import RNG_ALGORITHM, NoiseConfig, estimate_witness
from .state import QdcError
from .witness import (
    QUANTUM_LINEAR_MAX,
    PamSettings,
    WitnessKind,
    default_settings,
    det_closed_form,
    det_closed_form_general,
    idw_closed_form,
    idw_closed_form_general,
    is_violated,
    prob_table,
    evaluate,
    sweep_witness,
)

SCHEMA_VERSION = 1
CHECK_TOL = 1e-12
EXIT_FAILURE, EXIT_USAGE, EXIT_CHECK = 1, 2, 3


class CheckFailed(Exception):
    pass


def fmt(x) -> str:
    """Round-trip-exact decimal for CSV cells."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def load_schema(name: str) -> dict:
    return json.loads(resources.files("qdcsim").joinpath("schemas", name).read_text())


def _check(ok: bool, what: str):
    if not ok:
        raise CheckFailed(what)


def _grid(lo: float, hi: float, steps: int) -> np.ndarray:
    return np.linspace(lo, hi, steps)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


# commands. Each returns (payload, columns or None); payload is rows (csv) or a dict.


def cmd_sweep_morphing(a):
    phis = _grid(0.0, 2 * math.pi, a.phi_steps)
    thetas = _grid(0.0, math.pi / 4, a.theta_steps)
    vals = morphing_grid(phis, thetas)
    ref = intensity(thetas[None, :], phis[:, None])
    _check(np.max(np.abs(vals - ref)) <= CHECK_TOL, "simulated intensity disagrees with the closed form")
    rows = [(float(phi), float(theta), float(vals[i, j])) for i, phi in enumerate(phis) for j, theta in enumerate(thetas)]
    return rows, ["phi", "theta", "intensity"]


def _settings_override(a, kind, phi, theta):
    if a.preparations is None and a.measurements is None:
        return default_settings(kind, phi, theta)
    base = default_settings(kind, phi, theta)
    return PamSettings(a.preparations or base.preparations, a.measurements or base.measurements, theta)


def cmd_witness(a):
    kind = WitnessKind.parse(a.kind)
    point = a.phi is not None or a.theta is not None
    if point:
        if a.phi is None or a.theta is None:
            raise UsageError("point mode needs both --phi and --theta")
        settings = _settings_override(a, kind, a.phi, a.theta)
        res = evaluate(kind, prob_table(settings), settings)
        if kind is WitnessKind.LINEAR:
            ref = idw_closed_form_general(settings)
        elif settings.shape == (4, 2):
            ref = det_closed_form_general(settings)
        else:
            ref = res.value  # no closed form beyond k = 2
        _check(abs(res.value - ref) <= CHECK_TOL * max(1.0, abs(ref)), "witness disagrees with its closed form")
        m = None if res.matrix is None else res.matrix.tolist()
        rows = [(a.phi, a.theta, res.value, res.violated, m, list(settings.preparations), list(settings.measurements))]
    else:
        if a.preparations is not None or a.measurements is not None:
            raise UsageError("--preparations/--measurements apply to point mode only")
        phis = _grid(0.0, 2 * math.pi, a.phi_steps)
        thetas = _grid(0.0, math.pi / 4, a.theta_steps)
        sweep = sweep_witness(kind, phis, thetas)
        oracle = det_closed_form if kind is WitnessKind.NONLINEAR else idw_closed_form
        got = np.array([r.value for r in sweep])
        ref = oracle(np.array([r.phi for r in sweep]), np.array([r.theta for r in sweep]))
        _check(np.max(np.abs(got - ref)) <= CHECK_TOL, "witness sweep disagrees with its closed form")
        rows = [(r.phi, r.theta, r.value, r.violated, None if r.matrix is None else [list(x) for x in r.matrix], None, None) for r in sweep]
    if a.format == "csv":
        return [r[:4] for r in rows], ["phi", "theta", "value", "violated"]
    points = []
    for phi, theta, value, violated, m, preps, meas in rows:
        item = {"phi": phi, "theta": theta, "value": value, "violated": bool(violated)}
        if m is not None:
            item["matrix"] = m
        if preps is not None:
            item["preparations"], item["measurements"] = preps, meas
        points.append(item)
    return {"kind": kind.value, "bound": 0.0 if kind is WitnessKind.NONLINEAR else 3.0, "points": points}, None


def cmd_classical_bound(a):
    t0 = time.perf_counter()
    lin = classical_search("linear", 3, 2, a.dim)
    nl = classical_search("nonlinear", 4, 2, a.dim, a.mixtures, a.seed, "independent")
    runtime = time.perf_counter() - t0
    _check(lin.n_strategies == strategy_count(3, 2, a.dim), "linear strategy count mismatch")
    _check(nl.n_strategies == strategy_count(4, 2, a.dim), "nonlinear strategy count mismatch")
    if a.dim <= 2:
        _check(lin.value <= 3.0 + 1e-12, "classical linear value above 3 for d <= 2")
        _check(nl.value < 1e-12, "nonzero determinant for a d <= 2 classical model")
    report = {
        "schema_version": SCHEMA_VERSION,
        "dim": a.dim,
        "linear": {
            "n_prep": 3,
            "n_meas": 2,
            "strategies": lin.n_strategies,
            "max_value": lin.value,
            "classical_bound": 3.0,
        },
        "nonlinear": {
            "n_prep": 4,
            "n_meas": 2,
            "strategies": nl.n_strategies,
            "mixtures": nl.n_mixtures,
            "mixture_mode": nl.mixture_mode,
            "max_abs_det_deterministic": nl.max_deterministic,
            "max_abs_det": nl.value,
        },
        "quantum_linear_max": QUANTUM_LINEAR_MAX,
        "quantum_classical_gap": QUANTUM_LINEAR_MAX - lin.value,
        "seed": a.seed,
        "runtime_s": round(runtime, 6) if a.timing else None,
    }
    return report, None


def _amp_json(vec) -> dict:
    return {"re": [float(v.real) for v in vec], "im": [float(v.imag) for v in vec]}


def cmd_hybrid(a):
    p = HybridParams(a.theta, a.rot, a.phi, a.phi_pol)
    s = hybrid_state(p)
    err = float(np.max(np.abs(s.amplitudes - hybrid_closed_form(p))))
    _check(err <= CHECK_TOL, "hybrid circuit disagrees with its closed form")
    c = concurrence(s, phi=p.phi, phi_pol=p.phi_pol)
    return {
        "schema_version": SCHEMA_VERSION,
        "params": {"theta": p.theta, "rot": p.rot, "phi": p.phi, "phi_pol": p.phi_pol},
        "basis": [s.space.label(i) for i in range(s.space.dim)],
        "amplitudes": _amp_json(s.amplitudes),
        "closed_form_max_abs_error": err,
        "schmidt_coefficients": [float(x) for x in c.schmidt_coefficients],
        "physical_concurrence": c.physical,
        "logical_concurrence": c.logical,
    }, None


def cmd_entangle(a):
    p = EntanglerParams(a.rot1, a.rot2, a.theta1, a.theta2, a.phi, a.phi_pol)
    s = entangler_state(p)
    err = float(np.max(np.abs(s.amplitudes - entangler_closed_form(p))))
    _check(err <= CHECK_TOL, "entangler circuit disagrees with its closed form")
    c = concurrence(s, phi=p.phi, phi_pol=p.phi_pol)
    sv = c.schmidt_coefficients
    # the purity route loses ~sqrt(eps) near product states
    tol = 1e-10 if c.physical > 1e-3 else 1e-7
    _check(abs(c.physical - concurrence_from_purity(s)) <= tol, "purity and Schmidt concurrence disagree")
    out = {
        "schema_version": SCHEMA_VERSION,
        "params": {"rot1": p.rot1, "rot2": p.rot2, "theta1": p.theta1, "theta2": p.theta2, "phi": p.phi, "phi_pol": p.phi_pol},
        "elements": [u.name for u in entangler_elements(p)],
        "basis": [s.space.label(i) for i in range(s.space.dim)],
        "amplitudes": _amp_json(s.amplitudes),
        "closed_form_max_abs_error": err,
        "schmidt_coefficients": [float(x) for x in sv],
        "physical_concurrence": c.physical,
        "logical_concurrence": c.logical,
    }
    if c.logical_coefficients is not None:
        out["logical_frame"] = {
            "pol_labels": list(c.logical_labels[0]),
            "path_labels": list(c.logical_labels[1]),
            "coefficients": _amp_json(c.logical_coefficients.ravel()),
        }
    jsonschema.validate(out, load_schema("entangle.schema.json"))
    return out, None


def cmd_sample(a):
    kind = WitnessKind.parse(a.kind)
    settings = default_settings(kind, a.phi, a.theta)
    noise = NoiseConfig(a.shots, a.loss, a.efficiency, a.seed)
    res = estimate_witness(kind, settings, noise, bootstrap=a.bootstrap)
    counts, table = res.extra["counts"], res.extra["table"]
    ideal = evaluate(kind, prob_table(settings), settings).value
    ref = idw_closed_form_general(settings) if kind is WitnessKind.LINEAR else det_closed_form_general(settings)
    _check(abs(ideal - ref) <= CHECK_TOL, "ideal witness disagrees with its closed form")
    if a.format == "csv":
        rows = []
        for x in range(table.shape[0]):
            for y in range(table.shape[1]):
                rows.append((x, y, counts.n0[x, y], counts.n1[x, y], counts.n_lost[x, y], table.p[x, y], table.stderr[x, y]))
        return rows, ["x", "y", "n0", "n1", "n_lost", "p_hat", "stderr"]
    z = (res.value - ideal) / res.uncertainty if res.uncertainty else None
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind.value,
        "settings": {"preparations": list(settings.preparations), "measurements": list(settings.measurements), "theta": settings.theta},
        "noise": {"shots_per_setting": noise.shots_per_setting, "loss": noise.loss, "efficiency": noise.efficiency, "seed": noise.seed},
        "rng": RNG_ALGORITHM,
        "counts": counts.to_dict(),
        "p_hat": table.p.tolist(),
        "stderr": table.stderr.tolist(),
        "estimate": res.value,
        "uncertainty": res.uncertainty,
        "uncertainty_method": "bootstrap" if a.bootstrap else "delta",
        "ideal": ideal,
        "z_score": z,
        "violated": bool(is_violated(kind, res.value)),
    }, None


# argument parsing


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _emit_error("usage", message)
        sys.exit(EXIT_USAGE)


def _positive_steps(v):
    n = int(v)
    if n < 2:
        raise argparse.ArgumentTypeError("step count must be >= 2")
    return n


def _angle_list(v):
    try:
        return [float(x) for x in v.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {v!r}") from None


ANGLE_ARGS = {
    "witness": ("phi", "theta", "preparations", "measurements"),
    "hybrid": ("theta", "rot", "phi", "phi_pol"),
    "entangle": ("rot1", "rot2", "theta1", "theta2", "phi", "phi_pol"),
    "sample": ("phi", "theta"),
}

COMMANDS = {
    "sweep-morphing": (cmd_sweep_morphing, ("csv", "json")),
    "witness": (cmd_witness, ("csv", "json")),
    "classical-bound": (cmd_classical_bound, ("json",)),
    "hybrid": (cmd_hybrid, ("json",)),
    "entangle": (cmd_entangle, ("json",)),
    "sample": (cmd_sample, ("json", "csv")),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--out", help="output file (default: stdout)")
    g.add_argument("--format", choices=("csv", "json"), help="output format")
    g.add_argument("--seed", type=int, default=MIXTURE_SEED, help="RNG seed (default: %(default)s)")
    g.add_argument("--degrees", action="store_true", help="angles on the command line are in degrees")
    g.add_argument("--config", help="JSON file with option values; explicit flags win")

    parser = _Parser(prog="qdcsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qdcsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    pi = math.pi

    p = sub.add_parser("sweep-morphing", parents=[common], help="D0 click probability over (phi, theta)")
    p.add_argument("--phi-steps", type=_positive_steps, default=181)
    p.add_argument("--theta-steps", type=_positive_steps, default=46)

    p = sub.add_parser("witness", parents=[common], help="dimension witness at a point or over a grid")
    p.add_argument("--kind", choices=("linear", "nonlinear"), default="linear")
    p.add_argument("--phi", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--phi-steps", type=_positive_steps, default=361)
    p.add_argument("--theta-steps", type=_positive_steps, default=91)
    p.add_argument("--preparations", type=_angle_list, help="comma-separated preparation phases (point mode)")
    p.add_argument("--measurements", type=_angle_list, help="comma-separated measurement phases (point mode)")

    p = sub.add_parser("classical-bound", parents=[common], help="brute-force classical witness bounds")
    p.add_argument("--dim", type=int, default=2, help="classical message dimension")
    p.add_argument("--mixtures", type=int, default=10_000, help="random independent mixtures for the determinant")
    p.add_argument("--timing", action="store_true", help="record runtime (makes output non-reproducible)")

    p = sub.add_parser("hybrid", parents=[common], help="two-DOF hybrid circuit state")
    p.add_argument("--theta", type=float, default=pi / 4)
    p.add_argument("--rot", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=pi / 3)
    p.add_argument("--phi-pol", type=float, default=pi / 3)

    p = sub.add_parser("entangle", parents=[common], help="wave-particle entangled state and concurrence")
    p.add_argument("--rot1", type=float, default=0.0)
    p.add_argument("--rot2", type=float, default=pi / 4)
    p.add_argument("--theta1", type=float, default=pi / 4)
    p.add_argument("--theta2", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=pi / 3)
    p.add_argument("--phi-pol", type=float, default=pi / 3)

    p = sub.add_parser("sample", parents=[common], help="finite-shot witness estimate with loss")
    p.add_argument("--kind", choices=("linear", "nonlinear"), default="linear")
    p.add_argument("--phi", type=float, default=pi / 4)
    p.add_argument("--theta", type=float, default=pi / 4)
    p.add_argument("--shots", type=int, default=1_000_000)
    p.add_argument("--loss", type=float, default=0.0)
    p.add_argument("--efficiency", type=float, default=1.0)
    p.add_argument("--bootstrap", action="store_true", help="bootstrap uncertainty (1000 resamples)")
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as e:
            parser.error(f"cannot read config {args.config}: {e}")
        if not isinstance(cfg, dict):
            parser.error("config must be a JSON object")
        cfg.pop("command", None)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {act.dest for act in sub._actions}
        unknown = sorted(set(k.replace("-", "_") for k in cfg) - known)
        if unknown:
            parser.error(f"unknown config keys: {', '.join(unknown)}")
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
        args = parser.parse_args(argv)
    formats = COMMANDS[args.command][1]
    if args.format is None:
        args.format = formats[0]
    elif args.format not in formats:
        parser.error(f"{args.command} does not support --format {args.format}")
    if args.degrees:
        for name in ANGLE_ARGS.get(args.command, ()):
            v = getattr(args, name, None)
            if isinstance(v, list):
                setattr(args, name, [math.radians(x) for x in v])
            elif v is not None:
                setattr(args, name, math.radians(v))
    return args


def _emit_error(kind: str, message: str):
    sys.stderr.write(json.dumps({"error": {"type": kind, "message": message}}) + "\n")


def _resolved_config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("config", "out")}
    cfg["angle_unit"] = "rad"
    cfg.pop("degrees", None)
    return cfg


def run(args) -> int:
    func, _ = COMMANDS[args.command]
    try:
        payload, columns = func(args)
    except CheckFailed as e:
        _emit_error("check_failed", str(e))
        return EXIT_CHECK
    except UsageError as e:
        _emit_error("usage", str(e))
        return EXIT_USAGE
    except (QdcError, ValueError, jsonschema.ValidationError) as e:
        _emit_error(type(e).__name__, str(e))
        return EXIT_FAILURE

    text = _csv_text(columns, payload) if columns is not None else _json_text(payload)
    meta = {
        "generator": f"qdcsim {__version__}",
        "schema": f"qdcsim/{args.command}",
        "schema_version": SCHEMA_VERSION,
        "format": args.format,
        "columns": columns,
        "config": _resolved_config(args),
    }
    if args.out is None:
        sys.stdout.write(text)
        return 0
    try:
        out = Path(args.out)
        out.write_text(text)
        Path(str(out) + ".meta.json").write_text(_json_text(meta))
    except OSError as e:
        _emit_error("io", str(e))
        return EXIT_FAILURE
    return 0


def main(argv=None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
