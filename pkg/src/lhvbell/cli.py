"""Command-line front end.

Every subcommand writes CSV (header row, LF endings) or a single JSON object
``{"command", "params", "results"}`` to stdout. Numbers carry 12 significant
digits. Exit status: 0 on success, 2 on bad arguments, 1 on internal errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Sequence

import numpy as np

from . import chsh, distribution, experiment, toymodels, trianglegame
from .rng import RngStream
from .transform import ExperimentSetting, l_transform, linear_transform, wrap_angle

SIG_DIGITS = 12


class UsageError(Exception):
    pass


def fmt(x: Any) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.{SIG_DIGITS}g}"


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(f"{float(x):.{SIG_DIGITS}g}")
    return x


def render_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def render_json(command: str, params: dict, results: Any) -> str:
    doc = {"command": command, "params": _jsonable(params), "results": _jsonable(results)}
    return json.dumps(doc, indent=2) + "\n"


def _estimate(e: experiment.CorrelationEstimate) -> dict:
    return {"mean": e.mean, "stderr": e.stderr, "n": e.n}


# --- argument helpers -------------------------------------------------------


def _angle(args, value: float) -> float:
    if not math.isfinite(value):
        raise UsageError(f"angle must be finite, got {value}")
    return wrap_angle(math.radians(value) if args.degrees else value)


def _floats(text: str, count: int, what: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected {count} comma-separated numbers, got {text!r}") from None
    if len(vals) != count:
        raise UsageError(f"{what}: expected {count} values, got {len(vals)}")
    return vals


def _positive(value: int, what: str) -> int:
    if value < 1:
        raise UsageError(f"{what} must be at least 1")
    return value


def _stream(args) -> RngStream:
    try:
        return RngStream(args.seed, getattr(args, "stream", 0))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# --- subcommands ------------------------------------------------------------


def cmd_transform(args):
    d = _angle(args, args.deltabar)
    n = _positive(args.points, "--points")
    lam = -math.pi + 2.0 * math.pi * np.arange(n) / n
    law = l_transform if args.law == "model" else linear_transform
    vals = np.asarray(law(lam, d))
    params = {"deltabar": d, "points": n, "law": args.law}
    return params, ["lambda", "l_value"], list(zip(lam, vals)), None


def cmd_sample(args):
    n = _positive(args.samples, "--samples")
    draws = distribution.sample(_stream(args), n)
    params = {"seed": args.seed, "stream": args.stream, "samples": n}
    return params, ["lambda"], [(x,) for x in draws], list(draws)


_CORR_HEADER = ["deltabar", "e_exact", "e_mc", "stderr", "n"]


def _correlate_one(setting, n, stream, workers):
    counts = experiment.mc_counts(setting, n, stream, workers)
    pp, pm, mp, mm = (int(c) for c in counts)
    est = experiment.CorrelationEstimate.from_sum(pp + mm - pm - mp, n)
    joint = experiment.joint_probabilities(setting)
    row = (setting.deltabar, experiment.exact_correlation(setting), est.mean, est.stderr, n)
    extra = {
        "joint_exact": {"pp": joint.p_pp, "pm": joint.p_pm, "mp": joint.p_mp, "mm": joint.p_mm},
        "joint_mc": {k: c / n for k, c in zip(("pp", "pm", "mp", "mm"), (pp, pm, mp, mm))},
    }
    return row, extra


def cmd_correlate(args):
    setting = ExperimentSetting(_angle(args, args.delta), _angle(args, args.phi))
    n = _positive(args.samples, "--samples")
    row, extra = _correlate_one(setting, n, _stream(args), args.workers)
    params = {"delta": setting.delta, "phi": setting.phi, "samples": n, "seed": args.seed}
    return params, _CORR_HEADER, [row], {**dict(zip(_CORR_HEADER, row)), **extra}


def cmd_scan(args):
    phi = _angle(args, args.phi)
    pts = _positive(args.points, "--points")
    n = _positive(args.samples, "--samples")
    base = _stream(args)
    rows = []
    for i in range(pts):
        delta = -math.pi + 2.0 * math.pi * i / pts
        row, _ = _correlate_one(ExperimentSetting(delta, phi), n, base.substream(i), args.workers)
        rows.append(row)
    params = {"phi": phi, "points": pts, "samples": n, "seed": args.seed}
    return params, _CORR_HEADER, rows, [dict(zip(_CORR_HEADER, r)) for r in rows]


def _chsh_settings(args) -> chsh.ChshSettings:
    return chsh.ChshSettings(_angle(args, args.d1), _angle(args, args.d2), _angle(args, args.delta), _angle(args, args.phi))


def cmd_chsh(args):
    s = _chsh_settings(args)
    stat = chsh.model_chsh(s)
    corr = [experiment.exact_correlation(ExperimentSetting(d)) for d in s.relative_angles()]
    params = {"d1": s.delta1, "d2": s.delta2, "delta": s.delta, "phi": s.phi}
    results = {
        "statistic": stat,
        "magnitude": abs(stat),
        "correlations": corr,
        "classical_bound": 2.0,
        "tsirelson_bound": chsh.TSIRELSON,
        "exceeds_classical_bound": abs(stat) > 2.0,
    }
    row = (s.delta1, s.delta2, s.delta, s.phi, stat)
    return params, ["d1", "d2", "delta", "phi", "statistic"], [row], results


def cmd_holonomy(args):
    p = chsh.CycleParams(_angle(args, args.d1), _angle(args, args.d2), _angle(args, args.dd))
    n = args.points
    if n < 2:
        raise UsageError("--points must be at least 2")
    law = l_transform if args.law == "model" else linear_transform
    prof = chsh.geometric_phase_profile(p, n, law)
    params = {"d1": p.d1, "d2": p.d2, "dd": p.dd, "points": n, "law": args.law}
    rows = list(zip(prof.lambdas, prof.defects))
    return params, ["lambda", "defect"], rows, {"max_defect": prof.max_defect, "profile": [list(r) for r in rows]}


def cmd_perconfig(args):
    s = _chsh_settings(args)
    hist = chsh.per_config_histogram(s)
    mean = sum(v * w for v, w in hist.items())
    params = {"d1": s.delta1, "d2": s.delta2, "delta": s.delta, "phi": s.phi}
    rows = sorted(hist.items())
    results = {"histogram": {str(k): w for k, w in rows}, "mean": mean, "model_chsh": chsh.model_chsh(s)}
    return params, ["value", "weight"], rows, results


def cmd_toy(args):
    ps = _floats(args.p, 4, "--p")
    try:
        table = (toymodels.table1 if args.table == 1 else toymodels.table2)(*ps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    interp = args.interpretation or ("two-input" if args.table == 1 else "single-input")
    v = toymodels.local_feasibility(table, interp)
    results: dict[str, Any] = {
        "feasible": v.feasible,
        "no_signaling": v.no_signaling,
        "row_correlations": toymodels.row_correlations(table),
        "residual": v.residual,
    }
    if v.certificate is not None:
        k, val = v.certificate
        results["certificate"] = {"minus_row": k + 1, "chsh_value": val, "bound": 2.0}
    if v.mixture is not None:
        results["witness"] = {
            "strategies": [list(s) for s in toymodels.deterministic_strategies()],
            "weights": v.mixture,
        }
    if v.model is not None:
        results["witness"] = {
            "choices": v.model.choices.tolist(),
            "weights": v.model.weights,
            "reconstructed": v.model.conditional_table(),
        }
    params = {"table": args.table, "p": ps, "interpretation": interp}
    rows = [(f"row{i + 1}", *r) for i, r in enumerate(table.p)]
    return params, ["row", "pp", "pm", "mp", "mm"], rows, results


def _parse_vertices(text: str) -> list[np.ndarray]:
    parts = text.split(";")
    if len(parts) != 3:
        raise UsageError("--vertices expects three ';'-separated x,y,z triples")
    return [trianglegame.unit(_floats(p, 3, "--vertices")) for p in parts]


def cmd_triangle(args):
    n = _positive(args.samples, "--samples")
    stream = _stream(args)
    if args.mode == "flat":
        ab, ac = _angle(args, args.angle_ab), _angle(args, args.angle_ac)
        res = trianglegame.flat_game(ab, ac, n, stream, args.workers)
        params = {"mode": "flat", "angle_ab": ab, "angle_ac": ac, "samples": n, "seed": args.seed}
    else:
        try:
            tri = trianglegame.SphericalTriangle(*_parse_vertices(args.vertices))
            if args.scale != 1.0:
                tri = tri.scaled(args.scale)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        refs = [_angle(args, a) for a in _floats(args.ref_angles, 3, "--ref-angles")]
        res = trianglegame.spherical_game(tri, refs, n, stream, args.workers)
        params = {
            "mode": "sphere",
            "vertices": [list(v) for v in tri.vertices],
            "ref_angles": refs,
            "samples": n,
            "seed": args.seed,
        }
    results = {
        "correlations": {"ab": _estimate(res.e_ab), "ac": _estimate(res.e_ac), "bc": _estimate(res.e_bc)},
        "slack": res.slack,
        "slack_stderr": res.slack_stderr,
        "identity_holds": res.identity_holds,
        "holonomy": res.holonomy,
    }
    rows = [
        ("e_ab", res.e_ab.mean),
        ("e_ac", res.e_ac.mean),
        ("e_bc", res.e_bc.mean),
        ("slack", res.slack),
        ("slack_stderr", res.slack_stderr),
        ("identity_holds", res.identity_holds),
        ("holonomy", res.holonomy),
    ]
    return params, ["key", "value"], rows, results


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="64-bit unsigned seed (default 0)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--degrees", action="store_true", help="read angle flags in degrees")
    common.add_argument("--workers", type=int, default=1, help="threads for Monte Carlo (output unaffected)")

    parser = argparse.ArgumentParser(prog="lhvbell", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, default_format, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func, default_format=default_format)
        return p

    p = add("transform", cmd_transform, "csv", "tabulate the frame transformation law")
    p.add_argument("--deltabar", type=float, required=True)
    p.add_argument("--points", type=int, default=1024)
    p.add_argument("--law", choices=("model", "linear"), default="model")

    p = add("sample", cmd_sample, "csv", "draw hidden configurations")
    p.add_argument("--samples", "--n", type=int, default=1000)
    p.add_argument("--stream", type=int, default=0)

    p = add("correlate", cmd_correlate, "json", "exact and Monte Carlo correlation at one setting")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--samples", "--n", type=int, default=100_000)
    p.add_argument("--stream", type=int, default=0)

    p = add("scan", cmd_scan, "csv", "correlation over a uniform grid of relative angles")
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--samples", "--n", type=int, default=100_000)
    p.add_argument("--stream", type=int, default=0)

    for name, func, fmt_default, text in (
        ("chsh", cmd_chsh, "json", "CHSH combination of the model"),
        ("perconfig", cmd_perconfig, "csv", "distribution of per-configuration CHSH values"),
    ):
        p = add(name, func, fmt_default, text)
        p.add_argument("--d1", type=float, required=True)
        p.add_argument("--d2", type=float, required=True)
        p.add_argument("--delta", type=float, required=True)
        p.add_argument("--phi", type=float, default=0.0)

    p = add("holonomy", cmd_holonomy, "csv", "defect of the four-step frame cycle")
    p.add_argument("--d1", type=float, required=True)
    p.add_argument("--d2", type=float, required=True)
    p.add_argument("--dd", type=float, required=True)
    p.add_argument("--points", type=int, default=4096)
    p.add_argument("--law", choices=("model", "linear"), default="model")

    p = add("toy", cmd_toy, "json", "local-model feasibility of the toy tables")
    p.add_argument("--table", type=int, choices=(1, 2), required=True)
    p.add_argument("--p", required=True, help="p1,p2,p3,p4")
    p.add_argument("--interpretation", choices=("two-input", "single-input"), default=None)

    p = add("triangle", cmd_triangle, "json", "flat or spherical triangle game")
    p.add_argument("--mode", choices=("flat", "sphere"), required=True)
    p.add_argument("--samples", "--n", type=int, default=100_000)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--angle-ab", type=float, default=2.0 * math.pi / 3.0)
    p.add_argument("--angle-ac", type=float, default=-2.0 * math.pi / 3.0)
    p.add_argument("--vertices", default="1,0,0;0,1,0;0,0,1")
    p.add_argument("--ref-angles", default="0,0,0")
    p.add_argument("--scale", type=float, default=1.0)
    return parser


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        old_err, sys.stderr = sys.stderr, stderr
        try:
            args = parser.parse_args(argv)
        finally:
            sys.stderr = old_err
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.workers < 1:
        print("lhvbell: error: --workers must be at least 1", file=stderr)
        return 2
    try:
        params, header, rows, results = args.func(args)
    except UsageError as exc:
        print(f"lhvbell {args.command}: error: {exc}", file=stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"lhvbell {args.command}: internal error: {exc!r}", file=stderr)
        return 1
    fmt_choice = args.format or args.default_format
    if fmt_choice == "csv":
        stdout.write(render_csv(header, rows))
    else:
        if results is None:
            results = [dict(zip(header, r)) for r in rows]
        stdout.write(render_json(args.command, params, results))
    return 0


def main() -> None:
    sys.exit(run())
