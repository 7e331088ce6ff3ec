"""``rdp`` command line: curves, single solves, surfaces, verification, simulation.

Exit codes: 0 success, 1 property failure, 2 bad input, 3 infeasible,
4 not converged.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from importlib import metadata
from pathlib import Path

import numpy as np

from .bernoulli import rdp_rate
from .converse import BlockCodeSpec, simulate_block_code
from .errors import Infeasible, RdpError
from .measures import DistortionMatrix, DivergenceKind, hamming_matrix, squared_error_matrix
from .prob import validate_pmf
from .solver import SolveOptions, solve, sweep_surface
from .suite import SUITES, run_suite
from .theorems import jsonable

EXIT_OK, EXIT_PROPERTY, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_NOT_CONVERGED = 0, 1, 2, 3, 4


class InputError(Exception):
    """Malformed command-line input; maps to exit code 2."""


def fmt(x) -> str:
    """CSV float formatting: 12 significant digits, ``inf``/``nan`` spelled out."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def parse_float(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity", "+inf"):
        return math.inf
    try:
        return float(t)
    except ValueError:
        raise InputError(f"not a number: {text!r}") from None


def parse_list(text: str) -> list[float]:
    return [parse_float(t) for t in text.split(",") if t.strip()]


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:count`` (inclusive) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InputError(f"grid must be start:stop:count, got {text!r}")
        start, stop = parse_float(parts[0]), parse_float(parts[1])
        try:
            count = int(parts[2])
        except ValueError:
            raise InputError(f"grid count must be an integer, got {parts[2]!r}") from None
        if count < 1 or not start <= stop or not math.isfinite(stop):
            raise InputError(f"grid needs count >= 1 and finite start <= stop, got {text!r}")
        return np.linspace(start, stop, count)
    vals = parse_list(text)
    if not vals:
        raise InputError("empty grid")
    if any(b < a for a, b in zip(vals, vals[1:])):
        raise InputError(f"grid values must be ascending, got {text!r}")
    return np.array(vals)


def _seed_or_none(cli_seed: int | None) -> int | None:
    """``RDP_SEED`` wins over ``--seed``; None when neither is set."""
    env = os.environ.get("RDP_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"RDP_SEED must be an integer, got {env!r}") from None
    return cli_seed


def _seed(cli_seed: int | None, default: int = 0) -> int:
    seed = _seed_or_none(cli_seed)
    return default if seed is None else seed


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def load_source(path: str):
    data = _load_json(path)
    if not isinstance(data, list) or not all(isinstance(v, (int, float)) for v in data):
        raise InputError(f"{path}: a pmf file is a JSON array of numbers")
    return validate_pmf(data)


def load_distortion(spec: str, n: int) -> DistortionMatrix:
    if spec == "hamming":
        return hamming_matrix(n)
    if spec.startswith("sqerr:"):
        values = parse_list(spec[len("sqerr:"):])
        if len(values) != n:
            raise InputError(f"sqerr needs {n} values for a {n}-symbol source, got {len(values)}")
        return squared_error_matrix(values)
    if spec == "sqerr":
        return squared_error_matrix(np.arange(n, dtype=float))
    data = _load_json(spec)
    if not isinstance(data, list) or not all(isinstance(r, list) for r in data):
        raise InputError(f"{spec}: a distortion file is a JSON array of arrays")
    return DistortionMatrix(np.array(data, dtype=float))


def load_options(path: str | None, seed: int | None) -> SolveOptions:
    data = _load_json(path) if path else {}
    if not isinstance(data, dict):
        raise InputError("options file must hold a JSON object")
    if seed is not None:
        data = {**data, "seed": seed}
    return SolveOptions.from_dict(data)


def _write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _dump_json(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


def _write_csv(path: str | Path, header: list[str], rows) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _p_label(P: float) -> str:
    return "inf" if P == math.inf else fmt(P)


def cmd_bernoulli_curve(args) -> int:
    p = args.p
    if not 0 < p <= 0.5:
        raise InputError(f"--p must lie in (0, 0.5], got {p!r}")
    P_list = parse_list(args.perception) if args.perception else [math.inf, p / 2, p / 4, 0.0]
    if any(P < 0 for P in P_list):
        raise InputError("perception levels must be >= 0")
    D_grid = parse_grid(args.d_grid) if args.d_grid else np.linspace(0.0, 2 * p * (1 - p), 101)
    if D_grid[0] < 0:
        raise InputError("distortion levels must be >= 0")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for P in P_list:
        name = f"curve_P_{_p_label(P)}.csv"
        rows = []
        for D in D_grid:
            sol = rdp_rate(p, float(D), P)
            rows.append((float(D), sol.rate, sol.region.value, sol.a, sol.b))
        _write_csv(out / name, ["D", "R", "region", "a", "b"], rows)
        files.append(name)
    meta = {
        "p": p,
        "perception": [_p_label(P) for P in P_list],
        "d_grid": [float(d) for d in D_grid],
        "files": files,
        "version": _version(),
    }
    _write_text(out / "curves.json", _dump_json(meta))
    return EXIT_OK


def cmd_solve(args) -> int:
    source = load_source(args.source)
    delta = load_distortion(args.distortion, source.alphabet_size)
    opts = load_options(args.options, _seed_or_none(args.seed))
    div = DivergenceKind.parse(args.divergence)
    try:
        res = solve(source, delta, div, args.d, parse_float(args.perception), opts)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _write_text(args.out, _dump_json({"result": res.to_dict(), "options": opts.to_dict()}))
    if not res.converged:
        r_d, r_p = res.constraint_residuals
        print(f"not converged: residuals distortion={r_d:.3e} perception={r_p:.3e}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_surface(args) -> int:
    if (args.source is None) == (args.p is None):
        raise InputError("give exactly one of --source and --p")
    source = load_source(args.source) if args.source else validate_pmf([1 - args.p, args.p])
    delta = load_distortion(args.distortion, source.alphabet_size)
    opts = load_options(args.options, _seed_or_none(args.seed))
    div = DivergenceKind.parse(args.divergence)
    D_grid = parse_grid(args.d_grid)
    P_grid = parse_grid(args.p_grid)
    workers = args.parallel or 1
    surf = sweep_surface(source, delta, div, D_grid, P_grid, opts, warm_start=workers <= 1, workers=workers)
    rows = []
    for i, D in enumerate(surf.D_grid):
        for j, P in enumerate(surf.P_grid):
            rows.append((float(D), _p_label(float(P)), float(surf.rates[i, j]), bool(surf.converged[i, j])))
    _write_csv(args.out, ["D", "P", "R", "converged"], rows)
    if np.all(np.isnan(surf.rates)):
        statuses = {s.split(":")[0] for row in surf.status for s in row}
        print("every grid point failed: " + ", ".join(sorted(statuses)), file=sys.stderr)
        return EXIT_INFEASIBLE if statuses == {"infeasible"} else EXIT_NOT_CONVERGED
    return EXIT_OK


def _read_surface_csv(path: str):
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if not reader.fieldnames or not {"D", "P", "R"} <= set(reader.fieldnames):
                raise InputError(f"{path}: surface CSV needs columns D, P, R")
            return [(parse_float(r["D"]), parse_float(r["P"]), parse_float(r["R"])) for r in reader]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def cmd_verify(args) -> int:
    seed = _seed(args.seed)
    source = load_source(args.source) if args.source else None
    rows = _read_surface_csv(args.surface) if args.surface else None
    if args.source is None and not 0 < args.p < 1:
        raise InputError(f"--p must lie in (0, 1), got {args.p!r}")
    report = run_suite(args.suite, seed=seed, p=args.p, source=source, surface_rows=rows)
    _write_text(args.out, _dump_json(report))
    for prop in report["properties"]:
        state = "skip" if prop["skipped"] else ("pass" if prop["pass"] else "FAIL")
        print(f"{state:4s} {prop['property_name']}")
    return EXIT_OK if report["all_passed"] else EXIT_PROPERTY


def cmd_simulate(args) -> int:
    seed = _seed(args.seed)
    p = args.p
    if not 0 < p < 1:
        raise InputError(f"--p must lie in (0, 1), got {p!r}")
    try:
        ns = [int(t) for t in args.n.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"--n must be a comma-separated list of integers, got {args.n!r}") from None
    rates = parse_list(args.rate)
    cb_p = p if args.codebook_p is None else args.codebook_p
    if not 0 <= cb_p <= 1:
        raise InputError(f"--codebook-p must lie in [0, 1], got {cb_p!r}")
    cb = validate_pmf([1 - cb_p, cb_p])
    rows, ok = [], True
    for n in ns:
        for rate in rates:
            res = simulate_block_code(BlockCodeSpec(n, rate, seed, args.trials, cb), p)
            ok &= res.holds
            rows.append((n, rate, res.empirical_distortion, res.empirical_perception, res.closed_form_rate, res.slack))
    header = ["n", "rate", "empirical_distortion", "empirical_perception", "closed_form_rate_at_point", "slack"]
    _write_csv(args.out, header, rows)
    return EXIT_OK if ok else EXIT_PROPERTY


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rdp", description="Rate-distortion-perception computations.")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("bernoulli-curve", help="closed-form curves for a Bernoulli source")
    c.add_argument("--p", type=float, required=True)
    c.add_argument("--perception", help="comma-separated P levels, 'inf' allowed (default: inf,p/2,p/4,0)")
    c.add_argument("--d-grid", help="start:stop:count (default 0:2p(1-p):101)")
    c.add_argument("--out", required=True, help="output directory")
    c.set_defaults(func=cmd_bernoulli_curve)

    s = sub.add_parser("solve", help="numerical R(D, P) for one point")
    s.add_argument("--source", required=True, help="pmf JSON file")
    s.add_argument("--distortion", default="hamming", help="hamming | sqerr:<v1,v2,...> | matrix JSON file")
    s.add_argument("--divergence", default="tv", choices=["tv", "kl"])
    s.add_argument("--d", type=float, required=True)
    s.add_argument("--perception", default="inf")
    s.add_argument("--options", help="SolveOptions JSON file")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_solve)

    f = sub.add_parser("surface", help="numerical R(D, P) on a grid, long-format CSV")
    f.add_argument("--source", help="pmf JSON file")
    f.add_argument("--p", type=float, help="Bernoulli source parameter instead of --source")
    f.add_argument("--distortion", default="hamming")
    f.add_argument("--divergence", default="tv", choices=["tv", "kl"])
    f.add_argument("--d-grid", required=True, help="start:stop:count or a list")
    f.add_argument("--p-grid", required=True, help="start:stop:count or a list ('inf' allowed)")
    f.add_argument("--options")
    f.add_argument("--seed", type=int)
    f.add_argument("--parallel", type=int, default=0, help="worker processes; disables warm starts")
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_surface)

    v = sub.add_parser("verify", help="run the property suite")
    v.add_argument("--suite", default="full", choices=list(SUITES))
    v.add_argument("--p", type=float, default=0.1, help="Bernoulli source parameter (default 0.1)")
    v.add_argument("--source", help="pmf JSON file; replaces the Bernoulli source")
    v.add_argument("--surface", help="long-format D,P,R CSV checked for monotonicity")
    v.add_argument("--seed", type=int)
    v.add_argument("--out", required=True)
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("simulate", help="random block codes against the converse")
    m.add_argument("--p", type=float, required=True)
    m.add_argument("--n", required=True, help="comma-separated block lengths")
    m.add_argument("--rate", required=True, help="rate in bits per letter, or a comma-separated list")
    m.add_argument("--trials", type=int, default=10_000)
    m.add_argument("--seed", type=int)
    m.add_argument("--codebook-p", type=float, help="P(1) for codeword letters (default: --p)")
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InputError, RdpError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
