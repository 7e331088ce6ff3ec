"""The property suite behind ``rdp verify``."""
from __future__ import annotations

import math

import numpy as np

from .bernoulli import BernoulliSpec
from .converse import BlockCodeSpec, simulate_block_code
from .errors import RdpError
from .measures import DistortionMatrix, DivergenceKind, hamming_matrix, min_distortion, zero_rate_distortion
from .prob import Channel, Pmf
from .solver import RdpSurface, SolveOptions, surface_violations, sweep_surface
from .theorems import (
    PropertyReport,
    check_convexity,
    check_convexity_bernoulli,
    check_monotonicity,
    check_surface_convexity,
    closed_form_surface,
    perception_gap_report,
    random_binary_instances,
    solver_vs_brute_force,
    solver_vs_closed_form,
    verify_thm2_bound,
    verify_thm2_doubling,
)

SUITES = ("full", "fast")

_SIZES = {
    # name: (full, fast)
    "oracle_grid": (20, 8),
    "brute_force": (20, 4),
    "solver_surface": ((8, 4), (5, 3)),
    "convexity_pairs": (4, 2),
    "doubling": (100, 20),
    "bound_grid": (8, 4),
    "converse_n": ((1, 2, 4, 8), (1, 2, 4)),
    "converse_trials": (10_000, 2_000),
}


def _size(name: str, suite: str):
    full, fast = _SIZES[name]
    return full if suite == "full" else fast


def surface_from_rows(rows) -> RdpSurface:
    """Build a surface from long-format ``(D, P, R)`` rows (missing cells become NaN)."""
    rows = [(float(d), float(p), float(r)) for d, p, r in rows]
    dg = np.array(sorted({d for d, _, _ in rows}))
    pg = np.array(sorted({p for _, p, _ in rows}))
    rates = np.full((dg.size, pg.size), np.nan)
    for d, p, r in rows:
        rates[np.searchsorted(dg, d), np.searchsorted(pg, p)] = r
    conv = ~np.isnan(rates)
    status = [["ok" if c else "missing" for c in row] for row in conv]
    return RdpSurface(dg, pg, rates, conv, status, surface_violations(rates, 0.0))


def _rename(report: PropertyReport, name: str) -> PropertyReport:
    report.property_name = name
    return report


def _failed(name: str, exc: Exception) -> PropertyReport:
    return PropertyReport(name, 0, math.inf, 0.0, False, {}, f"{type(exc).__name__}: {exc}")


def _bernoulli_checks(p: float, suite: str, rng: np.random.Generator, opts: SolveOptions):
    pc = BernoulliSpec.from_p(p).p
    dmax = 2 * pc * (1 - pc) * 1.1
    D_grid = np.linspace(0.0, dmax, 41)
    P_fin = np.linspace(0.0, pc, 9)
    surf = closed_form_surface(p, D_grid, np.append(P_fin, math.inf))
    yield _rename(check_monotonicity(surf, tol=1e-9), "closed_form_monotonicity")
    yield _rename(check_surface_convexity(closed_form_surface(p, D_grid, P_fin), tol=1e-9), "closed_form_surface_convexity")
    pairs = []
    for _ in range(10):
        d = rng.uniform(0, dmax, size=2)
        q = rng.uniform(0, pc, size=2)
        pairs.append(((float(d[0]), float(q[0])), (float(d[1]), float(q[1]))))
    yield check_convexity_bernoulli(p, pairs)

    nd = _size("oracle_grid", suite)
    P_grid = [0.0, pc / 4, pc / 2, 3 * pc / 4, math.inf] if suite == "full" else [0.0, pc / 2, math.inf]
    yield solver_vs_closed_form(p, np.linspace(0.0, 2 * pc * (1 - pc) * 1.05, nd), P_grid, opts)
    yield solver_vs_brute_force(random_binary_instances(rng, _size("brute_force", suite)), opts)

    sims = []
    for n in _size("converse_n", suite):
        for rate in (0.0, 0.25, 0.5):
            spec = BlockCodeSpec(n, rate, int(rng.integers(2**63)), _size("converse_trials", suite))
            sims.append(simulate_block_code(spec, p))
    worst = max(sims, key=lambda s: s.eps_stat - s.slack)
    viol = max(0.0, max(-s.slack - s.eps_stat for s in sims))
    wc = {
        "n": worst.n,
        "rate": worst.rate,
        "empirical_distortion": worst.empirical_distortion,
        "empirical_perception": worst.empirical_perception,
        "closed_form_rate": worst.closed_form_rate,
        "eps_stat": worst.eps_stat,
    }
    note = "violation is how far a point falls below the closed form beyond its statistical slack"
    yield PropertyReport("converse", len(sims), viol, 0.0, viol <= 0.0, wc, note)


def _general_checks(source: Pmf, delta: DistortionMatrix, suite: str, rng: np.random.Generator, opts: SolveOptions):
    div = DivergenceKind.TV
    d_star, z = zero_rate_distortion(source, delta)
    dmin = min_distortion(source, delta)
    nd, np_ = _size("solver_surface", suite)
    p_top = 0.5 * float(np.abs(source.probs - np.eye(source.alphabet_size)[z]).sum())
    D_grid = np.linspace(dmin, d_star * 1.1, nd)
    P_grid = list(np.linspace(0.0, p_top / 2, np_ - 1)) + [math.inf]
    surf = sweep_surface(source, delta, div, D_grid, P_grid, opts)
    yield check_monotonicity(surf, tol=2 * opts.tolerance_rate)

    pairs = []
    for _ in range(_size("convexity_pairs", suite)):
        d = rng.uniform(dmin, d_star, size=2)
        q = rng.uniform(0, p_top, size=2)
        pairs.append(((float(d[0]), float(q[0])), (float(d[1]), float(q[1]))))
    yield check_convexity(source, delta, div, pairs, opts)
    yield perception_gap_report(source, delta, div, opts)

    values = np.arange(source.alphabet_size, dtype=float)
    D_bound = np.linspace(0.0, float(source.probs @ (values - source.probs @ values) ** 2), _size("bound_grid", suite) + 1)[1:]
    yield verify_thm2_bound(values, source, D_bound, opts)


def _doubling(suite: str, rng: np.random.Generator) -> PropertyReport:
    reports = []
    for _ in range(_size("doubling", suite)):
        n = int(rng.integers(2, 6))
        m = int(rng.integers(1, 6))
        src = Pmf(rng.dirichlet(np.ones(n)))
        ch = Channel(rng.dirichlet(np.ones(m), size=n))
        reports.append(verify_thm2_doubling(rng.normal(size=n), src, ch))
    worst = max(reports, key=lambda r: (r.max_violation, r.details["marginal_error"]))
    passed = all(r.passed for r in reports)
    details = {"max_marginal_error": max(r.details["marginal_error"] for r in reports), "marginal_tolerance": 1e-12}
    return PropertyReport(
        "thm2_doubling", len(reports), worst.max_violation, worst.tolerance, passed, worst.worst_case_input, details=details
    )


def run_suite(
    suite: str = "full",
    seed: int = 0,
    p: float | None = 0.1,
    source: Pmf | None = None,
    delta: DistortionMatrix | None = None,
    surface_rows=None,
    opts: SolveOptions | None = None,
) -> dict:
    """Run every property check and return a JSON-ready report.

    Bernoulli-only checks (closed form, grid oracle, converse simulation) run
    when the source is given as ``p``; the solver-based checks run on any source.
    """
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {SUITES}")
    opts = opts or SolveOptions(seed=seed)
    rng = np.random.default_rng(seed)
    if source is None:
        if p is None:
            raise ValueError("either p or source is required")
        source = Pmf.bernoulli(p)
    else:
        p = None
    delta = delta or hamming_matrix(source.alphabet_size)

    reports: list[PropertyReport] = []

    def collect(name, gen):
        try:
            reports.extend(gen)
        except RdpError as exc:
            reports.append(_failed(name, exc))

    if p is not None:
        collect("bernoulli", _bernoulli_checks(p, suite, rng, opts))
    collect("solver", _general_checks(source, delta, suite, rng, opts))
    reports.append(_doubling(suite, rng))
    if surface_rows is not None:
        reports.append(_rename(check_monotonicity(surface_from_rows(surface_rows), 2 * opts.tolerance_rate), "surface_fixture_monotonicity"))

    failed = [r.property_name for r in reports if not r.passed]
    return {
        "suite": suite,
        "seed": seed,
        "source": source.probs.tolist(),
        "all_passed": not failed,
        "failed": failed,
        "properties": [r.to_dict() for r in reports],
    }
