"""Executable checks of the structural properties of R(D, P).

Each check returns a :class:`PropertyReport`; nothing here raises on a failed
property except :func:`perception_gap`, which asserts the gap when the source
satisfies assumption A2.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .bernoulli import rdp_rate
from .errors import DimensionMismatch, VerificationFailed, ZeroMarginalOutput
from .measures import (
    DistortionMatrix,
    DivergenceKind,
    a2_profile,
    divergence,
    expected_distortion,
    hamming_matrix,
    squared_error_matrix,
    zero_rate_distortion,
)
from .prob import Channel, Pmf, compose, mutual_information, output_marginal, posterior
from .solver import RdpSurface, SolveOptions, brute_force_binary, solve, surface_violations, sweep_curve

LAMBDAS = (0.25, 0.5, 0.75)
# ingredient inequalities of the mixture argument hold up to rounding only
INGREDIENT_TOL = 1e-10


def jsonable(x):
    """Recursively convert to JSON-safe values; non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, Pmf):
        return jsonable(x.probs)
    if isinstance(x, Channel):
        return jsonable(x.rows)
    return x


@dataclass
class PropertyReport:
    property_name: str
    instances_checked: int
    max_violation: float
    tolerance: float
    passed: bool
    worst_case_input: dict = field(default_factory=dict)
    notes: str = ""
    skipped: bool = False
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return jsonable(
            {
                "property_name": self.property_name,
                "instances_checked": self.instances_checked,
                "max_violation": self.max_violation,
                "tolerance": self.tolerance,
                "pass": self.passed,
                "skipped": self.skipped,
                "worst_case_input": self.worst_case_input,
                "notes": self.notes,
                "details": self.details,
            }
        )


def closed_form_surface(p: float, D_grid: Sequence[float], P_grid: Sequence[float]) -> RdpSurface:
    """Bernoulli R(D, P) on a grid, packaged like a solver surface."""
    dg = np.asarray(D_grid, dtype=float)
    pg = np.asarray(P_grid, dtype=float)
    rates = np.array([[rdp_rate(p, float(d), float(q)).rate for q in pg] for d in dg])
    conv = np.ones(rates.shape, dtype=bool)
    status = [["ok"] * pg.size for _ in dg]
    return RdpSurface(dg, pg, rates, conv, status, surface_violations(rates, 0.0))


def check_monotonicity(surface: RdpSurface, tol: float = 2e-4) -> PropertyReport:
    """Largest increase of R between neighbours along D and along P.

    ``tol`` defaults to twice the solver's default rate tolerance.
    """
    R = np.asarray(surface.rates, dtype=float)
    nd, np_ = R.shape
    worst, where, count = 0.0, None, 0
    for i in range(nd):
        for j in range(np_):
            for i2, j2 in ((i + 1, j), (i, j + 1)):
                if i2 >= nd or j2 >= np_:
                    continue
                a, b = R[i, j], R[i2, j2]
                if math.isnan(a) or math.isnan(b):
                    continue
                count += 1
                if b - a > worst:
                    worst = b - a
                    where = ((i, j), (i2, j2))
    wc = {}
    if where is not None:
        (i, j), (i2, j2) = where
        wc = {
            "earlier": {"D": surface.D_grid[i], "P": surface.P_grid[j], "R": R[i, j]},
            "later": {"D": surface.D_grid[i2], "P": surface.P_grid[j2], "R": R[i2, j2]},
        }
    notes = "" if count else "vacuous: no adjacent grid pairs"
    return PropertyReport("monotonicity", count, worst, tol, worst <= tol, wc, notes)


def check_surface_convexity(surface: RdpSurface, tol: float = 1e-9) -> PropertyReport:
    """Three-point convexity along D lines, P lines and, where steps are equal, diagonals.

    Grid points at P = inf are left out since they do not sit on a finite segment.
    """
    R = np.asarray(surface.rates, dtype=float)
    dg = np.asarray(surface.D_grid, dtype=float)
    pg = np.asarray(surface.P_grid, dtype=float)
    worst, wc, count = 0.0, {}, 0

    def visit(pts):
        nonlocal worst, wc, count
        (d0, p0, r0), (d1, p1, r1), (d2, p2, r2) = pts
        span = (d2 - d0) if d2 != d0 else (p2 - p0)
        if span <= 0 or not all(map(math.isfinite, (r0, r1, r2, p0, p1, p2))):
            return
        lam = ((d2 - d1) if d2 != d0 else (p2 - p1)) / span
        count += 1
        v = r1 - (lam * r0 + (1 - lam) * r2)
        if v > worst:
            worst = v
            wc = {"points": [{"D": d, "P": p, "R": r} for d, p, r in pts], "lambda": lam}

    nd, np_ = R.shape
    for i in range(nd):
        for j in range(np_):
            pt = lambda a, b: (dg[a], pg[b], R[a, b])  # noqa: E731
            if 0 < i < nd - 1:
                visit((pt(i - 1, j), pt(i, j), pt(i + 1, j)))
            if 0 < j < np_ - 1:
                visit((pt(i, j - 1), pt(i, j), pt(i, j + 1)))
            if 0 < i < nd - 1 and 0 < j < np_ - 1:
                same_d = math.isclose(dg[i] - dg[i - 1], dg[i + 1] - dg[i], rel_tol=1e-9)
                same_p = math.isclose(pg[j] - pg[j - 1], pg[j + 1] - pg[j], rel_tol=1e-9)
                if same_d and same_p:
                    visit((pt(i - 1, j - 1), pt(i, j), pt(i + 1, j + 1)))
                    visit((pt(i - 1, j + 1), pt(i, j), pt(i + 1, j - 1)))
    return PropertyReport("surface_convexity", count, worst, tol, worst <= tol, wc)


RateFn = Callable[[float, float], "tuple[float, Channel]"]


def _convexity(
    name: str,
    rate_fn: RateFn,
    source: Pmf,
    delta: DistortionMatrix,
    div: DivergenceKind,
    point_pairs: Iterable,
    lambdas: Sequence[float],
    tol: float,
) -> PropertyReport:
    worst_rate, worst_ingr = 0.0, 0.0
    wc: dict = {}
    count = 0
    for (D1, P1), (D2, P2) in point_pairs:
        R1, Q1 = rate_fn(D1, P1)
        R2, Q2 = rate_fn(D2, P2)
        d1 = expected_distortion(source, Q1, delta)
        d2 = expected_distortion(source, Q2, delta)
        v1 = divergence(div, source, output_marginal(source, Q1))
        v2 = divergence(div, source, output_marginal(source, Q2))
        for lam in lambdas:
            Dm = lam * D1 + (1 - lam) * D2
            Pm = lam * P1 + (1 - lam) * P2 if math.isfinite(P1) and math.isfinite(P2) else math.inf
            Rm, _ = rate_fn(Dm, Pm)
            count += 1
            v_rate = Rm - (lam * R1 + (1 - lam) * R2)
            mix = Channel(lam * Q1.rows + (1 - lam) * Q2.rows)
            v_info = mutual_information(source, mix) - (lam * R1 + (1 - lam) * R2)
            v_dist = expected_distortion(source, mix, delta) - (lam * d1 + (1 - lam) * d2)
            v_perc = divergence(div, source, output_marginal(source, mix)) - (lam * v1 + (1 - lam) * v2)
            v_ingr = max(v_info, v_dist, v_perc)
            if v_rate > worst_rate or not wc:
                worst_rate = max(worst_rate, v_rate)
                wc = {"pair": [[D1, P1], [D2, P2]], "lambda": lam, "R1": R1, "R2": R2, "R_mid": Rm}
            worst_ingr = max(worst_ingr, v_ingr)
    passed = worst_rate <= tol and worst_ingr <= INGREDIENT_TOL
    details = {
        "rate_inequality": {"max_violation": worst_rate, "tolerance": tol},
        "mixture_ingredients": {"max_violation": worst_ingr, "tolerance": INGREDIENT_TOL},
    }
    notes = "" if count else "vacuous: no point pairs"
    return PropertyReport(name, count, max(worst_rate, worst_ingr), tol, passed, wc, notes, details=details)


def check_convexity(
    source: Pmf,
    delta: DistortionMatrix,
    div: DivergenceKind,
    point_pairs: Iterable,
    opts: SolveOptions | None = None,
    lambdas: Sequence[float] = LAMBDAS,
) -> PropertyReport:
    """Solver-based convexity along segments plus the mixture-channel ingredients.

    The rate inequality is allowed ``2 * tolerance_rate`` of slack; the three
    ingredient inequalities (information, distortion, perception of the
    explicit mixture channel) must hold to rounding.
    """
    opts = opts or SolveOptions()

    def rate_fn(D, P):
        res = solve(source, delta, div, D, P, opts)
        return res.rate, res.channel

    return _convexity("convexity", rate_fn, source, delta, div, point_pairs, lambdas, 2 * opts.tolerance_rate)


def check_convexity_bernoulli(
    p: float, point_pairs: Iterable, lambdas: Sequence[float] = LAMBDAS, tol: float = 1e-9
) -> PropertyReport:
    """Convexity of the closed form, with its optimal channels as mixture ingredients."""
    source = Pmf.bernoulli(p)

    def rate_fn(D, P):
        sol = rdp_rate(p, D, P)
        return sol.rate, sol.channel()

    return _convexity(
        "convexity_closed_form", rate_fn, source, hamming_matrix(2), DivergenceKind.TV, point_pairs, lambdas, tol
    )


def perception_gap(
    source: Pmf, delta: DistortionMatrix, div: DivergenceKind, opts: SolveOptions | None = None
) -> tuple[float, float, float]:
    """``(D*, R(D*, 0), R(D*, inf))`` at the zero-rate distortion ``D*``.

    When A2 holds this raises :class:`VerificationFailed` unless
    ``R(D*, 0) > R(D*, inf) + tolerance_rate`` and ``R(D*, inf)`` is zero to
    within the tolerance.
    """
    opts = opts or SolveOptions()
    d_star, _ = zero_rate_distortion(source, delta)
    r0 = solve(source, delta, div, d_star, 0.0, opts).rate
    rinf = solve(source, delta, div, d_star, math.inf, opts).rate
    _, violated = a2_profile(source, delta)
    if not violated:
        if rinf > opts.tolerance_rate:
            raise VerificationFailed("R(D*, inf)", f"expected 0 at D*={d_star!r}, got {rinf!r}")
        if not r0 > rinf + opts.tolerance_rate:
            raise VerificationFailed("R(D*, 0)", f"no gap at D*={d_star!r}: R0={r0!r}, Rinf={rinf!r}")
    return d_star, r0, rinf


def perception_gap_report(
    source: Pmf, delta: DistortionMatrix, div: DivergenceKind, opts: SolveOptions | None = None
) -> PropertyReport:
    """Report form of :func:`perception_gap`; skipped when A2 is violated."""
    opts = opts or SolveOptions()
    _, violated = a2_profile(source, delta)
    wc = {"source": source.probs}
    try:
        d_star, r0, rinf = perception_gap(source, delta, div, opts)
    except VerificationFailed as exc:
        return PropertyReport("perception_gap", 1, math.inf, opts.tolerance_rate, False, wc, str(exc))
    wc.update({"D_star": d_star, "R0": r0, "Rinf": rinf})
    if violated:
        note = "A2 violated: every support symbol minimizes E[delta(X, z)], so no gap is asserted"
        return PropertyReport("perception_gap", 0, 0.0, opts.tolerance_rate, True, wc, note, skipped=True)
    # violation measures how far the gap is from being strictly positive
    viol = max(rinf, 0.0) + max(0.0, opts.tolerance_rate - (r0 - rinf))
    return PropertyReport("perception_gap", 1, viol, opts.tolerance_rate, True, wc, f"gap {r0 - rinf:.6g} bits")


def posterior_sampling_decoder(source: Pmf, channel: Channel) -> Channel:
    """Channel ``X -> Xtilde`` obtained by redrawing from ``p(x | xhat)``.

    The output marginal equals the source pmf.
    """
    return compose(channel, posterior(source, channel))


def _posterior_quiet(source: Pmf, channel: Channel) -> Channel:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroMarginalOutput)
        return posterior(source, channel)


def thm2_doubling_values(source_values, source: Pmf, channel: Channel) -> tuple[float, float, float]:
    """``(D, D_tilde, marginal_error)`` with outputs placed at the conditional means.

    ``D`` is the MSE of the conditional-mean decoder, ``D_tilde`` the MSE after
    posterior sampling, both by exact enumeration.
    """
    v = np.asarray(source_values, dtype=float).ravel()
    if v.size != source.alphabet_size or channel.n_inputs != source.alphabet_size:
        raise DimensionMismatch("source values, source pmf and channel inputs must share one alphabet")
    post = _posterior_quiet(source, channel)
    means = post.rows @ v
    joint = source.probs[:, None] * channel.rows
    d = float((joint * (v[:, None] - means[None, :]) ** 2).sum())
    tilde = compose(channel, post)
    d_tilde = float((source.probs[:, None] * tilde.rows * (v[:, None] - v[None, :]) ** 2).sum())
    marg = float(np.abs(source.probs @ tilde.rows - source.probs).max())
    return d, d_tilde, marg


def verify_thm2_doubling(source_values, source: Pmf, channel: Channel, tol: float = 1e-10) -> PropertyReport:
    """Posterior sampling exactly doubles the MSE of the conditional-mean decoder."""
    d, d_tilde, marg = thm2_doubling_values(source_values, source, channel)
    scale = 2 * d
    viol = abs(d_tilde - 2 * d) / scale if scale > 0 else abs(d_tilde)
    wc = {"source_values": list(np.ravel(source_values)), "source": source.probs, "channel": channel.rows}
    details = {"D": d, "D_tilde": d_tilde, "marginal_error": marg, "marginal_tolerance": 1e-12}
    passed = viol <= tol and marg <= 1e-12
    return PropertyReport("thm2_doubling", 1, viol, tol, passed, wc, details=details)


def verify_thm2_bound(
    source_values, source: Pmf, D_grid: Sequence[float], opts: SolveOptions | None = None
) -> PropertyReport:
    """Solver check of ``R(D, 0) <= R(D/2, inf)`` under squared error and TV."""
    opts = opts or SolveOptions()
    delta = squared_error_matrix(source_values)
    grid = sorted(float(d) for d in D_grid)
    perfect = sweep_curve(source, delta, DivergenceKind.TV, 0.0, grid, opts)
    half = sweep_curve(source, delta, DivergenceKind.TV, math.inf, [d / 2 for d in grid], opts)
    tol = 2 * opts.tolerance_rate
    worst, wc, count, unconverged = 0.0, {}, 0, 0
    for D, a, b, sa, sb in zip(grid, perfect.points, half.points, perfect.status, half.status):
        if math.isnan(a.R) or math.isnan(b.R):
            continue
        unconverged += (sa != "ok") + (sb != "ok")
        count += 1
        v = a.R - b.R
        if v > worst or not wc:
            worst = max(worst, v)
            wc = {"D": D, "R_D_0": a.R, "R_half_D_inf": b.R}
    notes = f"{unconverged} solves did not report convergence" if unconverged else ""
    wc["source_values"] = list(np.ravel(source_values))
    wc["source"] = source.probs
    return PropertyReport("thm2_bound", count, worst, tol, count > 0 and worst <= tol, wc, notes)


def solver_vs_closed_form(
    p: float, D_grid: Sequence[float], P_grid: Sequence[float], opts: SolveOptions | None = None, tol: float = 1e-3
) -> PropertyReport:
    """Largest gap between the solver and the Bernoulli closed form over a grid.

    Only converged points are compared; the share of converged points is
    reported in ``details``.
    """
    opts = opts or SolveOptions()
    source = Pmf.bernoulli(p)
    delta = hamming_matrix(2)
    worst, wc, count, total = 0.0, {}, 0, 0
    for P in P_grid:
        curve = sweep_curve(source, delta, DivergenceKind.TV, float(P), D_grid, opts)
        for pt, res in zip(curve.points, curve.results):
            total += 1
            if res is None or not res.converged:
                continue
            count += 1
            err = abs(pt.R - rdp_rate(p, pt.D, float(P)).rate)
            if err > worst or not wc:
                worst = max(worst, err)
                wc = {"p": p, "D": pt.D, "P": float(P), "solver": pt.R, "closed_form": rdp_rate(p, pt.D, float(P)).rate}
    share = count / total if total else 0.0
    details = {"converged": count, "points": total, "converged_share": share}
    passed = worst <= tol and share >= 0.95
    return PropertyReport("solver_vs_closed_form", count, worst, tol, passed, wc, details=details)


def solver_vs_brute_force(
    instances: Iterable, opts: SolveOptions | None = None, resolution: float = 1e-3
) -> PropertyReport:
    """Compare :func:`solve` with the grid oracle on binary ``(p, D, P)`` instances."""
    opts = opts or SolveOptions()
    tol = max(1e-3, 10 * resolution)
    worst, wc, count = 0.0, {}, 0
    for p, D, P in instances:
        r_grid, _, _ = brute_force_binary(p, D, P, resolution)
        r_solver = solve(Pmf.bernoulli(p), hamming_matrix(2), DivergenceKind.TV, D, P, opts).rate
        count += 1
        err = abs(r_solver - r_grid)
        if err > worst or not wc:
            worst = max(worst, err)
            wc = {"p": p, "D": D, "P": P, "solver": r_solver, "brute_force": r_grid}
    return PropertyReport("solver_vs_brute_force", count, worst, tol, worst <= tol, wc)


def random_binary_instances(rng: np.random.Generator, count: int) -> list[tuple[float, float, float]]:
    """Random ``(p, D, P)`` with D strictly positive so the grid oracle has feasible points."""
    out = []
    for _ in range(count):
        p = float(rng.uniform(0.05, 0.95))
        m = min(p, 1 - p)
        D = float(rng.uniform(0.01, 2 * m * (1 - m)))
        P = float(rng.choice([0.0, rng.uniform(0, m), math.inf]))
        out.append((p, D, P))
    return out
