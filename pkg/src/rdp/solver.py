"""Numerical R(D, P) for finite alphabets.

The channel is optimized row-wise on the simplex with entropic mirror descent
(multiplicative updates, so no projection is needed).  Constraints enter an
augmented Lagrangian: the quadratic penalty whose weight doubles while the
residuals stall, plus first-order multiplier estimates so the penalty weight
can stay moderate.

A perfect-perception constraint (``P == 0``) is treated as the linear equality
``p_Xhat == p_X`` because both shipped divergences vanish only there.  For
``0 < P < inf`` a TV constraint is the convex set ``p_Xhat in C`` (a TV ball
intersected with the simplex) and enters through the squared distance to
``C``, which is smooth and needs only a Euclidean projection onto ``C``.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Sequence

import numpy as np
from scipy.special import xlogy

from .errors import DimensionMismatch, Infeasible, InfeasibleOnGrid
from .measures import DistortionMatrix, DivergenceKind, kl_bits, min_distortion, zero_rate_distortion
from .prob import Channel, Pmf, mi_nats

UNCONSTRAINED = math.inf
MAX_ALPHABET = 64
LN2 = math.log(2.0)

_MU_MAX = 1e8


@dataclass(frozen=True)
class SolveOptions:
    max_outer_iters: int = 60
    max_inner_iters: int = 3000
    penalty_initial: float = 10.0
    penalty_growth: float = 2.0
    step_size_initial: float = 1.0
    tolerance_rate: float = 1e-4
    tolerance_constraint: float = 1e-6
    seed: int = 0
    restarts: int = 0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name in ("seed", "restarts"):
                if v < 0:
                    raise ValueError(f"{f.name} must be >= 0, got {v!r}")
            elif not v > 0:
                raise ValueError(f"{f.name} must be positive, got {v!r}")
        if self.penalty_growth <= 1:
            raise ValueError("penalty_growth must exceed 1")

    @classmethod
    def from_dict(cls, data: dict) -> "SolveOptions":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown solver options: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "SolveOptions":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class SolveResult:
    rate: float
    channel: Channel
    distortion: float
    perception: float
    converged: bool
    iterations: int
    constraint_residuals: tuple[float, float]
    D: float = math.nan
    P: float = math.inf

    def to_dict(self) -> dict:
        return {
            "D": self.D,
            "P": self.P,
            "rate": self.rate,
            "distortion": self.distortion,
            "perception": self.perception,
            "converged": self.converged,
            "iterations": self.iterations,
            "constraint_residuals": list(self.constraint_residuals),
            "channel": self.channel.rows.tolist(),
        }


@dataclass(frozen=True)
class RdpPoint:
    D: float
    P: float
    R: float


@dataclass
class RdpCurve:
    P: float
    points: list[RdpPoint]
    results: list[SolveResult | None]
    status: list[str]
    violations: list[tuple[int, int, float]] = field(default_factory=list)


@dataclass
class RdpSurface:
    D_grid: np.ndarray
    P_grid: np.ndarray
    rates: np.ndarray
    converged: np.ndarray
    status: list[list[str]]
    violations: list[tuple[tuple[int, int], tuple[int, int], float]] = field(default_factory=list)

    def points(self):
        for i, d in enumerate(self.D_grid):
            for j, p in enumerate(self.P_grid):
                yield RdpPoint(float(d), float(p), float(self.rates[i, j]))


class _Problem:
    """Raw-array form of one solve, restricted to the support of the source."""

    def __init__(self, source: Pmf, delta: DistortionMatrix, div: DivergenceKind, D: float, P: float):
        self.n_in, self.n_out = delta.shape
        self.p_full = source.probs
        self.support = source.probs > 0
        self.ps = source.probs[self.support]
        self.delta = delta.values[self.support]
        self.D = D
        self.P = P
        self.div = div
        if P == math.inf:
            self.mode = "none"
        elif P == 0:
            self.mode = "equal"
        else:
            self.mode = div.value
        self.dmin = min_distortion(source, delta)
        # at the minimum distortion only row-wise minimizers can carry mass
        if D <= self.dmin + 1e-13 * max(1.0, self.dmin):
            row_min = self.delta.min(axis=1, keepdims=True)
            self.allowed = self.delta <= row_min
        else:
            self.allowed = np.ones_like(self.delta, dtype=bool)

    def perception_exact(self, q: np.ndarray) -> float:
        return _divergence_raw(self.div, self.p_full, q)


def _divergence_raw(div: DivergenceKind, p: np.ndarray, q: np.ndarray) -> float:
    if p.shape != q.shape:
        return math.nan
    if div is DivergenceKind.TV:
        return 0.5 * float(np.abs(p - q).sum())
    return kl_bits(p, q)


def _shrink_sums(w: np.ndarray, p: np.ndarray, lam: float) -> np.ndarray:
    """Projection onto the TV ball for a fixed L1 multiplier ``lam``.

    Each coordinate minimizes ``(r - w_i + theta)^2 / 2 + lam |r - p_i|`` over
    ``r >= 0``; ``theta`` is chosen so the result sums to one.  The sum is
    piecewise linear and decreasing in ``theta``, so it is solved exactly from
    the breakpoints.
    """
    hi, lo = p + lam, p - lam

    def coords(u):
        return np.where(u >= hi, u - lam, np.where(u >= lo, p, np.maximum(u + lam, 0.0)))

    knots = np.sort(np.concatenate([w - hi, w - lo, w + lam]))
    sums = coords(w[None, :] - knots[:, None]).sum(axis=1)
    # sums fall from >= 1 at the first knot (every coordinate at or above p) to 0 at the last
    k = int(np.searchsorted(-sums, -1.0))
    if k == 0:
        theta = knots[0]
    else:
        t0, t1, s0, s1 = knots[k - 1], knots[k], sums[k - 1], sums[k]
        theta = t1 if s0 == s1 else t0 + (s0 - 1.0) * (t1 - t0) / (s0 - s1)
    r = coords(w - theta)
    return r / r.sum()


def project_tv_ball(w: np.ndarray, p: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection of ``w`` onto ``{r in simplex : TV(r, p) <= radius}``."""
    r = _shrink_sums(w, p, 0.0)
    if 0.5 * np.abs(r - p).sum() <= radius:
        return r

    # the TV of the result is piecewise linear and nonincreasing in the L1
    # multiplier, so regula falsi (Illinois variant) lands on the root once both
    # ends share a linear piece; at lam > max|w - p| everything is pinned to p
    lo, f_lo = 0.0, 0.5 * np.abs(r - p).sum() - radius
    hi, f_hi = float(np.abs(w - p).max()) + 1.0, -radius
    side = 0
    for _ in range(100):
        lam = hi if f_lo == f_hi else lo + f_lo * (hi - lo) / (f_lo - f_hi)
        r = _shrink_sums(w, p, lam)
        f = 0.5 * np.abs(r - p).sum() - radius
        if abs(f) <= 1e-15 or hi - lo <= 1e-15 * hi:
            break
        if f > 0:
            lo, f_lo = lam, f
            if side == 1:
                f_hi *= 0.5
            side = 1
        else:
            hi, f_hi = lam, f
            if side == -1:
                f_lo *= 0.5
            side = -1
    return r


class _Lagrangian:
    """Augmented Lagrangian value/gradient for fixed multipliers."""

    def __init__(self, prob: _Problem, lam_d: float, lam_p: float, nu: np.ndarray, mu: float):
        self.prob = prob
        self.lam_d = lam_d
        self.lam_p = lam_p
        self.nu = nu
        self.mu = mu

    def _perception(self, q: np.ndarray) -> tuple[float, np.ndarray]:
        """KL(p || q) in bits and its gradient in q."""
        p = self.prob.p_full
        mask = p > 0
        val = float((p[mask] * np.log(p[mask] / q[mask])).sum()) / LN2
        grad = np.zeros_like(q)
        grad[mask] = -p[mask] / (q[mask] * LN2)
        return val, grad

    def terms(self, Q: np.ndarray, logQ: np.ndarray):
        prob = self.prob
        ps = prob.ps
        q = ps @ Q
        pi = ps[:, None] * Q
        live = pi > 0
        logq = np.log(np.where(q > 0, q, 1.0))
        info = float((pi[live] * (logQ - logq)[live]).sum())
        g_d = float((pi * prob.delta).sum()) - prob.D
        m_d = max(0.0, self.lam_d + self.mu * g_d)
        val = info + (m_d * m_d - self.lam_d ** 2) / (2 * self.mu)
        h = None
        if prob.mode == "equal":
            r = q - prob.p_full
            val += float(self.nu @ r) + 0.5 * self.mu * float(r @ r)
            h = self.nu + self.mu * r
        elif prob.mode == "tv":
            # Moreau envelope of the indicator of C, shifted by the multiplier
            w = q + self.nu / self.mu
            r = w - project_tv_ball(w, prob.p_full, prob.P)
            val += 0.5 * self.mu * float(r @ r) - float(self.nu @ self.nu) / (2 * self.mu)
            h = self.mu * r
        elif prob.mode == "kl":
            dval, dgrad = self._perception(q)
            g_p = dval - prob.P
            m_p = max(0.0, self.lam_p + self.mu * g_p)
            val += (m_p * m_p - self.lam_p ** 2) / (2 * self.mu)
            h = m_p * dgrad
        return val, q, logq, m_d, h

    def value(self, Q, logQ) -> float:
        return self.terms(Q, logQ)[0]

    def value_and_grad(self, Q, logQ):
        val, q, logq, m_d, h = self.terms(Q, logQ)
        G = logQ - logq + m_d * self.prob.delta
        if h is not None:
            G = G + h
        return val, G


_LOG_FLOOR = -70.0


def _logsumexp_rows(a: np.ndarray) -> np.ndarray:
    # scipy.special.logsumexp costs ~100us of dispatch per call on these tiny arrays;
    # every row has a finite entry, so the row max is finite
    m = a.max(axis=1, keepdims=True)
    return m + np.log(np.exp(a - m).sum(axis=1, keepdims=True))


def _normalize_log(logQ: np.ndarray) -> np.ndarray:
    out = logQ - _logsumexp_rows(logQ)
    # multiplicative updates cannot revive an entry that underflowed to zero
    return np.where(np.isneginf(logQ), -np.inf, np.maximum(out, _LOG_FLOOR))


def _fw_step(lag: _Lagrangian, Q: np.ndarray, G: np.ndarray, gap: float, val: float, gamma: float):
    """Frank-Wolfe move toward the per-row minimizing vertex with Armijo backtracking from ``gamma``."""
    prob = lag.prob
    Gm = np.where(prob.allowed, G, np.inf)
    S = np.zeros_like(Q)
    S[np.arange(Q.shape[0]), Gm.argmin(axis=1)] = 1.0
    d = S - Q
    while gamma > 1e-10:
        Qn = Q + gamma * d
        logQn = _normalize_log(np.where(prob.allowed, np.log(np.maximum(Qn, 1e-300)), -np.inf))
        Qn = np.exp(logQn)
        valn = lag.value(Qn, logQn)
        if valn <= val - 0.5 * gamma * gap:
            return logQn, valn, gamma
        gamma *= 0.25
    return None, val, gamma


def _inner(lag: _Lagrangian, logQ: np.ndarray, eta: float, max_iters: int, gap_tol: float):
    """Mirror descent with backtracking on the relative-smoothness bound.

    A Frank-Wolfe step is tried whenever the mirror step makes little progress
    relative to the Frank-Wolfe gap; it revives entries that multiplicative
    updates have driven to (numerically) zero.  Stops when the gap (an upper
    bound on suboptimality of this convex subproblem) drops below ``gap_tol``,
    when the value stalls at noise level, or when the recent rate of decrease
    projects less than ``gap_tol`` of remaining improvement (under sublinear
    convergence ``f_k - f*`` is about ``k`` times the per-step decrease).
    """
    prob = lag.prob
    allowed = prob.allowed
    ps = prob.ps
    Q = np.exp(logQ)
    val, G = lag.value_and_grad(Q, logQ)
    gap = math.inf
    flat = 0
    it = 0
    window = 50
    marks = [val]
    fw_gamma, fw_wait = 1.0, 0
    for it in range(1, max_iters + 1):
        Gm = np.where(allowed, G, np.inf)
        gmin = Gm.min(axis=1, keepdims=True)
        gap = float(ps @ ((Q * np.where(allowed, G, 0.0)).sum(axis=1) - gmin[:, 0]))
        if gap <= gap_tol or flat >= 5:
            break
        # row-wise shift leaves the update unchanged but keeps exponents small
        Gs = np.where(allowed, G - gmin, 0.0)
        while True:
            # expm1/log1p keep Qn - Q and KL(Qn || Q) accurate for tiny steps,
            # where differences of logs would cancel catastrophically
            step = -eta * Gs
            with np.errstate(divide="ignore", invalid="ignore"):
                small = np.log1p((Q * np.expm1(step)).sum(axis=1, keepdims=True))
            large = _logsumexp_rows(np.where(allowed, logQ + step, -np.inf))
            # log1p is exact only while the step is small; big steps cancel in 1 + expm1
            shift = np.where(np.abs(step).max(axis=1, keepdims=True) < 0.5, small, large)
            dlog = step - shift
            logQn = _normalize_log(np.where(allowed, logQ + dlog, -np.inf))
            Qn = np.exp(logQn)
            valn = lag.value(Qn, logQn)
            lin = float(ps @ (Gs * Q * np.expm1(dlog)).sum(axis=1))
            kl = float(ps @ ((Qn * step).sum(axis=1) - shift[:, 0]))
            if valn <= val + lin + max(kl, 0.0) / eta + 1e-14 * max(1.0, abs(val)):
                break
            eta *= 0.5
            if eta < 1e-10:
                logQn, valn = logQ, val
                break
        fw_wait -= 1
        if val - valn < 0.01 * gap and fw_wait <= 0:
            logQf, valf, fw_gamma = _fw_step(lag, Q, G, gap, val, min(1.0, 4.0 * fw_gamma))
            if logQf is not None and valf < valn:
                logQn, valn = logQf, valf
                Qn = np.exp(logQn)
            else:
                fw_wait, fw_gamma = 20, 1.0
        noise = gap <= 1e-6 and valn >= val - 1e-14 * max(1.0, abs(val))
        flat = flat + 1 if noise else 0
        logQ, Q = logQn, Qn
        val, G = lag.value_and_grad(Q, logQ)
        eta = min(max(eta, 1e-8) * 1.3, 1e8)
        if it % window == 0:
            marks.append(val)
            if gap <= 1e-6 and (marks[-2] - val) * (it / window) <= gap_tol:
                break
    return logQ, eta, it, gap


def _anchor(prob: _Problem) -> np.ndarray | None:
    """A channel meeting both constraints, used to restore exact feasibility."""
    delta = prob.delta
    if prob.mode == "none":
        A = (delta <= delta.min(axis=1, keepdims=True)).astype(float)
        return A / A.sum(axis=1, keepdims=True)
    if prob.n_in != prob.n_out:
        return None
    A = np.eye(prob.n_in)[prob.support]
    if float((prob.ps[:, None] * A * delta).sum()) > prob.D:
        return None
    return A


def _residuals(prob: _Problem, Q: np.ndarray) -> tuple[float, float, float, float]:
    q = prob.ps @ Q
    dist = float((prob.ps[:, None] * Q * prob.delta).sum())
    perc = prob.perception_exact(q)
    r_d = max(0.0, dist - prob.D)
    if prob.mode == "none":
        r_p = 0.0
    elif prob.mode == "equal":
        r_p = float(np.abs(q - prob.p_full).max())
    else:
        r_p = max(0.0, perc - prob.P)
    return dist, perc, r_d, r_p


def _restore(prob: _Problem, Q: np.ndarray, tol: float) -> np.ndarray:
    """Mix toward the anchor just enough that both residuals fall under ``tol``.

    Only small corrections are made; if more than 1% of the anchor would be
    needed the iterate is returned unchanged and reported as is.
    """
    _, _, r_d, r_p = _residuals(prob, Q)
    if max(r_d, r_p) <= tol * 0.5:
        return Q
    A = _anchor(prob)
    if A is None:
        return Q

    def ok(t):
        _, _, rd, rp = _residuals(prob, (1 - t) * Q + t * A)
        return max(rd, rp) <= tol * 0.5

    if not ok(0.01):
        return Q
    lo, hi = 0.0, 0.01
    for _ in range(50):
        t = 0.5 * (lo + hi)
        if ok(t):
            hi = t
        else:
            lo = t
    return (1 - hi) * Q + hi * A


def _run(prob: _Problem, Q0: np.ndarray, opts: SolveOptions):
    logQ = _normalize_log(np.where(prob.allowed, np.log(np.maximum(Q0, 1e-300)), -np.inf))
    lam_d, lam_p = 0.0, 0.0
    nu = np.zeros(prob.n_out)
    mu = opts.penalty_initial
    eta = opts.step_size_initial
    prev_res = math.inf
    prev_info = None
    total_iters = 0
    converged = False
    # FW gap bounds the subproblem error in nats; keep it well under the rate tolerance
    gap_floor = 1e-3 * opts.tolerance_rate * LN2
    for outer in range(opts.max_outer_iters):
        # inexact multiplier steps: no point solving far below the current residual
        gap_tol = max(gap_floor, min(1e-4, 1e-2 * prev_res))
        lag = _Lagrangian(prob, lam_d, lam_p, nu, mu)
        logQ, eta, iters, gap = _inner(lag, logQ, eta, opts.max_inner_iters, gap_tol)
        eta = max(eta, 1e-6)
        total_iters += iters
        Q = np.exp(logQ)
        q = prob.ps @ Q
        g_d = float((prob.ps[:, None] * Q * prob.delta).sum()) - prob.D
        lam_d = max(0.0, lam_d + mu * g_d)
        if prob.mode == "equal":
            nu = nu + mu * (q - prob.p_full)
        elif prob.mode == "tv":
            w = q + nu / mu
            nu = mu * (w - project_tv_ball(w, prob.p_full, prob.P))
        elif prob.mode == "kl":
            g_p = lag._perception(q)[0] - prob.P
            lam_p = max(0.0, lam_p + mu * g_p)
        _, _, r_d, r_p = _residuals(prob, Q)
        res = max(r_d, r_p)
        info = mi_nats(prob.ps, Q) / LN2
        settled = prev_info is not None and abs(info - prev_info) <= 1e-3 * opts.tolerance_rate
        if res <= opts.tolerance_constraint and settled:
            converged = True
            break
        if res > 0.25 * prev_res:
            mu = min(mu * opts.penalty_growth, _MU_MAX)
        prev_res = res
        prev_info = info
    Q = _restore(prob, np.exp(logQ), opts.tolerance_constraint)
    return Q, converged, total_iters


def _default_init(prob: _Problem, source: Pmf, delta: DistortionMatrix) -> np.ndarray:
    _, z = zero_rate_distortion(source, delta)
    base = np.full(prob.n_out, 0.5 / prob.n_out)
    base[z] += 0.5
    Q = np.where(prob.allowed, base[None, :], 0.0)
    return Q / Q.sum(axis=1, keepdims=True)


def _zero_rate(source: Pmf, delta: DistortionMatrix, div: DivergenceKind, D: float, P: float) -> np.ndarray | None:
    """An output pmf that meets both constraints with every row equal, if a cheap one exists.

    Candidates are the point mass at the zero-rate symbol and, for square
    alphabets, the source pmf itself.  Either one makes R(D, P) exactly 0.
    """
    k = source.probs @ delta.values
    cands = [np.eye(delta.shape[1])[int(np.argmin(k))]]
    if delta.is_square:
        cands.append(source.probs)
    for q in cands:
        if float(q @ k) <= D and (P == math.inf or _divergence_raw(div, source.probs, q) <= P):
            return q
    return None


def solve(
    source: Pmf,
    delta: DistortionMatrix,
    div: DivergenceKind,
    D: float,
    P: float = UNCONSTRAINED,
    opts: SolveOptions | None = None,
    init: Channel | np.ndarray | None = None,
) -> SolveResult:
    """Minimize I(X; Xhat) subject to E[delta] <= D and d(p_X, p_Xhat) <= P.

    Raises :class:`Infeasible` when ``D`` is below the smallest achievable
    distortion.  Slow convergence is reported through ``converged=False`` on
    the best iterate rather than raised.
    """
    opts = opts or SolveOptions()
    if delta.shape[0] != source.alphabet_size:
        raise DimensionMismatch(f"distortion matrix has {delta.shape[0]} rows for {source.alphabet_size} source symbols")
    if max(delta.shape) > MAX_ALPHABET:
        raise ValueError(f"alphabets larger than {MAX_ALPHABET} symbols are not supported")
    if not D >= 0:
        raise ValueError(f"distortion level must be >= 0, got {D!r}")
    if not P >= 0:
        raise ValueError(f"perception level must be >= 0, got {P!r}")
    if P != math.inf and not delta.is_square:
        raise DimensionMismatch("a perception constraint needs equal source and reconstruction alphabets")
    dmin = min_distortion(source, delta)
    if D < dmin - 1e-12 * max(1.0, dmin):
        raise Infeasible(f"D={D!r} is below the minimum achievable distortion {dmin!r}")

    q0 = _zero_rate(source, delta, div, D, P)
    if q0 is not None:
        dist = float(q0 @ (source.probs @ delta.values))
        perc = _divergence_raw(div, source.probs, q0)
        channel = Channel(np.tile(q0, (source.alphabet_size, 1)))
        return SolveResult(0.0, channel, dist, perc, True, 0, (0.0, 0.0), D=D, P=P)

    prob = _Problem(source, delta, div, D, P)
    starts = []
    if init is not None:
        Qi = init.rows if isinstance(init, Channel) else np.asarray(init, float)
        Qi = 0.999 * Qi[prob.support] + 0.001 * _default_init(prob, source, delta)
        starts.append(Qi)
    else:
        starts.append(_default_init(prob, source, delta))
    rng = np.random.default_rng(opts.seed)
    for _ in range(opts.restarts):
        starts.append(rng.dirichlet(np.ones(prob.n_out), size=prob.ps.size))

    best = None
    for Q0 in starts:
        Q, converged, iters = _run(prob, Q0, opts)
        dist, perc, r_d, r_p = _residuals(prob, Q)
        rate = mi_nats(prob.ps, Q) / LN2
        feasible = max(r_d, r_p) <= opts.tolerance_constraint
        key = (not feasible, rate if feasible else max(r_d, r_p))
        cand = (key, Q, converged and feasible, iters, dist, perc, (r_d, r_p))
        if best is None or cand[0] < best[0]:
            best = cand
    _, Q, converged, iters, dist, perc, res = best
    full = np.zeros((prob.n_in, prob.n_out))
    full[prob.support] = Q
    if (~prob.support).any():
        full[~prob.support] = np.eye(prob.n_out)[np.argmin(delta.values[~prob.support], axis=1)]
    channel = Channel(full / full.sum(axis=1, keepdims=True))
    rate = mi_nats(source.probs, channel.rows) / LN2
    return SolveResult(rate, channel, dist, perc, converged, iters, res, D=D, P=P)


def _binary_mi_grid(p: float, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    px0, px1 = 1.0 - p, p
    j00, j01 = px0 * a, px0 * (1 - a)
    j10, j11 = px1 * b, px1 * (1 - b)
    q0 = j00 + j10
    q1 = j01 + j11
    nats = (
        xlogy(j00, j00) + xlogy(j01, j01) + xlogy(j10, j10) + xlogy(j11, j11)
        - xlogy(j00, px0 * q0) - xlogy(j01, px0 * q1) - xlogy(j10, px1 * q0) - xlogy(j11, px1 * q1)
    )
    return np.maximum(nats / LN2, 0.0)


def _grid_min(p, D, P, a_axis, b_axis):
    """Feasible minimum over ``a_axis`` x (``b_axis`` plus the b values where a constraint is tight).

    A grid alone almost never meets ``TV = P`` exactly (for ``P = 0`` the
    feasible set is a line), so for each ``a`` the boundary values of ``b``
    from the distortion and perception constraints are added as candidates,
    and the ``a`` values where both are tight at once are added to the axis.
    """
    a_axis = np.asarray(a_axis, dtype=float)
    if P != math.inf:
        # both constraints tight: the vertex of the feasible polygon
        corners = 1 - (D + np.array([P, -P])) / (2 * (1 - p))
        a_axis = np.concatenate([a_axis, corners[(corners >= a_axis[0]) & (corners <= a_axis[-1])]])
    a = a_axis[:, None]
    mass0 = (1 - a) * (1 - p)
    extra = [(D - mass0) / p]
    if P != math.inf:
        extra += [(mass0 - P) / p, (mass0 + P) / p]
    b = np.concatenate([np.broadcast_to(np.asarray(b_axis, float), (a.shape[0], len(b_axis)))] + extra, axis=1)
    b = np.clip(b, 0.0, 1.0)
    a = np.broadcast_to(a, b.shape)
    dist = (1 - a) * (1 - p) + b * p
    tv = np.abs((1 - a) * (1 - p) - b * p)
    ok = (dist <= D + 1e-12) & (tv <= P + 1e-12)
    if not ok.any():
        return None
    rate = np.where(ok, _binary_mi_grid(p, a, b), np.inf)
    k = np.unravel_index(np.argmin(rate), rate.shape)
    return float(rate[k]), float(a[k]), float(b[k])


def brute_force_binary(p: float, D: float, P: float = UNCONSTRAINED, resolution: float = 1e-3) -> tuple[float, float, float]:
    """Exhaustive search over ``a = P(0|0)``, ``b = P(0|1)`` with one refinement pass.

    Independent of :func:`solve`; it only evaluates the binary formulas for
    mutual information, Hamming distortion and TV on a grid, augmented with the
    ``b`` values at which a constraint is tight.
    """
    if not 0 < resolution <= 0.01:
        raise ValueError("resolution must lie in (0, 0.01]")
    if not 0 < p < 1:
        raise ValueError(f"Bernoulli parameter must lie in (0, 1), got {p!r}")
    steps = int(round(1.0 / resolution))
    axis = np.linspace(0.0, 1.0, steps + 1)
    coarse = _grid_min(p, D, P, axis, axis)
    if coarse is None:
        raise InfeasibleOnGrid(f"no grid point meets D={D!r}, P={P!r}")
    _, a0, b0 = coarse
    h = 1.0 / steps
    fine_a = np.clip(np.linspace(a0 - 2 * h, a0 + 2 * h, 81), 0.0, 1.0)
    fine_b = np.clip(np.linspace(b0 - 2 * h, b0 + 2 * h, 81), 0.0, 1.0)
    fine = _grid_min(p, D, P, fine_a, fine_b)
    return min(coarse, fine) if fine is not None else coarse


def _status(fn, *args, **kwargs):
    try:
        res = fn(*args, **kwargs)
    except Infeasible as exc:
        return None, f"infeasible: {exc}"
    except Exception as exc:  # noqa: BLE001 - a sweep records failures per point
        return None, f"error: {type(exc).__name__}: {exc}"
    return res, "ok" if res.converged else "not_converged"


def _check_grid(grid) -> np.ndarray:
    g = np.asarray(list(grid), dtype=float)
    if g.size == 0:
        raise ValueError("grid must be non-empty")
    if np.any(np.diff(g) < 0):
        raise ValueError("grid must be sorted ascending")
    return g


def sweep_curve(
    source: Pmf,
    delta: DistortionMatrix,
    div: DivergenceKind,
    P: float,
    D_grid: Sequence[float],
    opts: SolveOptions | None = None,
    warm_start: bool = True,
) -> RdpCurve:
    """Solve along a D grid at fixed P, warm-starting each point from the previous channel."""
    opts = opts or SolveOptions()
    grid = _check_grid(D_grid)
    points, results, status = [], [], []
    prev = None
    for D in grid:
        res, st = _status(solve, source, delta, div, float(D), P, opts, init=prev if warm_start else None)
        results.append(res)
        status.append(st)
        points.append(RdpPoint(float(D), P, res.rate if res is not None else math.nan))
        if res is not None and warm_start:
            prev = res.channel
    violations = []
    for i in range(len(points) - 1):
        r0, r1 = points[i].R, points[i + 1].R
        if not (math.isnan(r0) or math.isnan(r1)) and r1 - r0 > opts.tolerance_rate:
            violations.append((i, i + 1, r1 - r0))
    return RdpCurve(P, points, results, status, violations)


def _solve_point(args):
    source, delta, div, D, P, opts = args
    return _status(solve, source, delta, div, D, P, opts)


def surface_violations(rates: np.ndarray, tol: float):
    out = []
    nd, np_ = rates.shape
    for i in range(nd):
        for j in range(np_):
            if i + 1 < nd and rates[i + 1, j] - rates[i, j] > tol:
                out.append(((i, j), (i + 1, j), float(rates[i + 1, j] - rates[i, j])))
            if j + 1 < np_ and rates[i, j + 1] - rates[i, j] > tol:
                out.append(((i, j), (i, j + 1), float(rates[i, j + 1] - rates[i, j])))
    return out


def sweep_surface(
    source: Pmf,
    delta: DistortionMatrix,
    div: DivergenceKind,
    D_grid: Sequence[float],
    P_grid: Sequence[float],
    opts: SolveOptions | None = None,
    warm_start: bool = True,
    workers: int = 1,
) -> RdpSurface:
    """Solve on every (D, P) grid point.

    With ``warm_start`` each P column is swept in D order from the previous
    channel.  Points run in parallel only when warm starts are off.
    """
    opts = opts or SolveOptions()
    dg = _check_grid(D_grid)
    pg = _check_grid(P_grid)
    rates = np.full((dg.size, pg.size), np.nan)
    conv = np.zeros((dg.size, pg.size), dtype=bool)
    status = [["" for _ in pg] for _ in dg]
    if warm_start or workers <= 1:
        for j, P in enumerate(pg):
            curve = sweep_curve(source, delta, div, float(P), dg, opts, warm_start=warm_start)
            for i, (res, st) in enumerate(zip(curve.results, curve.status)):
                status[i][j] = st
                if res is not None:
                    rates[i, j] = res.rate
                    conv[i, j] = res.converged
    else:
        jobs = [(source, delta, div, float(D), float(P), opts) for D in dg for P in pg]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            outs = list(ex.map(_solve_point, jobs))
        for k, (res, st) in enumerate(outs):
            i, j = divmod(k, pg.size)
            status[i][j] = st
            if res is not None:
                rates[i, j] = res.rate
                conv[i, j] = res.converged
    return RdpSurface(dg, pg, rates, conv, status, surface_violations(rates, opts.tolerance_rate))
