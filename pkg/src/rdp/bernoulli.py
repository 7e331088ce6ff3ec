"""Closed-form rate-distortion-perception function of a Bernoulli source.

Hamming distortion, total-variation perception, binary reconstructions.  The
optimal channel is reported through ``a = P(X^=0 | X=0)`` and
``b = P(X^=0 | X=1)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import PerceptionInactive, VerificationFailed
from .measures import expected_distortion, hamming_matrix, tv_distance
from .prob import Channel, Pmf, binary_entropy, mutual_information, output_marginal, ternary_entropy

UNCONSTRAINED = math.inf


class Region(enum.Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    SHANNON_ONLY = "ShannonOnly"


@dataclass(frozen=True)
class BernoulliSpec:
    """Source parameter folded into (0, 1/2].

    ``reflected`` records that the caller's symbols were swapped to get there.
    """

    p: float
    reflected: bool = False

    def __post_init__(self):
        if not 0.0 < self.p <= 0.5:
            raise ValueError(f"canonical Bernoulli parameter must lie in (0, 0.5], got {self.p!r}")

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @classmethod
    def from_p(cls, p: float) -> "BernoulliSpec":
        if isinstance(p, BernoulliSpec):
            return p
        if not 0.0 < p < 1.0:
            raise ValueError(f"Bernoulli parameter must lie in (0, 1), got {p!r}")
        if p > 0.5:
            return cls(1.0 - p, reflected=True)
        return cls(float(p))


@dataclass(frozen=True)
class BernoulliSolution:
    rate: float
    region: Region
    a: float
    b: float
    d1: float | None
    d2: float | None

    def channel(self) -> Channel:
        return Channel.binary(self.a, self.b)


def _check_dp(D: float, P: float) -> None:
    if not D >= 0:
        raise ValueError(f"distortion level must be >= 0, got {D!r}")
    if not P >= 0:
        raise ValueError(f"perception level must be >= 0, got {P!r}")


def region_bounds(spec, P: float) -> tuple[float, float]:
    """Thresholds ``(D1, D2)`` where the perception constraint activates and the rate reaches zero.

    Raises :class:`PerceptionInactive` for ``P > p``.
    """
    spec = BernoulliSpec.from_p(spec)
    p, q = spec.p, spec.q
    if P < 0:
        raise ValueError(f"perception level must be >= 0, got {P!r}")
    if P > p:
        raise PerceptionInactive(f"P={P!r} exceeds p={p!r}; the Shannon curve applies")
    if P == p:
        return p, p
    # p = 1/2 with P = 0 gives 0/0; every branch agrees with the Shannon curve there
    # 1 - 2(p - P) written as (q - p) + 2P so tiny P survives at p = 1/2
    d1 = 0.0 if P == 0 else P / ((q - p) + 2.0 * P)
    d2 = 2.0 * p * q - (q - p) * P
    return d1, d2


def shannon_rate(spec, D: float) -> float:
    spec = BernoulliSpec.from_p(spec)
    if D < 0:
        raise ValueError(f"distortion level must be >= 0, got {D!r}")
    if D >= spec.p:
        return 0.0
    return binary_entropy(spec.p) - binary_entropy(D)


def _shannon_channel(p: float, D: float) -> tuple[float, float]:
    if D >= p or D >= 0.5:
        return 1.0, 1.0
    a = (1.0 - D) * (1.0 - p - D) / ((1.0 - p) * (1.0 - 2.0 * D))
    b = D * (1.0 - p - D) / (p * (1.0 - 2.0 * D))
    return a, b


def _region2_rate(p: float, D: float, P: float) -> float:
    q = 1.0 - p
    return (
        2.0 * binary_entropy(p)
        + binary_entropy(p - P)
        - ternary_entropy((D - P) / 2.0, p)
        - ternary_entropy((D + P) / 2.0, q)
    )


def _reflect(sol: BernoulliSolution) -> BernoulliSolution:
    return BernoulliSolution(sol.rate, sol.region, 1.0 - sol.b, 1.0 - sol.a, sol.d1, sol.d2)


def rdp_rate(spec, D: float, P: float = UNCONSTRAINED) -> BernoulliSolution:
    """R(D, P) in bits together with its region and optimal channel."""
    spec = BernoulliSpec.from_p(spec)
    _check_dp(D, P)
    p = spec.p
    if P >= p:
        a, b = _shannon_channel(p, D)
        sol = BernoulliSolution(shannon_rate(spec, D), Region.SHANNON_ONLY, a, b, None, None)
    else:
        d1, d2 = region_bounds(spec, P)
        if D < d1:
            a, b = _shannon_channel(p, D)
            sol = BernoulliSolution(shannon_rate(spec, D), Region.S1, a, b, d1, d2)
        elif D < d2:
            a = 1.0 - (D - P) / (2.0 * (1.0 - p))
            b = (D + P) / (2.0 * p)
            rate = max(_region2_rate(p, D, P), 0.0)
            sol = BernoulliSolution(rate, Region.S2, a, b, d1, d2)
        else:
            a = b = (1.0 - p) + P
            sol = BernoulliSolution(0.0, Region.S3, a, b, d1, d2)
    return _reflect(sol) if spec.reflected else sol


@dataclass(frozen=True)
class SolutionCheck:
    rate: float
    mutual_information: float
    distortion: float
    perception: float
    distortion_tight: bool
    perception_tight: bool


def verify_solution(spec, D: float, P: float, sol: BernoulliSolution, tol: float = 1e-10) -> SolutionCheck:
    """Rebuild the channel from ``(a, b)`` and recheck rate and both constraints.

    Raises :class:`VerificationFailed` naming the first quantity that is off.
    """
    spec = BernoulliSpec.from_p(spec)
    p_user = 1.0 - spec.p if spec.reflected else spec.p
    src = Pmf.bernoulli(p_user)
    ch = sol.channel()
    info = mutual_information(src, ch)
    dist = expected_distortion(src, ch, hamming_matrix(2))
    perc = tv_distance(src.probs, output_marginal(src, ch).probs)
    if abs(info - sol.rate) > tol:
        raise VerificationFailed("rate", f"closed form {sol.rate!r} but channel carries {info!r} bits")
    if dist > D + tol:
        raise VerificationFailed("distortion", f"{dist!r} exceeds D={D!r}")
    if perc > P + tol:
        raise VerificationFailed("perception", f"{perc!r} exceeds P={P!r}")
    d_tight = abs(dist - D) <= tol
    p_tight = abs(perc - P) <= tol
    if sol.rate > 0 and sol.region in (Region.S1, Region.S2, Region.SHANNON_ONLY) and not d_tight:
        raise VerificationFailed("distortion", f"constraint should be tight but {dist!r} < D={D!r}")
    if sol.region is Region.S2 and sol.rate > 0 and not p_tight:
        raise VerificationFailed("perception", f"constraint should be tight but {perc!r} < P={P!r}")
    return SolutionCheck(sol.rate, info, dist, perc, d_tight, p_tight)
