"""Monte Carlo check of the converse with random-codebook block codes.

A Bern(p) source is coded in blocks of ``n`` letters by nearest-codeword
(Hamming) encoding against a random codebook.  Any such code yields an
achievable (distortion, perception, rate) point, which must not sit below the
closed-form surface by more than the statistical slack.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bernoulli import rdp_rate
from .errors import TrialBudgetTooSmall
from .prob import Pmf

MIN_TRIALS = 1000
# bound on trials * codewords * n booleans materialized at once
_CHUNK_CELLS = 4_000_000


@dataclass(frozen=True)
class BlockCodeSpec:
    n: int
    rate: float
    codebook_seed: int = 0
    trials: int = 10_000
    codebook_distribution: Pmf | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"block length must be >= 1, got {self.n!r}")
        if not self.rate >= 0:
            raise ValueError(f"rate must be >= 0, got {self.rate!r}")
        if self.codebook_distribution is not None and self.codebook_distribution.alphabet_size != 2:
            raise ValueError("codebook distribution must be a pmf over {0, 1}")

    @property
    def codebook_size(self) -> int:
        # guard against 2**(n*rate) landing a hair below an integer
        return max(1, math.floor(2.0 ** (self.n * self.rate) * (1 + 1e-12)))

    @property
    def effective_rate(self) -> float:
        """Bits per letter actually spent: log2 of the codebook size over ``n``."""
        return math.log2(self.codebook_size) / self.n


@dataclass(frozen=True)
class ConverseResult:
    n: int
    rate: float
    effective_rate: float
    empirical_distortion: float
    empirical_perception: float
    closed_form_rate: float
    eps_stat: float

    @property
    def slack(self) -> float:
        """Effective rate minus the closed-form rate at the empirical point."""
        return self.effective_rate - self.closed_form_rate

    @property
    def holds(self) -> bool:
        return self.slack >= -self.eps_stat


def _local_slope(p: float, D: float, P: float) -> float:
    """Magnitude of dR/dD of the closed form, by a one-sided or central difference."""
    h = 1e-6
    lo, hi = max(D - h, 0.0), D + h
    return abs(rdp_rate(p, hi, P).rate - rdp_rate(p, lo, P).rate) / (hi - lo)


def _encode(blocks: np.ndarray, codebook: np.ndarray) -> np.ndarray:
    """Nearest codeword in Hamming distance, lowest index on ties."""
    n = blocks.shape[1]
    step = max(1, _CHUNK_CELLS // max(1, codebook.shape[0] * n))
    out = np.empty(blocks.shape[0], dtype=np.intp)
    for s in range(0, blocks.shape[0], step):
        dist = (blocks[s : s + step, None, :] != codebook[None, :, :]).sum(axis=2)
        out[s : s + step] = dist.argmin(axis=1)
    return out


def simulate_block_code(spec: BlockCodeSpec, p: float) -> ConverseResult:
    """Estimate per-letter distortion and perception of a random block code.

    The master seed is split with :class:`numpy.random.SeedSequence`: the first
    child draws the codebook, child ``t + 1`` draws the source block of trial
    ``t``, so trials are independent of evaluation order.
    """
    if not 0 < p < 1:
        raise ValueError(f"Bernoulli parameter must lie in (0, 1), got {p!r}")
    if spec.trials < MIN_TRIALS:
        raise TrialBudgetTooSmall(f"{spec.trials} trials requested; at least {MIN_TRIALS} are needed")
    cb_dist = spec.codebook_distribution or Pmf.bernoulli(p)
    children = np.random.SeedSequence(spec.codebook_seed).spawn(spec.trials + 1)
    cb_rng = np.random.default_rng(children[0])
    codebook = cb_rng.random((spec.codebook_size, spec.n)) < cb_dist.probs[1]
    blocks = np.stack([np.random.default_rng(c).random(spec.n) < p for c in children[1:]])
    recon = codebook[_encode(blocks, codebook)]

    distortion = float((blocks != recon).mean())
    # per-letter TV between the empirical marginal of Xhat_i and Bern(p), averaged over i
    perception = float(np.abs(recon.mean(axis=0) - p).mean())
    closed = rdp_rate(p, distortion, perception).rate
    # distortion of whole blocks is what is independent across trials
    se = math.sqrt(distortion * (1 - distortion) / spec.trials)
    eps = 3 * se * _local_slope(p, distortion, perception)
    return ConverseResult(spec.n, spec.rate, spec.effective_rate, distortion, perception, closed, eps)
