"""Finite-alphabet probability primitives.

All information quantities are in bits.  ``0 log 0`` is taken to be 0 and is
handled by masking, so ``log(0)`` is never evaluated.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyAlphabet,
    InvalidTernary,
    NegativeProbability,
    NotNormalized,
    ZeroMarginalOutput,
)

NORMALIZATION_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_simplex(v: np.ndarray, what: str) -> np.ndarray:
    if v.size == 0:
        raise EmptyAlphabet(f"{what} has an empty alphabet")
    if not np.all(np.isfinite(v)):
        raise NegativeProbability(f"{what} has non-finite entries")
    if np.any(v < 0):
        raise NegativeProbability(f"{what} has negative entries: min={v.min()!r}")
    total = float(v.sum())
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(total, abs(total - 1.0))
    return v / total


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function over ``{0, ..., alphabet_size - 1}``."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _frozen(_check_simplex(np.asarray(self.probs, float).ravel(), "pmf")))

    @property
    def alphabet_size(self) -> int:
        return self.probs.size

    @classmethod
    def bernoulli(cls, p: float) -> "Pmf":
        """Bern(p): probability ``p`` on symbol 1."""
        return cls(np.array([1.0 - p, p]))

    @classmethod
    def uniform(cls, n: int) -> "Pmf":
        return cls(np.full(n, 1.0 / n))

    def __len__(self) -> int:
        return self.alphabet_size

    def __eq__(self, other) -> bool:
        return isinstance(other, Pmf) and np.array_equal(self.probs, other.probs)

    def __repr__(self) -> str:
        return f"Pmf({self.probs.tolist()})"


@dataclass(frozen=True, eq=False)
class Channel:
    """Conditional pmf; ``rows[x, y]`` is P(output = y | input = x)."""

    rows: np.ndarray

    def __post_init__(self):
        m = np.array(self.rows, dtype=float)
        if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
            raise EmptyAlphabet(f"channel must be a non-empty matrix, got shape {m.shape}")
        m = np.vstack([_check_simplex(row, f"channel row {i}") for i, row in enumerate(m)])
        object.__setattr__(self, "rows", _frozen(m))

    @property
    def n_inputs(self) -> int:
        return self.rows.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.rows.shape[1]

    @classmethod
    def identity(cls, n: int) -> "Channel":
        return cls(np.eye(n))

    @classmethod
    def constant(cls, out: Pmf | np.ndarray, n_inputs: int) -> "Channel":
        out = out.probs if isinstance(out, Pmf) else np.asarray(out, float)
        return cls(np.tile(out, (n_inputs, 1)))

    @classmethod
    def binary(cls, a: float, b: float) -> "Channel":
        """Binary channel with P(0|0) = a and P(0|1) = b."""
        return cls(np.array([[a, 1.0 - a], [b, 1.0 - b]]))

    def __eq__(self, other) -> bool:
        return isinstance(other, Channel) and np.array_equal(self.rows, other.rows)

    def __repr__(self) -> str:
        return f"Channel({self.rows.tolist()})"


@dataclass(frozen=True, eq=False)
class JointPmf:
    probs: np.ndarray

    def __post_init__(self):
        m = np.array(self.probs, dtype=float)
        if m.ndim != 2 or m.size == 0:
            raise EmptyAlphabet(f"joint pmf must be a non-empty matrix, got shape {m.shape}")
        _check_simplex(m.ravel(), "joint pmf")
        object.__setattr__(self, "probs", _frozen(m / m.sum()))

    def row_marginal(self) -> Pmf:
        return Pmf(self.probs.sum(axis=1))

    def col_marginal(self) -> Pmf:
        return Pmf(self.probs.sum(axis=0))


def validate_pmf(probs) -> Pmf:
    """Build a :class:`Pmf`, renormalizing inputs that are within 1e-12 of summing to one."""
    return Pmf(np.asarray(probs, dtype=float))


def validate_channel(rows) -> Channel:
    return Channel(np.asarray(rows, dtype=float))


def _check_dims(source: Pmf, channel: Channel) -> None:
    if source.alphabet_size != channel.n_inputs:
        raise DimensionMismatch(
            f"source has {source.alphabet_size} symbols but channel has {channel.n_inputs} inputs"
        )


def output_marginal(source: Pmf, channel: Channel) -> Pmf:
    _check_dims(source, channel)
    q = source.probs @ channel.rows
    return Pmf(q / q.sum())


def joint(source: Pmf, channel: Channel) -> JointPmf:
    _check_dims(source, channel)
    return JointPmf(source.probs[:, None] * channel.rows)


def _entropy_bits(v: np.ndarray) -> float:
    nz = v[v > 0]
    return float(-(nz * np.log2(nz)).sum())


def entropy(p: Pmf) -> float:
    return _entropy_bits(p.probs)


def binary_entropy(alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"binary entropy needs alpha in [0, 1], got {alpha!r}")
    return _entropy_bits(np.array([alpha, 1.0 - alpha]))


def ternary_entropy(alpha: float, beta: float) -> float:
    """Entropy of the three-point pmf ``(alpha, beta, 1 - alpha - beta)``."""
    rest = 1.0 - alpha - beta
    # rounding in callers can leave the third mass a few ulp below zero
    if alpha < 0 or beta < 0 or rest < -1e-15:
        raise InvalidTernary(f"({alpha!r}, {beta!r}) is not a ternary pmf")
    return _entropy_bits(np.array([alpha, beta, max(rest, 0.0)]))


def mi_nats(p: np.ndarray, Q: np.ndarray) -> float:
    """I(X; Y) in nats for raw arrays; used on hot solver paths."""
    q = p @ Q
    pi = p[:, None] * Q
    mask = pi > 0
    # difference of logs: Q / q overflows when p(x) is subnormal
    log_ratio = np.log(Q[mask]) - np.log(np.broadcast_to(q, Q.shape)[mask])
    return max(float((pi[mask] * log_ratio).sum()), 0.0)


def mutual_information(source: Pmf, channel: Channel) -> float:
    _check_dims(source, channel)
    return mi_nats(source.probs, channel.rows) / np.log(2.0)


def posterior(source: Pmf, channel: Channel) -> Channel:
    """Bayes inverse channel p(x | y).

    Rows for outputs with zero marginal are undefined; they are filled with the
    source pmf and a :class:`ZeroMarginalOutput` warning lists them.
    """
    _check_dims(source, channel)
    pi = source.probs[:, None] * channel.rows
    q = pi.sum(axis=0)
    rows = np.empty((channel.n_outputs, source.alphabet_size))
    dead = q <= 0
    rows[~dead] = (pi[:, ~dead] / q[~dead]).T
    if dead.any():
        rows[dead] = source.probs
        warnings.warn(ZeroMarginalOutput(np.flatnonzero(dead)), stacklevel=2)
    rows /= rows.sum(axis=1, keepdims=True)
    return Channel(rows)


def compose(first: Channel, second: Channel) -> Channel:
    """Cascade ``first`` then ``second``."""
    if first.n_outputs != second.n_inputs:
        raise DimensionMismatch(
            f"cannot cascade a channel with {first.n_outputs} outputs into one with {second.n_inputs} inputs"
        )
    m = first.rows @ second.rows
    return Channel(m / m.sum(axis=1, keepdims=True))
