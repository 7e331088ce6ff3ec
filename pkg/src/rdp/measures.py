"""Distortion matrices, divergences between pmfs, and the A2 profile."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyAlphabet
from .prob import Channel, Pmf, _check_dims


@dataclass(frozen=True, eq=False)
class DistortionMatrix:
    """Dense distortion values, rows = source symbols, columns = reconstructions.

    ``source_values``/``recon_values`` are kept when the matrix came from a
    real-valued embedding (squared error); they are ``None`` otherwise.
    """

    values: np.ndarray
    source_values: np.ndarray | None = None
    recon_values: np.ndarray | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.size == 0:
            raise EmptyAlphabet(f"distortion matrix must be non-empty 2-D, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("distortion values must be finite and non-negative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        for name in ("source_values", "recon_values"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.array(arr, dtype=float)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def is_square(self) -> bool:
        return self.values.shape[0] == self.values.shape[1]

    def identity_is_exact(self) -> bool:
        """True when the alphabets coincide with zero diagonal and positive off-diagonal."""
        if not self.is_square:
            return False
        v = self.values
        off = ~np.eye(v.shape[0], dtype=bool)
        return bool(np.all(np.diag(v) == 0) and np.all(v[off] > 0))


class DivergenceKind(enum.Enum):
    TV = "tv"
    KL = "kl"

    @classmethod
    def parse(cls, text: str) -> "DivergenceKind":
        try:
            return cls(text.lower())
        except ValueError:
            raise ValueError(f"unknown divergence {text!r}; expected one of tv, kl") from None


def hamming_matrix(n: int) -> DistortionMatrix:
    if n < 1:
        raise EmptyAlphabet("alphabet size must be at least 1")
    return DistortionMatrix(1.0 - np.eye(n))


def squared_error_matrix(source_values, recon_values=None) -> DistortionMatrix:
    s = np.asarray(source_values, dtype=float).ravel()
    r = s if recon_values is None else np.asarray(recon_values, dtype=float).ravel()
    if s.size == 0 or r.size == 0:
        raise EmptyAlphabet("value embeddings must be non-empty")
    return DistortionMatrix((s[:, None] - r[None, :]) ** 2, source_values=s, recon_values=r)


def _check_delta(source: Pmf, channel: Channel, delta: DistortionMatrix) -> None:
    _check_dims(source, channel)
    if delta.shape != channel.rows.shape:
        raise DimensionMismatch(f"distortion matrix {delta.shape} does not match channel {channel.rows.shape}")


def expected_distortion(source: Pmf, channel: Channel, delta: DistortionMatrix) -> float:
    _check_delta(source, channel, delta)
    return float(np.sum(source.probs[:, None] * channel.rows * delta.values))


def tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(p - q).sum())


def kl_bits(p: np.ndarray, q: np.ndarray) -> float:
    mask = p > 0
    if np.any(q[mask] <= 0):
        return np.inf
    return max(float((p[mask] * (np.log2(p[mask]) - np.log2(q[mask]))).sum()), 0.0)


def divergence(kind: DivergenceKind, p: Pmf, q: Pmf) -> float:
    """d(p, q).  KL is in bits and is ``inf`` when ``q`` misses mass of ``p``."""
    if p.alphabet_size != q.alphabet_size:
        raise DimensionMismatch(f"pmfs over {p.alphabet_size} and {q.alphabet_size} symbols")
    if kind is DivergenceKind.TV:
        return tv_distance(p.probs, q.probs)
    if kind is DivergenceKind.KL:
        return kl_bits(p.probs, q.probs)
    raise ValueError(f"unsupported divergence {kind!r}")


def a2_profile(source: Pmf, delta: DistortionMatrix) -> tuple[np.ndarray, bool]:
    """Return ``k(z) = E[delta(X, z)]`` and whether assumption A2 is violated.

    The flag is True when every symbol in the support of the source attains the
    minimum of ``k`` (the weak form of the assumption fails).
    """
    if delta.shape[0] != source.alphabet_size:
        raise DimensionMismatch(f"distortion matrix has {delta.shape[0]} rows for {source.alphabet_size} symbols")
    k = source.probs @ delta.values
    if delta.shape[1] != source.alphabet_size:
        # reconstruction alphabet differs, so the support of p_X cannot sit inside argmin k
        return k, False
    support = source.probs > 0
    kmin = k.min()
    violated = bool(np.all(np.abs(k[support] - kmin) <= 1e-12 * max(1.0, abs(kmin))))
    return k, violated


def zero_rate_distortion(source: Pmf, delta: DistortionMatrix) -> tuple[float, int]:
    """Smallest distortion of a constant reconstruction and its symbol (lowest index on ties)."""
    k, _ = a2_profile(source, delta)
    z = int(np.argmin(k))
    return float(k[z]), z


def min_distortion(source: Pmf, delta: DistortionMatrix) -> float:
    """Smallest achievable expected distortion over all channels."""
    if delta.shape[0] != source.alphabet_size:
        raise DimensionMismatch(f"distortion matrix has {delta.shape[0]} rows for {source.alphabet_size} symbols")
    return float(source.probs @ delta.values.min(axis=1))
