"""Finite-alphabet probability vectors, empirical types, divergences, and sampling.

Everything downstream (solvers, classifiers, simulations) consumes these
primitives. All divergences are in nats; the 0*ln(0) = 0 convention is
implemented by skipping zero-weight terms, never by evaluating ln(0).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DomainError

__all__ = [
    "Distribution",
    "EmpiricalType",
    "Sample",
    "RandomStream",
    "kl_divergence",
    "renyi_divergence",
    "gjs_divergence",
    "perturb_type",
    "tilted_geometric",
    "empirical_type",
    "sample_iid",
]

# Construction tolerances: inputs whose mass deviates from 1 by more than
# _SUM_REJECT are rejected; smaller deviations (config-file rounding) are
# renormalized so the stored vector sums to 1 within _SUM_INVARIANT.
_SUM_REJECT = 1e-9
_SUM_INVARIANT = 1e-12


@dataclass(frozen=True)
class Distribution:
    """Strictly positive probability vector over a finite alphabet."""

    probs: np.ndarray
    alphabet_size: int = field(init=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size < 2:
            raise DomainError("distribution needs a 1-D vector of length >= 2")
        if not np.all(np.isfinite(p)):
            raise DomainError("distribution weights must be finite")
        if np.any(p <= 0.0):
            raise DomainError("distribution weights must be strictly positive")
        total = float(p.sum())
        if abs(total - 1.0) > _SUM_REJECT:
            raise DomainError(f"weights sum to {total!r}, outside 1 +/- {_SUM_REJECT}")
        p = p / total
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "alphabet_size", int(p.size))
        assert abs(float(p.sum()) - 1.0) <= _SUM_INVARIANT

    def __len__(self) -> int:
        return self.alphabet_size

    def to_json(self) -> str:
        return json.dumps([repr(float(x)) for x in self.probs])

    @classmethod
    def from_json(cls, text: str) -> "Distribution":
        raw = json.loads(text)
        return cls(np.array([float(x) for x in raw], dtype=np.float64))


@dataclass(frozen=True)
class EmpiricalType:
    """Symbol counts plus the sample length they came from."""

    counts: np.ndarray
    n: int

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.ndim != 1 or c.size < 1:
            raise DomainError("type counts must be a 1-D vector")
        if np.any(c < 0):
            raise DomainError("type counts must be non-negative")
        if int(c.sum()) != int(self.n):
            raise DomainError(f"counts sum to {int(c.sum())}, expected n={self.n}")
        if self.n <= 0:
            raise DomainError("sample length must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "n", int(self.n))

    @property
    def alphabet_size(self) -> int:
        return int(self.counts.size)

    def frequencies(self) -> np.ndarray:
        return self.counts / float(self.n)

    def frequencies_exact(self) -> list:
        # Rational form: sums to 1 exactly, no float rounding.
        return [Fraction(int(c), self.n) for c in self.counts]


@dataclass(frozen=True)
class Sample:
    """A finite sequence of alphabet indices."""

    symbols: np.ndarray
    alphabet_size: int

    def __post_init__(self):
        s = np.asarray(self.symbols, dtype=np.int64)
        if s.ndim != 1:
            raise DomainError("sample must be a 1-D index sequence")
        if s.size and (int(s.min()) < 0 or int(s.max()) >= self.alphabet_size):
            raise DomainError("sample contains out-of-range symbols")
        s.setflags(write=False)
        object.__setattr__(self, "symbols", s)

    def __len__(self) -> int:
        return int(self.symbols.size)

    def save(self, path) -> None:
        np.savetxt(path, self.symbols, fmt="%d")

    @classmethod
    def load(cls, path, alphabet_size: int) -> "Sample":
        syms = np.atleast_1d(np.loadtxt(path, dtype=np.int64))
        return cls(syms, alphabet_size)


class RandomStream:
    """Counter-based random stream addressed by (master_seed, index, role).

    Streams for distinct (index, role) pairs are statistically independent,
    so trial results do not depend on execution order or worker partitioning.
    Single-owner: never share one stream across threads.
    """

    def __init__(self, master_seed: int, index: int = 0, role: int = 0):
        if not 0 <= index < (1 << 62):
            raise DomainError("stream index out of range")
        if not 0 <= role < 4:
            raise DomainError("stream role out of range")
        key = np.array(
            [np.uint64(master_seed & ((1 << 64) - 1)),
             np.uint64((role << 62) | index)],
            dtype=np.uint64,
        )
        self.generator = np.random.Generator(np.random.Philox(key=key))
        self.master_seed = master_seed
        self.index = index
        self.role = role

    def uniforms(self, count: int) -> np.ndarray:
        return self.generator.random(count)


ProbVector = Union[Distribution, Sequence[float], np.ndarray]


def _as_probs(P: ProbVector) -> np.ndarray:
    if isinstance(P, Distribution):
        return P.probs
    if isinstance(P, EmpiricalType):
        return P.frequencies()
    return np.asarray(P, dtype=np.float64)


def kl_divergence(P: ProbVector, Q: ProbVector) -> float:
    """D(P||Q) in nats. Zeros allowed on the left; the right must be positive on P's support."""
    p = _as_probs(P)
    q = _as_probs(Q)
    if p.shape != q.shape:
        raise DomainError(f"dimension mismatch: {p.shape} vs {q.shape}")
    mask = p > 0.0
    if np.any(q[mask] <= 0.0):
        raise DomainError("left support not contained in right support")
    val = float(np.sum(p[mask] * np.log(p[mask] / q[mask])))
    if not np.isfinite(val):
        raise DomainError("non-finite divergence")
    return max(val, 0.0)


def renyi_divergence(rho: float, P: ProbVector, Q: ProbVector) -> float:
    """Renyi divergence of order rho in nats; rho = 1 is the KL limit and is rejected here."""
    if rho <= 0.0:
        raise DomainError("Renyi order must be positive")
    if rho == 1.0:
        raise DomainError("order 1 is the KL limit; use kl_divergence")
    p = _as_probs(P)
    q = _as_probs(Q)
    if p.shape != q.shape:
        raise DomainError(f"dimension mismatch: {p.shape} vs {q.shape}")
    mask = p > 0.0
    total = float(np.sum(p[mask] ** rho * q[mask] ** (1.0 - rho)))
    val = np.log(total) / (rho - 1.0)
    if not np.isfinite(val):
        raise DomainError("non-finite divergence")
    return max(float(val), 0.0)


def gjs_divergence(alpha: float, Q: ProbVector, P: ProbVector) -> float:
    """Generalized Jensen-Shannon divergence D(Q||M) + alpha*D(P||M), M = (Q+alpha*P)/(1+alpha)."""
    if alpha <= 0.0:
        raise DomainError("GJS weight must be positive")
    q = _as_probs(Q)
    p = _as_probs(P)
    if p.shape != q.shape:
        raise DomainError(f"dimension mismatch: {q.shape} vs {p.shape}")
    mix = (q + alpha * p) / (1.0 + alpha)
    # mix > 0 wherever q or p is positive, so both KL terms are finite.
    return kl_divergence(q, np.where(mix > 0, mix, 1.0)) + alpha * kl_divergence(
        p, np.where(mix > 0, mix, 1.0)
    )


def perturb_type(T: EmpiricalType, delta: float) -> Distribution:
    """Mix the empirical frequencies with uniform: (1-delta)*T/n + delta/|X|."""
    if not 0.0 < delta < 1.0:
        raise DomainError("perturbation must lie in (0,1)")
    freq = T.frequencies()
    probs = (1.0 - delta) * freq + delta / freq.size
    return Distribution(probs)


def tilted_geometric(P0: Distribution, P1: Distribution, s: float) -> Distribution:
    """Geometric-path member proportional to P0^s * P1^(1-s), normalized by the numerator sum."""
    if not 0.0 <= s <= 1.0:
        raise DomainError("tilt parameter must lie in [0,1]")
    if P0.alphabet_size != P1.alphabet_size:
        raise DomainError("dimension mismatch")
    logg = s * np.log(P0.probs) + (1.0 - s) * np.log(P1.probs)
    logg -= logg.max()  # guards against underflow on skewed pairs
    g = np.exp(logg)
    return Distribution(g / g.sum())


def empirical_type(x: Union[Sample, Iterable[int]], alphabet_size: int) -> EmpiricalType:
    """Count symbol occurrences; errors on out-of-range symbols or empty input."""
    syms = x.symbols if isinstance(x, Sample) else np.asarray(list(x), dtype=np.int64)
    if syms.size == 0:
        raise DomainError("empty sample has no type")
    if int(syms.min()) < 0 or int(syms.max()) >= alphabet_size:
        raise DomainError("sample contains out-of-range symbols")
    counts = np.bincount(syms, minlength=alphabet_size)
    return EmpiricalType(counts.astype(np.int64), int(syms.size))


def sample_iid(P: Distribution, n: int, stream: RandomStream) -> Sample:
    """n i.i.d. draws from P via inverse-CDF on the cumulative weights."""
    if n < 1:
        raise DomainError("sample length must be at least 1")
    cdf = np.cumsum(P.probs)
    cdf[-1] = 1.0  # closes float gap so u ~ U[0,1) always lands in range
    u = stream.uniforms(n)
    syms = np.searchsorted(cdf, u, side="right").astype(np.int64)
    return Sample(syms, P.alphabet_size)
