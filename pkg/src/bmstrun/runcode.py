"""Repetition coding over the modulo-q group, time-shared to reach any
rational rate, plus the symbol-wise SISO decoder.

A rate P/Q is realized by repeating the first share of the information
symbols N+1 times and the rest N times, where N is the unique integer with
1/(N+1) < P/Q <= 1/N and the long-repetition share is alpha = Q/P - N.
Group vectors are plain integer arrays with entries in {0, ..., q-1};
decoder messages are rows of q nonnegative floats summing to one.

All message arithmetic that multiplies many factors runs in the log domain
with max subtraction; linear values are materialized only at normalization
points, and entries are floored at 1e-300 before logs so saturated
messages cannot poison products.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import channels
from .constellations import LabeledConstellation, NoiseScale

#: Linear-domain floor applied before taking logs.
LOG_FLOOR = 1e-300


def time_sharing_params(P: int, Q: int) -> tuple[int, Fraction]:
    """Unique repetition factor N and long-repetition share alpha for rate P/Q.

    N satisfies 1/(N+1) < P/Q <= 1/N; alpha = Q/P - N as an exact rational.
    """
    P, Q = int(P), int(Q)
    if P < 1 or Q < P:
        raise ValueError(f"need 1 <= P <= Q, got P={P}, Q={Q}")
    N = Q // P
    alpha = Fraction(Q, P) - N
    return N, alpha


@dataclass(frozen=True)
class RunSpec:
    """Parameters of the B-fold time-shared repetition code of rate P/Q."""

    P: int
    Q: int
    B: int = 1

    def __post_init__(self):
        if self.P < 1 or self.Q < self.P:
            raise ValueError(f"need 1 <= P <= Q, got P={self.P}, Q={self.Q}")
        if self.B < 1:
            raise ValueError(f"need B >= 1, got B={self.B}")

    @cached_property
    def N(self) -> int:
        return time_sharing_params(self.P, self.Q)[0]

    @cached_property
    def alpha(self) -> Fraction:
        return time_sharing_params(self.P, self.Q)[1]

    @cached_property
    def n_long(self) -> int:
        """Information symbols per fold encoded with the (N+1)-repetition."""
        n = self.alpha * self.P
        assert n.denominator == 1
        return int(n)

    @cached_property
    def repeats(self) -> np.ndarray:
        """(P,) repetition count per information symbol within one fold."""
        r = np.full(self.P, self.N, dtype=np.int64)
        r[: self.n_long] = self.N + 1
        r.setflags(write=False)
        return r

    @property
    def info_len(self) -> int:
        return self.P * self.B

    @property
    def code_len(self) -> int:
        return self.Q * self.B

    @cached_property
    def _layout(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(group starts, per-position group index, uncoded-position mask)
        over the full B-fold codeword; folds are laid out contiguously."""
        reps = np.tile(self.repeats, self.B)
        starts = np.concatenate([[0], np.cumsum(reps)[:-1]])
        pos_group = np.repeat(np.arange(self.info_len), reps)
        uncoded = np.repeat(reps == 1, reps)
        return starts, pos_group, uncoded


def run_encode(spec: RunSpec, u) -> np.ndarray:
    """Encode P*B information symbols into the Q*B codeword.

    Within each fold the first alpha*P symbols are repeated N+1 times and
    the rest N times, long repetitions first, folds contiguous.
    """
    u = np.asarray(u, dtype=np.int64)
    if u.shape != (spec.info_len,):
        raise ValueError(f"expected {spec.info_len} information symbols, got {u.shape}")
    return np.repeat(u, np.tile(spec.repeats, spec.B))


def apply_dither(v, w, q: int) -> np.ndarray:
    """Element-wise modulo-q addition of two group vectors."""
    v = np.asarray(v, dtype=np.int64)
    w = np.asarray(w, dtype=np.int64)
    if v.shape != w.shape:
        raise ValueError(f"shape mismatch: {v.shape} vs {w.shape}")
    return (v + w) % q


def negate(w, q: int) -> np.ndarray:
    """Group inverse: apply_dither(v, negate(w, q), q) undoes apply_dither."""
    return (-np.asarray(w, dtype=np.int64)) % q


def channel_priors(c: LabeledConstellation, y, w, sigma) -> np.ndarray:
    """A-priori messages for a dithered transmission over AWGN.

    Shares its implementation with :func:`channels.channel_evidence`
    (the unit-gain case).
    """
    sigma = sigma.sigma if isinstance(sigma, NoiseScale) else float(sigma)
    real = channels.ChannelRealization(y=np.asarray(y, dtype=float), sigma=sigma)
    return channels.channel_evidence(c, real, dither=w)


def uniform_messages(n: int, q: int) -> np.ndarray:
    return np.full((n, q), 1.0 / q)


def indicator_messages(symbols, q: int) -> np.ndarray:
    symbols = np.asarray(symbols, dtype=np.int64)
    out = np.zeros((len(symbols), q))
    out[np.arange(len(symbols)), symbols] = 1.0
    return out


def normalize_rows(mat: np.ndarray) -> np.ndarray:
    """Scale each row to sum 1; all-zero rows fall back to uniform."""
    mat = np.asarray(mat, dtype=float)
    s = mat.sum(axis=-1, keepdims=True)
    bad = s <= 0.0
    if bad.any():
        mat = np.where(bad, 1.0, mat)
        s = mat.sum(axis=-1, keepdims=True)
    return mat / s


def normalize_log_rows(logmat: np.ndarray) -> np.ndarray:
    """Exponentiate log messages with max subtraction and normalize rows."""
    shifted = logmat - logmat.max(axis=-1, keepdims=True)
    out = np.exp(shifted)
    out /= out.sum(axis=-1, keepdims=True)
    return out


def clipped_log(mat: np.ndarray) -> np.ndarray:
    return np.log(np.clip(mat, LOG_FLOOR, None))


def siso_decode(spec: RunSpec, priors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symbol-wise SISO decoding of the B-fold time-shared repetition code.

    Per repetition group the a-posteriori message is the normalized product
    of the group's priors and each position's extrinsic message is the
    product of the other positions' priors; an uncoded position (group of
    size one) gets the uniform extrinsic (empty product).

    Returns ``(app, extrinsic)`` with shapes (P*B, q) and (Q*B, q).
    """
    priors = np.asarray(priors, dtype=float)
    if priors.ndim != 2 or priors.shape[0] != spec.code_len:
        raise ValueError(
            f"priors must be ({spec.code_len}, q), got {priors.shape}"
        )
    if not np.isfinite(priors).all() or (priors < 0).any():
        raise ValueError("priors must be finite and nonnegative")
    starts, pos_group, uncoded = spec._layout
    lp = clipped_log(priors)
    totals = np.add.reduceat(lp, starts, axis=0)
    app = normalize_log_rows(totals)
    ext_log = totals[pos_group] - lp
    ext_log[uncoded] = 0.0
    return app, normalize_log_rows(ext_log)


def hard_decision(message) -> int:
    """Argmax symbol; ties break toward the smallest index."""
    return int(np.argmax(np.asarray(message)))


def hard_decisions(messages: np.ndarray) -> np.ndarray:
    """Row-wise argmax with smallest-index tie-breaking."""
    return np.argmax(np.asarray(messages), axis=-1)
