"""Block Markov superposition of the basic RUN code: encoder with seeded
symbol interleavers and zero-block termination, the message-passing node
operations of the coupled normal graph, and the sliding-window decoder.

Encoding at time t superimposes, symbol-wise modulo q, the current basic
codeword with interleaved copies of the previous m codewords:

    c(t) = v(t) (+) P1(v(t-1)) (+) ... (+) Pm(v(t-m)),

where v(t) = 0 for t < 0 and for the m termination blocks (all-zero data).
Interleaving uses the gather convention w(t,i)[j] = v(t-i)[perm_i[j]].

The decoding graph has one layer per transmitted block with four node
kinds: the basic-code SISO constraint, an equality node that fans the
codeword variable v(t) out to its m+1 superposition uses, modulo-q
addition (check) nodes tied to the channel evidence for c(t), and the
interleavers.  The window decoder populates layers t..t+d, runs up to
``max_iters`` iterations of a forward-then-backward serial layer schedule
with an early stop, hard-decides block t, then slides one layer; blocks
left of the window are fed back as indicator messages at their decided
values (decision feedback; a freeze mode that simply stops updating them
is kept for A/B comparison).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import channels
from .constellations import LabeledConstellation
from .runcode import (
    RunSpec,
    clipped_log,
    hard_decisions,
    indicator_messages,
    normalize_log_rows,
    normalize_rows,
    run_encode,
    siso_decode,
)


def make_interleavers(seed: int, m: int, n: int) -> list[np.ndarray]:
    """m symbol interleavers of size n, reproducible across platforms.

    Each is a backward Fisher-Yates shuffle over indices j = n-1 .. 1 with
    swap targets drawn in one bulk ``integers`` call (k_j uniform on [0, j])
    from a PCG64 generator seeded with the pair (seed, i), i = 1..m.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    perms = []
    for i in range(1, int(m) + 1):
        rng = np.random.default_rng([int(seed), i])
        p = np.arange(n, dtype=np.int64)
        if n > 1:
            ks = rng.integers(0, np.arange(n, 1, -1))
            for j, k in zip(range(n - 1, 0, -1), ks.tolist()):
                p[j], p[k] = p[k], p[j]
        perms.append(p)
    return perms


@dataclass(frozen=True)
class BmstSpec:
    """Coupled-code parameters on top of a basic :class:`RunSpec`.

    ``d`` is the decoding delay (window size minus one); None selects the
    3m default.  ``decision_feedback`` switches the treatment of blocks
    that leave the window: pinned decided indicators (True) or frozen
    messages (False).
    """

    basic: RunSpec
    m: int
    interleaver_seed: int = 0
    L: int = 20
    d: int | None = None
    max_iters: int = 18
    decision_feedback: bool = True

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"need m >= 0, got {self.m}")
        if self.L < 1:
            raise ValueError(f"need L >= 1, got {self.L}")
        if self.d is not None and self.d < 0:
            raise ValueError(f"need d >= 0, got {self.d}")
        if self.max_iters < 1:
            raise ValueError(f"need max_iters >= 1, got {self.max_iters}")

    @property
    def delay(self) -> int:
        return 3 * self.m if self.d is None else self.d

    @property
    def block_len(self) -> int:
        return self.basic.code_len

    @property
    def info_block_len(self) -> int:
        return self.basic.info_len

    @property
    def total_blocks(self) -> int:
        return self.L + self.m

    @cached_property
    def interleavers(self) -> tuple[np.ndarray, ...]:
        return tuple(make_interleavers(self.interleaver_seed, self.m, self.block_len))


def effective_rate(spec: BmstSpec) -> Fraction:
    """Information symbols per coded symbol including the termination loss."""
    return Fraction(spec.L * spec.basic.P, (spec.L + spec.m) * spec.basic.Q)


def encode_with_intermediates(
    spec: BmstSpec, q: int, u_blocks
) -> tuple[np.ndarray, np.ndarray]:
    """Basic codewords v(t) and transmitted blocks c(t), including the m
    all-zero termination blocks.  Returns arrays of shape (L+m, Q*B)."""
    u_blocks = np.asarray(u_blocks, dtype=np.int64)
    if u_blocks.shape != (spec.L, spec.info_block_len):
        raise ValueError(
            f"expected {spec.L} data blocks of {spec.info_block_len} symbols, "
            f"got {u_blocks.shape}"
        )
    if u_blocks.size and (u_blocks.min() < 0 or u_blocks.max() >= q):
        raise ValueError("data symbols out of range for the given q")
    T, n = spec.total_blocks, spec.block_len
    v = np.zeros((T, n), dtype=np.int64)
    for t in range(spec.L):
        v[t] = run_encode(spec.basic, u_blocks[t])
    c = v.copy()
    for i, perm in enumerate(spec.interleavers, start=1):
        c[i:] += v[: T - i][:, perm]
    c %= q
    return v, c


def bmst_encode(spec: BmstSpec, q: int, u_blocks) -> np.ndarray:
    """Encode L data blocks into L+m transmitted blocks of length Q*B."""
    return encode_with_intermediates(spec, q, u_blocks)[1]


def dump_frame(path, spec: BmstSpec, q: int, u_blocks) -> None:
    """Debug dump: one CSV row per block symbol position with columns
    t, j, u, v, c (u empty beyond the information prefix and for the
    termination blocks)."""
    u_blocks = np.asarray(u_blocks, dtype=np.int64)
    v, c = encode_with_intermediates(spec, q, u_blocks)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "j", "u", "v", "c"])
        for t in range(spec.total_blocks):
            for j in range(spec.block_len):
                u_val = ""
                if t < spec.L and j < spec.info_block_len:
                    u_val = int(u_blocks[t, j])
                writer.writerow([t, j, u_val, int(v[t, j]), int(c[t, j])])


# ---------------------------------------------------------------------------
# cyclic-group message algebra
# ---------------------------------------------------------------------------

_diff_index_cache: dict[int, np.ndarray] = {}


def _diff_index(q: int) -> np.ndarray:
    """idx[c, a] = (c - a) mod q."""
    idx = _diff_index_cache.get(q)
    if idx is None:
        r = np.arange(q)
        idx = (r[:, None] - r[None, :]) % q
        idx.setflags(write=False)
        _diff_index_cache[q] = idx
    return idx


def _resolve_method(q: int, method: str) -> str:
    if method == "auto":
        return "direct" if q <= 4 else "fft"
    if method not in ("direct", "fft"):
        raise ValueError(f"unknown method {method!r}")
    return method


def _binary_conv(f, g) -> np.ndarray:
    # over Z_2, convolution and correlation coincide
    out = np.empty(np.broadcast_shapes(f.shape, g.shape))
    out[..., 0] = f[..., 0] * g[..., 0] + f[..., 1] * g[..., 1]
    out[..., 1] = f[..., 0] * g[..., 1] + f[..., 1] * g[..., 0]
    return out


def cyclic_convolve(f, g, method: str = "auto") -> np.ndarray:
    """Cyclic convolution over Z_q along the last axis:
    out[c] = sum_a f[a] * g[(c - a) mod q]."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    q = f.shape[-1]
    if _resolve_method(q, method) == "direct":
        if q == 2:
            return _binary_conv(f, g)
        return np.einsum("...a,...ca->...c", f, g[..., _diff_index(q)])
    out = np.fft.ifft(np.fft.fft(f, axis=-1) * np.fft.fft(g, axis=-1), axis=-1).real
    return np.clip(out, 0.0, None)


def cyclic_correlate(mu, g, method: str = "auto") -> np.ndarray:
    """Cyclic correlation over Z_q along the last axis:
    out[a] = sum_c mu[c] * g[(c - a) mod q]."""
    mu = np.asarray(mu, dtype=float)
    g = np.asarray(g, dtype=float)
    q = mu.shape[-1]
    if _resolve_method(q, method) == "direct":
        if q == 2:
            return _binary_conv(mu, g)
        return np.einsum("...c,...ca->...a", mu, g[..., _diff_index(q)])
    out = np.fft.ifft(
        np.fft.fft(mu, axis=-1) * np.conj(np.fft.fft(g, axis=-1)), axis=-1
    ).real
    return np.clip(out, 0.0, None)


def node_equal(incoming) -> list[np.ndarray]:
    """Equality (variable) node: the message out of each edge is the
    normalized product of the messages into all other edges."""
    msgs = [np.asarray(m, dtype=float) for m in incoming]
    if len(msgs) < 2:
        raise ValueError("equality node needs at least two edges")
    logs = clipped_log(np.stack(msgs))
    total = logs.sum(axis=0)
    return [normalize_log_rows(total - logs[j]) for j in range(len(msgs))]


def node_add(incoming, method: str = "auto") -> list[np.ndarray]:
    """Modulo-q addition (check) node with fixed edge semantics: the first
    message rides the sum edge (toward the superimposed symbol) and the
    rest ride the addend edges; the constraint is sum-of-addends = sum.

    The sum-edge output is the cyclic convolution of all addend messages;
    the output to addend j correlates the sum-edge message with the
    convolution of the other addends.  ``method`` picks the direct O(q^2)
    pairing or the length-q transform over the cyclic group; both agree.
    """
    msgs = [np.asarray(m, dtype=float) for m in incoming]
    if len(msgs) < 2:
        raise ValueError("addition node needs a sum edge plus at least one addend")
    sum_msg, addends = msgs[0], msgs[1:]
    k = len(addends)
    # prefix[j] = conv of addends[:j]; suffix[j] = conv of addends[j:]
    prefix: list[np.ndarray | None] = [None] * (k + 1)
    suffix: list[np.ndarray | None] = [None] * (k + 1)
    for j in range(k):
        prefix[j + 1] = (
            addends[j]
            if prefix[j] is None
            else cyclic_convolve(prefix[j], addends[j], method)
        )
    for j in range(k - 1, -1, -1):
        suffix[j] = (
            addends[j]
            if suffix[j + 1] is None
            else cyclic_convolve(addends[j], suffix[j + 1], method)
        )
    outs = [normalize_rows(prefix[k])]
    for j in range(k):
        others = prefix[j]
        if suffix[j + 1] is not None:
            others = (
                suffix[j + 1]
                if others is None
                else cyclic_convolve(others, suffix[j + 1], method)
            )
        if others is None:
            outs.append(normalize_rows(cyclic_correlate(sum_msg, _delta0_like(sum_msg))))
        else:
            outs.append(normalize_rows(cyclic_correlate(sum_msg, others, method)))
    return outs


def _delta0_like(msg: np.ndarray) -> np.ndarray:
    out = np.zeros_like(msg)
    out[..., 0] = 1.0
    return out


# ---------------------------------------------------------------------------
# sliding-window decoder
# ---------------------------------------------------------------------------


class SlidingWindowDecoder:
    """Windowed message-passing decoder for the coupled code.

    One instance holds mutable per-frame state and is single-threaded; run
    independent instances for frame-level parallelism.
    """

    def __init__(
        self,
        spec: BmstSpec,
        constellation: LabeledConstellation,
        method: str = "auto",
        early_stop_tol: float = 1e-6,
    ):
        self.spec = spec
        self.c = constellation
        self.q = constellation.q
        self.method = method
        self.early_stop_tol = early_stop_tol

    # -- public entry points ------------------------------------------------

    def decode(self, y_blocks, sigma, gains_blocks=None, trace=None) -> np.ndarray:
        """Decode L+m received blocks into the L data blocks.

        ``y_blocks`` has shape (L+m, Q*B, dim) (a trailing dim of 1 may be
        omitted); ``gains_blocks`` carries per-symbol fading gains in the
        same block layout when the channel faded.  ``trace``, if a list,
        receives (window, iteration, layer, mean message entropy in bits)
        tuples.
        """
        evid = self._evidence(y_blocks, sigma, gains_blocks)
        return self.decode_evidence(evid, trace=trace)

    def decode_evidence(self, evid: np.ndarray, trace=None) -> np.ndarray:
        """Decode from precomputed per-block channel evidence
        (shape (L+m, Q*B, q))."""
        spec, q = self.spec, self.q
        T, n, m = spec.total_blocks, spec.block_len, spec.m
        evid = np.asarray(evid, dtype=float)
        if evid.shape != (T, n, q):
            raise ValueError(f"evidence must be {(T, n, q)}, got {evid.shape}")
        basic = spec.basic

        self._evid = evid
        self._to_plus = np.full((T, m + 1, n, q), 1.0 / q)
        self._from_plus = np.full((T, m + 1, n, q), 1.0 / q)
        # repetition-node extrinsics and the equality-node priors live in the
        # log domain (row max subtracted), which spares one exp/normalize
        # round trip per update
        self._run_ext_log = np.zeros((spec.L, n, q))
        self._prior_log = np.zeros((spec.L, n, q))
        self._pinned = np.zeros(T, dtype=bool)
        self._pinned[spec.L :] = True
        zero_block = indicator_messages(np.zeros(n, dtype=np.int64), q)
        for t in range(spec.L, T):
            self._to_plus[t] = zero_block

        decisions = np.zeros((spec.L, basic.info_len), dtype=np.int64)
        for t0 in range(spec.L):
            hi = min(t0 + spec.delay, T - 1)
            for it in range(spec.max_iters):
                delta = 0.0
                for t in range(t0, hi + 1):
                    delta = max(delta, self._update_layer(t))
                for t in range(hi, t0 - 1, -1):
                    delta = max(delta, self._update_layer(t))
                if trace is not None:
                    for t in range(t0, min(hi, spec.L - 1) + 1):
                        trace.append(
                            (t0, it, t, self._mean_entropy(self.prior(t)))
                        )
                if delta < self.early_stop_tol:
                    break
            decisions[t0] = hard_decisions(self.app(t0))
            self._pin(t0, decisions[t0])
        return decisions

    def prior(self, t: int) -> np.ndarray:
        """Current messages entering the repetition node of data block t."""
        return normalize_log_rows(self._prior_log[t])

    def app(self, t: int) -> np.ndarray:
        """Current per-information-symbol a-posteriori messages at block t."""
        starts, _, _ = self.spec.basic._layout
        totals = np.add.reduceat(self._prior_log[t], starts, axis=0)
        return normalize_log_rows(totals)

    # -- internals ------------------------------------------------------------

    def _evidence(self, y_blocks, sigma, gains_blocks) -> np.ndarray:
        spec = self.spec
        T, n = spec.total_blocks, spec.block_len
        y = np.asarray(y_blocks, dtype=float)
        if y.ndim == 2:
            y = y[:, :, None]
        if y.shape[:2] != (T, n):
            raise ValueError(f"expected {T} blocks of {n} samples, got {y.shape}")
        evid = np.empty((T, n, self.q))
        for t in range(T):
            gains = None if gains_blocks is None else np.asarray(gains_blocks[t])
            real = channels.ChannelRealization(y=y[t], sigma=sigma, gains=gains)
            evid[t] = channels.channel_evidence(self.c, real)
        return evid

    def _update_layer(self, t: int) -> float:
        self._update_plus(t)
        if t < self.spec.L and not self._pinned[t]:
            delta = self._update_eq(t)
            self._update_run(t)
            return delta
        return 0.0

    def _update_plus(self, t: int) -> None:
        """Addition-node update at layer t: refresh the messages toward the
        equality nodes of blocks t-i, using the channel evidence of c(t) as
        the sum-edge input."""
        spec = self.spec
        lags = [i for i in range(spec.m + 1) if t - i >= 0]
        live = [j for j, i in enumerate(lags) if not self._pinned[t - i]]
        if not live:
            return
        msgs = []
        for i in lags:
            a = self._to_plus[t - i, i]
            if i:
                a = a[spec.interleavers[i - 1]]
            msgs.append(a)
        k = len(msgs)
        prefix: list[np.ndarray | None] = [None] * (k + 1)
        suffix: list[np.ndarray | None] = [None] * (k + 1)
        for j in range(k):
            prefix[j + 1] = (
                msgs[j]
                if prefix[j] is None
                else cyclic_convolve(prefix[j], msgs[j], self.method)
            )
        for j in range(k - 1, -1, -1):
            suffix[j] = (
                msgs[j]
                if suffix[j + 1] is None
                else cyclic_convolve(msgs[j], suffix[j + 1], self.method)
            )
        evid = self._evid[t]
        if k == 1:
            outs = evid[None, :, :]  # correlation with the empty product
        else:
            others = []
            for j in live:
                oth = prefix[j]
                if suffix[j + 1] is not None:
                    oth = (
                        suffix[j + 1]
                        if oth is None
                        else cyclic_convolve(oth, suffix[j + 1], self.method)
                    )
                others.append(oth)
            # correlation of unit-mass messages keeps unit mass, so no
            # per-row normalization is needed here
            outs = cyclic_correlate(evid[None, :, :], np.stack(others), self.method)
        for row, j in enumerate(live):
            i = lags[j]
            out = outs[row]
            if i:
                buf = np.empty_like(out)
                buf[spec.interleavers[i - 1]] = out
                out = buf
            self._from_plus[t - i, i] = out

    def _update_eq(self, t: int) -> float:
        """Equality-node update at data layer t; returns the largest message
        change, which drives the early stop."""
        spec = self.spec
        lags = [i for i in range(spec.m + 1) if t + i <= spec.total_blocks - 1]
        logs = clipped_log(self._from_plus[t, lags])
        prior_log = logs.sum(axis=0)
        self._prior_log[t] = prior_log
        total = prior_log + self._run_ext_log[t]
        news = normalize_log_rows(total[None, :, :] - logs)
        delta = float(np.abs(news - self._to_plus[t, lags]).max())
        self._to_plus[t, lags] = news
        return delta

    def _update_run(self, t: int) -> None:
        """Repetition-node update: extrinsics from the current priors, kept
        in the log domain (empty products at uncoded positions give zeros,
        i.e. uniform messages).  No per-row offset removal: every consumer
        exp-normalizes with max subtraction, which cancels row offsets."""
        starts, pos_group, uncoded = self.spec.basic._layout
        lp = self._prior_log[t]
        totals = np.add.reduceat(lp, starts, axis=0)
        ext = totals[pos_group] - lp
        ext[uncoded] = 0.0
        self._run_ext_log[t] = ext

    def _pin(self, t: int, decided_u: np.ndarray) -> None:
        self._pinned[t] = True
        if self.spec.decision_feedback:
            v_hat = run_encode(self.spec.basic, decided_u)
            block = indicator_messages(v_hat, self.q)
            self._to_plus[t] = block
        # freeze mode: leave the converged messages in place

    @staticmethod
    def _mean_entropy(messages: np.ndarray) -> float:
        p = np.clip(messages, 1e-300, None)
        return float(-(p * np.log2(p)).sum(axis=-1).mean())


def swd_decode(
    spec: BmstSpec,
    c: LabeledConstellation,
    y_blocks,
    sigma,
    fading=None,
    method: str = "auto",
    trace=None,
) -> np.ndarray:
    """Convenience wrapper: build a decoder and decode one frame."""
    dec = SlidingWindowDecoder(spec, c, method=method)
    return dec.decode(y_blocks, sigma, gains_blocks=fading, trace=trace)
