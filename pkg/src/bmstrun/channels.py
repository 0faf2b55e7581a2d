"""Stochastic channel models and channel-evidence computation.

Two memoryless channels are provided: AWGN, and Rayleigh flat fading with
per-symbol i.i.d. gains known at the receiver (perfect CSI, coherent
detection).  For one-dimensional constellations the fading gain is the
Rayleigh magnitude with E[h^2] = 1; for two-dimensional constellations it
is a rotation-plus-magnitude gain (Rayleigh magnitude, uniform phase)
applied as a 2-D rotation-scaling.

Noise draws always come from ``standard_normal`` scaled afterwards, so a
fixed RNG stream yields the same realization regardless of sigma or of a
uniform scaling of the point set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constellations import LabeledConstellation, NoiseScale

_SQRT_HALF = np.sqrt(0.5)


@dataclass(frozen=True)
class ChannelRealization:
    """Received samples plus the side information the decoder is allowed.

    ``gains`` is None for AWGN; for fading it holds the receiver-known
    per-symbol gains: shape (n,) magnitudes when the constellation is
    one-dimensional, shape (n, 2) rotation-scaling pairs (re, im) when it
    is two-dimensional.
    """

    y: np.ndarray
    sigma: float
    gains: np.ndarray | None = None


def _sigma_value(sigma) -> float:
    if isinstance(sigma, NoiseScale):
        sigma = sigma.sigma
    sigma = float(sigma)
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return sigma


def transmit_awgn(
    c: LabeledConstellation, symbols, sigma, rng: np.random.Generator
) -> ChannelRealization:
    """Map symbols to signals and add white Gaussian noise (std sigma per
    dimension)."""
    sigma = _sigma_value(sigma)
    symbols = np.asarray(symbols, dtype=np.int64)
    s = c.mapped[symbols]
    z = rng.standard_normal(s.shape)
    return ChannelRealization(y=s + sigma * z, sigma=sigma)


def transmit_faded(
    c: LabeledConstellation, symbols, sigma, gains, rng: np.random.Generator
) -> ChannelRealization:
    """Transmit through given per-symbol gains, then add Gaussian noise.

    Useful for degenerate-gain checks (gains of 1 reproduce AWGN exactly at
    the same noise stream); :func:`transmit_rayleigh` draws the gains.
    """
    sigma = _sigma_value(sigma)
    symbols = np.asarray(symbols, dtype=np.int64)
    s = c.mapped[symbols]
    gains = np.asarray(gains, dtype=float)
    if c.dim == 1:
        if gains.shape != (len(symbols),):
            raise ValueError("scalar gains must have one entry per symbol")
        faded = s * gains[:, None]
    else:
        if gains.shape != (len(symbols), 2):
            raise ValueError("2-D gains must be (n, 2) rotation-scaling pairs")
        a, b = gains[:, 0], gains[:, 1]
        faded = np.column_stack(
            [a * s[:, 0] - b * s[:, 1], b * s[:, 0] + a * s[:, 1]]
        )
    z = rng.standard_normal(s.shape)
    return ChannelRealization(y=faded + sigma * z, sigma=sigma, gains=gains)


def draw_rayleigh_gains(dim: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Per-symbol i.i.d. Rayleigh gains with E[|h|^2] = 1.

    Two standard normals per symbol; one-dimensional constellations get the
    magnitude, two-dimensional ones the (re, im) rotation-scaling pair.
    """
    g = rng.standard_normal((n, 2)) * _SQRT_HALF
    if dim == 1:
        return np.hypot(g[:, 0], g[:, 1])
    return g


def transmit_rayleigh(
    c: LabeledConstellation, symbols, sigma, rng: np.random.Generator
) -> ChannelRealization:
    """Rayleigh flat fading with E[|h|^2] = 1 and receiver-known gains.

    Gains are drawn first (two standard normals per symbol), noise second,
    so gain and noise streams are reproducible for a fixed RNG.
    """
    symbols = np.asarray(symbols, dtype=np.int64)
    gains = draw_rayleigh_gains(c.dim, len(symbols), rng)
    return transmit_faded(c, symbols, sigma, gains, rng)


def channel_evidence(
    c: LabeledConstellation, realization: ChannelRealization, dither=None
) -> np.ndarray:
    """Per-symbol a-priori messages from a channel realization.

    Returns an (n, q) array with ``out[j, v]`` proportional to
    ``exp(-||y_j - h_j * phi(v (+) w_j)||^2 / (2 sigma^2))``, normalized per
    row; ``h_j = 1`` when gains are absent and ``w_j = 0`` when no dither is
    given.  Computed in the log domain with max subtraction.
    """
    y = np.asarray(realization.y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    n = y.shape[0]
    if y.shape[1] != c.dim:
        raise ValueError(f"received samples have dim {y.shape[1]}, expected {c.dim}")
    sigma = _sigma_value(realization.sigma)
    phi = c.mapped
    gains = realization.gains

    if gains is None:
        # ||y - s||^2 = ||y||^2 - 2 y.s + ||s||^2, vectorized over (n, q)
        d2 = (
            (y ** 2).sum(axis=1, keepdims=True)
            - 2.0 * (y @ phi.T)
            + (phi ** 2).sum(axis=1)[None, :]
        )
    elif c.dim == 1:
        h = np.asarray(gains, dtype=float).reshape(n)
        cand = h[:, None] * phi[:, 0][None, :]
        d2 = (y[:, 0][:, None] - cand) ** 2
    else:
        g = np.asarray(gains, dtype=float).reshape(n, 2)
        yc = y[:, 0] + 1j * y[:, 1]
        pc = phi[:, 0] + 1j * phi[:, 1]
        gc = g[:, 0] + 1j * g[:, 1]
        diff = yc[:, None] - gc[:, None] * pc[None, :]
        d2 = diff.real ** 2 + diff.imag ** 2

    loglik = -d2 / (2.0 * sigma * sigma)
    if dither is not None:
        w = np.asarray(dither, dtype=np.int64)
        if w.shape != (n,):
            raise ValueError("dither must have one symbol per received sample")
        idx = (np.arange(c.q)[None, :] + w[:, None]) % c.q
        loglik = np.take_along_axis(loglik, idx, axis=1)
    loglik -= loglik.max(axis=1, keepdims=True)
    out = np.exp(loglik)
    out /= out.sum(axis=1, keepdims=True)
    return out
