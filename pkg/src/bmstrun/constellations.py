"""Signal sets and labelings over the modulo-q symbol group.

A constellation couples q points in R^l (l = 1 or 2) with a bijective
labeling of the symbol set {0, ..., q-1}: the signal for symbol u is
``points[label[u]]``.  Point scale is arbitrary because the SNR definition
used by :func:`sigma_from_snr` normalizes by the average symbol energy;
scaling every point by k > 0 leaves every downstream bound and error-rate
estimate unchanged.

Two-dimensional points are stored as real pairs rather than complex
numbers so that l = 1 and l = 2 share one code path.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np


class ConstellationError(ValueError):
    """Malformed constellation data (points, labeling, or file contents)."""


#: Names accepted by :func:`builtin` (case-insensitive).
BUILTIN_NAMES = ("BPSK", "3-PAM", "4-PAM", "8-PSK", "16-QAM", "16-PAM-uniform")


@dataclass(frozen=True)
class LabeledConstellation:
    """q signal points in R^l plus a bijective symbol labeling.

    Attributes
    ----------
    name : str
        Identifier used in reports and cache keys.
    points : ndarray, shape (q, l)
        Signal points, arbitrary units, all distinct.
    label : ndarray, shape (q,)
        Permutation of 0..q-1; symbol u maps to ``points[label[u]]``.
    """

    name: str
    points: np.ndarray
    label: np.ndarray

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        label = np.asarray(self.label, dtype=np.int64)
        q, dim = points.shape
        if q < 2:
            raise ConstellationError(f"need at least 2 points, got {q}")
        if dim not in (1, 2):
            raise ConstellationError(f"signal dimension must be 1 or 2, got {dim}")
        if label.shape != (q,):
            raise ConstellationError(
                f"label must have length {q}, got shape {label.shape}"
            )
        if not np.array_equal(np.sort(label), np.arange(q)):
            raise ConstellationError("label is not a permutation of 0..q-1")
        # all points distinct: check the minimum pairwise distance
        diff = points[:, None, :] - points[None, :, :]
        d2 = (diff ** 2).sum(axis=-1)
        np.fill_diagonal(d2, np.inf)
        if not d2.min() > 0.0:
            raise ConstellationError("constellation points are not all distinct")
        points.setflags(write=False)
        label.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "label", label)

    @property
    def q(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @cached_property
    def mapped(self) -> np.ndarray:
        """(q, l) table of signals indexed by symbol: ``mapped[u] = points[label[u]]``."""
        out = self.points[self.label]
        out.setflags(write=False)
        return out

    @cached_property
    def energy(self) -> float:
        """Total squared Euclidean norm over the point set."""
        return float((self.points ** 2).sum())

    @cached_property
    def fingerprint(self) -> str:
        """Stable hash of (points, label); used as an analysis cache key."""
        h = hashlib.sha256()
        h.update(self.points.tobytes())
        h.update(self.label.tobytes())
        return h.hexdigest()[:16]

    def with_labeling(self, label, name: str | None = None) -> "LabeledConstellation":
        """Same point set under a different labeling permutation."""
        return LabeledConstellation(
            name=name or f"{self.name}*", points=self.points, label=label
        )


@dataclass(frozen=True)
class NoiseScale:
    """SNR in dB together with the per-dimension noise standard deviation.

    Always derived from a constellation and an SNR via :func:`sigma_from_snr`;
    the two fields are consistent by construction.
    """

    snr_db: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0.0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def sigma_from_snr(c: LabeledConstellation, snr_db: float) -> NoiseScale:
    """Per-dimension noise std for a target SNR.

    SNR is the average symbol energy divided by the total noise variance
    per symbol: ``sum_s ||s||^2 / (l * q * sigma^2)``.  Uniform scaling of
    the point set scales sigma by the same factor.
    """
    if not math.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db}")
    snr_linear = 10.0 ** (snr_db / 10.0)
    sigma = math.sqrt(c.energy / (c.dim * c.q * snr_linear))
    return NoiseScale(snr_db=float(snr_db), sigma=sigma)


def _pam_points(m: int) -> np.ndarray:
    return (2.0 * np.arange(m) - (m - 1)).reshape(m, 1)


def builtin(name: str) -> LabeledConstellation:
    """Named built-in constellation with its natural labeling.

    Natural labelings: BPSK maps 0 to +1 and 1 to -1; M-PAM maps symbols to
    amplitudes in ascending order (3-PAM uses {-1, 0, +1}); 8-PSK maps u to
    (cos 2*pi*u/8, sin 2*pi*u/8); 16-QAM enumerates the 4x4 grid
    {-3,-1,1,3}^2 row-major, u -> (g[u // 4], g[u % 4]).
    """
    key = name.strip().upper()
    if key == "BPSK":
        pts = np.array([[1.0], [-1.0]])
    elif key == "3-PAM":
        pts = np.array([[-1.0], [0.0], [1.0]])
    elif key == "4-PAM":
        pts = _pam_points(4)
    elif key == "8-PSK":
        ang = 2.0 * np.pi * np.arange(8) / 8.0
        pts = np.column_stack([np.cos(ang), np.sin(ang)])
    elif key == "16-QAM":
        g = np.array([-3.0, -1.0, 1.0, 3.0])
        u = np.arange(16)
        pts = np.column_stack([g[u // 4], g[u % 4]])
    elif key in ("16-PAM", "16-PAM-UNIFORM"):
        key = "16-PAM-uniform"
        pts = _pam_points(16)
    else:
        raise ConstellationError(
            f"unknown constellation {name!r}; built-ins: {', '.join(BUILTIN_NAMES)}"
        )
    q = pts.shape[0]
    canonical = key if key == "16-PAM-uniform" else key
    return LabeledConstellation(name=canonical, points=pts, label=np.arange(q))


def _tokenized_lines(text: str) -> list[list[str]]:
    lines = []
    for raw in text.splitlines():
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append(body.split())
    return lines


def load_constellation(path) -> LabeledConstellation:
    """Read a constellation from a text file.

    Format: first line ``q l``; next q lines hold l coordinates each; the
    final line holds the q labels.  ``#`` starts a comment.
    """
    path = Path(path)
    lines = _tokenized_lines(path.read_text())
    if not lines:
        raise ConstellationError(f"{path}: empty constellation file")
    try:
        q, dim = (int(tok) for tok in lines[0])
    except (TypeError, ValueError):
        raise ConstellationError(f"{path}: header must be 'q l'") from None
    if len(lines) != q + 2:
        raise ConstellationError(
            f"{path}: expected {q} point lines plus one label line, "
            f"got {len(lines) - 1} data lines"
        )
    try:
        points = np.array([[float(tok) for tok in row] for row in lines[1 : q + 1]])
        label = np.array([int(tok) for tok in lines[q + 1]])
    except ValueError as exc:
        raise ConstellationError(f"{path}: {exc}") from None
    if points.shape != (q, dim):
        raise ConstellationError(
            f"{path}: point rows must each hold {dim} coordinates"
        )
    if label.shape != (q,):
        raise ConstellationError(f"{path}: label line must hold {q} entries")
    try:
        return LabeledConstellation(name=path.stem, points=points, label=label)
    except ConstellationError as exc:
        raise ConstellationError(f"{path}: {exc}") from None


def load_labeling(path) -> np.ndarray:
    """Read a labeling-override permutation (whitespace-separated integers,
    ``#`` comments); validated against a constellation when applied."""
    path = Path(path)
    toks = [tok for row in _tokenized_lines(path.read_text()) for tok in row]
    if not toks:
        raise ConstellationError(f"{path}: empty labeling file")
    try:
        return np.array([int(t) for t in toks], dtype=np.int64)
    except ValueError as exc:
        raise ConstellationError(f"{path}: {exc}") from None
