"""Analytic performance machinery: distance-enumerator polynomials, union
bounds for repetition and time-shared codes, genie-aided lower-bound values
for the coupled transmission, and encoding-memory selection.

The central object is a sparse polynomial whose exponents are squared
Euclidean distances between dither-averaged signal pairs and whose
coefficients are average pair multiplicities.  For a symbol error e the
single-use enumerator is

    D_e(X) = (1/q) * sum_w X^(||phi(w) - phi(e (+) w)||^2),

and the N-use enumerator of the N-fold repetition is B(X) = sum_e D_e(X)^N.
The symbol-error-rate union bound evaluates sum_{d > 0} B_d * Q(d / (2 sigma)).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erfc

from .constellations import LabeledConstellation, sigma_from_snr

#: Exponents are merged on an absolute grid of this width (squared-distance
#: units); coalesces floating-point dust from irrational point coordinates.
MERGE_TOL = 1e-9
_KEY_SCALE = 1.0 / MERGE_TOL


class MemorySelectionError(RuntimeError):
    """Raised when no memory up to the search cap meets the target."""


def qfunc(x):
    """Gaussian tail probability Q(x) via the complementary error function."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


class EdefPolynomial:
    """Sparse map from squared distance to average multiplicity.

    Stores parallel sorted arrays; exponents within :data:`MERGE_TOL` of
    each other collapse onto one term (quantization to a fixed grid, so two
    values straddling a grid boundary may occupy adjacent keys 1e-9 apart,
    which is harmless downstream).
    """

    __slots__ = ("exponents", "coefficients")

    def __init__(self, exponents=(), coefficients=(), _merged=False):
        e = np.asarray(exponents, dtype=float).ravel()
        c = np.asarray(coefficients, dtype=float).ravel()
        if e.shape != c.shape:
            raise ValueError("exponents and coefficients must have equal length")
        if not _merged:
            e, c = self._merge(e, c)
        self.exponents = e
        self.coefficients = c

    @staticmethod
    def _merge(exponents, coefficients):
        if len(exponents) == 0:
            return np.empty(0), np.empty(0)
        keys = np.rint(exponents * _KEY_SCALE).astype(np.int64)
        uniq, inv = np.unique(keys, return_inverse=True)
        out = np.zeros(len(uniq))
        np.add.at(out, inv, coefficients)
        return uniq.astype(float) * MERGE_TOL, out

    @classmethod
    def one(cls) -> "EdefPolynomial":
        """Multiplicative identity X^0."""
        return cls([0.0], [1.0], _merged=True)

    def __mul__(self, other: "EdefPolynomial") -> "EdefPolynomial":
        e = (self.exponents[:, None] + other.exponents[None, :]).ravel()
        c = (self.coefficients[:, None] * other.coefficients[None, :]).ravel()
        return EdefPolynomial(e, c)

    def __add__(self, other: "EdefPolynomial") -> "EdefPolynomial":
        return EdefPolynomial(
            np.concatenate([self.exponents, other.exponents]),
            np.concatenate([self.coefficients, other.coefficients]),
        )

    def __pow__(self, n: int) -> "EdefPolynomial":
        if n < 0:
            raise ValueError("negative powers are not defined")
        result = EdefPolynomial.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def total_mass(self) -> float:
        """Value at X = 1 (sum of coefficients)."""
        return float(self.coefficients.sum())

    def coeff_at(self, delta2: float) -> float:
        """Coefficient of the term whose exponent matches within tolerance."""
        key = round(delta2 * _KEY_SCALE)
        idx = np.searchsorted(np.rint(self.exponents * _KEY_SCALE).astype(np.int64), key)
        if idx < len(self.exponents) and round(self.exponents[idx] * _KEY_SCALE) == key:
            return float(self.coefficients[idx])
        return 0.0

    def items(self):
        """Sorted (squared distance, multiplicity) pairs."""
        return list(zip(self.exponents.tolist(), self.coefficients.tolist()))

    def __len__(self) -> int:
        return len(self.exponents)

    def __repr__(self) -> str:
        terms = ", ".join(f"{e:.6g}: {c:.6g}" for e, c in self.items()[:8])
        more = "" if len(self) <= 8 else f", ... ({len(self)} terms)"
        return f"EdefPolynomial({{{terms}{more}}})"


_single_cache: dict[tuple[str, int], EdefPolynomial] = {}
_power_cache: dict[tuple[str, int], EdefPolynomial] = {}


def edef_single(c: LabeledConstellation, e: int) -> EdefPolynomial:
    """Distance enumerator D_e(X) for a single symbol error e."""
    e = int(e)
    if not 0 <= e < c.q:
        raise ValueError(f"error symbol must lie in 0..{c.q - 1}, got {e}")
    key = (c.fingerprint, e)
    poly = _single_cache.get(key)
    if poly is None:
        w = np.arange(c.q)
        diff = c.mapped[w] - c.mapped[(w + e) % c.q]
        d2 = (diff ** 2).sum(axis=-1)
        poly = EdefPolynomial(d2, np.full(c.q, 1.0 / c.q))
        _single_cache[key] = poly
    return poly


def edef_power(c: LabeledConstellation, N: int) -> EdefPolynomial:
    """N-use enumerator sum_e D_e(X)^N of the N-fold repetition."""
    N = int(N)
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    key = (c.fingerprint, N)
    poly = _power_cache.get(key)
    if poly is None:
        poly = EdefPolynomial()
        for e in range(c.q):
            poly = poly + edef_single(c, e) ** N
        _power_cache[key] = poly
    return poly


def union_bound_rep(c: LabeledConstellation, N: int, snr_db: float) -> float:
    """Union bound on the SER of the N-fold repetition at the given SNR."""
    poly = edef_power(c, N)
    sigma = sigma_from_snr(c, snr_db).sigma
    mask = poly.exponents > MERGE_TOL / 2
    delta = np.sqrt(poly.exponents[mask])
    return float((poly.coefficients[mask] * qfunc(delta / (2.0 * sigma))).sum())


def run_ser_bound(c: LabeledConstellation, N: int, alpha, snr_db: float) -> float:
    """SER bound of the time-shared code: the alpha-mixture of the N+1- and
    N-fold repetition bounds."""
    alpha = float(alpha)
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"need 0 <= alpha < 1, got {alpha}")
    long_part = union_bound_rep(c, N + 1, snr_db) if alpha > 0.0 else 0.0
    return alpha * long_part + (1.0 - alpha) * union_bound_rep(c, N, snr_db)


def genie_bound(
    c: LabeledConstellation, N: int, alpha, m: int, snr_db: float
) -> float:
    """Genie-aided SER lower-bound value for memory m.

    With all other data blocks known, the coupled system collapses to the
    basic code repeated m+1 times, so the value is the time-shared mixture
    of the (N+1)(m+1)- and N(m+1)-fold repetition bounds (union-bound
    approximation, accurate at high SNR).
    """
    m = int(m)
    if m < 0:
        raise ValueError(f"need m >= 0, got {m}")
    alpha = float(alpha)
    long_part = union_bound_rep(c, (N + 1) * (m + 1), snr_db) if alpha > 0.0 else 0.0
    return alpha * long_part + (1.0 - alpha) * union_bound_rep(c, N * (m + 1), snr_db)


def select_memory(
    c: LabeledConstellation,
    N: int,
    alpha,
    gamma_lim_db: float,
    p_target: float,
    cap: int = 64,
) -> int:
    """Smallest memory whose genie-aided bound at gamma_lim meets p_target.

    Linear scan from m = 0; raises :class:`MemorySelectionError` past the
    cap, which signals an unreachable target at that SNR.
    """
    if not 0.0 < p_target < 1.0:
        raise ValueError(f"p_target must lie in (0, 1), got {p_target}")
    for m in range(cap + 1):
        if genie_bound(c, N, alpha, m, gamma_lim_db) <= p_target:
            return m
    raise MemorySelectionError(
        f"no memory up to {cap} reaches SER {p_target:g} at {gamma_lim_db:g} dB"
    )


def binary_memory_rule(gamma_target_db: float, gamma_lim_db: float) -> int:
    """Memory from the SNR gap: ceil(10^(gap/10) - 1), clamped at zero.

    A 1e-9 snap keeps exact integer gaps (e.g. 10 dB -> 9) from rounding up
    through floating-point dust.
    """
    if not (math.isfinite(gamma_target_db) and math.isfinite(gamma_lim_db)):
        raise ValueError("SNR gap endpoints must be finite")
    val = 10.0 ** ((gamma_target_db - gamma_lim_db) / 10.0) - 1.0
    if val <= 0.0:
        return 0
    return max(0, math.ceil(val - 1e-9))


def crossing_snr_db(bound_fn, target: float, lo: float = -10.0, hi: float = 40.0,
                    tol: float = 1e-6) -> float:
    """SNR (dB) at which a monotonically decreasing bound crosses target."""
    f_lo, f_hi = bound_fn(lo), bound_fn(hi)
    if not (f_lo >= target >= f_hi):
        raise ValueError(
            f"target {target:g} not bracketed on [{lo}, {hi}] "
            f"(bound spans [{f_hi:g}, {f_lo:g}])"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bound_fn(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
