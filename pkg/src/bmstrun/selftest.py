"""Quick oracle suite behind the ``selftest`` CLI subcommand.

Each check recomputes a core quantity through an independent route
(enumeration, brute-force marginalization, a second transform) and
compares.  Meant to finish in seconds; the full test suite is the
authoritative gate.
"""

from __future__ import annotations

import numpy as np

from .analysis import edef_power, edef_single
from .bmst import bmst_encode, BmstSpec, make_interleavers, node_add
from .channels import ChannelRealization, channel_evidence
from .constellations import builtin
from .runcode import RunSpec, normalize_rows, run_encode, siso_decode


def _check_siso_oracle(rng) -> str | None:
    for _ in range(60):
        q = int(rng.integers(2, 9))
        P = int(rng.integers(1, 5))
        Q = int(rng.integers(P, 5 * P + 1))
        spec = RunSpec(P=P, Q=Q, B=1)
        priors = normalize_rows(rng.random((spec.code_len, q)) + 1e-3)
        app, ext = siso_decode(spec, priors)
        starts, pos_group, _ = spec._layout
        sizes = np.diff(np.append(starts, spec.code_len))
        for j in range(spec.code_len):
            g = pos_group[j]
            members = [k for k in range(starts[g], starts[g] + sizes[g]) if k != j]
            # brute force over the q repetition codewords
            ref = np.array(
                [np.prod([priors[k][u] for k in members]) for u in range(q)]
            )
            ref = ref / ref.sum() if members else np.full(q, 1.0 / q)
            if np.abs(ref - ext[j]).max() > 1e-11:
                return f"siso extrinsic mismatch at q={q} P={P} Q={Q} j={j}"
    return None


def _check_edef_oracle() -> str | None:
    for name in ("BPSK", "3-PAM", "4-PAM"):
        c = builtin(name)
        for N in (1, 2, 3):
            got = dict(edef_power(c, N).items())
            ref: dict[int, float] = {}
            for e in range(c.q):
                de = edef_single(c, e)
                # N-th power by direct enumeration of w-vectors
                acc: dict[float, float] = {}
                idx = np.stack(
                    np.meshgrid(*([np.arange(c.q)] * N), indexing="ij"), -1
                ).reshape(-1, N)
                for ws in idx:
                    d2 = sum(
                        float(((c.mapped[w] - c.mapped[(w + e) % c.q]) ** 2).sum())
                        for w in ws
                    )
                    acc[round(d2, 6)] = acc.get(round(d2, 6), 0.0) + c.q ** -N
                for d2, coeff in acc.items():
                    ref[d2] = ref.get(d2, 0.0) + coeff
                del de
            if abs(sum(ref.values()) - sum(got.values())) > 1e-9:
                return f"edef mass mismatch for {name} N={N}"
            for d2, coeff in ref.items():
                near = [v for k, v in got.items() if abs(k - d2) < 1e-6]
                if abs(sum(near) - coeff) > 1e-9:
                    return f"edef coefficient mismatch for {name} N={N} at {d2}"
    return None


def _check_node_add(rng) -> str | None:
    for q in (2, 3, 5, 8, 16):
        msgs = [normalize_rows(rng.random((4, q)) + 1e-3) for _ in range(4)]
        direct = node_add(msgs, method="direct")
        fft = node_add(msgs, method="fft")
        for a, b in zip(direct, fft):
            if np.abs(a - b).max() > 1e-12:
                return f"node_add direct/fft disagreement at q={q}"
    return None


def _check_encoder_linearity(rng) -> str | None:
    q = 4
    spec = BmstSpec(basic=RunSpec(P=2, Q=5, B=3), m=2, interleaver_seed=7, L=4)
    for _ in range(10):
        u1 = rng.integers(0, q, (spec.L, spec.info_block_len))
        u2 = rng.integers(0, q, (spec.L, spec.info_block_len))
        lhs = bmst_encode(spec, q, (u1 + u2) % q)
        rhs = (bmst_encode(spec, q, u1) + bmst_encode(spec, q, u2)) % q
        if not np.array_equal(lhs, rhs):
            return "coupled encoder is not a group homomorphism"
    return None


def _check_evidence(rng) -> str | None:
    c = builtin("4-PAM")
    n = 64
    y = rng.standard_normal((n, 1)) * 2.0
    real = ChannelRealization(y=y, sigma=0.8)
    plain = channel_evidence(c, real)
    w = rng.integers(0, c.q, n)
    dithered = channel_evidence(c, real, dither=w)
    for j in range(n):
        if np.abs(dithered[j] - plain[j][(np.arange(c.q) + w[j]) % c.q]).max() > 1e-14:
            return "dither shift identity violated"
    if np.abs(plain.sum(axis=1) - 1.0).max() > 1e-12:
        return "evidence rows not normalized"
    return None


def _check_interleavers() -> str | None:
    a = make_interleavers(123, 3, 97)
    b = make_interleavers(123, 3, 97)
    for x, y in zip(a, b):
        if not np.array_equal(x, y):
            return "interleavers not reproducible"
    if any(not np.array_equal(np.sort(x), np.arange(97)) for x in a):
        return "interleaver is not a permutation"
    return None


CHECKS = (
    ("siso extrinsic vs brute-force marginalization", _check_siso_oracle, True),
    ("distance enumerator vs direct enumeration", _check_edef_oracle, False),
    ("addition node direct vs transform", _check_node_add, True),
    ("coupled encoder linearity", _check_encoder_linearity, True),
    ("channel evidence identities", _check_evidence, True),
    ("interleaver determinism", _check_interleavers, False),
)


def run(verbose: bool = True) -> int:
    rng = np.random.default_rng(2024)
    failures = 0
    for label, fn, needs_rng in CHECKS:
        msg = fn(rng) if needs_rng else fn()
        status = "PASS" if msg is None else f"FAIL ({msg})"
        if verbose:
            print(f"[{status.split()[0]:4}] {label}" + (f": {msg}" if msg else ""))
        failures += msg is not None
    return 0 if failures == 0 else 3
