"""Monte Carlo sweep harness: flat key-value config files, the
construction-procedure driver, frame simulation with deterministic
parallelism, and CSV emission.

Determinism contract: a (config, seed) pair yields byte-identical CSV
regardless of worker count, except for the wall_seconds column.  Every
frame draws from its own substreams seeded by (seed, snr index, frame
index, stream id) and frames are accumulated in frame order in fixed-size
rounds, so the set of simulated frames never depends on scheduling.

Error accounting: only the L data blocks enter the SER/BER denominators;
termination blocks are excluded (noted in the CSV metadata).  BER expands
each symbol index into its natural ceil(log2 q)-bit binary form.
"""

from __future__ import annotations

import hashlib
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import select_memory
from .bmst import BmstSpec, SlidingWindowDecoder, bmst_encode
from .capacity import CapacityQuery, shannon_limit
from .channels import (
    channel_evidence,
    draw_rayleigh_gains,
    transmit_awgn,
    transmit_faded,
)
from .constellations import (
    LabeledConstellation,
    builtin,
    load_constellation,
    load_labeling,
    sigma_from_snr,
)
from .runcode import (
    RunSpec,
    apply_dither,
    hard_decisions,
    run_encode,
    siso_decode,
    time_sharing_params,
)

#: Frames per accumulation round; constant so results never depend on the
#: worker count.
ROUND_FRAMES = 8

CSV_COLUMNS = (
    "snr_db",
    "frames",
    "symbols",
    "symbol_errors",
    "ser",
    "ser_stderr",
    "bit_errors",
    "ber",
    "wall_seconds",
)

_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


class ConfigError(ValueError):
    """Invalid simulation configuration."""


def bits_per_symbol(q: int) -> int:
    return (q - 1).bit_length()


def count_bit_errors(a: np.ndarray, b: np.ndarray) -> int:
    """Differing bits between the natural binary expansions of two symbol
    arrays (alphabet size at most 256)."""
    x = np.bitwise_xor(np.asarray(a, np.int64), np.asarray(b, np.int64))
    return int(_POPCOUNT[x].sum())


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class SimConfig:
    P: int
    Q: int
    snr_db: tuple[float, ...]
    constellation: str = "BPSK"
    labeling: str | None = None
    channel: str = "awgn"
    B: int = 1
    coupled: bool = False
    memory: int = 0
    L: int = 20
    delay: int | None = None
    max_iters: int = 18
    interleaver_seed: int | None = None
    dither: str = "auto"
    min_symbol_errors: int = 100
    max_frames: int = 1000
    seed: int = 1
    metrics: tuple[str, ...] = ("ser", "ber")
    output: str | None = None
    schema: int = 1

    def __post_init__(self):
        if self.schema != 1:
            raise ConfigError(f"unsupported schema version {self.schema}")
        if self.P < 1 or self.Q < self.P:
            raise ConfigError(f"need 1 <= P <= Q, got P={self.P}, Q={self.Q}")
        if self.B < 1:
            raise ConfigError("B must be at least 1")
        if len(self.snr_db) == 0:
            raise ConfigError("snr grid is empty")
        if any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ConfigError("snr grid must be strictly increasing")
        if self.min_symbol_errors < 1:
            raise ConfigError("min_symbol_errors must be at least 1")
        if self.max_frames < 1:
            raise ConfigError("max_frames must be at least 1")
        if self.channel not in ("awgn", "rayleigh"):
            raise ConfigError(f"unknown channel {self.channel!r}")
        if self.dither not in ("auto", "on", "off"):
            raise ConfigError(f"dither must be auto/on/off, got {self.dither!r}")
        if self.coupled and self.memory < 0:
            raise ConfigError("memory must be nonnegative")
        bad = set(self.metrics) - {"ser", "ber"}
        if bad:
            raise ConfigError(f"unknown metrics {sorted(bad)}")


def parse_snr_spec(text: str) -> tuple[float, ...]:
    """Grid from 'start:stop:step' (inclusive stop) or a comma list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"snr range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError("snr step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise ConfigError(f"empty snr range {text!r}")
        return tuple(start + k * step for k in range(count))
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"bad snr list {text!r}") from None


_BOOL_KEYS = {"coupled"}
_INT_KEYS = {
    "schema", "p", "q", "b", "memory", "l", "delay", "max_iters",
    "interleaver_seed", "min_symbol_errors", "max_frames", "seed",
}
_FIELD_NAMES = {
    "p": "P", "q": "Q", "b": "B", "l": "L",
}


def parse_config(text: str) -> SimConfig:
    """Parse the flat key-value config format ('#' comments, 'key = value')."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (part.strip() for part in body.split("=", 1))
        key = key.lower().replace("-", "_")
        if key == "snr_db":
            values["snr_db"] = parse_snr_spec(val)
        elif key == "metrics":
            values["metrics"] = tuple(
                m.strip().lower() for m in val.split(",") if m.strip()
            )
        elif key in _BOOL_KEYS:
            if val.lower() not in ("true", "false", "yes", "no", "1", "0"):
                raise ConfigError(f"line {lineno}: bad boolean {val!r}")
            values[key] = val.lower() in ("true", "yes", "1")
        elif key in _INT_KEYS:
            try:
                values[_FIELD_NAMES.get(key, key)] = int(val)
            except ValueError:
                raise ConfigError(f"line {lineno}: bad integer {val!r}") from None
        elif key in ("constellation", "labeling", "channel", "dither", "output"):
            values[key] = val
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    missing = {"P", "Q", "snr_db"} - set(values)
    if missing:
        raise ConfigError(f"missing required keys: {sorted(missing)}")
    try:
        return SimConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> SimConfig:
    return parse_config(Path(path).read_text())


def resolve_constellation(config: SimConfig) -> LabeledConstellation:
    name = config.constellation
    if name.lower().startswith("file:"):
        c = load_constellation(name[5:])
    elif Path(name).suffix and Path(name).exists():
        c = load_constellation(name)
    else:
        c = builtin(name)
    if config.labeling:
        c = c.with_labeling(load_labeling(config.labeling))
    return c


def build_code(config: SimConfig):
    """RunSpec for uncoupled runs, BmstSpec for coupled ones."""
    basic = RunSpec(P=config.P, Q=config.Q, B=config.B)
    if not config.coupled:
        return basic
    seed = (
        config.seed if config.interleaver_seed is None else config.interleaver_seed
    )
    return BmstSpec(
        basic=basic,
        m=config.memory,
        interleaver_seed=seed,
        L=config.L,
        d=config.delay,
        max_iters=config.max_iters,
    )


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SnrRow:
    snr_db: float
    frames: int
    symbols: int
    symbol_errors: int
    ser: float
    ser_stderr: float
    bit_errors: int
    ber: float
    wall_seconds: float


@dataclass
class SimResult:
    rows: list[SnrRow]
    metadata: dict[str, str] = field(default_factory=dict)


def _config_hash(config: SimConfig) -> str:
    canon = repr(sorted(vars(config).items())).encode()
    return hashlib.sha256(canon).hexdigest()[:16]


# ---------------------------------------------------------------------------
# frame simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _FramePayload:
    constellation: LabeledConstellation
    code: object  # RunSpec | BmstSpec
    channel: str
    dither: bool


def _resolve_dither(config: SimConfig) -> bool:
    if config.dither == "auto":
        return not config.coupled
    return config.dither == "on"


def _run_frame(payload: _FramePayload, sigma: float, key: tuple[int, int, int]):
    """Simulate one frame; returns (symbol errors, symbols, bit errors, bits).

    Substreams: (seed, snr, frame, 0) data, (..., 1) noise, (..., 2) fading,
    (..., 3) dither.
    """
    c = payload.constellation
    q = c.q
    data_rng = np.random.default_rng([*key, 0])
    noise_rng = np.random.default_rng([*key, 1])
    bps = bits_per_symbol(q)

    if isinstance(payload.code, BmstSpec):
        spec = payload.code
        u = data_rng.integers(0, q, size=(spec.L, spec.info_block_len))
        symbols = bmst_encode(spec, q, u).reshape(-1)
        if payload.channel == "rayleigh":
            fading_rng = np.random.default_rng([*key, 2])
            gains = draw_rayleigh_gains(c.dim, len(symbols), fading_rng)
            real = transmit_faded(c, symbols, sigma, gains, noise_rng)
        else:
            real = transmit_awgn(c, symbols, sigma, noise_rng)
        T, n = spec.total_blocks, spec.block_len
        y_blocks = real.y.reshape(T, n, c.dim)
        gains = None
        if real.gains is not None:
            gains = real.gains.reshape((T, n) + real.gains.shape[1:])
        decoder = SlidingWindowDecoder(spec, c)
        decided = decoder.decode(y_blocks, sigma, gains_blocks=gains)
        sym_err = int((decided != u).sum())
        n_sym = u.size
        bit_err = count_bit_errors(decided, u)
    else:
        spec = payload.code
        u = data_rng.integers(0, q, size=spec.info_len)
        v = run_encode(spec, u)
        w = None
        if payload.dither:
            dither_rng = np.random.default_rng([*key, 3])
            w = dither_rng.integers(0, q, size=spec.code_len)
            tx = apply_dither(v, w, q)
        else:
            tx = v
        if payload.channel == "rayleigh":
            fading_rng = np.random.default_rng([*key, 2])
            gains = draw_rayleigh_gains(c.dim, len(tx), fading_rng)
            real = transmit_faded(c, tx, sigma, gains, noise_rng)
        else:
            real = transmit_awgn(c, tx, sigma, noise_rng)
        msgs = channel_evidence(c, real, dither=w)
        app, _ = siso_decode(spec, msgs)
        decided = hard_decisions(app)
        sym_err = int((decided != u).sum())
        n_sym = u.size
        bit_err = count_bit_errors(decided, u)
    return sym_err, n_sym, bit_err, n_sym * bps


def _run_frame_star(args):
    return _run_frame(*args)


def run_sweep(config: SimConfig, workers: int | None = None) -> SimResult:
    """Execute the sweep: per SNR point, simulate frames until the stop rule
    (min_symbol_errors or max_frames) is met."""
    if workers is None:
        workers = int(os.environ.get("BMSTRUN_WORKERS", "1"))
    c = resolve_constellation(config)
    code = build_code(config)
    payload = _FramePayload(
        constellation=c,
        code=code,
        channel=config.channel,
        dither=_resolve_dither(config),
    )
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    rows = []
    try:
        for si, snr in enumerate(config.snr_db):
            sigma = sigma_from_snr(c, snr).sigma
            t0 = time.monotonic()
            frames = symbols = sym_err = bit_err = bits = 0
            while True:
                n_round = min(ROUND_FRAMES, config.max_frames - frames)
                tasks = [
                    (payload, sigma, (config.seed, si, frames + k))
                    for k in range(n_round)
                ]
                if pool is None:
                    results = map(_run_frame_star, tasks)
                else:
                    results = pool.map(_run_frame_star, tasks)
                for se, ns, be, nb in results:
                    sym_err += se
                    symbols += ns
                    bit_err += be
                    bits += nb
                frames += n_round
                if sym_err >= config.min_symbol_errors or frames >= config.max_frames:
                    break
            ser = sym_err / symbols
            rows.append(
                SnrRow(
                    snr_db=snr,
                    frames=frames,
                    symbols=symbols,
                    symbol_errors=sym_err,
                    ser=ser,
                    ser_stderr=math.sqrt(ser * (1.0 - ser) / symbols),
                    bit_errors=bit_err,
                    ber=bit_err / bits,
                    wall_seconds=time.monotonic() - t0,
                )
            )
    finally:
        if pool is not None:
            pool.shutdown()
    meta = {
        "schema": "1",
        "config_sha256": _config_hash(config),
        "seed": str(config.seed),
        "constellation": c.name,
        "channel": config.channel,
        "code": _describe_code(code),
        "version": __version__,
        "note": "termination blocks excluded from error denominators",
    }
    return SimResult(rows=rows, metadata=meta)


def _describe_code(code) -> str:
    if isinstance(code, BmstSpec):
        b = code.basic
        return (
            f"coupled rate {b.P}/{b.Q} B={b.B} m={code.m} L={code.L} "
            f"d={code.delay} iters={code.max_iters}"
        )
    return f"uncoupled rate {code.P}/{code.Q} B={code.B}"


# ---------------------------------------------------------------------------
# construction driver
# ---------------------------------------------------------------------------


def construct_code(
    constellation,
    P: int,
    Q: int,
    B: int | None = None,
    p_target: float = 1e-5,
    channel: str = "awgn",
    gamma_lim_db: float | None = None,
    L: int | None = None,
    seed: int = 1,
    paper_scale: bool = False,
    tol_db: float = 0.05,
) -> tuple[BmstSpec, dict]:
    """Run the construction procedure for a target rate and error level.

    Steps: derive (N, alpha) from the rate, find the Shannon limit for the
    constellation at that rate (or accept a pinned value), pick the smallest
    memory whose genie-aided bound at the limit meets p_target, and draw the
    interleavers.  Defaults are desk scale (L=20, B sized so Q*B is about
    1000); ``paper_scale`` switches to L=1000 and B=1250.
    """
    c = constellation if isinstance(constellation, LabeledConstellation) else builtin(
        constellation
    )
    N, alpha = time_sharing_params(P, Q)
    if B is None:
        B = 1250 if paper_scale else max(1, math.ceil(1000 / Q))
    if L is None:
        L = 1000 if paper_scale else 20
    if gamma_lim_db is None:
        gamma_lim_db = shannon_limit(
            CapacityQuery(c, Fraction(P, Q), channel), tol_db=tol_db
        )
    m = select_memory(c, N, alpha, gamma_lim_db, p_target)
    basic = RunSpec(P=P, Q=Q, B=B)
    spec = BmstSpec(basic=basic, m=m, interleaver_seed=seed, L=L)
    spec.interleavers  # draw now so construction is complete
    report = {
        "constellation": c.name,
        "rate": f"{P}/{Q}",
        "interval": f"(1/{N + 1}, 1/{N}]",
        "N": N,
        "alpha": str(alpha),
        "B": B,
        "p_target": p_target,
        "gamma_lim_db": gamma_lim_db,
        "m": m,
        "L": L,
        "delay": spec.delay,
        "block_symbols": Q * B,
        "effective_rate": str(Fraction(L * P, (L + m) * Q)),
        "qb_warning": Q * B < 1000,
    }
    return spec, report


# ---------------------------------------------------------------------------
# CSV emission / parsing
# ---------------------------------------------------------------------------


def emit_csv(result: SimResult, path) -> None:
    """Write the result with a '#'-prefixed metadata block, a header row,
    and one row per SNR point.  Floats use repr so parsing round-trips."""
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {k}={v}" for k, v in result.metadata.items()]
    lines.append(",".join(CSV_COLUMNS))
    for row in result.rows:
        lines.append(
            ",".join(
                repr(getattr(row, col))
                if isinstance(getattr(row, col), float)
                else str(getattr(row, col))
                for col in CSV_COLUMNS
            )
        )
    path.write_text("\n".join(lines) + "\n")


def read_result(path) -> SimResult:
    """Parse a CSV written by :func:`emit_csv`."""
    meta: dict[str, str] = {}
    rows: list[SnrRow] = []
    header = None
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, v = body.split("=", 1)
                meta[k.strip()] = v.strip()
            continue
        if header is None:
            header = tuple(line.split(","))
            if header != CSV_COLUMNS:
                raise ConfigError(
                    f"{path}: unexpected columns {header}, want {CSV_COLUMNS}"
                )
            continue
        vals = line.split(",")
        rows.append(
            SnrRow(
                snr_db=float(vals[0]),
                frames=int(vals[1]),
                symbols=int(vals[2]),
                symbol_errors=int(vals[3]),
                ser=float(vals[4]),
                ser_stderr=float(vals[5]),
                bit_errors=int(vals[6]),
                ber=float(vals[7]),
                wall_seconds=float(vals[8]),
            )
        )
    if header is None:
        raise ConfigError(f"{path}: no header row found")
    return SimResult(rows=rows, metadata=meta)
