import numpy as np
import pytest

from bmstrun.analysis import qfunc
from bmstrun.constellations import builtin
from bmstrun.sim import (
    CSV_COLUMNS,
    ConfigError,
    SimConfig,
    bits_per_symbol,
    construct_code,
    count_bit_errors,
    emit_csv,
    parse_config,
    parse_snr_spec,
    read_result,
    run_sweep,
)

BASE_CONFIG = """
# uncoded antipodal smoke config
schema = 1
constellation = BPSK
channel = awgn
P = 1
Q = 1
B = 20000
snr_db = 6.0206
min_symbol_errors = 300
max_frames = 64
seed = 42
output = out.csv
"""


class TestConfigParsing:
    def test_round_trip_keys(self):
        cfg = parse_config(BASE_CONFIG)
        assert cfg.P == 1 and cfg.Q == 1 and cfg.B == 20000
        assert cfg.snr_db == (6.0206,)
        assert cfg.output == "out.csv"

    def test_snr_range_form(self):
        assert parse_snr_spec("0:6:2") == (0.0, 2.0, 4.0, 6.0)

    def test_snr_list_form(self):
        assert parse_snr_spec("1.5, 2, 3.25") == (1.5, 2.0, 3.25)

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            parse_config("P = 1\nQ = 2\nsnr_db = 1\nflux = 9\n")

    def test_missing_required(self):
        with pytest.raises(ConfigError):
            parse_config("P = 1\nQ = 2\n")

    def test_bad_grid_order(self):
        with pytest.raises(ConfigError):
            SimConfig(P=1, Q=2, snr_db=(3.0, 1.0))

    def test_bad_channel(self):
        with pytest.raises(ConfigError):
            SimConfig(P=1, Q=2, snr_db=(1.0,), channel="carrier-pigeon")

    def test_coupled_keys(self):
        cfg = parse_config(
            "P = 1\nQ = 2\nB = 10\ncoupled = true\nmemory = 2\nL = 5\n"
            "delay = 6\nsnr_db = 2:4:1\nseed = 7\n"
        )
        assert cfg.coupled and cfg.memory == 2 and cfg.delay == 6


class TestBitCounting:
    def test_bits_per_symbol(self):
        assert [bits_per_symbol(q) for q in (2, 3, 4, 8, 16)] == [1, 2, 2, 3, 4]

    def test_count_bit_errors(self):
        a = np.array([0, 1, 2, 3])
        b = np.array([0, 2, 2, 0])
        # 1^2=3 -> 2 bits; 3^0=3 -> 2 bits
        assert count_bit_errors(a, b) == 4


class TestSweep:
    def test_uncoded_bpsk_matches_q_function(self):
        cfg = parse_config(BASE_CONFIG)
        result = run_sweep(cfg)
        row = result.rows[0]
        ref = float(qfunc(np.sqrt(10 ** (6.0206 / 10))))
        assert abs(row.ser - ref) < 3 * row.ser_stderr
        assert row.symbol_errors >= 300
        assert row.ber == row.ser  # one bit per symbol

    def test_noiseless_override_zero_errors(self):
        cfg = parse_config(
            "constellation = 4-PAM\nP = 1\nQ = 1\nB = 500\nsnr_db = 200\n"
            "min_symbol_errors = 1\nmax_frames = 1\nseed = 3\n"
        )
        row = run_sweep(cfg).rows[0]
        assert row.symbol_errors == 0 and row.frames == 1

    def test_worker_count_invariance(self):
        cfg = parse_config(
            "constellation = BPSK\nP = 1\nQ = 2\nB = 50\ncoupled = true\n"
            "memory = 1\nL = 4\nsnr_db = 2,4\nmin_symbol_errors = 20\n"
            "max_frames = 24\nseed = 11\n"
        )
        serial = run_sweep(cfg, workers=1)
        parallel = run_sweep(cfg, workers=2)
        for a, b in zip(serial.rows, parallel.rows):
            assert (a.symbol_errors, a.symbols, a.bit_errors, a.frames) == (
                b.symbol_errors,
                b.symbols,
                b.bit_errors,
                b.frames,
            )

    def test_dither_toggle_consistent_statistics(self):
        # dither transparency holds for uncoded transmission (any q) and for
        # antipodal labelings (any N); with q > 2 and N >= 2 the dithered
        # system is a genuinely different (averaged) channel
        for extra in (
            "constellation = 4-PAM\nP = 1\nQ = 1\nB = 8000\nsnr_db = 7\n",
            "constellation = BPSK\nP = 1\nQ = 2\nB = 8000\nsnr_db = 3\n",
        ):
            base = extra + (
                "min_symbol_errors = 400\nmax_frames = 100\nseed = 5\ndither = {}\n"
            )
            on = run_sweep(parse_config(base.format("on"))).rows[0]
            off = run_sweep(parse_config(base.format("off"))).rows[0]
            assert abs(on.ser - off.ser) < 3 * (on.ser_stderr + off.ser_stderr)

    def test_scaling_invariance_same_seed(self, tmp_path):
        pts = "\n".join(str(6 * v) for v in (-3, -1, 1, 3))
        cpath = tmp_path / "scaled4pam.txt"
        cpath.write_text(f"4 1\n{pts}\n0 1 2 3\n")
        base = (
            "constellation = {}\nP = 1\nQ = 2\nB = 2000\nsnr_db = 5\n"
            "min_symbol_errors = 200\nmax_frames = 50\nseed = 9\n"
        )
        a = run_sweep(parse_config(base.format("4-PAM"))).rows[0]
        b = run_sweep(parse_config(base.format(cpath))).rows[0]
        assert a.symbol_errors == b.symbol_errors
        assert a.bit_errors == b.bit_errors

    def test_stop_rule_precision(self):
        cfg = parse_config(
            "constellation = BPSK\nP = 1\nQ = 1\nB = 5000\nsnr_db = 2\n"
            "min_symbol_errors = 100\nmax_frames = 400\nseed = 2\n"
        )
        row = run_sweep(cfg).rows[0]
        if row.symbol_errors >= 100:
            assert row.ser_stderr / row.ser <= 0.1005


class TestCsv:
    def _result(self):
        cfg = parse_config(BASE_CONFIG.replace("min_symbol_errors = 300",
                                               "min_symbol_errors = 20"))
        return run_sweep(cfg)

    def test_round_trip(self, tmp_path):
        result = self._result()
        path = tmp_path / "r.csv"
        emit_csv(result, path)
        back = read_result(path)
        assert back.rows == result.rows
        assert back.metadata == result.metadata

    def test_column_order_golden(self, tmp_path):
        result = self._result()
        path = tmp_path / "r.csv"
        emit_csv(result, path)
        lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert CSV_COLUMNS == (
            "snr_db", "frames", "symbols", "symbol_errors", "ser",
            "ser_stderr", "bit_errors", "ber", "wall_seconds",
        )

    def test_metadata_block(self, tmp_path):
        result = self._result()
        path = tmp_path / "r.csv"
        emit_csv(result, path)
        head = path.read_text().splitlines()[:5]
        assert all(l.startswith("#") for l in head)
        assert "termination blocks excluded" in result.metadata["note"]

    def test_determinism_modulo_wall_seconds(self, tmp_path):
        cfg = parse_config(BASE_CONFIG.replace("min_symbol_errors = 300",
                                               "min_symbol_errors = 20"))
        pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_csv(run_sweep(cfg, workers=1), pa)
        emit_csv(run_sweep(cfg, workers=2), pb)

        def strip_wall(path):
            out = []
            for line in path.read_text().splitlines():
                if line.startswith("#") or line.startswith("snr_db"):
                    out.append(line)
                else:
                    out.append(",".join(line.split(",")[:-1]))
            return "\n".join(out)

        assert strip_wall(pa) == strip_wall(pb)


class TestConstructCode:
    @pytest.mark.parametrize(
        "P,Q,gamma,m_ref,alpha_ref",
        [
            (1, 8, -7.2, 11, "0"),
            (3, 8, -1.6, 11, "2/3"),
            (6, 8, 3.4, 7, "1/3"),
        ],
    )
    def test_pinned_rows(self, P, Q, gamma, m_ref, alpha_ref):
        spec, report = construct_code(
            "BPSK", P, Q, B=1250, p_target=1e-5, gamma_lim_db=gamma
        )
        assert report["m"] == m_ref
        assert report["alpha"] == alpha_ref
        assert spec.m == m_ref and spec.delay == 3 * m_ref
        assert len(spec.interleavers) == m_ref

    def test_desk_scale_defaults(self):
        spec, report = construct_code("BPSK", 1, 2, p_target=0.4, gamma_lim_db=0.2)
        assert report["B"] == 500 and report["L"] == 20
        assert not report["qb_warning"]

    def test_trivial_target_memoryless(self):
        spec, report = construct_code(
            "BPSK", 4, 8, B=1250, p_target=0.5, gamma_lim_db=0.2
        )
        assert report["m"] == 0

    def test_paper_scale_flag(self):
        spec, report = construct_code(
            "BPSK", 1, 2, p_target=0.4, gamma_lim_db=0.2, paper_scale=True
        )
        assert report["B"] == 1250 and report["L"] == 1000

    def test_qb_warning(self):
        _, report = construct_code(
            "BPSK", 1, 2, B=10, p_target=0.4, gamma_lim_db=0.2
        )
        assert report["qb_warning"]
