import numpy as np
import pytest

from bmstrun.constellations import (
    BUILTIN_NAMES,
    ConstellationError,
    LabeledConstellation,
    builtin,
    load_constellation,
    load_labeling,
    sigma_from_snr,
)


def test_bpsk_points_and_labeling():
    c = builtin("BPSK")
    assert c.q == 2 and c.dim == 1
    assert c.mapped[0, 0] == 1.0 and c.mapped[1, 0] == -1.0


def test_3pam_points():
    c = builtin("3-PAM")
    assert np.array_equal(c.mapped[:, 0], [-1.0, 0.0, 1.0])


def test_4pam_natural_labeling():
    c = builtin("4-PAM")
    assert np.array_equal(c.mapped[:, 0], [-3.0, -1.0, 1.0, 3.0])


def test_unknown_name_raises():
    with pytest.raises(ConstellationError):
        builtin("32-QAM")


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_labels_are_bijections(name):
    c = builtin(name)
    assert np.array_equal(np.sort(c.label), np.arange(c.q))


def test_8psk_equal_norms():
    c = builtin("8-PSK")
    norms = (c.points ** 2).sum(axis=1)
    assert np.allclose(norms, 1.0)


def test_16qam_three_distinct_norms():
    c = builtin("16-QAM")
    norms = sorted(set(np.round((c.points ** 2).sum(axis=1), 9)))
    assert norms == [2.0, 10.0, 18.0]


def test_sigma_bpsk_0db_is_one():
    assert sigma_from_snr(builtin("BPSK"), 0.0).sigma == pytest.approx(1.0)


def test_sigma_bpsk_6db():
    # 6.0206 dB is within float dust of linear SNR 4
    assert sigma_from_snr(builtin("BPSK"), 6.0206).sigma == pytest.approx(0.5, abs=1e-6)


def test_sigma_4pam_0db():
    assert sigma_from_snr(builtin("4-PAM"), 0.0).sigma == pytest.approx(np.sqrt(5.0))


def test_sigma_scales_with_points():
    c = builtin("4-PAM")
    scaled = LabeledConstellation("scaled", 3.0 * c.points, c.label)
    for snr in (-3.0, 0.0, 7.5):
        assert sigma_from_snr(scaled, snr).sigma == pytest.approx(
            3.0 * sigma_from_snr(c, snr).sigma
        )


def test_sigma_rejects_nonfinite():
    with pytest.raises(ValueError):
        sigma_from_snr(builtin("BPSK"), float("inf"))


def test_duplicate_points_rejected():
    with pytest.raises(ConstellationError):
        LabeledConstellation("dup", np.array([[1.0], [1.0]]), np.array([0, 1]))


def test_non_bijective_label_rejected():
    with pytest.raises(ConstellationError):
        LabeledConstellation("bad", np.array([[1.0], [-1.0]]), np.array([0, 0]))


def test_file_round_trip_equals_builtin(tmp_path):
    path = tmp_path / "bpsk.txt"
    path.write_text("# antipodal pair\n2 1\n1\n-1\n0 1\n")
    c = load_constellation(path)
    ref = builtin("BPSK")
    assert np.array_equal(c.mapped, ref.mapped)


def test_file_non_bijective_label_rejected(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 1\n1\n-1\n0 0\n")
    with pytest.raises(ConstellationError):
        load_constellation(path)


def test_file_nonuniform_16pam_accepted(tmp_path):
    # any strictly increasing 16-point set parses as a q=16, 1-D constellation
    pts = np.cumsum(np.linspace(0.5, 2.0, 16))
    pts -= pts.mean()
    lines = ["16 1"] + [f"{p:.6f}" for p in pts] + [" ".join(map(str, range(16)))]
    path = tmp_path / "pam16nu.txt"
    path.write_text("\n".join(lines) + "\n")
    c = load_constellation(path)
    assert c.q == 16 and c.dim == 1


def test_file_malformed_header(tmp_path):
    path = tmp_path / "nohdr.txt"
    path.write_text("banana\n")
    with pytest.raises(ConstellationError):
        load_constellation(path)


def test_labeling_override_file(tmp_path):
    path = tmp_path / "swap.txt"
    path.write_text("# swap the BPSK labels\n1 0\n")
    perm = load_labeling(path)
    c = builtin("BPSK").with_labeling(perm)
    assert c.mapped[0, 0] == -1.0 and c.mapped[1, 0] == 1.0


def test_shipped_labeling_files_parse():
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] / "configs" / "labelings"
    files = sorted(root.glob("phi*.txt"))
    assert len(files) == 10
    for f in files:
        perm = load_labeling(f)
        assert np.array_equal(np.sort(perm), np.arange(len(perm)))
