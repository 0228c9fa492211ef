import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

import render
from render import KINDS, SchemaError, build_figure, load_csv, load_reference

CSV_HEADER = (
    "t,w1,w2,w3,th1,th2,th3,thd1,thd2,thd3,x,y,z,"
    "R11,R12,R13,R21,R22,R23,R31,R32,R33,g1,g2,g3,u1,u2,u3,H,E_R,pi1,pi2,pi3,rho"
)

PRESET_DIR = Path(__file__).resolve().parents[2] / "presets"
PRESETS = [
    "open_loop",
    "orientation_stab",
    "orientation_track",
    "reduced_attitude",
    "circle",
    "line",
    "position_stab",
]


def synthetic_csv(path: Path, n: int = 50) -> None:
    t = np.linspace(0.0, 1.0, n)
    rows = []
    for k, tk in enumerate(t):
        R = np.eye(3).reshape(9)
        row = (
            [tk, np.sin(tk), np.cos(tk), 0.1, 0.2 * tk, -0.1 * tk, 0.0, 1.0, -1.0, 0.5]
            + [0.3 * tk, 0.1 * np.sin(tk), 0.0]
            + list(R)
            + [0.0, 0.0, 1.0, 0.01, -0.02, 0.005, np.exp(-tk), 2.0 * np.exp(-tk)]
            + [0.1, 0.0, 0.0, 1e-9]
        )
        rows.append(",".join(repr(float(v)) for v in row))
    path.write_text(CSV_HEADER + "\n" + "\n".join(rows) + "\n")


@pytest.fixture()
def sample_csv(tmp_path):
    p = tmp_path / "sample.csv"
    synthetic_csv(p)
    return p


class TestRenderKinds:
    def test_all_kinds_render(self, sample_csv, tmp_path):
        for kind in KINDS:
            written = render.render(sample_csv, kind, tmp_path / f"fig_{kind}")
            assert [p.suffix for p in written] == [".png", ".svg"]
            for p in written:
                assert p.exists() and p.stat().st_size > 0

    def test_input_untouched(self, sample_csv, tmp_path):
        before = sample_csv.read_bytes()
        render.render(sample_csv, "omega", tmp_path / "o")
        assert sample_csv.read_bytes() == before

    def test_er_final_value_matches_csv(self, sample_csv):
        cols = load_csv(sample_csv)
        fig = build_figure(cols, "er")
        line = fig.axes[0].lines[0]
        assert line.get_ydata()[-1] == pytest.approx(cols["E_R"][-1], rel=0, abs=0)

    def test_missing_column_named(self, tmp_path):
        p = tmp_path / "broken.csv"
        p.write_text("t,w1,w2\n0.0,1.0,2.0\n")
        with pytest.raises(SchemaError, match="'w3'"):
            render.render(p, "omega", tmp_path / "x")

    def test_unknown_kind_rejected(self, sample_csv, tmp_path):
        with pytest.raises(ValueError, match="unknown figure kind"):
            render.render(sample_csv, "spectrogram", tmp_path / "x")

    def test_cli_exit_codes(self, sample_csv, tmp_path, capsys):
        assert render.main([str(sample_csv), "gamma", str(tmp_path / "g")]) == 0
        assert render.main([str(tmp_path / "missing.csv"), "gamma", str(tmp_path / "g")]) == 1


class TestReferenceOverlay:
    def test_summary_parsing_circle(self, tmp_path):
        csv = tmp_path / "circle.csv"
        synthetic_csv(csv)
        (tmp_path / "circle_summary.txt").write_text(
            "scenario: circle\nreference: circle radius=0.176 rate=1.0 center=0.0,0.0\n"
        )
        ref = load_reference(csv)
        assert ref == {
            "kind": "circle",
            "radius": 0.176,
            "rate": 1.0,
            "center": (0.0, 0.0),
        }

    def test_xy_overlay_present(self, tmp_path):
        csv = tmp_path / "circle.csv"
        synthetic_csv(csv)
        (tmp_path / "circle_summary.txt").write_text(
            "reference: circle radius=0.176 rate=1.0 center=0.0,0.0\n"
        )
        cols = load_csv(csv)
        fig = build_figure(cols, "xy", load_reference(csv))
        labels = [ln.get_label() for ln in fig.axes[0].lines]
        assert "reference" in labels

    def test_no_summary_no_overlay(self, sample_csv):
        cols = load_csv(sample_csv)
        fig = build_figure(cols, "xy", load_reference(sample_csv))
        labels = [ln.get_label() for ln in fig.axes[0].lines]
        assert labels == ["trajectory"]


@pytest.fixture(scope="module")
def preset_csvs(tmp_path_factory):
    out = tmp_path_factory.mktemp("preset_csvs")
    cmd = ["rollctl", "simulate", "--out", str(out), "--duration", "2.0", "--config"]
    cmd += [str(PRESET_DIR / f"{name}.cfg") for name in PRESETS]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return out


@pytest.mark.skipif(shutil.which("rollctl") is None, reason="simulator CLI not installed")
class TestAgainstSimulatorOutput:
    """Criterion: every figure kind renders from every preset CSV, and the
    attitude-error figure plots exactly the CSV values (duration shortened to
    keep the end-to-end run quick; the schema is duration-independent)."""

    def test_all_presets_all_kinds(self, preset_csvs, tmp_path):
        for name in PRESETS:
            for kind in KINDS:
                written = render.render(
                    preset_csvs / f"{name}.csv", kind, tmp_path / f"{name}_{kind}"
                )
                assert all(p.exists() for p in written)

    def test_er_figure_matches_simulated_csv(self, preset_csvs):
        cols = load_csv(preset_csvs / "orientation_stab.csv")
        fig = build_figure(cols, "er")
        assert fig.axes[0].lines[0].get_ydata()[-1] == cols["E_R"][-1]

    def test_xy_overlay_from_real_summary(self, preset_csvs):
        ref = load_reference(preset_csvs / "circle.csv")
        assert ref is not None and ref["kind"] == "circle"
        assert ref["radius"] == pytest.approx(0.176)
