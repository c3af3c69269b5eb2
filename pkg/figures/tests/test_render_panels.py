"""Panel rendering: correctness of drawn data, determinism, error reporting."""

import hashlib

import numpy as np
import pytest

from quenchfigs import PanelSpec, SchemaError, build_figure, render
from quenchfigs.schema import load_point_csv


def sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


class TestPanelSpec:
    def test_rejects_unknown_kind(self, wavy_csv, tmp_path):
        with pytest.raises(SchemaError):
            PanelSpec(kind="pie-chart", inputs=(str(wavy_csv),), out_path=str(tmp_path / "x.png"))

    def test_rejects_empty_inputs(self, tmp_path):
        with pytest.raises(SchemaError):
            PanelSpec(kind="mel-overlay", inputs=(), out_path=str(tmp_path / "x.png"))

    def test_rejects_label_mismatch(self, wavy_csv, tmp_path):
        with pytest.raises(SchemaError):
            PanelSpec(
                kind="mel-overlay",
                inputs=(str(wavy_csv),),
                out_path=str(tmp_path / "x.png"),
                labels=("a", "b"),
            )


class TestMelOverlay:
    def test_flat_zero_curves(self, flat_zero_csv, tmp_path):
        spec = PanelSpec(
            kind="mel-overlay",
            inputs=(str(flat_zero_csv),),
            out_path=str(tmp_path / "flat.png"),
            axis="z",
        )
        fig = build_figure(spec)
        lines = fig.axes[0].get_lines()
        assert len(lines) == 2  # entropy target and MEL
        for line in lines:
            assert np.max(np.abs(line.get_ydata())) <= 1e-12
        assert render(spec) == str(tmp_path / "flat.png")

    def test_offsets_separate_curves(self, wavy_csv, flat_zero_csv, tmp_path):
        spec = PanelSpec(
            kind="mel-overlay",
            inputs=(str(flat_zero_csv), str(wavy_csv)),
            out_path=str(tmp_path / "two.png"),
            offset=2.0,
            axis="z",
            labels=("decoupled", "coupled"),
        )
        fig = build_figure(spec)
        lines = fig.axes[0].get_lines()
        assert len(lines) == 4
        # second input pair sits one offset higher
        assert np.min(lines[2].get_ydata()) >= 2.0 - 1e-12
        labels = [line.get_label() for line in lines]
        assert "decoupled" in labels and "coupled" in labels

    def test_overlay_draws_exponentiated_entropy(self, wavy_csv, tmp_path):
        spec = PanelSpec(
            kind="mel-overlay",
            inputs=(str(wavy_csv),),
            out_path=str(tmp_path / "wavy.png"),
            axis="z",
        )
        fig = build_figure(spec)
        target = fig.axes[0].get_lines()[0].get_ydata()
        frame = load_point_csv(str(wavy_csv), columns=("S_vN_A",))
        assert np.allclose(target, np.expm1(frame["S_vN_A"].to_numpy()))

    def test_missing_column_named(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("t,S_vN_A\n0.0,0.0\n")
        spec = PanelSpec(
            kind="mel-overlay", inputs=(str(bad),), out_path=str(tmp_path / "x.png")
        )
        with pytest.raises(SchemaError, match="MEL_Sz"):
            build_figure(spec)


class TestRealtimeMetrics:
    def test_four_panel_layout(self, wavy_csv, tmp_path):
        spec = PanelSpec(
            kind="realtime-metrics",
            inputs=(str(wavy_csv),),
            out_path=str(tmp_path / "grid.png"),
        )
        fig = build_figure(spec)
        assert len(fig.axes) == 4
        for ax in fig.axes:
            assert len(ax.get_lines()) == 1
        render(spec)


class TestLongtimeVsH:
    def test_one_line_per_group(self, aggregate_csv, tmp_path):
        spec = PanelSpec(
            kind="longtime-vs-h",
            inputs=(str(aggregate_csv),),
            out_path=str(tmp_path / "avg.png"),
            metric="MI_half",
        )
        fig = build_figure(spec)
        lines = fig.axes[0].get_lines()
        assert len(lines) == 2  # two coupling values at one L
        for line in lines:
            assert line.get_xdata().tolist() == [0.5, 1.0, 2.0]
        render(spec)

    def test_missing_metric_column_named(self, aggregate_csv, tmp_path):
        spec = PanelSpec(
            kind="longtime-vs-h",
            inputs=(str(aggregate_csv),),
            out_path=str(tmp_path / "avg.png"),
            metric="not_a_column",
        )
        with pytest.raises(SchemaError, match="not_a_column"):
            build_figure(spec)


class TestFiniteSize:
    def test_fit_line_from_columns_only(self, finite_size_csv, tmp_path):
        spec = PanelSpec(
            kind="finite-size",
            inputs=(str(finite_size_csv),),
            out_path=str(tmp_path / "fs.png"),
        )
        fig = build_figure(spec)
        scatter, fitline = fig.axes[0].get_lines()[:2]
        assert scatter.get_xdata().tolist() == [4.0, 6.0, 8.0, 10.0]
        x = fitline.get_xdata()
        y = fitline.get_ydata()
        assert np.allclose(y, 0.590 * np.log(x) + 0.369)
        render(spec)


class TestDeterminism:
    def test_rerun_is_byte_identical(self, wavy_csv, tmp_path):
        paths = []
        for name in ("first.png", "second.png"):
            spec = PanelSpec(
                kind="mel-overlay",
                inputs=(str(wavy_csv),),
                out_path=str(tmp_path / name),
                axis="z",
            )
            paths.append(render(spec))
        assert sha256(paths[0]) == sha256(paths[1])
