"""Panel renderers.

Every renderer is a pure reader of CSV columns: no physics is recomputed
here beyond exponentiating the entropy column for overlays.  Output images
are PNG at a fixed DPI with pinned metadata so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schema import (
    SchemaError,
    load_aggregate_csv,
    load_finite_size_csv,
    load_point_csv,
)

PANEL_KINDS = ("mel-overlay", "realtime-metrics", "longtime-vs-h", "finite-size")
DPI = 150
_METADATA = {"Software": "quenchfigs"}

_RC = {
    "figure.dpi": DPI,
    "savefig.dpi": DPI,
    "font.size": 9,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.2,
    "svg.hashsalt": "quenchfigs",
}

REALTIME_PANELS = ("MI_half", "var_Sz", "f_Sz", "S_vN_A")
REALTIME_LABELS = {
    "MI_half": "half-chain MI",
    "var_Sz": r"$\Delta S_z^2$",
    "f_Sz": r"$f(S_z)$",
    "S_vN_A": r"$S_{vN;A}$",
}


@dataclass
class PanelSpec:
    """One figure panel: what to read, how to draw it, where to write it."""

    kind: str
    inputs: tuple[str, ...]
    out_path: str
    labels: tuple[str, ...] = ()
    offset: float = 0.0
    axis: str = "z"
    metric: str = "MI_half"
    title: str = ""

    def __post_init__(self) -> None:
        if self.kind not in PANEL_KINDS:
            raise SchemaError(f"unknown panel kind {self.kind!r}")
        if not self.inputs:
            raise SchemaError("panel needs at least one input file")
        if self.axis not in ("x", "z"):
            raise SchemaError(f"axis must be x or z, got {self.axis!r}")
        if self.labels and len(self.labels) != len(self.inputs):
            raise SchemaError("need exactly one label per input file")

    def label_for(self, index: int) -> str:
        if self.labels:
            return self.labels[index]
        stem = os.path.basename(self.inputs[index])
        return stem[:-4] if stem.endswith(".csv") else stem


def _save(fig, spec: PanelSpec) -> str:
    out_dir = os.path.dirname(os.path.abspath(spec.out_path))
    os.makedirs(out_dir, exist_ok=True)
    fig.savefig(spec.out_path, dpi=DPI, metadata=_METADATA)
    plt.close(fig)
    return spec.out_path


def _build_mel_overlay(spec: PanelSpec):
    mel_column = f"MEL_S{spec.axis}"
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for index, path in enumerate(spec.inputs):
        frame = load_point_csv(path, columns=("t", "S_vN_A", mel_column))
        shift = index * spec.offset
        target = np.expm1(frame["S_vN_A"].to_numpy()) + shift
        loss = frame[mel_column].to_numpy() + shift
        t = frame["t"].to_numpy()
        color = f"C{index % 10}"
        ax.plot(t, target, color=color, linestyle="-", label=spec.label_for(index))
        ax.plot(t, loss, color=color, linestyle=":")
    ax.set_xlabel(r"$tJ$")
    ax.set_ylabel(rf"$e^{{S_{{vN;A}}}}-1$ (solid) / MEL($S_{spec.axis}$) (dotted)")
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(loc="upper right")
    fig.tight_layout()
    return fig


def _build_realtime_metrics(spec: PanelSpec):
    fig, axes = plt.subplots(2, 2, figsize=(7.2, 5.0), sharex=True)
    for index, path in enumerate(spec.inputs):
        frame = load_point_csv(path, columns=("t",) + REALTIME_PANELS)
        t = frame["t"].to_numpy()
        for ax, name in zip(axes.flat, REALTIME_PANELS):
            ax.plot(t, frame[name].to_numpy(), color=f"C{index % 10}",
                    label=spec.label_for(index))
    for ax, name in zip(axes.flat, REALTIME_PANELS):
        ax.set_ylabel(REALTIME_LABELS[name])
    for ax in axes[1]:
        ax.set_xlabel(r"$tJ$")
    axes.flat[0].legend(loc="upper right")
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    return fig


def _build_longtime_vs_h(spec: PanelSpec):
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for path in spec.inputs:
        frame = load_aggregate_csv(path, metrics=(spec.metric,))
        for (L, knob), group in frame.groupby(["L", "lambda2_over_omega"]):
            ordered = group.sort_values("h")
            ax.plot(
                ordered["h"].to_numpy(),
                ordered[spec.metric].to_numpy(),
                marker="o",
                label=rf"$L={int(L)},\ \lambda^2/\omega_c={knob:g}$",
            )
    ax.set_xlabel(r"$h/|J|$")
    ax.set_ylabel(spec.metric)
    if spec.title:
        ax.set_title(spec.title)
    ax.legend()
    fig.tight_layout()
    return fig


def _build_finite_size(spec: PanelSpec):
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for path in spec.inputs:
        frame = load_finite_size_csv(path)
        sizes = frame["L"].to_numpy(dtype=float)
        ax.plot(sizes, frame["S_vN_A"].to_numpy(), "o", label=r"$S_{vN;A}$")
        slope = float(frame["s_logL_slope"].iloc[0])
        intercept = float(frame["s_logL_intercept"].iloc[0])
        r2 = float(frame["s_logL_r2"].iloc[0])
        smooth = np.linspace(sizes.min(), sizes.max(), 200)
        ax.plot(
            smooth,
            slope * np.log(smooth) + intercept,
            "--",
            label=rf"$ {slope:.3f}\,\ln L {intercept:+.3f}$  ($r^2={r2:.3f}$)",
        )
    ax.set_xscale("log")
    ax.set_xlabel(r"$L$")
    ax.set_ylabel(r"$S_{vN;A}$")
    if spec.title:
        ax.set_title(spec.title)
    ax.legend()
    fig.tight_layout()
    return fig


_BUILDERS = {
    "mel-overlay": _build_mel_overlay,
    "realtime-metrics": _build_realtime_metrics,
    "longtime-vs-h": _build_longtime_vs_h,
    "finite-size": _build_finite_size,
}


def build_figure(spec: PanelSpec):
    """Build (but do not save) the matplotlib figure for a panel."""
    with matplotlib.rc_context(_RC):
        return _BUILDERS[spec.kind](spec)


def render(spec: PanelSpec) -> str:
    """Render one panel to spec.out_path and return the written path."""
    with matplotlib.rc_context(_RC):
        return _save(_BUILDERS[spec.kind](spec), spec)
