"""CSV schemas written by the simulation CLI; this package only reads them."""

from __future__ import annotations

import pandas as pd

POINT_COLUMNS = (
    "t",
    "S_vN_A",
    "MI_half",
    "var_Sx",
    "var_Sz",
    "F_Sx",
    "F_Sz",
    "f_Sx",
    "f_Sz",
    "MEL_Sx",
    "MEL_Sz",
    "n_boson",
    "mag_x",
    "mag_z",
    "zz_nn",
    "energy",
    "norm_err",
)

AGGREGATE_KEY_COLUMNS = ("L", "q", "J", "h", "lambda2_over_omega")

FINITE_SIZE_COLUMNS = (
    "L",
    "S_vN_A",
    "MI_half",
    "alpha_x",
    "alpha_z",
    "s_logL_slope",
    "s_logL_intercept",
    "s_logL_r2",
    "mi_L_slope",
    "mi_L_intercept",
    "mi_L_r2",
)


class SchemaError(ValueError):
    """Input file does not carry the columns a panel needs."""


def _require(frame: pd.DataFrame, columns, path: str) -> None:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")


def load_point_csv(path: str, columns=("t",)) -> pd.DataFrame:
    frame = pd.read_csv(path)
    _require(frame, columns, path)
    return frame


def load_aggregate_csv(path: str, metrics=()) -> pd.DataFrame:
    frame = pd.read_csv(path)
    _require(frame, AGGREGATE_KEY_COLUMNS + tuple(metrics), path)
    return frame


def load_finite_size_csv(path: str) -> pd.DataFrame:
    frame = pd.read_csv(path)
    _require(frame, FINITE_SIZE_COLUMNS, path)
    return frame
