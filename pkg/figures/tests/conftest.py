import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from figdata import format_value, write_point_csv  # noqa: E402


@pytest.fixture
def flat_zero_csv(tmp_path):
    """A decoupled (lam = 0) record: entropy and MEL identically zero."""
    t = np.arange(0.0, 10.0 + 1e-9, 0.1)
    return write_point_csv(tmp_path / "flat.csv", t, {"var_Sx": np.full(t.size, 4.0)})


@pytest.fixture
def wavy_csv(tmp_path):
    t = np.arange(0.0, 10.0 + 1e-9, 0.1)
    entropy = 0.5 * np.sin(0.4 * t) ** 2
    return write_point_csv(
        tmp_path / "wavy.csv",
        t,
        {
            "S_vN_A": entropy,
            "MEL_Sz": 4.0 * np.expm1(entropy),
            "MEL_Sx": 2.0 * np.expm1(entropy),
            "MI_half": 1.0 + 0.3 * np.cos(t),
            "var_Sz": 3.0 + np.sin(t),
            "f_Sz": 2.0 + 0.5 * np.sin(t + 0.3),
        },
    )


@pytest.fixture
def finite_size_csv(tmp_path):
    rows = [
        (4, 1.19, 1.35, 3.1, 3.0),
        (6, 1.40, 1.92, 3.4, 3.2),
        (8, 1.58, 2.49, 3.6, 3.5),
        (10, 1.72, 3.01, 3.7, 3.6),
    ]
    slope, intercept, r2 = 0.590, 0.369, 0.998
    mi_slope, mi_intercept, mi_r2 = 0.278, 0.24, 0.9995
    path = tmp_path / "finite_size.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            "L,S_vN_A,MI_half,alpha_x,alpha_z,"
            "s_logL_slope,s_logL_intercept,s_logL_r2,mi_L_slope,mi_L_intercept,mi_L_r2\n"
        )
        for L, s, mi, ax, az in rows:
            cells = [str(L)] + [
                format_value(v)
                for v in (s, mi, ax, az, slope, intercept, r2, mi_slope, mi_intercept, mi_r2)
            ]
            fh.write(",".join(cells) + "\n")
    return path


@pytest.fixture
def aggregate_csv(tmp_path):
    path = tmp_path / "sweep_summary.csv"
    header = (
        "L,q,J,h,lambda2_over_omega,S_vN_A,MI_half,var_Sx,var_Sz,F_Sx,F_Sz,"
        "f_Sx,f_Sz,MEL_Sx,MEL_Sz,n_boson,mag_x,mag_z,zz_nn,energy,norm_err,"
        "alpha_x,r2_x,alpha_z,r2_z\n"
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header)
        for knob in (0.0, 0.63):
            for h in (0.5, 1.0, 2.0):
                mi = 2.5 - knob - 0.3 * abs(h - 1.0)
                cells = ["8", "40", "-1", format_value(h), format_value(knob)]
                cells += [format_value(v) for v in (1.0, mi)] + ["0"] * 14
                cells += [format_value(v) for v in (3.9, 0.95, 4.1, 0.93)]
                fh.write(",".join(cells) + "\n")
    return path
