"""Quench records, averaging, fits, scans, and convergence reporting."""

import numpy as np
import pytest

import spinancilla as sa
from spinancilla.dynamics import TimeGrid
from spinancilla.entanglement import MetricSample, METRIC_FIELDS
from spinancilla.experiments import (
    MELFit,
    QuenchRecord,
    SweepSpec,
    fit_mel_entropy,
    finite_size_scan,
    lambda_from_knob,
    pearson,
    q_convergence,
    run_quench,
    run_sweep,
    time_average,
)
from spinancilla.hilbert import ConfigurationError, ModelParams


def synthetic_record(times, entropy, mel_x=None, mel_z=None):
    params = ModelParams(L=4, q=2)
    samples = []
    for i, t in enumerate(times):
        fields = {name: 0.0 for name in METRIC_FIELDS}
        fields["t"] = float(t)
        fields["S_vN_A"] = float(entropy[i])
        if mel_x is not None:
            fields["MEL_Sx"] = float(mel_x[i])
        if mel_z is not None:
            fields["MEL_Sz"] = float(mel_z[i])
        samples.append(MetricSample(**fields))
    return QuenchRecord(params, samples, {"config_hash": "synthetic"})


def test_lambda_from_knob():
    assert lambda_from_knob(0.125, 0.5) == pytest.approx(0.25)
    assert lambda_from_knob(0.0, 0.5) == 0.0
    with pytest.raises(ConfigurationError):
        lambda_from_knob(-0.1, 0.5)


def test_trivial_quench_is_silent():
    # h=0, lam=0 polarized start: eigenstate up to a phase, all metrics zero
    params = ModelParams(L=4, q=1, J=-1.0, h=0.0, lam=0.0)
    record = run_quench(params, TimeGrid(0.0, 5.0, 0.5))
    for name in METRIC_FIELDS:
        if name in ("t", "energy", "mag_z", "zz_nn"):
            continue
        series = record.series(name)
        if name == "var_Sx":
            assert np.allclose(series, 4.0, atol=1e-9)
        elif name == "F_Sx":
            assert np.allclose(series, 16.0, atol=1e-8)
        elif name == "f_Sx":
            assert np.allclose(series, 4.0, atol=1e-9)
        else:
            assert np.max(np.abs(series)) <= 1e-9, name
    assert np.allclose(record.series("mag_z"), 1.0, atol=1e-12)
    assert np.allclose(record.series("zz_nn"), 1.0, atol=1e-12)
    assert np.allclose(record.series("energy"), 4.0, atol=1e-10)  # -J*L at J=-1


def test_record_is_deterministic():
    lam = lambda_from_knob(0.63, 0.5)
    params = ModelParams(L=4, q=6, J=-1.0, h=1.5, omega_c=0.5, lam=lam)
    a = run_quench(params, TimeGrid(0.0, 2.0, 0.2))
    b = run_quench(params, TimeGrid(0.0, 2.0, 0.2))
    for name in METRIC_FIELDS:
        assert np.array_equal(a.series(name), b.series(name))
    assert a.provenance["config_hash"] == b.provenance["config_hash"]


def test_time_average_constant_and_sine():
    times = np.arange(0.0, 10.0 + 1e-12, 0.01)
    const = synthetic_record(times, np.full(times.size, 0.7))
    assert time_average(const, (0.0, 10.0)).S_vN_A == pytest.approx(0.7)
    # sin^2 over整 periods averages to 1/2 within grid error
    omega = 2.0 * np.pi
    wave = synthetic_record(times, np.sin(omega * times) ** 2)
    assert time_average(wave, (0.0, 10.0)).S_vN_A == pytest.approx(0.5, abs=1e-2)
    with pytest.raises(ConfigurationError):
        time_average(const, (20.0, 30.0))


def test_fit_identity_recovers_alpha():
    times = np.linspace(0.0, 50.0, 501)
    entropy = 0.5 + 0.4 * np.sin(0.3 * times) ** 2
    entropy[0] = 0.0
    mel_x = 2.5 * np.expm1(entropy)
    record = synthetic_record(times, entropy, mel_x=mel_x)
    fit = fit_mel_entropy(record, "x", (0.0, 50.0))
    assert fit.defined
    assert fit.alpha == pytest.approx(2.5, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert pearson(record, "x", (0.0, 50.0)) == pytest.approx(1.0, abs=1e-12)


def test_fit_degenerate_regressor_flagged():
    times = np.linspace(0.0, 5.0, 51)
    record = synthetic_record(times, np.zeros(51), mel_x=np.zeros(51))
    fit = fit_mel_entropy(record, "x", (0.0, 5.0))
    assert not fit.defined
    assert np.isnan(fit.alpha)


def test_fit_rejects_bad_axis():
    times = np.linspace(0.0, 5.0, 6)
    record = synthetic_record(times, np.ones(6))
    with pytest.raises(ConfigurationError):
        fit_mel_entropy(record, "y", (0.0, 5.0))


def test_sweep_spec_validation():
    grid = TimeGrid(0.0, 10.0, 0.5)
    with pytest.raises(ConfigurationError):
        SweepSpec((), (0.0,), (4,), q=4, grid=grid, average_window=(0.0, 10.0))
    with pytest.raises(ConfigurationError):
        SweepSpec((1.0,), (0.0,), (4,), q=4, grid=grid, average_window=(0.0, 20.0))
    spec = SweepSpec((2.0, 1.0), (0.0,), (4,), q=4, grid=grid, average_window=(0.0, 10.0))
    assert list(spec.points()) == [(4, 1.0, 0.0), (4, 2.0, 0.0)]


def test_run_sweep_orders_points_and_computes_fits():
    spec = SweepSpec(
        h_values=(1.5, 0.5),
        lambda2_over_omega_values=(0.0, 0.63),
        L_values=(4,),
        q=6,
        J=-1.0,
        grid=TimeGrid(0.0, 3.0, 0.3),
        average_window=(0.0, 3.0),
    )
    results = run_sweep(spec)
    keys = [(r.L, r.h, r.lambda2_over_omega) for r in results]
    assert keys == [(4, 0.5, 0.0), (4, 0.5, 0.63), (4, 1.5, 0.0), (4, 1.5, 0.63)]
    decoupled = results[0]
    assert not decoupled.fits["x"].defined  # flat-zero entropy regressor
    coupled = results[1]
    assert coupled.averages.S_vN_A > 0
    assert coupled.fits["x"].defined


def test_run_sweep_parallel_matches_serial():
    spec = SweepSpec(
        h_values=(0.8, 1.6),
        lambda2_over_omega_values=(0.28,),
        L_values=(4,),
        q=5,
        J=-1.0,
        grid=TimeGrid(0.0, 2.0, 0.5),
        average_window=(0.0, 2.0),
    )
    serial = run_sweep(spec, workers=1)
    parallel = run_sweep(spec, workers=2)
    for a, b in zip(serial, parallel):
        for name in METRIC_FIELDS:
            assert np.array_equal(a.record.series(name), b.record.series(name))


def test_ground_state_initial_sweep():
    spec = SweepSpec(
        h_values=(0.5,),
        lambda2_over_omega_values=(0.28,),
        L_values=(4,),
        q=5,
        J=1.0,
        grid=TimeGrid(0.0, 2.0, 0.5),
        average_window=(0.0, 2.0),
        initial_state="spin_ground_state",
        pre_J=1.0,
        pre_h=0.0,
    )
    results = run_sweep(spec)
    # pre-quench (J=1, h=0) ground state is the all-up product state
    first = results[0].record.samples[0]
    assert first.mag_z == pytest.approx(1.0, abs=1e-12)
    assert first.S_vN_A == pytest.approx(0.0, abs=1e-10)


def test_finite_size_scan_decoupled_volume_law():
    spec = SweepSpec(
        h_values=(2.0,),
        lambda2_over_omega_values=(0.0,),
        L_values=(4, 6, 8),
        q=1,
        J=-1.0,
        grid=TimeGrid(0.0, 20.0, 0.2),
        average_window=(5.0, 20.0),
    )
    scan = finite_size_scan(spec)
    entropies = [row["S_vN_A"] for row in scan.rows]
    assert max(abs(s) for s in entropies) <= 1e-9
    mi_density = [row["MI_half"] / row["L"] for row in scan.rows]
    spread = (max(mi_density) - min(mi_density)) / max(mi_density)
    assert spread < 0.35  # approximate volume law at smoke scale
    assert scan.mi_L_r2 > 0.9


def test_finite_size_scan_validation():
    grid = TimeGrid(0.0, 5.0, 0.5)
    with pytest.raises(ConfigurationError):
        finite_size_scan(
            SweepSpec((1.0, 2.0), (0.0,), (4, 6, 8), q=2, grid=grid, average_window=(0, 5))
        )
    with pytest.raises(ConfigurationError):
        finite_size_scan(
            SweepSpec((1.0,), (0.0,), (4, 6), q=2, grid=grid, average_window=(0, 5))
        )


def test_q_convergence_decoupled_is_exact():
    params = ModelParams(L=4, q=4, J=-1.0, h=1.0, lam=0.0)
    report = q_convergence(params, TimeGrid(0.0, 3.0, 0.5))
    assert report.converged
    assert max(report.deviations.values()) == pytest.approx(0.0, abs=1e-12)
    assert report.q_high == 8


def test_q_convergence_flags_truncation():
    # J=0 oracle case: occupation swings up to (2g/omega)^2 = 16, far beyond
    # what q=20 can hold, so the doubling must report non-convergence
    params = ModelParams(L=4, q=20, J=0.0, h=0.5, omega_c=0.5, lam=0.5)
    report = q_convergence(params, TimeGrid(0.0, 12.6, 0.2))
    assert not report.converged
    assert report.deviations["n_boson"] > 1e-3


def test_q_convergence_requires_minimum_q():
    params = ModelParams(L=4, q=2, J=-1.0, h=1.0, lam=0.0)
    with pytest.raises(ConfigurationError):
        q_convergence(params, TimeGrid(0.0, 1.0, 0.5))
