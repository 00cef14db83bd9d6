import math
from dataclasses import replace

import numpy as np
import pytest

from gaitlab.cpg import CpgParams, GaitCommand, evaluate_cpg
from gaitlab.errors import InvalidInputError
from gaitlab.feedback import Activations, FeedbackGains, zero_gains
from gaitlab.plant import (
    Disturbance,
    PlantParams,
    RealGap,
    TorsoState,
    make_real_plant,
    phase_plot_series,
    run_sequence,
    standard_test_sequence,
    step_plant,
    trace_to_csv,
)


def quiet_plant(**kwargs):
    defaults = dict(noise_std=0.0, gait_coupling=0.0, seed=0)
    defaults.update(kwargs)
    return PlantParams(**defaults)


def test_upright_equilibrium_is_exact():
    p = quiet_plant()
    s = TorsoState()
    for _ in range(500):
        s = step_plant(s, (0.0, 0.0), Activations(), None, p, 0.01)
    assert s.fused_pitch == 0.0 and s.fused_roll == 0.0
    assert not s.fallen


def test_dt_precondition():
    with pytest.raises(InvalidInputError):
        step_plant(TorsoState(), (0, 0), Activations(), None, quiet_plant(), 0.05)


def test_large_impulse_fells_unstabilized_plant_within_two_seconds():
    seq = [(GaitCommand(), 4.0)]
    # threshold impulse is found by running the seeded plant, not asserted a priori
    felling = None
    for impulse in (10.0, 20.0, 30.0, 40.0, 60.0):
        trace = run_sequence(
            zero_gains(), CpgParams(), seq, PlantParams(seed=0),
            [Disturbance(1.0, impulse, "front")],
        )
        if trace.fall:
            felling = impulse
            break
    assert felling is not None
    trace = run_sequence(
        zero_gains(), CpgParams(), seq, PlantParams(seed=0),
        [Disturbance(1.0, felling, "front")],
    )
    assert trace.fall and trace.t[-1] <= 1.0 + 2.0


def test_identical_seeds_give_bit_identical_traces():
    args = (FeedbackGains(), CpgParams(), standard_test_sequence(), PlantParams(seed=77))
    a = run_sequence(*args, [Disturbance(5.0, 9.51, "front")])
    b = run_sequence(*args, [Disturbance(5.0, 9.51, "front")])
    for field in ("mu", "pitch", "roll", "pitch_rate", "roll_rate", "e_p_alpha", "activations", "pose"):
        assert np.array_equal(getattr(a, field), getattr(b, field))


def test_pendulum_energy_dissipates_after_kick():
    p = quiet_plant(damping=0.4)
    s = TorsoState()
    s = step_plant(s, (0.0, 0.0), Activations(), Disturbance(0.0, 6.0, "back"), p, 0.01)
    wn_p, wn_r = p.natural_freq

    def energy(st):
        return (
            0.5 * st.pitch_rate**2
            + wn_p**2 * (1 - math.cos(st.fused_pitch))
            + 0.5 * st.roll_rate**2
            + wn_r**2 * (1 - math.cos(st.fused_roll))
        )

    prev = energy(s)
    for i in range(2000):
        s = step_plant(s, (0.0, 0.0), Activations(), None, p, 0.01)
        if i % 50 == 49:
            now = energy(s)
            assert now <= prev + 1e-12
            prev = now


def test_fall_latches_and_truncates():
    seq = [(GaitCommand(), 6.0)]
    trace = run_sequence(
        zero_gains(), CpgParams(), seq, PlantParams(seed=1),
        [Disturbance(1.0, 60.0, "back")],
    )
    assert trace.fall
    assert len(trace) < 600
    assert trace.fall_time == pytest.approx(trace.t[-1])
    # a fallen state passed to step_plant stays frozen
    s = TorsoState(0.8, 0.0, 1.0, 0.0, fallen=True)
    s2 = step_plant(s, (0.0, 0.0), Activations(), None, quiet_plant(), 0.01)
    assert (s2.fused_pitch, s2.fused_roll, s2.pitch_rate, s2.roll_rate) == (0.8, 0.0, 1.0, 0.0)
    assert s2.fallen


def test_sequence_duration_matches_segments():
    seq = standard_test_sequence()
    trace = run_sequence(zero_gains(), CpgParams(), seq, quiet_plant())
    total = sum(d for _, d in seq)
    assert abs(trace.t[-1] + trace.dt - total) <= trace.dt + 1e-12
    assert len(trace.e_p_alpha) == len(trace.e_p_beta) == len(trace)


def test_quiet_zero_gain_run_has_zero_feedback_floor():
    trace = run_sequence(zero_gains(), CpgParams(), [(GaitCommand(), 5.0)], quiet_plant())
    assert np.all(trace.e_p_alpha == 0.0)
    assert np.all(trace.e_p_beta == 0.0)
    assert not trace.fall


def test_default_gains_beat_zero_gains_on_standard_sequence():
    for seed in (0, 1, 2):
        dist = [Disturbance(10.0, 9.51, "front")]
        args = (CpgParams(), standard_test_sequence(), PlantParams(seed=seed))
        with_fb = run_sequence(FeedbackGains(), *args, dist)
        without = run_sequence(zero_gains(), *args, dist)
        int_with = np.trapezoid(np.abs(with_fb.e_p_alpha), dx=with_fb.dt)
        int_without = np.trapezoid(np.abs(without.e_p_alpha), dx=without.dt)
        assert int_with < int_without
        assert not with_fb.fall


def test_zero_gain_closed_loop_is_bit_identical_to_open_loop():
    cpg = CpgParams()
    trace = run_sequence(zero_gains(), cpg, standard_test_sequence(), PlantParams(seed=5))
    assert np.all(trace.activations[:, :6] == 0.0)
    assert np.all(trace.activations[:, 6] == 1.0)
    cmds = np.array([0.7, 0.0, 0.0])
    for i in (0, 100, 399):
        open_pose = evaluate_cpg(trace.mu[i], GaitCommand(*cmds), cpg).to_array()
        assert np.array_equal(trace.pose[i], open_pose)


def test_phase_plot_series():
    trace = run_sequence(zero_gains(), CpgParams(), [(GaitCommand(), 2.0)], quiet_plant())
    series = phase_plot_series(trace)
    assert series.shape == (len(trace), 2)
    assert np.all(series == 0.0)  # stationary upright trace sits at the origin
    with pytest.raises(InvalidInputError):
        phase_plot_series(replace(trace, t=np.empty(0)))


def test_phase_plot_of_sinusoid_is_an_ellipse():
    t = np.arange(0, 4.0, 0.01)
    amp, omega = 0.2, 3.0
    trace = run_sequence(zero_gains(), CpgParams(), [(GaitCommand(), 4.0)], quiet_plant())
    synthetic = replace(
        trace,
        pitch=amp * np.sin(omega * t),
        pitch_rate=amp * omega * np.cos(omega * t),
    )
    series = phase_plot_series(synthetic)
    assert series[:, 0].max() == pytest.approx(amp, rel=1e-2)
    assert series[:, 1].max() == pytest.approx(amp * omega, rel=1e-2)


def test_make_real_plant_gap():
    base = PlantParams(seed=3)
    same = make_real_plant(base, RealGap(1.0, 1.0, 1.0, 1.0, 0))
    assert same.natural_freq == base.natural_freq
    assert np.array_equal(same.action_effectiveness, base.action_effectiveness)
    assert same.seed == base.seed

    real = make_real_plant(base)
    real2 = make_real_plant(base)
    assert real.natural_freq == real2.natural_freq  # deterministic perturbation

    seq = standard_test_sequence()
    cost_sim = np.trapezoid(
        np.abs(run_sequence(FeedbackGains(), CpgParams(), seq, base).e_p_alpha), dx=0.01
    )
    cost_real = np.trapezoid(
        np.abs(run_sequence(FeedbackGains(), CpgParams(), seq, real).e_p_alpha), dx=0.01
    )
    assert cost_sim != cost_real


def test_disturbance_directions():
    p = quiet_plant()
    for direction, plane, sign in (
        ("front", "pitch_rate", -1),
        ("back", "pitch_rate", 1),
        ("left", "roll_rate", -1),
        ("right", "roll_rate", 1),
    ):
        s = step_plant(TorsoState(), (0, 0), Activations(), Disturbance(0.0, 6.0, direction), p, 0.01)
        assert sign * getattr(s, plane) > 0
    with pytest.raises(InvalidInputError):
        Disturbance(0.0, 1.0, "up")


def test_trace_csv_schema(tmp_path):
    trace = run_sequence(zero_gains(), CpgParams(), [(GaitCommand(), 1.0)], quiet_plant())
    path = tmp_path / "trace.csv"
    trace_to_csv(trace, path)
    header = path.read_text().splitlines()[0]
    assert header == "t,mu,pitch,roll,pitch_rate,roll_rate,d_theta,d_phi,fall"
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (100, 9)
