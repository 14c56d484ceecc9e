"""Scene composition and repeater-jamming synthesis tests.

Slice layouts in the frozen cases were worked out by hand on a 16-sample toy
pulse (1 MHz grid, 8 us sampling period, 2-sample slices) so every replay
index can be checked against the construction rules directly.
"""

import json

import numpy as np
import pytest

from wdcss import scene, waveform
from wdcss.errors import ConfigError, DegenerateSlice, ReplayOverrun, WindowTooSmall


def toy_pulse():
    # content equals its own sample index, easy to trace through replays
    return np.arange(16, dtype=np.complex128)


def toy_jammer(mode, **kw):
    args = dict(delay=0.0, jnr_db=0.0, sampling_period=8e-6, epsilon=0.25)
    args.update(kw)
    return scene.JammerParams(mode=mode, **args)


def test_gate_layout_table1():
    gate = scene.sampling_gate(
        sample_rate=10e6, sampling_period=32e-6, epsilon=0.1, n_samples=1600
    )
    assert gate.sum() == 160
    starts = np.flatnonzero(np.diff(np.r_[0, gate.view(np.int8)]) == 1)
    np.testing.assert_array_equal(starts, [0, 320, 640, 960, 1280])
    assert gate[:32].all() and not gate[32:320].any()


def test_gate_degenerate_slice():
    with pytest.raises(DegenerateSlice):
        scene.sampling_gate(
            sample_rate=1e6, sampling_period=8e-6, epsilon=0.05, n_samples=16
        )


def test_isdrj_replay_layout():
    j = scene.synthesize_jamming(
        toy_pulse(), sample_rate=1e6, jammer=toy_jammer(scene.JamMode.ISDRJ)
    )
    assert len(j) >= 12
    expect = np.zeros(len(j), dtype=np.complex128)
    expect[2:4] = [0, 1]     # first captured slice replayed right after capture
    expect[10:12] = [8, 9]   # second slice
    np.testing.assert_array_equal(j, expect)


def test_isrrj_repeats_fill_period():
    j = scene.synthesize_jamming(
        toy_pulse(),
        sample_rate=1e6,
        jammer=toy_jammer(scene.JamMode.ISRRJ, repeats=3),
    )
    expect = np.zeros(16, dtype=np.complex128)
    for p in range(3):
        expect[2 + 2 * p : 4 + 2 * p] = [0, 1]
        expect[10 + 2 * p : 12 + 2 * p] = [8, 9]
    np.testing.assert_array_equal(j[:16], expect)


def test_isrrj_too_many_repeats():
    with pytest.raises(ConfigError):
        scene.synthesize_jamming(
            toy_pulse(),
            sample_rate=1e6,
            jammer=toy_jammer(scene.JamMode.ISRRJ, repeats=4),
        )


def test_iscrj_cyclic_shifts():
    j = scene.synthesize_jamming(
        toy_pulse(),
        sample_rate=1e6,
        jammer=toy_jammer(scene.JamMode.ISCRJ, cycles=2),
    )
    assert len(j) >= 22
    expect = np.zeros(len(j), dtype=np.complex128)
    expect[2:4] = [0, 1]
    expect[10:12] = [8, 9]
    expect[12:14] += [0, 1]    # whole pattern again, shifted T_J + T_slice = 10 us
    expect[20:22] += [8, 9]
    np.testing.assert_array_equal(j, expect)


def test_duty_cycle_formulas():
    assert toy_jammer(scene.JamMode.ISDRJ).duty_cycle() == pytest.approx(0.25)
    assert toy_jammer(scene.JamMode.ISRRJ, repeats=3).duty_cycle() == pytest.approx(0.75)
    j5 = scene.JammerParams(
        mode=scene.JamMode.ISCRJ, delay=20e-6, jnr_db=20.0,
        sampling_period=32e-6, epsilon=0.1, cycles=5,
    )
    assert j5.duty_cycle() == pytest.approx(0.3)


def test_compose_places_echo_and_jamming():
    grid = waveform.SamplingGrid(sample_rate=1e6, chip_width=1e-6, n_chips=16)
    codes = np.ones((2, 16), dtype=np.int8)
    ps = waveform.PulseSet(
        pulses=np.ones((2, 16), dtype=np.complex128), grid=grid, kind="wdcss"
    )
    sc = scene.Scenario(
        grid=grid,
        cpi=2,
        pri=100e-6,
        target=scene.TargetParams(delay=4e-6, snr_db=6.0),
        jammer=scene.JammerParams(
            mode=scene.JamMode.ISDRJ, delay=40e-6, jnr_db=20.0,
            sampling_period=8e-6, epsilon=0.25,
        ),
        noise_sigma=0.0,
        window=(0.0, 64e-6),
        seed=1,
    )
    train = scene.compose_train(ps, sc)
    assert train.samples.shape == (2, 64 + 16)
    a_s = 10 ** (6.0 / 20)  # sigma=0 keeps the amplitude convention explicit
    # target occupies [4, 20) us
    np.testing.assert_allclose(train.samples[0, 4:20].real, a_s, rtol=1e-12)
    assert not train.samples[0, :4].any()
    # jamming: first replay slice of the all-ones pulse lands at 40 + 2 us
    a_j = 10 ** (20.0 / 20)
    np.testing.assert_allclose(train.samples[0, 42:44].real, a_j, rtol=1e-12)
    assert not train.samples[0, 20:42].any()


def test_compose_window_must_cover_target():
    grid = waveform.SamplingGrid(sample_rate=1e6, chip_width=1e-6, n_chips=16)
    ps = waveform.PulseSet(
        pulses=np.ones((2, 16), dtype=np.complex128), grid=grid, kind="wdcss"
    )
    sc = scene.Scenario(
        grid=grid, cpi=2, pri=100e-6,
        target=scene.TargetParams(delay=80e-6, snr_db=0.0),
        jammer=None, noise_sigma=1.0, window=(0.0, 64e-6), seed=1,
    )
    with pytest.raises(WindowTooSmall):
        scene.compose_train(ps, sc)


def test_compose_clips_replay_with_warning():
    grid = waveform.SamplingGrid(sample_rate=1e6, chip_width=1e-6, n_chips=16)
    ps = waveform.PulseSet(
        pulses=np.ones((2, 16), dtype=np.complex128), grid=grid, kind="wdcss"
    )
    sc = scene.Scenario(
        grid=grid, cpi=2, pri=100e-6,
        target=scene.TargetParams(delay=0.0, snr_db=0.0),
        jammer=scene.JammerParams(
            mode=scene.JamMode.ISCRJ, delay=10e-6, jnr_db=10.0,
            sampling_period=8e-6, epsilon=0.25, cycles=3,
        ),
        noise_sigma=0.0, window=(0.0, 20e-6), seed=1,
    )
    with pytest.warns(ReplayOverrun):
        scene.compose_train(ps, sc)


def test_noise_level_and_determinism():
    grid = waveform.SamplingGrid(sample_rate=1e6, chip_width=1e-6, n_chips=16)
    ps = waveform.PulseSet(
        pulses=np.zeros((8, 16), dtype=np.complex128), grid=grid, kind="wdcss"
    )
    sc = scene.Scenario(
        grid=grid, cpi=8, pri=100e-6,
        target=scene.TargetParams(delay=0.0, snr_db=0.0),
        jammer=None, noise_sigma=2.0, window=(0.0, 2000e-6), seed=42,
    )
    tr1 = scene.compose_train(ps, sc)
    tr2 = scene.compose_train(ps, sc)
    np.testing.assert_array_equal(tr1.samples, tr2.samples)
    v = np.var(tr1.samples)  # complex variance: E|z|^2
    assert v == pytest.approx(4.0, rel=0.05)
    re_im_ratio = np.var(tr1.samples.real) / np.var(tr1.samples.imag)
    assert re_im_ratio == pytest.approx(1.0, rel=0.1)


def test_scenario_json_roundtrip(tmp_path):
    sc = scene.table1_scenario()
    p = tmp_path / "scen.json"
    scene.save_scenario(sc, p)
    back = scene.load_scenario(p)
    assert back.cpi == 256
    assert back.pri == pytest.approx(480e-6)
    assert back.target.delay == pytest.approx(0.0)
    assert back.jammer.delay == pytest.approx(20e-6)
    assert back.jammer.mode is scene.JamMode.ISRRJ
    assert back.jammer.repeats == 9
    assert back.grid.sample_rate == pytest.approx(10e6)
    assert back.window == pytest.approx((-40e-6, 360e-6))
    # hand-written minimal file with spec field names
    q = tmp_path / "min.json"
    q.write_text(json.dumps({
        "pri_us": 100.0, "cpi": 4, "tau_s_us": 0.0, "tau_j_us": 12.0,
        "mode": "isdrj", "T_J_us": 8.0, "epsilon": 0.25,
        "snr_db": 0.0, "jnr_db": 10.0, "fs_hz": 1e6, "seed": 7,
        "n_chips": 16, "t_c_us": 1.0, "window_us": [-8.0, 40.0],
    }))
    m = scene.load_scenario(q)
    assert m.grid.n_chips == 16
    assert m.jammer.mode is scene.JamMode.ISDRJ
    assert m.seed == 7


def test_scenario_json_rejects_bad_mode(tmp_path):
    q = tmp_path / "bad.json"
    q.write_text(json.dumps({
        "pri_us": 100.0, "cpi": 4, "tau_s_us": 0.0, "tau_j_us": 12.0,
        "mode": "what", "T_J_us": 8.0, "epsilon": 0.25,
        "snr_db": 0.0, "jnr_db": 10.0, "fs_hz": 1e6, "seed": 7,
    }))
    with pytest.raises(ConfigError):
        scene.load_scenario(q)
