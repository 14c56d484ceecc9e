"""Pulse-set construction tests.

Chirp and Doppler references are computed from first principles in the tests
(instantaneous frequency from unwrapped phase, explicit phase products), not
from the library's own helpers.
"""

import numpy as np
import pytest

from wdcss import codeset, waveform
from wdcss.errors import GridMismatch, UnsupportedLength


def table1_grid():
    return waveform.SamplingGrid(sample_rate=10e6, chip_width=1e-6, n_chips=160)


def test_grid_arithmetic():
    g = table1_grid()
    assert g.samples_per_chip == 10
    assert g.samples_per_pulse == 1600
    assert g.pulse_width == pytest.approx(160e-6)
    assert g.dt == pytest.approx(1e-7)


def test_grid_rejects_fractional_chip():
    with pytest.raises(GridMismatch):
        waveform.SamplingGrid(sample_rate=10e6, chip_width=0.15e-6, n_chips=16)


def test_code_chips_expand_to_samples():
    s0, s1 = codeset.golay_seed()
    st = codeset.cascade(codeset.build_delta(s0, s1), 1)
    mat = codeset.select_codeset(st, block_index=0)
    g = waveform.SamplingGrid(sample_rate=2e6, chip_width=1e-6, n_chips=4)
    ps = waveform.make_wdcss(mat, g)
    assert ps.pulses.shape == (4, 8)
    assert ps.pulses.dtype == np.complex128
    # chip 1 of pulse 1 is -1: samples 2,3 of that row
    np.testing.assert_allclose(ps.pulses[1].real, [1, 1, -1, -1, 1, 1, -1, -1])
    np.testing.assert_allclose(np.abs(ps.pulses), 1.0)


def test_wdcss_requires_matching_chip_count():
    mat = codeset.sylvester_codeset(4, n_columns=4)
    g = waveform.SamplingGrid(sample_rate=2e6, chip_width=1e-6, n_chips=8)
    with pytest.raises(GridMismatch):
        waveform.make_wdcss(mat, g)


def test_lfm_sweep_and_modulus():
    g = waveform.SamplingGrid.for_pulse(sample_rate=10e6, pulse_width=160e-6)
    ps = waveform.make_lfm(g, bandwidth=2e6, n_pulses=4)
    assert ps.pulses.shape == (4, 1600)
    np.testing.assert_allclose(np.abs(ps.pulses), 1.0)
    np.testing.assert_array_equal(ps.pulses[0], ps.pulses[3])
    # instantaneous frequency from the unwrapped phase must ramp -B/2 .. B/2
    ph = np.unwrap(np.angle(ps.pulses[0]))
    f_inst = np.diff(ph) / (2 * np.pi * g.dt)
    t_mid = (np.arange(1599) + 0.5) * g.dt
    expect = (2e6 / 160e-6) * (t_mid - 80e-6)
    np.testing.assert_allclose(f_inst, expect, atol=1.0)


def test_golay_pair_lengths_and_complementarity():
    for n in (2, 8, 10, 20, 160):
        g = waveform.SamplingGrid(sample_rate=1e6, chip_width=1e-6, n_chips=n)
        ps = waveform.make_golay_set(n, g, n_pulses=6)
        assert ps.pulses.shape == (6, n)
        a = ps.pulses[0].real
        b = ps.pulses[1].real
        np.testing.assert_array_equal(ps.pulses[2].real, a)  # alternation
        np.testing.assert_array_equal(ps.pulses[3].real, b)
        # referee: aperiodic autocorrelation sums cancel off peak
        for m in range(1, n):
            s = np.dot(a[m:], a[:-m]) + np.dot(b[m:], b[:-m])
            assert abs(s) < 1e-9, (n, m)


def test_golay_unsupported_length():
    g = waveform.SamplingGrid(sample_rate=1e6, chip_width=1e-6, n_chips=12)
    with pytest.raises(UnsupportedLength):
        waveform.make_golay_set(12, g, n_pulses=2)


def test_golay_needs_even_pulse_count():
    g = waveform.SamplingGrid(sample_rate=1e6, chip_width=1e-6, n_chips=8)
    with pytest.raises(ValueError):
        waveform.make_golay_set(8, g, n_pulses=3)


def test_doppler_phase_structure():
    s0, s1 = codeset.golay_seed()
    st = codeset.cascade(codeset.build_delta(s0, s1), 2)
    mat = codeset.select_codeset(st, block_index=0)
    g = waveform.SamplingGrid(sample_rate=4e6, chip_width=1e-6, n_chips=8)
    ps = waveform.make_wdcss(mat, g)
    fd, pri = 1.25e3, 480e-6
    shifted = waveform.apply_doppler(ps, doppler_hz=fd, pri=pri)
    # intra-pulse ramp on pulse 0
    k = np.arange(g.samples_per_pulse)
    expect0 = ps.pulses[0] * np.exp(2j * np.pi * fd * k * g.dt)
    np.testing.assert_allclose(shifted.pulses[0], expect0, rtol=1e-12)
    # inter-pulse progression on pulse 5
    ratio = shifted.pulses[5] / (ps.pulses[5] * np.exp(2j * np.pi * fd * k * g.dt))
    np.testing.assert_allclose(ratio, np.exp(2j * np.pi * fd * 5 * pri), rtol=1e-12)
    # original left untouched
    np.testing.assert_array_equal(ps.pulses[0].imag, 0)
