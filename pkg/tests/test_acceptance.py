"""End-to-end acceptance gate: one test per shipping criterion.

The table reproductions run the full reference scenario at 20 trials per
jammer mode and take several minutes each; everything else is seconds.  Run
with ``-m acceptance`` to execute only this gate, or deselect it with
``-m 'not acceptance'`` during development.
"""

import os
import time
from dataclasses import replace

import numpy as np
import pytest

from wdcss import cli, codeset, metrics, waveform, wdamf, wdfilter
from wdcss.scene import (
    JamMode,
    JammerParams,
    Scenario,
    TargetParams,
    compose_train,
    save_scenario,
    table1_scenario,
)
from wdcss.waveform import SamplingGrid

pytestmark = pytest.mark.acceptance

MASTER_SEED = 0
TRIALS = 20
MODES = ("ISDRJ", "ISRRJ", "ISCRJ")


# ---------------------------------------------------------------- helpers


def table_scenario(kind: str, mode: str, seed: int) -> Scenario:
    sc = table1_scenario(waveform_kind=kind, seed=seed)
    return replace(sc, jammer=replace(sc.jammer, mode=JamMode[mode]))


def reduced_scenario(kind: str) -> Scenario:
    """Smaller train with the same geometry ratios, for the trend sweeps."""
    return Scenario(
        grid=SamplingGrid(sample_rate=1e7, chip_width=1e-6, n_chips=64),
        cpi=64,
        pri=480e-6,
        target=TargetParams(delay=0.0, snr_db=0.0),
        jammer=JammerParams(
            mode=JamMode.ISRRJ,
            delay=10e-6,
            jnr_db=20.0,
            sampling_period=10e-6,
            epsilon=0.1,
            repeats=9,
            cycles=5,
        ),
        noise_sigma=1.0,
        window=(-20e-6, 150e-6),
        seed=MASTER_SEED,
        waveform_kind=kind,
    )


def run_table(kind: str):
    """mode -> list of ProfileMetrics over the trial budget."""
    out = {}
    for mode_index, mode in enumerate(MODES):
        rows = []
        for trial in range(TRIALS):
            seed = metrics.trial_seed(MASTER_SEED, mode_index, trial)
            sc = table_scenario(kind, mode, seed)
            profile = metrics.run_profile(sc)
            rows.append(metrics.compute_metrics(profile, sc))
        out[mode] = rows
    return out


def mean_of(rows, field):
    return float(np.mean([getattr(r, field) for r in rows]))


@pytest.fixture(scope="module")
def table4_wdcss():
    return run_table("wdcss")


@pytest.fixture(scope="module")
def table2_lfm():
    return run_table("lfm")


@pytest.fixture(scope="module")
def table3_golay():
    return run_table("golay")


@pytest.fixture(scope="module")
def eta_sweeps():
    values = [round(0.1 * k, 1) for k in range(1, 10)]
    return {
        kind: metrics.monte_carlo_sweep(reduced_scenario(kind), "ETA", values,
                                        trials=TRIALS)
        for kind in ("wdcss", "lfm", "golay")
    }


# ---------------------------------------------------------------- criteria


def test_criterion_01_codeset_exact():
    t0 = time.perf_counter()
    structure = codeset.cascade(codeset.build_delta(*codeset.golay_seed()), 7)
    matrix = codeset.select_codeset(structure, 0, range(160))
    assert matrix.codes.shape == (256, 160)
    assert codeset.verify_wdc(matrix).passed
    # independent referee on every candidate up to 16 pulses: per-chip
    # product sums at every nonzero lag, written as the plain triple loop
    for depth in range(4):
        st = codeset.cascade(codeset.build_delta(*codeset.golay_seed()), depth)
        d = st.blocks.shape[0]
        if d > 16:
            continue
        for j in range(st.n_candidates):
            cand = st.candidate(j).astype(int)
            n = cand.shape[1]
            gram = cand.T @ cand
            assert np.array_equal(gram, d * np.eye(n, dtype=int))
            for lag in range(1, n):
                for chip in range(n - lag):
                    s = sum(int(cand[i, chip + lag]) * int(cand[i, chip])
                            for i in range(d))
                    assert s == 0
    assert time.perf_counter() - t0 < 10.0


def test_criterion_02_complementarity_beyond_one_chip():
    t0 = time.perf_counter()
    grid = SamplingGrid(sample_rate=1e7, chip_width=1e-6, n_chips=32)
    sc = Scenario(
        grid=grid, cpi=64, pri=480e-6,
        target=TargetParams(delay=0.0, snr_db=0.0), jammer=None,
        noise_sigma=0.0, window=(-40e-6, 40e-6), seed=0,
        waveform_kind="wdcss",
    )
    ps = metrics.build_pulse_set(sc)
    train = compose_train(ps, sc)
    n_t = train.n_window - grid.samples_per_pulse + 1
    w = wdfilter.response_block(train, ps, 0, n_t)
    delays = train.window_start + np.arange(n_t) * grid.dt
    outside = np.abs(delays) > grid.chip_width + grid.dt / 2
    bound = 1e-9 * sc.signal_amplitude * sc.cpi
    assert np.abs(w[outside]).max() < bound
    # and the response really is present inside the chip
    assert np.abs(w[~outside]).max() > 0.5 * sc.signal_amplitude * sc.cpi
    assert time.perf_counter() - t0 < 60.0


def test_criterion_03_target_jam_supports_disjoint():
    for mode in MODES:
        base = table_scenario("wdcss", mode, 0)
        ps = metrics.build_pulse_set(base)
        grid = base.grid
        target_train = compose_train(ps, replace(base, jammer=None,
                                                 noise_sigma=0.0))
        jam_train = compose_train(
            ps, replace(base, noise_sigma=0.0,
                        target=replace(base.target, snr_db=-400.0)))
        n_t = target_train.n_window - grid.samples_per_pulse + 1
        mag_t = np.empty((n_t, grid.samples_per_pulse), dtype=np.float32)
        mag_j = np.empty_like(mag_t)
        for start in range(0, n_t, 500):
            count = min(500, n_t - start)
            mag_t[start:start + count] = np.abs(
                wdfilter.response_block(target_train, ps, start, count))
            mag_j[start:start + count] = np.abs(
                wdfilter.response_block(jam_train, ps, start, count))
        sup_t = mag_t > 1e-9 * mag_t.max()
        sup_j = mag_j > 1e-9 * mag_j.max()
        assert sup_t.any() and sup_j.any()
        overlap = np.logical_and(sup_t, sup_j)
        assert not overlap.any(), f"{mode}: supports intersect"


def test_criterion_04_table4_wdcss(table4_wdcss):
    for mode in MODES:
        rows = table4_wdcss[mode]
        mll = mean_of(rows, "mll_db")
        pslr = mean_of(rows, "pslr_db")
        assert abs(mll) <= 1.0, f"{mode}: mean MLL {mll:+.2f} outside 0 +/- 1"
        assert pslr >= 45.0, f"{mode}: mean PSLR {pslr:.2f} below 45"


def test_criterion_04_single_run_time_budget():
    sc = table_scenario("wdcss", "ISRRJ", 0)
    t0 = time.perf_counter()
    profile = metrics.run_profile(sc)
    elapsed = time.perf_counter() - t0
    assert elapsed <= 900.0, f"single Table-1 run took {elapsed:.0f}s"
    assert abs(metrics.compute_metrics(profile, sc).mll_db) < 1.0


def test_criterion_04_parallel_time_budget():
    if (os.cpu_count() or 1) < 8:
        pytest.skip("host exposes fewer than 8 cores; 3-minute 8-way bound "
                    "not measurable here")
    sc = table_scenario("wdcss", "ISRRJ", 0)
    t0 = time.perf_counter()
    metrics.run_profile(sc, workers=8)
    assert time.perf_counter() - t0 <= 180.0


def test_criterion_05_table2_lfm(table2_lfm):
    mll_rrj = mean_of(table2_lfm["ISRRJ"], "mll_db")
    assert -12.5 <= mll_rrj <= -8.5, f"ISRRJ mean MLL {mll_rrj:+.2f}"
    for mode in ("ISDRJ", "ISCRJ"):
        mll = mean_of(table2_lfm[mode], "mll_db")
        assert abs(mll) <= 1.0, f"{mode}: mean MLL {mll:+.2f}"


def test_criterion_06_table3_golay(table3_golay):
    mll_rrj = mean_of(table3_golay["ISRRJ"], "mll_db")
    assert mll_rrj <= -20.0, f"ISRRJ mean MLL {mll_rrj:+.2f}, mainlobe survived"
    for mode in ("ISDRJ", "ISCRJ"):
        mll = mean_of(table3_golay[mode], "mll_db")
        assert abs(mll) <= 1.0, f"{mode}: mean MLL {mll:+.2f}"


def test_criterion_07_noise_calibration():
    grid = SamplingGrid(sample_rate=1e7, chip_width=1e-6, n_chips=64)
    sc = Scenario(
        grid=grid, cpi=64, pri=480e-6,
        target=TargetParams(delay=50e-6, snr_db=-400.0), jammer=None,
        noise_sigma=1.0, window=(0.0, 1070e-6), seed=9,
        waveform_kind="wdcss",
    )
    ps = metrics.build_pulse_set(sc)
    train = compose_train(ps, sc)
    # rows one chip apart share no correlated noise, so the variance
    # statistics below average over independent draws
    stride = grid.samples_per_chip
    w = wdfilter.response_block(train, ps, 0, 1000 * stride)[::stride]
    assert w.size >= 1e5
    var_w = float(np.mean(np.abs(w) ** 2))
    expect = sc.cpi * sc.noise_sigma ** 2
    assert abs(var_w / expect - 1.0) < 0.05
    # running integral: variance grows linearly with time into the pulse
    y = np.cumsum(w, axis=1) * grid.dt
    var_y = np.var(y, axis=0)
    steps = np.arange(1, y.shape[1] + 1, dtype=float)  # (mu + T/2) / dt
    fit = np.polyfit(steps, var_y, 1)
    pred = np.polyval(fit, steps)
    ss_res = float(np.sum((var_y - pred) ** 2))
    ss_tot = float(np.sum((var_y - var_y.mean()) ** 2))
    assert 1.0 - ss_res / ss_tot > 0.99
    assert abs(fit[0] / (expect * grid.dt ** 2) - 1.0) < 0.15


def test_criterion_08_imm_tracking_oracles():
    grid = SamplingGrid.for_pulse(1e7, 160e-6)
    n = grid.samples_per_pulse
    dmu = grid.dt

    def estimate(w):
        snap = wdfilter.WaveformSnapshot(
            delay=0.0, response=np.asarray(w, dtype=np.complex128),
            coherence=np.cumsum(w) * dmu, grid=grid)
        return wdamf.imm_estimate(snap)

    # constant slope
    level = 512.0
    w_hat, _ = estimate(np.full(n, level))
    burn = n // 10
    assert np.max(np.abs(w_hat.real[burn:] - level)) < 0.01 * level
    # two-edge staircase
    w = np.full(n, 500.0)
    w[600:1000] = 2500.0
    w_hat, _ = estimate(w)
    slack = wdamf.ThresholdConfig().gamma + 2
    mid = 0.5 * (500.0 + 2500.0)
    above = w_hat.real > mid
    up = int(np.argmax(above))
    down = int(len(above) - np.argmax(above[::-1]))
    assert abs(up - 600) <= slack
    assert abs(down - 1000) <= slack
    for lo, hi, level in ((200, 590, 500.0), (700, 990, 2500.0),
                          (1100, 1590, 500.0)):
        seg = w_hat.real[lo:hi]
        assert np.max(np.abs(seg - level)) < 0.01 * level


def test_criterion_09_sensitivity_trends(eta_sweeps):
    wdcss_eta = dict((v, m) for v, m, _, _ in eta_sweeps["wdcss"].points())
    spread = max(wdcss_eta.values()) - min(wdcss_eta.values())
    assert spread < 4.0, f"coded PSLR spans {spread:.2f} dB across duty ratios"

    jnr = metrics.monte_carlo_sweep(
        reduced_scenario("wdcss"), "JNR_DB", [0.0, 10.0, 20.0, 30.0],
        trials=TRIALS)
    means = [m for _, m, _, _ in jnr.points()]
    assert max(means) - min(means) < 4.0, (
        f"coded PSLR spans {max(means) - min(means):.2f} dB across JNR")

    for kind in ("lfm", "golay"):
        other = dict((v, m) for v, m, _, _ in eta_sweeps[kind].points())
        for eta, pslr in wdcss_eta.items():
            if eta >= 0.5:
                assert other[eta] < pslr, (
                    f"{kind} PSLR {other[eta]:.2f} not below coded "
                    f"{pslr:.2f} at duty {eta}")


def test_criterion_10_byte_identical_reruns(tmp_path):
    scn = tmp_path / "scenario.json"
    save_scenario(reduced_scenario("wdcss"), scn)
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert cli.main(["simulate", str(scn), "--out", str(out1)]) == 0
    assert cli.main(["simulate", str(scn), "--out", str(out2)]) == 0
    for name in ("mf_profile.csv", "wdamf_profile.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
