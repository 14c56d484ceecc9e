"""Profile quality metrics and the Monte-Carlo sweep harness.

MLL, SLL and PSLR are all referenced to the clean matched-filter peak, so a
lossless output sits at MLL = 0 dB regardless of amplitude scaling.  The
sweep harness reruns the full synthesis-and-filter pipeline per trial with a
seed derived from (master seed, axis point, trial), which keeps every trial
independent and every run reproducible.
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import codeset, waveform, wdamf, wdfilter
from .errors import ConfigError, MissingReference
from .scene import JamMode, Scenario, compose_train

_DB_FLOOR = 1e-300

SWEEP_AXES = ("SNR_DB", "JNR_DB", "ETA")


@dataclass
class ProfileMetrics:
    """Mainlobe level, peak sidelobe level and their ratio, in dB."""

    mll_db: float
    sll_db: float
    pslr_db: float
    reference_peak: float       # linear clean matched-filter peak
    mainlobe_exclusion: float   # seconds kept out of the sidelobe search


@dataclass
class TrialRecord:
    """One sweep trial: the axis value it ran at and what it measured."""

    value: float
    trial: int
    seed: int
    metrics: ProfileMetrics


@dataclass
class SweepResult:
    """Per-trial metric records for one sweep axis."""

    axis: str
    records: List[TrialRecord]

    def points(self) -> List[Tuple[float, float, float, int]]:
        """(value, mean PSLR dB, std dB, trials) per axis point, in order."""
        out = []
        for value in dict.fromkeys(r.value for r in self.records):
            pslr = [r.metrics.pslr_db for r in self.records if r.value == value]
            out.append((value, float(np.mean(pslr)), float(np.std(pslr)), len(pslr)))
        return out


def _cascade_depth(rows_needed: int, cols_needed: int) -> int:
    need = max(rows_needed, cols_needed, 2)
    return max(int(math.ceil(math.log2(need))) - 1, 0)


def build_pulse_set(scenario: Scenario) -> waveform.PulseSet:
    """Transmit pulse set for the scenario's waveform kind.

    The coded set is drawn from the first candidate of a cascade just deep
    enough to cover the pulse count and chip count; any candidate works, the
    choice is fixed for reproducibility.
    """
    g = scenario.grid
    kind = scenario.waveform_kind
    if kind == "wdcss":
        depth = _cascade_depth(scenario.cpi, g.n_chips)
        structure = codeset.cascade(codeset.build_delta(*codeset.golay_seed()), depth)
        matrix = codeset.select_codeset(structure, 0, range(g.n_chips))
        return waveform.make_wdcss(matrix, g)
    if kind == "golay":
        return waveform.make_golay_set(g.n_chips, g, scenario.cpi)
    if kind == "lfm":
        return waveform.make_lfm(g, scenario.lfm_bandwidth, scenario.cpi)
    raise ConfigError(f"unknown waveform kind {kind!r}")


def run_profile(
    scenario: Scenario,
    filter_kind: str = "auto",
    workers: Optional[int] = None,
) -> wdfilter.RangeProfile:
    """Synthesize the scenario and run one filter over the full window.

    ``auto`` picks the filter the waveform is meant to be judged with: the
    adaptive chain for the coded set, the single-channel baseline otherwise.
    """
    ps = build_pulse_set(scenario)
    train = compose_train(ps, scenario)
    if filter_kind == "auto":
        filter_kind = "wdamf" if scenario.waveform_kind == "wdcss" else "baseline"
    if filter_kind == "mf":
        return wdfilter.matched_filter(train, ps)
    if filter_kind == "wdamf":
        return wdamf.wdamf_profile(train, ps, workers=workers)
    if filter_kind == "baseline":
        return wdamf.baseline_wdamf(train, ps, workers=workers)
    raise ConfigError(f"unknown filter kind {filter_kind!r}")


def mainlobe_exclusion(scenario: Scenario) -> float:
    """Half-width of the region around the target ignored by the SLL search.

    Two resolution cells: the coded waveforms resolve to a chip, the chirp
    to the inverse bandwidth.
    """
    if scenario.waveform_kind == "lfm":
        return 2.0 / scenario.lfm_bandwidth
    return 2.0 * scenario.grid.chip_width


def _db(ratio: float) -> float:
    return 20.0 * math.log10(max(ratio, _DB_FLOOR))


def compute_metrics(
    profile: wdfilter.RangeProfile,
    scenario: Scenario,
    clean_reference: Optional[float] = None,
) -> ProfileMetrics:
    """Measure the profile against the clean matched-filter peak.

    MLL reads the profile at the target delay; SLL takes the largest value
    outside the mainlobe exclusion anywhere in the window, which covers the
    jamming region where residuals concentrate.

    Raises:
        MissingReference: no usable reference peak was given or carried.
        ConfigError: the window is too small to hold a sidelobe region.
    """
    ref = clean_reference if clean_reference is not None else profile.reference
    if ref is None or not np.isfinite(ref) or ref <= 0.0:
        raise MissingReference("no clean matched-filter peak to normalize by")
    tau = scenario.target.delay
    idx = int(np.argmin(np.abs(profile.delays - tau)))
    exclusion = mainlobe_exclusion(scenario)
    outside = np.abs(profile.delays - tau) > exclusion
    if not np.any(outside):
        raise ConfigError("window holds no samples outside the mainlobe exclusion")
    mll = _db(abs(profile.values[idx]) / ref)
    sll = _db(float(np.max(np.abs(profile.values[outside]))) / ref)
    return ProfileMetrics(
        mll_db=mll,
        sll_db=sll,
        pslr_db=mll - sll,
        reference_peak=float(ref),
        mainlobe_exclusion=exclusion,
    )


def trial_seed(master_seed: int, axis_index: int, trial_index: int) -> int:
    """Stable per-trial seed; independent streams across points and trials."""
    ss = np.random.SeedSequence((master_seed, axis_index, trial_index))
    return int(ss.generate_state(1)[0])


def scenario_at(base: Scenario, axis: str, value: float) -> Scenario:
    """Base scenario with one sweep axis moved to ``value``.

    The duty-ratio axis switches the jammer to repeated replay and converts
    the ratio to a replay count; the other axes only rescale amplitudes.
    """
    if axis == "SNR_DB":
        return replace(base, target=replace(base.target, snr_db=float(value)))
    if axis == "JNR_DB":
        if base.jammer is None:
            raise ConfigError("JNR sweep needs a jammer in the base scenario")
        return replace(base, jammer=replace(base.jammer, jnr_db=float(value)))
    if axis == "ETA":
        if base.jammer is None:
            raise ConfigError("duty-ratio sweep needs a jammer in the base scenario")
        repeats = max(int(round(value / base.jammer.epsilon)), 1)
        jam = replace(base.jammer, mode=JamMode.ISRRJ, repeats=repeats)
        return replace(base, jammer=jam)
    raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")


def _run_trial(args) -> TrialRecord:
    base, axis, axis_index, value, trial, filter_kind = args
    seed = trial_seed(base.seed, axis_index, trial)
    sc = replace(scenario_at(base, axis, value), seed=seed)
    profile = run_profile(sc, filter_kind)
    return TrialRecord(
        value=float(value), trial=trial, seed=seed,
        metrics=compute_metrics(profile, sc),
    )


def monte_carlo_sweep(
    base_scenario: Scenario,
    axis: str,
    values: Sequence[float],
    trials: int,
    parallel: Optional[int] = None,
    filter_kind: str = "auto",
) -> SweepResult:
    """Independent seeded trials of the full pipeline per axis value.

    Raises:
        ConfigError: unknown axis or nonpositive trial count.
    """
    ax = axis.upper()
    if ax not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    jobs = [
        (base_scenario, ax, ai, float(v), k, filter_kind)
        for ai, v in enumerate(values)
        for k in range(trials)
    ]
    if parallel and parallel > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=parallel) as pool:
            records = list(pool.map(_run_trial, jobs))
    else:
        records = [_run_trial(j) for j in jobs]
    return SweepResult(axis=ax, records=records)
