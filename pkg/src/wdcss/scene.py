"""Receive-window composition: target echo, repeater jamming and noise.

The repeater alternates between listening and transmitting.  While its gate
is open it records the incident pulse; afterwards it retransmits the recorded
slice one or more times.  Three replay disciplines are modeled:

* direct: each slice replayed once, immediately after capture;
* repeated: each slice replayed ``repeats`` times back to back, filling the
  remainder of the sampling period;
* cyclic: the whole direct-replay signal retransmitted ``cycles`` times, each
  copy delayed by one slice width plus one sampling period.

Replays are exact amplitude-scaled copies of the captured samples (coherent
repeater), so the jamming inherits the waveform's fine structure.  The
jammer runs the same gate timing on every pulse of the train.
"""

from __future__ import annotations

import enum
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .errors import (
    ConfigError,
    DegenerateSlice,
    ReplayOverrun,
    WindowTooSmall,
)
from .waveform import PulseSet, SamplingGrid, apply_doppler

# RNG stream tags so independent draws never share a substream.
_STREAM_NOISE = 0x5E01
_STREAM_COMPENSATION = 0x5E02


class JamMode(enum.Enum):
    ISDRJ = "isdrj"   # direct replay
    ISRRJ = "isrrj"   # repeated replay
    ISCRJ = "iscrj"   # cyclic replay


@dataclass
class TargetParams:
    delay: float                # two-way delay, seconds
    snr_db: float
    doppler_hz: float = 0.0


@dataclass
class JammerParams:
    mode: JamMode
    delay: float
    jnr_db: float
    sampling_period: float      # gate period, seconds
    epsilon: float              # captured fraction of each period
    repeats: int = 1            # replays per slice (repeated mode)
    cycles: int = 1             # retransmission cycles (cyclic mode)

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 0.5:
            raise ConfigError(f"epsilon {self.epsilon} outside (0, 0.5]")
        if self.repeats < 1 or self.cycles < 1:
            raise ConfigError("repeats and cycles must be positive")

    @property
    def slice_width(self) -> float:
        return self.epsilon * self.sampling_period

    def duty_cycle(self) -> float:
        """Fraction of time spent transmitting, per the replay discipline."""
        if self.mode is JamMode.ISDRJ:
            return self.epsilon
        if self.mode is JamMode.ISRRJ:
            return self.repeats * self.epsilon
        return (self.cycles + 1) / 2.0 * self.epsilon


@dataclass
class Scenario:
    """Full description of one coherent processing interval."""

    grid: SamplingGrid
    cpi: int
    pri: float
    target: TargetParams
    jammer: Optional[JammerParams]
    noise_sigma: float = 1.0
    window: Tuple[float, float] = (-40e-6, 360e-6)  # profile delay span
    seed: int = 0
    carrier_hz: float = 2e9       # bookkeeping only; processing is baseband
    waveform_kind: str = "wdcss"
    lfm_bandwidth: float = 2e6
    wdamf_overrides: dict = field(default_factory=dict)

    @property
    def amp_reference(self) -> float:
        """Noise std the SNR/JNR amplitudes are measured against."""
        return self.noise_sigma if self.noise_sigma > 0 else 1.0

    @property
    def signal_amplitude(self) -> float:
        return self.amp_reference * 10 ** (self.target.snr_db / 20.0)

    @property
    def jamming_amplitude(self) -> float:
        if self.jammer is None:
            return 0.0
        return self.amp_reference * 10 ** (self.jammer.jnr_db / 20.0)


@dataclass
class ReceivedTrain:
    """Per-pulse receive windows sharing one fast-time axis.

    ``samples[i, k]`` is pulse i at absolute delay ``window_start + k*dt``.
    The buffer extends one pulse width past the profile window so every
    profile delay has a full correlation span available.
    """

    samples: np.ndarray
    window_start: float
    grid: SamplingGrid
    scenario: Scenario

    @property
    def n_window(self) -> int:
        return self.samples.shape[1]

    def delay_to_index(self, delay: float) -> int:
        return int(round((delay - self.window_start) * self.grid.sample_rate))


def sampling_gate(
    sample_rate: float,
    sampling_period: float,
    epsilon: float,
    n_samples: int,
) -> np.ndarray:
    """Boolean capture gate: True during the listening slice of each period."""
    n_period = int(round(sampling_period * sample_rate))
    n_slice = int(round(epsilon * sampling_period * sample_rate))
    if n_slice < 1:
        raise DegenerateSlice(
            f"slice {epsilon * sampling_period} shorter than one sample"
        )
    gate = np.zeros(n_samples, dtype=bool)
    for start in range(0, n_samples, n_period):
        gate[start : min(start + n_slice, n_samples)] = True
    return gate


def _capture_slices(n_pulse: int, n_period: int, n_slice: int):
    """(start, width) of each captured slice fully inside the pulse."""
    out = []
    for start in range(0, n_pulse, n_period):
        width = min(n_slice, n_pulse - start)
        if width > 0:
            out.append((start, width))
    return out


def synthesize_jamming(
    pulse: np.ndarray,
    sample_rate: float,
    jammer: JammerParams,
) -> np.ndarray:
    """Replay signal produced by the repeater for one incident pulse.

    Returns the unscaled transmit buffer starting at the pulse's own time
    origin; it can extend past the pulse width (delayed cycles do).  Window
    clipping is the composer's concern.
    """
    n_pulse = len(pulse)
    n_period = int(round(jammer.sampling_period * sample_rate))
    n_slice = int(round(jammer.slice_width * sample_rate))
    if n_slice < 1:
        raise DegenerateSlice("slice shorter than one sample")
    slices = _capture_slices(n_pulse, n_period, n_slice)

    if jammer.mode is JamMode.ISRRJ:
        if (jammer.repeats + 1) * n_slice > n_period:
            raise ConfigError(
                f"{jammer.repeats} replays of {n_slice} samples do not fit "
                f"a {n_period}-sample period"
            )
        repeats = jammer.repeats
    else:
        repeats = 1

    # direct/repeated replay schedule relative to each capture
    end = max(start + (repeats + 1) * n_slice for start, _ in slices)
    base = np.zeros(end, dtype=np.complex128)
    for start, width in slices:
        captured = pulse[start : start + width]
        for p in range(repeats):
            offset = start + (p + 1) * n_slice
            base[offset : offset + width] = captured

    if jammer.mode is not JamMode.ISCRJ:
        return base

    shift = n_slice + n_period
    out = np.zeros(len(base) + (jammer.cycles - 1) * shift, dtype=np.complex128)
    for q in range(jammer.cycles):
        out[q * shift : q * shift + len(base)] += base
    return out


def compose_train(pulse_set: PulseSet, scenario: Scenario) -> ReceivedTrain:
    """Lay echo, jamming and noise into the per-pulse receive windows."""
    g = pulse_set.grid
    fs = g.sample_rate
    t_lo, t_hi = scenario.window
    if t_hi <= t_lo:
        raise WindowTooSmall(f"window {scenario.window} is empty")
    if not t_lo <= scenario.target.delay < t_hi:
        raise WindowTooSmall(
            f"target delay {scenario.target.delay} outside window {scenario.window}"
        )
    n_win = int(round((t_hi - t_lo) * fs)) + g.samples_per_pulse
    x = np.zeros((scenario.cpi, n_win), dtype=np.complex128)

    echo = pulse_set
    if scenario.target.doppler_hz:
        echo = apply_doppler(pulse_set, scenario.target.doppler_hz, scenario.pri)
    if pulse_set.n_pulses < scenario.cpi:
        raise ConfigError(
            f"pulse set has {pulse_set.n_pulses} pulses, CPI needs {scenario.cpi}"
        )

    def add(signal: np.ndarray, delay: float, amp: float, label: str):
        i0 = int(round((delay - t_lo) * fs))
        j0, j1 = max(i0, 0), min(i0 + signal.shape[-1], n_win)
        if j1 > j0:
            clipped = signal[..., j0 - i0 : j1 - i0]
            x[:, j0:j1] += amp * clipped
        if i0 + signal.shape[-1] > n_win and np.any(signal[..., n_win - i0 :]):
            warnings.warn(
                f"{label} extends past the receive window; clipped",
                ReplayOverrun,
            )

    add(echo.pulses[: scenario.cpi], scenario.target.delay,
        scenario.signal_amplitude, "echo")

    if scenario.jammer is not None:
        jam = np.stack([
            synthesize_jamming(pulse_set.pulses[i], fs, scenario.jammer)
            for i in range(scenario.cpi)
        ])
        add(jam, scenario.jammer.delay, scenario.jamming_amplitude, "replay")

    if scenario.noise_sigma > 0:
        rng = np.random.default_rng([scenario.seed, _STREAM_NOISE])
        noise = rng.standard_normal((scenario.cpi, n_win, 2))
        x += (noise[..., 0] + 1j * noise[..., 1]) * (scenario.noise_sigma / np.sqrt(2))

    return ReceivedTrain(samples=x, window_start=t_lo, grid=g, scenario=scenario)


def compensation_rng(seed: int, t_index: int) -> np.random.Generator:
    """Generator for synthetic-noise fill, keyed to the absolute delay bin."""
    return np.random.default_rng([seed, _STREAM_COMPENSATION, t_index])


def table1_scenario(**overrides) -> Scenario:
    """The reference scenario used throughout: S-band pulse-Doppler radar
    with a 160-chip code at 10 MHz sampling and a repeated-replay jammer."""
    grid = SamplingGrid(sample_rate=10e6, chip_width=1e-6, n_chips=160)
    base = dict(
        grid=grid,
        cpi=256,
        pri=480e-6,
        target=TargetParams(delay=0.0, snr_db=0.0),
        jammer=JammerParams(
            mode=JamMode.ISRRJ, delay=20e-6, jnr_db=20.0,
            sampling_period=32e-6, epsilon=0.1, repeats=9, cycles=5,
        ),
        noise_sigma=1.0,
        window=(-40e-6, 360e-6),
        seed=0,
    )
    base.update(overrides)
    return Scenario(**base)


# --- JSON form: microsecond fields, mirroring the tabulated parameters ---

def load_scenario(path) -> Scenario:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read scenario: {e}") from e
    return scenario_from_dict(raw)


def scenario_from_dict(raw: dict) -> Scenario:
    try:
        fs = float(raw["fs_hz"])
        grid = SamplingGrid(
            sample_rate=fs,
            chip_width=float(raw.get("t_c_us", 1.0)) * 1e-6,
            n_chips=int(raw.get("n_chips", 160)),
        )
        if "mode" in raw:
            mode_name = str(raw["mode"]).lower()
            try:
                mode = JamMode(mode_name)
            except ValueError:
                raise ConfigError(f"unknown jamming mode {mode_name!r}") from None
            jammer = JammerParams(
                mode=mode,
                delay=float(raw["tau_j_us"]) * 1e-6,
                jnr_db=float(raw["jnr_db"]),
                sampling_period=float(raw["T_J_us"]) * 1e-6,
                epsilon=float(raw["epsilon"]),
                repeats=int(raw.get("P", 1)),
                cycles=int(raw.get("Q", 1)),
            )
        else:
            jammer = None
        window = tuple(
            float(v) * 1e-6 for v in raw.get("window_us", (-40.0, 360.0))
        )
        return Scenario(
            grid=grid,
            cpi=int(raw["cpi"]),
            pri=float(raw["pri_us"]) * 1e-6,
            target=TargetParams(
                delay=float(raw["tau_s_us"]) * 1e-6,
                snr_db=float(raw["snr_db"]),
                doppler_hz=float(raw.get("doppler_hz", 0.0)),
            ),
            jammer=jammer,
            noise_sigma=float(raw.get("noise_sigma", 1.0)),
            window=window,  # type: ignore[arg-type]
            seed=int(raw.get("seed", 0)),
            carrier_hz=float(raw.get("f0_hz", 2e9)),
            waveform_kind=str(raw.get("waveform", "wdcss")),
            lfm_bandwidth=float(raw.get("lfm_bandwidth_hz", 2e6)),
            wdamf_overrides=dict(raw.get("wdamf", {})),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"bad scenario field: {e}") from e


def save_scenario(scenario: Scenario, path) -> None:
    j = scenario.jammer
    raw = {
        "pri_us": scenario.pri * 1e6,
        "cpi": scenario.cpi,
        "tau_s_us": scenario.target.delay * 1e6,
        "snr_db": scenario.target.snr_db,
        "doppler_hz": scenario.target.doppler_hz,
        "fs_hz": scenario.grid.sample_rate,
        "t_c_us": scenario.grid.chip_width * 1e6,
        "n_chips": scenario.grid.n_chips,
        "noise_sigma": scenario.noise_sigma,
        "window_us": [scenario.window[0] * 1e6, scenario.window[1] * 1e6],
        "seed": scenario.seed,
        "f0_hz": scenario.carrier_hz,
        "waveform": scenario.waveform_kind,
        "lfm_bandwidth_hz": scenario.lfm_bandwidth,
    }
    if j is not None:
        raw.update({
            "tau_j_us": j.delay * 1e6,
            "mode": j.mode.value,
            "T_J_us": j.sampling_period * 1e6,
            "epsilon": j.epsilon,
            "P": j.repeats,
            "Q": j.cycles,
            "jnr_db": j.jnr_db,
        })
    if scenario.wdamf_overrides:
        raw["wdamf"] = scenario.wdamf_overrides
    Path(path).write_text(json.dumps(raw, indent=2) + "\n")
