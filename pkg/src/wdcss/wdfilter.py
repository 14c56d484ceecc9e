"""Waveform-domain view of the matched filter.

The matched-filter output at delay t is an integral over the pulse support.
Keeping the integrand resolved in intra-pulse time mu instead of collapsing
it gives a 2-D response w(t, mu) whose partial integral y(t, mu) grows toward
the usual range profile as mu sweeps the pulse.  Everything downstream
(occupancy maps, the adaptive filter, the repeater prediction) works on that
resolved view, so the conventions live here:

* the train buffer extends one pulse width past the profile window, so every
  profile delay t has the full mu in [0, T) span available;
* mu is reported centered, ``k*dt - T/2``, matching the CSV layout;
* profiles and partial integrals carry the dt factor, snapshots of w do not.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import GridMismatch, OutOfWindow, WindowTooSmall
from .scene import JammerParams, ReceivedTrain, synthesize_jamming
from .waveform import PulseSet, SamplingGrid


@dataclass
class RangeProfile:
    """Coherently summed matched-filter output over a span of delays."""

    delays: np.ndarray        # seconds, one entry per evaluated delay
    values: np.ndarray        # complex output, includes the dt factor
    grid: SamplingGrid
    reference: Optional[float] = None   # analytic peak magnitude, if known
    kind: str = "mf"          # which integration rule produced the values

    def magnitude_db(self) -> np.ndarray:
        ref = self.reference if self.reference else np.abs(self.values).max()
        mag = np.abs(self.values) / ref
        return 20.0 * np.log10(np.maximum(mag, 1e-300))


@dataclass
class WaveformSnapshot:
    """w and its running integral y at one profile delay."""

    delay: float
    response: np.ndarray      # w(mu_k), no dt factor
    coherence: np.ndarray     # y(mu_k) = cumsum(w) * dt
    grid: SamplingGrid

    @property
    def mu(self) -> np.ndarray:
        n = self.grid.samples_per_pulse
        return np.arange(n) * self.grid.dt - 0.5 * self.grid.pulse_width


def _check_pair(train: ReceivedTrain, pulse_set: PulseSet) -> None:
    if train.samples.shape[0] != pulse_set.n_pulses:
        raise GridMismatch(
            f"train has {train.samples.shape[0]} pulses, "
            f"reference set has {pulse_set.n_pulses}"
        )
    if train.grid.samples_per_pulse != pulse_set.grid.samples_per_pulse or not np.isclose(
        train.grid.dt, pulse_set.grid.dt
    ):
        raise GridMismatch("train and reference set use different sampling grids")


def matched_filter(train: ReceivedTrain, pulse_set: PulseSet) -> RangeProfile:
    """Pulse-compressed, pulse-summed profile over the train's full window.

    Computed as one FFT correlation per pulse; the products are accumulated
    in the frequency domain so only a single inverse transform is needed.
    """
    _check_pair(train, pulse_set)
    x = train.samples
    s = pulse_set.pulses
    n_p = s.shape[1]
    n_t = train.n_window - n_p + 1
    if n_t < 1:
        raise WindowTooSmall("train shorter than one pulse")

    n_fft = 1 << int(np.ceil(np.log2(train.n_window + n_p)))
    acc = np.zeros(n_fft, dtype=np.complex128)
    for i in range(x.shape[0]):
        acc += np.fft.fft(x[i], n_fft) * np.conj(np.fft.fft(s[i], n_fft))
    corr = np.fft.ifft(acc)[:n_t]

    grid = train.grid
    delays = train.window_start + np.arange(n_t) * grid.dt
    sc = train.scenario
    reference = sc.signal_amplitude * x.shape[0] * grid.pulse_width
    return RangeProfile(delays=delays, values=corr * grid.dt, grid=grid,
                        reference=reference)


def waveform_response(
    train: ReceivedTrain, pulse_set: PulseSet, delay: float
) -> WaveformSnapshot:
    """Resolve the matched-filter integrand at a single profile delay."""
    _check_pair(train, pulse_set)
    n_p = pulse_set.grid.samples_per_pulse
    idx = train.delay_to_index(delay)
    if idx < 0 or idx + n_p > train.n_window:
        raise OutOfWindow(
            f"delay {delay * 1e6:.3f} us outside the evaluable window"
        )
    w = np.einsum(
        "ik,ik->k", train.samples[:, idx : idx + n_p], np.conj(pulse_set.pulses)
    )
    return WaveformSnapshot(
        delay=delay,
        response=w,
        coherence=np.cumsum(w) * train.grid.dt,
        grid=train.grid,
    )


def response_block(
    train: ReceivedTrain, pulse_set: PulseSet, first_index: int, count: int
) -> np.ndarray:
    """w rows for ``count`` consecutive delays starting at ``first_index``.

    One matrix product builds every pulse-summed product x(u) conj(s_i) the
    block needs; the rows are then diagonal gathers out of it.  Returns an
    array of shape (count, samples_per_pulse) without the dt factor.
    """
    _check_pair(train, pulse_set)
    n_p = pulse_set.grid.samples_per_pulse
    n_t = train.n_window - n_p + 1
    if first_index < 0 or count < 1 or first_index + count > n_t:
        raise OutOfWindow(
            f"block [{first_index}, {first_index + count}) exceeds {n_t} delays"
        )
    stop = first_index + count + n_p - 1
    g = train.samples[:, first_index:stop].T @ np.conj(pulse_set.pulses)
    rows = np.arange(count)[:, None] + np.arange(n_p)[None, :]
    return g[rows, np.arange(n_p)[None, :]]


def _self_response_row(pulses: np.ndarray, shift: int) -> np.ndarray:
    """Pulse-summed self response at an integer sample shift, zeros outside."""
    n_p = pulses.shape[1]
    w = np.zeros(n_p, dtype=np.complex128)
    if abs(shift) >= n_p:
        return w
    if shift >= 0:
        w[: n_p - shift] = np.einsum(
            "ik,ik->k", pulses[:, shift:], np.conj(pulses[:, : n_p - shift])
        )
    else:
        w[-shift:] = np.einsum(
            "ik,ik->k", pulses[:, : n_p + shift], np.conj(pulses[:, -shift:])
        )
    return w


def kappa(
    pulse_set: PulseSet, delays: Sequence[float], rel_tol: float = 1e-6
) -> np.ndarray:
    """Occupied fraction of the pulse support at each delay.

    A mu sample counts as occupied when the noise-free self response exceeds
    ``rel_tol`` times the zero-delay peak.  Coded sets collapse to zero one
    chip out; a chirp decays linearly over the full pulse width.
    """
    s = pulse_set.pulses
    ref = np.abs(_self_response_row(s, 0)).max()
    dt = pulse_set.grid.dt
    out = np.empty(len(delays))
    for j, d in enumerate(delays):
        w = _self_response_row(s, int(round(d / dt)))
        out[j] = np.mean(np.abs(w) > rel_tol * ref)
    return out


def jam_occupancy(
    pulse_set: PulseSet,
    jammer: JammerParams,
    delays: Sequence[float],
    rel_tol: float = 1e-6,
) -> np.ndarray:
    """Fraction of the pulse support the repeater reaches at each delay.

    Noise-free and amplitude-free: the threshold is relative to the largest
    jamming response over the requested delays, so the curve only reflects
    where the replayed slices land in mu.
    """
    grid = pulse_set.grid
    n_p = grid.samples_per_pulse
    dt = grid.dt
    bufs = [
        synthesize_jamming(pulse_set.pulses[i], grid.sample_rate, jammer)
        for i in range(pulse_set.n_pulses)
    ]
    n_buf = max(len(b) for b in bufs)

    shifts = [int(round((d - jammer.delay) / dt)) for d in delays]
    rows = np.zeros((len(delays), n_p), dtype=np.complex128)
    for j, m in enumerate(shifts):
        # jamming starts at the jammer delay: buffer index = m + k
        k = np.arange(n_p)
        src = m + k
        valid = (src >= 0) & (src < n_buf)
        if not valid.any():
            continue
        for i, b in enumerate(bufs):
            v = valid & (src < len(b))
            rows[j, v] += b[src[v]] * np.conj(pulse_set.pulses[i, v])
    peak = np.abs(rows).max()
    if peak == 0.0:
        return np.zeros(len(delays))
    return np.mean(np.abs(rows) > rel_tol * peak, axis=1)


def _correlation_bank(
    modulated: np.ndarray, reference: np.ndarray, n_fft: int
) -> np.ndarray:
    """sum_i corr_i[j] = sum_i sum_k modulated[i, j+k] conj(reference[i, k])."""
    acc = np.zeros(n_fft, dtype=np.complex128)
    for i in range(reference.shape[0]):
        acc += np.fft.fft(modulated[i], n_fft) * np.conj(
            np.fft.fft(reference[i], n_fft)
        )
    return np.fft.ifft(acc)


def ambiguity(
    pulse_set: PulseSet,
    delays: Sequence[float],
    dopplers: Sequence[float],
    pri: float,
    inter_pulse: bool = True,
) -> np.ndarray:
    """Delay-Doppler response of the pulse set, peak-normalized to one.

    Entry [a, b] is the summed response at ``dopplers[a]``, ``delays[b]``.
    With ``inter_pulse`` set, each pulse also carries the slow-time phase
    ``exp(2j pi fd i PRI)``, which is what narrows the Doppler axis to the
    1/(D*PRI) scale; without it the surface is the single-pulse response.
    """
    s = pulse_set.pulses
    d, n_p = s.shape
    dt = pulse_set.grid.dt
    mu = np.arange(n_p) * dt
    n_fft = 1 << int(np.ceil(np.log2(2 * n_p)))
    shifts = np.array([int(round(t / dt)) for t in delays])

    norm = np.abs(np.sum(np.abs(s) ** 2))
    out = np.empty((len(dopplers), len(shifts)), dtype=np.complex128)
    for a, fd in enumerate(dopplers):
        ramp = np.exp(2j * np.pi * fd * mu)
        if inter_pulse:
            slow = np.exp(2j * np.pi * fd * pri * np.arange(d))
        else:
            slow = np.ones(d)
        # bank[j] = sum_i slow_i sum_k s_i[j+k] ramp[j+k] conj(s_i[k]); the
        # surface conjugates the shifted copy instead, which is the same
        # numbers read at the negated lag
        corr = _correlation_bank(s * ramp * slow[:, None], s, n_fft)
        valid = np.abs(shifts) < n_p
        vals = np.zeros(len(shifts), dtype=np.complex128)
        vals[valid] = corr[(-shifts[valid]) % n_fft]
        out[a] = vals
    return out / norm


def isdrj_analytic_mf(
    pulse_set: PulseSet,
    jammer: JammerParams,
    delays: Sequence[float],
    q_range: int = 10,
    amplitude: float = 1.0,
) -> np.ndarray:
    """Closed-form matched-filter response to direct interrupted repeating.

    The capture gate is a duty-epsilon square wave, so the replayed signal is
    the reference waveform times a Fourier comb: each harmonic q contributes
    ``eps sinc(q eps)`` of a Doppler-shifted copy at offset q/T_J.  The gate
    is anchored at the capture instant, which adds the half-slice phase
    ``exp(-1j pi q eps)`` relative to a centered gate.  Truncating at
    ``q_range`` keeps all harmonics that carry visible false targets.
    """
    s = pulse_set.pulses
    n_p = s.shape[1]
    dt = pulse_set.grid.dt
    mu = np.arange(n_p) * dt
    f_rep = 1.0 / jammer.sampling_period
    eps = jammer.epsilon
    n_fft = 1 << int(np.ceil(np.log2(2 * n_p)))

    base = jammer.delay + jammer.slice_width
    shifts = np.array([int(round((t - base) / dt)) for t in delays])
    valid = np.abs(shifts) < n_p

    out = np.zeros(len(delays), dtype=np.complex128)
    for q in range(-q_range, q_range + 1):
        coeff = eps * np.sinc(q * eps) * np.exp(-1j * np.pi * q * eps)
        ramp = np.exp(2j * np.pi * q * f_rep * mu)
        corr = _correlation_bank(s * ramp, s, n_fft)
        out[valid] += coeff * corr[shifts[valid] % n_fft]
    return out * dt * amplitude
