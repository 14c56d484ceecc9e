"""Adaptive matched filtering in the waveform domain.

The coherence curve y(mu) at one delay is a noisy cumulative integral whose
slope jumps when a repeater slice enters or leaves the correlation.  A bank
of three Kalman models tracks it per real channel:

* quiescent: the slope drifts slowly;
* release:   the slope collapses to zero (a slice or the pulse just ended);
* onset:     the slope jumps, seeded at ``impulse_gain`` times the running
             mean slope and then corrected by the same innovation.

The interacting-multiple-model mixer weighs the three by their residual
likelihoods, so slice edges resolve within a couple of samples while the
quiescent model keeps the estimate quiet elsewhere.  The fused slope
estimate feeds a duty-cycle threshold; samples the repeater reached are
integrated as synthetic noise instead of data.

The per-sample recursion is compiled (see ``_imm_channel``); everything
above it is plain numpy.
"""

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numba
import numpy as np

from .errors import CompensationShortfall, ConfigError, NumericalDivergence
from .scene import ReceivedTrain, Scenario, compensation_rng
from .waveform import PulseSet
from .wdfilter import RangeProfile, WaveformSnapshot, response_block


@dataclass
class ImmConfig:
    """Knobs of the three-model estimator.

    ``impulse_gain`` seeds the onset model's jump at a multiple of the
    running mean slope; it must stay at or above the reciprocal of the
    duty-ratio bound so a jam slice can always out-jump the echo level.
    """

    p0: float = 0.05                      # quiescent -> jump transition prob
    diag_floor: float = 1e-6              # replaces exact zeros in the matrix
    impulse_gain: float = 2.0             # onset jump, multiples of mean slope
    process_noise_scale: float = 1e-4     # quiescent slope drift, fraction^2
    measurement_noise_scale: float = 1.0  # times the per-step noise variance
    initial_model_weights: Tuple[float, float, float] = (0.9, 0.05, 0.05)

    def __post_init__(self):
        if not 0.0 < self.p0 < 0.5:
            raise ConfigError(f"p0 must lie in (0, 1/2), got {self.p0}")
        if self.diag_floor <= 0 or self.diag_floor >= 0.1:
            raise ConfigError("diag_floor must be a small positive probability")
        w = self.initial_model_weights
        if len(w) != 3 or abs(sum(w) - 1.0) > 1e-9 or min(w) < 0:
            raise ConfigError("initial_model_weights must be 3 values summing to 1")
        if self.process_noise_scale <= 0 or self.measurement_noise_scale < 0:
            raise ConfigError("noise scales must be positive")

    def transition_matrix(self) -> np.ndarray:
        """Jump models always hand back to quiescent; zeros get the floor."""
        p = np.array([
            [1.0 - 2.0 * self.p0, self.p0, self.p0],
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
        ])
        p[p == 0.0] = self.diag_floor
        return p / p.sum(axis=1, keepdims=True)


@dataclass
class ThresholdConfig:
    """Duty-ratio bound and the protective interval around detections."""

    epsilon0: float = 0.5    # largest duty ratio the threshold must cover
    gamma: int = 10          # protective half-width, samples; one chip at the
                             # reference grid so edge leakage cannot straddle
                             # a detection

    def __post_init__(self):
        if not 0.0 < self.epsilon0 <= 1.0:
            raise ConfigError(f"epsilon0 must lie in (0, 1], got {self.epsilon0}")
        if self.gamma < 0:
            raise ConfigError("gamma must be a nonnegative sample count")

    @property
    def lam(self) -> float:
        return 1.0 / self.epsilon0


def validate_pair(imm: ImmConfig, thr: ThresholdConfig) -> None:
    """The jump seed must reach past the threshold scale (gain >= 1/eps0)."""
    if imm.impulse_gain < thr.lam - 1e-12:
        raise ConfigError(
            f"impulse_gain {imm.impulse_gain} below 1/epsilon0 = {thr.lam}"
        )


def configs_from_scenario(sc: Scenario) -> Tuple[ImmConfig, ThresholdConfig]:
    """Materialize configs, applying the scenario's override block."""
    imm_kw, thr_kw = {}, {}
    imm_fields = {
        "p0", "diag_floor", "impulse_gain", "process_noise_scale",
        "measurement_noise_scale", "initial_model_weights",
    }
    thr_fields = {"epsilon0", "gamma"}
    for key, val in sc.wdamf_overrides.items():
        if key in imm_fields:
            imm_kw[key] = tuple(val) if key == "initial_model_weights" else val
        elif key in thr_fields:
            thr_kw[key] = val
        else:
            raise ConfigError(f"unknown adaptive-filter override {key!r}")
    imm = ImmConfig(**imm_kw)
    thr = ThresholdConfig(**thr_kw)
    validate_pair(imm, thr)
    return imm, thr


@dataclass
class ImmState:
    """One channel's filter state: five components per model, mixed weights.

    The state vector is (y, w, release impulse, onset impulse, walk); the
    impulse entries hold the last applied slope correction of each jump
    model and the walk entry carries the integrated-noise drift.
    """

    mean: np.ndarray                      # (5,)
    covariance: np.ndarray                # (5, 5)
    weights: np.ndarray                   # (3,)


@dataclass
class LabeledSets:
    """Partition of the mu grid into effective and contaminated samples."""

    u_s: np.ndarray          # indices integrated as data
    u_j: np.ndarray          # indices replaced by compensation
    threshold: float

    def __post_init__(self):
        if len(np.intersect1d(self.u_s, self.u_j)) > 0:
            raise ConfigError("labeled sets must be disjoint")


# state layout inside the kernel
_Y, _W, _DN, _DP, _G = 0, 1, 2, 3, 4


@numba.njit(cache=True)
def _imm_channel(z, dmu, r_var, q1, q23, q_g, pin_gain, p_tr, w0, x_init, p_init):
    """Forward pass of the three-model filter over one real channel.

    Returns (y_hat, w_hat, ok).  ``q1``/``q23`` are per-step slope noise
    variances for the quiescent and jump models; ``pin_gain`` scales the
    onset impulse seeded from the running mean slope.
    """
    n = z.shape[0]
    y_hat = np.zeros(n)
    w_hat = np.zeros(n)

    x = np.zeros((3, 5))
    p = np.zeros((3, 5, 5))
    for j in range(3):
        x[j] = x_init
        for d in range(5):
            p[j, d, d] = p_init[d]
    mu = w0.copy()

    xm = np.zeros((3, 5))
    pm = np.zeros((3, 5, 5))
    fp = np.zeros((5, 5))
    lik = np.zeros(3)
    cbar = np.zeros(3)
    fused_y = 0.0

    for k in range(n):
        # ---- mix the model-conditioned estimates -----------------------
        for j in range(3):
            cbar[j] = 0.0
            for i in range(3):
                cbar[j] += p_tr[i, j] * mu[i]
        for j in range(3):
            for d in range(5):
                acc = 0.0
                for i in range(3):
                    acc += p_tr[i, j] * mu[i] * x[i, d]
                xm[j, d] = acc / cbar[j]
            for a in range(5):
                for b in range(5):
                    acc = 0.0
                    for i in range(3):
                        da = x[i, a] - xm[j, a]
                        db = x[i, b] - xm[j, b]
                        acc += p_tr[i, j] * mu[i] * (p[i, a, b] + da * db)
                    pm[j, a, b] = acc / cbar[j]

        # onset impulse: pinned to a multiple of the running mean slope
        pin = 0.0
        if k > 0:
            pin = pin_gain * fused_y / (k * dmu)

        for j in range(3):
            xj = xm[j]
            pj = pm[j]

            if j == 2:
                # the pin is an exogenous known input: no covariance
                xj[_DP] = pin
                for d in range(5):
                    pj[_DP, d] = 0.0
                    pj[d, _DP] = 0.0

            # ---- propagate through the model's transition ---------------
            # rows of F differ per model; products written out directly
            if j == 0:
                # y' = y + dmu w + dmu g ; w' = w ; dn' = 0 ; dp' = dp ; g' = 0
                y_new = xj[_Y] + dmu * xj[_W] + dmu * xj[_G]
                w_new = xj[_W]
                dn_new = 0.0
                dp_new = xj[_DP]
            elif j == 1:
                # release: slope resets, its value recorded in dn
                y_new = xj[_Y] + dmu * xj[_W] + dmu * xj[_G]
                w_new = 0.0
                dn_new = -xj[_W]
                dp_new = 0.0
            else:
                # onset: jump lands first, then integrates over this step
                y_new = xj[_Y] + dmu * (xj[_W] + xj[_DP]) + dmu * xj[_G]
                w_new = xj[_W] + xj[_DP]
                dn_new = 0.0
                dp_new = 0.0
            xj[_Y], xj[_W], xj[_DN], xj[_DP] = y_new, w_new, dn_new, dp_new
            xj[_G] = 0.0

            # fp = F pj, then pj' = fp F^T, using the same sparse rows
            for col in range(5):
                if j == 0:
                    fp[_Y, col] = pj[_Y, col] + dmu * pj[_W, col] + dmu * pj[_G, col]
                    fp[_W, col] = pj[_W, col]
                    fp[_DN, col] = 0.0
                    fp[_DP, col] = pj[_DP, col]
                elif j == 1:
                    fp[_Y, col] = pj[_Y, col] + dmu * pj[_W, col] + dmu * pj[_G, col]
                    fp[_W, col] = 0.0
                    fp[_DN, col] = -pj[_W, col]
                    fp[_DP, col] = 0.0
                else:
                    fp[_Y, col] = (pj[_Y, col] + dmu * pj[_W, col]
                                   + dmu * pj[_DP, col] + dmu * pj[_G, col])
                    fp[_W, col] = pj[_W, col] + pj[_DP, col]
                    fp[_DN, col] = 0.0
                    fp[_DP, col] = 0.0
                fp[_G, col] = 0.0
            for row in range(5):
                if j == 0:
                    y_c = fp[row, _Y] + dmu * fp[row, _W] + dmu * fp[row, _G]
                    w_c = fp[row, _W]
                    dn_c = 0.0
                    dp_c = fp[row, _DP]
                elif j == 1:
                    y_c = fp[row, _Y] + dmu * fp[row, _W] + dmu * fp[row, _G]
                    w_c = 0.0
                    dn_c = -fp[row, _W]
                    dp_c = 0.0
                else:
                    y_c = (fp[row, _Y] + dmu * fp[row, _W]
                           + dmu * fp[row, _DP] + dmu * fp[row, _G])
                    w_c = fp[row, _W] + fp[row, _DP]
                    dn_c = 0.0
                    dp_c = 0.0
                pj[row, _Y] = y_c
                pj[row, _W] = w_c
                pj[row, _DN] = dn_c
                pj[row, _DP] = dp_c
                pj[row, _G] = 0.0

            # ---- process noise ------------------------------------------
            q = q1[k] if j == 0 else q23[k]
            if j == 1:
                # reset leaves slope and step independent
                pj[_Y, _Y] += q * dmu * dmu
                pj[_W, _W] += q
                pj[_DN, _DN] += q
            else:
                # jump-then-integrate couples the slope noise into y
                pj[_Y, _Y] += q * dmu * dmu
                pj[_Y, _W] += q * dmu
                pj[_W, _Y] += q * dmu
                pj[_W, _W] += q
            pj[_G, _G] += q_g

            # ---- scalar measurement update ------------------------------
            s_inn = pj[_Y, _Y] + r_var
            inn = z[k] - xj[_Y]
            if s_inn <= 0.0 or not np.isfinite(s_inn):
                return y_hat, w_hat, False
            arg = 0.5 * inn * inn / s_inn
            lik[j] = np.exp(-min(arg, 700.0)) / np.sqrt(2.0 * np.pi * s_inn)
            gain_scale = inn / s_inn
            for d in range(5):
                x[j, d] = xj[d] + pj[d, _Y] * gain_scale
            for a in range(5):
                for b in range(5):
                    p[j, a, b] = pj[a, b] - pj[a, _Y] * pj[b, _Y] / s_inn
            # keep the covariance symmetric against roundoff
            for a in range(5):
                for b in range(a + 1, 5):
                    v = 0.5 * (p[j, a, b] + p[j, b, a])
                    p[j, a, b] = v
                    p[j, b, a] = v
                if p[j, a, a] < 0.0:
                    p[j, a, a] = 0.0

        # ---- model probabilities and the fused output -------------------
        total = 0.0
        for j in range(3):
            lik[j] *= cbar[j]
            total += lik[j]
        if total > 0.0 and np.isfinite(total):
            for j in range(3):
                mu[j] = lik[j] / total
        else:
            for j in range(3):
                mu[j] = cbar[j]

        fy = 0.0
        fw = 0.0
        for j in range(3):
            fy += mu[j] * x[j, _Y]
            fw += mu[j] * x[j, _W]
        if not (np.isfinite(fy) and np.isfinite(fw)):
            return y_hat, w_hat, False
        y_hat[k] = fy
        w_hat[k] = fw
        fused_y = fy

    return y_hat, w_hat, True


def _channel_setup(z: np.ndarray, w_chan: np.ndarray, dmu: float, cfg: ImmConfig):
    """Per-step noise schedules and the initial state for one real channel.

    The slope noise scales with the running mean slope so the filter stays
    scale free; a robust estimate of the per-sample noise floors it, and the
    largest observed step floors the jump models so an onset is never ruled
    out by a quiet start.
    """
    n = z.shape[0]
    d = np.diff(w_chan)
    if d.size:
        med = np.median(d)
        s_w = 1.4826 * np.median(np.abs(d - med)) / np.sqrt(2.0)
    else:
        s_w = 0.0
    wscale = np.max(np.abs(w_chan)) if n else 0.0

    level = np.abs(z) / (dmu * np.arange(1, n + 1))
    floor = max(s_w, 1e-3 * wscale, 1e-300)
    level = np.maximum(level, floor)
    q1 = cfg.process_noise_scale * level**2
    q23 = np.maximum(level, wscale) ** 2

    r_var = cfg.measurement_noise_scale * (s_w * dmu) ** 2
    # regularization keeps the innovation variance positive when noise free
    r_var += (1e-9 * max(np.max(np.abs(z)), dmu)) ** 2
    q_g = s_w**2

    x0 = np.zeros(5)
    x0[_W] = z[0] / dmu if n else 0.0
    p0 = np.array([
        10.0 * r_var,
        10.0 * r_var / dmu**2,
        wscale**2,
        wscale**2,
        q_g,
    ])
    return q1, q23, q_g, r_var, x0, p0


def _estimate_complex(
    w_row: np.ndarray, dmu: float, cfg: ImmConfig
) -> Tuple[np.ndarray, np.ndarray]:
    """Run both real channels over one response row; fused (w_hat, y_hat)."""
    z_c = np.cumsum(w_row) * dmu
    p_tr = cfg.transition_matrix()
    w0 = np.asarray(cfg.initial_model_weights, dtype=float)
    outs = []
    for chan in (np.real, np.imag):
        z = np.ascontiguousarray(chan(z_c))
        wc = np.ascontiguousarray(chan(w_row))
        q1, q23, q_g, r_var, x0, p0 = _channel_setup(z, wc, dmu, cfg)
        y_hat, w_hat, ok = _imm_channel(
            z, dmu, r_var, q1, q23, q_g, cfg.impulse_gain, p_tr, w0, x0, p0
        )
        if not ok:
            raise NumericalDivergence("filter state left the finite range")
        outs.append((w_hat, y_hat))
    w_hat = outs[0][0] + 1j * outs[1][0]
    y_hat = outs[0][1] + 1j * outs[1][1]
    return w_hat, y_hat


def imm_estimate(
    snapshot: WaveformSnapshot, cfg: Optional[ImmConfig] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Fused slope and coherence estimates over one snapshot's mu grid."""
    cfg = cfg or ImmConfig()
    return _estimate_complex(snapshot.response, snapshot.grid.dt, cfg)


def adaptive_threshold(y_end: complex, cfg: ThresholdConfig, pulse_width: float) -> float:
    """Duty-bound multiple of the mean energy growth rate |y(end)| / T."""
    return cfg.lam * abs(y_end) / pulse_width


def label_sets(w_hat: np.ndarray, e_hat: float, gamma: int) -> LabeledSets:
    """Split the mu grid: above-threshold samples, widened by gamma each way."""
    hot = np.abs(w_hat) > e_hat
    dil = hot.copy()
    for s in range(1, gamma + 1):
        dil[:-s] |= hot[s:]
        dil[s:] |= hot[:-s]
    idx = np.arange(len(w_hat))
    return LabeledSets(u_s=idx[~dil], u_j=idx[dil], threshold=e_hat)


def estimate_sigma(
    w_row: np.ndarray,
    w_hat: np.ndarray,
    u_s: np.ndarray,
    n_pulses: int,
    fallback: float,
    min_samples: int = 16,
) -> float:
    """Noise level per pulse from the effective-set residuals."""
    if len(u_s) < min_samples:
        return fallback
    resid = w_row[u_s] - w_hat[u_s]
    return float(np.std(resid)) / np.sqrt(n_pulses)


def integrate_output(
    snapshot: WaveformSnapshot,
    sets: LabeledSets,
    sigma_est: float,
    rng: np.random.Generator,
    n_pulses: int,
) -> complex:
    """Integrate data over the effective set, synthetic noise elsewhere."""
    dmu = snapshot.grid.dt
    out = np.sum(snapshot.response[sets.u_s]) * dmu
    n_j = len(sets.u_j)
    if n_j:
        scale = sigma_est * np.sqrt(n_pulses / 2.0)
        draw = rng.standard_normal(2 * n_j)
        out += (np.sum(draw[:n_j]) + 1j * np.sum(draw[n_j:])) * scale * dmu
    return complex(out)


def _profile_shell(train: ReceivedTrain, pulse_set: PulseSet):
    n_p = pulse_set.grid.samples_per_pulse
    n_t = train.n_window - n_p + 1
    delays = train.window_start + np.arange(n_t) * train.grid.dt
    return n_t, delays


def _run_rows(
    train: ReceivedTrain,
    pulse_set: PulseSet,
    imm_cfg: ImmConfig,
    thr_cfg: ThresholdConfig,
    first: int,
    count: int,
    baseline: bool,
):
    """Adaptive output for a block of consecutive delays; returns (values, shortfalls)."""
    grid = pulse_set.grid
    dmu = grid.dt
    n_p = grid.samples_per_pulse
    d = pulse_set.n_pulses
    t_width = grid.pulse_width
    sc = train.scenario

    rows = response_block(train, pulse_set, first, count)
    out = np.empty(count, dtype=np.complex128)
    shortfalls = 0
    for j in range(count):
        w_row = rows[j]
        w_hat, y_hat = _estimate_complex(w_row, dmu, imm_cfg)
        e_hat = adaptive_threshold(y_hat[-1], thr_cfg, t_width)
        sets = label_sets(w_hat, e_hat, thr_cfg.gamma)
        rng = compensation_rng(sc.seed, first + j)
        if baseline:
            val, short = _baseline_value(w_row, w_hat, sets, dmu, rng)
            shortfalls += short
        else:
            sigma = estimate_sigma(w_row, w_hat, sets.u_s, d, sc.noise_sigma)
            snap = WaveformSnapshot(
                delay=0.0, response=w_row, coherence=np.empty(0), grid=grid
            )
            val = integrate_output(snap, sets, sigma, rng, d)
        out[j] = val
    return out, shortfalls


def _baseline_value(
    w_row: np.ndarray,
    w_hat: np.ndarray,
    sets: LabeledSets,
    dmu: float,
    rng: np.random.Generator,
) -> Tuple[complex, int]:
    """Reuse a random contiguous stretch of the effective set as filler.

    Contiguity is in the ordering of the effective set, so a set split by
    several jam slices still provides a full-length stretch.
    """
    u_s, u_j = sets.u_s, sets.u_j
    val = np.sum(w_row[u_s]) * dmu
    n_fill = len(u_j)
    short = 0
    if n_fill:
        take = min(n_fill, len(u_s))
        if take < n_fill:
            short = 1
        if take:
            start = int(rng.integers(0, len(u_s) - take + 1))
            val += np.sum(w_hat[u_s[start : start + take]]) * dmu
    return complex(val), short


def _assemble_profile(
    train: ReceivedTrain,
    pulse_set: PulseSet,
    imm_cfg: Optional[ImmConfig],
    thr_cfg: Optional[ThresholdConfig],
    baseline: bool,
    workers: Optional[int],
    chunk: int,
) -> RangeProfile:
    sc = train.scenario
    if imm_cfg is None and thr_cfg is None:
        imm_cfg, thr_cfg = configs_from_scenario(sc)
    else:
        imm_cfg = imm_cfg or ImmConfig()
        thr_cfg = thr_cfg or ThresholdConfig()
        validate_pair(imm_cfg, thr_cfg)

    n_t, delays = _profile_shell(train, pulse_set)
    values = np.empty(n_t, dtype=np.complex128)
    spans = [(f, min(chunk, n_t - f)) for f in range(0, n_t, chunk)]
    shortfalls = 0

    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [
                pool.submit(
                    _run_rows, train, pulse_set, imm_cfg, thr_cfg, f, c, baseline
                )
                for f, c in spans
            ]
            for (f, c), fut in zip(spans, futs):
                vals, short = fut.result()
                values[f : f + c] = vals
                shortfalls += short
    else:
        for f, c in spans:
            vals, short = _run_rows(
                train, pulse_set, imm_cfg, thr_cfg, f, c, baseline
            )
            values[f : f + c] = vals
            shortfalls += short

    if shortfalls:
        warnings.warn(
            f"effective set shorter than the fill length at {shortfalls} delays",
            CompensationShortfall,
        )
    reference = sc.signal_amplitude * pulse_set.n_pulses * pulse_set.grid.pulse_width
    return RangeProfile(
        delays=delays,
        values=values,
        grid=train.grid,
        reference=reference,
        kind="baseline_wdamf" if baseline else "wdamf",
    )


def wdamf_profile(
    train: ReceivedTrain,
    pulse_set: PulseSet,
    imm_cfg: Optional[ImmConfig] = None,
    thr_cfg: Optional[ThresholdConfig] = None,
    workers: Optional[int] = None,
    chunk: int = 256,
) -> RangeProfile:
    """Adaptive profile with synthetic-noise compensation at every delay."""
    return _assemble_profile(
        train, pulse_set, imm_cfg, thr_cfg, False, workers, chunk
    )


def baseline_wdamf(
    train: ReceivedTrain,
    pulse_set: PulseSet,
    imm_cfg: Optional[ImmConfig] = None,
    thr_cfg: Optional[ThresholdConfig] = None,
    workers: Optional[int] = None,
    chunk: int = 256,
) -> RangeProfile:
    """Comparison variant: contaminated samples refilled from the estimate."""
    return _assemble_profile(
        train, pulse_set, imm_cfg, thr_cfg, True, workers, chunk
    )
