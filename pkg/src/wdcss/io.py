"""Delimited-text writers for every artifact the pipeline emits.

All writers use fixed format strings so a given array serializes to the same
bytes on every run; reproducibility checks diff these files directly.  Delay
axes are written in microseconds, dB columns are normalized by the caller.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .metrics import ProfileMetrics, SweepResult
from .waveform import PulseSet
from .wdfilter import RangeProfile

_T_FMT = "%.4f"      # microseconds on a 0.1 us grid
_C_FMT = "%.9e"      # complex parts
_DB_FMT = "%.4f"


def _rows_to_file(path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_profile_csv(path, profile: RangeProfile) -> None:
    """(t_us, re, im, mag_db) per evaluated delay."""
    db = profile.magnitude_db()
    rows = (
        (
            _T_FMT % (profile.delays[i] * 1e6),
            _C_FMT % profile.values[i].real,
            _C_FMT % profile.values[i].imag,
            _DB_FMT % db[i],
        )
        for i in range(len(profile.delays))
    )
    _rows_to_file(path, ("t_us", "re", "im", "mag_db"), rows)


def read_profile_csv(path):
    """(t_us, re, im, mag_db) arrays from a profile file."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    return data["t_us"], data["re"], data["im"], data["mag_db"]


def write_surface_csv(path, delays, dopplers, magnitude_db) -> None:
    """(t_us, fd_hz, mag_db) in delay-major order."""
    rows = (
        (
            _T_FMT % (delays[a] * 1e6),
            "%.4f" % dopplers[b],
            _DB_FMT % magnitude_db[a, b],
        )
        for a in range(len(delays))
        for b in range(len(dopplers))
    )
    _rows_to_file(path, ("t_us", "fd_hz", "mag_db"), rows)


def write_kappa_csv(path, delays, kappa, kappa_jam: Optional[np.ndarray] = None):
    """(t_us, kappa[, kappa_jam]) occupancy fractions per delay."""
    header = ["t_us", "kappa"]
    if kappa_jam is not None:
        header.append("kappa_jam")
    rows = []
    for i in range(len(delays)):
        row = [_T_FMT % (delays[i] * 1e6), "%.6f" % kappa[i]]
        if kappa_jam is not None:
            row.append("%.6f" % kappa_jam[i])
        rows.append(row)
    _rows_to_file(path, header, rows)


def write_pulses_csv(path, pulse_set: PulseSet) -> None:
    """(pulse_index, sample_index, re, im) for every transmit sample."""
    rows = (
        (i, k, _C_FMT % pulse_set.pulses[i, k].real, _C_FMT % pulse_set.pulses[i, k].imag)
        for i in range(pulse_set.n_pulses)
        for k in range(pulse_set.pulses.shape[1])
    )
    _rows_to_file(path, ("pulse_index", "sample_index", "re", "im"), rows)


def write_sweep_csv(path, result: SweepResult) -> None:
    """(axis, value, trial, mll_db, sll_db, pslr_db) per trial."""
    rows = (
        (
            result.axis,
            "%.6f" % r.value,
            r.trial,
            _DB_FMT % r.metrics.mll_db,
            _DB_FMT % r.metrics.sll_db,
            _DB_FMT % r.metrics.pslr_db,
        )
        for r in result.records
    )
    _rows_to_file(path, ("axis", "value", "trial", "mll_db", "sll_db", "pslr_db"), rows)


def write_sweep_summary_csv(path, result: SweepResult) -> None:
    """(axis, value, mean_pslr_db, std_pslr_db, trials) per axis point."""
    rows = (
        (result.axis, "%.6f" % value, _DB_FMT % mean, _DB_FMT % std, trials)
        for value, mean, std, trials in result.points()
    )
    _rows_to_file(
        path, ("axis", "value", "mean_pslr_db", "std_pslr_db", "trials"), rows
    )


def write_metrics_json(path, metrics: ProfileMetrics) -> None:
    Path(path).write_text(json.dumps(asdict(metrics), indent=2) + "\n")
