"""Command-line front end: scenario in, delimited artifacts out.

Every subcommand writes its files into ``--out`` plus a run manifest with
the invocation, seed, version and wall-clock time.  Data files use fixed
numeric formats, so identical scenario + seed reruns are byte-identical;
the manifest carries the timing and is the one file exempt from that.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__, codeset, io, metrics, wdamf, wdfilter
from .errors import ConfigError, TheoremOneViolation, WdcssError
from .scene import JamMode, compose_train, load_scenario, table1_scenario

_WORKERS_ENV = "WDCSS_WORKERS"


@dataclass
class RunManifest:
    """What produced this output directory, and from where."""

    command: str
    scenario_path: Optional[str]
    output_dir: str
    master_seed: Optional[int]
    tool_version: str
    duration_s: float


def _write_manifest(out_dir: Path, command: str, scenario_path, seed, t0: float):
    manifest = RunManifest(
        command=command,
        scenario_path=str(scenario_path) if scenario_path else None,
        output_dir=str(out_dir),
        master_seed=seed,
        tool_version=__version__,
        duration_s=round(time.time() - t0, 3),
    )
    (out_dir / "manifest.json").write_text(
        json.dumps(asdict(manifest), indent=2) + "\n"
    )


def _out_dir(arg: str) -> Path:
    path = Path(arg)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _parse_values(text: str) -> List[float]:
    """Either 'start:stop:step' (inclusive stop) or a comma list."""
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] == 0:
                raise ValueError
            start, stop, step = parts
            return [float(v) for v in np.arange(start, stop + step / 2, step)]
        return [float(p) for p in text.split(",")]
    except ValueError:
        raise ConfigError(
            f"values must be start:stop:step or a comma list, got {text!r}"
        ) from None


def _workers(args) -> Optional[int]:
    if getattr(args, "workers", None):
        return args.workers
    env = os.environ.get(_WORKERS_ENV)
    return int(env) if env else None


def cmd_gen_codes(args) -> int:
    out = _out_dir(args.out)
    t0 = time.time()
    depth = args.r if args.r is not None else metrics._cascade_depth(args.d, args.d)
    structure = codeset.cascade(codeset.build_delta(*codeset.golay_seed()), depth)
    rng = np.random.default_rng(args.seed)
    block = int(rng.integers(structure.n_candidates))
    width = structure.blocks.shape[2]
    if args.n > width:
        raise TheoremOneViolation(
            f"{args.n} chips requested from a {width}-pulse candidate"
        )
    cols = np.sort(rng.choice(width, size=args.n, replace=False)).tolist()
    matrix = codeset.select_codeset(structure, block, cols)
    if matrix.n_pulses != args.d:
        raise WdcssError(
            f"cascade depth {depth} yields {matrix.n_pulses} pulses, not {args.d}"
        )
    report = codeset.verify_wdc(matrix)
    codeset.write_code_matrix(out / "codes.txt", matrix)
    (out / "verify_report.json").write_text(
        json.dumps({**asdict(report), "passed": report.passed}, indent=2) + "\n"
    )
    _write_manifest(out, "gen-codes", None, args.seed, t0)
    if not report.passed:
        raise WdcssError("generated matrix failed verification")
    return 0


def _emit_profile(out: Path, name: str, profile) -> None:
    io.write_profile_csv(out / f"{name}_profile.csv", profile)


def cmd_simulate(args) -> int:
    out = _out_dir(args.out)
    t0 = time.time()
    sc = load_scenario(args.scenario)
    if args.waveform:
        sc = replace(sc, waveform_kind=args.waveform)
    workers = _workers(args)
    filter_kind = args.filter
    if filter_kind == "auto":
        filter_kind = "wdamf" if sc.waveform_kind == "wdcss" else "baseline"

    ps = metrics.build_pulse_set(sc)
    train = compose_train(ps, sc)
    mf = wdfilter.matched_filter(train, ps)
    _emit_profile(out, "mf", mf)
    if filter_kind == "mf":
        selected = mf
    else:
        runner = wdamf.wdamf_profile if filter_kind == "wdamf" \
            else wdamf.baseline_wdamf
        selected = runner(train, ps, workers=workers)
        _emit_profile(out, filter_kind, selected)
    io.write_metrics_json(out / "metrics.json", metrics.compute_metrics(selected, sc))
    _write_manifest(out, "simulate", args.scenario, sc.seed, t0)
    return 0


_AXIS_NAMES = {"snr": "SNR_DB", "jnr": "JNR_DB", "eta": "ETA"}


def cmd_sweep(args) -> int:
    out = _out_dir(args.out)
    t0 = time.time()
    sc = load_scenario(args.scenario)
    if args.waveform:
        sc = replace(sc, waveform_kind=args.waveform)
    result = metrics.monte_carlo_sweep(
        sc,
        _AXIS_NAMES[args.axis],
        _parse_values(args.values),
        trials=args.trials,
        parallel=_workers(args),
    )
    io.write_sweep_csv(out / "sweep.csv", result)
    io.write_sweep_summary_csv(out / "sweep_summary.csv", result)
    _write_manifest(out, "sweep", args.scenario, sc.seed, t0)
    return 0


def cmd_ambiguity(args) -> int:
    out = _out_dir(args.out)
    t0 = time.time()
    sc = table1_scenario(waveform_kind=args.waveform)
    ps = metrics.build_pulse_set(sc)
    delays = [v * 1e-6 for v in _parse_values(args.t_range)]
    dopplers = _parse_values(args.fd_range)
    surf = wdfilter.ambiguity(ps, delays, dopplers, sc.pri)
    mag_db = 20.0 * np.log10(np.maximum(np.abs(surf.T), 1e-300))
    io.write_surface_csv(out / "surface.csv", np.array(delays), np.array(dopplers), mag_db)
    _write_manifest(out, "ambiguity", None, None, t0)
    return 0


def cmd_kappa(args) -> int:
    out = _out_dir(args.out)
    t0 = time.time()
    sc = table1_scenario(waveform_kind=args.waveform)
    ps = metrics.build_pulse_set(sc)
    g = sc.grid
    n = g.samples_per_pulse
    delays = np.arange(-n, n + 1) * g.dt
    occupancy = wdfilter.kappa(ps, delays)
    overlay = None
    if args.jammer_mode:
        # jamming support mirrored about the jammer delay
        tau_j = sc.jammer.delay
        overlay = np.zeros_like(occupancy)
        src = np.round((tau_j - delays) / g.dt).astype(int) + n
        ok = (src >= 0) & (src < len(delays))
        overlay[ok] = occupancy[src[ok]]
    io.write_kappa_csv(out / "kappa.csv", delays, occupancy, overlay)
    _write_manifest(out, "kappa", None, None, t0)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wdcss",
        description="Complementary signal sets and waveform-domain filtering",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-codes", help="generate and verify a code matrix")
    gen.add_argument("--d", type=int, required=True, help="pulses per set")
    gen.add_argument("--n", type=int, required=True, help="chips per pulse")
    gen.add_argument("--r", type=int, default=None, help="cascade depth override")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen_codes)

    sim = sub.add_parser("simulate", help="run one scenario through a filter")
    sim.add_argument("scenario", help="scenario JSON path")
    sim.add_argument("--waveform", choices=("wdcss", "lfm", "golay"), default=None)
    sim.add_argument("--filter", choices=("auto", "mf", "wdamf", "baseline"),
                     default="auto")
    sim.add_argument("--workers", type=int, default=None)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    swp = sub.add_parser("sweep", help="Monte-Carlo sweep over one axis")
    swp.add_argument("scenario", help="scenario JSON path")
    swp.add_argument("--axis", choices=tuple(_AXIS_NAMES), required=True)
    swp.add_argument("--values", required=True,
                     help="start:stop:step (inclusive) or comma list")
    swp.add_argument("--trials", type=int, default=20)
    swp.add_argument("--waveform", choices=("wdcss", "lfm", "golay"), default=None)
    swp.add_argument("--workers", type=int, default=None)
    swp.add_argument("--out", required=True)
    swp.set_defaults(func=cmd_sweep)

    amb = sub.add_parser("ambiguity", help="delay-Doppler surface")
    amb.add_argument("--waveform", choices=("wdcss", "lfm", "golay"),
                     default="wdcss")
    amb.add_argument("--t-range", default="-5:5:0.1",
                     help="delay span in microseconds, start:stop:step")
    amb.add_argument("--fd-range", default="-200:200:5",
                     help="Doppler span in Hz, start:stop:step")
    amb.add_argument("--out", required=True)
    amb.set_defaults(func=cmd_ambiguity)

    kap = sub.add_parser("kappa", help="pulse-support occupancy vs delay")
    kap.add_argument("--waveform", choices=("wdcss", "lfm", "golay"),
                     default="wdcss")
    kap.add_argument("--jammer-mode", choices=tuple(m.name for m in JamMode),
                     default=None)
    kap.add_argument("--out", required=True)
    kap.set_defaults(func=cmd_kappa)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except WdcssError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
