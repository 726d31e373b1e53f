"""Command-line surface: generate corpora, fit traces, validate and
calibrate profiles, compute channel metrics.

Exit codes: 0 success, 1 validation failure, 2 input error, 3 I/O error.
Every stochastic command writes a ``<out>.manifest.json`` next to its output
recording the arguments and seed; corpus files themselves carry no
timestamps, so identical seeds reproduce them byte for byte regardless of
the ``MMWCHAN_WORKERS`` parallelism level.
"""

from __future__ import annotations

import concurrent.futures
import csv
import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from . import channel as ch
from . import io as mio
from . import metrics as mx
from . import profiles as pr
from . import trace as tr

EXIT_VALIDATION = 1
EXIT_INPUT = 2
EXIT_IO = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_profile(profile_id, profile_file) -> pr.ScenarioProfile:
    if profile_file:
        try:
            return mio.read_profile_json(profile_file)
        except FileNotFoundError:
            _fail(EXIT_INPUT, f"profile file not found: {profile_file}")
        except (json.JSONDecodeError, KeyError, ValueError) as err:
            _fail(EXIT_INPUT, f"invalid profile file: {err}")
    if not profile_id:
        _fail(EXIT_INPUT, "one of --profile or --profile-file is required")
    try:
        return pr.profile_by_id(profile_id)
    except KeyError as err:
        _fail(EXIT_INPUT, str(err.args[0]))


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("MMWCHAN_WORKERS", "1")))
    except ValueError:
        return 1


@click.group()
@click.version_option(version=__version__)
def main():
    """Synthesize and analyze statistical 60 GHz industrial channels."""


@main.command()
@click.option("--profile", "profile_id", help="built-in profile id, e.g. tunnel-7")
@click.option("--profile-file", type=click.Path(), help="profile JSON file")
@click.option("--n", "count", type=int, required=True, help="number of realizations")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["taps-jsonl", "realizations-json"]),
    default="taps-jsonl",
    show_default=True,
)
def generate(profile_id, profile_file, count, seed, out, fmt):
    """Generate a synthetic channel corpus from a scenario profile."""
    profile = _load_profile(profile_id, profile_file)
    if count < 0:
        _fail(EXIT_INPUT, "--n must be >= 0")
    try:
        if fmt == "taps-jsonl":
            _write_taps_corpus(profile, seed, count, out)
        else:
            _write_realizations_json(profile, seed, count, out)
    except OSError as err:
        _fail(EXIT_IO, f"cannot write {out}: {err}")
    mio.RunManifest(
        command="generate",
        arguments={
            "profile": profile.profile_id,
            "n": count,
            "seed": seed,
            "format": fmt,
        },
        seed=seed,
        outputs=[str(out)],
        tool_version=__version__,
    ).write(mio.manifest_path_for(out))
    click.echo(f"wrote {count} realizations to {out}")


def _capture_lines(profile, seed, start, stop):
    scenario = (
        profile.scenario.value
        if isinstance(profile.scenario, pr.Scenario)
        else str(profile.scenario)
    )
    taps = ch.batch_tap_arrays(profile, seed, stop - start, base_stream=start)
    lines = []
    for offset, (delays, amps) in enumerate(taps):
        j = start + offset
        capture = tr.TapSeries(
            delays=delays,
            amplitudes=amps,
            location_id=f"capture-{j:06d}",
            beam_id=j % 32,
            scenario=scenario,
            beamwidth_deg=profile.beamwidth_deg,
            capture_index=j,
        )
        lines.append(json.dumps(mio.tap_series_to_jsonable(capture)))
    return lines


def _write_taps_corpus(profile, seed, count, out):
    workers = _workers()
    chunk = max(1, -(-count // max(workers, 1)))
    ranges = [(s, min(s + chunk, count)) for s in range(0, count, chunk)]
    with open(out, "w") as fh:
        if workers > 1 and len(ranges) > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(_capture_lines, profile, seed, lo, hi)
                    for lo, hi in ranges
                ]
                for future in futures:  # submission order keeps output canonical
                    for line in future.result():
                        fh.write(line + "\n")
        else:
            for lo, hi in ranges:
                for line in _capture_lines(profile, seed, lo, hi):
                    fh.write(line + "\n")


def _write_realizations_json(profile, seed, count, out):
    realizations = []
    for j in range(count):
        r = ch.generate_realization(profile, seed, stream=j)
        realizations.append(
            {
                "stream": j,
                "clusters": [
                    {
                        "T": c.T,
                        "A": c.A,
                        "paths": [{"tau": p.tau, "alpha": p.alpha} for p in c.paths],
                    }
                    for c in r.clusters
                ],
            }
        )
    doc = {
        "schema_version": 1,
        "profile": profile.profile_id,
        "seed": seed,
        "count": count,
        "realizations": realizations,
    }
    Path(out).write_text(json.dumps(doc) + "\n")


def _read_corpus_or_fail(path):
    try:
        captures = mio.read_taps_jsonl(path)
    except FileNotFoundError:
        _fail(EXIT_INPUT, f"input file not found: {path}")
    except mio.TraceFormatError as err:
        _fail(EXIT_INPUT, str(err))
    if not captures:
        _fail(EXIT_INPUT, f"{path} contains no captures")
    return captures


def _partitioned(captures, gap_threshold, noise_floor):
    clustered, keys = [], []
    for capture in captures:
        floor = noise_floor if noise_floor else tr.default_noise_floor(capture)
        try:
            kept = tr.threshold_taps(capture, floor)
        except tr.EmptySeriesError:
            continue
        clustered.append(tr.partition_clusters(kept, gap_threshold))
        keys.append((capture.location_id, capture.beam_id))
    return clustered, keys


@main.command()
@click.option("--in", "in_path", type=click.Path(), required=True)
@click.option(
    "--gap-threshold",
    type=float,
    default=pr.DEFAULT_TAP_GRID * tr.DEFAULT_GAP_THRESHOLD_FACTOR,
    show_default=True,
    help="cluster partition gap in seconds (environment dependent)",
)
@click.option("--noise-floor", type=float, default=None, help="absolute amplitude floor")
@click.option("--out", type=click.Path(), required=True, help="fit report JSON path")
@click.option("--cdf-out", type=click.Path(), default=None, help="empirical CDF CSV path")
def fit(in_path, gap_threshold, noise_floor, out, cdf_out):
    """Extract model parameters from a trace corpus and fit families."""
    captures = _read_corpus_or_fail(in_path)
    clustered, keys = _partitioned(captures, gap_threshold, noise_floor)
    if not clustered:
        _fail(EXIT_INPUT, "no capture survived the noise floor")
    samples = tr.extract_parameters(clustered, mode="per-beam", group_keys=keys)
    report = tr.fit_report(
        samples,
        scenario=captures[0].scenario,
        beamwidth_deg=captures[0].beamwidth_deg,
    )
    doc = {
        "schema_version": 1,
        "scenario": report.scenario,
        "beamwidth_deg": report.beamwidth_deg,
        "gap_threshold": gap_threshold,
        "parameters": {
            f.parameter: {
                "status": f.status,
                "sample_count": f.sample_count,
                "quartiles": list(f.quartiles) if f.quartiles else None,
                "chosen_family": f.chosen.family.value if f.chosen else None,
                "chosen_params": f.chosen.named_params() if f.chosen else None,
                "ks_scores": {fam.value: score for fam, score in f.scores.items()},
            }
            for f in report.fits
        },
    }
    try:
        Path(out).write_text(json.dumps(doc, indent=2) + "\n")
        _write_cdf_csv(cdf_out or str(Path(out).with_suffix("")) + "_cdf.csv", samples)
    except OSError as err:
        _fail(EXIT_IO, f"cannot write output: {err}")
    for f in report.fits:
        fam = f.chosen.family.value if f.chosen else "-"
        click.echo(f"{f.parameter:20s} n={f.sample_count:<8d} {f.status:18s} {fam}")


def _write_cdf_csv(path, samples: tr.ParameterSamples):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["parameter", "value", "empirical_cdf"])
        for parameter in tr.FITTED_PARAMETERS:
            x = np.sort(samples.sample_for(parameter))
            n = x.size
            for i, v in enumerate(x, start=1):
                writer.writerow([parameter, repr(float(v)), repr(i / n)])


@main.command()
@click.option("--profile", "profile_id", required=True)
@click.option("--n", "count", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--tolerance", type=float, default=0.15, show_default=True)
@click.option("--count-tolerance", type=float, default=1.0, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="write the table as JSON")
def validate(profile_id, count, seed, tolerance, count_tolerance, out):
    """Compare simulated quartiles of a profile against its targets."""
    try:
        profile = pr.profile_by_id(profile_id)
    except KeyError as err:
        _fail(EXIT_INPUT, str(err.args[0]))
    rows = pr.validate_profile(
        profile, n=count, seed=seed, tolerance=tolerance, count_tolerance=count_tolerance
    )
    header = f"{'parameter':20s} {'target':>30s} {'simulated':>33s} pass"
    click.echo(header)
    for row in rows:
        t = "/".join(f"{v:.3g}" for v in row["target"])
        s = "/".join(f"{v:.3g}" for v in row["simulated"])
        click.echo(f"{row['parameter']:20s} {t:>30s} {s:>33s} {'ok' if row['passed'] else 'FAIL'}")
    doc = {
        "schema_version": 1,
        "profile": profile.profile_id,
        "n": count,
        "seed": seed,
        "tolerance": tolerance,
        "count_tolerance": count_tolerance,
        "rows": rows,
        "passed": all(r["passed"] for r in rows),
    }
    if out:
        try:
            Path(out).write_text(json.dumps(doc, indent=2) + "\n")
            mio.RunManifest(
                command="validate",
                arguments={
                    "profile": profile.profile_id,
                    "n": count,
                    "seed": seed,
                    "tolerance": tolerance,
                },
                seed=seed,
                outputs=[str(out)],
                tool_version=__version__,
            ).write(mio.manifest_path_for(out))
        except OSError as err:
            _fail(EXIT_IO, f"cannot write {out}: {err}")
    if not doc["passed"]:
        sys.exit(EXIT_VALIDATION)


@main.command()
@click.option(
    "--scenario",
    type=click.Choice([s.value for s in pr.Scenario]),
    required=True,
)
@click.option("--beamwidth", type=int, required=True)
@click.option("--targets-file", type=click.Path(), default=None)
@click.option("--out", type=click.Path(), required=True, help="profile JSON path")
def calibrate(scenario, beamwidth, targets_file, out):
    """Calibrate a scenario profile against quartile targets."""
    scen = pr.Scenario(scenario)
    targets = None
    if targets_file:
        try:
            raw = json.loads(Path(targets_file).read_text())
            targets = {}
            for parameter in pr.PARAMETERS:
                entry = raw[parameter]
                triple = (
                    [entry["q1"], entry["q2"], entry["q3"]]
                    if isinstance(entry, dict)
                    else list(entry)
                )
                targets[parameter] = pr.QuartileTarget(
                    *[float(v) for v in triple],
                    discretized=parameter in pr.COUNT_PARAMETERS,
                )
        except FileNotFoundError:
            _fail(EXIT_INPUT, f"targets file not found: {targets_file}")
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as err:
            _fail(EXIT_INPUT, f"invalid targets file: {err}")
    else:
        if (scen, beamwidth) not in pr.PROFILE_KEYS:
            _fail(EXIT_INPUT, f"no published targets for {scenario} at {beamwidth} degrees")
    try:
        profile = pr.calibrate_profile(scen, beamwidth, targets=targets)
    except pr.CalibrationError as err:
        _fail(EXIT_VALIDATION, f"calibration failed: {err}")
    try:
        mio.write_profile_json(out, profile)
        mio.RunManifest(
            command="calibrate",
            arguments={
                "scenario": scenario,
                "beamwidth": beamwidth,
                "targets_file": targets_file,
                "calibration_seed": pr.CALIBRATION_SEED,
            },
            seed=pr.CALIBRATION_SEED,
            outputs=[str(out)],
            tool_version=__version__,
        ).write(mio.manifest_path_for(out))
    except OSError as err:
        _fail(EXIT_IO, f"cannot write {out}: {err}")
    for parameter in pr.PARAMETERS:
        click.echo(
            f"{parameter:20s} {profile.spec_for(parameter)} "
            f"residual={profile.residuals[parameter]:.4g}"
        )


@main.command()
@click.option("--in", "in_path", type=click.Path(), required=True)
@click.option("--bandwidth", type=float, default=2.5e9, show_default=True, help="Hz")
@click.option("--n-points", type=int, default=512, show_default=True)
@click.option(
    "--gap-threshold",
    type=float,
    default=pr.DEFAULT_TAP_GRID * tr.DEFAULT_GAP_THRESHOLD_FACTOR,
    show_default=True,
)
@click.option("--coherence-threshold", type=float, default=0.9, show_default=True)
@click.option("--out", type=click.Path(), required=True, help="CSV path")
def metrics(in_path, bandwidth, n_points, gap_threshold, coherence_threshold, out):
    """Per-capture delay spread, coherence bandwidth, peak-to-average."""
    captures = _read_corpus_or_fail(in_path)
    try:
        with open(out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                [
                    "capture_index",
                    "location",
                    "beam_id",
                    "rms_delay_spread_s",
                    "coherence_bandwidth_hz",
                    "peak_to_average_mean",
                ]
            )
            for capture in captures:
                spread = mx.rms_delay_spread(capture)
                fr = mx.frequency_response(capture, bandwidth, n_points)
                cbw = mx.coherence_bandwidth(fr, coherence_threshold)
                clusters = tr.partition_clusters(capture, gap_threshold)
                ratios = [
                    max(p.alpha for p in c.paths)
                    / (sum(p.alpha for p in c.paths) / len(c.paths))
                    for c in clusters
                ]
                writer.writerow(
                    [
                        capture.capture_index,
                        capture.location_id,
                        capture.beam_id,
                        repr(spread),
                        repr(cbw),
                        repr(float(np.mean(ratios))),
                    ]
                )
    except OSError as err:
        _fail(EXIT_IO, f"cannot write {out}: {err}")
    click.echo(f"wrote metrics for {len(captures)} captures to {out}")


if __name__ == "__main__":
    main()
