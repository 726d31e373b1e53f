#!/usr/bin/env python3
"""Family-recovery experiment: generate corpora from built-in profiles, push
them through the full trace pipeline (export -> partition -> extract -> fit),
and count how often the selected family matches the catalogued one.

Usage:
    python scripts/family_recovery.py [--trials 100] [--n 400] [--profiles tunnel-20,...]
"""

import argparse
import collections
import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from mmwchan import channel as ch
from mmwchan import profiles as pr
from mmwchan import trace as tr

FIT_SUBSAMPLE = 3000


def run_trial(profile, seed, n_captures, gap_threshold, rng, floor_frac=0.0):
    taps = ch.batch_tap_arrays(profile, seed, n_captures)
    clustered = []
    for delays, amps in taps:
        if floor_frac > 0:
            keep = amps >= amps.max() * floor_frac
            delays, amps = delays[keep], amps[keep]
        series = tr.TapSeries(delays=delays, amplitudes=amps)
        clustered.append(tr.partition_clusters(series, gap_threshold))
    samples = tr.extract_parameters(clustered, mode="pool")
    capped = tr.ParameterSamples(
        **{
            name: _cap(getattr(samples, name), rng)
            for name in (
                "num_clusters",
                "intercluster_delays",
                "cluster_amplitudes",
                "paths_per_cluster",
                "path_amplitudes",
                "intra_path_delays",
            )
        }
    )
    return tr.fit_report(capped)


def _cap(x, rng):
    if x.size <= FIT_SUBSAMPLE:
        return x
    idx = rng.choice(x.size, size=FIT_SUBSAMPLE, replace=False)
    return x[idx]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--n", type=int, default=400, help="captures per trial")
    parser.add_argument("--profiles", default="", help="comma-separated profile ids")
    parser.add_argument(
        "--grid-multiple",
        type=float,
        default=1.0,
        help="partition threshold in tap-grid periods (1 = generator resolution)",
    )
    parser.add_argument("--floor-frac", type=float, default=0.0)
    args = parser.parse_args()

    registry = pr.builtin_profiles()
    wanted = [p for p in args.profiles.split(",") if p]
    for (scenario, bw), profile in registry.items():
        if wanted and profile.profile_id not in wanted:
            continue
        gap_threshold = profile.tap_grid * args.grid_multiple
        tallies = {p: collections.Counter() for p in tr.FITTED_PARAMETERS}
        t0 = time.time()
        for trial in range(args.trials):
            rng = np.random.default_rng(trial)
            report = run_trial(profile, seed=1000 + trial, n_captures=args.n,
                               gap_threshold=gap_threshold, rng=rng,
                               floor_frac=args.floor_frac)
            for f in report.fits:
                key = f.chosen.family.value if f.chosen else f.status
                tallies[f.parameter][key] += 1
        dt = time.time() - t0
        print(f"\n=== {profile.profile_id} ({args.trials} trials, {dt:.0f}s) ===")
        for parameter in tr.FITTED_PARAMETERS:
            expected = pr.family_assignment(scenario, bw, parameter)
            exp_name = expected.value if expected else "(open)"
            counts = ", ".join(f"{k}:{v}" for k, v in tallies[parameter].most_common())
            print(f"  {parameter:20s} expect {exp_name:18s} got {counts}")


if __name__ == "__main__":
    main()
