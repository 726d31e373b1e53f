#!/usr/bin/env python3
"""Calibrate the eight built-in scenario profiles and freeze them as package
data.  Deterministic: rerunning reproduces the same constants bit for bit.

Usage:
    python scripts/calibrate_profiles.py [--check]

With --check, recalibrates and compares against the shipped data file
instead of overwriting it.
"""

import argparse
import json
import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from mmwchan import profiles as pr

DATA_PATH = (
    pathlib.Path(__file__).resolve().parents[1]
    / "src"
    / "mmwchan"
    / "data"
    / "builtin_profiles.json"
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--check", action="store_true")
    args = parser.parse_args()

    entries = []
    for scenario, bw in pr.PROFILE_KEYS:
        t0 = time.time()
        profile = pr.calibrate_profile(scenario, bw)
        print(f"{profile.profile_id}: calibrated in {time.time() - t0:.1f}s")
        for p in pr.PARAMETERS:
            print(
                f"    {p:20s} {profile.spec_for(p)}  "
                f"residual={profile.residuals[p]:.4g}"
            )
            print(f"        [{profile.provenance[p]}]")
        entries.append(pr.profile_to_jsonable(profile))

    payload = json.dumps({"schema_version": 1, "profiles": entries}, indent=2, sort_keys=True)
    if args.check:
        current = DATA_PATH.read_text()
        if json.loads(current) != json.loads(payload):
            print("MISMATCH: recalibration differs from shipped data")
            return 1
        print("OK: recalibration matches shipped data")
        return 0
    DATA_PATH.parent.mkdir(parents=True, exist_ok=True)
    DATA_PATH.write_text(payload + "\n")
    print(f"wrote {DATA_PATH}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
