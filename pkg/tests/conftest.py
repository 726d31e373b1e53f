import numpy as np
import pytest

from mmwchan import distributions as d
from mmwchan import profiles as pr


@pytest.fixture(scope="session")
def registry():
    return pr.builtin_profiles()


@pytest.fixture(scope="session")
def pm_profile():
    """Fully degenerate profile: one cluster, one path, fixed amplitudes."""
    return pr.ScenarioProfile(
        scenario="pointmass-test",
        beamwidth_deg=20,
        num_clusters=d.point_mass(1),
        intercluster_delay=d.point_mass(5e-9),
        cluster_amplitude=d.point_mass(0.05),
        paths_per_cluster=d.point_mass(1),
        path_amplitude=d.point_mass(0.05),
    )


@pytest.fixture(scope="session")
def wide_gap_profile():
    """Stochastic test profile whose cluster gaps dwarf the partition
    threshold, so tap round trips never merge clusters."""
    return pr.ScenarioProfile(
        scenario="wide-gap-test",
        beamwidth_deg=20,
        num_clusters=d.gev(0.2, 0.8, 2.5),
        intercluster_delay=d.gpd(0.1, 2e-8, 4e-8),
        cluster_amplitude=d.gev(0.3, 0.01, 0.04),
        paths_per_cluster=d.gpd(-0.3, 2.5, 1.0),
        path_amplitude=d.gev(0.3, 0.012, 0.038),
    )
