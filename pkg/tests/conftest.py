import json
from ipaddress import IPv4Address, IPv4Network

import pytest

from schemas.params import Params
from schemas.scenario import Scenario
from services.scenario_generator import ScenarioGenerator

START = 1325376000
TARGET = IPv4Address("193.0.14.129")
PREFIX = IPv4Network("193.0.14.0/24")

PATH_A = (1103, 25152)
PATH_B = (3356, 25152)

EVENT_SPACING = 4 * 3600
# Off the traceroute (1200 s) and ping (240 s) grids
EVENT_OFFSET = 1000
# Bumps of mixed size, as seen on real RTT series
EVENT_MAGNITUDES = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 12.0, 8.0]


def correlated_scenario(events=20, lag=0, seed=7, probes=2, collector_peers=2, decoys=3, **overrides):
    """True-prefix route changes co-injected with RTT shifts, plus decoy prefixes"""
    values = dict(
        seed=seed,
        start=START,
        duration=events * EVENT_SPACING,
        events=ScenarioGenerator.periodic_events(
            events, START + EVENT_OFFSET, EVENT_SPACING, [PATH_A, PATH_B], EVENT_MAGNITUDES, lag
        ),
        decoy_prefixes=decoys,
        probes=probes,
        collector_peers=collector_peers,
        target=TARGET,
        prefix=PREFIX,
        initial_as_path=PATH_A,
    )
    values.update(overrides)
    return Scenario(**values)


def write_ndjson(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    return path


@pytest.fixture
def params():
    return Params(elbow_slope_threshold=10000, time_shift=0, tolerance_window=960)


@pytest.fixture(scope="session")
def correlated_data():
    return ScenarioGenerator.simulate(correlated_scenario())


@pytest.fixture(scope="session")
def scenario_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("scenario")
    ScenarioGenerator.generate(correlated_scenario(events=8, probes=2, collector_peers=1, decoys=1), out)
    return out


@pytest.fixture
def ndjson(tmp_path):
    """Write records to a temporary NDJSON file and return its path"""
    def write(name, records):
        return write_ndjson(tmp_path / name, records)
    return write
