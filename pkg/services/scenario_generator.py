"""
Scenario Generator Service

Synthetic RTT, BGP and traceroute data with known ground truth. Route changes
on the target prefix shift the RTT mean and the traceroute path; decoy
prefixes receive independent Poisson-timed updates that correlate with nothing.
"""

import json
import logging
from ipaddress import IPv4Address, IPv4Network
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence, Set, Tuple, Union

import numpy as np
from pydantic import ValidationError

from schemas.bgp import BgpUpdate
from schemas.measurements import RttMeasurement, TracerouteMeasurement
from schemas.scenario import CorrelatedUpdate, GroundTruth, Scenario, ScenarioEvent
from services.ingest import Ingest, PathLike, PrefixRow
from utils.constants import ScenarioFiles
from utils.exceptions import ScenarioError

logger = logging.getLogger(__name__)

# Every AS seen in a generated traceroute owns one /16 of this block
AS_ADDRESS_BLOCK = IPv4Network("11.0.0.0/8")
HOPS_PER_AS = 2
PROBE_LAN_HOPS = (IPv4Address("192.168.1.1"), IPv4Address("10.0.0.1"))

# Decoy prefixes come from the benchmarking range, well away from any target
DECOY_BLOCK = IPv4Network("198.18.0.0/15")
DECOY_UPSTREAMS = (174, 3356)
DECOY_ORIGIN_BASE = 64500

# Spread of the two non-minimum ping values above the minimum, in ms
PING_SPREAD = 1.0


class SyntheticData(NamedTuple):
    measurements: List[RttMeasurement]
    updates: List[BgpUpdate]
    traceroutes: List[TracerouteMeasurement]
    prefix_rows: List[PrefixRow]
    ixp_asns: Set[int]
    ground_truth: GroundTruth


class ScenarioGenerator:
    """Build synthetic measurement files from a Scenario"""

    @staticmethod
    def periodic_events(
        count: int,
        start: int,
        spacing: int,
        paths: Sequence[Sequence[int]],
        delta: Union[float, Sequence[float]],
        lag: int = 0
    ) -> List[ScenarioEvent]:
        """
        `count` evenly spaced events. Event i announces paths[(i + 1) % len(paths)]
        (so paths[0] is the route in place before the first event) and moves the
        RTT mean up on even i and back down on odd i.

        `delta` is one magnitude, or a list of magnitudes cycled over the
        up/down pairs of events.
        """
        if count < 0 or spacing <= 0:
            raise ScenarioError("periodic events need a non-negative count and a positive spacing")
        if len(paths) < 2:
            raise ScenarioError("periodic events alternate between at least two AS paths")
        magnitudes = [delta] if isinstance(delta, (int, float)) else list(delta)
        if not magnitudes:
            raise ScenarioError("periodic events need at least one RTT delta")

        events = []
        for i in range(count):
            magnitude = magnitudes[(i // 2) % len(magnitudes)]
            events.append(ScenarioEvent(
                timestamp=start + i * spacing,
                new_as_path=tuple(paths[(i + 1) % len(paths)]),
                rtt_mean_delta=magnitude if i % 2 == 0 else -magnitude,
                propagation_lag=lag
            ))
        return events

    @staticmethod
    def load_scenario(path: PathLike) -> Scenario:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return Scenario.model_validate(json.load(fh))
        except OSError as e:
            raise ScenarioError(f"{path}: cannot read scenario ({e.strerror})")
        except json.JSONDecodeError as e:
            raise ScenarioError(f"{path}: invalid JSON ({e.msg})")
        except ValidationError as e:
            first = e.errors()[0]
            location = ".".join(str(part) for part in first["loc"]) or "scenario"
            raise ScenarioError(f"{path}: {location}: {first['msg']}")

    @staticmethod
    def _state_at(scenario: Scenario, instant: int) -> Tuple[float, Tuple[int, ...]]:
        """RTT mean and AS path in effect on the data plane at an instant"""
        mean = scenario.base_rtt
        path = scenario.initial_as_path
        for event in scenario.events:
            if event.timestamp + event.propagation_lag <= instant:
                mean += event.rtt_mean_delta
                path = event.new_as_path
        return mean, path

    @staticmethod
    def _as_prefixes(scenario: Scenario) -> Dict[int, IPv4Network]:
        asns = set(scenario.initial_as_path) | set(scenario.ixp_asns)
        for event in scenario.events:
            asns |= set(event.new_as_path)
        blocks = list(AS_ADDRESS_BLOCK.subnets(new_prefix=16))
        if len(asns) > len(blocks):
            raise ScenarioError(f"scenario uses {len(asns)} ASes, at most {len(blocks)} are supported")
        return {asn: blocks[index] for index, asn in enumerate(sorted(asns))}

    @staticmethod
    def _rtt_series(scenario: Scenario, probe_id: str, rng: np.random.Generator) -> List[RttMeasurement]:
        times = np.arange(scenario.start, scenario.end + 1, scenario.rtt_period)
        clean = np.array([ScenarioGenerator._state_at(scenario, int(t))[0] for t in times])
        noise = rng.normal(0.0, scenario.noise_sigma, len(times)) if scenario.noise_sigma > 0 else np.zeros(len(times))
        minimum = np.maximum(clean + noise, 0.1)
        extras = minimum[:, None] + rng.exponential(PING_SPREAD, size=(len(times), 2))
        lost = rng.random(len(times)) < scenario.loss_rate

        measurements = []
        for i, timestamp in enumerate(times):
            rtts = (float(minimum[i]), float(extras[i, 0]), float(extras[i, 1]))
            measurements.append(RttMeasurement(
                probe_id=probe_id,
                target=scenario.target,
                timestamp=int(timestamp),
                # A lost ping records fewer than three values
                rtts=rtts[:2] if lost[i] else rtts,
                responded_ip=scenario.target
            ))
        return measurements

    @staticmethod
    def _traceroutes(
        scenario: Scenario, probe_id: str, as_prefixes: Dict[int, IPv4Network], rng: np.random.Generator
    ) -> List[TracerouteMeasurement]:
        ixp = scenario.ixp_asns[0] if scenario.ixp_asns else None
        traceroutes = []
        for timestamp in range(scenario.start, scenario.end + 1, scenario.traceroute_period):
            _, path = ScenarioGenerator._state_at(scenario, timestamp)
            hops: List[Optional[IPv4Address]] = list(PROBE_LAN_HOPS)
            for position, asn in enumerate(path):
                if position == 1 and ixp is not None:
                    hops.append(as_prefixes[ixp].network_address + 1)
                base = as_prefixes[asn].network_address
                hops.extend(base + 1 + hop for hop in range(HOPS_PER_AS))

            public = len(PROBE_LAN_HOPS)
            drops = rng.random(len(hops) - public) < scenario.null_hop_rate
            for offset, drop in enumerate(drops):
                if drop:
                    hops[public + offset] = None
            hops.append(scenario.target)

            traceroutes.append(TracerouteMeasurement(
                probe_id=probe_id, target=scenario.target, timestamp=timestamp, hops=tuple(hops)
            ))
        return traceroutes

    @staticmethod
    def _decoy_updates(
        scenario: Scenario, cp_id: str, decoys: Sequence[IPv4Network], rng: np.random.Generator
    ) -> List[BgpUpdate]:
        updates = []
        for index, decoy in enumerate(decoys):
            origin = DECOY_ORIGIN_BASE + index
            expected = int(scenario.duration / scenario.decoy_rate) + 1
            gaps = rng.exponential(scenario.decoy_rate, size=4 * expected + 16)
            arrivals = scenario.start + np.cumsum(gaps)
            for count, arrival in enumerate(arrivals[arrivals <= scenario.end]):
                updates.append(BgpUpdate(
                    cp_id=cp_id,
                    prefix=decoy,
                    timestamp=int(round(arrival)),
                    as_path=(DECOY_UPSTREAMS[count % 2], origin)
                ))
        return updates

    @staticmethod
    def simulate(scenario: Scenario) -> SyntheticData:
        """Generate every record in memory; one seeded PCG64 stream drives all randomness"""
        rng = np.random.default_rng(scenario.seed)
        as_prefixes = ScenarioGenerator._as_prefixes(scenario)

        probes = [f"probe-{i + 1}" for i in range(scenario.probes)]
        collector_peers = [f"cp-{i + 1}" for i in range(scenario.collector_peers)]
        decoy_blocks = list(DECOY_BLOCK.subnets(new_prefix=24))
        if scenario.decoy_prefixes > len(decoy_blocks):
            raise ScenarioError(f"at most {len(decoy_blocks)} decoy prefixes are supported")
        decoys = decoy_blocks[:scenario.decoy_prefixes]

        measurements: List[RttMeasurement] = []
        traceroutes: List[TracerouteMeasurement] = []
        for probe_id in probes:
            measurements.extend(ScenarioGenerator._rtt_series(scenario, probe_id, rng))
            traceroutes.extend(ScenarioGenerator._traceroutes(scenario, probe_id, as_prefixes, rng))

        updates: List[BgpUpdate] = []
        correlated: List[CorrelatedUpdate] = []
        for cp_id in collector_peers:
            for event in scenario.events:
                updates.append(BgpUpdate(
                    cp_id=cp_id, prefix=scenario.prefix, timestamp=event.timestamp, as_path=event.new_as_path
                ))
                correlated.append(CorrelatedUpdate(cp_id=cp_id, prefix=scenario.prefix, timestamp=event.timestamp))
            updates.extend(ScenarioGenerator._decoy_updates(scenario, cp_id, decoys, rng))

        # Global time order keeps every peer's own sequence ordered too
        updates.sort(key=lambda u: (u.timestamp, u.cp_id, int(u.prefix.network_address)))
        measurements.sort(key=lambda m: (m.timestamp, m.probe_id))
        traceroutes.sort(key=lambda m: (m.timestamp, m.probe_id))

        prefix_rows: List[PrefixRow] = [
            (network, asn, scenario.collector_peers) for asn, network in sorted(as_prefixes.items())
        ]
        prefix_rows.append((scenario.prefix, scenario.initial_as_path[-1], scenario.collector_peers))

        ground_truth = GroundTruth(
            target=scenario.target,
            prefix=scenario.prefix,
            probe_as=scenario.probe_as,
            decoy_prefixes=decoys,
            probes=probes,
            collector_peers=collector_peers,
            correlated_updates=correlated,
            change_instants=sorted(event.timestamp + event.propagation_lag for event in scenario.events)
        )

        logger.debug(
            f"Simulated {len(measurements)} pings, {len(updates)} updates and "
            f"{len(traceroutes)} traceroutes for seed {scenario.seed}"
        )
        return SyntheticData(
            measurements=measurements,
            updates=updates,
            traceroutes=traceroutes,
            prefix_rows=prefix_rows,
            ixp_asns=set(scenario.ixp_asns),
            ground_truth=ground_truth
        )

    @staticmethod
    def generate(scenario: Scenario, out_dir: PathLike) -> GroundTruth:
        """Write the scenario's files into out_dir and return its ground truth"""
        data = ScenarioGenerator.simulate(scenario)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)

        Ingest.write_records(data.measurements, out / ScenarioFiles.RTT)
        Ingest.write_records(data.updates, out / ScenarioFiles.BGP)
        Ingest.write_records(data.traceroutes, out / ScenarioFiles.TRACEROUTE)
        Ingest.write_prefix_table(data.prefix_rows, out / ScenarioFiles.PREFIXES)
        Ingest.write_ixp_list(data.ixp_asns, out / ScenarioFiles.IXPS)
        with open(out / ScenarioFiles.GROUND_TRUTH, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data.ground_truth.model_dump_json(indent=2))
            fh.write("\n")

        logger.info(f"Wrote scenario (seed {scenario.seed}) to {out}")
        return data.ground_truth
