"""
Traceroute Validator Service

Ground-truth check of matched BGP updates: traceroutes are mapped to AS-level
paths, paired with the updates around each valid update, and the updates
whose AS path and traceroute path both changed are counted as validated.
"""

import logging
from bisect import bisect_left, bisect_right
from ipaddress import IPv4Address
from typing import List, Sequence, Tuple

from schemas.bgp import AsSequence, BgpUpdate, Quadruple
from schemas.measurements import TracerouteMeasurement
from schemas.reports import MatchReport, ValidationEntry, ValidationReport
from services.prefix_table import PrefixTable
from utils.constants import PRIVATE_NETWORKS, UNKNOWN_ASN
from utils.exceptions import DataError

logger = logging.getLogger(__name__)


def _is_private(address: IPv4Address) -> bool:
    return any(address in network for network in PRIVATE_NETWORKS)


def _collapse(asns: Sequence[int]) -> List[int]:
    collapsed: List[int] = []
    for asn in asns:
        if not collapsed or collapsed[-1] != asn:
            collapsed.append(asn)
    return collapsed


class TracerouteValidator:
    """Validate BGP/RTT matches against traceroute AS paths"""

    @staticmethod
    def map_ip_to_as(traceroute: TracerouteMeasurement, table: PrefixTable) -> AsSequence:
        """
        Map hops to an AS sequence:
        1. the leading run of private addresses belongs to the probe's AS
        2. other addresses take the origin of their most specific prefix
           (unknown sentinel when none matches; null hops are unknown too)
        3. consecutive duplicates collapse
        4. IXP ASes are removed
        """
        asns = []
        leading = True
        for hop in traceroute.hops:
            if leading and hop is not None and _is_private(hop):
                asns.append(table.probe_as)
                continue
            leading = False
            if hop is None:
                asns.append(UNKNOWN_ASN)
                continue
            origin = table.lookup(hop)
            asns.append(UNKNOWN_ASN if origin is None else origin)

        stripped = [asn for asn in _collapse(asns) if asn not in table.ixp_asns]
        # Stripping an IXP can bring equal neighbours together again
        return AsSequence(asns=tuple(_collapse(stripped)))

    @staticmethod
    def time_align(traceroutes: Sequence[TracerouteMeasurement], shift: int) -> List[TracerouteMeasurement]:
        """Same time shift as the RTT samples of the pair"""
        if shift == 0:
            return list(traceroutes)
        aligned = []
        for traceroute in traceroutes:
            timestamp = traceroute.timestamp + shift
            if timestamp < 0:
                raise DataError(f"time shift {shift}s moves traceroute at {traceroute.timestamp} before the epoch")
            aligned.append(traceroute.model_copy(update={"timestamp": timestamp}))
        return aligned

    @staticmethod
    def build_quadruples(
        updates: Sequence[Tuple[BgpUpdate, bool]],
        traceroutes: Sequence[TracerouteMeasurement],
        table: PrefixTable,
        shift: int
    ) -> List[Quadruple]:
        """
        For each valid u_i (not the first nor the last update), pair the last
        traceroute in [t_{i-1}, t_i] with the first one in [t_i, t_{i+1}].
        Updates with an empty window on either side are discarded.
        """
        if len(updates) < 3:
            return []

        aligned = sorted(TracerouteValidator.time_align(traceroutes, shift), key=lambda m: m.timestamp)
        times = [traceroute.timestamp for traceroute in aligned]

        quadruples = []
        discarded = 0
        for i in range(1, len(updates) - 1):
            update, valid = updates[i]
            if not valid:
                continue
            previous = updates[i - 1][0]
            following = updates[i + 1][0]
            if previous.timestamp >= update.timestamp:
                discarded += 1
                continue

            # Both windows are inclusive; a traceroute at t_i belongs to both
            before_lo = bisect_left(times, previous.timestamp)
            before_hi = bisect_right(times, update.timestamp)
            after_lo = bisect_left(times, update.timestamp)
            after_hi = bisect_right(times, following.timestamp)
            if before_lo >= before_hi or after_lo >= after_hi:
                discarded += 1
                continue

            quadruples.append(Quadruple(
                m_prev=TracerouteValidator.map_ip_to_as(aligned[before_hi - 1], table),
                u_prev=previous,
                m_cur=TracerouteValidator.map_ip_to_as(aligned[after_lo], table),
                u_cur=update
            ))

        logger.debug(f"Built {len(quadruples)} quadruples, discarded {discarded} valid updates")
        return quadruples

    @staticmethod
    def validate_pair(quadruples: Sequence[Quadruple], report: MatchReport) -> ValidationReport:
        """Split quadruples by match outcome and count the validated ones"""
        matched = {entry.update for entry in report.entries if entry.matched}

        entries = []
        for quadruple in quadruples:
            entries.append(ValidationEntry(
                quadruple=quadruple,
                in_q_plus=quadruple.u_cur in matched,
                validated=quadruple.path_changed and quadruple.traceroute_changed
            ))

        q_plus = [entry for entry in entries if entry.in_q_plus]
        q_minus = [entry for entry in entries if not entry.in_q_plus]

        def ratio(group: List[ValidationEntry]):
            if not group:
                return None
            return sum(1 for entry in group if entry.validated) / len(group)

        return ValidationReport(
            probe_id=report.probe_id,
            cp_id=report.cp_id,
            entries=entries,
            bgp_rtt_correlation=report.correlation_factor,
            bgp_traceroute_correlation=ratio(q_plus),
            bgp_traceroute_false_negative=ratio(q_minus),
            q_plus_size=len(q_plus),
            q_minus_size=len(q_minus)
        )

    @staticmethod
    def validate_run(
        report: MatchReport,
        traceroutes: Sequence[TracerouteMeasurement],
        table: PrefixTable,
        shift: int
    ) -> ValidationReport:
        """Validation of one pair's match report against that probe's traceroutes"""
        own = [
            traceroute for traceroute in traceroutes
            if traceroute.probe_id == report.probe_id and traceroute.target == report.target
        ]
        quadruples = TracerouteValidator.build_quadruples(report.all_updates(), own, table, shift)
        return TracerouteValidator.validate_pair(quadruples, report)
