"""
Prefix Table

Longest-prefix-match structure from announced IPv4 prefixes to their elected
origin AS, plus the IXP AS set and the AS of the probe being mapped.
"""

from collections import defaultdict
from ipaddress import IPv4Address, IPv4Network
from typing import Dict, Iterable, List, Optional, Set, Tuple

from services.ingest import PrefixRow


class _Node:
    __slots__ = ("children", "origin")

    def __init__(self):
        self.children: List[Optional[_Node]] = [None, None]
        self.origin: Optional[int] = None


def elect_origin(candidates: Dict[int, int]) -> int:
    """Origin seen by the most collectors; ties go to the lowest ASN"""
    return min(candidates.items(), key=lambda item: (-item[1], item[0]))[0]


class PrefixTable:
    """Binary trie keyed on prefix bits, read-only once built"""

    def __init__(self, origins: Dict[IPv4Network, int], ixp_asns: Iterable[int] = (), probe_as: int = 0):
        self._root = _Node()
        self._origins = dict(origins)
        self.ixp_asns: Set[int] = set(ixp_asns)
        self.probe_as = probe_as
        for prefix, origin in self._origins.items():
            self._insert(prefix, origin)

    @classmethod
    def from_rows(cls, rows: Iterable[PrefixRow], ixp_asns: Iterable[int] = (), probe_as: int = 0) -> "PrefixTable":
        """Build from (prefix, asn, collector_count) rows, electing one origin per prefix"""
        seen: Dict[IPv4Network, Dict[int, int]] = defaultdict(dict)
        for prefix, asn, collector_count in rows:
            seen[prefix][asn] = seen[prefix].get(asn, 0) + collector_count
        origins = {prefix: elect_origin(candidates) for prefix, candidates in seen.items()}
        return cls(origins, ixp_asns, probe_as)

    def for_probe(self, probe_as: int) -> "PrefixTable":
        """Same prefixes and IXPs, mapped on behalf of another probe AS"""
        table = PrefixTable.__new__(PrefixTable)
        table._root = self._root
        table._origins = self._origins
        table.ixp_asns = self.ixp_asns
        table.probe_as = probe_as
        return table

    def _insert(self, prefix: IPv4Network, origin: int) -> None:
        bits = int(prefix.network_address)
        node = self._root
        for depth in range(prefix.prefixlen):
            bit = (bits >> (31 - depth)) & 1
            if node.children[bit] is None:
                node.children[bit] = _Node()
            node = node.children[bit]
        node.origin = origin

    def lookup(self, address: IPv4Address) -> Optional[int]:
        """Origin AS of the most specific prefix containing the address"""
        bits = int(address)
        node = self._root
        found = node.origin
        for depth in range(32):
            node = node.children[(bits >> (31 - depth)) & 1]
            if node is None:
                break
            if node.origin is not None:
                found = node.origin
        return found

    def linear_lookup(self, address: IPv4Address) -> Optional[int]:
        """Scan every prefix; reference for lookup()"""
        best: Optional[Tuple[int, int]] = None
        for prefix, origin in self._origins.items():
            if address in prefix and (best is None or prefix.prefixlen > best[0]):
                best = (prefix.prefixlen, origin)
        return best[1] if best else None

    def __len__(self) -> int:
        return len(self._origins)
