"""
Ingest Service

Parses the canonical input files (NDJSON measurements and updates, CSV prefix
table, IXP list) into schema objects, and clips them to the analysis window.
"""

import io
import json
import logging
from bisect import bisect_left, bisect_right
from ipaddress import IPv4Network
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Type, TypeVar, Union

import pandas as pd
from pydantic import BaseModel, ValidationError

from schemas.bgp import BgpUpdate
from schemas.measurements import RttMeasurement, TracerouteMeasurement
from utils.exceptions import IngestError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Record = TypeVar("Record", bound=BaseModel)
Timestamped = TypeVar("Timestamped")

# (prefix, origin asn, number of collectors that saw the origin)
PrefixRow = Tuple[IPv4Network, int, int]

PREFIX_TABLE_COLUMNS = ["prefix", "asn", "collector_count"]


def _describe(error: ValidationError) -> str:
    first = error.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or "record"
    return f"{location}: {first['msg']}"


class Ingest:
    """Read and write the canonical file formats"""

    @staticmethod
    def _iter_lines(path: PathLike) -> Iterator[Tuple[int, str]]:
        """Yield (line number, stripped text) of the non-blank lines"""
        try:
            with open(path, "rb") as fh:
                for line_number, raw in enumerate(fh, start=1):
                    try:
                        line = raw.decode("utf-8").strip()
                    except UnicodeDecodeError:
                        raise IngestError(path, "invalid UTF-8", line_number)
                    if line:
                        yield line_number, line
        except OSError as e:
            raise IngestError(path, f"cannot read file ({e.strerror})")

    @staticmethod
    def _iter_ndjson(path: PathLike, model: Type[Record]) -> Iterator[Tuple[int, Record]]:
        """Yield (line number, record); blank lines are skipped"""
        for line_number, line in Ingest._iter_lines(path):
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise IngestError(path, f"invalid JSON ({e.msg})", line_number)
            if not isinstance(obj, dict):
                raise IngestError(path, "expected a JSON object", line_number)
            try:
                yield line_number, model.model_validate(obj)
            except ValidationError as e:
                raise IngestError(path, _describe(e), line_number)

    @staticmethod
    def read_rtt(path: PathLike) -> List[RttMeasurement]:
        """RTT measurements in nondecreasing timestamp order"""
        records = [record for _, record in Ingest._iter_ndjson(path, RttMeasurement)]
        logger.debug(f"Read {len(records)} RTT measurements from {path}")
        return sorted(records, key=lambda m: m.timestamp)

    @staticmethod
    def read_bgp(path: PathLike) -> List[BgpUpdate]:
        """BGP updates; each collector peer's updates must already be time-ordered"""
        records = []
        last_seen: Dict[str, int] = {}

        for line_number, update in Ingest._iter_ndjson(path, BgpUpdate):
            previous = last_seen.get(update.cp_id)
            if previous is not None and update.timestamp < previous:
                raise IngestError(
                    path,
                    f"timestamp {update.timestamp} of peer {update.cp_id} precedes {previous}",
                    line_number
                )
            last_seen[update.cp_id] = update.timestamp
            records.append(update)

        logger.debug(f"Read {len(records)} BGP updates from {path}")
        return sorted(records, key=lambda u: u.timestamp)

    @staticmethod
    def read_traceroute(path: PathLike) -> List[TracerouteMeasurement]:
        records = [record for _, record in Ingest._iter_ndjson(path, TracerouteMeasurement)]
        logger.debug(f"Read {len(records)} traceroutes from {path}")
        return sorted(records, key=lambda m: m.timestamp)

    @staticmethod
    def read_prefix_table(path: PathLike) -> List[PrefixRow]:
        """Rows of `prefix,asn,collector_count`; a header row is optional"""
        # (file line number, content) of the lines left after comments and blanks
        kept = [
            (line_number, content)
            for line_number, line in Ingest._iter_lines(path)
            if (content := line.split("#", 1)[0].strip())
        ]
        if not kept:
            return []
        try:
            df = pd.read_csv(
                io.StringIO("\n".join(content for _, content in kept)),
                header=None, names=PREFIX_TABLE_COLUMNS, dtype=str, skipinitialspace=True
            )
        except pd.errors.ParserError as e:
            raise IngestError(path, f"cannot read prefix table ({e})")

        rows = []
        for index, row in df.iterrows():
            if index == 0 and str(row["prefix"]).strip().lower() == "prefix":
                continue
            line_number = kept[index][0]
            try:
                prefix = IPv4Network(str(row["prefix"]).strip())
                asn = int(row["asn"])
                collector_count = int(row["collector_count"])
            except (ValueError, TypeError) as e:
                raise IngestError(path, f"invalid prefix table row ({e})", line_number)
            if asn <= 0 or collector_count < 0:
                raise IngestError(path, "asn must be positive and collector_count non-negative", line_number)
            rows.append((prefix, asn, collector_count))

        logger.debug(f"Read {len(rows)} prefix table rows from {path}")
        return rows

    @staticmethod
    def read_ixp_list(path: PathLike) -> Set[int]:
        """One ASN per line; blank lines and # comments are ignored"""
        asns = set()
        for line_number, line in Ingest._iter_lines(path):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                asn = int(line)
            except ValueError:
                raise IngestError(path, f"invalid ASN '{line}'", line_number)
            if asn <= 0:
                raise IngestError(path, f"invalid ASN '{line}'", line_number)
            asns.add(asn)
        return asns

    @staticmethod
    def clip_window(items: Sequence[Timestamped], window: Optional[Tuple[int, int]]) -> List[Timestamped]:
        """Items with start <= timestamp <= end; items must be time-sorted"""
        if window is None:
            return list(items)
        start, end = window
        lo = bisect_left(items, start, key=lambda item: item.timestamp)
        hi = bisect_right(items, end, key=lambda item: item.timestamp)
        return list(items[lo:hi])

    @staticmethod
    def write_records(records: Iterable[BaseModel], path: PathLike) -> None:
        """NDJSON writer; the inverse of the readers"""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for record in records:
                fh.write(json.dumps(record.model_dump(mode="json", by_alias=True), separators=(",", ":")))
                fh.write("\n")

    @staticmethod
    def write_prefix_table(rows: Iterable[PrefixRow], path: PathLike) -> None:
        df = pd.DataFrame(
            [(str(prefix), asn, count) for prefix, asn, count in rows],
            columns=PREFIX_TABLE_COLUMNS
        )
        df.to_csv(path, index=False, lineterminator="\n")

    @staticmethod
    def write_ixp_list(asns: Iterable[int], path: PathLike) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for asn in sorted(asns):
                fh.write(f"{asn}\n")
