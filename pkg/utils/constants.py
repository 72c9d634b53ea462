from enum import Enum, IntEnum
import ipaddress


class ExitCode(IntEnum):
    SUCCESS = 0
    USAGE = 1
    DATA_ERROR = 2


class EntryStatus(str, Enum):
    MATCHED = "Y"
    UNMATCHED = "N"


# Unknown AS sentinel (AS 0 is reserved, never a public origin)
UNKNOWN_ASN = 0

# Null hop marker in traceroute files
NULL_HOP = "*"


class SweepGrid:
    """Parameter grids explored when tuning the correlation"""

    ELBOW_SLOPE_THRESHOLDS = [
        0.001, 0.01, 0.1, 1.0, 5.0, 10.0, 50.0, 100.0,
        200.0, 300.0, 1000.0, 10000.0,
    ]
    TIME_SHIFTS = [-600, -300, -120, 0, 120, 300, 600]


class MeasurementDefaults:
    """Measurement cadence of the public platforms the formats mirror"""

    RTT_PERIOD = 240  # one ping every 4 minutes
    TRACEROUTE_PERIOD = 1200  # one traceroute every 20 minutes
    TOLERANCE_WINDOW = 960  # 16 minutes
    RTT_VALUES_PER_MEASUREMENT = 3


class PenaltySchedule:
    """Elbow penalty schedule p_i = BASE**i + OFFSET, p_0 = INITIAL"""

    BASE = 2.0
    OFFSET = 0.0
    INITIAL = 0.5
    MAX_ITERATIONS = 64


# RFC1918 blocks
PRIVATE_NETWORKS = [
    ipaddress.IPv4Network("10.0.0.0/8"),
    ipaddress.IPv4Network("172.16.0.0/12"),
    ipaddress.IPv4Network("192.168.0.0/16"),
]


class OutputFiles:
    SUMMARY = "summary.csv"
    SURFACE = "surface.csv"
    CDF = "cdf.csv"
    TIMELINE = "timeline.csv"
    CLASSES = "classes.json"
    VALIDATION = "validation.csv"
    VALIDATION_CORRELATION = "validation_correlation.csv"
    VALIDATION_FALSE_NEGATIVE = "validation_false_negative.csv"
    CHANGEPOINTS = "changepoints.csv"
    ELBOW = "elbow.csv"


class ScenarioFiles:
    RTT = "rtt.ndjson"
    BGP = "bgp.ndjson"
    TRACEROUTE = "traceroute.ndjson"
    GROUND_TRUTH = "ground_truth.json"
    PREFIXES = "prefixes.csv"
    IXPS = "ixps.txt"
