"""
Shared command-line plumbing: parameter types, reusable option groups and the
resolution of analysis parameters (Settings < --params file < flags).
"""

import functools
import json
from ipaddress import IPv4Address, IPv4Network
from typing import Any, Callable, Dict, List, Optional

import click
from pydantic import ValidationError

from config import settings
from schemas.params import Params
from utils.exceptions import ParamsError


class IPv4AddressType(click.ParamType):
    name = "ipv4"

    def convert(self, value, param, ctx):
        if isinstance(value, IPv4Address):
            return value
        try:
            return IPv4Address(value)
        except ValueError:
            self.fail(f"'{value}' is not an IPv4 address", param, ctx)


class IPv4NetworkType(click.ParamType):
    name = "prefix"

    def convert(self, value, param, ctx):
        if isinstance(value, IPv4Network):
            return value
        try:
            return IPv4Network(value)
        except ValueError:
            self.fail(f"'{value}' is not an IPv4 prefix", param, ctx)


class NumberListType(click.ParamType):
    """Comma-separated numbers, e.g. `0.1,1,10`"""

    name = "list"

    def __init__(self, cast: Callable[[str], Any]):
        self.cast = cast

    def convert(self, value, param, ctx):
        if isinstance(value, list):
            return value
        try:
            items = [self.cast(item.strip()) for item in str(value).split(",") if item.strip()]
        except ValueError:
            self.fail(f"'{value}' is not a comma-separated list of numbers", param, ctx)
        if not items:
            self.fail("list is empty", param, ctx)
        return items


IPV4 = IPv4AddressType()
PREFIX = IPv4NetworkType()
FLOAT_LIST = NumberListType(float)
INT_LIST = NumberListType(int)

EXISTING_FILE = click.Path(exists=True, dir_okay=False)


def stack(*decorators):
    """Apply option decorators in reading order"""
    def apply(func):
        for decorator in reversed(decorators):
            func = decorator(func)
        return func
    return apply


input_options = stack(
    click.option("--rtt", "rtt_file", type=EXISTING_FILE, required=True, help="RTT measurements (NDJSON)"),
    click.option("--target", type=IPV4, required=True, help="Measurement target address"),
    click.option("--probe", "probes", multiple=True, help="Probe id (repeatable; default all)"),
)

bgp_options = stack(
    click.option("--bgp", "bgp_file", type=EXISTING_FILE, required=True, help="BGP updates (NDJSON)"),
    click.option("--cp", "collector_peers", multiple=True, help="Collector peer id (repeatable; default all)"),
)

output_options = stack(
    click.option("--out", "out_dir", type=click.Path(file_okay=False), default="output", show_default=True,
                 help="Output directory"),
)

jobs_option = click.option("--jobs", type=click.IntRange(min=1), default=settings.JOBS, show_default=True,
                           help="Worker processes")

params_options = stack(
    click.option("--params", "params_file", type=EXISTING_FILE, help="JSON file of analysis parameters"),
    click.option("--tolerance", "tolerance_window", type=int, help="Tolerance window (s)"),
    click.option("--rtt-period", type=int, help="RTT measurement period (s)"),
    click.option("--penalty-base", type=float, help="Penalty schedule base"),
    click.option("--penalty-offset", type=float, help="Penalty schedule offset"),
    click.option("--initial-penalty", type=float, help="Penalty p_0"),
    click.option("--max-elbow-iterations", type=int, help="Cap on scheduled penalties"),
    click.option("--start", type=int, help="Analysis window start (epoch s)"),
    click.option("--end", type=int, help="Analysis window end (epoch s)"),
)

# Single-cell parameters; sweep takes lists instead
cell_options = stack(
    click.option("--est", "elbow_slope_threshold", type=float, help="Elbow slope threshold"),
    click.option("--shift", "time_shift", type=int, help="Time shift (s)"),
)

PARAM_FLAGS = [
    "tolerance_window", "rtt_period", "penalty_base", "penalty_offset", "initial_penalty",
    "max_elbow_iterations", "elbow_slope_threshold", "time_shift",
]


def load_params_file(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            values = json.load(fh)
    except json.JSONDecodeError as e:
        raise ParamsError(f"{path}: invalid JSON ({e.msg})")
    except OSError as e:
        raise ParamsError(f"{path}: cannot read parameters ({e.strerror})")
    if not isinstance(values, dict):
        raise ParamsError(f"{path}: expected a JSON object")

    unknown = sorted(set(values) - set(Params.model_fields))
    if unknown:
        raise ParamsError(f"{path}: unknown parameters {', '.join(unknown)}")
    return values


def resolve_params(params_file: Optional[str] = None, **flags) -> Params:
    """Settings defaults, overridden by the --params file, overridden by flags"""
    values = load_params_file(params_file)
    for name in PARAM_FLAGS:
        if flags.get(name) is not None:
            values[name] = flags[name]

    start, end = flags.get("start"), flags.get("end")
    if (start is None) != (end is None):
        raise ParamsError("--start and --end must be given together")
    if start is not None:
        values["time_window"] = (start, end)

    try:
        return Params.model_validate(values)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "params"
        raise ParamsError(f"{location}: {first['msg']}")


def params_from_options(func):
    """Collapse the parameter options of a command into one `params` argument"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        flags = {name: kwargs.pop(name, None) for name in PARAM_FLAGS + ["start", "end"]}
        kwargs["params"] = resolve_params(kwargs.pop("params_file", None), **flags)
        return func(*args, **kwargs)
    return wrapper


def selected(values: tuple) -> Optional[List[str]]:
    """Repeatable option value, None when not given"""
    return list(values) if values else None
