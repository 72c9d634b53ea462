from ipaddress import IPv4Address, IPv4Network

import numpy as np

from services.prefix_table import PrefixTable, elect_origin


def test_elect_origin_prefers_most_collectors_then_lowest_asn():
    assert elect_origin({64512: 3, 1103: 7}) == 1103
    assert elect_origin({300: 5, 200: 5, 100: 1}) == 200


def test_from_rows_sums_collectors_per_origin():
    prefix = IPv4Network("193.0.14.0/24")
    table = PrefixTable.from_rows([(prefix, 25152, 4), (prefix, 64512, 5), (prefix, 25152, 3)])
    assert len(table) == 1
    assert table.lookup(IPv4Address("193.0.14.129")) == 25152


def test_most_specific_prefix_wins():
    table = PrefixTable({
        IPv4Network("193.0.0.0/16"): 100,
        IPv4Network("193.0.14.0/24"): 25152,
        IPv4Network("193.0.14.128/25"): 200,
    })
    assert table.lookup(IPv4Address("193.0.14.129")) == 200
    assert table.lookup(IPv4Address("193.0.14.1")) == 25152
    assert table.lookup(IPv4Address("193.0.200.1")) == 100
    assert table.lookup(IPv4Address("194.0.0.1")) is None


def test_default_route_and_host_route():
    table = PrefixTable({IPv4Network("0.0.0.0/0"): 1, IPv4Network("8.8.8.8/32"): 15169})
    assert table.lookup(IPv4Address("8.8.8.8")) == 15169
    assert table.lookup(IPv4Address("8.8.8.9")) == 1


def test_for_probe_shares_prefixes():
    table = PrefixTable({IPv4Network("11.0.0.0/16"): 1103}, ixp_asns=[1200], probe_as=3333)
    other = table.for_probe(64496)
    assert other.probe_as == 64496
    assert table.probe_as == 3333
    assert other.ixp_asns == {1200}
    assert other.lookup(IPv4Address("11.0.3.4")) == 1103


def test_lookup_agrees_with_linear_scan():
    rng = np.random.default_rng(1234)
    origins = {}
    for _ in range(300):
        length = int(rng.integers(8, 33))
        address = IPv4Address(int(rng.integers(0, 2**32)))
        origins[IPv4Network(f"{address}/{length}", strict=False)] = int(rng.integers(1, 65000))
    # Nested prefixes inside a few of the random ones
    for prefix in list(origins)[:50]:
        if prefix.prefixlen <= 28:
            origins[next(prefix.subnets(prefixlen_diff=4))] = int(rng.integers(1, 65000))
    table = PrefixTable(origins)
    prefixes = list(origins)

    for i in range(10000):
        if i % 2:
            address = IPv4Address(int(rng.integers(0, 2**32)))
        else:
            prefix = prefixes[int(rng.integers(0, len(prefixes)))]
            address = prefix.network_address + int(rng.integers(0, prefix.num_addresses))
        assert table.lookup(address) == table.linear_lookup(address), address
