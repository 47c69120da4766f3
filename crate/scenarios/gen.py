#!/usr/bin/env python3
"""Generates the T0-T5 input traces, table populations and expected outputs.

The expected outputs come from a standalone model written here against the
scenario descriptions (hand-coded parse graphs, a dict for the exact table,
a linear scan for the ternary table, a sorted list for the PIFO). It shares
no code with the Rust pipeline.

    python3 scenarios/gen.py            # rewrite everything
    python3 scenarios/gen.py --check    # fail if any file would change
"""

import argparse
import pathlib
import random
import struct
import sys

HERE = pathlib.Path(__file__).resolve().parent

VXLAN_PORT = 4789
BUFFER_BYTES = 1_250_000
MAX_PKT = 1518


class Drop(Exception):
    def __init__(self, reason):
        super().__init__(reason)
        self.reason = reason


# --- packet construction -----------------------------------------------------


def ones_sum(data):
    s = 0
    for i in range(0, len(data), 2):
        s += (data[i] << 8) | data[i + 1]
    while s >> 16:
        s = (s & 0xFFFF) + (s >> 16)
    return s


def ipv4_checksum(hdr):
    h = bytearray(hdr)
    h[10:12] = b"\0\0"
    return (~ones_sum(h)) & 0xFFFF


def mac(rng):
    return bytes(rng.getrandbits(8) for _ in range(6))


def eth(rng, ethertype):
    return mac(rng) + mac(rng) + struct.pack(">H", ethertype)


def vlan(rng, ethertype):
    return struct.pack(">HH", rng.getrandbits(16), ethertype)


def ipv4(total_len, proto, src, dst, dscp, ident, ttl):
    h = bytearray(struct.pack(">BBHHHBBHII", 0x45, dscp, total_len, ident, 0x4000, ttl, proto, 0, src, dst))
    h[10:12] = struct.pack(">H", ipv4_checksum(h))
    return bytes(h)


def udp(sport, dport, length):
    return struct.pack(">HHHH", sport, dport, length, 0)


def vxlan(rng):
    return struct.pack(">II", 0x08000000, rng.getrandbits(24) << 8)


TTLS = [0, 1, 2, 63, 64, 128, 255]
TTL_WEIGHTS = [1, 2, 2, 4, 8, 6, 2]


def flow_fields(rng, **over):
    f = {
        "src": rng.getrandbits(32),
        "dst": rng.getrandbits(32),
        "proto": 17,
        "dscp": rng.getrandbits(8),
        "ident": rng.getrandbits(16),
        "sport": rng.getrandbits(16),
        "dport": rng.getrandbits(16),
        "ttl": rng.choices(TTLS, TTL_WEIGHTS)[0],
    }
    f.update(over)
    return f


def build(rng, kind, f, payload_len):
    """Builds one packet; `f` holds the outer IPv4/UDP field values."""
    payload = bytes(rng.getrandbits(8) for _ in range(payload_len))
    if kind == "arp":
        return eth(rng, 0x0806) + payload
    if kind == "vxlan_qinq":
        inner = eth(rng, 0x0800)
        inner_l4 = payload
        inner += ipv4(20 + len(inner_l4), 17, rng.getrandbits(32), rng.getrandbits(32), 0, rng.getrandbits(16), 64)
        l4 = udp(f["sport"], VXLAN_PORT, 8 + 8 + len(inner) + len(inner_l4)) + vxlan(rng) + inner + inner_l4
        prefix = eth(rng, 0x88A8) + vlan(rng, 0x8100) + vlan(rng, 0x0800)
    elif kind == "vxlan_nonip":
        inner = eth(rng, 0x86DD) + payload
        l4 = udp(f["sport"], VXLAN_PORT, 16 + len(inner)) + vxlan(rng) + inner
        prefix = eth(rng, 0x8100) + vlan(rng, 0x0800)
    elif kind in ("plain_udp", "vlan_udp", "outer_vlan_udp"):
        l4 = udp(f["sport"], f["dport"], 8 + payload_len) + payload
        prefix = {
            "plain_udp": eth(rng, 0x0800),
            "vlan_udp": eth(rng, 0x8100) + vlan(rng, 0x0800),
            "outer_vlan_udp": eth(rng, 0x88A8) + vlan(rng, 0x0800),
        }[kind]
    elif kind == "tcp":
        l4 = payload
        prefix = eth(rng, 0x0800)
        f = dict(f, proto=6)
    else:
        raise ValueError(kind)
    proto = f["proto"] if kind == "tcp" else 17
    return prefix + ipv4(20 + len(l4), proto, f["src"], f["dst"], f["dscp"], f["ident"], f["ttl"]) + l4


UDP_KINDS = ["plain_udp", "vlan_udp", "outer_vlan_udp"]


def packet_for_flow(rng, f, payload_len):
    kind = "vxlan_qinq" if f["dport"] == VXLAN_PORT else rng.choice(UDP_KINDS)
    return build(rng, kind, f, payload_len)


def mixed_traffic(rng, n, payload=None):
    kinds = ["vxlan_qinq", "vlan_udp", "plain_udp", "outer_vlan_udp", "vxlan_nonip", "tcp", "arp", "truncated"]
    weights = [10, 4, 4, 2, 1, 1, 1, 1]
    pkts = []
    for _ in range(n):
        kind = rng.choices(kinds, weights)[0]
        plen = payload(rng) if payload else (24 if kind.startswith("vxlan") else 32)
        if kind == "truncated":
            full = build(rng, "vxlan_qinq", flow_fields(rng), plen)
            pkts.append(full[: rng.randint(1, 91)])
        else:
            pkts.append(build(rng, kind, flow_fields(rng), plen))
    return pkts


# --- reference model -----------------------------------------------------------

# node -> (size, selector byte offset or None, {value: next}, default)
T0_GRAPH = {
    "ethernet": (14, 12, {0x0800: "ipv4"}, None),
    "ipv4": (20, ("proto",), {17: "udp"}, "accept"),
    "udp": (8, None, {}, "accept"),
}
T1_GRAPH = {
    "ethernet": (14, 12, {0x88A8: "vlan_outer", 0x8100: "vlan_inner", 0x0800: "ipv4"}, None),
    "vlan_outer": (4, 2, {0x8100: "vlan_inner", 0x0800: "ipv4"}, None),
    "vlan_inner": (4, 2, {0x0800: "ipv4"}, None),
    "ipv4": (20, ("proto",), {17: "udp"}, "accept"),
    "udp": (8, 2, {VXLAN_PORT: "vxlan"}, "accept"),
    "vxlan": (8, None, {}, "inner_ethernet"),
    "inner_ethernet": (14, 12, {0x0800: "inner_ipv4"}, "accept"),
    "inner_ipv4": (20, None, {}, "accept"),
}


def parse(graph, data):
    headers = {}
    order = []
    off = 0
    node = "ethernet"
    while node != "accept":
        size, sel, edges, default = graph[node]
        if len(data) - off < size:
            raise Drop("truncated")
        h = bytearray(data[off : off + size])
        off += size
        headers[node] = h
        order.append(node)
        if sel is None:
            value = None
        elif sel == ("proto",):
            value = h[9]
        else:
            value = struct.unpack(">H", h[sel : sel + 2])[0]
        nxt = edges.get(value, default)
        if nxt is None:
            raise Drop("no_transition")
        node = nxt
    return headers, order, bytes(data[off:])


def need(headers, name):
    if name not in headers:
        raise Drop("invalid_field_access")
    return headers[name]


def flow_key(headers):
    ip = need(headers, "ipv4")
    u = need(headers, "udp")
    src, dst = struct.unpack(">II", ip[12:20])
    ident = struct.unpack(">H", ip[4:6])[0]
    sport, dport = struct.unpack(">HH", u[0:4])
    return (src << 96) | (dst << 64) | (ip[9] << 56) | (ip[1] << 48) | (ident << 32) | (sport << 16) | dport


def lookup_key(headers):
    """Flow key, or None when a key header is invalid (the lookup is skipped)."""
    try:
        return flow_key(headers)
    except Drop:
        return None


def ipv4_update(headers, meta):
    ip = need(headers, "ipv4")
    if ip[8] <= 1:
        meta["drop"] = 1
    ip[8] = (ip[8] + 0xFF) & 0xFF
    ip[10:12] = struct.pack(">H", ipv4_checksum(ip))


def classify(headers, meta):
    ip = need(headers, "ipv4")
    rank = 8 if ip[1] < 0x20 else 0
    if struct.unpack(">H", ip[2:4])[0] > 100:
        rank |= 4
    if struct.unpack(">H", need(headers, "udp")[2:4])[0] == VXLAN_PORT:
        rank |= 2
    if meta["ingress_port"] >= 2:
        rank |= 1
    meta["rank"] = rank


def ternary_lookup(rules, key):
    best = None
    for value, mask, prio, port in rules:
        if key & mask == value and (best is None or prio > best[0]):
            best = (prio, port)
    return best


class Scenario:
    def __init__(self, name, graph, stages, sched="fifo", capacity=1024, every=1):
        self.name, self.graph, self.stages = name, graph, stages
        self.sched, self.capacity, self.every = sched, capacity, every

    def ingress(self, data, port):
        if len(data) > MAX_PKT:
            raise Drop("oversize")
        headers, order, payload = parse(self.graph, data)
        meta = {"ingress_port": port, "egress_port": port, "drop": 0, "rank": 0}
        for stage in self.stages:
            stage(headers, meta)
        if meta["drop"]:
            raise Drop("action")
        return b"".join(bytes(headers[h]) for h in order) + payload, meta["egress_port"], meta["rank"]

    def run(self, packets):
        out = []
        queue = []
        occupancy = 0

        def emit(arrival, port, disp, data=b""):
            out.append((len(out), arrival, port, disp, data))

        def dequeue():
            nonlocal occupancy
            if not queue:
                return False
            if self.sched == "pifo":
                j = min(range(len(queue)), key=lambda k: queue[k][:2])
            else:
                j = 0
            _, _, arrival, port, data = queue.pop(j)
            occupancy -= len(data)
            emit(arrival, port, "forwarded", data)
            return True

        for i, (seq, port, data) in enumerate(packets):
            try:
                odata, oport, rank = self.ingress(data, port)
            except Drop as d:
                emit(seq, port, f"dropped({d.reason})")
            else:
                if occupancy + len(odata) > BUFFER_BYTES:
                    emit(seq, oport, "dropped(buffer_overflow)")
                elif len(queue) >= self.capacity:
                    emit(seq, oport, "dropped(queue_full)")
                else:
                    occupancy += len(odata)
                    queue.append((rank, i, seq, oport, odata))
            if (i + 1) % self.every == 0:
                dequeue()
        while dequeue():
            pass
        return out


# --- files ---------------------------------------------------------------------


def input_trace(packets):
    return "".join(f"# in seq={s} port={p}\n{d.hex()}\n" for s, p, d in packets)


def output_trace(records):
    lines = []
    for seq, arrival, port, disp, data in records:
        lines.append(f"# out seq={seq} arrival={arrival} port={port} {disp}\n")
        if disp == "forwarded":
            lines.append(data.hex() + "\n")
    return "".join(lines)


def check_ipv4(records, graph):
    """Every forwarded IPv4 header sums to 0xFFFF."""
    for _, _, _, disp, data in records:
        if disp != "forwarded":
            continue
        headers, _, _ = parse(graph, data)
        for name in ("ipv4", "inner_ipv4"):
            if name in headers:
                assert ones_sum(headers[name]) == 0xFFFF, name


def with_ports(rng, datas, ports=4):
    return [(i, rng.randrange(ports), d) for i, d in enumerate(datas)]


def t3_entries(rng):
    keys = {}
    while len(keys) < 8192:
        f = flow_fields(rng, dport=VXLAN_PORT if rng.random() < 0.3 else rng.getrandbits(16))
        key = flow_key_of(f)
        keys[key] = (f, rng.randrange(1, 16))
    return keys


def flow_key_of(f):
    return (
        (f["src"] << 96)
        | (f["dst"] << 64)
        | (f["proto"] << 56)
        | (f["dscp"] << 48)
        | (f["ident"] << 32)
        | (f["sport"] << 16)
        | f["dport"]
    )


def fields_of_key(k):
    return {
        "src": k >> 96,
        "dst": (k >> 64) & 0xFFFFFFFF,
        "proto": (k >> 56) & 0xFF,
        "dscp": (k >> 48) & 0xFF,
        "ident": (k >> 32) & 0xFFFF,
        "sport": (k >> 16) & 0xFFFF,
        "dport": k & 0xFFFF,
    }


def prefix_mask(offset, length, total=128):
    return ((1 << length) - 1) << (total - offset - length) if length else 0


PROTO_MASK = prefix_mask(64, 8)
DPORT_MASK = prefix_mask(112, 16)


def t4_rules(rng):
    rules = []
    for _ in range(4096):
        t = rng.random()
        if t < 0.35:
            mask = prefix_mask(32, rng.randint(8, 24)) | PROTO_MASK | DPORT_MASK
        elif t < 0.6:
            mask = prefix_mask(0, rng.randint(8, 32))
        elif t < 0.8:
            mask = prefix_mask(72, 8) | prefix_mask(96, rng.randint(1, 16))
        else:
            mask = 0
            for b in range(128):
                if rng.random() < 0.25:
                    mask |= 1 << b
        value = rng.getrandbits(128) & mask
        if mask & PROTO_MASK == PROTO_MASK:
            value = (value & ~PROTO_MASK) | (17 << 56)
        rules.append((value, mask, rng.randrange(256), rng.randrange(1, 16)))
    return rules


def ternary_packet(rng, rules):
    """A UDP packet whose flow key satisfies some rule."""
    while True:
        value, mask, _, _ = rng.choice(rules)
        key = value | (rng.getrandbits(128) & ~mask)
        key = (key & ~PROTO_MASK) | (17 << 56)
        if key & mask == value:
            f = fields_of_key(key)
            f["ttl"] = rng.choices(TTLS, TTL_WEIGHTS)[0]
            return packet_for_flow(rng, f, 24 if f["dport"] == VXLAN_PORT else 32)


def generate():
    files = {}

    rng = random.Random(0)
    t0_pkts = with_ports(rng, [build(rng, "plain_udp", flow_fields(rng), 32) for _ in range(100)])
    t0 = Scenario("t0", T0_GRAPH, [])
    files["t0"] = (t0_pkts, t0.run(t0_pkts), T0_GRAPH)

    rng = random.Random(1)
    t1_pkts = with_ports(rng, mixed_traffic(rng, 150))
    files["t1"] = (t1_pkts, Scenario("t1", T1_GRAPH, []).run(t1_pkts), T1_GRAPH)

    rng = random.Random(2)
    t2_pkts = with_ports(rng, mixed_traffic(rng, 150))
    files["t2"] = (t2_pkts, Scenario("t2", T1_GRAPH, [ipv4_update]).run(t2_pkts), T1_GRAPH)

    rng = random.Random(3)
    flows = t3_entries(rng)
    flow_list = list(flows.items())
    datas = []
    for _ in range(200):
        if rng.random() < 0.5:
            key, (f, _) = rng.choice(flow_list)
            f = dict(f, ttl=rng.choices(TTLS, TTL_WEIGHTS)[0])
            datas.append(packet_for_flow(rng, f, 24 if f["dport"] == VXLAN_PORT else 32))
        else:
            datas.extend(mixed_traffic(rng, 1))
    t3_pkts = with_ports(rng, datas)

    def exact_stage(headers, meta):
        hit = flows.get(lookup_key(headers))
        if hit:
            meta["egress_port"] = hit[1]

    files["t3"] = (t3_pkts, Scenario("t3", T1_GRAPH, [exact_stage, ipv4_update]).run(t3_pkts), T1_GRAPH)
    t3_pop = "".join(f"exact 0x{k:032x} - set_egress 0x{port:04x}\n" for k, (_, port) in flow_list)

    rng = random.Random(4)
    rules = t4_rules(rng)
    datas = [ternary_packet(rng, rules) if rng.random() < 0.6 else mixed_traffic(rng, 1)[0] for _ in range(200)]
    t4_pkts = with_ports(rng, datas)

    def ternary_stage(headers, meta):
        key = lookup_key(headers)
        hit = None if key is None else ternary_lookup(rules, key)
        if hit is None:
            raise Drop("miss")
        meta["egress_port"] = hit[1]

    files["t4"] = (t4_pkts, Scenario("t4", T1_GRAPH, [ternary_stage, ipv4_update]).run(t4_pkts), T1_GRAPH)
    t4_pop = "".join(f"ternary 0x{v:032x}/0x{m:032x} {p} set_egress 0x{port:04x}\n" for v, m, p, port in rules)

    rng = random.Random(5)
    t5_pkts = with_ports(rng, mixed_traffic(rng, 200, payload=lambda r: r.randint(0, 64)))
    t5 = Scenario("t5", T1_GRAPH, [classify, ipv4_update], sched="pifo", capacity=64, every=4)
    files["t5"] = (t5_pkts, t5.run(t5_pkts), T1_GRAPH)

    out = {}
    for name, (pkts, records, graph) in files.items():
        check_ipv4(records, graph)
        out[f"{name}.in.trace"] = input_trace(pkts)
        out[f"{name}.expected.trace"] = output_trace(records)
    out["t3.entries"] = "# flow table: 8192 exact entries\n" + t3_pop
    out["t4.entries"] = "# acl table: 4096 ternary rules\n" + t4_pop
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--check", action="store_true", help="compare instead of writing")
    args = ap.parse_args()
    stale = []
    for name, text in generate().items():
        path = HERE / name
        if args.check:
            if not path.exists() or path.read_text() != text:
                stale.append(name)
        else:
            path.write_text(text)
    if stale:
        print("stale: " + ", ".join(stale), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
