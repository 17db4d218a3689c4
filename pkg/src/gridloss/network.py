"""Feeder data model: buses, pi-model branches and attached devices.

All electrical quantities are per-unit on the network's ``base_mva`` /
``base_kv``. Objects are frozen; modifications go through
:func:`dataclasses.replace` and produce new networks.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable

BUS_KINDS = ("slack", "load")
DEVICE_KINDS = ("load", "generator")
BRANCH_KINDS = ("line", "transformer")


class NetworkError(ValueError):
    """Raised when a network is structurally unusable."""


class ZeroImpedanceError(NetworkError, ZeroDivisionError):
    """Raised for a branch with r = x = 0."""


@dataclass(frozen=True)
class Bus:
    """Connection point of the feeder.

    Attributes:
        id: unique bus identifier
        kind: ``"slack"`` or ``"load"`` (PQ)
        v_min, v_max: voltage magnitude bounds [p.u.]
        q_comp: installed capacitive compensation [p.u.], injected as constant power
        v_set: voltage magnitude held at a slack bus [p.u.]
    """

    id: str
    kind: str = "load"
    v_min: float = 0.95
    v_max: float = 1.05
    q_comp: float = 0.0
    v_set: float = 1.0


@dataclass(frozen=True)
class Branch:
    """Line, cable or transformer between two buses (pi equivalent).

    ``shunt_b`` is the total charging susceptance, split half to each end.
    ``core_loss`` is a constant active demand [p.u.] drawn at the sending
    bus of a transformer; it stands in for the iron losses.
    """

    id: str
    from_bus: str
    to_bus: str
    resistance_r: float
    reactance_x: float
    shunt_b: float = 0.0
    i_limit: float = 1.0
    conductor_class: str = ""
    kind: str = "line"
    length: float = 1.0
    core_loss: float = 0.0
    i_min: float = 0.0


@dataclass(frozen=True)
class Device:
    """Load or generator attached to a bus. ``p`` and ``q`` are magnitudes
    from the device's own perspective; the sign is applied by
    :meth:`Network.net_demand`."""

    id: str
    bus: str
    kind: str = "load"
    p: float = 0.0
    q: float = 0.0


@dataclass(frozen=True)
class Network:
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...] = ()
    devices: tuple[Device, ...] = ()
    base_mva: float = 10.0
    base_kv: float = 11.0
    name: str = ""
    _bus_index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "branches", tuple(self.branches))
        object.__setattr__(self, "devices", tuple(self.devices))
        object.__setattr__(self, "_bus_index", {b.id: k for k, b in enumerate(self.buses)})

    @property
    def bus_ids(self) -> list[str]:
        return [b.id for b in self.buses]

    def bus_position(self, bus_id: str) -> int:
        return self._bus_index[bus_id]

    def bus(self, bus_id: str) -> Bus:
        return self.buses[self._bus_index[bus_id]]

    def branch(self, branch_id: str) -> Branch:
        for br in self.branches:
            if br.id == branch_id:
                return br
        raise KeyError(branch_id)

    @property
    def slack(self) -> Bus:
        for b in self.buses:
            if b.kind == "slack":
                return b
        raise NetworkError("missing slack bus")

    def net_demand(self, bus_id: str) -> tuple[float, float]:
        """Net (p, q) withdrawn by the devices at ``bus_id``; generators count negative."""
        p = q = 0.0
        for d in self.devices:
            if d.bus != bus_id:
                continue
            sign = 1.0 if d.kind == "load" else -1.0
            p += sign * d.p
            q += sign * d.q
        return p, q

    def total_load(self) -> float:
        return sum(d.p for d in self.devices if d.kind == "load")

    def total_generation(self) -> float:
        return sum(d.p for d in self.devices if d.kind == "generator")

    def with_branch(self, new: Branch) -> Network:
        branches = tuple(new if br.id == new.id else br for br in self.branches)
        return replace(self, branches=branches)

    def with_bus(self, new: Bus) -> Network:
        buses = tuple(new if b.id == new.id else b for b in self.buses)
        return replace(self, buses=buses)

    def scaled_loads(self, factor: float) -> Network:
        devices = tuple(replace(d, p=d.p * factor, q=d.q * factor) for d in self.devices)
        return replace(self, devices=devices)


@dataclass(frozen=True)
class Violation:
    code: str
    element_id: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.message}"


class ValidationReport(list):
    """List of :class:`Violation`; empty when the network is valid."""

    @property
    def ok(self) -> bool:
        return not self

    def codes(self) -> list[str]:
        return [v.code for v in self]

    def __str__(self):
        return "\n".join(str(v) for v in self) if self else "valid"


def _duplicates(ids: Iterable[str]) -> list[str]:
    seen, dup = set(), []
    for i in ids:
        if i in seen and i not in dup:
            dup.append(i)
        seen.add(i)
    return dup


def validate(network: Network) -> ValidationReport:
    """Collect every violated structural invariant of ``network``."""
    report = ValidationReport()
    add = lambda code, eid, msg: report.append(Violation(code, eid, msg))  # noqa: E731

    for bid in _duplicates(b.id for b in network.buses):
        add("duplicate bus id", bid, f"bus id {bid!r} is not unique")
    for bid in _duplicates(br.id for br in network.branches):
        add("duplicate branch id", bid, f"branch id {bid!r} is not unique")
    for did in _duplicates(d.id for d in network.devices):
        add("duplicate device id", did, f"device id {did!r} is not unique")

    slacks = [b for b in network.buses if b.kind == "slack"]
    if not slacks:
        add("missing slack", "", "network has no slack bus")
    for extra in slacks[1:]:
        add("multiple slack", extra.id, f"bus {extra.id!r} is an additional slack bus")

    for b in network.buses:
        if b.kind not in BUS_KINDS:
            add("bad bus kind", b.id, f"bus {b.id!r} has kind {b.kind!r}")
        if not 0 < b.v_min < b.v_max:
            add("bad voltage bounds", b.id, f"bus {b.id!r} needs 0 < v_min < v_max")
        if b.q_comp < 0:
            add("negative compensation", b.id, f"bus {b.id!r} has q_comp {b.q_comp}")
        if b.v_set <= 0:
            add("bad voltage setpoint", b.id, f"bus {b.id!r} has v_set {b.v_set}")

    bus_ids = set(network.bus_ids)
    for br in network.branches:
        if br.from_bus == br.to_bus:
            add("self-loop", br.id, f"branch {br.id!r} connects bus {br.from_bus!r} to itself")
        for end in (br.from_bus, br.to_bus):
            if end not in bus_ids:
                add("unknown bus", br.id, f"branch {br.id!r} references missing bus {end!r}")
        if br.resistance_r < 0:
            add("negative resistance", br.id, f"branch {br.id!r} has r {br.resistance_r}")
        if br.reactance_x == 0:
            add("zero reactance", br.id, f"branch {br.id!r} has x = 0")
        if br.shunt_b < 0:
            add("negative shunt", br.id, f"branch {br.id!r} has shunt_b {br.shunt_b}")
        if br.i_limit <= 0:
            add("bad current limit", br.id, f"branch {br.id!r} has i_limit {br.i_limit}")
        if not 0 <= br.i_min < br.i_limit:
            add("bad current limit", br.id, f"branch {br.id!r} needs 0 <= i_min < i_limit")
        if br.kind not in BRANCH_KINDS:
            add("bad branch kind", br.id, f"branch {br.id!r} has kind {br.kind!r}")
        if br.core_loss < 0:
            add("negative core loss", br.id, f"branch {br.id!r} has core_loss {br.core_loss}")

    for d in network.devices:
        if d.bus not in bus_ids:
            add("unknown bus", d.id, f"device {d.id!r} references missing bus {d.bus!r}")
        if d.kind not in DEVICE_KINDS:
            add("bad device kind", d.id, f"device {d.id!r} has kind {d.kind!r}")
        if d.p < 0:
            add("negative power", d.id, f"device {d.id!r} has p {d.p}")

    if network.buses and not _connected(network):
        add("disconnected", "", "network graph is not connected")
    if not network.buses:
        add("missing slack", "", "network has no buses")
    return report


def _connected(network: Network) -> bool:
    adj: dict[str, set[str]] = {b.id: set() for b in network.buses}
    for br in network.branches:
        if br.from_bus in adj and br.to_bus in adj:
            adj[br.from_bus].add(br.to_bus)
            adj[br.to_bus].add(br.from_bus)
    start = network.buses[0].id
    seen = {start}
    queue = deque([start])
    while queue:
        for nxt in adj[queue.popleft()]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return len(seen) == len(adj)


def branch_admittance(branch: Branch) -> tuple[float, float]:
    """Series conductance and susceptance ``(g, b)`` of ``branch``.

    g = r / (r^2 + x^2), b = -x / (r^2 + x^2)
    """
    r, x = branch.resistance_r, branch.reactance_x
    z2 = r * r + x * x
    if z2 == 0:
        raise ZeroImpedanceError(f"branch {branch.id!r} has zero impedance")
    return r / z2, -x / z2


def require_valid(network: Network) -> None:
    report = validate(network)
    if report:
        raise NetworkError(f"invalid network:\n{report}")
