"""Text netlists: one element per line plus OUTPUT and SCHEDULE stanzas.

::

    # comment
    V V1 1 0 1000
    R Rs 1 2 0.1
    C C1 2 0 1e-05          # optional second value: initial voltage
    L L1 3 4 0.0001         # optional second value: initial current
    S S1 2 3 0.001 1000000000.0
    D D1 0 3 1e-12 2.0      # anode cathode [Is n]
    OUTPUT 9
    SCHEDULE
    PERIOD 1e-06
    DUTY 0.5
    PRIMARY S1 S3
    COMPLEMENT S2
    END

Numbers are written with ``repr`` so that write -> read -> write is byte-exact.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from designbench.core import DesignBenchError


class NetlistError(DesignBenchError, ValueError):
    """Malformed or inconsistent netlist."""


class Kind(str, enum.Enum):
    R = "R"
    L = "L"
    C = "C"
    V = "V"
    S = "S"
    D = "D"


class Phase(str, enum.Enum):
    PRIMARY = "PRIMARY"
    COMPLEMENT = "COMPLEMENT"


R_ON = 1e-3
R_OFF = 1e9
DIODE_IS = 1e-12
DIODE_N = 2.0

# required, optional-with-default
_ARITY = {
    Kind.R: (1, ()),
    Kind.L: (1, (0.0,)),
    Kind.C: (1, (0.0,)),
    Kind.V: (1, ()),
    Kind.S: (0, (R_ON, R_OFF)),
    Kind.D: (0, (DIODE_IS, DIODE_N)),
}


@dataclass(frozen=True)
class Element:
    kind: Kind
    name: str
    nodes: tuple[int, int]
    values: tuple[float, ...]

    @property
    def value(self) -> float:
        return self.values[0]

    def full_values(self) -> tuple[float, ...]:
        """Values padded with the defaults of optional parameters."""
        required, optional = _ARITY[self.kind]
        return self.values + tuple(optional[len(self.values) - required:])


@dataclass(frozen=True)
class SwitchSchedule:
    """Synchronous PWM: PRIMARY switches conduct for ``duty`` of each period, COMPLEMENT for the rest."""

    duty: float = 0.5
    period: float = 1e-6
    phases: dict[str, Phase] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.duty <= 1.0:
            raise NetlistError(f"duty {self.duty} outside [0, 1]")
        if self.period <= 0:
            raise NetlistError("switching period must be positive")

    def initial_states(self, names) -> tuple[bool, ...]:
        return tuple((self.phases[n] == Phase.PRIMARY) == (self.duty > 0) for n in names)


@dataclass
class Netlist:
    elements: list[Element] = field(default_factory=list)
    output: int | None = None
    schedule: SwitchSchedule | None = None
    comments: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    @property
    def n_nodes(self) -> int:
        """Node count including ground (node 0)."""
        return 1 + max((max(e.nodes) for e in self.elements), default=0)

    def of_kind(self, kind: Kind) -> list[Element]:
        return [e for e in self.elements if e.kind == kind]

    def __getitem__(self, name: str) -> Element:
        for e in self.elements:
            if e.name == name:
                return e
        raise KeyError(name)

    def with_values(self, **values) -> "Netlist":
        """Copy with the first value of the named elements replaced."""
        unknown = set(values) - {e.name for e in self.elements}
        if unknown:
            raise NetlistError(f"no elements named {sorted(unknown)}")
        elements = [replace(e, values=(float(values[e.name]),) + e.values[1:]) if e.name in values else e
                    for e in self.elements]
        return Netlist(elements, self.output, self.schedule, list(self.comments))

    def with_schedule(self, schedule: SwitchSchedule) -> "Netlist":
        return Netlist(list(self.elements), self.output, schedule, list(self.comments))

    def validate(self) -> None:
        names = [e.name for e in self.elements]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise NetlistError(f"duplicate element names {dupes}")
        for e in self.elements:
            required, optional = _ARITY[e.kind]
            if not required <= len(e.values) <= required + len(optional):
                raise NetlistError(f"{e.name}: expected {required}..{required + len(optional)} values")
            if min(e.nodes) < 0:
                raise NetlistError(f"{e.name}: negative node index")
            if e.nodes[0] == e.nodes[1]:
                raise NetlistError(f"{e.name}: both terminals on node {e.nodes[0]}")
            if e.kind in (Kind.R, Kind.L, Kind.C) and e.value <= 0:
                raise NetlistError(f"{e.name}: value must be positive")
        n = self.n_nodes
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for e in self.elements:
            parent[find(e.nodes[0])] = find(e.nodes[1])
        floating = [i for i in range(1, n) if find(i) != find(0)]
        if floating:
            raise NetlistError(f"nodes {floating} are not connected to ground")
        if self.output is not None and not 0 < self.output < n:
            raise NetlistError(f"output node {self.output} does not exist")
        switches = {e.name for e in self.of_kind(Kind.S)}
        if switches and self.schedule is None:
            raise NetlistError("switches present but no SCHEDULE")
        if self.schedule is not None and set(self.schedule.phases) != switches:
            raise NetlistError("SCHEDULE must assign a phase to every switch and nothing else")


def _num(token: str, line_no: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise NetlistError(f"line {line_no}: bad number {token!r}") from None


def parse(text: str) -> Netlist:
    elements, comments = [], []
    output = None
    schedule = None
    lines = iter(enumerate(text.splitlines(), 1))
    for no, raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            if raw.strip().startswith("#"):
                comments.append(raw.strip()[1:].strip())
            continue
        tok = line.split()
        head = tok[0].upper()
        if head == "OUTPUT":
            output = int(tok[1])
        elif head == "SCHEDULE":
            period, duty, phases = 1e-6, 0.5, {}
            for no, raw in lines:
                inner = raw.split("#", 1)[0].split()
                if not inner:
                    continue
                key = inner[0].upper()
                if key == "END":
                    break
                if key == "PERIOD":
                    period = _num(inner[1], no)
                elif key == "DUTY":
                    duty = _num(inner[1], no)
                elif key in Phase.__members__:
                    phases.update({n: Phase[key] for n in inner[1:]})
                else:
                    raise NetlistError(f"line {no}: unknown schedule entry {inner[0]!r}")
            else:
                raise NetlistError("SCHEDULE without END")
            schedule = SwitchSchedule(duty, period, phases)
        elif head in Kind.__members__:
            if len(tok) < 4:
                raise NetlistError(f"line {no}: expected '<KIND> <name> <n+> <n-> <values...>'")
            try:
                nodes = (int(tok[2]), int(tok[3]))
            except ValueError:
                raise NetlistError(f"line {no}: node indices must be integers") from None
            elements.append(Element(Kind(head), tok[1], nodes, tuple(_num(t, no) for t in tok[4:])))
        else:
            raise NetlistError(f"line {no}: unknown element kind {tok[0]!r}")
    return Netlist(elements, output, schedule, comments)


def write(netlist: Netlist) -> str:
    out = [f"# {c}" for c in netlist.comments]
    for e in netlist.elements:
        out.append(" ".join([e.kind.value, e.name, str(e.nodes[0]), str(e.nodes[1])] + [repr(float(v)) for v in e.values]))
    if netlist.output is not None:
        out.append(f"OUTPUT {netlist.output}")
    s = netlist.schedule
    if s is not None:
        out += ["SCHEDULE", f"PERIOD {float(s.period)!r}", f"DUTY {float(s.duty)!r}"]
        for phase in Phase:
            names = [n for n, p in s.phases.items() if p == phase]
            if names:
                out.append(" ".join([phase.value] + names))
        out.append("END")
    return "\n".join(out) + "\n"


def read(path) -> Netlist:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def save(netlist: Netlist, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write(netlist))
