"""PowerElectronics: a three-stage switched DC-DC converter with ten tunable parameters."""
from __future__ import annotations

import numpy as np

from designbench.circuits.mna import Method, TopologyError, transient
from designbench.circuits.netlist import Netlist, NetlistError, SwitchSchedule, parse
from designbench.circuits.waveforms import WaveformError, dc_gain, voltage_ripple
from designbench.core import (
    ERROR,
    THEORY,
    Check,
    DesignBenchError,
    DesignSpace,
    Direction,
    Problem,
    SimulationError,
)

CAPACITORS = ("C1", "C2", "C3", "C4", "C5", "C6")
INDUCTORS = ("L1", "L2", "L3")
PARAMETERS = CAPACITORS + INDUCTORS + ("T1",)
C_BOUNDS = (1e-6, 2e-5)
L_BOUNDS = (1e-6, 1e-3)
DUTY_BOUNDS = (0.1, 0.9)
LOWER = np.array([C_BOUNDS[0]] * 6 + [L_BOUNDS[0]] * 3 + [DUTY_BOUNDS[0]])
UPPER = np.array([C_BOUNDS[1]] * 6 + [L_BOUNDS[1]] * 3 + [DUTY_BOUNDS[1]])
TARGET_GAIN = 0.25

# Input filter, three cascaded buck cells (first and last synchronous), a
# blocking diode and a CRC output filter.  S1, S3, S4 start on; S2, S5 off.
REFERENCE_NETLIST = """\
# three-stage buck reference converter
V Vsrc 1 0 1000.0
R Rsrc 1 2 0.1
C C1 2 0 1e-05
S S1 2 3 0.001 1000000000.0
S S2 3 0 0.001 1000000000.0
D D1 0 3 1e-12 2.0
L L1 3 4 0.0001
C C2 4 0 1e-05
S S3 4 5 0.001 1000000000.0
D D2 0 5 1e-12 2.0
L L2 5 6 0.0001
C C3 6 0 1e-05
S S4 6 7 0.001 1000000000.0
S S5 7 0 0.001 1000000000.0
D D3 0 7 1e-12 2.0
L L3 7 8 0.0001
C C4 8 0 1e-05
D D4 8 9 1e-12 2.0
C C5 9 0 1e-05
R Rf 9 10 0.05
C C6 10 0 1e-05
R Rload 10 0 10.0
OUTPUT 10
SCHEDULE
PERIOD 1e-06
DUTY 0.5
PRIMARY S1 S3 S4
COMPLEMENT S2 S5
END
"""


def reference_netlist() -> Netlist:
    return parse(REFERENCE_NETLIST)


def apply_design(netlist: Netlist, design) -> Netlist:
    """Substitute ``[C1..C6, L1..L3, T1]`` into ``netlist``."""
    design = np.asarray(design, dtype=float).ravel()
    if design.size != len(PARAMETERS):
        raise ValueError(f"expected {len(PARAMETERS)} parameters, got {design.size}")
    values = dict(zip(PARAMETERS[:-1], design[:-1]))
    out = netlist.with_values(**values)
    sched = netlist.schedule
    return out.with_schedule(SwitchSchedule(float(design[-1]), sched.period, dict(sched.phases)))


def source_voltage(netlist: Netlist) -> float:
    return netlist["Vsrc"].value


def simulate_converter(design, netlist: Netlist | None = None, t_start: float = 1.0e-3, t_end: float = 1.06e-3,
                       dt: float | None = None, method: Method | str = Method.BACKWARD_EULER,
                       target: float = TARGET_GAIN) -> tuple[float, float]:
    """``(|DcGain - target|, VoltageRipple)`` over ``[t_start, t_end]``."""
    circuit = apply_design(netlist or reference_netlist(), design)
    dt = dt or circuit.schedule.period / 200
    try:
        result = transient(circuit, t_start, t_end, dt, method)
        gain = dc_gain(result, source_voltage(circuit))
        ripple = voltage_ripple(result)
    except WaveformError as exc:
        raise SimulationError(f"converter waveform unusable: {exc}") from exc
    if not np.isfinite(gain) or not np.isfinite(ripple):
        raise SimulationError("converter simulation produced non-finite objectives")
    return abs(gain - target), ripple


class PowerElectronics(Problem):
    """Tune six capacitors, three inductors and the shared duty cycle of a fixed converter.

    Both objectives are minimized: distance of the DC gain from 0.25 and the
    relative peak-to-peak load ripple, measured over 1.0 to 1.06 ms after
    switch-on.  The problem has no conditions.
    """

    name = "powerelectronics"
    version = 0
    objectives = (("dcgain_error", Direction.MINIMIZE), ("voltage_ripple", Direction.MINIMIZE))
    conditions = ()

    def _configure(self, netlist: str | None = None, period: float | None = None, dt: float | None = None,
                   method: str = Method.BACKWARD_EULER.value, t_start: float = 1.0e-3, t_end: float = 1.06e-3):
        return dict(netlist=netlist, period=period, dt=dt, method=Method(method).value,
                    t_start=t_start, t_end=t_end)

    @property
    def design_space(self) -> DesignSpace:
        return DesignSpace(LOWER, UPPER, (len(PARAMETERS),))

    @property
    def netlist(self) -> Netlist:
        c = self.config
        net = reference_netlist() if c["netlist"] is None else parse(c["netlist"])
        if c["period"] is not None:
            s = net.schedule
            net = net.with_schedule(SwitchSchedule(s.duty, c["period"], dict(s.phases)))
        return net

    def _simulate(self, design, conds):
        c = self.config
        try:
            return list(simulate_converter(design, self.netlist, c["t_start"], c["t_end"], c["dt"], c["method"]))
        except SimulationError:
            raise
        except (DesignBenchError, NetlistError, TopologyError, ValueError) as exc:
            raise SimulationError(f"converter simulation failed: {exc}") from exc

    def _optimize(self, start, conds, pop_size: int = 20, generations: int = 10, seed: int | None = None, **kw):
        from designbench.moo import nsga2_problem

        return nsga2_problem(self, pop_size=pop_size, generations=generations,
                             seed=self.seed if seed is None else seed, start=start, **kw)

    def _checks(self):
        checks = []
        for i, name in enumerate(PARAMETERS):
            lo, hi = LOWER[i], UPPER[i]
            checks.append(Check(name, float(lo), float(hi), THEORY, ERROR, prefix="Design",
                                value=lambda design, env, i=i: None if design is None else np.ravel(design)[i]))
        return checks
