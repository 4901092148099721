"""MNA transient simulation and the PowerElectronics converter problem."""
from designbench.circuits.converter import (
    PARAMETERS,
    PowerElectronics,
    apply_design,
    reference_netlist,
    simulate_converter,
)
from designbench.circuits.mna import ConvergenceError, Method, TopologyError, TransientResult, transient
from designbench.circuits.netlist import Element, Kind, Netlist, NetlistError, Phase, SwitchSchedule, parse, write
from designbench.circuits.waveforms import WaveformError, dc_gain, time_average, voltage_ripple

__all__ = [
    "PARAMETERS", "ConvergenceError", "Element", "Kind", "Method", "Netlist", "NetlistError", "Phase",
    "PowerElectronics", "SwitchSchedule", "TopologyError", "TransientResult", "WaveformError", "apply_design",
    "dc_gain", "parse", "reference_netlist", "simulate_converter", "time_average", "transient",
    "voltage_ripple", "write",
]
