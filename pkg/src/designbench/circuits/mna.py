"""Fixed-step modified nodal analysis transient with companion models.

Capacitors and inductors become Norton companions (backward Euler or
trapezoidal), voltage sources add one branch-current unknown each, switches
are two-valued resistors and diodes are linearized by damped Newton.  The
stepping loop is compiled with numba.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numba
import numpy as np

from designbench.core import SimulationError
from designbench.circuits.netlist import Kind, Netlist, Phase

VT = 0.02585
GMIN = 1e-12
NEWTON_TOL = 1e-9
NEWTON_MAX = 100
EXP_LIMIT = 40.0  # past this the exponential is continued linearly
G_IC = 1e9  # conductance pinning capacitor voltages for the t = 0 operating point

_OK, _SINGULAR, _NEWTON = 0, 1, 2


class Method(str, enum.Enum):
    BACKWARD_EULER = "BackwardEuler"
    TRAPEZOIDAL = "Trapezoidal"


class TopologyError(SimulationError):
    """Singular MNA matrix (e.g. a loop of voltage sources or a floating subcircuit)."""


class ConvergenceError(SimulationError):
    """Newton iteration on the diodes did not converge within a step."""


@dataclass
class TransientResult:
    times: np.ndarray
    node_voltages: np.ndarray  # (len(times), n_nodes); column 0 is ground
    inductor_currents: np.ndarray  # (len(times), n_inductors)
    output: int | None = None
    newton_iterations: int = 0

    @property
    def v_load(self) -> np.ndarray:
        if self.output is None:
            raise ValueError("netlist declares no OUTPUT node")
        return self.node_voltages[:, self.output]

    def voltage(self, node: int) -> np.ndarray:
        return self.node_voltages[:, node]


@numba.njit(cache=True)
def _diode(v, i_s, nvt):
    # exponential continued linearly past EXP_LIMIT so large forward steps stay finite
    a = v / nvt
    if a > EXP_LIMIT:
        e = math.exp(EXP_LIMIT)
        return i_s * (e * (1.0 + a - EXP_LIMIT) - 1.0) + GMIN * v, i_s * e / nvt + GMIN
    e = math.exp(a)
    return i_s * (e - 1.0) + GMIN * v, i_s * e / nvt + GMIN


@numba.njit(cache=True)
def _limit(v_new, v_old, nvt, vcrit):
    # junction-voltage limiting in the style of SPICE pnjlim
    if v_new > vcrit and abs(v_new - v_old) > 2.0 * nvt:
        if v_old > 0.0:
            arg = 1.0 + (v_new - v_old) / nvt
            if arg > 0.0:
                return v_old + nvt * math.log(arg)
            return vcrit
        return nvt * math.log(v_new / nvt)
    return v_new


@numba.njit(cache=True)
def _stamp_g(G, a, b, g):
    if a > 0:
        G[a - 1, a - 1] += g
    if b > 0:
        G[b - 1, b - 1] += g
    if a > 0 and b > 0:
        G[a - 1, b - 1] -= g
        G[b - 1, a - 1] -= g


@numba.njit(cache=True)
def _stamp_i(rhs, a, b, i):
    # current i flowing from a to b through the element (leaves a, enters b)
    if a > 0:
        rhs[a - 1] -= i
    if b > 0:
        rhs[b - 1] += i


@numba.njit(cache=True)
def _vdiff(x, a, b):
    va = x[a - 1] if a > 0 else 0.0
    vb = x[b - 1] if b > 0 else 0.0
    return va - vb


@numba.njit(cache=True)
def _run(n_nodes, r_nodes, r_g, c_nodes, c_val, c_v0, l_nodes, l_val, l_i0, v_nodes, v_val,
         s_nodes, s_ron, s_roff, s_primary, d_nodes, d_is, d_n,
         dt, n_steps, rec_start, steps_per_period, on_steps, trapezoidal):
    nn = n_nodes - 1
    nv = v_nodes.shape[0]
    size = nn + nv
    nc, nl, nd, ns = c_val.shape[0], l_val.shape[0], d_is.shape[0], s_ron.shape[0]
    n_rec = n_steps - rec_start + 1
    out_v = np.zeros((n_rec, n_nodes))
    out_il = np.zeros((n_rec, nl))

    vc = c_v0.copy()
    ic = np.zeros(nc)
    il = l_i0.copy()
    vl = np.zeros(nl)
    nvt = d_n * VT
    vcrit = np.empty(nd)
    vd = np.zeros(nd)
    for k in range(nd):
        vcrit[k] = nvt[k] * math.log(nvt[k] / (math.sqrt(2.0) * d_is[k]))
    x = np.zeros(size)
    total_newton = 0

    for step in range(n_steps + 1):
        # step 0 is the operating point at t = 0; step n > 0 advances t_{n-1} -> t_n
        phase_idx = (step - 1 if step > 0 else 0) % steps_per_period
        primary_on = phase_idx < on_steps
        use_trap = trapezoidal and step > 1
        G0 = np.zeros((size, size))
        rhs0 = np.zeros(size)
        for k in range(r_g.shape[0]):
            _stamp_g(G0, r_nodes[k, 0], r_nodes[k, 1], r_g[k])
        for k in range(ns):
            on = primary_on if s_primary[k] else not primary_on
            _stamp_g(G0, s_nodes[k, 0], s_nodes[k, 1], 1.0 / (s_ron[k] if on else s_roff[k]))
        for k in range(nc):
            a, b = c_nodes[k, 0], c_nodes[k, 1]
            if step == 0:
                g, ieq = G_IC, -G_IC * vc[k]
            elif use_trap:
                g = 2.0 * c_val[k] / dt
                ieq = -(g * vc[k] + ic[k])
            else:
                g = c_val[k] / dt
                ieq = -g * vc[k]
            _stamp_g(G0, a, b, g)
            _stamp_i(rhs0, a, b, ieq)
        for k in range(nl):
            a, b = l_nodes[k, 0], l_nodes[k, 1]
            if step == 0:
                _stamp_i(rhs0, a, b, il[k])
            elif use_trap:
                g = dt / (2.0 * l_val[k])
                _stamp_g(G0, a, b, g)
                _stamp_i(rhs0, a, b, il[k] + g * vl[k])
            else:
                _stamp_g(G0, a, b, dt / l_val[k])
                _stamp_i(rhs0, a, b, il[k])
        for k in range(nv):
            a, b = v_nodes[k, 0], v_nodes[k, 1]
            row = nn + k
            if a > 0:
                G0[a - 1, row] += 1.0
                G0[row, a - 1] += 1.0
            if b > 0:
                G0[b - 1, row] -= 1.0
                G0[row, b - 1] -= 1.0
            rhs0[row] = v_val[k]
        if step == 0 and nl > 0:
            # inductors act as current sources at t = 0; keep their nodes grounded weakly
            for k in range(nl):
                _stamp_g(G0, l_nodes[k, 0], l_nodes[k, 1], GMIN)

        converged = False
        for it in range(NEWTON_MAX):
            G = G0.copy()
            rhs = rhs0.copy()
            for k in range(nd):
                a, b = d_nodes[k, 0], d_nodes[k, 1]
                i_d, g_d = _diode(vd[k], d_is[k], nvt[k])
                _stamp_g(G, a, b, g_d)
                _stamp_i(rhs, a, b, i_d - g_d * vd[k])
            try:
                x_new = np.linalg.solve(G, rhs)
            except Exception:
                return out_v, out_il, _SINGULAR, step, total_newton
            for i in range(size):
                if not np.isfinite(x_new[i]):
                    return out_v, out_il, _SINGULAR, step, total_newton
            total_newton += 1
            delta = 0.0
            for i in range(nn):
                d = abs(x_new[i] - x[i])
                if d > delta:
                    delta = d
            limited = False
            for k in range(nd):
                raw = _vdiff(x_new, d_nodes[k, 0], d_nodes[k, 1])
                lim = _limit(raw, vd[k], nvt[k], vcrit[k])
                if lim != raw:
                    limited = True
                vd[k] = lim
            x = x_new
            if nd == 0 or (delta < NEWTON_TOL and not limited):
                converged = True
                break
        if not converged:
            return out_v, out_il, _NEWTON, step, total_newton

        for k in range(nc):
            v = _vdiff(x, c_nodes[k, 0], c_nodes[k, 1])
            if step > 0:
                if use_trap:
                    ic[k] = 2.0 * c_val[k] / dt * (v - vc[k]) - ic[k]
                else:
                    ic[k] = c_val[k] / dt * (v - vc[k])
                vc[k] = v
        for k in range(nl):
            v = _vdiff(x, l_nodes[k, 0], l_nodes[k, 1])
            if step > 0:
                if use_trap:
                    il[k] = il[k] + dt / (2.0 * l_val[k]) * (v + vl[k])
                else:
                    il[k] = il[k] + dt / l_val[k] * v
            vl[k] = v
        if step >= rec_start:
            r = step - rec_start
            for i in range(nn):
                out_v[r, i + 1] = x[i]
            for k in range(nl):
                out_il[r, k] = il[k]
    return out_v, out_il, _OK, n_steps, total_newton


def _nodes(elements) -> np.ndarray:
    return np.array([e.nodes for e in elements], dtype=np.int64).reshape(-1, 2)


def _vals(elements, idx: int) -> np.ndarray:
    return np.array([e.full_values()[idx] for e in elements], dtype=np.float64)


def transient(netlist: Netlist, t_start: float, t_end: float, dt: float,
              method: Method | str = Method.BACKWARD_EULER) -> TransientResult:
    """Integrate from ``t = 0`` and record the grid points in ``[t_start, t_end]``.

    ``t_start`` and ``t_end`` are rounded to the nearest multiple of ``dt``.
    Switches follow ``netlist.schedule``: PRIMARY switches conduct during
    the first ``round(duty * period / dt)`` steps of every period.
    """
    method = Method(method)
    if dt <= 0:
        raise ValueError("dt must be positive")
    n_steps = int(round(t_end / dt))
    rec_start = int(round(t_start / dt))
    if not 0 <= rec_start <= n_steps:
        raise ValueError(f"need 0 <= t_start <= t_end, got [{t_start}, {t_end}]")
    switches = netlist.of_kind(Kind.S)
    sched = netlist.schedule
    if switches:
        steps_per_period = int(round(sched.period / dt))
        if steps_per_period < 50:
            raise ValueError(f"dt={dt} too coarse: need dt <= period/50 = {sched.period / 50}")
        on_steps = int(round(sched.duty * steps_per_period))
        primary = np.array([sched.phases[s.name] == Phase.PRIMARY for s in switches])
    else:
        steps_per_period, on_steps, primary = 1, 1, np.zeros(0, dtype=np.bool_)

    R, C, L = netlist.of_kind(Kind.R), netlist.of_kind(Kind.C), netlist.of_kind(Kind.L)
    V, D = netlist.of_kind(Kind.V), netlist.of_kind(Kind.D)
    out_v, out_il, status, step, iters = _run(
        netlist.n_nodes,
        _nodes(R), 1.0 / _vals(R, 0),
        _nodes(C), _vals(C, 0), _vals(C, 1),
        _nodes(L), _vals(L, 0), _vals(L, 1),
        _nodes(V), _vals(V, 0),
        _nodes(switches), _vals(switches, 0), _vals(switches, 1), primary,
        _nodes(D), _vals(D, 0), _vals(D, 1),
        float(dt), n_steps, rec_start, steps_per_period, on_steps, method == Method.TRAPEZOIDAL)
    if status == _SINGULAR:
        raise TopologyError(f"singular MNA matrix at t = {step * dt:.9g} s (check for floating nodes or source loops)")
    if status == _NEWTON:
        raise ConvergenceError(f"diode Newton iteration did not converge in {NEWTON_MAX} iterations at t = {step * dt:.9g} s")
    times = np.arange(rec_start, n_steps + 1) * dt
    return TransientResult(times, out_v, out_il, netlist.output, int(iters))
