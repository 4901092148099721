"""Golden constraint findings: (problem id, configuration, conditions, design builder, expected messages).

Each case triggers one or more rows of a problem's constraint table; the
expected list is every finding in declaration order.
"""
import numpy as np


def _grid(shape, fill=0.0, at=None, value=None):
    def build():
        x = np.full(shape, fill)
        if at is not None:
            x[at] = value
        return x
    return build


def _vector(**overrides):
    def build():
        x = np.array([1e-5] * 6 + [5e-4] * 3 + [0.5])
        names = ["C1", "C2", "C3", "C4", "C5", "C6", "L1", "L2", "L3", "T1"]
        for k, v in overrides.items():
            x[names.index(k)] = v
        return x
    return build


CASES = [
    # beams2d
    ("beams2d/v0", {}, {}, None, []),
    ("beams2d/v0", {}, {"volfrac": 2.0}, None, [
        "Config.volfrac: 2.0 ∉ [0.0, 1.0] (Theory, error)",
        "Config.volfrac: 2.0 ∉ [0.1, 0.9] (Implementation, warning)",
    ]),
    ("beams2d/v0", {}, {"volfrac": 0.05}, None, ["Config.volfrac: 0.05 ∉ [0.1, 0.9] (Implementation, warning)"]),
    ("beams2d/v0", {}, {"forcedist": 1.5}, None, ["Config.forcedist: 1.5 ∉ [0.0, 1.0] (Theory, error)"]),
    ("beams2d/v0", {}, {"rmin": 60.0}, None, [
        "Config.rmin: 60.0 ∉ (0.0, 50.0) (Implementation, error)",
        "Config.rmin: 60.0 ∉ [1.0, 10.0] (Implementation, warning)",
    ]),
    ("beams2d/v0", {}, {"rmin": 0.0}, None, [
        "Config.rmin: 0.0 ∉ (0.0, inf) (Theory, error)",
        "Config.rmin: 0.0 ∉ (0.0, 50.0) (Implementation, error)",
        "Config.rmin: 0.0 ∉ [1.0, 10.0] (Implementation, warning)",
    ]),
    ("beams2d/v0", {}, {"rmin": 12.0}, None, ["Config.rmin: 12.0 ∉ [1.0, 10.0] (Implementation, warning)"]),
    ("beams2d/v0", {"nelx": 5}, {}, None, ["Config.nelx: 5 ∉ [10, 1000] (Implementation, warning)"]),
    ("beams2d/v0", {"nely": 2000}, {}, None, ["Config.nely: 2000 ∉ [10, 1000] (Implementation, warning)"]),
    ("beams2d/v0", {"nelx": 0}, {}, None, [
        "Config.nelx: 0 ∉ [1, inf) (Theory, error)",
        "Config.nelx: 0 ∉ [10, 1000] (Implementation, warning)",
    ]),
    ("beams2d/v0", {"nelx": 10, "nely": 10}, {}, _grid((10, 10), 0.0, (3, 4), 1.5),
     ["Design.values: 1.5 ∉ [0.0, 1.0] (Theory, error)"]),
    ("beams2d/v0", {"nelx": 10, "nely": 10}, {}, _grid((10, 10), 0.5),
     ["Design.volume_fraction: 0.5 ∉ [0.0, 0.35] (Theory, warning)"]),
    ("beams2d/v0", {"nelx": 10, "nely": 10}, {}, _grid((10, 10), 0.3505), []),
    # heatconduction2d
    ("heatconduction2d/v0", {}, {}, None, []),
    ("heatconduction2d/v0", {}, {"volume": 1.2}, None, [
        "Config.volume: 1.2 ∉ [0.0, 1.0] (Theory, error)",
        "Config.volume: 1.2 ∉ [0.3, 0.6] (Implementation, warning)",
    ]),
    ("heatconduction2d/v0", {}, {"volume": 0.2}, None, ["Config.volume: 0.2 ∉ [0.3, 0.6] (Implementation, warning)"]),
    ("heatconduction2d/v0", {}, {"length": -0.1}, None, ["Config.length: -0.1 ∉ [0.0, 1.0] (Theory, error)"]),
    ("heatconduction2d/v0", {"resolution": 5}, {}, None,
     ["Config.resolution: 5 ∉ [10, 1000] (Implementation, warning)"]),
    ("heatconduction2d/v0", {"resolution": 0}, {}, None, [
        "Config.resolution: 0 ∉ [1, inf) (Theory, error)",
        "Config.resolution: 0 ∉ [10, 1000] (Implementation, warning)",
    ]),
    ("heatconduction2d/v0", {"resolution": 10}, {}, _grid((10, 10), 0.75),
     ["Design.volume_fraction: 0.75 ∉ [0.0, 0.5] (Theory, warning)"]),
    ("heatconduction2d/v0", {"resolution": 10}, {}, _grid((10, 10), 0.2, (0, 0), -0.5),
     ["Design.values: -0.5 ∉ [0.0, 1.0] (Theory, error)"]),
    # thermoelasticbeams2d
    ("thermoelasticbeams2d/v0", {}, {}, None, []),
    ("thermoelasticbeams2d/v0", {}, {"volfrac": 2.0}, None, [
        "Config.volfrac: 2.0 ∉ [0.0, 1.0] (Theory, error)",
        "Config.volfrac: 2.0 ∉ [0.1, 0.9] (Implementation, warning)",
    ]),
    ("thermoelasticbeams2d/v0", {}, {"rmin": 64.0}, None, [
        "Config.rmin: 64.0 ∉ (0.0, 64.0) (Implementation, error)",
        "Config.rmin: 64.0 ∉ [1.0, 10.0] (Implementation, warning)",
    ]),
    ("thermoelasticbeams2d/v0", {}, {"rmin": -1.0}, None, [
        "Config.rmin: -1.0 ∉ (0.0, inf) (Theory, error)",
        "Config.rmin: -1.0 ∉ (0.0, 64.0) (Implementation, error)",
        "Config.rmin: -1.0 ∉ [1.0, 10.0] (Implementation, warning)",
    ]),
    ("thermoelasticbeams2d/v0", {"nelx": 2000}, {}, None,
     ["Config.nelx: 2000 ∉ [10, 1000] (Implementation, warning)"]),
    ("thermoelasticbeams2d/v0", {"nely": 0}, {}, None, [
        "Config.nely: 0 ∉ [1, inf) (Theory, error)",
        "Config.rmin: 1.5 ∉ (0.0, 0.0) (Implementation, error)",
        "Config.nely: 0 ∉ [10, 1000] (Implementation, warning)",
    ]),
    ("thermoelasticbeams2d/v0", {"nelx": 10, "nely": 10}, {}, _grid((10, 10), 0.5),
     ["Design.volume_fraction: 0.5 ∉ [0.0, 0.3] (Theory, warning)"]),
    # photonics2d
    ("photonics2d/v0", {}, {}, None, []),
    ("photonics2d/v0", {}, {"lambda1": 0.0}, None, [
        "Config.lambda1: 0.0 ∉ (0.0, inf) (Theory, error)",
        "Config.lambda1: 0.0 ∉ [0.5, inf) (Implementation, error)",
        "Config.lambda1: 0.0 ∉ [0.5, 1.5] (Implementation, warning)",
    ]),
    ("photonics2d/v0", {}, {"lambda2": 0.4}, None, [
        "Config.lambda2: 0.4 ∉ [0.5, inf) (Implementation, error)",
        "Config.lambda2: 0.4 ∉ [0.5, 1.5] (Implementation, warning)",
    ]),
    ("photonics2d/v0", {}, {"lambda2": 1.6}, None, ["Config.lambda2: 1.6 ∉ [0.5, 1.5] (Implementation, warning)"]),
    ("photonics2d/v0", {}, {"blur_radius": -1.0}, None, [
        "Config.blur_radius: -1.0 ∉ [0, inf) (Theory, error)",
        "Config.blur_radius: -1.0 ∉ [0, inf) (Implementation, error)",
        "Config.blur_radius: -1.0 ∉ [0, 5] (Implementation, warning)",
    ]),
    ("photonics2d/v0", {}, {"blur_radius": 6.0}, None, ["Config.blur_radius: 6.0 ∉ [0, 5] (Implementation, warning)"]),
    ("photonics2d/v0", {"nelx": 60}, {}, None, [
        "Config.nelx: 60 ∉ (60, inf) (Implementation, error)",
        "Config.nelx: 60 ∉ [90, 200] (Implementation, warning)",
    ]),
    ("photonics2d/v0", {"nelx": 250}, {}, None, ["Config.nelx: 250 ∉ [90, 200] (Implementation, warning)"]),
    ("photonics2d/v0", {"nely": 100}, {}, None, [
        "Config.nely: 100 ∉ [105, inf) (Implementation, error)",
        "Config.nely: 100 ∉ [110, 300] (Implementation, warning)",
    ]),
    ("photonics2d/v0", {"nely": 0}, {}, None, [
        "Config.nely: 0 ∉ [1, inf) (Theory, error)",
        "Config.nely: 0 ∉ [105, inf) (Implementation, error)",
        "Config.nely: 0 ∉ [110, 300] (Implementation, warning)",
    ]),
    ("photonics2d/v0", {}, {}, _grid((120, 120), 0.0, (5, 7), 2.0),
     ["Design.values: 2.0 ∉ [0.0, 1.0] (Theory, error)"]),
    # powerelectronics
    ("powerelectronics/v0", {}, {}, _vector(), []),
    ("powerelectronics/v0", {}, {}, _vector(C1=1e-7), ["Design.C1: 1e-07 ∉ [1e-06, 2e-05] (Theory, error)"]),
    ("powerelectronics/v0", {}, {}, _vector(C6=3e-5), ["Design.C6: 3e-05 ∉ [1e-06, 2e-05] (Theory, error)"]),
    ("powerelectronics/v0", {}, {}, _vector(L2=2e-3), ["Design.L2: 0.002 ∉ [1e-06, 0.001] (Theory, error)"]),
    ("powerelectronics/v0", {}, {}, _vector(T1=0.95, L3=1e-7), [
        "Design.L3: 1e-07 ∉ [1e-06, 0.001] (Theory, error)",
        "Design.T1: 0.95 ∉ [0.1, 0.9] (Theory, error)",
    ]),
]


def case_id(case):
    pid, config, conds, design, _ = case
    parts = [pid.split("/")[0]] + [f"{k}={v}" for k, v in {**config, **conds}.items()]
    if design is not None:
        parts.append("design")
    return "-".join(parts)


def run_case(case):
    from designbench import make

    pid, config, conds, design, _ = case
    problem = make(pid, **config)
    return [v.message for v in problem.check_constraints(None if design is None else design(), conds)]
