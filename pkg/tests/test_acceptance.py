"""One test per acceptance criterion, each at its stated tolerance and time budget."""
import json
import math
import pathlib
import time

import numpy as np
import pytest

from designbench import make
from designbench.circuits.mna import Method, transient
from designbench.circuits.netlist import parse
from designbench.circuits.waveforms import dc_gain, time_average, voltage_ripple
from designbench.cli import main
from designbench.core import DesignSpace
from designbench.datagen import (
    DatasetRecord,
    Dimension,
    GenerateOptions,
    PlanKind,
    SamplingPlan,
    Split,
    generate,
    sample,
    split,
    split_holdout,
)
from designbench.metrics import Bandwidth, KernelParams, cog, dpp_diversity, mmd2, mmd2_permutation_test
from designbench.moo import dominates, fast_nondominated_sort, nsga2
from designbench.photonics.device import DemuxModel, PhotonicsLayout
from designbench.photonics.fdfd import fdfd_solve, system_matrix
from designbench.photonics.parametrization import ContinuationSchedule
from designbench.topopt.oc import oc_step
from designbench.topopt.physics import compliance_structural, compliance_thermal, thermoelastic_objectives
from violation_cases import CASES, run_case

DATA = pathlib.Path(__file__).parent / "data"


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.1f} s, budget {self.seconds} s"


@pytest.mark.criterion(1, "constraint tables and golden messages")
def test_constraint_goldens():
    with Budget(1.0):
        p = make("beams2d/v0")
        msgs = [v.message for v in p.check_constraints(None, {"volfrac": 2.0})]
        assert msgs == ["Config.volfrac: 2.0 ∉ [0.0, 1.0] (Theory, error)",
                        "Config.volfrac: 2.0 ∉ [0.1, 0.9] (Implementation, warning)"]
        assert len(CASES) >= 25
        problems = {c[0] for c in CASES}
        assert len(problems) == 5
        for case in CASES:
            assert run_case(case) == case[4]


@pytest.mark.criterion(2, "Beams2D 60x20 against the 88-line reference")
def test_top88_oracle():
    ref = json.loads((DATA / "top88_60x20.json").read_text())
    with Budget(60.0):
        p = make("beams2d/v0", nelx=60, nely=20)
        x, hist = p.optimize(None, {"volfrac": 0.5, "rmin": 2.4})
    final = hist.objective_values[-1][0]
    assert abs(final - ref["final_compliance"]) <= 0.01 * ref["final_compliance"]
    assert abs(x.mean() - 0.5) <= 1e-3


def _fd_check(fn, grad, rho, rng, k=6, h=1e-6):
    for flat in rng.choice(rho.size, size=k, replace=False):
        idx = np.unravel_index(flat, rho.shape)
        a, b = rho.copy(), rho.copy()
        a[idx] += h
        b[idx] -= h
        fd = (fn(a) - fn(b)) / (2 * h)
        assert abs(fd - grad[idx]) <= 1e-3 * abs(fd), (idx, fd, grad[idx])


@pytest.mark.criterion(3, "adjoint sensitivities against central differences")
def test_sensitivities():
    rng = np.random.default_rng(0)
    with Budget(120.0):
        beams = make("beams2d/v0", nelx=4, nely=4)
        bc = beams.boundary_conditions(beams.merge_conditions(None))
        rho = rng.uniform(0.2, 0.9, (4, 4))
        res = compliance_structural(rho, beams.model, bc)
        _fd_check(lambda r: compliance_structural(r, beams.model, bc).compliance, res.sensitivity, rho, rng)

        heat = make("heatconduction2d/v0", resolution=4)
        bc = heat.boundary_conditions(heat.merge_conditions(None))
        res = compliance_thermal(rho, heat.model, bc)
        _fd_check(lambda r: compliance_thermal(r, heat.model, bc).compliance, res.sensitivity, rho, rng)

        thermo = make("thermoelasticbeams2d/v0", nelx=4, nely=4)
        bc = thermo.boundary_conditions(thermo.merge_conditions(None))
        models = thermo.models()
        res = thermoelastic_objectives(rho, *models, bc)
        _fd_check(lambda r: thermoelastic_objectives(r, *models, bc).total, res.sensitivity, rho, rng)

        layout = PhotonicsLayout(nelx=20, nely=20, dl=0.05, pml_cells=10, space=6)
        model = DemuxModel(layout, (1.5, 1.3), 1, 0.01)
        x = rng.random((20, 20))
        ev = model.evaluate(x, 4.0)
        _fd_check(lambda r: model.evaluate(r, 4.0, False).value, ev.gradient, x, rng, h=1e-5)


@pytest.mark.criterion(4, "OC volume contract and precision guard")
def test_oc_contract():
    p = make("beams2d/v0", nelx=40, nely=20)
    _, hist = p.optimize(None, {"volfrac": 0.4, "rmin": 2.0}, max_iter=40)
    vols = np.array(hist.extra["volume"])
    assert np.all(np.abs(vols - 0.4) <= 1e-3)
    step = oc_step(np.full(64, 0.5), np.zeros(64), np.ones(64), 0.5)
    assert step.hit_precision_guard


@pytest.mark.criterion(5, "FDFD stencil, PML re-entry and continuation")
def test_fdfd():
    rng = np.random.default_rng(1)
    eps = rng.uniform(1, 12, (5, 5))
    omega, dl = 2 * np.pi / 1.55, 0.1
    A = system_matrix(eps, omega, dl, 0)
    e = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    Ae = (A @ e.ravel()).reshape(5, 5)
    for i in range(1, 4):
        for j in range(1, 4):
            lap = (e[i, j + 1] + e[i, j - 1] + e[i + 1, j] + e[i - 1, j] - 4 * e[i, j]) / dl**2
            assert abs(Ae[i, j] - (lap + omega**2 * eps[i, j] * e[i, j])) <= 1e-12 * abs(Ae[i, j])

    n, npml, pad = 120, 20, 100
    big = n + 2 * pad
    src, src_big = np.zeros((n, n)), np.zeros((big, big))
    src[n // 2, n // 2] = src_big[big // 2, big // 2] = 1
    omega, dl = 2 * np.pi / 1.5, 0.04
    near = fdfd_solve(np.ones((n, n)), omega, src, dl, npml)
    far = fdfd_solve(np.ones((big, big)), omega, src_big, dl, npml)[pad:pad + n, pad:pad + n]
    inner = slice(npml + 5, n - npml - 5)
    ratio = np.linalg.norm(near[inner, inner] - far[inner, inner]) / np.linalg.norm(far[inner, inner])
    assert ratio <= 1e-4

    s = ContinuationSchedule(1.0, 300.0, 101)
    assert s.beta(0) == 1.0 and s.beta(100) == 300.0
    assert s.beta(50) == 1.0 + 299.0 * 0.25


@pytest.mark.criterion(6, "circuit integration and waveform formulas")
def test_circuits():
    net = parse("V V1 1 0 1.0\nR R1 1 2 1000.0\nC C1 2 0 1e-06\nOUTPUT 2\n")
    tau = 1e-3

    def err(dt, method):
        res = transient(net, 0.0, 5 * tau, dt, method)
        return np.max(np.abs(res.v_load - (1 - np.exp(-res.times / tau))))

    assert err(tau / 100, Method.TRAPEZOIDAL) <= 1e-3
    for method, lo, hi in ((Method.TRAPEZOIDAL, 3.5, 4.5), (Method.BACKWARD_EULER, 1.8, 2.2)):
        e = [err(tau / k, method) for k in (100, 200, 400)]
        assert lo <= e[0] / e[1] <= hi and lo <= e[1] / e[2] <= hi

    t = np.linspace(0, 1e-3, 101)
    assert abs(dc_gain((t, np.full_like(t, 250.0)), 1000.0) - 0.25) <= 1e-3
    assert voltage_ripple((t, np.full_like(t, 250.0))) == 0.0
    t = np.linspace(1e-3, 1.06e-3, 601)
    assert abs(dc_gain((t, np.linspace(0.0, 100.0, 601)), 1000.0) - 0.05) <= 1e-3
    t = np.linspace(0, 1.0, 100_001)
    v = 10 + np.sin(2 * np.pi * 7 * t)
    assert abs(time_average(t, v) - 10.0) <= 1e-3
    assert abs(voltage_ripple((t, v)) - 0.2) <= 1e-3


@pytest.mark.criterion(7, "metric closed forms, permutation floor and COG")
def test_metrics():
    sigma = 0.8
    kp = KernelParams(sigma, Bandwidth.FIXED)

    def k(a, b):
        return math.exp(-float(np.sum((a - b) ** 2)) / (2 * sigma**2))

    x = np.array([[0.0, 0.0], [1.0, 0.5]])
    y = np.array([[0.3, -0.2], [2.0, 1.0]])
    cross = sum(k(a, b) for a in x for b in y) / 4
    assert abs(mmd2(x, y, kp) - (k(x[0], x[1]) + k(y[0], y[1]) - 2 * cross)) <= 1e-12
    assert abs(mmd2(x[:1], y[:1], kp, unbiased=False) - 2 * (1 - k(x[0], y[0]))) <= 1e-12

    assert dpp_diversity(x, kp).det == pytest.approx(1 - k(x[0], x[1]) ** 2, abs=1e-15)

    rng = np.random.default_rng(2)
    res = mmd2_permutation_test(rng.normal(size=(20, 3)), rng.normal(size=(20, 3)) + 100, n_perms=1000)
    assert res.p_value == 1 / 1001 and abs(res.p_value - 0.001) < 1e-6

    assert cog([3.0, 2.0, 1.0], 1.0) == 3.0
    assert cog([1.0, 1.0], 1.0) == 0.0
    assert cog([3.0, 2.0, 1.0, 1.0], 1.0) == 3.0


def _brute_ranks(F):
    ranks = np.full(len(F), -1)
    left = set(range(len(F)))
    r = 0
    while left:
        layer = [i for i in left if not any(dominates(F[j], F[i]) for j in left)]
        ranks[layer] = r
        left -= set(layer)
        r += 1
    return ranks


@pytest.mark.criterion(8, "NSGA-II sort oracle, front span and determinism")
def test_nsga2():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        F = rng.integers(0, 6, size=(int(rng.integers(1, 51)), int(rng.integers(2, 5)))).astype(float)
        assert np.array_equal(fast_nondominated_sort(F), _brute_ranks(F))

    space = DesignSpace(0.0, 1.0, (1,))

    def line(X):
        return np.column_stack([X[:, 0], 1 - X[:, 0]])

    res = nsga2(line, space, pop_size=20, generations=50, seed=0)
    xs = res.pareto_set.ravel()
    assert xs.min() <= 0.05 and xs.max() >= 0.95
    again = nsga2(line, space, pop_size=20, generations=50, seed=0)
    assert again.pareto_set.tobytes() == res.pareto_set.tobytes()
    assert again.pareto_front.tobytes() == res.pareto_front.tobytes()


@pytest.mark.criterion(9, "dataset counts, splits and parallel byte identity")
def test_dataset_counts(tmp_path):
    dims = [Dimension(f"C{i}", 1e-6, 2e-5) for i in range(1, 7)] + [Dimension(f"L{i}", 1e-6, 1e-3) for i in (1, 2, 3)]
    dims.append(Dimension("T1", 0.1, 0.9, n_levels=9))
    assert len(sample(SamplingPlan(PlanKind.CORNERS, dims))) == 4608

    grid = SamplingPlan(PlanKind.GRID, [Dimension("volume", 0.3, 0.6, n_levels=21),
                                        Dimension("length", 0.0, 1.0, n_levels=21)])
    pts = sample(grid)
    assert len(pts) == 441
    recs = [DatasetRecord(i, p, None, {"c": 0.0}) for i, p in enumerate(pts)]
    split_holdout(recs, {"volume": grid.dims[0].grid_levels()[5:7], "length": grid.dims[1].grid_levels()[5:7]})
    assert sum(r.split is Split.TRAIN for r in recs) == 361

    recs = split([DatasetRecord(i, {"c": float(i)}, None, {"c": 0.0}) for i in range(13824)], (0.7, 0.2, 0.1))
    assert [sum(r.split is s for r in recs) for s in Split] == [9677, 2765, 1382]

    plan = SamplingPlan(PlanKind.GRID, [Dimension("volfrac", levels=(0.3, 0.4)), Dimension("rmin", levels=(1.5, 2.0))])
    opts = GenerateOptions(optimize_options={"max_iter": 10})
    m1 = generate(make("beams2d/v0", nelx=16, nely=8), plan, 1, tmp_path / "p1", opts)
    m2 = generate(make("beams2d/v0", nelx=16, nely=8), plan, 2, tmp_path / "p2", opts)
    assert (tmp_path / "p1" / m1["data_file"]).read_bytes() == (tmp_path / "p2" / m2["data_file"]).read_bytes()
    assert m1["content_sha256"] == m2["content_sha256"]


@pytest.mark.criterion(10, "generate and evaluate end to end on Beams2D 40x20")
def test_end_to_end(tmp_path, capsys):
    common = ["--problem", "beams2d/v0", "--config", "nelx=40", "--config", "nely=20"]
    with Budget(600.0):
        assert main(["generate", *common, "--grid", "volfrac=0.3:0.5:3", "--grid", "rmin=1.5:3.0:3",
                     "--out", str(tmp_path)]) == 0
        manifest = json.loads(capsys.readouterr().out)
        assert manifest["counts"]["total"] == 9 and manifest["counts"]["failures"] == 0
        data = tmp_path / manifest["data_file"]
        assert main(["evaluate", *common, "--dataset", str(data), "--metric", "mmd2", "--metric", "rvc"]) == 0
        report = json.loads(capsys.readouterr().out)
    assert abs(report["mmd2"]["mean"]) <= 1e-12
    assert report["rvc"]["mean"] == 0.0
