"""Expected stdout of ``designbench simulate`` for a seeded random MBB design.

The design is the first ``default_rng(3).random((nely, nelx))`` draw, which is
what the CLI uses when no ``--design`` is given.  Compliance comes from a dense
solve built on the 88-line element matrix and dof layout, sharing no code with
the package.  Run once to write ``tests/data/cli_simulate_golden.json``::

    python tests/oracles/cli_simulate_golden.py
"""
import json
import pathlib

import numpy as np

from top88_reference import lk

NELX, NELY, SEED = 12, 6, 3


def dense_compliance(x_col, nelx, nely, penal=3.0, Emin=1e-9, E0=1.0):
    ndof = 2*(nelx + 1)*(nely + 1)
    K = np.zeros((ndof, ndof))
    KE = lk()
    for elx in range(nelx):
        for ely in range(nely):
            n1 = (nely + 1)*elx + ely
            n2 = (nely + 1)*(elx + 1) + ely
            edof = [2*n1 + 2, 2*n1 + 3, 2*n2 + 2, 2*n2 + 3, 2*n2, 2*n2 + 1, 2*n1, 2*n1 + 1]
            E = Emin + x_col[ely + elx*nely]**penal*(E0 - Emin)
            K[np.ix_(edof, edof)] += E*KE
    fixed = np.union1d(np.arange(0, 2*(nely + 1), 2), [ndof - 1])
    free = np.setdiff1d(np.arange(ndof), fixed)
    f = np.zeros(ndof)
    f[1] = -1.0
    u = np.zeros(ndof)
    u[free] = np.linalg.solve(K[np.ix_(free, free)], f[free])
    return float(f @ u)


def main():
    design = np.random.default_rng(SEED).random((NELY, NELX))
    golden = {
        "argv": ["simulate", "--problem", "beams2d/v0", "--config", f"nelx={NELX}", "--config", f"nely={NELY}",
                 "--seed", str(SEED)],
        "stdout": {
            "conditions": {"forcedist": 0.0, "overhang_constraint": 0.0, "rmin": 2.0, "volfrac": 0.35},
            "objectives": {"compliance": dense_compliance(design.ravel(order="F"), NELX, NELY)},
            "problem": "beams2d/v0",
            "seed": SEED,
        },
    }
    out = pathlib.Path(__file__).resolve().parents[1] / "data" / "cli_simulate_golden.json"
    out.write_text(json.dumps(golden, indent=2, sort_keys=True) + "\n")
    print(out, golden["stdout"]["objectives"])


if __name__ == "__main__":
    main()
