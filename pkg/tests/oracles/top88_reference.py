"""Stand-alone transcription of the public 88-line topology optimization code.

Density filter variant (ft=2), MBB half-beam boundary conditions.  This file
deliberately shares no code with the package; it is run once to produce
``tests/data/top88_60x20.json``::

    python tests/oracles/top88_reference.py
"""
import json
import pathlib
import sys

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import spsolve


def lk(E=1.0, nu=0.3):
    k = np.array([1/2 - nu/6, 1/8 + nu/8, -1/4 - nu/12, -1/8 + 3*nu/8,
                  -1/4 + nu/12, -1/8 - nu/8, nu/6, 1/8 - 3*nu/8])
    KE = E/(1 - nu**2)*np.array([
        [k[0], k[1], k[2], k[3], k[4], k[5], k[6], k[7]],
        [k[1], k[0], k[7], k[6], k[5], k[4], k[3], k[2]],
        [k[2], k[7], k[0], k[5], k[6], k[3], k[4], k[1]],
        [k[3], k[6], k[5], k[0], k[7], k[2], k[1], k[4]],
        [k[4], k[5], k[6], k[7], k[0], k[1], k[2], k[3]],
        [k[5], k[4], k[3], k[2], k[1], k[0], k[7], k[6]],
        [k[6], k[3], k[4], k[1], k[2], k[7], k[0], k[5]],
        [k[7], k[2], k[1], k[4], k[3], k[6], k[5], k[0]]])
    return KE


def top88(nelx, nely, volfrac, penal, rmin, maxloop=2000):
    Emin, Emax = 1e-9, 1.0
    ndof = 2*(nelx + 1)*(nely + 1)
    x = volfrac*np.ones(nely*nelx)
    xPhys = x.copy()
    KE = lk()
    edofMat = np.zeros((nelx*nely, 8), dtype=int)
    for elx in range(nelx):
        for ely in range(nely):
            el = ely + elx*nely
            n1 = (nely + 1)*elx + ely
            n2 = (nely + 1)*(elx + 1) + ely
            edofMat[el, :] = [2*n1 + 2, 2*n1 + 3, 2*n2 + 2, 2*n2 + 3,
                              2*n2, 2*n2 + 1, 2*n1, 2*n1 + 1]
    iK = np.kron(edofMat, np.ones((8, 1))).flatten()
    jK = np.kron(edofMat, np.ones((1, 8))).flatten()

    nfilter = int(nelx*nely*((2*(np.ceil(rmin) - 1) + 1)**2))
    iH = np.zeros(nfilter)
    jH = np.zeros(nfilter)
    sH = np.zeros(nfilter)
    cc = 0
    for i in range(nelx):
        for j in range(nely):
            row = i*nely + j
            kk1 = int(np.maximum(i - (np.ceil(rmin) - 1), 0))
            kk2 = int(np.minimum(i + np.ceil(rmin), nelx))
            ll1 = int(np.maximum(j - (np.ceil(rmin) - 1), 0))
            ll2 = int(np.minimum(j + np.ceil(rmin), nely))
            for k in range(kk1, kk2):
                for l in range(ll1, ll2):
                    col = k*nely + l
                    fac = rmin - np.sqrt((i - k)*(i - k) + (j - l)*(j - l))
                    iH[cc] = row
                    jH[cc] = col
                    sH[cc] = np.maximum(0.0, fac)
                    cc += 1
    H = coo_matrix((sH, (iH, jH)), shape=(nelx*nely, nelx*nely)).tocsc()
    Hs = np.asarray(H.sum(1)).ravel()

    dofs = np.arange(ndof)
    fixed = np.union1d(dofs[0:2*(nely + 1):2], np.array([ndof - 1]))
    free = np.setdiff1d(dofs, fixed)
    f = np.zeros(ndof)
    f[1] = -1.0
    u = np.zeros(ndof)

    loop = 0
    change = 1.0
    history = []
    while change > 0.01 and loop < maxloop:
        loop += 1
        sK = (KE.flatten()[np.newaxis]).T*(Emin + xPhys**penal*(Emax - Emin))
        K = coo_matrix((sK.flatten(order='F'), (iK, jK)), shape=(ndof, ndof)).tocsc()
        K = K[free, :][:, free]
        u[free] = spsolve(K, f[free])
        ce = (np.dot(u[edofMat].reshape(nelx*nely, 8), KE)*u[edofMat].reshape(nelx*nely, 8)).sum(1)
        obj = ((Emin + xPhys**penal*(Emax - Emin))*ce).sum()
        dc = (-penal*xPhys**(penal - 1)*(Emax - Emin))*ce
        dv = np.ones(nely*nelx)
        dc = np.asarray(H*(dc/Hs))
        dv = np.asarray(H*(dv/Hs))
        # optimality criteria
        l1, l2, move = 0.0, 1e9, 0.2
        xold = x.copy()
        while (l2 - l1)/(l1 + l2) > 1e-3:
            lmid = 0.5*(l2 + l1)
            xnew = np.maximum(0.0, np.maximum(x - move, np.minimum(1.0, np.minimum(x + move, x*np.sqrt(-dc/dv/lmid)))))
            xPhys = np.asarray(H*xnew/Hs)
            if xPhys.sum() > volfrac*nelx*nely:
                l1 = lmid
            else:
                l2 = lmid
        x = xnew
        change = np.linalg.norm(x - xold, np.inf)
        history.append(float(obj))
    return xPhys, history, loop


def main(out=None):
    nelx, nely, volfrac, rmin, penal = 60, 20, 0.5, 2.4, 3.0
    xPhys, history, loops = top88(nelx, nely, volfrac, penal, rmin)
    record = {
        "nelx": nelx, "nely": nely, "volfrac": volfrac, "rmin": rmin, "penal": penal,
        "iterations": loops,
        "final_compliance": history[-1],
        "compliance_history": history,
        "final_volume": float(xPhys.mean()),
    }
    out = pathlib.Path(out or pathlib.Path(__file__).parents[1] / "data" / "top88_60x20.json")
    out.write_text(json.dumps(record, indent=1) + "\n")
    print(f"{loops} iterations, compliance {history[-1]:.6f}")


if __name__ == "__main__":
    main(*sys.argv[1:])
