#!/usr/bin/env python3
"""Standalone Newton-Raphson power flow used to generate frozen test fixtures.

Reads the project case format (BUS/BRANCH/GEN/LOAD sections) and solves the
AC power flow with numpy only. Independent of the Rust implementation: the
Y-bus stamping, mismatch equations and Jacobian are written from scratch here
so fixture values are not self-referential.

Usage:
  python3 tools/pf_oracle.py cases/ieee39.case [--qlim]
"""
import sys
import numpy as np


def parse_case(path):
    base_mva = 100.0
    buses, branches, gens, loads = [], [], [], []
    section = None
    with open(path) as f:
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            toks = line.split()
            if toks[0] == "BASE_MVA":
                base_mva = float(toks[1])
                continue
            if toks[0] in ("BUS", "BRANCH", "GEN", "LOAD", "DYN"):
                section = toks[0]
                continue
            if toks[0] == "END":
                section = None
                continue
            if section == "BUS":
                buses.append((int(toks[0]), float(toks[1]), toks[2]))
            elif section == "BRANCH":
                branches.append((int(toks[0]), int(toks[1]), int(toks[2]),
                                 float(toks[3]), float(toks[4]), float(toks[5]),
                                 float(toks[6]), float(toks[7]), toks[8]))
            elif section == "GEN":
                # id bus p_mw qmin qmax v_set h d xd' pmax droop tgov ka tex efdmax
                gens.append((int(toks[0]), int(toks[1]), float(toks[2]),
                             float(toks[3]), float(toks[4]), float(toks[5])))
            elif section == "LOAD":
                loads.append((int(toks[0]), int(toks[1]), float(toks[2]),
                              float(toks[3])))
    return base_mva, buses, branches, gens, loads


def solve(path, qlim=False, tol=1e-10, itmax=50):
    base, buses, branches, gens, loads = parse_case(path)
    n = len(buses)
    idx = {b[0]: i for i, b in enumerate(buses)}
    Y = np.zeros((n, n), dtype=complex)
    for (_bid, f, t, r, x, b, tap, _rate, _kind) in branches:
        i, j = idx[f], idx[t]
        y = 1.0 / complex(r, x)
        ysh = complex(0.0, b / 2.0)
        a = tap if tap != 0 else 1.0
        Y[i, i] += (y + ysh) / (a * a)
        Y[j, j] += y + ysh
        Y[i, j] += -y / a
        Y[j, i] += -y / a

    P = np.zeros(n)
    Q = np.zeros(n)
    for (_lid, bus, p, q) in loads:
        P[idx[bus]] -= p / base
        Q[idx[bus]] -= q / base
    vset = {}
    for (_gid, bus, p, _qmin, _qmax, vs) in gens:
        P[idx[bus]] += p / base
        vset[idx[bus]] = vs

    types = [b[2] for b in buses]  # slack | pv | pq
    slack = [i for i, t in enumerate(types) if t == "slack"]
    pv = [i for i, t in enumerate(types) if t == "pv"]
    pq = [i for i, t in enumerate(types) if t == "pq"]
    assert len(slack) == 1

    vm = np.ones(n)
    va = np.zeros(n)
    for i in pv + slack:
        vm[i] = vset.get(i, 1.0)

    def calc_s():
        V = vm * np.exp(1j * va)
        return V * np.conj(Y @ V)

    npv = len(pv)
    for it in range(itmax):
        S = calc_s()
        dP = P - S.real
        dQ = Q - S.imag
        mis = np.concatenate([dP[pv + pq], dQ[pq]])
        if np.max(np.abs(mis)) < tol:
            return buses, vm, va, it, S
        # Jacobian by blocks (polar form)
        V = vm * np.exp(1j * va)
        dSdVa = 1j * np.diag(V) @ np.conj(np.diag(Y @ V) - Y @ np.diag(V))
        dSdVm = np.diag(V / vm) @ np.conj(np.diag(Y @ V)) + \
            np.diag(V) @ np.conj(Y @ np.diag(V / vm))
        rows_p, rows_q = pv + pq, pq
        J11 = dSdVa[np.ix_(rows_p, rows_p)].real
        J12 = dSdVm[np.ix_(rows_p, rows_q)].real
        J21 = dSdVa[np.ix_(rows_q, rows_p)].imag
        J22 = dSdVm[np.ix_(rows_q, rows_q)].imag
        J = np.block([[J11, J12], [J21, J22]])
        dx = np.linalg.solve(J, mis)
        va[rows_p] += dx[:len(rows_p)]
        vm[rows_q] += dx[len(rows_p):]
    raise RuntimeError("did not converge")


def main():
    path = sys.argv[1]
    buses, vm, va, it, S = solve(path)
    print(f"# converged in {it} iterations")
    print("bus,vm_pu,va_deg")
    for k, b in enumerate(buses):
        print(f"{b[0]},{vm[k]:.9f},{np.degrees(va[k]):.9f}")
    psl = S.real
    print(f"# total injection P = {psl.sum():.6f} pu (losses)", file=sys.stderr)


if __name__ == "__main__":
    main()
