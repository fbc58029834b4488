"""Derive reference values by reductions that do not touch the library, and freeze them.

Each oracle reduces an instance to a low-dimensional calculus or linear
algebra problem solved with numpy/scipy directly.  Run from the repository
root:

    python3 scripts/freeze_oracles.py            # rewrite tests/oracles/frozen.json
    python3 scripts/freeze_oracles.py --check    # compare against the frozen file
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy import integrate, optimize

FROZEN = Path(__file__).resolve().parents[1] / "tests" / "oracles" / "frozen.json"


def gaussian_interval(s: float) -> dict:
    # h = alpha chi_[-A, A] under e^{-x^2/2}: the binding point is x = A, alpha = e^{-A^2/2}
    res = optimize.minimize_scalar(lambda A: -(2 * A * math.exp(-s * A * A / 2)), bounds=(1e-6, 10),
                                   method="bounded", options={"xatol": 1e-12})
    A = float(res.x)
    alpha = math.exp(-A * A / 2)
    return {"A": A, "alpha": alpha, "objective": 2 * A * alpha ** s}


def square_disk() -> dict:
    # disk of radius r at height alpha inside the unit-height square: r <= 1, alpha <= 1
    res = optimize.linprog([-1.0, -1.0], bounds=[(0, 1), (0, 1)])
    r, alpha = res.x
    return {"A": float(r), "alpha": float(alpha), "objective": math.pi * r * r * alpha}


def interval_tent_lowner() -> dict:
    # beta e^{-B|x|} >= 1 on [-1, 1] forces beta >= e^B; minimize 2 beta / B
    res = optimize.minimize_scalar(lambda B: 2 * math.exp(B) / B, bounds=(1e-3, 10), method="bounded",
                                   options={"xatol": 1e-12})
    B = float(res.x)
    return {"B": B, "beta": math.exp(B), "objective": float(res.fun)}


def gaussian_pair_weights() -> dict:
    # pairs at u = +-1 of e^{-x^2/2}: p = u, v = p/(1+pu), nu = 1/(f(u)(1+pu))
    rows = []
    for u in (1.0, -1.0):
        p = u
        v = p / (1 + p * u)
        mu = math.exp(-u * u / 2)
        nu = 1 / (mu * (1 + p * u))
        rows.append([u * v, mu * nu, v])
    M = np.array(rows).T
    c, *_ = np.linalg.lstsq(M, np.array([1.0, 1.0, 0.0]), rcond=None)
    u1 = {"u": 1.0, "mu": math.exp(-0.5), "v": 0.5, "nu": math.exp(0.5) / 2}
    return {"weights": c.tolist(), "pair": u1}


def simplex_weights() -> dict:
    ang = math.pi / 2 + 2 * math.pi * np.arange(3) / 3
    U = np.column_stack([np.cos(ang), np.sin(ang)])
    M = np.array([np.outer(u, u).ravel() for u in U]).T
    M = np.vstack([M, U.T])
    c, *_ = np.linalg.lstsq(M, np.concatenate([np.eye(2).ravel(), np.zeros(2)]), rcond=None)
    return {"weights": c.tolist()}


def power_weights(q: float) -> dict:
    # Gaussian/interval pairs at u = +-1 with p = u and c = 1
    return {"weights": [(1 / q) * (1 + q * 1.0) / (1 + 1.0)] * 2, "target": 1.0 / q}


def interval_fixed_center() -> dict:
    # chi_[-A + a, A + a] inside [-1, 2]
    free = optimize.linprog([-1.0, 0.0], A_ub=[[1, -1], [1, 1]], b_ub=[1, 2], bounds=[(0, None), (None, None)])
    fixed = optimize.linprog([-1.0], A_ub=[[1], [1]], b_ub=[1, 2], bounds=[(0, None)])
    return {"free": {"A": float(free.x[0]), "a": float(free.x[1])}, "fixed": {"A": float(fixed.x[0]), "a": 0.0}}


def tent_gaussian_lowner() -> dict:
    # beta e^{-(Bx)^2/2} >= e^{-|x|} needs ln beta >= sup_x (B^2 x^2/2 - |x|), which grows without bound
    # past x = 2/B^2 the bracket is positive and grows like B^2 x^2 / 2
    xs = np.logspace(0, 8, 81)
    growth = [float(np.max(0.5 * B * B * xs ** 2 - xs)) for B in (0.01, 0.1, 1.0)]
    return {"infeasible": bool(min(growth) > 1e3), "sup_up_to_1e8": growth}


def gaussian_qpower(q: float, s: float = 1.0) -> dict:
    # g = (1 - y^2)^{1/q}, f = e^{-x^2/2}, h = alpha g(y/A)
    def ln_alpha(A):
        if q * A * A <= 2:
            return 0.0
        return min(0.0, (1 / q) * math.log(q * A * A / 2) - A * A / 2 + 1 / q)

    res = optimize.minimize_scalar(lambda A: -(s * ln_alpha(A) + math.log(A)), bounds=(0.1, 20),
                                   method="bounded", options={"xatol": 1e-12})
    A = float(res.x)
    base = integrate.quad(lambda y: (1 - y * y) ** (s / q), -1, 1, epsabs=1e-13)[0]
    return {"A": A, "alpha": math.exp(ln_alpha(A)), "objective": math.exp(s * ln_alpha(A)) * A * base}


def search_box_interval() -> dict:
    # integral of min(chi_[-1,1], theta) is 2 theta
    theta = optimize.brentq(lambda t: 2 * t - 0.1, 0, 1, xtol=1e-14)
    return {"theta": theta, "rho": 1.0}


def decay_gaussian() -> dict:
    x = np.linspace(0, 10, 200001)
    return {"theta": float(np.max(np.exp(-x * x / 2 + x))), "nu": 1.0}


def derive() -> dict:
    return {
        "gaussian_interval": {str(s): gaussian_interval(s) for s in (0.5, 1.0, 2.0)},
        "square_disk": square_disk(),
        "interval_tent_lowner": interval_tent_lowner(),
        "gaussian_pair_weights": gaussian_pair_weights(),
        "simplex_weights": simplex_weights(),
        "power_weights": {str(q): power_weights(q) for q in (0.25, 0.5)},
        "interval_fixed_center": interval_fixed_center(),
        "tent_gaussian_lowner": tent_gaussian_lowner(),
        "gaussian_qpower": {str(q): gaussian_qpower(q) for q in (0.25, 0.5)},
        "search_box_interval": search_box_interval(),
        "decay_gaussian": decay_gaussian(),
    }


def _close(a, b, tol=1e-9) -> bool:
    if isinstance(a, dict):
        return a.keys() == b.keys() and all(_close(a[k], b[k], tol) for k in a)
    if isinstance(a, list):
        return len(a) == len(b) and all(_close(x, y, tol) for x, y in zip(a, b))
    if isinstance(a, bool):
        return a == b
    return abs(a - b) <= tol * max(1.0, abs(a))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true")
    args = ap.parse_args(argv)
    values = derive()
    if args.check:
        ok = _close(values, json.loads(FROZEN.read_text()))
        print("frozen oracles match" if ok else "frozen oracles differ")
        return 0 if ok else 1
    FROZEN.parent.mkdir(parents=True, exist_ok=True)
    FROZEN.write_text(json.dumps(values, indent=2, sort_keys=True) + "\n")
    print(f"wrote {FROZEN}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
