#!/usr/bin/env python3
"""Numerically construct antipodal spherical designs of orders 7, 9 and 11.

Each design is a set of n/2 unit vectors plus their antipodes.  Odd-degree
moments vanish by symmetry, so only the even-degree moment conditions are
solved.  Even polynomials of degree t-1 restricted to the sphere span every
even polynomial of lower degree, so the monomials of that single degree are
enough.  The system is underdetermined; a minimum-norm Gauss-Newton step
(least squares with an analytic Jacobian) from random starts converges
quadratically once it gets close.

Usage: generate_antipodal_designs.py OUTDIR
"""
import sys
from math import prod

import numpy as np


def dfact(n):
    return prod(range(n, 0, -2)) if n > 0 else 1


def sphere_mean(a, b, c):
    if a % 2 or b % 2 or c % 2:
        return 0.0
    return dfact(a - 1) * dfact(b - 1) * dfact(c - 1) / dfact(a + b + c + 1)


def monomials(degree):
    return np.array([(a, b, degree - a - b) for a in range(degree + 1) for b in range(degree + 1 - a)])


def residual_and_jacobian(v, mons, targets):
    n = v.shape[0]
    norms = np.linalg.norm(v, axis=1)
    u = v / norms[:, None]
    deg = mons.max()
    powers = u[:, :, None] ** np.arange(deg + 1)[None, None, :]
    px = powers[:, 0, mons[:, 0]]
    py = powers[:, 1, mons[:, 1]]
    pz = powers[:, 2, mons[:, 2]]
    r = (px * py * pz).mean(axis=0) - targets
    dpx = mons[:, 0] * powers[:, 0, np.maximum(mons[:, 0] - 1, 0)]
    dpy = mons[:, 1] * powers[:, 1, np.maximum(mons[:, 1] - 1, 0)]
    dpz = mons[:, 2] * powers[:, 2, np.maximum(mons[:, 2] - 1, 0)]
    du = np.stack([dpx * py * pz, px * dpy * pz, px * py * dpz], axis=2) / n
    # chain rule through u = v / |v|
    proj = (np.eye(3)[None, :, :] - u[:, :, None] * u[:, None, :]) / norms[:, None, None]
    dv = np.einsum("kma,kab->kmb", du, proj)
    jac = dv.transpose(1, 0, 2).reshape(len(targets), 3 * n)
    return r, jac


def solve(order, half, seed, max_restarts=500):
    mons = monomials(order - 1)
    targets = np.array([sphere_mean(*m) for m in mons])
    rng = np.random.default_rng(seed)
    for attempt in range(max_restarts):
        v = rng.standard_normal((half, 3))
        v /= np.linalg.norm(v, axis=1)[:, None]
        err = np.inf
        for _ in range(300):
            r, jac = residual_and_jacobian(v, mons, targets)
            err = np.max(np.abs(r))
            if err < 1e-15:
                break
            step = np.linalg.lstsq(jac, -r, rcond=1e-12)[0].reshape(half, 3)
            scale = min(1.0, 0.2 / max(np.max(np.abs(step)), 1e-300))
            v = v + scale * step
            v /= np.linalg.norm(v, axis=1)[:, None]
        if err < 1e-15:
            return v, attempt, err
    raise RuntimeError(f"no order-{order} design with {2 * half} points found")


def main():
    outdir = sys.argv[1] if len(sys.argv) > 1 else "."
    for order, size in ((7, 32), (9, 48), (11, 70)):
        u, attempts, err = solve(order, size // 2, seed=order)
        pts = np.vstack([u, -u])
        path = f"{outdir}/antipodal_t{order}_{size}.csv"
        with open(path, "w") as fh:
            fh.write("ux,uy,uz\n")
            for p in pts:
                fh.write(f"{p[0]:.17g},{p[1]:.17g},{p[2]:.17g}\n")
        print(f"order {order}: {size} points, restarts {attempts}, max residual {err:.2e} -> {path}")


if __name__ == "__main__":
    main()
