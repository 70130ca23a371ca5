"""Independent test oracles: high-precision Wirtinger finite differences.

The production jets are validated coefficient-by-coefficient against central
finite differences of the same scalar functions, with step 1e-4 and one
Richardson step.  Fourth-order mixed stencils with h = 1e-4 amplify rounding
noise by ~ (1/h)^4 = 1e16, which float64 cannot survive, so the oracle
evaluates the target functions in multiprecision (gmpy2), keeping the
truncation-vs-rounding budget at ~1e-12 relative.  Only the *evaluation*
precision is raised; the differencing scheme itself stays plain central
differences at the given step plus one Richardson step.

These helpers live in the test suite only; the production path never
finite-differences anything.
"""

from __future__ import annotations

import math

import gmpy2
from gmpy2 import mpc, mpfr

PRECISION_BITS = 200
FD_STEP = 1e-4


def _ctx():
    ctx = gmpy2.get_context()
    ctx.precision = PRECISION_BITS
    return ctx


def wirtinger_stencil(n, alpha, beta, h):
    """Stencil (offset -> weight) for d^alpha dbar^beta as nested central
    differences of the real coordinates, offsets in integer units of h/2."""
    ops = []
    for j, a in enumerate(alpha):
        ops.extend([("z", j)] * a)
    for j, b in enumerate(beta):
        ops.extend([("zb", j)] * b)

    # offsets live in Z^{2n}: per real coordinate (x_0..x_{n-1}, y_0..y_{n-1})
    stencil = {(0,) * (2 * n): mpc(1)}
    half = mpfr(h) / 2
    inv2h = 1 / (2 * mpfr(h))
    for kind, j in ops:
        new = {}

        def add(off, w):
            new[off] = new.get(off, mpc(0)) + w

        # d/dz = (d/dx - i d/dy)/2,  d/dzbar = (d/dx + i d/dy)/2
        comps = (
            (j, mpc(1, 0) / 2),
            (n + j, mpc(0, -1) / 2 if kind == "z" else mpc(0, 1) / 2),
        )
        for off, w in stencil.items():
            for axis, wirt in comps:
                up = list(off)
                up[axis] += 2  # +h in units of h/2
                dn = list(off)
                dn[axis] -= 2
                add(tuple(up), w * wirt * inv2h)
                add(tuple(dn), -w * wirt * inv2h)
        stencil = new
    return stencil


def _apply_stencil(fn_cache, stencil, scale):
    total = mpc(0)
    for off, w in stencil.items():
        total += w * fn_cache(tuple(o * scale for o in off))
    return total


def fd_derivative(fn_mp, z0, alpha, beta, h=FD_STEP):
    """Central-difference derivative with one Richardson step.

    ``fn_mp`` maps a tuple of mpc points to an mpfr/mpc value.  Offsets from
    the two grids (h and h/2) share a memoized evaluation cache.
    """
    _ctx()
    n = len(z0)
    z0 = [mpc(complex(c)) for c in z0]
    quarter = mpfr(h) / 4  # offsets from the h/2 stencil are in units of h/4

    cache: dict = {}

    def fn_at(off_units):
        if off_units not in cache:
            z = [
                z0[j] + quarter * off_units[j] + mpc(0, 1) * quarter * off_units[n + j]
                for j in range(n)
            ]
            cache[off_units] = fn_mp(z)
        return cache[off_units]

    s_h = wirtinger_stencil(n, alpha, beta, h)
    s_h2 = wirtinger_stencil(n, alpha, beta, h / 2)
    # rescale offsets to the shared h/4 grid: h-stencil units double twice
    f_h = _apply_stencil(fn_at, s_h, 2)
    f_h2 = _apply_stencil(fn_at, s_h2, 1)
    val = (4 * f_h2 - f_h) / 3
    return complex(val)


def compare_jet_with_fd(jet, fn_mp, rel_tol=1e-5, h=FD_STEP, max_order=None):
    """Max relative error between jet derivative values and the FD oracle."""
    sp = jet.space
    n = jet.dim
    worst = 0.0
    worst_idx = None
    scale = max(1.0, abs(jet.value))
    for m in sp.indices:
        order = sum(m)
        if order > jet.order or order == 0:
            continue
        if max_order is not None and order > max_order:
            continue
        alpha, beta = m[:n], m[n:]
        ref = fd_derivative(fn_mp, jet.base, alpha, beta, h=h)
        got = jet.derivative(alpha, beta)
        err = abs(got - ref) / max(1.0, abs(ref))
        if err > worst:
            worst, worst_idx = err, m
    return worst, worst_idx


# -- multiprecision builders for the shipped kernels -------------------------


def mp_log_kernel_ball(n):
    _ctx()
    pi = gmpy2.const_pi()
    const = gmpy2.log(mpfr(math.factorial(n)) / pi ** n)

    def fn(z):
        s = mpfr(1)
        for c in z:
            s -= (c * c.conjugate()).real
        return const - (n + 1) * gmpy2.log(s)

    return fn


def mp_log_kernel_series(model):
    """log of the truncated monomial series, with the model's own float norms
    converted exactly to multiprecision (the oracle differentiates the same
    function the jet pipeline evaluates)."""
    _ctx()
    exps = model.exponents
    invc = [mpfr(float(v)) for v in model.inv_norms]
    D = int(model.degrees.max())
    n = model.dim

    def fn(z):
        pows = []
        for j in range(n):
            s = (z[j] * z[j].conjugate()).real
            row = [mpfr(1)]
            for _ in range(D):
                row.append(row[-1] * s)
            pows.append(row)
        total = mpfr(0)
        for t in range(len(invc)):
            term = invc[t]
            for j in range(n):
                term = term * pows[j][exps[t, j]]
            total += term
        return gmpy2.log(total)

    return fn


def mp_log_kernel_affine(spec):
    _ctx()
    import numpy as np

    Ainv, t = spec.affine.inverse_arrays()
    n = spec.dim
    ball = mp_log_kernel_ball(n)
    det_term = gmpy2.log(mpfr(abs(np.linalg.det(Ainv)) ** 2))
    Ainv_mp = [[mpc(complex(Ainv[l, m])) for m in range(n)] for l in range(n)]
    t_mp = [mpc(complex(c)) for c in t]

    def fn(z):
        pre = []
        for l in range(n):
            acc = mpc(0)
            for m in range(n):
                acc += Ainv_mp[l][m] * (z[m] - t_mp[m])
            pre.append(acc)
        return ball(pre) + det_term

    return fn
