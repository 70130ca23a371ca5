"""Bergman metric, Levi-Civita connection and Kaehler curvature at a point.

The metric is g_{jk} = d^2 log K / dz^j dzbar^k.  As a Riemannian metric on
R^{2n} we use the normalization

    g(X, Y) = Re sum_{jk} g_{jk} x_j conj(y_k),

where x, y are the holomorphic parts of the real fields X, Y.  With this
normalization the unit ball has constant holomorphic sectional curvature
-4/(n+1); it is one of the two anchors that pin every sign and pairing
convention in this package (the other is the unit sphere's pseudohermitian
curvature +1, see :mod:`bergman_lab.crfoliation`).

Curvature is computed by two independent routes:

* ``curvature_hessian``    -- from the metric's mixed derivatives,
  R_{jkrs} = 2 ( d_r dbar_s g_{jk} - g^{ml} (d_r g_{jm}) (dbar_s g_{lk}) );
* ``curvature_kobayashi``  -- from kernel derivatives only,
  -(1/2) R_{jkrs} = g_{jk} g_{rs} + g_{js} g_{rk}
                    - (1/K^2)(K K_{jkrs} - K_{jr} K_{ks})
                    + (1/K^4) g^{lm} (K K_{jrl} - K_{jr} K_l)(K K_{ksm} - K_{ks} K_m),

which must agree to near machine precision; their agreement exercises the
whole jet pipeline.  Holomorphic sectional curvature of the J-invariant
plane spanned by Z is  -R(Z, Zbar, Z, Zbar) / (g(Z, Zbar))^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cjet import Jet
from .errors import DegeneratePlane, NotPositiveDefinite
from .fields import VectorField

__all__ = [
    "MetricPoint",
    "CurvaturePoint",
    "BergmanMetricField",
    "bergman_metric",
    "curvature_hessian",
    "curvature_kobayashi",
    "hol_sectional",
    "curvature_symmetry_residual",
]

_PLANE_FLOOR = 1e-12


@dataclass(frozen=True)
class MetricPoint:
    """Pointwise metric data extracted from a log-kernel jet.

    g[j,k] is g_{j kbar}; dg[r,j,k] is d_r g_{j kbar}; ddg[r,s,j,k] is
    d_r dbar_s g_{j kbar}.
    """

    g: np.ndarray
    g_inv: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray

    @property
    def dim(self) -> int:
        return self.g.shape[0]

    def pair(self, Z, W) -> complex:
        """Hermitian pairing sum g_{jk} Z_j conj(W_k)."""
        Z = np.asarray(Z, dtype=np.complex128)
        W = np.asarray(W, dtype=np.complex128)
        return complex(Z @ self.g @ np.conj(W))

    def metric_real(self, X: VectorField, Y: VectorField) -> float:
        """Riemannian metric value on real fields (at the base point)."""
        return float(np.real(self.pair(X.h_values(), Y.h_values())))


@dataclass(frozen=True)
class CurvaturePoint:
    """Riemann-Christoffel 4-tensor R[j,k,r,s] = R_{j kbar r sbar}."""

    R: np.ndarray
    source: str

    @property
    def dim(self) -> int:
        return self.R.shape[0]


def _unit(n: int, j: int) -> tuple[int, ...]:
    e = [0] * n
    e[j] = 1
    return tuple(e)


def _pair_index(n: int, j: int, k: int) -> tuple[int, ...]:
    e = [0] * n
    e[j] += 1
    e[k] += 1
    return tuple(e)


def bergman_metric(log_kernel_jet: Jet) -> MetricPoint:
    """Metric, inverse, and third/fourth order data from a log K jet."""
    n = log_kernel_jet.dim
    g = np.empty((n, n), dtype=np.complex128)
    for j in range(n):
        for k in range(n):
            g[j, k] = log_kernel_jet.derivative(_unit(n, j), _unit(n, k))

    herm = float(np.max(np.abs(g - g.conj().T)))
    if herm > 1e-9 * (1.0 + float(np.max(np.abs(g)))):
        raise NotPositiveDefinite(f"metric is not Hermitian (residual {herm:.2e})")
    g = 0.5 * (g + g.conj().T)
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("metric is not positive definite") from exc
    g_inv = np.linalg.inv(g)

    dg = np.empty((n, n, n), dtype=np.complex128)
    for r in range(n):
        for j in range(n):
            for k in range(n):
                dg[r, j, k] = log_kernel_jet.derivative(_pair_index(n, r, j), _unit(n, k))
    ddg = np.empty((n, n, n, n), dtype=np.complex128)
    for r in range(n):
        for s in range(n):
            for j in range(n):
                for k in range(n):
                    ddg[r, s, j, k] = log_kernel_jet.derivative(
                        _pair_index(n, r, j), _pair_index(n, s, k)
                    )
    return MetricPoint(g=g, g_inv=g_inv, dg=dg, ddg=ddg)


def curvature_hessian(m: MetricPoint) -> CurvaturePoint:
    """Curvature from metric derivatives (see module docstring for the formula)."""
    n = m.dim
    # corr[j,k,r,s] = sum_{m,l} g^{-1}[m,l] dg[r,j,m] conj-side dbar_s g_{l k}
    # with dbar_s g_{lk} = conj(d_s g_{kl})
    dbar = np.conj(np.transpose(m.dg, (0, 2, 1)))  # dbar[s,l,k] = conj(dg[s,k,l])
    corr = np.einsum("ml,rjm,slk->jkrs", m.g_inv, m.dg, dbar)
    R = 2.0 * (np.transpose(m.ddg, (2, 3, 0, 1)) - corr)
    return CurvaturePoint(R=R, source="hessian_route")


def curvature_kobayashi(kernel_jet: Jet, m: MetricPoint) -> CurvaturePoint:
    """Curvature from kernel derivatives through bidegree (2,2)."""
    n = kernel_jet.dim
    zero = (0,) * n
    K = kernel_jet.derivative(zero, zero).real

    K1 = np.array([kernel_jet.derivative(_unit(n, j), zero) for j in range(n)])
    K1b = np.array([kernel_jet.derivative(zero, _unit(n, j)) for j in range(n)])
    K2 = np.empty((n, n), dtype=np.complex128)  # K_{jr}
    K2bb = np.empty((n, n), dtype=np.complex128)  # K_{kbar sbar}
    for j in range(n):
        for r in range(n):
            K2[j, r] = kernel_jet.derivative(_pair_index(n, j, r), zero)
            K2bb[j, r] = kernel_jet.derivative(zero, _pair_index(n, j, r))
    K3 = np.empty((n, n, n), dtype=np.complex128)  # K_{jr lbar}
    K3b = np.empty((n, n, n), dtype=np.complex128)  # K_{kbar sbar m}
    for j in range(n):
        for r in range(n):
            for l in range(n):
                K3[j, r, l] = kernel_jet.derivative(_pair_index(n, j, r), _unit(n, l))
                K3b[j, r, l] = kernel_jet.derivative(_unit(n, l), _pair_index(n, j, r))
    K4 = np.empty((n, n, n, n), dtype=np.complex128)  # K_{j kbar r sbar}
    for j in range(n):
        for k in range(n):
            for r in range(n):
                for s in range(n):
                    K4[j, k, r, s] = kernel_jet.derivative(
                        _pair_index(n, j, r), _pair_index(n, k, s)
                    )

    g = m.g
    t1 = np.einsum("jk,rs->jkrs", g, g) + np.einsum("js,rk->jkrs", g, g)
    t2 = (K * K4 - np.einsum("jr,ks->jkrs", K2, K2bb)) / K ** 2
    B = K * K3 - np.einsum("jr,l->jrl", K2, K1b)  # K K_{jrl} - K_{jr} K_l
    Bb = K * K3b - np.einsum("ks,m->ksm", K2bb, K1)  # K K_{ksm} - K_{ks} K_m
    # B[j,r,l] carries the lbar index, Bb[k,s,m] the m index; contract with g^{lm}
    t3 = np.einsum("lm,jrl,ksm->jkrs", m.g_inv, B, Bb) / K ** 4
    R = -2.0 * (t1 - t2 + t3)
    return CurvaturePoint(R=R, source="kobayashi_route")


def hol_sectional(m: MetricPoint, curv: CurvaturePoint, Z) -> float:
    """Holomorphic sectional curvature of the J-invariant plane spanned by Z.

    Scale-invariant in Z; equals -4/(n+1) identically on the unit ball.
    """
    Z = np.asarray(Z, dtype=np.complex128)
    if float(np.linalg.norm(Z)) < _PLANE_FLOOR:
        raise DegeneratePlane("direction vector below the norm floor")
    gzz = m.pair(Z, Z).real
    if gzz <= 0.0:
        raise DegeneratePlane("direction has nonpositive metric norm")
    num = np.einsum("jkrs,j,k,r,s->", curv.R, Z, np.conj(Z), Z, np.conj(Z))
    return float(-num.real / gzz ** 2)


def curvature_symmetry_residual(curv: CurvaturePoint) -> float:
    """Max violation of the pair and conjugation symmetries of R."""
    R = curv.R
    r1 = np.max(np.abs(R - np.transpose(R, (2, 1, 0, 3))))  # j <-> r
    r2 = np.max(np.abs(R - np.transpose(R, (0, 3, 2, 1))))  # k <-> s
    r3 = np.max(np.abs(R - np.conj(np.transpose(R, (1, 0, 3, 2)))))
    return float(max(r1, r2, r3))


class BergmanMetricField:
    """Jet-level Bergman metric: Christoffels and covariant differentiation.

    For a Kaehler metric the only nonvanishing Christoffel symbols in
    holomorphic coordinates are Gamma^l_{jr} = g^{sl} d_j g_{rs} and their
    conjugates, so the covariant derivative of a real field decomposes into
    a holomorphic part and its mirror.  All coefficients here are jets, so
    covariant derivatives remain differentiable fields and curvature can be
    formed from second covariant derivatives.
    """

    def __init__(self, log_kernel_jet: Jet):
        self.jet = log_kernel_jet
        self.dim = log_kernel_jet.dim
        self.point = bergman_metric(log_kernel_jet)
        n = self.dim
        # metric component jets (valid through order 2)
        self.g_jets = [
            [log_kernel_jet.partial_z(j).partial_zbar(k) for k in range(n)]
            for j in range(n)
        ]
        self.ginv_jets = _jet_matrix_inverse(self.g_jets)
        # Gamma^l_{jr} = sum_s ginv[s][l] * d_j g[r][s]
        self.gamma = [
            [
                [
                    _jet_sum(
                        self.ginv_jets[s][l] * self.g_jets[r][s].partial_z(j)
                        for s in range(n)
                    )
                    for r in range(n)
                ]
                for j in range(n)
            ]
            for l in range(n)
        ]

    # -- metric pairings -----------------------------------------------------

    def metric_bilinear(self, X: VectorField, Y: VectorField) -> Jet:
        """Complex-bilinear extension of the Riemannian metric, as a jet."""
        n = self.dim
        acc = None
        for j in range(n):
            for k in range(n):
                term = self.g_jets[j][k] * (
                    X.h[j] * Y.a[k] + Y.h[j] * X.a[k]
                )
                acc = term if acc is None else acc + term
        return acc * 0.5

    def metric_value(self, X: VectorField, Y: VectorField) -> float:
        return float(self.metric_bilinear(X, Y).value.real)

    # -- covariant differentiation --------------------------------------------

    def covariant_derivative(self, X: VectorField, Y: VectorField) -> VectorField:
        """nabla^g_X Y as a jet-valued field (one order lower than the inputs)."""
        n = self.dim
        h_out = []
        a_out = []
        for l in range(n):
            acc_h = X.apply(Y.h[l])
            acc_a = X.apply(Y.a[l])
            for j in range(n):
                for r in range(n):
                    acc_h = acc_h + self.gamma[l][j][r] * X.h[j] * Y.h[r]
                    acc_a = acc_a + self.gamma[l][j][r].conj() * X.a[j] * Y.a[r]
            h_out.append(acc_h)
            a_out.append(acc_a)
        return VectorField(h_out, a_out)

    def curvature_operator(self, X: VectorField, Y: VectorField, Z: VectorField) -> VectorField:
        """R^g(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z."""
        nYZ = self.covariant_derivative(Y, Z)
        nXZ = self.covariant_derivative(X, Z)
        t1 = self.covariant_derivative(X, nYZ)
        t2 = self.covariant_derivative(Y, nXZ)
        t3 = self.covariant_derivative(X.bracket(Y), Z)
        return t1 - t2 - t3

    def sectional(self, X: VectorField, Y: VectorField) -> float:
        """Sectional curvature of span{X, Y} via the curvature operator."""
        num = self.metric_value(self.curvature_operator(X, Y, Y), X)
        gxx = self.metric_value(X, X)
        gyy = self.metric_value(Y, Y)
        gxy = self.metric_value(X, Y)
        den = gxx * gyy - gxy * gxy
        if abs(den) < _PLANE_FLOOR:
            raise DegeneratePlane("degenerate 2-plane")
        return num / den


def _jet_sum(items):
    acc = None
    for it in items:
        acc = it if acc is None else acc + it
    return acc


def _jet_matrix_inverse(M):
    """Inverse of a small jet-valued matrix by Gauss-Jordan with value pivoting."""
    n = len(M)
    a = [row[:] for row in M]
    inv = [
        [M[0][0].space.constant(1.0 if i == j else 0.0, M[0][0].base) for j in range(n)]
        for i in range(n)
    ]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col].value))
        if abs(a[piv][col].value) == 0.0:
            raise NotPositiveDefinite("singular jet matrix")
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        scale = a[col][col].reciprocal()
        a[col] = [x * scale for x in a[col]]
        inv[col] = [x * scale for x in inv[col]]
        for r in range(n):
            if r == col:
                continue
            factor = a[r][col]
            a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
            inv[r] = [x - factor * y for x, y in zip(inv[r], inv[col])]
    return inv
