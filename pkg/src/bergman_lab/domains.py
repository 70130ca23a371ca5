"""Strictly pseudoconvex test domains with computable Bergman kernels.

Three kinds of domain are provided:

* ``unit_ball``       -- closed-form kernel  K(z,z) = n! pi^{-n} (1-|z|^2)^{-(n+1)};
* ``affine_image``    -- image of the ball under an invertible affine holomorphic
  map, with the kernel transformed by the Jacobian factor |det F^{-1}|^2;
* ``reinhardt_series`` -- complete Reinhardt domain described by a convex
  "shadow" inequality in the radial variables s_j = |z_j|^2, with the kernel
  evaluated as the monomial series  K = sum_m z^m zbar^m / c_m,
  c_m = ||z^m||^2_{L^2}.

The monomial norms are computed by tensor Gauss-Legendre quadrature over the
shadow region (the innermost radial integral is a monomial and is integrated
exactly) and persisted to a diff-friendly text cache keyed by the domain
fingerprint.
"""

from __future__ import annotations

import hashlib
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .cjet import Jet, constant_jet, coordinate_jets, jet_space
from .errors import (
    CacheCorrupt,
    OutsideDomain,
    QuadratureFailure,
    SeriesNotConverged,
)

__all__ = [
    "Shadow",
    "AffineMap",
    "DomainSpec",
    "KernelModel",
    "KernelPoint",
    "BallDomain",
    "AffineBallDomain",
    "ReinhardtDomain",
    "SphereLevelSet",
    "kernel_ball",
    "monomial_norms",
    "kernel_series",
    "defining_function",
    "affine_pushforward",
    "make_domain",
]

#: Conservative multiplier applied to the geometric tail extrapolation.
TAIL_SAFETY = 2.0

DEFAULT_DEGREE = 40
DEFAULT_QUAD_ORDER = 64
DEFAULT_SERIES_TOL = 1e-6


# ---------------------------------------------------------------------------
# shadow regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Shadow:
    """Radial shadow {s >= 0 : q(s) < 1} with q(s) = sum a_j s_j + 1/2 sum b_j s_j^2.

    ``a_j > 0`` keeps the region bounded; ``b_j >= 0`` keeps q convex, and
    b_j > 0 makes it strictly convex (away from the axes this guarantees
    strict pseudoconvexity of the resulting Reinhardt domain).
    """

    linear: tuple[float, ...]
    quadratic: tuple[float, ...]

    def __post_init__(self):
        if len(self.linear) != len(self.quadratic):
            raise ValueError("linear/quadratic coefficient lengths differ")
        if any(a <= 0 for a in self.linear):
            raise ValueError("linear shadow coefficients must be positive (bounded region)")
        if any(b < 0 for b in self.quadratic):
            raise ValueError("quadratic shadow coefficients must be nonnegative (convexity)")

    @property
    def dim(self) -> int:
        return len(self.linear)

    @property
    def strictly_convex(self) -> bool:
        return all(b > 0 for b in self.quadratic)

    def value(self, s) -> float:
        s = np.asarray(s, dtype=float)
        return float(
            np.dot(self.linear, s) + 0.5 * np.dot(self.quadratic, s * s)
        )

    def axis_max(self, j: int, budget: float = 1.0) -> float:
        """Largest t with a_j t + (b_j/2) t^2 <= budget."""
        a, b = self.linear[j], self.quadratic[j]
        if budget <= 0:
            return 0.0
        if b == 0:
            return budget / a
        return (-a + math.sqrt(a * a + 2.0 * b * budget)) / b

    def contains_radial(self, s, margin: float = 0.0) -> bool:
        return self.value(s) < 1.0 - margin


@dataclass(frozen=True)
class AffineMap:
    """Invertible affine holomorphic map w = A z + t of C^n."""

    matrix: tuple[tuple[complex, ...], ...]
    translation: tuple[complex, ...]

    @property
    def dim(self) -> int:
        return len(self.translation)

    def as_arrays(self):
        A = np.array(self.matrix, dtype=np.complex128)
        t = np.array(self.translation, dtype=np.complex128)
        return A, t

    def condition_number(self) -> float:
        A, _ = self.as_arrays()
        return float(np.linalg.cond(A))

    def inverse_arrays(self):
        A, t = self.as_arrays()
        try:
            Ainv = np.linalg.inv(A)
        except np.linalg.LinAlgError as exc:
            raise QuadratureFailure(f"affine map is singular: {exc}") from exc
        return Ainv, t


@dataclass(frozen=True)
class DomainSpec:
    """Description of a strictly pseudoconvex test domain."""

    kind: str  # unit_ball | affine_image | reinhardt_series
    dim: int
    truncation_degree: int = DEFAULT_DEGREE
    quadrature_order: int = DEFAULT_QUAD_ORDER
    affine: AffineMap | None = None
    shadow: Shadow | None = None
    series_tol: float = DEFAULT_SERIES_TOL

    def __post_init__(self):
        if self.kind not in ("unit_ball", "affine_image", "reinhardt_series"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if self.kind == "affine_image":
            if self.affine is None:
                raise ValueError("affine_image spec requires an affine map")
            if self.affine.dim != self.dim:
                raise ValueError("affine map dimension mismatch")
            cond = self.affine.condition_number()
            if not np.isfinite(cond):
                raise ValueError("affine map must be invertible (finite condition number)")
        if self.kind == "reinhardt_series":
            if self.shadow is None:
                raise ValueError("reinhardt_series spec requires a shadow")
            if self.shadow.dim != self.dim:
                raise ValueError("shadow dimension mismatch")

    def fingerprint(self) -> str:
        """Stable hash identifying the kernel data this spec generates."""
        parts = [self.kind, str(self.dim), str(self.truncation_degree), str(self.quadrature_order)]
        if self.shadow is not None:
            parts += [float(x).hex() for x in self.shadow.linear]
            parts += [float(x).hex() for x in self.shadow.quadratic]
        if self.affine is not None:
            A, t = self.affine.as_arrays()
            parts += [f"{c.real.hex()}:{c.imag.hex()}" for c in A.ravel()]
            parts += [f"{c.real.hex()}:{c.imag.hex()}" for c in t]
        digest = hashlib.sha256("|".join(parts).encode()).hexdigest()
        return digest[:16]


# ---------------------------------------------------------------------------
# closed-form kernels
# ---------------------------------------------------------------------------


def ball_kernel_constant(n: int) -> float:
    """K(0,0) for the unit ball: n! / pi^n."""
    return math.factorial(n) / math.pi ** n


def kernel_ball(n: int, z) -> Jet:
    """Jet of the unit-ball Bergman kernel at an interior point z.

    Built from coordinate jets, so every mixed derivative through total
    order 4 is exact.
    """
    z = tuple(complex(c) for c in z)
    if len(z) != n:
        raise ValueError("point dimension mismatch")
    if sum(abs(c) ** 2 for c in z) >= 1.0:
        raise OutsideDomain(f"|z| >= 1 for z={z}")
    zs, zbs = coordinate_jets(z)
    s = 1.0 - sum((zs[j] * zbs[j] for j in range(n)), start=constant_jet(0.0, z))
    return s.power(-(n + 1)) * ball_kernel_constant(n)


def defining_function(kernel_jet: Jet) -> Jet:
    """Jet of phi = -K^{-1/(n+1)} from a kernel jet; negative inside."""
    n = kernel_jet.dim
    return -kernel_jet.power(-1.0 / (n + 1))


def affine_pushforward(spec: DomainSpec, z) -> Jet:
    """Kernel jet of F(ball) at z via the transformation rule.

    K_{F(B)}(z,z) = K_B(F^{-1}(z - t)) |det F^{-1}|^2.
    """
    if spec.kind != "affine_image":
        raise ValueError("affine_pushforward needs an affine_image spec")
    n = spec.dim
    Ainv, t = spec.affine.inverse_arrays()
    z = np.asarray(tuple(complex(c) for c in z), dtype=np.complex128)
    pre = Ainv @ (z - t)
    if float(np.sum(np.abs(pre) ** 2)) >= 1.0:
        raise OutsideDomain("point is outside the affine image of the ball")

    zs, zbs = coordinate_jets(tuple(z))
    base = tuple(z)
    # components of F^{-1}(w - t) as exact degree-1 jets in w
    pre_jets = []
    for l in range(n):
        acc = constant_jet(-complex(Ainv[l] @ t), base)
        for m in range(n):
            acc = acc + zs[m] * complex(Ainv[l, m])
        pre_jets.append(acc)
    pre_conj = [j.conj() for j in pre_jets]
    s = 1.0 - sum(
        (pre_jets[j] * pre_conj[j] for j in range(n)), start=constant_jet(0.0, base)
    )
    det_factor = abs(np.linalg.det(Ainv)) ** 2
    return s.power(-(n + 1)) * (ball_kernel_constant(n) * det_factor)


# ---------------------------------------------------------------------------
# monomial norms for Reinhardt series kernels
# ---------------------------------------------------------------------------


def _multi_indices(n: int, degree: int) -> np.ndarray:
    """All monomial exponents m in N^n with |m| <= degree, graded order."""
    out = [()]
    for _ in range(n):
        out = [m + (d,) for m in out for d in range(degree + 1 - sum(m))]
    out.sort(key=lambda m: (sum(m), m))
    return np.array(out, dtype=np.intp)


def _radial_moments(shadow: Shadow, degree: int, order: int) -> dict[tuple, float]:
    """Integrals of s^m over the shadow region for all |m| <= degree.

    Tensor Gauss-Legendre over the first n-1 radial variables on the mapped
    section boxes; the innermost variable is a pure monomial over
    [0, t_max(s')] and is integrated exactly.
    """
    n = shadow.dim
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes = 0.5 * (nodes + 1.0)  # [0, 1]
    weights = 0.5 * weights

    moments: dict[tuple, float] = {}
    ms = _multi_indices(n, degree)

    if n == 1:
        top = shadow.axis_max(0)
        for (m0,) in ms:
            moments[(int(m0),)] = top ** (m0 + 1) / (m0 + 1)
        return moments

    def integrate(prefix_vals: tuple[float, ...], budget_used: float, m: tuple[int, ...]) -> float:
        k = len(prefix_vals)
        if k == n - 1:
            top = shadow.axis_max(n - 1, 1.0 - budget_used)
            return top ** (m[n - 1] + 1) / (m[n - 1] + 1)
        j = k
        top = shadow.axis_max(j, 1.0 - budget_used)
        if top <= 0.0:
            return 0.0
        total = 0.0
        for x, w in zip(nodes, weights):
            s = top * x
            used = budget_used + shadow.linear[j] * s + 0.5 * shadow.quadratic[j] * s * s
            total += w * top * s ** m[j] * integrate(prefix_vals + (s,), used, m)
        return total

    if n == 2:
        # vectorized fast path: outer GL nodes, inner monomial integral exact
        top0 = shadow.axis_max(0)
        if top0 <= 0.0:
            raise QuadratureFailure("degenerate shadow region")
        s0 = top0 * nodes
        w0 = top0 * weights
        used = shadow.linear[0] * s0 + 0.5 * shadow.quadratic[0] * s0 * s0
        top1 = np.array([shadow.axis_max(1, 1.0 - u) for u in used])
        max_d = degree
        pow0 = np.vander(s0, max_d + 1, increasing=True)  # s0^d
        pow1 = np.vander(top1, max_d + 2, increasing=True)  # top1^d
        for m0, m1 in ms:
            inner = pow1[:, m1 + 1] / (m1 + 1)
            moments[(int(m0), int(m1))] = float(np.dot(w0, pow0[:, m0] * inner))
        return moments

    for m in ms:
        moments[tuple(int(v) for v in m)] = integrate((), 0.0, tuple(m))
    return moments


def monomial_norms(spec: DomainSpec, cache_dir: str | None = None) -> dict[tuple, float]:
    """Squared L^2 norms c_m of the monomials z^m over the Reinhardt domain.

    c_m = pi^n * integral_shadow s^m ds.  Results are persisted to
    ``<cache_dir>/<fingerprint>.norms`` when a cache directory is given.
    """
    if spec.kind != "reinhardt_series":
        raise ValueError("monomial norms only apply to reinhardt_series domains")
    if cache_dir:
        cached = _load_norms(spec, cache_dir)
        if cached is not None:
            return cached
    moments = _radial_moments(spec.shadow, spec.truncation_degree, spec.quadrature_order)
    factor = math.pi ** spec.dim
    norms = {m: factor * v for m, v in moments.items()}
    if any(v <= 0.0 for v in norms.values()):
        raise QuadratureFailure("nonpositive monomial norm; shadow region is degenerate")
    if cache_dir:
        _save_norms(spec, cache_dir, norms)
    return norms


def _cache_path(spec: DomainSpec, cache_dir: str) -> str:
    return os.path.join(cache_dir, f"{spec.fingerprint()}.norms")


def _save_norms(spec: DomainSpec, cache_dir: str, norms: dict[tuple, float]):
    os.makedirs(cache_dir, exist_ok=True)
    path = _cache_path(spec, cache_dir)
    # single-writer discipline: write to a temp file, then atomic rename
    fd, tmp = tempfile.mkstemp(dir=cache_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(
                f"# bergman-lab norms {spec.fingerprint()} degree={spec.truncation_degree} "
                f"order={spec.quadrature_order}\n"
            )
            for m in sorted(norms):
                fh.write(" ".join(str(v) for v in m) + " " + float(norms[m]).hex() + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_norms(spec: DomainSpec, cache_dir: str) -> dict[tuple, float] | None:
    path = _cache_path(spec, cache_dir)
    if not os.path.exists(path):
        return None
    norms: dict[tuple, float] = {}
    try:
        with open(path) as fh:
            header = fh.readline().split()
            if (
                len(header) < 6
                or header[3] != spec.fingerprint()
                or header[4] != f"degree={spec.truncation_degree}"
                or header[5] != f"order={spec.quadrature_order}"
            ):
                raise CacheCorrupt(f"cache header mismatch in {path}")
            for line in fh:
                parts = line.split()
                if len(parts) != spec.dim + 1:
                    raise CacheCorrupt(f"malformed cache line in {path}: {line!r}")
                m = tuple(int(v) for v in parts[: spec.dim])
                norms[m] = float.fromhex(parts[spec.dim])
    except CacheCorrupt:
        raise
    except Exception as exc:
        raise CacheCorrupt(f"unreadable norm cache {path}: {exc}") from exc
    return norms


# ---------------------------------------------------------------------------
# series kernel evaluation
# ---------------------------------------------------------------------------


@dataclass
class KernelModel:
    """Prepared series-kernel evaluator for a complete Reinhardt domain."""

    spec: DomainSpec
    norms: dict[tuple, float]
    exponents: np.ndarray = field(init=False)
    inv_norms: np.ndarray = field(init=False)
    degrees: np.ndarray = field(init=False)

    def __post_init__(self):
        ms = sorted(self.norms)
        self.exponents = np.array(ms, dtype=np.intp)
        self.inv_norms = np.array([1.0 / self.norms[m] for m in ms])
        self.degrees = self.exponents.sum(axis=1)

    @property
    def dim(self) -> int:
        return self.spec.dim

    def volume(self) -> float:
        """Domain volume = c_0 (the constant monomial's squared norm)."""
        return self.norms[(0,) * self.dim]


@dataclass(frozen=True)
class KernelPoint:
    """Kernel jet at a point plus the relative truncation-tail estimate."""

    jet: Jet
    tail_estimate: float


def _binom_table(max_m: int, max_a: int) -> np.ndarray:
    t = np.zeros((max_m + 1, max_a + 1))
    for m in range(max_m + 1):
        for a in range(min(m, max_a) + 1):
            t[m, a] = math.comb(m, a)
    return t


def kernel_series(model: KernelModel, z, check_tail: bool = True) -> KernelPoint:
    """Jet of the truncated monomial series kernel at a strictly interior z.

    Every Taylor coefficient is the term-wise exact derivative of the
    truncated series.  The tail estimate extrapolates the last two degree
    shells geometrically (with a conservative factor) and, when
    ``check_tail``, must stay below the domain's configured series tolerance.
    """
    spec = model.spec
    n = spec.dim
    z = np.asarray(tuple(complex(c) for c in z), dtype=np.complex128)
    s_rad = np.abs(z) ** 2
    if not spec.shadow.contains_radial(s_rad):
        raise OutsideDomain(f"radial point {s_rad} outside the shadow region")

    D = spec.truncation_degree
    exps = model.exponents  # (M, n)
    invc = model.inv_norms

    # power tables z_j^d and conj(z_j)^d for d <= D
    zpow = np.empty((n, D + 1), dtype=np.complex128)
    for j in range(n):
        zpow[j] = z[j] ** np.arange(D + 1)
    zbpow = np.conj(zpow)

    sp = jet_space(n)
    coeffs = np.zeros(sp.size, dtype=np.complex128)

    binom = _binom_table(D, 4)

    # |z^m|^2 / c_m per monomial, reused for the value and the tail estimate
    abs_terms = invc.copy()
    for j in range(n):
        abs_terms = abs_terms * np.abs(zpow[j, exps[:, j]]) ** 2

    for i, mi in enumerate(sp.indices):
        alpha = mi[:n]
        beta = mi[n:]
        mask = np.ones(len(exps), dtype=bool)
        for j in range(n):
            if alpha[j] or beta[j]:
                mask &= exps[:, j] >= max(alpha[j], beta[j])
        sel = exps[mask]
        if len(sel) == 0:
            continue
        term = invc[mask].astype(np.complex128).copy()
        for j in range(n):
            a, b = alpha[j], beta[j]
            mj = sel[:, j]
            term = term * binom[mj, a] * zpow[j, mj - a]
            term = term * binom[mj, b] * zbpow[j, mj - b]
        coeffs[i] = term.sum()

    value = coeffs[0].real
    if value <= 0.0:
        raise OutsideDomain("nonpositive truncated kernel value")

    shell_last = float(abs_terms[model.degrees == D].sum())
    shell_prev = float(abs_terms[model.degrees == D - 1].sum())
    if shell_prev <= 0.0 or shell_last <= 0.0:
        tail = 0.0
    else:
        q = shell_last / shell_prev
        if q >= 1.0:
            tail = math.inf
        else:
            tail = TAIL_SAFETY * shell_last * q / (1.0 - q) / value
    if check_tail and not tail < spec.series_tol:
        raise SeriesNotConverged(
            f"series tail estimate {tail:.3e} exceeds tolerance {spec.series_tol:.3e} "
            f"(increase the truncation degree or retreat from the boundary)",
            tail_estimate=tail,
        )
    return KernelPoint(Jet(n, tuple(z), coeffs), tail)


# ---------------------------------------------------------------------------
# domain facades
# ---------------------------------------------------------------------------


class BallDomain:
    """Unit ball with the closed-form kernel."""

    is_bergman = True
    name = "unit_ball"

    def __init__(self, dim: int):
        self.dim = dim
        self.spec = DomainSpec(kind="unit_ball", dim=dim)

    def contains(self, z, margin: float = 0.0) -> bool:
        return sum(abs(complex(c)) ** 2 for c in z) < 1.0 - margin

    def kernel(self, z, check_tail: bool = True) -> KernelPoint:
        return KernelPoint(kernel_ball(self.dim, z), 0.0)

    def phi_scale(self) -> float:
        """phi = -a (1 - |z|^2) with a = (pi^n/n!)^{1/(n+1)}."""
        n = self.dim
        return (math.pi ** n / math.factorial(n)) ** (1.0 / (n + 1))

    def interior_anchor(self):
        return (0.0,) * self.dim


class AffineBallDomain:
    """Affine holomorphic image of the unit ball."""

    is_bergman = True
    name = "affine_image"

    def __init__(self, spec: DomainSpec):
        if spec.kind != "affine_image":
            raise ValueError("spec kind must be affine_image")
        self.dim = spec.dim
        self.spec = spec

    def contains(self, z, margin: float = 0.0) -> bool:
        Ainv, t = self.spec.affine.inverse_arrays()
        pre = Ainv @ (np.asarray(tuple(complex(c) for c in z)) - t)
        return float(np.sum(np.abs(pre) ** 2)) < 1.0 - margin

    def kernel(self, z, check_tail: bool = True) -> KernelPoint:
        return KernelPoint(affine_pushforward(self.spec, z), 0.0)

    def interior_anchor(self):
        _, t = self.spec.affine.as_arrays()
        return tuple(t)


class ReinhardtDomain:
    """Complete Reinhardt domain with a monomial series kernel."""

    is_bergman = True
    name = "reinhardt_series"

    def __init__(self, spec: DomainSpec, cache_dir: str | None = None):
        if spec.kind != "reinhardt_series":
            raise ValueError("spec kind must be reinhardt_series")
        self.dim = spec.dim
        self.spec = spec
        self.model = KernelModel(spec, monomial_norms(spec, cache_dir))

    def contains(self, z, margin: float = 0.0) -> bool:
        s = np.abs(np.asarray(tuple(complex(c) for c in z))) ** 2
        return self.spec.shadow.contains_radial(s, margin)

    def kernel(self, z, check_tail: bool = True) -> KernelPoint:
        return kernel_series(self.model, z, check_tail=check_tail)

    def interior_anchor(self):
        return (0.0,) * self.dim


class SphereLevelSet:
    """Non-Bergman defining function phi = |z|^2 - 1 for the unit sphere foliation."""

    is_bergman = False
    name = "sphere"

    def __init__(self, dim: int):
        self.dim = dim

    def contains(self, z, margin: float = 0.0) -> bool:
        return sum(abs(complex(c)) ** 2 for c in z) < 1.0 - margin

    def phi(self, z) -> Jet:
        from .cjet import squared_norm_jet

        return squared_norm_jet(tuple(complex(c) for c in z)) - 1.0

    def interior_anchor(self):
        return (0.0,) * self.dim


def log_kernel(domain, z, check_tail: bool = True) -> Jet:
    return domain.kernel(z, check_tail=check_tail).jet.log()


def bergman_phi(domain, z, check_tail: bool = True) -> Jet:
    return defining_function(domain.kernel(z, check_tail=check_tail).jet)


def make_domain(spec: DomainSpec, cache_dir: str | None = None):
    if spec.kind == "unit_ball":
        return BallDomain(spec.dim)
    if spec.kind == "affine_image":
        return AffineBallDomain(spec)
    return ReinhardtDomain(spec, cache_dir)


def perturbed_reinhardt_spec(
    degree: int = DEFAULT_DEGREE,
    order: int = DEFAULT_QUAD_ORDER,
    series_tol: float = DEFAULT_SERIES_TOL,
) -> DomainSpec:
    """The shipped non-homogeneous example: shadow  s + t + (s^2 + t^2)/2 < 1."""
    return DomainSpec(
        kind="reinhardt_series",
        dim=2,
        truncation_degree=degree,
        quadrature_order=order,
        shadow=Shadow(linear=(1.0, 1.0), quadratic=(1.0, 1.0)),
        series_tol=series_tol,
    )


def ball_series_spec(
    n: int,
    degree: int = DEFAULT_DEGREE,
    order: int = DEFAULT_QUAD_ORDER,
    series_tol: float = DEFAULT_SERIES_TOL,
) -> DomainSpec:
    """The unit ball expressed as a Reinhardt series domain (oracle cross-checks)."""
    return DomainSpec(
        kind="reinhardt_series",
        dim=n,
        truncation_degree=degree,
        quadrature_order=order,
        shadow=Shadow(linear=(1.0,) * n, quadratic=(0.0,) * n),
        series_tol=series_tol,
    )
