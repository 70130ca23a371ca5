"""Truncated Taylor-jet arithmetic in the complex variables (z, zbar).

A :class:`Jet` stores the Taylor coefficients of a smooth (not necessarily
holomorphic) scalar function of z in C^n at a base point, with respect to the
Wirtinger variables: the coefficient keyed by the bidegree multi-index
(alpha, beta) is

    d^{|alpha|+|beta|} f / (dz^alpha dzbar^beta) / (alpha! beta!)

and all indices with |alpha| + |beta| <= 4 are stored densely.  Derivatives
with respect to z and zbar are treated as independent variables; real
directional derivatives are formed downstream as complex combinations.

Arithmetic (+, -, *, /) is exact through total order 4, as is composition
with log and real powers.  Jets are immutable; every operation returns a new
jet, so values can be shared freely across threads.

Each jet tracks ``order``: the total degree through which its coefficients
are trustworthy.  Taking a partial derivative lowers the order by one;
binary operations take the minimum of the operands' orders.  Reading a
coefficient beyond the valid order raises, which keeps truncation honest.
"""

from __future__ import annotations

import itertools
import math
import numbers
from functools import lru_cache

import numpy as np

from .errors import DivisionByZeroJet, DomainError

MAX_ORDER = 4

#: Jets with |value| below this floor refuse to be inverted.
DIVISION_FLOOR = 1e-300

#: Tolerance for "real positive" checks guarding log and non-integer powers.
_REALITY_TOL = 1e-9


@lru_cache(maxsize=None)
def jet_space(dim: int) -> "JetSpace":
    """Shared combinatorial tables for jets in complex dimension ``dim``."""
    return JetSpace(dim)


class JetSpace:
    """Index bookkeeping and multiplication tables for a fixed dimension.

    Multi-indices are tuples of length 2n: the first n slots count z-derivatives
    (alpha), the last n count zbar-derivatives (beta).  They are ordered by
    total degree, then lexicographically, which fixes the canonical coefficient
    layout used by every jet of this dimension.
    """

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"complex dimension must be >= 1, got {dim}")
        self.dim = dim
        nv = 2 * dim

        indices = [
            m
            for m in itertools.product(range(MAX_ORDER + 1), repeat=nv)
            if sum(m) <= MAX_ORDER
        ]
        indices.sort(key=lambda m: (sum(m), m))
        self.indices: tuple[tuple[int, ...], ...] = tuple(indices)
        self.size = len(indices)
        self.index_of = {m: i for i, m in enumerate(indices)}
        self.degree = np.array([sum(m) for m in indices], dtype=np.intp)

        # Convolution table for truncated products: coeffs[K] += a[I] * b[J].
        tab_i, tab_j, tab_k = [], [], []
        for i, mi in enumerate(indices):
            di = sum(mi)
            for j, mj in enumerate(indices):
                if di + sum(mj) > MAX_ORDER:
                    continue
                mk = tuple(a + b for a, b in zip(mi, mj))
                tab_i.append(i)
                tab_j.append(j)
                tab_k.append(self.index_of[mk])
        self._mul_i = np.array(tab_i, dtype=np.intp)
        self._mul_j = np.array(tab_j, dtype=np.intp)
        self._mul_k = np.array(tab_k, dtype=np.intp)

        # Partial-derivative shift tables, one per variable (z_0..z_{n-1},
        # then zbar_0..zbar_{n-1}):  (d_v f)_m = (m_v + 1) * f_{m + e_v}.
        self._shift_src = []
        self._shift_dst = []
        self._shift_fac = []
        for v in range(nv):
            src, dst, fac = [], [], []
            for i, m in enumerate(indices):
                if sum(m) >= MAX_ORDER:
                    continue
                up = list(m)
                up[v] += 1
                src.append(self.index_of[tuple(up)])
                dst.append(i)
                fac.append(m[v] + 1)
            self._shift_src.append(np.array(src, dtype=np.intp))
            self._shift_dst.append(np.array(dst, dtype=np.intp))
            self._shift_fac.append(np.array(fac, dtype=np.float64))

        # Conjugation permutation: (alpha, beta) -> (beta, alpha).
        self._conj_perm = np.array(
            [self.index_of[m[dim:] + m[:dim]] for m in indices], dtype=np.intp
        )

        # 0/1 masks selecting coefficients of total degree <= k
        self._order_mask = [
            (self.degree <= k).astype(np.float64) for k in range(MAX_ORDER + 1)
        ]

    # -- constructors ------------------------------------------------------

    def constant(self, value, base) -> "Jet":
        c = np.zeros(self.size, dtype=np.complex128)
        c[0] = value
        return Jet(self.dim, _as_base(base, self.dim), c)

    def coordinate(self, base, j: int) -> "Jet":
        """Jet of the coordinate function z_j."""
        base = _as_base(base, self.dim)
        c = np.zeros(self.size, dtype=np.complex128)
        c[0] = base[j]
        e = [0] * (2 * self.dim)
        e[j] = 1
        c[self.index_of[tuple(e)]] = 1.0
        return Jet(self.dim, base, c)

    def conjugate_coordinate(self, base, j: int) -> "Jet":
        """Jet of the conjugate coordinate function zbar_j."""
        base = _as_base(base, self.dim)
        c = np.zeros(self.size, dtype=np.complex128)
        c[0] = np.conj(base[j])
        e = [0] * (2 * self.dim)
        e[self.dim + j] = 1
        c[self.index_of[tuple(e)]] = 1.0
        return Jet(self.dim, base, c)


def _as_base(base, dim) -> tuple[complex, ...]:
    base = tuple(complex(b) for b in base)
    if len(base) != dim:
        raise ValueError(f"base point has length {len(base)}, expected {dim}")
    return base


class Jet:
    """Degree-4 mixed holomorphic/antiholomorphic Taylor jet at a point of C^n."""

    __slots__ = ("dim", "base", "coeffs", "order")

    def __init__(self, dim: int, base, coeffs: np.ndarray, order: int = MAX_ORDER):
        self.dim = dim
        self.base = _as_base(base, dim)
        sp = jet_space(dim)
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.shape != (sp.size,):
            raise ValueError("coefficient vector has the wrong shape")
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"invalid jet order {order}")
        if order < MAX_ORDER:
            # coefficients beyond the valid order are unknown, not zero; they
            # are blanked so no operation can smuggle them into a result
            coeffs = np.where(sp.degree <= order, coeffs, 0.0)
        coeffs.setflags(write=False)
        self.coeffs = coeffs
        self.order = order

    @classmethod
    def _raw(cls, dim: int, base, coeffs: np.ndarray, order: int) -> "Jet":
        """Internal fast constructor: trusts base/coeffs built by jet ops."""
        obj = object.__new__(cls)
        obj.dim = dim
        obj.base = base
        obj.coeffs = coeffs
        obj.order = order
        return obj

    # -- basic accessors ---------------------------------------------------

    @property
    def space(self) -> JetSpace:
        return jet_space(self.dim)

    @property
    def value(self) -> complex:
        return complex(self.coeffs[0])

    @property
    def real_value(self) -> float:
        return float(self.coeffs[0].real)

    def derivative(self, alpha, beta) -> complex:
        """Derivative value d^alpha dbar^beta f at the base point."""
        alpha, beta = tuple(alpha), tuple(beta)
        total = sum(alpha) + sum(beta)
        if total > self.order:
            raise ValueError(
                f"derivative of total order {total} requested from a jet valid through order {self.order}"
            )
        i = self.space.index_of[alpha + beta]
        fac = 1.0
        for a in alpha:
            fac *= math.factorial(a)
        for b in beta:
            fac *= math.factorial(b)
        return complex(self.coeffs[i]) * fac

    def taylor_coefficient(self, alpha, beta) -> complex:
        alpha, beta = tuple(alpha), tuple(beta)
        if sum(alpha) + sum(beta) > self.order:
            raise ValueError("coefficient beyond the jet's valid order")
        return complex(self.coeffs[self.space.index_of[alpha + beta]])

    # -- calculus ----------------------------------------------------------

    def partial_z(self, j: int) -> "Jet":
        """Jet of d/dz_j of the represented function (order drops by one)."""
        return self._shift(j)

    def partial_zbar(self, j: int) -> "Jet":
        """Jet of d/dzbar_j of the represented function (order drops by one)."""
        return self._shift(self.dim + j)

    def _shift(self, v: int) -> "Jet":
        if self.order < 1:
            raise ValueError("cannot differentiate a jet of order 0")
        sp = self.space
        out = np.zeros(sp.size, dtype=np.complex128)
        out[sp._shift_dst[v]] = self.coeffs[sp._shift_src[v]] * sp._shift_fac[v]
        if self.order - 1 < MAX_ORDER:
            out *= sp._order_mask[self.order - 1]
        return Jet._raw(self.dim, self.base, out, self.order - 1)

    def conj(self) -> "Jet":
        """Jet of the complex conjugate of the represented function."""
        sp = self.space
        return Jet._raw(
            self.dim, self.base, np.conj(self.coeffs[sp._conj_perm]), self.order
        )

    def real(self) -> "Jet":
        return 0.5 * (self + self.conj())

    def imag(self) -> "Jet":
        return (self - self.conj()) * (-0.5j)

    # -- ring operations ---------------------------------------------------

    def _check_compatible(self, other: "Jet"):
        if self.dim != other.dim or self.base != other.base:
            raise ValueError("jets live at different base points")

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check_compatible(other)
            return Jet._raw(
                self.dim,
                self.base,
                self.coeffs + other.coeffs,
                min(self.order, other.order),
            )
        if isinstance(other, numbers.Complex):
            out = self.coeffs.copy()
            out[0] += other
            return Jet._raw(self.dim, self.base, out, self.order)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Jet._raw(self.dim, self.base, -self.coeffs, self.order)

    def __sub__(self, other):
        if isinstance(other, (Jet, numbers.Complex)):
            return self + (-other if isinstance(other, Jet) else -complex(other))
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, numbers.Complex):
            return (-self) + complex(other)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check_compatible(other)
            sp = jet_space(self.dim)
            prod = self.coeffs[sp._mul_i] * other.coeffs[sp._mul_j]
            out = np.bincount(
                sp._mul_k, weights=prod.real, minlength=sp.size
            ) + 1j * np.bincount(sp._mul_k, weights=prod.imag, minlength=sp.size)
            order = min(self.order, other.order)
            if order < MAX_ORDER:
                # coefficients past the common valid order mix unknown data
                out *= sp._order_mask[order]
            return Jet._raw(self.dim, self.base, out, order)
        if isinstance(other, numbers.Complex):
            return Jet._raw(
                self.dim, self.base, self.coeffs * complex(other), self.order
            )
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        if isinstance(other, numbers.Complex):
            return self * (1.0 / complex(other))
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, numbers.Complex):
            return self.reciprocal() * complex(other)
        return NotImplemented

    def reciprocal(self, floor: float | None = None) -> "Jet":
        """Multiplicative inverse, exact through the jet's order."""
        v = self.value
        if abs(v) < (DIVISION_FLOOR if floor is None else floor):
            raise DivisionByZeroJet(f"jet value {v} below division floor")
        # 1/f = (1/v) * sum_k (1 - f/v)^k; the bracket has no constant term,
        # so the series terminates at total order MAX_ORDER.
        u = 1.0 - self * (1.0 / v)
        acc = u + 1.0
        for _ in range(MAX_ORDER - 1):
            acc = acc * u + 1.0
        return acc * (1.0 / v)

    # -- analytic composition ---------------------------------------------

    def _positive_real_value(self, what: str) -> float:
        v = self.value
        if abs(v.imag) > _REALITY_TOL * (1.0 + abs(v.real)) or v.real <= 0.0:
            raise DomainError(f"{what} requires a positive real jet value, got {v}")
        return v.real

    def log(self) -> "Jet":
        """Composition with the natural logarithm (positive real values only)."""
        v = self._positive_real_value("log")
        w = self * (1.0 / v) - 1.0
        # log(v(1+w)) = log v + w - w^2/2 + w^3/3 - w^4/4, Horner form.
        acc = self.space.constant(-1.0 / MAX_ORDER, self.base)
        for k in range(MAX_ORDER - 1, 0, -1):
            acc = acc * w + ((-1.0) ** (k + 1)) / k
        return acc * w + math.log(v)

    def power(self, p: float) -> "Jet":
        """Composition with x -> x**p for a real exponent p.

        Integer exponents only need a nonzero value; fractional exponents
        require a positive real value.
        """
        if float(p).is_integer():
            v = self.value
            if abs(v) < DIVISION_FLOOR:
                raise DivisionByZeroJet("integer power of a zero-valued jet")
            scale = v ** p
        else:
            v = self._positive_real_value("pow")
            scale = v ** p
        w = self * (1.0 / v) - 1.0
        # (1+w)^p = sum_k binom(p, k) w^k, truncated at MAX_ORDER.
        coeffs = [1.0]
        for k in range(1, MAX_ORDER + 1):
            coeffs.append(coeffs[-1] * (p - (k - 1)) / k)
        acc = self.space.constant(coeffs[MAX_ORDER], self.base)
        for k in range(MAX_ORDER - 1, -1, -1):
            acc = acc * w + coeffs[k]
        return acc * scale

    def sqrt(self) -> "Jet":
        return self.power(0.5)

    # -- misc ----------------------------------------------------------------

    def evaluate(self, dz) -> complex:
        """Evaluate the truncated Taylor polynomial at base + dz (test helper)."""
        dz = np.asarray(dz, dtype=np.complex128)
        sp = self.space
        vals = np.concatenate([dz, np.conj(dz)])
        total = 0.0 + 0.0j
        for i, m in enumerate(sp.indices):
            if sp.degree[i] > self.order:
                continue
            term = self.coeffs[i]
            for v, mv in enumerate(m):
                if mv:
                    term = term * vals[v] ** mv
            total += term
        return complex(total)

    def conjugation_symmetry_residual(self) -> float:
        """Max |coeff(a,b) - conj(coeff(b,a))|; zero for jets of real functions."""
        sp = self.space
        return float(
            np.max(np.abs(self.coeffs - np.conj(self.coeffs[sp._conj_perm])))
        )

    def __repr__(self):
        return (
            f"Jet(dim={self.dim}, value={self.value:.6g}, order={self.order}, "
            f"base={self.base})"
        )


# -- module-level helpers ----------------------------------------------------


def constant_jet(value, base) -> Jet:
    base = tuple(base)
    return jet_space(len(base)).constant(value, base)


def seed_coordinates(z) -> list[Jet]:
    """Jets of the 2n coordinate functions z_1..z_n, zbar_1..zbar_n at z."""
    z = tuple(z)
    sp = jet_space(len(z))
    return [sp.coordinate(z, j) for j in range(len(z))] + [
        sp.conjugate_coordinate(z, j) for j in range(len(z))
    ]


def coordinate_jets(z) -> tuple[list[Jet], list[Jet]]:
    """The coordinate jets split into (holomorphic, antiholomorphic) halves."""
    seeds = seed_coordinates(z)
    n = len(tuple(z))
    return seeds[:n], seeds[n:]


def squared_norm_jet(z) -> Jet:
    """Jet of |z|^2 = sum_j z_j zbar_j at z."""
    zs, zbs = coordinate_jets(z)
    acc = zs[0] * zbs[0]
    for j in range(1, len(zs)):
        acc = acc + zs[j] * zbs[j]
    return acc


def divide(a: Jet, b: Jet, floor: float | None = None) -> Jet:
    """Quotient a/b with an explicit division floor."""
    return a * b.reciprocal(floor)
