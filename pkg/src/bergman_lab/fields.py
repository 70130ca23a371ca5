"""Jet-valued vector fields on a neighborhood of a point in C^n ~ R^2n.

A (possibly complex) vector field V is stored through its action as a
derivation on functions of (z, zbar):

    V = sum_j ( h_j d/dz_j + a_j d/dzbar_j ),

where the components h_j, a_j are jets at a common base point.  A real
tangent vector of R^2n corresponds to a = conj(h); the complex structure J
acts as (h, a) -> (i h, -i a), so that a real field X with holomorphic part
h maps to J X with holomorphic part i h.

Because components are jets, fields carry their own spatial derivatives:
Lie brackets, directional derivatives of scalars, and products with scalar
jets are all exact through the components' valid order.
"""

from __future__ import annotations

import numbers

import numpy as np

from .cjet import Jet, constant_jet

__all__ = ["VectorField", "real_field", "holomorphic_field", "field_from_constant"]


class VectorField:
    """Complex vector field with jet components (h = (1,0)-part, a = (0,1)-part)."""

    __slots__ = ("h", "a")

    def __init__(self, h, a):
        self.h = tuple(h)
        self.a = tuple(a)
        if len(self.h) != len(self.a):
            raise ValueError("mismatched component counts")

    @property
    def dim(self) -> int:
        return len(self.h)

    @property
    def order(self) -> int:
        return min(c.order for c in self.h + self.a)

    @property
    def base(self):
        return self.h[0].base

    # -- values -------------------------------------------------------------

    def h_values(self) -> np.ndarray:
        return np.array([c.value for c in self.h], dtype=np.complex128)

    def a_values(self) -> np.ndarray:
        return np.array([c.value for c in self.a], dtype=np.complex128)

    def norm_value(self) -> float:
        """Euclidean magnitude of the coefficient vector at the base point."""
        return float(
            np.sqrt(np.sum(np.abs(self.h_values()) ** 2 + np.abs(self.a_values()) ** 2))
        )

    def reality_residual(self) -> float:
        """Max deviation from a = conj(h); zero for genuinely real fields."""
        return max(
            float(np.max(np.abs(aj.coeffs - hj.conj().coeffs)))
            for hj, aj in zip(self.h, self.a)
        )

    # -- algebra --------------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return VectorField(
            [x + y for x, y in zip(self.h, other.h)],
            [x + y for x, y in zip(self.a, other.a)],
        )

    def __sub__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return VectorField(
            [x - y for x, y in zip(self.h, other.h)],
            [x - y for x, y in zip(self.a, other.a)],
        )

    def __neg__(self):
        return VectorField([-x for x in self.h], [-x for x in self.a])

    def __mul__(self, s):
        if isinstance(s, (Jet, numbers.Complex)):
            return VectorField([x * s for x in self.h], [x * s for x in self.a])
        return NotImplemented

    __rmul__ = __mul__

    def conj(self) -> "VectorField":
        """Conjugate field: swaps the (1,0) and (0,1) parts."""
        return VectorField([c.conj() for c in self.a], [c.conj() for c in self.h])

    def J(self) -> "VectorField":
        """Standard complex structure: multiplies the (1,0)-part by i."""
        return VectorField([1j * x for x in self.h], [-1j * x for x in self.a])

    # -- calculus -------------------------------------------------------------

    def apply(self, s: Jet) -> Jet:
        """Directional derivative of the scalar jet s along this field."""
        acc = None
        for j in range(self.dim):
            term = self.h[j] * s.partial_z(j) + self.a[j] * s.partial_zbar(j)
            acc = term if acc is None else acc + term
        return acc

    def bracket(self, other: "VectorField") -> "VectorField":
        """Lie bracket [self, other], computed componentwise on coordinates."""
        h = [self.apply(other.h[j]) - other.apply(self.h[j]) for j in range(self.dim)]
        a = [self.apply(other.a[j]) - other.apply(self.a[j]) for j in range(self.dim)]
        return VectorField(h, a)

    def __repr__(self):
        return f"VectorField(h={self.h_values()}, a={self.a_values()}, order={self.order})"


def real_field(h_components) -> VectorField:
    """Real field determined by its (1,0)-part jets (a := conj(h))."""
    h = tuple(h_components)
    return VectorField(h, [c.conj() for c in h])


def holomorphic_field(h_components) -> VectorField:
    """Field of type (1,0): the (0,1)-part is identically zero."""
    h = tuple(h_components)
    zero = [constant_jet(0.0, h[0].base) for _ in h]
    return VectorField(h, zero)


def field_from_constant(vec, base, antiholo=None) -> VectorField:
    """Field with constant coefficients (a = conj(h) unless given explicitly)."""
    h = [constant_jet(v, base) for v in vec]
    if antiholo is None:
        a = [constant_jet(np.conj(v), base) for v in vec]
    else:
        a = [constant_jet(v, base) for v in antiholo]
    return VectorField(h, a)
