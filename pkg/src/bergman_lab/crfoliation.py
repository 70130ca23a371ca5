"""Pointwise CR-foliation machinery for a level-set foliation of a collar.

Given the degree-4 jet of any defining function phi (Bergman-derived or not)
at a collar point, this module assembles: the contact form
theta = (i/2)(dbar - d)phi, the unique type-(1,0) field xi with
d phi(xi) = 1 that is dd-bar-phi-orthogonal to the leafwise CR structure,
the transverse curvature r, the real fields N, T with xi = (N - iT)/2, an
L_theta-orthonormal Levi frame, the tangential metric g_theta, the morphism
Phi (J on the Levi distribution, 0 on T), the pseudohermitian torsion tau,
and the canonical ambient connection characterized by parallelism of the CR
structure, of g_theta, T and N, together with torsion purity (its leafwise
restriction is the Tanaka-Webster connection of the leaf).

Pairing conventions (fixed once, here).  Differential forms are evaluated
with the alternation factor 1/2:

    (a ^ b)(X, Y) = (1/2) (a(X) b(Y) - a(Y) b(X)),

so with H_{jk} = d_j dbar_k phi and writing x, y for holomorphic parts,

    d theta(U, V)   = (i/2) sum H_{jk} (u1_j v0_k - v1_j u0_k),
    L_theta(Z, Wb)  = (1/2) sum H_{jk} Z_j conj(W_k),
    g_theta(X, Y)   = Re sum H_{jk} x_j conj(y_k)   (X, Y in the Levi distribution),
    r               = sum H_{jk} xi_j conj(xi_k).

These factors are pinned by two anchors -- the unit ball's holomorphic
sectional curvature -4/(n+1) and the unit sphere's pseudohermitian sectional
curvature +1 -- together with the requirement that the frame/metric identity
suite closes; with this choice every identity checked by
:mod:`bergman_lab.curvcheck` closes at its stated tolerance.  The complex
structure acts as
J N = T, J T = -N.

Everything is jet-valued: fields carry their own first and second spatial
derivatives, so covariant derivatives and curvature are formed from exact
derivative data, never from finite-differencing a solver.
"""

from __future__ import annotations

import numpy as np

from .cjet import Jet, constant_jet
from .errors import DegenerateLeviForm, OutsideCollar, SingularHessian
from .fields import VectorField, holomorphic_field, real_field

__all__ = [
    "FoliationFrame",
    "build_frame",
    "lee_melrose_xi",
    "transverse_curvature",
    "split_NT",
]

#: Collar predicate floor for |d phi|.
GRADIENT_FLOOR = 1e-10

#: Alternation factor used when evaluating 2-forms on vector pairs.
FORM_EVAL_FACTOR = 0.5


def _jet_sum(items, zero=None):
    acc = zero
    for it in items:
        acc = it if acc is None else acc + it
    return acc


def _solve_jet_system(A, rhs):
    """Solve A x = rhs for jet matrices/vectors by Gaussian elimination.

    Pivots on the values; n is tiny (<= 3) so stability is not a concern
    beyond avoiding zero pivots.
    """
    n = len(rhs)
    a = [row[:] for row in A]
    b = rhs[:]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col].value))
        if abs(a[piv][col].value) < 1e-300:
            raise SingularHessian("singular complex Hessian in the collar solve")
        a[col], a[piv] = a[piv], a[col]
        b[col], b[piv] = b[piv], b[col]
        inv = a[col][col].reciprocal()
        a[col] = [x * inv for x in a[col]]
        b[col] = b[col] * inv
        for r in range(n):
            if r == col:
                continue
            f = a[r][col]
            a[r] = [x - f * y for x, y in zip(a[r], a[col])]
            b[r] = b[r] - f * b[col]
    return b


class FoliationFrame:
    """All pointwise CR-foliation data derived from a defining-function jet.

    A frame is logically immutable once built; derived data (scalars,
    torsion, basis covariant derivatives) is materialized lazily on first
    access.  Frames at distinct points are independent, so parallel work
    should build one frame per point/worker rather than sharing a frame
    across threads mid-construction.
    """

    def __init__(self, phi: Jet, bergman: bool = False, orthonormalize: bool = True):
        self.phi = phi
        self.dim = phi.dim
        self.base = phi.base
        self.bergman = bergman
        n = self.dim

        # first derivatives (order 3) and complex Hessian (order 2)
        self.b = [phi.partial_z(j) for j in range(n)]
        self.b_conj = [bj.conj() for bj in self.b]
        self.H = [[self.b[j].partial_zbar(k) for k in range(n)] for j in range(n)]

        Hval = np.array([[self.H[j][k].value for k in range(n)] for j in range(n)])
        Hval = 0.5 * (Hval + Hval.conj().T)
        try:
            np.linalg.cholesky(Hval)
        except np.linalg.LinAlgError as exc:
            raise OutsideCollar(
                "complex Hessian of the defining function is not positive definite"
            ) from exc
        bval = np.array([bj.value for bj in self.b])
        if float(np.linalg.norm(bval)) < GRADIENT_FLOOR:
            raise OutsideCollar("defining-function gradient below the collar floor")

        # xi = lambda * conj(H)^{-1} conj(b), normalized so that d phi(xi) = 1;
        # the same solve yields r = lambda (jet-valued, order 2).
        Hbar = [[self.H[j][k].conj() for k in range(n)] for j in range(n)]
        y = _solve_jet_system(Hbar, self.b_conj)
        denom = _jet_sum(self.b[j] * y[j] for j in range(n))
        lam = denom.reciprocal()
        self.r = lam.real()
        xi = [y[j] * lam for j in range(n)]
        self.xi = holomorphic_field(xi)

        # xi = (N - iT)/2  =>  N = xi + conj(xi), T = i(xi - conj(xi))
        self.N = real_field(xi)
        self.T = real_field([1j * x for x in xi])

        self.W = self._levi_frame(orthonormalize)
        self._cache: dict = {}

    # ------------------------------------------------------------------
    # scalar pairings
    # ------------------------------------------------------------------

    def del_phi(self, V: VectorField) -> Jet:
        """(d phi)(V) restricted to the (1,0) slots."""
        return _jet_sum(self.b[j] * V.h[j] for j in range(self.dim))

    def delbar_phi(self, V: VectorField) -> Jet:
        return _jet_sum(self.b_conj[j] * V.a[j] for j in range(self.dim))

    def dphi(self, V: VectorField) -> Jet:
        return self.del_phi(V) + self.delbar_phi(V)

    def theta(self, V: VectorField) -> Jet:
        return (self.delbar_phi(V) - self.del_phi(V)) * 0.5j

    def dtheta(self, U: VectorField, V: VectorField) -> Jet:
        """d theta = i d dbar phi evaluated on a pair of fields."""
        n = self.dim
        acc = _jet_sum(
            self.H[j][k] * (U.h[j] * V.a[k] - V.h[j] * U.a[k])
            for j in range(n)
            for k in range(n)
        )
        return acc * (1j * FORM_EVAL_FACTOR)

    def levi_sym(self, U: VectorField, V: VectorField) -> Jet:
        """Symmetric Levi pairing: the complex-bilinear extension of
        dtheta(X, J Y) on the Levi distribution."""
        n = self.dim
        acc = _jet_sum(
            self.H[j][k] * (U.h[j] * V.a[k] + V.h[j] * U.a[k])
            for j in range(n)
            for k in range(n)
        )
        return acc * FORM_EVAL_FACTOR

    def L_theta(self, Z: VectorField, W: VectorField) -> Jet:
        """Hermitian Levi form L_theta(Z, conj(W)) on (1,0) fields."""
        n = self.dim
        acc = _jet_sum(
            self.H[j][k] * Z.h[j] * W.h[k].conj() for j in range(n) for k in range(n)
        )
        return acc * FORM_EVAL_FACTOR

    def pi_H(self, V: VectorField) -> VectorField:
        """Projection onto the Levi distribution along T and N."""
        return V - self.theta(V) * self.T - (self.dphi(V) * 0.5) * self.N

    def g_theta(self, U: VectorField, V: VectorField) -> Jet:
        """Tangential metric: Levi pairing on horizontal parts plus theta x theta."""
        return self.levi_sym(self.pi_H(U), self.pi_H(V)) + self.theta(U) * self.theta(V)

    def Phi(self, V: VectorField) -> VectorField:
        """The morphism acting as J on the Levi distribution and killing T."""
        return self.pi_H(V).J()

    # ------------------------------------------------------------------
    # Levi frame
    # ------------------------------------------------------------------

    def _levi_frame(self, orthonormalize: bool) -> tuple[VectorField, ...]:
        n = self.dim
        if n == 1:
            return ()
        bval = np.array([bj.value for bj in self.b])
        p = int(np.argmax(np.abs(bval)))
        inv_bp = self.b[p].reciprocal()
        candidates = []
        for j in range(n):
            if j == p:
                continue
            comps = [constant_jet(0.0, self.base) for _ in range(n)]
            comps[j] = comps[j] + 1.0
            comps[p] = comps[p] - self.b[j] * inv_bp
            lead = max(1.0, abs(bval[j] / bval[p]))
            candidates.append((lead, j, comps))
        # deterministic pivoting: largest leading component first, ties by index
        candidates.sort(key=lambda t: (-t[0], t[1]))

        frame: list[VectorField] = []
        for _, _, comps in candidates:
            V = holomorphic_field(comps)
            if not orthonormalize:
                frame.append(V)
                continue
            for Wb in frame:
                V = V - self.L_theta(V, Wb) * Wb
            nrm2 = self.L_theta(V, V).real()
            if nrm2.value.real <= 1e-14:
                raise DegenerateLeviForm("Levi form degenerate on the candidate frame")
            V = V * nrm2.power(-0.5)
            frame.append(V)
        return tuple(frame)

    def gram_matrix(self) -> np.ndarray:
        """g_{alpha betabar} = L_theta(W_alpha, conj(W_beta)) at the point."""
        m = len(self.W)
        out = np.empty((m, m), dtype=np.complex128)
        for a in range(m):
            for b in range(m):
                out[a, b] = self.L_theta(self.W[a], self.W[b]).value
        return out

    def theta_alpha(self, V: VectorField, alpha: int) -> Jet:
        """Coframe form dual to W_alpha (annihilates conj(W), T and N)."""
        Z = VectorField(V.h, [constant_jet(0.0, self.base)] * self.dim)
        return self.L_theta(Z, self.W[alpha])

    def theta_alpha_bar(self, V: VectorField, alpha: int) -> Jet:
        return self.theta_alpha(V.conj(), alpha).conj()

    # ------------------------------------------------------------------
    # derived scalars
    # ------------------------------------------------------------------

    def _cached(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    @property
    def f(self) -> Jet:
        """f = phi / (1 - phi r)."""
        return self._cached("f", lambda: self.phi / (1.0 - self.phi * self.r))

    @property
    def N_r(self) -> Jet:
        return self._cached("N_r", lambda: self.N.apply(self.r))

    @property
    def T_r(self) -> Jet:
        return self._cached("T_r", lambda: self.T.apply(self.r))

    @property
    def g_scal(self) -> Jet:
        """g = N(r) + 4/phi^2 - 2r/phi."""
        return self._cached(
            "g_scal",
            lambda: self.N_r + 4.0 * self.phi.power(-2) - 2.0 * self.r / self.phi,
        )

    @property
    def h_scal(self) -> Jet:
        """h = N(r) + 4/phi^2 - 6r/phi + 4r^2."""
        return self._cached(
            "h_scal",
            lambda: self.N_r
            + 4.0 * self.phi.power(-2)
            - 6.0 * self.r / self.phi
            + 4.0 * self.r * self.r,
        )

    @property
    def X_r(self) -> VectorField:
        """Horizontal gradient of r w.r.t. g_theta (zero on circular domains)."""

        def build():
            acc = None
            for Wa in self.W:
                c = Wa.apply(self.r)
                term = c.conj() * Wa + c * Wa.conj()
                acc = term if acc is None else acc + term
            if acc is None:  # n == 1: no horizontal directions
                zero = constant_jet(0.0, self.base)
                acc = VectorField([zero] * self.dim, [zero] * self.dim)
            return acc

        return self._cached("X_r", build)

    # ------------------------------------------------------------------
    # torsion
    # ------------------------------------------------------------------

    def tau_horizontal(self, X: VectorField) -> VectorField:
        """tau on the Levi distribution: -(1/2) Phi (L_T Phi) X."""
        lie = self.T.bracket(self.Phi(X)) - self.Phi(self.T.bracket(X))
        return -0.5 * self.Phi(lie)

    @property
    def tau_N(self) -> VectorField:
        """Torsion applied to N: -J grad_H r - 2 r T."""
        return self._cached("tau_N", lambda: -1.0 * self.X_r.J() - (2.0 * self.r) * self.T)

    def tau(self, V: VectorField) -> VectorField:
        """Torsion operator extended by tau(T) = 0 and the N-formula."""
        horiz = self.tau_horizontal(self.pi_H(V))
        return horiz + (self.dphi(V) * 0.5) * self.tau_N

    def torsion_matrix(self) -> np.ndarray:
        """Components A_alpha^betabar of tau(W_alpha) over the conjugate frame."""
        m = len(self.W)
        out = np.empty((m, m), dtype=np.complex128)
        for a in range(m):
            ta = self.tau(self.W[a])
            for b in range(m):
                out[a, b] = self.g_theta(ta, self.W[b]).value
        return out

    def A_form(self, X: VectorField, Y: VectorField) -> Jet:
        """A(X, Y) = g_theta(tau X, Y)."""
        return self.g_theta(self.tau(X), Y)

    def Omega_form(self, X: VectorField, Y: VectorField) -> Jet:
        """Omega(X, Y) = g_theta(X, Phi Y) (equals -d theta on the Levi distribution)."""
        return self.g_theta(X, self.Phi(Y))

    # ------------------------------------------------------------------
    # canonical connection (leafwise Tanaka-Webster)
    # ------------------------------------------------------------------

    @property
    def horizontal_basis(self) -> tuple[VectorField, ...]:
        """Real horizontal basis {W_a + conj(W_a), J(...)}; Gram matrix 2I."""

        def build():
            out = []
            for Wa in self.W:
                X = Wa + Wa.conj()
                out.append(X)
                out.append(X.J())
            return tuple(out)

        return self._cached("horizontal_basis", build)

    def koszul(self, X: VectorField, Y: VectorField) -> VectorField:
        """Horizontal part of nabla_X Y for horizontal X, Y via the Koszul formula.

        The torsion corrections drop out: on horizontal triples the torsion
        is proportional to T, which is g_theta-orthogonal to the Levi
        distribution.  The result is horizontal because the CR structure is
        parallel.

        g_theta pairings here use the unprojected Levi pairing: when one
        argument is horizontal the xi-direction components of the other pair
        to zero identically (the defining orthogonality of xi), and theta
        annihilates horizontal fields, so levi_sym(A, B) = g_theta(A, B).
        """
        basis = self.horizontal_basis
        gXY = self.levi_sym(X, Y)
        brXY = X.bracket(Y)
        out = None
        for Eb in basis:
            val = (
                X.apply(self.levi_sym(Y, Eb))
                + Y.apply(self.levi_sym(X, Eb))
                - Eb.apply(gXY)
                + self.levi_sym(brXY, Eb)
                - self.levi_sym(X.bracket(Eb), Y)
                - self.levi_sym(Y.bracket(Eb), X)
            )
            term = (val * 0.25) * Eb  # 1/2 from Koszul, 1/2 from |E_b|^2 = 2
            out = term if out is None else out + term
        return out

    @property
    def _basis_koszul(self):
        """Cached nabla_{E_a} E_b for all real horizontal basis pairs."""

        def build():
            basis = self.horizontal_basis
            return [[self.koszul(Ea, Eb) for Eb in basis] for Ea in basis]

        return self._cached("basis_koszul", build)

    def _nabla_T(self, V: VectorField) -> VectorField:
        """nabla_T V = [T, V] + tau_internal(V); exact on every field class."""
        horiz = self.tau_horizontal(self.pi_H(V))
        # internal torsion on N must be -[T, N] so that nabla N = 0 exactly
        tn = -1.0 * self.T.bracket(self.N)
        return self.T.bracket(V) + horiz + (self.dphi(V) * 0.5) * tn

    def _nabla_N(self, V: VectorField) -> VectorField:
        """nabla_N on horizontal fields from the purity of the torsion."""
        VH = self.pi_H(V)
        zero = constant_jet(0.0, self.base)
        V10 = VectorField(VH.h, [zero] * self.dim)
        V01 = VectorField([zero] * self.dim, VH.a)
        out = (
            self.N.bracket(VH)
            + self.r * VH
            + 1j * self.tau_horizontal(V10)
            - 1j * self.tau_horizontal(V01)
        )
        return out

    def gl_derivative(self, U: VectorField, V: VectorField) -> VectorField:
        """The canonical connection nabla_U V (jet-valued).

        Tensorial in U; V may be any field.  T and N are parallel, the Levi
        distribution and leafwise CR structure are preserved, g_theta is
        parallel, and the torsion is pure -- these are verified as residuals
        by the checking suite rather than imposed after the fact.

        The horizontal part of V is expanded over the cached real frame,
        VH = sum_b c_b E_b with jet coefficients c_b = levi_sym(VH, E_b)/2,
        and differentiated by Leibniz against the cached basis derivatives.
        """
        tcoef = self.theta(V)
        ncoef = self.dphi(V) * 0.5
        VH = V - tcoef * self.T - ncoef * self.N

        out = U.apply(tcoef) * self.T + U.apply(ncoef) * self.N

        basis = self.horizontal_basis
        kosz = self._basis_koszul
        c = [self.levi_sym(VH, Eb) * 0.5 for Eb in basis]
        for a, Ea in enumerate(basis):
            ua = self.levi_sym(U, Ea) * 0.5
            nab = None
            for b, Eb in enumerate(basis):
                term = Ea.apply(c[b]) * Eb + c[b] * kosz[a][b]
                nab = term if nab is None else nab + term
            out = out + ua * nab
        u_t = self.theta(U)
        u_n = self.dphi(U) * 0.5
        out = out + u_t * self._nabla_T(VH) + u_n * self._nabla_N(VH)
        return out

    def gl_curvature(self, X: VectorField, Y: VectorField, Z: VectorField) -> VectorField:
        """R(X,Y)Z of the canonical connection via second covariant derivatives."""
        t1 = self.gl_derivative(X, self.gl_derivative(Y, Z))
        t2 = self.gl_derivative(Y, self.gl_derivative(X, Z))
        t3 = self.gl_derivative(X.bracket(Y), Z)
        return t1 - t2 - t3

    def gl_torsion(self, U: VectorField, V: VectorField) -> VectorField:
        """Torsion tensor of the constructed connection."""
        return self.gl_derivative(U, V) - self.gl_derivative(V, U) - U.bracket(V)

    # ------------------------------------------------------------------
    # structural identities
    # ------------------------------------------------------------------

    def structure_identities(self, pairing_scale: float = 1.0) -> dict[str, tuple[float, float]]:
        """Residuals of the frame decomposition of d theta, its contractions
        with T and N, and the bracket decomposition of [T, N].

        ``pairing_scale`` rescales the Levi-frame coefficient of the d theta
        decomposition; any value other than 1 must break the first identity
        (negative-control hook for the verification suite).

        Returns a mapping id -> (residual, scale).
        """
        n = self.dim
        basis = list(self.W) + [W.conj() for W in self.W] + [self.T, self.N]
        gram = self.gram_matrix()

        # d theta = 2i g_{ab} theta^a ^ theta^bbar + r d phi ^ theta
        res_a2 = 0.0
        scale_a2 = 0.0
        for i, U in enumerate(basis):
            for V in basis[i + 1 :]:
                lhs = self.dtheta(U, V).value
                rhs = 0.0 + 0.0j
                for a in range(len(self.W)):
                    for bb in range(len(self.W)):
                        rhs += (
                            2j
                            * pairing_scale
                            * gram[a, bb]
                            * FORM_EVAL_FACTOR
                            * (
                                self.theta_alpha(U, a).value * self.theta_alpha_bar(V, bb).value
                                - self.theta_alpha(V, a).value * self.theta_alpha_bar(U, bb).value
                            )
                        )
                rhs += (
                    self.r.value
                    * FORM_EVAL_FACTOR
                    * (
                        self.dphi(U).value * self.theta(V).value
                        - self.dphi(V).value * self.theta(U).value
                    )
                )
                res_a2 = max(res_a2, abs(lhs - rhs))
                scale_a2 = max(scale_a2, abs(lhs), abs(rhs))

        # i_T d theta = -(r/2) d phi  and  i_N d theta = r theta
        res_a4 = 0.0
        scale_a4 = 0.0
        for V in basis:
            lhs_t = self.dtheta(self.T, V).value
            rhs_t = -0.5 * self.r.value * self.dphi(V).value
            lhs_n = self.dtheta(self.N, V).value
            rhs_n = self.r.value * self.theta(V).value
            res_a4 = max(res_a4, abs(lhs_t - rhs_t), abs(lhs_n - rhs_n))
            scale_a4 = max(scale_a4, abs(lhs_t), abs(rhs_t), abs(lhs_n), abs(rhs_n))

        # [T, N] = i W^a(r) W_a - i conj(W^a(r)) conj(W_a) + 2 r T
        ginv = np.linalg.inv(gram)
        bracket = self.T.bracket(self.N)
        rhs_f = (2.0 * self.r) * self.T
        for a in range(len(self.W)):
            # W^a(r) = g^{a b} W_bbar(r)
            coef = None
            for bb in range(len(self.W)):
                term = complex(ginv[a, bb]) * self.W[bb].apply(self.r).conj()
                coef = term if coef is None else coef + term
            rhs_f = rhs_f + (1j * coef) * self.W[a] + (1j * coef).conj() * self.W[a].conj()
        diff = bracket - rhs_f
        res_a5 = float(
            max(np.max(np.abs(diff.h_values())), np.max(np.abs(diff.a_values())))
        )
        scale_a5 = float(
            max(np.max(np.abs(bracket.h_values())), np.max(np.abs(rhs_f.h_values())), 1e-30)
        )
        return {
            "A2": (res_a2, scale_a2),
            "A4": (res_a4, scale_a4),
            "A5": (res_a5, scale_a5),
        }


def build_frame(phi: Jet, bergman: bool = False, orthonormalize: bool = True) -> FoliationFrame:
    """Construct the full foliation frame from a defining-function jet."""
    return FoliationFrame(phi, bergman=bergman, orthonormalize=orthonormalize)


def lee_melrose_xi(phi: Jet) -> np.ndarray:
    """The unique (1,0) vector with d phi(xi) = 1, H-orthogonal to the leafwise
    CR structure, at the jet's base point."""
    return build_frame(phi).xi.h_values()


def transverse_curvature(phi: Jet) -> Jet:
    """Transverse curvature r (jet-valued: directional derivatives included)."""
    return build_frame(phi).r


def split_NT(phi: Jet) -> tuple[VectorField, VectorField]:
    """Real and imaginary parts of xi: the fields N, T with xi = (N - iT)/2."""
    fr = build_frame(phi)
    return fr.N, fr.T
