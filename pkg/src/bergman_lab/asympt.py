"""Boundary-approach scanning and limit extrapolation.

Samples curvature along an inward ray at a decreasing sequence of collar
depths eps (phi = -eps), fits k(eps) ~ L + c eps (optionally + d eps^2) by
least squares, and compares the extrapolated limit with the boundary value
-4/(n+1).  The deviation from the limit is O(eps) for smooth defining
functions, which justifies the linear default model; the fit residual is
reported so a poor model shows up in the report rather than silently.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .curvcheck import CollarData, CurvatureSample, collar_data, k_g_horizontal, k_g_sigma0, k_theta
from .domains import defining_function
from .errors import InsufficientRows, RootNotBracketed, SeriesNotConverged
from .fields import VectorField

__all__ = ["RaySpec", "ScanReport", "locate_level", "scan", "geometric_epsilons"]

PLANE_CHOICES = ("horizontal_random", "horizontal_fixed", "sigma0")


@dataclass(frozen=True)
class RaySpec:
    """One boundary-approach experiment."""

    anchor: tuple[complex, ...]
    direction: tuple[complex, ...]
    epsilons: tuple[float, ...]
    plane: str = "horizontal_random"
    fixed_direction: tuple[complex, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.plane not in PLANE_CHOICES:
            raise ValueError(f"unknown plane choice {self.plane!r}")
        eps = tuple(self.epsilons)
        if len(eps) == 0:
            raise ValueError("empty epsilon list")
        if any(e <= 0 for e in eps):
            raise ValueError("epsilons must be positive")
        if any(later >= earlier for earlier, later in zip(eps, eps[1:])):
            raise ValueError("epsilons must be strictly decreasing")


@dataclass
class ScanReport:
    """Scan rows plus the extrapolated limits for each curvature column."""

    rows: list[CurvatureSample]
    target: float
    extrapolated_horizontal: float
    extrapolated_sigma0: float
    extrapolated_L1: float
    extrapolated_L2: float
    fit_order: float
    fit_residual: float
    seed: int
    tolerance: float
    warnings: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (
            abs(self.extrapolated_horizontal - self.target) < self.tolerance
            and abs(self.extrapolated_sigma0 - self.target) < self.tolerance
        )


def geometric_epsilons(start: float, stop: float, ratio: float = 0.7) -> tuple[float, ...]:
    """Strictly decreasing geometric grid from start down to about stop."""
    if not (0 < stop < start) or not (0 < ratio < 1):
        raise ValueError("need 0 < stop < start and 0 < ratio < 1")
    out = [start]
    while out[-1] * ratio >= stop * (1.0 - 1e-12):
        out.append(out[-1] * ratio)
    if out[-1] > stop:
        out.append(stop)
    return tuple(out)


def _phi_value(domain, z) -> float:
    kp = domain.kernel(z, check_tail=False)
    return defining_function(kp.jet).value.real


def locate_level(domain, direction, eps: float, anchor=None, tol: float = 1e-12) -> tuple[complex, ...]:
    """Point on the ray anchor + t*direction with phi = -eps.

    Brackets the level by walking toward the boundary, then solves with a
    bracketing root finder to |phi + eps| < tol * (1 + eps).
    """
    anchor = np.asarray(
        domain.interior_anchor() if anchor is None else tuple(anchor), dtype=np.complex128
    )
    direction = np.asarray(tuple(direction), dtype=np.complex128)
    nrm = float(np.sqrt(np.sum(np.abs(direction) ** 2)))
    if nrm == 0.0:
        raise RootNotBracketed("zero scan direction")
    direction = direction / nrm

    def phi_t(t: float) -> float:
        return _phi_value(domain, tuple(anchor + t * direction))

    f0 = phi_t(0.0) + eps
    if abs(f0) <= tol * (1.0 + eps):
        return tuple(anchor)
    if f0 > 0.0:
        raise RootNotBracketed(
            f"anchor is already shallower than eps={eps} (phi(anchor)={f0 - eps:.6g})"
        )

    # walk outward until phi + eps changes sign; the domain boundary along the
    # ray is detected through the interior predicate
    t_lo, t_hi = 0.0, 0.0
    step = 0.05
    while True:
        t_try = t_hi + step
        if not domain.contains(tuple(anchor + t_try * direction), margin=1e-12):
            step *= 0.5
            if step < 1e-13:
                raise RootNotBracketed(f"could not bracket phi = -{eps} along the ray")
            continue
        val = phi_t(t_try) + eps
        t_hi = t_try
        if val >= 0.0:
            break
        t_lo = t_hi

    t_root = brentq(lambda t: phi_t(t) + eps, t_lo, t_hi, xtol=1e-15, maxiter=200)
    z = tuple(anchor + t_root * direction)
    if abs(phi_t(t_root) + eps) > tol * (1.0 + eps):
        raise RootNotBracketed("root solve did not reach the requested tolerance")
    return z


def _random_horizontal(frame, rng) -> VectorField:
    acc = None
    for Wa in frame.W:
        c = complex(rng.standard_normal(), rng.standard_normal())
        term = c * Wa + np.conj(c) * Wa.conj()
        acc = term if acc is None else acc + term
    return acc


def _sample(data: CollarData, eps: float, plane: str, X: VectorField | None) -> CurvatureSample:
    fr = data.frame
    k0, L1, L2, f2ph = k_g_sigma0(data)
    if plane == "sigma0":
        kh = k0
        kt = k_theta(fr)
    else:
        kh = k_g_horizontal(data, X)
        kt = k_theta(fr, X)
    f = fr.f.value.real
    phi = fr.phi.value.real
    return CurvatureSample(
        point=data.point,
        epsilon=eps,
        k_g_horizontal=kh,
        k_g_sigma0=k0,
        k_theta=kt,
        r=fr.r.value.real,
        f=f,
        phi_over_f=phi / f,
        limit_one=L1,
        limit_two=L2,
        f2_phi_h=f2ph,
        tail_estimate=data.tail_estimate,
    )


def _fit_limit(eps: np.ndarray, vals: np.ndarray, quadratic: bool) -> tuple[float, float]:
    cols = [np.ones_like(eps), eps]
    if quadratic and len(eps) >= 3:
        cols.append(eps ** 2)
    A = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(A, vals, rcond=None)
    resid = float(np.max(np.abs(A @ coef - vals)))
    return float(coef[0]), resid


def _fit_order(eps: np.ndarray, vals: np.ndarray, limit: float) -> float:
    dev = np.abs(vals - limit)
    mask = dev > 1e-13
    if mask.sum() < 2:
        return 1.0
    le, ld = np.log(eps[mask]), np.log(dev[mask])
    A = np.stack([np.ones_like(le), le], axis=1)
    coef, *_ = np.linalg.lstsq(A, ld, rcond=None)
    return float(coef[1])


_SCAN_STATE: dict = {}


def _scan_init(domain, ray):
    _SCAN_STATE["domain"] = domain
    _SCAN_STATE["ray"] = ray


def _plane_coefficients(ray: RaySpec, n: int) -> tuple[complex, ...] | None:
    """Frozen frame coefficients of the scanned plane (same along the ray)."""
    if ray.plane == "horizontal_fixed":
        if ray.fixed_direction is None:
            raise ValueError("horizontal_fixed plane requires fixed_direction")
        return tuple(complex(c) for c in ray.fixed_direction)
    if ray.plane == "horizontal_random":
        rng = np.random.default_rng(ray.seed)
        return tuple(
            complex(rng.standard_normal(), rng.standard_normal())
            for _ in range(max(1, n - 1))
        )
    return None


def _scan_row(task):
    """One scan row; returns (eps, sample | None, warning | None)."""
    eps, coeffs = task
    domain = _SCAN_STATE["domain"]
    ray = _SCAN_STATE["ray"]
    try:
        z = locate_level(domain, ray.direction, eps, anchor=ray.anchor)
        data = collar_data(domain, z)
    except (SeriesNotConverged, RootNotBracketed) as exc:
        # truncated kernels cannot always reach the deepest levels; the row
        # is dropped and reported rather than aborting the scan
        return eps, None, f"eps={eps:g}: {type(exc).__name__}: {exc}"
    if coeffs is None:
        X = None
    else:
        acc = None
        for c, Wa in zip(coeffs, data.frame.W):
            term = c * Wa + np.conj(c) * Wa.conj()
            acc = term if acc is None else acc + term
        X = acc
    return eps, _sample(data, eps, ray.plane, X), None


def scan(
    domain,
    ray: RaySpec,
    tolerance: float = 1e-2,
    fit_rows: int | None = None,
    quadratic: bool = False,
    jobs: int = 1,
) -> ScanReport:
    """Sample curvature along the ray and extrapolate the boundary limits.

    Rows failing the series-tail check are dropped with a warning; at least
    two rows are needed for the linear extrapolation.  ``jobs > 1`` computes
    rows in parallel worker processes; assembly order is deterministic.
    """
    n = domain.dim
    target = -4.0 / (n + 1)
    coeffs = _plane_coefficients(ray, n)
    tasks = [(eps, coeffs) for eps in ray.epsilons]

    if jobs > 1:
        with ProcessPoolExecutor(
            max_workers=jobs, initializer=_scan_init, initargs=(domain, ray)
        ) as ex:
            results = list(ex.map(_scan_row, tasks))
    else:
        _scan_init(domain, ray)
        results = [_scan_row(t) for t in tasks]

    rows: list[CurvatureSample] = []
    warnings: list[str] = []
    for _, sample, warning in results:
        if warning is not None:
            warnings.append(warning)
        else:
            rows.append(sample)

    if len(rows) < 2:
        raise InsufficientRows(
            f"only {len(rows)} usable scan rows; need at least 2 for extrapolation"
        )
    rows.sort(key=lambda rw: -rw.epsilon)
    m = len(rows) if fit_rows is None else min(fit_rows, len(rows))
    tail_rows = rows[-m:]
    eps_arr = np.array([rw.epsilon for rw in tail_rows])

    kh_arr = np.array([rw.k_g_horizontal for rw in tail_rows])
    k0_arr = np.array([rw.k_g_sigma0 for rw in tail_rows])
    l1_arr = np.array([rw.limit_one for rw in tail_rows])
    l2_arr = np.array([rw.limit_two for rw in tail_rows])

    lim_h, resid_h = _fit_limit(eps_arr, kh_arr, quadratic)
    lim_0, resid_0 = _fit_limit(eps_arr, k0_arr, quadratic)
    lim_1, _ = _fit_limit(eps_arr, l1_arr, quadratic)
    lim_2, _ = _fit_limit(eps_arr, l2_arr, quadratic)
    order = _fit_order(eps_arr, kh_arr, lim_h)

    # monotone-tail advisory on the final three rows
    if len(rows) >= 3:
        d = [abs(rw.k_g_horizontal - lim_h) for rw in rows[-3:]]
        if not (d[0] >= d[1] >= d[2]) and max(d) > 10 * abs(resid_h):
            warnings.append("tail of |k - L| is not monotone over the last three rows")

    return ScanReport(
        rows=rows,
        target=target,
        extrapolated_horizontal=lim_h,
        extrapolated_sigma0=lim_0,
        extrapolated_L1=lim_1,
        extrapolated_L2=lim_2,
        fit_order=order,
        fit_residual=max(resid_h, resid_0),
        seed=ray.seed,
        tolerance=tolerance,
        warnings=warnings,
    )
