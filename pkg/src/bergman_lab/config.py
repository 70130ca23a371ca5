"""Flat key=value run configuration with strict parsing.

The format is intentionally language-portable: one ``key = value`` pair per
line, ``#`` comments, sections encoded as dotted key prefixes.  Unknown keys
are rejected with the offending key named; every value is validated on load.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any

from .domains import (
    DEFAULT_DEGREE,
    DEFAULT_QUAD_ORDER,
    DEFAULT_SERIES_TOL,
    AffineMap,
    DomainSpec,
    Shadow,
)
from .errors import ConfigError

__all__ = ["RunConfig", "load_config", "parse_config_text", "default_cache_dir"]

CACHE_ENV_VAR = "BERGMAN_LAB_CACHE"


def default_cache_dir() -> str:
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return env
    return os.path.join(os.path.expanduser("~"), ".cache", "bergman-lab")


def _parse_int(s: str) -> int:
    return int(s.strip())

def _parse_float(s: str) -> float:
    return float(s.strip())

def _parse_str(s: str) -> str:
    return s.strip()

def _parse_complex_list(s: str) -> tuple[complex, ...]:
    items = [p.strip() for p in s.split(",") if p.strip()]
    return tuple(complex(p.replace(" ", "")) for p in items)

def _parse_float_list(s: str) -> tuple[float, ...]:
    items = [p.strip() for p in s.split(",") if p.strip()]
    return tuple(float(p) for p in items)


#: key -> (parser, default)
_KEYS: dict[str, tuple[Any, Any]] = {
    "domain.kind": (_parse_str, "unit_ball"),
    "domain.dim": (_parse_int, 2),
    "domain.degree": (_parse_int, DEFAULT_DEGREE),
    "domain.quadrature_order": (_parse_int, DEFAULT_QUAD_ORDER),
    "domain.series_tol": (_parse_float, DEFAULT_SERIES_TOL),
    "domain.shadow_linear": (_parse_float_list, None),
    "domain.shadow_quadratic": (_parse_float_list, None),
    "domain.affine_matrix": (_parse_complex_list, None),
    "domain.affine_translation": (_parse_complex_list, None),
    "eval.point": (_parse_complex_list, None),
    "verify.identities": (_parse_str, "all"),
    "verify.points": (_parse_int, 10),
    "verify.eps_min": (_parse_float, 0.05),
    "verify.eps_max": (_parse_float, 0.4),
    "verify.seed": (_parse_int, 0),
    "verify.phi": (_parse_str, "bergman"),
    "verify.pairing_scale": (_parse_float, 1.0),
    "scan.anchor": (_parse_complex_list, None),
    "scan.direction": (_parse_complex_list, None),
    "scan.epsilons": (_parse_float_list, None),
    "scan.eps_start": (_parse_float, None),
    "scan.eps_stop": (_parse_float, None),
    "scan.eps_ratio": (_parse_float, 0.7),
    "scan.plane": (_parse_str, "horizontal_random"),
    "scan.plane_x": (_parse_complex_list, None),
    "scan.seed": (_parse_int, 0),
    "scan.fit": (_parse_str, "linear"),
    "scan.fit_rows": (_parse_int, 0),
    "tol.identity": (_parse_float, 1e-6),
    "tol.scan": (_parse_float, 1e-2),
    "cache.dir": (_parse_str, None),
}

_DOMAIN_KINDS = {"unit_ball": "unit_ball", "ball": "unit_ball",
                 "affine_image": "affine_image", "reinhardt_series": "reinhardt_series"}
_PHI_CHOICES = ("bergman", "sphere")
_PLANES = ("horizontal_random", "horizontal_fixed", "sigma0")
_FITS = ("linear", "quadratic")


@dataclass
class RunConfig:
    """Validated run configuration for the command-line front end."""

    values: dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, key: str):
        if key not in _KEYS:
            raise KeyError(key)
        return self.values.get(key, _KEYS[key][1])

    # -- derived objects -----------------------------------------------------

    def domain_spec(self) -> DomainSpec:
        kind = _DOMAIN_KINDS.get(self["domain.kind"])
        if kind is None:
            raise ConfigError(
                f"domain.kind must be one of {sorted(set(_DOMAIN_KINDS))}, got {self['domain.kind']!r}"
            )
        dim = self["domain.dim"]
        if kind == "unit_ball":
            return DomainSpec(kind="unit_ball", dim=dim)
        if kind == "affine_image":
            mat = self["domain.affine_matrix"]
            if mat is None or len(mat) != dim * dim:
                raise ConfigError("domain.affine_matrix must list dim*dim complex entries")
            trans = self["domain.affine_translation"] or (0.0,) * dim
            if len(trans) != dim:
                raise ConfigError("domain.affine_translation must list dim entries")
            rows = tuple(tuple(mat[i * dim : (i + 1) * dim]) for i in range(dim))
            return DomainSpec(kind="affine_image", dim=dim, affine=AffineMap(rows, tuple(trans)))
        lin = self["domain.shadow_linear"]
        quad = self["domain.shadow_quadratic"]
        if lin is None:
            raise ConfigError("reinhardt_series domains need domain.shadow_linear")
        if quad is None:
            quad = (0.0,) * len(lin)
        if len(lin) != dim or len(quad) != dim:
            raise ConfigError("shadow coefficient lists must have length domain.dim")
        try:
            shadow = Shadow(linear=tuple(lin), quadratic=tuple(quad))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return DomainSpec(
            kind="reinhardt_series",
            dim=dim,
            truncation_degree=self["domain.degree"],
            quadrature_order=self["domain.quadrature_order"],
            shadow=shadow,
            series_tol=self["domain.series_tol"],
        )

    def cache_dir(self) -> str:
        return self["cache.dir"] or default_cache_dir()

    def epsilons(self) -> tuple[float, ...]:
        eps = self["scan.epsilons"]
        if eps is not None:
            if len(eps) == 0:
                raise ConfigError("scan.epsilons is empty")
            return tuple(eps)
        start, stop = self["scan.eps_start"], self["scan.eps_stop"]
        if start is None or stop is None:
            raise ConfigError(
                "scan needs either scan.epsilons or scan.eps_start/scan.eps_stop"
            )
        from .asympt import geometric_epsilons

        try:
            return geometric_epsilons(start, stop, self["scan.eps_ratio"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def validate(self):
        if self["verify.phi"] not in _PHI_CHOICES:
            raise ConfigError(f"verify.phi must be one of {_PHI_CHOICES}")
        if self["scan.plane"] not in _PLANES:
            raise ConfigError(f"scan.plane must be one of {_PLANES}")
        if self["scan.fit"] not in _FITS:
            raise ConfigError(f"scan.fit must be one of {_FITS}")
        if self["tol.identity"] <= 0 or self["tol.scan"] <= 0:
            raise ConfigError("tolerances must be positive")
        if self["verify.points"] < 1:
            raise ConfigError("verify.points must be >= 1")
        if not 0 < self["verify.eps_min"] <= self["verify.eps_max"]:
            raise ConfigError("need 0 < verify.eps_min <= verify.eps_max")
        self.domain_spec()


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown configuration key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        parser = _KEYS[key][0]
        try:
            values[key] = parser(val)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from exc
    cfg = RunConfig(values)
    cfg.validate()
    return cfg


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, source=path)
