"""Command-line front end: kernel evaluation, identity suites, boundary scans.

Usage:
    bergman-lab kernel   --config run.cfg [--out DIR]
    bergman-lab verify   --config run.cfg [--out DIR] [--jobs N] [--seed S]
    bergman-lab klembeck --config run.cfg [--out DIR] [--jobs N] [--seed S]

Exit codes: 0 = pass, 1 = computational or tolerance failure, 2 = usage or
configuration error.  Reports are CSV (17 significant digits) plus a JSON
summary with a stable, versioned schema; identical config and seed produce
byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .asympt import RaySpec, locate_level, scan
from .config import RunConfig, load_config
from .curvcheck import (
    IDENTITY_IDS,
    collar_data,
    frame_only_data,
    run_identity_suite,
)
from .domains import SphereLevelSet, defining_function, make_domain
from .errors import BergmanLabError, ConfigError, OutsideCollar

SCHEMA_VERSION = 1


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _fmt_point(z) -> str:
    return ";".join(f"{c.real:.17g}{c.imag:+.17g}j" for c in z)


def _write(path: str, text: str):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# kernel
# ---------------------------------------------------------------------------


def cmd_kernel(cfg: RunConfig, out_dir: str | None) -> int:
    z = cfg["eval.point"]
    if z is None:
        raise ConfigError("cmd kernel needs eval.point")
    domain = make_domain(cfg.domain_spec(), cfg.cache_dir())
    kp = domain.kernel(z)
    phi = defining_function(kp.jet)

    rows = [
        ("K", kp.jet.value.real),
        ("log_K", kp.jet.log().value.real),
        ("phi", phi.value.real),
        ("tail_estimate", kp.tail_estimate),
    ]
    # collar scalars exist only off the gradient's zero set (e.g. not at the
    # ball's center); report them when the collar predicate holds
    try:
        fr = collar_data(domain, z).frame
        rows.insert(3, ("r", fr.r.value.real))
        rows.insert(4, ("f", fr.f.value.real))
    except OutsideCollar:
        pass
    width = max(len(k) for k, _ in rows)
    print(f"point: {_fmt_point(z)}")
    for k, v in rows:
        print(f"  {k:<{width}} = {_fmt(v)}")
    print(f"  jet: dim={kp.jet.dim}, order={kp.jet.order}, "
          f"conj-symmetry residual={kp.jet.conjugation_symmetry_residual():.3e}")

    if out_dir:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
            "point": [[c.real, c.imag] for c in map(complex, z)],
            **{k: v for k, v in rows},
        }
        _write(os.path.join(out_dir, "kernel.json"), json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

_WORKER_STATE: dict = {}


def _verify_init(cfg_values, use_sphere):
    cfg = RunConfig(dict(cfg_values))
    _WORKER_STATE["cfg"] = cfg
    _WORKER_STATE["use_sphere"] = use_sphere
    _WORKER_STATE["domain"] = (
        SphereLevelSet(cfg["domain.dim"]) if use_sphere
        else make_domain(cfg.domain_spec(), cfg.cache_dir())
    )


def _verify_point(task):
    z, ids, pairing_scale = task
    domain = _WORKER_STATE["domain"]
    if _WORKER_STATE["use_sphere"]:
        data = frame_only_data(domain.phi(z))
    else:
        data = collar_data(domain, z)
    res = run_identity_suite(data, ids, pairing_scale=pairing_scale)
    return [(r.identity_id, r.point, r.residual, r.scale, r.status) for r in res]


def _verify_points(cfg: RunConfig, domain, use_sphere: bool, seed: int):
    """Deterministic collar sample points for the verify suite."""
    rng = np.random.default_rng(seed)
    n = cfg["domain.dim"]
    pts = []
    for _ in range(cfg["verify.points"]):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v = v / np.linalg.norm(v)
        if use_sphere:
            pts.append(tuple(v))
            continue
        eps = float(rng.uniform(cfg["verify.eps_min"], cfg["verify.eps_max"]))
        pts.append(locate_level(domain, tuple(v), eps))
    return pts


def cmd_verify(cfg: RunConfig, out_dir: str | None, jobs: int, seed: int | None) -> int:
    use_sphere = cfg["verify.phi"] == "sphere"
    seed = cfg["verify.seed"] if seed is None else seed
    domain = (
        SphereLevelSet(cfg["domain.dim"]) if use_sphere
        else make_domain(cfg.domain_spec(), cfg.cache_dir())
    )
    ids_cfg = cfg["verify.identities"]
    ids = list(IDENTITY_IDS) if ids_cfg == "all" else [s.strip() for s in ids_cfg.split(",")]
    for ident in ids:
        if ident not in IDENTITY_IDS:
            raise ConfigError(f"unknown identity id {ident!r} in verify.identities")
    pairing_scale = cfg["verify.pairing_scale"]
    tol = cfg["tol.identity"]

    points = _verify_points(cfg, domain, use_sphere, seed)
    tasks = [(z, ids, pairing_scale) for z in points]
    if jobs > 1:
        with ProcessPoolExecutor(
            max_workers=jobs, initializer=_verify_init, initargs=(cfg.values, use_sphere)
        ) as ex:
            results = list(ex.map(_verify_point, tasks))
    else:
        _verify_init(cfg.values, use_sphere)
        results = [_verify_point(t) for t in tasks]

    lines = ["identity_id,point,residual,relative_residual,pass"]
    all_pass = True
    n_skipped = 0
    for rows in results:
        for ident, point, residual, scale, status in rows:
            if status != "ok":
                lines.append(f"{ident},{_fmt_point(point)},nan,nan,{status}")
                n_skipped += 1
                continue
            rel = residual / max(1.0, scale)
            ok = rel < tol
            all_pass &= ok
            lines.append(
                f"{ident},{_fmt_point(point)},{_fmt(residual)},{_fmt(rel)},{str(ok).lower()}"
            )
    csv_text = "\n".join(lines) + "\n"
    print(csv_text, end="")
    summary = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": "verify",
        "identity_tolerance": tol,
        "seed": seed,
        "points": len(points),
        "skipped_rows": n_skipped,
        "pass": bool(all_pass),
    }
    if out_dir:
        _write(os.path.join(out_dir, "verify.csv"), csv_text)
        _write(os.path.join(out_dir, "verify.json"), json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"# verify: {'PASS' if all_pass else 'FAIL'} at tol {tol:g} ({n_skipped} skipped)")
    return 0 if all_pass else 1


# ---------------------------------------------------------------------------
# klembeck
# ---------------------------------------------------------------------------


def cmd_klembeck(cfg: RunConfig, out_dir: str | None, jobs: int, seed: int | None) -> int:
    if cfg["verify.phi"] == "sphere":
        raise ConfigError("klembeck scans need a Bergman domain, not the sphere level set")
    domain = make_domain(cfg.domain_spec(), cfg.cache_dir())
    direction = cfg["scan.direction"]
    if direction is None:
        raise ConfigError("cmd klembeck needs scan.direction")
    anchor = cfg["scan.anchor"] or tuple(domain.interior_anchor())
    seed = cfg["scan.seed"] if seed is None else seed
    ray = RaySpec(
        anchor=tuple(anchor),
        direction=tuple(direction),
        epsilons=cfg.epsilons(),
        plane=cfg["scan.plane"],
        fixed_direction=cfg["scan.plane_x"],
        seed=seed,
    )
    fit_rows = cfg["scan.fit_rows"] or None
    report = scan(
        domain,
        ray,
        tolerance=cfg["tol.scan"],
        fit_rows=fit_rows,
        quadratic=cfg["scan.fit"] == "quadratic",
        jobs=jobs,
    )

    lines = ["epsilon,k_g_H,k_g_sigma0,k_theta,r,f,phi_over_f,L1,L2,tail_estimate"]
    for row in report.rows:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    row.epsilon,
                    row.k_g_horizontal,
                    row.k_g_sigma0,
                    row.k_theta,
                    row.r,
                    row.f,
                    row.phi_over_f,
                    row.limit_one,
                    row.limit_two,
                    row.tail_estimate,
                )
            )
        )
    csv_text = "\n".join(lines) + "\n"
    print(csv_text, end="")
    summary = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": "klembeck",
        "target": report.target,
        "extrapolated_horizontal": report.extrapolated_horizontal,
        "extrapolated_sigma0": report.extrapolated_sigma0,
        "extrapolated_L1": report.extrapolated_L1,
        "extrapolated_L2": report.extrapolated_L2,
        "fit_order": report.fit_order,
        "fit_residual": report.fit_residual,
        "rows": len(report.rows),
        "seed": report.seed,
        "tolerance": report.tolerance,
        "warnings": report.warnings,
        "pass": bool(report.passed),
    }
    if out_dir:
        _write(os.path.join(out_dir, "klembeck.csv"), csv_text)
        _write(
            os.path.join(out_dir, "klembeck.json"),
            json.dumps(summary, indent=2, sort_keys=True) + "\n",
        )
    print(
        f"# klembeck: limit_H={_fmt(report.extrapolated_horizontal)} "
        f"limit_sigma0={_fmt(report.extrapolated_sigma0)} target={_fmt(report.target)} "
        f"{'PASS' if report.passed else 'FAIL'}"
    )
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="bergman-lab",
        description="Bergman-metric curvature engine and verification harness",
    )
    ap.add_argument("--version", action="version", version=f"bergman-lab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("kernel", "evaluate the kernel, defining function and collar scalars at a point"),
        ("verify", "run the identity residual suite"),
        ("klembeck", "scan curvature toward the boundary and extrapolate the limit"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="key=value configuration file")
        p.add_argument("--out", default=None, help="directory for CSV/JSON reports")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for sample points")
        p.add_argument("--seed", type=int, default=None, help="override the configured seed")
    return ap


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config)
        if args.command == "kernel":
            return cmd_kernel(cfg, args.out)
        if args.command == "verify":
            return cmd_verify(cfg, args.out, args.jobs, args.seed)
        return cmd_klembeck(cfg, args.out, args.jobs, args.seed)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except BergmanLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
