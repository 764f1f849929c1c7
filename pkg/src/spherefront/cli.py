"""``spherefront <tube|transform|verify|curve>`` command-line entry point."""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from . import fixtures as fx
from . import io
from .config import SessionConfig, build_session, load_config_file
from .curves import (
    SphericalCurve,
    bishop,
    classify_period,
    frenet,
    great_circle,
    helix_from_kappa_tau,
    make_helix,
    reparametrize_arclength,
    tau_crossing_curve,
)
from .fronts import (
    STRATUM_NAMES,
    FrontGrid,
    TubeFront,
    completeness,
    coorientability,
    corank_at_roots,
    evaluate,
    is_totally_geodesic,
    parallel_front,
    singular_curve,
    singular_polylines,
    tube_from_curve,
    umbilic_scan,
)
from .transforms import (
    AmbientMesh,
    caustic,
    caustic_completeness_transfer,
    dual,
    inverse_caustic,
    mesh_from_grid,
    project,
    self_dual_test,
    tau_roots,
)
from . import verification as V

CURVE_FIXTURES = {"tau-crossing": tau_crossing_curve, "great-circle": great_circle}


class CliError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _tol_pair(text: str) -> tuple[str, float]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    k, v = text.split("=", 1)
    try:
        return k.strip(), float(v)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common(p: argparse.ArgumentParser, curve: bool = True) -> None:
    if curve:
        g = p.add_argument_group("curve")
        g.add_argument("--helix", nargs=2, type=float, metavar=("A", "B"))
        g.add_argument("--helix-kappa-tau", nargs=2, type=float, metavar=("KAPPA", "TAU"))
        g.add_argument("--curve-csv", type=Path, metavar="PATH")
        g.add_argument("--great-circle", action="store_true")
        g.add_argument("--fixture", choices=sorted(CURVE_FIXTURES), help="built-in curve")
    p.add_argument("--n", type=int, default=None, help="ambient is R^{n+2} (default 2)")
    p.add_argument("--grid", nargs=2, type=int, metavar=("M_S", "M_X"))
    p.add_argument("--project", choices=("stereo", "central", "none"), default=None)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--tol", type=_tol_pair, action="append", default=[], metavar="NAME=VALUE")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spherefront", description=__doc__)
    parser.add_argument("--version", action="version", version=f"spherefront {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("tube", help="developable tube mesh, singular curves and summary"))
    p = sub.add_parser("transform", help="caustic, dual, parallel or inverse-caustic of a tube")
    p.add_argument("which", choices=("caustic", "dual", "parallel", "inverse-caustic"))
    p.add_argument("--delta", type=float, default=None, help="parallel-front angle")
    _common(p)
    p = sub.add_parser("verify", help="run the check battery on a fixture at three resolutions")
    p.add_argument("target", choices=("tube", "fE", "fH", "small-sphere", "totally-geodesic", "tau-crossing"))
    _common(p)
    _common(sub.add_parser("curve", help="write curve samples, frame data and period information"))
    return parser


def session_from_args(args: argparse.Namespace) -> SessionConfig:
    curve = {
        "helix": args.helix, "helix_kappa_tau": args.helix_kappa_tau,
        "curve_csv": args.curve_csv, "great_circle": args.great_circle, "fixture": args.fixture,
    }
    if getattr(args, "delta", None) is not None:
        curve["delta"] = args.delta
    m_s, m_x = args.grid if args.grid else (None, None)
    return build_session(load_config_file(), n=args.n, m_s=m_s, m_x=m_x, projection=args.project,
                         out=args.out, tol=dict(args.tol), curve=curve)


def _numbers(value, count: int, key: str) -> list[float]:
    vals = [float(v) for v in value.split()] if isinstance(value, str) else [float(v) for v in value]
    if len(vals) != count:
        raise CliError(f"{key} needs {count} numbers")
    return vals


def resolve_curve(cfg: SessionConfig) -> SphericalCurve:
    spec = {k: v for k, v in cfg.curve.items() if k != "delta"}
    if str(spec.get("great_circle", "")).lower() in ("false", "0", "no", ""):
        spec.pop("great_circle", None)
    if len(spec) != 1:
        raise CliError("give exactly one curve: --helix, --helix-kappa-tau, --curve-csv, --great-circle or --fixture")
    (key, value), = spec.items()
    m = cfg.m_s
    if key == "helix":
        a, b = _numbers(value, 2, key)
        try:
            curve = make_helix(a, b, m)
        except ValueError as exc:
            raise CliError(str(exc)) from None
    elif key == "helix_kappa_tau":
        k, t = _numbers(value, 2, key)
        try:
            curve = helix_from_kappa_tau(k, t, m)
        except ValueError as exc:
            raise CliError(str(exc)) from None
    elif key == "great_circle":
        curve = great_circle(m)
    elif key == "fixture":
        if value not in CURVE_FIXTURES:
            raise CliError(f"unknown curve fixture {value!r}")
        curve = CURVE_FIXTURES[value](m)
    else:
        try:
            curve = io.read_curve_csv(Path(value), tol=cfg.tolerances)
        except (OSError, ValueError) as exc:
            raise CliError(str(exc)) from None
    if curve.dim != cfg.n + 2:
        raise CliError(f"curve lives in R^{curve.dim} but the session ambient is R^{cfg.n + 2}")
    return curve


def _metadata(cfg: SessionConfig, command: str) -> dict:
    return {
        "package": "spherefront",
        "version": __version__,
        "command": command,
        "backend": _kernels.get_backend(),
        "config": {
            "n": cfg.n, "m_s": cfg.m_s, "m_x": cfg.m_x, "projection": cfg.projection,
            "curve": {k: (v.as_posix() if isinstance(v, Path) else v) for k, v in sorted(cfg.curve.items())},
            "tolerances": cfg.tolerances.as_dict(),
        },
    }


# ---------------------------------------------------------------------------
# writers shared by commands
# ---------------------------------------------------------------------------


def _write_grid_bundle(cfg: SessionConfig, out: Path, grid: FrontGrid, polylines) -> dict:
    """Mesh OBJ, polyline OBJ/CSV and the rho/stratum field CSV; returns projection stats."""
    out.mkdir(parents=True, exist_ok=True)
    mesh = mesh_from_grid(grid)
    proj = project(mesh, cfg.projection, cfg.tolerances.projection_eps)
    io.write_mesh(out / "mesh.obj", proj)
    lines = project(AmbientMesh(np.zeros((0, grid.f.shape[-1])), np.zeros((0, 3), int), {}, list(polylines)),
                    cfg.projection, cfg.tolerances.projection_eps)
    io.write_obj(out / "polylines.obj", np.zeros((0, 3)), None, lines.polylines)
    N = grid.f.shape[-1]
    rows = [(b, k, *p) for b, line in enumerate(polylines) for k, p in enumerate(line)]
    io.write_csv(out / "polylines.csv", ["branch", "index"] + [f"x_{i + 1}" for i in range(N)], rows)
    m1, m2 = grid.shape
    I, J = np.meshgrid(np.arange(m1), np.arange(m2), indexing="ij")
    U1, U2 = np.meshgrid(grid.u1, grid.u2, indexing="ij")
    io.write_csv(out / "field.csv", ["i", "j", "u1", "u2", "rho", "stratum"],
                 zip(I.ravel().tolist(), J.ravel().tolist(), U1.ravel(), U2.ravel(), grid.rho.ravel(),
                     [STRATUM_NAMES[int(v)] for v in grid.stratum.ravel()]))
    return {"vertices": int(len(proj.vertices)), "faces": int(len(proj.faces)),
            "dropped_vertices": proj.dropped, "dropped_polyline_points": lines.dropped_polyline_points,
            "projection": proj.projection}


def _tube_summary(front: TubeFront, grid: FrontGrid) -> dict:
    flat = is_totally_geodesic(front)
    summary = {
        "curve": front.curve.name,
        "length": front.curve.length,
        "period": front.period_info.as_dict(),
        "coorientability": coorientability(front),
        "completeness": completeness(front),
        "totally_geodesic": flat,
        "umbilic_count": "n/a" if flat else len(umbilic_scan(grid)),
        "singular_nodes": int(grid.singular.sum()),
        "all_nodes_singular": bool(grid.singular.all()),
        "strata": {STRATUM_NAMES[k]: int(np.sum(grid.stratum == k)) for k in sorted(STRATUM_NAMES)},
        "grid": {"m_s": front.m_s, "m_x": front.m_x},
    }
    if front.n == 2:
        sset = singular_curve(front)
        counts = sset.counts
        summary["singular_roots_per_slice"] = {"min": int(counts.min()), "max": int(counts.max())}
        cr = corank_at_roots(front, sset)
        summary["corank_one_max_ratio"] = float(cr[:, 0].max()) if len(cr) else None
    return summary


def _make_tube(cfg: SessionConfig) -> TubeFront:
    curve = resolve_curve(cfg)
    return tube_from_curve(curve, cfg.m_s, cfg.m_x, cfg.tolerances)


def _polylines(front: TubeFront) -> list:
    return singular_polylines(front) if front.n == 2 else []


def cmd_tube(cfg: SessionConfig) -> dict:
    front = _make_tube(cfg)
    grid = evaluate(front)
    out = Path(cfg.out)
    summary = _tube_summary(front, grid)
    if front.n == 2:
        summary["mesh"] = _write_grid_bundle(cfg, out, grid, _polylines(front))
    else:
        out.mkdir(parents=True, exist_ok=True)
        pts = grid.f.reshape(-1, grid.f.shape[-1])
        io.write_csv(out / "points.csv", [f"x_{i + 1}" for i in range(pts.shape[1])], pts)
    io.write_json(out / "summary.json", summary, _metadata(cfg, "tube"))
    return summary


def cmd_transform(cfg: SessionConfig, which: str) -> dict:
    front = _make_tube(cfg)
    out = Path(cfg.out)
    if which in ("dual",) and front.n != 2:
        raise CliError("duals are defined for n = 2 only")
    if which == "caustic":
        caus = caustic(front)
        grid = evaluate(caus)
        summary = _tube_summary(caus, grid)
        transfer = caustic_completeness_transfer(front, caus)
        summary["transfer"] = transfer.as_dict()
        summary["weakly_complete"] = transfer.weakly_complete
        summary["umbilic_free"] = len(umbilic_scan(grid)) == 0
        summary["rank_dnu"] = V.rank_dnu_check(grid, cfg.tolerances).as_dict() if front.n == 2 else None
        summary["mesh"] = _write_grid_bundle(cfg, out, grid, _polylines(caus))
    elif which == "inverse-caustic":
        inv = inverse_caustic(front)
        grid = evaluate(inv)
        summary = _tube_summary(inv, grid)
        summary["mesh"] = _write_grid_bundle(cfg, out, grid, _polylines(inv))
    elif which == "parallel":
        delta = float(cfg.curve.get("delta", 0.0))
        grid = parallel_front(evaluate(front), delta)
        summary = {"delta": delta, "curve": front.curve.name,
                   "singular_nodes": int(grid.singular.sum()),
                   "umbilic_count": len(umbilic_scan(grid))}
        lines = _polylines(front) if delta == 0 else []
        summary["mesh"] = _write_grid_bundle(cfg, out, grid, lines)
    else:
        du = dual(front)
        sd = self_dual_test(front)
        flagged = du.flagged
        pts = du.grid.f[flagged[:, 0], flagged[:, 1]] if len(flagged) else np.zeros((0, 4))
        roots = tau_roots(front.curve, cfg.tolerances)
        summary = {"curve": front.curve.name, "self_dual": sd.as_dict(), "incidence": du.incidence,
                   "flagged_nodes": int(len(flagged)), "tau_roots": roots.tolist(),
                   "center_curve": "binormal"}
        # flagged nodes are split into runs along s to form the degeneracy polyline
        runs = []
        if len(flagged):
            order = np.lexsort((flagged[:, 0], flagged[:, 1]))
            fl, pp = flagged[order], pts[order]
            start = 0
            for k in range(1, len(fl) + 1):
                if k == len(fl) or fl[k, 1] != fl[k - 1, 1] or fl[k, 0] != fl[k - 1, 0] + 1:
                    runs.append(pp[start:k])
                    start = k
        summary["mesh"] = _write_grid_bundle(cfg, out, du.grid, [r for r in runs if len(r) >= 2])
        io.write_csv(out / "flagged.csv", ["i", "j", "s", "t"] + [f"x_{i + 1}" for i in range(4)],
                     [(int(i), int(j), du.grid.u1[i], du.grid.u2[j], *p) for (i, j), p in zip(flagged, pts)])
    io.write_json(out / "summary.json", summary, _metadata(cfg, f"transform {which}"))
    return summary


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _levels(cfg: SessionConfig) -> list[tuple[int, int]]:
    sizes = [(cfg.m_s // 4, cfg.m_x // 4), (cfg.m_s // 2, cfg.m_x // 2), (cfg.m_s, cfg.m_x)]
    if min(min(s) for s in sizes) < 32:
        raise CliError("verify needs m_s, m_x >= 128 so the coarsest level stays >= 32")
    return sizes


def _tube_battery(cfg: SessionConfig, curve: SphericalCurve) -> tuple[list, list[TubeFront]]:
    tol = cfg.tolerances
    fronts = [tube_from_curve(curve.resample(ms), ms, mx, tol) for ms, mx in _levels(cfg)]
    grids = [evaluate(f) for f in fronts]
    reports = V.battery(grids, 1.0, tol)
    reports.append(V.caustic_tangency_check(fronts, tol))
    reports.append(V.asymptotic_ode_check(grids, tol))
    reports.append(V.parallel_check(grids, 0.5, tol))
    return reports, fronts


def _expected(target: str, check: str) -> str:
    if target == "small-sphere" and check in ("rank_dnu", "gauss_equation", "constant_curvature_order"):
        return "fail"
    if target in ("fE", "fH") and check == "front_criterion":
        return "fail"
    if check == "dual_front_criterion":
        return "fail"
    return "pass"


def cmd_verify(cfg: SessionConfig, target: str) -> dict:
    tol = cfg.tolerances
    out = Path(cfg.out)
    if target == "tube":
        reports, _ = _tube_battery(cfg, resolve_curve(cfg))
    elif target == "tau-crossing":
        reports, fronts = _tube_battery(cfg, tau_crossing_curve(cfg.m_s))
        front = fronts[-1]
        du = dual(front)
        rep = V.front_criterion(du.grid, tol)
        roots = tau_roots(front.curve, tol)
        flagged = np.array(rep.details["flagged_nodes"], dtype=int).reshape(-1, 2)
        h = V.grid_spacing(du.grid)
        dist = (np.min(np.abs(du.grid.u1[flagged[:, 0], None] - roots[None, :]), axis=1)
                if len(flagged) and len(roots) else np.zeros(0))
        details = dict(rep.details)
        details.update({"tau_roots": roots.tolist(),
                        "max_distance_to_root_over_h": float(dist.max() / h) if len(dist) else None,
                        "every_root_flagged": bool(all(
                            np.any(np.abs(du.grid.u1[flagged[:, 0]] - r) < 3 * h) for r in roots))})
        reports.append(V.VerificationReport("dual_front_criterion", rep.h, rep.residuals, rep.tolerances,
                                            "duals of developable tubes degenerate where the torsion vanishes",
                                            details))
    else:
        fixture = fx.FIXTURES[target]
        grids = [fixture.build(k) for k in (0, 1, 2)]
        reports = V.battery(grids, fixture.c, tol)
    meta = _metadata(cfg, f"verify {target}")
    summary = {"target": target, "checks": {}}
    for rep in reports:
        exp = _expected(target, rep.check)
        status = rep.verdict if exp == "pass" else ("expected-fail" if rep.verdict == "fail" else "unexpected-pass")
        summary["checks"][rep.check] = {"verdict": rep.verdict, "expected": exp, "status": status}
        io.write_json(out / f"{rep.check}.json", {**rep.as_dict(), "expected": exp, "status": status}, meta)
    summary["all_as_expected"] = all(v["status"] in ("pass", "expected-fail") for v in summary["checks"].values())
    io.write_json(out / "summary.json", summary, meta)
    return summary


# ---------------------------------------------------------------------------
# curve
# ---------------------------------------------------------------------------


def cmd_curve(cfg: SessionConfig) -> dict:
    curve = resolve_curve(cfg)
    if not curve.is_arclength:
        curve = reparametrize_arclength(curve, tol=cfg.tolerances)
    curve = curve.resample(cfg.m_s)
    info = classify_period(curve, cfg.tolerances)
    out = Path(cfg.out)
    s = curve.s
    pts = curve.derivative(s, 0)
    if curve.closed:  # repeat the first point so readers detect closure
        io.write_curve_csv(out / "curve.csv", np.append(s, curve.length), np.vstack([pts, pts[:1]]))
    else:
        io.write_curve_csv(out / "curve.csv", s, pts)
    frame = bishop(curve, None, cfg.tolerances)
    extra = {"kappa": frame.kappa}
    extra.update({f"mu_{j + 1}": frame.mu[:, j] for j in range(frame.mu.shape[1])})
    summary = {"curve": curve.name, "length": curve.length, "period": info.as_dict(),
               "closed": curve.closed, "derivative_source": curve.derivative_source,
               "holonomy": frame.holonomy}
    if curve.n == 2:
        fd = frenet(curve, s, cfg.tolerances)
        extra["tau"] = np.where(fd.defined, fd.tau, np.nan)
        summary["tau_range"] = [float(np.nanmin(extra["tau"])), float(np.nanmax(extra["tau"]))] \
            if np.any(fd.defined) else None
    io.write_csv(out / "frame.csv", ["s"] + list(extra), np.column_stack([s] + list(extra.values())))
    io.write_json(out / "summary.json", summary, _metadata(cfg, "curve"))
    return summary


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = session_from_args(args)
        if args.command == "tube":
            cmd_tube(cfg)
        elif args.command == "transform":
            cmd_transform(cfg, args.which)
        elif args.command == "verify":
            summary = cmd_verify(cfg, args.target)
            if not summary["all_as_expected"]:
                print("verification: some checks did not match their expected verdict", file=sys.stderr)
                return 1
        else:
            cmd_curve(cfg)
    except (CliError, KeyError, ValueError) as exc:
        print(f"spherefront: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"spherefront: cannot write output: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
