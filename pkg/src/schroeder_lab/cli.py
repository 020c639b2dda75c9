"""Command line front end.

    schroeder-lab <coeffs|eval|order|tracts|ply|probe|cover|render|sweep>
        [--map FILE] [--z0 RE,IM] [--period P] [--order-n N] [--box R]
        [--grid N] [--out PATH] [--threads K] [--config FILE] ...

Outputs are plain JSON / CSV / PPM / PGM with fixed key and row order;
identical configurations produce byte-identical files at any thread count.
Exit codes: 0 success, 2 inconclusive verdict, 1 error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import kernels
from .basins import basin_census, el_condition, ply_check
from .dynamics import RationalMap
from .growth import dca_budget, empirical_order, valiron_order
from .orbits import critical_orbit, mane_set_approx, omega_limit, semihyperbolicity_probe
from .render import domain_coloring, field_image, labels_image, write_image
from .schroeder import SchroederSeries, schroeder_coefficients
from .sphere import INF, is_inf
from .tracts import COVER_INCONCLUSIVE, complete_covering_probe, probe_value
from .dynamics import CLASS_ATTRACTING, CLASS_INDIFFERENT, CLASS_PARABOLIC, CLASS_SUPERATTRACTING

MAX_GRID = 8192
MAX_SWEEP_CELLS = 10_000_000


@dataclass
class JobConfig:
    command: str
    map_path: str | None = None
    z0: complex | None = None
    period: int = 1
    order_n: int = 64
    box: float = 20.0
    grid: int = 256
    out: str | None = None
    threads: int = 1
    value: str | None = None
    w: complex | None = None
    radius: float = 0.05
    k_max: int = 8
    masks: bool = False
    escape_radius: float = 1e6
    max_iter: int = 120
    re_min: float = -2.5
    re_max: float = 1.5
    im_min: float = -2.0
    im_max: float = 2.0
    cells: int = 256
    degree: int = 2
    extras: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.grid <= 0 or self.grid > MAX_GRID:
            raise ValueError(f"grid must be in 1..{MAX_GRID}")
        for name in ("box", "radius", "escape_radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.period < 1 or self.order_n < 2 or self.threads < 1:
            raise ValueError("period, order-n and threads must be positive")
        if self.command == "sweep" and self.cells * self.cells > MAX_SWEEP_CELLS:
            raise ValueError(f"sweep cell count exceeds {MAX_SWEEP_CELLS}")


def _parse_complex(text: str) -> complex:
    if text.strip().lower() in ("inf", "infinity"):
        return INF
    re_s, im_s = (text.split(",") + ["0"])[:2]
    return complex(float(re_s), float(im_s))


def _fmt_point(z: complex):
    if is_inf(z):
        return "inf"
    return [float(z.real), float(z.imag)]


def _dump(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_text(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_map(cfg: JobConfig) -> RationalMap:
    if not cfg.map_path:
        raise ValueError("--map FILE is required for this command")
    with open(cfg.map_path) as fh:
        return RationalMap.from_json(json.load(fh))


def _pick_z0(fmap: RationalMap, cfg: JobConfig):
    pts = [p for p in fmap.periodic_points(cfg.period) if p.is_repelling and not is_inf(p.point)]
    if not pts:
        raise ValueError(f"no finite repelling period-{cfg.period} point found")
    if cfg.z0 is not None:
        pts.sort(key=lambda p: abs(p.point - cfg.z0))
    else:
        pts.sort(key=lambda p: (-abs(p.multiplier), p.point.real, p.point.imag))
    return pts[0]


def _series(cfg: JobConfig) -> SchroederSeries:
    fmap = _load_map(cfg)
    pp = _pick_z0(fmap, cfg)
    return schroeder_coefficients(fmap, pp, order=cfg.order_n)


# --- commands -------------------------------------------------------------


def cmd_coeffs(cfg: JobConfig) -> int:
    series = _series(cfg)
    _dump(series.to_json(), cfg.out)
    return 0


def cmd_eval(cfg: JobConfig) -> int:
    series = _series(cfg)
    if cfg.w is None:
        raise ValueError("--w RE,IM is required for eval")
    val, err = series.evaluate_with_error(cfg.w)
    _dump(
        {
            "w": _fmt_point(cfg.w),
            "value": _fmt_point(val),
            "depth": series.depth_for(cfg.w),
            "error_estimate": err,
        },
        cfg.out,
    )
    return 0


def cmd_order(cfg: JobConfig) -> int:
    series = _series(cfg)
    rho_hat, profile = empirical_order(series, threads=cfg.threads)
    if cfg.out:
        _write_text(profile.to_csv(), cfg.out)
    summary = {
        "rho_hat": rho_hat,
        "rho_theory": profile.rho_theory,
        "radii": [float(r) for r in profile.radii],
        "csv": cfg.out,
    }
    _dump(summary, None if cfg.out else None)
    return 0


def _census_and_ply(series: SchroederSeries, cfg: JobConfig):
    rho = valiron_order(series.fmap.degree, series.period, series.multiplier)
    cap = max(2 * rho, 1.0)
    census = basin_census(
        series, n=cfg.grid, escape_radius=cfg.escape_radius,
        max_iter=cfg.max_iter, threads=cfg.threads, rho_cap=cap,
    )
    el = el_condition(series, R=4.0 * series.r_safe * abs(series.multiplier),
                      n=cfg.grid, threads=cfg.threads)
    rep = ply_check(census.q_inf, census.p, census.q, series.multiplier,
                    series.fmap.degree, period=series.period, el=el)
    rep.p_inf = census.p_inf
    rep.m_inf = census.m_inf
    return census, rep, rho


def cmd_ply(cfg: JobConfig) -> int:
    series = _series(cfg)
    census, rep, rho = _census_and_ply(series, cfg)
    out = {
        "q_inf": rep.q_inf,
        "lhs": rep.lhs,
        "rhs": rep.rhs,
        "slack": rep.slack,
        "p": rep.p,
        "q": rep.q,
        "p_inf": rep.p_inf,
        "m_inf": rep.m_inf,
        "arg_branch": rep.arg_branch,
        "el": rep.el,
        "violation": rep.violation,
        "rho": rho,
        "artifact": census.artifact,
        "notes": census.notes,
    }
    _dump(out, cfg.out)
    return 0


def cmd_tracts(cfg: JobConfig) -> int:
    series = _series(cfg)
    values = [_parse_complex(v) for v in (cfg.value.split(";") if cfg.value else [])]
    if not values:
        pts = series.fmap.periodic_points(1)
        values = [p.point for p in pts if p.classification in
                  (CLASS_SUPERATTRACTING, CLASS_ATTRACTING, CLASS_PARABOLIC, CLASS_INDIFFERENT)]
        if series.fmap.is_polynomial and not any(is_inf(v) for v in values):
            values.append(INF)
    reports = []
    for idx, a in enumerate(values):
        probe = probe_value(series, a, R=cfg.box, n=cfg.grid, threads=cfg.threads)
        rungs = [
            {
                "r": float(r),
                "n_components": len(probe.grids[(1, ri)].info),
                "unbounded": bool(probe.rung_has_unbounded[ri]),
            }
            for ri, r in enumerate(probe.radii)
        ]
        families = [
            {
                "verdict": f.verdict,
                "unbounded": f.unbounded,
                "components": [r.component for r in f.rungs],
                "roots": [_fmt_point(z) for r in f.rungs for z in r.roots][:8],
            }
            for f in probe.families
        ]
        reports.append(
            {
                "a": _fmt_point(a),
                "rungs": rungs,
                "verdicts": [f.verdict for f in probe.families],
                "families": families,
            }
        )
        if cfg.masks and cfg.out:
            deepest = probe.grids[(1, len(probe.radii) - 1)]
            write_image(labels_image(deepest.labels, deepest.R), f"{cfg.out}.{idx}.pgm")

    q_inf = None
    ply = None
    if series.fmap.is_polynomial:
        try:
            census, rep, _rho = _census_and_ply(series, cfg)
            q_inf = census.q_inf
            ply = rep.to_json()
        except Exception as exc:  # census is auxiliary here
            ply = {"error": str(exc)}
    _dump(
        {
            "z0": _fmt_point(series.z0),
            "lambda": _fmt_point(series.multiplier),
            "period": series.period,
            "values": reports,
            "q_inf": q_inf,
            "ply": ply,
        },
        cfg.out,
    )
    return 0


def cmd_probe(cfg: JobConfig) -> int:
    fmap = _load_map(cfg)
    a = _parse_complex(cfg.value) if cfg.value else 0.0
    crit = fmap.critical_points()
    omegas = []
    for c, _m in crit:
        if is_inf(c):
            continue
        om = omega_limit(critical_orbit(fmap, c, length=2000))
        omegas.append(
            {
                "c": _fmt_point(c),
                "clusters": [_fmt_point(cl.center) for cl in om.clusters],
                "recurrent": om.recurrent,
            }
        )
    mane = mane_set_approx(fmap, length=2000)
    report = semihyperbolicity_probe(
        fmap, a, r=cfg.radius, k_max=cfg.k_max,
        base_box=cfg.box, base_grid=cfg.grid, threads=cfg.threads,
    )
    _dump(
        {
            "critical_points": [[_fmt_point(c), m] for c, m in crit],
            "omega": omegas,
            "mane": [_fmt_point(p) for p in mane.points],
            "probe": {
                "a": _fmt_point(a),
                "r": cfg.radius,
                "degrees": report.degrees,
                "growing": report.growing,
                "depth_marker": report.depth_marker,
                "notes": report.notes,
            },
        },
        cfg.out,
    )
    return 0


def cmd_cover(cfg: JobConfig) -> int:
    series = _series(cfg)
    a = _parse_complex(cfg.value) if cfg.value else 0.0
    verdict, probe = complete_covering_probe(series, a, R=cfg.box, n=cfg.grid,
                                             threads=cfg.threads)
    _dump(
        {
            "a": _fmt_point(a),
            "verdict": verdict,
            "radii": [float(r) for r in probe.radii],
            "verdicts": [f.verdict for f in probe.families],
        },
        cfg.out,
    )
    return 2 if verdict == COVER_INCONCLUSIVE else 0


def cmd_render(cfg: JobConfig) -> int:
    series = _series(cfg)
    img = domain_coloring(series, R=cfg.box, n=cfg.grid, threads=cfg.threads)
    if not cfg.out:
        raise ValueError("--out PATH is required for render")
    write_image(img, cfg.out)
    return 0


@np.errstate(all="ignore")
def _sweep_chunk(cs: np.ndarray, d: int, max_iter: int, escape_radius: float) -> np.ndarray:
    esc = kernels.power_escape(d, np.ascontiguousarray(cs), max_iter, escape_radius)
    out = np.zeros((len(cs), 5))
    out[:, 0] = esc
    bounded = esc < 0
    if bounded.any():
        cb = cs[bounded]
        z = np.zeros_like(cb)
        for _ in range(300):
            acc = z
            for _ in range(d - 1):
                acc = acc * z
            z = acc + cb
        window = [z.copy()]
        for _ in range(64):
            acc = window[-1]
            zz = window[-1]
            for _ in range(d - 1):
                acc = acc * zz
            window.append(acc + cb)
        wnd = np.array(window)
        period = np.zeros(len(cb), dtype=int)
        for q in range(1, 65):
            hit = (np.abs(wnd[q] - wnd[0]) < 1e-6 * (1 + np.abs(wnd[0]))) & (period == 0)
            period[hit] = q
        mult = np.ones(len(cb))
        for j in range(64):
            active = (period > j)
            step = np.abs(d * wnd[j] ** (d - 1))
            mult = np.where(active, mult * np.where(step > 0, step, 0), mult)
        hyper = (period > 0) & (mult < 0.999)
        out[bounded, 1] = 1.0
        out[bounded, 2] = hyper
        out[bounded, 3] = period
        out[bounded, 4] = mult
    return out


def cmd_sweep(cfg: JobConfig) -> int:
    n = cfg.cells
    re = np.linspace(cfg.re_min, cfg.re_max, n)
    im = np.linspace(cfg.im_min, cfg.im_max, n)
    C = (re[None, :] + 1j * im[:, None]).ravel()
    data = kernels.run_chunked(
        lambda chunk: _sweep_chunk(chunk, cfg.degree, cfg.max_iter, cfg.escape_radius),
        C.astype(np.complex128),
        threads=cfg.threads,
    )
    lines = ["re,im,in_c,escape_iter,hyperbolic,period,mult_abs"]
    for c, row in zip(C, data):
        lines.append(
            f"{float(c.real)!r},{float(c.imag)!r},{int(row[1])},{int(row[0])},"
            f"{int(row[2])},{int(row[3])},{float(row[4])!r}"
        )
    text = "\n".join(lines) + "\n"
    if cfg.out:
        _write_text(text, cfg.out)
        # members of the connectedness locus in white/gray, escape shaded blue
        esc_shade = np.clip(data[:, 0], 0, 60) / 60.0
        r = np.where(data[:, 1] > 0, np.where(data[:, 2] > 0, 255.0, 170.0), 0.0)
        g = r.copy()
        b = np.where(data[:, 1] > 0, r, 90.0 + 160.0 * esc_shade)
        rgb = np.stack([r, g, b], axis=-1).reshape(n, n, 3)
        pixels = np.rint(rgb[::-1]).astype(np.uint8).tobytes()
        from .render import ImageBuffer
        img = ImageBuffer(width=n, height=n, channels=3, pixels=pixels,
                          transform=(1.0, 0.0, 1.0, 0.0))
        write_image(img, cfg.out + ".ppm")
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {
    "coeffs": cmd_coeffs,
    "eval": cmd_eval,
    "order": cmd_order,
    "tracts": cmd_tracts,
    "ply": cmd_ply,
    "probe": cmd_probe,
    "cover": cmd_cover,
    "render": cmd_render,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="schroeder-lab",
                                 description="linearizer laboratory for rational maps")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--map", dest="map_path")
        p.add_argument("--z0", type=_parse_complex)
        p.add_argument("--period", type=int)
        p.add_argument("--order-n", dest="order_n", type=int)
        p.add_argument("--box", type=float)
        p.add_argument("--grid", type=int)
        p.add_argument("--out")
        p.add_argument("--threads", type=int)
        p.add_argument("--config")
        p.add_argument("--value")
        p.add_argument("--w", type=_parse_complex)
        p.add_argument("--radius", type=float)
        p.add_argument("--k-max", dest="k_max", type=int)
        p.add_argument("--masks", action="store_true", default=None)
        p.add_argument("--escape-radius", dest="escape_radius", type=float)
        p.add_argument("--max-iter", dest="max_iter", type=int)
        p.add_argument("--re-min", dest="re_min", type=float)
        p.add_argument("--re-max", dest="re_max", type=float)
        p.add_argument("--im-min", dest="im_min", type=float)
        p.add_argument("--im-max", dest="im_max", type=float)
        p.add_argument("--cells", type=int)
        p.add_argument("--degree", type=int)
    return ap


def make_config(argv) -> JobConfig:
    args = build_parser().parse_args(argv)
    cfg = JobConfig(command=args.command)
    if args.config:
        with open(args.config, "rb") as fh:
            file_opts = tomllib.load(fh)
        for key, val in file_opts.items():
            key = key.replace("-", "_")
            if key == "z0" or key == "w":
                val = _parse_complex(val) if isinstance(val, str) else complex(*val)
            if hasattr(cfg, key):
                setattr(cfg, key, val)
            else:
                cfg.extras[key] = val
    env_threads = os.environ.get("SCHRODER_LAB_THREADS")
    if env_threads:
        cfg.threads = max(1, int(env_threads))
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        setattr(cfg, key, val)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    try:
        cfg = make_config(sys.argv[1:] if argv is None else argv)
        return COMMANDS[cfg.command](cfg)
    except BrokenPipeError:
        return 1
    except Exception as exc:
        sys.stderr.write(f"schroeder-lab: error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
