"""Command-line entry point: ``flatgrowth <command> [options]``.

Every command writes its files into ``--out`` and a JSON report holding the
parameters, the postcondition checks and an overall ``ok``. The exit code is
0 when every check held, 1 when a check failed and 2 for invalid input or a
module error. Option values come from flags, then the ``--config`` JSON file,
then built-in defaults.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from flatgrowth import formats
from flatgrowth.chains import ChainError, PolyhedralChain, chain_from_json, chain_to_json, chains_equal
from flatgrowth.svg import Figure

COMMON_DEFAULTS = {"out": ".", "seed": 0, "deterministic": False, "arrows": False}

DEFAULTS = {
    "koch": {"level": None, "time": None, "base_scale": 1.0, "ratio": 1.0, "single_edge": False, "frames": 0},
    "flatnorm": {"chain": None, "other": None, "koch": None, "base_scale": 1.0, "ratio": 1.0,
                 "single_edge": False, "refine": 0, "box": None, "method": "auto"},
    "dimension": {"chain": None, "koch_level": None, "segment": False, "cantor_filled": False,
                  "base_scale": 1.0, "ratio": 1.0, "single_edge": False, "scales": None, "exponents": None},
    "balance": {"manufactured": "default", "field": None, "source": None, "boost": "0.5,-0.25",
                "samples": 200, "h0": 0.1, "halvings": 4, "min_order": 1.8},
    "worldlines": {"flux": "dx", "velocity": "0.5,0", "theta": 1.0, "seeds": 5, "t_end": 1.0, "step": 0.01},
    "conformal": {"target": "koch2", "times": "1.2,1.5,1.9", "resolution": None, "limit": False},
    "cantor": {"time": 1.0, "level": 2, "alpha": 1.0 / 3.0},
}


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict
    out: Path
    seed: int = 0
    deterministic: bool = False
    arrows: bool = False
    checks: dict = field(default_factory=dict)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def check(self, name: str, ok) -> bool:
        self.checks[name] = bool(ok)
        return bool(ok)


# ---------------------------------------------------------------------------
# parameter parsing helpers

def _floats(text, name: str) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--{name.replace('_', '-')} expects comma-separated numbers, got {text!r}") from None


def _koch_params(p):
    from flatgrowth.koch import KochParams
    try:
        return KochParams(base_scale=float(p["base_scale"]), vertex_height_ratio=float(p["ratio"]),
                          single_edge=bool(p["single_edge"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load_chain(path) -> PolyhedralChain:
    try:
        return chain_from_json(formats.read_json(path))
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"cannot read chain file {path}: {exc}") from None


# ---------------------------------------------------------------------------
# commands

def cmd_koch(cfg: RunConfig) -> dict:
    from flatgrowth.koch import (AREA_LIMIT, chain_at_time, filled_chain, growth_index, koch_construction,
                                 koch_stage, t_level)
    p = cfg.params
    params = _koch_params(p)
    if (p["level"] is None) == (p["time"] is None):
        raise UsageError("give exactly one of --level or --time")
    scale2 = params.base_scale ** 2
    report = {}
    if p["level"] is not None:
        k = int(p["level"])
        if k < 0 or k > 8:
            raise UsageError("--level must lie in 0..8")
        chain = koch_stage(params, k)
        cfg.check("routes_agree", chains_equal(chain, koch_stage(params, k, route="polygon")))
        stages = koch_construction(params, k)
        counts = {str(s.step): s.triangles for s in stages}
        cfg.check("triangle_counts", all(s.triangles == params.n_edges0 * 4 ** (s.step - 1) for s in stages))
        filled = filled_chain(params, k)
        last_t = t_level(k)
        report.update(level=k, new_sides_length={str(s.step): s.new_sides_length for s in stages})
    else:
        t = float(p["time"])
        if not (0.0 < t < 1.0):
            raise UsageError("--time must lie in (0, 1)")
        state = chain_at_time(params, t)
        chain = state.chain
        filled = filled_chain(params, t)
        counts = {str(j): params.n_edges0 * 4 ** (j - 1) for j in range(1, state.finished_levels + 1)}
        report.update(time=t, finished_levels=state.finished_levels, active_level=state.finished_levels + 1,
                      active_height=state.active_height, active_triangles=state.active_triangles)
        lo = koch_stage(params, state.finished_levels).mass()
        hi = koch_stage(params, state.finished_levels + 1).mass()
        cfg.check("mass_between_stages", lo - 1e-9 <= chain.mass() <= hi + 1e-9)
        last_t = t_level(growth_index(t))
    mass, area = chain.mass(), filled.mass()
    report.update(mass=mass, area=area, triangle_counts=counts, total_triangles=sum(counts.values()))
    if not params.single_edge:
        cfg.check("area_bound", area <= AREA_LIMIT * scale2 + 1e-9)
        if p["level"] is not None and params.vertex_height_ratio == 1.0:
            cfg.check("perimeter_formula",
                      abs(mass - 3 * params.base_scale * (4 / 3) ** k) <= 1e-10 * mass)
    formats.write_json(cfg.out / "koch_chain.json", chain_to_json(chain))
    fig = Figure()
    if not filled.is_empty:
        fig.add_chain(filled, stroke="none", width=0)
    fig.add_chain(chain, arrows=cfg.arrows).save(cfg.out / "koch.svg")
    n_frames = int(p["frames"])
    if n_frames < 0:
        raise UsageError("--frames must be >= 0")
    for n, tf in enumerate(np.linspace(0.0, last_t, n_frames + 1)[1:]):
        st = chain_at_time(params, float(tf))
        Figure().add_chain(st.chain, arrows=cfg.arrows).save(cfg.out / f"koch_frame_{n:04d}.svg")
    report["frames"] = n_frames
    return report


def cmd_flatnorm(cfg: RunConfig) -> dict:
    from flatgrowth.flatnorm import FlatNormResult, build_complex, flat_norm, koch_tail_bound
    from flatgrowth.koch import koch_stage
    p = cfg.params
    sources = [p["chain"] is not None, p["koch"] is not None]
    if sum(sources) != 1:
        raise UsageError("give exactly one of --chain FILE or --koch I,K")
    refine = int(p["refine"])
    if refine < 0:
        raise UsageError("--refine must be >= 0")
    if p["method"] not in ("auto", "simplex", "ipm"):
        raise UsageError("--method must be auto, simplex or ipm")
    bound = None
    if p["chain"] is not None:
        B = _load_chain(p["chain"])
        if p["other"] is not None:
            B = B - _load_chain(p["other"])
    else:
        ik = [int(v) for v in _floats(p["koch"], "koch")]
        if len(ik) != 2 or not (0 <= ik[0] < ik[1] <= 6):
            raise UsageError("--koch expects I,K with 0 <= I < K <= 6")
        params = _koch_params(p)
        B = koch_stage(params, ik[1]) - koch_stage(params, ik[0])
        if not params.single_edge and params.vertex_height_ratio == 1.0:
            bound = koch_tail_bound(ik[0], ik[1]) * params.base_scale ** 2
    if B.dimension != 1:
        raise UsageError("the flat norm here is defined for 1-chains")
    box = None if p["box"] is None else _floats(p["box"], "box")
    if box is not None and len(box) != 4:
        raise UsageError("--box expects XMIN,YMIN,XMAX,YMAX")
    values = []
    if B.canonical().is_empty:
        res = FlatNormResult(0.0, PolyhedralChain.empty(2), PolyhedralChain.empty(1), lp_method="trivial",
                             lp_objective=0.0)
        values = [0.0] * (refine + 1)
    else:
        K = build_complex([B], bbox=box)
        for level in range(refine + 1):
            res = flat_norm(B, K, method=p["method"])
            values.append(res.value)
            if level < refine:
                K = K.refine(1)
    mass = B.mass()
    cfg.check("lp_optimal", res.lp_status == "optimal")
    cfg.check("value_le_mass", res.value <= mass + 1e-9)
    cfg.check("residual_consistent", chains_equal(res.residual, B - res.filling.boundary()))
    cfg.check("refinement_monotone", all(values[j + 1] <= values[j] + 1e-9 for j in range(len(values) - 1)))
    if bound is not None:
        cfg.check("tail_bound", res.value <= bound + 1e-9)
    report = res.to_json()
    report.update(refine=refine, refinement_values=values, mass=mass, lp_method=res.lp_method,
                  lp_status=res.lp_status, lp_iterations=res.iterations, tail_bound=bound)
    fig = Figure()
    if not res.filling.is_empty:
        fig.add_chain(res.filling, stroke="none", width=0)
    fig.add_chain(B, stroke="black", arrows=cfg.arrows)
    if not res.residual.is_empty:
        fig.add_chain(res.residual, stroke="red", width=2, arrows=cfg.arrows)
    fig.save(cfg.out / "flatnorm.svg")
    return report


def cmd_dimension(cfg: RunConfig) -> dict:
    from flatgrowth.boxcount import box_dimension
    from flatgrowth.koch import cantor_growth, koch_stage
    p = cfg.params
    chosen = [p["chain"] is not None, p["koch_level"] is not None, bool(p["segment"]), bool(p["cantor_filled"])]
    if sum(chosen) != 1:
        raise UsageError("give exactly one of --chain, --koch-level, --segment or --cantor-filled")
    reference = None
    exps = None
    if p["chain"] is not None:
        chain = _load_chain(p["chain"])
    elif p["koch_level"] is not None:
        k = int(p["koch_level"])
        if not (0 <= k <= 7):
            raise UsageError("--koch-level must lie in 0..7")
        params = _koch_params(p)
        chain = koch_stage(params, k)
        if params.vertex_height_ratio == 1.0 and k >= 5:
            reference = math.log(4) / math.log(3)
    elif p["segment"]:
        chain = PolyhedralChain.simplex([(0.0, 0.0), (1.0, 0.0)])
        reference = 1.0
    else:
        chain = cantor_growth(1.0, level=0).swept
        reference = 2.0
        exps = range(4, 10)
    if p["scales"] is not None:
        scales = np.array(_floats(p["scales"], "scales"))
    elif p["exponents"] is not None:
        lo_hi = [int(v) for v in str(p["exponents"]).split(":")]
        if len(lo_hi) != 2 or lo_hi[0] >= lo_hi[1]:
            raise UsageError("--exponents expects LO:HI")
        scales = 2.0 ** -np.arange(lo_hi[0], lo_hi[1] + 1, dtype=float)
    elif exps is not None:
        scales = 2.0 ** -np.array(list(exps), dtype=float)
    else:
        scales = None
    try:
        slope, rep = box_dimension(chain, scales)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    formats.write_csv(cfg.out / "dimension.csv", ["scale", "count"], rep.rows())
    cfg.check("fit_finite", math.isfinite(slope))
    if reference is not None:
        cfg.check("matches_reference", abs(slope - reference) <= 0.05)
    return {"slope": slope, "intercept": rep.intercept, "residual_rms": rep.residual_rms,
            "scales": rep.scales, "counts": rep.counts, "reference": reference}


def _load_field(path, degree):
    from flatgrowth.spacetime.forms import FormField
    try:
        F = FormField.from_json(formats.read_json(path))
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"cannot read field file {path}: {exc}") from None
    if F.degree != degree:
        raise UsageError(f"{path}: expected a {degree}-form, got degree {F.degree}")
    return F


def cmd_balance(cfg: RunConfig) -> dict:
    from flatgrowth.spacetime.balance import (FrameMap, convergence_orders, density_and_flux,
                                              frame_transform, manufactured_solution, reconstruct)
    p = cfg.params
    if p["field"] is not None:
        F = _load_field(p["field"], 2)
        s = _load_field(p["source"], 3) if p["source"] is not None else F.d()
        label = str(p["field"])
    elif p["manufactured"] == "default":
        F, s = manufactured_solution()
        label = "manufactured:default"
    else:
        raise UsageError("--manufactured only knows 'default'; use --field for other fields")
    n = int(p["samples"])
    halvings = int(p["halvings"])
    h0 = float(p["h0"])
    if n < 1 or halvings < 1 or not (0.0 < h0 <= 1.0):
        raise UsageError("need --samples >= 1, --halvings >= 1 and 0 < --h0 <= 1")
    v = _floats(p["boost"], "boost")
    if len(v) != 2:
        raise UsageError("--boost expects V1,V2")
    P = cfg.rng().uniform(-1.0, 1.0, size=(n, 3))
    rho, J = density_and_flux(F)
    recon = float(np.max(np.abs(reconstruct(rho, J).evaluate(P) - F.evaluate(P))))
    residuals, orders = convergence_orders(rho, J, s, P, h0=h0, halvings=halvings)
    frame = frame_transform(F, FrameMap.galilean(v), P, source=s)
    cfg.check("reconstruction", recon == 0.0)
    converged = bool(np.min(orders) >= float(p["min_order"])) or residuals[-1] < 1e-9
    cfg.check("convergence_order", converged)
    cfg.check("frame_covariance", frame.flux_discrepancy < 1e-8 and frame.source_discrepancy < 1e-8)
    hs = h0 / 2.0 ** np.arange(halvings + 1)
    pos = residuals > 0
    if np.count_nonzero(pos) >= 2:
        Figure().add_polyline(np.column_stack([np.log10(hs[pos]), np.log10(residuals[pos])])).save(
            cfg.out / "balance.svg")
    return {"field": label, "h": hs, "residual_rms": residuals, "orders": orders,
            "reconstruction_error": recon, "boost": v, "flux_discrepancy": frame.flux_discrepancy,
            "source_discrepancy": frame.source_discrepancy}


def cmd_worldlines(cfg: RunConfig) -> dict:
    from flatgrowth.spacetime.forms import VOLUME, FormField
    from flatgrowth.spacetime.worldlines import worldline_trace
    p = cfg.params
    flux = str(p["flux"])
    if flux == "dx":
        F = FormField(2, {"12": 1.0})
    elif flux == "drift":
        v = _floats(p["velocity"], "velocity")
        if len(v) != 2:
            raise UsageError("--velocity expects V1,V2")
        F = FormField(2, {"12": 1.0, "t1": v[1], "t2": -v[0]})
    else:
        F = _load_field(flux, 2)
    theta = float(p["theta"])
    if theta == 0.0:
        raise UsageError("--theta must be nonzero")
    n = int(p["seeds"])
    if n < 1:
        raise UsageError("--seeds must be >= 1")
    t_end, step = float(p["t_end"]), float(p["step"])
    if not (t_end > 0.0 and 0.0 < step <= t_end):
        raise UsageError("need --t-end > 0 and 0 < --step <= --t-end")
    g = np.linspace(0.0, 1.0, n) if n > 1 else np.array([0.5])
    seeds = [(0.0, a, b) for a in g for b in g]
    traces = []
    for seed in seeds:
        try:
            w = worldline_trace(F, VOLUME * theta, seed, t_end=t_end, step=step)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        chord = w.points[-1] - w.points[0]
        L = np.linalg.norm(chord)
        if L > 0:
            rel = w.points - w.points[0]
            lateral = float(np.max(np.linalg.norm(rel - np.outer(rel @ chord / L ** 2, chord), axis=1)))
        else:
            lateral = 0.0
        traces.append({"seed": seed, "points": w.points, "degenerate": w.degenerate, "spacelike": w.spacelike,
                       "notes": w.notes, "lateral_deviation": lateral})
    cfg.check("finite", all(np.all(np.isfinite(tr["points"])) for tr in traces))
    cfg.check("reached_end", all(tr["degenerate"] or tr["spacelike"] or tr["points"][-1][0] >= t_end - 1e-12
                                 for tr in traces))
    if flux in ("dx", "drift"):
        cfg.check("straight", max(tr["lateral_deviation"] for tr in traces) < 1e-8)
    fig = Figure()
    for tr in traces:
        fig.add_polyline(np.asarray(tr["points"])[:, [1, 0]], stroke="black")
    fig.save(cfg.out / "worldlines.svg")
    return {"flux": flux, "theta": theta, "traces": traces}


def _conformal_target(name: str):
    from flatgrowth.conformal import TargetRegion
    from flatgrowth.koch import KochParams, stage_polygon
    if name.startswith("koch") and name[4:].isdigit():
        k = int(name[4:])
        if k > 4:
            raise UsageError("conformal Koch targets are limited to levels 0..4")
        return TargetRegion(stage_polygon(KochParams(), k))
    if name == "disk":
        return TargetRegion.circle(2.0, 1024)
    if name == "square":
        return TargetRegion(np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]))
    try:
        return TargetRegion.from_chain(_load_chain(name))
    except ChainError as exc:
        raise UsageError(f"target {name!r}: {exc}") from None


def cmd_conformal(cfg: RunConfig) -> dict:
    from flatgrowth.conformal import (ConformalError, boundary_limit, evolution_family, fit_riemann_map,
                                      fold_count, hausdorff, map_residual, max_curvature)
    p = cfg.params
    times = sorted(_floats(p["times"], "times"))
    if not times or any(not (1.0 <= t < 2.0) for t in times):
        raise UsageError("--times must lie in [1, 2)")
    res = None if p["resolution"] is None else int(p["resolution"])
    if res is not None and res < 1:
        raise UsageError("--resolution must be >= 1")
    G = _conformal_target(str(p["target"]))
    try:
        dm = fit_riemann_map(G, resolution=res)
    except ConformalError as exc:
        raise UsageError(str(exc)) from None
    residual = map_residual(dm)
    folds = fold_count(dm)
    fam = evolution_family(dm, times)
    bnd = dm(2.0 * np.exp(1j * dm.boundary_angles))
    corr = hausdorff(np.column_stack([bnd.real, bnd.imag]), G.vertices)
    area_G = G.polygon.area
    cfg.check("residual", residual < 1e-3)
    cfg.check("injective", folds == 0)
    cfg.check("simple", all(fam.simple))
    cfg.check("nested", all(f >= 0.999 for f in fam.nesting))
    cfg.check("areas_increasing", all(fam.areas[j] < fam.areas[j + 1] for j in range(len(times) - 1))
              and fam.areas[-1] < area_G)
    report = {"target": str(p["target"]), "vertices": len(G.vertices), "anchor": dm.anchor,
              "residual": residual, "fold_count": folds, "boundary_hausdorff": corr,
              "times": times, "areas": fam.areas, "target_area": area_G, "nesting": fam.nesting,
              "simple": fam.simple, "max_curvature": [max_curvature(c) for c in fam.curves],
              "curve_points": [len(c) for c in fam.curves]}
    if p["limit"]:
        lim = boundary_limit(dm, G)
        cfg.check("limit_monotone", lim.monotone)
        report["boundary_limit"] = {"times": lim.times, "distances": lim.distances}
    fig = Figure().add_polyline(G.vertices, closed=True, stroke="black", width=1.5, label="target")
    for t, c in zip(times, fam.curves):
        formats.write_json(cfg.out / f"curve_t{t:g}.json", chain_to_json(PolyhedralChain.polyline(c, closed=True)))
        fig.add_polyline(c, closed=True, stroke="#3182bd", label=f"t = {t:g}")
    fig.save(cfg.out / "conformal.svg")
    return report


def cmd_cantor(cfg: RunConfig) -> dict:
    from flatgrowth.koch import cantor_growth
    p = cfg.params
    t, level, alpha = float(p["time"]), int(p["level"]), float(p["alpha"])
    if t < 0 or level < 0 or level > 12 or not (0.0 < alpha < 1.0):
        raise UsageError("need --time >= 0, 0 <= --level <= 12 and 0 < --alpha < 1")
    g = cantor_growth(t, level=level, alpha=alpha)
    expected = t * (1.0 - alpha) ** level
    cfg.check("swept_mass", abs(g.swept_mass - expected) <= 1e-12 * max(1.0, expected))
    formats.write_json(cfg.out / "cantor_chain.json", chain_to_json(g.swept))
    fig = Figure()
    if not g.swept.is_empty:
        fig.add_chain(g.swept, stroke="none", width=0)
    fig.add_chain(g.base).save(cfg.out / "cantor.svg")
    return {"swept_mass": g.swept_mass, "expected_mass": expected, "intervals": g.intervals}


COMMANDS = {"koch": cmd_koch, "flatnorm": cmd_flatnorm, "dimension": cmd_dimension, "balance": cmd_balance,
            "worldlines": cmd_worldlines, "conformal": cmd_conformal, "cantor": cmd_cantor}

REPORT_NAMES = {"koch": "koch_summary.json", "flatnorm": "flatnorm.json", "dimension": "dimension.json",
                "balance": "balance.json", "worldlines": "worldlines.json", "conformal": "conformal.json",
                "cantor": "cantor.json"}


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False, argument_default=S)
    common.add_argument("--out", help="output directory (default: .)")
    common.add_argument("--seed", type=int, help="seed for randomized sampling (default: 0)")
    common.add_argument("--deterministic", action="store_true", help="omit timing so outputs are byte-identical")
    common.add_argument("--config", help="JSON file of option values; flags take precedence")
    common.add_argument("--arrows", action="store_true", help="draw orientation arrowheads in SVG output")

    koch_opts = argparse.ArgumentParser(add_help=False, argument_default=S)
    koch_opts.add_argument("--base-scale", type=float)
    koch_opts.add_argument("--ratio", type=float, help="apex height relative to the equilateral one")
    koch_opts.add_argument("--single-edge", action="store_true", help="grow one segment instead of the triangle")

    ap = argparse.ArgumentParser(prog="flatgrowth", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("koch", parents=[common, koch_opts], argument_default=S, help="snowflake stages and growth")
    p.add_argument("--level", type=int)
    p.add_argument("--time", type=float)
    p.add_argument("--frames", type=int, help="also write this many numbered SVG frames of the growth")

    p = sub.add_parser("flatnorm", parents=[common, koch_opts], argument_default=S, help="simplicial flat norm")
    p.add_argument("--chain", help="1-chain JSON file")
    p.add_argument("--other", help="second chain; the flat distance to --chain is computed")
    p.add_argument("--koch", help="I,K: flat norm of B_K - B_I")
    p.add_argument("--refine", type=int)
    p.add_argument("--box", help="XMIN,YMIN,XMAX,YMAX of the ambient complex")
    p.add_argument("--method", choices=["auto", "simplex", "ipm"])

    p = sub.add_parser("dimension", parents=[common, koch_opts], argument_default=S, help="box-counting dimension")
    p.add_argument("--chain")
    p.add_argument("--koch-level", type=int)
    p.add_argument("--segment", action="store_true")
    p.add_argument("--cantor-filled", action="store_true")
    p.add_argument("--scales", help="comma-separated box sizes")
    p.add_argument("--exponents", help="LO:HI for box sizes 2**-LO .. 2**-HI")

    p = sub.add_parser("balance", parents=[common], argument_default=S, help="balance law and frame change")
    p.add_argument("--manufactured")
    p.add_argument("--field", help="polynomial 2-form JSON")
    p.add_argument("--source", help="polynomial 3-form JSON (default: exact dF)")
    p.add_argument("--boost", help="V1,V2 of the Galilean boost")
    p.add_argument("--samples", type=int)
    p.add_argument("--h0", type=float)
    p.add_argument("--halvings", type=int)
    p.add_argument("--min-order", type=float)

    p = sub.add_parser("worldlines", parents=[common], argument_default=S, help="trace worldlines")
    p.add_argument("--flux", help="dx, drift or a polynomial 2-form JSON file")
    p.add_argument("--velocity", help="V1,V2 for --flux drift")
    p.add_argument("--theta", type=float, help="constant factor of the volume element")
    p.add_argument("--seeds", type=int, help="seed grid size per axis")
    p.add_argument("--t-end", type=float)
    p.add_argument("--step", type=float)

    p = sub.add_parser("conformal", parents=[common], argument_default=S, help="Riemann map and region evolution")
    p.add_argument("--target", help="koch0..koch4, disk, square or a closed 1-chain JSON file")
    p.add_argument("--times", help="comma-separated radii in [1, 2)")
    p.add_argument("--resolution", type=int, help="boundary samples per polygon edge")
    p.add_argument("--limit", action="store_true", help="also report the boundary limit at t = 1.5, 1.9, 1.99")

    p = sub.add_parser("cantor", parents=[common], argument_default=S, help="Cantor set swept upward")
    p.add_argument("--time", type=float)
    p.add_argument("--level", type=int)
    p.add_argument("--alpha", type=float)
    return ap


def make_config(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    cmd = ns.pop("command")
    file_opts = {}
    if "config" in ns:
        path = ns.pop("config")
        try:
            data = formats.read_json(path)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        # top-level scalars apply to every command, a section named after the command overrides them
        file_opts = {k: v for k, v in data.items() if not isinstance(v, dict)}
        file_opts.update(data.get(cmd, {}))
    merged = {**COMMON_DEFAULTS, **DEFAULTS[cmd]}
    unknown = set(file_opts) - set(merged)
    if unknown:
        raise UsageError(f"unknown config keys for {cmd}: {sorted(unknown)}")
    merged.update(file_opts)
    merged.update(ns)
    common = {k: merged.pop(k) for k in COMMON_DEFAULTS}
    return RunConfig(cmd, merged, Path(common["out"]), int(common["seed"]), bool(common["deterministic"]),
                     bool(common["arrows"]))


def run(cfg: RunConfig) -> dict:
    start = time.perf_counter()
    body = COMMANDS[cfg.command](cfg)
    report = {"command": cfg.command, "params": cfg.params, "seed": cfg.seed, "checks": cfg.checks,
              "ok": all(cfg.checks.values())}
    report.update(body)
    if not cfg.deterministic:
        report["elapsed_s"] = time.perf_counter() - start
    formats.write_json(cfg.out / REPORT_NAMES[cfg.command], report)
    return report


def main(argv=None) -> int:
    try:
        cfg = make_config(argv)
        report = run(cfg)
    except UsageError as exc:
        print(f"flatgrowth: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        # module errors (chain, carrier, LP, conformal fit) with their own messages
        print(f"flatgrowth: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    failed = [k for k, v in report["checks"].items() if not v]
    for name, ok in report["checks"].items():
        print(f"{'ok  ' if ok else 'FAIL'} {name}")
    if failed:
        print(f"flatgrowth: postconditions failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
