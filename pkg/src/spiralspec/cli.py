"""Command-line pipeline: validated JSON run configs, task graph, artifacts.

Usage::

    spiralspec run --config configs/repro.json --out out/
    spiralspec spiral eigs --config my.json
    spiralspec convdiff --out out/

Every run writes ``manifest.json`` listing each emitted file with its
SHA-256 checksum and the fully resolved config.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import os
import sys
import threading
import traceback
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from . import __version__
from .export import Layer, export_svg, sha256_file, write_csv, write_json

log = logging.getLogger("spiralspec")

TASKS = ("convdiff", "wavetrain", "curves", "spiral.solve", "spiral.eigs", "spiral.pseudo", "spiral.cond")

EXIT_OK, EXIT_CONFIG, EXIT_TASK = 0, 1, 2

# ---------------------------------------------------------------------------
# config


def _obj(props, required=()):
    return {"type": "object", "additionalProperties": False, "properties": props,
            "required": list(required)}


_NUM = {"type": "number"}
_INT = {"type": "integer", "minimum": 1}
_CPLX = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_ETA = {"oneOf": [_NUM, {"enum": ["selected", "double"]}]}
_WINDOW = {"type": "array", "items": _NUM, "minItems": 4, "maxItems": 4}
_RADII = {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}}

SCHEMA = _obj({
    "model": _obj({"name": {"type": "string"}, "params": {"type": "object"}}),
    "seed": {"type": "integer", "minimum": 0},
    "workers": _INT,
    "output": {"type": "string"},
    "tasks": {"type": "array", "items": {"enum": list(TASKS)}, "uniqueItems": True},
    "tolerances": _obj({"newton": _NUM, "eigs": _NUM, "wavetrain": _NUM}),
    "weight_policy": _obj({
        "policy": {"enum": ["midpoint", "fixed", "safety"]},
        "lambda": _CPLX,
        "eta": _NUM,
        "theta": _NUM,
    }),
    "convdiff": _obj({
        "c": _NUM,
        "h": _NUM,
        "eigs": {"type": "array", "items": _obj(
            {"R": _NUM, "eta": _NUM, "k": _INT, "shift": _CPLX}, ["R", "eta"])},
        "sigma_min": {"type": "array", "items": _obj(
            {"lambda": _CPLX, "R": _RADII, "eta": {"type": "array", "items": _NUM}},
            ["lambda", "R", "eta"])},
    }),
    "wavetrain": _obj({
        "source": {"enum": ["auto", "simulate", "spiral"]},
        "k": _NUM,
        "M": _INT,
        "r_frac": _NUM,
        "t_end": _NUM,
    }),
    "curves": _obj({
        "window": _WINDOW,
        "scan": {"type": "array", "items": _INT, "minItems": 2, "maxItems": 2},
        "fredholm_eta": {"type": "array", "items": _ETA},
    }),
    "spiral": _obj({
        "radii": _RADII,
        "h_r": _NUM,
        "N_theta": _INT,
        "bootstrap": _obj({"R": _NUM, "h_r": _NUM, "N_theta": _INT, "t_end": _NUM, "dt": _NUM}),
        "eigs": _obj({"k": _INT, "shift": _CPLX, "etas": {"type": "array", "items": _ETA},
                      "radii": _RADII, "window": _WINDOW}),
        "pseudo": _obj({"window": _WINDOW,
                        "resolution": {"type": "array", "items": _INT, "minItems": 2, "maxItems": 2},
                        "etas": {"type": "array", "items": _ETA}, "radii": _RADII,
                        "levels": {"type": "array", "items": _NUM}}),
        "cond": _obj({"etas": {"type": "array", "items": _ETA},
                      "lambdas": {"type": "array", "items": _CPLX},
                      "sigma_abs_samples": {"type": "integer", "minimum": 0},
                      "sigma_abs_offset": _CPLX,
                      "radii": _RADII}),
    }),
})

DEFAULTS = {
    "model": {"name": "barkley", "params": {}},
    "seed": 0,
    "workers": 1,
    "output": "out",
    "tasks": [],
    "tolerances": {"newton": 1e-8, "eigs": 1e-10, "wavetrain": 1e-12},
    "weight_policy": {"policy": "midpoint", "lambda": [-1.0, 0.5], "theta": 0.9},
    "convdiff": {
        "c": 1.0,
        "h": 0.05,
        "eigs": [{"R": 800, "eta": 0.5, "k": 20}],
        "sigma_min": [{"lambda": [-0.15, 0.0], "R": [20, 40, 60, 80], "eta": [0.0, 0.5]}],
    },
    "wavetrain": {"source": "auto", "k": 0.5, "M": 128, "r_frac": 0.8, "t_end": 60.0},
    "curves": {"window": [-2.0, 0.5, -1.0, 4.0], "scan": [40, 40], "fredholm_eta": [0.0, "selected"]},
    "spiral": {
        "radii": [25],
        "h_r": 0.05,
        "N_theta": 64,
        "bootstrap": {"R": 25, "h_r": 0.25, "N_theta": 32, "t_end": 60.0, "dt": 0.01},
        "eigs": {"k": 400, "shift": [0.0, 0.0], "etas": [0.0, "selected"],
                 "window": [-2.0, 0.5, -1.0, 4.0]},
        "pseudo": {"window": [-2.0, 0.5, -1.0, 4.0], "resolution": [81, 81], "etas": [0.0],
                   "levels": [-8, -6, -4, -2]},
        "cond": {"etas": [0.0, "selected", "double"], "lambdas": [[-1.5, 1.0], [0.0, 0.0]],
                 "sigma_abs_samples": 0, "sigma_abs_offset": [0.05, 0.0]},
    },
}


class ConfigError(ValueError):
    pass


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "params":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(source=None) -> dict:
    """Validate a config (path, mapping or ``None``) and fill in defaults.

    Unknown keys anywhere raise :class:`ConfigError`.
    """
    if source is None:
        raw = {}
    elif isinstance(source, dict):
        raw = source
    else:
        try:
            with open(source, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {source}: {exc}") from exc
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from None
    cfg = _merge(DEFAULTS, raw)
    try:
        from .kinetics import build_model

        build_model(cfg["model"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid model: {exc}") from exc
    return cfg


def task_dependencies(cfg: dict) -> dict[str, list[str]]:
    tasks = set(cfg["tasks"])
    src = cfg["wavetrain"]["source"]
    use_spiral = src == "spiral" or (src == "auto" and "spiral.solve" in tasks)
    return {
        "convdiff": [],
        "spiral.solve": [],
        "wavetrain": ["spiral.solve"] if use_spiral else [],
        "curves": ["wavetrain"],
        "spiral.eigs": ["spiral.solve", "curves"],
        "spiral.pseudo": ["spiral.solve", "curves"],
        "spiral.cond": ["spiral.solve", "curves"],
    }


def plan_tasks(cfg: dict, only=None) -> list[str]:
    """Requested tasks plus their dependencies, in a fixed topological order."""
    deps = task_dependencies(cfg)
    wanted = set(only) if only else set(cfg["tasks"])
    stack = list(wanted)
    while stack:
        t = stack.pop()
        for d in deps[t]:
            if d not in wanted:
                wanted.add(d)
                stack.append(d)
    if not only:
        cfg["tasks"] = [t for t in TASKS if t in wanted]
    return [t for t in TASKS if t in wanted]


# ---------------------------------------------------------------------------
# tasks


@dataclass
class RunContext:
    cfg: dict
    out: str
    seed: int
    results: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def model(self):
        from .kinetics import build_model

        return build_model(self.cfg["model"])

    def path(self, task: str, name: str) -> str:
        with self.lock:
            self.files[name] = task
        return os.path.join(self.out, name)

    def eta_value(self, spec) -> float:
        if isinstance(spec, str):
            sel = self.results["curves"]["weight"].eta
            return sel if spec == "selected" else 2.0 * sel
        return float(spec)


def _cplx(pair) -> complex:
    return complex(pair[0], pair[1])


def _eta_tag(eta: float) -> str:
    return f"{eta:+.4f}"


def task_convdiff(ctx: RunContext):
    from .convdiff import (ConvDiffProblem, cd_absolute_spectrum, cd_analytic_spectrum,
                           cd_eigenvalues, cd_fredholm_boundary, cd_sigma_min)
    from .spatial import polyline_distance

    c, h = ctx.cfg["convdiff"]["c"], ctx.cfg["convdiff"]["h"]
    ells = np.linspace(-10, 10, 4001)
    sabs = cd_absolute_spectrum(c)
    rows = []
    for run in ctx.cfg["convdiff"]["eigs"]:
        R, eta, k = run["R"], run["eta"], run.get("k", 20)
        prob = ConvDiffProblem(c=c, R=R, h=h, eta=eta)
        res = cd_eigenvalues(prob, k=k, shift=_cplx(run.get("shift", [0.0, 0.0])),
                             tol=ctx.cfg["tolerances"]["eigs"])
        order = np.lexsort((res.eigenvalues.imag, -res.eigenvalues.real))
        vals, resid = res.eigenvalues[order], res.residuals[order]
        exact = cd_analytic_spectrum(c, R, len(vals))
        d_fb = polyline_distance(vals, cd_fredholm_boundary(c, eta, ells))
        d_abs = polyline_distance(vals, sabs)
        for i, (z, r) in enumerate(zip(vals, resid)):
            rows.append([R, eta, i + 1, z.real, z.imag, r, exact[i], d_fb[i], d_abs[i]])
    write_csv(ctx.path("convdiff", "convdiff_eigs.csv"),
              ["R", "eta", "n", "re", "im", "residual", "analytic", "dist_fb", "dist_abs"], rows)
    srows = []
    for run in ctx.cfg["convdiff"]["sigma_min"]:
        lam = _cplx(run["lambda"])
        for eta in run["eta"]:
            for R in run["R"]:
                s = cd_sigma_min(ConvDiffProblem(c=c, R=R, h=h, eta=eta), lam)
                srows.append([R, eta, lam.real, lam.imag, s])
    write_csv(ctx.path("convdiff", "convdiff_sigma_min.csv"),
              ["R", "eta", "lambda_re", "lambda_im", "sigma_min"], srows)
    return {"eigs": rows, "sigma_min": srows}


def task_spiral_solve(ctx: RunContext):
    from .discretize import PolarGrid
    from .spiral import bootstrap_time_evolution, interpolate_spiral, solve_spiral

    sc = ctx.cfg["spiral"]
    tol = ctx.cfg["tolerances"]["newton"]
    model = ctx.model
    bs = sc["bootstrap"]
    g0 = PolarGrid(bs["R"], bs["h_r"], bs["N_theta"])
    u0, om0, r2 = bootstrap_time_evolution(model, g0, t_end=bs["t_end"], dt=bs["dt"])
    log.info("bootstrap: omega %.5f (fit r2 %.4f)", om0, r2)
    boot = solve_spiral(model, g0, u0, om0, tol=tol, maxiter=60)
    sols = {}
    # smaller disks interpolate the bootstrap solution; larger ones continue outward
    prev = boot
    for R in sorted(sc["radii"]):
        grid = PolarGrid(R, sc["h_r"], sc["N_theta"])
        base = boot if R <= bs["R"] else prev
        sol = solve_spiral(model, grid, interpolate_spiral(base, grid), base.omega, tol=tol)
        sols[R] = sol
        if R >= bs["R"]:
            prev = sol
        head = {"R": R, "h_r": sc["h_r"], "N_theta": sc["N_theta"], "omega": sol.omega,
                "residual": sol.residual, "iterations": sol.iterations, "k_R": sol.k_R,
                "bc": list(sol.bc), "model": ctx.cfg["model"],
                "profile_file": f"spiral_R{R:g}_profile.csv"}
        write_json(ctx.path("spiral.solve", f"spiral_R{R:g}.json"), head)
        r_node, th_node = grid.node_r, grid.node_theta
        write_csv(ctx.path("spiral.solve", f"spiral_R{R:g}_profile.csv"),
                  ["r", "theta"] + [f"u{c}" for c in range(model.n_components)],
                  zip(r_node, th_node, *sol.profile))
    write_csv(ctx.path("spiral.solve", "spiral_summary.csv"), ["R", "omega", "residual", "k_R"],
              [[R, s.omega, s.residual, s.k_R] for R, s in sorted(sols.items())])
    return sols


def task_wavetrain(ctx: RunContext):
    from .spatial import check_admissibility
    from .spiral import far_field_correlation, far_field_wavetrain
    from .wavetrain import group_velocity, simulate_wavetrain, solve_wavetrain

    wc = ctx.cfg["wavetrain"]
    tol = ctx.cfg["tolerances"]["wavetrain"]
    model = ctx.model
    sols = ctx.results.get("spiral.solve")
    info = {}
    if sols:
        big = sols[max(sols)]
        wt = far_field_wavetrain(big, M=wc["M"], r_frac=wc["r_frac"])
        info.update(source="spiral", R=big.grid.R, far_field_correlation=far_field_correlation(big, wt))
    else:
        prof, om = simulate_wavetrain(model, wc["k"], M=wc["M"], t_end=wc["t_end"])
        wt = solve_wavetrain(model, wc["k"], prof, om, tol=tol)
        info.update(source="simulate")
    cg, cg_err = group_velocity(wt)
    adm = check_admissibility(wt)
    info.update(k=wt.k, omega=wt.omega, residual=wt.residual, group_velocity=cg,
                group_velocity_error=cg_err, admissibility={
                    "eigvec_error": adm.eigvec_error, "dnu_dlambda": adm.dnu_dlambda,
                    "relative_mismatch": adm.relative_mismatch, "ok": adm.ok})
    write_json(ctx.path("wavetrain", "wavetrain.json"), info)
    write_csv(ctx.path("wavetrain", "wavetrain_profile.csv"),
              ["phi"] + [f"u{c}" for c in range(model.n_components)], zip(wt.phi, *wt.profile))
    return {"wt": wt, "info": info}


def task_curves(ctx: RunContext):
    from .spatial import absolute_spectrum, fredholm_curves, select_weight, spatial_spectrum

    cc = ctx.cfg["curves"]
    wp = ctx.cfg["weight_policy"]
    wt = ctx.results["wavetrain"]["wt"]
    lam = _cplx(wp["lambda"])
    spec = spatial_spectrum(wt, lam)
    policy = wp["policy"] if wp["policy"] == "midpoint" else (wp["policy"], wp.get("eta", 0.0))
    plan = select_weight(spec, policy, theta=wp.get("theta", 0.9))
    sabs = absolute_spectrum(wt, window=tuple(cc["window"]), n_re=cc["scan"][0], n_im=cc["scan"][1])
    ctx.results["curves"] = {"weight": plan}
    fbs = {}
    for e in cc["fredholm_eta"]:
        eta = ctx.eta_value(e)
        fbs[eta] = fredholm_curves(wt, eta)
    write_csv(ctx.path("curves", "sigma_abs.csv"), ["branch", "re", "im"],
              [[r["branch"], r["re"], r["im"]] for r in sabs.to_rows()])
    write_csv(ctx.path("curves", "sigma_fb.csv"), ["eta", "branch", "gamma", "re", "im"],
              [[eta, r["branch"], r["param"], r["re"], r["im"]]
               for eta, c in fbs.items() for r in c.to_rows()])
    write_json(ctx.path("curves", "weight.json"), {
        "lambda": plan.lam, "J0": plan.J0, "eta": plan.eta, "policy": plan.policy,
        "inside": plan.inside, "omega": wt.omega, "nu_m1": spec.nu_m1, "nu_0": spec.nu_0})
    layers = [Layer("curve", "Σ_abs", sabs.points, color="#cc0000")]
    layers += [Layer("curve", f"Σ_FB η={eta:.3g}", c.points, color="#0055cc") for eta, c in fbs.items()]
    with open(ctx.path("curves", "curves.svg"), "w", encoding="utf-8") as fh:
        fh.write(export_svg(layers, window=cc["window"], title="spectral curves"))
    return {"weight": plan, "sigma_abs": sabs, "sigma_fb": fbs}


def _radii(ctx, section):
    sc = ctx.cfg["spiral"]
    return sc[section].get("radii") or sc["radii"]


def task_spiral_eigs(ctx: RunContext):
    from .spiral import spiral_spectrum

    ec = ctx.cfg["spiral"]["eigs"]
    sols = ctx.results["spiral.solve"]
    curves = ctx.results["curves"]
    sabs = curves["sigma_abs"].periodic_copies((ec["window"][2], ec["window"][3]))
    out = {}
    for R in _radii(ctx, "eigs"):
        for e in ec["etas"]:
            eta = ctx.eta_value(e)
            fb = curves["sigma_fb"].get(eta)
            rep = spiral_spectrum(sols[R], eta, k=ec["k"], shift=_cplx(ec["shift"]),
                                  tol=ctx.cfg["tolerances"]["eigs"], sigma_abs=sabs,
                                  sigma_fb=None if fb is None else fb.points)
            vals = rep.eigenvalues
            order = np.lexsort((vals.imag, vals.real))
            name = f"spiral_eigs_R{R:g}_eta{_eta_tag(eta)}"
            write_csv(ctx.path("spiral.eigs", name + ".csv"),
                      ["re", "im", "residual", "dist_abs", "dist_fb"],
                      zip(vals.real[order], vals.imag[order], rep.residuals[order],
                          rep.dist_abs[order], rep.dist_fb[order]))
            layers = [Layer("curve", "Σ_abs", sabs.points, color="#cc0000"),
                      Layer("scatter", f"eigenvalues η={eta:.3g}", vals, color="#000000")]
            with open(ctx.path("spiral.eigs", name + ".svg"), "w", encoding="utf-8") as fh:
                fh.write(export_svg(layers, window=ec["window"], title=f"R={R:g}, η={eta:.3g}"))
            rep.eigen.eigenvectors = None  # large at R = 75 and not needed downstream
            out[(R, eta)] = rep
    return out


def task_spiral_pseudo(ctx: RunContext):
    from .spiral import pseudospectrum_field

    pc = ctx.cfg["spiral"]["pseudo"]
    sols = ctx.results["spiral.solve"]
    out = {}
    for R in _radii(ctx, "pseudo"):
        for e in pc["etas"]:
            eta = ctx.eta_value(e)
            fld = pseudospectrum_field(sols[R], eta, window=tuple(pc["window"]),
                                       resolution=tuple(pc["resolution"]), levels=pc["levels"])
            name = f"pseudo_R{R:g}_eta{_eta_tag(eta)}"
            rows = [[x, y, fld.sigma_min[i, j]] for i, y in enumerate(fld.im) for j, x in enumerate(fld.re)]
            write_csv(ctx.path("spiral.pseudo", name + ".csv"), ["re", "im", "sigma_min"], rows)
            layers = [Layer("field", "σ_min", grid=(fld.re, fld.im, fld.sigma_min))]
            for lev, lines in (fld.contours or {}).items():
                pts = np.concatenate([np.append(l, np.nan) for l in lines]) if lines else np.zeros(0, complex)
                layers.append(Layer("curve", f"10^{lev:g}", pts, color="#ffffff"))
            with open(ctx.path("spiral.pseudo", name + ".svg"), "w", encoding="utf-8") as fh:
                fh.write(export_svg(layers, window=pc["window"], title=f"σ_min, R={R:g}, η={eta:.3g}"))
            out[(R, eta)] = fld
    return out


def task_spiral_cond(ctx: RunContext):
    from .spiral import condition_map

    cc = ctx.cfg["spiral"]["cond"]
    sols = ctx.results["spiral.solve"]
    lams = [_cplx(p) for p in cc["lambdas"]]
    n_s = cc.get("sigma_abs_samples", 0)
    if n_s:
        # samples sit a fixed offset away from Σ_abs, where the truncated
        # spectrum accumulates
        x0, x1, y0, y1 = ctx.cfg["curves"]["window"]
        pts = ctx.results["curves"]["sigma_abs"].points
        pts = pts[np.isfinite(pts) & (pts.imag >= max(y0, 0.0)) & (pts.imag <= y1) & (pts.real >= x0)]
        pts = pts[np.lexsort((pts.real, pts.imag))]
        idx = np.linspace(0, len(pts) - 1, n_s + 2)[1:-1].round().astype(int)
        lams += [complex(z) + _cplx(cc["sigma_abs_offset"]) for z in pts[idx]]
    etas = [ctx.eta_value(e) for e in cc["etas"]]
    rows, out = [], {}
    for R in _radii(ctx, "cond"):
        table = condition_map(sols[R], etas, lams, seed=ctx.seed)
        out[R] = table
        rows += [[R, t["eta"], t["lambda"].real, t["lambda"].imag, t["log10_kappa"],
                  t["log10_sigma_min"], t["singular"]] for t in table]
    write_csv(ctx.path("spiral.cond", "condition.csv"),
              ["R", "eta", "lambda_re", "lambda_im", "log10_kappa", "log10_sigma_min", "singular"], rows)
    return out


RUNNERS = {
    "convdiff": task_convdiff,
    "wavetrain": task_wavetrain,
    "curves": task_curves,
    "spiral.solve": task_spiral_solve,
    "spiral.eigs": task_spiral_eigs,
    "spiral.pseudo": task_spiral_pseudo,
    "spiral.cond": task_spiral_cond,
}


# ---------------------------------------------------------------------------
# runner


def run(cfg: dict, out: str | None = None, workers: int | None = None, only=None,
        seed: int | None = None) -> tuple[int, dict, dict]:
    """Execute the task graph; returns ``(exit_code, manifest, results)``.

    Failed tasks make their dependents ``skipped``; independent tasks still
    run.  ``results`` maps task names to their in-memory outputs.
    """
    cfg = copy.deepcopy(cfg)
    if seed is not None:
        cfg["seed"] = int(seed)
    if workers is not None:
        cfg["workers"] = int(workers)
    out = out or cfg["output"]
    cfg["output"] = out
    order = plan_tasks(cfg, only)
    deps = task_dependencies(cfg)
    os.makedirs(out, exist_ok=True)
    ctx = RunContext(cfg, out, cfg["seed"])
    status = {t: "pending" for t in order}
    errors = {}

    def launch(t):
        log.info("task %s: start", t)
        res = RUNNERS[t](ctx)
        with ctx.lock:
            ctx.results[t] = res
        return res

    with ThreadPoolExecutor(max_workers=max(1, cfg["workers"])) as pool:
        running = {}
        while True:
            for t in order:
                if status[t] != "pending":
                    continue
                need = [d for d in deps[t] if d in status]
                if any(status[d] in ("failed", "skipped") for d in need):
                    status[t] = "skipped"
                elif all(status[d] == "ok" for d in need) and len(running) < cfg["workers"]:
                    status[t] = "running"
                    running[pool.submit(launch, t)] = t
            if not running:
                break
            done, _ = wait(running, return_when=FIRST_COMPLETED)
            for fut in done:
                t = running.pop(fut)
                exc = fut.exception()
                if exc is None:
                    status[t] = "ok"
                    log.info("task %s: ok", t)
                else:
                    status[t] = "failed"
                    errors[t] = "".join(traceback.format_exception_only(type(exc), exc)).strip()
                    log.error("task %s failed: %s", t, errors[t])
    files = []
    for name in sorted(ctx.files):
        p = os.path.join(out, name)
        files.append({"path": name, "task": ctx.files[name], "sha256": sha256_file(p),
                      "bytes": os.path.getsize(p)})
    manifest = {"version": __version__, "config": cfg, "tasks": status, "errors": errors,
                "files": files}
    write_json(os.path.join(out, "manifest.json"), manifest)
    code = EXIT_OK if all(s == "ok" for s in status.values()) else EXIT_TASK
    return code, manifest, ctx.results


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config (defaults are used for missing keys)")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--workers", type=int, help="number of concurrent tasks")
    common.add_argument("--task", action="append", choices=TASKS,
                        help="run only this task and its dependencies (repeatable)")
    common.add_argument("--seed", type=int, help="seed for randomized estimators")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="spiralspec", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run the tasks listed in the config")
    for name in ("convdiff", "wavetrain", "curves"):
        sub.add_parser(name, parents=[common], help=f"run the {name} task")
    sp = sub.add_parser("spiral", help="spiral tasks")
    ssub = sp.add_subparsers(dest="action", required=True)
    for name in ("solve", "eigs", "pseudo", "cond"):
        ssub.add_parser(name, parents=[common], help=f"run spiral.{name}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None and args.seed < 0:
        print("config error: --seed must be non-negative", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "run":
        only = args.task
    elif args.command == "spiral":
        only = [f"spiral.{args.action}"]
    else:
        only = [args.command]
    code, manifest, _ = run(cfg, out=args.out, workers=args.workers, only=only, seed=args.seed)
    for t, s in manifest["tasks"].items():
        print(f"{t}: {s}")
    print(f"manifest: {os.path.join(manifest['config']['output'], 'manifest.json')}")
    return code


if __name__ == "__main__":
    sys.exit(main())
