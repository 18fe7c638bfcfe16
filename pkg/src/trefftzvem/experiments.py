"""Named experiment pipelines emitting CSV tables under results/.

Every experiment is deterministic: a fixed configuration produces
byte-identical CSV output.  Error tables share one schema,

    h,ndof,relH1,rateH1,relL2,rateL2,ndof_orig,reduction_pct,residual,
    max_edge_cond,status[,extras...]

with empty cells for unavailable values (first-row rates, failed
levels).  Probe tables (conditioning, eigenvalue sweeps) carry their
own minimal schemas.  Failed levels are recorded with a status, never
dropped.
"""

from __future__ import annotations

import json
import math
import pathlib
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import analysis, mesh as meshmod, problems
from .assembly import BasisConfig, Result, solve_helmholtz
from .planewave import SIGMA_DEFAULT

REPORT_HEADER = ("h,ndof,relH1,rateH1,relL2,rateL2,ndof_orig,"
                 "reduction_pct,residual,max_edge_cond,status")


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment run."""

    name: str
    mesh: dict = field(default_factory=dict)
    k: float | list = 20.0
    q: int | list = 7
    basis: str = "orthonormal"
    stab: str = "drecipe"
    sigma: float = SIGMA_DEFAULT
    theta: float = 1.0
    solution: str | None = "u1"
    scatter: str | None = None
    incident: str | None = None
    out: str | None = None
    probe: dict = field(default_factory=dict)

    def validate(self):
        ks = self.k if isinstance(self.k, (list, tuple)) else [self.k]
        if any(kk <= 0 for kk in ks):
            raise ValueError("k must be positive")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        for p in self.mesh.get("paths", []):
            if not pathlib.Path(p).exists():
                raise FileNotFoundError(f"mesh file {p} not found")
        return self

    @property
    def out_dir(self) -> pathlib.Path:
        return pathlib.Path(self.out or f"results/{self.name}")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    if math.isinf(x):
        return "inf"
    return f"{x:.12e}"


def write_csv(path, header: str, rows):
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [header]
    for row in rows:
        lines.append(",".join(_fmt(c) for c in row))
    path.write_text("\n".join(lines) + "\n")
    return path


@dataclass
class LevelRun:
    """Outcome of one solve+measure step; failures keep their slot."""

    h: float
    result: Result | None = None
    errors: analysis.Errors | None = None
    status: str = "ok"
    extras: tuple = ()


def _reduction(res: Result) -> float:
    if res.n_orig == 0:
        return 0.0
    return 100.0 * (1.0 - res.ndof / res.n_orig)


def report_rows(runs: list) -> list:
    hs = np.array([r.h for r in runs])
    eh1 = np.array([r.errors.rel_h1 if r.errors else np.nan for r in runs])
    el2 = np.array([r.errors.rel_l2 if r.errors else np.nan for r in runs])
    rh1 = analysis.convergence_rates(hs, eh1)
    rl2 = analysis.convergence_rates(hs, el2)
    rows = []
    for i, r in enumerate(runs):
        if r.result is not None:
            res = r.result
            rows.append((r.h, res.ndof, eh1[i], rh1[i], el2[i], rl2[i],
                         res.n_orig, f"{_reduction(res):.2f}", res.residual,
                         res.max_edge_cond, r.status) + r.extras)
        else:
            rows.append((r.h, None, None, None, None, None, None, "",
                         None, None, r.status) + r.extras)
    return rows


def run_level(mesh, data, q=None, degrees=None, basis=None,
              stab="drecipe", solution=None, refine_check=True,
              extras=()) -> LevelRun:
    """Solve one level, measure errors, capture failures as status."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = solve_helmholtz(mesh, data, q=q, degrees=degrees,
                                  basis=basis, stab=stab)
    except (np.linalg.LinAlgError, ValueError) as exc:
        return LevelRun(mesh.h, status=f"failed: {exc}", extras=extras)
    status = "ok"
    err = None
    if solution is not None:
        err = analysis.projected_errors(res, solution,
                                        refine_check=refine_check)
        if math.isnan(err.rel_h1) or math.isnan(err.rel_l2):
            status = "failed: nan"
    if math.isnan(res.residual):
        status = "failed: nan"
    return LevelRun(mesh.h, res, err, status, extras)


def write_summary(cfg: ExperimentConfig, runs_by_file: dict):
    lines = [f"experiment: {cfg.name}"]
    for fname, runs in runs_by_file.items():
        lines.append(f"[{fname}]")
        for r in runs:
            if r.result is None:
                lines.append(f"  h={r.h:.6e} {r.status}")
                continue
            lines.append(f"  h={r.h:.6e} ndof={r.result.ndof} "
                         f"residual={r.result.residual:.3e} "
                         f"max_edge_cond={r.result.max_edge_cond:.3e} "
                         f"{r.status}")
            for d in r.result.diagnostics:
                lines.append(f"    {d}")
    path = cfg.out_dir / "summary.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def _basis_cfg(cfg: ExperimentConfig) -> BasisConfig:
    return BasisConfig(kind=cfg.basis, sigma=cfg.sigma)


def _cartesian_levels(cfg, default):
    return cfg.mesh.get("levels", default)


def _bc_label(cfg) -> str:
    return cfg.mesh.get("bc", "R")


def _relabel(m: meshmod.PolygonalMesh, label: str):
    for e in m.edges:
        if len(e.elements) == 1 and e.label != "Sc":
            e.label = label
    return m


def _load_family(cfg) -> list:
    """(tag, mesh) pairs for a file-based mesh family."""
    out = []
    for p in cfg.mesh["paths"]:
        m = meshmod.load_mesh(p)
        _relabel(m, _bc_label(cfg))
        out.append((pathlib.Path(p).stem, m))
    return out


# ----------------------------------------------------------------------
# h-version experiments

def run_patch(cfg: ExperimentConfig):
    written = {}
    for k in cfg.k if isinstance(cfg.k, (list, tuple)) else [cfg.k]:
        sol = problems.exact_solution(cfg.solution or "u0", k)
        data = problems.solution_data(sol, cfg.theta)
        for q in cfg.q if isinstance(cfg.q, (list, tuple)) else [cfg.q]:
            runs = []
            for n in _cartesian_levels(cfg, [2, 4, 8]):
                m = meshmod.cartesian_mesh(n, label=_bc_label(cfg))
                runs.append(run_level(m, data, q=q, basis=_basis_cfg(cfg),
                                      stab=cfg.stab, solution=sol))
            fname = f"patch_k{k:g}_q{q}.csv"
            write_csv(cfg.out_dir / fname, REPORT_HEADER, report_rows(runs))
            written[fname] = runs
    write_summary(cfg, written)
    return written


def _h_study(cfg: ExperimentConfig, fname: str, status_tag="ok"):
    sol = problems.exact_solution(cfg.solution, cfg.k)
    data = problems.solution_data(sol, cfg.theta)
    runs = []
    if "paths" in cfg.mesh:
        for tag, m in _load_family(cfg):
            r = run_level(m, data, q=cfg.q, basis=_basis_cfg(cfg),
                          stab=cfg.stab, solution=sol, extras=(tag,))
            if r.status == "ok":
                r.status = status_tag
            runs.append(r)
        header = REPORT_HEADER + ",mesh"
    else:
        for n in _cartesian_levels(cfg, [1, 2, 4, 8, 16, 32]):
            m = meshmod.cartesian_mesh(n, label=_bc_label(cfg))
            runs.append(run_level(m, data, q=cfg.q, basis=_basis_cfg(cfg),
                                  stab=cfg.stab, solution=sol))
        header = REPORT_HEADER
    write_csv(cfg.out_dir / fname, header, report_rows(runs))
    write_summary(cfg, {fname: runs})
    return {fname: runs}


def run_table1(cfg: ExperimentConfig):
    return _h_study(cfg, "table1.csv")


def run_table2(cfg: ExperimentConfig):
    # Voronoi levels are not nested; rates are indicative only
    return _h_study(cfg, "table2.csv", status_tag="nonnested")


def run_h_singular(cfg: ExperimentConfig):
    return _h_study(cfg, "h_singular.csv")


def run_stab_compare(cfg: ExperimentConfig):
    written = {}
    sol = problems.exact_solution(cfg.solution, cfg.k)
    data = problems.solution_data(sol, cfg.theta)
    for stab in ("drecipe", "identity"):
        runs = []
        for n in _cartesian_levels(cfg, [1, 2, 4, 8, 16]):
            m = meshmod.cartesian_mesh(n, label=_bc_label(cfg))
            runs.append(run_level(m, data, q=cfg.q, basis=_basis_cfg(cfg),
                                  stab=stab, solution=sol))
        fname = f"stab_{stab}.csv"
        write_csv(cfg.out_dir / fname, REPORT_HEADER, report_rows(runs))
        written[fname] = runs
    write_summary(cfg, written)
    return written


def run_instability(cfg: ExperimentConfig):
    written = {}
    sol = problems.exact_solution(cfg.solution, cfg.k)
    data = problems.solution_data(sol, cfg.theta)
    qs = cfg.q if isinstance(cfg.q, (list, tuple)) else [cfg.q]
    for q in qs:
        for kind in ("filtered", "orthonormal"):
            runs = []
            for n in _cartesian_levels(cfg, [1, 2, 4, 8, 16]):
                m = meshmod.cartesian_mesh(n, label=_bc_label(cfg))
                basis = BasisConfig(kind=kind, sigma=cfg.sigma)
                runs.append(run_level(m, data, q=q, basis=basis,
                                      stab=cfg.stab, solution=sol))
            fname = f"{kind}_q{q}.csv"
            write_csv(cfg.out_dir / fname, REPORT_HEADER, report_rows(runs))
            written[fname] = runs
    write_summary(cfg, written)
    return written


def run_sigma_study(cfg: ExperimentConfig):
    written = {}
    sol = problems.exact_solution(cfg.solution, cfg.k)
    data = problems.solution_data(sol, cfg.theta)
    tight = 10.0 * np.finfo(float).eps
    for tag, sigma in (("default", cfg.sigma), ("tight", tight)):
        runs = []
        for mesh_tag, m in _load_family(cfg):
            basis = BasisConfig(kind=cfg.basis, sigma=sigma)
            runs.append(run_level(m, data, q=cfg.q, basis=basis,
                                  stab=cfg.stab, solution=sol,
                                  extras=(mesh_tag,)))
        fname = f"sigma_{tag}.csv"
        write_csv(cfg.out_dir / fname, REPORT_HEADER + ",mesh",
                  report_rows(runs))
        written[fname] = runs
    write_summary(cfg, written)
    return written


# ----------------------------------------------------------------------
# probes

def run_cond_probe(cfg: ExperimentConfig):
    # the window keeps cond(q=4) below ~1e14: beyond that the smallest
    # eigenvalue is round-off noise and the reported number meaningless
    qs = cfg.probe.get("qs", [2, 3, 4])
    hk = cfg.probe.get("hk")
    if hk is None:
        hk = np.geomspace(4.0, 16.0, 13).tolist()
    rows = analysis.condition_curve(qs, hk)
    write_csv(cfg.out_dir / "cond.csv", "q,hk,cond", rows)
    return rows


def run_eig_probe(cfg: ExperimentConfig):
    q = cfg.q if isinstance(cfg.q, int) else 4
    ks = cfg.probe.get("ks")
    if ks is None:
        marks = [math.pi, math.pi * math.sqrt(2.0), 2.0 * math.pi,
                 math.pi * math.sqrt(5.0)]
        mids = [(a + b) / 2.0 for a, b in zip(marks, marks[1:])]
        ks = sorted(set(np.linspace(2.5, 7.2, 236).tolist() + marks + mids))
    square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    rows = [(k, analysis.bulk_gram_min_singular(k, q, square)) for k in ks]
    write_csv(cfg.out_dir / "eig.csv", "k,min_abs_eig", rows)
    return rows


# ----------------------------------------------------------------------
# p-, hp-version

def run_p_version(cfg: ExperimentConfig):
    written = {}
    k = cfg.k
    q_lo, q_hi = cfg.probe.get("q_range", [1, 25])
    sols = cfg.probe.get("solutions", ["u1", "u3"])
    for tag, m in _load_family(cfg):
        for sname in sols:
            sol = problems.exact_solution(sname, k)
            data = problems.solution_data(sol, cfg.theta)
            runs = []
            for q in range(q_lo, q_hi + 1):
                r = run_level(m, data, q=q, basis=_basis_cfg(cfg),
                              stab=cfg.stab, solution=sol,
                              refine_check=False, extras=(q,))
                runs.append(r)
            fname = f"p_{tag}_{sname}.csv"
            write_csv(cfg.out_dir / fname, REPORT_HEADER + ",q",
                      report_rows(runs))
            written[fname] = runs
    write_summary(cfg, written)
    return written


def run_hp_version(cfg: ExperimentConfig):
    written = {}
    sol = problems.exact_solution(cfg.solution, cfg.k)
    data = problems.solution_data(sol, cfg.theta)
    mus = cfg.probe.get("mu", [0.5, 1.0 / 3.0])
    n_max = cfg.probe.get("n_max", 6)
    for mu in mus:
        runs = []
        for n in range(n_max + 1):
            m, degrees = meshmod.graded_mesh(n, mu, label=_bc_label(cfg))
            r = run_level(m, data, degrees=degrees, basis=_basis_cfg(cfg),
                          stab=cfg.stab, solution=sol, extras=(n,))
            if r.result is not None:
                r.extras = (n, math.sqrt(r.result.ndof))
            else:
                r.extras = (n, None)
            runs.append(r)
        fname = f"hp_mu{mu:.4f}.csv"
        write_csv(cfg.out_dir / fname, REPORT_HEADER + ",level,sqrt_ndof",
                  report_rows(runs))
        written[fname] = runs
    write_summary(cfg, written)
    return written


# ----------------------------------------------------------------------
# scattering

class ProjectedField:
    """Evaluate a solved field as value/gradient callables.

    Points are located in the solve's mesh with `locate`; evaluation
    uses the elementwise plane-wave projection.  The last evaluation is
    cached so value+gradient on the same array costs one pass.
    """

    def __init__(self, result: Result, locate: Callable):
        self.result = result
        self.locate = locate
        self._cache_key = None
        self._vals = None
        self._grads = None

    def _eval(self, pts):
        key = (id(pts), pts.shape[0])
        if self._cache_key == key:
            return
        eids = self.locate(pts)
        order = np.argsort(eids, kind="stable")
        vals = np.empty(len(pts), dtype=complex)
        grads = np.empty((len(pts), 2), dtype=complex)
        sorted_eids = eids[order]
        bounds = np.searchsorted(sorted_eids,
                                 np.unique(sorted_eids), side="left")
        groups = np.split(order, bounds[1:])
        uniq = np.unique(sorted_eids)
        v, g = analysis.evaluate_projection(
            self.result, uniq, [pts[gr] for gr in groups])
        pos = 0
        for gr in groups:
            vals[gr] = v[pos:pos + len(gr)]
            grads[gr] = g[pos:pos + len(gr)]
            pos += len(gr)
        self._cache_key = key
        self._vals, self._grads = vals, grads

    def value(self, pts):
        self._eval(pts)
        return self._vals

    def gradient(self, pts):
        self._eval(pts)
        return self._grads


def _field_dump(result: Result, locate, path, n_cells=180):
    """Sample Re/Im of the projected field at cell centers over Omega."""
    step_x = 3.0 / n_cells
    xs = -1.0 + step_x * (np.arange(n_cells) + 0.5)
    ys = step_x * (np.arange(n_cells) + 0.5)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=-1)
    inside_hole = ((pts[:, 0] > 0) & (pts[:, 0] < 1)
                   & (pts[:, 1] > 1) & (pts[:, 1] < 2))
    pts = pts[~inside_hole]
    fld = ProjectedField(result, locate)
    vals = fld.value(pts)
    rows = [(x, y, v.real, v.imag) for (x, y), v in zip(pts, vals)]
    write_csv(path, "x,y,re_u,im_u", rows)


def run_scattering(cfg: ExperimentConfig):
    kind = cfg.scatter
    if kind not in ("soft", "hard"):
        raise ValueError("scatter must be 'soft' or 'hard'")
    incident = problems.exact_solution(cfg.incident or "u0", cfg.k)
    data = problems.scattering_data(kind, incident, cfg.theta)

    levels = _cartesian_levels(cfg, [0, 1, 2])
    ref_level = cfg.mesh.get("reference", max(levels) + 1)
    ref_mesh = meshmod.hole_mesh(ref_level)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ref = solve_helmholtz(ref_mesh, data, q=cfg.q,
                              basis=_basis_cfg(cfg), stab=cfg.stab)
    locate = meshmod.hole_mesh_locator(ref_level)
    reference = ProjectedField(ref, locate)

    runs = []
    for lv in levels:
        m = meshmod.hole_mesh(lv)
        r = run_level(m, data, q=cfg.q, basis=_basis_cfg(cfg),
                      stab=cfg.stab, solution=reference,
                      refine_check=False, extras=(lv,))
        runs.append(r)
    fname = "scattering.csv"
    write_csv(cfg.out_dir / fname, REPORT_HEADER + ",level",
              report_rows(runs))
    _field_dump(ref, locate, cfg.out_dir / "field.csv")
    write_summary(cfg, {fname: runs})
    return {fname: runs}


# ----------------------------------------------------------------------
# registry

_VORONOI_PATHS = [f"data/meshes/voronoi_{n:03d}.txt"
                  for n in (8, 16, 32, 64, 128, 256)]

DEFAULTS = {
    "patch": dict(solution="u0", k=[10.0, 20.0], q=[4, 7],
                  mesh={"levels": [2, 4, 8]}),
    "table1": dict(solution="u1", k=20.0, q=7,
                   mesh={"levels": [1, 2, 4, 8, 16, 32]}),
    "table2": dict(solution="u1", k=20.0, q=7,
                   mesh={"paths": _VORONOI_PATHS}),
    "stab-compare": dict(solution="u1", k=20.0, q=7,
                         mesh={"levels": [1, 2, 4, 8, 16]}),
    "h-singular": dict(solution="u3", k=10.0, q=4,
                       mesh={"levels": [2, 4, 8, 16, 32, 64]}),
    "instability": dict(solution="u1", k=10.0, q=[3, 4],
                        mesh={"levels": [1, 2, 4, 8, 16]}),
    "sigma-study": dict(solution="u2", k=10.0, q=7,
                        mesh={"paths": _VORONOI_PATHS}),
    "cond-probe": dict(),
    "eig-probe": dict(q=4),
    "p-version": dict(k=10.0,
                      mesh={"paths": ["data/meshes/voronoi_008.txt",
                                      "data/meshes/concave_008.txt"]},
                      probe={"q_range": [1, 25],
                             "solutions": ["u1", "u3"]}),
    "hp-version": dict(solution="u3", k=10.0,
                       probe={"mu": [0.5, 1.0 / 3.0], "n_max": 6}),
    "scattering-soft": dict(k=15.0, q=10, scatter="soft", incident="u0",
                            solution=None, mesh={"levels": [0, 1, 2]}),
    "scattering-hard": dict(k=15.0, q=10, scatter="hard", incident="u4",
                            solution=None, mesh={"levels": [0, 1, 2]}),
}

RUNNERS = {
    "patch": run_patch,
    "table1": run_table1,
    "table2": run_table2,
    "stab-compare": run_stab_compare,
    "h-singular": run_h_singular,
    "instability": run_instability,
    "sigma-study": run_sigma_study,
    "cond-probe": run_cond_probe,
    "eig-probe": run_eig_probe,
    "p-version": run_p_version,
    "hp-version": run_hp_version,
    "scattering-soft": run_scattering,
    "scattering-hard": run_scattering,
}

DESCRIPTIONS = {
    "patch": "exact plane wave reproduced to round-off (several k, q)",
    "table1": "h-convergence on Cartesian meshes with dof-reduction columns",
    "table2": "h-convergence on the Voronoi mesh family",
    "stab-compare": "D-recipe vs identity stabilization side by side",
    "h-singular": "algebraic rates for the corner-singular solution",
    "instability": "filtered vs orthonormal pipelines under refinement",
    "sigma-study": "dof counts and errors for two truncation thresholds",
    "cond-probe": "edge Gram condition number vs h*k for several q",
    "eig-probe": "minimal bulk Gram eigenvalue across a wavenumber sweep",
    "p-version": "error vs degree on fixed 8-element meshes",
    "hp-version": "graded meshes with layered degrees vs sqrt(ndof)",
    "scattering-soft": "sound-soft obstacle, errors vs fine reference",
    "scattering-hard": "sound-hard obstacle, errors vs fine reference",
}


def experiment_names():
    return sorted(RUNNERS)


def load_config(name: str, config_path=None, overrides=None):
    if name not in RUNNERS:
        raise KeyError(f"unknown experiment {name!r}; "
                       f"known: {', '.join(experiment_names())}")
    merged = dict(DEFAULTS[name])
    if config_path is not None:
        with open(config_path) as fh:
            merged.update(json.load(fh))
    if overrides:
        for key, val in overrides.items():
            if key == "mesh_update":
                merged.setdefault("mesh", {})
                merged["mesh"] = {**merged["mesh"], **val}
            else:
                merged[key] = val
    return ExperimentConfig(name=name, **merged).validate()


def run_experiment(name: str, config_path=None, overrides=None):
    cfg = load_config(name, config_path, overrides)
    return RUNNERS[name](cfg)
