"""Command-line driver: flat key = value configs in, CSV + JSON reports out.

Sub-commands: gap-check, limit-set, domain-audit, diagnose, count, zeta,
hilbert-check, hpq-check. Identical config and seed produce byte-identical
artifacts; every JSON summary embeds the config hash and tool version.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 budget
exceeded.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, basicset as bs, gallery as ga, groups as gr, thermo as th
from . import flowspace as fs
from .errors import (AbscissaViolation, AnosovLabError, BudgetExceeded,
                     ConfigError, InsufficientData, NonConvergence,
                     NotOnLeaf, NotProximal, NotTransverse)
from .projlinalg import MAX_DIM, Matrix, ProjPoint

MAX_WORD_RADIUS = 16
MAX_ATLAS_DEPTH = 10


@dataclass
class RunConfig:
    dimension: int
    labels: list[str]
    matrices: list[np.ndarray]
    presentation: str = "free"
    seed: int = 0
    threads: int = 1
    out_dir: Path = Path(".")
    radius: int = 8
    class_radius: int = 12
    cap: int = 5_000_000
    atlas_depth: int = 6
    margin_floor: float = 1e-10
    t_grid: list[float] = field(default_factory=lambda: [0.0, 2.0, 4.0, 6.0, 8.0, 10.0])
    delta_grid: list[float] = field(default_factory=lambda: list(np.geomspace(0.5, 2.0, 8)))
    eps_grid: list[float] = field(default_factory=lambda: list(np.geomspace(0.5, 2.0, 8)))
    corr_grid: list[float] = field(default_factory=lambda: list(np.linspace(0.0, 8.0, 17)))
    chart_radius: float = 2.0
    refine_levels: int = 5
    slnic_eps: float = 2.0
    slnic_d0: float = 1.0
    ball_radius: int = 3
    properness_radius: int = 6
    n_basic_points: int = 50
    grid_points: int = 120
    im_max: float = 20.0
    im_points: int = 81
    re_offset: float = 0.1
    pole_offset: float = 0.05
    geometry_p: int = 2
    geometry_q: int = 1
    geometry_dim: int = 3
    n_geometry_samples: int = 1000
    gram: np.ndarray | None = None
    config_hash: str = ""

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def _floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split()]


def load_config(path: Path, seed_override=None, out_override=None,
                threads_override=None) -> RunConfig:
    """Parse and validate the flat sectioned config."""
    parser = configparser.ConfigParser()
    try:
        read = parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not read:
        raise ConfigError(f"config file not found: {path}")

    try:
        run = parser["run"] if parser.has_section("run") else {}
        dim = int(run.get("dimension", 2))
        if not 2 <= dim <= MAX_DIM:
            raise ConfigError(f"dimension {dim} outside [2, {MAX_DIM}]")
        labels: list[str] = []
        matrices: list[np.ndarray] = []
        if parser.has_section("generators"):
            gen = parser["generators"]
            labels = gen.get("labels", "").split()
            for label in labels:
                if label not in gen:
                    raise ConfigError(f"generator {label!r} listed but not defined")
                vals = _floats(gen[label])
                if len(vals) != dim * dim:
                    raise ConfigError(
                        f"generator {label!r}: expected {dim * dim} entries, got {len(vals)}")
                matrices.append(np.array(vals).reshape(dim, dim))
        cfg = RunConfig(dimension=dim, labels=labels, matrices=matrices)
        cfg.presentation = run.get("presentation", "free")
        cfg.seed = int(run.get("seed", 0))
        cfg.out_dir = Path(run.get("out", "."))

        if parser.has_section("words"):
            w = parser["words"]
            cfg.radius = int(w.get("radius", cfg.radius))
            cfg.class_radius = int(w.get("class_radius", cfg.class_radius))
            cfg.cap = int(w.get("cap", cfg.cap))
        if parser.has_section("atlas"):
            a = parser["atlas"]
            cfg.atlas_depth = int(a.get("depth", cfg.atlas_depth))
            cfg.margin_floor = float(a.get("margin_floor", cfg.margin_floor))
        if parser.has_section("audit"):
            a = parser["audit"]
            for key, attr in (("t_grid", "t_grid"), ("delta_grid", "delta_grid"),
                              ("eps_grid", "eps_grid"), ("corr_grid", "corr_grid")):
                if key in a:
                    setattr(cfg, attr, _floats(a[key]))
            cfg.chart_radius = float(a.get("chart_radius", cfg.chart_radius))
            cfg.refine_levels = int(a.get("refine_levels", cfg.refine_levels))
            cfg.slnic_eps = float(a.get("slnic_eps", cfg.slnic_eps))
            cfg.slnic_d0 = float(a.get("slnic_d0", cfg.slnic_d0))
            cfg.ball_radius = int(a.get("ball_radius", cfg.ball_radius))
            cfg.properness_radius = int(a.get("properness_radius", cfg.properness_radius))
            cfg.n_basic_points = int(a.get("n_basic_points", cfg.n_basic_points))
        if parser.has_section("count"):
            cfg.grid_points = int(parser["count"].get("grid_points", cfg.grid_points))
        if parser.has_section("zeta"):
            z = parser["zeta"]
            cfg.im_max = float(z.get("im_max", cfg.im_max))
            cfg.im_points = int(z.get("im_points", cfg.im_points))
            cfg.re_offset = float(z.get("re_offset", cfg.re_offset))
            cfg.pole_offset = float(z.get("pole_offset", cfg.pole_offset))
        if parser.has_section("geometry"):
            g = parser["geometry"]
            cfg.geometry_p = int(g.get("p", cfg.geometry_p))
            cfg.geometry_q = int(g.get("q", cfg.geometry_q))
            cfg.geometry_dim = int(g.get("dimension", cfg.geometry_dim))
            cfg.n_geometry_samples = int(g.get("samples", cfg.n_geometry_samples))
        if parser.has_section("norm") and "gram" in parser["norm"]:
            vals = _floats(parser["norm"]["gram"])
            if len(vals) != dim * dim:
                raise ConfigError(f"gram matrix: expected {dim * dim} entries")
            gram = np.array(vals).reshape(dim, dim)
            if np.any(np.linalg.eigvalsh(0.5 * (gram + gram.T)) <= 0):
                raise ConfigError("gram matrix must be positive definite")
            cfg.gram = gram
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    if seed_override is not None:
        cfg.seed = seed_override
    if out_override is not None:
        cfg.out_dir = Path(out_override)
    if threads_override is not None:
        cfg.threads = threads_override
    if cfg.radius > MAX_WORD_RADIUS or cfg.class_radius > MAX_WORD_RADIUS:
        raise ConfigError(f"word radii capped at {MAX_WORD_RADIUS}")
    if cfg.atlas_depth > MAX_ATLAS_DEPTH:
        raise ConfigError(f"atlas depth capped at {MAX_ATLAS_DEPTH}")

    digest = hashlib.sha256()
    digest.update(Path(path).read_bytes())
    digest.update(f"|seed={cfg.seed}".encode())
    cfg.config_hash = digest.hexdigest()
    return cfg


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    v = float(x)
    return repr(v)


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def write_summary(path: Path, cfg: RunConfig, payload: dict) -> None:
    doc = {"tool_version": __version__, "config_hash": cfg.config_hash,
           "seed": cfg.seed, **payload}
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="ascii")


def _gens(cfg: RunConfig) -> gr.GeneratorSet:
    if not cfg.matrices:
        raise ConfigError("this subcommand needs a [generators] section")
    return gr.generator_set(cfg.labels, cfg.matrices, presentation=cfg.presentation)


def _atlas(cfg: RunConfig, gens: gr.GeneratorSet) -> bs.LimitAtlas:
    samples = gr.limit_set_sample(gens, cfg.atlas_depth, budget=cfg.cap)
    if not samples:
        raise NonConvergence("no proximal elements in the sampling ball")
    return bs.LimitAtlas(samples, margin_floor=cfg.margin_floor)


def _count_pipeline(cfg: RunConfig, gens: gr.GeneratorSet):
    data = th.primitive_periods(gens, cfg.class_radius)
    if len(data) == 0:
        raise InsufficientData("no primitive classes with a period")
    t_tr = th.period_envelope(data, cfg.class_radius)
    lo = float(data.periods[0])
    grid = np.linspace(lo, max(t_tr, lo + 1.0), cfg.grid_points)
    fit = th.entropy_fit(th.counting_table(data, grid, t_trusted=t_tr))
    return data, t_tr, grid, fit


# ---------------------------------------------------------------------------
# sub-commands

def cmd_gap_check(cfg: RunConfig) -> dict:
    gens = _gens(cfg)
    ball = gr.enumerate_ball(gens, cfg.radius, cap=cfg.cap)
    fit = gr.gap_fit(ball)
    rows = []
    for g in ball:
        if not g.word:
            continue
        data = g.eigen()
        if not data.simple_top:
            continue
        rows.append((g.word_str(cfg.labels), g.cyclic_length,
                     float(data.lam[0] - data.lam[1])))
    write_csv(cfg.out_dir / "gap_check.csv", ["word", "cyclic_length", "gap"], rows)
    payload = {"c": fit.c, "c_prime": fit.c_prime, "r2": fit.r2, "n_points": fit.n_points}
    write_summary(cfg.out_dir / "gap_check.json", cfg, payload)
    return payload


def cmd_limit_set(cfg: RunConfig) -> dict:
    gens = _gens(cfg)
    atlas = _atlas(cfg, gens)
    d = cfg.dimension
    header = (["word"] + [f"xi_{i}" for i in range(d)]
              + [f"xi_star_{i}" for i in range(d)] + ["quality"])
    rows = []
    for s in atlas.samples:
        word = "".join((cfg.labels[abs(k) - 1] if k > 0 else cfg.labels[abs(k) - 1] + "'")
                       for k in s.source_word)
        rows.append((word, *s.xi.rep, *s.xi_star.rep, s.quality))
    write_csv(cfg.out_dir / "limit_set.csv", header, rows)
    payload = {"n_samples": len(atlas), "min_cross_margin": atlas.min_cross_margin,
               "n_margin_violations": len(atlas.violations)}
    write_summary(cfg.out_dir / "limit_set.json", cfg, payload)
    return payload


def _basic_points(cfg: RunConfig, atlas: bs.LimitAtlas, rng) -> list[bs.BasicPoint]:
    out = []
    n = len(atlas)
    attempts = 0
    while len(out) < cfg.n_basic_points and attempts < 20 * cfg.n_basic_points:
        attempts += 1
        s = int(rng.integers(n))
        t = int(rng.integers(n))
        if s == t:
            continue
        try:
            out.append(bs.make_basic_point(atlas, s, t, tau=float(rng.normal(0.0, 0.3))))
        except (NotTransverse, AnosovLabError):
            continue
    return out


def cmd_domain_audit(cfg: RunConfig) -> dict:
    gens = _gens(cfg)
    atlas = _atlas(cfg, gens)
    rng = cfg.rng()
    points = _basic_points(cfg, atlas, rng)
    if not points:
        raise InsufficientData("no transverse sample pairs")
    ball = bs.GammaBall(gens, cfg.properness_radius, cap=cfg.cap)

    omega_rows, floors = [], []
    for i, p in enumerate(points):
        res = bs.in_omega(atlas.samples[p.s].xi, atlas.samples[p.t].xi_star, atlas)
        pw = bs.properness_witness(p, gens, ball)
        floors.append(pw.floor)
        omega_rows.append((i, p.s, p.t, int(res.ok), res.worst, pw.floor,
                           pw.n_translations))
    write_csv(cfg.out_dir / "domain_audit.csv",
              ["point", "s", "t", "in_omega", "omega_margin", "properness_floor",
               "n_translations"], omega_rows)

    classes = th.make_class_records(gens, min(cfg.radius, 6))
    rng_cls = cfg.rng()
    idx = rng_cls.permutation(len(classes))[:100]
    residuals = []
    for i in idx:
        res = bs.periodicity_check(classes[int(i)].representative)
        residuals.append((classes[int(i)].representative.word_str(cfg.labels),
                          res.period, res.residual))
    write_csv(cfg.out_dir / "periodicity.csv", ["word", "period", "residual"], residuals)

    payload = {"n_points": len(points),
               "omega_all_pass": bool(all(r[3] for r in omega_rows)),
               "properness_floor_min": float(min(floors)),
               "max_periodicity_residual": float(max(r[2] for r in residuals)),
               "n_classes_checked": len(residuals)}
    write_summary(cfg.out_dir / "domain_audit.json", cfg, payload)
    return payload


def cmd_diagnose(cfg: RunConfig) -> dict:
    gens = _gens(cfg)
    atlas = _atlas(cfg, gens)
    rng = cfg.rng()
    points = _basic_points(cfg, atlas, rng)[:max(3, cfg.n_basic_points // 10)]
    if not points:
        raise InsufficientData("no transverse sample pairs")
    ball = bs.GammaBall(gens, cfg.ball_radius, cap=cfg.cap)

    holo_rows, dyn_rows, dist_rows = [], [], []
    tables = []
    r_delta = np.full(len(cfg.delta_grid), -np.inf)
    holo_max = 0.0
    for i, p in enumerate(points):
        chart = bs.refined_unstable_chart(p, atlas, gens, cfg.refine_levels,
                                          cfg.chart_radius)
        # two-sided holonomy through a second basic point
        q = points[(i + 1) % len(points)]
        try:
            z = bs.exp_u(p.point, chart.offsets[min(1, len(chart.offsets) - 1)])
            img = bs.stable_holonomy(p.point, q.point, z)
            back = bs.stable_holonomy(q.point, p.point, img)
            resid = fs.distance(back, z)
            holo_rows.append((i, resid))
            holo_max = max(holo_max, resid)
        except (NotTransverse, NotOnLeaf):
            pass
        for T in cfg.t_grid:
            table = bs.dyn_ball_diameters(p, chart, T, cfg.delta_grid, ball=ball)
            tables.append(table)
            for dl, dlin, dbow in zip(table.deltas, table.diam_linear, table.diam_bowen):
                dyn_rows.append((i, T, dl, dlin, dbow))
        audit = bs.distortion_grid(p, chart, cfg.t_grid, cfg.eps_grid, cfg.delta_grid)
        col_max = np.nanmax(audit.ratios, axis=(0, 1))
        r_delta = np.maximum(r_delta, np.where(np.isnan(col_max), -np.inf, col_max))
        for k, dl in enumerate(audit.deltas):
            dist_rows.append((i, dl, col_max[k]))
    write_csv(cfg.out_dir / "holonomy.csv", ["point", "two_sided_residual"], holo_rows)
    write_csv(cfg.out_dir / "dyn_balls.csv",
              ["point", "T", "delta", "diam_linear", "diam_bowen"], dyn_rows)
    write_csv(cfg.out_dir / "distortion.csv", ["point", "delta", "r_delta"], dist_rows)
    l0 = bs.measure_sandwich_l0(tables)

    z0 = points[0]
    chart0 = bs.refined_unstable_chart(z0, atlas, gens, cfg.refine_levels,
                                       cfg.chart_radius)
    fan = bs.slnic_direction_fan(z0, atlas, cfg.slnic_eps, d0=cfg.slnic_d0, chart=chart0)
    write_csv(cfg.out_dir / "slnic.csv", ["direction", "kappa", "n_pairs"],
              [(k, e.kappa, e.n_pairs) for k, e in enumerate(fan)])

    classes = th.make_class_records(gens, min(cfg.radius, 5))
    rates = bs.contraction_rates(classes[0].representative, horizon=20.0)

    finite = r_delta[np.isfinite(r_delta)]
    scales = bs.estimate_scale_constants(atlas, gens,
                                         bs.GammaBall(gens, cfg.properness_radius,
                                                      cap=cfg.cap),
                                         n_points=min(cfg.n_basic_points, 20),
                                         seed=cfg.seed, sandwich_l0=l0)
    payload = {
        "l0": l0,
        "eps0": scales.eps0, "eps1": scales.eps1, "delta0": scales.delta0,
        "holonomy_max_residual": holo_max,
        "r_delta": {repr(float(d)): (float(r) if np.isfinite(r) else None)
                    for d, r in zip(cfg.delta_grid, r_delta)},
        "r_delta_spread": (float(finite.max() / finite.min()) if finite.size else None),
        "kappa_fan": [e.kappa for e in fan],
        "kappa_min": min(e.kappa for e in fan),
        "chart_span_rank": chart0.span_rank(),
        "contraction": {"c_s": rates.c_s, "c_u": rates.c_u,
                        "r2_s": rates.r2_s, "r2_u": rates.r2_u},
    }
    write_summary(cfg.out_dir / "diagnose.json", cfg, payload)
    return payload


def cmd_count(cfg: RunConfig) -> dict:
    gens = _gens(cfg)
    data, t_tr, grid, fit = _count_pipeline(cfg, gens)
    table = th.counting_table(data, grid, t_trusted=t_tr, h_hat=fit.h_hat)
    rows = []
    for i in range(grid.shape[0]):
        ratio = table.ratio[i]
        rows.append((table.t[i], int(table.counts[i]), table.li_col[i],
                     ratio if np.isfinite(ratio) else "nan"))
    write_csv(cfg.out_dir / "counting.csv", ["t", "count", "li", "ratio"], rows)
    mask = np.isfinite(table.ratio) & (table.counts > 0)
    top = mask & (table.counts >= table.counts[mask].max() / 10.0)
    payload = {"n_classes": len(data), "t_trusted": t_tr,
               "h_hat": fit.h_hat, "band": list(fit.band),
               "top_decade_ratio_min": float(np.min(table.ratio[top])),
               "top_decade_ratio_max": float(np.max(table.ratio[top]))}
    write_summary(cfg.out_dir / "counting.json", cfg, payload)
    return payload


def cmd_zeta(cfg: RunConfig) -> dict:
    gens = _gens(cfg)
    data, t_tr, grid, fit = _count_pipeline(cfg, gens)
    h = fit.h_hat
    s_pole = h + cfg.pole_offset
    half = th.zeta_partial(s_pole, data, t_tr / 2.0, h_hat=h)
    full = th.zeta_partial(s_pole, data, t_tr, h_hat=h)
    va = cfg.pole_offset * half.value.real
    vb = cfg.pole_offset * full.value.real
    rows = []
    min_abs = math.inf
    for im in np.linspace(-cfg.im_max, cfg.im_max, cfg.im_points):
        s = complex(h + cfg.re_offset, float(im))
        z = th.zeta_partial(s, data, t_tr, h_hat=h)
        min_abs = min(min_abs, abs(z.value))
        rows.append((s.real, s.imag, z.value.real, z.value.imag, abs(z.value),
                     z.truncation, z.term_count))
    write_csv(cfg.out_dir / "zeta_scan.csv",
              ["s_re", "s_im", "zeta_re", "zeta_im", "zeta_abs", "T", "terms"], rows)
    payload = {"h_hat": h, "t_trusted": t_tr,
               "pole_value_half": va, "pole_value_full": vb,
               "pole_rel_change": abs(vb - va) / abs(vb),
               "scan_min_abs": min_abs,
               "scan_re": h + cfg.re_offset}
    write_summary(cfg.out_dir / "zeta.json", cfg, payload)
    return payload


def cmd_hilbert_check(cfg: RunConfig) -> dict:
    d = cfg.geometry_dim
    body = ga.klein_ball(d)
    rng = cfg.rng()
    n = cfg.n_geometry_samples
    rows = []
    max_metric_err = 0.0
    max_speed_err = 0.0
    max_psi = 0.0
    for i in range(n):
        y = rng.normal(size=d - 1)
        y *= rng.uniform(0.05, 0.9) / np.linalg.norm(y)
        x = ProjPoint(np.concatenate([[1.0], y]))
        # metric against the closed-form ball distance
        dist = ga.hilbert_distance(body, ProjPoint(np.eye(d)[0]), x)
        target = math.atanh(float(np.linalg.norm(y)))
        max_metric_err = max(max_metric_err, abs(dist - target))
        direction = np.concatenate([[0.0], rng.normal(size=d - 1)])
        t = float(rng.uniform(0.2, 1.5))
        pt, _ = ga.bh_flow(body, x, direction, t)
        max_speed_err = max(max_speed_err, abs(ga.hilbert_distance(body, x, pt) - t))
        resid = ga.psi_conjugacy_residual(body, x, direction, float(rng.uniform(-1.0, 1.0)))
        max_psi = max(max_psi, resid)
        if i < 64:
            rows.append((i, dist, target, abs(dist - target), resid))
    write_csv(cfg.out_dir / "hilbert_check.csv",
              ["sample", "hilbert", "closed_form", "metric_err", "psi_residual"], rows)
    g = Matrix(np.diag([2.0, 0.5]))
    ad = ga.adjoint_rep(g)
    from .projlinalg import eigen_decompose
    ad_err = abs(float(eigen_decompose(ad).lam[0])
                 - float(eigen_decompose(g).lam[0] - eigen_decompose(g).lam[-1]))
    payload = {"n_samples": n, "max_metric_err": max_metric_err,
               "max_unit_speed_err": max_speed_err,
               "max_psi_residual": max_psi, "adjoint_top_identity_err": ad_err}
    write_summary(cfg.out_dir / "hilbert_check.json", cfg, payload)
    return payload


def cmd_hpq_check(cfg: RunConfig) -> dict:
    form = ga.MinkowskiForm(cfg.geometry_p, cfg.geometry_q)
    rng = cfg.rng()
    n = cfg.n_geometry_samples
    d = form.dim
    max_round = 0.0
    max_twine = 0.0
    rows = []
    count_neg = 0
    for i in range(n):
        x = rng.normal(size=d)
        while form.pair(x, x) >= -1e-3:
            x = rng.normal(size=d)
        v = rng.normal(size=d)
        try:
            xv = ga.make_spacelike(form, x, v)
        except ValueError:
            continue
        fp = ga.phi_partial(form, xv)
        back = ga.phi_partial_inv(form, fp)
        err = max(float(np.max(np.abs(back.x - xv.x))), float(np.max(np.abs(back.v - xv.v))))
        max_round = max(max_round, err)
        t = float(rng.uniform(-2.0, 2.0))
        lhs = ga.phi_partial(form, ga.hpq_flow(form, xv, t))
        rhs = fs.flow(fp, t)
        tw = fs.distance(lhs, rhs)
        max_twine = max(max_twine, tw)
        if i < 64:
            rows.append((i, err, tw))
    write_csv(cfg.out_dir / "hpq_check.csv",
              ["sample", "roundtrip_err", "intertwine_err"], rows)
    # negative triples against the plain signature computation
    agree = 0
    total = 0
    for _ in range(n):
        pts = [ProjPoint(rng.normal(size=d)) for _ in range(3)]
        try:
            val = ga.negative_triple(form, *pts)
        except AnosovLabError:
            continue
        b = np.stack([p.rep for p in pts])
        eig = np.linalg.eigvalsh(b @ form.gram @ b.T)
        oracle = (int(np.sum(eig > 0)) == 2 and int(np.sum(eig < 0)) == 1)
        total += 1
        agree += int(val == oracle)
        count_neg += int(val)
    payload = {"n_samples": n, "max_roundtrip_err": max_round,
               "max_intertwine_err": max_twine,
               "negative_triple_agreement": f"{agree}/{total}",
               "n_negative": count_neg}
    write_summary(cfg.out_dir / "hpq_check.json", cfg, payload)
    return payload


COMMANDS = {
    "gap-check": cmd_gap_check,
    "limit-set": cmd_limit_set,
    "domain-audit": cmd_domain_audit,
    "diagnose": cmd_diagnose,
    "count": cmd_count,
    "zeta": cmd_zeta,
    "hilbert-check": cmd_hilbert_check,
    "hpq-check": cmd_hpq_check,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="anosovlab",
                                     description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=False,
                        default=os.environ.get("ANOSOVLAB_CONFIG"))
    parser.add_argument("--out", default=os.environ.get("ANOSOVLAB_OUT"))
    parser.add_argument("--seed", type=int,
                        default=(int(os.environ["ANOSOVLAB_SEED"])
                                 if "ANOSOVLAB_SEED" in os.environ else None))
    parser.add_argument("--threads", type=int,
                        default=(int(os.environ["ANOSOVLAB_THREADS"])
                                 if "ANOSOVLAB_THREADS" in os.environ else None))
    args = parser.parse_args(argv)

    try:
        if args.config is None:
            raise ConfigError("--config is required (or set ANOSOVLAB_CONFIG)")
        cfg = load_config(Path(args.config), seed_override=args.seed,
                          out_override=args.out, threads_override=args.threads)
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        payload = COMMANDS[args.subcommand](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 4
    except (AbscissaViolation, NonConvergence, NotProximal, InsufficientData) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(payload, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
