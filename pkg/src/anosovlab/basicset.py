"""Discontinuity-domain membership, lifted basic-set points, and the
geometric diagnostics: unstable exponential, holonomies, time separation,
infinitesimal limit sets, dynamical balls, distortion and non-integrability
probes, contraction rates.

All diagnostics run on the cover, in the flat norm on quadric
representatives; where a quotient distance is needed it is realized by
explicit minimization over a word-ball of translates (GammaBall).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegenerateBall, InsufficientData, NoStableSample,
                     NotOnLeaf, NotTransverse)
from .flowspace import FlowPoint, act, distance, flow, hopf_inv, HopfCoord, make_point
from .groups import GeneratorSet, GroupElement, LimitSample, enumerate_ball, power
from .projlinalg import ProjHyperplane, ProjPoint, require_proximal

LEAF_TOL = 1e-9
OFFSET_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class LimitAtlas:
    """A finite sample of the boundary data with its transversality audit.

    Distinct samples should pair transversally; pairs with margin below
    margin_floor are recorded as quality violations, never raised.
    """

    samples: tuple[LimitSample, ...]
    margin_floor: float = 1e-10
    xi: np.ndarray = field(compare=False, default=None)
    xi_star: np.ndarray = field(compare=False, default=None)
    min_cross_margin: float = field(compare=False, default=float("nan"))
    violations: tuple[tuple[int, int], ...] = field(compare=False, default=())

    def __init__(self, samples, margin_floor: float = 1e-10):
        samples = tuple(samples)
        if not samples:
            raise ValueError("atlas needs at least one sample")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "margin_floor", float(margin_floor))
        xi = np.stack([s.xi.rep for s in samples])
        xs = np.stack([s.xi_star.rep for s in samples])
        xi.setflags(write=False)
        xs.setflags(write=False)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "xi_star", xs)
        margins = np.abs(xi @ xs.T)  # margins[i, j] = |xi_star_j(xi_i)|
        off = ~np.eye(len(samples), dtype=bool)
        object.__setattr__(self, "min_cross_margin",
                           float(margins[off].min()) if len(samples) > 1 else float("nan"))
        bad = np.argwhere((margins < margin_floor) & off)
        object.__setattr__(self, "violations", tuple((int(i), int(j)) for i, j in bad))

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def dim(self) -> int:
        return self.xi.shape[1]


@dataclass(frozen=True)
class OmegaResult:
    ok: bool
    witness: int
    worst: float

    def __bool__(self) -> bool:
        return self.ok


def in_omega(ell: ProjPoint, h: ProjHyperplane, atlas: LimitAtlas,
             margin: float = 0.0) -> OmegaResult:
    """Discontinuity-domain test: every sampled boundary point must be
    transverse to ell on the dual side or to h on the primal side.

    Returns the minimizing sample as witness; ok means the worst sample
    still clears the requested margin.
    """
    m_ell = np.abs(atlas.xi_star @ ell.rep)   # margin(ell, xi_star_j)
    m_h = np.abs(atlas.xi @ h.rep)            # margin(xi_j, h)
    per_sample = np.maximum(m_ell, m_h)
    witness = int(np.argmin(per_sample))
    worst = float(per_sample[witness])
    return OmegaResult(ok=bool(worst > margin), witness=witness, worst=worst)


@dataclass(frozen=True)
class BasicPoint:
    """Flow-space point over a transverse pair of atlas samples."""

    point: FlowPoint
    s: int
    t: int
    omega_margin: float

    @property
    def v(self) -> np.ndarray:
        return self.point.v

    @property
    def alpha(self) -> np.ndarray:
        return self.point.alpha


def make_basic_point(atlas: LimitAtlas, s: int, t: int, tau: float = 0.0) -> BasicPoint:
    """Hopf-inverse point over (xi(s), xi_star(t)) at flow time tau."""
    if s == t:
        raise NotTransverse("a sample is never transverse to its own hyperplane")
    sample_s, sample_t = atlas.samples[s], atlas.samples[t]
    coord = HopfCoord(sample_s.xi, sample_t.xi_star, tau)
    x = hopf_inv(coord)
    res = in_omega(sample_s.xi, sample_t.xi_star, atlas)
    return BasicPoint(point=x, s=s, t=t, omega_margin=res.worst)


@dataclass(frozen=True)
class PeriodicityResult:
    residual: float
    period: float
    point: FlowPoint


def periodicity_check(g: GroupElement, point: FlowPoint | None = None) -> PeriodicityResult:
    """Residual of the periodic-point identity: g acting on the point over
    its fixed pair equals flowing by lambda_1(g).

    A point argument overrides the fixed-pair construction (negative
    controls perturb it off the orbit).
    """
    data = require_proximal(g.eigen())
    period = float(data.lam[0])
    if point is None:
        coord = HopfCoord(data.top_right, data.top_left, 0.0)
        point = hopf_inv(coord)
    moved = act(g.matrix, point)
    flowed = flow(point, period)
    return PeriodicityResult(residual=distance(moved, flowed), period=period, point=point)


def _aligned(ref: FlowPoint, p: FlowPoint) -> tuple[np.ndarray, np.ndarray]:
    """Representative of p sign-aligned to ref (canonical reps of nearby
    points can sit on opposite antipodes near the sign-rule locus)."""
    score = float(ref.v @ p.v + ref.alpha @ p.alpha)
    if score < 0.0:
        return -p.v, -p.alpha
    return p.v, p.alpha


def _require_unstable(x: FlowPoint, w: np.ndarray):
    pairing = float(x.alpha @ w)
    if abs(pairing) > LEAF_TOL * (1.0 + float(np.linalg.norm(w))):
        raise NotOnLeaf(f"offset is not in ker alpha: alpha(w) = {pairing!r}")


def exp_u(x: FlowPoint, w) -> FlowPoint:
    """Unstable exponential: (v, alpha) + (w, 0) -> (v + w, alpha)."""
    w = np.asarray(w, dtype=float)
    _require_unstable(x, w)
    if float(np.linalg.norm(w)) == 0.0:
        return x
    return FlowPoint(x.v + w, x.alpha)


def log_u(x: FlowPoint, y: FlowPoint) -> np.ndarray:
    """Chart coordinate of y on the unstable leaf of x: exp_u(x, log_u(x, y)) = y."""
    vy, ay = _aligned(x, y)
    if float(np.linalg.norm(ay - x.alpha)) > LEAF_TOL * (1.0 + float(np.linalg.norm(x.alpha))):
        raise NotOnLeaf("points are not on a common unstable leaf")
    return vy - x.v


def transport_u(x: FlowPoint, y: FlowPoint, w) -> np.ndarray:
    """Parallel transport of an unstable vector along the leaf: identity on
    chart coordinates, with the leaf membership and ker-alpha checks."""
    w = np.asarray(w, dtype=float)
    _require_unstable(x, w)
    log_u(x, y)  # validates the shared leaf
    vy, ay = _aligned(x, y)
    if float(np.linalg.norm(ay + x.alpha)) < float(np.linalg.norm(ay - x.alpha)):
        return -w
    return w


def stable_holonomy(x: FlowPoint, y: FlowPoint, z: FlowPoint) -> FlowPoint:
    """Slide z along its central-stable leaf onto the unstable leaf of y.

    With lifts x = [v:alpha], y = [w:beta], z = [v':alpha], the image is
    [v'/beta(v') : beta]; the pairing beta(v') must be positive.
    """
    vz, az = _aligned(x, z)
    if float(np.linalg.norm(az - x.alpha)) > LEAF_TOL * (1.0 + float(np.linalg.norm(x.alpha))):
        raise NotOnLeaf("z must be on the unstable leaf of x")
    vy, ay = _aligned(x, y)
    bz = float(ay @ vz)
    if bz <= 0.0:
        raise NotTransverse(f"beta(v') = {bz!r} is not positive")
    return FlowPoint(vz / bz, ay)


def infinitesimal_holonomy(x: FlowPoint, y: FlowPoint, u) -> np.ndarray:
    """Holonomy on unstable chart coordinates: u at x to the vector at y
    with exp_u(y, .) matching the stable holonomy of exp_u(x, u)."""
    u = np.asarray(u, dtype=float)
    _require_unstable(x, u)
    vy, ay = _aligned(x, y)
    denom = float(ay @ (x.v + u))
    if denom <= 0.0:
        raise NotTransverse(f"alpha'(v + u) = {denom!r} is not positive")
    return (x.v + u) / denom - vy


def time_separation(x: FlowPoint, y: FlowPoint) -> tuple[FlowPoint, float]:
    """Stable-flow-unstable path data between nearby points.

    Returns (projection of x to the central-unstable leaf of y, flow time
    Delta = -log beta(v)); flowing the projection by Delta lands on the
    unstable leaf of y.
    """
    vy, ay = _aligned(x, y)
    bv = float(ay @ x.v)
    if bv <= 0.0:
        raise NotTransverse(f"beta(v) = {bv!r} is not positive")
    proj = FlowPoint(x.v, ay / bv)
    return proj, -math.log(bv)


@dataclass(frozen=True)
class UnstableChart:
    """Sampled infinitesimal unstable limit set at a basic point.

    offsets is (k, d) with rows in ker alpha; row 0 is the zero offset.
    """

    base: BasicPoint
    offsets: np.ndarray
    norm_tag: str = "flat-chart"

    @property
    def radius(self) -> float:
        return float(np.max(np.linalg.norm(self.offsets, axis=1)))

    def span_rank(self, rtol: float = 1e-8) -> int:
        s = np.linalg.svd(self.offsets, compute_uv=False)
        if s.size == 0 or s[0] == 0.0:
            return 0
        return int(np.sum(s > rtol * s[0]))


def unstable_chart(x: BasicPoint, atlas: LimitAtlas,
                   radius: float = float("inf")) -> UnstableChart:
    """Chart offsets u/alpha(u) - v over the atlas, clipped to the radius.

    u/alpha(u) is independent of the sign of the sample representative, so
    every sample transverse to alpha contributes exactly one offset.
    """
    v, alpha = x.point.v, x.point.alpha
    pair = atlas.xi @ alpha
    ok = np.abs(pair) > atlas.margin_floor
    reps = atlas.xi[ok] / pair[ok, None]
    offsets = reps - v
    norms = np.linalg.norm(offsets, axis=1)
    offsets = offsets[norms <= radius]
    norms = np.linalg.norm(offsets, axis=1)
    zero_like = norms < OFFSET_ZERO_TOL
    offsets = offsets[~zero_like]
    offsets = np.vstack([np.zeros((1, v.shape[0])), offsets])
    order = np.argsort(np.linalg.norm(offsets, axis=1), kind="stable")
    offsets = offsets[order]
    offsets.setflags(write=False)
    return UnstableChart(base=x, offsets=offsets)


def refined_unstable_chart(x: BasicPoint, atlas: LimitAtlas, gens: GeneratorSet,
                           levels: int, radius: float = 2.0) -> UnstableChart:
    """Chart with extra offsets from equivariant refinement near the base.

    Pushing every atlas point forward by powers of the source element of
    x's own boundary sample produces genuine limit points clustering at
    the base point at exponentially fine scales, extending the chart's
    usable resolution by a factor of roughly e^{-period} per level.
    """
    base_chart = unstable_chart(x, atlas, radius)
    word = atlas.samples[x.s].source_word
    if not word:
        return base_chart
    g = gens.word_matrix(word)
    v, alpha = x.point.v, x.point.alpha
    xi = atlas.xi
    blocks = [base_chart.offsets]
    for _ in range(levels):
        xi = xi @ g.a.T  # act on every sampled boundary point
        xi = xi / np.linalg.norm(xi, axis=1, keepdims=True)
        pair = xi @ alpha
        ok = np.abs(pair) > atlas.margin_floor
        offs = xi[ok] / pair[ok, None] - v
        norms = np.linalg.norm(offs, axis=1)
        blocks.append(offs[(norms <= radius) & (norms > OFFSET_ZERO_TOL)])
    offsets = np.vstack(blocks)
    order = np.argsort(np.linalg.norm(offsets, axis=1), kind="stable")
    offsets = offsets[order]
    offsets.setflags(write=False)
    return UnstableChart(base=x, offsets=offsets)


class GammaBall:
    """Stacked word-ball matrices for vectorized group translates."""

    def __init__(self, gens: GeneratorSet, radius: int, cap: int | None = 200_000):
        elems = enumerate_ball(gens, radius, cap=cap)
        self.words = [g.word for g in elems]
        self.mats = np.stack([g.matrix.a for g in elems])
        self.invs = np.stack([g.matrix.inv for g in elems])
        self.radius = radius

    def __len__(self) -> int:
        return self.mats.shape[0]

    def translates(self, x: FlowPoint) -> tuple[np.ndarray, np.ndarray]:
        """(m, d) arrays of v- and alpha-legs of all translates of x."""
        vs = np.einsum("mij,j->mi", self.mats, x.v)
        als = np.einsum("j,mji->mi", x.alpha, self.invs)
        return vs, als


def quotient_distance(x: FlowPoint, y: FlowPoint, ball: GammaBall | None) -> float:
    """Distance between orbits, minimized over the ball of translates of x
    and the antipodal identification. ball=None is the plain cover distance."""
    if ball is None:
        return distance(x, y)
    vs, als = ball.translates(x)
    return float(np.min(_pair_dists(vs, als, y.v, y.alpha)))


def _pair_dists(vs: np.ndarray, als: np.ndarray, v: np.ndarray, a: np.ndarray) -> np.ndarray:
    d_plus = np.sum((vs - v) ** 2, axis=1) + np.sum((als - a) ** 2, axis=1)
    d_minus = np.sum((vs + v) ** 2, axis=1) + np.sum((als + a) ** 2, axis=1)
    return np.sqrt(np.minimum(d_plus, d_minus))


@dataclass(frozen=True)
class DynBallTable:
    """Per-delta diameters of the linearized and Bowen dynamical balls."""

    T: float
    deltas: np.ndarray
    diam_linear: np.ndarray
    diam_bowen: np.ndarray


def _prefix_diameters(points: np.ndarray, dist_matrix: np.ndarray | None = None) -> np.ndarray:
    """diam of the first j points, j = 1..k, in one O(k^2) pass."""
    k = points.shape[0]
    out = np.zeros(k)
    if dist_matrix is None:
        for j in range(1, k):
            d = np.sqrt(np.sum((points[:j] - points[j]) ** 2, axis=1))
            out[j] = max(out[j - 1], float(np.max(d)))
    else:
        for j in range(1, k):
            out[j] = max(out[j - 1], float(np.max(dist_matrix[j, :j])))
    return out


def _bowen_radii(x: FlowPoint, chart: UnstableChart, T: float,
                 ball: GammaBall | None, n_times: int = 9) -> np.ndarray:
    """max over 0 <= t <= T of the orbit distance between x and each
    exp_u image, on a uniform t-grid."""
    ts = np.linspace(0.0, T, n_times) if T > 0 else np.array([0.0])
    out = np.zeros(chart.offsets.shape[0])
    for t in ts:
        xt = flow(x, float(t))
        et = math.exp(float(t))
        for i, w in enumerate(chart.offsets):
            yt = exp_u(xt, et * w)
            out[i] = max(out[i], quotient_distance(xt, yt, ball))
    return out


def dyn_ball_diameters(x: BasicPoint, chart: UnstableChart, T: float, deltas,
                       ball: GammaBall | None = None, n_times: int = 9) -> DynBallTable:
    """Diameters of dynamical balls on the sampled unstable limit set.

    Linearized column: offsets with e^T |w| <= delta, diameter in the chart
    norm. Bowen column: offsets whose exp_u image stays delta-close to the
    orbit of x up to time T (quotient distance when a ball is given),
    diameter measured the same way between the surviving images.
    """
    deltas = np.asarray(deltas, dtype=float)
    norms = np.linalg.norm(chart.offsets, axis=1)
    scaled = norms * math.exp(T)
    prefix_lin = _prefix_diameters(chart.offsets)  # offsets sorted by norm already
    diam_lin = np.empty(deltas.shape[0])
    for i, d in enumerate(deltas):
        j = int(np.searchsorted(scaled, d, side="right"))
        diam_lin[i] = prefix_lin[j - 1] if j >= 1 else 0.0

    radii = _bowen_radii(x.point, chart, T, ball, n_times)
    order = np.argsort(radii, kind="stable")
    pts = chart.offsets[order]
    prefix_bow = _prefix_diameters(pts)
    sorted_radii = radii[order]
    diam_bow = np.empty(deltas.shape[0])
    for i, d in enumerate(deltas):
        j = int(np.searchsorted(sorted_radii, d, side="right"))
        diam_bow[i] = prefix_bow[j - 1] if j >= 1 else 0.0
    return DynBallTable(T=float(T), deltas=deltas, diam_linear=diam_lin, diam_bowen=diam_bow)


def measure_sandwich_l0(tables: list[DynBallTable]) -> float:
    """Smallest L >= 1 (on a log grid) with, across all audited tables,

        diam_bowen(eps)  <= 2 L diam_linear(L eps)
        diam_linear(del) <=   L diam_bowen(L^2 del)

    evaluated by nearest-from-above lookup on each table's delta grid.
    """
    grid = np.geomspace(1.0, 64.0, 121)

    def lookup(deltas, diams, r):
        j = int(np.searchsorted(deltas, r * (1 + 1e-12), side="right"))
        if j == 0:
            return 0.0
        return float(diams[j - 1])

    for L in grid:
        ok = True
        for tb in tables:
            for d, dl, db in zip(tb.deltas, tb.diam_linear, tb.diam_bowen):
                if db > 2 * L * lookup(tb.deltas, tb.diam_linear, L * d) + 1e-12:
                    ok = False
                    break
                if dl > L * lookup(tb.deltas, tb.diam_bowen, L * L * d) + 1e-12:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return float(L)
    return float("inf")


def _linear_diam_fn(chart: UnstableChart):
    """radius -> diameter of {offsets with |w| <= radius}, from one
    prefix-diameter pass over the norm-sorted offsets."""
    norms = np.linalg.norm(chart.offsets, axis=1)
    prefix = _prefix_diameters(chart.offsets)

    def diam(radius: float) -> float:
        j = int(np.searchsorted(norms, radius, side="right"))
        return float(prefix[j - 1]) if j >= 1 else 0.0

    return diam


def distortion_ratio(x: BasicPoint, chart: UnstableChart, T: float,
                     eps: float, delta: float, ball: GammaBall | None = None,
                     column: str = "linearized") -> float:
    """Scale-comparison ratio diam(eps-ball) / (eps * diam(delta-ball)).

    The audited, uniformly-bounded quantity; column selects the linearized
    (default) or Bowen ball family. Both diameters must be positive.
    """
    if column == "linearized":
        diam = _linear_diam_fn(chart)
        scale = math.exp(-T)
        d_eps, d_delta = diam(eps * scale), diam(delta * scale)
    else:
        table = dyn_ball_diameters(x, chart, T, [eps, delta], ball=ball)
        d_eps, d_delta = float(table.diam_bowen[0]), float(table.diam_bowen[1])
    if d_delta == 0.0 or d_eps == 0.0:
        raise DegenerateBall(f"ball with zero diameter at T={T}, eps={eps}, delta={delta}")
    return d_eps / (eps * d_delta)


@dataclass(frozen=True)
class DistortionAudit:
    """Distortion ratios over a (T, eps, delta) grid; NaN marks cells
    where a ball degenerated to the center at the sampling resolution."""

    Ts: np.ndarray
    epss: np.ndarray
    deltas: np.ndarray
    ratios: np.ndarray  # (nT, n_eps, n_delta)

    def bounded_spread(self) -> float:
        vals = self.ratios[np.isfinite(self.ratios)]
        if vals.size == 0:
            raise DegenerateBall("no evaluable cells in the distortion audit")
        return float(vals.max() / vals.min())


def distortion_grid(x: BasicPoint, chart: UnstableChart, Ts, epss, deltas) -> DistortionAudit:
    """Linearized-ball distortion ratios over the whole audit grid, using
    one prefix-diameter pass per chart."""
    Ts = np.asarray(Ts, dtype=float)
    epss = np.asarray(epss, dtype=float)
    deltas = np.asarray(deltas, dtype=float)
    diam = _linear_diam_fn(chart)
    out = np.full((Ts.size, epss.size, deltas.size), np.nan)
    for i, T in enumerate(Ts):
        scale = math.exp(-T)
        d_eps = np.array([diam(e * scale) for e in epss])
        d_del = np.array([diam(dl * scale) for dl in deltas])
        for j, (e, de) in enumerate(zip(epss, d_eps)):
            for k, dd in enumerate(d_del):
                if de > 0.0 and dd > 0.0:
                    out[i, j, k] = de / (e * dd)
    return DistortionAudit(Ts=Ts, epss=epss, deltas=deltas, ratios=out)


@dataclass(frozen=True)
class SlnicEstimate:
    """Directional non-integrability estimate at a basic point.

    kappa = 0.0 with n_pairs = 0 means no sampled unstable direction fell
    inside the probe cone: the bound is unwitnessed in that direction.
    """

    kappa: float
    n_pairs: int
    y_index: int | None
    eps: float
    d0: float


def slnic_probe(z: BasicPoint, w_dir, atlas: LimitAtlas, eps: float,
                d0: float = 1.0, chart: UnstableChart | None = None,
                leaf_frac: float = 0.5) -> SlnicEstimate:
    """Probe |Delta(exp_u(x, u), proj_y(x))| >= kappa |u| on sampled data.

    y runs over atlas hyperplanes landing on the eps-stable leaf of z; x
    over sampled unstable-leaf points within leaf_frac * eps of z; u over
    sampled unstable limit vectors at x within the projective d0-cone
    around w_dir after parallel transport to z. Reports the best (over y)
    worst-case (over x, u) ratio.
    """
    w_dir = np.asarray(w_dir, dtype=float)
    w_dir = w_dir / np.linalg.norm(w_dir)
    _require_unstable(z.point, w_dir)
    v, alpha = z.point.v, z.point.alpha
    if chart is None:
        chart = unstable_chart(z, atlas, radius=eps)

    # candidate stable-leaf points from atlas hyperplanes
    betas = []
    for j in range(len(atlas)):
        b = atlas.xi_star[j]
        bv = float(b @ v)
        if abs(bv) <= atlas.margin_floor:
            continue
        b = b / bv  # now b(v) = 1, the stable-leaf representative
        # distance on the shared stable leaf; filter before constructing the
        # point so near-tangent hyperplanes (huge, ill-conditioned b) drop out
        if float(np.linalg.norm(b - alpha)) > eps or j == z.t:
            continue
        betas.append((j, b))
    if not betas:
        raise NoStableSample(f"no atlas hyperplane within eps={eps} of the stable leaf")

    eps_leaf = leaf_frac * eps
    norms = np.linalg.norm(chart.offsets, axis=1)
    xs = chart.offsets[norms <= eps_leaf]

    # pair sheet: u = offset - base runs over the unstable limit vectors at
    # each base point exp_u(z, base); the cone is projective in direction
    us = chart.offsets[None, :, :] - xs[:, None, :]
    unorm = np.linalg.norm(us, axis=2)
    with np.errstate(invalid="ignore", divide="ignore"):
        cosines = np.abs(us @ w_dir) / unorm
    admissible = ((unorm > OFFSET_ZERO_TOL) & (unorm <= eps_leaf)
                  & (cosines >= 1.0 - 0.5 * d0 * d0))
    if not np.any(admissible):
        return SlnicEstimate(kappa=0.0, n_pairs=0, y_index=None, eps=eps, d0=d0)

    best_kappa = 0.0
    best_y = None
    best_pairs = 0
    for j, b in betas:
        b_vx = 1.0 + xs @ b  # b(v + w) with b(v) = 1
        with np.errstate(invalid="ignore", divide="ignore"):
            arg = 1.0 + (us @ b) / b_vx[:, None]
        ok = admissible & (b_vx[:, None] > 0.0) & (arg > 0.0)
        if not np.any(ok):
            continue
        ratios = np.abs(np.log(arg[ok])) / unorm[ok]
        kappa = float(np.min(ratios))
        if best_y is None or kappa > best_kappa:
            best_kappa, best_y, best_pairs = kappa, j, int(ratios.size)
    if best_y is None:
        return SlnicEstimate(kappa=0.0, n_pairs=0, y_index=None, eps=eps, d0=d0)
    return SlnicEstimate(kappa=best_kappa, n_pairs=best_pairs, y_index=best_y, eps=eps, d0=d0)


def unstable_frame(z: BasicPoint, chart: UnstableChart) -> np.ndarray:
    """Orthonormal basis of ker alpha ordered by the chart's second moment.

    The leading directions carry the sampled unstable limit set; trailing
    directions with (near-)zero moment witness a deficient span, which is
    exactly what the non-integrability fan must expose.
    """
    alpha = z.point.alpha
    d = alpha.shape[0]
    basis = np.linalg.svd(alpha.reshape(1, -1))[2][1:]  # orthonormal complement rows
    coords = chart.offsets @ basis.T
    moment = coords.T @ coords
    eigval, eigvec = np.linalg.eigh(moment)
    order = np.argsort(-eigval)
    return (basis.T @ eigvec[:, order]).T  # rows: directions in ker alpha


def slnic_direction_fan(z: BasicPoint, atlas: LimitAtlas, eps: float,
                        d0: float = 1.0, chart: UnstableChart | None = None
                        ) -> list[SlnicEstimate]:
    """slnic_probe along every moment-principal unstable direction.

    For a full sampled span all fan entries are positive; a reducible
    example leaves trailing directions unwitnessed (kappa 0), so the fan
    minimum collapses.
    """
    if chart is None:
        chart = unstable_chart(z, atlas, radius=eps)
    return [slnic_probe(z, w, atlas, eps, d0=d0, chart=chart)
            for w in unstable_frame(z, chart)]


@dataclass(frozen=True)
class ContractionRates:
    c_s: float
    c_u: float
    r2_s: float
    r2_u: float


def contraction_rates(g: GroupElement, horizon: float,
                      ball: GammaBall | None = None,
                      w0: np.ndarray | None = None,
                      beta0: np.ndarray | None = None) -> ContractionRates:
    """Quotient-aware stable/unstable rates along the periodic orbit of g.

    At period multiples, the lifted metric at the translated base point is
    realized by pulling tangent data back with g^-n (optionally sharpened
    by a word-ball minimization). Rates are nats per unit flow time; both
    should be positive with a clean linear fit for hyperbolic data.
    """
    from .groups import _linear_fit

    data = require_proximal(g.eigen())
    period = float(data.lam[0])
    coord = HopfCoord(data.top_right, data.top_left, 0.0)
    x = hopf_inv(coord)
    v, alpha = x.v, x.alpha

    d = v.shape[0]
    if w0 is None:
        w0 = np.ones(d) - (float(alpha @ np.ones(d))) * v  # generic element of ker alpha
    w0 = np.asarray(w0, dtype=float)
    w0 = w0 - float(alpha @ w0) * v
    w0 /= np.linalg.norm(w0)
    if beta0 is None:
        beta0 = np.arange(1.0, d + 1.0)
    beta0 = np.asarray(beta0, dtype=float)
    beta0 = beta0 - float(beta0 @ v) * alpha
    beta0 /= np.linalg.norm(beta0)

    n_max = max(2, int(horizon / period))
    times, log_u_norm, log_s_norm = [], [], []
    ginv_n = np.eye(d)
    g_n = np.eye(d)
    for n in range(n_max + 1):
        wu = ginv_n @ w0          # g^-n pullback of the unstable leg
        bs = beta0 @ g_n          # g^n pullback of the stable leg
        qu = float(np.linalg.norm(wu))
        qs = float(np.linalg.norm(bs))
        if ball is not None:
            qu = min(qu, float(np.min(np.linalg.norm(
                np.einsum("mij,j->mi", ball.mats, wu), axis=1))))
            qs = min(qs, float(np.min(np.linalg.norm(
                np.einsum("j,mji->mi", bs, ball.invs), axis=1))))
        times.append(n * period)
        log_u_norm.append(n * period + math.log(qu))
        log_s_norm.append(-n * period + math.log(qs))
        ginv_n = ginv_n @ g.matrix.inv
        g_n = g_n @ g.matrix.a
    t = np.array(times)
    cu, _, r2u = _linear_fit(t, np.array(log_u_norm))
    cs, _, r2s = _linear_fit(t, np.array(log_s_norm))
    return ContractionRates(c_s=-cs, c_u=cu, r2_s=r2s, r2_u=r2u)


@dataclass(frozen=True)
class PropernessWitness:
    floor: float
    n_checked: int
    n_translations: int
    worst_word: tuple[int, ...]


def properness_witness(x: BasicPoint, gens: GeneratorSet, ball: GammaBall,
                       translation_tol: float = 1e-6) -> PropernessWitness:
    """Minimum displacement of x under the non-trivial ball elements.

    Elements translating x along its own orbit (periodic-point identity)
    are excluded from the floor: for them the displacement is compared
    against the flow by the top eigenvalue instead.
    """
    vs, als = ball.translates(x.point)
    dists = _pair_dists(vs, als, x.point.v, x.point.alpha)
    floor = float("inf")
    worst = ()
    n_translations = 0
    n_checked = 0
    suspicious = np.argsort(dists, kind="stable")
    for idx in suspicious:
        word = ball.words[idx]
        if not word:
            continue
        n_checked += 1
        dist_i = float(dists[idx])
        # a translation along the orbit by period T sits at distance of the
        # order e^T - 1, so only small displacements need the re-check
        if dist_i < max(10 * translation_tol, 0.05):
            g = GroupElement(word, _ball_matrix(ball, idx))
            if g.eigen().simple_top:
                # an element fixing the orbit translates it forward over its
                # attracting pair and backward over the repelling one
                period = float(g.eigen().lam[0])
                moved = act(g.matrix, x.point)
                res = min(distance(moved, flow(x.point, period)),
                          distance(moved, flow(x.point, -period)))
                if res <= translation_tol:
                    n_translations += 1
                    continue
        if dist_i < floor:
            floor = dist_i
            worst = word
    return PropernessWitness(floor=floor, n_checked=n_checked,
                             n_translations=n_translations, worst_word=worst)


def _ball_matrix(ball: GammaBall, idx: int):
    from .projlinalg import Matrix
    return Matrix(ball.mats[idx], inv=ball.invs[idx])


@dataclass(frozen=True)
class ScaleConstants:
    """Empirically measured local-geometry scales (chart-norm units)."""

    eps0: float
    eps1: float
    delta0: float
    l0: float

    def __post_init__(self):
        if not (self.eps0 > 2 * self.eps1):
            raise InsufficientData(
                f"scale audit failed: eps0 = {self.eps0} must exceed 2 eps1 = {2 * self.eps1}")
        if not self.l0 > 1.0:
            raise InsufficientData("L0 must exceed 1")


def estimate_scale_constants(atlas: LimitAtlas, gens: GeneratorSet,
                             ball: GammaBall, n_points: int = 20,
                             seed: int = 0, sandwich_l0: float | None = None) -> ScaleConstants:
    """Measure (eps0, eps1, delta0, L0) over sampled basic points.

    eps0 is half the smallest non-translation displacement (disjointness of
    lift balls); eps1 = eps0/2.5; delta0 = eps1/L0; L0 is the measured
    dyn-ball sandwich constant, floored slightly above 1.
    """
    rng = np.random.default_rng(seed)
    n = len(atlas)
    floors = []
    for _ in range(n_points):
        s = int(rng.integers(n))
        t = int(rng.integers(n))
        if s == t:
            continue
        try:
            bp = make_basic_point(atlas, s, t, tau=float(rng.normal(0.0, 0.3)))
        except NotTransverse:
            continue
        floors.append(properness_witness(bp, gens, ball).floor)
    if not floors:
        raise InsufficientData("no usable basic points for the scale audit")
    eps0 = 0.5 * float(min(floors))
    l0 = max(1.0 + 1e-6, sandwich_l0 if sandwich_l0 is not None else 1.0 + 1e-6)
    eps1 = eps0 / 2.5
    return ScaleConstants(eps0=eps0, eps1=eps1, delta0=eps1 / l0, l0=l0)
