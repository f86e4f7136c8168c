"""Periods, orbit counting, entropy, the offset logarithmic integral,
truncated Euler products, periodic-orbit measures and correlations.

Everything here is a finite-truncation surrogate: products and counts run
over enumerated primitive classes, and the trusted t-range of a counting
table is bounded by a fitted period-versus-length envelope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import quad

from .errors import AbscissaViolation, DomainError, InsufficientData, NotProximal
from .flowspace import FlowPoint, flow, hopf_inv, HopfCoord
from .groups import (GeneratorSet, GroupElement, _linear_fit,
                     iter_primitive_classes, primitive_conj_classes)
from .projlinalg import require_proximal

SUM_GUARD = 1e8


def period(g: GroupElement) -> float:
    """lambda_1 of a proximal non-identity element, in nats."""
    if not g.word:
        raise NotProximal("identity has no period")
    data = require_proximal(g.eigen())
    return float(data.lam[0])


@dataclass(frozen=True)
class ConjClassRecord:
    """Primitive conjugacy class: representative, period, optional
    potential average along the closed orbit."""

    representative: GroupElement
    period: float
    primitive: bool = True
    potential_avg: float | None = None

    @property
    def cyc_length(self) -> int:
        return self.representative.length

    def orbit_base(self) -> FlowPoint:
        data = require_proximal(self.representative.eigen())
        return hopf_inv(HopfCoord(data.top_right, data.top_left, 0.0))


def make_class_records(gens: GeneratorSet, radius: int,
                       cap: int | None = None) -> list[ConjClassRecord]:
    """One record per primitive class of word length <= radius; elements
    without a simple top eigenvalue are dropped."""
    out = []
    for g in primitive_conj_classes(gens, radius, cap=cap):
        if not g.eigen().simple_top:
            continue
        out.append(ConjClassRecord(representative=g, period=float(g.eigen().lam[0])))
    return out


@dataclass(frozen=True)
class PeriodData:
    """Primitive class periods with word lengths; the scalable counting path."""

    periods: np.ndarray
    lengths: np.ndarray
    n_dropped: int

    def __len__(self) -> int:
        return self.periods.shape[0]


def primitive_periods(gens: GeneratorSet, radius: int) -> PeriodData:
    """Periods of all primitive classes of length <= radius.

    2x2 products use the closed-form log spectral radius from the trace;
    higher dimensions fall back to batched dense eigenvalues.
    """
    periods, lengths = [], []
    dropped = 0
    for words, prods in iter_primitive_classes(gens, radius):
        if words.shape[0] == 0:
            continue
        if gens.dim == 2:
            tr = np.abs(prods[:, 0, 0] + prods[:, 1, 1])
            ok = tr > 2.0
            dropped += int(np.sum(~ok))
            half = tr[ok] / 2.0
            lam = np.log(half + np.sqrt(half * half - 1.0))
        else:
            eig = np.linalg.eigvals(prods)
            top = np.max(np.abs(eig), axis=1)
            gap_ok = top > 1.0 + 1e-12
            dropped += int(np.sum(~gap_ok))
            ok = gap_ok
            lam = np.log(top[ok])
        periods.append(lam)
        lengths.append(np.full(lam.shape[0], words.shape[1], dtype=np.int32))
    if not periods:
        return PeriodData(np.empty(0), np.empty(0, dtype=np.int32), dropped)
    p = np.concatenate(periods)
    ln = np.concatenate(lengths)
    order = np.argsort(p, kind="stable")
    return PeriodData(periods=p[order], lengths=ln[order], n_dropped=dropped)


def period_envelope(data: PeriodData, radius: int) -> float:
    """Smallest period an element of length radius+1 could plausibly have.

    Fits the least-squares slope of period against length, then drops the
    intercept to the lower envelope of the data, so every enumerated class
    sits on or above the line. Counting tables are only trusted below the
    envelope value at radius+1: beyond it, shorter periods of longer words
    could be missing.
    """
    if len(data) < 10:
        raise InsufficientData("need >= 10 classes for the period envelope")
    a, _, _ = _linear_fit(data.lengths.astype(float), data.periods)
    b_env = float(np.min(data.periods - a * data.lengths))
    line = a * (radius + 1) + b_env
    # an all-one-letter family can undercut the fitted slope; the per-letter
    # minimum ratio extrapolates that lower branch
    ratio = float(np.min(data.periods / np.maximum(data.lengths, 1)))
    return min(line, ratio * (radius + 1))


class PotentialAverage(NamedTuple):
    value: float
    error: float


def potential_average(potential: Callable[[FlowPoint], float],
                      rec: ConjClassRecord, nodes: int = 128) -> PotentialAverage:
    """Average of the potential over one period of the closed orbit.

    Composite Simpson on `nodes` panels (rounded up to even), with the
    half-resolution Richardson difference as the error estimate.
    """
    n = max(4, nodes + (nodes % 2))
    base = rec.orbit_base()
    t_all = np.linspace(0.0, rec.period, n + 1)
    vals = np.array([potential(flow(base, float(t))) for t in t_all])

    def simpson(v, h):
        return (h / 3.0) * (v[0] + v[-1] + 4.0 * v[1:-1:2].sum() + 2.0 * v[2:-1:2].sum())

    h = rec.period / n
    s_full = simpson(vals, h) / rec.period
    s_half = simpson(vals[::2], 2 * h) / rec.period
    return PotentialAverage(value=float(s_full), error=abs(s_full - s_half) / 15.0)


def with_potential(records: list[ConjClassRecord],
                   potential: Callable[[FlowPoint], float],
                   nodes: int = 128) -> list[ConjClassRecord]:
    return [replace(r, potential_avg=potential_average(potential, r, nodes).value)
            for r in records]


# ---------------------------------------------------------------------------
# Counting and entropy

@dataclass(frozen=True)
class CountingTable:
    """Grid of thresholds with class counts and the integral-normalizer
    comparison columns. t_trusted caps where the ratio column is reported;
    counts beyond it may miss classes past the enumeration radius."""

    t: np.ndarray
    counts: np.ndarray
    t_trusted: float
    h_hat: float | None = None
    li_col: np.ndarray | None = None
    ratio: np.ndarray | None = None


def counting_table(data: PeriodData | list[ConjClassRecord], grid,
                   t_trusted: float | None = None,
                   h_hat: float | None = None) -> CountingTable:
    """N(t) = number of primitive classes with period <= t on the grid.

    With h_hat, attaches Li(e^{h t}) and the N/Li ratio, blanked (NaN)
    beyond the trusted range.
    """
    if isinstance(data, PeriodData):
        periods = data.periods
    else:
        periods = np.sort(np.array([r.period for r in data]))
    grid = np.asarray(grid, dtype=float)
    counts = np.searchsorted(periods, grid, side="right").astype(np.int64)
    if t_trusted is None:
        t_trusted = float(periods[-1]) if periods.size else 0.0
    li_col = ratio = None
    if h_hat is not None:
        li_col = np.array([li(math.exp(h_hat * t)) if h_hat * t > math.log(2.0) else 0.0
                           for t in grid])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where((li_col > 0) & (grid <= t_trusted), counts / li_col, np.nan)
    return CountingTable(t=grid, counts=counts, t_trusted=float(t_trusted),
                         h_hat=h_hat, li_col=li_col, ratio=ratio)


def li(t: float) -> float:
    """Offset logarithmic integral: integral from 2 to t of dx / log x.

    Adaptive quadrature after the substitution x = e^u, relative error
    target 1e-12; Li(t) ~ t / log t for large t.
    """
    if t < 2.0:
        raise DomainError(f"offset integral needs t >= 2, got {t}")
    if t == 2.0:
        return 0.0
    val, _ = quad(lambda u: math.exp(u) / u, math.log(2.0), math.log(t),
                  epsrel=1e-12, epsabs=0.0, limit=200)
    return float(val)


@dataclass(frozen=True)
class EntropyFit:
    h_hat: float
    band: tuple[float, float]
    window: tuple[float, float]


def _solve_growth_rate(t: float, log_count: float) -> float:
    """Solve log N = h t - log(h t) + log(1 + 1/(h t)) for h, by damped
    fixed point in u = h t.

    The log(1 + 1/u) term is the first tail correction of the integral
    normalizer x/log x expansion; without it the recovered rate is biased
    high by about 1/t at desk truncations.
    """
    u = log_count + math.log(max(log_count, 2.0))
    for _ in range(200):
        nxt = log_count + math.log(u) - math.log1p(1.0 / u)
        u_new = 0.5 * u + 0.5 * nxt
        if abs(u_new - u) < 1e-13:
            u = u_new
            break
        u = u_new
    return u / t


def entropy_fit(table: CountingTable, min_count: int = 100) -> EntropyFit:
    """Exponential growth rate of the counts over the top decade.

    Pointwise rates come from the damped fixed point for
    log N = h t - log(h t); the band is the spread of windowed refits.
    """
    counts = np.asarray(table.counts, dtype=float)
    t = table.t
    usable = (t <= table.t_trusted) & (counts >= 2)
    if not np.any(usable) or counts[usable][-1] < min_count:
        raise InsufficientData("top count below the entropy-fit threshold")
    n_top = counts[usable][-1]
    window = usable & (counts >= n_top / 10.0)
    idx = np.nonzero(window)[0]
    if idx.size < 4:
        raise InsufficientData("top decade has too few grid points")
    rates = np.array([_solve_growth_rate(t[i], math.log(counts[i])) for i in idx])
    h_hat = float(np.mean(rates))
    k = max(2, idx.size // 3)
    sub_means = [float(np.mean(rates[j:j + k])) for j in range(0, idx.size - k + 1)]
    band = (min(sub_means), max(sub_means))
    return EntropyFit(h_hat=h_hat, band=band,
                      window=(float(t[idx[0]]), float(t[idx[-1]])))


def growth_fit(t: np.ndarray, weighted_counts: np.ndarray,
               min_mass: float = 10.0) -> EntropyFit:
    """entropy_fit for arbitrary positive cumulative data (weighted counts)."""
    table = CountingTable(t=np.asarray(t, dtype=float),
                          counts=np.asarray(weighted_counts, dtype=float),
                          t_trusted=float(np.max(t)))
    return entropy_fit(table, min_count=int(min_mass))


def pressure_estimate(records: list[ConjClassRecord], grid=None) -> EntropyFit:
    """Growth rate of the potential-reweighted counting data.

    The cumulative sums of e^{period * avg} over classes with period <= t
    play the role of N(t); with a zero potential this is entropy_fit by
    construction.
    """
    if len(records) < 100:
        raise InsufficientData("need >= 100 classes for a pressure estimate")
    recs = sorted(records, key=lambda r: r.period)
    periods = np.array([r.period for r in recs])
    avgs = np.array([r.potential_avg if r.potential_avg is not None else 0.0 for r in recs])
    weights = np.exp(periods * avgs)
    if grid is None:
        grid = np.linspace(periods[0], periods[-1], 60)
    grid = np.asarray(grid, dtype=float)
    cum = np.cumsum(weights)
    m = cum[np.maximum(np.searchsorted(periods, grid, side="right") - 1, 0)]
    m[grid < periods[0]] = 0.0
    return growth_fit(grid, m)


# ---------------------------------------------------------------------------
# Euler products

@dataclass(frozen=True)
class ZetaEval:
    s: complex
    value: complex
    truncation: float
    term_count: int


def _kahan_complex_sum(terms: np.ndarray, block: int = 4096) -> complex:
    """Compensated sum: pairwise within blocks, Kahan across block totals."""
    totals = [complex(np.sum(terms[i:i + block])) for i in range(0, terms.shape[0], block)]
    total = 0.0 + 0.0j
    comp = 0.0 + 0.0j
    for x in totals:
        y = x - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def _euler_product(s: complex, exponents: np.ndarray, truncation: float) -> ZetaEval:
    """exp(-sum log(1 - e^{-exponents})) with a dominated-sum guard.

    The exponents arrive in the deterministic period order, so the
    compensated summation is reproducible.
    """
    mags = np.exp(-exponents.real)
    if float(np.sum(mags)) > SUM_GUARD:
        raise AbscissaViolation(
            f"partial sums of |e^(-s lambda)| exceed {SUM_GUARD:.0e}; "
            "the product is divergent at this s")
    if np.any(mags >= 1.0):
        raise AbscissaViolation("a single Euler factor is already divergent")
    logs = np.log1p(-mags * np.exp(-1j * exponents.imag))
    value = np.exp(-_kahan_complex_sum(logs))
    return ZetaEval(s=s, value=complex(value), truncation=truncation,
                    term_count=int(exponents.shape[0]))


def zeta_partial(s: complex, data: PeriodData | list[ConjClassRecord],
                 truncation: float, h_hat: float | None = None) -> ZetaEval:
    """Truncated Euler product over primitive classes with period <= truncation.

    With h_hat supplied, evaluation strictly left of it is refused.
    """
    s = complex(s)
    if h_hat is not None and s.real <= h_hat:
        raise AbscissaViolation(f"Re(s) = {s.real} is not right of the abscissa {h_hat}")
    periods = data.periods if isinstance(data, PeriodData) else np.array(
        [r.period for r in data])
    periods = np.sort(periods[periods <= truncation])
    return _euler_product(s, s * periods, truncation)


def zeta_weighted(s: complex, records: list[ConjClassRecord],
                  truncation: float, pressure: float | None = None) -> ZetaEval:
    """Potential-weighted product: factors (1 - e^{-period (s - avg)})^{-1}."""
    s = complex(s)
    if pressure is not None and s.real <= pressure:
        raise AbscissaViolation(f"Re(s) = {s.real} is not right of the pressure {pressure}")
    recs = [r for r in records if r.period <= truncation]
    recs.sort(key=lambda r: r.period)
    periods = np.array([r.period for r in recs])
    avgs = np.array([r.potential_avg if r.potential_avg is not None else 0.0 for r in recs])
    return _euler_product(s, periods * (s - avgs), truncation)


# ---------------------------------------------------------------------------
# Periodic-orbit measures and correlation

@dataclass(frozen=True)
class OrbitMeasure:
    """Weighted equidistribution over closed orbits: per orbit a base
    point, uniform node times over one period, and a weight; weights sum
    to one."""

    records: tuple[ConjClassRecord, ...]
    bases: tuple[FlowPoint, ...]
    node_times: tuple[np.ndarray, ...]
    weights: np.ndarray

    def integrate(self, f: Callable[[FlowPoint], float], shift: float = 0.0) -> float:
        """Node times wrap modulo the period: the measure lives on the
        closed orbit, so flowing past the period returns to its start."""
        total = 0.0
        for w, rec, base, times in zip(self.weights, self.records, self.bases,
                                       self.node_times):
            vals = [f(flow(base, float((t + shift) % rec.period))) for t in times]
            total += w * float(np.mean(vals))
        return total

    def integrate_product(self, f, g, shift: float) -> float:
        total = 0.0
        for w, rec, base, times in zip(self.weights, self.records, self.bases,
                                       self.node_times):
            pts = [flow(base, float(t)) for t in times]
            shifted = [flow(base, float((t + shift) % rec.period)) for t in times]
            vals = [f(p) * g(q) for p, q in zip(pts, shifted)]
            total += w * float(np.mean(vals))
        return total


def orbit_measure(records: list[ConjClassRecord], truncation: float,
                  weighting: Callable[[float], float] | None = None,
                  h_hat: float | None = None, nodes: int = 24,
                  min_orbits: int = 50) -> OrbitMeasure:
    """Probability measure from orbits with period <= truncation.

    Orbit weights are weighting(period) * period, normalized; the default
    weighting e^{-h_hat period} is the documented heuristic stand-in for
    the equilibrium weighting.
    """
    if weighting is None:
        if h_hat is None:
            raise ValueError("either a weighting or h_hat is required")
        weighting = lambda lam: math.exp(-h_hat * lam)
    recs = [r for r in records if r.period <= truncation]
    if len(recs) < min_orbits:
        raise InsufficientData(f"only {len(recs)} orbits contribute, need {min_orbits}")
    recs.sort(key=lambda r: r.period)
    weights = np.array([weighting(r.period) * r.period for r in recs])
    if np.any(weights < 0.0):
        raise ValueError("weighting must be nonnegative")
    weights = weights / weights.sum()
    bases = tuple(r.orbit_base() for r in recs)
    times = tuple(np.linspace(0.0, r.period, nodes, endpoint=False) for r in recs)
    return OrbitMeasure(records=tuple(recs), bases=bases, node_times=times, weights=weights)


def correlation(f: Callable[[FlowPoint], float], g: Callable[[FlowPoint], float],
                t: float, mu: OrbitMeasure) -> float:
    """Covariance of f and g o phi_t against the orbit measure.

    The marginal of the shifted factor is evaluated on the shifted nodes,
    so the empirical measure is flow-invariant by construction and
    constants decorrelate exactly at every shift.
    """
    joint = mu.integrate_product(f, g, t)
    return joint - mu.integrate(f) * mu.integrate(g, shift=t)
