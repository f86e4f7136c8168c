"""Small dense real linear algebra: projective points and hyperplanes,
unimodular matrices, dominant eigendata, cross-ratio.

Everything is a thin, immutable wrapper around float64 numpy arrays.
Dimension is a runtime parameter capped at MAX_DIM; there is no sparse path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateConfiguration, NonConvergence, NotProximal

MAX_DIM = 16

# Entries of a unit vector below this are treated as zero by the sign rule.
SIGN_TOL = 1e-12

POWER_TOL = 1e-10
POWER_BUDGET = 10_000

# Top-modulus gap below which an element is flagged near-parabolic rather
# than treated as proximal.
NEAR_PARABOLIC_GAP = 1e-6


def _as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.shape[0] < 2 or v.shape[0] > MAX_DIM:
        raise ValueError(f"need a 1-d vector with 2 <= d <= {MAX_DIM}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite entries")
    return v


def canonical_rep(x) -> np.ndarray:
    """Unit-norm representative with the first nonzero coordinate positive.

    The sign rule keeps sampled projective data from flapping between
    antipodal representatives. Exact scale invariance of the output holds
    for power-of-two rescalings of the input; otherwise it holds to the
    last few ulps.
    """
    v = _as_vector(x)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("zero vector has no projective class")
    u = v / n
    for c in u:
        if abs(c) > SIGN_TOL:
            if c < 0.0:
                u = -u
            break
    u.setflags(write=False)
    return u


@dataclass(frozen=True)
class ProjPoint:
    """Point of P(V), stored as its canonical unit representative."""

    rep: np.ndarray

    def __init__(self, rep):
        object.__setattr__(self, "rep", canonical_rep(rep))

    @property
    def dim(self) -> int:
        return self.rep.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, ProjPoint) and np.array_equal(self.rep, other.rep)

    def __hash__(self):
        return hash(self.rep.tobytes())


@dataclass(frozen=True)
class ProjHyperplane:
    """Hyperplane of P(V), i.e. a point of P(V*), stored like ProjPoint."""

    rep: np.ndarray

    def __init__(self, rep):
        object.__setattr__(self, "rep", canonical_rep(rep))

    @property
    def dim(self) -> int:
        return self.rep.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, ProjHyperplane) and np.array_equal(self.rep, other.rep)

    def __hash__(self):
        return hash(self.rep.tobytes())


def projective_distance(a: ProjPoint | ProjHyperplane, b: ProjPoint | ProjHyperplane) -> float:
    """Sine of the angle between the lines: ||u ^ w|| for unit reps, in [0, 1]."""
    dot = float(np.dot(a.rep, b.rep))
    return math.sqrt(max(0.0, 1.0 - dot * dot))


def transversality_margin(ell: ProjPoint, h: ProjHyperplane) -> float:
    """|alpha(v)| for unit representatives; 0 exactly when ell lies in h."""
    return abs(float(np.dot(h.rep, ell.rep)))


@dataclass(frozen=True)
class Matrix:
    """Unimodular matrix: determinant rescaled to 1, inverse cached eagerly."""

    a: np.ndarray
    inv: np.ndarray = field(compare=False)

    def __init__(self, a, inv=None):
        m = np.asarray(a, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"need a square matrix, got shape {m.shape}")
        d = m.shape[0]
        if d < 2 or d > MAX_DIM:
            raise ValueError(f"dimension must satisfy 2 <= d <= {MAX_DIM}")
        det = float(np.linalg.det(m))
        if not det > 0.0:
            raise ValueError(f"determinant must be positive to normalize, got {det}")
        m = m / det ** (1.0 / d)
        # the rescaling is exact math; the re-check tolerance must absorb the
        # conditioning of the determinant evaluation itself for large entries
        det_tol = max(1e-10, 64 * np.finfo(float).eps * float(np.linalg.norm(m)) ** d)
        if abs(float(np.linalg.det(m)) - 1.0) > det_tol:
            raise ValueError("determinant normalization failed (badly conditioned input)")
        m.setflags(write=False)
        object.__setattr__(self, "a", m)
        if inv is None:
            inv = np.linalg.inv(m)
        else:
            inv = np.asarray(inv, dtype=float)
        inv.setflags(write=False)
        object.__setattr__(self, "inv", inv)

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return Matrix(self.a @ other.a, inv=other.inv @ self.inv)

    def inverse(self) -> "Matrix":
        return Matrix(self.inv, inv=self.a)

    def __eq__(self, other) -> bool:
        return isinstance(other, Matrix) and np.array_equal(self.a, other.a)

    def __hash__(self):
        return hash(self.a.tobytes())


def identity(d: int) -> Matrix:
    return Matrix(np.eye(d))


@dataclass(frozen=True)
class EigenData:
    """Log-modulus spectrum plus dominant right/left projective eigendata.

    lam          sorted (descending) log-moduli of the complex eigenvalues, in nats
    top_right    dominant eigenline, present when simple_top
    top_left     dominant eigen-covector line (left eigenvector), when simple_top
    simple_top   the top modulus is attained by a unique, real, simple eigenvalue
    near_parabolic  top gap below NEAR_PARABOLIC_GAP; flagged, not rejected
    """

    lam: np.ndarray
    top_right: ProjPoint | None
    top_left: ProjHyperplane | None
    simple_top: bool
    near_parabolic: bool = False


def _power_iterate(m: np.ndarray, mu: float, tol=POWER_TOL, budget=POWER_BUDGET) -> np.ndarray:
    """Dominant eigendirection of m by power iteration, driven to the
    rounding floor.

    mu is the known dominant eigenvalue (real, possibly negative); the
    iteration tracks the projective line, so the sign of mu only affects
    the residual test. The iteration keeps going while the residual still
    improves: errors transverse to the dominant line are amplified by the
    full eigenvalue ratio under the group action downstream, so stopping
    at a loose residual is not an option. Deterministic starts.
    """
    d = m.shape[0]
    scale = np.max(np.abs(m))
    floor = 8 * np.finfo(float).eps * scale
    chunk = 32
    best_x, best_r = None, np.inf
    for start in range(d):
        x = np.zeros(d)
        x[start] = 1.0
        # tilt to avoid landing exactly on an invariant complement
        x += 1e-3 * np.arange(1, d + 1) / d
        x /= np.linalg.norm(x)
        r_prev = np.inf
        iters = 0
        while iters < budget:
            for _ in range(chunk):
                y = m @ x
                ny = np.linalg.norm(y)
                if ny == 0.0:
                    break
                x = y / ny
            iters += chunk
            r = float(np.linalg.norm(m @ x - mu * x))
            if r < best_r:
                best_r, best_x = r, x
            if r <= floor:
                return x
            if r <= tol * scale and r >= 0.5 * r_prev:
                return best_x  # within tolerance and no longer improving
            r_prev = r
        if best_r <= tol * scale:
            return best_x
    if best_r <= 1e-8 * scale:
        return best_x
    raise NonConvergence(f"power iteration stalled at residual {best_r:.2e}")


def eigen_decompose(m: Matrix) -> EigenData:
    """Full log-modulus spectrum (dense QR) plus sharp dominant pair (power iteration).

    The dominant right line is refined on m.a, the dominant left line on
    m.a.T; both only when the top modulus is simple and real. Raises
    NonConvergence only if the spectrum promises a simple top but the
    iteration cannot certify it within budget.
    """
    eigs = np.linalg.eigvals(m.a)
    moduli = np.abs(eigs)
    order = np.argsort(-moduli, kind="stable")
    eigs = eigs[order]
    moduli = moduli[order]
    lam = np.log(moduli)
    lam.setflags(write=False)

    top = eigs[0]
    gap_ratio = (moduli[0] - moduli[1]) / moduli[0]
    simple = bool(gap_ratio > 1e-13 and abs(top.imag) <= 1e-10 * moduli[0])
    near_parabolic = bool(lam[0] - lam[1] < NEAR_PARABOLIC_GAP)

    if not simple:
        return EigenData(lam=lam, top_right=None, top_left=None,
                         simple_top=False, near_parabolic=near_parabolic)

    mu = float(top.real)
    right = _power_iterate(m.a, mu)
    left = _power_iterate(m.a.T, mu)
    # two-sided Rayleigh quotient: the QR eigenvalue of a highly nonnormal
    # matrix carries error up to eps * |m| / |<left, right>|, which the
    # exponentiated period downstream amplifies; this refinement has error
    # of the order of the product of the two residuals instead
    denom = float(left @ right)
    if denom != 0.0:
        mu_refined = float(left @ m.a @ right) / denom
        if mu_refined * mu > 0.0:
            lam = lam.copy()
            lam[0] = math.log(abs(mu_refined))
            lam.setflags(write=False)
    return EigenData(lam=lam, top_right=ProjPoint(right), top_left=ProjHyperplane(left),
                     simple_top=True, near_parabolic=near_parabolic)


def lambda_gap(m: Matrix) -> float:
    """Top gap lambda_1 - lambda_2 >= 0 of the log-modulus spectrum."""
    lam = eigen_decompose(m).lam
    return float(lam[0] - lam[1])


def top_period(m: Matrix) -> float:
    """lambda_1: log of the spectral radius."""
    return float(eigen_decompose(m).lam[0])


def require_proximal(data: EigenData, what: str = "element") -> EigenData:
    if not data.simple_top:
        raise NotProximal(f"{what} has no simple real dominant eigenvalue")
    return data


_INF = float("inf")


def _cr_pair(t1: float, t2: float) -> float | None:
    """t1 - t2 with the RP^1 convention; None encodes an (inf - inf) factor of 1."""
    i1, i2 = math.isinf(t1), math.isinf(t2)
    if i1 and i2:
        return None
    if i1 or i2:
        return _INF
    return t1 - t2


def cross_ratio(t1, t2, t3, t4) -> float:
    """Cross-ratio (t1-t3)/(t1-t2) * (t2-t4)/(t3-t4).

    Arguments are four extended reals (math.inf allowed) or four collinear
    ProjPoint's, in which case any projective parametrization of the common
    line is used; the value does not depend on that choice.
    """
    if isinstance(t1, ProjPoint):
        t1, t2, t3, t4 = _collinear_params(t1, t2, t3, t4)
    nums = [_cr_pair(t1, t3), _cr_pair(t2, t4)]
    dens = [_cr_pair(t1, t2), _cr_pair(t3, t4)]
    value = 1.0
    for n, d in zip(nums, dens):
        if n is None and d is None:
            continue
        if d is None or (d is not None and d == 0.0):
            raise DegenerateConfiguration("coincident points in a cross-ratio denominator")
        if n is None:
            raise DegenerateConfiguration("two arguments at infinity in one numerator")
        if math.isinf(n) and math.isinf(d):
            continue
        if math.isinf(d):
            value *= 0.0
        elif math.isinf(n):
            raise DegenerateConfiguration("unbounded cross-ratio (coincidence at infinity)")
        else:
            value *= n / d
    return value


def _collinear_params(*pts: ProjPoint) -> tuple[float, ...]:
    """Projective parameters of four collinear points on their common line."""
    reps = np.stack([p.rep for p in pts])
    u_svd, s, vh = np.linalg.svd(reps, full_matrices=False)
    if s.shape[0] > 2 and s[2] > 1e-10 * s[0]:
        raise DegenerateConfiguration(f"points not collinear: sigma_3/sigma_1 = {s[2] / s[0]:.2e}")
    basis = vh[:2]  # rows span the line
    coords = reps @ basis.T  # (4, 2): p ~ x*basis0 + y*basis1
    params = []
    for x, y in coords:
        if abs(x) <= 1e-14:
            params.append(_INF)
        else:
            params.append(y / x)
    return tuple(params)
