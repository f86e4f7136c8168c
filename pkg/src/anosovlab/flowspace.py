"""The homogeneous flow space: pairs [v : alpha] with positive pairing.

Points are stored on the affine quadric slice alpha(v) = 1, with the
antipodal pair (-v, -alpha) resolved by the canonical sign rule on the
concatenated coordinates. Every formula below (flow, group action, Hopf
chart, splitting, contact form) is the explicit one for that slice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BaseMismatch, NotInL, NotTransverse
from .projlinalg import Matrix, ProjHyperplane, ProjPoint, transversality_margin

QUADRIC_TOL = 1e-12
TANGENT_TOL = 1e-10


def _canon_pair(v: np.ndarray, alpha: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Resolve the antipodal ambiguity: first nonzero of (v, alpha) positive."""
    for c in v:
        if abs(c) > 1e-300:
            if c < 0.0:
                return -v, -alpha
            return v, alpha
    for c in alpha:
        if abs(c) > 1e-300:
            if c < 0.0:
                return -v, -alpha
            return v, alpha
    raise ValueError("zero pair")


@dataclass(frozen=True)
class FlowPoint:
    """Quadric representative (v, alpha) with alpha(v) = 1."""

    v: np.ndarray
    alpha: np.ndarray

    def __init__(self, v, alpha):
        v = np.array(v, dtype=float)
        alpha = np.array(alpha, dtype=float)
        if v.shape != alpha.shape or v.ndim != 1:
            raise ValueError("v and alpha must be 1-d arrays of equal length")
        pairing = float(alpha @ v)
        # the evaluation of the pairing itself cancels to |v||alpha| ulps,
        # so the slice check must scale with that conditioning
        tol = max(QUADRIC_TOL,
                  32 * np.finfo(float).eps * float(np.linalg.norm(v)) * float(np.linalg.norm(alpha)))
        if abs(pairing - 1.0) > tol:
            raise NotInL(f"pair is off the quadric slice: alpha(v) = {pairing!r}")
        v, alpha = _canon_pair(v, alpha)
        v.setflags(write=False)
        alpha.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "alpha", alpha)

    @property
    def dim(self) -> int:
        return self.v.shape[0]

    def pairing(self) -> float:
        return float(self.alpha @ self.v)

    def __eq__(self, other) -> bool:
        return (isinstance(other, FlowPoint)
                and np.array_equal(self.v, other.v)
                and np.array_equal(self.alpha, other.alpha))

    def __hash__(self):
        return hash((self.v.tobytes(), self.alpha.tobytes()))


def make_point(v, alpha) -> FlowPoint:
    """Rescale (v, alpha) with positive pairing onto the quadric slice.

    Both legs are scaled by s = alpha(v)**-0.5, which is the unique joint
    scaling making the pairing 1.
    """
    v = np.asarray(v, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    pairing = float(alpha @ v)
    if not pairing > 0.0:
        raise NotInL(f"pairing must be positive, got {pairing!r}")
    s = pairing ** -0.5
    return FlowPoint(v * s, alpha * s)


def distance(x: FlowPoint, y: FlowPoint) -> float:
    """Euclidean distance of quadric representatives, minimized over the antipode."""
    d_plus = math.sqrt(float(np.sum((x.v - y.v) ** 2) + np.sum((x.alpha - y.alpha) ** 2)))
    d_minus = math.sqrt(float(np.sum((x.v + y.v) ** 2) + np.sum((x.alpha + y.alpha) ** 2)))
    return min(d_plus, d_minus)


def flow(x: FlowPoint, t: float) -> FlowPoint:
    """phi_t: (v, alpha) -> (e^t v, e^-t alpha); stays on the quadric exactly."""
    et = math.exp(t)
    return FlowPoint(x.v * et, x.alpha / et)


def act(g: Matrix, x: FlowPoint) -> FlowPoint:
    """Group action (v, alpha) -> (g v, alpha o g^-1); commutes with the flow.

    The pairing is preserved exactly in exact arithmetic, so the rounding
    correction is applied to the covector leg alone: rescaling both legs
    would contaminate the (well-conditioned) vector leg with the
    cancellation error of the dual product.
    """
    gv = g.a @ x.v
    ga = x.alpha @ g.inv
    pairing = float(ga @ gv)
    if not pairing > 0.0:
        raise NotInL(f"pairing must be positive, got {pairing!r}")
    return FlowPoint(gv, ga / pairing)


@dataclass(frozen=True)
class TangentVector:
    """Tangent vector (w, beta) at base, with alpha(w) + beta(v) = 0.

    The splitting into unstable / stable / flow parts is computed eagerly:

        u_part = w - c v      in ker alpha   (unstable leg)
        s_part = beta + c alpha  in ker iota_v  (stable leg)
        c_part = alpha(w) = -beta(v)           (coefficient on (v, -alpha))
    """

    base: FlowPoint
    w: np.ndarray
    beta: np.ndarray
    u_part: np.ndarray
    s_part: np.ndarray
    c_part: float

    def __init__(self, base: FlowPoint, w, beta):
        w = np.array(w, dtype=float)
        beta = np.array(beta, dtype=float)
        defect = float(base.alpha @ w + beta @ base.v)
        scale = 1.0 + float(np.linalg.norm(w) + np.linalg.norm(beta))
        if abs(defect) > TANGENT_TOL * scale:
            raise ValueError(f"not tangent to the quadric: alpha(w)+beta(v) = {defect!r}")
        c = float(base.alpha @ w)
        u = w - c * base.v
        s = beta + c * base.alpha
        if (np.linalg.norm(u + c * base.v - w) > TANGENT_TOL * scale
                or np.linalg.norm(s - c * base.alpha - beta) > TANGENT_TOL * scale):
            raise ValueError("split recomposition failed")
        for arr in (w, beta, u, s):
            arr.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "u_part", u)
        object.__setattr__(self, "s_part", s)
        object.__setattr__(self, "c_part", c)


def flow_tangent(u: TangentVector, t: float) -> TangentVector:
    """d(phi_t): scales the unstable leg by e^t, the stable leg by e^-t."""
    return TangentVector(flow(u.base, t), u.w * math.exp(t), u.beta * math.exp(-t))


def act_tangent(g: Matrix, u: TangentVector) -> TangentVector:
    """d(action of g): (w, beta) -> (g w, beta o g^-1), with the base's sign flip."""
    base = act(g, u.base)
    gv = g.a @ u.base.v
    sigma = 1.0 if float(gv @ base.v) >= 0.0 else -1.0
    return TangentVector(base, sigma * (g.a @ u.w), sigma * (u.beta @ g.inv))


def contact_form(u: TangentVector) -> float:
    """tau(w, beta) = alpha(w) = -beta(v); flow-invariant, kills u+s parts."""
    return u.c_part


def pseudo_metric(u1: TangentVector, u2: TangentVector) -> float:
    """Invariant pairing beta_1(w_2) + beta_2(w_1), signature (d, d-1)."""
    if distance(u1.base, u2.base) > 1e-9:
        raise BaseMismatch("tangent vectors live at different base points")
    return float(u1.beta @ u2.w + u2.beta @ u1.w)


@dataclass(frozen=True)
class HopfCoord:
    """Hopf chart value: transverse pair plus flow time (nats)."""

    ell: ProjPoint
    h: ProjHyperplane
    tau: float


def hopf(x: FlowPoint, gram: np.ndarray | None = None) -> HopfCoord:
    """Hopf chart ([v], [alpha], log(|v| / sqrt(alpha(v)))).

    The norm is Euclidean by default; a positive-definite Gram matrix can be
    supplied to change it (the chart, not the geometry, depends on it).
    """
    nv = _norm(x.v, gram)
    tau = math.log(nv / math.sqrt(x.pairing()))
    return HopfCoord(ProjPoint(x.v), ProjHyperplane(x.alpha), tau)


def hopf_inv(h: HopfCoord, gram: np.ndarray | None = None) -> FlowPoint:
    """Inverse Hopf chart on unit representatives: ((e^s/|v|) v, (|v|/(e^s alpha(v))) alpha)."""
    v = h.ell.rep
    alpha = h.h.rep
    pairing = float(alpha @ v)
    if pairing == 0.0:
        raise NotTransverse("line lies in the hyperplane")
    nv = _norm(v, gram)
    es = math.exp(h.tau)
    v_leg = v * (es / nv)
    a_leg = alpha * (nv / (es * pairing))
    a_leg = a_leg / float(a_leg @ v_leg)  # polish the slice constraint
    return FlowPoint(v_leg, a_leg)


def hbi_cocycle(g: Matrix, ell: ProjPoint, h: ProjHyperplane,
                gram: np.ndarray | None = None) -> float:
    """Log-norm cocycle log(|g v| / |v|) governing the action in Hopf coordinates."""
    if transversality_margin(ell, h) == 0.0:
        raise NotTransverse("cocycle is defined on transverse pairs")
    v = ell.rep
    return math.log(_norm(g.a @ v, gram) / _norm(v, gram))


def project_base(x: FlowPoint) -> tuple[ProjPoint, ProjHyperplane]:
    """Fiber projection ([v], [alpha]); constant along flow lines."""
    return ProjPoint(x.v), ProjHyperplane(x.alpha)


def _norm(v: np.ndarray, gram: np.ndarray | None) -> float:
    if gram is None:
        return float(np.linalg.norm(v))
    return math.sqrt(float(v @ gram @ v))
