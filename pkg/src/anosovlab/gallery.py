"""Example geometries and cross-checks: certified Schottky pairs in
SL(2,R), symmetric-power lifts, the spacelike geodesic flow of signature
(p, q+1) with its boundary embedding into the flow space, negative
triples, Hilbert metric and chord flow on an ellipsoid, the adjoint
representation, and the time-doubling conjugacy onto the flow space of
the adjoint group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateChord, DegenerateSpan, NotInterior,
                     NotIsotropic, NotInL, PingPongFailure)
from .flowspace import FlowPoint, distance, flow, make_point
from .groups import GeneratorSet, generator_set
from .projlinalg import Matrix, ProjHyperplane, ProjPoint

ISO_TOL = 1e-10


# ---------------------------------------------------------------------------
# Schottky pairs on the projective line

def _rp1_angle(w: np.ndarray) -> float:
    """Angle in [0, pi) of the line through w in R^2."""
    theta = math.atan2(w[1], w[0])
    return theta % math.pi


def _circ_dist(a: float, b: float) -> float:
    d = abs(a - b) % math.pi
    return min(d, math.pi - d)


@dataclass(frozen=True)
class Arc:
    """Closed arc of RP^1: center and halfwidth, angles mod pi."""

    center: float
    halfwidth: float

    def contains_angle(self, theta: float) -> bool:
        return _circ_dist(theta, self.center) <= self.halfwidth + 1e-13

    def contains_arc(self, other: "Arc") -> bool:
        return _circ_dist(other.center, self.center) + other.halfwidth <= self.halfwidth + 1e-13

    def complement(self) -> "Arc":
        return Arc((self.center + math.pi / 2) % math.pi, math.pi / 2 - self.halfwidth)


def _image_arc(m: np.ndarray, arc: Arc) -> Arc:
    """Image of an arc under an orientation-preserving projective map."""
    lo = arc.center - arc.halfwidth
    hi = arc.center + arc.halfwidth
    a = _rp1_angle(m @ np.array([math.cos(lo), math.sin(lo)]))
    b = _rp1_angle(m @ np.array([math.cos(hi), math.sin(hi)]))
    mid = _rp1_angle(m @ np.array([math.cos(arc.center), math.sin(arc.center)]))
    width = (b - a) % math.pi
    cand = Arc(center=(a + width / 2) % math.pi, halfwidth=width / 2)
    if cand.contains_angle(mid):
        return cand
    return Arc(center=(a + width / 2 + math.pi / 2) % math.pi,
               halfwidth=(math.pi - width) / 2)


@dataclass(frozen=True)
class PingPongCertificate:
    """Per generator: (attracting arc, repelling arc); margin is the
    smallest slack in the verified containments."""

    arcs: tuple[tuple[Arc, Arc], ...]
    margin: float


@dataclass(frozen=True)
class CertifiedSchottky:
    gens: GeneratorSet
    certificate: PingPongCertificate


def _fixed_angles(m: np.ndarray) -> tuple[float, float]:
    """(attracting, repelling) fixed angles of a hyperbolic SL(2) matrix."""
    eigvals, eigvecs = np.linalg.eig(m)
    if np.any(np.abs(eigvals.imag) > 1e-12) or abs(abs(eigvals[0]) - abs(eigvals[1])) < 1e-12:
        raise PingPongFailure("generator is not hyperbolic on the projective line")
    idx = int(np.argmax(np.abs(eigvals.real)))
    att = _rp1_angle(eigvecs[:, idx].real)
    rep = _rp1_angle(eigvecs[:, 1 - idx].real)
    return att, rep


def certify_ping_pong(gens: GeneratorSet) -> PingPongCertificate:
    """Search disjoint fixed-point arcs whose images nest correctly.

    For each generator, the complement of its repelling arc must map into
    its attracting arc (and dually for the inverse). Radii are tried on a
    shrinking grid; failure reports the first offending containment.
    """
    mats = [g.a for g in gens.mats]
    fixed = [_fixed_angles(m) for m in mats]
    points = [theta for pair in fixed for theta in pair]
    if len(points) > 1:
        min_sep = min(_circ_dist(a, b)
                      for i, a in enumerate(points) for b in points[:i])
    else:
        min_sep = math.pi / 2
    if min_sep < 1e-8:
        raise PingPongFailure("fixed points of the generators are not distinct")
    last_failure = None
    for shrink in (0.45, 0.35, 0.25, 0.15, 0.08, 0.04):
        r = min_sep * shrink
        arcs = [(Arc(att, r), Arc(rep, r)) for att, rep in fixed]
        margin = math.inf
        ok = True
        for i, (m, (a_arc, r_arc)) in enumerate(zip(mats, arcs)):
            for mat, src, dst in ((m, r_arc, a_arc), (np.linalg.inv(m), a_arc, r_arc)):
                img = _image_arc(mat, src.complement())
                slack = dst.halfwidth - (_circ_dist(img.center, dst.center) + img.halfwidth)
                if slack < 0.0:
                    ok = False
                    last_failure = (gens.labels[i], img, dst)
                    break
                margin = min(margin, slack)
            if not ok:
                break
        if ok:
            return PingPongCertificate(arcs=tuple(arcs), margin=margin)
    label, img, dst = last_failure
    raise PingPongFailure(
        f"generator {label!r}: image arc {img} is not inside {dst} at any tried radius")


def schottky_sl2(stretch: float, angle: float | None = math.pi / 4,
                 labels=("a", "b")) -> CertifiedSchottky:
    """Standard certified Schottky data: a diagonal stretch and, unless
    angle is None, its conjugate by a rotation."""
    g1 = np.diag([stretch, 1.0 / stretch])
    mats = [g1]
    if angle is not None:
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        mats.append(rot @ g1 @ rot.T)
    gens = generator_set(labels[:len(mats)], mats)
    return CertifiedSchottky(gens=gens, certificate=certify_ping_pong(gens))


# ---------------------------------------------------------------------------
# Symmetric powers

def _sym_basis_exponents(d: int) -> list[int]:
    return list(range(d - 1, -1, -1))


def symmetric_power_matrix(m: np.ndarray, d: int) -> np.ndarray:
    """Matrix of the degree-(d-1) symmetric power of a 2x2 matrix, in the
    monomial basis e1^(d-1), e1^(d-2) e2, ..., e2^(d-1)."""
    n = d - 1
    a, b = m[0, 0], m[0, 1]
    c, e = m[1, 0], m[1, 1]
    out = np.zeros((d, d))
    # column j is the expansion of (a e1 + c e2)^(n-j) (b e1 + e e2)^j
    for j in range(d):
        poly = np.zeros(d)
        poly[0] = 1.0  # coefficients in e1^(n-i) e2^i
        # multiply by (a e1 + c e2) (n - j) times, then (b e1 + e e2) j times
        for _ in range(n - j):
            nxt = np.zeros(d)
            nxt[:d] += a * poly
            nxt[1:] += c * poly[:-1]
            poly = nxt
        for _ in range(j):
            nxt = np.zeros(d)
            nxt[:d] += b * poly
            nxt[1:] += e * poly[:-1]
            poly = nxt
        out[:, j] = poly
    return out


def symmetric_power(gens: GeneratorSet, d: int) -> GeneratorSet:
    """Irreducible lift of an SL(2) generator set into dimension d."""
    if gens.dim != 2:
        raise ValueError("symmetric power lift starts from 2x2 generators")
    if d < 2:
        raise ValueError("target dimension must be >= 2")
    mats = [symmetric_power_matrix(g.a, d) for g in gens.mats]
    return generator_set(gens.labels, mats, presentation=gens.presentation)


def barbot_block(gens: GeneratorSet, shears=((0.3, -0.2), (-0.1, 0.4))) -> GeneratorSet:
    """Reducible block-triangular embedding of SL(2) generators into SL(3).

    Each generator becomes [[A, b], [0, 1]] with a fixed shear column b;
    the plane spanned by the first two coordinates stays invariant, so the
    image is a reducible negative control for the irreducibility probes.
    """
    if gens.dim != 2:
        raise ValueError("block embedding starts from 2x2 generators")
    mats = []
    for g, shear in zip(gens.mats, shears):
        m = np.eye(3)
        m[:2, :2] = g.a
        m[:2, 2] = shear
        mats.append(m)
    return generator_set(gens.labels, mats, presentation=gens.presentation)


# ---------------------------------------------------------------------------
# Pseudo-hyperbolic geometry

@dataclass(frozen=True)
class MinkowskiForm:
    """Bilinear form of signature (p, q+1): diag(+1 x p, -1 x (q+1)).

    flip_duality selects the sign used when a second vector leg is turned
    into a flow-space covector. With the literal form the image of the
    boundary embedding pairs negatively, so the flipped sign (default) is
    the internally consistent choice.
    """

    p: int
    q: int
    flip_duality: bool = True

    @property
    def dim(self) -> int:
        return self.p + self.q + 1

    @property
    def gram(self) -> np.ndarray:
        g = np.ones(self.dim)
        g[self.p:] = -1.0
        return np.diag(g)

    def pair(self, x, y) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return float(np.sum(x[:self.p] * y[:self.p]) - np.sum(x[self.p:] * y[self.p:]))

    def dual_covector(self, w) -> np.ndarray:
        """Covector <w, .> with the configured duality sign."""
        alpha = self.gram @ np.asarray(w, dtype=float)
        return -alpha if self.flip_duality else alpha

    def dual_vector(self, alpha) -> np.ndarray:
        """Inverse of dual_covector."""
        w = np.linalg.solve(self.gram, np.asarray(alpha, dtype=float))
        return -w if self.flip_duality else w


@dataclass(frozen=True)
class SpacelikeTangent:
    """Unit spacelike tangent: <x,x> = -1, <x,v> = 0, <v,v> = 1."""

    x: np.ndarray
    v: np.ndarray

    def __init__(self, x, v):
        x = np.array(x, dtype=float)
        v = np.array(v, dtype=float)
        concat = np.concatenate([x, v])
        nz = concat[np.abs(concat) > 1e-300]
        if nz.size and nz[0] < 0.0:
            x, v = -x, -v
        x.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)


def make_spacelike(form: MinkowskiForm, x, v) -> SpacelikeTangent:
    """Normalize a (timelike base, spacelike direction) pair onto the
    constraint set; raises when the causal types are wrong."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    xx = form.pair(x, x)
    if xx >= 0.0:
        raise ValueError("base point must be timelike")
    x = x / math.sqrt(-xx)
    v = v - form.pair(x, v) / form.pair(x, x) * x
    vv = form.pair(v, v)
    if vv <= 0.0:
        raise ValueError("direction must be spacelike after projection")
    v = v / math.sqrt(vv)
    return SpacelikeTangent(x, v)


def spacelike_constraint_residual(form: MinkowskiForm, xv: SpacelikeTangent) -> float:
    return max(abs(form.pair(xv.x, xv.x) + 1.0),
               abs(form.pair(xv.x, xv.v)),
               abs(form.pair(xv.v, xv.v) - 1.0))


def hpq_flow(form: MinkowskiForm, xv: SpacelikeTangent, t: float) -> SpacelikeTangent:
    """Spacelike geodesic flow: (x, v) -> (cosh t x + sinh t v, sinh t x + cosh t v)."""
    ch, sh = math.cosh(t), math.sinh(t)
    return SpacelikeTangent(ch * xv.x + sh * xv.v, sh * xv.x + ch * xv.v)


def phi_partial(form: MinkowskiForm, xv: SpacelikeTangent) -> FlowPoint:
    """Boundary embedding (x, v) -> [x+v : x-v], landing in the flow space
    via the configured duality; intertwines the geodesic flow with phi_t."""
    v1 = xv.x + xv.v
    alpha = form.dual_covector(xv.x - xv.v)
    return make_point(v1, alpha)


def phi_partial_inv(form: MinkowskiForm, fp: FlowPoint) -> SpacelikeTangent:
    """Inverse of the boundary embedding, on pairing-normalized quadric
    representatives; both projective legs must be isotropic."""
    v1 = fp.v
    v2 = form.dual_vector(fp.alpha)
    n1 = float(np.linalg.norm(v1)) ** 2
    n2 = float(np.linalg.norm(v2)) ** 2
    if abs(form.pair(v1, v1)) > ISO_TOL * n1 or abs(form.pair(v2, v2)) > ISO_TOL * n2:
        raise NotIsotropic("projective legs are not on the light cone")
    x = (v1 + v2) / math.sqrt(2.0)
    v = (v1 - v2) / math.sqrt(2.0)
    return SpacelikeTangent(x, v)


def negative_triple(form: MinkowskiForm, l1: ProjPoint, l2: ProjPoint,
                    l3: ProjPoint) -> bool:
    """True when the triple lies in a common hyperbolic plane: the span is
    3-dimensional and the restricted form has signature (2, 1)."""
    b = np.stack([l1.rep, l2.rep, l3.rep])
    s = np.linalg.svd(b, compute_uv=False)
    if s[2] < 1e-10 * s[0]:
        raise DegenerateSpan("representatives do not span a 3-space")
    gram3 = b @ form.gram @ b.T
    eig = np.linalg.eigvalsh(gram3)
    tol = 1e-10 * max(1.0, float(np.max(np.abs(eig))))
    if np.any(np.abs(eig) <= tol):
        raise DegenerateSpan("form degenerates on the span")
    pos = int(np.sum(eig > tol))
    return pos == 2


# ---------------------------------------------------------------------------
# Hilbert geometry on an ellipsoid

@dataclass(frozen=True)
class ConvexBody:
    """Desk-scale strictly convex body: an ellipsoid {<w, S w> < 0} for a
    symmetric form S of signature (d-1, 1), with a fixed affine patch."""

    form: np.ndarray
    patch: np.ndarray

    @property
    def dim(self) -> int:
        return self.form.shape[0]

    def quad(self, w) -> float:
        w = np.asarray(w, dtype=float)
        return float(w @ self.form @ w)

    def affine_rep(self, x: ProjPoint) -> np.ndarray:
        denom = float(self.patch @ x.rep)
        if denom == 0.0:
            raise NotInterior("point is on the patch hyperplane at infinity")
        return x.rep / denom

    def require_interior(self, x: ProjPoint) -> np.ndarray:
        w = self.affine_rep(x)
        if not self.quad(w) < 0.0:
            raise NotInterior("point is not inside the body")
        return w

    def boundary_pair(self, b: ProjPoint) -> tuple[ProjPoint, ProjHyperplane]:
        """Boundary point with its tangent hyperplane ker <S b, .>."""
        if abs(self.quad(b.rep)) > ISO_TOL:
            raise NotIsotropic("not a boundary point")
        return b, ProjHyperplane(self.form @ b.rep)


def klein_ball(d: int) -> ConvexBody:
    """The round ball in the affine patch x_0 = 1 of d-dimensional
    projective coordinates."""
    s = np.eye(d)
    s[0, 0] = -1.0
    patch = np.zeros(d)
    patch[0] = 1.0
    return ConvexBody(form=s, patch=patch)


def _chord_roots(c: ConvexBody, x_aff: np.ndarray, direction: np.ndarray) -> tuple[float, float]:
    """Roots s- < 0 < s+ of the boundary quadratic along x + s * direction."""
    a = float(direction @ c.form @ direction)
    b = 2.0 * float(x_aff @ c.form @ direction)
    cc = float(x_aff @ c.form @ x_aff)
    if a <= 0.0:
        raise DegenerateChord("direction does not leave the body")
    disc = b * b - 4.0 * a * cc
    if disc <= 0.0:
        raise DegenerateChord("chord does not meet the boundary twice")
    rt = math.sqrt(disc)
    s1 = (-b - rt) / (2.0 * a)
    s2 = (-b + rt) / (2.0 * a)
    return s1, s2


def hilbert_distance(c: ConvexBody, x: ProjPoint, y: ProjPoint) -> float:
    """Half the log of the boundary cross-ratio along the chord through x, y."""
    xa = c.require_interior(x)
    ya = c.require_interior(y)
    direction = ya - xa
    if float(np.linalg.norm(direction)) < 1e-15:
        return 0.0
    s_minus, s_plus = _chord_roots(c, xa, direction)
    # parameters: boundary at s_minus, x at 0, y at 1, boundary at s_plus
    cr = ((s_minus - 1.0) / s_minus) * (s_plus / (s_plus - 1.0))
    return 0.5 * math.log(cr)


def bh_flow(c: ConvexBody, x: ProjPoint, ray_dir, t: float) -> tuple[ProjPoint, np.ndarray]:
    """Unit-speed chord flow of the Hilbert metric.

    The position on the chord follows the logistic law
    sigma/(1-sigma) = e^{2t} sigma_0/(1-sigma_0) in the normalized chord
    parameter; the direction is carried along the chord unchanged.
    """
    ray_dir = np.asarray(ray_dir, dtype=float)
    if float(np.linalg.norm(ray_dir)) == 0.0:
        raise DegenerateChord("zero ray direction")
    xa = c.require_interior(x)
    direction = ray_dir - float(c.patch @ ray_dir) * xa  # affine component
    s_minus, s_plus = _chord_roots(c, xa, direction)
    a0 = -s_minus / s_plus
    at = a0 * math.exp(2.0 * t)
    s = (s_minus + s_plus * at) / (1.0 + at)
    return ProjPoint(xa + s * direction), direction


# ---------------------------------------------------------------------------
# Adjoint representation and the chord-flow conjugacy

def sl_basis(d: int) -> np.ndarray:
    """Frobenius-orthonormal basis of traceless d x d matrices, stacked
    (d^2-1, d, d): off-diagonal E_ij then normalized diagonal differences."""
    out = []
    for i in range(d):
        for j in range(d):
            if i != j:
                b = np.zeros((d, d))
                b[i, j] = 1.0
                out.append(b)
    for k in range(1, d):
        b = np.zeros((d, d))
        b[np.diag_indices(d)] = [1.0] * k + [-float(k)] + [0.0] * (d - k - 1)
        out.append(b / math.sqrt(k * (k + 1)))
    return np.stack(out)


def sl_coords(basis: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Coordinates of a traceless matrix in the orthonormal basis."""
    return np.einsum("kij,ij->k", basis, m)


def sl_covector_coords(basis: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Coefficients of the covector Tr(psi o .) in the dual basis."""
    return np.einsum("ij,kji->k", psi, basis)


def adjoint_rep(g: Matrix) -> Matrix:
    """Matrix of X -> g X g^-1 on the traceless basis; its top log-modulus
    is lambda_1(g) - lambda_d(g)."""
    d = g.dim
    basis = sl_basis(d)
    imgs = np.einsum("ij,kjl,lm->kim", g.a, basis, g.inv)
    # column m holds the basis coordinates of the image of basis element m
    ad = np.einsum("kij,mij->km", basis, imgs)
    return Matrix(ad)


def adjoint_generators(gens: GeneratorSet) -> GeneratorSet:
    return generator_set(gens.labels, [adjoint_rep(m).a for m in gens.mats],
                         presentation=gens.presentation)


def psi_map(c: ConvexBody, x: ProjPoint, ray_dir) -> FlowPoint:
    """Conjugacy from chord-flow data to the adjoint flow space.

    Built from the chord endpoints and their tangent covectors as the pair
    of rank-one traceless matrices

        (alpha-(x)/alpha+(x)) (v+ (x) alpha+) / alpha-(v+)   and its mirror,

    which pair to trace exactly 1.
    """
    ray_dir = np.asarray(ray_dir, dtype=float)
    xa = c.require_interior(x)
    direction = ray_dir - float(c.patch @ ray_dir) * xa
    if float(np.linalg.norm(direction)) == 0.0:
        raise DegenerateChord("zero ray direction")
    s_minus, s_plus = _chord_roots(c, xa, direction)
    v_plus = xa + s_plus * direction
    v_minus = xa + s_minus * direction
    a_plus = c.form @ v_plus
    a_minus = c.form @ v_minus
    ap_x = float(a_plus @ xa)
    am_x = float(a_minus @ xa)
    am_vp = float(a_minus @ v_plus)
    ap_vm = float(a_plus @ v_minus)
    if min(abs(ap_x), abs(am_x), abs(am_vp), abs(ap_vm)) < 1e-14:
        raise DegenerateChord("degenerate endpoint/tangent pairing")
    phi = (am_x / ap_x) / am_vp * np.outer(v_plus, a_plus)
    psi = (ap_x / am_x) / ap_vm * np.outer(v_minus, a_minus)
    d = c.dim
    basis = sl_basis(d)
    return make_point(sl_coords(basis, phi), sl_covector_coords(basis, psi))


def psi_conjugacy_residual(c: ConvexBody, x: ProjPoint, ray_dir, t: float) -> float:
    """Distance between psi after the chord flow by t and the flow-space
    translation by 2t of psi; the time-doubling conjugacy check."""
    pt, direction = bh_flow(c, x, ray_dir, t)
    lhs = psi_map(c, pt, direction)
    rhs = flow(psi_map(c, x, ray_dir), 2.0 * t)
    return distance(lhs, rhs)
