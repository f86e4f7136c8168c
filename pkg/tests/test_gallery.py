import math

import numpy as np
import pytest

from anosovlab import gallery as ga
from anosovlab.errors import (DegenerateSpan, NotInterior, NotIsotropic,
                              PingPongFailure)
from anosovlab.flowspace import distance, flow
from anosovlab.groups import enumerate_ball
from anosovlab.projlinalg import Matrix, ProjPoint, eigen_decompose


# --- Schottky certification ---------------------------------------------------

def test_schottky_certificate(schottky):
    assert schottky.certificate.margin > 0.0
    assert len(schottky.certificate.arcs) == 2


def test_schottky_negative_control():
    with pytest.raises(PingPongFailure):
        ga.schottky_sl2(1.01, 0.01)


def test_schottky_single_generator():
    cert = ga.schottky_sl2(3.0, angle=None)
    assert cert.gens.rank == 1
    assert cert.certificate.margin > 0.0


# --- symmetric powers ----------------------------------------------------------

def test_symmetric_power_identity_functor(schottky):
    lifted = ga.symmetric_power(schottky.gens, 2)
    for a, b in zip(lifted.mats, schottky.gens.mats):
        assert np.allclose(a.a, b.a, atol=1e-12)


def test_symmetric_power_diagonal():
    out = ga.symmetric_power_matrix(np.diag([2.0, 0.5]), 3)
    assert np.allclose(out, np.diag([4.0, 1.0, 0.25]), atol=1e-12)


def test_symmetric_power_spectrum(rng):
    for _ in range(10):
        m = rng.normal(size=(2, 2))
        if np.linalg.det(m) <= 0.05:
            continue
        g = Matrix(m)
        a = float(eigen_decompose(g).lam[0])
        lifted = Matrix(ga.symmetric_power_matrix(g.a, 4))
        lam = eigen_decompose(lifted).lam
        assert np.allclose(lam, [3 * a, a, -a, -3 * a], atol=1e-8)


def test_barbot_block_is_reducible(schottky, barbot):
    # the coordinate plane stays invariant; spectra are that of the SL(2)
    # element padded with a unit eigenvalue
    for g, g0 in zip(barbot.mats, schottky.gens.mats):
        assert np.allclose(g.a[2, :2], 0.0)
        lam = eigen_decompose(g).lam
        a = float(eigen_decompose(g0).lam[0])
        assert np.allclose(lam, [a, 0.0, -a], atol=1e-10)


# --- pseudo-hyperbolic flow ------------------------------------------------------

@pytest.fixture(scope="module")
def form():
    return ga.MinkowskiForm(2, 1)


def _random_spacelike(form, rng):
    while True:
        x = rng.normal(size=form.dim)
        if form.pair(x, x) >= -0.1:
            continue
        v = rng.normal(size=form.dim)
        try:
            return ga.make_spacelike(form, x, v)
        except ValueError:
            continue


def test_minkowski_signature(form):
    eig = np.linalg.eigvalsh(form.gram)
    assert int(np.sum(eig > 0)) == form.p
    assert int(np.sum(eig < 0)) == form.q + 1


def test_hpq_flow_examples(form, rng):
    xv = _random_spacelike(form, rng)
    assert ga.spacelike_constraint_residual(form, xv) <= 1e-12
    same = ga.hpq_flow(form, xv, 0.0)
    assert np.allclose(same.x, xv.x) and np.allclose(same.v, xv.v)
    a = ga.hpq_flow(form, ga.hpq_flow(form, xv, 0.7), -1.9)
    b = ga.hpq_flow(form, xv, -1.2)
    assert max(np.max(np.abs(a.x - b.x)), np.max(np.abs(a.v - b.v))) <= 1e-12
    assert ga.spacelike_constraint_residual(form, ga.hpq_flow(form, xv, 3.0)) <= 1e-10


def test_hpq_flow_fixes_endpoints(form, rng):
    xv = _random_spacelike(form, rng)
    plus = ProjPoint(xv.x + xv.v)
    for t in (0.5, 2.0, 5.0):
        moved = ga.hpq_flow(form, xv, t)
        assert min(np.max(np.abs(ProjPoint(moved.x + moved.v).rep - plus.rep)),
                   np.max(np.abs(ProjPoint(moved.x + moved.v).rep + plus.rep))) <= 1e-12


def test_phi_partial_round_trip(form, rng):
    worst = 0.0
    for _ in range(1000):
        xv = _random_spacelike(form, rng)
        back = ga.phi_partial_inv(form, ga.phi_partial(form, xv))
        worst = max(worst, float(np.max(np.abs(back.x - xv.x))),
                    float(np.max(np.abs(back.v - xv.v))))
    assert worst <= 1e-10


def test_phi_partial_intertwines(form, rng):
    worst = 0.0
    for _ in range(200):
        xv = _random_spacelike(form, rng)
        for t in (-5.0, -1.0, -0.1, 0.1, 1.0, 5.0):
            lhs = ga.phi_partial(form, ga.hpq_flow(form, xv, t))
            rhs = flow(ga.phi_partial(form, xv), t)
            worst = max(worst, distance(lhs, rhs))
    assert worst <= 1e-10


def test_phi_partial_inv_rejects_non_isotropic(form):
    from anosovlab.flowspace import make_point
    fp = make_point(np.array([1.0, 0, 0, 0.5]), np.array([1.0, 0, 0, 0.0]))
    with pytest.raises(NotIsotropic):
        ga.phi_partial_inv(form, fp)


def test_literal_duality_sign_is_inconsistent(form, rng):
    # with the unflipped pairing the boundary image pairs negatively, which
    # the flow space rejects; the flipped default is the consistent one
    from anosovlab.errors import NotInL
    literal = ga.MinkowskiForm(form.p, form.q, flip_duality=False)
    xv = _random_spacelike(literal, rng)
    with pytest.raises(NotInL):
        ga.phi_partial(literal, xv)


# --- negative triples -------------------------------------------------------------

def test_negative_triple_constructed(form):
    # three timelike-ish lines inside the (2,1) block of coordinates 0,1,3
    l1 = ProjPoint([0.2, 0.1, 0.0, 1.0])
    l2 = ProjPoint([-0.3, 0.2, 0.0, 1.0])
    l3 = ProjPoint([0.1, -0.25, 0.0, 1.0])
    assert ga.negative_triple(form, l1, l2, l3)


def test_positive_span_is_not_negative():
    form = ga.MinkowskiForm(3, 1)
    l1, l2, l3 = (ProjPoint(np.eye(5)[i]) for i in range(3))
    assert not ga.negative_triple(form, l1, l2, l3)


def test_negative_triple_degenerate(form):
    l1 = ProjPoint([1.0, 0.0, 0.0, 1.0])
    with pytest.raises(DegenerateSpan):
        ga.negative_triple(form, l1, l1, ProjPoint([0.0, 1.0, 0.0, 0.0]))


def test_negative_triple_signature_oracle(form, rng):
    agree = 0
    total = 0
    for _ in range(2000):
        pts = [ProjPoint(rng.normal(size=4)) for _ in range(3)]
        try:
            val = ga.negative_triple(form, *pts)
        except DegenerateSpan:
            continue
        b = np.stack([p.rep for p in pts])
        eig = np.linalg.eigvalsh(b @ form.gram @ b.T)
        total += 1
        agree += int(val == (int(np.sum(eig > 0)) == 2))
    assert total > 1800 and agree == total


def test_negative_triple_orthogonal_invariance(form, rng):
    # invariance under the isometries of the form
    def random_isometry():
        a = rng.normal(size=(4, 4))
        g = form.gram
        # Gram-Schmidt in the indefinite metric, restarted on null pivots
        cols = []
        signs = [1.0, 1.0, -1.0, -1.0]
        i = 0
        while len(cols) < 4:
            w = a[:, i % 4] + rng.normal(size=4) * 0.1
            i += 1
            for c, s in zip(cols, signs):
                w = w - s * float(c @ g @ w) * c
            q = float(w @ g @ w)
            if abs(q) < 1e-6 or (q > 0) != (signs[len(cols)] > 0):
                continue
            cols.append(w / math.sqrt(abs(q)))
        return np.stack(cols, axis=1)

    for _ in range(50):
        iso = random_isometry()
        pts = [ProjPoint(rng.normal(size=4)) for _ in range(3)]
        try:
            base = ga.negative_triple(form, *pts)
            moved = ga.negative_triple(form, *[ProjPoint(iso @ p.rep) for p in pts])
        except DegenerateSpan:
            continue
        assert base == moved


# --- Hilbert geometry ---------------------------------------------------------------

@pytest.fixture(scope="module")
def ball3():
    return ga.klein_ball(3)


def test_hilbert_distance_examples(ball3):
    center = ProjPoint([1.0, 0.0, 0.0])
    assert ga.hilbert_distance(ball3, center, center) == 0.0
    y = ProjPoint([1.0, 0.5, 0.0])
    assert ga.hilbert_distance(ball3, center, y) == pytest.approx(0.5 * math.log(3.0),
                                                                  abs=1e-12)
    with pytest.raises(NotInterior):
        ga.hilbert_distance(ball3, center, ProjPoint([1.0, 2.0, 0.0]))


def test_hilbert_matches_hyperbolic_ball_metric(ball3, rng):
    for _ in range(200):
        y = rng.normal(size=2)
        y *= rng.uniform(0.01, 0.95) / np.linalg.norm(y)
        x = ProjPoint(np.concatenate([[1.0], y]))
        target = math.atanh(float(np.linalg.norm(y)))
        center = ProjPoint([1.0, 0.0, 0.0])
        assert abs(ga.hilbert_distance(ball3, center, x) - target) <= 1e-10


def test_hilbert_symmetry_and_triangle(ball3, rng):
    pts = []
    for _ in range(3):
        y = rng.normal(size=2)
        y *= rng.uniform(0.05, 0.9) / np.linalg.norm(y)
        pts.append(ProjPoint(np.concatenate([[1.0], y])))
    a, b, c = pts
    assert ga.hilbert_distance(ball3, a, b) == pytest.approx(
        ga.hilbert_distance(ball3, b, a), abs=1e-12)
    assert (ga.hilbert_distance(ball3, a, c)
            <= ga.hilbert_distance(ball3, a, b) + ga.hilbert_distance(ball3, b, c) + 1e-12)


def test_hilbert_lorentz_invariance(ball3, rng):
    t = 0.6
    boost = np.array([[math.cosh(t), math.sinh(t), 0.0],
                      [math.sinh(t), math.cosh(t), 0.0],
                      [0.0, 0.0, 1.0]])
    for _ in range(50):
        ys = [rng.normal(size=2) for _ in range(2)]
        pts = [ProjPoint(np.concatenate([[1.0], y * rng.uniform(0.05, 0.9) / np.linalg.norm(y)]))
               for y in ys]
        base = ga.hilbert_distance(ball3, *pts)
        moved = ga.hilbert_distance(ball3, ProjPoint(boost @ pts[0].rep),
                                    ProjPoint(boost @ pts[1].rep))
        assert moved == pytest.approx(base, abs=1e-10)


def test_bh_flow_examples(ball3, rng):
    x = ProjPoint([1.0, 0.2, -0.1])
    direction = np.array([0.0, 0.4, 0.3])
    p0, d0 = ga.bh_flow(ball3, x, direction, 0.0)
    assert np.max(np.abs(p0.rep - x.rep)) <= 1e-14
    pa, da = ga.bh_flow(ball3, x, direction, 0.4)
    pb, _ = ga.bh_flow(ball3, pa, da, 0.9)
    pc, _ = ga.bh_flow(ball3, x, direction, 1.3)
    assert np.max(np.abs(pb.rep - pc.rep)) <= 1e-10
    assert ga.hilbert_distance(ball3, x, pc) == pytest.approx(1.3, abs=1e-9)


def test_bh_flow_diameter_chord_artanh(ball3):
    center = ProjPoint([1.0, 0.0, 0.0])
    for t in (0.3, 1.0, 2.5):
        pt, _ = ga.bh_flow(ball3, center, np.array([0.0, 1.0, 0.0]), t)
        aff = pt.rep / pt.rep[0]
        assert aff[1] == pytest.approx(math.tanh(t), abs=1e-12)


# --- adjoint representation and the chord-flow conjugacy ------------------------------

def test_adjoint_identity():
    ad = ga.adjoint_rep(Matrix(np.eye(3)))
    assert np.allclose(ad.a, np.eye(8), atol=1e-12)


def test_adjoint_diagonal_spectrum():
    ad = ga.adjoint_rep(Matrix(np.diag([2.0, 0.5])))
    lam = eigen_decompose(ad).lam
    assert np.allclose(lam, [2 * math.log(2), 0.0, -2 * math.log(2)], atol=1e-10)


def _random_sl3(rng):
    while True:
        m = rng.normal(size=(3, 3)) + 2.5 * np.eye(3)
        if np.linalg.det(m) > 0.1:
            return Matrix(m)


def test_adjoint_homomorphism(rng):
    for _ in range(10):
        g, h = _random_sl3(rng), _random_sl3(rng)
        lhs = ga.adjoint_rep(Matrix(g.a @ h.a)).a
        rhs = ga.adjoint_rep(g).a @ ga.adjoint_rep(h).a
        assert np.max(np.abs(lhs - rhs)) <= 1e-9


def test_adjoint_top_exponent_identity(rng):
    for _ in range(40):
        g = _random_sl3(rng)
        lam = eigen_decompose(g).lam
        lam_ad = eigen_decompose(ga.adjoint_rep(g)).lam
        assert float(lam_ad[0]) == pytest.approx(float(lam[0] - lam[-1]), abs=1e-7)


def test_psi_trace_pairing_and_tangency(ball3, rng):
    x = ProjPoint([1.0, 0.1, 0.3])
    direction = np.array([0.0, -0.2, 0.5])
    fp = ga.psi_map(ball3, x, direction)
    assert abs(fp.pairing() - 1.0) <= 1e-12
    # tangency: each rank-one leg is traceless
    basis = ga.sl_basis(3)
    phi = np.einsum("k,kij->ij", fp.v, basis)
    assert abs(np.trace(phi)) <= 1e-12


def test_psi_conjugacy_with_time_doubling(ball3, rng):
    worst = 0.0
    for _ in range(200):
        y = rng.normal(size=2)
        y *= rng.uniform(0.05, 0.85) / np.linalg.norm(y)
        x = ProjPoint(np.concatenate([[1.0], y]))
        direction = np.concatenate([[0.0], rng.normal(size=2)])
        t = float(rng.uniform(-1.5, 1.5))
        worst = max(worst, ga.psi_conjugacy_residual(ball3, x, direction, t))
    assert worst <= 1e-9


def test_psi_wrong_time_scaling_fails(ball3):
    # the conjugacy doubles time; matching with the undoubled flow must fail
    x = ProjPoint([1.0, 0.2, 0.1])
    direction = np.array([0.0, 0.3, -0.4])
    t = 0.3
    pt, dd = ga.bh_flow(ball3, x, direction, t)
    lhs = ga.psi_map(ball3, pt, dd)
    rhs = flow(ga.psi_map(ball3, x, direction), t)
    assert distance(lhs, rhs) > 1e-3
