import math

import numpy as np
import pytest

from anosovlab.errors import BaseMismatch, NotInL, NotTransverse
from anosovlab.flowspace import (FlowPoint, HopfCoord, TangentVector, act,
                                 act_tangent, contact_form, distance, flow,
                                 flow_tangent, hbi_cocycle, hopf, hopf_inv,
                                 make_point, project_base, pseudo_metric)
from anosovlab.projlinalg import Matrix, ProjHyperplane, ProjPoint

from conftest import random_flow_point

E1 = np.array([1.0, 0.0])
E2 = np.array([0.0, 1.0])


def test_make_point_examples():
    x = make_point(E1, E1)
    assert np.array_equal(x.v, E1) and np.array_equal(x.alpha, E1)
    y = make_point(2 * E1, E1)
    assert np.allclose(y.v, math.sqrt(2) * E1, atol=1e-15)
    assert np.allclose(y.alpha, E1 / math.sqrt(2), atol=1e-15)
    with pytest.raises(NotInL):
        make_point(E1, -E1)


def test_quadric_invariant_after_flow_and_act(rng):
    g = Matrix(np.array([[2.0, 1.0], [1.0, 1.0]]))
    x = random_flow_point(rng, 2)
    for _ in range(25):
        x = flow(x, float(rng.normal()))
        x = act(g if rng.random() < 0.5 else g.inverse(), x)
        # the pairing evaluation itself rounds at |v||alpha| ulps, so the
        # slice defect is measured against that conditioning floor
        floor = 64 * np.finfo(float).eps * np.linalg.norm(x.v) * np.linalg.norm(x.alpha)
        assert abs(x.pairing() - 1.0) <= max(1e-12, floor)


def test_flow_identity_and_group_law(rng):
    x = random_flow_point(rng, 3)
    assert distance(flow(x, 0.0), x) == 0.0
    for _ in range(10):
        s, t = rng.normal(size=2)
        assert distance(flow(flow(x, s), t), flow(x, s + t)) <= 1e-12


def test_act_examples(rng):
    x = random_flow_point(rng, 2)
    g = Matrix(np.array([[1.0, 2.0], [0.5, 2.0]]))
    assert distance(act(Matrix(np.eye(2)), x), x) <= 1e-15
    assert distance(act(g, act(g.inverse(), x)), x) <= 1e-12
    # diagonal action on the fixed point equals flow by log 2
    x0 = make_point(E1, E1)
    d = Matrix(np.diag([2.0, 0.5]))
    assert distance(act(d, x0), flow(x0, math.log(2))) <= 1e-15


def test_act_flow_commute(rng):
    g = Matrix(np.array([[3.0, 1.0], [2.0, 1.0]]))
    for _ in range(10):
        x = random_flow_point(rng, 2)
        t = float(rng.normal())
        assert distance(act(g, flow(x, t)), flow(act(g, x), t)) <= 1e-10


def test_hopf_examples():
    x = make_point(E1, E1)
    h = hopf(x)
    assert h.tau == 0.0
    assert projective_equal(h.ell.rep, E1)
    y = FlowPoint(math.sqrt(2) * E1, E1 / math.sqrt(2))
    assert hopf(y).tau == pytest.approx(0.5 * math.log(2), abs=1e-14)


def projective_equal(a, b):
    return min(np.max(np.abs(a - b)), np.max(np.abs(a + b))) <= 1e-14


def test_hopf_round_trip(rng):
    worst = 0.0
    for _ in range(1000):
        x = random_flow_point(rng, 3)
        worst = max(worst, distance(hopf_inv(hopf(x)), x))
    assert worst <= 1e-12


def test_hopf_conjugates_flow_to_translation(rng):
    for _ in range(50):
        x = random_flow_point(rng, 3)
        t = float(rng.normal())
        hx, hxt = hopf(x), hopf(flow(x, t))
        assert hxt.tau - hx.tau == pytest.approx(t, abs=1e-12)
        assert projective_equal(hx.ell.rep, hxt.ell.rep)
        assert projective_equal(hx.h.rep, hxt.h.rep)


def test_hopf_inv_not_transverse():
    with pytest.raises(NotTransverse):
        hopf_inv(HopfCoord(ProjPoint(E1), ProjHyperplane(E2), 0.0))


def test_hbi_examples(rng):
    assert hbi_cocycle(Matrix(np.eye(2)), ProjPoint(E1), ProjHyperplane(E1)) == 0.0
    d = Matrix(np.diag([2.0, 0.5]))
    assert hbi_cocycle(d, ProjPoint(E1), ProjHyperplane(E1)) == pytest.approx(math.log(2))
    # cocycle identity over random data
    for _ in range(30):
        g = Matrix(rng.normal(size=(3, 3)) + 4 * np.eye(3))
        h = Matrix(rng.normal(size=(3, 3)) + 4 * np.eye(3))
        x = random_flow_point(rng, 3)
        ell, hyp = project_base(x)
        ell_h = ProjPoint(h.a @ ell.rep)
        hyp_h = ProjHyperplane(hyp.rep @ h.inv)
        lhs = hbi_cocycle(Matrix(g.a @ h.a), ell, hyp)
        rhs = hbi_cocycle(g, ell_h, hyp_h) + hbi_cocycle(h, ell, hyp)
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_hbi_governs_hopf_action(rng):
    g = Matrix(np.array([[2.0, 1.0, 0.0], [1.0, 1.0, 0.5], [0.0, 0.5, 2.0]]))
    for _ in range(20):
        x = random_flow_point(rng, 3)
        ell, hyp = project_base(x)
        assert (hopf(act(g, x)).tau
                == pytest.approx(hopf(x).tau + hbi_cocycle(g, ell, hyp), abs=1e-10))


def test_tangent_split_and_contact():
    x = make_point(E1, E1)
    reeb = TangentVector(x, x.v, -x.alpha)
    assert contact_form(reeb) == pytest.approx(1.0, abs=1e-14)
    u = TangentVector(x, E2, np.zeros(2))
    assert contact_form(u) == 0.0
    assert np.allclose(u.u_part, E2) and u.c_part == 0.0


def test_pseudo_metric_example():
    e1 = np.array([1.0, 0.0, 0.0])
    e2 = np.array([0.0, 1.0, 0.0])
    x = make_point(e1, e1)
    u1 = TangentVector(x, e2, np.zeros(3))
    u2 = TangentVector(x, np.zeros(3), e2)
    assert pseudo_metric(u1, u2) == pytest.approx(1.0, abs=1e-14)
    assert pseudo_metric(u1, u1) == 0.0  # pure unstable pair


def test_pseudo_metric_base_mismatch(rng):
    x = random_flow_point(rng, 3)
    y = flow(x, 1.0)
    u = TangentVector(x, x.v, -x.alpha)
    w = TangentVector(y, y.v, -y.alpha)
    with pytest.raises(BaseMismatch):
        pseudo_metric(u, w)


def _random_tangent(rng, x):
    w = rng.normal(size=x.dim)
    beta = rng.normal(size=x.dim)
    # project onto the tangency constraint alpha(w) + beta(v) = 0,
    # using alpha(v) = 1 on the quadric slice
    defect = float(x.alpha @ w + beta @ x.v)
    beta = beta - defect * x.alpha
    return TangentVector(x, w, beta)


def test_splitting_flow_equivariance(rng):
    for _ in range(30):
        x = random_flow_point(rng, 3)
        u = _random_tangent(rng, x)
        t = float(rng.uniform(-2, 2))
        moved = flow_tangent(u, t)
        et = math.exp(t)
        assert np.allclose(moved.u_part, et * u.u_part, atol=1e-10 * et)
        assert np.allclose(moved.s_part, u.s_part / et, atol=1e-10)
        assert moved.c_part == pytest.approx(u.c_part, abs=1e-10)
        assert contact_form(moved) == pytest.approx(contact_form(u), abs=1e-10)


def test_pseudo_metric_act_invariance(rng):
    g = Matrix(np.array([[2.0, 1.0, 0.0], [1.0, 1.0, 0.5], [0.0, 0.5, 2.0]]))
    for _ in range(30):
        x = random_flow_point(rng, 3)
        u1 = _random_tangent(rng, x)
        u2 = _random_tangent(rng, x)
        val = pseudo_metric(u1, u2)
        moved = pseudo_metric(act_tangent(g, u1), act_tangent(g, u2))
        assert moved == pytest.approx(val, rel=1e-9, abs=1e-9)


def test_project_base(rng):
    x = make_point(np.array([1.0, 0, 0]), np.array([1.0, 0, 0]))
    ell, hyp = project_base(x)
    assert projective_equal(ell.rep, np.array([1.0, 0, 0]))
    for _ in range(10):
        y = random_flow_point(rng, 3)
        e0, h0 = project_base(y)
        e5, h5 = project_base(flow(y, 5.0))
        assert np.allclose(e0.rep, e5.rep, atol=1e-13)
        assert np.allclose(h0.rep, h5.rep, atol=1e-13)
    g = Matrix(np.array([[2.0, 1.0, 0.0], [1.0, 1.0, 0.5], [0.0, 0.5, 2.0]]))
    y = random_flow_point(rng, 3)
    e, h = project_base(act(g, y))
    e0, h0 = project_base(y)
    assert projective_close(e.rep, ProjPoint(g.a @ e0.rep).rep)
    assert projective_close(h.rep, ProjHyperplane(h0.rep @ g.inv).rep)


def projective_close(a, b, tol=1e-12):
    return min(np.max(np.abs(a - b)), np.max(np.abs(a + b))) <= tol
