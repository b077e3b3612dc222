import numpy as np
import pytest

from kreiss import (
    build_fixed_pencil,
    build_variable_pencil,
    fixed_distance_test,
    gen_test_matrix,
    horizontal_variable_test,
    kron_sum_inverse,
    minimize,
    solve_owr,
    variable_distance_test,
    vertical_level_points,
)
from kreiss.cert_ct import build_horizontal_pencil, _gamma_block, _structured_factors
from kreiss.errors import SingularDError
from kreiss.oracle import grid_min

from conftest import random_stable

JORDAN_MIN = 1.0 / 1.1333333333333333  # global min of g for J(-0.3), = 1/K


# --------------------------------------------------------------------------
# 1D vertical test
# --------------------------------------------------------------------------

def test_vertical_exact_pair(scalar_ct):
    ys = vertical_level_points(scalar_ct, np.sqrt(5.0), 1.0)
    assert len(ys) == 2
    assert abs(ys[0] + 1.0) <= 1e-10 and abs(ys[1] - 1.0) <= 1e-10


def test_vertical_empty(scalar_ct):
    assert vertical_level_points(scalar_ct, 0.5, 1.0) == []


def test_vertical_tangency(scalar_ct):
    ys = vertical_level_points(scalar_ct, 2.0, 1.0)
    assert len(ys) == 1
    assert abs(ys[0]) <= 1e-10


def test_vertical_points_really_carry_gamma(jordan_ct):
    gamma = JORDAN_MIN + 0.03
    for x in (0.5, 0.7):
        for y in vertical_level_points(jordan_ct, gamma, x):
            G = ((x + 1j * y) * np.eye(2) - jordan_ct.A) / x
            s = np.linalg.svd(G, compute_uv=False)
            assert np.min(np.abs(s - gamma)) <= 1e-8 * jordan_ct.norm2


# --------------------------------------------------------------------------
# pencil structure
# --------------------------------------------------------------------------

def test_fixed_pencil_a2_eigenvalues_scalar(scalar_ct):
    gamma = 0.5
    pen = build_fixed_pencil(scalar_ct, gamma, 0.1, np.pi / 2)
    assert pen.m1.shape == (4, 4)
    vals = np.sort(np.linalg.eigvals(pen.m2).real)
    s = 2.0 * np.sqrt(1.0 - gamma**2)
    assert np.allclose(vals, [-s, 0.0, 0.0, s], atol=1e-12)


def test_fixed_pencil_real_for_theta_zero(jordan_ct):
    pen = build_fixed_pencil(jordan_ct, 0.5, 0.2, 0.0)
    assert np.max(np.abs(pen.m1.imag)) == 0.0
    pen2 = build_fixed_pencil(jordan_ct, 0.5, 0.2, 0.7)
    assert np.max(np.abs(pen2.m1.imag)) > 0.0


def test_fixed_pencil_eta_zero_reduces_to_kron_sum(jordan_ct):
    pen = build_fixed_pencil(jordan_ct, 0.5, 0.0, np.pi / 2)
    n = jordan_ct.n
    A = jordan_ct.A
    left = np.block([[A, 0 * A], [0 * A, -A.conj().T]])
    expected = (np.kron(np.eye(2 * n), left)
                + np.kron(left.conj(), np.eye(2 * n)))
    # eta = 0 wipes every eta-dependent term; what is left is the Kronecker
    # sum of the diagonal blocks
    assert np.allclose(pen.m1, expected)


def test_a2_rank_deficiency_exactly_2nsq():
    for n, seed in ((2, 0), (3, 1)):
        prob = random_stable(n, seed, "continuous")
        pen = build_fixed_pencil(prob, 0.55, 0.1, np.pi / 2)
        s = np.linalg.svd(pen.m2, compute_uv=False)
        rank = int(np.sum(s > 1e-10 * s[0]))
        assert rank == 2 * n * n


def test_gamma_eta_validation(jordan_ct):
    with pytest.raises(ValueError):
        fixed_distance_test(jordan_ct, 1.5, 0.1)
    with pytest.raises(ValueError):
        fixed_distance_test(jordan_ct, 2.0, 0.1)  # spec example: g(1,0)=2 not < 1
    with pytest.raises(ValueError):
        variable_distance_test(jordan_ct, 0.5, 0.0)
    with pytest.raises(ValueError):
        build_fixed_pencil(jordan_ct, 0.5, 0.1, -np.pi / 2)


# --------------------------------------------------------------------------
# 2D tests against the grid oracle
# --------------------------------------------------------------------------

def test_fixed_distance_detects_above_minimum(jordan_ct):
    rep = fixed_distance_test(jordan_ct, JORDAN_MIN + 0.01, 0.005, np.pi / 2)
    assert not rep.empty
    for pt in rep.points:
        x, y = pt.coords
        G = ((x + 1j * y) * np.eye(2) - jordan_ct.A) / x
        s = np.linalg.svd(G, compute_uv=False)
        assert np.min(np.abs(s - rep.gamma)) <= 1e-8 * jordan_ct.norm2


def test_fixed_distance_empty_below_minimum(jordan_ct):
    rep = fixed_distance_test(jordan_ct, 0.9 * JORDAN_MIN, 0.005, np.pi / 2)
    assert rep.empty


def test_fixed_distance_horizontal_orientation(jordan_ct):
    rep = fixed_distance_test(jordan_ct, JORDAN_MIN + 0.02, 0.01, 0.0)
    assert not rep.empty


def test_variable_distance_verdicts(jordan_ct):
    above = variable_distance_test(jordan_ct, JORDAN_MIN + 0.02, 0.01)
    assert not above.empty
    below = variable_distance_test(jordan_ct, JORDAN_MIN - 0.02, 0.01)
    assert below.empty


def test_variable_empty_certifies_lower_bound(jordan_ct):
    gamma, eta = JORDAN_MIN - 0.02, 0.01
    rep = variable_distance_test(jordan_ct, gamma, eta)
    assert rep.empty
    kinv = 1.0 / solve_owr(jordan_ct).kreiss
    assert kinv > gamma - eta / 2.0


def test_scalar_variable_empty(scalar_ct):
    # for normal A the objective never drops below 1, so any gamma < 1 is empty
    rep = variable_distance_test(scalar_ct, 0.99, 0.05)
    assert rep.empty


def test_horizontal_variant_verdicts(jordan_ct):
    above = horizontal_variable_test(jordan_ct, JORDAN_MIN + 0.02, 0.01)
    assert not above.empty
    below = horizontal_variable_test(jordan_ct, JORDAN_MIN - 0.02, 0.01)
    assert below.empty


def test_b2inv_tolerance_mode(jordan_ct):
    rep = variable_distance_test(jordan_ct, JORDAN_MIN + 0.02, 0.01, b2inv_tol=16.0)
    assert not rep.empty
    assert rep.real_eig_tol_used != 1e-8  # absolute band, not the default rtol


def test_completeness_within_theorem_bound():
    # gamma slightly above the global minimum, eta within 2 x* (gamma - 1/K):
    # the fixed vertical test must detect points
    for n, seed in ((3, 5), (4, 2), (6, 3)):
        prob = random_stable(n, seed, "continuous")
        val, coords = grid_min(prob, levels=4)
        res = minimize(prob, coords)
        kinv, xstar = res.value, res.minimizer.coords[0]
        if kinv >= 0.97:  # nearly normal instance; no usable gamma below 1
            continue
        gamma = kinv + 0.02
        eta = xstar * (gamma - kinv)  # inside [0, 2 x* (gamma - kinv)]
        rep = fixed_distance_test(prob, gamma, eta, np.pi / 2)
        assert not rep.empty, f"no detection for n={n} seed={seed}"


def test_gu_lemma_along_horizontal_line(jordan_ct):
    # f(x) = g(x)/x with g of GLC 1: two level crossings at gamma bound the
    # interior minimum by gamma - eta(1+gamma)/(2 x*)
    from kreiss import g_eval

    y = 0.11
    xs = np.linspace(0.05, 4.0, 4000)
    vals = np.array([g_eval(jordan_ct, x, y).value for x in xs])
    i = np.argmin(vals)
    gamma = vals[i] + 0.05
    left = xs[:i][vals[:i] <= gamma]
    right = xs[i:][vals[i:] >= gamma]
    a = left[0] if len(left) else None
    b = right[0] if len(right) else None
    if a is None or b is None:
        pytest.skip("level does not bracket the minimum on this line")
    eta = b - a
    xstar, gstar = xs[i], vals[i]
    assert gstar >= gamma - eta * (1.0 + gamma) / (2.0 * xstar) - 1e-3


# --------------------------------------------------------------------------
# Kronecker-sum inverse
# --------------------------------------------------------------------------

def test_lemma_factorization_identities():
    rng = np.random.default_rng(7)
    for _ in range(10):
        a = complex(rng.standard_normal(), rng.standard_normal())
        b = complex(rng.standard_normal(), rng.standard_normal())
        if abs(b) < 0.1:
            b += 0.5
        k = int(rng.integers(1, 4))
        n = int(rng.integers(1, 4))
        Uk, Vk, _ = _structured_factors(a, b, k, n)
        eye_n = np.eye(n)
        C = np.block([[a * eye_n, -b * eye_n], [b * eye_n, -a * eye_n]])
        lhs = (Uk @ Vk).toarray()
        rhs = np.kron(np.eye(2 * k), C) + np.kron(C, np.eye(2 * k))
        assert np.linalg.norm(lhs - rhs) <= 1e-12 * max(1.0, np.linalg.norm(rhs))
        vu = (Vk @ Uk).toarray()
        assert np.linalg.norm(vu - 2 * np.kron(np.eye(k), C)) <= 1e-12 * np.linalg.norm(vu)


def test_kron_sum_inverse_matches_dense():
    a, b, k, n = 1.0, 0.5, 1, 1
    s = -0.1j
    inv = kron_sum_inverse(a, b, k, n, s)
    assert inv.beta == pytest.approx(-3.01)
    eye_n = np.eye(n)
    C = np.block([[a * eye_n, -b * eye_n], [b * eye_n, -a * eye_n]])
    D = np.kron(np.eye(2 * k), C) + np.kron(C + s * np.eye(2 * n), np.eye(2 * k))
    assert np.linalg.norm(D @ inv.dense() - np.eye(4 * k * n)) <= 1e-12


def test_kron_sum_inverse_random_cases():
    rng = np.random.default_rng(3)
    for _ in range(5):
        a = complex(rng.standard_normal(), rng.standard_normal())
        b = complex(rng.standard_normal(), rng.standard_normal()) + 0.3
        k, n = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        s = complex(rng.standard_normal(), rng.standard_normal())
        beta = s**2 + 4 * (b**2 - a**2)
        if abs(s) < 0.2 or abs(beta) < 0.2:
            continue
        inv = kron_sum_inverse(a, b, k, n, s)
        eye_n = np.eye(n)
        C = np.block([[a * eye_n, -b * eye_n], [b * eye_n, -a * eye_n]])
        D = np.kron(np.eye(2 * k), C) + np.kron(C + s * np.eye(2 * n), np.eye(2 * k))
        assert np.linalg.norm(D @ inv.dense() - np.eye(D.shape[0])) <= 1e-10


def test_kron_sum_inverse_singular_cases():
    with pytest.raises(SingularDError):
        kron_sum_inverse(1.0, 0.5, 1, 1, 0.0)  # s = 0 (the eta = 0 case)
    s = np.sqrt(4.0 * (1.0**2 - 0.5**2))  # beta = 0
    with pytest.raises(SingularDError):
        kron_sum_inverse(1.0, 0.5, 1, 1, s)


def test_variable_pencil_b2_matches_kron_inverse(jordan_ct):
    gamma, eta = 0.5, 0.1
    pen = build_variable_pencil(jordan_ct, gamma, eta)
    inv = kron_sum_inverse(1.0, gamma, jordan_ct.n, jordan_ct.n, -1j * eta)
    assert np.linalg.norm(pen.m2 @ inv.dense() - np.eye(pen.m2.shape[0])) <= 1e-10


def test_b2_singular_at_eta_zero():
    n = 1
    C = _gamma_block(n, 0.5)
    B2 = np.kron(np.eye(2 * n), C) + np.kron(C, np.eye(2 * n))
    assert np.min(np.abs(np.linalg.eigvals(B2))) <= 1e-14


# --------------------------------------------------------------------------
# horizontal (appendix) pencil structure
# --------------------------------------------------------------------------

def test_horizontal_pencil_eigenvalue_structure(jordan_ct):
    gamma, eta = 0.6, 0.3
    pen = build_horizontal_pencil(jordan_ct, gamma, eta)
    beta = pen.beta
    assert beta == pytest.approx(1.0 + eta / (1.0 + gamma))
    root = np.sqrt(1.0 - gamma**2)
    expected = []
    for s1 in (root, -root):
        for s2 in (beta * root, -beta * root):
            expected.append(s1 + s2)
    vals = np.linalg.eigvals(pen.m2)
    for e in expected:
        assert np.min(np.abs(vals - e)) <= 1e-10
    # beta = 1 (i.e. eta = 0) makes the pencil singular: sums include zero
    C = _gamma_block(jordan_ct.n, gamma)
    B2_eta0 = np.kron(np.eye(2 * jordan_ct.n), C) + np.kron(C, np.eye(2 * jordan_ct.n))
    assert np.min(np.abs(np.linalg.eigvals(B2_eta0))) <= 1e-12


def test_cross_variant_verdict_agreement(jordan_ct):
    for gamma in (JORDAN_MIN - 0.02, JORDAN_MIN + 0.02):
        v = variable_distance_test(jordan_ct, gamma, 0.01)
        h = horizontal_variable_test(jordan_ct, gamma, 0.01)
        assert v.empty == h.empty
