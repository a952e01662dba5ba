import numpy as np
import pytest

from elacomplex import derham, fa_toolbox as fa


@pytest.fixture(scope="module")
def torus():
    return derham.cubical_complex(derham.torus_cells())


@pytest.fixture(scope="module")
def box():
    return derham.cubical_complex(derham.solid_box_cells())


# --- inner products and adjoints -------------------------------------------


def test_inner_product_rejects_bad_grams():
    with pytest.raises(fa.NotSPD):
        fa.InnerProduct(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(fa.NotSPD):
        fa.InnerProduct(np.array([[1.0, 0.0], [0.0, -2.0]]))
    with pytest.raises(fa.DimensionMismatch):
        fa.InnerProduct(np.zeros((2, 3)))


def test_adjoint_identity_grams_is_transpose():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(4, 6))
    gd, gc = fa.InnerProduct.identity(6), fa.InnerProduct.identity(4)
    assert np.allclose(fa.adjoint(A, gd, gc), A.T)


def test_adjoint_pairing_and_involution():
    rng = np.random.default_rng(1)
    gd = fa.InnerProduct(fa.random_spd(5, rng))
    gc = fa.InnerProduct(fa.random_spd(3, rng))
    A = rng.normal(size=(3, 5))
    Astar = fa.adjoint(A, gd, gc)
    for _ in range(10):
        x, y = rng.normal(size=5), rng.normal(size=3)
        assert abs(gc.inner(A @ x, y) - gd.inner(x, Astar @ y)) < 1e-12 * (
            1 + abs(gc.inner(A @ x, y))
        )
    back = fa.adjoint(Astar, gc, gd)
    assert np.allclose(back, A, atol=1e-12)
    with pytest.raises(fa.DimensionMismatch):
        fa.adjoint(A, gc, gd)


# --- kernels and cohomology -------------------------------------------------


def test_kernel_basis_trivial_cases():
    g3 = fa.InnerProduct.identity(3)
    assert fa.kernel_basis(np.zeros((3, 3)), g3).shape[1] == 3
    assert fa.kernel_basis(np.eye(3), g3).shape[1] == 0


def test_kernel_basis_path_graph():
    d = derham.path_graph_gradient(4)
    g = fa.InnerProduct.identity(4)
    B = fa.kernel_basis(d, g)
    assert B.shape[1] == 1
    v = B[:, 0]
    assert np.allclose(v, v[0] * np.ones(4), atol=1e-12)
    assert abs(g.inner(v, v) - 1.0) < 1e-12


def test_kernel_basis_weighted_orthonormal():
    rng = np.random.default_rng(5)
    g = fa.InnerProduct(fa.random_spd(6, rng))
    A = np.vstack([rng.normal(size=6)])  # rank 1
    B = fa.kernel_basis(A, g)
    assert B.shape[1] == 5
    gram = B.T @ g.G @ B
    assert np.allclose(gram, np.eye(5), atol=1e-10)
    assert np.max(np.abs(A @ B)) < 1e-10


def test_cohomology_everything_harmonic():
    cx = fa.FiniteComplex(
        [np.eye(1), np.eye(2), np.eye(1)],
        [np.zeros((2, 1)), np.zeros((1, 2))],
    )
    assert fa.cohomology(cx, 1).dimension == 2


def test_cohomology_basis_properties(torus):
    rep = fa.cohomology(torus, 1)
    assert rep.dimension == 1
    B = rep.basis
    g = torus.gram(1)
    assert np.allclose(B.T @ g.G @ B, np.eye(1), atol=1e-10)
    assert np.max(np.abs(torus.op(1) @ B)) < 1e-8
    assert np.max(np.abs(torus.op(0).T @ g.G @ B)) < 1e-8


def test_cohomology_dimension_weight_independent(torus):
    rng = np.random.default_rng(11)
    base_dims = [fa.cohomology(torus, n).dimension for n in range(4)]
    for _ in range(5):
        grams = [fa.random_spd(d, rng) for d in torus.dims]
        cx = fa.FiniteComplex(grams, torus.operators)
        dims = [fa.cohomology(cx, n).dimension for n in range(4)]
        assert dims == base_dims


# --- Helmholtz ---------------------------------------------------------------


def test_helmholtz_pure_range(torus):
    rng = np.random.default_rng(2)
    u = rng.normal(size=torus.dims[0])
    x = torus.op(0) @ u
    res = fa.helmholtz(x, torus, 1)
    g = torus.gram(1)
    assert g.norm(x - res.x_range) < 1e-10 * max(1.0, g.norm(x))
    assert g.norm(res.x_harm) < 1e-10
    assert g.norm(res.x_costar) < 1e-10


def test_helmholtz_harmonic_vector(torus):
    h = fa.cohomology(torus, 1).basis[:, 0]
    res = fa.helmholtz(h, torus, 1)
    g = torus.gram(1)
    assert g.norm(res.x_harm - h) < 1e-10
    assert g.norm(res.x_range) < 1e-10
    assert g.norm(res.x_costar) < 1e-10


def test_helmholtz_random_orthogonality(torus):
    rng = np.random.default_rng(3)
    g = torus.gram(1)
    for _ in range(20):
        x = rng.normal(size=torus.dims[1])
        res = fa.helmholtz(x, torus, 1)
        nx = max(g.norm(x), 1.0)
        assert res.residual < 1e-10 * nx
        for v in res.pairings.values():
            assert abs(v) < 1e-10 * nx * nx


def test_helmholtz_kernel_element_has_no_costar(torus):
    rng = np.random.default_rng(4)
    K = fa.kernel_basis(torus.op(1), torus.gram(1))
    x = K @ rng.normal(size=K.shape[1])
    res = fa.helmholtz(x, torus, 1)
    assert torus.gram(1).norm(res.x_costar) < 1e-10 * max(
        1.0, torus.gram(1).norm(x)
    )


# --- Poincare ----------------------------------------------------------------


def test_poincare_diagonal_example():
    A = np.diag([0.0, 2.0, 3.0])
    g = fa.InnerProduct.identity(3)
    rep = fa.poincare_constant(A, g, g)
    assert abs(rep.constant - 0.5) < 1e-12
    e = rep.extremal / np.linalg.norm(rep.extremal)
    assert np.allclose(np.abs(e), [0, 1, 0], atol=1e-12)


def test_poincare_path_graph():
    d = derham.path_graph_gradient(3)
    g3, g2 = fa.InnerProduct.identity(3), fa.InnerProduct.identity(2)
    rep = fa.poincare_constant(d, g3, g2)
    # path Laplacian spectrum {0, 1, 3} -> smallest positive sigma = 1
    assert abs(rep.constant - 1.0) < 1e-10


def test_poincare_sharpness_and_zero(torus):
    rep = fa.poincare_constant(torus.op(0), torus.gram(0), torus.gram(1))
    x = rep.extremal
    lhs = torus.gram(0).norm(x)
    rhs = rep.constant * torus.gram(1).norm(torus.op(0) @ x)
    assert abs(lhs - rhs) < 1e-10 * max(1.0, lhs)
    with pytest.raises(fa.ZeroOperator):
        fa.poincare_constant(
            np.zeros((2, 2)),
            fa.InnerProduct.identity(2),
            fa.InnerProduct.identity(2),
        )


def test_mixed_estimate(torus):
    c0 = fa.poincare_constant(torus.op(0), torus.gram(0), torus.gram(1)).constant
    c1 = fa.poincare_constant(torus.op(1), torus.gram(1), torus.gram(2)).constant
    rng = np.random.default_rng(8)
    g = torus.gram(1)
    H = fa.cohomology(torus, 1).basis
    for _ in range(25):
        x = rng.normal(size=torus.dims[1])
        x = x - H @ (H.T @ (g.G @ x))  # remove harmonic part
        holds, slack = fa.mixed_estimate_check(x, torus, c0, c1)
        assert holds, slack
    with pytest.raises(fa.NotOrthogonalToHarmonics):
        fa.mixed_estimate_check(H[:, 0], torus, c0, c1)


# --- reduced inverse and regular decomposition ------------------------------


def test_reduced_inverse_invertible_case():
    rng = np.random.default_rng(9)
    A = rng.normal(size=(4, 4)) + 4 * np.eye(4)
    g = fa.InnerProduct.identity(4)
    P = fa.reduced_inverse(A, g, g)
    assert np.allclose(P, np.linalg.inv(A), atol=1e-10)


def test_reduced_inverse_properties(torus):
    A = torus.op(0)
    gd, gc = torus.gram(0), torus.gram(1)
    P = fa.reduced_inverse(A, gd, gc)
    # A P A = A (identity on the range)
    assert np.max(np.abs(A @ P @ A - A)) < 1e-10
    # range of P is G-perpendicular to N(A)
    K = fa.kernel_basis(A, gd)
    if K.size:
        assert np.max(np.abs(K.T @ gd.G @ P)) < 1e-10
    # |P| equals the Poincare constant
    c = fa.poincare_constant(A, gd, gc).constant
    assert abs(fa.operator_norm(P, gc, gd) - c) < 1e-10 * c


def test_regular_decomposition_trivial_level(torus):
    # cohomology vanishes at n=2 on the torus fixture
    ops = fa.regular_decomposition(torus, 2)
    A_prev = torus.op(1)
    assert ops.two_term_defect(A_prev) < 1e-10
    assert ops.three_term_defect(A_prev) < 1e-10
    q1 = ops.q1
    assert np.max(np.abs(q1 @ q1 - q1)) < 1e-10
    n_op = ops.complement
    assert np.max(np.abs(n_op @ n_op - n_op)) < 1e-10
    assert np.max(np.abs(q1 @ n_op)) < 1e-10
    assert np.max(np.abs(n_op @ q1)) < 1e-10


def test_regular_decomposition_harmonic_term(torus):
    # at n=1 the torus has one harmonic direction: the two-term identity
    # picks up exactly the harmonic defect, the three-term identity closes
    ops = fa.regular_decomposition(torus, 1)
    A_prev = torus.op(0)
    assert ops.harm_dim == 1
    assert ops.three_term_defect(A_prev) < 1e-10
    assert ops.two_term_defect(A_prev) > 1e-3
    # Q1 vanishes on N(A_1)
    K = fa.kernel_basis(torus.op(1), torus.gram(1))
    assert np.max(np.abs(ops.q1 @ K)) < 1e-10
    # norm bound |Q1 x| <= |P| |A1 x|
    rng = np.random.default_rng(10)
    p_norm = fa.operator_norm(ops.potential_n, torus.gram(2), torus.gram(1))
    g1, g2 = torus.gram(1), torus.gram(2)
    for _ in range(10):
        x = rng.normal(size=torus.dims[1])
        assert g1.norm(ops.q1 @ x) <= p_norm * g2.norm(torus.op(1) @ x) * (
            1 + 1e-10
        ) + 1e-12


def test_regular_decomposition_rejects_bad_potential(torus):
    bad = np.zeros((torus.dims[1], torus.dims[2]))
    with pytest.raises(fa.InvalidPotential):
        fa.regular_decomposition(torus, 1, p_n=bad)


# --- kernel projector images and pre-bases ----------------------------------


def test_kernel_projector_images_trivial(box):
    rep = fa.kernel_projector_images(box, 1)
    assert rep["harm_dim"] == 0
    assert rep["image_rank_star"] == 0
    assert rep["image_rank_ker"] == 0
    assert rep["spans_agree"]
    assert rep["projector_kills_range"] < 1e-10


def test_kernel_projector_images_torus(torus):
    rep = fa.kernel_projector_images(torus, 1)
    assert rep["harm_dim"] == 1
    assert rep["image_rank_star"] == 1
    assert rep["image_rank_ker"] == 1
    assert rep["spans_agree"]
    assert rep["projector_kills_range"] < 1e-10


def test_pre_basis_check_accepts_harmonics_and_perturbations(torus):
    H = fa.cohomology(torus, 1).basis
    assert fa.pre_basis_check(H, torus)["passed"]
    rng = np.random.default_rng(12)
    perturbed = H + torus.op(0) @ rng.normal(size=(torus.dims[0], H.shape[1]))
    assert fa.pre_basis_check(perturbed, torus)["passed"]


def test_pre_basis_check_rejects_range_vector(torus):
    rng = np.random.default_rng(13)
    b = torus.op(0) @ rng.normal(size=torus.dims[0])
    rep = fa.pre_basis_check(b[:, None], torus)
    assert not rep["passed"]
    assert rep["projected_rank"] == 0


def test_pre_basis_check_cardinality(torus):
    H = fa.cohomology(torus, 1).basis
    with pytest.raises(fa.WrongCardinality):
        fa.pre_basis_check(np.hstack([H, H]), torus)


# --- complex construction ----------------------------------------------------


def test_complex_rejects_bad_shapes():
    with pytest.raises(fa.DimensionMismatch):
        fa.FiniteComplex([np.eye(2), np.eye(2)], [np.zeros((3, 2))])


def test_complex_rejects_noncomplex():
    A0 = np.ones((2, 2))
    A1 = np.ones((2, 2))
    with pytest.raises(fa.DimensionMismatch):
        fa.FiniteComplex([np.eye(2)] * 3, [A0, A1])


def test_json_roundtrip(torus):
    data = torus.to_json_dict()
    cx = fa.FiniteComplex.from_json_dict(data)
    assert cx.dims == torus.dims
    for a, b in zip(cx.operators, torus.operators):
        assert np.array_equal(a, b)
