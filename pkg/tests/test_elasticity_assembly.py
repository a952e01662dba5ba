import math

import numpy as np
import pytest

from elacomplex import elasticity_assembly as ea
from elacomplex import fa_toolbox as fa
from elacomplex import poly_calculus as pc
from elacomplex.poly_calculus import Poly3, PolyMatField, PolyVecField
from elacomplex.rational import Q

from conftest import BOUNDARY_CONFIGS


def _uni_inner(f, g):
    total = Q(0)
    for a, ca in enumerate(f):
        for b, cb in enumerate(g):
            if ca and cb:
                total += Q(ca) * Q(cb) * Q(1, a + b + 1)
    return total


# --- boundary selections ------------------------------------------------------


def test_boundary_selection_parsing():
    assert ea.BoundarySelection.parse(None).faces == frozenset()
    assert ea.BoundarySelection.parse("none").faces == frozenset()
    assert ea.BoundarySelection.parse("").faces == frozenset()
    assert ea.BoundarySelection.parse("all").faces == frozenset(ea.FACE_NAMES)
    assert ea.BoundarySelection.parse("X0,Y1").faces == frozenset({"X0", "Y1"})
    assert ea.BoundarySelection.parse("x0+y1").faces == frozenset({"X0", "Y1"})
    assert ea.BoundarySelection.parse(["Z0"]).faces == frozenset({"Z0"})
    sel = ea.BoundarySelection.parse("X0,X1")
    assert ea.BoundarySelection.parse(sel) is sel
    with pytest.raises(ValueError):
        ea.BoundarySelection.parse("X9")


def test_boundary_selection_orders():
    sel = ea.BoundarySelection.parse("X0,Y1")
    assert sel.orders(0, 2) == (2, 0)
    assert sel.orders(1, 2) == (0, 2)
    assert sel.orders(2, 2) == (0, 0)


# --- univariate factor bases ---------------------------------------------------


@pytest.mark.parametrize("degree,m0,m1", [(4, 0, 0), (4, 1, 0), (5, 2, 2), (3, 1, 1)])
def test_factor_basis_orthogonal_and_constrained(degree, m0, m1):
    coeffs, norms = ea.univariate_factor_basis(degree, m0, m1)
    assert len(coeffs) == degree + 1 - m0 - m1
    for k, f in enumerate(coeffs):
        # exact squared norm matches the reported one
        assert _uni_inner(f, f) == norms[k]
        # vanishing to order m0 at x=0 means the low coefficients are zero
        assert all(f[i] == 0 for i in range(m0))
        poly = [Q(c) for c in f]
        for _ in range(m1):
            assert sum(poly) == 0  # value at x=1
            poly = [Q(i) * poly[i] for i in range(len(poly))]  # derivative grid
        for l in range(k):
            assert _uni_inner(f, coeffs[l]) == 0


def test_factor_basis_degree_too_low():
    # degree 1 with orders (1, 1) is exactly x(1-x)-free: zero-dimensional
    coeffs, norms = ea.univariate_factor_basis(1, 1, 1)
    assert coeffs == () and norms == ()
    with pytest.raises(ea.DegreeTooLow):
        ea.univariate_factor_basis(0, 1, 1)


# --- field spaces ----------------------------------------------------------


def test_build_space_dimension_oracle():
    # (degree+1-m0-m1)^3 per component
    assert ea.build_space("scalar", 2, "none", 1).dim == 27
    assert ea.build_space("scalar", 2, "X0", 1).dim == 2 * 3 * 3
    assert ea.build_space("vector", 2, "none", 1).dim == 3 * 27
    assert ea.build_space("symmetric-tensor", 2, "none", 1).dim == 6 * 27
    # too low a degree on a constrained axis empties the space, not an error
    assert ea.build_space("vector", 1, "all", 1).dim == 0


def test_build_space_rejections():
    with pytest.raises(ValueError):
        ea.build_space("spinor", 2, "none", 1)
    with pytest.raises(ea.DegreeTooLow):
        ea.build_space("vector", -1, "none", 1)


def test_build_space_fields_vanish_on_faces():
    bc = ea.BoundarySelection.parse("X0,Z1")
    space = ea.build_space("vector", 3, bc, 1)
    assert space.dim == 3 * (3 * 4 * 3)
    for f in space.fields:
        assert ea.vanishes_on_faces(f, bc)
    const = PolyVecField([Poly3.constant(1), Poly3.zero(), Poly3.zero()])
    assert not ea.vanishes_on_faces(const, bc)


def test_build_space_gram_is_diagonal_exact():
    space = ea.build_space("scalar", 2, "X0", 1)
    fields = space.fields
    for i, f in enumerate(fields):
        for j, g in enumerate(fields):
            prod = ea._box_integral(f * g)
            if i == j:
                assert prod == space.gram_diag[i]
            else:
                assert prod == 0


def test_generator_space_degree_bump():
    # base degree 3, second-order vanishing on both X faces: the boundary
    # factor x^2(1-x)^2 alone has degree 4, so the x-axis bound is raised.
    bc = ea.BoundarySelection.parse("X0,X1")
    space = ea._generator_space("symmetric-tensor", 3, bc, 2)
    assert space.counts == (1, 4, 4)
    assert space.dim == 6 * 1 * 4 * 4
    for f in space.fields:
        assert ea.vanishes_on_faces(f, bc, kind="symmetric-tensor")
    # without the bump the same request is empty
    assert ea.build_space("symmetric-tensor", 3, bc, 2).dim == 0


# --- face restrictions -------------------------------------------------------


def test_face_restriction_values():
    x = Poly3.variable(0)
    y = Poly3.variable(1)
    p = x * x * y + y
    at0 = ea._face_restriction(p, 0, 0)
    at1 = ea._face_restriction(p, 0, 1)
    assert (at0 - y).is_zero()
    assert (at1 - y.scale(2)).is_zero()


# --- rigid motions -----------------------------------------------------------


def test_rigid_motion_basis_kernel_and_gram():
    rm = ea.rigid_motion_basis()
    assert len(rm.fields) == 6
    for f in rm.fields:
        assert pc.sym_grad(f).is_zero()
    G = rm.exact_gram()
    M = np.array([[float(q) for q in row] for row in G])
    assert np.allclose(M, M.T)
    assert np.linalg.matrix_rank(M) == 6
    assert np.all(np.linalg.eigvalsh(M) > 0)


def test_rigid_motion_coordinates_reconstruct_exactly():
    space = ea.build_space("vector", 2, "none", 1)
    cols = ea.rigid_motion_coordinates(space)
    rm = ea.rigid_motion_basis()
    for col, target in zip(cols, rm.fields):
        acc = PolyVecField([Poly3.zero()] * 3)
        for i, q in col.items():
            acc = acc + space.fields[i].scale(q)
        assert (acc - target).is_zero()


def test_rigid_motion_coordinates_need_unconstrained_space():
    space = ea.build_space("vector", 2, "X0", 1)
    with pytest.raises(ValueError):
        ea.rigid_motion_coordinates(space)


def test_rm_projector_properties():
    space = ea.build_space("vector", 2, "none", 1)
    P = ea.rm_projector(space)
    G = np.diag([float(q) for q in space.gram_diag])
    assert np.linalg.matrix_rank(P) == 6
    assert np.max(np.abs(P @ P - P)) < 1e-10
    # G-self-adjoint: G P = P^T G
    assert np.max(np.abs(G @ P - P.T @ G)) < 1e-10
    # fixes the rigid motions
    for col in ea.rigid_motion_coordinates(space):
        v = np.zeros(space.dim)
        for i, q in col.items():
            v[i] = float(q)
        assert np.max(np.abs(P @ v - v)) < 1e-10


# --- exact potentials -------------------------------------------------------


def _random_vector_field(rng, degree):
    comps = []
    for _ in range(3):
        terms = {}
        for a in range(degree + 1):
            for b in range(degree + 1 - a):
                for c in range(degree + 1 - a - b):
                    terms[(a, b, c)] = Q(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
        comps.append(Poly3(terms))
    return PolyVecField(comps)


def test_potential_recovers_strain_exactly():
    rng = np.random.default_rng(11)
    for _ in range(5):
        u = _random_vector_field(rng, 3)
        S = pc.sym_grad(u)
        v = ea.saint_venant_potential(S)
        assert (pc.sym_grad(v) - S).is_zero()
        # u and v differ by a rigid motion
        assert pc.sym_grad(u - v).is_zero()


def test_potential_known_example():
    # sym_grad of u = (x^2 y, 0, 0)
    x = Poly3.variable(0)
    y = Poly3.variable(1)
    u = PolyVecField([x * x * y, Poly3.zero(), Poly3.zero()])
    S = pc.sym_grad(u)
    v = ea.saint_venant_potential(S)
    assert (pc.sym_grad(v) - S).is_zero()


def test_potential_rejects_incompatible_field():
    # S = y^2 E11 violates the compatibility relation d^2 S11 / dy^2 = 0
    y = Poly3.variable(1)
    entries = [Poly3.zero() for _ in range(9)]
    entries[0] = y * y
    S = PolyMatField(entries)
    with pytest.raises(ea.NotCompatible):
        ea.saint_venant_potential(S)


def test_potential_rejects_nonsymmetric_field():
    entries = [Poly3.zero() for _ in range(9)]
    entries[1] = Poly3.constant(1)  # strictly upper entry only
    S = PolyMatField(entries)
    with pytest.raises(ea.NotCompatible):
        ea.saint_venant_potential(S)


# --- face-compatible combinations -------------------------------------------


def test_face_compatible_passthrough_without_faces():
    x = Poly3.variable(0)
    u = PolyVecField([x * x, Poly3.zero(), Poly3.zero()])
    out = ea._face_compatible_combinations([u], ea.BoundarySelection.parse("none"))
    assert out == [u]


def test_face_compatible_uses_rigid_motion_correction():
    # u = (1 + x, 0, 0) fails on the face x=0, but u - e0 vanishes there.
    x = Poly3.variable(0)
    one = Poly3.constant(1)
    u = PolyVecField([one + x, Poly3.zero(), Poly3.zero()])
    bc = ea.BoundarySelection.parse("X0")
    out = ea._face_compatible_combinations([u], bc)
    assert len(out) == 1
    combo = out[0]
    assert ea.vanishes_on_faces(combo, bc)
    # the combination still carries the strain of u (up to sign/scale)
    assert not pc.sym_grad(combo).is_zero()


def test_face_compatible_rejects_when_no_correction_exists():
    # u = (x^2, 0, 0) vanishes at x=0 but not x=1, and no rigid motion
    # vanishes on a whole face, so no combination works on {X0, X1}.
    x = Poly3.variable(0)
    u = PolyVecField([x * x, Poly3.zero(), Poly3.zero()])
    bc = ea.BoundarySelection.parse("X0,X1")
    out = ea._face_compatible_combinations([u], bc)
    assert out == []


# --- float frames -------------------------------------------------------------


def test_legendre_frame_is_orthonormal():
    nvar = 7
    W = ea._legendre_frame(nvar)
    # W^T W must reproduce the exact monomial moment matrix 1/(a+b+1)
    M = np.array(
        [[1.0 / (a + b + 1) for b in range(nvar)] for a in range(nvar)],
        dtype=np.longdouble,
    )
    err = np.max(np.abs(W.T @ W - M))
    assert float(err) < 1e-16


def test_float_gram_matches_exact_integrals():
    space = ea.build_space("vector", 2, "X0", 1)
    coords = [ea._exact_coords(f, "vector", 3) for f in space.fields]
    G = ea._float_gram(coords, 3, 3, ea._KIND_WEIGHTS["vector"])
    exact = np.diag([float(q) for q in space.gram_diag])
    assert np.max(np.abs(G - exact)) < 1e-14


# --- assembled complexes ------------------------------------------------------


def test_complex_needs_degree_four():
    with pytest.raises(ea.DegreeTooLow):
        ea.build_complex(3, "none")


def test_complex_property_exact(complexes_p4):
    for gt in BOUNDARY_CONFIGS:
        assert complexes_p4[gt].verify_complex_property()


def test_complex_float_composition_small(complexes_p4):
    for gt in BOUNDARY_CONFIGS:
        cx = complexes_p4[gt].finite_complex()
        assert max(cx.composition_norms()) <= 1e-12


def test_kernel_of_first_operator(complexes_p4):
    # rigid motions are exactly the kernel without boundary conditions and
    # are excluded by any nonempty selection
    assert complexes_p4["none"].kernel_dims[0] == 6
    for gt in ("X0", "X0,X1", "all"):
        assert complexes_p4[gt].kernel_dims[0] == 0


def test_harmonic_dims_level01(complexes_p4):
    assert complexes_p4["none"].harmonic_dims[0] == 6
    assert complexes_p4["none"].harmonic_dims[1] == 0
    assert complexes_p4["X0"].harmonic_dims[:2] == (0, 0)
    assert complexes_p4["X0,X1"].harmonic_dims[:2] == (0, 6)
    assert complexes_p4["all"].harmonic_dims[:2] == (0, 0)


def test_level1_harmonic_dim_stable_in_degree(complexes_p4, complexes_p5):
    for gt in BOUNDARY_CONFIGS:
        assert (
            complexes_p4[gt].harmonic_dims[1] == complexes_p5[gt].harmonic_dims[1]
        )


def test_enlargement_bookkeeping(complexes_p4):
    for gt in BOUNDARY_CONFIGS:
        meta = complexes_p4[gt].meta
        assert (
            meta["potentials_added"] + meta["potentials_rejected"]
            == meta["first_pass_level1_overflow"]
        )
    # without boundary conditions every potential is admissible
    assert complexes_p4["none"].meta["potentials_rejected"] == 0
    # two opposite faces admit none of them
    assert complexes_p4["X0,X1"].meta["potentials_added"] == 0


def test_operator_columns_reconstruct_images_exactly(complexes_p4):
    ec = complexes_p4["X0"]
    level0, level1 = ec.levels[0], ec.levels[1]
    op = ec.ops[0]
    assert op.nrows == level1.dim and op.ncols == level0.dim
    rng = np.random.default_rng(5)
    for j in map(int, rng.choice(level0.dim, size=6, replace=False)):
        S = pc.sym_grad(level0.fields[j])
        acc = S
        for r, qv in op.column(j).items():
            acc = acc - level1.fields[r].scale(qv)
        assert acc.is_zero()


def test_float_ranks_agree_with_exact_certificates(complexes_p4):
    for gt in BOUNDARY_CONFIGS:
        ec = complexes_p4[gt]
        cx = ec.finite_complex()
        for k in range(3):
            assert fa.rank_of(cx.op(k), cx.gram(k), cx.gram(k + 1)) == ec.ranks[k]


def test_complex_is_cached():
    assert ea.build_complex(4, "X0") is ea.build_complex(4, "X0")


# --- Korn constants -----------------------------------------------------------


def test_korn_constant_basics():
    rep = ea.korn_constant(2, "none")
    assert rep.constant >= 1.0
    assert rep.restricted
    rep_bc = ea.korn_constant(2, "X0")
    assert rep_bc.constant >= 1.0
    assert not rep_bc.restricted


def test_korn_constant_monotone_in_degree():
    values = [ea.korn_constant(p, "X0").constant for p in (2, 3, 4)]
    assert values[0] <= values[1] + 1e-9
    assert values[1] <= values[2] + 1e-9


def test_korn_degree_too_low():
    with pytest.raises(ea.DegreeTooLow):
        ea.korn_constant(0, "none")


# --- level-1 cohomology reports ------------------------------------------------


def test_dirichlet_neumann_dimensions(complexes_p4):
    assert ea.dirichlet_neumann_fields(4, "none").dimension == 0
    assert ea.dirichlet_neumann_fields(4, "X0,X1").dimension == 6
    rng = np.random.default_rng(3)
    n = complexes_p4["X0,X1"].levels[1].dim
    eps = fa.random_spd(n, rng)
    assert ea.dirichlet_neumann_fields(4, "X0,X1", eps=eps).dimension == 6
