"""Finite-dimensional functional-analysis toolbox for Hilbert complexes.

Works on a chain of four weighted inner-product spaces

    H0 --A0--> H1 --A1--> H2 --A2--> H3

given by dense operator matrices and SPD Gram matrices.  Provides weighted
adjoints, kernel/cohomology bases, Helmholtz decompositions, Poincare
constants with extremal vectors, reduced (pseudo-)inverses, regular
decomposition operators, and the kernel-projector identities used for
pre-basis validation.

All computations are float64; ranks are decided by a relative singular
value tolerance.  The weights (e.g. elasticity's epsilon and mu) are the
Grams carried by the middle spaces, so "adjoint" always means adjoint with
respect to those weighted inner products.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular


class DimensionMismatch(ValueError):
    pass


class NotSPD(ValueError):
    pass


class SolverFailure(RuntimeError):
    pass


class ZeroOperator(ValueError):
    pass


class NotOrthogonalToHarmonics(ValueError):
    pass


class InvalidPotential(ValueError):
    pass


class WrongCardinality(ValueError):
    pass


def default_rank_tol(shape, smax, safety=100.0):
    return max(shape) * np.finfo(np.float64).eps * smax * safety


class InnerProduct:
    """SPD Gram matrix defining a weighted inner product."""

    def __init__(self, gram):
        G = np.asarray(gram, dtype=np.float64)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise DimensionMismatch("Gram matrix must be square")
        if G.size and not np.allclose(G, G.T, rtol=1e-10, atol=1e-12):
            raise NotSPD("Gram matrix is not symmetric")
        G = 0.5 * (G + G.T)
        try:
            L = np.linalg.cholesky(G) if G.size else np.zeros_like(G)
        except np.linalg.LinAlgError as exc:
            raise NotSPD("Gram matrix fails Cholesky") from exc
        self.G = G
        self.L = L  # G = L L^T

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n))

    @property
    def dim(self):
        return self.G.shape[0]

    def inner(self, x, y):
        return float(np.asarray(x) @ self.G @ np.asarray(y))

    def norm(self, x):
        return float(np.sqrt(max(self.inner(x, x), 0.0)))

    def to_orthonormal(self, X):
        """Coordinates y = L^T x (isometry to the unweighted dot product)."""
        return self.L.T @ X

    def from_orthonormal(self, Y):
        return solve_triangular(self.L.T, Y, lower=False) if self.dim else Y


def random_spd(n, rng, delta=0.1):
    """Admissible random weight: B^T B + delta I keeps it SPD."""
    B = rng.uniform(-1.0, 1.0, size=(n, n))
    return B.T @ B + delta * np.eye(n)


class FiniteComplex:
    """Immutable chain H0 -> H1 -> H2 -> H3 with SPD Grams on every level."""

    def __init__(self, grams, operators, tol=1e-12):
        if len(grams) != len(operators) + 1:
            raise DimensionMismatch("need one more space than operator")
        self._cache = {}
        self.spaces = [
            g if isinstance(g, InnerProduct) else InnerProduct(g) for g in grams
        ]
        self.operators = [np.asarray(A, dtype=np.float64) for A in operators]
        self.tol = float(tol)
        for i, A in enumerate(self.operators):
            if A.shape != (self.spaces[i + 1].dim, self.spaces[i].dim):
                raise DimensionMismatch(
                    "operator %d has shape %r, expected (%d, %d)"
                    % (i, A.shape, self.spaces[i + 1].dim, self.spaces[i].dim)
                )
        for i in range(len(self.operators) - 1):
            comp = self.operators[i + 1] @ self.operators[i]
            m = float(np.max(np.abs(comp))) if comp.size else 0.0
            if m > self.tol:
                raise DimensionMismatch(
                    "complex property violated at level %d: |A%dA%d|_max = %g"
                    % (i + 1, i + 1, i, m)
                )

    @property
    def dims(self):
        return [s.dim for s in self.spaces]

    def gram(self, n):
        return self.spaces[n]

    def op(self, n):
        """A_n, with zero maps beyond the chain ends."""
        if 0 <= n < len(self.operators):
            return self.operators[n]
        if n < 0:
            return np.zeros((self.spaces[0].dim, 0))
        return np.zeros((0, self.spaces[-1].dim))

    def composition_norms(self):
        return [
            float(np.max(np.abs(self.operators[i + 1] @ self.operators[i])))
            if (self.operators[i + 1] @ self.operators[i]).size
            else 0.0
            for i in range(len(self.operators) - 1)
        ]

    def to_json_dict(self):
        return {
            "dims": self.dims,
            "grams": [s.G.tolist() for s in self.spaces],
            "operators": [A.tolist() for A in self.operators],
        }

    @classmethod
    def from_json_dict(cls, data, tol=1e-12):
        dims = data["dims"]
        grams = [np.array(g, dtype=np.float64) for g in data["grams"]]
        ops = [np.array(A, dtype=np.float64) for A in data["operators"]]
        for d, g in zip(dims, grams):
            if g.shape != (d, d):
                raise DimensionMismatch("gram shape disagrees with dims")
        return cls(grams, ops, tol=tol)

    @classmethod
    def load(cls, path, tol=1e-12):
        with open(path) as f:
            return cls.from_json_dict(json.load(f), tol=tol)


def adjoint(A, g_dom, g_cod):
    """Weighted adjoint: <A x, y>_cod = <x, A* y>_dom for all x, y."""
    A = np.asarray(A, dtype=np.float64)
    if A.shape != (g_cod.dim, g_dom.dim):
        raise DimensionMismatch(
            "A is %r but Grams give (%d, %d)" % (A.shape, g_cod.dim, g_dom.dim)
        )
    if g_dom.dim == 0 or g_cod.dim == 0:
        return A.T.copy()
    c, low = cho_factor(g_dom.G)
    return cho_solve((c, low), A.T @ g_cod.G)


def _transformed(A, g_dom):
    """A L_dom^{-T}: the operator in dom-orthonormal coordinates."""
    if g_dom.dim == 0:
        return A
    return solve_triangular(g_dom.L, A.T, lower=True).T


def kernel_basis(A, g, tol=None):
    """G-orthonormal basis of N(A), columns of the returned matrix."""
    A = np.asarray(A, dtype=np.float64)
    n = g.dim
    if A.shape[0] == 0 or not A.size:
        A = np.zeros((1, n))
    At = _transformed(A, g)
    U, s, Vt = np.linalg.svd(At, full_matrices=True)
    smax = s[0] if s.size else 0.0
    if tol is None:
        tol = default_rank_tol(At.shape, smax)
    r = int(np.sum(s > tol))
    Y = Vt[r:].T  # orthonormal kernel in transformed coordinates
    return g.from_orthonormal(Y)


def rank_of(A, g_dom, g_cod, tol=None):
    At = _transformed(np.asarray(A, dtype=np.float64), g_dom)
    s = np.linalg.svd(At, compute_uv=False) if At.size else np.array([])
    smax = s[0] if s.size else 0.0
    if tol is None:
        tol = default_rank_tol(At.shape if At.size else (1, 1), smax)
    return int(np.sum(s > tol))


@dataclass
class CohomologyReport:
    n: int
    dimension: int
    basis: np.ndarray  # columns, G_n-orthonormal
    rank_tol: float

    def to_json_dict(self):
        return {
            "n": self.n,
            "dimension": self.dimension,
            "basis": self.basis.tolist(),
            "rank_tol": self.rank_tol,
        }


def cohomology(cx, n, tol=None):
    """Harmonic space N(A_n) ∩ N(A_{n-1}*) with a G_n-orthonormal basis."""
    key = ("cohomology", n, tol)
    if key in cx._cache:
        return cx._cache[key]
    g = cx.gram(n)
    A_n = cx.op(n)
    A_prev = cx.op(n - 1)
    # N(A_{n-1}*) = N(A_{n-1}^T G_n): no inverse Gram needed for the kernel
    stacked = np.vstack(
        [
            A_n if A_n.size else np.zeros((1, g.dim)),
            A_prev.T @ g.G if A_prev.size else np.zeros((1, g.dim)),
        ]
    )
    At = _transformed(stacked, g)
    s = np.linalg.svd(At, compute_uv=False) if At.size else np.array([])
    smax = s[0] if s.size else 0.0
    used_tol = default_rank_tol(At.shape, smax) if tol is None else tol
    basis = kernel_basis(stacked, g, tol=used_tol)
    report = CohomologyReport(
        n=n, dimension=basis.shape[1], basis=basis, rank_tol=used_tol
    )
    cx._cache[key] = report
    return report


def harmonic_projector(cx, n, tol=None):
    """G_n-orthogonal projector onto the harmonic space at level n."""
    B = cohomology(cx, n, tol=tol).basis
    return B @ B.T @ cx.gram(n).G


@dataclass
class HelmholtzResult:
    x: np.ndarray
    x_range: np.ndarray  # in R(A_{n-1})
    x_harm: np.ndarray
    x_costar: np.ndarray  # in R(A_n*)
    pairings: dict
    residual: float
    kernel_residuals: tuple  # (|A_n x_harm|, |A_{n-1}* x_harm|), op-relative


def helmholtz(x, cx, n, tol=1e-10):
    """Split x in H_n into range + harmonic + co-range parts.

    The range parts are G_n-orthogonal projections computed in orthonormal
    coordinates; the harmonic part is the remainder.  Reconstruction and
    pairwise orthogonality are verified at tolerance ``tol`` (relative to
    ``max(1, |x|_G)``).  How well the remainder annihilates A_n and A_{n-1}*
    is reported in ``kernel_residuals`` (relative to the operator scale);
    only a gross inconsistency there raises.
    """
    g = cx.gram(n)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (g.dim,):
        raise DimensionMismatch("x has wrong dimension")
    A_prev = cx.op(n - 1)
    A_n = cx.op(n)
    xt = g.L.T @ x

    key = ("helmholtz_bases", n)
    if key not in cx._cache:
        def ortho_range(M):
            # orthonormal basis (in transformed coordinates) of span(L^T M)
            if not M.size:
                return np.zeros((g.dim, 0))
            Mt = g.L.T @ M
            U, s, _ = np.linalg.svd(Mt, full_matrices=False)
            smax = s[0] if s.size else 0.0
            r = int(np.sum(s > default_rank_tol(Mt.shape, smax)))
            return U[:, :r]

        astar = (
            adjoint(A_n, g, cx.gram(n + 1)) if A_n.size else np.zeros((g.dim, 0))
        )
        cx._cache[key] = (ortho_range(A_prev), ortho_range(astar))
    q_range, q_costar = cx._cache[key]

    x_range = g.from_orthonormal(q_range @ (q_range.T @ xt))
    x_costar = g.from_orthonormal(q_costar @ (q_costar.T @ xt))
    x_harm = x - x_range - x_costar
    # Kernel residuals of the remainder, relative to the largest value the
    # operator could produce on an input of x's coordinate size.  They are
    # reported for callers to assert at their own tolerance; only a gross
    # inconsistency (wrong adjoint or Gram) raises here.
    e2 = max(float(np.linalg.norm(x)), 1.0e-300)
    op_a = float(np.max(np.abs(A_n))) if A_n.size else 0.0
    op_b = float(np.max(np.abs(A_prev.T @ g.G))) if A_prev.size else 0.0
    res_a = float(np.max(np.abs(A_n @ x_harm))) if A_n.size else 0.0
    res_b = (
        float(np.max(np.abs(A_prev.T @ (g.G @ x_harm)))) if A_prev.size else 0.0
    )
    kernel_residuals = (
        res_a / max(1.0, op_a * e2),
        res_b / max(1.0, op_b * e2),
    )
    if max(kernel_residuals) > 1e-6:
        raise SolverFailure(
            "harmonic remainder fails kernel residuals: %g" % max(res_a, res_b)
        )
    pairings = {
        "range_harm": g.inner(x_range, x_harm),
        "range_costar": g.inner(x_range, x_costar),
        "harm_costar": g.inner(x_harm, x_costar),
    }
    residual = g.norm(x - (x_range + x_harm + x_costar))
    scale = max(1.0, g.norm(x))
    if residual > tol * scale:
        raise SolverFailure("decomposition fails to reconstruct x: %g" % residual)
    worst_pairing = max(abs(v) for v in pairings.values())
    if worst_pairing > tol * scale * scale:
        raise SolverFailure(
            "decomposition parts are not orthogonal: %g" % worst_pairing
        )
    return HelmholtzResult(
        x=x,
        x_range=x_range,
        x_harm=x_harm,
        x_costar=x_costar,
        pairings=pairings,
        residual=residual,
        kernel_residuals=kernel_residuals,
    )


@dataclass
class PoincareReport:
    label: str
    constant: float
    sigma_min: float
    extremal: np.ndarray
    rank_tol: float

    def to_json_dict(self):
        return {
            "label": self.label,
            "constant": self.constant,
            "sigma_min": self.sigma_min,
            "rank_tol": self.rank_tol,
        }


def poincare_constant(A, g_dom, g_cod, label="A", tol=None):
    """c = 1/sigma_min+ of the reduced operator, with its extremal vector.

    sigma are the singular values of L_cod^T A L_dom^{-T}; the constant is
    sharp: the returned extremal x satisfies |x|_dom = c |A x|_cod.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.shape != (g_cod.dim, g_dom.dim):
        raise DimensionMismatch("operator/Gram shapes disagree")
    At = g_cod.L.T @ _transformed(A, g_dom)
    U, s, Vt = np.linalg.svd(At)
    smax = s[0] if s.size else 0.0
    used_tol = default_rank_tol(At.shape, smax) if tol is None else tol
    positive = s[s > used_tol]
    if not positive.size:
        raise ZeroOperator("operator is numerically zero")
    sigma = float(positive[-1])
    k = int(np.sum(s > used_tol)) - 1
    x = g_dom.from_orthonormal(Vt[k])
    return PoincareReport(
        label=label,
        constant=1.0 / sigma,
        sigma_min=sigma,
        extremal=x,
        rank_tol=used_tol,
    )


def complex_constants(cx, tol=None):
    """c0, c1, c2 for the three operators of the chain."""
    out = {}
    for i, name in enumerate(("c0", "c1", "c2")):
        try:
            out[name] = poincare_constant(
                cx.op(i), cx.gram(i), cx.gram(i + 1), label=name, tol=tol
            )
        except ZeroOperator:
            out[name] = None
    return out


def mixed_estimate_check(x, cx, c0, c1, ortho_tol=1e-8):
    """|x|_e^2 <= c1^2 |A1 x|_mu^2 + c0^2 |A0* x|^2 for x perp Harm at n=1."""
    g1 = cx.gram(1)
    x = np.asarray(x, dtype=np.float64)
    H = cohomology(cx, 1).basis
    if H.size:
        coef = H.T @ (g1.G @ x)
        if np.linalg.norm(coef) > ortho_tol * max(g1.norm(x), 1e-300):
            raise NotOrthogonalToHarmonics(
                "harmonic component %g" % float(np.linalg.norm(coef))
            )
    a0s = adjoint(cx.op(0), cx.gram(0), g1)
    lhs = g1.inner(x, x)
    t1 = cx.gram(2).inner(cx.op(1) @ x, cx.op(1) @ x) if cx.op(1).size else 0.0
    t2 = cx.gram(0).inner(a0s @ x, a0s @ x) if a0s.size else 0.0
    rhs = c1 * c1 * t1 + c0 * c0 * t2
    slack = rhs - lhs
    holds = lhs <= rhs * (1.0 + 1e-10) + 1e-12
    return holds, slack


def reduced_inverse(A, g_dom, g_cod, tol=None):
    """Weighted pseudo-inverse P with A P = id on R(A) and R(P) perp N(A)."""
    A = np.asarray(A, dtype=np.float64)
    At = g_cod.L.T @ _transformed(A, g_dom)
    U, s, Vt = np.linalg.svd(At, full_matrices=False)
    smax = s[0] if s.size else 0.0
    used_tol = default_rank_tol(At.shape if At.size else (1, 1), smax) if tol is None else tol
    inv = np.where(s > used_tol, 1.0 / np.where(s > used_tol, s, 1.0), 0.0)
    Pt = (Vt.T * inv) @ U.T
    # undo the congruence on both sides
    P = g_dom.from_orthonormal(Pt) @ g_cod.L.T
    return P


@dataclass
class DecompositionOperators:
    n: int
    q1: np.ndarray
    q0: np.ndarray
    complement: np.ndarray  # N = 1 - Q1
    harmonic: np.ndarray  # projector onto Harm composed with N
    potential_n: np.ndarray
    potential_prev: np.ndarray
    harm_dim: int

    def two_term_defect(self, A_prev):
        """max |Q1 + A_{n-1} Q0 - id|; zero iff trivial cohomology at n."""
        n = self.q1.shape[0]
        M = self.q1 + (A_prev @ self.q0 if A_prev.size else 0.0) - np.eye(n)
        return float(np.max(np.abs(M))) if n else 0.0

    def three_term_defect(self, A_prev):
        n = self.q1.shape[0]
        M = (
            self.q1
            + self.harmonic
            + (A_prev @ self.q0 if A_prev.size else 0.0)
            - np.eye(n)
        )
        return float(np.max(np.abs(M))) if n else 0.0


def regular_decomposition(cx, n, p_n=None, p_prev=None, tol=1e-10):
    """Decomposition operators at level n: Q1 = P_n A_n, Q0 = P_{n-1}(1-Q1).

    With trivial cohomology at level n this gives Q1 + A_{n-1} Q0 = id; in
    general the identity needs the harmonic term: Q1 + Qh + A_{n-1} Q0 = id
    where Qh projects the complement onto the harmonic space.
    """
    A_n = cx.op(n)
    A_prev = cx.op(n - 1)
    g_n = cx.gram(n)
    if p_n is None:
        p_n = reduced_inverse(A_n, g_n, cx.gram(n + 1))
    if p_prev is None:
        p_prev = reduced_inverse(A_prev, cx.gram(n - 1), g_n) if A_prev.size else np.zeros((A_prev.shape[1], g_n.dim))
    if A_n.size:
        defect = float(np.max(np.abs(A_n @ p_n @ A_n - A_n)))
        scale = max(float(np.max(np.abs(A_n))), 1.0)
        if defect > tol * scale * 100:
            raise InvalidPotential(
                "A_n P_n is not the identity on R(A_n): defect %g" % defect
            )
    dim = g_n.dim
    q1 = p_n @ A_n if A_n.size else np.zeros((dim, dim))
    complement = np.eye(dim) - q1
    pi_h = harmonic_projector(cx, n)
    harmonic = pi_h @ complement
    q0 = p_prev @ complement if A_prev.size else np.zeros((A_prev.shape[1], dim))
    harm_dim = cohomology(cx, n).dimension
    return DecompositionOperators(
        n=n,
        q1=q1,
        q0=q0,
        complement=complement,
        harmonic=harmonic,
        potential_n=p_n,
        potential_prev=p_prev,
        harm_dim=harm_dim,
    )


def operator_norm(M, g_dom, g_cod):
    """Weighted operator norm: largest singular value between the spaces."""
    M = np.asarray(M, dtype=np.float64)
    if not M.size:
        return 0.0
    Mt = g_cod.L.T @ _transformed(M, g_dom)
    s = np.linalg.svd(Mt, compute_uv=False)
    return float(s[0]) if s.size else 0.0


def _span_rank(X, g, tol=None, floor=1.0):
    """Rank of the span of the columns of X in the G geometry.

    The inputs here are G-normalized vectors (basis vectors or projections
    of them), so the rank tolerance keeps an O(floor) reference scale: a
    matrix of projections that is numerically zero must report rank 0, not
    full rank relative to its own noise level.
    """
    if not X.size:
        return 0
    Y = g.L.T @ X
    s = np.linalg.svd(Y, compute_uv=False)
    smax = s[0] if s.size else 0.0
    if tol is None:
        tol = default_rank_tol(Y.shape, max(smax, floor))
    return int(np.sum(s > tol))


def _same_span(X, Y, g, tol=None):
    rx = _span_rank(X, g, tol)
    ry = _span_rank(Y, g, tol)
    rj = _span_rank(
        np.hstack([X, Y]) if X.size and Y.size else (X if X.size else Y), g, tol
    )
    return rx == ry == rj


def kernel_projector_images(cx, n=1, tol=None):
    """Both kernel projector images of the harmonic space, compared.

    pi onto N(A_{n-1}*) applied to N(A_n) and pi onto N(A_n) applied to
    N(A_{n-1}*) both span the harmonic space; the projector onto
    N(A_{n-1}*) annihilates R(A_{n-1}).
    """
    g = cx.gram(n)
    A_n = cx.op(n)
    A_prev = cx.op(n - 1)
    kn = kernel_basis(
        A_n if A_n.size else np.zeros((1, g.dim)), g, tol=tol
    )
    kstar = kernel_basis(
        A_prev.T @ g.G if A_prev.size else np.zeros((1, g.dim)), g, tol=tol
    )
    pi_star = kstar @ kstar.T @ g.G  # G-orthogonal projector onto N(A*)
    pi_ker = kn @ kn.T @ g.G
    harm = cohomology(cx, n, tol=tol).basis
    img1 = pi_star @ kn
    img2 = pi_ker @ kstar
    range_prev = A_prev if A_prev.size else np.zeros((g.dim, 0))
    on_range = (
        float(np.max(np.abs(pi_star @ range_prev))) if range_prev.size else 0.0
    )
    return {
        "harm_dim": harm.shape[1],
        "image_rank_star": _span_rank(img1, g, tol),
        "image_rank_ker": _span_rank(img2, g, tol),
        "spans_agree": bool(
            _same_span(img1, harm, g, tol) and _same_span(img2, harm, g, tol)
        )
        if harm.size
        else (_span_rank(img1, g, tol) == 0 and _span_rank(img2, g, tol) == 0),
        "projector_kills_range": on_range,
    }


def pre_basis_check(B, cx, n=1, tol=None):
    """Validate a candidate pre-basis B (columns) of the harmonic space.

    B must consist of kernel elements of A_n, have exactly harm-dim many
    columns, project onto a basis of the harmonic space, and separate it:
    Harm ∩ B-perp = {0} and N(A_{n-1}*) ∩ B-perp = R(A_n*).
    """
    g = cx.gram(n)
    B = np.asarray(B, dtype=np.float64)
    if B.ndim == 1:
        B = B[:, None]
    B = B.copy()
    for j in range(B.shape[1]):  # scale-invariant rank decisions
        nj = g.norm(B[:, j])
        if nj > 0:
            B[:, j] /= nj
    harm = cohomology(cx, n, tol=tol).basis
    d = harm.shape[1]
    if B.shape[1] != d:
        raise WrongCardinality(
            "pre-basis has %d columns, harmonic dimension is %d"
            % (B.shape[1], d)
        )
    A_prev = cx.op(n - 1)
    kstar = kernel_basis(
        A_prev.T @ g.G if A_prev.size else np.zeros((1, g.dim)), g, tol=tol
    )
    pi_star = kstar @ kstar.T @ g.G
    projected = pi_star @ B
    proj_rank = _span_rank(projected, g, tol)
    # Harm ∩ B-perp: harmonic combinations annihilated by <B, .>_G
    M = B.T @ g.G @ harm if harm.size else np.zeros((B.shape[1], 0))
    cap_dim = (
        M.shape[1] - np.linalg.matrix_rank(M) if M.size else harm.shape[1]
    )
    # N(A_{n-1}*) ∩ B-perp vs R(A_n*)
    A_n = cx.op(n)
    astar = adjoint(A_n, g, cx.gram(n + 1)) if A_n.size else np.zeros((g.dim, 0))
    if kstar.size:
        W = B.T @ g.G @ kstar
        if W.size:
            _, s, Vt = np.linalg.svd(W, full_matrices=True)
            r = int(np.sum(s > default_rank_tol(W.shape, s[0] if s.size else 0)))
            cap_basis = kstar @ Vt[r:].T
        else:
            cap_basis = kstar
    else:
        cap_basis = np.zeros((g.dim, 0))
    equals_range = _same_span(cap_basis, astar, g, tol)
    ok = proj_rank == d and cap_dim == 0 and equals_range
    return {
        "cardinality": B.shape[1],
        "projected_rank": proj_rank,
        "harm_cap_perp_dim": int(cap_dim),
        "costar_equals_range": bool(equals_range),
        "passed": bool(ok),
    }
