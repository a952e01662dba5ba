"""Exact polynomial tensor calculus on R^3.

Sparse trivariate polynomials with rational coefficients, vector and matrix
fields over them, and the first/second order differential operators of the
elasticity complex:

    grad / div / rot            on scalar resp. vector fields,
    Grad / Rot / Div            acting row-wise on matrix fields,
    sym_grad(v) = sym(Grad v),
    rotrot_t(S) = Rot((Rot S)^T).

Everything is exact: no floats, no tolerances.  The two complex properties

    rotrot_t(sym_grad(v)) == 0      and      Div(rotrot_t(S)) == 0

hold identically and are used as smoke oracles all over the test suite.
"""

import itertools

from .rational import Q, QZERO, as_q, qstr
from .tensor_algebra import NotSkew

_AXES = "xyz"


class Poly3:
    """Sparse polynomial in x, y, z: {(a, b, c): rational}, no zero values."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        if terms is None:
            self.terms = {}
        else:
            self.terms = {e: c for e, c in terms.items() if c != 0}

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def constant(cls, c):
        c = as_q(c)
        return cls({(0, 0, 0): c}) if c != 0 else cls()

    @classmethod
    def monomial(cls, a, b, c, coeff=1):
        coeff = as_q(coeff)
        return cls({(a, b, c): coeff}) if coeff != 0 else cls()

    @classmethod
    def variable(cls, axis):
        e = [0, 0, 0]
        e[axis] = 1
        return cls({tuple(e): Q(1)})

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, QZERO) + c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
        p = Poly3.__new__(Poly3)
        p.terms = out
        return p

    def __sub__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, QZERO) - c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
        p = Poly3.__new__(Poly3)
        p.terms = out
        return p

    def __neg__(self):
        p = Poly3.__new__(Poly3)
        p.terms = {e: -c for e, c in self.terms.items()}
        return p

    def __mul__(self, other):
        if isinstance(other, Poly3):
            out = {}
            for (a1, b1, c1), u in self.terms.items():
                for (a2, b2, c2), v in other.terms.items():
                    e = (a1 + a2, b1 + b2, c1 + c2)
                    s = out.get(e, QZERO) + u * v
                    if s == 0:
                        out.pop(e, None)
                    else:
                        out[e] = s
            p = Poly3.__new__(Poly3)
            p.terms = out
            return p
        if isinstance(other, (PolyVecField, PolyMatField)):
            return NotImplemented
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c):
        c = as_q(c)
        if c == 0:
            return Poly3()
        p = Poly3.__new__(Poly3)
        p.terms = {e: c * v for e, v in self.terms.items()}
        return p

    def __eq__(self, other):
        return isinstance(other, Poly3) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self):
        return not self.terms

    # -- calculus ----------------------------------------------------------

    def diff(self, axis):
        out = {}
        for e, c in self.terms.items():
            k = e[axis]
            if k == 0:
                continue
            e2 = list(e)
            e2[axis] = k - 1
            out[tuple(e2)] = c * k
        p = Poly3.__new__(Poly3)
        p.terms = out
        return p

    def partial(self, alpha):
        """Apply the mixed partial d^alpha, alpha = (i, j, k) orders."""
        p = self
        for axis, n in enumerate(alpha):
            for _ in range(n):
                p = p.diff(axis)
        return p

    def eval(self, point):
        """Exact evaluation at a rational point (tuple of 3 rationals)."""
        x, y, z = (as_q(t) for t in point)
        total = QZERO
        for (a, b, c), coeff in self.terms.items():
            total += coeff * x**a * y**b * z**c
        return total

    # -- bookkeeping -------------------------------------------------------

    def total_degree(self):
        """Max total degree of a term; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(a + b + c for (a, b, c) in self.terms)

    def degrees_per_var(self):
        if not self.terms:
            return (-1, -1, -1)
        return tuple(max(e[i] for e in self.terms) for i in range(3))

    def canonical_text(self):
        """Deterministic text form: terms sorted by (total degree, exponents),
        highest first, each as 'coef * x^a y^b z^c'."""
        if not self.terms:
            return "0"
        keys = sorted(
            self.terms, key=lambda e: (e[0] + e[1] + e[2], e), reverse=True
        )
        parts = []
        for e in keys:
            c = self.terms[e]
            factors = [
                ("%s^%d" % (_AXES[i], e[i])) if e[i] > 1 else _AXES[i]
                for i in range(3)
                if e[i] > 0
            ]
            if not factors:
                parts.append(qstr(c))
            else:
                parts.append(qstr(c) + " * " + " ".join(factors))
        return " + ".join(parts)

    def __repr__(self):
        return "Poly3<%s>" % self.canonical_text()


def _zero3():
    return (Poly3(), Poly3(), Poly3())


class PolyVecField:
    """Vector field with three Poly3 components."""

    __slots__ = ("comps",)

    def __init__(self, comps):
        t = tuple(comps)
        if len(t) != 3:
            raise ValueError("PolyVecField needs 3 components")
        self.comps = t

    @classmethod
    def zero(cls):
        return cls(_zero3())

    def __getitem__(self, i):
        return self.comps[i]

    def __iter__(self):
        return iter(self.comps)

    def __add__(self, other):
        return PolyVecField(a + b for a, b in zip(self.comps, other.comps))

    def __sub__(self, other):
        return PolyVecField(a - b for a, b in zip(self.comps, other.comps))

    def __neg__(self):
        return PolyVecField(-a for a in self.comps)

    def scale(self, c):
        return PolyVecField(a.scale(c) for a in self.comps)

    def __rmul__(self, c):
        if isinstance(c, Poly3):
            return PolyVecField(c * a for a in self.comps)
        return self.scale(c)

    def __eq__(self, other):
        return isinstance(other, PolyVecField) and self.comps == other.comps

    def is_zero(self):
        return all(p.is_zero() for p in self.comps)

    def dot(self, other):
        return sum((a * b for a, b in zip(self.comps, other.comps)), Poly3())

    def eval(self, point):
        return tuple(p.eval(point) for p in self.comps)

    def total_degree(self):
        return max(p.total_degree() for p in self.comps)

    def canonical_text(self):
        return "(" + "; ".join(p.canonical_text() for p in self.comps) + ")"

    def __repr__(self):
        return "PolyVecField%s" % self.canonical_text()


class PolyMatField:
    """3x3 matrix field, row-major tuple of nine Poly3 entries."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        t = tuple(entries)
        if len(t) != 9:
            raise ValueError("PolyMatField needs 9 entries")
        self.entries = t

    @classmethod
    def zero(cls):
        return cls(tuple(Poly3() for _ in range(9)))

    @classmethod
    def from_rows(cls, r0, r1, r2):
        return cls(tuple(r0.comps) + tuple(r1.comps) + tuple(r2.comps))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[3 * i + j]

    def row(self, i):
        return PolyVecField(self.entries[3 * i : 3 * i + 3])

    def col(self, j):
        return PolyVecField(
            (self.entries[j], self.entries[3 + j], self.entries[6 + j])
        )

    def __add__(self, other):
        return PolyMatField(a + b for a, b in zip(self.entries, other.entries))

    def __sub__(self, other):
        return PolyMatField(a - b for a, b in zip(self.entries, other.entries))

    def __neg__(self):
        return PolyMatField(-a for a in self.entries)

    def scale(self, c):
        return PolyMatField(a.scale(c) for a in self.entries)

    def __rmul__(self, c):
        if isinstance(c, Poly3):
            return PolyMatField(c * a for a in self.entries)
        return self.scale(c)

    def __matmul__(self, other):
        if isinstance(other, PolyVecField):
            return PolyVecField(self.row(i).dot(other) for i in range(3))
        if isinstance(other, PolyMatField):
            return PolyMatField(
                self.row(i).dot(other.col(j))
                for i in range(3)
                for j in range(3)
            )
        return NotImplemented

    def transpose(self):
        e = self.entries
        return PolyMatField((e[0], e[3], e[6], e[1], e[4], e[7], e[2], e[5], e[8]))

    def __eq__(self, other):
        return isinstance(other, PolyMatField) and self.entries == other.entries

    def is_zero(self):
        return all(p.is_zero() for p in self.entries)

    def is_symmetric(self):
        e = self.entries
        return e[1] == e[3] and e[2] == e[6] and e[5] == e[7]

    def eval(self, point):
        return tuple(p.eval(point) for p in self.entries)

    def total_degree(self):
        return max(p.total_degree() for p in self.entries)

    def canonical_text(self):
        rows = []
        for i in range(3):
            rows.append(
                "["
                + "; ".join(
                    self.entries[3 * i + j].canonical_text() for j in range(3)
                )
                + "]"
            )
        return "[" + " ".join(rows) + "]"

    def __repr__(self):
        return "PolyMatField%s" % self.canonical_text()


# ---------------------------------------------------------------------------
# first-order operators
# ---------------------------------------------------------------------------


def grad(f):
    return PolyVecField((f.diff(0), f.diff(1), f.diff(2)))


def div(v):
    return v[0].diff(0) + v[1].diff(1) + v[2].diff(2)


def rot(v):
    return PolyVecField(
        (
            v[2].diff(1) - v[1].diff(2),
            v[0].diff(2) - v[2].diff(0),
            v[1].diff(0) - v[0].diff(1),
        )
    )


def Grad(v):
    """Row-wise gradient: (Grad v)[i][j] = d_j v_i."""
    return PolyMatField.from_rows(grad(v[0]), grad(v[1]), grad(v[2]))


def Rot(S):
    """Row-wise rotation of a matrix field."""
    return PolyMatField.from_rows(rot(S.row(0)), rot(S.row(1)), rot(S.row(2)))


def Div(S):
    """Row-wise divergence of a matrix field."""
    return PolyVecField((div(S.row(0)), div(S.row(1)), div(S.row(2))))


# ---------------------------------------------------------------------------
# pointwise algebra lifted to fields
# ---------------------------------------------------------------------------


def sym(S):
    e = S.entries
    h = Q(1, 2)
    s01 = (e[1] + e[3]).scale(h)
    s02 = (e[2] + e[6]).scale(h)
    s12 = (e[5] + e[7]).scale(h)
    return PolyMatField((e[0], s01, s02, s01, e[4], s12, s02, s12, e[8]))


def skw(S):
    e = S.entries
    h = Q(1, 2)
    a = (e[1] - e[3]).scale(h)
    b = (e[2] - e[6]).scale(h)
    c = (e[5] - e[7]).scale(h)
    z = Poly3()
    return PolyMatField((z, a, b, -a, z, c, -b, -c, z))


def trace(S):
    e = S.entries
    return e[0] + e[4] + e[8]


def dev(S):
    t = trace(S).scale(Q(1, 3))
    e = S.entries
    return PolyMatField(
        (e[0] - t, e[1], e[2], e[3], e[4] - t, e[5], e[6], e[7], e[8] - t)
    )


def spn(v):
    z = Poly3()
    a1, a2, a3 = v.comps
    return PolyMatField((z, -a3, a2, a3, z, -a1, -a2, a1, z))


def spn_inv(S):
    """Axial vector field of an exactly skew matrix field."""
    e = S.entries
    if not (
        e[0].is_zero()
        and e[4].is_zero()
        and e[8].is_zero()
        and (e[1] + e[3]).is_zero()
        and (e[2] + e[6]).is_zero()
        and (e[5] + e[7]).is_zero()
    ):
        raise NotSkew("spn_inv on a field needs sym(S) == 0 exactly")
    return PolyVecField((e[7], e[2], e[3]))


def cross(v, w):
    a1, a2, a3 = v.comps
    b1, b2, b3 = w.comps
    return PolyVecField(
        (a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1)
    )


def scalar_id(u):
    """u * identity as a matrix field."""
    z = Poly3()
    return PolyMatField((u, z, z, z, u, z, z, z, u))


# ---------------------------------------------------------------------------
# the elasticity complex operators
# ---------------------------------------------------------------------------


def sym_grad(v):
    return sym(Grad(v))


def rotrot_t(S):
    """Second-order operator Rot((Rot S)^T); maps symmetric to symmetric."""
    return Rot(Rot(S).transpose())


def symgrad_then_rotrot(v):
    """Complex property residual: identically zero for every vector field."""
    return rotrot_t(sym_grad(v))


def rotrot_then_div(S):
    """Complex property residual: identically zero for every matrix field."""
    return Div(rotrot_t(S))


def hessian(f):
    """Grad grad f (symmetric 3x3 field of second partials)."""
    return Grad(grad(f))


def partial_vec(v, alpha):
    return PolyVecField(p.partial(alpha) for p in v.comps)


def partial_mat(S, alpha):
    return PolyMatField(p.partial(alpha) for p in S.entries)


# ---------------------------------------------------------------------------
# random sampling (seeded, exact coefficients)
# ---------------------------------------------------------------------------


def random_poly(rng, degree=3):
    """Random polynomial of total degree <= degree.

    Coefficients are uniform integers in [-9, 9] divided by d in {1, 2, 3};
    zero numerators drop out, keeping the representation sparse.
    """
    terms = {}
    for a, b, c in itertools.product(range(degree + 1), repeat=3):
        if a + b + c > degree:
            continue
        num = rng.randint(-9, 9)
        den = rng.choice((1, 2, 3))
        if num != 0:
            terms[(a, b, c)] = Q(num, den)
    return Poly3(terms)


def random_vec_field(rng, degree=3):
    return PolyVecField(random_poly(rng, degree) for _ in range(3))


def random_mat_field(rng, degree=3):
    return PolyMatField(random_poly(rng, degree) for _ in range(9))
