"""Pointwise 3D tensor algebra: vectors, matrices, symmetric matrices.

Entries are generic: anything supporting ring arithmetic works (exact
rationals, Python ints, floats).  The exact invariants (spn/spn_inv round
trips, sym+skw splitting, deviatoric projections) only make sense for exact
scalar types; with floats they hold up to rounding.

Conventions
-----------
``spn(a)`` is the skew matrix with ``spn(a) @ w == cross(a, w)``::

    spn(a) = [[ 0,  -a3,  a2],
              [ a3,  0,  -a1],
              [-a2,  a1,  0 ]]

``spn_inv`` inverts it and refuses anything with a symmetric part.
"""

from .rational import Q


class NotSkew(ValueError):
    """Raised when spn_inv is applied to a matrix with sym(M) != 0."""


def _as3(seq, what):
    t = tuple(seq)
    if len(t) != 3:
        raise ValueError("%s needs exactly 3 entries, got %d" % (what, len(t)))
    return t


class Vec3:
    """Column vector with three generic scalar entries."""

    __slots__ = ("xyz",)

    def __init__(self, x, y, z):
        self.xyz = (x, y, z)

    @classmethod
    def of(cls, seq):
        return cls(*_as3(seq, "Vec3"))

    def __getitem__(self, i):
        return self.xyz[i]

    def __iter__(self):
        return iter(self.xyz)

    def __add__(self, other):
        return Vec3(*(a + b for a, b in zip(self.xyz, other.xyz)))

    def __sub__(self, other):
        return Vec3(*(a - b for a, b in zip(self.xyz, other.xyz)))

    def __neg__(self):
        return Vec3(*(-a for a in self.xyz))

    def scale(self, c):
        return Vec3(*(c * a for a in self.xyz))

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        return isinstance(other, Vec3) and self.xyz == other.xyz

    def __hash__(self):
        return hash(("Vec3", self.xyz))

    def __repr__(self):
        return "Vec3(%r, %r, %r)" % self.xyz

    def dot(self, other):
        a, b, c = self.xyz
        d, e, f = other.xyz
        return a * d + b * e + c * f


class Mat3:
    """Dense 3x3 matrix, row-major tuple of 9 generic scalars."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        t = tuple(entries)
        if len(t) != 9:
            raise ValueError("Mat3 needs 9 entries, got %d" % len(t))
        self.entries = t

    @classmethod
    def from_rows(cls, r0, r1, r2):
        return cls(tuple(r0) + tuple(r1) + tuple(r2))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[3 * i + j]

    def row(self, i):
        return Vec3(*self.entries[3 * i : 3 * i + 3])

    def col(self, j):
        return Vec3(self.entries[j], self.entries[3 + j], self.entries[6 + j])

    def __add__(self, other):
        return Mat3(a + b for a, b in zip(self.entries, other.entries))

    def __sub__(self, other):
        return Mat3(a - b for a, b in zip(self.entries, other.entries))

    def __neg__(self):
        return Mat3(-a for a in self.entries)

    def scale(self, c):
        return Mat3(c * a for a in self.entries)

    def __rmul__(self, c):
        return self.scale(c)

    def __matmul__(self, other):
        if isinstance(other, Vec3):
            return Vec3(*(self.row(i).dot(other) for i in range(3)))
        if isinstance(other, Mat3):
            e = self.entries
            f = other.entries
            out = []
            for i in range(3):
                for j in range(3):
                    out.append(
                        e[3 * i] * f[j]
                        + e[3 * i + 1] * f[3 + j]
                        + e[3 * i + 2] * f[6 + j]
                    )
            return Mat3(out)
        return NotImplemented

    def transpose(self):
        e = self.entries
        return Mat3((e[0], e[3], e[6], e[1], e[4], e[7], e[2], e[5], e[8]))

    def __eq__(self, other):
        return isinstance(other, Mat3) and self.entries == other.entries

    def __hash__(self):
        return hash(("Mat3", self.entries))

    def __repr__(self):
        e = self.entries
        return "Mat3(%r)" % (e,)


class SymMat3:
    """Symmetric 3x3 matrix storing the six independent entries.

    Storage order is (xx, yy, zz, xy, xz, yz).  Conversion to and from
    Mat3 is explicit; there is no implicit mixing of the two types.
    """

    __slots__ = ("six",)

    ORDER = ("xx", "yy", "zz", "xy", "xz", "yz")

    def __init__(self, xx, yy, zz, xy, xz, yz):
        self.six = (xx, yy, zz, xy, xz, yz)

    @classmethod
    def from_mat3(cls, m):
        """Extract the entries of a matrix that is already exactly symmetric."""
        e = m.entries
        if e[1] != e[3] or e[2] != e[6] or e[5] != e[7]:
            raise ValueError("matrix is not symmetric; use sym() to project")
        return cls(e[0], e[4], e[8], e[1], e[2], e[5])

    def to_mat3(self):
        xx, yy, zz, xy, xz, yz = self.six
        return Mat3((xx, xy, xz, xy, yy, yz, xz, yz, zz))

    def __add__(self, other):
        return SymMat3(*(a + b for a, b in zip(self.six, other.six)))

    def __sub__(self, other):
        return SymMat3(*(a - b for a, b in zip(self.six, other.six)))

    def __neg__(self):
        return SymMat3(*(-a for a in self.six))

    def scale(self, c):
        return SymMat3(*(c * a for a in self.six))

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        return isinstance(other, SymMat3) and self.six == other.six

    def __hash__(self):
        return hash(("SymMat3", self.six))

    def __repr__(self):
        return "SymMat3%r" % (self.six,)


def identity_mat(one=None):
    """3x3 identity; pass the ring's unit to control the entry type."""
    if one is None:
        one = Q(1)
    zero = one - one
    return Mat3((one, zero, zero, zero, one, zero, zero, zero, one))


def cross(v, w):
    a1, a2, a3 = v.xyz
    b1, b2, b3 = w.xyz
    return Vec3(a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1)


def spn(v):
    """Skew matrix of a vector: spn(v) @ w == cross(v, w)."""
    a1, a2, a3 = v.xyz
    z = a1 - a1
    return Mat3((z, -a3, a2, a3, z, -a1, -a2, a1, z))


def spn_inv(m):
    """Axial vector of a skew matrix.

    Raises NotSkew when sym(m) != 0; exactness of the check is the caller's
    responsibility (use exact scalars if it matters).
    """
    e = m.entries
    if (
        e[0] != -e[0]
        or e[4] != -e[4]
        or e[8] != -e[8]
        or e[1] != -e[3]
        or e[2] != -e[6]
        or e[5] != -e[7]
    ):
        raise NotSkew("spn_inv needs sym(M) == 0")
    return Vec3(e[7], e[2], e[3])


def _half(x):
    # keep float entries float and exact entries exact
    return 0.5 * x if isinstance(x, float) else Q(1, 2) * x


def _third(x):
    return x / 3.0 if isinstance(x, float) else Q(1, 3) * x


def sym(m):
    """Symmetric part (M + M^T)/2 as a SymMat3."""
    e = m.entries
    return SymMat3(
        e[0], e[4], e[8],
        _half(e[1] + e[3]),
        _half(e[2] + e[6]),
        _half(e[5] + e[7]),
    )


def skw(m):
    """Skew part (M - M^T)/2, returned as a full Mat3."""
    e = m.entries
    a = _half(e[1] - e[3])
    b = _half(e[2] - e[6])
    c = _half(e[5] - e[7])
    z = e[0] - e[0]
    return Mat3((z, a, b, -a, z, c, -b, -c, z))


def tr(m):
    if isinstance(m, SymMat3):
        return m.six[0] + m.six[1] + m.six[2]
    e = m.entries
    return e[0] + e[4] + e[8]


def dev(m):
    """Trace-free (deviatoric) part M - tr(M)/3 * id."""
    t = _third(tr(m))
    if isinstance(m, SymMat3):
        xx, yy, zz, xy, xz, yz = m.six
        return SymMat3(xx - t, yy - t, zz - t, xy, xz, yz)
    e = m.entries
    return Mat3(
        (e[0] - t, e[1], e[2], e[3], e[4] - t, e[5], e[6], e[7], e[8 ] - t)
    )
