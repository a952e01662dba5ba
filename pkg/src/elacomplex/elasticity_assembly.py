"""Discrete elasticity complexes on the unit box, assembled exactly.

The chain

    V0 --sym_grad--> V1 --rotrot_t--> V2 --Div--> V3

is realized on spaces of polynomial fields over [0,1]^3, with essential
boundary conditions imposed on a selectable set of box faces.  Every level is
spanned by fields with exact rational coefficients, and the three operator
matrices are exact rational matrices.  The inclusions R(A_k) <= V_{k+1} hold
by construction: the images of the level-k basis fields are themselves used
as basis candidates for level k+1 (ahead of the generator fields), so an
image is either a basis vector of the next level or an exactly verified
rational combination of earlier image basis vectors.  As a consequence the
compositions A1*A0 and A2*A1 vanish identically at the rational stage.

Linear independence of the candidate fields is decided by modular echelon
elimination with rational reconstruction (`exactlin`); every dependency that
the selection reports is re-verified by exact rational arithmetic on the
coefficient vectors, so the kept basis, the operator matrices, and all
derived integer invariants (ranks, kernel dimensions, cohomology dimensions)
are certified, not merely floating-point estimates.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from . import exactlin
from . import fa_toolbox as fa
from . import poly_calculus as pc
from .poly_calculus import Poly3, PolyMatField, PolyVecField
from .rational import Q, as_q

FACE_NAMES = ("X0", "X1", "Y0", "Y1", "Z0", "Z1")

_KIND_COMPONENTS = {"scalar": 1, "vector": 3, "symmetric-tensor": 6, "matrix": 9}
_SYM_ENTRIES = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
_MAT_ENTRIES = tuple((i, j) for i in range(3) for j in range(3))
_KIND_WEIGHTS = {
    "scalar": (1,),
    "vector": (1, 1, 1),
    "symmetric-tensor": (1, 1, 1, 2, 2, 2),
    "matrix": (1,) * 9,
}
_COORD_LIMIT = 2**62


class DegreeTooLow(ValueError):
    """Requested polynomial degree cannot carry the requested constraints."""


class AssemblyError(RuntimeError):
    """Exact assembly failed even after escalating the modular prime set."""


# ---------------------------------------------------------------------------
# boundary selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundarySelection:
    """A subset of the six box faces carrying essential conditions."""

    faces: frozenset

    @classmethod
    def parse(cls, spec):
        if isinstance(spec, BoundarySelection):
            return spec
        if spec is None:
            return cls(frozenset())
        if isinstance(spec, str):
            text = spec.strip()
            low = text.lower()
            if low in ("", "none"):
                return cls(frozenset())
            if low == "all":
                return cls(frozenset(FACE_NAMES))
            parts = [t for t in text.replace("+", ",").split(",") if t.strip()]
            names = [t.strip().upper() for t in parts]
        else:
            names = [str(t).strip().upper() for t in spec]
        for name in names:
            if name not in FACE_NAMES:
                raise ValueError("unknown face %r; faces are %s" % (name, FACE_NAMES))
        return cls(frozenset(names))

    def orders(self, axis, vanish_order):
        """Vanishing orders (m0, m1) at the two faces of a coordinate axis."""
        m0 = vanish_order if FACE_NAMES[2 * axis] in self.faces else 0
        m1 = vanish_order if FACE_NAMES[2 * axis + 1] in self.faces else 0
        return m0, m1

    @property
    def label(self):
        if not self.faces:
            return "none"
        if self.faces == frozenset(FACE_NAMES):
            return "all"
        return "+".join(sorted(self.faces, key=FACE_NAMES.index))

    def __contains__(self, face):
        return face in self.faces


# ---------------------------------------------------------------------------
# univariate factor bases
# ---------------------------------------------------------------------------

_FACTOR_CACHE = {}


def _uni_inner(f, g):
    """L2(0,1) inner product of coefficient lists (exact)."""
    total = Q(0)
    for a, fa_ in enumerate(f):
        if fa_ == 0:
            continue
        for b, gb in enumerate(g):
            if gb == 0:
                continue
            total += fa_ * gb * Q(1, a + b + 1)
    return total


def univariate_factor_basis(degree, m0, m1):
    """Integer-coefficient basis of {x^m0 (1-x)^m1 q : deg q <= degree-m0-m1}.

    Returns (coeffs, norms): `coeffs[k]` is the ascending coefficient tuple of
    the k-th basis polynomial (length degree+1), and `norms[k]` its exact
    squared L2(0,1) norm.  The family is L2-orthogonal: member k is the
    Gram-Schmidt orthogonalization of x^(m0+k)(1-x)^m1 against the earlier
    members, rescaled to integer coefficients with positive leading
    coefficient.
    """
    key = (degree, m0, m1)
    hit = _FACTOR_CACHE.get(key)
    if hit is not None:
        return hit
    count = degree + 1 - m0 - m1
    if count < 0:
        raise DegreeTooLow(
            "degree %d cannot vanish to orders (%d, %d) at both ends"
            % (degree, m0, m1)
        )
    basis = []
    norms = []
    done = []
    for t in range(count):
        coeffs = [Q(0)] * (degree + 1)
        for j in range(m1 + 1):
            coeffs[m0 + t + j] += Q((-1) ** j * math.comb(m1, j))
        for prev, prev_norm in done:
            factor = _uni_inner(coeffs, prev) / prev_norm
            if factor != 0:
                coeffs = [c - factor * p for c, p in zip(coeffs, prev)]
        norm = _uni_inner(coeffs, coeffs)
        done.append((coeffs, norm))
        den = 1
        for c in coeffs:
            den = den * c.denominator // math.gcd(den, int(c.denominator))
        ints = [int(c * den) for c in coeffs]
        lead = next(c for c in reversed(ints) if c != 0)
        if lead < 0:
            ints = [-c for c in ints]
        g = 0
        for c in ints:
            g = math.gcd(g, c)
        if g > 1:
            ints = [c // g for c in ints]
        basis.append(tuple(ints))
        norms.append(_uni_inner([Q(c) for c in ints], [Q(c) for c in ints]))
    result = (tuple(basis), tuple(norms))
    _FACTOR_CACHE[key] = result
    return result


# ---------------------------------------------------------------------------
# field spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FieldSpace:
    """An orthogonal basis of polynomial fields on the box.

    Fields are ordered component-major: all fields supported on component 0
    first, each block running lexicographically over the univariate factor
    indices (i, j, k) for the x/y/z directions.
    """

    kind: str
    degree: int
    vanish_order: int
    bc: BoundarySelection
    counts: tuple
    factors: tuple
    factor_norms: tuple
    fields: tuple
    gram_diag: tuple

    @property
    def dim(self):
        return len(self.fields)


def _component_field(kind, comp, poly):
    if kind == "scalar":
        return poly
    if kind == "vector":
        comps = [Poly3.zero(), Poly3.zero(), Poly3.zero()]
        comps[comp] = poly
        return PolyVecField(comps)
    i, j = _SYM_ENTRIES[comp]
    entries = [Poly3.zero() for _ in range(9)]
    entries[3 * i + j] = poly
    entries[3 * j + i] = poly
    return PolyMatField(entries)


def _space_from_degrees(kind, degrees, bc, vanish_order):
    """Shared assembly for field spaces; `degrees` is one bound per axis."""
    factors = []
    factor_norms = []
    counts = []
    for axis in range(3):
        m0, m1 = bc.orders(axis, vanish_order)
        coeffs, norms = univariate_factor_basis(degrees[axis], m0, m1)
        factors.append(coeffs)
        factor_norms.append(norms)
        counts.append(len(coeffs))
    ncomp = _KIND_COMPONENTS[kind]
    weights = _KIND_WEIGHTS[kind]
    fields = []
    gram_diag = []
    for comp in range(ncomp):
        for fx, gx in zip(factors[0], factor_norms[0]):
            for fy, gy in zip(factors[1], factor_norms[1]):
                for fz, gz in zip(factors[2], factor_norms[2]):
                    terms = {}
                    for a, ca in enumerate(fx):
                        if ca == 0:
                            continue
                        for b, cb in enumerate(fy):
                            if cb == 0:
                                continue
                            for c, cc in enumerate(fz):
                                if cc == 0:
                                    continue
                                terms[(a, b, c)] = Q(ca * cb * cc)
                    fields.append(_component_field(kind, comp, Poly3(terms)))
                    gram_diag.append(weights[comp] * gx * gy * gz)
    return FieldSpace(
        kind=kind,
        degree=max(degrees),
        vanish_order=vanish_order,
        bc=bc,
        counts=tuple(counts),
        factors=tuple(factors),
        factor_norms=tuple(factor_norms),
        fields=tuple(fields),
        gram_diag=tuple(gram_diag),
    )


def build_space(kind, degree, gt, vanish_order):
    """Polynomial field space on the box with essential face conditions.

    `kind` is one of "scalar", "vector", "symmetric-tensor".  Each field
    component is a product of univariate factor-basis polynomials of degree
    <= `degree` per variable; on every coordinate direction with a selected
    face, the factor vanishes there to order `vanish_order`.  Raises
    DegreeTooLow when the degree cannot carry the constraints (the resulting
    space may legitimately be zero-dimensional, which is returned, not
    raised).
    """
    if kind not in ("scalar", "vector", "symmetric-tensor"):
        raise ValueError("unknown field kind %r" % (kind,))
    if degree < 0:
        raise DegreeTooLow("degree %d is negative" % degree)
    bc = BoundarySelection.parse(gt)
    return _space_from_degrees(kind, (degree, degree, degree), bc, vanish_order)


def _generator_space(kind, base_degree, bc, vanish_order):
    """Generator space for one chain level: degree `base_degree` per variable,
    raised on a constrained direction when the boundary factor alone already
    exceeds it, so the space is never empty merely because the vanishing
    factor does not fit.
    """
    if base_degree < 0:
        raise DegreeTooLow("degree %d is negative" % base_degree)
    degrees = []
    for axis in range(3):
        m0, m1 = bc.orders(axis, vanish_order)
        degrees.append(max(base_degree, m0 + m1))
    return _space_from_degrees(kind, tuple(degrees), bc, vanish_order)


# ---------------------------------------------------------------------------
# exact coordinates on the ambient monomial grid
# ---------------------------------------------------------------------------


def _field_components(field, kind):
    if kind == "scalar":
        return (field,)
    if kind == "vector":
        return tuple(field[i] for i in range(3))
    if kind == "symmetric-tensor":
        return tuple(field[i, j] for (i, j) in _SYM_ENTRIES)
    return tuple(field[i, j] for (i, j) in _MAT_ENTRIES)


def _exact_coords(field, kind, nvar):
    """Coefficients of a field on the monomial grid, {flat_index: rational}."""
    out = {}
    grid = nvar * nvar * nvar
    for comp, poly in enumerate(_field_components(field, kind)):
        base = comp * grid
        for (a, b, c), coeff in poly.terms.items():
            if a >= nvar or b >= nvar or c >= nvar:
                raise AssemblyError(
                    "field exceeds the ambient degree bound %d" % (nvar - 1)
                )
            out[base + (a * nvar + b) * nvar + c] = coeff
    return out


def _integer_rows(coord_dicts, width):
    """Clear denominators per row; int64 numerators plus row denominators."""
    nums = np.zeros((len(coord_dicts), width), dtype=np.int64)
    dens = []
    for i, coords in enumerate(coord_dicts):
        den = 1
        for q in coords.values():
            den = den * q.denominator // math.gcd(den, int(q.denominator))
        dens.append(den)
        for j, q in coords.items():
            num = int(q * den)
            if abs(num) >= _COORD_LIMIT:
                raise AssemblyError("coordinate numerator exceeds 62 bits")
            nums[i, j] = num
    return nums, dens


_LEGENDRE_CACHE = {}


def _legendre_frame(nvar):
    """Monomial-to-scaled-Legendre transform for one axis (longdouble).

    Returns W with W[k, a] = T[k, a] / sqrt(2k+1), where x^a =
    sum_k T[k, a] Ltilde_k and Ltilde_k is the integer-coefficient Legendre
    polynomial shifted to [0, 1] with squared norm 1/(2k+1); rows of W @ m
    are therefore coordinates in an orthonormal univariate frame.  Assembled
    exactly and rounded once per entry.
    """
    cached = _LEGENDRE_CACHE.get(nvar)
    if cached is not None:
        return cached
    polys = [[Q(1)], [Q(-1), Q(2)]]
    while len(polys) < nvar:
        k = len(polys) - 1
        prev, cur = polys[-2], polys[-1]
        nxt = [Q(0)] * (len(cur) + 1)
        for j, c in enumerate(cur):
            nxt[j + 1] += Q(2 * (2 * k + 1), k + 1) * c
            nxt[j] -= Q(2 * k + 1, k + 1) * c
        for j, c in enumerate(prev):
            nxt[j] -= Q(k, k + 1) * c
        polys.append(nxt)
    W = np.zeros((nvar, nvar), dtype=np.longdouble)
    for k, coeffs in enumerate(polys[:nvar]):
        for a in range(nvar):
            t = (2 * k + 1) * sum(
                c * Q(1, a + j + 1) for j, c in enumerate(coeffs)
            )
            W[k, a] = np.longdouble(t.numerator) / np.longdouble(t.denominator)
        W[k] /= np.sqrt(np.longdouble(2 * k + 1))
    _LEGENDRE_CACHE[nvar] = W
    return W


def _orthoframe_rows(coord_dicts, ncomp, nvar, weights):
    """Field coordinates in an L2-orthonormal ambient frame (float64 rows).

    The frame is the tensor product of scaled Legendre polynomials with the
    component weights folded in, so the L2 Gram of the fields is B @ B.T
    for the returned B.  Entries of B are bounded by the field norms, hence
    that product carries no cancellation beyond ordinary rounding; the
    conversion itself runs in extended precision from the exact rational
    coordinates.
    """
    K = len(coord_dicts)
    if K == 0:
        return np.zeros((0, ncomp * nvar**3))
    W = _legendre_frame(nvar)
    X = np.zeros((K, ncomp * nvar**3), dtype=np.longdouble)
    for i, coords in enumerate(coord_dicts):
        row = X[i]
        for j, q in coords.items():
            row[j] = np.longdouble(q.numerator) / np.longdouble(q.denominator)
    Z = X.reshape(K, ncomp, nvar, nvar, nvar)
    for axis in (2, 3, 4):
        Z = np.moveaxis(np.tensordot(Z, W, axes=([axis], [1])), -1, axis)
    w = np.sqrt(np.asarray(weights, dtype=np.longdouble))
    Z = Z * w[None, :, None, None, None]
    return Z.reshape(K, -1).astype(np.float64)


def _float_gram(coord_dicts, ncomp, nvar, weights):
    """L2 Gram of fields given by exact coordinate dictionaries."""
    B = _orthoframe_rows(coord_dicts, ncomp, nvar, weights)
    G = B @ B.T
    return 0.5 * (G + G.T)


def _l2_norms(coord_dicts, ncomp, nvar, weights):
    B = _orthoframe_rows(coord_dicts, ncomp, nvar, weights)
    return np.linalg.norm(B, axis=1)


def _pow2(k):
    return Q(2**k) if k >= 0 else Q(1, 2 ** (-k))


# ---------------------------------------------------------------------------
# exact operator matrices
# ---------------------------------------------------------------------------


class ExactOperator:
    """A matrix with exact rational entries, stored column-wise.

    Columns are None (zero), ("single", row, value), or ("dense",
    ((row, value), ...)).
    """

    __slots__ = ("nrows", "ncols", "cols")

    def __init__(self, nrows, ncols, cols):
        if len(cols) != ncols:
            raise ValueError("expected %d columns, got %d" % (ncols, len(cols)))
        self.nrows = nrows
        self.ncols = ncols
        self.cols = tuple(cols)

    def column(self, j):
        col = self.cols[j]
        if col is None:
            return {}
        if col[0] == "single":
            return {col[1]: col[2]}
        return dict(col[1])

    def apply(self, vec):
        """Apply to an exact coefficient vector {index: rational}."""
        out = {}
        for j, q in vec.items():
            if q == 0:
                continue
            for r, v in self.column(j).items():
                acc = out.get(r, Q(0)) + q * v
                if acc == 0:
                    out.pop(r, None)
                else:
                    out[r] = acc
        return out

    def compose_is_zero(self, first):
        """Whether self o first vanishes identically (exact arithmetic)."""
        if first.nrows != self.ncols:
            raise ValueError("shape mismatch in composition")
        for j in range(first.ncols):
            if self.apply(first.column(j)):
                return False
        return True

    def to_float(self):
        out = np.zeros((self.nrows, self.ncols), dtype=np.float64)
        for j, col in enumerate(self.cols):
            if col is None:
                continue
            if col[0] == "single":
                out[col[1], j] = float(col[2])
            else:
                for r, v in col[1]:
                    out[r, j] = float(v)
        return out


# ---------------------------------------------------------------------------
# level assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComplexLevel:
    """One space of the assembled chain: exact fields plus their coordinates."""

    kind: str
    fields: tuple
    provenance: tuple
    coords: tuple
    nvar: int

    @property
    def dim(self):
        return len(self.fields)


def _verify_expansions(expansions, kept, coord_dicts):
    """Check each reported dependency by exact rational arithmetic."""
    for idx, coeffs in expansions.items():
        acc = dict(coord_dicts[idx])
        for coeff, src in zip(coeffs, kept):
            if coeff == 0:
                continue
            for j, q in coord_dicts[src].items():
                val = acc.get(j, Q(0)) - coeff * q
                if val == 0:
                    acc.pop(j, None)
                else:
                    acc[j] = val
        if acc:
            return False
    return True


_PRIME_LADDER = (3, 5, 8, 12)


def _select_exact(coord_dicts, flags, width):
    nums, dens = _integer_rows(coord_dicts, width)
    for nprimes in _PRIME_LADDER:
        try:
            kept, expansions = exactlin.select_rows(
                nums,
                dens=dens,
                expand_flags=flags,
                primes=exactlin.PRIMES[:nprimes],
            )
        except exactlin.ReconstructionFailure:
            continue
        if _verify_expansions(expansions, kept, coord_dicts):
            return kept, expansions, nprimes
    raise AssemblyError("exact selection failed with every available prime set")


def _normalized_level(kind, cand_fields, cand_coords, kept, provenance, nvar):
    """Scale each kept candidate by a power of two to unit-size L2 norm."""
    ncomp = _KIND_COMPONENTS[kind]
    weights = _KIND_WEIGHTS[kind]
    kept_coords = [cand_coords[i] for i in kept]
    norms = _l2_norms(kept_coords, ncomp, nvar, weights)
    fields = []
    coords = []
    scales = []
    for pos, idx in enumerate(kept):
        k = int(round(math.log2(norms[pos]))) if norms[pos] > 0 else 0
        scale = _pow2(k)
        inv = _pow2(-k)
        fields.append(cand_fields[idx].scale(inv) if k else cand_fields[idx])
        coords.append(
            {j: q * inv for j, q in cand_coords[idx].items()} if k
            else cand_coords[idx]
        )
        scales.append(scale)
    level = ComplexLevel(
        kind=kind,
        fields=tuple(fields),
        provenance=tuple(provenance[i] for i in kept),
        coords=tuple(coords),
        nvar=nvar,
    )
    return level, scales


def _assemble_level(prev_level, op_fun, op_name, out_kind, generators, nvar):
    """Build the next level from operator images plus generator fields.

    Returns (level, operator, stats): `level` spans the images of the
    previous level's basis together with the generators; `operator` is the
    exact matrix of the operator from the previous level into the new basis.
    """
    ncomp = _KIND_COMPONENTS[out_kind]
    width = ncomp * nvar**3
    images = [op_fun(f) for f in prev_level.fields]
    cand_fields = []
    cand_coords = []
    provenance = []
    flags = []
    image_slot = {}
    for i, image in enumerate(images):
        if image.is_zero():
            continue
        image_slot[i] = len(cand_fields)
        cand_fields.append(image)
        cand_coords.append(_exact_coords(image, out_kind, nvar))
        provenance.append(("image", i))
        flags.append(True)
    for g, gen in enumerate(generators.fields):
        cand_fields.append(gen)
        cand_coords.append(_exact_coords(gen, out_kind, nvar))
        provenance.append(("generator", g))
        flags.append(False)
    kept, expansions, nprimes = _select_exact(cand_coords, flags, width)
    level, scales = _normalized_level(
        out_kind, cand_fields, cand_coords, kept, provenance, nvar
    )
    position = {idx: pos for pos, idx in enumerate(kept)}
    cols = []
    for i in range(prev_level.dim):
        slot = image_slot.get(i)
        if slot is None:
            cols.append(None)
        elif slot in position:
            pos = position[slot]
            cols.append(("single", pos, scales[pos]))
        else:
            entries = []
            for coeff, src in zip(expansions[slot], kept):
                if coeff != 0:
                    entries.append((position[src], coeff * scales[position[src]]))
            cols.append(("dense", tuple(entries)))
    operator = ExactOperator(level.dim, prev_level.dim, cols)
    stats = {
        "operator": op_name,
        "zero_images": prev_level.dim - len(image_slot),
        "nonzero_images": len(image_slot),
        "kept_images": sum(1 for i in kept if provenance[i][0] == "image"),
        "dependent_images": len(expansions),
        "generators": generators.dim,
        "kept_generators": sum(
            1 for i in kept if provenance[i][0] == "generator"
        ),
        "primes_used": nprimes,
    }
    return level, operator, stats


# ---------------------------------------------------------------------------
# polynomial strain potentials
# ---------------------------------------------------------------------------


class NotCompatible(ValueError):
    """The symmetric field is not a symmetric gradient (rotrot_t != 0)."""


def _line_moment_poly(poly, second):
    """Integrate q(t x) (optionally weighted by (1-t)) over t in [0,1].

    Returns the polynomial x -> integral; each monomial of total degree d
    picks up the factor 1/(d+1), or 1/((d+1)(d+2)) with the (1-t) weight.
    """
    terms = {}
    for (a, b, c), coeff in poly.terms.items():
        d = a + b + c
        w = Q(1, (d + 1) * (d + 2)) if second else Q(1, d + 1)
        terms[(a, b, c)] = coeff * w
    return Poly3(terms)


def saint_venant_potential(S):
    """Exact vector potential u with sym_grad(u) = S on the unit box.

    Uses the Cesaro-Volterra path integral along straight lines from the
    origin (gauge u(0) = 0 with vanishing rotation at 0):

        u_i(x) = int_0^1 [ S_ik(tx) + (1-t) x_j (d_j S_ik - d_i S_jk)(tx) ] x_k dt,

    which follows from d_k w_il = d_l S_ik - d_i S_lk for the skew part w of
    the gradient.  Raises NotCompatible when S is not a symmetric gradient
    (equivalently, when rotrot_t(S) != 0); the reconstruction is verified
    exactly before returning.
    """
    if not S.is_symmetric():
        raise NotCompatible("potential requires a symmetric input field")
    comps = []
    for i in range(3):
        acc = Poly3.zero()
        for k in range(3):
            xk = Poly3.variable(k)
            acc = acc + xk * _line_moment_poly(S[i, k], second=False)
            for j in range(3):
                xj = Poly3.variable(j)
                dj_sik = S[i, k].diff(j)
                di_sjk = S[j, k].diff(i)
                acc = acc + xj * xk * _line_moment_poly(dj_sik - di_sjk, second=True)
        comps.append(acc)
    u = PolyVecField(comps)
    if not (pc.sym_grad(u) - S).is_zero():
        raise NotCompatible("field admits no polynomial potential")
    return u


def _face_restriction(poly, axis, value):
    """Restrict a polynomial to the face {x_axis = value}, value in {0, 1}."""
    terms = {}
    for expo, coeff in poly.terms.items():
        if value == 0:
            if expo[axis] != 0:
                continue
            key = expo
        else:
            key = list(expo)
            key[axis] = 0
            key = tuple(key)
        acc = terms.get(key, Q(0)) + coeff
        if acc == 0:
            terms.pop(key, None)
        else:
            terms[key] = acc
    return Poly3(terms)


def vanishes_on_faces(field, bc, kind="vector"):
    """Exact check that every component vanishes on the selected faces."""
    for face in bc.faces:
        axis = FACE_NAMES.index(face) // 2
        value = FACE_NAMES.index(face) % 2
        for poly in _field_components(field, kind):
            if not _face_restriction(poly, axis, value).is_zero():
                return False
    return True


def _face_trace_coords(field, bc):
    """Flat coordinates of the field's restrictions to the selected faces.

    Keys combine (face, component, surviving monomial); the map is shared
    through the returned key order so several fields can be compared.
    """
    coords = {}
    for face in bc.faces:
        axis = FACE_NAMES.index(face) // 2
        value = FACE_NAMES.index(face) % 2
        for comp, poly in enumerate(_field_components(field, "vector")):
            trace = _face_restriction(poly, axis, value)
            for expo, coeff in trace.terms.items():
                coords[(face, comp, expo)] = coeff
    return coords


def _face_compatible_combinations(potentials, bc):
    """Vector fields in span(potentials + rigid motions) vanishing on bc.

    A symmetric gradient determines its potential only up to a rigid
    motion, so whether a combination of strains admits a potential meeting
    the face conditions is a linear question in the combination weights and
    six rigid-motion corrections.  Solved exactly; for a nonempty selection
    no nonzero rigid motion vanishes on a face, hence the returned fields
    carry independent strain combinations.
    """
    if not bc.faces:
        return list(potentials)
    rms = rigid_motion_basis().fields
    cands = list(potentials) + list(rms)
    keyed = [_face_trace_coords(f, bc) for f in cands]
    column = {}
    for coords in keyed:
        for key in coords:
            column.setdefault(key, len(column))
    coord_dicts = [
        {column[key]: coeff for key, coeff in coords.items()} for coords in keyed
    ]
    width = len(column)
    kept, expansions, _ = _select_exact(coord_dicts, [True] * len(cands), width)
    m = len(potentials)
    out = []
    for j, coeffs in sorted(expansions.items()):
        combo = cands[j]
        for c, k in zip(coeffs, kept):
            if c != 0:
                combo = combo - cands[k].scale(c)
        if not vanishes_on_faces(combo, bc):
            raise AssemblyError("face-compatibility solve failed to verify")
        strain_weight = any(
            (1 if i == j else 0) - (coeffs[kept.index(i)] if i in kept else 0) != 0
            for i in range(m)
        )
        if not strain_weight:
            raise AssemblyError("rigid motion vanishing on a selected face")
        out.append(combo)
    return out


# ---------------------------------------------------------------------------
# the assembled complex
# ---------------------------------------------------------------------------


class ElasticityComplex:
    """Assembled chain V0 -> V1 -> V2 -> V3 with exact operators.

    `levels` are ComplexLevel objects, `ops` the three ExactOperator
    matrices (sym_grad, rotrot_t, Div).  Ranks and kernel dimensions are
    exact integers: a kept image certifies independence through modular
    elimination, and a discarded image carries an exactly verified rational
    expansion, so rank A_k equals the number of kept images at level k+1.
    """

    def __init__(self, p, bc, levels, ops, stats):
        self.p = p
        self.bc = bc
        self.levels = tuple(levels)
        self.ops = tuple(ops)
        self.stats = tuple(stats)
        self._float = {}

    @property
    def dims(self):
        return tuple(level.dim for level in self.levels)

    @property
    def ranks(self):
        """(rank A0, rank A1, rank A2), exact."""
        return tuple(s["kept_images"] for s in self.stats)

    @property
    def kernel_dims(self):
        """(dim N(A0), dim N(A1), dim N(A2)), exact."""
        dims = self.dims
        ranks = self.ranks
        return tuple(dims[k] - ranks[k] for k in range(3))

    @property
    def harmonic_dims(self):
        """Cohomology dimensions at levels 0..3, exact.

        Level n: dim N(A_n) - rank A_{n-1}; the end level uses A_3 = 0.
        """
        ranks = self.ranks
        kdims = self.kernel_dims
        return (
            kdims[0],
            kdims[1] - ranks[0],
            kdims[2] - ranks[1],
            self.levels[3].dim - ranks[2],
        )

    def verify_complex_property(self):
        """Exact check that A1*A0 = 0 and A2*A1 = 0."""
        return self.ops[1].compose_is_zero(self.ops[0]) and self.ops[
            2
        ].compose_is_zero(self.ops[1])

    def float_grams(self):
        """L2 Grams of the four levels as float matrices (cached)."""
        grams = self._float.get("grams")
        if grams is None:
            grams = tuple(
                _float_gram(
                    level.coords,
                    _KIND_COMPONENTS[level.kind],
                    level.nvar,
                    _KIND_WEIGHTS[level.kind],
                )
                for level in self.levels
            )
            self._float["grams"] = grams
        return grams

    def finite_complex(self, g1=None, g2=None, tol=1e-12):
        """Float FiniteComplex; g1/g2 replace the weights on V1/V2."""
        if g1 is None and g2 is None and "complex" in self._float:
            return self._float["complex"]
        grams = list(self.float_grams())
        if g1 is not None:
            g1 = np.asarray(g1, dtype=np.float64)
            if g1.shape != (self.levels[1].dim,) * 2:
                raise fa.DimensionMismatch("weight on V1 has the wrong shape")
            grams[1] = g1
        if g2 is not None:
            g2 = np.asarray(g2, dtype=np.float64)
            if g2.shape != (self.levels[2].dim,) * 2:
                raise fa.DimensionMismatch("weight on V2 has the wrong shape")
            grams[2] = g2
        ops = self._float.get("ops")
        if ops is None:
            ops = tuple(op.to_float() for op in self.ops)
            self._float["ops"] = ops
        cx = fa.FiniteComplex(grams, list(ops), tol=tol)
        if g1 is None and g2 is None:
            self._float["complex"] = cx
        return cx


_COMPLEX_CACHE = {}


def _assemble_chain(p, bc, extras):
    """One assembly pass; `extras` are additional exact V0 fields."""
    nvar = p + 1
    v0 = build_space("vector", p, bc, 1)
    fields0 = list(v0.fields) + list(extras)
    nvar0 = nvar
    for f in extras:
        for poly in _field_components(f, "vector"):
            for (a, b, c) in poly.terms:
                nvar0 = max(nvar0, a + 1, b + 1, c + 1)
    coords0 = [_exact_coords(f, "vector", nvar0) for f in fields0]
    level0, scales0 = _normalized_level(
        "vector",
        fields0,
        coords0,
        list(range(len(fields0))),
        [("generator", g) for g in range(len(fields0))],
        nvar0,
    )
    level1, a0, s0 = _assemble_level(
        level0,
        pc.sym_grad,
        "sym_grad",
        "symmetric-tensor",
        _generator_space("symmetric-tensor", p - 1, bc, 2),
        nvar,
    )
    level2, a1, s1 = _assemble_level(
        level1,
        pc.rotrot_t,
        "rotrot_t",
        "symmetric-tensor",
        _generator_space("symmetric-tensor", p - 3, bc, 1),
        nvar,
    )
    level3, a2, s2 = _assemble_level(
        level2,
        pc.Div,
        "Div",
        "vector",
        _generator_space("vector", p - 4, bc, 0),
        nvar,
    )
    ec = ElasticityComplex(
        p, bc, [level0, level1, level2, level3], [a0, a1, a2], [s0, s1, s2]
    )
    ec.v0_space = v0
    ec.v0_extras = tuple(extras)
    ec.v0_scales = tuple(scales0)
    return ec


def _kernel_overflow_fields(ec):
    """Exact basis of N(A1) modulo R(A0), as fields in the generator span.

    Every image-provenance basis vector of V1 is a symmetric gradient, so
    its A1 column vanishes identically and N(A1) splits into the image span
    plus the kernel of A1 restricted to the generator columns.  The latter
    is computed exactly; its members are the obstruction to discrete
    exactness at level 1.
    """
    level1 = ec.levels[1]
    a1 = ec.ops[1]
    gen_pos = [
        pos
        for pos, prov in enumerate(level1.provenance)
        if prov[0] == "generator"
    ]
    for pos, prov in enumerate(level1.provenance):
        if prov[0] == "image" and a1.cols[pos] is not None:
            raise AssemblyError("image basis vector with nonzero A1 column")
    if not gen_pos:
        return []
    columns = [a1.column(pos) for pos in gen_pos]
    width = ec.levels[2].dim
    if width == 0:
        kept, expansions = [], {
            i: [] for i in range(len(gen_pos))
        }
    else:
        nums, dens = _integer_rows(columns, width)
        kept, expansions = exactlin.select_rows(
            nums,
            dens=dens,
            expand_flags=[True] * len(gen_pos),
            primes=exactlin.PRIMES[:3],
        )
        if not _verify_expansions(expansions, kept, columns):
            nums, dens = _integer_rows(columns, width)
            kept, expansions = exactlin.select_rows(
                nums,
                dens=dens,
                expand_flags=[True] * len(gen_pos),
                primes=exactlin.PRIMES[:6],
            )
            if not _verify_expansions(expansions, kept, columns):
                raise AssemblyError("kernel expansion failed to verify")
    fields = []
    for j, coeffs in sorted(expansions.items()):
        f = level1.fields[gen_pos[j]]
        for c, k in zip(coeffs, kept):
            if c != 0:
                f = f - level1.fields[gen_pos[k]].scale(c)
        if f.is_zero():
            raise AssemblyError("zero overflow field")
        fields.append(f)
    return fields


def build_complex(p, gt="none", use_cache=True):
    """Assemble the discrete elasticity complex of degree p on the box.

    V0: vector fields of degree p, first-order vanishing on the selected
    faces; V1 adds symmetric-tensor generators of degree p-1 with
    second-order vanishing; V2 adds symmetric-tensor generators of degree
    p-3 with first-order vanishing; V3 adds vector generators of degree p-4
    without constraints.  On a constrained direction a generator degree is
    raised to the boundary factor's degree when needed, so no generator
    space collapses merely because the factor does not fit.  Degrees below
    4 cannot carry the chain.

    After a first pass, any exact kernel of A1 beyond R(A0) is integrated
    by the Cesaro-Volterra formula; every combination of the potentials
    that the boundary conditions admit (up to rigid-motion corrections) is
    adjoined to V0 and the chain is reassembled, so the level-1 cohomology
    dimension reflects the geometry rather than a degree-truncation
    artifact.  V1..V3 are unchanged by the enlargement (the new images
    already lie in the generator span).
    """
    bc = BoundarySelection.parse(gt)
    if p < 4:
        raise DegreeTooLow("the complex needs degree >= 4, got %d" % p)
    key = (p, bc.faces)
    if use_cache and key in _COMPLEX_CACHE:
        return _COMPLEX_CACHE[key]
    ec = _assemble_chain(p, bc, [])
    overflow = _kernel_overflow_fields(ec)
    added = 0
    rejected = 0
    if overflow:
        potentials = [saint_venant_potential(S) for S in overflow]
        extras = _face_compatible_combinations(potentials, bc)
        added = len(extras)
        rejected = len(overflow) - added
        if extras:
            ec = _assemble_chain(p, bc, extras)
    meta = {
        "first_pass_level1_overflow": len(overflow),
        "potentials_added": added,
        "potentials_rejected": rejected,
    }
    ec.meta = meta
    if not ec.verify_complex_property():
        raise AssemblyError("assembled operators do not compose to zero")
    if use_cache:
        _COMPLEX_CACHE[key] = ec
    return ec


# ---------------------------------------------------------------------------
# rigid motions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RigidMotionBasis:
    """The six fields x -> a + b x x: three translations, three rotations."""

    fields: tuple

    def exact_gram(self):
        """Exact 6x6 L2(box) Gram matrix, rows/cols in field order."""
        n = len(self.fields)
        return tuple(
            tuple(
                _box_integral(self.fields[i].dot(self.fields[j]))
                for j in range(n)
            )
            for i in range(n)
        )


def _box_integral(poly):
    """Exact integral of a polynomial over the unit box."""
    total = Q(0)
    for (a, b, c), coeff in poly.terms.items():
        total += coeff * Q(1, (a + 1) * (b + 1) * (c + 1))
    return total


def rigid_motion_basis():
    """Translations e_i and rotations x -> e_i x x; sym_grad kills all six."""
    x = Poly3.variable(0)
    y = Poly3.variable(1)
    z = Poly3.variable(2)
    zero = Poly3.zero()
    one = Poly3.constant(1)
    fields = (
        PolyVecField([one, zero, zero]),
        PolyVecField([zero, one, zero]),
        PolyVecField([zero, zero, one]),
        PolyVecField([zero, -z, y]),
        PolyVecField([z, zero, -x]),
        PolyVecField([-y, x, zero]),
    )
    for f in fields:
        if not pc.sym_grad(f).is_zero():
            raise AssertionError("rigid motion with nonzero symmetric gradient")
    return RigidMotionBasis(fields)


def _expand_univariate(target, factors):
    """Exact coefficients of `target` (ascending rationals) in the factor
    basis, or None when the target lies outside the span."""
    residual = [as_q(c) for c in target]
    coeffs = [Q(0)] * len(factors)
    leads = []
    for k, f in enumerate(factors):
        deg = max(i for i, c in enumerate(f) if c != 0)
        leads.append((deg, k))
    for deg, k in sorted(leads, reverse=True):
        if deg >= len(residual):
            continue
        lead = Q(factors[k][deg])
        c = residual[deg] / lead if residual[deg] != 0 else Q(0)
        if c != 0:
            coeffs[k] = c
            for i, fc in enumerate(factors[k]):
                if fc != 0:
                    residual[i] -= c * fc
    if any(c != 0 for c in residual):
        return None
    return coeffs


def rigid_motion_coordinates(space):
    """Exact coordinates of the six rigid motions in a vector FieldSpace.

    Raises ValueError when the space's boundary constraints exclude them.
    """
    if space.kind != "vector":
        raise ValueError("rigid motions live in a vector space, not %r" % space.kind)
    rm = rigid_motion_basis()
    nx, ny, nz = space.counts
    block = nx * ny * nz
    columns = []
    for f in rm.fields:
        col = {}
        for comp in range(3):
            poly = f[comp]
            for (a, b, c), coeff in poly.terms.items():
                ex = _expand_univariate(
                    [Q(0)] * a + [coeff], space.factors[0]
                )
                ey = _expand_univariate([Q(0)] * b + [Q(1)], space.factors[1])
                ez = _expand_univariate([Q(0)] * c + [Q(1)], space.factors[2])
                if ex is None or ey is None or ez is None:
                    raise ValueError(
                        "space with constraints %s does not contain the rigid"
                        " motions" % space.bc.label
                    )
                for i, cx in enumerate(ex):
                    if cx == 0:
                        continue
                    for j, cy in enumerate(ey):
                        if cy == 0:
                            continue
                        for k, cz in enumerate(ez):
                            if cz == 0:
                                continue
                            idx = comp * block + (i * ny + j) * nz + k
                            val = col.get(idx, Q(0)) + cx * cy * cz
                            if val == 0:
                                col.pop(idx, None)
                            else:
                                col[idx] = val
        columns.append(col)
    return columns


def rm_projector(space):
    """L2-orthogonal projector onto the rigid motions inside a FieldSpace."""
    columns = rigid_motion_coordinates(space)
    n = space.dim
    R = np.zeros((n, 6))
    for j, col in enumerate(columns):
        for i, q in col.items():
            R[i, j] = float(q)
    g = np.array([float(q) for q in space.gram_diag])
    GR = g[:, None] * R
    M = R.T @ GR
    return R @ np.linalg.solve(M, GR.T)


# ---------------------------------------------------------------------------
# Korn constant
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KornReport:
    constant: float
    p: int
    bc_label: str
    dim: int
    restricted: bool

    def to_dict(self):
        return {
            "constant": self.constant,
            "p": self.p,
            "gt": self.bc_label,
            "dim": self.dim,
            "restricted_to_rm_complement": self.restricted,
        }


def korn_constant(p, gt="none"):
    """Best constant c with ||Grad v|| <= c ||sym_grad v|| on the space.

    Computed on the degree-p vector space with first-order vanishing on the
    selected faces; with no selected faces the supremum runs over the
    L2-orthogonal complement of the rigid motions.  The constant is at least
    1 because ||sym_grad v|| <= ||Grad v|| pointwise.
    """
    bc = BoundarySelection.parse(gt)
    if p < 1:
        raise DegreeTooLow("the Korn quotient needs degree >= 1, got %d" % p)
    space = build_space("vector", p, bc, 1)
    nvar = p + 1
    grads = [pc.Grad(f) for f in space.fields]
    syms = [pc.sym(S) for S in grads]
    K = _float_gram(
        [_exact_coords(S, "matrix", nvar) for S in grads],
        9,
        nvar,
        _KIND_WEIGHTS["matrix"],
    )
    M = _float_gram(
        [_exact_coords(S, "symmetric-tensor", nvar) for S in syms],
        6,
        nvar,
        _KIND_WEIGHTS["symmetric-tensor"],
    )
    restricted = not bc.faces
    if restricted:
        g = fa.InnerProduct(np.diag([float(q) for q in space.gram_diag]))
        columns = rigid_motion_coordinates(space)
        R = np.zeros((space.dim, 6))
        for j, col in enumerate(columns):
            for i, q in col.items():
                R[i, j] = float(q)
        W = fa.kernel_basis(R.T @ g.G, g)
        K = W.T @ K @ W
        M = W.T @ M @ W
    if K.shape[0] == 0:
        raise DegreeTooLow(
            "the Korn quotient is over an empty space at degree %d" % p
        )
    evals = eigh(K, M, eigvals_only=True)
    return KornReport(
        constant=float(math.sqrt(max(evals[-1], 0.0))),
        p=p,
        bc_label=bc.label,
        dim=space.dim,
        restricted=restricted,
    )


# ---------------------------------------------------------------------------
# cohomology of the assembled complex
# ---------------------------------------------------------------------------


def dirichlet_neumann_fields(p, gt="none", eps=None, tol=None):
    """Cohomology report at the symmetric-tensor level V1.

    `eps` optionally replaces the V1 Gram by another SPD matrix (a weight);
    the reported dimension is invariant under that choice.
    """
    ec = build_complex(p, gt)
    cx = ec.finite_complex(g1=eps)
    return fa.cohomology(cx, 1, tol=tol)
