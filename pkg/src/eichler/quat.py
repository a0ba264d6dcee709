"""Exact arithmetic in the quaternion algebra H(-cp, -q) and its lattice orders.

Elements carry Fraction coordinates over the basis {1, i, j, k} with
i^2 = -cp, j^2 = -q, k = ij = -ji.  All lattice computations clear
denominators and work with integer matrices, so discriminants and indices
are bit-exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .numth import PrimeParams, Variant, lift_sqrt_mod_4q
from .qform import BQForm, reduce as reduce_form


class AlgebraMismatchError(ValueError):
    """Operands belong to different quaternion algebras."""


class BadParamsError(ValueError):
    """Order parameters fail their congruence conditions."""


class NotAnOrderError(ValueError):
    """Internal consistency failure: constructed lattice is not an order."""


class DegenerateBasisError(ValueError):
    """Basis vectors are linearly dependent."""


class NotSublatticeError(ValueError):
    """Index requested for a lattice that is not contained in the other."""


class UnlabeledOrderError(ValueError):
    """Order carries no (q, r, variant) label."""


@dataclass(frozen=True)
class QuatAlgebra:
    """H(-cp, -q): i^2 = -cp, j^2 = -q, ij = -ji."""

    cp: int
    q: int

    def __post_init__(self) -> None:
        if self.cp <= 0 or self.q <= 0:
            raise BadParamsError("algebra parameters must be positive")

    def element(self, w, x, y, z) -> "QuatElement":
        return QuatElement(self, (Fraction(w), Fraction(x), Fraction(y), Fraction(z)))

    @property
    def one(self) -> "QuatElement":
        return self.element(1, 0, 0, 0)

    @property
    def alpha(self) -> "QuatElement":
        return self.element(0, 1, 0, 0)

    @property
    def beta(self) -> "QuatElement":
        return self.element(0, 0, 1, 0)


@dataclass(frozen=True)
class QuatElement:
    algebra: QuatAlgebra
    coeffs: tuple[Fraction, Fraction, Fraction, Fraction]

    def _require_same(self, other: "QuatElement") -> None:
        if self.algebra != other.algebra:
            raise AlgebraMismatchError("elements from different algebras")

    def __add__(self, other: "QuatElement") -> "QuatElement":
        self._require_same(other)
        return QuatElement(self.algebra, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "QuatElement") -> "QuatElement":
        self._require_same(other)
        return QuatElement(self.algebra, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "QuatElement":
        return QuatElement(self.algebra, tuple(-a for a in self.coeffs))

    def scale(self, s) -> "QuatElement":
        s = Fraction(s)
        return QuatElement(self.algebra, tuple(s * a for a in self.coeffs))

    def __mul__(self, other: "QuatElement") -> "QuatElement":
        self._require_same(other)
        A = Fraction(-self.algebra.cp)
        B = Fraction(-self.algebra.q)
        w1, x1, y1, z1 = self.coeffs
        w2, x2, y2, z2 = other.coeffs
        w = w1 * w2 + A * x1 * x2 + B * y1 * y2 - A * B * z1 * z2
        x = w1 * x2 + x1 * w2 - B * (y1 * z2 - z1 * y2)
        y = w1 * y2 + y1 * w2 + A * (x1 * z2 - z1 * x2)
        z = w1 * z2 + z1 * w2 + x1 * y2 - y1 * x2
        return QuatElement(self.algebra, (w, x, y, z))

    def conj(self) -> "QuatElement":
        w, x, y, z = self.coeffs
        return QuatElement(self.algebra, (w, -x, -y, -z))

    def trd(self) -> Fraction:
        return 2 * self.coeffs[0]

    def nrd(self) -> Fraction:
        w, x, y, z = self.coeffs
        cp, q = self.algebra.cp, self.algebra.q
        return w * w + cp * x * x + q * y * y + cp * q * z * z

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __repr__(self) -> str:
        names = ("", "a", "b", "ab")
        parts = [f"{c}{n}" for c, n in zip(self.coeffs, names) if c != 0]
        return " + ".join(parts) if parts else "0"


def mul(x: QuatElement, y: QuatElement) -> QuatElement:
    return x * y


def conj(x: QuatElement) -> QuatElement:
    return x.conj()


def trd(x: QuatElement) -> Fraction:
    return x.trd()


def nrd(x: QuatElement) -> Fraction:
    return x.nrd()


# --- exact linear algebra helpers ----------------------------------------

def _mat_inverse(rows: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Inverse of a 4x4 Fraction matrix by Gauss-Jordan elimination."""
    n = len(rows)
    aug = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise DegenerateBasisError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [v - factor * w for v, w in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(rows)
    mat = [list(map(Fraction, r)) for r in rows]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if mat[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            mat[col], mat[piv] = mat[piv], mat[col]
            det = -det
        det *= mat[col][col]
        inv = 1 / mat[col][col]
        for r in range(col + 1, n):
            if mat[r][col] != 0:
                factor = mat[r][col] * inv
                mat[r] = [v - factor * w for v, w in zip(mat[r], mat[col])]
    return det


def _hnf_with_transform(mat: list[list[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Row HNF: returns (H, U) with U unimodular, U @ mat = H, zero rows last."""
    m = len(mat)
    n = len(mat[0]) if m else 0
    h = [row[:] for row in mat]
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    pivot_row = 0
    for col in range(n):
        # clear column below pivot_row by gcd row operations
        nz = [r for r in range(pivot_row, m) if h[r][col] != 0]
        if not nz:
            continue
        r0 = nz[0]
        for r in nz[1:]:
            a, b = h[r0][col], h[r][col]
            g, x, y = _xgcd_int(a, b)
            a_, b_ = a // g, b // g
            row_r0 = [x * h[r0][c] + y * h[r][c] for c in range(n)]
            row_r = [-b_ * h[r0][c] + a_ * h[r][c] for c in range(n)]
            h[r0], h[r] = row_r0, row_r
            urow_r0 = [x * u[r0][c] + y * u[r][c] for c in range(m)]
            urow_r = [-b_ * u[r0][c] + a_ * u[r][c] for c in range(m)]
            u[r0], u[r] = urow_r0, urow_r
        if h[r0][col] < 0:
            h[r0] = [-v for v in h[r0]]
            u[r0] = [-v for v in u[r0]]
        h[pivot_row], h[r0] = h[r0], h[pivot_row]
        u[pivot_row], u[r0] = u[r0], u[pivot_row]
        # reduce rows above the pivot
        piv = h[pivot_row][col]
        for r in range(pivot_row):
            qv = h[r][col] // piv
            if qv:
                h[r] = [h[r][c] - qv * h[pivot_row][c] for c in range(n)]
                u[r] = [u[r][c] - qv * u[pivot_row][c] for c in range(m)]
        pivot_row += 1
        if pivot_row == m:
            break
    return h, u


def _xgcd_int(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        qt, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - qt * x1
        y0, y1 = y1, y0 - qt * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def _common_denominator(elems: Iterable[QuatElement]) -> int:
    d = 1
    for e in elems:
        for c in e.coeffs:
            d = d * c.denominator // math.gcd(d, c.denominator)
    return d


class QuatOrder:
    """Rank-4 lattice given by a basis, with cached Gram data.

    label, when present, is (q, r, variant) identifying the two standard
    constructions of level-c orders.
    """

    def __init__(self, basis: Sequence[QuatElement],
                 label: Optional[tuple[int, int, Variant]] = None,
                 params: Optional[PrimeParams] = None):
        basis = tuple(basis)
        if len(basis) != 4:
            raise DegenerateBasisError("an order needs exactly 4 basis elements")
        alg = basis[0].algebra
        for e in basis:
            if e.algebra != alg:
                raise AlgebraMismatchError("mixed algebras in basis")
        self.algebra = alg
        self.basis = basis
        self.label = label
        self.params = params
        self._matrix = [list(e.coeffs) for e in basis]
        if _det(self._matrix) == 0:
            raise DegenerateBasisError("basis is linearly dependent")
        self._inv = _mat_inverse(self._matrix)

    def coordinates(self, x: QuatElement) -> tuple[Fraction, ...]:
        """Coordinates of x in this basis."""
        if x.algebra != self.algebra:
            raise AlgebraMismatchError("element from another algebra")
        return tuple(
            sum(x.coeffs[r] * self._inv[r][c] for r in range(4)) for c in range(4)
        )

    def contains(self, x: QuatElement) -> bool:
        return all(c.denominator == 1 for c in self.coordinates(x))

    @property
    def gram(self) -> list[list[int]]:
        g = []
        for e in self.basis:
            row = []
            for f in self.basis:
                t = (e * f.conj()).trd()
                if t.denominator != 1:
                    raise NotAnOrderError("non-integral Gram entry")
                row.append(int(t))
            g.append(row)
        return g

    def discriminant(self) -> int:
        d = _det(self.gram)
        if d.denominator != 1:
            raise NotAnOrderError("non-integral Gram determinant")
        return int(d)

    def element_from_coords(self, coords: Sequence[int]) -> QuatElement:
        acc = self.algebra.element(0, 0, 0, 0)
        for c, e in zip(coords, self.basis):
            acc = acc + e.scale(c)
        return acc

    def to_json(self) -> dict:
        return {
            "algebra": {"cp": self.algebra.cp, "q": self.algebra.q},
            "basis": [[[c.numerator, c.denominator] for c in e.coeffs] for e in self.basis],
            "label": None if self.label is None
            else {"q": self.label[0], "r": self.label[1], "variant": self.label[2].value},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "QuatOrder":
        alg = QuatAlgebra(obj["algebra"]["cp"], obj["algebra"]["q"])
        basis = [
            QuatElement(alg, tuple(Fraction(n, d) for n, d in coords))
            for coords in obj["basis"]
        ]
        label = None
        if obj.get("label"):
            lab = obj["label"]
            label = (lab["q"], lab["r"], Variant(lab["variant"]))
        return cls(basis, label=label)

    def __repr__(self) -> str:
        lab = ""
        if self.label:
            q, r, variant = self.label
            lab = "O'" if variant is Variant.LAMBDA_PRIME else "O"
            lab = f" {lab}({q},{r})"
        return f"QuatOrder{lab} disc={self.discriminant()}"


def is_order(basis: Sequence[QuatElement]) -> bool:
    """True iff the lattice is a subring containing 1 with integral Trd and Nrd."""
    try:
        lattice = QuatOrder(basis)
    except DegenerateBasisError:
        raise
    if not lattice.contains(lattice.algebra.one):
        return False
    for e in basis:
        if e.trd().denominator != 1 or e.nrd().denominator != 1:
            return False
    for e in basis:
        for f in basis:
            if not lattice.contains(e * f):
                return False
    return True


def eichler_O(params: PrimeParams, q: int, r: int) -> QuatOrder:
    """Level-c order Z + Z(1+b)/2 + Z a(1+b)/2 + Z (r+a)b/q in H(-cp,-q)."""
    cp = params.cp
    if q % 8 not in (3, 7) or (r * r + cp) % q != 0:
        raise BadParamsError(f"(q, r) = ({q}, {r}) fails the congruence conditions")
    alg = QuatAlgebra(cp, q)
    half = Fraction(1, 2)
    basis = (
        alg.one,
        QuatElement(alg, (half, Fraction(0), half, Fraction(0))),
        QuatElement(alg, (Fraction(0), half, Fraction(0), half)),
        QuatElement(alg, (Fraction(0), Fraction(0), Fraction(r, q), Fraction(1, q))),
    )
    order = QuatOrder(basis, label=(q, r, Variant.LAMBDA), params=params)
    _validate_eichler(order, params)
    return order


def eichler_Oprime(params: PrimeParams, q: int, rprime: int) -> QuatOrder:
    """Level-c order Z + Z(1+a)/2 + Zb + Z (r'+a)b/(2q); needs cp = 3 mod 4."""
    cp = params.cp
    if cp % 4 != 3:
        raise BadParamsError("primed order requires cp = 3 mod 4")
    if q % 8 not in (3, 7) or (rprime * rprime + cp) % (4 * q) != 0:
        raise BadParamsError(f"(q, r') = ({q}, {rprime}) fails the congruence conditions")
    alg = QuatAlgebra(cp, q)
    half = Fraction(1, 2)
    basis = (
        alg.one,
        QuatElement(alg, (half, half, Fraction(0), Fraction(0))),
        alg.beta,
        QuatElement(alg, (Fraction(0), Fraction(0), Fraction(rprime, 2 * q), Fraction(1, 2 * q))),
    )
    order = QuatOrder(basis, label=(q, rprime, Variant.LAMBDA_PRIME), params=params)
    _validate_eichler(order, params)
    return order


def eichler_intersection_order(params: PrimeParams, q: int, r: int) -> QuatOrder:
    """Z + Zb + Z(1+a+b+ab)/2 + Z(r+a)b/q: index-2 sublattice of both standard orders."""
    cp = params.cp
    if (r * r + cp) % q != 0:
        raise BadParamsError(f"(q, r) = ({q}, {r}) fails the congruence conditions")
    alg = QuatAlgebra(cp, q)
    half = Fraction(1, 2)
    basis = (
        alg.one,
        alg.beta,
        QuatElement(alg, (half, half, half, half)),
        QuatElement(alg, (Fraction(0), Fraction(0), Fraction(r, q), Fraction(1, q))),
    )
    return QuatOrder(basis, params=params)


def _validate_eichler(order: QuatOrder, params: PrimeParams) -> None:
    if not is_order(order.basis):
        raise NotAnOrderError("constructed lattice is not an order")
    expected = (params.c * params.p) ** 2
    if order.discriminant() != expected:
        raise NotAnOrderError(
            f"discriminant {order.discriminant()} != (cp)^2 = {expected}"
        )


def discriminant(order: QuatOrder) -> int:
    return order.discriminant()


def order_to_form(order: QuatOrder) -> BQForm:
    """Reduced form attached to a labeled level-c order."""
    if order.label is None or order.params is None:
        raise UnlabeledOrderError("order carries no (q, r, variant) label")
    q, r, variant = order.label
    cp = order.params.cp
    if variant is Variant.LAMBDA:
        return reduce_form(BQForm(q, 4 * r, (4 * r * r + 4 * cp) // q))
    return reduce_form(BQForm(q, r, (r * r + cp) // (4 * q)))


# --- embedded quadratic orders -------------------------------------------

def _pure_projection_lattice(order: QuatOrder) -> tuple[list[list[int]], int, list[list[int]]]:
    """Integer basis R (3 rows) of L * (trace-zero projections), the scale L,
    and for each row its preimage coordinates in the order basis."""
    pures = []
    for e in order.basis:
        w, x, y, z = e.coeffs
        pures.append((x, y, z))
    scale = 1
    for row in pures:
        for c in row:
            scale = scale * c.denominator // math.gcd(scale, c.denominator)
    int_rows = [[int(c * scale) for c in row] for row in pures]
    h, u = _hnf_with_transform(int_rows)
    rows = [r for r in h if any(r)]
    pre = [u[i] for i, r in enumerate(h) if any(r)]
    if len(rows) != 3:
        raise DegenerateBasisError("trace-zero projection is not rank 3")
    return rows, scale, pre


def _projection_gram(order: QuatOrder, rows: list[list[int]], scale: int) -> list[list[Fraction]]:
    cp, q = order.algebra.cp, order.algebra.q
    weights = (4 * cp, 4 * q, 4 * cp * q)
    gram = []
    for ri in rows:
        gram.append([
            Fraction(sum(w * ri[t] * rj[t] for t, w in enumerate(weights)), scale * scale)
            for rj in rows
        ])
    return gram


def _enumerate_disc_values(order: QuatOrder, bound: int):
    """Yield (value, coords, preimage) with value = |disc Z[gamma]| <= bound
    over the trace-zero projection lattice."""
    rows, scale, pre = _pure_projection_lattice(order)
    gram = _projection_gram(order, rows, scale)
    ginv = _mat_inverse(gram)
    box = []
    for idx in range(3):
        limit_sq = Fraction(bound) * ginv[idx][idx]
        box.append(math.isqrt(int(limit_sq)) + 1)
    for n1 in range(-box[0], box[0] + 1):
        for n2 in range(-box[1], box[1] + 1):
            for n3 in range(-box[2], box[2] + 1):
                if n1 == 0 and n2 == 0 and n3 == 0:
                    continue
                v = (n1, n2, n3)
                val = Fraction(0)
                for s in range(3):
                    for t in range(3):
                        val += v[s] * v[t] * gram[s][t]
                if val <= bound:
                    if val.denominator != 1:
                        raise NotAnOrderError("non-integral embedded discriminant")
                    yield int(val), v, pre


def embedded_discs(order: QuatOrder, bound: int) -> list[int]:
    """Distinct values |Trd(g)^2 - 4 Nrd(g)| <= bound at primitive lattice vectors.

    Restricting to primitive vectors drops the k^2-multiples of shorter
    vectors, so the first two entries are the successive minima.
    """
    if bound <= 0:
        raise ValueError("bound must be positive")
    values = {
        val
        for val, v, _pre in _enumerate_disc_values(order, bound)
        if math.gcd(math.gcd(abs(v[0]), abs(v[1])), abs(v[2])) == 1
    }
    return sorted(values)


def embeds_quadratic(order: QuatOrder, D: int) -> bool:
    """True iff some g in the order has Trd(g) = D and Nrd(g) = (D^2 - D)/4."""
    if D >= 0 or D % 4 not in (0, 1):
        return False
    target = -D
    for val, v, pre in _enumerate_disc_values(order, target):
        if val != target:
            continue
        coords = [sum(v[t] * pre[t][s] for t in range(3)) for s in range(4)]
        gamma0 = order.element_from_coords(coords)
        t0 = gamma0.trd()
        shift = Fraction(D) - t0
        if shift.numerator % 2 != 0:
            continue
        gamma = gamma0 + order.algebra.one.scale(shift / 2)
        if gamma.trd() == D and gamma.nrd() == Fraction(D * D - D, 4):
            return True
    return False


# --- lattice intersection and index --------------------------------------

def intersect(o1: QuatOrder, o2: QuatOrder) -> QuatOrder:
    """Intersection lattice; an order whenever both inputs are orders."""
    if o1.algebra != o2.algebra:
        raise AlgebraMismatchError("intersection across algebras")
    d = _common_denominator(list(o1.basis) + list(o2.basis))
    a1 = [[int(c * d) for c in e.coeffs] for e in o1.basis]
    a2 = [[int(c * d) for c in e.coeffs] for e in o2.basis]
    stacked = a1 + a2
    h, u = _hnf_with_transform(stacked)
    kernel = [u[i] for i, row in enumerate(h) if not any(row)]
    if len(kernel) != 4:
        raise DegenerateBasisError("unexpected kernel rank in intersection")
    alg = o1.algebra
    basis = []
    for vec in kernel:
        coords = [
            Fraction(sum(vec[r] * a1[r][c] for r in range(4)), d) for c in range(4)
        ]
        basis.append(QuatElement(alg, tuple(coords)))
    return QuatOrder(basis)


def index(sub: QuatOrder, sup: QuatOrder) -> int:
    """Index [sup : sub] when sub is contained in sup."""
    if sub.algebra != sup.algebra:
        raise AlgebraMismatchError("index across algebras")
    t = []
    for e in sub.basis:
        coords = sup.coordinates(e)
        if any(c.denominator != 1 for c in coords):
            raise NotSublatticeError("first lattice is not contained in the second")
        t.append([Fraction(c) for c in coords])
    d = _det(t)
    return abs(int(d))
