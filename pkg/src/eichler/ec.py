"""Elliptic curves over F_{p^2}: supersingularity, kernels, isogenies, graphs.

Curves are short Weierstrass y^2 = x^3 + a4 x + a6.  Subgroups are handled
x-only through kernel polynomials; quotients use the kernel-polynomial form
of the classical isogeny formulas, so no point coordinates in extension
fields are ever needed.
"""

from __future__ import annotations

import importlib.resources
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

from .ff import Fp2Ctx, Poly, factor, fp2_ctx, poly_gcd, roots
from .numth import PrimeParams, is_prime, kronecker


class SingularCurveError(ValueError):
    """4 a4^3 + 27 a6^2 = 0."""


class PTooLargeError(ValueError):
    """Exhaustive point counting is capped at desk scale."""


class BadTorsionError(ValueError):
    """Division polynomial order shares a factor with p."""


class InvalidKernelError(ValueError):
    """Polynomial does not cut out a subgroup of the stated order."""


class UnsupportedEllError(ValueError):
    """Only the level-2 and level-3 modular polynomials are shipped."""


class NotSplitError(ValueError):
    """The isogeny degree does not split for the orientation discriminant."""


_COUNT_CAP = 600


@dataclass(frozen=True)
class Curve:
    ctx: Fp2Ctx
    a4: tuple
    a6: tuple

    def __post_init__(self) -> None:
        c = self.ctx
        d = c.add(c.mul(c.embed(4), c.pow_(self.a4, 3)),
                  c.mul(c.embed(27), c.mul(self.a6, self.a6)))
        if c.is_zero(d):
            raise SingularCurveError("discriminant vanishes")

    def rhs(self, x):
        c = self.ctx
        return c.add(c.add(c.mul(c.mul(x, x), x), c.mul(self.a4, x)), self.a6)

    def __repr__(self) -> str:
        c = self.ctx
        return f"y^2 = x^3 + ({c.format_elt(self.a4)})x + {c.format_elt(self.a6)}"


def j_invariant(E: Curve):
    c = E.ctx
    a3 = c.mul(c.embed(4), c.pow_(E.a4, 3))
    denom = c.add(a3, c.mul(c.embed(27), c.mul(E.a6, E.a6)))
    return c.mul(c.embed(1728), c.mul(a3, c.inv(denom)))


def from_j(ctx: Fp2Ctx, j) -> Curve:
    """A fixed model with the given j-invariant."""
    if ctx.is_zero(j):
        return Curve(ctx, ctx.zero, ctx.one)
    if j == ctx.embed(1728):
        return Curve(ctx, ctx.one, ctx.zero)
    k = ctx.sub(ctx.embed(1728), j)
    a4 = ctx.mul(ctx.embed(3), ctx.mul(j, k))
    a6 = ctx.mul(ctx.embed(2), ctx.mul(j, ctx.mul(k, k)))
    return Curve(ctx, a4, a6)


def conjugate(E: Curve) -> Curve:
    return Curve(E.ctx, E.ctx.frob(E.a4), E.ctx.frob(E.a6))


@lru_cache(maxsize=None)
def _nonsquare(ctx: Fp2Ctx):
    from .ff import is_square
    for x in ctx.elements():
        if not ctx.is_zero(x) and not is_square(ctx, x):
            return x
    raise RuntimeError("no non-square in the field")


def quadratic_twist(E: Curve) -> Curve:
    d = _nonsquare(E.ctx)
    c = E.ctx
    return Curve(c, c.mul(c.mul(d, d), E.a4), c.mul(c.mul(d, c.mul(d, d)), E.a6))


# --- point arithmetic (used by tests and small oracles) -------------------

def point_add(E: Curve, P, Q):
    c = E.ctx
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if c.is_zero(c.add(y1, y2)):
            return None
        num = c.add(c.mul(c.embed(3), c.mul(x1, x1)), E.a4)
        den = c.mul(c.embed(2), y1)
    else:
        num = c.sub(y2, y1)
        den = c.sub(x2, x1)
    lam = c.mul(num, c.inv(den))
    x3 = c.sub(c.sub(c.mul(lam, lam), x1), x2)
    y3 = c.sub(c.mul(lam, c.sub(x1, x3)), y1)
    return (x3, y3)


def point_mul(E: Curve, n: int, P):
    if n < 0:
        P = None if P is None else (P[0], E.ctx.neg(P[1]))
        n = -n
    R = None
    while n:
        if n & 1:
            R = point_add(E, R, P)
        P = point_add(E, P, P)
        n >>= 1
    return R


# --- supersingularity by exhaustive point count ---------------------------

def curve_order(E: Curve) -> int:
    """#E(F_{p^2}) by summing the quadratic character of x^3 + a4 x + a6."""
    ctx = E.ctx
    if ctx.p > _COUNT_CAP:
        raise PTooLargeError(f"point counting capped at p <= {_COUNT_CAP}")
    squares = ctx.squares()
    count = ctx.size + 1
    for x in ctx.elements():
        fx = E.rhs(x)
        if ctx.is_zero(fx):
            continue
        count += 1 if fx in squares else -1
    return count


def trace(E: Curve) -> int:
    return E.ctx.size + 1 - curve_order(E)


def is_supersingular(E: Curve) -> bool:
    return trace(E) % E.ctx.p == 0


def is_twist_admissible(E: Curve) -> bool:
    """Frobenius acts as a scalar: trace = +-2p, so E(F_{p^2}) is (Z/(p+e))^2."""
    return abs(trace(E)) == 2 * E.ctx.p


# --- division polynomials and order-c subgroups ---------------------------

@lru_cache(maxsize=None)
def _psi(E: Curve, n: int) -> Poly:
    """x-only division polynomial: psi_n for odd n, psi_n / y for even n."""
    ctx = E.ctx
    a, b = E.a4, E.a6
    f = Poly(ctx, [b, a, ctx.zero, ctx.one])  # x^3 + a x + b
    if n == 0:
        return Poly(ctx, [])
    if n in (1, 2):
        return Poly.const(ctx, ctx.one) if n == 1 else Poly.const(ctx, ctx.embed(2))
    if n == 3:
        return Poly(ctx, [
            ctx.neg(ctx.mul(a, a)),
            ctx.mul(ctx.embed(12), b),
            ctx.mul(ctx.embed(6), a),
            ctx.zero,
            ctx.embed(3),
        ])
    if n == 4:
        aa = ctx.mul(a, a)
        c0 = ctx.sub(ctx.neg(ctx.mul(ctx.embed(8), ctx.mul(b, b))), ctx.mul(a, aa))
        coeffs = [
            c0,
            ctx.neg(ctx.mul(ctx.embed(4), ctx.mul(a, b))),
            ctx.neg(ctx.mul(ctx.embed(5), aa)),
            ctx.mul(ctx.embed(20), b),
            ctx.mul(ctx.embed(5), a),
            ctx.zero,
            ctx.one,
        ]
        return Poly(ctx, coeffs).scale(ctx.embed(4))
    m, rem = divmod(n, 2)
    if rem:  # n = 2m + 1
        t1 = _psi(E, m + 2) * _psi(E, m) * _psi(E, m) * _psi(E, m)
        t2 = _psi(E, m - 1) * _psi(E, m + 1) * _psi(E, m + 1) * _psi(E, m + 1)
        if m % 2 == 0:  # psi_{m+2}, psi_m even: carry y^4 = f^2
            return t1 * f * f - t2
        return t1 - t2 * f * f
    # n = 2m
    t1 = _psi(E, m + 2) * _psi(E, m - 1) * _psi(E, m - 1)
    t2 = _psi(E, m - 2) * _psi(E, m + 1) * _psi(E, m + 1)
    half = ctx.inv(ctx.embed(2))
    return (_psi(E, m) * (t1 - t2)).scale(half)


def division_poly(E: Curve, n: int) -> Poly:
    """Division polynomial in x (for even n the y factor is divided out)."""
    if n < 1 or math.gcd(n, E.ctx.p) != 1:
        raise BadTorsionError(f"n = {n} invalid for characteristic {E.ctx.p}")
    return _psi(E, n)


@dataclass(frozen=True)
class SubgroupKernel:
    curve: Curve
    kernel_poly: Poly
    order: int

    def __repr__(self) -> str:
        return f"<order-{self.order} kernel {self.kernel_poly}>"


def _doubling_map(E: Curve) -> tuple[Poly, Poly]:
    ctx = E.ctx
    a, b = E.a4, E.a6
    num = Poly(ctx, [
        ctx.mul(a, a),
        ctx.neg(ctx.mul(ctx.embed(8), b)),
        ctx.neg(ctx.mul(ctx.embed(2), a)),
        ctx.zero,
        ctx.one,
    ])
    den = Poly(ctx, [ctx.mul(ctx.embed(4), b), ctx.mul(ctx.embed(4), a),
                     ctx.zero, ctx.embed(4)])
    return num, den


def push_through_xmap(h: Poly, num: Poly, den: Poly) -> Poly:
    """Monic polynomial whose roots are X(roots of h), X = num/den, via resultants."""
    ctx = h.ctx
    d = h.degree
    if d == 0:
        return h
    from .ff import poly_resultant
    ys = []
    vals = []
    k = 0
    while len(ys) <= d:
        y = ctx.embed(k)
        k += 1
        g = num - den.scale(y)
        r = poly_resultant(h, g)
        ys.append(y)
        vals.append(r)
    out = _lagrange(ctx, ys, vals)
    return out.monic()


def _lagrange(ctx, xs, ys) -> Poly:
    total = Poly(ctx, [])
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        num = Poly.const(ctx, ctx.one)
        den = ctx.one
        for jdx, xj in enumerate(xs):
            if jdx == i:
                continue
            num = num * Poly(ctx, [ctx.neg(xj), ctx.one])
            den = ctx.mul(den, ctx.sub(xi, xj))
        total = total + num.scale(ctx.mul(yi, ctx.inv(den)))
    return total


def _is_subgroup_poly(E: Curve, h: Poly) -> bool:
    """Stability of the root-set under the doubling map."""
    num, den = _doubling_map(E)
    if poly_gcd(h, den).degree > 0:
        return False
    return push_through_xmap(h, num, den) == h.monic()


def order_c_kernels(E: Curve, c: int) -> list[SubgroupKernel]:
    """Kernel polynomials of the F_{p^2}-stable subgroups of order c."""
    if c < 2 or math.gcd(c, E.ctx.p) != 1 or not is_prime(c):
        raise BadTorsionError(f"c = {c} must be a prime away from p")
    ctx = E.ctx
    if c == 2:
        cubic = Poly(ctx, [E.a6, E.a4, ctx.zero, ctx.one])
        return [
            SubgroupKernel(E, Poly(ctx, [ctx.neg(r), ctx.one]), 2)
            for r in sorted(set(roots(cubic)), key=lambda t: t)
        ]
    psi = division_poly(E, c).monic()
    want = (c - 1) // 2
    pieces = []
    for g, mult in factor(psi):
        pieces.extend([g] * mult)
    out = []
    seen = set()
    for combo in _degree_combos(pieces, want):
        h = Poly.const(ctx, ctx.one)
        for g in combo:
            h = h * g
        key = tuple(h.coeffs)
        if key in seen:
            continue
        seen.add(key)
        if _is_subgroup_poly(E, h):
            out.append(SubgroupKernel(E, h.monic(), c))
    out.sort(key=lambda k: [_coeff_key(cf) for cf in k.kernel_poly.coeffs])
    return out


def _coeff_key(c):
    return c if isinstance(c, tuple) else (c,)


def _degree_combos(pieces: list[Poly], want: int):
    """Subsets of the factor list with total degree = want."""
    n = len(pieces)

    def rec(idx: int, remaining: int, acc: list[Poly]):
        if remaining == 0:
            yield list(acc)
            return
        if idx >= n:
            return
        g = pieces[idx]
        if g.degree <= remaining:
            acc.append(g)
            yield from rec(idx + 1, remaining - g.degree, acc)
            acc.pop()
        yield from rec(idx + 1, remaining, acc)

    yield from rec(0, want, [])


def velu(K: SubgroupKernel) -> tuple[Curve, Callable[[Poly], Poly]]:
    """Quotient curve and a pushforward for kernel polynomials of other subgroups."""
    E = K.curve
    ctx = E.ctx
    h = K.kernel_poly.monic()
    c = K.order
    if c == 2:
        if h.degree != 1:
            raise InvalidKernelError("order-2 kernel polynomial must be linear")
        x0 = ctx.neg(h.coeffs[0])
        if not ctx.is_zero(E.rhs(x0)):
            raise InvalidKernelError("root is not a 2-torsion x-coordinate")
        t = ctx.add(ctx.mul(ctx.embed(3), ctx.mul(x0, x0)), E.a4)
        w = ctx.mul(x0, t)
        a4p = ctx.sub(E.a4, ctx.mul(ctx.embed(5), t))
        a6p = ctx.sub(E.a6, ctx.mul(ctx.embed(7), w))
        codomain = Curve(ctx, a4p, a6p)
        num = Poly(ctx, [t, ctx.neg(x0), ctx.one])
        den = h
    else:
        d = h.degree
        if d != (c - 1) // 2:
            raise InvalidKernelError(f"kernel polynomial degree {d} != (c-1)/2")
        if not (division_poly(E, c) % h).is_zero():
            raise InvalidKernelError("polynomial does not divide the division polynomial")
        e1 = ctx.neg(h.coeffs[d - 1]) if d >= 1 else ctx.zero
        e2 = h.coeffs[d - 2] if d >= 2 else ctx.zero
        e3 = ctx.neg(h.coeffs[d - 3]) if d >= 3 else ctx.zero
        p1 = e1
        p2 = ctx.sub(ctx.mul(e1, e1), ctx.mul(ctx.embed(2), e2))
        p3 = ctx.add(
            ctx.sub(ctx.mul(e1, ctx.mul(e1, e1)),
                    ctx.mul(ctx.embed(3), ctx.mul(e1, e2))),
            ctx.mul(ctx.embed(3), e3),
        )
        a, b = E.a4, E.a6
        v = ctx.add(ctx.mul(ctx.embed(6), p2), ctx.mul(ctx.embed(2 * d), a))
        w = ctx.add(
            ctx.add(ctx.mul(ctx.embed(10), p3), ctx.mul(ctx.embed(6), ctx.mul(a, p1))),
            ctx.mul(ctx.embed(4 * d), b),
        )
        a4p = ctx.sub(a, ctx.mul(ctx.embed(5), v))
        a6p = ctx.sub(b, ctx.mul(ctx.embed(7), w))
        codomain = Curve(ctx, a4p, a6p)
        f = Poly(ctx, [b, a, ctx.zero, ctx.one])
        hp = h.derivative()
        hpp = hp.derivative()
        lead = Poly(ctx, [ctx.mul(ctx.embed(-2), p1), ctx.embed(c)])
        mid = Poly(ctx, [ctx.mul(ctx.embed(2), a), ctx.zero, ctx.embed(6)])
        num = lead * h * h - mid * hp * h \
            + (f * (hp * hp - hpp * h)).scale(ctx.embed(4))
        den = h * h

    def push(other: Poly | SubgroupKernel) -> Poly:
        poly = other.kernel_poly if isinstance(other, SubgroupKernel) else other
        return push_through_xmap(poly, num, den)

    return codomain, push


def c_epsilon_test(E: Curve, G: SubgroupKernel) -> bool:
    """Does quotienting by G reach the Galois conjugate j-invariant?"""
    codomain, _push = velu(G)
    return j_invariant(codomain) == E.ctx.frob(j_invariant(E))


# --- classical modular polynomials Phi_2, Phi_3 ----------------------------

_PHI2 = {
    (3, 0): 1,
    (2, 2): -1,
    (2, 1): 1488,
    (2, 0): -162000,
    (1, 1): 40773375,
    (1, 0): 8748000000,
    (0, 0): -157464000000000,
}


@lru_cache(maxsize=None)
def _phi3_table(path: Optional[str] = None) -> dict:
    if path is None:
        text = (importlib.resources.files("eichler") / "data" / "phi3.txt").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    table: dict[tuple[int, int], int] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        si, sj, sc = line.split()
        i, j, coeff = int(si), int(sj), int(sc)
        if j > i:
            raise ValueError("phi3 table must store i >= j")
        table[(i, j)] = coeff
    _validate_phi3(table)
    return table


def _validate_phi3(table: dict) -> None:
    # Phi_3(0, Y) = Y (Y + 12288000)^3 pins the one-variable slice exactly.
    slice_coeffs = [0] * 5
    for (i, j), coeff in table.items():
        if j == 0:
            slice_coeffs[i] += coeff
        if i == 0:
            slice_coeffs[j] += coeff
    b = 12288000
    expected = [0, b ** 3, 3 * b * b, 3 * b, 1]
    if slice_coeffs != expected:
        raise ValueError("phi3 table fails the Y*(Y+12288000)^3 slice check")


def phi_poly(ell: int, path: Optional[str] = None) -> dict:
    """Symmetric coefficient table {(i, j): c} with i >= j for Phi_ell."""
    if ell == 2:
        return dict(_PHI2)
    if ell == 3:
        return dict(_phi3_table(path))
    raise UnsupportedEllError(f"no modular polynomial table for ell = {ell}")


def phi_eval_poly(ell: int, ctx, j1, path: Optional[str] = None) -> Poly:
    """Phi_ell(j1, Y) as a polynomial in Y over the field context."""
    table = phi_poly(ell, path)
    deg = ell + 1
    coeffs = [ctx.zero] * (deg + 1)
    for (i, j), coeff in table.items():
        ci = ctx.mul(ctx.embed(coeff), ctx.pow_(j1, i))
        coeffs[j] = ctx.add(coeffs[j], ci)
        if i != j:
            cj = ctx.mul(ctx.embed(coeff), ctx.pow_(j1, j))
            coeffs[i] = ctx.add(coeffs[i], cj)
    return Poly(ctx, coeffs)


def isogeny_count(j1, j2, ell: int, p: int, path: Optional[str] = None) -> int:
    """Multiplicity of j2 as a root of Phi_ell(j1, Y) over F_{p^2}."""
    ctx = fp2_ctx(p)
    j1 = ctx.embed(j1) if isinstance(j1, int) else j1
    j2 = ctx.embed(j2) if isinstance(j2, int) else j2
    poly = phi_eval_poly(ell, ctx, j1, path)
    count = 0
    lin = Poly(ctx, [ctx.neg(j2), ctx.one])
    while not poly.is_zero():
        quo, rem = poly.divmod(lin)
        if not rem.is_zero():
            break
        count += 1
        poly = quo
    return count


# --- supersingular j-invariants and the oriented graph --------------------

@lru_cache(maxsize=None)
def supersingular_j_invariants(p: int) -> tuple:
    """All supersingular j-invariants in F_{p^2}, found by a 2-isogeny walk."""
    ctx = fp2_ctx(p)
    seed = None
    for cand in list(range(0, p)):
        j = ctx.embed(cand)
        E = from_j(ctx, j)
        if is_supersingular(E):
            seed = j
            break
    if seed is None:
        raise RuntimeError("no supersingular seed found")
    seen = {seed}
    frontier = [seed]
    while frontier:
        j = frontier.pop()
        poly = phi_eval_poly(2, ctx, j)
        for r in set(roots(poly)):
            if r not in seen:
                seen.add(r)
                frontier.append(r)
    return tuple(sorted(seen))


def admissible_models(ctx: Fp2Ctx, j) -> list[Curve]:
    """Twists with Frobenius acting as a scalar (trace +-2p), deduplicated later."""
    base = from_j(ctx, j)
    if ctx.is_zero(j) or j == ctx.embed(1728):
        g = _field_generator(ctx)
        k = 6 if ctx.is_zero(j) else 4
        models = []
        d = ctx.one
        for _ in range(k):
            if ctx.is_zero(j):
                models.append(Curve(ctx, ctx.zero, ctx.mul(base.a6, d)))
            else:
                models.append(Curve(ctx, ctx.mul(base.a4, d), ctx.zero))
            d = ctx.mul(d, g)
        out = [E for E in models if is_twist_admissible(E)]
        return out
    pair = [base, quadratic_twist(base)]
    return [E for E in pair if is_twist_admissible(E)]


@lru_cache(maxsize=None)
def _field_generator(ctx: Fp2Ctx):
    order = ctx.size - 1
    fac = _prime_divisors(order)
    for x in ctx.elements():
        if ctx.is_zero(x):
            continue
        if all(ctx.pow_(x, order // q) != ctx.one for q in fac):
            return x
    raise RuntimeError("no generator found")


def _prime_divisors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def canonical_pair_key(E: Curve, h: Poly, up_to_twist: bool = False):
    """Canonical tuple for (E, G) modulo F_{p^2}-isomorphism.

    Isomorphisms scale x by v = u^2 with u in the field; allowing every
    nonzero v instead folds quadratic twists together (geometric classes).
    """
    ctx = E.ctx
    best = None
    for u in ctx.elements():
        if ctx.is_zero(u):
            continue
        if up_to_twist:
            v = u
        else:
            v = ctx.mul(u, u)
        v2 = ctx.mul(v, v)
        a4t = ctx.mul(v2, E.a4)
        a6t = ctx.mul(ctx.mul(v2, v), E.a6)
        ht = h.compose_scale(v)
        key = (a4t, a6t, tuple(ht.coeffs))
        if best is None or key < best:
            best = key
    return best


@dataclass
class GraphNode:
    ident: str
    curve: Curve
    kernel: Poly
    j: tuple
    key: tuple


@dataclass
class OrientedGraph:
    params: PrimeParams
    ell: int
    nodes: list[GraphNode]
    edges: list[tuple[str, str]]
    conjugate_pairs: dict[str, str]

    def node_by_id(self, ident: str) -> GraphNode:
        return next(n for n in self.nodes if n.ident == ident)

    def degree(self, ident: str) -> int:
        return sum(1 for a, b in self.edges for x in (a, b) if x == ident)

    def adjacency(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {n.ident: set() for n in self.nodes}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def to_json(self) -> dict:
        ctx = self.nodes[0].curve.ctx if self.nodes else None
        return {
            "p": self.params.p,
            "c": self.params.c,
            "ell": self.ell,
            "nodes": [
                {
                    "id": n.ident,
                    "j": ctx.format_elt(n.j),
                    "a4": ctx.format_elt(n.curve.a4),
                    "a6": ctx.format_elt(n.curve.a6),
                    "kernel": [ctx.format_elt(c) for c in n.kernel.coeffs],
                }
                for n in self.nodes
            ],
            "edges": [list(e) for e in self.edges],
            "conjugation": self.conjugate_pairs,
        }

    def to_dot(self) -> str:
        ctx = self.nodes[0].curve.ctx if self.nodes else None
        lines = ["graph oriented_isogenies {"]
        for n in self.nodes:
            kern = ", ".join(ctx.format_elt(c) for c in n.kernel.coeffs[:-1])
            lines.append(
                f'  "{n.ident}" [label="{n.ident}: j={ctx.format_elt(n.j)}; G=[{kern}]"];'
            )
        for a, b in self.edges:
            lines.append(f'  "{a}" -- "{b}";')
        lines.append("}")
        return "\n".join(lines)


def oriented_graph(params: PrimeParams, ell: int) -> OrientedGraph:
    """Isogeny graph on oriented pairs (E, G) over F_{p^2}, including twists."""
    if not is_prime(ell) or ell == params.c:
        raise NotSplitError(f"ell = {ell} must be a prime different from c")
    if kronecker(-params.cp, ell) != 1:
        raise NotSplitError(f"ell = {ell} does not split for the orientation")
    p, c = params.p, params.c
    ctx = fp2_ctx(p)
    recs: dict[tuple, tuple[Curve, Poly, tuple]] = {}
    for j in supersingular_j_invariants(p):
        for E in admissible_models(ctx, j):
            for K in order_c_kernels(E, c):
                if c_epsilon_test(E, K):
                    key = canonical_pair_key(E, K.kernel_poly)
                    recs.setdefault(key, (E, K.kernel_poly, j_invariant(E)))
    keys = sorted(recs)
    ids = {key: f"E{i + 1}" for i, key in enumerate(keys)}
    nodes = [
        GraphNode(ids[key], recs[key][0], recs[key][1], recs[key][2], key)
        for key in keys
    ]
    edges = set()
    for key in keys:
        E, hG, _j = recs[key]
        for L in order_c_kernels(E, ell):
            codomain, push = velu(L)
            h2 = push(hG)
            key2 = canonical_pair_key(codomain, h2)
            if key2 in ids:
                edges.add(tuple(sorted((ids[key], ids[key2]))))
    conj = {}
    for key in keys:
        E, hG, _j = recs[key]
        ck = canonical_pair_key(conjugate(E), hG.map_coeffs(ctx.frob, ctx))
        conj[ids[key]] = ids[ck]
    return OrientedGraph(params, ell, nodes, sorted(edges), conj)


def fold_by_twist(graph: OrientedGraph) -> tuple[dict[str, tuple], list[tuple]]:
    """Merge quadratic twists: returns (node -> geometric key, folded edge list)."""
    mapping = {}
    for n in graph.nodes:
        mapping[n.ident] = canonical_pair_key(n.curve, n.kernel, up_to_twist=True)
    folded = set()
    for a, b in graph.edges:
        ka, kb = mapping[a], mapping[b]
        folded.add(tuple(sorted((ka, kb))))
    return mapping, sorted(folded)
