"""Finite fields F_p, F_{p^2}, F_{p^4} and dense univariate polynomials.

Field elements are plain values: ints for F_p, pairs (u, v) meaning
u + v*alpha for a quadratic extension.  A context object owns the
arithmetic; polynomials store their context and a coefficient list
(ascending, trimmed).
"""

from __future__ import annotations

import math
import random
from functools import lru_cache
from typing import Iterator, Optional

from .numth import is_prime, kronecker


class CtxMismatchError(ValueError):
    """Polynomials or elements from different field contexts."""


class FpCtx:
    """Prime field F_p; elements are ints in [0, p)."""

    def __init__(self, p: int):
        if not is_prime(p):
            raise ValueError(f"p = {p} is not prime")
        self.p = p
        self.size = p
        self.degree = 1
        self.zero = 0
        self.one = 1

    def embed(self, n: int) -> int:
        return n % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return a * b % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, self.p - 2, self.p)

    def pow_(self, a, e: int):
        if e < 0:
            return pow(self.inv(a), -e, self.p)
        return pow(a, e, self.p)

    def is_zero(self, a) -> bool:
        return a % self.p == 0

    def frob(self, a):
        return a

    def elements(self) -> Iterator[int]:
        return iter(range(self.p))

    def rand(self, rng: random.Random):
        return rng.randrange(self.p)

    def format_elt(self, a) -> str:
        return str(a % self.p)

    def __repr__(self) -> str:
        return f"GF({self.p})"


class QuadExtCtx:
    """Quadratic extension base(alpha) with alpha^2 = s; elements are pairs."""

    def __init__(self, base, s):
        self.base = base
        self.s = s
        self.p = base.p
        self.size = base.size ** 2
        self.degree = 2 * base.degree
        self.zero = (base.zero, base.zero)
        self.one = (base.one, base.zero)
        self.gen = (base.zero, base.one)

    def embed(self, n: int):
        return (self.base.embed(n), self.base.zero)

    def lift(self, a):
        """Embed a base-field element."""
        return (a, self.base.zero)

    def add(self, a, b):
        return (self.base.add(a[0], b[0]), self.base.add(a[1], b[1]))

    def sub(self, a, b):
        return (self.base.sub(a[0], b[0]), self.base.sub(a[1], b[1]))

    def neg(self, a):
        return (self.base.neg(a[0]), self.base.neg(a[1]))

    def mul(self, a, b):
        bs = self.base
        u = bs.add(bs.mul(a[0], b[0]), bs.mul(self.s, bs.mul(a[1], b[1])))
        v = bs.add(bs.mul(a[0], b[1]), bs.mul(a[1], b[0]))
        return (u, v)

    def inv(self, a):
        bs = self.base
        # norm = a0^2 - s*a1^2
        n = bs.sub(bs.mul(a[0], a[0]), bs.mul(self.s, bs.mul(a[1], a[1])))
        ninv = bs.inv(n)
        return (bs.mul(a[0], ninv), bs.neg(bs.mul(a[1], ninv)))

    def pow_(self, a, e: int):
        if e < 0:
            a, e = self.inv(a), -e
        result = self.one
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def is_zero(self, a) -> bool:
        return self.base.is_zero(a[0]) and self.base.is_zero(a[1])

    def elements(self):
        for u in self.base.elements():
            for v in self.base.elements():
                yield (u, v)

    def rand(self, rng: random.Random):
        return (self.base.rand(rng), self.base.rand(rng))

    def in_base(self, a) -> bool:
        return self.base.is_zero(a[1])

    def format_elt(self, a) -> str:
        u, v = a
        if self.base.is_zero(v):
            return self.base.format_elt(u)
        gen = "a" if self.degree == 2 else "t"
        vstr = self.base.format_elt(v)
        head = gen if vstr == "1" else f"{vstr}*{gen}"
        if self.base.is_zero(u):
            return head
        return f"{head}+{self.base.format_elt(u)}"

    def __repr__(self) -> str:
        return f"{self.base!r}[x]/(x^2 - {self.s})"


class Fp2Ctx(QuadExtCtx):
    """F_{p^2} = F_p(alpha), alpha^2 = -n with n the least valid positive integer."""

    def __init__(self, p: int):
        base = FpCtx(p)
        n = 1
        while kronecker(-n, p) != -1:
            n += 1
        super().__init__(base, base.embed(-n))
        self.n = n
        self._squares: Optional[frozenset] = None

    def frob(self, a):
        # alpha^p = -alpha since alpha^2 is a non-residue
        return (a[0], self.base.neg(a[1]))

    def squares(self) -> frozenset:
        if self._squares is None:
            self._squares = frozenset(self.mul(x, x) for x in self.elements())
        return self._squares

    def __repr__(self) -> str:
        return f"GF({self.p}^2; a^2=-{self.n})"


@lru_cache(maxsize=None)
def fp_ctx(p: int) -> FpCtx:
    return FpCtx(p)


@lru_cache(maxsize=None)
def fp2_ctx(p: int) -> Fp2Ctx:
    return Fp2Ctx(p)


@lru_cache(maxsize=None)
def fp4_ctx(p: int) -> QuadExtCtx:
    """F_{p^4} as a quadratic extension of F_{p^2} by a scanned non-square."""
    f2 = fp2_ctx(p)
    for cand in f2.elements():
        if f2.is_zero(cand):
            continue
        if not is_square(f2, cand):
            return QuadExtCtx(f2, cand)
    raise RuntimeError("no non-square found in F_{p^2}")


def is_square(ctx, a) -> bool:
    if ctx.is_zero(a):
        return True
    return ctx.pow_(a, (ctx.size - 1) // 2) == ctx.one


def field_sqrt(ctx, a):
    """Square root in any of the contexts via Tonelli-Shanks, or None."""
    if ctx.is_zero(a):
        return a
    if not is_square(ctx, a):
        return None
    m = ctx.size - 1
    s = 0
    while m % 2 == 0:
        m //= 2
        s += 1
    z = None
    for cand in ctx.elements():
        if not ctx.is_zero(cand) and not is_square(ctx, cand):
            z = cand
            break
    c = ctx.pow_(z, m)
    x = ctx.pow_(a, (m + 1) // 2)
    t = ctx.pow_(a, m)
    while t != ctx.one:
        t2 = t
        i = 0
        while t2 != ctx.one:
            t2 = ctx.mul(t2, t2)
            i += 1
        b = ctx.pow_(c, 1 << (s - i - 1))
        x = ctx.mul(x, b)
        c = ctx.mul(b, b)
        t = ctx.mul(t, c)
    return x


class Poly:
    """Dense univariate polynomial over a field context (ascending coefficients)."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx, coeffs):
        self.ctx = ctx
        trimmed = list(coeffs)
        while trimmed and ctx.is_zero(trimmed[-1]):
            trimmed.pop()
        self.coeffs = trimmed

    @classmethod
    def from_ints(cls, ctx, int_coeffs) -> "Poly":
        return cls(ctx, [ctx.embed(c) for c in int_coeffs])

    @classmethod
    def x(cls, ctx) -> "Poly":
        return cls(ctx, [ctx.zero, ctx.one])

    @classmethod
    def const(cls, ctx, value) -> "Poly":
        return cls(ctx, [value])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lc(self):
        if self.is_zero():
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def _require_same(self, other: "Poly") -> None:
        if self.ctx is not other.ctx:
            raise CtxMismatchError("polynomials over different contexts")

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.ctx is other.ctx and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((id(self.ctx), tuple(self.coeffs)))

    def __add__(self, other: "Poly") -> "Poly":
        self._require_same(other)
        n = max(len(self.coeffs), len(other.coeffs))
        ctx = self.ctx
        a = self.coeffs + [ctx.zero] * (n - len(self.coeffs))
        b = other.coeffs + [ctx.zero] * (n - len(other.coeffs))
        return Poly(ctx, [ctx.add(x, y) for x, y in zip(a, b)])

    def __sub__(self, other: "Poly") -> "Poly":
        self._require_same(other)
        n = max(len(self.coeffs), len(other.coeffs))
        ctx = self.ctx
        a = self.coeffs + [ctx.zero] * (n - len(self.coeffs))
        b = other.coeffs + [ctx.zero] * (n - len(other.coeffs))
        return Poly(ctx, [ctx.sub(x, y) for x, y in zip(a, b)])

    def __neg__(self) -> "Poly":
        return Poly(self.ctx, [self.ctx.neg(c) for c in self.coeffs])

    def __mul__(self, other: "Poly") -> "Poly":
        self._require_same(other)
        if self.is_zero() or other.is_zero():
            return Poly(self.ctx, [])
        ctx = self.ctx
        out = [ctx.zero] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if ctx.is_zero(a):
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = ctx.add(out[i + j], ctx.mul(a, b))
        return Poly(ctx, out)

    def scale(self, s) -> "Poly":
        ctx = self.ctx
        return Poly(ctx, [ctx.mul(s, c) for c in self.coeffs])

    def shift(self, k: int) -> "Poly":
        """Multiply by x^k."""
        if self.is_zero():
            return self
        return Poly(self.ctx, [self.ctx.zero] * k + self.coeffs)

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        self._require_same(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        ctx = self.ctx
        rem = self.coeffs[:]
        dq = len(self.coeffs) - len(other.coeffs)
        if dq < 0:
            return Poly(ctx, []), Poly(ctx, rem)
        inv_lc = ctx.inv(other.lc)
        quot = [ctx.zero] * (dq + 1)
        for k in range(dq, -1, -1):
            coeff = ctx.mul(rem[k + other.degree], inv_lc)
            if ctx.is_zero(coeff):
                continue
            quot[k] = coeff
            for j, b in enumerate(other.coeffs):
                rem[k + j] = ctx.sub(rem[k + j], ctx.mul(coeff, b))
        return Poly(ctx, quot), Poly(ctx, rem)

    def __mod__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[1]

    def __floordiv__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[0]

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self.scale(self.ctx.inv(self.lc))

    def eval(self, x):
        ctx = self.ctx
        acc = ctx.zero
        for c in reversed(self.coeffs):
            acc = ctx.add(ctx.mul(acc, x), c)
        return acc

    def derivative(self) -> "Poly":
        ctx = self.ctx
        return Poly(ctx, [ctx.mul(ctx.embed(i), c) for i, c in enumerate(self.coeffs)][1:])

    def pow_mod(self, e: int, modulus: "Poly") -> "Poly":
        result = Poly.const(self.ctx, self.ctx.one)
        base = self % modulus
        while e:
            if e & 1:
                result = (result * base) % modulus
            base = (base * base) % modulus
            e >>= 1
        return result

    def compose_scale(self, v) -> "Poly":
        """Monic image of the root-set under x -> v*x (i.e. v^d h(x/v) normalized)."""
        ctx = self.ctx
        d = self.degree
        coeffs = self.coeffs
        scaled = list(coeffs)
        power = ctx.one
        for k in range(d, -1, -1):
            scaled[k] = ctx.mul(coeffs[k], power)
            power = ctx.mul(power, v)
        return Poly(ctx, scaled).monic()

    def map_coeffs(self, fn, new_ctx) -> "Poly":
        return Poly(new_ctx, [fn(c) for c in self.coeffs])

    def to_json(self) -> list:
        return list(self.coeffs)

    def __repr__(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if self.ctx.is_zero(c):
                continue
            cs = self.ctx.format_elt(c)
            if i == 0:
                terms.append(cs)
            else:
                xpow = "x" if i == 1 else f"x^{i}"
                terms.append(xpow if cs == "1" else f"({cs})*{xpow}")
        return " + ".join(terms)


def poly_gcd(f: Poly, g: Poly) -> Poly:
    """Monic gcd by the Euclidean algorithm."""
    if f.ctx is not g.ctx:
        raise CtxMismatchError("gcd across contexts")
    a, b = f, g
    while not b.is_zero():
        a, b = b, a % b
    if a.is_zero():
        return a
    return a.monic()


def poly_resultant(f: Poly, g: Poly):
    """Resultant over the coefficient field via the Euclidean algorithm."""
    if f.ctx is not g.ctx:
        raise CtxMismatchError("resultant across contexts")
    ctx = f.ctx
    if f.is_zero() or g.is_zero():
        return ctx.zero
    res = ctx.one
    a, b = f, g
    sign = 1
    while b.degree > 0:
        r = a % b
        if r.is_zero():
            return ctx.zero if a.degree > 0 else res
        if (a.degree * b.degree) % 2 == 1:
            sign = -sign
        res = ctx.mul(res, ctx.pow_(b.lc, a.degree - r.degree))
        a, b = b, r
    res = ctx.mul(res, ctx.pow_(b.lc, a.degree))
    if sign < 0:
        res = ctx.neg(res)
    return res


_SCAN_LIMIT = 250_000


def roots(f: Poly, in_extension: bool = False) -> list:
    """Roots with multiplicity; optionally in the next quadratic extension.

    Exhaustive scan for small fields, distinct-degree splitting otherwise.
    """
    if f.is_zero():
        raise ValueError("zero polynomial")
    ctx = f.ctx
    if in_extension:
        ext = _extension_of(ctx)
        f = f.map_coeffs(ext.lift, ext)
        ctx = ext
    if f.degree < 1:
        return []
    if ctx.size <= _SCAN_LIMIT:
        found = [x for x in ctx.elements() if ctx.is_zero(f.eval(x))]
    else:
        found = _roots_large(f)
    out = []
    for r in found:
        g = f
        lin = Poly(ctx, [ctx.neg(r), ctx.one])
        while True:
            quo, rem = g.divmod(lin)
            if not rem.is_zero():
                break
            out.append(r)
            g = quo
    return sorted(out, key=_elt_key)


def _elt_key(x):
    return x if isinstance(x, tuple) else (x,)


def _extension_of(ctx):
    if isinstance(ctx, FpCtx):
        return fp2_ctx(ctx.p)
    if isinstance(ctx, Fp2Ctx):
        return fp4_ctx(ctx.p)
    raise CtxMismatchError("no extension tower above this context")


def _roots_large(f: Poly) -> list:
    ctx = f.ctx
    x = Poly.x(ctx)
    xq = x.pow_mod(ctx.size, f)
    lin_part = poly_gcd(f, xq - x)
    out: list[Poly] = []
    if lin_part.degree > 0:
        _split_equal_degree(lin_part, 1, out, random.Random(0xE1C))
    return [ctx.neg(p.coeffs[0]) for p in out]


def _split_equal_degree(f: Poly, d: int, out: list, rng: random.Random) -> None:
    """Cantor-Zassenhaus split of a product of degree-d irreducibles."""
    ctx = f.ctx
    if f.degree == 0:
        return
    if f.degree == d:
        out.append(f.monic())
        return
    exp = (ctx.size ** d - 1) // 2
    while True:
        cand = Poly(ctx, [ctx.rand(rng) for _ in range(f.degree)])
        if cand.is_zero():
            continue
        g = poly_gcd(cand, f)
        if 0 < g.degree < f.degree:
            _split_equal_degree(g, d, out, rng)
            _split_equal_degree(f // g, d, out, rng)
            return
        h = cand.pow_mod(exp, f) - Poly.const(ctx, ctx.one)
        g = poly_gcd(h, f)
        if 0 < g.degree < f.degree:
            _split_equal_degree(g, d, out, rng)
            _split_equal_degree(f // g, d, out, rng)
            return


def squarefree_part(f: Poly) -> Poly:
    d = f.derivative()
    if d.is_zero():
        raise ValueError("inseparable polynomial (p-th power)")
    return (f // poly_gcd(f, d)).monic()


def factor(f: Poly) -> list[tuple[Poly, int]]:
    """Irreducible factorization over the context (monic factors, multiplicities)."""
    ctx = f.ctx
    if f.degree < 1:
        return []
    factors: dict = {}
    work = f.monic()
    while work.degree > 0:
        sf = squarefree_part(work)
        for g in _factor_squarefree(sf):
            mult = 0
            while True:
                quo, rem = work.divmod(g)
                if not rem.is_zero():
                    break
                work = quo
                mult += 1
            factors[g] = factors.get(g, 0) + mult
    items = sorted(factors.items(), key=lambda kv: (kv[0].degree, [
        _elt_key(c) for c in kv[0].coeffs]))
    return items


def _factor_squarefree(f: Poly) -> list[Poly]:
    ctx = f.ctx
    out: list[Poly] = []
    rng = random.Random(0xF2)
    x = Poly.x(ctx)
    work = f.monic()
    d = 1
    xq = x
    while work.degree > 0:
        if d > work.degree // 2:
            out.append(work.monic())
            break
        xq = xq.pow_mod(ctx.size, work)
        g = poly_gcd(work, xq - x)
        if g.degree > 0:
            _split_equal_degree(g, d, out, rng)
            work = (work // g).monic()
            xq = xq % work if work.degree > 0 else xq
        d += 1
    return out
