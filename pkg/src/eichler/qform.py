"""Binary quadratic forms: reduction, composition, class groups, genus theory.

Composition goes through ideal arithmetic in the quadratic order of the same
discriminant (lattice product plus a canonical Hermite basis), so the ideal
side doubles as an internal consistency check on the form side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .numth import (
    ParameterError,
    PrimeParams,
    Variant,
    is_prime,
    kronecker,
    q_is_admissible,
    sqrt_mod_prime,
)


class NotPrimitiveError(ValueError):
    """Form has a nontrivial content."""


class BadDiscriminantError(ValueError):
    """Discriminant is not negative and congruent to 0 or 1 mod 4."""


class DiscMismatchError(ValueError):
    """Operands live in different discriminants."""


class NotCoprimeError(ValueError):
    """Character evaluated at an integer sharing a factor with 2D."""


class NotProperError(ValueError):
    """Lattice is not a proper (invertible) ideal of the quadratic order."""


class NotSplitError(ValueError):
    """The prime does not split in the relevant quadratic order."""


class BadQError(ParameterError):
    """Auxiliary prime q fails its admissibility conditions."""


@dataclass(frozen=True)
class BQForm:
    """Positive definite integral binary quadratic form a*X^2 + b*XY + ap*Y^2."""

    a: int
    b: int
    ap: int

    def __post_init__(self) -> None:
        if self.a <= 0 or self.ap <= 0:
            raise BadDiscriminantError(f"form {self.triple()} is not positive definite")
        if self.D >= 0:
            raise BadDiscriminantError(f"form {self.triple()} has non-negative discriminant")

    @property
    def D(self) -> int:
        return self.b * self.b - 4 * self.a * self.ap

    def triple(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.ap)

    def value(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.ap * y * y

    @property
    def content(self) -> int:
        return math.gcd(math.gcd(self.a, self.b), self.ap)

    @property
    def is_primitive(self) -> bool:
        return self.content == 1

    @property
    def is_reduced(self) -> bool:
        if not (-self.a < self.b <= self.a <= self.ap):
            return False
        return self.b >= 0 if self.a == self.ap else True

    @property
    def is_ambiguous(self) -> bool:
        """Order <= 2 in the class group; only meaningful on reduced forms."""
        f = self if self.is_reduced else reduce(self)
        return f.b == 0 or f.a == f.b or f.a == f.ap

    def to_json(self) -> dict:
        return {"form": [self.a, self.b, self.ap], "D": self.D}

    @classmethod
    def from_json(cls, obj: dict) -> "BQForm":
        a, b, ap = obj["form"]
        f = cls(a, b, ap)
        if "D" in obj and obj["D"] != f.D:
            raise BadDiscriminantError("inconsistent serialized discriminant")
        return f

    def __repr__(self) -> str:
        return f"({self.a},{self.b},{self.ap})"


def reduce(f: BQForm) -> BQForm:
    """The unique reduced form equivalent to f."""
    if not f.is_primitive:
        raise NotPrimitiveError(f"form {f.triple()} has content {f.content}")
    a, b, c = f.a, f.b, f.ap
    while True:
        if b > a or b <= -a:
            # translate: b -> b + 2ra into (-a, a]
            r = (a - b) // (2 * a)
            c = a * r * r + b * r + c
            b = b + 2 * a * r
        if a > c:
            a, b, c = c, -b, a
            continue
        break
    if a == c and b < 0:
        b = -b
    return BQForm(a, b, c)


def identity(D: int) -> BQForm:
    """Principal form of discriminant D."""
    _check_disc(D)
    if D % 2 == 0:
        return BQForm(1, 0, -D // 4)
    return BQForm(1, 1, (1 - D) // 4)


def inverse(f: BQForm) -> BQForm:
    return reduce(BQForm(f.a, -f.b, f.ap))


def _check_disc(D: int) -> None:
    if D >= 0 or D % 4 not in (0, 1):
        raise BadDiscriminantError(f"D = {D} is not a negative discriminant")


@dataclass(frozen=True)
class QuadIdeal:
    """The lattice m * [a, (-b + sqrt(D))/2] inside the order of discriminant D.

    a is the (primitive-part) norm, m the content; b is only defined mod 2a.
    """

    a: int
    b: int
    m: int
    D: int

    def __post_init__(self) -> None:
        _check_disc(self.D)
        if self.a <= 0 or self.m <= 0:
            raise NotProperError("ideal must have positive norm and content")
        if (self.b * self.b - self.D) % (4 * self.a) != 0:
            raise NotProperError(f"[{self.a}, (-{self.b}+sqrt({self.D}))/2] is not an ideal")

    @property
    def norm(self) -> int:
        return self.m * self.m * self.a

    @property
    def is_proper(self) -> bool:
        c = (self.b * self.b - self.D) // (4 * self.a)
        return math.gcd(math.gcd(self.a, self.b), c) == 1

    def __repr__(self) -> str:
        head = f"{self.m}*" if self.m != 1 else ""
        return f"{head}[{self.a}, (-({self.b})+sqrt({self.D}))/2]"


def form_to_ideal(f: BQForm) -> QuadIdeal:
    """Proper ideal [a, (-b + sqrt(D))/2] attached to a primitive form."""
    if not f.is_primitive:
        raise NotProperError(f"form {f.triple()} is imprimitive")
    return QuadIdeal(a=f.a, b=f.b % (2 * f.a), m=1, D=f.D)


def ideal_to_form(ideal: QuadIdeal) -> BQForm:
    """Reduced form of norm(a X - beta Y)/N(ideal); inverse of form_to_ideal on classes."""
    f = BQForm(ideal.a, ideal.b, (ideal.b * ideal.b - ideal.D) // (4 * ideal.a))
    if not f.is_primitive:
        raise NotProperError(f"ideal {ideal} is not proper")
    return reduce(f)


def ideal_mul(i1: QuadIdeal, i2: QuadIdeal) -> QuadIdeal:
    """Lattice product of two ideals, renormalized to m * [a, (-b+sqrt(D))/2]."""
    if i1.D != i2.D:
        raise DiscMismatchError("ideal product across discriminants")
    D = i1.D
    # elements are (u + v*sqrt(D))/2; generators of each factor in (u, v) pairs
    gens1 = ((2 * i1.m * i1.a, 0), (-i1.m * i1.b, i1.m))
    gens2 = ((2 * i2.m * i2.a, 0), (-i2.m * i2.b, i2.m))
    rows = []
    for u1, v1 in gens1:
        for u2, v2 in gens2:
            u = (u1 * u2 + v1 * v2 * D) // 2
            v = (u1 * v2 + u2 * v1) // 2
            rows.append((u, v))
    # 2-column HNF: find (s, g) with g = gcd of v-parts, then clear v
    g = 0
    s = 0
    for u, v in rows:
        if v == 0:
            continue
        if g == 0:
            g, s = abs(v), u if v > 0 else -u
            continue
        gg, x, y = _xgcd(g, v)
        s = x * s + y * u
        g = gg
    t = 0
    for u, v in rows:
        t = math.gcd(t, u - (v // g) * s)
    if t % (2 * g) != 0 or s % g != 0:
        raise NotProperError("lattice product is not an ideal of the order")
    a = t // (2 * g)
    b = (-s // g) % (2 * a)
    return QuadIdeal(a=a, b=b, m=g, D=D)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        qt, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - qt * x1
        y0, y1 = y1, y0 - qt * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def compose(f: BQForm, g: BQForm) -> BQForm:
    """Gauss composition via ideal multiplication; result is reduced."""
    if f.D != g.D:
        raise DiscMismatchError(f"discriminants differ: {f.D} vs {g.D}")
    if not (f.is_primitive and g.is_primitive):
        raise NotPrimitiveError("composition needs primitive forms")
    return ideal_to_form(ideal_mul(form_to_ideal(f), form_to_ideal(g)))


@lru_cache(maxsize=None)
def class_group(D: int) -> tuple[BQForm, ...]:
    """All primitive reduced forms of discriminant D, by direct enumeration."""
    _check_disc(D)
    forms = []
    for a in range(1, math.isqrt(-D // 3) + 1):
        b0 = D & 1
        for b in range(b0, a + 1, 2):
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if math.gcd(math.gcd(a, b), c) != 1:
                continue
            forms.append(BQForm(a, b, c))
            if b != 0 and b != a and a != c:
                forms.append(BQForm(a, -b, c))
    return tuple(sorted(forms, key=lambda f: (f.a, abs(f.b), -f.b)))


def class_number(D: int) -> int:
    return len(class_group(D))


def form_order(f: BQForm) -> int:
    """Multiplicative order of the class of f, bounded by h(D)."""
    if not f.is_primitive:
        raise NotPrimitiveError(f"form {f.triple()} is imprimitive")
    e = identity(f.D)
    bound = class_number(f.D)
    g = reduce(f)
    for k in range(1, bound + 1):
        if g == e:
            return k
        g = compose(g, f)
    raise RuntimeError(f"order of {f} not found within h({f.D}) = {bound}")


# --- genus theory ---------------------------------------------------------

def _odd_prime_divisors(n: int) -> list[int]:
    n = abs(n)
    out = []
    while n % 2 == 0:
        n //= 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 2
    if n > 1:
        out.append(n)
    return out


def assigned_characters(D: int) -> tuple[tuple, ...]:
    """Descriptors of the assigned characters of D, in a fixed evaluation order.

    Each entry is ("chi", p) for an odd prime p | D, or ("delta",),
    ("epsilon",), ("delta_epsilon",).
    """
    _check_disc(D)
    chis = tuple(("chi", p) for p in _odd_prime_divisors(D))
    if D % 4 == 1:
        return chis
    n = -D // 4
    if n % 4 == 3:
        extra: tuple[tuple, ...] = ()
    elif n % 4 == 1:
        extra = (("delta",),)
    elif n % 8 == 2:
        extra = (("delta_epsilon",),)
    elif n % 8 == 4:
        extra = (("delta",),)
    elif n % 8 == 6:
        extra = (("epsilon",),)
    else:  # n = 0 mod 8
        extra = (("delta",), ("epsilon",))
    return chis + extra


def _eval_character(desc: tuple, m: int) -> int:
    kind = desc[0]
    if kind == "chi":
        return kronecker(m, desc[1])
    if kind == "delta":
        return -1 if m % 4 == 3 else 1
    if kind == "epsilon":
        return -1 if m % 8 in (3, 5) else 1
    if kind == "delta_epsilon":
        return _eval_character(("delta",), m) * _eval_character(("epsilon",), m)
    raise ValueError(f"unknown character {desc}")


def genus_vector(m: int, D: int) -> tuple[int, ...]:
    """Assigned character values at m; m must be coprime to 2D."""
    if math.gcd(m, 2 * D) != 1:
        raise NotCoprimeError(f"m = {m} shares a factor with 2D = {2 * D}")
    return tuple(_eval_character(desc, m) for desc in assigned_characters(D))


def form_genus_vector(f: BQForm) -> tuple[int, ...]:
    """Genus vector of a primitive form, evaluated at a represented value coprime to 2D."""
    if not f.is_primitive:
        raise NotPrimitiveError(f"form {f.triple()} is imprimitive")
    m = _represented_coprime_value(f)
    return genus_vector(m, f.D)


def _represented_coprime_value(f: BQForm) -> int:
    two_d = 2 * f.D
    for box in range(1, 16):
        for x in range(-box, box + 1):
            for y in range(-box, box + 1):
                if max(abs(x), abs(y)) != box and box > 1:
                    continue
                v = f.value(x, y)
                if v > 0 and math.gcd(v, two_d) == 1:
                    return v
    raise RuntimeError(f"no represented value coprime to 2D found for {f}")


def _check_q(params: PrimeParams, q: int) -> None:
    if not q_is_admissible(params, q):
        raise BadQError(f"q = {q} is not admissible for p={params.p}, c={params.c}")


def genus_class(params: PrimeParams, q: int) -> list[BQForm]:
    """Reduced forms of the variant discriminant whose genus vector matches q's."""
    _check_q(params, q)
    D = params.disc
    target = genus_vector(q, D)
    return [f for f in class_group(D) if form_genus_vector(f) == target]


def ambiguous_in_genus(params: PrimeParams, q: int) -> tuple[int, list[BQForm]]:
    """(eta, forms): number and list of order <= 2 classes in the genus class of q."""
    forms = [f for f in genus_class(params, q) if f.is_ambiguous]
    return len(forms), forms


def represented_values(f: BQForm, bound: int) -> dict[int, tuple[int, int]]:
    """All values 0 < f(x,y) <= bound with one witness (x, y) each."""
    vals: dict[int, tuple[int, int]] = {}
    absD = -f.D
    ymax = math.isqrt(4 * f.a * bound // absD)
    for y in range(-ymax, ymax + 1):
        disc = f.b * f.b * y * y - 4 * f.a * (f.ap * y * y - bound)
        if disc < 0:
            continue
        s = math.isqrt(disc)
        lo = (-f.b * y - s) // (2 * f.a) - 1
        hi = (-f.b * y + s) // (2 * f.a) + 1
        for x in range(lo, hi + 1):
            v = f.value(x, y)
            if 0 < v <= bound and v not in vals:
                vals[v] = (x, y)
    return vals


def represented_prime(f: BQForm, params: PrimeParams, bound: int) -> Optional[int]:
    """Smallest admissible prime <= bound represented by f, or None."""
    if not f.is_primitive:
        raise NotPrimitiveError(f"form {f.triple()} is imprimitive")
    vals = represented_values(f, bound)
    for v in sorted(vals):
        if q_is_admissible(params, v):
            return v
    return None


def represented_admissible_prime(f: BQForm, params: PrimeParams, cap: int = 1 << 22) -> int:
    """Like represented_prime but with a growing bound; raises if the cap is hit."""
    bound = max(64, 4 * abs(f.D))
    while bound <= cap:
        q = represented_prime(f, params, bound)
        if q is not None:
            return q
        bound *= 2
    raise ParameterError(f"no admissible prime represented by {f} below {cap}")


def prime_splitting_form(ell: int, params: PrimeParams) -> BQForm:
    """Form of the variant discriminant representing a prime ideal above a split ell."""
    cp = params.cp
    if ell == params.c or not is_prime(ell):
        raise NotSplitError(f"ell = {ell} is excluded")
    if params.variant is Variant.LAMBDA_PRIME:
        # discriminant -cp; ideal [ell, (-b+sqrt(-cp))/2] with b^2 = -cp mod 4*ell
        if ell == 2:
            if (-cp) % 8 != 1:
                raise NotSplitError(f"2 does not split for cp = {cp}")
            return BQForm(2, 1, (1 + cp) // 8)
        x = sqrt_mod_prime(-cp, ell)
        if x is None or x == 0:
            raise NotSplitError(f"ell = {ell} does not split (disc -cp)")
        b1 = x if x % 2 == 1 else x + ell  # odd representative mod 2*ell
        b1 %= 2 * ell
        if b1 > ell:
            b1 -= 2 * ell
        b = abs(b1)
        return BQForm(ell, b, (b * b + cp) // (4 * ell))
    # LAMBDA: discriminant -16cp
    if ell == 2:
        if cp % 4 != 1:
            raise NotSplitError(f"2 is not split for cp = {cp} (disc -16cp)")
        return BQForm(8, -4, (cp + 1) // 2)
    x = sqrt_mod_prime(-cp, ell)
    if x is None or x == 0:
        raise NotSplitError(f"ell = {ell} does not split (disc -16cp)")
    b = min(x, ell - x)  # positive, -ell < 2b <= ell
    return BQForm(ell, 4 * b, (4 * b * b + 4 * cp) // ell)


def isogeny_action(f: BQForm, g: BQForm) -> BQForm:
    """Class predicted after acting by the degree-g isogeny: reduce(f * g^2)."""
    if f.D != g.D:
        raise DiscMismatchError(f"discriminants differ: {f.D} vs {g.D}")
    return reduce(compose(compose(f, g), g))
