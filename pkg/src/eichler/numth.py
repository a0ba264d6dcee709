"""Exact integer number theory: symbols, modular square roots, parameter search.

Everything here is plain-int arithmetic; all functions are pure and safe to
call from multiple threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional


class Variant(Enum):
    """Which discriminant family a computation lives in.

    LAMBDA works with forms of discriminant -16cp, LAMBDA_PRIME with -cp
    (the latter only exists when cp = 3 mod 4).
    """

    LAMBDA = "lambda"
    LAMBDA_PRIME = "lambda-prime"


class ParameterError(ValueError):
    """Invalid (p, c, q, r) parameters."""


class NoLiftError(ValueError):
    """No square-root lift modulo 4q exists (needs cp = 3 mod 4)."""


# Deterministic Miller-Rabin witness set, exact for n < 3.3 * 10^24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic primality test for desk-scale integers (n < 2^64 and beyond)."""
    if n < 2:
        return False
    for w in _MR_WITNESSES:
        if n % w == 0:
            return n == w
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(bound: int) -> Iterator[int]:
    """Yield primes <= bound (simple sieve)."""
    if bound < 2:
        return
    sieve = bytearray([1]) * (bound + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(bound) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    for i in range(2, bound + 1):
        if sieve[i]:
            yield i


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n); equals the Legendre symbol for odd prime n."""
    if n == 0:
        raise ValueError("kronecker symbol undefined for n = 0")
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    e = (n & -n).bit_length() - 1
    n >>= e
    if e:
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5) and e % 2 == 1:
            result = -result
    a %= n
    while a:
        e2 = (a & -a).bit_length() - 1
        a >>= e2
        if e2 % 2 and n % 8 in (3, 5):
            result = -result
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a, n = n % a, a
    return result if n == 1 else 0


def sqrt_mod_prime(a: int, q: int) -> Optional[int]:
    """Square root of a mod prime q, or None for a non-residue.

    Returns the smaller of the two roots {x, q - x}.  Uses the exponent
    shortcut for q = 3 mod 4 and Tonelli-Shanks otherwise.
    """
    if q == 2:
        return a % 2
    a %= q
    if a == 0:
        return 0
    if kronecker(a, q) == -1:
        return None
    if q % 4 == 3:
        x = pow(a, (q + 1) // 4, q)
    else:
        x = _tonelli_shanks(a, q)
    return min(x, q - x)


def _tonelli_shanks(a: int, q: int) -> int:
    s = 0
    m = q - 1
    while m % 2 == 0:
        m //= 2
        s += 1
    z = 2
    while kronecker(z, q) != -1:
        z += 1
    c = pow(z, m, q)
    x = pow(a, (m + 1) // 2, q)
    t = pow(a, m, q)
    while t != 1:
        t2 = t
        i = 0
        while t2 != 1:
            t2 = t2 * t2 % q
            i += 1
        b = pow(c, 1 << (s - i - 1), q)
        x = x * b % q
        c = b * b % q
        t = t * c % q
        s = i
    return x


def lift_sqrt_mod_4q(r: int, q: int, cp: int) -> int:
    """Lift a root of x^2 + cp = 0 (mod q) to one mod 4q, normalized to (0, 2q).

    Requires cp = 3 mod 4; among the candidates {r, q-r, r+q, 2q-r} the
    smallest valid representative is returned.
    """
    if cp % 4 != 3:
        raise NoLiftError(f"cp = {cp} is not 3 mod 4; no lift mod 4q exists")
    r %= q
    if (r * r + cp) % q != 0:
        raise ParameterError(f"r = {r} does not satisfy r^2 + cp = 0 mod {q}")
    candidates = sorted({x % (2 * q) for x in (r, q - r, r + q, 2 * q - r)})
    for x in candidates:
        if x > 0 and (x * x + cp) % (4 * q) == 0:
            return x
    raise NoLiftError(f"no lift of r = {r} modulo 4q = {4 * q}")


@dataclass(frozen=True)
class PrimeParams:
    """The two primes (p, c) fixing the quaternion algebra, plus the form family."""

    p: int
    c: int
    variant: Variant = Variant.LAMBDA

    def __post_init__(self) -> None:
        if not is_prime(self.p) or self.p <= 3:
            raise ParameterError(f"p = {self.p} must be a prime > 3")
        if not is_prime(self.c):
            raise ParameterError(f"c = {self.c} must be prime")
        if self.c == self.p:
            raise ParameterError("c and p must be distinct")
        if 16 * self.c >= 3 * self.p:
            raise ParameterError(f"c = {self.c} violates c < 3p/16 for p = {self.p}")
        if self.variant is Variant.LAMBDA_PRIME and (self.c * self.p) % 4 != 3:
            raise ParameterError("variant lambda-prime requires cp = 3 mod 4")

    @property
    def cp(self) -> int:
        return self.c * self.p

    @property
    def disc(self) -> int:
        """Form discriminant of the variant: -16cp or -cp."""
        if self.variant is Variant.LAMBDA:
            return -16 * self.cp
        return -self.cp

    def with_variant(self, variant: Variant) -> "PrimeParams":
        return PrimeParams(self.p, self.c, variant)


def q_is_admissible(params: PrimeParams, q: int) -> bool:
    """Check the auxiliary-prime conditions on q for (p, c)."""
    if not is_prime(q) or q in (params.p, params.c):
        return False
    if params.c == 2:
        return q % 8 == 7 and kronecker(params.p, q) == -1
    return q % 8 == 3 and kronecker(params.p, q) == -1 and kronecker(params.c, q) == 1


def find_q(params: PrimeParams, bound: int) -> list[int]:
    """All admissible auxiliary primes q <= bound, ascending."""
    if bound < 3:
        raise ParameterError("bound must be at least 3")
    return [q for q in primes_up_to(bound) if q_is_admissible(params, q)]


def smallest_q(params: PrimeParams, start_bound: int = 64, cap: int = 1 << 22) -> int:
    """Smallest admissible q; expands the search bound geometrically."""
    bound = start_bound
    while bound <= cap:
        found = find_q(params, bound)
        if found:
            return found[0]
        bound *= 2
    raise ParameterError(f"no admissible q below {cap} for p={params.p}, c={params.c}")


@dataclass(frozen=True)
class QRTriple:
    """An admissible prime q with square roots of -cp mod q and (optionally) mod 4q."""

    q: int
    r: int
    rprime: Optional[int] = None

    @classmethod
    def for_params(cls, params: PrimeParams, q: int, r: Optional[int] = None) -> "QRTriple":
        if not q_is_admissible(params, q):
            raise ParameterError(f"q = {q} fails the admissibility conditions")
        if r is None:
            r = sqrt_mod_prime(-params.cp, q)
            if r is None:
                raise ParameterError(f"-cp is not a square mod q = {q}")
        elif (r * r + params.cp) % q != 0:
            raise ParameterError(f"r = {r} does not satisfy r^2 + cp = 0 mod q")
        rprime = None
        if params.cp % 4 == 3:
            rprime = lift_sqrt_mod_4q(r, q, params.cp)
        return cls(q=q, r=r % q, rprime=rprime)


def represent(a: int, m: int) -> list[tuple[int, int]]:
    """Coprime solutions (x, y) of x^2 + a*y^2 = m with x, y >= 0, by exhaustion."""
    if a <= 0 or m <= 0:
        raise ValueError("both a and m must be positive")
    solutions = []
    for y in range(math.isqrt(m // a) + 1):
        rest = m - a * y * y
        x = math.isqrt(rest)
        if x * x == rest and math.gcd(x, y) == 1:
            solutions.append((x, y))
    return solutions
