"""Hilbert class polynomials over Z and p-adic valuations of their resultants.

H_D is computed analytically: j(tau) = E4(q)^3 / Delta(q) with Delta from the
sparse eta product, evaluated at the root of each reduced form, then the
product over the class is expanded with conjugate roots paired so every
coefficient is real.  Coefficients must round to within 0.25 of an integer or
the whole computation retries at doubled precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath

from .ff import Poly, factor, fp_ctx, poly_gcd
from .numth import is_prime
from .qform import class_group


class PrecisionExhaustedError(RuntimeError):
    """Coefficient rounding failed repeatedly at doubled precision."""


class ResultantZeroError(ValueError):
    """Resultant of identical discriminants is zero."""


_RETRY_CAP = 6
_sigma3: list[int] = [0]


def _sigma3_table(n: int) -> list[int]:
    """Divisor power sums sigma_3(k) for k <= n, grown on demand."""
    if len(_sigma3) <= n:
        old = len(_sigma3)
        _sigma3.extend(0 for _ in range(n + 1 - old))
        for d in range(1, n + 1):
            d3 = d * d * d
            start = max(d, (old + d - 1) // d * d)
            for k in range(start, n + 1, d):
                _sigma3[k] += d3
    return _sigma3


def _j_from_q(qv: mpmath.mpc, nterms: int) -> mpmath.mpc:
    """j-invariant from the nome q = e^{2 pi i tau}."""
    sig = _sigma3_table(nterms)
    e4 = mpmath.mpc(1)
    qpow = mpmath.mpc(1)
    for k in range(1, nterms + 1):
        qpow *= qv
        e4 += 240 * sig[k] * qpow
    # eta product via pentagonal numbers: prod (1-q^n) = sum (-1)^k q^{k(3k-1)/2}
    eta_prod = mpmath.mpc(1)
    k = 1
    while True:
        e1 = k * (3 * k - 1) // 2
        e2 = k * (3 * k + 1) // 2
        if e1 > nterms and e2 > nterms:
            break
        term = mpmath.mpc(0)
        if e1 <= nterms:
            term += qv ** e1
        if e2 <= nterms:
            term += qv ** e2
        eta_prod += term if k % 2 == 0 else -term
        k += 1
    delta = qv * eta_prod ** 24
    return e4 ** 3 / delta


@dataclass(frozen=True)
class ClassPolynomial:
    """Monic H_D in Z[X]; coeffs ascending, degree = h(D)."""

    D: int
    coeffs: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def eval_mod(self, x: int, m: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % m
        return acc

    def to_json(self) -> dict:
        return {"D": self.D, "coeffs": [str(c) for c in self.coeffs]}


def _initial_precision(D: int, forms) -> int:
    inv_a_sum = sum(1.0 / f.a for f in forms)
    bits = math.pi * math.sqrt(-D) * inv_a_sum / math.log(2)
    return int(bits) + 10 * len(forms) + 64


@lru_cache(maxsize=None)
def hilbert(D: int) -> ClassPolynomial:
    """Exact Hilbert class polynomial of discriminant D."""
    forms = class_group(D)
    prec = _initial_precision(D, forms)
    for _attempt in range(_RETRY_CAP):
        result = _hilbert_attempt(D, forms, prec)
        if result is not None:
            return ClassPolynomial(D, tuple(result))
        prec *= 2
    raise PrecisionExhaustedError(f"H_{D} did not stabilize below {prec} bits")


def _hilbert_attempt(D: int, forms, prec: int):
    with mpmath.workprec(prec):
        sqrt_absD = mpmath.sqrt(-D)
        factors = []  # linear (real j) or quadratic (paired complex) real factors
        for f in forms:
            if f.b < 0:
                continue  # paired with its mirror below
            im_tau = sqrt_absD / (2 * f.a)
            # per-form series length from |q| = exp(-2 pi Im tau)
            log_q = -2 * mpmath.pi * im_tau
            nterms = int((prec + 40) * math.log(2) / float(-log_q)) + 8
            tau = (mpmath.mpc(-f.b) + mpmath.mpc(0, 1) * sqrt_absD) / (2 * f.a)
            qv = mpmath.exp(2 * mpmath.pi * mpmath.mpc(0, 1) * tau)
            jv = _j_from_q(qv, nterms)
            if f.is_ambiguous:
                factors.append((mpmath.mpf(-1) * jv.real,))  # X + (-j)
            else:
                # conjugate pair: X^2 - 2 Re(j) X + |j|^2
                factors.append((abs(jv) ** 2, -2 * jv.real))
        # expand product of monic factors with real coefficients
        poly = [mpmath.mpf(1)]
        for fac in factors:
            deg = len(fac)
            new = [mpmath.mpf(0)] * (len(poly) + deg)
            for i, c in enumerate(poly):
                new[i + deg] += c
                for k, fc in enumerate(fac):
                    new[i + k] += c * fc
            poly = new
        out = []
        for c in poly:
            r = mpmath.nint(c)
            if abs(c - r) > mpmath.mpf("0.25"):
                return None
            out.append(int(r))
    return out


@lru_cache(maxsize=None)
def hilbert_mod(D: int, p: int) -> Poly:
    """H_D reduced coefficient-wise mod p."""
    ctx = fp_ctx(p)
    return Poly.from_ints(ctx, hilbert(D).coeffs)


# --- exact integer resultant (subresultant PRS) ---------------------------

def _prem(a: list[int], b: list[int]) -> list[int]:
    """Pseudo-remainder lc(b)^(deg a - deg b + 1) * a mod b, fraction-free."""
    db = len(b) - 1
    lb = b[-1]
    r = list(a)
    for k in range(len(a) - 1 - db, -1, -1):
        top = r[k + db]
        r = [lb * c for c in r]
        for j in range(db + 1):
            r[k + j] -= top * b[j]
    while r and r[-1] == 0:
        r.pop()
    return r


def resultant_int(f: list[int], g: list[int]) -> int:
    """Resultant of integer polynomials (ascending coeffs), subresultant PRS."""
    a = list(f)
    b = list(g)
    while a and a[-1] == 0:
        a.pop()
    while b and b[-1] == 0:
        b.pop()
    if not a or not b:
        return 0
    sign = 1
    if len(a) < len(b):
        if ((len(a) - 1) * (len(b) - 1)) % 2 == 1:
            sign = -sign
        a, b = b, a
    if len(b) == 1:
        return sign * b[0] ** (len(a) - 1)
    g_ = 1
    h_ = 1
    while True:
        da, db = len(a) - 1, len(b) - 1
        delta = da - db
        if da % 2 == 1 and db % 2 == 1:
            sign = -sign
        r = _prem(a, b)
        if not r:
            return 0
        denom = g_ * h_ ** delta
        a = b
        b = [c // denom for c in r]
        g_ = a[-1]
        if delta == 0:
            pass  # h unchanged: h = h^(1-0) * g^0
        elif delta == 1:
            h_ = g_
        else:
            h_ = g_ ** delta // h_ ** (delta - 1)
        if len(b) == 1:
            da = len(a) - 1
            if da == 0:
                return sign * b[0]
            if da == 1:
                return sign * b[0]
            return sign * (b[0] ** da // h_ ** (da - 1))


# --- p-adic valuation of Res(H_D1, H_D2) ----------------------------------

def _vp_int(n: int, p: int) -> int:
    if n == 0:
        return 1 << 30
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


class _Zp:
    """Z/p^K arithmetic for Hensel lifting of a simple root."""

    def __init__(self, p: int, K: int):
        self.p = p
        self.K = K
        self.mod = p ** K

    def eval_poly(self, coeffs, x):
        acc = 0
        for c in reversed(coeffs):
            acc = (acc * x + c) % self.mod
        return acc

    def lift_root(self, coeffs, dcoeffs, root_mod_p: int) -> int:
        x = root_mod_p % self.p
        k = 1
        while k < self.K:
            k = min(2 * k, self.K)
            mod = self.p ** k
            fx = 0
            for c in reversed(coeffs):
                fx = (fx * x + c) % mod
            dfx = 0
            for c in reversed(dcoeffs):
                dfx = (dfx * x + c) % mod
            inv = pow(dfx, -1, mod)
            x = (x - fx * inv) % mod
        return x

    def valuation(self, x: int) -> int:
        return min(_vp_int(x % self.mod, self.p), self.K)


class _Zp2:
    """Unramified quadratic extension Z_p[t]/(F(t)) mod p^K, F irreducible mod p."""

    def __init__(self, p: int, K: int, fpoly: tuple[int, int]):
        # F(t) = t^2 + f1 t + f0
        self.p = p
        self.K = K
        self.mod = p ** K
        self.f0, self.f1 = fpoly

    def mul(self, a, b):
        m = self.mod
        t2_0 = (-self.f0) % m
        t2_1 = (-self.f1) % m
        c0 = a[0] * b[0] % m
        c1 = (a[0] * b[1] + a[1] * b[0]) % m
        c2 = a[1] * b[1] % m
        return ((c0 + c2 * t2_0) % m, (c1 + c2 * t2_1) % m)

    def add(self, a, b):
        return ((a[0] + b[0]) % self.mod, (a[1] + b[1]) % self.mod)

    def sub(self, a, b):
        return ((a[0] - b[0]) % self.mod, (a[1] - b[1]) % self.mod)

    def embed(self, n):
        return (n % self.mod, 0)

    def inv(self, a):
        # a^-1 = conj(a) / N(a) with conj over the residue field lifted naively:
        # use the norm form N(a0 + a1 t) = a0^2 - a0 a1 f1 + a1^2 f0
        m = self.mod
        n = (a[0] * a[0] - a[0] * a[1] * self.f1 + a[1] * a[1] * self.f0) % m
        ninv = pow(n, -1, m)
        conj = ((a[0] - a[1] * self.f1) % m, (-a[1]) % m)
        return (conj[0] * ninv % m, conj[1] * ninv % m)

    def eval_poly(self, coeffs, x):
        acc = self.embed(0)
        for c in reversed(coeffs):
            acc = self.add(self.mul(acc, x), self.embed(c))
        return acc

    def lift_root(self, coeffs, dcoeffs, root):
        x = root
        k = 1
        while k < self.K:
            k = min(2 * k, self.K)
            sub = _Zp2(self.p, k, (self.f0, self.f1))
            x = (x[0] % sub.mod, x[1] % sub.mod)
            fx = sub.eval_poly(coeffs, x)
            dfx = sub.eval_poly(dcoeffs, x)
            x = sub.sub(x, sub.mul(fx, sub.inv(dfx)))
        return x

    def valuation(self, a) -> int:
        return min(_vp_int(a[0] % self.mod, self.p),
                   _vp_int(a[1] % self.mod, self.p), self.K)


def resultant_vp(D1: int, D2: int, p: int) -> int:
    """v_p(Res(H_D1, H_D2)), exact.

    Works locally: for each common root of the reductions mod p, Hensel-lift
    the root on a side where it is simple and measure the valuation of the
    other polynomial there.  Falls back to the exact integer resultant if a
    common root is multiple on both sides.
    """
    if D1 == D2:
        raise ResultantZeroError("identical discriminants have zero resultant")
    if not is_prime(p):
        raise ValueError(f"p = {p} must be prime")
    h1, h2 = hilbert(D1), hilbert(D2)
    ctx = fp_ctx(p)
    f1 = Poly.from_ints(ctx, h1.coeffs)
    f2 = Poly.from_ints(ctx, h2.coeffs)
    g = poly_gcd(f1, f2)
    if g.degree < 1:
        return 0
    d1 = f1.derivative()
    d2 = f2.derivative()
    total = 0
    for fac, _mult in factor(g):
        if fac.degree == 1:
            s = ctx.neg(fac.coeffs[0])
            simple1 = not ctx.is_zero(d1.eval(s))
            simple2 = not ctx.is_zero(d2.eval(s))
            if simple1:
                total += _local_valuation_linear(h1, h2, p, s)
            elif simple2:
                total += _local_valuation_linear(h2, h1, p, s)
            else:
                return _vp_int(resultant_int(list(h1.coeffs), list(h2.coeffs)), p)
        elif fac.degree == 2:
            simple1 = poly_gcd(d1, fac).degree == 0
            simple2 = poly_gcd(d2, fac).degree == 0
            if simple1:
                total += 2 * _local_valuation_quadratic(h1, h2, p, fac)
            elif simple2:
                total += 2 * _local_valuation_quadratic(h2, h1, p, fac)
            else:
                return _vp_int(resultant_int(list(h1.coeffs), list(h2.coeffs)), p)
        else:
            return _vp_int(resultant_int(list(h1.coeffs), list(h2.coeffs)), p)
    return total


def _local_valuation_linear(hsimple: ClassPolynomial, hother: ClassPolynomial,
                            p: int, root_mod_p: int) -> int:
    K = 8
    dcoeffs = _poly_derivative_int(hsimple.coeffs)
    while K <= 4096:
        zp = _Zp(p, K)
        alpha = zp.lift_root(hsimple.coeffs, dcoeffs, root_mod_p)
        v = zp.valuation(zp.eval_poly(hother.coeffs, alpha))
        if v <= K - 4:
            return v
        K *= 2
    raise PrecisionExhaustedError("p-adic valuation did not stabilize")


def _local_valuation_quadratic(hsimple: ClassPolynomial, hother: ClassPolynomial,
                               p: int, fac) -> int:
    # fac = t^2 + f1 t + f0 over F_p, irreducible
    f0 = int(fac.coeffs[0])
    f1 = int(fac.coeffs[1])
    K = 8
    dcoeffs = _poly_derivative_int(hsimple.coeffs)
    while K <= 4096:
        ring = _Zp2(p, K, (f0, f1))
        alpha = ring.lift_root(hsimple.coeffs, dcoeffs, (0, 1))
        v = ring.valuation(ring.eval_poly(hother.coeffs, alpha))
        if v <= K - 4:
            return v
        K *= 2
    raise PrecisionExhaustedError("p-adic valuation did not stabilize")


def _poly_derivative_int(coeffs) -> tuple[int, ...]:
    return tuple(i * c for i, c in enumerate(coeffs))[1:]
