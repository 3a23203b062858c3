"""Character sums: exact Gauss sums for split q and the p-adic route.

Two independent evaluations of the hypergeometric trace are provided.

``trace_split`` works literally with Jacobi-type products of Gauss sums,
held exactly in Z[zeta_N] with N = (q-1)p.  It needs every alpha and beta to
give a character of F_q^x, i.e. q = 1 mod m.

``trace`` rewrites the sum in terms of the gamma vector (Hasse-Davenport
collapses each Psi_m block into a single Gauss sum), which is valid for
every power of a good prime, and then evaluates the Gauss sums p-adically
with Gross-Koblitz.  Conventions used there:

* omega is the Teichmueller character, g(omega^-a) = -pi^s(a) prod_i
  Gamma_p(<p^i a/(q-1)>) with s(a) the base-p digit sum of a and
  pi^(p-1) = -p;
* roots shared between the Psi blocks of the two sides contribute a power
  q^(m_C(-r) - m_C(0)), where m_C(s) counts shared roots c with
  c(q-1) = s mod (q-1);
* the normalising power is q^(-phi0), phi0 being the lowest zigzag height.

Both routes are checked against each other in the test suite.
"""

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, gcd, isqrt, log

import numpy as np
from sympy import isprime, primitive_root

from .errors import BadPrimeError, InvariantError, NotSplitError, PrecisionError, ValidationError
from .family import FamilyParameter, unreduce
from .finitefield import field
from .hodge import hodge_vector
from .util import mobius, ord_p, prime_power, totient

__all__ = [
    "CharacterTable", "CyclotomicElement", "gauss_sum", "trace_split", "trace",
    "trace_erased", "PadicContext", "prime_type", "gamma_product_constant",
    "common_roots", "deligne_bound",
]


# ---------------------------------------------------------------------------
# prime classification

def gamma_product_constant(gamma) -> Fraction:
    """P = prod gamma_j^gamma_j, so that u = t P."""
    out = Fraction(1)
    for g in gamma:
        out *= Fraction(g) ** g
    return out


def prime_type(param: FamilyParameter, t, p: int) -> str:
    """'wild', 'tame' or 'good' for the prime p and specialization t."""
    t = Fraction(t)
    if any(g % p == 0 for g in param.gamma):
        return "wild"
    if t == 1:
        return "good"
    if ord_p(t, p) != 0 or ord_p(t - 1, p) > 0:
        return "tame"
    return "good"


def _require_good(param, t, p):
    kind = prime_type(param, t, p)
    if kind != "good":
        raise BadPrimeError(f"p = {p} is {kind} for {param} at t = {t}")


def deligne_bound(n: int, q: int, w: int) -> int:
    """An integer >= n q^(w/2)."""
    return n * (isqrt(q ** w) + 1)


# ---------------------------------------------------------------------------
# exact cyclotomic arithmetic

def _ramanujan(N: int) -> np.ndarray:
    out = np.empty(N, dtype=object)
    phiN = totient(N)
    for e in range(N):
        g = gcd(e, N)
        out[e] = mobius(N // g) * phiN // totient(N // g)
    return out


_RAMANUJAN = {}


class CyclotomicElement:
    """Element of Z[x]/(x^N - 1), viewed in Q(zeta_N)."""

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=object)
        self.N = len(self.c)

    @classmethod
    def from_exponents(cls, N, exps):
        c = np.zeros(N, dtype=object)
        for e in exps:
            c[e % N] += 1
        return cls(c)

    def __mul__(self, other):
        N = self.N
        out = np.zeros(N, dtype=object)
        nz = np.nonzero(other.c)[0]
        for e in nz:
            out += np.roll(self.c, int(e)) * other.c[e]
        return CyclotomicElement(out)

    def __add__(self, other):
        return CyclotomicElement(self.c + other.c)

    def conj(self):
        return CyclotomicElement(np.roll(self.c[::-1], 1))

    def trace(self) -> int:
        """Tr_{Q(zeta_N)/Q} via Ramanujan sums."""
        if self.N not in _RAMANUJAN:
            _RAMANUJAN[self.N] = _ramanujan(self.N)
        return int(np.dot(self.c, _RAMANUJAN[self.N]))

    def rational_value(self) -> Fraction:
        """The rational number this element equals, or raise if it is not rational."""
        c = Fraction(self.trace(), totient(self.N))
        for P, z in _check_primes(self.N):
            if (_evaluate(self.c, z, P) * c.denominator - c.numerator) % P:
                raise InvariantError("cyclotomic element is not rational")
        return c

    def to_complex(self) -> complex:
        k = np.arange(self.N)
        z = np.exp(2j * np.pi * k / self.N)
        return complex(np.dot(self.c.astype(float), z))


@lru_cache(maxsize=None)
def _check_primes(N):
    # two primes P = 1 mod N with a primitive N-th root of unity in F_P
    out = []
    k = (1 << 61) // N
    while len(out) < 2:
        P = k * N + 1
        if isprime(P):
            g = int(primitive_root(P))
            out.append((P, pow(g, (P - 1) // N, P)))
        k += 1
    return tuple(out)


def _evaluate(coeffs, z, P):
    acc, zp = 0, 1
    for c in coeffs:
        if c:
            acc += int(c) * zp
        zp = zp * z % P
    return acc % P


# ---------------------------------------------------------------------------
# characters and exact Gauss sums

@dataclass(frozen=True)
class CharacterTable:
    """omega(g^k) = zeta_{q-1}^(k*omega_unit); psi(y) = zeta_p^Tr(psi_scale*y)."""
    q: int
    omega_unit: int = 1
    psi_scale: int = 1

    def __post_init__(self):
        if gcd(self.omega_unit, self.q - 1) != 1:
            raise ValidationError("omega_unit must be prime to q-1")
        if not 0 < self.psi_scale < self.q:
            raise ValidationError("psi_scale must be a nonzero field element code")

    @property
    def F(self):
        return field(self.q)

    @property
    def p(self):
        return self.F.p

    @property
    def N(self):
        return (self.q - 1) * self.p

    def char_exponent(self, x: int) -> int:
        """omega(x) = zeta_{q-1}^result, x a nonzero field element code."""
        return self.F.element_log(x) * self.omega_unit % (self.q - 1)

    def gauss_exponents(self, a: int) -> np.ndarray:
        F, q1, p = self.F, self.q - 1, self.p
        k = np.arange(q1)
        logc = F.element_log(self.psi_scale)
        tr = F.trace_table[F.exp[(k + logc) % q1]]
        return ((a * self.omega_unit * k) % q1) * p + tr * q1


def gauss_sum(ctx: CharacterTable, a: int) -> CyclotomicElement:
    """g(omega^a) as an exact element of Z[zeta_N], N = (q-1)p."""
    if not 0 <= a < ctx.q - 1:
        raise ValidationError("character exponent out of range")
    return CyclotomicElement.from_exponents(ctx.N, ctx.gauss_exponents(a))


def _mul_sparse(vec, exps, N):
    out = np.zeros(N, dtype=vec.dtype)
    for e in exps:
        out += np.roll(vec, int(e))
    return out


def _split_sum(alpha, beta, tbar, q, ctx):
    """Sum_r J(r) chi_r(t) and J(0) for the alpha/beta lists (exact)."""
    ctx = ctx or CharacterTable(q)
    q1, N, p = q - 1, ctx.N, ctx.p
    A = [int(a * q1) for a in alpha]
    B = [int(b * q1) for b in beta]
    cache = {}

    def g(a):
        a %= q1
        if a not in cache:
            cache[a] = ctx.gauss_exponents(a) % N
        return cache[a]

    k = len(A) + len(B)
    dtype = np.int64 if (k + 1) * log(max(q1, 2)) < 62 * log(2) else object
    S = np.zeros(N, dtype=dtype)
    lt = ctx.char_exponent(tbar)
    for r in range(q1):
        vec = np.zeros(N, dtype=dtype)
        vec[(r * lt % q1) * p] = 1
        for a in A:
            vec = _mul_sparse(vec, g(a + r), N)
        for b in B:
            vec = _mul_sparse(vec, (-g(b + r)) % N, N)
        S += vec
    X = S.astype(object)
    for a in A:                      # multiply by conj(J(0))
        X = _mul_sparse(X, (-g(a)) % N, N)
    for b in B:
        X = _mul_sparse(X, g(b), N)
    nontrivial = sum(1 for a in A + B if a % q1)
    return CyclotomicElement(X).rational_value() / Fraction(q) ** nontrivial


def trace_split(param: FamilyParameter, t, q: int, ctx: CharacterTable = None) -> int:
    """Trace of Frobenius over F_q from the Jacobi-sum formula (q split)."""
    p, _ = prime_power(q)
    t = Fraction(t)
    _require_good(param, t, p)
    if (q - 1) % param.m:
        raise NotSplitError(f"q = {q} is not 1 mod m = {param.m}")
    if ctx is not None and ctx.q != q:
        raise ValidationError("character table is for a different q")
    hd = hodge_vector(param)
    tbar = int(t.numerator * pow(t.denominator, -1, p) % p)
    ratio = _split_sum(param.alpha, param.beta, tbar, q, ctx)
    val = ratio * Fraction(q) ** (-hd.phi0) / (1 - q)
    if val.denominator != 1:
        raise InvariantError(f"split trace is not integral: {val}")
    return int(val)


# ---------------------------------------------------------------------------
# p-adic gamma function

def _poly_mul_trunc(a, b, deg, M):
    out = [0] * min(deg, len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x or i >= deg:
            continue
        for j in range(min(len(b), deg - i)):
            out[i + j] += x * b[j]
    return [c % M for c in out]


def _taylor_shift(a, s, deg, M):
    """Coefficients of a(z + s), truncated below degree deg."""
    out = [0] * min(deg, len(a))
    spow = [1]
    for _ in range(len(a)):
        spow.append(spow[-1] * s % M)
    for k, ak in enumerate(a):
        if ak:
            for j in range(min(k + 1, deg)):
                out[j] += ak * comb(k, j) * spow[k - j]
    return [c % M for c in out]


def _eval(poly, z, M):
    acc = 0
    for c in reversed(poly):
        acc = (acc * z + c) % M
    return acc


class PadicContext:
    """Morita's Gamma_p modulo p^precision.

    Gamma_p(N) = (-1)^N prod_{0<j<N, p not | j} j for integers N >= 0.  The
    unit product over [0, N) is split along the base-p digits of N into
    blocks [s, s + d p^i) with s = 0 mod p^(i+1); the block products are
    polynomials in s, precomputed and truncated since s^k = 0 mod p^prec
    once k(i+1) >= prec.
    """

    def __init__(self, p: int, precision: int):
        if precision < 1:
            raise ValidationError("precision must be positive")
        self.p = p
        self.precision = precision
        # for p = 2 continuity of Gamma_2 loses one digit
        self.digits = precision + (1 if p == 2 else 0)
        self.M = p ** self.digits
        self._build()

    def _build(self):
        p, D, M = self.p, self.digits, self.M
        R = []
        lev0 = [[1]]
        acc = [1]
        for c in range(1, p):
            lev0.append(acc)
            acc = _poly_mul_trunc(acc, [c, 1], D, M)
        R.append(lev0)
        Q = acc  # product of (z + c), 0 < c < p
        for i in range(1, D):
            deg_out = -(-D // (i + 1))
            pi = p ** i
            row = [[1]]
            acc = [1]
            for c in range(p):
                shifted = _taylor_shift(Q, c * pi % M, deg_out, M)
                acc = _poly_mul_trunc(acc, shifted, deg_out, M)
                row.append(acc)
            R.append(row[:p])
            Q = acc
        self.R = R

    def gamma_int(self, N: int) -> int:
        """Gamma_p(N) mod p^digits for an integer 0 <= N < p^digits."""
        p, M = self.p, self.M
        prod, s = 1, 0
        for i in range(self.digits - 1, -1, -1):
            pi = p ** i
            d = (N // pi) % p
            if d:
                prod = prod * _eval(self.R[i][d], s, M) % M
                s += d * pi
        return -prod % M if N % 2 else prod

    def gamma(self, x) -> int:
        """Gamma_p(x) mod p^precision for x in Z_p (a Fraction with unit denominator)."""
        x = Fraction(x)
        N = x.numerator * pow(x.denominator, -1, self.M) % self.M
        return self.gamma_int(N) % self.p ** self.precision


@lru_cache(maxsize=32)
def _padic_context(p, precision):
    return PadicContext(p, precision)


@lru_cache(maxsize=16)
def _gamma_tables(q, precision):
    """(digit sums s(b), prod_i Gamma_p(<p^i b/(q-1)>) mod p^precision) for b < q-1."""
    p, f = prime_power(q)
    q1 = q - 1
    ctx = _padic_context(p, precision)
    Mp = ctx.M
    inv = pow(q1, -1, Mp)
    gam = [ctx.gamma_int(b * inv % Mp) for b in range(q1)]
    mod = p ** precision
    prod = [0] * q1
    for b in range(q1):
        if prod[b]:
            continue
        v, c = 1, b
        for _ in range(f):
            v = v * gam[c] % Mp
            c = c * p % q1
        v %= mod
        c = b
        for _ in range(f):          # constant on Frobenius orbits
            prod[c] = v
            c = c * p % q1
    b = np.arange(q1)
    ds = np.zeros(q1, dtype=np.int64)
    for i in range(f):
        ds += (b // p ** i) % p
    return ds, prod


def common_roots(gamma) -> Counter:
    """Multiset intersection of the roots of the Psi blocks on the two sides."""
    neg, pos = Counter(), Counter()
    for g in gamma:
        side = neg if g < 0 else pos
        m = abs(g)
        for k in range(1, m + 1):
            side[Fraction(k, m)] += 1
    return neg & pos


def teichmuller(x: int, p: int, k: int) -> int:
    M = p ** k
    return pow(x % p, p ** k, M)


def _default_precision(p, e, w, n, bound):
    heuristic = int(w * e * log(max(n, 1)) / log(p) + 10) + 1
    certified = 1
    while p ** certified <= 2 * bound:
        certified += 1
    return max(heuristic, certified)


def gamma_form_trace(gamma, u_mod_p: int, q: int, phi0: int, bound: int,
                     precision: int = None, C: Counter = None, max_doublings: int = 3) -> int:
    """Evaluate q^-phi0/(1-q) sum_r q^(m_C(-r)-m_C(0)) prod_j g(omega^(-gamma_j r)) omega^r(u) (-1)^l.

    The result is snapped to the unique integer of absolute value <= bound.
    """
    p, f = prime_power(q)
    q1 = q - 1
    if u_mod_p % p == 0:
        raise BadPrimeError("u is not a unit at p")
    C = common_roots(gamma) if C is None else C
    mC = np.zeros(q1, dtype=np.int64)
    for c, mult in C.items():
        x = c * q1
        if x.denominator == 1:
            mC[int(x) % q1] += mult
    r = np.arange(q1)
    e = f
    if precision is None:
        precision = _default_precision(p, e, 0, 1, bound)
    for _ in range(max_doublings + 1):
        value = _gamma_form_once(gamma, u_mod_p, q, p, f, phi0, mC, r, precision)
        M = p ** precision
        if M > 2 * bound:
            lift = value if value <= M // 2 else value - M
            if abs(lift) <= bound:
                return lift
        precision *= 2
    raise PrecisionError(f"could not certify trace over F_{q} within the Deligne bound")


def _gamma_form_once(gamma, u_mod_p, q, p, f, phi0, mC, r, precision):
    q1 = q - 1
    S = np.zeros(q1, dtype=np.int64)
    # digit sums are computed on the fly below; first pass for valuations
    ds_small = np.zeros(q1, dtype=np.int64)
    for i in range(f):
        ds_small += (r // p ** i) % p
    for g in gamma:
        S += ds_small[(g * r) % q1]
    if np.any(S % (p - 1)):
        raise InvariantError("digit sum not divisible by p-1")
    Sdiv = S // (p - 1)
    val = f * (-phi0) + Sdiv + f * (mC[(-r) % q1] - mC[0])
    vmin = int(val.min())
    work = max(precision - vmin, 1)
    _, gprod = _gamma_tables(q, work)
    M = p ** work
    T = teichmuller(u_mod_p, p, work)
    acc, tp = 0, 1
    shift = val - vmin
    for ri in range(q1):
        sh = int(shift[ri])
        if sh < work:
            term = tp
            for g in gamma:
                term = term * gprod[(g * ri) % q1] % M
            if Sdiv[ri] % 2:
                term = -term
            acc += term * p ** sh
        tp = tp * T % M
    acc %= M
    out_mod = p ** precision
    if vmin < 0:
        k = -vmin
        if acc % p ** k:
            raise InvariantError("trace sum is not p-integral")
        acc //= p ** k
    else:
        acc *= p ** vmin
    return acc * pow(1 - q, -1, out_mod) % out_mod


def trace(param: FamilyParameter, t, q: int, precision: int = None) -> int:
    """Trace of Frobenius on H(gamma, t) over F_q for any power q of a good prime."""
    p, e = prime_power(q)
    t = Fraction(t)
    _require_good(param, t, p)
    return _trace_any(param, t, q, precision)


def _trace_any(param, t, q, precision=None):
    """Trace formula without the good-prime check (t may reduce to 1)."""
    p, e = prime_power(q)
    hd = hodge_vector(param)
    u = t * gamma_product_constant(param.gamma)
    ub = u.numerator * pow(u.denominator, -1, p) % p
    bound = deligne_bound(param.n, q, hd.w)
    if precision is None:
        precision = _default_precision(p, e, hd.w, param.n, bound)
    return gamma_form_trace(param.gamma, ub, q, hd.phi0, bound, precision)


def erased_data(param: FamilyParameter, p: int):
    """(erased gamma, n_inf', n_0') after dropping p-divisible denominators."""
    a = [d for d in param.cyc.alpha_side if d % p]
    b = [d for d in param.cyc.beta_side if d % p]
    n_inf = sum(totient(d) for d in a)
    n_0 = sum(totient(d) for d in b)
    return unreduce(a, b), n_inf, n_0


def k_crit(param: FamilyParameter, p: int) -> int:
    return -sum(g * ord_p(g, p) for g in param.gamma)


def trace_erased(param: FamilyParameter, t, p: int, e: int, precision: int = None) -> int:
    """Trace over F_(p^e) of the factor surviving at a wild prime on the ramp bottom."""
    t = Fraction(t)
    if not any(g % p == 0 for g in param.gamma):
        return trace(param, t, p ** e, precision)
    if ord_p(t, p) != k_crit(param, p):
        raise BadPrimeError(
            f"ord_{p}(t) = {ord_p(t, p)} is off the ramp bottom k_crit = {k_crit(param, p)}")
    gam, n_inf, n_0 = erased_data(param, p)
    if n_inf == 0 and n_0 == 0:
        raise ValidationError("all parameters are erased; the factor is trivial")
    if (n_inf - n_0) % (p - 1):
        raise InvariantError("n_inf - n_0 is not a multiple of p-1")
    hd = hodge_vector(param)
    u = t * gamma_product_constant(param.gamma)
    ub = u.numerator * pow(u.denominator, -1, p) % p
    q = p ** e
    bound = deligne_bound(max(n_inf, n_0), q, hd.w)
    if precision is None:
        precision = _default_precision(p, e, hd.w, param.n, bound)
    return gamma_form_trace(gam, ub, q, hd.phi0, bound, precision)
