"""Small number-theory helpers (thin wrappers around sympy)."""

from fractions import Fraction
from functools import lru_cache
from math import gcd

from sympy import divisors as _divisors
from sympy import factorint, isprime, mobius as _mobius, totient as _totient
from sympy import cyclotomic_poly, Poly, Symbol

_X = Symbol("x")


@lru_cache(maxsize=None)
def totient(d: int) -> int:
    return int(_totient(d))


@lru_cache(maxsize=None)
def divisors(d: int) -> tuple:
    return tuple(int(e) for e in _divisors(d))


@lru_cache(maxsize=None)
def mobius(d: int) -> int:
    return int(_mobius(d))


@lru_cache(maxsize=None)
def cyclotomic_coeffs(d: int) -> tuple:
    """Coefficients of Phi_d, constant term first."""
    c = Poly(cyclotomic_poly(d, _X), _X).all_coeffs()
    return tuple(int(v) for v in reversed(c))


def poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def cyclotomic_product(ds) -> list:
    """Integer coefficients (constant first) of prod Phi_d over the multiset ds."""
    return list(_cyclotomic_product(tuple(sorted(ds))))


@lru_cache(maxsize=None)
def _cyclotomic_product(ds) -> tuple:
    out = [1]
    for d in ds:
        out = poly_mul(out, cyclotomic_coeffs(d))
    return tuple(out)


def ord_p(x, p: int) -> int:
    """p-adic valuation of a nonzero rational (or int)."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of zero")
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def prime_power(q: int):
    """Return (p, f) with q = p**f, or raise ValueError."""
    if q < 2:
        raise ValueError(f"{q} is not a prime power")
    fac = factorint(q)
    if len(fac) != 1:
        raise ValueError(f"{q} is not a prime power")
    (p, f), = fac.items()
    return int(p), int(f)


def is_prime(p: int) -> bool:
    return bool(isprime(p))


def prime_factors(n: int) -> list:
    return sorted(int(p) for p in factorint(abs(n)))


def lcm(*xs) -> int:
    out = 1
    for x in xs:
        out = out * x // gcd(out, x)
    return out


def mod_rational(x: Fraction, m: int) -> int:
    """Image of a rational with denominator prime to m in Z/m."""
    x = Fraction(x)
    return x.numerator * pow(x.denominator, -1, m) % m


def parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())
