"""Local L-data: Euler factors, conductor exponents, gamma factors and
Dirichlet coefficients.

Euler factors are polynomials 1 + a_1 x + ... + a_d x^d stored constant
first.  Traces c_e of Frobenius over F_{p^e} and coefficients are related by

    exp(sum_e c_e x^e / e) = 1 / F(x).
"""

import json
import os
import threading
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Optional

import mpmath
from sympy import Poly, Symbol, sqf_list

from .arith import (_trace_any, erased_data, k_crit, prime_type, trace,
                    trace_erased)
from .errors import (BadPrimeError, FixtureMismatchError, InvariantError,
                     MissingDataError, ValidationError)
from .family import FamilyParameter, parse_family
from .hodge import HodgeData, hodge_vector, hodge_vector_at_one
from .monodromy import ORTHOGONAL, SYMPLECTIC, classify, drop_rank
from .util import ord_p, poly_mul, prime_factors, totient

__all__ = [
    "EulerFactor", "LocalData", "GammaFactorSet", "Fixture", "DEFAULT_FIXTURES",
    "coeffs_from_traces", "traces_from_coeffs", "assemble_palindromic",
    "frobenius_poly", "tame_local", "wild_local", "local_data", "bad_primes",
    "conductor", "gamma_factors", "dirichlet_coefficients",
    "newton_over_hodge_check", "deligne_check", "TraceCache", "export_motive",
    "load_fixtures",
]

COMPUTED, PARTIAL, FIXTURE = "computed", "erased-partial", "fixture"
GOOD, TAME, WILD = "good", "tame", "wild"


# ---------------------------------------------------------------------------
# records

@dataclass(frozen=True)
class EulerFactor:
    p: int
    coeffs: Optional[tuple]      # constant first; None when only the degree is known
    provenance: str = COMPUTED
    degree: Optional[int] = None
    known_divisor: Optional[tuple] = None   # a computed factor of an incomplete polynomial

    def __post_init__(self):
        if self.coeffs is not None:
            c = tuple(int(x) for x in self.coeffs)
            while len(c) > 1 and c[-1] == 0:
                c = c[:-1]
            object.__setattr__(self, "coeffs", c)
            if c[0] != 1:
                raise InvariantError("Euler factor must have constant term 1")
            if self.degree is None:
                object.__setattr__(self, "degree", len(c) - 1)
            elif self.degree != len(c) - 1:
                raise InvariantError(f"degree {self.degree} != {len(c) - 1}")

    @property
    def known(self) -> bool:
        return self.coeffs is not None

    def __str__(self):
        if self.coeffs is None:
            return f"<unknown polynomial of degree {self.degree}>"
        return format_poly(self.coeffs)


@dataclass(frozen=True)
class LocalData:
    p: int
    kind: str
    c_p: Optional[int]
    exact: bool
    factor: EulerFactor
    sigma_profile: Optional[dict] = None
    c_source: str = COMPUTED
    note: str = ""


@dataclass(frozen=True)
class GammaFactorSet:
    """Multiset of ('R' | 'C', shift) meaning Gamma_R(s - shift) or Gamma_C(s - shift)."""
    factors: tuple    # ((kind, shift, multiplicity), ...)
    w: int

    @property
    def dimension(self) -> int:
        return sum(m * (1 if k == "R" else 2) for k, _, m in self.factors)

    def __str__(self):
        parts = []
        for kind, shift, m in self.factors:
            s = "s" if shift == 0 else f"s{-shift:+}"
            parts.append(f"Gamma_{kind}({s})" + (f"^{m}" if m > 1 else ""))
        return " ".join(parts)


@dataclass(frozen=True)
class Fixture:
    poly: Optional[tuple]
    c_p: Optional[int]
    source: str = ""


def format_poly(coeffs, var="x") -> str:
    out = []
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if i == 0:
            term = str(abs(c))
        elif abs(c) == 1:
            term = mono
        else:
            term = f"{abs(c)}*{mono}"
        sign = "-" if c < 0 else "+"
        out.append((sign, term))
    if not out:
        return "0"
    s = ("-" if out[0][0] == "-" else "") + out[0][1]
    for sign, term in out[1:]:
        s += f" {sign} {term}"
    return s


# ---------------------------------------------------------------------------
# fixtures: known bad local data, keyed by (gamma key, t, p)

FIXTURE_VERSION = 1

_SEED = [
    ("[18];[2,2,12]", "1", 2, (1, 2), 6, "F_2 = 1+2x, N = 2^6 3^9"),
    ("[18];[2,2,12]", "1", 3, (1,), 9, "F_3 = 1, N = 2^6 3^9"),
    ("[1,1,1,1,1,1,1,1];[3,3,3,3]", "1", 3, (1,), 9, "F_3 = 1, c_3 = 9"),
    ("[1,1,1,1,1,1,1,1,1,1,1];[2,2,2,2,2,2,2,2,2,4]", "1", 2, (1, 32), 11,
     "F_2 = 1+32x, c_2 = 11"),
    ("[1,1,1,1,8,8];[2,2,2,2,4,4,4,4]", "1", 2, (1, 4, 96, 512, 16384), 18,
     "erased factor is all of F_2, c_2 = 18"),
]


def _fixture_key(param_text, t, p):
    return parse_family(param_text).key(), str(Fraction(t)), int(p)


@lru_cache(maxsize=1)
def _default_fixtures():
    return {_fixture_key(par, t, p): Fixture(poly, c, src) for par, t, p, poly, c, src in _SEED}


def load_fixtures(path=None, include_defaults=True) -> dict:
    """Fixture table; a JSON file holds a list of {param, t, p, poly, c_p, source}."""
    table = dict(_default_fixtures()) if include_defaults else {}
    if path:
        with open(path) as fh:
            data = json.load(fh)
        if isinstance(data, dict):
            if data.get("version", FIXTURE_VERSION) != FIXTURE_VERSION:
                raise ValidationError(f"unsupported fixture version {data.get('version')}")
            data = data.get("fixtures", [])
        for rec in data:
            poly = rec.get("poly")
            table[_fixture_key(rec["param"], rec["t"], rec["p"])] = Fixture(
                tuple(poly) if poly is not None else None, rec.get("c_p"),
                rec.get("source", path))
    return table


DEFAULT_FIXTURES = None   # sentinel meaning "use the built-in table"


def _fixtures(fixtures):
    return _default_fixtures() if fixtures is None else fixtures


def _lookup(fixtures, param, t, p) -> Optional[Fixture]:
    return _fixtures(fixtures).get((param.key(), str(Fraction(t)), p))


# ---------------------------------------------------------------------------
# traces <-> coefficients

def coeffs_from_traces(traces) -> list:
    """a_0..a_K from c_1..c_K via k a_k = -sum_{i=1}^k c_i a_{k-i}."""
    a = [Fraction(1)]
    for k in range(1, len(traces) + 1):
        s = sum(Fraction(traces[i - 1]) * a[k - i] for i in range(1, k + 1))
        a.append(-s / k)
    return a


def traces_from_coeffs(coeffs, K: int) -> list:
    """c_1..c_K of a polynomial with constant term 1."""
    a = list(coeffs) + [0] * max(0, K + 1 - len(coeffs))
    c = []
    for k in range(1, K + 1):
        s = k * a[k] + sum(c[i - 1] * a[k - i] for i in range(1, k))
        c.append(-s)
    return c


def series_inverse(coeffs, J: int) -> list:
    """Coefficients b_0..b_J of 1/F(x)."""
    b = [Fraction(1)]
    for j in range(1, J + 1):
        b.append(-sum(Fraction(coeffs[i]) * b[j - i]
                      for i in range(1, min(j, len(coeffs) - 1) + 1)))
    return b


def _as_int(x, what):
    x = Fraction(x)
    if x.denominator != 1:
        raise InvariantError(f"{what} is not an integer: {x}")
    return int(x)


def _palin_factor(p, deg, e, w):
    twice = (deg - 2 * e) * w
    if twice % 2:
        raise InvariantError("palindrome exponent is not an integer")
    return Fraction(p) ** (twice // 2)


def assemble_palindromic(deg: int, p: int, w: int, trace_fn, eps: Optional[int] = None,
                         start: Optional[int] = None):
    """Degree-deg polynomial with a_{deg-e} = eps p^{(deg-2e)w/2} a_e from its traces.

    Uses c_1..c_K with K = floor(deg/2) when eps is known, one more when it is
    not, and further traces only if the palindrome pairs seen so far do not
    pin eps down.  Returns (coeffs, eps, K).
    """
    if deg == 0:
        return [1], eps if eps is not None else 1, 0
    if (deg * w) % 2:
        raise InvariantError(f"odd degree {deg} with odd weight {w} cannot be palindromic")
    K = deg // 2 if eps is not None else deg // 2 + 1
    if start is not None:
        K = max(K, start)
    K = min(K, deg)
    traces = []
    while True:
        while len(traces) < K:
            traces.append(trace_fn(len(traces) + 1))
        a = coeffs_from_traces(traces)
        a = [_as_int(x, f"coefficient a_{i}") for i, x in enumerate(a)]
        e_found = eps
        for e in range(0, K + 1):
            if deg - e > K or a[e] == 0:
                continue
            ratio = Fraction(a[deg - e]) / (a[e] * _palin_factor(p, deg, e, w))
            if ratio not in (1, -1):
                raise InvariantError(
                    f"palindrome check failed at e = {e}: a_{deg - e} = {a[deg - e]}, a_{e} = {a[e]}")
            if e_found is None:
                e_found = int(ratio)
            elif e_found != ratio:
                raise InvariantError(f"inconsistent sign in the functional equation at e = {e}")
        if e_found is not None or K == deg:
            break
        K += 1
    if e_found is None:
        raise InvariantError("sign of the functional equation is undetermined")
    full = a + [0] * (deg + 1 - len(a))
    for j in range(K + 1, deg + 1):
        full[j] = _as_int(e_found * _palin_factor(p, deg, deg - j, w) * full[deg - j],
                          f"coefficient a_{j}")
    # the pairs inside the computed range must also close up
    for e in range(0, deg + 1):
        if full[deg - e] != e_found * _palin_factor(p, deg, e, w) * full[e]:
            raise InvariantError(f"palindrome relation fails at e = {e}")
    return full, e_found, K


def _assemble_with_linear(deg: int, p: int, w: int, trace_fn):
    """Factor (1 - s p^{(w-1)/2} x) P(x) with P pure of weight w and degree deg.

    Returns (P, s).  The sign s is found by testing both candidates against
    one more trace than P alone needs.
    """
    lam = p ** ((w - 1) // 2)
    cache = {}

    def tr(e):
        if e not in cache:
            cache[e] = trace_fn(e)
        return cache[e]

    start = deg // 2 + 1
    while True:
        ok = []
        for s in (1, -1):
            try:
                P, _, _ = assemble_palindromic(deg, p, w, lambda e: tr(e) - (s * lam) ** e,
                                               eps=1, start=start)
            except InvariantError:
                continue
            full = poly_mul([1, -s * lam], P)
            if traces_from_coeffs(full, start) == [tr(e) for e in range(1, start + 1)]:
                ok.append((P, s))
        if len(ok) == 1:
            return ok[0]
        if not ok:
            raise InvariantError("no linear factor of weight w-1 divides the degenerate factor")
        if start >= deg + 1:
            raise InvariantError("linear factor sign is ambiguous")
        start += 1


# ---------------------------------------------------------------------------
# invariant checks

def deligne_check(coeffs, p: int, weights, tol: float = 1e-9) -> float:
    """Largest relative deviation of a root modulus from the allowed set p^{-w/2}.

    Repeated roots are separated first (square-free decomposition), so the
    root finder only sees simple roots.
    """
    if len(coeffs) <= 1:
        return 0.0
    x = Symbol("x")
    targets = [mpmath.mpf(p) ** (-mpmath.mpf(w) / 2) for w in weights]
    worst = mpmath.mpf(0)
    with mpmath.workdps(60):
        _, parts = sqf_list(Poly(list(reversed(coeffs)), x))
        for fac, _ in parts:
            c = [int(v) for v in fac.all_coeffs()]
            if len(c) <= 1:
                continue
            roots = mpmath.polyroots(c, maxsteps=400, extraprec=200) if len(c) > 2 \
                else [mpmath.mpf(-c[1]) / c[0]]
            for r in roots:
                dev = min(abs(abs(r) - t_) / t_ for t_ in targets)
                worst = max(worst, dev)
    if worst > tol:
        raise InvariantError(f"Deligne check failed: root modulus off by {float(worst):.3g}")
    return float(worst)


def _slopes(h) -> list:
    out = []
    for i, m in enumerate(h):
        out += [i] * m
    return out


def newton_over_hodge_check(coeffs, p: int, hodge, extra_slopes=()) -> dict:
    """ord_p(a_k) >= s_1 + ... + s_k with s listing i exactly h^{i,w-i} times.

    Returns {"ok": bool, "bounds": [...], "failures": [k, ...]}.
    """
    h = hodge.h if isinstance(hodge, HodgeData) else tuple(hodge)
    s = sorted(_slopes(h) + list(extra_slopes))
    bounds, acc = [0], 0
    for x in s:
        acc += x
        bounds.append(acc)
    failures = []
    for k, a in enumerate(coeffs):
        if k >= len(bounds):
            if a:
                failures.append(k)
            continue
        if a and ord_p(a, p) < bounds[k]:
            failures.append(k)
    return {"ok": not failures, "bounds": bounds, "failures": failures}


def _self_test(coeffs, p, hd_h, weights, extra=()):
    deligne_check(coeffs, p, weights)
    res = newton_over_hodge_check(coeffs, p, hd_h, extra)
    if not res["ok"]:
        raise InvariantError(f"Newton-over-Hodge fails at k = {res['failures']}")


# ---------------------------------------------------------------------------
# trace cache

class TraceCache:
    """Append-only text cache: traces.txt holds param|t|p|e|trace,
    factors.txt holds param|t|p|coeffs|c_p|provenance."""

    def __init__(self, directory):
        self.dir = directory
        os.makedirs(directory, exist_ok=True)
        self._lock = threading.Lock()
        self._traces = {}
        self._factors = {}
        self._load()

    @property
    def trace_path(self):
        return os.path.join(self.dir, "traces.txt")

    @property
    def factor_path(self):
        return os.path.join(self.dir, "factors.txt")

    def _load(self):
        if os.path.exists(self.trace_path):
            with open(self.trace_path) as fh:
                for line in fh:
                    parts = line.strip().split("|")
                    if len(parts) != 5:
                        continue
                    par, t, p, e, tr = parts
                    self._put_trace((par, t, int(p), int(e)), int(tr))
        if os.path.exists(self.factor_path):
            with open(self.factor_path) as fh:
                for line in fh:
                    parts = line.strip().split("|")
                    if len(parts) != 6:
                        continue
                    par, t, p, coeffs, c, prov = parts
                    co = tuple(int(x) for x in coeffs.split(",")) if coeffs else None
                    self._factors[(par, t, int(p))] = (co, int(c) if c else None, prov)

    def _put_trace(self, key, value):
        old = self._traces.get(key)
        if old is not None and old != value:
            raise InvariantError(f"cache conflict for {key}: {old} vs {value}")
        self._traces[key] = value

    def get_trace(self, param, t, p, e):
        return self._traces.get((param.key(), str(Fraction(t)), p, e))

    def put_trace(self, param, t, p, e, value):
        key = (param.key(), str(Fraction(t)), p, e)
        with self._lock:
            if key in self._traces:
                self._put_trace(key, value)
                return
            self._put_trace(key, value)
            with open(self.trace_path, "a") as fh:
                fh.write(f"{key[0]}|{key[1]}|{p}|{e}|{value}\n")

    def get_factor(self, param, t, p):
        return self._factors.get((param.key(), str(Fraction(t)), p))

    def put_factor(self, param, t, p, coeffs, c_p, provenance):
        key = (param.key(), str(Fraction(t)), p)
        with self._lock:
            self._factors[key] = (tuple(coeffs) if coeffs is not None else None, c_p, provenance)
            co = ",".join(map(str, coeffs)) if coeffs is not None else ""
            c = "" if c_p is None else str(c_p)
            with open(self.factor_path, "a") as fh:
                fh.write(f"{key[0]}|{key[1]}|{p}|{co}|{c}|{provenance}\n")

    def compact(self) -> dict:
        """Rewrite both files sorted and de-duplicated (last record wins for factors)."""
        with self._lock:
            tmp = self.trace_path + ".tmp"
            with open(tmp, "w") as fh:
                for (par, t, p, e), v in sorted(self._traces.items()):
                    fh.write(f"{par}|{t}|{p}|{e}|{v}\n")
            os.replace(tmp, self.trace_path)
            tmp = self.factor_path + ".tmp"
            with open(tmp, "w") as fh:
                for (par, t, p), (co, c, prov) in sorted(self._factors.items()):
                    cs = ",".join(map(str, co)) if co is not None else ""
                    fh.write(f"{par}|{t}|{p}|{cs}|{'' if c is None else c}|{prov}\n")
            os.replace(tmp, self.factor_path)
        return {"traces": len(self._traces), "factors": len(self._factors)}


def _cached(fn, param, t, p, cache):
    def tr(e):
        if cache is not None:
            v = cache.get_trace(param, t, p, e)
            if v is not None:
                return v
        v = fn(e)
        if cache is not None:
            cache.put_trace(param, t, p, e, v)
        return v
    return tr


# ---------------------------------------------------------------------------
# good primes

def frobenius_poly(param: FamilyParameter, t, p: int, cache: TraceCache = None) -> EulerFactor:
    """Euler factor at a good prime, with all invariants asserted.

    At t = 1 the motive drops rank: the orthogonal factor has degree n-1,
    the symplectic one degree n-2 after removing a linear factor of weight
    w-1.
    """
    t = Fraction(t)
    kind = prime_type(param, t, p)
    if kind != GOOD:
        raise BadPrimeError(f"p = {p} is {kind} for {param} at t = {t}")
    hd = hodge_vector(param)
    if t == 1:
        return _factor_at_one(param, p, cache)
    tr = _cached(lambda e: trace(param, t, p ** e), param, t, p, cache)
    eps = 1 if hd.w % 2 else None
    coeffs, _, _ = assemble_palindromic(param.n, p, hd.w, tr, eps=eps)
    _self_test(coeffs, p, hd.h, [hd.w])
    return EulerFactor(p, tuple(coeffs), COMPUTED)


def _degenerate_factor(param, t, p, cache, keep_linear):
    """Factor read off the engine at t = 1 mod p: returns (coeffs, hodge, weights, extra)."""
    hd = hodge_vector(param)
    h1 = hodge_vector_at_one(param).h
    tr = _cached(lambda e: _trace_any(param, t, p ** e), param, t, p, cache)
    if hd.w % 2 == 0:
        coeffs, _, _ = assemble_palindromic(param.n - 1, p, hd.w, tr)
        _self_test(coeffs, p, h1, [hd.w])
        return coeffs
    P, s = _assemble_with_linear(param.n - 2, p, hd.w, tr)
    if not keep_linear:
        _self_test(P, p, h1, [hd.w])
        return P
    full = poly_mul([1, -s * p ** ((hd.w - 1) // 2)], P)
    _self_test(full, p, h1, [hd.w, hd.w - 1], extra=[(hd.w - 1) // 2])
    return full


def _factor_at_one(param, p, cache):
    return EulerFactor(p, tuple(_degenerate_factor(param, Fraction(1), p, cache, False)),
                       COMPUTED)


# ---------------------------------------------------------------------------
# tame primes

def tame_local(param: FamilyParameter, t, p: int, cache: TraceCache = None,
               fixtures=None) -> LocalData:
    t = Fraction(t)
    if prime_type(param, t, p) != TAME:
        raise BadPrimeError(f"p = {p} is not tame for {param} at t = {t}")
    n = param.n
    kind = classify(param)
    fx = _lookup(fixtures, param, t, p)
    if t != 1 and ord_p(t - 1, p) >= 1:
        m = ord_p(t - 1, p)
        if kind == ORTHOGONAL and m % 2 == 0:
            c = 0
            known = _degenerate_factor(param, t, p, cache, True)
            factor = EulerFactor(p, None, PARTIAL, degree=n, known_divisor=tuple(known))
            note = "one eigenvalue of absolute value p^(w/2) is not determined"
        else:
            c = 1
            coeffs = _degenerate_factor(param, t, p, cache, kind == SYMPLECTIC)
            factor = EulerFactor(p, tuple(coeffs), COMPUTED)
            note = "degeneration evaluation at t = 1 mod p"
    else:
        k = ord_p(t, p)
        cusp = "infinity" if k < 0 else "zero"
        c = drop_rank(param, cusp, abs(k))
        deg = n - c
        if deg == 0:
            factor = EulerFactor(p, (1,), COMPUTED)
        else:
            factor = EulerFactor(p, None, PARTIAL, degree=deg)
        note = f"k = {k}, cusp {cusp}"
    return _apply_fixture(LocalData(p, TAME, c, True, factor, None, COMPUTED, note), fx, n)


# ---------------------------------------------------------------------------
# wild primes

def s_value(d: int, p: int) -> Fraction:
    if d % p:
        return Fraction(1)
    return 1 + ord_p(d, p) + Fraction(1, p - 1)


def sigma_profile(param: FamilyParameter, p: int, k: Optional[int] = None) -> dict:
    sig_inf = sum((s_value(a.denominator, p) for a in param.alpha), Fraction(0))
    sig_0 = sum((s_value(b.denominator, p) for b in param.beta), Fraction(0))
    kc = k_crit(param, p)
    if sig_inf - sig_0 != kc:
        raise InvariantError(f"sigma_inf - sigma_0 = {sig_inf - sig_0} but k_crit = {kc}")
    k_inf, k_0 = min(kc, 0), max(kc, 0)
    out = {
        "s_values": {d: s_value(d, p) for d in sorted(set(param.cyc.alpha_side + param.cyc.beta_side))},
        "sigma_inf": sig_inf, "sigma_0": sig_0, "k_crit": kc, "k_inf": k_inf, "k_0": k_0,
    }
    if k is not None:
        out["k"] = k
        out["sigma_k"] = sigma_of_k(sig_inf, sig_0, kc, k)
    return out


def sigma_of_k(sig_inf, sig_0, kc, k) -> Fraction:
    k_inf, k_0 = min(kc, 0), max(kc, 0)
    if k <= k_inf:
        return sig_inf
    if k >= k_0:
        return sig_0
    return max(sig_inf, sig_0) - abs(k)


def _erased_degree_shifted(param, p, kk):
    """Degree from the tame rule with k replaced by k - k_crit, on the erased side."""
    side = param.cyc.alpha_side if kk < 0 else param.cyc.beta_side
    return sum(totient(d) for d in set(side) if d % p and abs(kk) % d == 0)


def wild_local(param: FamilyParameter, t, p: int, override: Optional[Fixture] = None,
               cache: TraceCache = None, fixtures=None) -> LocalData:
    """Wild local data from the ramp profile and the erasing principle.

    f_p is the erased factor when k = k_crit and otherwise has the degree of
    the tame rule at k - k_crit.  It is all of F_p when gcd(k, p) = 1 or when
    it already has degree n; otherwise only f_p | F_p is known.  When
    t = 1 mod p nothing beyond the erased divisor is claimed.
    """
    t = Fraction(t)
    if prime_type(param, t, p) != WILD:
        raise BadPrimeError(f"p = {p} is not wild for {param}")
    n = param.n
    k = ord_p(t, p)
    prof = sigma_profile(param, p, k)
    kc = prof["k_crit"]
    fx = override or _lookup(fixtures, param, t, p)
    degenerate = t == 1 or ord_p(t - 1, p) >= 1
    if k == kc:
        _, n_inf, n_0 = erased_data(param, p)
        deg = max(n_inf, n_0)
        if deg == 0:
            f = (1,)
        else:
            tr = _cached(lambda e: trace_erased(param, t, p, e), param, t, p, cache)
            a = coeffs_from_traces([tr(e) for e in range(1, deg + 1)])
            f = tuple(_as_int(x, f"erased coefficient a_{i}") for i, x in enumerate(a))
        note = "erased factor at the bottom of the ramp"
    else:
        deg = _erased_degree_shifted(param, p, k - kc)
        f = (1,) if deg == 0 else None
        note = f"degree from the tame rule at k - k_crit = {k - kc}"
    if degenerate:
        factor = EulerFactor(p, None, PARTIAL, degree=None,
                             known_divisor=f if k == kc else None)
        note += "; t = 1 mod p, the factor and conductor need an override"
        ld = LocalData(p, WILD, None, False, factor, prof, COMPUTED, note)
        return _apply_fixture(ld, fx, n)
    complete = gcd(k, p) == 1 or deg == n
    if complete:
        factor = EulerFactor(p, f, COMPUTED) if f is not None else \
            EulerFactor(p, None, PARTIAL, degree=deg)
    else:
        factor = EulerFactor(p, None, PARTIAL, degree=None, known_divisor=f)
        note += "; p | k, so f_p may be a proper factor of F_p"
    bound = prof["sigma_k"] - deg
    if bound.denominator != 1:
        raise InvariantError(f"sigma(k) - degree = {bound} is not an integer")
    bound = int(bound)
    if complete and bound < n - deg:
        raise InvariantError(f"ramp bound {bound} is below n - degree = {n - deg}")
    exact = complete and (gcd(k, p) == 1 or bound == n - deg)
    if not exact:
        note += "; c_p is an upper bound"
    ld = LocalData(p, WILD, bound, exact, factor, prof, COMPUTED, note)
    return _apply_fixture(ld, fx, n)


def _divides(d, f) -> bool:
    """Whether the polynomial d divides f over Q (both constant first)."""
    x = Symbol("x")
    _, r = Poly(list(reversed(f)), x, domain="QQ").div(Poly(list(reversed(d)), x, domain="QQ"))
    return r.is_zero


def _apply_fixture(ld: LocalData, fx: Optional[Fixture], n: int) -> LocalData:
    if fx is None:
        return ld
    factor, c, exact, src = ld.factor, ld.c_p, ld.exact, ld.c_source
    if fx.poly is not None:
        fpoly = EulerFactor(ld.p, tuple(fx.poly), FIXTURE)
        if factor.known:
            if factor.coeffs != fpoly.coeffs:
                raise FixtureMismatchError(
                    f"p = {ld.p}: computed factor {factor} but fixture says {fpoly}")
        else:
            if factor.degree is not None and factor.degree != fpoly.degree:
                raise FixtureMismatchError(
                    f"p = {ld.p}: computed degree {factor.degree} but fixture has {fpoly.degree}")
            if factor.known_divisor is not None and not _divides(factor.known_divisor, fpoly.coeffs):
                raise FixtureMismatchError(
                    f"p = {ld.p}: computed divisor {format_poly(factor.known_divisor)} "
                    f"does not divide the fixture {fpoly}")
            factor = fpoly
    if fx.c_p is not None:
        if c is not None and exact and c != fx.c_p:
            raise FixtureMismatchError(f"p = {ld.p}: computed c_p = {c} but fixture says {fx.c_p}")
        if factor.degree is not None and fx.c_p < n - factor.degree:
            raise FixtureMismatchError(f"p = {ld.p}: fixture c_p below n - degree")
        if c is not None and not exact and fx.c_p > c:
            raise FixtureMismatchError(f"p = {ld.p}: fixture c_p = {fx.c_p} exceeds the bound {c}")
        if c is None or not exact:
            c, exact, src = fx.c_p, True, FIXTURE
    return replace(ld, factor=factor, c_p=c, exact=exact, c_source=src)


# ---------------------------------------------------------------------------
# dispatch, conductor

def bad_primes(param: FamilyParameter, t) -> list:
    t = Fraction(t)
    ps = set()
    for g in param.gamma:
        ps.update(prime_factors(abs(g)))
    if t == 0:
        raise ValidationError("t = 0 is not a valid specialization")
    ps.update(prime_factors(abs(t.numerator)))
    ps.update(prime_factors(t.denominator))
    if t != 1:
        ps.update(prime_factors(abs((t - 1).numerator)))
    return sorted(ps)


def local_data(param: FamilyParameter, t, p: int, cache: TraceCache = None,
               fixtures=None, overrides=None) -> LocalData:
    t = Fraction(t)
    kind = prime_type(param, t, p)
    if kind == GOOD:
        return LocalData(p, GOOD, 0, True, frobenius_poly(param, t, p, cache))
    if kind == TAME:
        return tame_local(param, t, p, cache, fixtures)
    ov = (overrides or {}).get(p)
    return wild_local(param, t, p, ov, cache, fixtures)


@dataclass(frozen=True)
class ConductorResult:
    value: int
    exact: bool
    exponents: dict          # p -> LocalData
    flags: dict = field(default_factory=dict)   # p -> "computed" | "fixture" | "bound"

    def factored(self) -> str:
        return " * ".join(f"{p}^{ld.c_p}" for p, ld in sorted(self.exponents.items())
                          if ld.c_p) or "1"


def conductor(param: FamilyParameter, t, overrides=None, fixtures=None,
              cache: TraceCache = None) -> ConductorResult:
    t = Fraction(t)
    N, exact, exps, flags = 1, True, {}, {}
    for p in bad_primes(param, t):
        kind = prime_type(param, t, p)
        if kind == GOOD:
            continue
        ld = local_data(param, t, p, cache, fixtures, overrides)
        exps[p] = ld
        if ld.c_p is None:
            raise MissingDataError(f"conductor exponent at p = {p} is unknown; supply an override")
        N *= p ** ld.c_p
        if not ld.exact:
            exact = False
            flags[p] = "bound"
        else:
            flags[p] = ld.c_source
    return ConductorResult(N, exact, exps, flags)


# ---------------------------------------------------------------------------
# gamma factors

def gamma_factors(hodge: HodgeData, sigma: Optional[int] = None) -> GammaFactorSet:
    w, h = hodge.w, hodge.h
    sigma = hodge.sigma if sigma is None else sigma
    out = Counter()
    for p in range(w + 1):
        q = w - p
        if p < q and h[p]:
            out[("C", Fraction(p))] += h[p]
    if w % 2 == 0 and h[w // 2]:
        mid = h[w // 2]
        half = Fraction(w, 2)
        if sigma is None:
            if mid % 2:
                raise ValidationError("sigma is required when the central Hodge number is odd")
            out[("C", half)] += mid // 2
        else:
            if abs(sigma) > mid or (mid - sigma) % 2:
                raise ValidationError(f"sigma = {sigma} incompatible with h^(w/2,w/2) = {mid}")
            hp, hm = (mid + sigma) // 2, (mid - sigma) // 2
            if hp:
                out[("R", half)] += hp
            if hm:
                out[("R", half - 1)] += hm
    factors = tuple(sorted((k, s, m) for (k, s), m in out.items()))
    gs = GammaFactorSet(factors, w)
    if gs.dimension != sum(h):
        raise InvariantError("gamma factor dimension differs from the rank")
    return gs


# ---------------------------------------------------------------------------
# Dirichlet coefficients

def _primes_upto(N):
    sieve = bytearray([1]) * (N + 1)
    sieve[:2] = b"\x00\x00"
    for i in range(2, isqrt(N) + 1):
        if sieve[i]:
            sieve[i * i::i] = bytearray(len(sieve[i * i::i]))
    return [i for i in range(N + 1) if sieve[i]]


def _local_series(param, t, p, J, cache, fixtures, overrides):
    kind = prime_type(param, t, p)
    if kind == GOOD and t != 1:
        tr = _cached(lambda e: trace(param, t, p ** e), param, t, p, cache)
        a = coeffs_from_traces([tr(e) for e in range(1, J + 1)])
        return [_as_int(x, "Dirichlet coefficient") for x in series_inverse(a, J)]
    ld = local_data(param, t, p, cache, fixtures, overrides)
    if not ld.factor.known:
        raise MissingDataError(
            f"Euler factor at p = {p} is unknown (degree {ld.factor.degree}); supply a fixture")
    return [_as_int(x, "Dirichlet coefficient") for x in series_inverse(ld.factor.coeffs, J)]


def _series_job(args):
    param_key, t, p, J, cache_dir, fixtures, overrides = args
    param = parse_family(param_key)
    cache = TraceCache(cache_dir) if cache_dir else None
    return p, _local_series(param, Fraction(t), p, J, cache, fixtures, overrides)


def dirichlet_coefficients(param: FamilyParameter, t, N_max: int, fixtures=None,
                           overrides=None, cache: TraceCache = None, workers: int = 1) -> list:
    """a_1..a_{N_max} of prod_p 1/F_p(p^-s)."""
    t = Fraction(t)
    primes = _primes_upto(N_max)
    jobs = []
    for p in primes:
        J, pk = 0, 1
        while pk * p <= N_max:
            pk *= p
            J += 1
        jobs.append((p, J))
    local = {}
    if workers > 1 and len(jobs) > 1:
        args = [(param.key(), str(t), p, J, cache.dir if cache else None, fixtures, overrides)
                for p, J in jobs]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            for p, series in ex.map(_series_job, args):
                local[p] = series
    else:
        for p, J in jobs:
            local[p] = _local_series(param, t, p, J, cache, fixtures, overrides)
    a = [0] * (N_max + 1)
    a[1] = 1
    for n in range(2, N_max + 1):
        m, val = n, 1
        for p in primes:
            if p * p > m:
                break
            if m % p == 0:
                e = 0
                while m % p == 0:
                    m //= p
                    e += 1
                val *= local[p][e]
        if m > 1:
            val *= local[m][1]
        a[n] = val
    return a[1:]


# ---------------------------------------------------------------------------
# export

def export_motive(param: FamilyParameter, t, N_max: int = 100, fixtures=None, overrides=None,
                  sigma=None, cache: TraceCache = None, workers: int = 1) -> dict:
    t = Fraction(t)
    hd = hodge_vector_at_one(param) if t == 1 else hodge_vector(param)
    w = hd.w
    try:
        gf = gamma_factors(hd, sigma)
        gfs = [{"kind": k, "shift": str(s), "mult": m} for k, s, m in gf.factors]
    except ValidationError as exc:
        gfs = {"error": str(exc)}
    cond = conductor(param, t, overrides, fixtures, cache)
    factors = []
    for p, ld in sorted(cond.exponents.items()):
        factors.append({"p": p, "kind": ld.kind, "c_p": ld.c_p,
                        "coeffs": list(ld.factor.coeffs) if ld.factor.known else None,
                        "degree": ld.factor.degree, "provenance": ld.factor.provenance,
                        "c_source": cond.flags.get(p)})
    try:
        dirichlet = dirichlet_coefficients(param, t, N_max, fixtures, overrides, cache, workers)
    except MissingDataError as exc:
        dirichlet = {"error": str(exc)}
    return {
        "schema": "hgm/1",
        "param": param.key(),
        "cyclotomic": str(param.cyc),
        "t": str(t),
        "weight": w,
        "hodge": list(hd.h),
        "gamma_factors": gfs,
        "conductor": {"value": cond.value, "exact": cond.exact, "factored": cond.factored()},
        "euler_factors": factors,
        "dirichlet": dirichlet,
    }
