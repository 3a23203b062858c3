"""Source varieties: toric models, polytope statistics, splicings and
brute-force point counts used as oracles for the trace engine.

A toric model of gamma is a pair (m, k) with m a d x l integer matrix
(d = l - 2) and k an integer l-vector such that

    m gamma^T = 0,   gamma . k = 1,   [m; 1 ... 1] saturated in Z^l.

The variety is  sum_j u^{k_j} prod_i x_i^{m_ij} = 0  on the torus (G_m)^d.
"""

import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd

import numpy as np
from sympy import Matrix, Poly, Symbol, ZZ, discriminant
from sympy.matrices.normalforms import smith_normal_form

from .arith import gamma_product_constant
from .errors import BadPrimeError, InvariantError, ValidationError
from .family import _check_gamma
from .finitefield import field
from .util import ord_p, prime_power

__all__ = [
    "ToricModel", "BcmModel", "toric_model", "validate_model", "bcm_model",
    "polytope_stats", "splicings", "count_points", "elliptic_ap",
    "TrinomialModel", "trinomial_model",
]

DEFAULT_BUDGET = 1 << 24


# ---------------------------------------------------------------------------
# integer lattice helpers

def _unimodular_reducer(v):
    """Unimodular U (l x l) with v U = (g, 0, ..., 0), g = gcd(v) >= 0.

    Built from elementary column operations, so U is exactly invertible
    over Z.
    """
    l = len(v)
    v = list(v)
    U = [[int(i == j) for j in range(l)] for i in range(l)]

    def addcol(dst, src, c):
        v[dst] += c * v[src]
        for row in U:
            row[dst] += c * row[src]

    def swap(a, b):
        v[a], v[b] = v[b], v[a]
        for row in U:
            row[a], row[b] = row[b], row[a]

    while True:
        nz = [i for i in range(l) if v[i]]
        if not nz:
            return 0, U
        piv = min(nz, key=lambda i: abs(v[i]))
        if piv != 0:
            swap(0, piv)
        done = True
        for i in range(1, l):
            if v[i]:
                addcol(i, 0, -(v[i] // v[0]))
                if v[i]:
                    done = False
        if done:
            break
    if v[0] < 0:
        v[0] = -v[0]
        for row in U:
            row[0] = -row[0]
    return v[0], U


def _hnf_rows(rows):
    """Row Hermite normal form (nonzero rows only), pivots positive, entries
    above a pivot reduced into [0, pivot)."""
    A = [list(r) for r in rows]
    m = len(A)
    ncols = len(A[0]) if A else 0
    r = 0
    for c in range(ncols):
        if r == m:
            break
        while True:
            nz = [i for i in range(r, m) if A[i][c]]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(A[i][c]))
            A[r], A[piv] = A[piv], A[r]
            clean = True
            for i in range(r + 1, m):
                if A[i][c]:
                    f = A[i][c] // A[r][c]
                    A[i] = [x - f * y for x, y in zip(A[i], A[r])]
                    if A[i][c]:
                        clean = False
            if clean:
                break
        if r < m and A[r][c]:
            if A[r][c] < 0:
                A[r] = [-x for x in A[r]]
            for i in range(r):
                f = A[i][c] // A[r][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
            r += 1
    return [row for row in A[:r]]


def _reduce_mod_lattice(v, hnf):
    v = list(v)
    for row in hnf:
        c = next(i for i, x in enumerate(row) if x)
        f = v[c] // row[c]
        v = [x - f * y for x, y in zip(v, row)]
    return v


def _smith_ones(rows) -> bool:
    M = Matrix(rows)
    S = smith_normal_form(M, domain=ZZ)
    return all(abs(S[i, i]) == 1 for i in range(min(S.shape)))


# ---------------------------------------------------------------------------
# toric models

@dataclass(frozen=True)
class ToricModel:
    gamma: tuple
    m: tuple            # d rows of length l
    k: tuple
    u_factor: Fraction  # u = u_factor * t

    @property
    def d(self) -> int:
        return len(self.m)

    @property
    def l(self) -> int:
        return len(self.gamma)

    def points(self):
        """Columns of m: the exponent vectors of the l monomials."""
        return [tuple(row[j] for row in self.m) for j in range(self.l)]

    def monomials(self):
        """Plain-text monomial list, one term per column."""
        out = []
        for j, pt in enumerate(self.points()):
            xs = "*".join(f"x{i + 1}^{e}" for i, e in enumerate(pt) if e)
            out.append(f"u^{self.k[j]}" + (f"*{xs}" if xs else ""))
        return out

    def to_json(self) -> dict:
        return {"gamma": list(self.gamma), "m": [list(r) for r in self.m],
                "k": list(self.k), "u_factor": str(self.u_factor),
                "monomials": self.monomials()}


def validate_model(model: ToricModel) -> None:
    g = model.gamma
    for row in model.m:
        if sum(a * b for a, b in zip(row, g)) != 0:
            raise InvariantError("m gamma^T != 0")
    if sum(a * b for a, b in zip(model.k, g)) != 1:
        raise InvariantError("gamma . k != 1")
    if model.d != model.l - 2:
        raise InvariantError(f"expected {model.l - 2} rows, got {model.d}")
    if not _smith_ones([list(r) for r in model.m] + [[1] * model.l]):
        raise InvariantError("row span of [m; 1] is not saturated")
    if model.u_factor != gamma_product_constant(model.gamma):
        raise InvariantError("u factor differs from prod gamma_j^gamma_j")


def toric_model(gamma, seed=None) -> ToricModel:
    """Canonical toric model of gamma; with a seed, a random equivalent one."""
    gamma = _check_gamma(gamma)
    l = len(gamma)
    if l < 3:
        raise ValidationError("need at least three gamma entries")
    g, U = _unimodular_reducer(gamma)
    assert g == 1
    k = [U[i][0] for i in range(l)]
    kernel = [[U[i][j] for i in range(l)] for j in range(1, l)]   # rows span ker gamma
    # coordinates c of the all-ones vector in the kernel basis; with c V = e_1
    # the rows of V^-1 kernel form a basis whose first row is 1
    c = _solve_integer(kernel, [1] * l)
    _, V = _unimodular_reducer(c)
    Vinv = Matrix(V).inv()
    basis = [[int(sum(Vinv[j, i] * kernel[i][x] for i in range(l - 1))) for x in range(l)]
             for j in range(l - 1)]
    if basis[0] != [1] * l:
        raise InvariantError("basis change did not isolate the all-ones vector")
    rest = basis[1:]
    # canonical form: reduce the complement modulo 1 and take row HNF
    rest = [[x - row[-1] for x in row] for row in rest]
    m = _hnf_rows(rest)
    L = _hnf_rows(m + [[1] * l])
    k = _reduce_mod_lattice(k, L)
    if seed is not None:
        m, k = _randomize(m, k, l, seed)
    model = ToricModel(tuple(gamma), tuple(tuple(r) for r in m), tuple(k),
                       gamma_product_constant(gamma))
    validate_model(model)
    return model


def _solve_integer(rows, target):
    """Integer coefficients c with sum c_i rows[i] = target (unique; rows independent)."""
    M = Matrix(rows).T
    c = M.gauss_jordan_solve(Matrix(target))[0]
    if c.free_symbols:
        raise InvariantError("kernel basis is not independent")
    out = [Fraction(int(x.p), int(x.q)) for x in c]
    if any(x.denominator != 1 for x in out):
        raise InvariantError("all-ones vector is not in the saturated kernel")
    return [int(x) for x in out]


def _randomize(m, k, l, seed):
    rng = random.Random(seed)
    d = len(m)
    m = [list(r) for r in m]
    for _ in range(3 * d + 3):
        i, j = rng.randrange(d), rng.randrange(d)
        if i != j:
            c = rng.randint(-2, 2)
            m[i] = [a + c * b for a, b in zip(m[i], m[j])]
        else:
            m[i] = [-a for a in m[i]]
    for i in range(d):
        c = rng.randint(-2, 2)
        m[i] = [a + c for a in m[i]]
    lat = m + [[1] * l]
    for row in lat:
        c = rng.randint(-2, 2)
        k = [a + c * b for a, b in zip(k, row)]
    return m, k


@dataclass(frozen=True)
class BcmModel:
    """sum_j y_j = 0 and prod_{gamma_j>0} y_j^gamma_j = u prod_{gamma_j<0} y_j^-gamma_j."""
    gamma: tuple
    linear: tuple        # exponent vectors of the linear equation
    lhs: tuple           # exponents of the left monomial
    rhs: tuple           # exponents of the right monomial
    u_factor: Fraction

    @property
    def degree(self) -> int:
        return sum(self.lhs)


def bcm_model(gamma) -> BcmModel:
    gamma = _check_gamma(gamma)
    l = len(gamma)
    lin = tuple(tuple(int(i == j) for i in range(l)) for j in range(l))
    lhs = tuple(g if g > 0 else 0 for g in gamma)
    rhs = tuple(-g if g < 0 else 0 for g in gamma)
    if sum(lhs) != sum(rhs):
        raise InvariantError("BCM monomials are not of the same degree")
    return BcmModel(tuple(gamma), lin, lhs, rhs, gamma_product_constant(gamma))


# ---------------------------------------------------------------------------
# polytope statistics

def _simplex_volume(pts) -> int:
    base = pts[0]
    rows = [[a - b for a, b in zip(p, base)] for p in pts[1:]]
    return abs(int(Matrix(rows).det()))


def _hull_2d(pts):
    pts = sorted(set(pts))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _hull_volume(pts, d) -> int:
    if d == 1:
        xs = [p[0] for p in pts]
        return max(xs) - min(xs)
    if d == 2:
        h = _hull_2d(pts)
        twice = sum(h[i][0] * h[(i + 1) % len(h)][1] - h[(i + 1) % len(h)][0] * h[i][1]
                    for i in range(len(h)))
        return abs(twice)
    from math import factorial
    from scipy.spatial import ConvexHull
    vol = ConvexHull(np.array(pts, dtype=float)).volume * factorial(d)
    out = round(vol)
    if abs(vol - out) > 1e-6 * max(1, out):
        raise InvariantError("hull volume is not an integer")
    return out


def polytope_stats(model: ToricModel) -> dict:
    """Normalized volumes (standard simplex = 1) and, for d = 2, Pick data."""
    pts = model.points()
    d = model.d
    vols = tuple(_simplex_volume(pts[:j] + pts[j + 1:]) for j in range(model.l))
    pos = sum(v for v, g in zip(vols, model.gamma) if g > 0)
    neg = sum(v for v, g in zip(vols, model.gamma) if g < 0)
    total = _hull_volume(pts, d)
    if not (total == pos == neg):
        raise InvariantError(f"triangulations disagree: hull {total}, +{pos}, -{neg}")
    out = {"vols": vols, "total": total, "chi": (-1) ** (d - 1) * total}
    if d == 2:
        h = _hull_2d(pts)
        boundary = sum(gcd(abs(h[i][0] - h[i - 1][0]), abs(h[i][1] - h[i - 1][1]))
                       for i in range(len(h)))
        interior = (total - boundary + 2) // 2   # Pick: 2A = 2I + B - 2
        out["genus"] = interior
        out["punctures"] = boundary
        if 2 - 2 * interior - boundary != out["chi"]:
            raise InvariantError("Euler characteristic disagrees with Pick count")
    return out


# ---------------------------------------------------------------------------
# splicings

def splicings(gamma) -> list:
    """Unordered splittings of the multiset gamma into two nonempty zero-sum parts."""
    gamma = _check_gamma(gamma)
    cnt = sorted(Counter(gamma).items())
    vals = [v for v, _ in cnt]
    full = tuple(c for _, c in cnt)
    seen = set()
    out = []
    for sub in product(*(range(c + 1) for c in full)):
        if not any(sub) or sub == full:
            continue
        if sum(v * c for v, c in zip(vals, sub)):
            continue
        comp = tuple(f - s for f, s in zip(full, sub))
        key = min(sub, comp)
        if key in seen:
            continue
        seen.add(key)
        a = [v for v, c in zip(vals, key) for _ in range(c)]
        other = max(sub, comp)
        b = [v for v, c in zip(vals, other) for _ in range(c)]
        out.append((tuple(b), tuple(a)))
    return sorted(out)


# ---------------------------------------------------------------------------
# point counting

def _fq_value(F, x: Fraction) -> int:
    p = F.p
    v = x.numerator * pow(x.denominator, -1, p) % p
    return F.from_int(v)


def _sum_codes(F, terms):
    """Elementwise sum of arrays of field codes."""
    if F.f == 1:
        return sum(terms) % F.p
    acc = np.zeros_like(terms[0])
    for t in terms:
        acc = F.add(acc, t)
    return acc


def count_points(gamma, t, q: int, model: ToricModel = None, budget: int = DEFAULT_BUDGET,
                 chunk: int = 1 << 16) -> int:
    """Points of sum_j u^{k_j} x^{m_*j} = 0 on (F_q^x)^d, by enumeration."""
    gamma = _check_gamma(gamma)
    t = Fraction(t)
    p, _ = prime_power(q)
    model = model or toric_model(gamma)
    if any(g % p == 0 for g in gamma) or ord_p(t, p) != 0 or (t != 1 and ord_p(t - 1, p) != 0) \
            or t == 1:
        raise BadPrimeError(f"p = {p} is not good for {list(gamma)} at t = {t}")
    d = model.d
    q1 = q - 1
    if q1 ** d > budget:
        raise ValidationError(f"torus has {q1}^{d} points, over the budget {budget}")
    F = field(q)
    u = model.u_factor * t
    logu = F.element_log(_fq_value(F, u))
    cols = np.array(model.points(), dtype=np.int64)           # l x d
    const = (np.array(model.k, dtype=np.int64) * logu) % q1   # l
    total = q1 ** d
    count = 0
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        logs = np.empty((len(idx), d), dtype=np.int64)
        rem = idx.copy()
        for i in range(d):
            logs[:, i] = rem % q1
            rem //= q1
        expo = (logs @ cols.T + const) % q1                 # N x l
        vals = F.exp[expo]
        s = _sum_codes(F, [vals[:, j] for j in range(vals.shape[1])])
        count += int(np.count_nonzero(s == 0))
    return count


def elliptic_ap(t, p: int) -> int:
    """a_p of y^2 = x(1-x)(x-t) by direct enumeration."""
    t = Fraction(t)
    if p == 2 or ord_p(t, p) != 0 or t == 1 or ord_p(t - 1, p) != 0:
        raise BadPrimeError(f"p = {p} is bad for the Legendre curve at t = {t}")
    tb = t.numerator * pow(t.denominator, -1, p) % p
    x = np.arange(p, dtype=np.int64)
    rhs = x * (1 - x) % p * (x - tb) % p
    sq = np.zeros(p, dtype=np.int64)
    sq[(x * x) % p] += 1
    sq[0] = 1
    sols = np.where(rhs == 0, 1, 2 * (sq[rhs] > 0))
    affine = int(sols.sum())
    return p + 1 - (affine + 1)


# ---------------------------------------------------------------------------
# trinomials

_Y = Symbol("y")
_X = Symbol("x")
_T = Symbol("t")


@dataclass(frozen=True)
class TrinomialModel:
    """Both forms of the zero-dimensional family attached to [-(a+b), a, b]."""
    a: int
    b: int
    t: Fraction
    bcm: tuple      # coefficients in y, constant first
    toric: tuple    # coefficients in x, constant first

    @property
    def gamma(self):
        return (-(self.a + self.b), self.a, self.b)

    def toric_exponents(self):
        """(k1, k2, eps) with toric form b x^(a+b) + (a+b)(eps t)^k1 x^b + a (eps t)^k2."""
        return _toric_exponents(self.a, self.b)

    def root_count(self, q: int, form: str = "bcm") -> int:
        """Roots in F_q; for the BCM form y = 0, 1 are excluded, for the toric form x = 0."""
        coeffs = self.bcm if form == "bcm" else self.toric
        F = field(q)
        codes = np.arange(q, dtype=np.int64)
        acc = np.zeros(q, dtype=np.int64)
        for c in reversed(coeffs):
            acc = F.mul(acc, codes)
            acc = F.add(acc, np.full(q, _fq_value(F, Fraction(c)), dtype=np.int64))
        roots = acc == 0
        roots[0] = False
        if form == "bcm":
            roots[1] = False
        return int(np.count_nonzero(roots))

    def poly_discriminant(self):
        """Exact discriminant of the toric-form polynomial in x (sympy)."""
        return discriminant(Poly(list(reversed(self.toric)), _X))

    def disc_valuation(self, p: int) -> int:
        """ord_p of the discriminant of the etale algebra Q_p[x]/(toric form).

        Tame situation only (p does not divide ab(a+b) or any ramification
        index): each Newton-polygon segment of length L and ramification e
        contributes L - L/e.  When t is a p-adic unit the reduction is
        separable unless t = 1 mod p, where there is one double root and the
        algebra discriminant has the parity of the polynomial one.
        """
        a, b, N = self.a, self.b, self.a + self.b
        if (a * b * N) % p == 0:
            raise BadPrimeError(f"p = {p} divides a b (a+b)")
        t = self.t
        k = ord_p(t, p)
        if k == 0:
            if t == 1:
                raise ValidationError("t = 1 is degenerate")
            dv = ord_p(Fraction(self.poly_discriminant()), p)
            if ord_p(t - 1, p) == 0:
                if dv:
                    raise InvariantError("unexpected discriminant valuation at a good prime")
                return 0
            return dv % 2
        k1, k2, _ = _toric_exponents(a, b)
        pts = [(0, k2 * k), (b, k1 * k), (N, 0)]
        segs = _lower_hull(pts)
        out = 0
        for (x0, y0), (x1, y1) in segs:
            L = x1 - x0
            g = gcd(L, abs(y1 - y0))
            if g % p == 0:
                raise BadPrimeError("residual polynomial is inseparable")
            out += L - g
        return out


def _lower_hull(pts):
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            if (y1 - y0) * (p[0] - x0) >= (p[1] - y0) * (x1 - x0):
                hull.pop()
            else:
                break
        hull.append(p)
    segs = list(zip(hull, hull[1:]))
    for (x0, y0), (x1, y1) in segs:
        mid = [q for q in pts if x0 < q[0] < x1
               and (q[1] - y0) * (x1 - x0) == (y1 - y0) * (q[0] - x0)]
        if mid:
            raise ValidationError("collinear trinomial Newton polygon is not supported")
    return segs


def _toric_exponents(a, b):
    N = a + b
    for k1 in range(a):
        if (1 + N * k1) % a == 0:
            return k1, (1 + N * k1) // a, (-1) ** N
    raise ValidationError("a and b must be coprime")


def trinomial_model(a: int, b: int, t) -> TrinomialModel:
    if a < 1 or b < 1 or gcd(a, b) != 1:
        raise ValidationError("a, b must be coprime positive integers")
    t = Fraction(t)
    N = a + b
    c = Fraction(a ** a * b ** b, N ** N) * t
    # y^a (1-y)^b - c
    bcm = Poly(_Y ** a * (1 - _Y) ** b, _Y).all_coeffs()[::-1]
    bcm = [Fraction(int(x)) for x in bcm]
    bcm[0] -= c
    k1, k2, eps = _toric_exponents(a, b)
    s = eps * t
    toric = [Fraction(0)] * (N + 1)
    toric[N] += b
    toric[b] += N * s ** k1
    toric[0] += a * s ** k2
    return TrinomialModel(a, b, t, tuple(bcm), tuple(toric))
