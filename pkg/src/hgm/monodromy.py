"""Levelt matrices and the rank computations behind tame conductors.

Matrices are lists of rows with Fraction (or int) entries.  All ranks are
computed by fraction-free elimination; nothing here uses floating point.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvariantError, ValidationError
from .family import FamilyParameter
from .hodge import hodge_vector
from .util import totient

ORTHOGONAL, SYMPLECTIC = "orthogonal", "symplectic"


def identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def matmul(a, b):
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matsub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def matpow(a, k):
    out = identity(len(a))
    while k:
        if k & 1:
            out = matmul(out, a)
        a = matmul(a, a)
        k >>= 1
    return out


def companion(coeffs):
    """Companion matrix of the monic polynomial with coefficients constant-first.

    Ones on the subdiagonal, negated coefficients in the last column.
    """
    n = len(coeffs) - 1
    if coeffs[-1] != 1:
        raise ValueError("polynomial must be monic")
    c = [[Fraction(0)] * n for _ in range(n)]
    for i in range(1, n):
        c[i][i - 1] = Fraction(1)
    for i in range(n):
        c[i][n - 1] = Fraction(-coeffs[i])
    return c


def _integerize(a):
    den = 1
    for row in a:
        for x in row:
            d = Fraction(x).denominator
            den = den * d // _gcd(den, d)
    return [[int(Fraction(x) * den) for x in row] for row in a]


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def rank(a) -> int:
    """Exact rank by Bareiss elimination over the integers."""
    return _rank_int(_integerize(a))


def _rank_int(m) -> int:
    m = [list(row) for row in m]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    r, prev = 0, 1
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, rows):
            for j in range(c + 1, cols):
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        r += 1
        if r == rows:
            break
    return r


def det(a) -> Fraction:
    """Exact determinant by Bareiss elimination."""
    n = len(a)
    den = 1
    if all(isinstance(x, int) for row in a for x in row):
        m = [list(row) for row in a]
    else:
        for row in a:
            for x in row:
                d = Fraction(x).denominator
                den = den * d // _gcd(den, d)
        m = [[int(Fraction(x) * den) for x in row] for row in a]
    sign, prev = 1, 1
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            sign = -sign
        for i in range(c + 1, n):
            for j in range(c + 1, n):
                m[i][j] = (m[c][c] * m[i][j] - m[i][c] * m[c][j]) // prev
            m[i][c] = 0
        prev = m[c][c]
    return Fraction(sign * m[n - 1][n - 1], den ** n)


def inverse(a):
    """Exact inverse by Gauss-Jordan over Fractions."""
    n = len(a)
    m = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(a)]
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c]), None)
        if piv is None:
            raise ValueError("singular matrix")
        m[c], m[piv] = m[piv], m[c]
        inv = 1 / m[c][c]
        m[c] = [x * inv for x in m[c]]
        for i in range(n):
            if i != c and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return [row[n:] for row in m]


def charpoly(a) -> list:
    """Characteristic polynomial det(T - a), constant first (Faddeev-LeVerrier)."""
    n = len(a)
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    mk = [[Fraction(0)] * n for _ in range(n)]
    ident = identity(n)
    for k in range(1, n + 1):
        mk = matmul(a, mk)
        c_prev = coeffs[n - k + 1]
        mk = [[x + c_prev * y for x, y in zip(r1, r2)] for r1, r2 in zip(mk, ident)]
        am = matmul(a, mk)
        coeffs[n - k] = -sum(am[i][i] for i in range(n)) / k
    return coeffs


@dataclass(frozen=True)
class LeveltTriple:
    h_inf: list
    h_1: list
    h_0: list


def levelt(param: FamilyParameter) -> LeveltTriple:
    """h_inf = companion(q_inf), h_0 = companion(q_0)^-1, h_1 = h_inf^-1 h_0^-1.

    With both companion matrices in the same basis they differ only in the
    last column, which makes h_1 - I of rank one.
    """
    a = companion(param.q_inf)
    b = companion(param.q_0)
    h_inf = a
    h_0 = inverse(b)
    h_1 = matmul(inverse(a), b)
    return LeveltTriple(h_inf, h_1, h_0)


def _companion_int(coeffs) -> np.ndarray:
    n = len(coeffs) - 1
    c = np.zeros((n, n), dtype=np.int64)
    c[np.arange(1, n), np.arange(n - 1)] = 1
    c[:, n - 1] = -np.asarray(coeffs[:n], dtype=np.int64)
    return c


def _companion_inverse_int(coeffs) -> np.ndarray:
    """Inverse of the companion matrix when the constant term is +-1.

    C^-1 e_j = e_{j-1} for j >= 1 and C^-1 e_0 = -(sum_{i=1}^n c_i e_{i-1}) / c_0.
    """
    n = len(coeffs) - 1
    c0 = coeffs[0]
    if c0 not in (1, -1):
        raise ValidationError("constant term must be a unit")
    inv = np.zeros((n, n), dtype=np.int64)
    inv[np.arange(n - 1), np.arange(1, n)] = 1
    inv[:, 0] = -c0 * np.asarray(coeffs[1:], dtype=np.int64)
    return inv


def levelt_int(param: FamilyParameter):
    """(h_inf, h_1, h_0) as int64 arrays, same normalization as levelt()."""
    a = _companion_int(param.q_inf)
    b = _companion_int(param.q_0)
    return a, _companion_inverse_int(param.q_inf) @ b, _companion_inverse_int(param.q_0)


_GUARD = 1 << 40


def _charpoly_int(a: np.ndarray) -> list:
    """Faddeev-LeVerrier with exact integer division, constant first."""
    n = a.shape[0]
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    m = np.zeros_like(a)
    ident = np.eye(n, dtype=np.int64)
    for k in range(1, n + 1):
        m = a @ m + coeffs[n - k + 1] * ident
        am = a @ m
        tr = int(np.trace(am))
        if tr % k:
            raise InvariantError("non-integral characteristic polynomial")
        coeffs[n - k] = -tr // k
        if np.abs(m).max(initial=0) > _GUARD:
            raise OverflowError("entries too large for the integer path")
    return coeffs


def _is_rank_one(m: np.ndarray) -> bool:
    nz = np.argwhere(m)
    if not len(nz):
        return False
    i, j = nz[0]
    return bool(np.array_equal(m * m[i, j], np.outer(m[:, j], m[i, :])))


def check_levelt_fast(param: FamilyParameter) -> None:
    """Integer version of check_levelt for exhaustive sweeps."""
    n = param.n
    h_inf, h_1, h_0 = levelt_int(param)
    ident = np.eye(n, dtype=np.int64)
    if not np.array_equal(h_inf @ h_1 @ h_0, ident):
        raise InvariantError("h_inf h_1 h_0 != I")
    if not _is_rank_one(h_1 - ident):
        raise InvariantError("rank(h_1 - I) != 1")
    d = np.linalg.det(h_1.astype(float))
    if abs(d - round(d)) > 1e-6 or round(d) != param.q_at_zero:
        raise InvariantError("det(h_1) != q(0)")
    if _charpoly_int(h_inf) != list(param.q_inf):
        raise InvariantError("charpoly(h_inf) != q_inf")
    h_0_inv = _companion_int(param.q_0)
    if not np.array_equal(h_0 @ h_0_inv, ident):
        raise InvariantError("h_0 is not the inverse of companion(q_0)")
    if _charpoly_int(h_0_inv) != list(param.q_0):
        raise InvariantError("charpoly(h_0^-1) != q_0")


def check_levelt(param: FamilyParameter, t: LeveltTriple) -> None:
    n = param.n
    prod = matmul(matmul(t.h_inf, t.h_1), t.h_0)
    if prod != identity(n):
        raise InvariantError("h_inf h_1 h_0 != I")
    if rank(matsub(t.h_1, identity(n))) != 1:
        raise InvariantError("rank(h_1 - I) != 1")
    if det(t.h_1) != param.q_at_zero:
        raise InvariantError("det(h_1) != q(0)")
    if charpoly(t.h_inf) != [Fraction(c) for c in param.q_inf]:
        raise InvariantError("charpoly(h_inf) != q_inf")
    if charpoly(inverse(t.h_0)) != [Fraction(c) for c in param.q_0]:
        raise InvariantError("charpoly(h_0^-1) != q_0")


def classify(param: FamilyParameter) -> str:
    d = det(levelt_int(param)[1].tolist())
    kind = SYMPLECTIC if d == 1 else ORTHOGONAL
    w = hodge_vector(param).w
    if (w % 2 == 1) != (kind == SYMPLECTIC):
        raise InvariantError(f"weight {w} parity disagrees with det(h_1) = {d}")
    return kind


def _cusp_side(param, cusp):
    if cusp in ("zero", "0", 0):
        return param.cyc.beta_side, param.q_0
    if cusp in ("infinity", "inf"):
        return param.cyc.alpha_side, param.q_inf
    raise ValidationError(f"unknown cusp {cusp!r}")


def drop_rank_matrix(param: FamilyParameter, cusp, k: int) -> int:
    if k == 0:
        raise ValidationError("k must be nonzero")
    _, poly = _cusp_side(param, cusp)
    c = companion(poly)
    # rank(h^k - I) is invariant under h -> h^-1, so the companion matrix suffices
    return rank(matsub(matpow(c, abs(k)), identity(param.n)))


def drop_rank_profile(param: FamilyParameter, cusp, ks=None) -> list:
    """rank(h^k - I) for each k in ks (default 1..m) by the matrix path.

    Column j of companion(P)^k is x^(k+j) mod P, so all powers come from
    one run of residues; each rank is then an exact integer elimination.
    """
    _, poly = _cusp_side(param, cusp)
    n = param.n
    ks = list(range(1, param.m + 1)) if ks is None else [abs(k) for k in ks]
    top = max(ks, default=0) + n
    res = [[int(i == 0) for i in range(n)]]
    for _ in range(top):
        r = res[-1]
        lead = r[-1]
        nxt = [0] + r[:-1]
        res.append([a - lead * c for a, c in zip(nxt, poly)])
    out = []
    for k in ks:
        cols = res[k:k + n]
        m = [[cols[j][i] - (i == j) for j in range(n)] for i in range(n)]
        out.append(_rank_int(m))
    return out


def drop_rank_eigen(param: FamilyParameter, cusp, k: int) -> int:
    """n minus the number of distinct eigenvalues with order dividing |k|.

    Companion matrices have one Jordan block per eigenvalue, so each distinct
    root of unity fixed by h^k contributes a one-dimensional kernel.
    """
    if k == 0:
        raise ValidationError("k must be nonzero")
    side, _ = _cusp_side(param, cusp)
    fixed = sum(totient(d) for d in set(side) if abs(k) % d == 0)
    return param.n - fixed


def drop_rank(param: FamilyParameter, cusp, k: int) -> int:
    a = drop_rank_matrix(param, cusp, k)
    b = drop_rank_eigen(param, cusp, k)
    if a != b:
        raise InvariantError(f"drop_rank paths disagree: matrix {a}, eigenvalue {b}")
    return a
