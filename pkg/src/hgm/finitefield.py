"""Table-driven arithmetic in F_q for the small q used by the oracles.

Elements are integer codes c = sum c_i p^i (coefficients of the polynomial
basis over F_p).  The generator is the class of x modulo a primitive
polynomial, so log/exp tables come from repeated multiplication by x.
"""

from functools import lru_cache
from itertools import product

import numpy as np
from sympy import primitive_root

from .util import prime_power


class FiniteField:
    def __init__(self, q: int):
        p, f = prime_power(q)
        self.p, self.f, self.q = p, f, q
        if f == 1:
            g = int(primitive_root(p))
            exp = [1]
            for _ in range(q - 2):
                exp.append(exp[-1] * g % p)
            self.modulus = None
        else:
            self.modulus, exp = _primitive_poly_tables(p, f)
        self.exp = np.array(exp, dtype=np.int64)           # k -> g^k
        log = np.full(q, -1, dtype=np.int64)
        log[self.exp] = np.arange(q - 1)
        self.log = log                                        # code -> k, -1 for zero
        self.digits = np.array([[(c // p ** i) % p for i in range(f)] for c in range(q)],
                               dtype=np.int64)
        self.weights = np.array([p ** i for i in range(f)], dtype=np.int64)
        tr = np.zeros(q, dtype=np.int64)
        for k in range(q - 1):
            s = np.zeros(f, dtype=np.int64)
            for i in range(f):
                s = (s + self.digits[self.exp[(k * p ** i) % (q - 1)]]) % p
            assert not s[1:].any(), "trace must lie in the prime field"
            tr[self.exp[k]] = s[0]
        self.trace_table = tr                                 # code -> Tr(code) in F_p

    def add(self, a, b):
        if self.f == 1:
            return (a + b) % self.p
        da = self.digits[a]
        db = self.digits[b]
        return ((da + db) % self.p) @ self.weights

    def mul(self, a, b):
        a = np.asarray(a)
        b = np.asarray(b)
        out = self.exp[(self.log[a] + self.log[b]) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, out)

    def from_int(self, x: int) -> int:
        """Embed an integer (its residue mod p) into F_q."""
        return x % self.p

    def element_log(self, x: int) -> int:
        v = int(self.log[x])
        if v < 0:
            raise ZeroDivisionError("log of zero")
        return v


def _polymulx_mod(c, mod, p):
    # multiply coefficient list c (low first, length f) by x modulo monic mod
    f = len(c)
    top = c[-1]
    out = [0] + c[:-1]
    if top:
        out = [(o - top * m) % p for o, m in zip(out, mod[:f])]
    return out


def _primitive_poly_tables(p, f):
    q = p ** f
    for tail in product(range(p), repeat=f):
        if tail[0] == 0:
            continue
        mod = list(tail) + [1]  # low first, monic
        c = [1] + [0] * (f - 1)
        exp = []
        ok = True
        for k in range(q - 1):
            code = sum(ci * p ** i for i, ci in enumerate(c))
            if k > 0 and code == 1:
                ok = False
                break
            exp.append(code)
            c = _polymulx_mod(c, mod, p)
        if ok and sum(ci * p ** i for i, ci in enumerate(c)) == 1:
            return mod, exp
    raise RuntimeError(f"no primitive polynomial found for {q}")


@lru_cache(maxsize=64)
def field(q: int) -> FiniteField:
    return FiniteField(q)
