"""Census of family parameters by Hodge vector, MUM counts and Sato-Tate samples.

A parameter of rank n is an ordered pair (A, B) of disjoint multisets of
cyclotomic indices with sum of totients n on each side, whose gamma vector
has gcd 1.  Raw mode counts ordered pairs; mod-negation mode identifies
gamma with -gamma, i.e. (A, B) with (B, A).
"""

import json
import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .arith import prime_type, trace
from .errors import ValidationError
from .family import psi_exponents
from .hodge import hodge_vector, hodge_vector_at_one
from .lseries import frobenius_poly, _primes_upto
from .util import mobius, prime_factors, totient, divisors

__all__ = [
    "CensusRecord", "census", "census_total", "mum_counts", "mum_enumerate",
    "sato_tate_samples", "hodge_key",
]

RAW, MOD_NEGATION = "raw", "mod-negation"


def hodge_key(h) -> str:
    return ",".join(map(str, h))


@dataclass
class CensusRecord:
    n: int
    mode: str
    counts: dict = field(default_factory=dict)   # hodge key -> count
    partial: bool = False

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_json(self) -> dict:
        return {"n": self.n, "mode": self.mode, "partial": self.partial,
                "total": self.total, "counts": dict(sorted(self.counts.items()))}


# ---------------------------------------------------------------------------
# multisets of cyclotomic indices

@lru_cache(maxsize=None)
def indices_upto(n: int) -> tuple:
    """All d with phi(d) <= n (phi(d) >= sqrt(d/2) bounds the search)."""
    return tuple(d for d in range(1, 2 * n * n + 3) if totient(d) <= n)


def multisets(n: int, ds) -> list:
    """Multisets (sorted tuples) from ds with sum of totients exactly n."""
    ds = sorted(ds, key=lambda d: (totient(d), d))
    out = []

    def rec(i, left, cur):
        if left == 0:
            out.append(tuple(sorted(cur)))
            return
        for j in range(i, len(ds)):
            ph = totient(ds[j])
            if ph > left:
                break
            cur.append(ds[j])
            rec(j, left - ph, cur)
            cur.pop()

    rec(0, n, [])
    return sorted(out)


def _roots(ms) -> np.ndarray:
    r = [j / d for d in ms for j in range(1, d + 1) if math.gcd(j, d) == 1]
    return np.sort(np.array(r))


def _prepare(n):
    ds = indices_upto(n)
    index = {d: i for i, d in enumerate(ds)}
    ms = multisets(n, ds)
    masks = np.array([sum(1 << index[d] for d in set(m)) for m in ms], dtype=object)
    roots = np.array([_roots(m) for m in ms])
    # gcd filter: (A, B) is imprimitive by ell iff E(A)_m = E(B)_m whenever ell does not divide m
    ells = prime_factors(n)
    keys = []
    for ell in ells:
        table, ids = {}, []
        for m in ms:
            e = psi_exponents(m, ())
            k = tuple(sorted((a, c) for a, c in e.items() if a % ell and c))
            ids.append(table.setdefault(k, len(table)))
        keys.append(np.array(ids))
    return ms, masks, roots, keys


def _worker(args):
    n, lo, hi, mode = args
    ms, masks, roots, keys = _prepare(n)
    m_int = np.array([int(x) for x in masks], dtype=object)
    out = Counter()
    N = len(ms)
    pos = np.arange(n)
    for a in range(lo, hi):
        ok = np.array([(int(m_int[a]) & int(mb)) == 0 for mb in m_int])
        if mode == MOD_NEGATION:
            ok[: a + 1] = False
        for kk in keys:
            ok &= kk != kk[a]
        idx = np.nonzero(ok)[0]
        if not len(idx):
            continue
        alpha = roots[a]
        betas = roots[idx]                                   # k x n
        below = (betas[:, :, None] < alpha[None, None, :]).sum(axis=1)
        heights = pos[None, :] - below                       # k x n
        heights -= heights.min(axis=1, keepdims=True)
        width = int(heights.max()) + 1
        counts = np.zeros((len(idx), width), dtype=np.int64)
        for j in range(width):
            counts[:, j] = (heights == j).sum(axis=1)
        uniq, mult = np.unique(counts, axis=0, return_counts=True)
        for row, c in zip(uniq, mult):
            # trailing zeros come from padding; interior zeros are real levels
            top = max(i for i, x in enumerate(row) if x)
            h = tuple(int(x) for x in row[: top + 1])
            out[hodge_key(h)] += int(c)
    return out


def census(n: int, mode: str = RAW, workers: int = 1, budget: int = None,
           checkpoint_dir: str = None) -> CensusRecord:
    """Hodge-vector census of all parameters of rank n.

    Work is partitioned by the numerator multiset A; partial maps are merged
    in sorted key order so the result does not depend on the partition.
    With checkpoint_dir, each finished chunk is saved there and reused by a
    later run with the same n, mode and chunking.
    """
    if n < 1:
        raise ValidationError("n must be positive")
    if mode not in (RAW, MOD_NEGATION):
        raise ValidationError(f"unknown census mode {mode!r}")
    N = len(multisets(n, indices_upto(n)))
    partial = False
    hi = N
    if budget is not None and N * N > budget:
        hi = max(1, budget // N)
        partial = True
    chunks = max(1, workers * 4)
    if checkpoint_dir:
        chunks = max(chunks, min(hi, 256))
    bounds = [(lo * hi // chunks, (lo + 1) * hi // chunks) for lo in range(chunks)]
    bounds = [(a, b) for a, b in bounds if b > a]
    args = [(n, a, b, mode) for a, b in bounds]
    done = {}
    if checkpoint_dir:
        ck = os.path.join(checkpoint_dir, f"census-{n}-{mode}")
        os.makedirs(ck, exist_ok=True)
        for x in args:
            path = os.path.join(ck, f"{x[1]}-{x[2]}.json")
            if os.path.exists(path):
                with open(path) as fh:
                    done[x] = Counter(json.load(fh))
    todo = [x for x in args if x not in done]

    def keep(x, part):
        if checkpoint_dir:
            path = os.path.join(ck, f"{x[1]}-{x[2]}.json")
            with open(path + ".tmp", "w") as fh:
                json.dump(dict(part), fh)
            os.replace(path + ".tmp", path)
        done[x] = part

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            for x, part in zip(todo, ex.map(_worker, todo)):
                keep(x, part)
    else:
        for x in todo:
            keep(x, _worker(x))
    parts = [done[x] for x in args]
    total = Counter()
    for part in parts:
        for k in sorted(part):
            total[k] += part[k]
    rec = CensusRecord(n, mode, dict(sorted(total.items())), partial)
    return rec


def census_total(n: int) -> int:
    """Number of rank-n parameters (raw mode) from a generating function.

    T(n) counts disjoint pairs: the coefficient of x^n y^n in
    prod_d (1/(1-x^phi(d)) + 1/(1-y^phi(d)) - 1); Moebius inversion over
    T(n) = sum_{g | n} P(n/g) removes the pairs with gcd > 1.
    """
    def T(m):
        poly = np.zeros((m + 1, m + 1), dtype=object)
        poly[0, 0] = 1
        for d in indices_upto(m):
            ph = totient(d)
            new = poly.copy()
            for j in range(1, m // ph + 1):
                s = j * ph
                new[s:, :] += poly[: m + 1 - s, :]
                new[:, s:] += poly[:, : m + 1 - s]
            poly = new
        return int(poly[m, m])

    return sum(mobius(g) * T(n // g) for g in divisors(n))


# ---------------------------------------------------------------------------
# MUM counts

def mum_counts(n_max: int) -> list:
    """Coefficients c_0..c_{n_max} of prod_{k>=2} 1/(1 - x^phi(k))."""
    c = [0] * (n_max + 1)
    c[0] = 1
    for k in indices_upto(max(n_max, 1)):
        if k < 2:
            continue
        ph = totient(k)
        if ph > n_max:
            continue
        for i in range(ph, n_max + 1):
            c[i] += c[i - ph]
    return c


def mum_enumerate(n: int) -> list:
    """MUM parameters of rank n: numerators A (no Phi_1) over the denominator Phi_1^n."""
    if n == 0:
        return [()]
    return [m for m in multisets(n, indices_upto(n)) if 1 not in m]


# ---------------------------------------------------------------------------
# Sato-Tate samples

def sato_tate_samples(param, t, p_max: int, fixtures=None, out_dir=None, cache=None) -> list:
    """(p, a_{p,1} / p^{w/2}) for good p <= p_max; optional data and histogram files."""
    t = Fraction(t)
    hd = hodge_vector_at_one(param) if t == 1 else hodge_vector(param)
    n = param.n
    out = []
    for p in _primes_upto(p_max):
        if prime_type(param, t, p) != "good":
            continue
        if t == 1:
            a1 = frobenius_poly(param, t, p, cache).coeffs
            a1 = a1[1] if len(a1) > 1 else 0
        else:
            a1 = -trace(param, t, p)
        out.append((p, a1 / p ** (hd.w / 2)))
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "satotate_samples.tsv"), "w") as fh:
            fh.write("p\tsample\n")
            for p, x in out:
                fh.write(f"{p}\t{x:.12f}\n")
        edges = np.linspace(-n, n, 20 * n + 1)
        hist, _ = np.histogram([x for _, x in out], bins=edges)
        with open(os.path.join(out_dir, "satotate_histogram.tsv"), "w") as fh:
            fh.write("lo\thi\tcount\n")
            for lo, hi, c in zip(edges[:-1], edges[1:], hist):
                fh.write(f"{lo:.1f}\t{hi:.1f}\t{c}\n")
    return out


def iter_parameters(n: int):
    """All rank-n parameters as (alpha_side, beta_side) pairs, in a fixed order."""
    ms, masks, _, keys = _prepare(n)
    m_int = [int(x) for x in masks]
    for a in range(len(ms)):
        for b in range(len(ms)):
            if m_int[a] & m_int[b]:
                continue
            if any(kk[a] == kk[b] for kk in keys):
                continue
            yield ms[a], ms[b]
