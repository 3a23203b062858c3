"""Family parameters: gamma vectors, cyclotomic pairs and derived invariants.

A family parameter is q = q_inf / q_0 with both sides products of
cyclotomic polynomials.  The alpha side (numerator, q_inf) is fed by the
negative entries of the gamma vector, the beta side by the positive ones:

    [-2,-2,1,1,1,1]  <->  Psi_2^2 / Psi_1^4  =  Phi_2^2 / Phi_1^2.

Alpha and beta are stored as exact rationals in (0, 1], so Phi_1
contributes the value 1.
"""

import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd

from .errors import DegenerateError, ParseError, ValidationError
from .util import cyclotomic_product, divisors, lcm, mobius, totient

__all__ = [
    "FamilyParameter", "CyclotomicPair", "parse_family", "from_gamma",
    "from_cyclotomic", "to_cyclotomic", "to_gamma", "stats",
    "series_coefficients", "twist_index", "gamma_string", "roots_of",
]


@dataclass(frozen=True)
class CyclotomicPair:
    alpha_side: tuple  # Phi_d subscripts of q_inf, sorted
    beta_side: tuple   # Phi_d subscripts of q_0, sorted

    def __str__(self):
        b = ",".join(map(str, self.beta_side))
        a = ",".join(map(str, self.alpha_side))
        return f"[{b}];[{a}]"


@dataclass(frozen=True)
class FamilyParameter:
    gamma: tuple
    cyc: CyclotomicPair
    alpha: tuple = field(repr=False)
    beta: tuple = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.alpha)

    @property
    def l(self) -> int:
        return len(self.gamma)

    @property
    def kappa(self) -> int:
        return self.l - 3

    @property
    def vol(self) -> Fraction:
        return Fraction(sum(abs(g) for g in self.gamma), 2)

    @property
    def m(self) -> int:
        return lcm(*self.cyc.alpha_side, *self.cyc.beta_side)

    @property
    def r(self) -> int:
        return sum(1 for g in self.gamma if g < 0)

    @property
    def q_at_zero(self) -> int:
        ones = self.cyc.alpha_side.count(1) + self.cyc.beta_side.count(1)
        return -1 if ones % 2 else 1

    @property
    def q_inf(self) -> list:
        return cyclotomic_product(self.cyc.alpha_side)

    @property
    def q_0(self) -> list:
        return cyclotomic_product(self.cyc.beta_side)

    def key(self) -> str:
        return gamma_string(self.gamma)

    def __str__(self):
        return self.key()


def gamma_string(gamma) -> str:
    return "[" + ",".join(str(g) for g in gamma) + "]"


def roots_of(ds) -> list:
    """Sorted roots j/d in (0,1] of prod Phi_d, with multiplicity."""
    out = []
    for d in ds:
        out.extend(Fraction(j, d) for j in range(1, d + 1) if gcd(j, d) == 1)
    return sorted(out)


def _check_gamma(gamma) -> tuple:
    gamma = [int(g) for g in gamma]
    if not gamma:
        raise ValidationError("empty gamma vector")
    if any(g == 0 for g in gamma):
        raise ValidationError("gamma entries must be nonzero")
    if sum(gamma) != 0:
        raise ValidationError(f"gamma entries must sum to 0 (sum is {sum(gamma)})")
    # Psi_m / Psi_m cancels outright
    c = Counter(gamma)
    for g in [g for g in c if g > 0]:
        k = min(c[g], c[-g])
        c[g] -= k
        c[-g] -= k
    gamma = tuple(sorted(c.elements()))
    if not gamma:
        raise DegenerateError("parameter is degenerate (rank 0 after reduction)")
    if reduce(gcd, (abs(g) for g in gamma)) != 1:
        raise ValidationError("gcd of gamma entries must be 1")
    return gamma


def _check_pair(alpha_side, beta_side) -> CyclotomicPair:
    a = tuple(sorted(int(d) for d in alpha_side))
    b = tuple(sorted(int(d) for d in beta_side))
    if not a or not b:
        raise ValidationError("both cyclotomic sides must be nonempty")
    if any(d < 1 for d in a + b):
        raise ValidationError("cyclotomic subscripts must be positive")
    common = set(a) & set(b)
    if common:
        raise ValidationError(f"cyclotomic multisets not disjoint: {sorted(common)}")
    na = sum(totient(d) for d in a)
    nb = sum(totient(d) for d in b)
    if na != nb:
        raise ValidationError(f"degree mismatch: alpha side {na}, beta side {nb}")
    return CyclotomicPair(a, b)


def to_cyclotomic(gamma) -> CyclotomicPair:
    """Expand Psi_m = prod_{d|m} Phi_d and cancel."""
    net = Counter()
    for g in gamma:
        for d in divisors(abs(g)):
            net[d] += 1 if g < 0 else -1
    a, b = [], []
    for d, c in sorted(net.items()):
        if c > 0:
            a += [d] * c
        elif c < 0:
            b += [d] * (-c)
    if not a and not b:
        raise DegenerateError("parameter is degenerate (rank 0 after reduction)")
    return CyclotomicPair(tuple(a), tuple(b))


def psi_exponents(alpha_side, beta_side) -> Counter:
    """Exponent E_m of Psi_m in prod Phi^alpha / prod Phi^beta (Moebius)."""
    net = Counter()
    for d in alpha_side:
        net[d] += 1
    for d in beta_side:
        net[d] -= 1
    psi = Counter()
    for d, c in net.items():
        if c:
            for e in divisors(d):
                mu = mobius(d // e)
                if mu:
                    psi[e] += c * mu
    return psi


def unreduce(alpha_side, beta_side) -> tuple:
    """Gamma list for an arbitrary (possibly unbalanced) pair of Phi-multisets."""
    out = []
    for m, c in psi_exponents(alpha_side, beta_side).items():
        if c > 0:
            out += [-m] * c
        elif c < 0:
            out += [m] * (-c)
    return tuple(sorted(out))


def to_gamma(cyc: CyclotomicPair) -> tuple:
    return unreduce(cyc.alpha_side, cyc.beta_side)


def _build(gamma, cyc) -> FamilyParameter:
    return FamilyParameter(
        gamma=gamma, cyc=cyc,
        alpha=tuple(roots_of(cyc.alpha_side)),
        beta=tuple(roots_of(cyc.beta_side)),
    )


def from_gamma(gamma) -> FamilyParameter:
    gamma = _check_gamma(gamma)
    cyc = to_cyclotomic(gamma)
    if not cyc.alpha_side or not cyc.beta_side:
        raise DegenerateError("one cyclotomic side is empty")
    return _build(gamma, cyc)


def from_cyclotomic(alpha_side, beta_side) -> FamilyParameter:
    cyc = _check_pair(alpha_side, beta_side)
    gamma = _check_gamma(to_gamma(cyc))
    return _build(gamma, cyc)


_INT_LIST = r"\[\s*(-?\d+(?:\s*,\s*-?\d+)*)?\s*\]"


def _ints(body):
    return [int(x) for x in body.split(",")] if body else []


def parse_family(text: str) -> FamilyParameter:
    """Parse "[g1,g2,...]" (gamma form) or "[d..];[e..]" (beta side; alpha side).

    >>> parse_family("[1,1];[2,2]").gamma
    (-2, -2, 1, 1, 1, 1)
    """
    s = text.strip()
    m = re.fullmatch(_INT_LIST + r"\s*;\s*" + _INT_LIST, s)
    if m:
        beta_side, alpha_side = _ints(m.group(1)), _ints(m.group(2))
        if not beta_side or not alpha_side:
            raise ParseError("empty side in cyclotomic form")
        return from_cyclotomic(alpha_side, beta_side)
    m = re.fullmatch(_INT_LIST, s)
    if m:
        g = _ints(m.group(1))
        if not g:
            raise ParseError("empty gamma vector")
        return from_gamma(g)
    raise ParseError(f"cannot parse family parameter {text!r}")


# T -> -T on cyclotomic subscripts
def twist_index(d: int) -> int:
    if d == 1:
        return 2
    if d == 2:
        return 1
    if d % 4 == 2:
        return d // 2
    if d % 2:
        return 2 * d
    return d


def twist(param: FamilyParameter) -> FamilyParameter:
    """The parameter q(-T) (quadratic twist)."""
    return from_cyclotomic([twist_index(d) for d in param.cyc.alpha_side],
                           [twist_index(d) for d in param.cyc.beta_side])


def is_intertwined(param: FamilyParameter) -> bool:
    merged = sorted([(a, 0) for a in param.alpha] + [(b, 1) for b in param.beta])
    return all(merged[i][1] != merged[i + 1][1] for i in range(len(merged) - 1))


def stats(param: FamilyParameter) -> dict:
    twisted = sorted(twist_index(d) for d in param.cyc.alpha_side)
    return {
        "n": param.n,
        "l": param.l,
        "kappa": param.kappa,
        "vol": param.vol,
        "m": param.m,
        "r": param.r,
        "q_at_zero": param.q_at_zero,
        "is_reflexive": tuple(twisted) == param.cyc.beta_side,
        "is_mum": param.cyc.beta_side == (1,) * param.n,
        "is_intertwined": is_intertwined(param),
    }


def series_coefficients(param: FamilyParameter, K: int) -> list:
    """A_k = prod (alpha_i)_k / prod (beta_i)_k for k = 0..K."""
    out = [Fraction(1)]
    for k in range(K):
        c = out[-1]
        for a in param.alpha:
            c *= a + k
        for b in param.beta:
            c /= b + k
        out.append(c)
    return out
