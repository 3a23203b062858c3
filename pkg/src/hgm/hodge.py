"""Zigzag procedure, Hodge vectors and hypersurface gamma vectors."""

from dataclasses import dataclass
from math import comb
from typing import Optional

from .errors import InvariantError, ValidationError
from .family import FamilyParameter, from_gamma

ALPHA, BETA = "alpha", "beta"


@dataclass(frozen=True)
class ZigzagDiagram:
    points: tuple  # (value, color, height)

    def heights(self, color):
        return [h for _, c, h in self.points if c == color]


@dataclass(frozen=True)
class HodgeData:
    h: tuple
    w: int
    phi0: int
    sigma: Optional[int] = None

    @property
    def n(self):
        return sum(self.h)

    def hodge_numbers(self):
        """Pairs ((p, w-p), h^{p,w-p}) for p = 0..w."""
        return [((p, self.w - p), self.h[p]) for p in range(self.w + 1)]


def zigzag(param: FamilyParameter) -> ZigzagDiagram:
    merged = sorted([(a, ALPHA) for a in param.alpha] + [(b, BETA) for b in param.beta],
                    key=lambda x: x[0])
    height, pts = 0, []
    for v, c in merged:
        pts.append((v, c, height))
        height += 1 if c == ALPHA else -1
    if height != 0:
        raise InvariantError("zigzag does not return to height 0")
    return ZigzagDiagram(tuple(pts))


def _level_counts(heights):
    lo, hi = min(heights), max(heights)
    out = [0] * (hi - lo + 1)
    for x in heights:
        out[x - lo] += 1
    return tuple(out)


def hodge_vector(param: FamilyParameter, sigma: Optional[int] = None) -> HodgeData:
    z = zigzag(param)
    ha = z.heights(ALPHA)
    h = _level_counts(ha)
    if h != h[::-1]:
        raise InvariantError(f"Hodge vector {h} is not palindromic")
    if _level_counts(z.heights(BETA)) != h:
        raise InvariantError("alpha and beta level counts differ")
    w = len(h) - 1
    phi0 = min(x for _, _, x in z.points)
    return HodgeData(h=h, w=w, phi0=phi0, sigma=sigma)


def adjust_at_one(h, w: int) -> tuple:
    """Hodge vector of the t = 1 specialization from the generic one."""
    h = list(h)
    if w % 2 == 0:
        mid = w // 2
        if h[mid] < 1:
            raise ValidationError("central Hodge number is 0; cannot decrement")
        h[mid] -= 1
    else:
        a, b = (w - 1) // 2, (w + 1) // 2
        if h[a] < 1 or h[b] < 1:
            raise ValidationError("central Hodge numbers are 0; cannot decrement")
        h[a] -= 1
        h[b] -= 1
    return tuple(h)


def hodge_vector_at_one(param: FamilyParameter) -> HodgeData:
    hd = hodge_vector(param)
    return HodgeData(h=adjust_at_one(hd.h, hd.w), w=hd.w, phi0=hd.phi0)


def hypersurface_gamma(delta: int, kappa: int) -> tuple:
    """Gamma vector of the dwork-type family of degree-delta hypersurfaces of dimension kappa."""
    if delta < 3:
        raise ValidationError("delta must be at least 3")
    if kappa < 1:
        raise ValidationError("kappa must be at least 1")
    e = delta - 1
    g = [(-e) ** i for i in range(kappa + 1)]
    g.append((-e) ** (kappa + 1) - 1)
    last, rem = divmod((-e) ** (kappa + 2) + e, e + 1)
    assert rem == 0
    g.append(last)
    return tuple(g)


def betti_primitive(delta: int, kappa: int) -> dict:
    e = delta - 1
    b, rem = divmod(e ** (kappa + 2) + (-1) ** kappa * e, delta)
    assert rem == 0
    return {"b": b, "h_top": comb(delta - 1, kappa + 1)}


def hypersurface_param(delta: int, kappa: int) -> FamilyParameter:
    return from_gamma(hypersurface_gamma(delta, kappa))
