"""Piecewise-linear scheduling costs and their sublevel sets."""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable

from .errors import InputError
from .pwl import ZERO, PiecewiseLinear
from .rational import INF, Extended, fmt, is_inf, q, qx


@dataclass(frozen=True)
class IntervalUnion:
    """Sorted, disjoint, closed intervals ``[lo, hi]`` (``lo <= hi``)."""

    intervals: tuple = ()

    def __post_init__(self):
        ivs = tuple((qx(a), qx(b)) for a, b in self.intervals)
        for a, b in ivs:
            if not a <= b:
                raise InputError(f"empty interval [{a}, {b}]")
        for (_, b), (a2, _) in zip(ivs, ivs[1:]):
            if not b < a2:
                raise InputError("intervals must be sorted and disjoint")
        object.__setattr__(self, "intervals", ivs)

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    @property
    def is_bounded(self) -> bool:
        return not any(is_inf(a) or is_inf(b) for a, b in self.intervals)

    def measure(self) -> Extended:
        return sum((b - a for a, b in self.intervals), ZERO)

    def shift(self, c) -> "IntervalUnion":
        c = q(c)
        return IntervalUnion(tuple((a + c, b + c) for a, b in self.intervals))

    def __contains__(self, x) -> bool:
        return any(a <= x <= b for a, b in self.intervals)

    def issubset(self, other: "IntervalUnion") -> bool:
        return all(any(c <= a and b <= d for c, d in other.intervals) for a, b in self.intervals)

    def to_json(self) -> list:
        return [[fmt(a), fmt(b)] for a, b in self.intervals]


@dataclass(frozen=True)
class SchedulingCost:
    """Scheduling cost ``rho`` (an exact PWL function, +inf allowed) with value of time ``alpha``.

    Use :func:`make_cost` to get a normalized instance; the raw constructor
    does not enforce the growth bound or the position of the minimum.
    """

    alpha: Fraction
    rho: PiecewiseLinear
    time_shift: Fraction = ZERO
    value_shift: Fraction = ZERO
    was_growth_normalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "alpha", q(self.alpha))
        if self.alpha <= 0:
            raise InputError("alpha must be positive")

    def __call__(self, theta) -> Extended:
        return self.rho(theta)

    def sublevel(self, z, strict: bool = False) -> IntervalUnion:
        return sublevel(self, z, strict=strict)

    def levels(self) -> list[Fraction]:
        """Finite values of rho at breakpoints (point values and one-sided limits)."""
        out = set()
        for b, p in zip(self.rho.breaks, self.rho.points):
            for v in (p, self.rho.left_limit(b), self.rho.right_limit(b)):
                if not is_inf(v):
                    out.add(v)
        for s, c in self.rho.cells:
            if s == 0 and not is_inf(c):
                out.add(c)
        return sorted(out)

    @property
    def has_flats(self) -> bool:
        """True if rho is constant on some bounded cell (sublevel measure jumps)."""
        for lo, hi, s, c in self.rho.iter_cells():
            if s == 0 and not is_inf(c) and not (is_inf(lo) or is_inf(hi)):
                return True
        return False

    @property
    def is_unimodal(self) -> bool:
        lv = self.levels()
        probes = list(lv) + [(a + b) / 2 for a, b in zip(lv, lv[1:])] + ([lv[-1] + 1] if lv else [])
        return all(len(self.rho.sublevel(z)) <= 1 for z in probes if z >= 0)

    @property
    def is_strongly_unimodal(self) -> bool:
        return self.is_unimodal and not self.has_flats

    def satisfies_growth_bound(self) -> bool:
        return _growth_ok(self.rho, self.alpha)

    def to_json(self) -> dict:
        pieces = []
        for lo, hi, s, c in self.rho.iter_cells():
            if is_inf(c):
                continue
            pieces.append({"from": None if is_inf(lo) else fmt(lo), "to": None if is_inf(hi) else fmt(hi),
                           "slope": fmt(s), "intercept": fmt(c)})
        return {
            "alpha": fmt(self.alpha),
            "pieces": pieces,
            "points": [{"at": fmt(b), "value": fmt(p)} for b, p in zip(self.rho.breaks, self.rho.points)],
            "time_shift": fmt(self.time_shift),
            "value_shift": fmt(self.value_shift),
            "growth_normalized": self.was_growth_normalized,
        }


def _growth_ok(rho: PiecewiseLinear, alpha: Fraction) -> bool:
    for s, c in rho.cells:
        if not is_inf(c) and s < -alpha:
            return False
    # theta -> rho + alpha*theta must not jump down
    for b, p in zip(rho.breaks, rho.points):
        left, right = rho.left_limit(b), rho.right_limit(b)
        if not left <= p <= right:
            return False
    return True


def _suffix_min(g: PiecewiseLinear) -> PiecewiseLinear:
    """``x -> min over y >= x of g(y)`` for a lower semicontinuous PWL ``g``."""
    bounds = g.cell_bounds()
    n = len(g.cells)
    m: Extended = INF  # suffix minimum at the right end of the current cell
    rev_cells: list = []  # lists of (lo, hi, cell) segments, right to left
    rev_points: list = []
    for k in range(n - 1, -1, -1):
        lo, hi = bounds[k]
        s, c = g.cells[k]
        segs = []
        if is_inf(c):
            if c < 0:
                raise InputError("scheduling cost is -inf somewhere")
            segs.append((lo, hi, (ZERO, m)))
        elif s < 0:
            if is_inf(hi):
                raise InputError("rho + alpha*theta decreases without bound")
            segs.append((lo, hi, (ZERO, min(s * hi + c, m))))
        elif s == 0:
            segs.append((lo, hi, (ZERO, min(c, m))))
        elif is_inf(m):
            segs.append((lo, hi, (s, c)))
        else:
            x = (m - c) / s
            if x >= hi:
                segs.append((lo, hi, (s, c)))
            elif x <= lo:
                segs.append((lo, hi, (ZERO, m)))
            else:
                segs.append((x, hi, (ZERO, m)))
                segs.append((lo, x, (s, c)))
        rev_cells.extend(segs)
        # segments inside the cell share continuous values at inner cuts
        for seg in segs[:-1]:
            rev_points.append(m)
        last_lo, _, (ls, lc) = segs[-1]
        if k > 0:
            right = lc if is_inf(lc) else ls * lo + lc
            m = min(g.points[k - 1], right)
            rev_points.append(m)
    cells = [cell for _, _, cell in reversed(rev_cells)]
    breaks = [lo for lo, _, _ in reversed(rev_cells)][1:]
    return PiecewiseLinear(breaks, cells, list(reversed(rev_points)))


def growth_normalize(cost: SchedulingCost) -> SchedulingCost:
    """Replace rho by ``min over xi >= theta of rho(xi) + alpha (xi - theta)``."""
    if _growth_ok(cost.rho, cost.alpha):
        return cost
    g = cost.rho.add_linear(cost.alpha, 0)
    hat = _suffix_min(g).add_linear(-cost.alpha, 0).canonical()
    return replace(cost, rho=hat, was_growth_normalized=True)


def _min_and_argmin(rho: PiecewiseLinear) -> tuple[Fraction, Extended]:
    """Minimum value of rho and its leftmost minimizer (may be -inf for a flat left tail)."""
    best: Extended = INF
    for lo, hi, s, c in rho.iter_cells():
        if is_inf(c):
            continue
        if (is_inf(lo) and s > 0) or (is_inf(hi) and s < 0):
            raise InputError("scheduling cost is unbounded below")
        vals = [c] if s == 0 else []
        vals += [s * x + c for x in (lo, hi) if not is_inf(x)]
        best = min([best, *vals])
    for p in rho.points:
        best = min(best, p)
    if is_inf(best):
        raise InputError("scheduling cost is +inf everywhere")
    cands = []
    for lo, hi, s, c in rho.iter_cells():
        if s == 0 and c == best:
            cands.append(lo)
    cands += [b for b, p in zip(rho.breaks, rho.points) if p == best]
    return best, min(cands)


def make_cost(alpha, rho: PiecewiseLinear) -> SchedulingCost:
    """Validate, growth-normalize and shift so that min rho = 0 is attained at 0."""
    cost = growth_normalize(SchedulingCost(q(alpha), rho.canonical()))
    low, argmin = _min_and_argmin(cost.rho)
    if low < 0:
        raise InputError("scheduling cost must be nonnegative")
    value_shift = low
    time_shift = ZERO
    if cost.rho(0) != low:
        if is_inf(argmin):
            raise InputError("scheduling cost has no finite minimizer")
        time_shift = -argmin
    rho = cost.rho.shift(-time_shift) - value_shift if (time_shift or value_shift) else cost.rho
    return replace(cost, rho=rho.canonical(), time_shift=time_shift, value_shift=value_shift)


def cost_from_pieces(alpha, pieces: Iterable[tuple]) -> SchedulingCost:
    """Closed pieces ``(from, to, slope, intercept)``; uncovered regions are +inf."""
    return make_cost(alpha, PiecewiseLinear.from_closed_pieces(pieces, outside=INF))


def make_standard_cost(alpha, beta, gamma) -> SchedulingCost:
    """``rho = -beta*theta`` for theta <= 0 and ``gamma*theta`` after; gamma may be +inf."""
    alpha, beta, gamma = q(alpha), q(beta), qx(gamma)
    if alpha <= 0 or beta <= 0 or gamma <= 0:
        raise InputError("alpha, beta and gamma must be positive")
    pieces = [(-INF, 0, -beta, 0)]
    if not is_inf(gamma):
        pieces.append((0, INF, gamma, 0))
    return cost_from_pieces(alpha, pieces)


def make_eaf_cost(alpha=1) -> SchedulingCost:
    """The earliest-arrival cost: ``-alpha*theta`` before 0, +inf after."""
    return make_standard_cost(alpha, alpha, INF)


def evaluate(cost: SchedulingCost, theta) -> Extended:
    return cost.rho(q(theta))


def sublevel(cost: SchedulingCost, z, strict: bool = False) -> IntervalUnion:
    """``{theta : rho(theta) <= z}``; with ``strict`` the closure of ``{rho < z}``."""
    z = q(z)
    if z < 0:
        raise InputError("sublevel threshold must be nonnegative")
    return IntervalUnion(tuple(cost.rho.sublevel(z, strict=strict)))
