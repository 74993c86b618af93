"""Exact piecewise-linear functions on the real line.

A :class:`PiecewiseLinear` is described by strictly increasing breakpoints
``b_0 < ... < b_{k-1}``, one linear cell per open gap (``k + 1`` cells,
the outer two unbounded) and an explicit value at every breakpoint. Cells
are ``(slope, intercept)`` pairs in absolute coordinates, so the value at
``x`` inside a cell is ``slope * x + intercept``. An intercept of ``+inf``
or ``-inf`` (with slope 0) marks an infinite cell.

Point values are stored separately from the cells, which lets the same type
represent discontinuous functions exactly: lower semicontinuous costs,
indicator functions of closed intervals and step functions whose value at a
jump is a closed-interval superposition.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .errors import InputError
from .rational import INF, Extended, is_inf, q, qx

Cell = tuple  # (slope: Fraction, intercept: Fraction | +-inf)

ZERO = Fraction(0)


def _cell_value(cell: Cell, x) -> Extended:
    slope, icpt = cell
    if is_inf(icpt):
        return icpt
    return slope * x + icpt


def _probe(lo, hi) -> Fraction:
    """A point strictly inside the open interval (lo, hi)."""
    if lo == -INF and hi == INF:
        return ZERO
    if lo == -INF:
        return hi - 1
    if hi == INF:
        return lo + 1
    return (lo + hi) / 2


def _norm_cell(slope, icpt) -> Cell:
    icpt = qx(icpt)
    if is_inf(icpt):
        return (ZERO, icpt)
    return (q(slope), icpt)


class PiecewiseLinear:
    """Immutable exact piecewise-linear function (possibly discontinuous)."""

    __slots__ = ("breaks", "cells", "points")

    def __init__(self, breaks: Sequence, cells: Sequence[Cell], points: Sequence):
        breaks = tuple(q(b) for b in breaks)
        if len(cells) != len(breaks) + 1 or len(points) != len(breaks):
            raise InputError("PiecewiseLinear: need len(cells) == len(breaks) + 1 == len(points) + 1")
        for a, b in zip(breaks, breaks[1:]):
            if not a < b:
                raise InputError("PiecewiseLinear: breakpoints must be strictly increasing")
        self.breaks = breaks
        self.cells = tuple(_norm_cell(*c) for c in cells)
        self.points = tuple(qx(p) for p in points)

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls, value) -> "PiecewiseLinear":
        return cls((), [(0, value)], ())

    @classmethod
    def linear(cls, slope, intercept) -> "PiecewiseLinear":
        return cls((), [(slope, intercept)], ())

    @classmethod
    def from_closed_pieces(cls, pieces: Iterable[tuple], outside=INF) -> "PiecewiseLinear":
        """Build from closed pieces ``(lo, hi, slope, intercept)``.

        ``lo``/``hi`` may be infinite. Pieces may only touch at endpoints;
        where two pieces share an endpoint the smaller value wins (lower
        semicontinuous convention). Uncovered regions take ``outside``.
        """
        pieces = sorted(((qx(lo), qx(hi), q(s), q(c)) for lo, hi, s, c in pieces), key=lambda p: p[0])
        for (lo, hi, _, _), (lo2, _, _, _) in zip(pieces, pieces[1:]):
            if lo2 < hi:
                raise InputError("overlapping pieces")
        for lo, hi, _, _ in pieces:
            if not lo <= hi:
                raise InputError("piece with lo > hi")
        bset = sorted({x for p in pieces for x in p[:2] if not is_inf(x)})
        outside = qx(outside)
        cells = []
        bounds = [-INF] + bset + [INF]
        for lo, hi in zip(bounds, bounds[1:]):
            x = _probe(lo, hi)
            cell = (ZERO, outside)
            for plo, phi, s, c in pieces:
                if plo <= x <= phi and plo < phi:
                    cell = (s, c)
                    break
            cells.append(cell)
        points = []
        for b in bset:
            vals = [s * b + c for plo, phi, s, c in pieces if plo <= b <= phi]
            points.append(min(vals) if vals else outside)
        return cls(bset, cells, points)

    @classmethod
    def indicator(cls, intervals: Iterable[tuple], value=1) -> "PiecewiseLinear":
        """``value`` on a union of disjoint closed intervals, 0 elsewhere."""
        value = q(value)
        ivs = sorted((qx(lo), qx(hi)) for lo, hi in intervals)
        breaks, cells, points = [], [(ZERO, ZERO)], []
        for lo, hi in ivs:
            if breaks and not is_inf(lo) and lo <= breaks[-1]:
                raise InputError("indicator intervals must be disjoint")
            if lo == hi:
                breaks.append(lo)
                points.append(value)
                cells.append((ZERO, ZERO))
                continue
            if is_inf(lo):
                cells[-1] = (ZERO, value)
            else:
                breaks.append(lo)
                points.append(value)
                cells.append((ZERO, value))
            if not is_inf(hi):
                breaks.append(hi)
                points.append(value)
                cells.append((ZERO, ZERO))
        return cls(breaks, cells, points)

    # -- evaluation ---------------------------------------------------
    def _cell_index(self, x) -> int:
        return bisect_right(self.breaks, x)

    def __call__(self, x) -> Extended:
        i = bisect_left(self.breaks, x)
        if i < len(self.breaks) and self.breaks[i] == x:
            return self.points[i]
        return _cell_value(self.cells[i], x)

    def left_limit(self, x) -> Extended:
        i = bisect_left(self.breaks, x)
        return _cell_value(self.cells[i], x)

    def right_limit(self, x) -> Extended:
        return _cell_value(self.cells[bisect_right(self.breaks, x)], x)

    def cell_bounds(self) -> list[tuple]:
        b = [-INF, *self.breaks, INF]
        return list(zip(b, b[1:]))

    def iter_cells(self):
        """Yield ``(lo, hi, slope, intercept)`` for every open cell."""
        for (lo, hi), (s, c) in zip(self.cell_bounds(), self.cells):
            yield lo, hi, s, c

    # -- structure ----------------------------------------------------
    def refine(self, extra: Iterable) -> "PiecewiseLinear":
        extra = {q(x) for x in extra if not is_inf(x)}
        if extra <= set(self.breaks):
            return self
        new = sorted(set(self.breaks) | extra)
        cells, points = [], []
        for k, b in enumerate(new):
            left = new[k - 1] if k else None
            idx = 0 if left is None else bisect_right(self.breaks, left)
            cells.append(self.cells[idx])
            points.append(self(b))
        cells.append(self.cells[-1])
        return PiecewiseLinear(new, cells, points)

    def canonical(self) -> "PiecewiseLinear":
        """Merge neighbouring cells that describe the same linear function."""
        if not self.breaks:
            return self
        breaks, cells, points = [], [self.cells[0]], []
        for b, p, nxt in zip(self.breaks, self.points, self.cells[1:]):
            cur = cells[-1]
            if cur == nxt and _cell_value(cur, b) == p:
                continue
            breaks.append(b)
            points.append(p)
            cells.append(nxt)
        return PiecewiseLinear(breaks, cells, points)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PiecewiseLinear):
            return NotImplemented
        a, b = self.canonical(), other.canonical()
        return a.breaks == b.breaks and a.cells == b.cells and a.points == b.points

    def __hash__(self):
        c = self.canonical()
        return hash((c.breaks, c.cells, c.points))

    def __repr__(self) -> str:
        return f"PiecewiseLinear(breaks={list(map(str, self.breaks))}, cells={self.cells}, points={self.points})"

    # -- pointwise algebra ---------------------------------------------
    @staticmethod
    def _common(funcs: Sequence["PiecewiseLinear"]) -> list["PiecewiseLinear"]:
        allb = set()
        for f in funcs:
            allb.update(f.breaks)
        return [f.refine(allb) for f in funcs]

    @staticmethod
    def lift(funcs: Sequence["PiecewiseLinear"], cell_op: Callable, point_op: Callable) -> "PiecewiseLinear":
        """Apply a cellwise op that maps linear cells to a linear cell."""
        funcs = PiecewiseLinear._common(funcs)
        breaks = funcs[0].breaks
        cells = [cell_op(*cs) for cs in zip(*(f.cells for f in funcs))]
        points = [point_op(*ps) for ps in zip(*(f.points for f in funcs))]
        return PiecewiseLinear(breaks, cells, points)

    def __add__(self, other) -> "PiecewiseLinear":
        if not isinstance(other, PiecewiseLinear):
            other = PiecewiseLinear.constant(other)
        return PiecewiseLinear.lift([self, other], _add_cells, _add_vals)

    __radd__ = __add__

    def __neg__(self) -> "PiecewiseLinear":
        return self.scale(-1)

    def __sub__(self, other) -> "PiecewiseLinear":
        if not isinstance(other, PiecewiseLinear):
            other = PiecewiseLinear.constant(other)
        return self + (-other)

    def __rsub__(self, other) -> "PiecewiseLinear":
        return (-self) + other

    def scale(self, k) -> "PiecewiseLinear":
        k = q(k)

        def sv(v):
            if is_inf(v):
                if k == 0:
                    raise InputError("0 * inf in PiecewiseLinear.scale")
                return v if k > 0 else -v
            return k * v

        cells = [(ZERO, sv(c)) if is_inf(c) else (k * s, k * c) for s, c in self.cells]
        return PiecewiseLinear(self.breaks, cells, [sv(p) for p in self.points])

    def add_linear(self, slope, intercept) -> "PiecewiseLinear":
        return self + PiecewiseLinear.linear(slope, intercept)

    def shift(self, c) -> "PiecewiseLinear":
        """Return ``x -> self(x + c)``."""
        c = q(c)
        cells = [(s, i) if is_inf(i) else (s, i + s * c) for s, i in self.cells]
        return PiecewiseLinear([b - c for b in self.breaks], cells, self.points)

    @staticmethod
    def maximum(funcs: Sequence["PiecewiseLinear"]) -> "PiecewiseLinear":
        return PiecewiseLinear._extremum(funcs, max)

    @staticmethod
    def minimum(funcs: Sequence["PiecewiseLinear"]) -> "PiecewiseLinear":
        return PiecewiseLinear._extremum(funcs, min)

    @staticmethod
    def _extremum(funcs, pick) -> "PiecewiseLinear":
        funcs = PiecewiseLinear._common(list(funcs))
        if len(funcs) == 1:
            return funcs[0]
        extra = set()
        for k, (lo, hi) in enumerate(funcs[0].cell_bounds()):
            cs = [f.cells[k] for f in funcs]
            for i in range(len(cs)):
                for j in range(i + 1, len(cs)):
                    (s1, c1), (s2, c2) = cs[i], cs[j]
                    if is_inf(c1) or is_inf(c2) or s1 == s2:
                        continue
                    x = (c2 - c1) / (s1 - s2)
                    if lo < x < hi:
                        extra.add(x)
        funcs = [f.refine(extra) for f in funcs]
        cells = []
        for k, (lo, hi) in enumerate(funcs[0].cell_bounds()):
            x = _probe(lo, hi)
            cells.append(pick((f.cells[k] for f in funcs), key=lambda c: _cell_value(c, x)))
        points = [pick(ps) for ps in zip(*(f.points for f in funcs))]
        return PiecewiseLinear(funcs[0].breaks, cells, points)

    def positive_part(self) -> "PiecewiseLinear":
        return PiecewiseLinear.maximum([self, PiecewiseLinear.constant(0)])

    @staticmethod
    def select(selector: "PiecewiseLinear", choices: dict) -> "PiecewiseLinear":
        """Pointwise ``choices[selector(x)](x)`` for a step-function selector."""
        funcs = PiecewiseLinear._common([selector, *choices.values()])
        sel, rest = funcs[0], dict(zip(choices.keys(), funcs[1:]))
        for s, c in sel.cells:
            if s != 0 or is_inf(c):
                raise InputError("selector must be a finite step function")
        cells = [rest[c].cells[k] for k, (_, c) in enumerate(sel.cells)]
        points = [rest[p].points[k] for k, p in enumerate(sel.points)]
        return PiecewiseLinear(sel.breaks, cells, points)

    # -- calculus -------------------------------------------------------
    def integral(self, lo=-INF, hi=INF) -> Extended:
        """Exact integral over ``[lo, hi]``. Infinite if an unbounded piece is nonzero."""
        total: Extended = ZERO
        for clo, chi, s, c in self.iter_cells():
            a, b = max(clo, lo), min(chi, hi)
            if not a < b:
                continue
            if s == 0 and c == 0:
                continue
            if is_inf(c):
                total = total + c
                continue
            if is_inf(a) or is_inf(b):
                total = total + _tail_sign(s, c, toward_right=is_inf(b)) * INF
                continue
            total = total + s * (b * b - a * a) / 2 + c * (b - a)
        return total

    def antiderivative(self) -> "PiecewiseLinear":
        """``x -> integral of self over (-inf, x]`` for a step function with zero left tail."""
        for s, c in self.cells:
            if s != 0 or is_inf(c):
                raise InputError("antiderivative requires a finite step function")
        if self.cells[0][1] != 0:
            raise InputError("antiderivative requires a zero left tail")
        acc = ZERO
        cells = [(ZERO, ZERO)]
        points = []
        for k, b in enumerate(self.breaks):
            points.append(acc)
            rate = self.cells[k + 1][1]
            cells.append((rate, acc - rate * b))
            if k + 1 < len(self.breaks):
                acc = acc + rate * (self.breaks[k + 1] - b)
        return PiecewiseLinear(self.breaks, cells, points)

    def support_bounds(self) -> tuple | None:
        """Smallest ``(lo, hi)`` outside of which the function is identically 0."""
        c = self.canonical()
        nz = [i for i, cell in enumerate(c.cells) if cell != (ZERO, ZERO)]
        nzp = [i for i, p in enumerate(c.points) if p != 0]
        if not nz and not nzp:
            return None
        bounds = c.cell_bounds()
        los = [bounds[i][0] for i in nz] + [c.breaks[i] for i in nzp]
        his = [bounds[i][1] for i in nz] + [c.breaks[i] for i in nzp]
        return min(los), max(his)

    # -- sets -------------------------------------------------------------
    def sublevel(self, z, strict: bool = False) -> list[tuple]:
        """Closure of ``{x : f(x) <= z}`` (or ``< z``) as sorted disjoint closed intervals.

        Exact for lower semicontinuous functions.
        """
        z = q(z)
        ok = (lambda v: v < z) if strict else (lambda v: v <= z)
        raw = []
        for lo, hi, s, c in self.iter_cells():
            if is_inf(c):
                if ok(c):
                    raw.append((lo, hi))
                continue
            if s == 0:
                if ok(c):
                    raw.append((lo, hi))
                continue
            x = (z - c) / s
            if s > 0:
                a, b = lo, min(hi, x)
                if a < b:
                    raw.append((a, b))
            else:
                a, b = max(lo, x), hi
                if a < b:
                    raw.append((a, b))
        for b, p in zip(self.breaks, self.points):
            if ok(p):
                raw.append((b, b))
        raw.sort(key=lambda iv: (iv[0], iv[1]))
        merged: list[list] = []
        for a, b in raw:
            if merged and a <= merged[-1][1]:
                if b > merged[-1][1]:
                    merged[-1][1] = b
            else:
                merged.append([a, b])
        return [(a, b) for a, b in merged]


def _tail_sign(s, c, toward_right: bool) -> int:
    """Sign of a nonzero linear cell far out along an unbounded range."""
    if s == 0:
        return 1 if c > 0 else -1
    return (1 if s > 0 else -1) * (1 if toward_right else -1)


def _add_vals(a, b):
    if is_inf(a) and is_inf(b) and a != b:
        raise InputError("inf - inf in PiecewiseLinear addition")
    return a + b


def _add_cells(c1: Cell, c2: Cell) -> Cell:
    (s1, i1), (s2, i2) = c1, c2
    if is_inf(i1) or is_inf(i2):
        return (ZERO, _add_vals(i1, i2))
    return (s1 + s2, i1 + i2)


def integrate_product(f: PiecewiseLinear, g: PiecewiseLinear) -> Extended:
    """Exact ``integral of f * g`` over the real line (0 * inf taken as 0)."""
    f, g = PiecewiseLinear._common([f, g])
    total: Extended = ZERO
    for (lo, hi), (s1, c1), (s2, c2) in zip(f.cell_bounds(), f.cells, g.cells):
        zero1 = s1 == 0 and c1 == 0
        zero2 = s2 == 0 and c2 == 0
        if zero1 or zero2:
            continue
        if is_inf(c1) or is_inf(c2) or is_inf(lo) or is_inf(hi):
            if is_inf(c1) or is_inf(c2):
                probe = _probe(lo, hi)
                v = _cell_value((s1, c1), probe) * _cell_value((s2, c2), probe)
            else:
                right = is_inf(hi)
                v = _tail_sign(s1, c1, right) * _tail_sign(s2, c2, right)
            total = total + (INF if v > 0 else -INF)
            continue
        total = (
            total
            + s1 * s2 * (hi**3 - lo**3) / 3
            + (s1 * c2 + s2 * c1) * (hi**2 - lo**2) / 2
            + c1 * c2 * (hi - lo)
        )
    return total
