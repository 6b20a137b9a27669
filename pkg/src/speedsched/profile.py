"""Piecewise-constant speed profiles and water filling."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable


class StepFunction:
    """Nonnegative piecewise-constant function on half-open pieces.

    ``breakpoints`` t_0 < ... < t_k and ``values`` v_0..v_{k-1}: the function
    is v_i on [t_i, t_{i+1}) and 0 outside [t_0, t_k).  Instances are kept in
    canonical form (adjacent equal values merged, zero pieces trimmed at both
    ends) so that ``==`` is pointwise equality.
    """

    __slots__ = ("breakpoints", "values")

    def __init__(self, breakpoints=(), values=()):
        bps = [Fraction(t) for t in breakpoints]
        vals = list(values)
        if bps and len(vals) != len(bps) - 1:
            raise ValueError("need exactly one value per piece")
        if not bps and vals:
            raise ValueError("values without breakpoints")
        for a, b in zip(bps, bps[1:]):
            if not a < b:
                raise ValueError("breakpoints must be strictly increasing")
        for v in vals:
            if v < 0:
                raise ValueError(f"negative value {v}")
        self.breakpoints, self.values = _canonical(bps, vals)

    @classmethod
    def constant(cls, a, b, value) -> "StepFunction":
        if not a < b:
            raise ValueError("empty interval")
        return cls((a, b), (value,))

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls()

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return (self.breakpoints == other.breakpoints
                and self.values == other.values)

    def __hash__(self):
        return hash((self.breakpoints, self.values))

    def __repr__(self):
        if not self.values:
            return "StepFunction()"
        parts = ", ".join(f"[{a}, {b}): {v}" for a, b, v in self.pieces())
        return f"StepFunction({parts})"

    def __bool__(self):
        return bool(self.values)

    def pieces(self):
        bp = self.breakpoints
        return [(bp[i], bp[i + 1], v) for i, v in enumerate(self.values)]

    def __call__(self, t):
        bp = self.breakpoints
        if not bp or t < bp[0] or t >= bp[-1]:
            return Fraction(0)
        for i, v in enumerate(self.values):
            if t < bp[i + 1]:
                return v
        return Fraction(0)

    def window_pieces(self, a, b):
        """Pieces covering exactly [a, b), zero-filled outside the support."""
        if not a < b:
            raise ValueError(f"empty window [{a}, {b}]")
        cuts = sorted({a, b} | {t for t in self.breakpoints if a < t < b})
        return [(lo, hi, self(lo)) for lo, hi in zip(cuts, cuts[1:])]

    def integral(self):
        return sum(((b - a) * v for a, b, v in self.pieces()), Fraction(0))

    def integrate(self, f: Callable):
        """Integral of f(v(t)) over the support (f(0) is assumed to be 0)."""
        return sum(((b - a) * f(v) for a, b, v in self.pieces()), Fraction(0))


def _canonical(bps, vals):
    if not vals:
        return (), ()
    nb, nv = [bps[0]], []
    for i, v in enumerate(vals):
        if nv and nv[-1] == v:
            nb[-1] = bps[i + 1]
        else:
            nv.append(v)
            nb.append(bps[i + 1])
    while nv and nv[0] == 0:
        nv.pop(0)
        nb.pop(0)
    while nv and nv[-1] == 0:
        nv.pop()
        nb.pop()
    if not nv:
        return (), ()
    return tuple(nb), tuple(nv)


def _combine(f: StepFunction, g: StepFunction, op) -> StepFunction:
    cuts = sorted(set(f.breakpoints) | set(g.breakpoints))
    if len(cuts) < 2:
        return StepFunction()
    vals = [op(f(lo), g(lo)) for lo in cuts[:-1]]
    return StepFunction(cuts, vals)


def add(profile: StepFunction, delta: StepFunction) -> StepFunction:
    return _combine(profile, delta, lambda x, y: x + y)


def subtract(profile: StepFunction, delta: StepFunction) -> StepFunction:
    def op(x, y):
        if y > x:
            raise ValueError(f"subtraction would go negative ({x} - {y})")
        return x - y
    return _combine(profile, delta, op)


def window_min(profile: StepFunction, a, b):
    """Smallest value of ``profile`` on [a, b) (zero outside its support)."""
    return min(v for _, _, v in profile.window_pieces(a, b))


def fill(profile: StepFunction, a, b, volume):
    """Pour ``volume`` onto ``profile`` over [a, b).

    Returns ``(level, delta)`` where ``delta = max(level - profile, 0)`` on
    [a, b) and integrates to ``volume``.  For zero volume the level is the
    window minimum and delta is zero.
    """
    pieces = profile.window_pieces(a, b)
    volume = Fraction(volume)
    if volume < 0:
        raise ValueError("negative volume")
    if volume == 0:
        return min(v for _, _, v in pieces), StepFunction()
    by_value = sorted(((v, hi - lo) for lo, hi, v in pieces),
                      key=lambda x: x[0])
    width = Fraction(0)      # total length of pieces below the water line
    mass = Fraction(0)       # integral of the profile over those pieces
    level = None
    for idx, (v, length) in enumerate(by_value):
        width += length
        mass += v * length
        nxt = by_value[idx + 1][0] if idx + 1 < len(by_value) else None
        candidate = (volume + mass) / width
        if nxt is None or candidate <= nxt:
            level = candidate
            break
    delta = StepFunction([lo for lo, _, _ in pieces] + [b],
                         [max(level - v, 0) for _, _, v in pieces])
    return level, delta
