"""Exact algebra of compactly supported step functions.

A :class:`StepFunction` takes the value ``values[i]`` on the half-open
interval ``[breakpoints[i], breakpoints[i+1])`` and vanishes elsewhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonFiniteValue


@dataclass(frozen=True, eq=False)
class StepFunction:
    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float).copy()
        vals = np.asarray(self.values, dtype=float).copy()
        if len(bp) == 0 and len(vals) == 0:
            pass
        elif len(bp) != len(vals) + 1:
            raise ValueError("need len(breakpoints) == len(values) + 1")
        elif np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(vals))):
            raise ValueError("breakpoints and values must be finite")
        bp, vals = _canonical(bp, vals)
        bp.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    # construction helpers -------------------------------------------------
    @classmethod
    def zero(cls) -> "StepFunction":
        return cls(np.empty(0), np.empty(0))

    @classmethod
    def indicator(cls, a: float, b: float, c: float = 1.0) -> "StepFunction":
        return cls(np.array([a, b]), np.array([c]))

    @classmethod
    def from_dict(cls, d: dict) -> "StepFunction":
        return cls(np.asarray(d["breakpoints"], dtype=float), np.asarray(d["values"], dtype=float))

    def to_dict(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist(), "values": self.values.tolist()}

    # basic queries --------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return len(self.values) == 0

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def support(self) -> tuple[float, float]:
        if self.is_zero:
            return (0.0, 0.0)
        return (float(self.breakpoints[0]), float(self.breakpoints[-1]))

    def integral(self) -> float:
        return math.fsum((self.values * self.lengths).tolist())

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if not self.is_zero else 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.is_zero:
            return np.zeros(x.shape)
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        inside = (idx >= 0) & (idx < len(self.values))
        out = np.zeros(x.shape)
        out[inside] = self.values[idx[inside]]
        return out

    def blocks(self):
        """Iterate over ``(a, b, c)`` for every nonzero block."""
        for a, b, c in zip(self.breakpoints[:-1], self.breakpoints[1:], self.values):
            if c != 0.0:
                yield float(a), float(b), float(c)

    # algebra --------------------------------------------------------------
    def __add__(self, other: "StepFunction") -> "StepFunction":
        pts = np.union1d(self.breakpoints, other.breakpoints)
        if len(pts) < 2:
            return StepFunction.zero()
        mids = 0.5 * (pts[:-1] + pts[1:])
        return StepFunction(pts, self(mids) + other(mids))

    def __neg__(self) -> "StepFunction":
        return StepFunction(self.breakpoints, -self.values)

    def __sub__(self, other: "StepFunction") -> "StepFunction":
        return self + (-other)

    def __mul__(self, k: float) -> "StepFunction":
        return StepFunction(self.breakpoints, self.values * float(k))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, StepFunction):
            return NotImplemented
        return (np.array_equal(self.breakpoints, other.breakpoints)
                and np.array_equal(self.values, other.values))

    def __hash__(self):
        return hash((self.breakpoints.tobytes(), self.values.tobytes()))

    def __repr__(self) -> str:
        return f"StepFunction(breakpoints={self.breakpoints.tolist()}, values={self.values.tolist()})"


def _canonical(bp: np.ndarray, vals: np.ndarray):
    if len(vals) == 0:
        return np.empty(0), np.empty(0)
    keep = np.ones(len(vals), dtype=bool)
    keep[1:] = vals[1:] != vals[:-1]
    # merging equal neighbours drops the breakpoint between them
    new_vals = vals[keep]
    new_bp = np.concatenate([bp[:-1][keep], bp[-1:]])
    nz = np.nonzero(new_vals != 0.0)[0]
    if len(nz) == 0:
        return np.empty(0), np.empty(0)
    first, last = nz[0], nz[-1]
    return new_bp[first:last + 2].copy(), new_vals[first:last + 1].copy()


class LevelProfile(StepFunction):
    """Signed distribution function ``N_g`` as a step function of the level."""

    def check_monotone(self) -> bool:
        """Branch monotonicity: non-increasing on both sides of 0, >= 0 right, <= 0 left."""
        if self.is_zero:
            return True
        mids = 0.5 * (self.breakpoints[:-1] + self.breakpoints[1:])
        v = self.values
        pos = mids > 0
        neg = mids < 0
        ok = np.all(v[pos] >= 0) and np.all(v[neg] <= 0)
        ok = ok and np.all(np.diff(v[pos]) <= 0) and np.all(np.diff(v[neg]) <= 0)
        return bool(ok)


def distribution_profile(g: StepFunction) -> LevelProfile:
    """``N_g(s)``: measure of ``{g > s}`` for ``s > 0``, minus that of ``{g < s}`` for ``s < 0``.

    >>> distribution_profile(StepFunction.indicator(0, 3, 2.0))
    StepFunction(breakpoints=[0.0, 2.0], values=[3.0])
    """
    if g.is_zero:
        return LevelProfile(np.empty(0), np.empty(0))
    c = g.values
    lens = g.lengths
    pts = np.unique(np.concatenate([c, [0.0]]))
    mids = 0.5 * (pts[:-1] + pts[1:])
    out = np.empty(len(mids))
    for k, m in enumerate(mids):
        if m > 0:
            out[k] = math.fsum(lens[c > m].tolist())
        else:
            out[k] = -math.fsum(lens[c < m].tolist())
    return LevelProfile(pts, out)


def rearrange_decreasing(g: StepFunction) -> StepFunction:
    """Signed decreasing rearrangement ``g_d = N_{N_g}``.

    The value at ``t = 0`` is a breakpoint artifact and carries no meaning.
    """
    n = distribution_profile(g)
    gd = distribution_profile(StepFunction(n.breakpoints, n.values))
    return StepFunction(gd.breakpoints, gd.values)


def pushforward_integral(g: StepFunction, phi: Callable[[np.ndarray], np.ndarray]):
    """The three equal integrals ``(int phi(g), int phi d m_g, int phi(g_d))``.

    ``m_g`` is the push-forward of Lebesgue measure under ``g``; requires
    ``phi(0) = 0`` so the unbounded zero set contributes nothing.
    """
    if float(np.asarray(phi(np.array([0.0])))[0]) != 0.0:
        raise ValueError("phi(0) must vanish")

    def _phi(v):
        out = np.asarray(phi(np.asarray(v, dtype=float)), dtype=float)
        if not np.all(np.isfinite(out)):
            raise NonFiniteValue("phi is not finite at an attained value")
        return out

    direct = math.fsum((_phi(g.values) * g.lengths).tolist()) if not g.is_zero else 0.0
    if g.is_zero:
        return 0.0, 0.0, 0.0
    levels, inverse = np.unique(g.values, return_inverse=True)
    masses = np.zeros(len(levels))
    np.add.at(masses, inverse, g.lengths)
    via_measure = math.fsum((_phi(levels) * masses).tolist())
    gd = rearrange_decreasing(g)
    via_rearranged = math.fsum((_phi(gd.values) * gd.lengths).tolist())
    return direct, via_measure, via_rearranged


def modulus_profile(g: StepFunction) -> StepFunction:
    """``m_g(lam) = meas{|g| > lam}`` for ``lam >= 0`` as a step function of ``lam``.

    Equals ``N_g(lam) - N_g(-lam)``; the strict inequality differs from
    ``>=`` only at the finitely many attained levels.
    """
    if g.is_zero:
        return StepFunction.zero()
    a = np.abs(g.values)
    pts = np.unique(np.concatenate([a, [0.0]]))
    mids = 0.5 * (pts[:-1] + pts[1:])
    vals = np.array([math.fsum(g.lengths[a > m].tolist()) for m in mids])
    return StepFunction(pts, vals)


class ModulusDistribution:
    """``m_f(lam) = meas{|g + i Hg| >= lam}`` via level sets of the closed-form ``Hg``."""

    def __init__(self, g: StepFunction, hg):
        from .numerics import LevelSolver  # local to keep import graph flat

        self.g = g
        self.hg = hg
        scale = max(g.support[1] - g.support[0], 1.0)
        self.solver = LevelSolver(hg.evaluate, hg.derivative, hg.nodes, scale=scale)
        self._block_value = []
        for piece in self.solver.pieces:
            mid_y = 0.5 * (piece.y_lo + piece.y_hi)
            xm = float(piece.cell.x(mid_y))
            self._block_value.append(float(g(np.array([xm]))[0]))

    def __call__(self, lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        total = np.zeros(lam.shape)
        for piece, c in zip(self.solver.pieces, self._block_value):
            kappa = np.sqrt(np.maximum(lam * lam - c * c, 0.0))
            whole = lam <= abs(c)
            part = (self.solver._piece_measure(piece, kappa, upper=True)
                    + self.solver._piece_measure(piece, -kappa, upper=False))
            if np.any(whole):
                full = self.solver._piece_measure(piece, np.array([-np.inf]), upper=True)[0]
                part = np.where(whole, full, part)
            total += part
        return total


def modulus_distributions(g: StepFunction, hg):
    """``(m_g profile, m_f evaluator)`` for ``f = g + i Hg``."""
    return modulus_profile(g), ModulusDistribution(g, hg)
