"""Quadrature, principal values, level crossings and circle maxima.

Every integrand and evaluator passed to this module is *vectorized*: it takes
a numpy array and returns an array of the same shape.  All routines are
deterministic; panel sums are accumulated with ``math.fsum`` in a fixed order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .errors import (
    AllSingular,
    InvalidInterval,
    NonConvergence,
    NonFiniteValue,
    PoleAtEndpoint,
    UnresolvedCell,
)

Vectorized = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_subdivisions: int = 4000
    pv_window: float = 0.5
    tail_cutoff: float = 10.0

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0 or self.abs_tol + self.rel_tol <= 0:
            raise ValueError("need abs_tol, rel_tol >= 0 with a positive sum")
        if self.max_subdivisions < 8:
            raise ValueError("max_subdivisions must be at least 8")
        if self.pv_window <= 0 or self.tail_cutoff <= 0:
            raise ValueError("pv_window and tail_cutoff must be positive")

    def scaled(self, scale: float) -> "QuadratureSpec":
        """Same spec with the absolute tolerance multiplied by ``scale``."""
        return QuadratureSpec(self.abs_tol * scale, self.rel_tol, self.max_subdivisions,
                              self.pv_window, self.tail_cutoff)

    def tolerance(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


DEFAULT_SPEC = QuadratureSpec()


@dataclass
class IntegralResult:
    value: float
    error_estimate: float
    subdivisions_used: int
    converged: bool

    def require(self) -> "IntegralResult":
        if not self.converged:
            raise NonConvergence(
                f"quadrature did not converge: value={self.value!r}, "
                f"error={self.error_estimate!r}", self)
        return self

    def __add__(self, other: "IntegralResult") -> "IntegralResult":
        return IntegralResult(self.value + other.value,
                              self.error_estimate + other.error_estimate,
                              self.subdivisions_used + other.subdivisions_used,
                              self.converged and other.converged)


def sum_results(results: Sequence[IntegralResult]) -> IntegralResult:
    if not results:
        return IntegralResult(0.0, 0.0, 0, True)
    return IntegralResult(math.fsum(r.value for r in results),
                          math.fsum(r.error_estimate for r in results),
                          sum(r.subdivisions_used for r in results),
                          all(r.converged for r in results))


# Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])          # 15 nodes in [-1, 1]
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(f: Vectorized, lo: np.ndarray, hi: np.ndarray):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    y = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(y)):
        # nodes of panels at rounding resolution can collapse onto a singular edge
        on_edge = (x == lo[:, None]) | (x == hi[:, None])
        bad = ~np.isfinite(y)
        if np.any(bad & ~on_edge):
            raise NonFiniteValue(f"integrand not finite at x={x[bad & ~on_edge][0]!r}")
        y = np.where(bad, 0.0, y)
    kron = (y @ _KW) * half
    gauss = (y @ _GW) * half
    mean = kron / np.where(half != 0, 2 * half, 1.0)
    resasc = (np.abs(y - mean[:, None]) @ _KW) * np.abs(half)
    diff = np.abs(kron - gauss)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(resasc > 0,
                          resasc * np.minimum(1.0, (200.0 * diff / resasc) ** 1.5),
                          diff)
    err = np.maximum(scaled, 50 * np.finfo(float).eps * np.abs(kron))
    return kron, err


def _map_infinite(f: Vectorized, a: float, b: float, points: Sequence[float]):
    """Map an interval with infinite ends onto a finite one."""
    if math.isinf(a) and math.isinf(b):
        raise AssertionError("split doubly infinite intervals before mapping")
    if math.isinf(b):
        def g(s):
            return f(a + s / (1.0 - s)) / (1.0 - s) ** 2
        pts = [(p - a) / (1.0 + p - a) for p in points if p > a]
        return g, 0.0, 1.0, pts

    def g(s):
        return f(b - s / (1.0 - s)) / (1.0 - s) ** 2
    pts = sorted((b - p) / (1.0 + b - p) for p in points if p < b)
    return g, 0.0, 1.0, pts


def integrate_adaptive(f: Vectorized, a: float, b: float,
                       known_singularities: Sequence[float] = (),
                       spec: QuadratureSpec = DEFAULT_SPEC,
                       initial_points: Sequence[float] = ()) -> IntegralResult:
    """Globally adaptive Gauss-Kronrod quadrature of ``f`` over ``[a, b]``.

    Known singular points (and any extra ``initial_points``) become panel
    edges, so integrable endpoint singularities are resolved by bisection.
    Infinite limits are handled by the map ``x = a + s/(1-s)``.

    >>> round(integrate_adaptive(np.log, 0.0, 1.0).value, 12)
    -1.0
    """
    a = float(a)
    b = float(b)
    if not a < b:
        raise InvalidInterval(f"need a < b, got [{a}, {b}]")
    points = [float(p) for p in list(known_singularities) + list(initial_points)
              if a < p < b and math.isfinite(p)]
    if math.isinf(a) and math.isinf(b):
        c = sorted(points)[len(points) // 2] if points else 0.0
        left = integrate_adaptive(f, -math.inf, c, points, spec)
        right = integrate_adaptive(f, c, math.inf, points, spec)
        return left + right
    if math.isinf(a) or math.isinf(b):
        f, a, b, points = _map_infinite(f, a, b, points)

    edges = np.unique(np.array([a, b] + points))
    lo = edges[:-1]
    hi = edges[1:]
    val, err = _gk15(f, lo, hi)
    final_val: list[float] = []
    final_err: list[float] = []
    final_lo: list[float] = []
    while True:
        total = math.fsum(final_val) + math.fsum(val)
        toterr = math.fsum(final_err) + float(np.sum(err))
        tol = spec.tolerance(total)
        n_panels = len(final_val) + len(val)
        if toterr <= tol or n_panels >= spec.max_subdivisions or len(val) == 0:
            break
        order = np.argsort(-err, kind="stable")
        cum = np.cumsum(err[order])
        k = int(np.searchsorted(cum, 0.7 * cum[-1])) + 1
        k = min(k, spec.max_subdivisions - n_panels, len(order))
        if k <= 0:
            break
        chosen = order[:k]
        mid = 0.5 * (lo[chosen] + hi[chosen])
        splittable = (mid > lo[chosen]) & (mid < hi[chosen])
        # panels at floating-point resolution cannot be refined any further
        frozen = chosen[~splittable]
        final_val.extend(val[frozen].tolist())
        final_err.extend(err[frozen].tolist())
        final_lo.extend(lo[frozen].tolist())
        chosen = chosen[splittable]
        mid = mid[splittable]
        keep = np.ones(len(val), dtype=bool)
        keep[order[:k]] = False
        new_lo = np.concatenate([lo[chosen], mid])
        new_hi = np.concatenate([mid, hi[chosen]])
        if len(new_lo) == 0:
            lo, hi, val, err = lo[keep], hi[keep], val[keep], err[keep]
            break
        nv, ne = _gk15(f, new_lo, new_hi)
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])

    all_lo = np.concatenate([np.array(final_lo), lo])
    all_val = np.concatenate([np.array(final_val), val])
    all_err = np.concatenate([np.array(final_err), err])
    order = np.argsort(all_lo, kind="stable")
    value = math.fsum(all_val[order])
    error = math.fsum(all_err[order])
    return IntegralResult(value, error, len(all_val), error <= spec.tolerance(value))


def integrate_pv(f: Vectorized, pole: float, a: float, b: float,
                 spec: QuadratureSpec = DEFAULT_SPEC,
                 known_singularities: Sequence[float] = ()) -> IntegralResult:
    """Cauchy principal value of ``f`` over ``[a, b]`` at a simple pole.

    The window ``[pole-h, pole+h]`` is folded into the integral of the
    even part ``f(pole+u) + f(pole-u)``, which is bounded near ``u = 0``; the
    rest is ordinary adaptive quadrature.  ``h`` runs through a geometric
    schedule (ratio 1/2, at most 6 levels) until consecutive values agree.
    """
    a = float(a)
    b = float(b)
    if not a < pole < b:
        raise PoleAtEndpoint(f"pole {pole} must lie strictly inside ({a}, {b})")
    sing = [float(s) for s in known_singularities if s != pole]
    h = min(1.0, spec.pv_window) * min(pole - a, b - pole)
    previous = None
    history: list[IntegralResult] = []
    for _ in range(6):
        parts = []
        if pole - h > a:
            parts.append(integrate_adaptive(f, a, pole - h, sing, spec))
        if pole + h < b:
            parts.append(integrate_adaptive(f, pole + h, b, sing, spec))
        inner_pts = [abs(s - pole) for s in sing if 0 < abs(s - pole) < h]

        def folded(u, _p=pole):
            return f(_p + u) + f(_p - u)

        parts.append(integrate_adaptive(folded, 0.0, h, inner_pts, spec))
        res = sum_results(parts)
        history.append(res)
        if previous is not None:
            gap = abs(res.value - previous.value)
            if gap <= spec.tolerance(res.value):
                return IntegralResult(res.value, res.error_estimate + gap,
                                      res.subdivisions_used, res.converged)
        previous = res
        h *= 0.5
    last = history[-1]
    gap = abs(history[-1].value - history[-2].value)
    return IntegralResult(last.value, last.error_estimate + gap,
                          last.subdivisions_used, False)


# ---------------------------------------------------------------------------
# Level crossings
# ---------------------------------------------------------------------------

def _expit(y):
    return 0.5 * (1.0 + np.tanh(0.5 * y))


@dataclass(frozen=True)
class _Cell:
    """An open interval with a parametrization ``y -> x`` resolving both ends."""
    lo: float
    hi: float
    scale: float

    @property
    def kind(self) -> str:
        if math.isinf(self.lo):
            return "left"
        if math.isinf(self.hi):
            return "right"
        return "finite"

    def x(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == "finite":
            w = self.hi - self.lo
            return np.where(y < 0, self.lo + w * _expit(y), self.hi - w * _expit(-y))
        if self.kind == "right":
            return self.lo + self.scale * np.exp(y)
        return self.hi - self.scale * np.exp(-y)

    def dx_dy(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == "finite":
            return (self.hi - self.lo) * _expit(y) * _expit(-y)
        if self.kind == "right":
            return self.scale * np.exp(y)
        return self.scale * np.exp(-y)

    def dist_lo(self, y):
        """Exact distance ``x(y) - lo`` (infinite for a left-unbounded cell)."""
        y = np.asarray(y, dtype=float)
        if self.kind == "finite":
            return (self.hi - self.lo) * _expit(y)
        if self.kind == "right":
            return self.scale * np.exp(y)
        return np.full(y.shape, math.inf)

    def dist_hi(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == "finite":
            return (self.hi - self.lo) * _expit(-y)
        if self.kind == "left":
            return self.scale * np.exp(-y)
        return np.full(y.shape, math.inf)

    def y_range(self) -> tuple[float, float]:
        """Parameter window keeping ``x`` at least 8 ulp away from finite ends."""
        if self.kind == "finite":
            eps = 8 * np.spacing(max(abs(self.lo), abs(self.hi), 1e-300))
            ymax = min(36.0, math.log(self.hi - self.lo) - math.log(eps))
            return (-ymax, ymax)
        end = self.lo if self.kind == "right" else self.hi
        eps = 8 * np.spacing(max(abs(end), 1e-300))
        bound = min(36.0, math.log(self.scale) - math.log(eps))
        if self.kind == "right":
            return (-bound, 36.0)
        return (-36.0, bound)


@dataclass(frozen=True)
class MonotonePiece:
    cell: _Cell
    y_lo: float
    y_hi: float
    increasing: bool
    f_lo: float
    f_hi: float
    certified: bool

    @property
    def lo(self) -> float:
        return float(self.cell.x(self.y_lo))

    @property
    def hi(self) -> float:
        return float(self.cell.x(self.y_hi))

    @property
    def open_lo(self) -> bool:
        return self.y_lo <= self.cell.y_range()[0]

    @property
    def open_hi(self) -> bool:
        return self.y_hi >= self.cell.y_range()[1]


@dataclass(frozen=True)
class Crossing:
    x: float
    direction: int       # +1 when F increases through the level


@dataclass
class LevelSolution:
    crossings: list[Crossing]
    certified: bool
    scan_resolution: int | None = None


@dataclass
class LevelSolver:
    """Monotone decomposition of a piecewise-smooth function, reusable across levels.

    ``F`` and ``dF`` are vectorized.  Cells are the gaps between skeleton
    points; within a cell, critical points are located from sign changes of
    ``dF`` on a graded scan and refined with Brent's method.  If
    ``monotone_certified`` is set the caller vouches that ``dF`` has constant
    sign on each cell, and no scan is performed.
    """
    F: Vectorized
    dF: Vectorized | None
    skeleton: Sequence[float]
    interval: tuple[float, float] = (-math.inf, math.inf)
    scale: float = 1.0
    scan_points: int = 400
    monotone_certified: bool = False
    pieces: list[MonotonePiece] = field(init=False)

    def __post_init__(self):
        a, b = self.interval
        pts = sorted(set(float(p) for p in self.skeleton if a < p < b))
        edges = [a] + pts + [b]
        cells = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            if math.isinf(lo) and math.isinf(hi):
                cells.append(_Cell(lo, 0.0, self.scale))
                cells.append(_Cell(0.0, hi, self.scale))
            else:
                cells.append(_Cell(lo, hi, self.scale))
        self.pieces = []
        for cell in cells:
            self.pieces.extend(self._decompose(cell))

    def _derivative_y(self, cell: _Cell, y):
        if self.dF is None:
            h = 1e-6
            return (self.F(cell.x(y + h)) - self.F(cell.x(y - h))) / (2 * h)
        return self.dF(cell.x(y)) * cell.dx_dy(y)

    def _decompose(self, cell: _Cell) -> list[MonotonePiece]:
        y0, y1 = cell.y_range()
        if self.monotone_certified:
            ys = np.array([y0, 0.5 * (y0 + y1), y1])
            roots: list[float] = []
            certified = True
        else:
            ys = np.linspace(y0, y1, self.scan_points)
            d = self._derivative_y(cell, ys)
            sgn = np.sign(d)
            roots = []
            for i in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
                try:
                    r = optimize.brentq(lambda t: float(self._derivative_y(cell, np.array([t]))[0]),
                                        ys[i], ys[i + 1], xtol=1e-14)
                except ValueError:
                    r = 0.5 * (ys[i] + ys[i + 1])
                roots.append(r)
            certified = bool(np.all(sgn != 0)) and not roots
        bounds = [y0] + roots + [y1]
        pieces = []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            if not hi > lo:
                continue
            vals = self.F(cell.x(np.array([lo, hi])))
            f_lo, f_hi = float(vals[0]), float(vals[1])
            if f_lo == f_hi:
                continue  # flat piece: no crossings, measured directly by callers
            pieces.append(MonotonePiece(cell, lo, hi, f_hi > f_lo, f_lo, f_hi, certified))
        return pieces

    def invert(self, piece: MonotonePiece, levels: np.ndarray, iterations: int = 64):
        """Parameter ``y`` of the crossing for each level inside the piece range.

        Levels outside the open range give ``nan``.  With a derivative the
        iteration is Newton safeguarded by the bracket, else plain bisection.
        """
        levels = np.asarray(levels, dtype=float)
        lo_v, hi_v = min(piece.f_lo, piece.f_hi), max(piece.f_lo, piece.f_hi)
        inside = (levels > lo_v) & (levels < hi_v)
        out = np.full(levels.shape, np.nan)
        if not np.any(inside):
            return out
        lv = levels[inside]
        ylo = np.full(lv.shape, piece.y_lo)
        yhi = np.full(lv.shape, piece.y_hi)
        sign = 1.0 if piece.increasing else -1.0
        cell = piece.cell
        if self.dF is None:
            for _ in range(iterations):
                mid = 0.5 * (ylo + yhi)
                above = sign * (self.F(cell.x(mid)) - lv) > 0
                yhi = np.where(above, mid, yhi)
                ylo = np.where(above, ylo, mid)
            out[inside] = 0.5 * (ylo + yhi)
            return out
        # seed brackets from a coarse table so Newton starts close
        grid = np.linspace(piece.y_lo, piece.y_hi, 33)
        with np.errstate(all="ignore"):
            tab = sign * self.F(cell.x(grid[1:-1]))
        if np.all(np.isfinite(tab)) and np.all(np.diff(tab) >= 0):
            k = np.searchsorted(tab, sign * lv)
            ylo = np.where(k > 0, grid[k], ylo)
            yhi = np.where(k < len(tab), grid[k + 1], yhi)
            t_lo = np.where(k > 0, tab[np.maximum(k - 1, 0)], np.nan)
            t_hi = np.where(k < len(tab), tab[np.minimum(k, len(tab) - 1)], np.nan)
            with np.errstate(all="ignore"):
                frac = (sign * lv - t_lo) / (t_hi - t_lo)
            y = np.where(np.isfinite(frac) & (frac > 0) & (frac < 1),
                         ylo + frac * (yhi - ylo), 0.5 * (ylo + yhi))
        else:
            y = 0.5 * (ylo + yhi)
        active = np.arange(len(lv))
        for _ in range(2 * iterations):
            ya, la = y[active], lv[active]
            xa = cell.x(ya)
            phi = sign * (self.F(xa) - la)
            above = phi > 0
            yhi[active] = np.where(above, ya, yhi[active])
            ylo[active] = np.where(above, ylo[active], ya)
            with np.errstate(all="ignore"):
                d = sign * self.dF(xa) * cell.dx_dy(ya)
                yn = ya - phi / d
            lo_a, hi_a = ylo[active], yhi[active]
            bad = ~np.isfinite(yn) | (yn <= lo_a) | (yn >= hi_a)
            yn = np.where(bad, 0.5 * (lo_a + hi_a), yn)
            ulp = 1e-15 * (1 + np.abs(ya))
            tiny = np.abs(phi) <= 4e-16 * np.abs(la)
            # x(y) is quantized near the nodes: stop once x no longer moves
            frozen = np.abs(cell.x(yn) - xa) <= 2 * np.spacing(np.abs(xa))
            done = (np.abs(yn - ya) <= ulp) | (hi_a - lo_a <= ulp) | tiny | frozen
            y[active] = np.where(tiny, ya, yn)
            active = active[~done]
            if not len(active):
                break
        out[inside] = y
        return out

    def solve(self, level: float) -> LevelSolution:
        crossings = []
        for piece in self.pieces:
            y = self.invert(piece, np.array([level]))[0]
            if np.isfinite(y):
                crossings.append(Crossing(float(piece.cell.x(y)),
                                          1 if piece.increasing else -1))
        crossings.sort(key=lambda c: c.x)
        certified = all(p.certified for p in self.pieces)
        return LevelSolution(crossings, certified,
                             None if self.monotone_certified else self.scan_points)

    def superlevel_measure(self, levels: np.ndarray) -> np.ndarray:
        """Lebesgue measure of ``{F > s}`` for each level ``s`` (vectorized).

        Unbounded pieces contribute only when bounded by the crossing; a
        level below the value at an infinite end gives ``inf``.
        """
        levels = np.asarray(levels, dtype=float)
        total = np.zeros(levels.shape)
        for piece in self.pieces:
            total += self._piece_measure(piece, levels, upper=True)
        return total

    def sublevel_measure(self, levels: np.ndarray) -> np.ndarray:
        levels = np.asarray(levels, dtype=float)
        total = np.zeros(levels.shape)
        for piece in self.pieces:
            total += self._piece_measure(piece, levels, upper=False)
        return total

    def _piece_measure(self, piece: MonotonePiece, levels, upper: bool):
        cell = piece.cell
        if piece.open_lo and cell.kind == "left" or piece.open_hi and cell.kind == "right":
            full = math.inf
        else:
            full = float(_segment(cell, piece.y_lo, piece.y_hi))
        y = self.invert(piece, levels)
        res = np.zeros(levels.shape)
        lo_v, hi_v = min(piece.f_lo, piece.f_hi), max(piece.f_lo, piece.f_hi)
        if upper:
            res[levels <= lo_v] = full
        else:
            res[levels >= hi_v] = full
        ok = np.isfinite(y)
        if np.any(ok):
            yy = y[ok]
            left_part = _segment(cell, piece.y_lo, yy)
            right_part = _segment(cell, yy, piece.y_hi)
            # increasing & upper -> right part; decreasing & upper -> left part
            take_right = piece.increasing == upper
            res[ok] = right_part if take_right else left_part
        return res


def _segment(cell: _Cell, y_a, y_b):
    """Length of the x-image of [y_a, y_b], computed from the nearer cell end."""
    y_a = np.asarray(y_a, dtype=float)
    y_b = np.asarray(y_b, dtype=float)
    if cell.kind == "right":
        return cell.dist_lo(y_b) - cell.dist_lo(y_a)
    if cell.kind == "left":
        return cell.dist_hi(y_a) - cell.dist_hi(y_b)
    from_lo = cell.dist_lo(y_b) - cell.dist_lo(y_a)
    from_hi = cell.dist_hi(y_a) - cell.dist_hi(y_b)
    near_lo = (y_a + y_b) < 0
    return np.where(near_lo, from_lo, from_hi)


def solve_levels(F: Vectorized, skeleton: Sequence[float], level: float,
                 search_interval: tuple[float, float], spec: QuadratureSpec = DEFAULT_SPEC,
                 dF: Vectorized | None = None, monotone_certified: bool = False,
                 scan_points: int = 400, scale: float = 1.0) -> LevelSolution:
    """All solutions of ``F(x) = level`` in the search interval.

    Flat stretches at exactly the queried level report no crossing.
    Raises :class:`UnresolvedCell` if a crossing cannot be bracketed.
    """
    solver = LevelSolver(F, dF, skeleton, tuple(search_interval), scale, scan_points,
                         monotone_certified)
    sol = solver.solve(level)
    tol = 10 * max(spec.abs_tol, spec.rel_tol * abs(level))
    for c in sol.crossings:
        xs = np.array([c.x])
        resid = abs(float(F(xs)[0]) - level)
        if dF is not None:
            slope = abs(float(dF(xs)[0]))
            tol_here = tol * max(1.0, slope * max(abs(c.x), 1.0) * 1e-6)
        else:
            tol_here = tol
        if not math.isfinite(resid) or resid > max(tol_here, 1e-6 * max(1.0, abs(level))):
            raise UnresolvedCell(f"crossing near x={c.x!r} has residual {resid!r}")
    return sol


# ---------------------------------------------------------------------------
# Circle maxima
# ---------------------------------------------------------------------------

def max_on_circle(u: Callable[[np.ndarray], np.ndarray], r: float,
                  spec: QuadratureSpec = DEFAULT_SPEC, grid: int = 256,
                  stages: int = 3) -> tuple[float, float]:
    """Maximum of ``u`` on ``|z| = r`` and the angle where it is attained.

    A uniform grid is followed by ``stages`` zoomed grids around the best
    candidates and a final bounded Brent search (angular tolerance 1e-10).
    """
    theta = np.linspace(0.0, 2 * math.pi, grid, endpoint=False)
    vals = np.asarray(u(r * np.exp(1j * theta)), dtype=float)
    if np.all(vals == -np.inf):
        raise AllSingular("u is -inf at every sample on the circle")
    vals = np.where(np.isnan(vals), -np.inf, vals)
    left = np.roll(vals, 1)
    right = np.roll(vals, -1)
    peaks = np.nonzero((vals >= left) & (vals >= right))[0]
    peaks = peaks[np.argsort(-vals[peaks], kind="stable")][:4]
    step = 2 * math.pi / grid

    def neg(t):
        v = float(u(np.array([r * np.exp(1j * t)]))[0])
        return -v if math.isfinite(v) else math.inf

    best_v, best_t = float(vals[peaks[0]]), float(theta[peaks[0]])
    for i in peaks:
        t0 = float(theta[i])
        width = step
        for _ in range(stages):
            ts = t0 + np.linspace(-width, width, 33)
            vs = np.asarray(u(r * np.exp(1j * ts)), dtype=float)
            vs = np.where(np.isnan(vs), -np.inf, vs)
            t0 = float(ts[int(np.argmax(vs))])
            width /= 8.0
        res = optimize.minimize_scalar(neg, bounds=(t0 - width * 8, t0 + width * 8),
                                       method="bounded", options={"xatol": 1e-10})
        cand = [(-float(res.fun), float(res.x)), (-neg(t0), t0)]
        for v, t in cand:
            if v > best_v:
                best_v, best_t = v, t
    return best_v, best_t % (2 * math.pi)
