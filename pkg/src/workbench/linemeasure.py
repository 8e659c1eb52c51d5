"""Real measures on the line, the level profiles of their transforms, and R_g.

A measure is a finite set of atoms plus a step density.  Its transform
``g`` is a :class:`~workbench.hilbert.LogSum` with poles at the atoms.
``N_g`` is represented as a :class:`~workbench.hilbert.TailedProfile`: a
hyperbolic part ``|eta(R)|/(pi s)``, a piecewise-linear core sampled on a
geometric level grid, and a ``1/s`` tail beyond the grid carrying the
remaining pole mass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import spence

from .checks import CheckResult, identity, inequality
from .errors import NonConvergence, SingularPoint
from .hilbert import INV_PI, LogSum, Segments, TailedProfile, hilbert_measure
from .numerics import (
    DEFAULT_SPEC,
    IntegralResult,
    LevelSolver,
    QuadratureSpec,
    integrate_adaptive,
    sum_results,
)
from .stepfn import StepFunction

LEVELS_PER_DECADE = 128
GRID_DECADES = (-4, 4)
DEEP_DECADE = -10
DEEP_PER_DECADE = 16
HIGH_DECADE = 7
HIGH_PER_DECADE = 64


@dataclass(frozen=True, eq=False)
class RealLineMeasure:
    atom_positions: np.ndarray = field(default_factory=lambda: np.empty(0))
    atom_weights: np.ndarray = field(default_factory=lambda: np.empty(0))
    density: StepFunction = field(default_factory=StepFunction.zero)

    def __post_init__(self):
        x = np.asarray(self.atom_positions, dtype=float).ravel()
        a = np.asarray(self.atom_weights, dtype=float).ravel()
        if x.shape != a.shape:
            raise ValueError("atom positions and weights differ in length")
        if len(np.unique(x)) != len(x):
            raise ValueError("atom positions must be distinct")
        if np.any(a == 0) or not np.all(np.isfinite(a)) or not np.all(np.isfinite(x)):
            raise ValueError("atom weights must be finite and nonzero")
        order = np.argsort(x)
        object.__setattr__(self, "atom_positions", x[order])
        object.__setattr__(self, "atom_weights", a[order])

    @classmethod
    def from_atoms(cls, atoms, density: StepFunction | None = None) -> "RealLineMeasure":
        atoms = list(atoms)
        x = np.array([p for p, _ in atoms], dtype=float)
        a = np.array([w for _, w in atoms], dtype=float)
        return cls(x, a, density if density is not None else StepFunction.zero())

    @classmethod
    def from_dict(cls, d: dict) -> "RealLineMeasure":
        dens = d.get("density")
        return cls.from_atoms(d.get("atoms", []),
                              StepFunction.from_dict(dens) if dens else StepFunction.zero())

    def to_dict(self) -> dict:
        return {"atoms": [[float(x), float(a)] for x, a in zip(self.atom_positions, self.atom_weights)],
                "density": self.density.to_dict()}

    # norms --------------------------------------------------------------
    @property
    def sing_norm(self) -> float:
        return math.fsum(np.abs(self.atom_weights).tolist())

    @property
    def ac_norm(self) -> float:
        d = self.density
        return math.fsum(np.abs(d.values * d.lengths).tolist()) if not d.is_zero else 0.0

    @property
    def ac_mass(self) -> float:
        return self.density.integral()

    @property
    def total_variation(self) -> float:
        return self.sing_norm + self.ac_norm

    @property
    def total_mass(self) -> float:
        return math.fsum(self.atom_weights.tolist()) + self.ac_mass

    @property
    def is_zero(self) -> bool:
        return len(self.atom_weights) == 0 and self.density.is_zero

    @property
    def is_nonnegative(self) -> bool:
        return bool(np.all(self.atom_weights > 0) and np.all(self.density.values >= 0))

    @property
    def is_singular(self) -> bool:
        return self.density.is_zero

    @property
    def width(self) -> float:
        pts = list(self.atom_positions)
        if not self.density.is_zero:
            pts += list(self.density.support)
        return (max(pts) - min(pts)) if pts else 0.0

    def level_scale(self) -> float:
        """Natural size of the transform's values: ``||eta|| / (pi max(1, width))``."""
        if self.is_zero:
            return 1.0
        return self.total_variation / (math.pi * max(1.0, self.width))

    def transform(self) -> LogSum:
        return hilbert_measure(self)


def default_level_grid(eta: RealLineMeasure) -> np.ndarray:
    """Geometric levels: fine over ``GRID_DECADES``, coarse down to ``1e-10`` and up to
    ``1e7`` (times the level scale).

    The profile treats ``N`` beyond the last level as exactly ``beta/s``; the
    neglected ``O(1/s^2)`` remainder moves ``R`` by ``O(1/s_max)`` in L1, so
    the top of the grid sits far out where ``N`` is smooth and cheap to sample.
    """
    lo, hi = GRID_DECADES
    fine = np.logspace(lo, hi, (hi - lo) * LEVELS_PER_DECADE + 1)
    deep = np.logspace(DEEP_DECADE, lo, (lo - DEEP_DECADE) * DEEP_PER_DECADE + 1)[:-1]
    high = np.logspace(hi, HIGH_DECADE, (HIGH_DECADE - hi) * HIGH_PER_DECADE + 1)[1:]
    return eta.level_scale() * np.concatenate([deep, fine, high])


class MeasureLevels:
    """Exact evaluation of ``N_g`` for ``g = H eta`` through a reusable level solver."""

    def __init__(self, eta: RealLineMeasure, spec: QuadratureSpec = DEFAULT_SPEC):
        self.eta = eta
        self.spec = spec
        self.g = eta.transform()
        certified = bool(eta.is_singular and np.all(eta.atom_weights > 0))
        self.solver = None
        if not eta.is_zero:
            self.solver = LevelSolver(self.g.evaluate, self.g.derivative, self.g.nodes.tolist(),
                                      scale=max(1.0, eta.width), monotone_certified=certified)
        self.alpha = abs(eta.total_mass) * INV_PI
        self.beta = eta.sing_norm * INV_PI
        self.closure_defect = 0.0
        self.beyond_mass = 0.0

    @property
    def certified(self) -> bool:
        return self.solver is None or all(p.certified for p in self.solver.pieces)

    def N(self, s) -> np.ndarray:
        """``|{g > s}|`` for ``s > 0`` and ``-|{g < s}|`` for ``s < 0``."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.zeros(s.shape)
        if self.solver is None:
            return out
        pos = s > 0
        neg = s < 0
        if np.any(pos):
            out[pos] = self.solver.superlevel_measure(s[pos])
        if np.any(neg):
            out[neg] = -self.solver.sublevel_measure(s[neg])
        if np.any(s == 0):
            out[s == 0] = np.nan
        return out

    def _core_values(self, levels: np.ndarray) -> np.ndarray:
        return self.N(levels) - self.alpha / levels

    def _refine(self, grid: np.ndarray, values: np.ndarray, rounds: int = 12, limit: float = math.inf):
        """Insert geometric midpoints where linear interpolation is visibly off.

        Only the halves of intervals flagged in the previous round are re-examined;
        intervals beyond ``limit`` in modulus are left as sampled.
        """
        thresh = 1e-7 * max(self.eta.total_variation, 1e-300)
        sign = np.sign(grid[0])
        keep = np.abs(grid[:-1]) < limit
        left, right = grid[:-1][keep], grid[1:][keep]
        vl, vr = values[:-1][keep], values[1:][keep]
        new_s, new_v = [grid], [values]
        for _ in range(rounds):
            if not len(left):
                break
            mids = sign * np.sqrt(left * right)
            mv = self._core_values(mids)
            frac = (mids - left) / (right - left)
            interp = vl + (vr - vl) * frac
            bad = np.abs(mv - interp) * np.abs(right - left) > thresh
            new_s.append(mids[bad])
            new_v.append(mv[bad])
            left, right, vl, vr = (np.concatenate([left[bad], mids[bad]]),
                                   np.concatenate([mids[bad], right[bad]]),
                                   np.concatenate([vl[bad], mv[bad]]),
                                   np.concatenate([mv[bad], vr[bad]]))
        grid = np.concatenate(new_s)
        values = np.concatenate(new_v)
        order = np.argsort(sign * grid)
        return grid[order], values[order]

    def _debiased(self, s: np.ndarray, v: np.ndarray) -> Segments:
        """Linear interpolant with each piece shifted to carry the integral of the
        quadratic through its geometric midpoint, so no net bias is left behind."""
        seg = Segments.from_knots(s, v)
        m = np.sign(s[0]) * np.sqrt(s[:-1] * s[1:])
        vm = self._core_values(m)
        lin = v[:-1] + (v[1:] - v[:-1]) * (m - s[:-1]) / (s[1:] - s[:-1])
        a = (vm - lin) / ((m - s[:-1]) * (m - s[1:]))
        h = s[1:] - s[:-1]
        return Segments(seg.lo, seg.hi, seg.start - a * h * h / 6.0, seg.slope)

    @staticmethod
    def _window_integral(s, v):
        """Integral of the core over the half-window next to 0, from ``a s^p + b`` through the three innermost samples."""
        s0, s1, s2 = abs(s[0]), abs(s[1]), abs(s[2])
        v0, v1, v2 = v[0], v[1], v[2]
        fallback = v0 * s0
        d1, d2 = v1 - v0, v2 - v1
        if d1 == 0 or d2 == 0 or d1 * d2 < 0:
            return fallback
        ratio = s1 / s0
        rp = d2 / d1
        p = math.log(rp) / math.log(ratio)
        if not (p > -0.95) or abs(s2 / s1 - ratio) > 1e-9 * ratio:
            return fallback
        if abs(rp - 1.0) < 1e-12:
            return fallback
        amp = d1 / (rp - 1.0)
        base = v0 - amp
        return amp * s0 / (p + 1.0) + base * s0

    def profile(self, level_grid=None) -> TailedProfile:
        if self.solver is None:
            return TailedProfile()
        grid = np.asarray(level_grid if level_grid is not None else default_level_grid(self.eta),
                          dtype=float)
        grid = np.unique(grid[grid > 0])
        # the sparse high band only carries the far remainder; refining it costs
        # many pieces for no visible gain in the R_g integrals
        limit = self.eta.level_scale() * 10.0 ** GRID_DECADES[1] * (1 + 1e-12)
        pg, pv = self._refine(grid, self._core_values(grid), limit=limit)
        ng, nv = self._refine(-grid, self._core_values(-grid), limit=limit)
        s_min, s_max = float(grid[0]), float(grid[-1])
        right = self._debiased(pg, pv)
        left = self._debiased(ng[::-1], nv[::-1])
        # mass of N - beta/s beyond the grid, from its k/s^2 decay at the last samples
        tail = self.beta - self.alpha
        beyond = s_max * ((pv[-1] - tail / s_max) + (nv[-1] + tail / s_max))
        self.beyond_mass = beyond
        inner_total = right.integral() + left.integral() + beyond
        # the two half-windows get their modelled integrals plus one shared
        # constant that makes the whole core integrate to zero
        g3 = grid[:3]
        w_pos = self._window_integral(g3, self._core_values(g3))
        w_neg = self._window_integral(-g3, self._core_values(-g3))
        delta = -(inner_total + w_pos + w_neg) / (2 * s_min)
        self.closure_defect = abs(delta) * 2 * s_min
        inner = Segments(np.array([-s_min, 0.0]), np.array([0.0, s_min]),
                         np.array([w_neg / s_min + delta, w_pos / s_min + delta]), np.zeros(2))
        core = left.concat(inner).concat(right)
        return TailedProfile(core, self.alpha, self.beta - self.alpha, s_max)


def level_profile(eta: RealLineMeasure, level_grid=None, spec: QuadratureSpec = DEFAULT_SPEC) -> TailedProfile:
    """Tailed representation of ``N_g`` for ``g = H eta``."""
    return MeasureLevels(eta, spec).profile(level_grid)


def _r_values(N: TailedProfile, t):
    return -(N.core.hilbert(t) + N.tail_hilbert(t))


@dataclass
class RgProfile:
    t: np.ndarray
    values: np.ndarray
    positive: float
    negative: float
    total: float
    error_estimate: float
    closure_defect: float = 0.0
    profile: TailedProfile | None = None

    @property
    def l1(self) -> float:
        return self.positive + self.negative


def _multipole(N: TailedProfile, kmax: int = 40) -> np.ndarray:
    """``c_k`` with ``R(t) = (1/pi) sum_k c_k / t^(k+1)`` for ``|t|`` beyond the profile."""
    lo, hi, st, sl = N.core.lo, N.core.hi, N.core.start, N.core.slope
    a0 = st - sl * lo
    c = np.zeros(kmax + 1)
    for k in range(kmax + 1):
        m = a0 * (hi ** (k + 1) - lo ** (k + 1)) / (k + 1) + sl * (hi ** (k + 2) - lo ** (k + 2)) / (k + 2)
        c[k] = math.fsum(m.tolist())
    if N.tail:
        S = N.cutoff
        odd = np.arange(1, kmax + 1, 2)
        c[odd] -= 2.0 * N.tail * S ** odd / odd
    return c


def _tail_primitive(N: TailedProfile, t):
    """Primitive of ``tail_hilbert``: ``(tail/pi) Re[Li2(u) - Li2(-u)]``, ``u = t/S``."""
    t = np.asarray(t, dtype=float)
    if not N.tail or not math.isfinite(N.cutoff):
        return np.zeros(t.shape)
    u = t / N.cutoff
    F = spence(1 - u + 0j).real - spence(1 + u + 0j).real
    return N.tail * INV_PI * F


def _core_increment(N: TailedProfile, a, b):
    """``int_a^b -(H core) dt = -(1/pi) (Lambda(a) - Lambda(b))`` with ``Lambda = core.log_moment``."""
    pts, inv = np.unique(np.concatenate([a, b]), return_inverse=True)
    lam = N.core.log_moment(pts)
    la, lb = lam[inv[:len(a)]], lam[inv[len(a):]]
    return -INV_PI * (la - lb)


def _rg_integrals(N: TailedProfile, spec: QuadratureSpec):
    """``(int R^+, int R^-, error)``.

    On ``|t| <= 4 S`` the line is cut at the sign changes of ``R`` (located on
    a scan through every knot gap and refined by Brent's method) and at the
    knots where the core jumps; each piece is integrated with the exact
    primitive.  Beyond ``4 S`` the multipole series is integrated in
    ``v = 1/t`` (its ``1/t`` term is the core integral, zero by
    construction, and is dropped).
    """
    if len(N.core.lo) == 0 and not N.tail:
        return 0.0, 0.0, 0.0
    nodes, J, _, _ = N.core._knots()
    nz = nodes[nodes != 0]
    S = max(float(np.max(np.abs(nz))), N.cutoff if math.isfinite(N.cutoff) else 0.0)
    T = 4.0 * S
    jump_scale = max(float(np.max(np.abs(N.core.start))), abs(N.tail) / S, 1e-300)
    jumps = nodes[np.abs(J) > 1e-9 * jump_scale]
    if N.tail:
        jumps = np.concatenate([jumps, [-S, S]])
    outer = np.geomspace(S, T, 64)[1:]
    skeleton = np.unique(np.concatenate([[-T, T], nodes, outer, -outer]))
    skeleton = skeleton[np.abs(skeleton) <= T]
    probe = 0.5 * (skeleton[:-1] + skeleton[1:])
    rv = _r_values(N, probe)
    cuts = [-T, T] + jumps.tolist()
    sign = np.sign(rv)
    for i in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        lo, hi = probe[i], probe[i + 1]
        inner_jumps = jumps[(jumps > lo) & (jumps < hi)]
        if len(inner_jumps):
            continue  # the sign change happens through a logarithmic singularity
        cuts.append(optimize.brentq(lambda x: float(_r_values(N, np.array([x]))[0]), lo, hi,
                                    xtol=1e-15 * max(abs(lo), abs(hi))))
    cuts = np.unique(np.array(cuts))
    cuts = cuts[np.abs(cuts) <= T]
    a, b = cuts[:-1], cuts[1:]
    inc = _core_increment(N, a, b) - (_tail_primitive(N, b) - _tail_primitive(N, a))
    # sign of each piece from a probe strictly inside it
    idx = np.searchsorted(probe, 0.5 * (a + b))
    idx = np.clip(idx, 0, len(probe) - 1)
    mids = np.where((probe[idx] > a) & (probe[idx] < b), probe[idx], 0.5 * (a + b))
    psign = np.sign(_r_values(N, mids))
    psign = np.where(psign == 0, np.sign(inc), psign)
    pos = math.fsum(np.where(psign > 0, np.abs(inc), 0.0).tolist())
    neg = math.fsum(np.where(psign < 0, np.abs(inc), 0.0).tolist())
    mismatch = math.fsum(np.where(np.sign(inc) * psign < 0, np.abs(inc), 0.0).tolist())

    c = _multipole(N)
    k = np.arange(1, len(c))

    def far(v, side):
        return INV_PI * (c[1:][None, :] * (side ** (k + 1))[None, :]
                         * np.asarray(v)[:, None] ** (k - 1)[None, :]).sum(axis=1)

    err = mismatch + 1e-15 * (pos + neg) * len(nodes)
    for side in (1.0, -1.0):
        for sgn in (1.0, -1.0):
            r = integrate_adaptive(lambda v, side=side, sgn=sgn: np.maximum(sgn * far(v, side), 0.0),
                                   0.0, 1.0 / T, (), spec)
            if not r.converged:
                raise NonConvergence("far-field R_g integral did not converge", r)
            if sgn > 0:
                pos += r.value
            else:
                neg += r.value
            err += r.error_estimate
    return pos, neg, err


def rg_profile(eta: RealLineMeasure, t_grid=None, spec: QuadratureSpec | None = None,
               level_grid=None) -> RgProfile:
    """Samples of ``R_g`` and the integrals of its positive part, negative part and itself."""
    return _rg_profile(eta, spec, t_grid, level_grid)[0]


def _rg_profile(eta, spec=None, t_grid=None, level_grid=None):
    scale = max(eta.total_variation, 1e-300)
    if spec is None:
        spec = QuadratureSpec(abs_tol=1e-8 * scale, rel_tol=1e-8)
    lv = MeasureLevels(eta, spec)
    N = lv.profile(level_grid)
    if t_grid is None:
        s = eta.level_scale()
        half = 1.0123 * s * np.logspace(-3, 3, 61)
        t_grid = np.concatenate([-half[::-1], half])
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid == 0) or np.any(np.isin(t_grid, N.singular_points)):
        raise SingularPoint("R is undefined at 0 and at profile nodes")
    values = _r_values(N, t_grid) if not eta.is_zero else np.zeros(t_grid.shape)
    pos, neg, err = _rg_integrals(N, spec)
    # the remainder of N beyond the last level is dropped; its mass bounds the effect
    budget = err + lv.closure_defect + abs(lv.beyond_mass)
    return RgProfile(t_grid, values, pos, neg, pos - neg, budget, lv.closure_defect, N), lv


def rg_direct(eta: RealLineMeasure, t: float, spec: QuadratureSpec = DEFAULT_SPEC,
              span: float | None = None) -> IntegralResult:
    """Independent route: ``R(t) = -(1/pi) int ln|1 - g(x)/t| dx`` (symmetric at infinity)."""
    if t == 0:
        raise SingularPoint("R is undefined at 0")
    g = eta.transform()
    if eta.is_zero:
        return IntegralResult(0.0, 0.0, 0, True)
    m = eta.total_mass
    x_atoms = eta.atom_positions
    d = eta.density
    mu1 = math.fsum((eta.atom_weights * x_atoms).tolist())
    if not d.is_zero:
        mu1 += math.fsum((d.values * (d.breakpoints[1:] ** 2 - d.breakpoints[:-1] ** 2) / 2).tolist())
    X = span if span is not None else 1e5 * max(1.0, eta.width, abs(m) / abs(t))
    solver = LevelSolver(g.evaluate, g.derivative, g.nodes.tolist(), (-X, X), scale=max(1.0, eta.width))
    pts = g.nodes.tolist() + [c.x for c in solver.solve(t).crossings]

    def f(x):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(1.0 - g.evaluate(x) / t))

    core = integrate_adaptive(f, -X, X, pts, spec)
    tail = 2 * mu1 / (math.pi * t * X) - m * m / (math.pi ** 2 * t * t * X)
    return IntegralResult(-INV_PI * (core.value + tail), INV_PI * core.error_estimate + abs(tail) / X,
                          core.subdivisions_used, core.converged)


def titchmarsh_product(eta: RealLineMeasure, s: float) -> float:
    """``s N_g(s)``; tends to ``|eta(R)|/pi`` as ``s -> 0``."""
    return float(s * MeasureLevels(eta).N(np.array([s]))[0])


def titchmarsh_limit(eta: RealLineMeasure, s: float | None = None,
                     levels: MeasureLevels | None = None) -> tuple[float, float]:
    """Extrapolated ``lim s N_g(s)`` from both sides and its first-order error.

    ``s N_g(s)`` is affine in ``s`` to leading order, so one Richardson step
    on ``(s, s/10)`` removes the linear term.
    """
    if eta.is_zero:
        return 0.0, 0.0
    lv = levels or MeasureLevels(eta)
    s = s if s is not None else 1e-6 * eta.level_scale()
    pts = np.array([s, s / 10, -s, -s / 10])
    p = pts * lv.N(pts)
    right = p[1] - (p[0] - p[1]) / 9
    left = p[3] - (p[2] - p[3]) / 9
    return 0.5 * (right + left), abs(right - left)


def kolmogorov_weak_constant(eta: RealLineMeasure, level_grid=None, levels: MeasureLevels | None = None) -> float:
    """``sup_s |s N_g(s)| / ||eta||`` over the level grid (both signs)."""
    if eta.is_zero:
        return 0.0
    lv = levels or MeasureLevels(eta)
    grid = np.asarray(level_grid if level_grid is not None else default_level_grid(eta))
    s = np.concatenate([grid, -grid])
    return float(np.max(np.abs(s * lv.N(s)))) / eta.total_variation


def boole_quantities(eta: RealLineMeasure, spec: QuadratureSpec | None = None,
                     rel_tol: float = 1e-3) -> list[CheckResult]:
    """Both sides of the three R_g relations and their corollaries.

    Tolerances are ``rel_tol * ||eta||`` absolute.
    """
    norm = eta.total_variation
    tol = rel_tol * max(norm, 1e-300) if norm else 1e-12
    if eta.is_zero:
        zero = [inequality("thm3_1_pos", 0.0, 0.0, tol), inequality("thm3_1_neg", 0.0, 0.0, tol),
                identity("thm3_1_total", 0.0, 0.0, tol), inequality("cor3_5", 0.0, 0.0, tol)]
        return zero
    rg, lv = _rg_profile(eta, spec)
    mass = abs(eta.total_mass)
    err = rg.error_estimate
    out = [
        inequality("thm3_1_pos", rg.positive, eta.ac_norm, tol, err),
        inequality("thm3_1_neg", rg.negative, norm - mass, tol, err),
        identity("thm3_1_total", rg.total, mass - eta.sing_norm, tol, err),
        inequality("cor3_5", rg.l1, 2 * norm, tol, err),
    ]
    limit, lim_err = titchmarsh_limit(eta, levels=lv)
    out.append(identity("titchmarsh", limit, mass / math.pi, tol, lim_err))
    kc = kolmogorov_weak_constant(eta, levels=lv)
    if eta.is_singular and eta.is_nonnegative:
        out.append(identity("kolmogorov_weak", kc, 1 / math.pi, rel_tol / math.pi))
    else:
        out.append(inequality("kolmogorov_weak", kc, 2 / math.pi, rel_tol / math.pi))
    if eta.is_nonnegative:
        out.append(inequality("cor3_6_neg", rg.negative, 0.0, tol, err))
        out.append(identity("cor3_6_norm", rg.l1, eta.ac_mass, tol, err))
    if eta.is_singular:
        out.append(inequality("cor3_7_pos", rg.positive, 0.0, tol, err))
        out.append(identity("cor3_7_norm", rg.l1, norm - mass, tol, err))
    if eta.is_singular and eta.is_nonnegative:
        out.append(inequality("boole", rg.l1, 0.0, tol, err))
    return out
