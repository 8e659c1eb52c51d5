"""Genus-one canonical integrals over finite planar point configurations.

``u(z) = sum_k w_k K(z / zeta_k)`` with ``K(w) = log|1 - w| + Re w``.  Counting
functions are exact step profiles, the counting-function integrals are
closed forms, and the characteristic functions are adaptive angular
quadratures of the kernel sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.stats import qmc

from .errors import HypothesisViolated, InvalidP
from .hilbert import hilbert_step
from .logdet import AnalyticLogDet, kernel_k
from .numerics import (DEFAULT_SPEC, IntegralResult, QuadratureSpec, integrate_adaptive,
                       max_on_circle, sum_results)
from .stepfn import StepFunction, modulus_distributions

TWO_PI = 2 * math.pi
_CHUNK = 1 << 18


@dataclass(frozen=True, eq=False)
class PlanarPointMeasure:
    """Finitely many weighted points ``zeta_k != 0`` with weights ``w_k > 0``."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.points, dtype=complex).ravel().copy()
        w = np.asarray(self.weights, dtype=float).ravel().copy()
        if z.shape != w.shape:
            raise ValueError("points and weights differ in length")
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(w))):
            raise ValueError("points and weights must be finite")
        if np.any(z == 0):
            raise ValueError("points must avoid the origin")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        z.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "points", z)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_atoms(cls, atoms) -> "PlanarPointMeasure":
        a = np.asarray(atoms, dtype=float).reshape(-1, 3)
        return cls(a[:, 0] + 1j * a[:, 1], a[:, 2])

    @classmethod
    def from_dict(cls, d: dict) -> "PlanarPointMeasure":
        return cls.from_atoms(d.get("atoms", []))

    def to_dict(self) -> dict:
        return {"atoms": [[float(z.real), float(z.imag), float(w)]
                          for z, w in zip(self.points, self.weights)]}

    @property
    def is_empty(self) -> bool:
        return len(self.weights) == 0

    @property
    def total(self) -> float:
        return math.fsum(self.weights.tolist())

    @property
    def radius(self) -> float:
        return float(np.max(np.abs(self.points))) if not self.is_empty else 0.0

    @property
    def real_atoms(self) -> np.ndarray:
        return self.points[self.points.imag == 0]

    @property
    def genus_sum(self) -> float:
        """``sum w min(1/|zeta|, 1/|zeta|^2)``, finite for every finite configuration."""
        a = np.abs(self.points)
        return math.fsum((self.weights * np.minimum(1 / a, 1 / a ** 2)).tolist())

    def __call__(self, z):
        return canonical_eval(self, z)


def canonical_eval(mu: PlanarPointMeasure, z):
    """``u(z) = sum w_k K(z / zeta_k)``, ``-inf`` exactly at the points."""
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    out = np.zeros(flat.shape)
    if not mu.is_empty:
        inv = 1.0 / mu.points
        step = max(1, _CHUNK // len(inv))
        for i in range(0, len(flat), step):
            w = flat[i:i + step, None] * inv[None, :]
            # exact hits give -inf rather than a rounded near-miss
            hit = flat[i:i + step, None] == mu.points[None, :]
            k = np.where(hit, -np.inf, kernel_k(np.where(hit, 0.0, w)))
            out[i:i + step] = k @ mu.weights
    return out.reshape(z.shape) if z.shape else float(out[0])


# ---------------------------------------------------------------------------
# counting functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CountingProfile:
    """Right-continuous step function ``P(r) = sum_{rho_k <= r} w_k``."""

    radii: np.ndarray
    jumps: np.ndarray

    @classmethod
    def from_jumps(cls, radii, weights) -> "CountingProfile":
        radii = np.asarray(radii, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if len(radii) == 0:
            return cls(np.empty(0), np.empty(0))
        r, inv = np.unique(radii, return_inverse=True)
        j = np.zeros(len(r))
        np.add.at(j, inv, weights)
        return cls(r, j)

    @property
    def is_zero(self) -> bool:
        return len(self.radii) == 0

    @property
    def masses(self) -> np.ndarray:
        return np.cumsum(self.jumps)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        idx = np.searchsorted(self.radii, r, side="right")
        cum = np.concatenate([[0.0], self.masses])
        return cum[idx]

    def inner(self, r: float) -> float:
        """``int_0^r P(t)/t^2 dt``."""
        m = self.radii < r
        return math.fsum((self.jumps[m] * (1 / self.radii[m] - 1 / r)).tolist())

    def outer(self, r: float, log_power: float = 0.0) -> float:
        """``int_r^inf P(t) log^q(t/r) / t^3 dt`` with ``q = log_power``.

        Per jump at ``rho`` the integral from ``a = max(r, rho)`` is
        ``Gamma(q+1, 2 ln(a/r)) / (2^(q+1) r^2)`` after ``t = r e^x``.
        """
        if self.is_zero:
            return 0.0
        a = np.maximum(self.radii, r)
        q = float(log_power)
        if q == 0.0:
            vals = 1 / (2 * a * a)
        else:
            x0 = 2 * np.log(a / r)
            vals = special.gammaincc(q + 1, x0) * special.gamma(q + 1) / (2 ** (q + 1) * r * r)
        return math.fsum((self.jumps * vals).tolist())

    def total_over_square(self) -> float:
        """``int_0^inf P(t)/t^2 dt``."""
        return math.fsum((self.jumps / self.radii).tolist())

    def sup_ratio(self, p: float) -> float:
        """``sup_r P(r)/r^p``, attained at a jump radius."""
        if self.is_zero:
            return 0.0
        return float(np.max(self.masses / self.radii ** p))

    def power_integral(self, p: float) -> float:
        """``int_0^inf P(r)/r^(p+1) dr`` for ``p > 0``."""
        return math.fsum((self.jumps * self.radii ** (-p) / p).tolist())


def counting_profiles(mu: PlanarPointMeasure) -> tuple[CountingProfile, CountingProfile]:
    """``(mu(r), n(r))``: mass in ``|z| <= r`` and in the two disks ``|z -+ ir/2| <= r/2``.

    A point ``a + bi`` enters the second profile at ``r = |z|^2/|b|`` and never if ``b = 0``.
    """
    a = np.abs(mu.points)
    b = np.abs(mu.points.imag)
    off = b > 0
    mu_r = CountingProfile.from_jumps(a, mu.weights)
    re, im = mu.points.real[off], b[off]
    # re^2 + im^2 avoids the rounding of |z|^2 through hypot
    n_r = CountingProfile.from_jumps((re * re + im * im) / im, mu.weights[off])
    return mu_r, n_r


def nstar(n: CountingProfile, r):
    """``n*(r) = r int_0^r n/t^2 + r^2 int_r^inf n (1 + log(t/r)) / t^3``."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.array([x * n.inner(x) + x * x * (n.outer(x) + n.outer(x, 1.0)) for x in r])
    return out


def _sqrt_nstar_integral(n: CountingProfile, r: float, spec: QuadratureSpec) -> IntegralResult:
    """``int_r^inf sqrt(n*(t)) / t^2 dt``.

    Beyond the last jump ``n*(t) = A t - W/4`` with ``A = sum w/rho``, ``W = sum w``,
    which integrates in closed form.
    """
    if n.is_zero:
        return IntegralResult(0.0, 0.0, 0, True)
    T = max(r, float(n.radii[-1]))
    head = IntegralResult(0.0, 0.0, 0, True)
    if T > r:
        head = integrate_adaptive(lambda t: np.sqrt(np.maximum(nstar(n, t), 0.0)) / t ** 2,
                                  r, T, (), spec, initial_points=n.radii[(n.radii > r) & (n.radii < T)])
    A = n.total_over_square()
    c = 0.25 * math.fsum(n.jumps.tolist())
    u = math.sqrt(max(A * T - c, 0.0))
    tail = u / T + A / math.sqrt(c) * math.atan2(math.sqrt(c), u)
    return head + IntegralResult(tail, 0.0, 0, True)


def counting_bound_rhs(mu: PlanarPointMeasure, r: float, which: str, eps: float = 0.5,
                       spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Right-hand sides built from counting functions.

    ``borel``  r int_0^r mu/t^2 + r^2 int_r^inf mu/t^3
    ``thm45``  the same with n
    ``nstar``  n*(r)
    ``thm61``  r^2 [int_r^inf sqrt(n*(t))/t^2 dt]^2
    ``cor64``  r int_0^r n/t^2 + r^2 int_r^inf n (1 + log^(3+eps)(t/r)) / t^3
    """
    if r <= 0:
        raise ValueError("r must be positive")
    mu_r, n_r = counting_profiles(mu)
    if which == "borel":
        return r * mu_r.inner(r) + r * r * mu_r.outer(r)
    if which == "thm45":
        return r * n_r.inner(r) + r * r * n_r.outer(r)
    if which == "nstar":
        return float(nstar(n_r, r)[0])
    if which == "thm61":
        return r * r * _sqrt_nstar_integral(n_r, r, spec).value ** 2
    if which == "cor64":
        if eps <= 0:
            raise ValueError("eps must be positive")
        return r * n_r.inner(r) + r * r * (n_r.outer(r) + n_r.outer(r, 3.0 + eps))
    raise ValueError(f"unknown bound {which!r}")


@dataclass(frozen=True)
class MomentRecord:
    riesz_lhs: float
    riesz_rhs: float
    weak_lhs: float
    weak_rhs: float
    kolmo_lhs: float
    kolmo_rhs: float


def counting_moment_integrals(mu: PlanarPointMeasure, p: float) -> MomentRecord:
    """Both sides of the Riesz, weak-type and Kolmogorov-type counting estimates."""
    if not 1 < p < 2:
        raise InvalidP(f"p must lie in (1, 2), got {p}")
    mu_r, n_r = counting_profiles(mu)
    return MomentRecord(mu_r.power_integral(p), n_r.power_integral(p),
                        mu_r.sup_ratio(p), n_r.sup_ratio(p),
                        mu_r.sup_ratio(1.0), n_r.total_over_square())


# ---------------------------------------------------------------------------
# characteristic functions
# ---------------------------------------------------------------------------

def _angles(mu: PlanarPointMeasure, period: float) -> list[float]:
    return sorted(set((np.angle(mu.points) % period).tolist()) - {0.0})


def nevanlinna_characteristic(mu: PlanarPointMeasure, r: float,
                              spec: QuadratureSpec = DEFAULT_SPEC) -> IntegralResult:
    """``T(r) = (1/2pi) int u^+(r e^{i theta}) d theta``."""
    if r <= 0:
        raise ValueError("r must be positive")
    if mu.is_empty:
        return IntegralResult(0.0, 0.0, 0, True)

    def f(th):
        return np.maximum(canonical_eval(mu, r * np.exp(1j * th)), 0.0)

    on = np.angle(mu.points[np.isclose(np.abs(mu.points), r, rtol=1e-13, atol=0)]) % TWO_PI
    res = integrate_adaptive(f, 0.0, TWO_PI, sorted(set(on.tolist()) - {0.0}),
                             spec.scaled(1 / TWO_PI), _angles(mu, TWO_PI))
    return IntegralResult(res.value / TWO_PI, res.error_estimate / TWO_PI,
                          res.subdivisions_used, res.converged)


def _tsuji_integrand(mu: PlanarPointMeasure, r: float, positive: bool):
    # near theta = 0, pi the curve approaches the origin where u ~ -Re(S2 z^2)/2
    s2 = complex(np.sum(mu.weights / mu.points ** 2))

    def f(th):
        s = np.sin(th)
        z = r * s * np.exp(1j * th)
        a = canonical_eval(mu, z)
        b = canonical_eval(mu, -z)
        if positive:
            a, b = np.maximum(a, 0.0), np.maximum(b, 0.0)
        with np.errstate(all="ignore"):
            out = (a + b) / (r * s * s)
        small = np.abs(s) < 1e-7
        if np.any(small):
            e = np.exp(2j * th[small])
            lim = -0.5 * r * (s2 * e).real
            out[small] = 2 * np.maximum(lim, 0.0) if positive else 2 * lim
        return out

    return f


def tsuji_characteristic(mu: PlanarPointMeasure, r: float, spec: QuadratureSpec = DEFAULT_SPEC,
                         signed: bool = False) -> IntegralResult:
    """``(1/2pi) int v(r|sin t| e^{it}) dt / (r sin^2 t)`` with ``v = u^+`` (or ``u``).

    The curve traces the two circles ``|z -+ ir/2| = r/2``; the halves
    ``t`` and ``t + pi`` are folded together.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    if mu.is_empty:
        return IntegralResult(0.0, 0.0, 0, True)
    f = _tsuji_integrand(mu, r, not signed)
    b = np.abs(mu.points.imag)
    off = b > 0
    rho = np.full(len(b), np.inf)
    rho[off] = np.abs(mu.points[off]) ** 2 / b[off]
    on = np.angle(mu.points[np.isclose(rho, r, rtol=1e-13, atol=0)]) % math.pi
    res = integrate_adaptive(f, 0.0, math.pi, sorted(set(on.tolist()) - {0.0}),
                             spec.scaled(1 / TWO_PI), _angles(mu, math.pi))
    return IntegralResult(res.value / TWO_PI, res.error_estimate / TWO_PI,
                          res.subdivisions_used, res.converged)


def max_modulus(mu: PlanarPointMeasure, r: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``M(r, u) = max_{|z| <= r} u``, attained on the circle by subharmonicity."""
    if mu.is_empty:
        return 0.0
    return max(0.0, max_on_circle(lambda z: canonical_eval(mu, z), r, spec)[0])


def levin_formula_sides(mu: PlanarPointMeasure, R: float,
                        spec: QuadratureSpec = DEFAULT_SPEC) -> tuple[IntegralResult, float]:
    """Both sides of the Levin formula: the signed Tsuji-type integral and ``int_0^R n/t^2``."""
    if R <= 0:
        raise ValueError("R must be positive")
    inside = mu.real_atoms[np.abs(mu.real_atoms) <= R]
    if len(inside):
        raise HypothesisViolated(f"real atoms inside |z| <= R: {inside.real.tolist()}")
    # integrability near the origin: u = O(t^2) on the real axis there
    if not mu.is_empty:
        near = integrate_adaptive(
            lambda t: (np.maximum(-canonical_eval(mu, t + 0j), 0.0)
                       + np.maximum(-canonical_eval(mu, -t + 0j), 0.0)) / (t * t),
            0.0, min(R, 0.5 * float(np.min(np.abs(mu.points)))), (), spec)
        if not math.isfinite(near.value):
            raise HypothesisViolated("negative part not integrable against 1/t^2")
    lhs = tsuji_characteristic(mu, R, spec, signed=True)
    return lhs, counting_profiles(mu)[1].inner(R)


@dataclass(frozen=True)
class CharacteristicComparison:
    R: float
    nevanlinna_side: float
    tsuji_side: float
    tail_bound: float
    error_estimate: float


def characteristic_integrals(mu: PlanarPointMeasure, Rs, spec: QuadratureSpec | None = None,
                             cutoff_factor: float = 50.0) -> list[CharacteristicComparison]:
    """``int_R^inf T/r^3`` against ``int_R^inf Tsuji/r^2`` for each ``R``.

    Both integrals stop at ``X = cutoff_factor * max jump radius``.  With
    ``S = sum w/zeta`` and ``u = Re(zS) + sum w log|1 - z/zeta|``, the left
    tail is at most ``|S|/(pi X) + sum w ((2 log(X/|zeta|) + 1)/(4X^2) +
    |zeta|/(3X^3))``.  The right tail is at least the larger of two lower
    bounds: off the sector ``|sin| < 2 max|zeta|/rho`` the log terms are
    nonnegative, giving ``|S|/(pi X) - |S| max|zeta| / X^2``; and since
    ``u^+ >= u`` the Levin formula gives ``Tsuji(rho) >= int_0^rho n/t^2``,
    whose tail integral is ``inner(X)/X + int_X^inf n/t^3``.  ``tail_bound``
    is the left bound minus the right bound, so ``nevanlinna_side +
    tail_bound <= tsuji_side`` certifies the full inequality.
    """
    Rs = sorted(float(R) for R in Rs)
    if mu.is_empty:
        return [CharacteristicComparison(R, 0.0, 0.0, 0.0, 0.0) for R in Rs]
    scale = mu.genus_sum
    spec = spec or QuadratureSpec(abs_tol=1e-7 * scale, rel_tol=1e-6)
    inner = QuadratureSpec(abs_tol=1e-9 * scale, rel_tol=1e-8)
    mu_r, n_r = counting_profiles(mu)
    jumps = np.concatenate([mu_r.radii, n_r.radii])
    X = max(cutoff_factor * float(np.max(jumps)), 2 * Rs[-1])

    def lhs_f(x):
        r = np.exp(x)
        return np.array([nevanlinna_characteristic(mu, v, inner).value for v in r]) / r ** 2

    def rhs_f(x):
        r = np.exp(x)
        return np.array([tsuji_characteristic(mu, v, inner).value for v in r]) / r

    edges = Rs + [X]
    bps = np.log(jumps)
    pieces_l, pieces_r = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        la, lb = math.log(a), math.log(b)
        pts = bps[(bps > la) & (bps < lb)]
        pieces_l.append(integrate_adaptive(lhs_f, la, lb, (), spec, pts))
        pieces_r.append(integrate_adaptive(rhs_f, la, lb, (), spec, pts))
    a = np.abs(mu.points)
    S = abs(complex(np.sum(mu.weights / mu.points)))
    left_tail = S / (math.pi * X) + math.fsum((mu.weights * ((2 * np.log(X / a) + 1) / (4 * X ** 2)
                                                             + a / (3 * X ** 3))).tolist())
    right_tail = max(S / (math.pi * X) - S * float(a.max()) / X ** 2,
                     n_r.inner(X) / X + n_r.outer(X))
    tail = left_tail - right_tail
    out = []
    for i, R in enumerate(Rs):
        left = sum_results(pieces_l[i:])
        right = sum_results(pieces_r[i:])
        out.append(CharacteristicComparison(R, left.value, right.value, tail,
                                            left.error_estimate + right.error_estimate))
    return out


# ---------------------------------------------------------------------------
# positivity certificates
# ---------------------------------------------------------------------------

def realline_samples(mu: PlanarPointMeasure, n: int = 400) -> np.ndarray:
    """Graded real grid: logarithmic in ``|x|`` plus clusters at the points' projections."""
    if mu.is_empty:
        return np.array([0.0])
    rad = mu.radius
    g = np.geomspace(1e-4, 1e3, n // 2) * rad
    xs = [np.array([0.0]), g, -g]
    spread = np.linspace(-3, 3, 25)
    for z in mu.points:
        xs.append(z.real + max(abs(z.imag), 1e-3 * rad) * spread)
    return np.unique(np.concatenate(xs))


def plane_samples(mu: PlanarPointMeasure, n: int = 500) -> np.ndarray:
    """Halton points in the disk of radius ``4 max |zeta|``."""
    if mu.is_empty:
        return np.array([0j])
    rad = 4 * mu.radius
    h = qmc.Halton(d=2, scramble=False).random(n + 1)[1:]
    return rad * np.sqrt(h[:, 0]) * np.exp(TWO_PI * 1j * h[:, 1])


def positivity_certificate(mu: PlanarPointMeasure, mode: str = "plane", samples: int = 500):
    """Minimum of ``u`` over the sample set and where it occurs.

    ``realline`` scans a graded real grid and polishes the best few points
    by a bounded local search.  ``plane`` adds quasi-random samples in a
    disk; no local search there, since ``u = -inf`` at every point of the
    configuration.
    """
    from scipy import optimize

    if mode not in ("plane", "realline"):
        raise ValueError("mode must be 'plane' or 'realline'")
    if mu.is_empty:
        return 0.0, 0j
    xs = realline_samples(mu)
    vals = canonical_eval(mu, xs.astype(complex))
    best = int(np.argmin(vals))
    best_v, best_z = float(vals[best]), complex(xs[best])
    for i in np.argsort(vals, kind="stable")[:3]:
        lo = xs[max(i - 1, 0)]
        hi = xs[min(i + 1, len(xs) - 1)]
        if hi <= lo:
            continue
        res = optimize.minimize_scalar(lambda x: float(canonical_eval(mu, complex(x))),
                                       bounds=(lo, hi), method="bounded")
        if math.isfinite(res.fun) and res.fun < best_v:
            best_v, best_z = float(res.fun), complex(res.x)
    if mode == "plane":
        pts = plane_samples(mu, samples)
        pv = canonical_eval(mu, pts)
        j = int(np.argmin(pv))
        if pv[j] < best_v:
            best_v, best_z = float(pv[j]), complex(pts[j])
    return best_v, best_z


# ---------------------------------------------------------------------------
# special families
# ---------------------------------------------------------------------------

def imaginary_pairs(heights, weights) -> PlanarPointMeasure:
    """Points ``+- i t`` with equal weights; ``u(x) = sum w log(1 + x^2/t^2)`` on the real line."""
    t = np.asarray(heights, dtype=float)
    w = np.asarray(weights, dtype=float)
    return PlanarPointMeasure(np.concatenate([1j * t, -1j * t]), np.concatenate([w, w]))


@dataclass(frozen=True)
class DiscretizedLogDet:
    """Points ``1/f(t_j)`` with quadrature weights, ``f = g + i Hg``.

    The kernel sum approximates ``u_f``, which is nonnegative on the plane;
    :meth:`budget` measures the approximation error on given points.
    """

    measure: PlanarPointMeasure
    source: StepFunction

    def budget(self, z) -> float:
        exact = np.array([r.value for r in AnalyticLogDet(self.source).many(z)])
        return float(np.max(np.abs(canonical_eval(self.measure, z) - exact)))


def discretized_logdet(g: StepFunction, nodes_per_interval: int = 8,
                       margin: float = 1.0) -> DiscretizedLogDet:
    """Gauss-Legendre points on each block of ``g`` and on two flanking intervals.

    Nodes are pulled towards the block edges (where ``Hg`` has logarithmic
    peaks) by the map ``t = a + (b - a)(3s^2 - 2s^3)``.
    """
    if g.is_zero:
        return DiscretizedLogDet(PlanarPointMeasure(np.empty(0), np.empty(0)), g)
    hg = hilbert_step(g)
    x0, xn = g.support
    width = (xn - x0) * margin
    edges = np.concatenate([[x0 - width], g.breakpoints, [xn + width]])
    s, w = np.polynomial.legendre.leggauss(nodes_per_interval)
    s = 0.5 * (s + 1)
    w = 0.5 * w
    ts, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        t = a + (b - a) * (3 * s ** 2 - 2 * s ** 3)
        ts.append(t)
        ws.append(w * (b - a) * 6 * s * (1 - s))
    t = np.concatenate(ts)
    wt = np.concatenate(ws)
    f = g(t) + 1j * hg.evaluate(t)
    keep = (np.abs(f) > 0) & (wt > 0)
    return DiscretizedLogDet(PlanarPointMeasure(1.0 / f[keep], wt[keep]), g)


# ---------------------------------------------------------------------------
# the Marcinkiewicz inequality and its counting form
# ---------------------------------------------------------------------------

def marcinkiewicz_sides(g: StepFunction, lambdas) -> tuple[np.ndarray, np.ndarray]:
    """``m_f(lam)`` and ``lam^-2 int_0^lam s m_g(s) ds + lam^-1 int_lam^inf m_g(s) ds``."""
    lam = np.atleast_1d(np.asarray(lambdas, dtype=float))
    if np.any(lam <= 0):
        raise ValueError("levels must be positive")
    mg, mf = modulus_distributions(g, hilbert_step(g))
    lhs = mf(lam)
    if mg.is_zero:
        return lhs, np.zeros(lam.shape)
    a, b, v = mg.breakpoints[:-1], mg.breakpoints[1:], mg.values
    rhs = np.empty(lam.shape)
    for i, x in enumerate(lam):
        lo = np.minimum(b, x)
        first = math.fsum((v * np.maximum(lo * lo - a * a, 0.0) / 2).tolist()) / (x * x)
        hi = np.maximum(a, x)
        second = math.fsum((v * np.maximum(b - hi, 0.0)).tolist()) / x
        rhs[i] = first + second
    return lhs, rhs


def profile_rows(mu: PlanarPointMeasure, radii, emit=("M", "T", "Tsuji", "mu", "n"),
                 spec: QuadratureSpec = DEFAULT_SPEC) -> list[dict]:
    """Rows ``{"r": r, name: value}`` for the requested radial quantities."""
    mu_r, n_r = counting_profiles(mu)
    rows = []
    for r in np.asarray(radii, dtype=float):
        row = {"r": float(r)}
        for name in emit:
            if name == "M":
                row[name] = max_modulus(mu, r, spec)
            elif name == "T":
                row[name] = nevanlinna_characteristic(mu, r, spec).value
            elif name == "Tsuji":
                row[name] = tsuji_characteristic(mu, r, spec).value
            elif name == "mu":
                row[name] = float(mu_r(r))
            elif name == "n":
                row[name] = float(n_r(r))
            else:
                raise ValueError(f"unknown quantity {name!r}")
        rows.append(row)
    return rows
