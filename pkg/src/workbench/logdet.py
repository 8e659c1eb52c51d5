"""Regularized logarithmic determinants of step functions and their analytic signals."""
from __future__ import annotations

import math
import numpy as np
from scipy.stats import qmc

from .checks import CheckResult
from .errors import NonZeroMean
from .hilbert import LogSum, hilbert_step, l1_norm_transform, signed_parts
from .numerics import (
    DEFAULT_SPEC,
    IntegralResult,
    QuadratureSpec,
    _KW,
    _GW,
    _NODES,
    integrate_adaptive,
    sum_results,
)
from .stepfn import StepFunction, distribution_profile

_SERIES_RADIUS = 0.05
_SERIES_TERMS = 14


def kernel_k(z):
    """``K(z) = log|1 - z| + Re z``; ``-inf`` exactly at ``z = 1``.

    A power series is used for small ``|z|`` where the two terms cancel.
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape)
    small = np.abs(z) < _SERIES_RADIUS
    zs = z[small]
    if zs.size:
        acc = np.zeros(zs.shape, dtype=complex)
        power = zs * zs
        for k in range(2, _SERIES_TERMS + 2):
            acc += power / k
            power = power * zs
        out[small] = -acc.real
    zl = z[~small]
    if zl.size:
        with np.errstate(divide="ignore"):
            out[~small] = np.log(np.abs(1.0 - zl)) + zl.real
    return out if out.shape else float(out)


def logdet_real(g: StepFunction, z):
    """``u_g(z) = int K(z g(t)) dt = sum_i len_i K(z c_i)`` (vectorized in ``z``)."""
    z = np.asarray(z, dtype=complex)
    if g.is_zero:
        return np.zeros(z.shape) if z.shape else 0.0
    w = z.reshape(-1)[:, None] * g.values[None, :]
    out = kernel_k(w) @ g.lengths
    return out.reshape(z.shape) if z.shape else float(out[0])


def _reciprocal_logsum(g: StepFunction) -> LogSum:
    """The function ``v -> u_g(1/v)`` for zero-mean ``g`` as a LogSum.

    ``u_g(1/v) = sum len_i ln|v - c_i| - (sum len_i) ln|v|``.
    """
    keep = g.values != 0
    lens = g.lengths[keep]
    vals = g.values[keep]
    coef = np.concatenate([math.pi * lens, [-math.pi * math.fsum(lens.tolist())]])
    node = np.concatenate([vals, [0.0]])
    return LogSum(coef, node)


# ---------------------------------------------------------------------------
# u_f for f = g + i Hg
# ---------------------------------------------------------------------------

def _graded_edges(lo: float, hi: float, nodes, levels: int = 44) -> np.ndarray:
    """Panel edges on [lo, hi] refined geometrically towards each interior node."""
    pts = [lo, hi]
    inner = sorted(n for n in nodes if lo <= n <= hi)
    anchors = sorted(set([lo] + inner + [hi]))
    for a, b in zip(anchors[:-1], anchors[1:]):
        w = b - a
        pts.extend(np.linspace(a, b, 5).tolist())
        for k in range(1, levels):
            d = w * 0.5 ** k
            pts.append(a + d)
            pts.append(b - d)
    return np.unique(np.array(pts))


class AnalyticLogDet:
    """Evaluator of ``u_f(z) = int K(z f(t)) dt`` with ``f = g + i Hg``.

    The line is split at ``support +- 10``; the two tails are mapped to
    ``[0, 1)`` by ``t = b + s/(1-s)``.  Values of ``f`` on a fixed composite
    Gauss-Kronrod grid are cached, so a batch of ``z`` costs one vectorized
    kernel evaluation; panels whose G7/K15 discrepancy is too large for a
    particular ``z`` are re-integrated adaptively.
    """

    def __init__(self, g: StepFunction, spec: QuadratureSpec = DEFAULT_SPEC):
        self.g = g
        self.spec = spec
        self.hg = hilbert_step(g)
        if g.is_zero:
            self.panels = np.empty((0, 2))
            return
        x0, xn = g.support
        self.inner = (x0 - 10.0, xn + 10.0)
        edges = _graded_edges(self.inner[0], self.inner[1], self.hg.nodes.tolist())
        s_edges = np.concatenate([np.linspace(0.0, 0.9, 10), 1.0 - 0.1 * 0.5 ** np.arange(1, 30)])
        self._segments = []  # (kind, lo, hi) with kind 0 inner, 1 right tail, 2 left tail
        for a, b in zip(edges[:-1], edges[1:]):
            self._segments.append((0, a, b))
        for kind in (1, 2):
            for a, b in zip(s_edges[:-1], s_edges[1:]):
                self._segments.append((kind, a, b))
        seg = np.array([(a, b) for _, a, b in self._segments])
        self._kind = np.array([k for k, _, _ in self._segments])
        half = 0.5 * (seg[:, 1] - seg[:, 0])
        mid = 0.5 * (seg[:, 1] + seg[:, 0])
        s = mid[:, None] + half[:, None] * _NODES[None, :]
        t, jac = self._to_t(self._kind[:, None], s)
        self._half = half
        self._jac = jac
        self._f = self.f(t)

    def _to_t(self, kind, s):
        a, b = self.inner
        kind = np.broadcast_to(kind, s.shape)
        with np.errstate(divide="ignore"):
            t = np.where(kind == 0, s, np.where(kind == 1, b + s / (1 - s), a - s / (1 - s)))
            jac = np.where(kind == 0, 1.0, 1.0 / (1 - s) ** 2)
        return t, jac

    def f(self, t):
        t = np.asarray(t, dtype=float)
        fin = np.isfinite(t)
        tf = np.where(fin, t, 0.0)
        with np.errstate(invalid="ignore"):
            return np.where(fin, self.g(tf) + 1j * self.hg.evaluate(tf), 0.0)

    def _integrand(self, z: complex, kind: int):
        def fn(s):
            t, jac = self._to_t(kind, s)
            # non-finite values occur only at isolated points (transform nodes,
            # zeros of 1 - z f, t = inf) which carry no mass
            with np.errstate(all="ignore"):
                v = kernel_k(z * self.f(t)) * jac
            return np.where(np.isfinite(v), v, 0.0)
        return fn

    def _singular_points(self, z: complex, kind: int, lo: float, hi: float):
        """Zeros of ``1 - z f`` inside a panel, plus the transform nodes."""
        if kind != 0:
            return []
        pts = [n for n in self.hg.nodes.tolist() if lo < n < hi]
        if z != 0:
            w = 1.0 / z
            c = float(self.g(np.array([0.5 * (lo + hi)]))[0])
            if abs(w.real - c) <= 1e-12 * max(1.0, abs(c)):
                from .numerics import LevelSolver
                solver = LevelSolver(self.hg.evaluate, self.hg.derivative, self.hg.nodes,
                                     (lo, hi), scale=hi - lo)
                pts += [cr.x for cr in solver.solve(w.imag).crossings]
        return pts

    def __call__(self, z: complex) -> IntegralResult:
        return self.many(np.array([z]))[0]

    def many(self, zs) -> list[IntegralResult]:
        zs = np.asarray(zs, dtype=complex).ravel()
        if self.g.is_zero:
            return [IntegralResult(0.0, 0.0, 0, True) for _ in zs]
        results = []
        n_panels = len(self._half)
        for chunk_start in range(0, len(zs), 64):
            chunk = zs[chunk_start:chunk_start + 64]
            with np.errstate(invalid="ignore"):
                vals = kernel_k(chunk[:, None, None] * self._f[None, :, :]) * self._jac[None]
            finite = np.isfinite(vals)
            vals = np.where(finite, vals, 0.0)
            kron = (vals @ _KW) * self._half[None, :]
            gauss = (vals @ _GW) * self._half[None, :]
            err = np.abs(kron - gauss)
            err = np.where(np.all(finite, axis=2), err, np.inf)
            for zi, z in enumerate(chunk):
                if z == 0:
                    results.append(IntegralResult(0.0, 0.0, 0, True))
                    continue
                pk = kron[zi]
                pe = err[zi]
                total = math.fsum(pk.tolist())
                budget = self.spec.tolerance(total)
                bad = np.nonzero(pe > budget / n_panels)[0]
                parts = []
                good = np.ones(n_panels, dtype=bool)
                good[bad] = False
                parts.append(IntegralResult(math.fsum(pk[good].tolist()),
                                            math.fsum(pe[good].tolist()), int(good.sum()), True))
                sub_spec = QuadratureSpec(max(budget / max(len(bad), 1), 1e-15), 0.0,
                                          self.spec.max_subdivisions)
                for i in bad:
                    kind, lo, hi = self._segments[i]
                    res = integrate_adaptive(self._integrand(z, kind), lo, hi,
                                             self._singular_points(z, kind, lo, hi), sub_spec)
                    parts.append(res)
                tot = sum_results(parts)
                tot.converged = tot.error_estimate <= max(self.spec.tolerance(tot.value), 1e-14)
                results.append(tot)
        return results


def logdet_analytic(g: StepFunction, z: complex, spec: QuadratureSpec = DEFAULT_SPEC) -> IntegralResult:
    """``u_f(z)`` for ``f = g + i Hg``; nonnegative on the plane for zero-mean ``g``."""
    return AnalyticLogDet(g, spec)(z)


# ---------------------------------------------------------------------------
# identity battery
# ---------------------------------------------------------------------------

def case_scale(g: StepFunction) -> float:
    """Magnitude used to scale absolute tolerances: ``max(1, ||g||_1)``."""
    if g.is_zero:
        return 1.0
    return max(1.0, math.fsum(np.abs(g.values * g.lengths).tolist()))


def small_z_ratio(g: StepFunction) -> CheckResult:
    """``u_g(z)/|z|^2`` near 0 against the Taylor bound ``sum len c^2 / (2 (1 - |z| |g|))``."""
    radii = np.array([1e-2, 1e-3, 1e-4])
    ang = np.linspace(0, 2 * math.pi, 16, endpoint=False)
    z = (radii[:, None] * np.exp(1j * ang[None, :])).ravel()
    ratio = float(np.max(np.abs(logdet_real(g, z)) / np.abs(z) ** 2))
    m2 = math.fsum((g.lengths * g.values ** 2).tolist())
    bound = 0.5 * m2 / max(1e-12, 1 - 1e-2 * g.sup_norm()) if g.sup_norm() < 100 else math.inf
    return CheckResult("eq2_3a", ratio, bound, 1e-9, ratio <= bound * (1 + 1e-9) + 1e-12,
                          kind="inequality")


def large_z_ratio(g: StepFunction) -> CheckResult:
    """``u_g(z)/log|z|`` at large ``|z|`` stays within an explicit band around ``meas(supp g)``."""
    if abs(g.integral()) > 1e-12 * case_scale(g):
        raise NonZeroMean("the logarithmic growth bound needs a zero-mean g")
    keep = g.values != 0
    lens = g.lengths[keep]
    vals = np.abs(g.values[keep])
    total = math.fsum(lens.tolist())
    worst = 0.0
    gap = 0.0
    for r in (1e3, 1e4):
        ang = np.linspace(0, 2 * math.pi, 16, endpoint=False) + 0.1
        z = r * np.exp(1j * ang)
        ratio = logdet_real(g, z) / math.log(r)
        dev = float(np.max(np.abs(ratio - total)))
        lo = np.maximum(vals - 1.0 / r, 1e-300)
        band = float(np.sum(lens * np.maximum(np.abs(np.log(lo)), np.abs(np.log(vals + 1.0 / r)))))
        band /= math.log(r)
        worst = max(worst, dev)
        gap = max(gap, band)
    return CheckResult("eq2_3b", worst, gap, 1e-9, worst <= gap * (1 + 1e-9),
                          kind="inequality")


def _reciprocal_integral(psi: LogSum, weight, tail, spec: QuadratureSpec, V: float) -> IntegralResult:
    def integrand(v):
        return psi.evaluate(v) * weight(v)

    core = integrate_adaptive(integrand, -V, V, psi.nodes.tolist(), spec)
    return core + tail


def mean_zero_integral(g: StepFunction, spec: QuadratureSpec = DEFAULT_SPEC) -> IntegralResult:
    """``int u_g(x)/x^2 dx`` by quadrature in ``v = 1/x`` with an analytic far field."""
    if abs(g.integral()) > 1e-12 * case_scale(g):
        raise NonZeroMean("u_g(x)/x^2 is not integrable unless g has zero mean")
    if g.is_zero:
        return IntegralResult(0.0, 0.0, 0, True)
    psi = _reciprocal_logsum(g)
    keep = g.values != 0
    lens, vals = g.lengths[keep], g.values[keep]
    V = 1e3 * float(np.max(np.abs(vals)))
    A = float(lens @ vals ** 2)
    C = float(lens @ vals ** 4)
    E = float(lens @ vals ** 6)
    tail = IntegralResult(-A / V - C / (6 * V ** 3), abs(E) / (15 * V ** 5), 0, True)
    return _reciprocal_integral(psi, lambda v: np.ones_like(v), tail, spec, V)


def poisson_check(g: StepFunction, y: float, spec: QuadratureSpec = DEFAULT_SPEC):
    """``(u_g(iy), (y/pi) int u_g(x)/(x^2 + y^2) dx)`` for zero-mean ``g``."""
    lhs = float(logdet_real(g, 1j * y))
    if g.is_zero:
        return lhs, IntegralResult(0.0, 0.0, 0, True)
    psi = _reciprocal_logsum(g)
    keep = g.values != 0
    lens, vals = g.lengths[keep], g.values[keep]
    V = 1e3 * max(float(np.max(np.abs(vals))), 1.0 / y)
    A = float(lens @ vals ** 2)
    C = float(lens @ vals ** 4)
    # psi ~ -A/(2v^2) - C/(4v^4);  1/(1+y^2 v^2) ~ 1/(y^2 v^2) - 1/(y^4 v^4)
    tail_val = -A / (3 * y ** 2 * V ** 3) + (A / (2 * y ** 4) - C / (4 * y ** 2)) * 2 / (5 * V ** 5)
    tail = IntegralResult(tail_val, abs(tail_val) * 1e-2 + 1e-300, 0, True)
    res = _reciprocal_integral(psi, lambda v: 1.0 / (1.0 + (y * v) ** 2), tail, spec, V)
    return lhs, IntegralResult(y / math.pi * res.value, y / math.pi * res.error_estimate,
                               res.subdivisions_used, res.converged)


def reciprocal_transform_gap(g: StepFunction, n: int = 200) -> tuple[float, np.ndarray]:
    """Sup over a grid of ``|u_g(1/t) - pi (H N_g)(t)|``.

    With the ``1/(t - x)`` kernel the two sides agree with a ``+`` sign.
    """
    nprof = distribution_profile(g)
    hn = hilbert_step(StepFunction(nprof.breakpoints, nprof.values))
    span = 3.0 * max(g.sup_norm(), 1e-300)
    t = -span + 2 * span * ((np.arange(n) + 0.5) / n + 0.00137 * math.sqrt(2))
    nodes = np.concatenate([hn.nodes, [0.0]])
    close = np.min(np.abs(t[:, None] - nodes[None, :]), axis=1) < 1e-9 * span
    t = t[~close]
    gap = np.abs(logdet_real(g, 1.0 / t) - math.pi * hn.evaluate(t))
    return float(np.max(gap)), t


def negative_part_bound(g: StepFunction, spec: QuadratureSpec = DEFAULT_SPEC):
    """``(int u_g^-(x)/x^2 dx, pi ||Hg||_1)``; the first never exceeds the second."""
    if abs(g.integral()) > 1e-12 * case_scale(g):
        raise NonZeroMean("needs zero mean")
    if g.is_zero:
        return 0.0, 0.0
    _, neg = signed_parts(_reciprocal_logsum(g))
    rhs = math.pi * l1_norm_transform(hilbert_step(g), spec).value
    return neg, rhs


def logdet_identity_checks(g: StepFunction, spec: QuadratureSpec = DEFAULT_SPEC) -> list[CheckResult]:
    """Growth at 0 and infinity, the vanishing weighted mean, the reciprocal
    transform identity and the negative-part bound, one record each."""
    scale = case_scale(g)
    records = [small_z_ratio(g)]
    zero_mean = abs(g.integral()) <= 1e-12 * scale
    if not zero_mean:
        raise NonZeroMean("identity battery requires a zero-mean g")
    records.append(large_z_ratio(g))
    i2 = mean_zero_integral(g, spec.scaled(scale))
    tol = 1e-6 * scale
    records.append(CheckResult("eq2_4", i2.value, 0.0, tol, abs(i2.value) <= tol,
                                  i2.error_estimate))
    gap, _ = reciprocal_transform_gap(g)
    records.append(CheckResult("eq2_5", gap, 0.0, tol, gap <= tol))
    lhs, rhs = negative_part_bound(g, spec)
    records.append(CheckResult("eq2_6", lhs, rhs, 1e-6, lhs <= rhs * (1 + 1e-6),
                                  kind="inequality"))
    return records


def positivity_scan(g: StepFunction, region: tuple[float, float, float, float], samples: int,
                    spec: QuadratureSpec = DEFAULT_SPEC, seed: int = 0):
    """Minimum of ``u_f`` over quasi-random points of ``region = (x0, x1, y0, y1)``
    plus a trace of the real axis.  Returns ``(min, argmin, results)``."""
    if samples < 100:
        raise ValueError("need at least 100 samples")
    x0, x1, y0, y1 = region
    n_axis = samples // 5
    halton = qmc.Halton(d=2, scramble=False).random(samples - n_axis + 1)[1:]
    pts = (x0 + (x1 - x0) * halton[:, 0]) + 1j * (y0 + (y1 - y0) * halton[:, 1])
    axis = x0 + (x1 - x0) * (np.arange(n_axis) + 0.5 + 0.1234) / (n_axis + 1)
    zs = np.concatenate([pts, axis.astype(complex)])
    if g.is_zero:
        return 0.0, complex(zs[0]), []
    ev = AnalyticLogDet(g, spec)
    results = ev.many(zs)
    vals = np.array([r.value for r in results])
    i = int(np.argmin(vals))
    return float(vals[i]), complex(zs[i]), results


def two_point_ratio(w1, w2, z):
    """``|1 - z w1| / |1 - z w2|``; below 1 when ``Re w1 = Re w2``, ``|Im w1| <= Im w2``, ``Im z > 0``."""
    return np.abs(1 - z * w1) / np.abs(1 - z * w2)


def kernel_growth_constant(z) -> float:
    """Empirical ``max K(z) (1 + |z|) / |z|^2`` over the sample."""
    z = np.asarray(z, dtype=complex)
    z = z[z != 0]
    return float(np.max(kernel_k(z) * (1 + np.abs(z)) / np.abs(z) ** 2))
