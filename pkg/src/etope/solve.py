"""Convex feasibility machinery for ellipsotopes.

Emptiness and point containment reduce to

    min ||A beta - b||_2^2   subject to   beta in ball product,

solved by accelerated projected gradient descent with monotone restarts.
The feasible region is a product of unit p-norm balls, so the projection
splits blockwise. A convexity-based lower bound certifies emptiness early;
a converged gradient mapping certifies it at the optimum; anything else is
reported INCONCLUSIVE rather than silently classified.
"""

import math
import os
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .core import (
    INF,
    Ellipsotope,
    IndexSet,
    as_vector,
    ball_product_membership,
    pnorm,
)

ENV_TOL = "ETOPE_SOLVER_TOL"


class Verdict(str, Enum):
    NONEMPTY = "nonempty"
    EMPTY = "empty"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class FeasibilityResult:
    """Solver output.

    residual is the squared constraint mismatch ||A beta - b||_2^2 at the
    returned coefficient vector, which always lies in the ball product.
    """

    beta: np.ndarray
    residual: float
    iterations: int
    verdict: Verdict


@dataclass(frozen=True)
class SolverConfig:
    tol_feas: float = 1e-10
    max_iters: int = 100_000
    use_restart: bool = True
    grad_map_tol: float = 1e-9

    def __post_init__(self):
        if self.tol_feas <= 0.0:
            raise ValueError("tol_feas must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


def default_config():
    """Default solver configuration, honoring the ETOPE_SOLVER_TOL env var."""
    tol = os.environ.get(ENV_TOL)
    if tol is not None:
        return SolverConfig(tol_feas=float(tol))
    return SolverConfig()


#: tighter tolerance used for boundary work (ray tracing, plotting), so the
#: membership flip sits within ~sqrt(tol) of the true boundary
RAY_CONFIG = SolverConfig(tol_feas=1e-13, max_iters=20_000)


# ---------------------------------------------------------------------------
# projections onto p-norm balls


def project_pball(v, p):
    """Euclidean projection of v onto the unit p-ball { x : ||x||_p <= 1 }."""
    v = as_vector(v, "v")
    if p != INF and p < 1.0 + 1e-12:
        raise ValueError(f"norm order must exceed 1 or be INF, got {p}")
    if v.size == 0:
        return v.copy()
    nrm = pnorm(v, p)
    if nrm <= 1.0:
        return v.copy()
    if p == INF:
        return np.clip(v, -1.0, 1.0)
    if p == 2.0:
        return v / nrm
    return _project_pball_general(v, float(p))


def _coords_for_mu(a, p, mu, x0=None):
    # Per-coordinate root of x + mu*p*x^(p-1) = a on [0, a], safeguarded Newton.
    lo = np.zeros_like(a)
    hi = a.copy()
    x = hi.copy() if x0 is None else np.clip(x0, lo, hi)
    pos = a > 0.0
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        for _ in range(40):
            xp = np.where(pos, np.maximum(x, 1e-300), 1.0)
            f = x + mu * p * xp ** (p - 1.0) - a
            hi = np.where(f > 0.0, np.minimum(hi, x), hi)
            lo = np.where(f < 0.0, np.maximum(lo, x), lo)
            df = 1.0 + mu * p * (p - 1.0) * xp ** (p - 2.0)
            step = f / df
            x_new = x - step
            bad = (x_new <= lo) | (x_new >= hi) | ~np.isfinite(x_new)
            x_new = np.where(bad, 0.5 * (lo + hi), x_new)
            x_new = np.where(pos, x_new, 0.0)
            if np.max(np.abs(x_new - x)) <= 1e-15 * max(1.0, float(np.max(a))):
                x = x_new
                break
            x = x_new
    return x


def _project_pball_general(v, p):
    # Dual bisection on the multiplier of the active norm constraint.
    signs = np.sign(v)
    a = np.abs(v)
    mu_lo, mu_hi = 0.0, 1.0
    x = _coords_for_mu(a, p, mu_hi)
    while pnorm(x, p) > 1.0:
        mu_lo = mu_hi
        mu_hi *= 2.0
        x = _coords_for_mu(a, p, mu_hi, x0=x)
        if mu_hi > 1e18:
            break
    for _ in range(80):
        mu = 0.5 * (mu_lo + mu_hi)
        x = _coords_for_mu(a, p, mu, x0=x)
        h = pnorm(x, p) - 1.0
        if abs(h) <= 1e-13:
            break
        if h > 0.0:
            mu_lo = mu
        else:
            mu_hi = mu
    nrm = pnorm(x, p)
    if nrm > 1.0:
        x = x / nrm
    return signs * x


def project_ball_product(beta, I, p):
    """Blockwise Euclidean projection onto the ball product of I."""
    beta = as_vector(beta, "beta")
    if I.size != beta.shape[0]:
        raise ValueError(
            f"beta has {beta.shape[0]} entries but the index set covers {I.size}"
        )
    out = beta.copy()
    for blk in I:
        idx = list(blk)
        out[idx] = project_pball(beta[idx], p)
    return out


# ---------------------------------------------------------------------------
# ball-product geometry specialized per block pattern


class _BallProduct:
    """Projection and support function of a ball product, precompiled.

    Singleton blocks clip vectorized; multi-coordinate 2-norm blocks project
    inline; everything else falls back to the general projection.
    """

    def __init__(self, blocks, p, m):
        self.p = p
        self.m = m
        self.q = self._dual_exponent(p)
        sizes = [len(blk) for blk in blocks]
        self.all_singleton = all(s == 1 for s in sizes) and sum(sizes) == m
        self.one_block = len(sizes) == 1 and sizes[0] == m
        self.single_idx = np.fromiter(
            (blk[0] for blk in blocks if len(blk) == 1), dtype=int
        )
        self.multi = [np.fromiter(blk, dtype=int) for blk in blocks if len(blk) > 1]

    @staticmethod
    def _dual_exponent(p):
        if p == INF:
            return 1.0
        if p == 1.0:
            return INF
        return p / (p - 1.0)

    def project(self, v):
        if self.m == 0:
            return v
        if self.all_singleton or (self.p == INF and not self.multi):
            return np.clip(v, -1.0, 1.0)
        if self.one_block:
            return project_pball(v, self.p)
        out = v.copy()
        if self.single_idx.size:
            out[self.single_idx] = np.clip(v[self.single_idx], -1.0, 1.0)
        for idx in self.multi:
            blk = v[idx]
            if self.p == 2.0:
                nrm = math.sqrt(float(blk @ blk))
                if nrm > 1.0:
                    out[idx] = blk / nrm
            else:
                out[idx] = project_pball(blk, self.p)
        return out

    def support(self, g):
        """max of <g, z> over the ball product (sum of blockwise dual norms)."""
        if self.m == 0:
            return 0.0
        if self.all_singleton:
            return float(np.sum(np.abs(g)))
        if self.one_block:
            return pnorm(g, self.q)
        total = float(np.sum(np.abs(g[self.single_idx]))) if self.single_idx.size else 0.0
        for idx in self.multi:
            if self.p == 2.0:
                blk = g[idx]
                total += math.sqrt(float(blk @ blk))
            else:
                total += pnorm(g[idx], self.q)
        return total


# ---------------------------------------------------------------------------
# the projected-gradient engine


def _svd_tools(A):
    """SVD-derived helpers shared by one system: pinv apply and spectral norm."""
    if A.size == 0:
        return None
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    cutoff = max(A.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    inv_s = np.where(s > cutoff, 1.0 / np.where(s > 0, s, 1.0), 0.0)
    sigma = float(s[0]) if s.size else 0.0
    return U, inv_s, Vt, sigma


def solve_ball_product_lsq(
    A, b, I, p, config=None, beta0=None, svd=None, history=None
):
    """min ||A beta - b||^2 over the ball product of I; core solver.

    beta0, if given, is projected and used as a warm start instead of the
    pseudoinverse solution. svd can carry a precomputed _svd_tools(A) for
    repeated solves against the same matrix. history, if a list, receives
    the objective value at every accepted iterate.
    """
    cfg = config or default_config()
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    k, m = A.shape
    tol = cfg.tol_feas
    bp = _BallProduct(I.blocks if isinstance(I, IndexSet) else I, p, m)

    def rsq(beta):
        r = A @ beta - b
        return float(r @ r)

    if m == 0:
        res = float(b @ b)
        verdict = Verdict.NONEMPTY if res <= tol else Verdict.EMPTY
        return FeasibilityResult(np.zeros(0), res, 0, verdict)
    if k == 0:
        beta = bp.project(beta0.copy() if beta0 is not None else np.zeros(m))
        return FeasibilityResult(beta, 0.0, 0, Verdict.NONEMPTY)

    tools = svd if svd is not None else _svd_tools(A)
    U, inv_s, Vt, sigma = tools
    lstsq = Vt.T @ (inv_s * (U.T @ b))

    # inconsistent linear system alone => empty, no iteration needed
    lin_res = rsq(lstsq)
    if lin_res > tol:
        beta = bp.project(lstsq if beta0 is None else np.asarray(beta0, float))
        return FeasibilityResult(beta, rsq(beta), 0, Verdict.EMPTY)

    x = bp.project(np.asarray(beta0, dtype=float).copy() if beta0 is not None else lstsq)
    fx = rsq(x)
    if history is not None:
        history.append(fx)
    if fx <= tol:
        return FeasibilityResult(x, fx, 0, Verdict.NONEMPTY)

    if sigma == 0.0:
        # A is (numerically) zero and b passed the consistency check above
        return FeasibilityResult(x, fx, 0, Verdict.NONEMPTY if fx <= tol else Verdict.EMPTY)

    step = 1.0 / (sigma * sigma)
    y = x
    t = 1.0
    for it in range(1, cfg.max_iters + 1):
        rx = A @ x - b
        Fx = 0.5 * float(rx @ rx)
        g = A.T @ rx
        # convexity lower bound on the optimum over the compact feasible set
        lower = Fx - float(g @ x) - bp.support(-g)
        if 2.0 * lower > tol:
            return FeasibilityResult(x, 2.0 * Fx, it, Verdict.EMPTY)
        x_plain = bp.project(x - step * g)
        gmap = float(np.linalg.norm(x - x_plain)) / step
        if gmap <= cfg.grad_map_tol:
            res = 2.0 * Fx
            verdict = Verdict.NONEMPTY if res <= tol else Verdict.EMPTY
            return FeasibilityResult(x, res, it, verdict)

        ry = A @ y - b
        x_new = bp.project(y - step * (A.T @ ry))
        f_new = rsq(x_new)
        if f_new <= tol:
            if history is not None:
                history.append(f_new)
            return FeasibilityResult(x_new, f_new, it, Verdict.NONEMPTY)
        if cfg.use_restart and f_new > 2.0 * Fx:
            # momentum overshoot: restart from a plain descent step
            x_new = x_plain
            f_new = rsq(x_new)
            y = x_new
            t = 1.0
        else:
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            y = x_new + ((t - 1.0) / t_new) * (x_new - x)
            t = t_new
        x = x_new
        if history is not None:
            history.append(f_new)
    return FeasibilityResult(x, rsq(x), cfg.max_iters, Verdict.INCONCLUSIVE)


# ---------------------------------------------------------------------------
# public checks


def is_empty(E, config=None, beta0=None):
    """Whether the ellipsotope is empty.

    Returns (empty, FeasibilityResult); empty is True only for a certified
    EMPTY verdict. An INCONCLUSIVE verdict yields False and should be
    inspected by the caller.
    """
    result = solve_ball_product_lsq(E.A, E.b, E.I, E.p, config=config, beta0=beta0)
    return result.verdict == Verdict.EMPTY, result


class MembershipSolver:
    """Reusable point-membership solver for one ellipsotope.

    Precomputes the SVD of the stacked system [A; G] so repeated queries
    (ray tracing, grid classification) only pay for iterations.
    """

    def __init__(self, E, config=None):
        self.E = E
        self.config = config or default_config()
        self.M = np.vstack([E.A, E.G])
        self.svd = _svd_tools(self.M)
        self.last_beta = None

    def query(self, x, beta0=None):
        x = as_vector(x, "x")
        if x.shape[0] != self.E.dim:
            raise ValueError(
                f"point has dimension {x.shape[0]}, expected {self.E.dim}"
            )
        rhs = np.concatenate([self.E.b, x - self.E.c])
        if beta0 is None:
            beta0 = self.last_beta
        result = solve_ball_product_lsq(
            self.M, rhs, self.E.I, self.E.p,
            config=self.config, beta0=beta0, svd=self.svd,
        )
        if result.verdict == Verdict.NONEMPTY:
            self.last_beta = result.beta
        return result.verdict == Verdict.NONEMPTY, result


def contains_point(E, x, config=None, beta0=None):
    """Whether x lies in E, by emptiness of the stacked system [A; G].

    Returns (contained, FeasibilityResult).
    """
    return MembershipSolver(E, config=config).query(x, beta0=beta0)


def feasible_coefficient(E, config=None, residual_cap=1e-13):
    """A coefficient vector in the ball product with A beta ~= b.

    Raises ValueError when the set is (or appears) empty. Used as the
    interior/witness point for boundary sampling and ray tracing.
    """
    if E.num_constraints == 0:
        return np.zeros(E.num_generators)
    cfg = replace(config or default_config(), tol_feas=1e-18)
    result = solve_ball_product_lsq(E.A, E.b, E.I, E.p, config=cfg)
    if result.residual > residual_cap:
        raise ValueError(
            f"no feasible coefficient found (residual {result.residual:.3e}); "
            "the set is empty or degenerate at this tolerance"
        )
    return result.beta


def ray_trace(E, x, g, lam_tol=1e-8, config=None, solver=None):
    """Largest lam >= 0 with x + lam * g in E, by bisection on lam.

    x must be contained in E and g must be nonzero. Each membership query
    warm-starts from the previous feasible coefficient vector.
    """
    x = as_vector(x, "x")
    g = as_vector(g, "g")
    gn = float(np.linalg.norm(g))
    if gn == 0.0:
        raise ValueError("ray direction must be nonzero")
    ms = solver if solver is not None else MembershipSolver(E, config=config or RAY_CONFIG)
    inside, res = ms.query(x)
    if not inside:
        raise ValueError(
            f"ray origin is not contained (verdict {res.verdict.value}, "
            f"residual {res.residual:.3e})"
        )
    # every point of E lies within ||c - x|| + sum_i ||G_i|| of x
    reach = float(np.linalg.norm(E.c - x)) + float(
        np.sum(np.linalg.norm(E.G, axis=0))
    )
    hi = reach / gn + 1.0
    lo = 0.0
    while hi - lo > lam_tol:
        mid = 0.5 * (lo + hi)
        inside, _ = ms.query(x + mid * g)
        if inside:
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------------------
# feasible-point sampling (shared by tests, demos, and benchmarks)


def sample_ball_product(I, p, rng):
    """One random coefficient vector in the ball product of I.

    Uniform over each block for boxes (singleton blocks) and Euclidean
    balls; direction-uniform with radial shaping otherwise.
    """
    beta = np.zeros(I.size)
    for blk in I:
        d = len(blk)
        idx = list(blk)
        if d == 1 or p == INF:
            beta[idx] = rng.uniform(-1.0, 1.0, size=d)
            continue
        z = rng.standard_normal(d)
        z /= pnorm(z, p)
        radius = rng.random() ** (1.0 / d)
        beta[idx] = radius * z
    return beta


def sample_feasible(E, count, rng, config=None):
    """Random member points of E (count x n array).

    Unconstrained sets sample the ball product directly; constrained sets
    walk random kernel directions from a feasible coefficient.
    """
    if E.num_constraints == 0:
        pts = [E.map_coefficients(sample_ball_product(E.I, E.p, rng)) for _ in range(count)]
        return np.array(pts).reshape(count, E.dim)
    beta0 = feasible_coefficient(E, config=config)
    _, s, Vt = np.linalg.svd(E.A, full_matrices=True)
    cutoff = max(E.A.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > cutoff))
    kernel = Vt[rank:].T
    pts = []
    for _ in range(count):
        if kernel.shape[1] == 0:
            pts.append(E.map_coefficients(beta0))
            continue
        u = kernel @ rng.standard_normal(kernel.shape[1])
        nu = float(np.linalg.norm(u))
        if nu == 0.0:
            pts.append(E.map_coefficients(beta0))
            continue
        u /= nu
        alpha = _max_step_in_ball_product(beta0, u, E.I, E.p)
        pts.append(E.map_coefficients(beta0 + (rng.random() * alpha) * u))
    return np.array(pts).reshape(count, E.dim)


def _max_step_in_ball_product(beta0, u, I, p, tol=1e-10):
    """Largest alpha >= 0 keeping beta0 + alpha*u inside the ball product."""

    def outside(alpha):
        ok, _ = ball_product_membership(beta0 + alpha * u, I, p)
        return not ok

    hi = 1.0
    grow = 0
    while not outside(hi):
        hi *= 2.0
        grow += 1
        if grow > 60:
            return hi
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if outside(mid):
            hi = mid
        else:
            lo = mid
    return lo
