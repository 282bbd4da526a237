"""Order reduction for ellipsotopes.

Exact routes (2-norm only): basic sets never need more than n generators;
constrained sets slice down to basic ones; lift-then-reduce bounds any
2-ellipsotope at (n+k) generators per index block. Conservative routes
(any p): minimum-volume enclosing ellipsoids for merged components,
generator popping with box enclosure, and constraint elimination. Every
conservative route returns a superset of its input.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    EllipsoidParams,
    Ellipsotope,
    IndexSet,
    as_matrix,
    as_vector,
    eigh_pd,
    from_ellipsoid,
    inv_sqrt_pd,
    symmetrize,
)
from .ops import minkowski_sum

_RANK_TOL = 1e-10


def _require_full_row_rank(G, name="generator matrix"):
    if G.shape[1] < G.shape[0]:
        raise ValueError(f"{name} cannot have full row rank: shape {G.shape}")
    s = np.linalg.svd(G, compute_uv=False)
    if s.size == 0 or s[-1] <= _RANK_TOL * s[0]:
        raise ValueError(f"{name} is rank deficient (singular values {s})")


# ---------------------------------------------------------------------------
# exact conversions for 2-ellipsotopes


def to_ellipsoid(E):
    """Shape-matrix form of a basic 2-ellipsotope: Q = pinv(G)^T pinv(G)."""
    if E.p != 2.0:
        raise ValueError("ellipsoid conversion requires p = 2")
    if E.num_constraints != 0 or len(E.I) > 1:
        raise ValueError("ellipsoid conversion requires a basic ellipsotope")
    _require_full_row_rank(E.G)
    Gp = np.linalg.pinv(E.G)
    return EllipsoidParams(E.c, symmetrize(Gp.T @ Gp))


def constrained_to_basic(E):
    """Equivalent basic 2-ellipsotope of a constrained single-block one.

    The constraints slice the coefficient ball along an affine subspace; the
    slice is a lower-dimensional ball centered at the min-norm solution
    t = pinv(A) b with radius sqrt(1 - ||t||^2), mapped back through G.
    Dependent constraint rows are absorbed by the rank-revealing SVD; an
    inconsistent system or ||t|| > 1 means the input is empty (an error here).
    """
    if E.p != 2.0:
        raise ValueError("constrained-to-basic requires p = 2")
    if len(E.I) > 1:
        raise ValueError("constrained-to-basic requires a single index block")
    k, m = E.A.shape
    if k == 0:
        raise ValueError("input has no constraints")
    U, s, Vt = np.linalg.svd(E.A, full_matrices=True)
    rank = int(np.sum(s > _RANK_TOL * (s[0] if s.size else 0.0)))
    inv_s = np.zeros_like(s)
    inv_s[:rank] = 1.0 / s[:rank]
    t = Vt[:rank].T @ (inv_s[:rank] * (U[:, :rank].T @ E.b))
    if float(np.linalg.norm(E.A @ t - E.b)) > _RANK_TOL * (1.0 + float(np.linalg.norm(E.b))):
        raise ValueError("inconsistent constraints: the ellipsotope is empty")
    tn = float(np.linalg.norm(t))
    if tn > 1.0 + _RANK_TOL:
        raise ValueError(
            f"constraints miss the coefficient ball (||t|| = {tn}): the ellipsotope is empty"
        )
    if tn >= 1.0 - _RANK_TOL:
        # tangent slice: a single point
        return Ellipsotope.point(E.c + E.G @ t, p=2.0)
    rho = math.sqrt(max(0.0, 1.0 - tn * tn))
    kernel = Vt[rank:].T
    T = rho * kernel
    return Ellipsotope(2.0, E.c + E.G @ t, E.G @ T, I=IndexSet.single(T.shape[1]))


def _exact_reduced_generators(G):
    # square generator matrix of the same basic 2-ellipsotope
    _require_full_row_rank(G)
    Gp = np.linalg.pinv(G)
    return inv_sqrt_pd(symmetrize(Gp.T @ Gp))


def reduce_basic_2(E):
    """Exact reduction of a basic 2-ellipsotope to exactly n generators."""
    if E.p != 2.0:
        raise ValueError("exact reduction requires p = 2")
    if E.num_constraints != 0 or len(E.I) > 1:
        raise ValueError("exact reduction requires a basic ellipsotope")
    if E.num_generators < E.dim:
        raise ValueError("fewer generators than dimensions: cannot be full row rank")
    G = _exact_reduced_generators(E.G)
    return Ellipsotope(2.0, E.c, G, I=IndexSet.single(G.shape[1]))


# ---------------------------------------------------------------------------
# minimum-volume enclosing ellipsoid of a pair sum


@dataclass(frozen=True)
class MvoeResult:
    """Enclosing-ellipsoid shape for a Minkowski sum of two ellipsoids."""

    Q_sum: np.ndarray
    zeta: float
    iterations: int


MVOE_TOL = 1e-10


def mvoe_pair(e1, e2, tol=MVOE_TOL, max_iters=10_000):
    """Minimum-volume ellipsoid enclosing the Minkowski sum of two ellipsoids.

    Runs the scalar fixed-point iteration on zeta from zeta = 0 until the
    stationarity residual sum_i (1 - zeta^2 lam_i) / (1 + zeta lam_i) drops
    to tol; any zeta > 0 gives an enclosing ellipsoid, the fixed point the
    smallest one. Centers add; the shape is
    ((1 + 1/zeta) Q1^-1 + (1 + zeta) Q2^-1)^-1.
    """
    if e1.dim != e2.dim:
        raise ValueError("ellipsoids must share a dimension")
    S = inv_sqrt_pd(e2.Q, "Q2")
    lam = np.linalg.eigvalsh(symmetrize(S @ e1.Q @ S))
    eigh_pd(e1.Q, "Q1")
    zeta = 0.0
    iterations = 0
    for iterations in range(1, max_iters + 1):
        denom = 1.0 + zeta * lam
        zeta = math.sqrt(float(np.sum(1.0 / denom)) / float(np.sum(lam / denom)))
        resid = float(np.sum((1.0 - zeta * zeta * lam) / (1.0 + zeta * lam)))
        if resid <= tol:
            break
    else:
        raise RuntimeError(f"fixed-point iteration did not settle in {max_iters} steps")
    Q1i = np.linalg.inv(e1.Q)
    Q2i = np.linalg.inv(e2.Q)
    Q = np.linalg.inv((1.0 + 1.0 / zeta) * Q1i + (1.0 + zeta) * Q2i)
    return MvoeResult(Q_sum=symmetrize(Q), zeta=zeta, iterations=iterations)


def pair_volume_heuristic(Q1, Q2):
    """Volume proxy for the merged pair: det(2 Q1^-1 + 2 Q2^-1)^(1/2).

    Same units as the enclosing-ellipsoid volume measure det(Q)^{-1/2}
    evaluated at the zeta = 1 shape, so it tracks the merged volume without
    running the fixed point.
    """
    M = 2.0 * np.linalg.inv(Q1) + 2.0 * np.linalg.inv(Q2)
    sign, logdet = np.linalg.slogdet(M)
    if sign <= 0:
        raise ValueError("shape matrices must be positive definite")
    return math.exp(0.5 * logdet)


def select_pair_heuristic(components):
    """Index pair whose merge is predicted to add the least volume.

    Scans all pairs of EllipsoidParams and picks the one minimizing the
    volume proxy of pair_volume_heuristic; ties keep the lexicographically
    smallest (i, j).
    """
    if len(components) < 2:
        raise ValueError("need at least two components to pick a pair")
    best = None
    best_score = math.inf
    for i in range(len(components)):
        for j in range(i + 1, len(components)):
            score = pair_volume_heuristic(components[i].Q, components[j].Q)
            if score < best_score:
                best_score = score
                best = (i, j)
    return best


# ---------------------------------------------------------------------------
# component identification


@dataclass(frozen=True)
class Component:
    """One independent factor of an ellipsotope's Minkowski-sum structure."""

    has_center: bool
    G: np.ndarray
    A: np.ndarray
    b: np.ndarray
    I: IndexSet
    columns: tuple[int, ...]
    rows: tuple[int, ...]

    def to_etope(self, parent):
        center = parent.c if self.has_center else np.zeros(parent.dim)
        return Ellipsotope(parent.p, center, self.G, self.A, self.b, self.I)


@dataclass(frozen=True)
class ComponentDecomposition:
    components: tuple[Component, ...]

    def __len__(self):
        return len(self.components)


def identify_components(E):
    """Split E into independent components by constraint-row support.

    Index blocks whose constraint columns never share a row are independent;
    Minkowski-summing the component ellipsotopes (the first carries the
    center, the rest are zero-centered) reproduces E as a set. Worst case is
    one component equal to E itself.
    """
    blocks = E.I.blocks
    nb = len(blocks)
    if nb == 0:
        comp = Component(
            True, E.G, E.A, E.b, IndexSet(()),
            tuple(), tuple(range(E.num_constraints)),
        )
        return ComponentDecomposition((comp,))

    col_block = {}
    for bi, blk in enumerate(blocks):
        for j in blk:
            col_block[j] = bi

    parent = list(range(nb))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    row_support = []
    for r in range(E.num_constraints):
        touched = sorted({col_block[j] for j in np.nonzero(E.A[r])[0]})
        row_support.append(touched)
        for bi in touched[1:]:
            union(touched[0], bi)

    groups = {}
    for bi in range(nb):
        groups.setdefault(find(bi), []).append(bi)
    ordered_roots = sorted(groups)

    comps = []
    for gi, root in enumerate(ordered_roots):
        members = groups[root]
        cols = sorted(j for bi in members for j in blocks[bi])
        remap = {j: lj for lj, j in enumerate(cols)}
        rows = [
            r
            for r in range(E.num_constraints)
            if (row_support[r] and find(row_support[r][0]) == root)
            or (not row_support[r] and gi == 0)  # all-zero rows ride with the first
        ]
        local_blocks = IndexSet(
            tuple(tuple(remap[j] for j in blocks[bi]) for bi in members)
        )
        comps.append(
            Component(
                has_center=(gi == 0),
                G=E.G[:, cols],
                A=E.A[np.ix_(rows, cols)] if rows else np.zeros((0, len(cols))),
                b=E.b[rows],
                I=local_blocks,
                columns=tuple(cols),
                rows=tuple(rows),
            )
        )
    return ComponentDecomposition(tuple(comps))


# ---------------------------------------------------------------------------
# the merge pipeline for 2-ellipsotopes


def _component_ellipsoids(comp, parent):
    """EllipsoidParams list covering one component (exact where possible).

    Single-block components convert exactly (slicing away constraints first);
    multi-block constrained components are relaxed by dropping their
    constraints, which is a superset, then split per block. Zero-generator
    pieces come back as bare center translations.
    """
    etope = comp.to_etope(parent)
    translations = np.zeros(parent.dim)
    ells = []
    if etope.num_constraints > 0 and len(etope.I) == 1:
        etope = constrained_to_basic(etope)
    if etope.num_generators == 0:
        return [], etope.c.copy()
    if etope.num_constraints == 0 and len(etope.I) == 1:
        return [to_ellipsoid(etope)], translations
    # multi-block: drop constraints (superset), one ellipsoid per block
    first = True
    for blk in etope.I:
        sub = Ellipsotope(
            2.0,
            etope.c if first else np.zeros(parent.dim),
            etope.G[:, list(blk)],
            I=IndexSet.single(len(blk)),
        )
        first = False
        ells.append(to_ellipsoid(sub))
    return ells, translations


def reduce_2etope(E, target_components):
    """Reduce a 2-ellipsotope to at most target_components summands.

    Identifies independent components, converts each to an ellipsoid, then
    repeatedly merges the pair predicted to add the least volume until the
    target is met, and reassembles the Minkowski sum. The result contains E;
    it equals E when no merging was needed (returned unchanged).
    """
    if E.p != 2.0:
        raise ValueError("this reduction pipeline requires p = 2")
    if target_components < 1:
        raise ValueError("target component count must be at least 1")
    decomp = identify_components(E)
    if len(decomp) <= target_components:
        return E
    ells = []
    shift = np.zeros(E.dim)
    for comp in decomp.components:
        comp_ells, comp_shift = _component_ellipsoids(comp, E)
        ells.extend(comp_ells)
        shift = shift + comp_shift
    if not ells:
        return Ellipsotope.point(shift, p=2.0)
    while len(ells) > target_components:
        i, j = select_pair_heuristic(ells)
        merged = mvoe_pair(ells[i], ells[j])
        # centers add under the Minkowski sum
        center = ells[i].c + ells[j].c
        ells = [e for t, e in enumerate(ells) if t not in (i, j)]
        ells.append(EllipsoidParams(center, merged.Q_sum))
    out = None
    for e in ells:
        piece = from_ellipsoid(e)
        out = piece if out is None else minkowski_sum(out, piece)
    if np.any(shift != 0.0):
        out = Ellipsotope(2.0, out.c + shift, out.G, out.A, out.b, out.I)
    return out


def lift_then_reduce(E):
    """Exact per-block reduction after embedding constraints as dimensions.

    The lifted generator matrix [G; A] treats each index block as a basic
    component in R^(n+k); blocks with at least n+k generators reduce exactly
    to n+k columns, then the rows split back into generators and constraints.
    The result equals E with at most (n+k) * #blocks generators.
    """
    if E.p != 2.0:
        raise ValueError("lift-then-reduce requires p = 2")
    n, k = E.dim, E.num_constraints
    Gplus = np.vstack([E.G, E.A])
    parts = []
    blocks_out = []
    offset = 0
    for blk in E.I:
        sub = Gplus[:, list(blk)]
        if len(blk) >= n + k:
            sub = _exact_reduced_generators(sub)
        parts.append(sub)
        width = sub.shape[1]
        blocks_out.append(tuple(range(offset, offset + width)))
        offset += width
    Gr = np.hstack(parts) if parts else np.zeros((n + k, 0))
    return Ellipsotope(2.0, E.c, Gr[:n], Gr[n:], E.b, IndexSet(tuple(blocks_out)))


# ---------------------------------------------------------------------------
# popping, box enclosure, constraint relaxation (any p)


def pop_generator(E, j):
    """Move generator j into its own singleton norm block (a superset).

    Popping an already-singleton generator is a warned no-op.
    """
    if not 0 <= j < E.num_generators:
        raise IndexError(f"generator index {j} out of range for m = {E.num_generators}")
    blocks = []
    popped = False
    for blk in E.I:
        if j in blk:
            if len(blk) == 1:
                warnings.warn(f"generator {j} is already in a singleton block")
                return E
            blocks.append(tuple(i for i in blk if i != j))
            popped = True
        else:
            blocks.append(blk)
    assert popped
    blocks.append((j,))
    return Ellipsotope(E.p, E.c, E.G, E.A, E.b, IndexSet(tuple(blocks)))


def reduce_pop_box(E, n_r, use_mvoe=False):
    """Drop n_r generators by popping the smallest ones into a box (superset).

    Pops the n_r + n generators of smallest Euclidean length, replaces their
    zonotope with its interval hull diag(sum |g|) — or, for p = 2 with
    use_mvoe, with the enclosing ellipsoid of that zonotope — and re-sums.
    The targeted columns must be unconstrained (zero columns of A).
    """
    m, n = E.num_generators, E.dim
    if m - n_r < 1:
        raise ValueError(f"cannot remove {n_r} of {m} generators")
    count = min(n_r + n, m)
    norms = np.linalg.norm(E.G, axis=0)
    order = np.argsort(norms, kind="stable")
    victims = sorted(int(j) for j in order[:count])
    if np.any(E.A[:, victims] != 0.0):
        raise ValueError("pop-box targets include constrained generator columns")
    keep = [j for j in range(m) if j not in set(victims)]

    Gv = E.G[:, victims]
    if use_mvoe:
        if E.p != 2.0:
            raise ValueError("the enclosing-ellipsoid variant requires p = 2")
        ell = zonotope_mvoe(np.zeros(n), Gv)
        B = inv_sqrt_pd(ell.Q)
        tail_blocks = (tuple(range(len(keep), len(keep) + n)),)
    else:
        B = np.diag(np.sum(np.abs(Gv), axis=1))
        tail_blocks = tuple((len(keep) + i,) for i in range(n))

    remap = {old: new for new, old in enumerate(keep)}
    blocks = []
    for blk in E.I:
        nb = tuple(remap[j] for j in blk if j in remap)
        if nb:
            blocks.append(nb)
    blocks.extend(tail_blocks)
    return Ellipsotope(
        E.p,
        E.c,
        np.hstack([E.G[:, keep], B]),
        E.A[:, keep],
        E.b,
        IndexSet(tuple(blocks)),
    )


def relax_constraints(E, Gamma, Lambda):
    """Enclosing ellipsotope (c + Gamma b, G - Gamma A, A - Lambda A, b - Lambda b).

    Any Gamma (n x k) and Lambda (k x k) give a superset of E; zero matrices
    leave it unchanged.
    """
    Gamma = as_matrix(Gamma, "Gamma")
    Lambda = as_matrix(Lambda, "Lambda")
    k = E.num_constraints
    if Gamma.shape != (E.dim, k) or Lambda.shape != (k, k):
        raise ValueError(
            f"expected Gamma ({E.dim}x{k}) and Lambda ({k}x{k}), "
            f"got {Gamma.shape} and {Lambda.shape}"
        )
    return Ellipsotope(
        E.p,
        E.c + Gamma @ E.b,
        E.G - Gamma @ E.A,
        E.A - Lambda @ E.A,
        E.b - Lambda @ E.b,
        E.I,
    )


def eliminate_constraint(E, i):
    """Drop constraint row i (a pure relaxation; the result contains E)."""
    k = E.num_constraints
    if not 0 <= i < k:
        raise IndexError(f"constraint row {i} out of range for k = {k}")
    keep = [r for r in range(k) if r != i]
    return Ellipsotope(E.p, E.c, E.G, E.A[keep], E.b[keep], E.I)


# ---------------------------------------------------------------------------
# enclosing ellipsoid of a zonotope


def zonotope_mvoe(c, G):
    """Enclosing ellipsoid of the zonotope (c, G), solver-free.

    Scales the covariance ellipsoid E0 = m G G^T by r = sum(lam), where
    lam_i = sum_j |M_ij| for M = G0^T G0 and G0 = E0^(-1/2) G. That lambda
    makes diag(lam) - M diagonally dominant, hence feasible for the exact
    semidefinite condition, at the price of extra conservatism. The returned
    shape matrix is (r E0)^(-1).
    """
    c = as_vector(c, "c")
    G = as_matrix(G, "G")
    _require_full_row_rank(G)
    m = G.shape[1]
    E0 = m * (G @ G.T)
    G0 = inv_sqrt_pd(E0, "E0") @ G
    M = G0.T @ G0
    lam = np.sum(np.abs(M), axis=1)
    r = float(np.sum(lam))
    Q = np.linalg.inv(r * E0)
    return EllipsoidParams(c, symmetrize(Q))
