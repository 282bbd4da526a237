"""The closed set-operation algebra on ellipsotopes.

Every operation here is a pure function of immutable inputs and returns a new
ellipsotope (or export structure) without checking emptiness; use solve.is_empty
for that. Operands must share the same norm order p — mismatches are errors,
never coerced.
"""

from dataclasses import dataclass

import numpy as np

from .core import (
    Ellipsotope,
    Halfspace,
    Hyperplane,
    IndexSet,
    as_matrix,
    as_vector,
)


def _require_same_p(E1, E2, opname):
    if E1.p != E2.p:
        raise ValueError(f"{opname} requires matching norm orders, got {E1.p} and {E2.p}")


def _require_same_dim(E1, E2, opname):
    if E1.dim != E2.dim:
        raise ValueError(
            f"{opname} requires matching ambient dimensions, got {E1.dim} and {E2.dim}"
        )


def _block_diag(A1, A2):
    k1, m1 = A1.shape
    k2, m2 = A2.shape
    out = np.zeros((k1 + k2, m1 + m2))
    out[:k1, :m1] = A1
    out[k1:, m1:] = A2
    return out


# ---------------------------------------------------------------------------
# affine structure


def affine_map(E, T, t=None):
    """Image of E under x -> T @ x + t.

    T maps the ambient space of E to the output space; constraints and the
    index set are untouched.
    """
    T = as_matrix(T, "T")
    if T.shape[1] != E.dim:
        raise ValueError(
            f"map expects {T.shape[1]}-dimensional input but E has dimension {E.dim}"
        )
    t = np.zeros(T.shape[0]) if t is None else as_vector(t, "t")
    if t.shape[0] != T.shape[0]:
        raise ValueError(
            f"translation has dimension {t.shape[0]} but the map outputs {T.shape[0]}"
        )
    return Ellipsotope(E.p, T @ E.c + t, T @ E.G, E.A, E.b, E.I)


def minkowski_sum(E1, E2):
    """Exact Minkowski sum: concatenated generators, block-diagonal constraints."""
    _require_same_dim(E1, E2, "minkowski_sum")
    _require_same_p(E1, E2, "minkowski_sum")
    return Ellipsotope(
        E1.p,
        E1.c + E2.c,
        np.hstack([E1.G, E2.G]),
        _block_diag(E1.A, E2.A),
        np.concatenate([E1.b, E2.b]),
        E1.I.concat(E2.I, E1.num_generators),
    )


def cartesian_product(E1, E2):
    """Cartesian product in the stacked ambient space R^(n1+n2)."""
    _require_same_p(E1, E2, "cartesian_product")
    return Ellipsotope(
        E1.p,
        np.concatenate([E1.c, E2.c]),
        _block_diag(E1.G, E2.G),
        _block_diag(E1.A, E2.A),
        np.concatenate([E1.b, E2.b]),
        E1.I.concat(E2.I, E1.num_generators),
    )


# ---------------------------------------------------------------------------
# intersections


def intersect(E1, E2):
    """Exact intersection; the result may be empty (not checked here).

    Keeps the center of whichever operand has more generators, so the block
    of appended zero generators is as small as possible. Deterministic: the
    operands are swapped exactly when E2 has strictly more generators.
    """
    _require_same_dim(E1, E2, "intersect")
    _require_same_p(E1, E2, "intersect")
    if E2.num_generators > E1.num_generators:
        E1, E2 = E2, E1
    return intersect_generalized(E1, E2, np.eye(E1.dim), _swap=False)


def intersect_generalized(E1, E2, R, _swap=None):
    """Generalized intersection { x in E1 : R @ x in E2 }.

    R maps E1's space into E2's space; with R = I this is the plain
    intersection (up to the operand-swap rule used there).
    """
    R = as_matrix(R, "R")
    _require_same_p(E1, E2, "intersect_generalized")
    if R.shape[1] != E1.dim or R.shape[0] != E2.dim:
        raise ValueError(
            f"R must map R^{E1.dim} to R^{E2.dim}, got shape {R.shape}"
        )
    m1, m2 = E1.num_generators, E2.num_generators
    k1, k2 = E1.num_constraints, E2.num_constraints
    n2 = E2.dim
    A = np.zeros((k1 + k2 + n2, m1 + m2))
    A[:k1, :m1] = E1.A
    A[k1:k1 + k2, m1:] = E2.A
    A[k1 + k2:, :m1] = R @ E1.G
    A[k1 + k2:, m1:] = -E2.G
    b = np.concatenate([E1.b, E2.b, E2.c - R @ E1.c])
    G = np.hstack([E1.G, np.zeros((E1.dim, m2))])
    return Ellipsotope(E1.p, E1.c, G, A, b, E1.I.concat(E2.I, m1))


def intersect_hyperplane(E, P):
    """Intersection with an affine hyperplane { x : H x = f }."""
    if not isinstance(P, Hyperplane):
        raise TypeError("intersect_hyperplane expects a Hyperplane")
    if P.H.shape[1] != E.dim:
        raise ValueError(
            f"hyperplane in R^{P.H.shape[1]} cannot slice a set in R^{E.dim}"
        )
    if P.H.shape[0] >= E.dim:
        raise ValueError(
            f"hyperplane must have fewer rows ({P.H.shape[0]}) than the ambient dimension ({E.dim})"
        )
    A = np.vstack([E.A, P.H @ E.G])
    b = np.concatenate([E.b, P.f - P.H @ E.c])
    return Ellipsotope(E.p, E.c, E.G, A, b, E.I)


def intersect_halfspace(E, S):
    """Intersection with a halfspace { x : h . x <= s }, via one slack coefficient.

    The slack interval [0, s - h.c + |h^T G| 1] is mapped onto a fresh
    coefficient in [-1, 1] scaled by d. When that interval is empty (the
    zonotope bound already separates E from the halfspace), d is clamped to 0,
    which leaves the equality constraint h^T G beta = s - h . c; that system is
    infeasible over the ball product, so the result correctly represents the
    empty set instead of flipping the slack interval.
    """
    if not isinstance(S, Halfspace):
        raise TypeError("intersect_halfspace expects a Halfspace")
    if S.h.shape[0] != E.dim:
        raise ValueError(
            f"halfspace in R^{S.h.shape[0]} cannot cut a set in R^{E.dim}"
        )
    m = E.num_generators
    hG = S.h @ E.G
    gap = S.s - float(S.h @ E.c) + float(np.sum(np.abs(hG)))
    d = max(0.5 * gap, 0.0)
    A = np.zeros((E.num_constraints + 1, m + 1))
    A[:-1, :m] = E.A
    A[-1, :m] = hG
    A[-1, m] = d
    b = np.concatenate([E.b, [S.s - float(S.h @ E.c) - d]])
    G = np.hstack([E.G, np.zeros((E.dim, 1))])
    I = IndexSet(E.I.blocks + ((m,),))
    return Ellipsotope(E.p, E.c, G, A, b, I)


# ---------------------------------------------------------------------------
# convex hull (enclosing)


def convex_hull_overapprox(E1, E2):
    """Ellipsotope enclosing the convex hull of E1 union E2.

    Adds one interpolation coefficient and 2*(m1+m2) slack coefficients whose
    constraints encode the scaled-coefficient construction; the result always
    contains every convex combination of points of E1 and E2.
    """
    _require_same_dim(E1, E2, "convex_hull_overapprox")
    _require_same_p(E1, E2, "convex_hull_overapprox")
    n = E1.dim
    m1, m2 = E1.num_generators, E2.num_generators
    k1, k2 = E1.num_constraints, E2.num_constraints
    m3 = m1 + m2
    G = np.zeros((n, 3 * m3 + 1))
    G[:, :m1] = E1.G
    G[:, m1:m3] = E2.G
    G[:, m3] = 0.5 * (E1.c - E2.c)

    A = np.zeros((k1 + k2 + 2 * m3, 3 * m3 + 1))
    b = np.zeros(k1 + k2 + 2 * m3)
    A[:k1, :m1] = E1.A
    A[:k1, m3] = -0.5 * E1.b
    b[:k1] = 0.5 * E1.b
    A[k1:k1 + k2, m1:m3] = E2.A
    A[k1:k1 + k2, m3] = 0.5 * E2.b
    b[k1:k1 + k2] = 0.5 * E2.b

    r0 = k1 + k2
    # coefficient-interpolation rows: identity pairs on beta1/beta2, the
    # interpolation column, and one slack per row
    A[r0:r0 + m1, :m1] = np.eye(m1)
    A[r0 + m1:r0 + 2 * m1, :m1] = -np.eye(m1)
    A[r0 + 2 * m1:r0 + 2 * m1 + m2, m1:m3] = np.eye(m2)
    A[r0 + 2 * m1 + m2:, m1:m3] = -np.eye(m2)
    A[r0:r0 + 2 * m1, m3] = -0.5
    A[r0 + 2 * m1:, m3] = 0.5
    A[r0:, m3 + 1:] = np.eye(2 * m3)
    b[r0:] = -0.5

    blocks = E1.I.concat(E2.I, m1).blocks + tuple((j,) for j in range(m3, 3 * m3 + 1))
    return Ellipsotope(
        E1.p, 0.5 * (E1.c + E2.c), G, A, b, IndexSet(blocks)
    )


# ---------------------------------------------------------------------------
# lifting and cleanup


def lift(E):
    """Constraint-free ellipsotope in R^(n+k) with x in E iff (x, 0) in lift(E)."""
    k = E.num_constraints
    if k == 0:
        raise ValueError("lift requires at least one constraint")
    c = np.concatenate([E.c, -E.b])
    G = np.vstack([E.G, E.A])
    return Ellipsotope(E.p, c, G, I=E.I)


def drop_zero_generators(E):
    """Remove generator columns that are zero in both G and A.

    Such coefficients influence neither the set nor the constraints; removing
    them (and any index block they empty out) leaves the set unchanged. Kept
    columns stay in their original order.
    """
    keep = [
        j
        for j in range(E.num_generators)
        if np.any(E.G[:, j] != 0.0) or np.any(E.A[:, j] != 0.0)
    ]
    if len(keep) == E.num_generators:
        return E
    remap = {old: new for new, old in enumerate(keep)}
    blocks = []
    for blk in E.I:
        nb = tuple(remap[j] for j in blk if j in remap)
        if nb:
            blocks.append(nb)
    return Ellipsotope(
        E.p,
        E.c,
        E.G[:, keep],
        E.A[:, keep],
        E.b,
        IndexSet(tuple(blocks)),
    )


# ---------------------------------------------------------------------------
# constrained polynomial zonotope export


@dataclass(frozen=True)
class CpzExport:
    """Constrained-polynomial-zonotope form of an ellipsotope (export only).

    Coefficients are (beta, one slack per index block). G carries one appended
    zero column per slack; X is the identity over all coefficients. Each index
    block J contributes the constraint sum_{j in J} beta_j^p + 0.5*slack = 0.5,
    and linear constraint rows act on separate degree-1 monomials of beta. D
    stacks the exponent rows of all monomials: first the degree-p rows (one per
    beta entry), then the slack rows, then (when linear constraints exist) the
    degree-1 beta rows.
    """

    c: np.ndarray
    G: np.ndarray
    X: np.ndarray
    A: np.ndarray
    b: np.ndarray
    D: np.ndarray


def to_cpz(E):
    """Export E as a constrained polynomial zonotope; requires integer p."""
    p = E.p
    if not (p != np.inf and float(p).is_integer() and p >= 1):
        raise ValueError(f"CPZ export requires a positive integer norm order, got {p}")
    p = int(p)
    m = E.num_generators
    nb = len(E.I)
    k = E.num_constraints
    n_coeff = m + nb
    with_linear = k > 0
    n_mono = m + nb + (m if with_linear else 0)

    D = np.zeros((n_mono, n_coeff), dtype=int)
    D[:m, :m] = p * np.eye(m, dtype=int)
    D[m:m + nb, m:] = np.eye(nb, dtype=int)
    if with_linear:
        D[m + nb:, :m] = np.eye(m, dtype=int)

    A = np.zeros((nb + k, n_mono))
    b = np.zeros(nb + k)
    for i, blk in enumerate(E.I):
        A[i, list(blk)] = 1.0
        A[i, m + i] = 0.5
        b[i] = 0.5
    if with_linear:
        A[nb:, m + nb:] = E.A
        b[nb:] = E.b

    G = np.hstack([E.G, np.zeros((E.dim, nb))])
    return CpzExport(
        c=E.c.copy(),
        G=G,
        X=np.eye(n_coeff, dtype=int),
        A=A,
        b=b,
        D=D,
    )
