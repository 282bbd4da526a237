"""Ellipsotope set values: types, validation invariants, and constructors.

An ellipsotope is the affine image of a ball product (a Cartesian product of
unit p-norm balls, one per index block) intersected with an affine subspace
of coefficient space:

    E = { c + G @ beta  :  ||beta[J]||_p <= 1 for every block J,
                           A @ beta == b }

All values are immutable after construction and safe to share across threads.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

INF = math.inf

#: absolute slack on block norms used by every membership check
MEMBERSHIP_TOL = 1e-12

_P_MIN_SLACK = 1e-12
_PD_REL_TOL = 1e-12
_SYM_REL_TOL = 1e-10


# ---------------------------------------------------------------------------
# small array helpers


def as_vector(x, name="vector"):
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {v.shape}")
    return v


def as_matrix(x, name="matrix"):
    M = np.asarray(x, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {M.shape}")
    return M


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def pnorm(v, p):
    """p-norm of a vector, with p = INF meaning the max norm."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return 0.0
    return float(np.linalg.norm(v, np.inf if p == INF else p))


def symmetrize(Q):
    return 0.5 * (Q + Q.T)


def eigh_pd(Q, name="matrix"):
    """Eigendecomposition of a symmetric positive-definite matrix.

    Eigenvalues below 1e-12 * lambda_max are rejected so degeneracy is a
    deterministic, testable failure instead of a numerical surprise.
    """
    Q = as_matrix(Q, name)
    if Q.shape[0] != Q.shape[1]:
        raise ValueError(f"{name} must be square, got shape {Q.shape}")
    nrm = np.linalg.norm(Q)
    if np.linalg.norm(Q - Q.T) > _SYM_REL_TOL * max(1.0, nrm):
        raise ValueError(f"{name} is not symmetric")
    w, V = np.linalg.eigh(symmetrize(Q))
    if w[-1] <= 0.0 or w[0] <= _PD_REL_TOL * w[-1]:
        raise ValueError(f"{name} is not positive definite (eigenvalues {w})")
    return w, V


def sqrt_pd(Q, name="matrix"):
    """Symmetric square root of a positive-definite matrix."""
    w, V = eigh_pd(Q, name)
    return (V * np.sqrt(w)) @ V.T


def inv_sqrt_pd(Q, name="matrix"):
    """Inverse of the symmetric square root of a positive-definite matrix."""
    w, V = eigh_pd(Q, name)
    return (V / np.sqrt(w)) @ V.T


def sqrt_psd(M, name="matrix", neg_tol=1e-10):
    """Symmetric square root allowing zero eigenvalues (clamped at 0).

    Raises if any eigenvalue is below -neg_tol * max(1, lambda_max).
    """
    M = as_matrix(M, name)
    w, V = np.linalg.eigh(symmetrize(M))
    if w[0] < -neg_tol * max(1.0, abs(w[-1])):
        raise ValueError(f"{name} has negative eigenvalue {w[0]}")
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


# ---------------------------------------------------------------------------
# index sets


@dataclass(frozen=True)
class IndexSet:
    """Partition of the generator indices 0..m-1 into norm blocks.

    Each block's coefficients share one p-norm ball; the blocks are pairwise
    disjoint and cover every generator index exactly once.
    """

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        norm = tuple(tuple(int(j) for j in blk) for blk in self.blocks)
        object.__setattr__(self, "blocks", norm)

    @classmethod
    def single(cls, m):
        """One block covering all m generators."""
        return cls((tuple(range(m)),) if m > 0 else ())

    @classmethod
    def singletons(cls, m):
        """One block per generator (the zonotope pattern)."""
        return cls(tuple((j,) for j in range(m)))

    def shifted(self, offset):
        return IndexSet(tuple(tuple(j + offset for j in blk) for blk in self.blocks))

    def concat(self, other, offset):
        """Blocks of self followed by other's blocks shifted by offset."""
        return IndexSet(self.blocks + other.shifted(offset).blocks)

    @property
    def size(self):
        return sum(len(blk) for blk in self.blocks)

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def violations(self, m):
        """All invariant violations of this index set for m generators."""
        out = []
        seen = set()
        overlap = False
        for blk in self.blocks:
            if len(blk) == 0:
                out.append("index set block is empty")
            for j in blk:
                if j in seen:
                    overlap = True
                seen.add(j)
        if overlap:
            out.append("index set blocks overlap")
        if seen != set(range(m)):
            out.append(
                f"index set must partition 0..{m - 1}, got coverage {sorted(seen)}"
            )
        return out


# ---------------------------------------------------------------------------
# companion region types


@dataclass(frozen=True)
class Hyperplane:
    """Affine equality region { x : H @ x == f }."""

    H: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        H = as_matrix(self.H, "H")
        f = as_vector(self.f, "f")
        if H.shape[0] != f.shape[0]:
            raise ValueError(
                f"hyperplane dimension mismatch: H has {H.shape[0]} rows, f has {f.shape[0]}"
            )
        object.__setattr__(self, "H", _frozen(H))
        object.__setattr__(self, "f", _frozen(f))


@dataclass(frozen=True)
class Halfspace:
    """Affine inequality region { x : h . x <= s }."""

    h: np.ndarray
    s: float

    def __post_init__(self):
        h = as_vector(self.h, "h")
        if not np.any(h != 0.0):
            raise ValueError("halfspace normal h must be nonzero")
        object.__setattr__(self, "h", _frozen(h))
        object.__setattr__(self, "s", float(self.s))


@dataclass(frozen=True)
class EllipsoidParams:
    """Ellipsoid { x : (x - c)^T Q (x - c) <= 1 } with positive-definite Q."""

    c: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        c = as_vector(self.c, "c")
        Q = as_matrix(self.Q, "Q")
        eigh_pd(Q, "Q")
        if Q.shape[0] != c.shape[0]:
            raise ValueError(
                f"ellipsoid dimension mismatch: c in R^{c.shape[0]}, Q is {Q.shape}"
            )
        object.__setattr__(self, "c", _frozen(c))
        object.__setattr__(self, "Q", _frozen(symmetrize(Q)))

    @property
    def dim(self):
        return self.c.shape[0]

    def contains(self, x, tol=1e-9):
        d = as_vector(x, "x") - self.c
        return float(d @ self.Q @ d) <= 1.0 + tol

    def volume_measure(self):
        """Quantity proportional to the ellipsoid volume: det(Q)^(-1/2)."""
        sign, logdet = np.linalg.slogdet(self.Q)
        if sign <= 0:
            raise ValueError("shape matrix must have positive determinant")
        return math.exp(-0.5 * logdet)


# ---------------------------------------------------------------------------
# validation


def check_invariants(p, c, G, A=None, b=None, blocks=None):
    """Collect every invariant violation for raw ellipsotope pieces.

    Returns a list of human-readable reasons; an empty list means the pieces
    form a valid ellipsotope. Violations are data, not failures.
    """
    out = []
    try:
        c = as_vector(c, "center")
    except ValueError as err:
        return [str(err)]
    try:
        G = as_matrix(G, "generator matrix")
    except ValueError as err:
        return [str(err)]
    n = c.shape[0]
    m = G.shape[1]
    if G.shape[0] != n:
        out.append(
            f"dimension mismatch: center in R^{n} but generator matrix has {G.shape[0]} rows"
        )

    if (A is None) != (b is None):
        out.append("constraints require both A and b")
    if A is not None and b is not None:
        try:
            A = as_matrix(A, "constraint matrix")
            b = as_vector(b, "constraint vector")
        except ValueError as err:
            out.append(str(err))
            A = b = None
    if A is not None and b is not None:
        if A.shape[0] != b.shape[0]:
            out.append(
                "constraint dimension mismatch: "
                f"A has {A.shape[0]} rows but b has {b.shape[0]} entries"
            )
        if A.shape[1] != m:
            out.append(
                "constraint dimension mismatch: "
                f"A has {A.shape[1]} columns but there are {m} generators"
            )

    if blocks is not None:
        index_set = blocks if isinstance(blocks, IndexSet) else IndexSet(tuple(map(tuple, blocks)))
        out.extend(index_set.violations(m))

    try:
        pf = float(p)
    except (TypeError, ValueError):
        out.append(f"norm order p must be numeric or INF, got {p!r}")
        return out
    if math.isnan(pf):
        out.append("norm order p must not be NaN")
    elif pf != INF and pf < 1.0 + _P_MIN_SLACK:
        out.append(f"norm order p must be at least 1 + 1e-12 or INF, got {pf}")
    return out


# ---------------------------------------------------------------------------
# the ellipsotope value


@dataclass(frozen=True, eq=False)
class Ellipsotope:
    """Immutable ellipsotope value.

    Fields
    ------
    p : norm order (> 1, or INF)
    c : center, shape (n,)
    G : generator matrix, shape (n, m)
    A : coefficient constraint matrix, shape (k, m); k may be 0
    b : constraint right-hand side, shape (k,)
    I : IndexSet partitioning 0..m-1 into norm blocks
    """

    p: float
    c: np.ndarray
    G: np.ndarray
    A: np.ndarray = None
    b: np.ndarray = None
    I: IndexSet = None

    def __post_init__(self):
        c = as_vector(self.c, "center")
        G = as_matrix(self.G, "generator matrix")
        m = G.shape[1]
        A = self.A
        b = self.b
        if A is None and b is None:
            A = np.zeros((0, m))
            b = np.zeros(0)
        A = as_matrix(A, "constraint matrix")
        b = as_vector(b, "constraint vector") if np.asarray(b).size else np.zeros(A.shape[0])
        I = self.I
        if I is None:
            I = IndexSet.single(m)
        elif not isinstance(I, IndexSet):
            I = IndexSet(tuple(map(tuple, I)))
        problems = check_invariants(self.p, c, G, A, b, I)
        if problems:
            raise ValueError("invalid ellipsotope: " + "; ".join(problems))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "c", _frozen(c))
        object.__setattr__(self, "G", _frozen(G))
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "I", I)

    # -- structure ---------------------------------------------------------

    @property
    def dim(self):
        return self.c.shape[0]

    @property
    def num_generators(self):
        return self.G.shape[1]

    @property
    def num_constraints(self):
        return self.A.shape[0]

    @property
    def blocks(self):
        return self.I.blocks

    @property
    def is_basic(self):
        return self.num_constraints == 0 and len(self.I) <= 1

    def __repr__(self):
        return (
            f"Ellipsotope(p={self.p}, n={self.dim}, m={self.num_generators}, "
            f"k={self.num_constraints}, blocks={len(self.I)})"
        )

    @classmethod
    def point(cls, x, p=2.0):
        """Zero-generator ellipsotope equal to the single point x."""
        x = as_vector(x, "x")
        return cls(p, x, np.zeros((x.shape[0], 0)))

    def map_coefficients(self, beta):
        """Workspace point c + G @ beta (no feasibility check)."""
        return self.c + self.G @ as_vector(beta, "beta")


def validate(E):
    """Every invariant violation of an ellipsotope value (empty list = valid)."""
    return check_invariants(E.p, E.c, E.G, E.A, E.b, E.I)


# ---------------------------------------------------------------------------
# membership in coefficient space


def ball_product_membership(beta, I, p):
    """Whether beta lies in the ball product of I, plus the max block norm.

    True iff every block satisfies ||beta[J]||_p <= 1 + 1e-12.
    """
    beta = as_vector(beta, "beta")
    if I.size != beta.shape[0]:
        raise ValueError(
            f"beta has {beta.shape[0]} entries but the index set covers {I.size}"
        )
    worst = 0.0
    for blk in I:
        worst = max(worst, pnorm(beta[list(blk)], p))
    return worst <= 1.0 + MEMBERSHIP_TOL, worst


# ---------------------------------------------------------------------------
# constructors from classical representations


def from_zonotope(c, G, p=2.0):
    """Zonotope { c + G beta : ||beta||_inf <= 1 } as an ellipsotope.

    Singleton index blocks make the set a zonotope for any norm order, so the
    caller's p (default 2) is recorded without changing the set.
    """
    G = as_matrix(G, "generator matrix")
    return Ellipsotope(p, c, G, I=IndexSet.singletons(G.shape[1]))


def from_constrained_zonotope(c, G, A, b, p=2.0):
    """Constrained zonotope (linear equalities on box coefficients)."""
    G = as_matrix(G, "generator matrix")
    return Ellipsotope(p, c, G, A, b, IndexSet.singletons(G.shape[1]))


def from_ellipsoid(e):
    """Ellipsoid (c, Q) as the basic 2-ellipsotope with G = sqrt(Q)^(-1)."""
    if not isinstance(e, EllipsoidParams):
        raise TypeError("from_ellipsoid expects EllipsoidParams")
    G = inv_sqrt_pd(e.Q, "Q")
    return Ellipsotope(2.0, e.c, G, I=IndexSet.single(G.shape[1]))


def capsule(q1, q2, r):
    """Capsule: line segment from q1 to q2 swept by a ball of radius r.

    Built as the Minkowski sum of the segment (one generator) and the ball
    (n generators in their own block).
    """
    q1 = as_vector(q1, "q1")
    q2 = as_vector(q2, "q2")
    if q1.shape != q2.shape:
        raise ValueError("capsule endpoints must have the same dimension")
    r = float(r)
    if r <= 0.0:
        raise ValueError(f"capsule radius must be positive, got {r}")
    n = q1.shape[0]
    G = np.column_stack([(q2 - q1) / 2.0, r * np.eye(n)])
    blocks = ((0,), tuple(range(1, n + 1)))
    return Ellipsotope(2.0, (q1 + q2) / 2.0, G, I=IndexSet(blocks))
