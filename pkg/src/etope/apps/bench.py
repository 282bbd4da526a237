"""Benchmark drivers: emptiness-check timing and the pair-merge heuristic study.

Both drivers accept a jobs count; trials are keyed by absolute index so the
merged output (verdicts, values, trial order) is identical however the work
is split. Wall-clock numbers are machine-dependent by nature.
"""

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..core import EllipsoidParams, Ellipsotope, IndexSet
from ..reduce import mvoe_pair, pair_volume_heuristic, to_ellipsoid
from ..solve import Verdict, is_empty


# ---------------------------------------------------------------------------
# emptiness benchmark


@dataclass
class EmptinessRow:
    n: int
    m: int
    arm: str  # "nonempty" or "empty"
    correct: int
    trials: int
    mean_s: float
    min_s: float
    max_s: float


def _random_2etope(n, m, rng):
    # generators of length at most 1/m, one unit-normalized constraint row
    G = rng.uniform(-1.0, 1.0, size=(n, m))
    norms = np.linalg.norm(G, axis=0)
    norms[norms == 0.0] = 1.0
    G = G / norms / m
    a = rng.standard_normal(m)
    a /= np.linalg.norm(a)
    return G, a.reshape(1, m)


def _emptiness_for_dim(args):
    n, m_max, trials, seed = args
    rows = []
    for m in range(1, m_max + 1):
        samples = {"nonempty": [], "empty": []}
        correct = {"nonempty": 0, "empty": 0}
        for trial in range(trials):
            rng = np.random.default_rng(
                (seed * 1_000_003 + n * 10_007 + m * 101 + trial) % (2**32)
            )
            G, A = _random_2etope(n, m, rng)
            for arm, b in (
                ("nonempty", np.zeros(1)),
                ("empty", np.full(1, 2.0 * m)),
            ):
                E = Ellipsotope(2.0, np.zeros(n), G, A, b, IndexSet.single(m))
                t0 = time.perf_counter()
                empty, result = is_empty(E)
                dt = time.perf_counter() - t0
                samples[arm].append(dt)
                expected = arm == "empty"
                if empty == expected and result.verdict != Verdict.INCONCLUSIVE:
                    correct[arm] += 1
        for arm in ("nonempty", "empty"):
            ts = samples[arm]
            rows.append(
                EmptinessRow(
                    n=n,
                    m=m,
                    arm=arm,
                    correct=correct[arm],
                    trials=trials,
                    mean_s=float(np.mean(ts)),
                    min_s=float(np.min(ts)),
                    max_s=float(np.max(ts)),
                )
            )
    return rows


def emptiness_bench(dims=(2, 8, 14), m_max=20, trials=10, seed=0, jobs=1):
    """Timing/correctness table for the emptiness check.

    For every (n, m) builds random 2-ellipsotopes with one unit-norm
    constraint row, then solves both arms: b = 0 (feasible by construction)
    and b = 2m (infeasible: the ball product caps the row response at 1).
    Returns a list of EmptinessRow in (n, m, arm) order.
    """
    tasks = [(n, m_max, trials, seed) for n in dims]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_emptiness_for_dim, tasks))
    else:
        chunks = [_emptiness_for_dim(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def emptiness_rows_to_csv(rows):
    lines = ["n,m,arm,correct,trials,mean_s,min_s,max_s"]
    for r in rows:
        lines.append(
            f"{r.n},{r.m},{r.arm},{r.correct},{r.trials},"
            f"{r.mean_s:.9f},{r.min_s:.9f},{r.max_s:.9f}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# reduction-heuristic study


@dataclass
class HeuristicStudy:
    n: int
    trials: int
    r_squared: float | None
    tie: bool
    heuristic_mean_s: float
    mvoe_mean_s: float
    heuristic_values: list[float]
    mvoe_volumes: list[float]

    def to_csv(self):
        lines = ["heuristic_value,mvoe_volume"]
        for h, v in zip(self.heuristic_values, self.mvoe_volumes):
            lines.append(f"{h:.12g},{v:.12g}")
        return "\n".join(lines) + "\n"


def random_component_shapes(n, count, rng):
    """Shape matrices of random component ellipsoids via their generators.

    Generator entries are uniform in [-1/sqrt(n), 1/sqrt(n)]; near-singular
    draws are rejected so every component has a well-defined shape matrix.
    """
    shapes = []
    bound = 1.0 / math.sqrt(n)
    while len(shapes) < count:
        G = rng.uniform(-bound, bound, size=(n, n))
        s = np.linalg.svd(G, compute_uv=False)
        if s[-1] <= 1e-6 * s[0]:
            continue
        E = Ellipsotope(2.0, np.zeros(n), G)
        shapes.append(to_ellipsoid(E))
    return shapes


def _heuristic_for_trials(args):
    n, trial_lo, trial_hi, components, seed = args
    h_vals, v_vals, h_times, v_times = [], [], [], []
    for trial in range(trial_lo, trial_hi):
        rng = np.random.default_rng((seed * 9_176_941 + trial) % (2**32))
        shapes = random_component_shapes(n, components, rng)
        for i in range(len(shapes)):
            for j in range(i + 1, len(shapes)):
                t0 = time.perf_counter()
                h = pair_volume_heuristic(shapes[i].Q, shapes[j].Q)
                h_times.append(time.perf_counter() - t0)
                t0 = time.perf_counter()
                res = mvoe_pair(shapes[i], shapes[j])
                vol = EllipsoidParams(np.zeros(n), res.Q_sum).volume_measure()
                v_times.append(time.perf_counter() - t0)
                h_vals.append(h)
                v_vals.append(vol)
    return h_vals, v_vals, h_times, v_times


def reduction_heuristic_bench(n, trials=50, components=6, seed=0, jobs=1):
    """Correlate the pair-merge heuristic with true enclosing-ellipsoid volume.

    Each trial builds a Minkowski sum of random component ellipsoids; for
    every pair the true merged volume (det(Q)^(-1/2) at the fixed point) and
    the heuristic volume proxy are computed and timed. Returns a
    HeuristicStudy with the Pearson r^2 (None when all values tie).
    """
    if n < 2:
        raise ValueError("dimension must be at least 2")
    if jobs > 1 and trials > 1:
        edges = np.linspace(0, trials, min(jobs, trials) + 1).astype(int)
        tasks = [
            (n, int(lo), int(hi), components, seed)
            for lo, hi in zip(edges[:-1], edges[1:])
            if hi > lo
        ]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outs = list(pool.map(_heuristic_for_trials, tasks))
    else:
        outs = [_heuristic_for_trials((n, 0, trials, components, seed))]
    h_vals = [x for o in outs for x in o[0]]
    v_vals = [x for o in outs for x in o[1]]
    h_times = [x for o in outs for x in o[2]]
    v_times = [x for o in outs for x in o[3]]

    h_arr = np.array(h_vals)
    v_arr = np.array(v_vals)
    tie = (
        float(np.std(h_arr)) <= 1e-15 * max(1.0, float(np.mean(np.abs(h_arr))))
        or float(np.std(v_arr)) <= 1e-15 * max(1.0, float(np.mean(np.abs(v_arr))))
    )
    r2 = None if tie else float(np.corrcoef(h_arr, v_arr)[0, 1] ** 2)
    return HeuristicStudy(
        n=n,
        trials=trials,
        r_squared=r2,
        tie=tie,
        heuristic_mean_s=float(np.mean(h_times)),
        mvoe_mean_s=float(np.mean(v_times)),
        heuristic_values=h_vals,
        mvoe_volumes=v_vals,
    )
