"""Robot path verification with ellipsotope reachable tubes.

A Dubins car tracks a nominal trajectory under Gaussian process and
measurement noise (beacon ranges plus heading). Position/heading covariance
is propagated by a linearized filter recursion along the nominal states; at
each step the reachable set is the heading-swept body enclosure Minkowski-
summed with the position confidence ellipse, and each obstacle is collision-
checked by intersection emptiness.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..core import Ellipsotope, Halfspace, IndexSet, sqrt_psd
from ..io import etope_from_dict, etope_to_dict
from ..ops import intersect, intersect_halfspace, minkowski_sum
from ..solve import Verdict, is_empty
from ..viz import polygon_area, sample_boundary_ray


@dataclass(frozen=True)
class RobotScenario:
    """Geometry, trajectory, noise, and obstacles for one verification run.

    segments is a list of (speed, yaw_rate, steps) triples executed in order;
    range measurements switch from range_var_near to range_var_far once the
    nominal x1 crosses far_x1.
    """

    width: float = 1.0
    length: float = 2.0
    dt: float = 0.1
    x0: tuple = (0.0, 0.0, 0.0)
    segments: tuple = ((3.0, 0.0, 50), (3.0, 0.2, 40), (3.0, -0.2, 37))
    Sigma0: np.ndarray = field(default_factory=lambda: np.diag([0.01, 0.01, 0.001]))
    Q_proc: np.ndarray = field(
        default_factory=lambda: np.diag([0.002, 0.002, 0.0005])
    )
    beacons: np.ndarray = field(
        default_factory=lambda: np.array(
            [[0.0, -5.0], [40.0, -5.0], [0.0, 12.0], [40.0, 12.0]]
        )
    )
    range_var_near: float = 0.4
    range_var_far: float = 10.0
    far_x1: float = 30.0
    heading_var: float = 0.01
    alpha: float = 0.95
    obstacles: tuple = ()
    boundary_samples: int = 16
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("confidence alpha must lie in (0, 1)")
        if self.width <= 0 or self.length <= 0:
            raise ValueError("body dimensions must be positive")
        object.__setattr__(self, "Sigma0", np.asarray(self.Sigma0, dtype=float))
        object.__setattr__(self, "Q_proc", np.asarray(self.Q_proc, dtype=float))
        object.__setattr__(self, "beacons", np.asarray(self.beacons, dtype=float))

    @property
    def steps(self):
        return sum(s for _, _, s in self.segments)

    def nominal_trajectory(self):
        """Nominal states (steps+1, 3) under the piecewise-constant inputs."""
        x = np.array(self.x0, dtype=float)
        out = [x.copy()]
        for v, om, count in self.segments:
            for _ in range(count):
                x = x + self.dt * np.array(
                    [v * math.cos(x[2]), v * math.sin(x[2]), om]
                )
                out.append(x.copy())
        return np.array(out)

    @classmethod
    def default(cls, **overrides):
        """127-step S-curve with one obstacle planted on the path and one
        offset 10 m to the side."""
        base = cls(**{k: v for k, v in overrides.items() if k != "obstacles"})
        if "obstacles" in overrides:
            return cls(**overrides)
        traj = base.nominal_trajectory()
        hit = traj[(len(traj) - 1) * 3 // 5]
        lateral = np.array([-math.sin(hit[2]), math.cos(hit[2])])
        on_path = Ellipsotope(
            2.0, hit[:2], 0.5 * np.eye(2), I=IndexSet.singletons(2)
        )
        offset = Ellipsotope(
            2.0, hit[:2] + 10.0 * lateral, 0.5 * np.eye(2), I=IndexSet.singletons(2)
        )
        return cls(**{**overrides, "obstacles": (on_path, offset)})

    @classmethod
    def from_config(cls, cfg):
        known = {
            "width", "length", "dt", "x0", "segments", "Sigma0", "Q_proc",
            "beacons", "range_var_near", "range_var_far", "far_x1",
            "heading_var", "alpha", "obstacles", "boundary_samples", "seed",
        }
        unknown = set(cfg) - known
        if unknown:
            raise ValueError(f"unknown path config keys {sorted(unknown)}")
        kwargs = dict(cfg)
        if "x0" in kwargs:
            kwargs["x0"] = tuple(float(v) for v in kwargs["x0"])
        if "segments" in kwargs:
            kwargs["segments"] = tuple(
                (float(v), float(om), int(k)) for v, om, k in kwargs["segments"]
            )
        for key in ("Sigma0", "Q_proc", "beacons"):
            if key in kwargs:
                kwargs[key] = np.asarray(kwargs[key], dtype=float)
        if "obstacles" in kwargs:
            kwargs["obstacles"] = tuple(
                etope_from_dict(d, path=f"/obstacles/{i}")
                for i, d in enumerate(kwargs["obstacles"])
            )
            return cls(**kwargs)
        return cls.default(**kwargs)


# ---------------------------------------------------------------------------
# body sweep construction


def swept_body(width, length, heading, delta, p=2.0):
    """Ellipsotope enclosing the body rectangle swept over heading +- delta.

    Intersects the circumscribing circle with four halfspaces whose normals
    are the nominal body axes and whose offsets are the support of the
    extreme-angle rectangles. Beyond the angle where a corner crosses an axis
    (min of atan(w/l) and atan(l/w)) the tangency construction degrades, so
    the plain circumscribing circle is returned instead.
    """
    radius = 0.5 * math.hypot(width, length)
    circle = Ellipsotope(p, np.zeros(2), radius * np.eye(2))
    limit = min(math.atan2(width, length), math.atan2(length, width))
    if delta > limit:
        return circle
    u = np.array([math.cos(heading), math.sin(heading)])
    nvec = np.array([-math.sin(heading), math.cos(heading)])
    s_u = 0.5 * length * math.cos(delta) + 0.5 * width * math.sin(delta)
    s_n = 0.5 * width * math.cos(delta) + 0.5 * length * math.sin(delta)
    out = circle
    for h, s in ((u, s_u), (-u, s_u), (nvec, s_n), (-nvec, s_n)):
        out = intersect_halfspace(out, Halfspace(h, s))
    return out


# ---------------------------------------------------------------------------
# covariance recursion


def _dynamics_jacobian(x, v, dt):
    return np.array(
        [
            [1.0, 0.0, -v * math.sin(x[2]) * dt],
            [0.0, 1.0, v * math.cos(x[2]) * dt],
            [0.0, 0.0, 1.0],
        ]
    )


def _measurement_jacobian(x, beacons):
    rows = []
    for bx in beacons:
        d = x[:2] - bx
        r = float(np.linalg.norm(d))
        rows.append([d[0] / r, d[1] / r, 0.0])
    rows.append([0.0, 0.0, 1.0])
    return np.array(rows)


def _propagate_covariance(scenario, x, v, Sigma, t):
    At = _dynamics_jacobian(x, v, scenario.dt)
    Sigma_pred = At @ Sigma @ At.T + scenario.Q_proc
    Ct = _measurement_jacobian(x, scenario.beacons)
    rv = (
        scenario.range_var_near
        if x[0] < scenario.far_x1
        else scenario.range_var_far
    )
    R = np.diag([rv] * len(scenario.beacons) + [scenario.heading_var])
    S = Ct @ Sigma_pred @ Ct.T + R
    K = Sigma_pred @ Ct.T @ np.linalg.inv(S)
    Sigma_new = (np.eye(3) - K @ Ct) @ Sigma_pred
    Sigma_new = 0.5 * (Sigma_new + Sigma_new.T)
    w = np.linalg.eigvalsh(Sigma_new)
    if w[0] < -1e-10:
        raise RuntimeError(
            f"covariance lost positive semidefiniteness at step {t} (eigenvalue {w[0]})"
        )
    # position and heading are treated as decoupled: zero the cross blocks
    Sigma_new[2, :2] = 0.0
    Sigma_new[:2, 2] = 0.0
    return Sigma_new


# ---------------------------------------------------------------------------
# the verification run


@dataclass
class StepRecord:
    t: int
    reach: Ellipsotope
    collisions: list[bool]
    area: float
    solve_s: float


@dataclass
class TubeReport:
    steps: list[StepRecord]
    obstacles: tuple
    total_s: float
    inconclusive: list[tuple[int, int]]

    def to_dict(self):
        return {
            "steps": [
                {
                    "t": s.t,
                    "reach": etope_to_dict(s.reach),
                    "collisions": list(s.collisions),
                    "area": s.area,
                    "solve_s": s.solve_s,
                }
                for s in self.steps
            ],
            "obstacles": [etope_to_dict(o) for o in self.obstacles],
            "total_s": self.total_s,
            "inconclusive": [list(x) for x in self.inconclusive],
        }

    @classmethod
    def from_dict(cls, d):
        steps = [
            StepRecord(
                t=int(s["t"]),
                reach=etope_from_dict(s["reach"], path=f"/steps/{i}/reach"),
                collisions=[bool(v) for v in s["collisions"]],
                area=float(s["area"]),
                solve_s=float(s["solve_s"]),
            )
            for i, s in enumerate(d["steps"])
        ]
        obstacles = tuple(
            etope_from_dict(o, path=f"/obstacles/{i}")
            for i, o in enumerate(d["obstacles"])
        )
        return cls(
            steps=steps,
            obstacles=obstacles,
            total_s=float(d["total_s"]),
            inconclusive=[tuple(x) for x in d.get("inconclusive", [])],
        )


def path_verification_sim(scenario):
    """Run the path-verification demo; returns a TubeReport.

    Per timestep: propagate the covariance along the nominal trajectory,
    build the position confidence ellipse and the heading-swept body, sum
    them into the reachable set, collision-check every obstacle, and record
    the sampled polygon area of the 2-D reachable set.
    """
    t_start = time.perf_counter()
    eps = -2.0 * math.log(1.0 - scenario.alpha)
    traj = scenario.nominal_trajectory()
    speeds = [v for v, _, count in scenario.segments for _ in range(count)]
    Sigma = scenario.Sigma0.copy()

    steps = []
    inconclusive = []
    for t in range(1, len(traj)):
        Sigma = _propagate_covariance(scenario, traj[t - 1], speeds[t - 1], Sigma, t)
        x_nom = traj[t]
        Sigma_p = Sigma[:2, :2]
        sigma_th = float(Sigma[2, 2])

        unc = Ellipsotope(2.0, x_nom[:2], sqrt_psd(eps * Sigma_p))
        delta = math.sqrt(max(eps * sigma_th, 0.0))
        body = swept_body(scenario.width, scenario.length, x_nom[2], delta)
        reach = minkowski_sum(body, unc)

        t0 = time.perf_counter()
        collisions = []
        for oi, obs in enumerate(scenario.obstacles):
            empty, result = is_empty(intersect(reach, obs))
            if result.verdict == Verdict.INCONCLUSIVE:
                inconclusive.append((t, oi))
            collisions.append(not empty)
        solve_s = time.perf_counter() - t0

        sample = sample_boundary_ray(reach, scenario.boundary_samples, seed=scenario.seed)
        area = polygon_area(sample.points, sample.hull_order)
        steps.append(StepRecord(t=t, reach=reach, collisions=collisions,
                                area=area, solve_s=solve_s))
    return TubeReport(
        steps=steps,
        obstacles=tuple(scenario.obstacles),
        total_s=time.perf_counter() - t_start,
        inconclusive=inconclusive,
    )
