"""Sup-metric clustering of periodic orbits, orbit counting near indifferent
points, disc-pattern counting, and distortion measurement.

The orbit-to-orbit distance takes the max of pointwise distances along one
period, minimized over cyclic alignment of base points.  Bunches require
*pairwise* closeness, so clusters come from complete-linkage agglomeration
(a certified lower bound for the largest bunch) cut at the threshold, with
the connected-component count reported as the matching upper bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.sparse.csgraph import connected_components
from scipy.stats import qmc

from .dynamics import DEFAULT_CONFIG, PrecisionConfig, QuadraticMap, orbit_with_derivative
from .errors import EscapeError, QuadrayError
from .orbits import PeriodicOrbit, julia_orbits

MODE_H = "H"
MODE_BMS = "BMS"

DISTORTION_SAMPLE_PAIRS = 2048


@dataclass(frozen=True)
class BunchReport:
    n: int
    mode: str
    threshold: float
    clusters: tuple[tuple[int, ...], ...]
    max_cluster: int
    bound: float            # exp(delta * n) in H mode, 2n in BMS mode
    hard_bound: int         # the 2n bound, always
    passed: bool
    component_max: int = 0  # connectivity upper bound on the largest bunch

    def to_dict(self) -> dict:
        return {"n": self.n, "mode": self.mode, "threshold": self.threshold,
                "clusters": [list(c) for c in self.clusters],
                "max_cluster": self.max_cluster, "bound": self.bound,
                "pass": self.passed}


@dataclass(frozen=True)
class DiscPattern:
    """p discs repeated n times around a cycle; C-scaled copies must be
    pairwise disjoint."""

    centers: tuple[complex, ...]
    radii: tuple[float, ...]
    p: int
    n: int
    C: float

    def __post_init__(self):
        if len(self.centers) != self.p or len(self.radii) != self.p:
            raise ValueError("need exactly p centers and radii")
        if any(r <= 0 for r in self.radii):
            raise ValueError("radii must be positive")
        for i in range(self.p):
            for j in range(i + 1, self.p):
                if abs(self.centers[i] - self.centers[j]) <= self.C * (self.radii[i] + self.radii[j]):
                    raise QuadrayError(
                        f"C-scaled discs {i} and {j} are not disjoint")

    def separation_ok(self, qmap: QuadraticMap, r0: float, delta: float) -> bool:
        """diam B_i <= r0 exp(-delta n p) dist(C B_i, critical point)."""
        bound = r0 * math.exp(-delta * self.n * self.p)
        for ctr, rad in zip(self.centers, self.radii):
            dist_crit = abs(ctr) - self.C * rad
            if dist_crit <= 0 or 2.0 * rad > bound * dist_crit:
                return False
        return True

    @classmethod
    def around_orbit(cls, qmap: QuadraticMap, orbit: PeriodicOrbit, n: int,
                     delta: float, r0: float, C: float = 2.0) -> "DiscPattern":
        """Largest admissible pattern around a cycle: radii saturate the
        separation inequality with a 10% margin."""
        p = orbit.minimal_period
        bound = r0 * math.exp(-delta * n * p)
        radii = []
        for ctr in orbit.points:
            d_crit = abs(ctr)
            if d_crit == 0:
                raise QuadrayError("pattern center at the critical point")
            radii.append(0.9 * bound * d_crit / (2.0 + C * bound))
        return cls(centers=tuple(orbit.points), radii=tuple(radii), p=p, n=n, C=C)


@dataclass(frozen=True)
class PatternCountReport:
    count: int
    bound: int
    passed: bool


@dataclass(frozen=True)
class DistortionReport:
    center: complex
    r: float
    n: int
    sup_ratio_minus_one: float
    per_step_log_derivative_bound: float


def orbit_metric(qmap: QuadraticMap, x: complex, y: complex, n: int) -> float:
    """max over i < n of |f^i(x) - f^i(y)| (Euclidean stand-in for the
    spherical metric; bi-Lipschitz equivalent on the bounded dynamical region)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    radius = max(qmap.escape_radius, 1e8)
    x, y = complex(x), complex(y)
    best = 0.0
    for _ in range(n):
        best = max(best, abs(x - y))
        x = x * x + qmap.c
        y = y * y + qmap.c
        if abs(x) > radius or abs(y) > radius:
            raise EscapeError("an orbit escaped inside the metric window")
    return best


def _orbit_distance_matrix(orbits: list[PeriodicOrbit], n: int) -> np.ndarray:
    """Pairwise rho_n between orbits, minimized over cyclic base alignment."""
    K = len(orbits)
    A = np.array([o.points for o in orbits], dtype=complex)  # (K, n)
    D = np.full((K, K), np.inf)
    for rot in range(n):
        rolled = np.roll(A, -rot, axis=1)
        cur = np.zeros((K, K))
        for i in range(n):
            cur = np.maximum(cur, np.abs(rolled[:, None, i] - A[None, :, i]))
        D = np.minimum(D, cur)
    D = np.minimum(D, D.T)
    np.fill_diagonal(D, 0.0)
    return D


def bunch_clusters(qmap: QuadraticMap, orbits: list[PeriodicOrbit], mode: str,
                   param: float, cfg: PrecisionConfig = DEFAULT_CONFIG) -> BunchReport:
    """Cluster same-period orbits under rho_n.

    mode "H": param is delta, threshold exp(-delta n), bound exp(delta n).
    mode "BMS": param is the radius r itself.
    Every emitted cluster is re-certified pairwise; a violation means the
    clustering step is buggy and raises.
    """
    if mode not in (MODE_H, MODE_BMS):
        raise ValueError("mode must be 'H' or 'BMS'")
    if not orbits:
        return BunchReport(n=0, mode=mode, threshold=0.0, clusters=(),
                           max_cluster=0, bound=0.0, hard_bound=0, passed=True)
    n = orbits[0].minimal_period
    if any(o.minimal_period != n for o in orbits):
        raise QuadrayError("all orbits must share one minimal period")
    threshold = math.exp(-param * n) if mode == MODE_H else float(param)
    bound = math.exp(param * n) if mode == MODE_H else float(2 * n)

    K = len(orbits)
    if K == 1:
        clusters = ((0,),)
        comp_max = 1
    else:
        D = _orbit_distance_matrix(orbits, n)
        cut = np.nextafter(threshold, 0.0)  # strict rho_n < threshold
        condensed = D[np.triu_indices(K, 1)]
        labels = fcluster(linkage(condensed, method="complete"), t=cut,
                          criterion="distance")
        groups: dict[int, list[int]] = {}
        for i, lab in enumerate(labels):
            groups.setdefault(int(lab), []).append(i)
        clusters = tuple(tuple(sorted(g)) for g in
                         sorted(groups.values(), key=lambda g: (-len(g), g)))
        for cluster in clusters:
            for a in range(len(cluster)):
                for b in range(a + 1, len(cluster)):
                    if not D[cluster[a], cluster[b]] < threshold:
                        raise QuadrayError(
                            "internal error: emitted cluster fails the pairwise certificate")
        _, comp_labels = connected_components(D < threshold, directed=False)
        comp_max = int(np.bincount(comp_labels).max())

    max_cluster = max(len(c) for c in clusters)
    return BunchReport(n=n, mode=mode, threshold=threshold, clusters=clusters,
                       max_cluster=max_cluster, bound=bound, hard_bound=2 * n,
                       passed=max_cluster <= min(bound, 2 * n),
                       component_max=comp_max)


def verify_hypothesis_h(qmap: QuadraticMap, n: int, delta: float,
                        cfg: PrecisionConfig = DEFAULT_CONFIG,
                        orbits: list[PeriodicOrbit] | None = None) -> BunchReport:
    """Enumerate the minimal-period-n orbits on the Julia set and check that
    the largest certified bunch stays within min(exp(delta n), 2n).

    Pre-enumerated orbits may be passed to amortize scans over delta.
    """
    if orbits is None:
        orbits = julia_orbits(qmap, n, cfg, minimal_only=True)
    report = bunch_clusters(qmap, orbits, MODE_H, delta, cfg)
    if not orbits:
        return BunchReport(n=n, mode=MODE_H, threshold=math.exp(-delta * n),
                           clusters=(), max_cluster=0,
                           bound=math.exp(delta * n), hard_bound=2 * n,
                           passed=True)
    return report


def count_orbits_near_point(qmap: QuadraticMap, z0: complex, p: int, n: int,
                            delta: float, r0: float,
                            cfg: PrecisionConfig = DEFAULT_CONFIG,
                            orbits: list[PeriodicOrbit] | None = None) -> int:
    """Number of minimal-period-(n p) orbits, other than the base orbit,
    entirely inside the union of discs B(f^i(z0), r_n |(f^i)'(z0)|) with
    r_n = r0 exp(-delta n p).

    z0 must be periodic of minimal period p at working tolerance.
    """
    z0 = complex(z0)
    w, _ = orbit_with_derivative(qmap, np.array([z0]), p)
    if abs(w[0] - z0) > 1e-6 * max(1.0, abs(z0)):
        raise QuadrayError(f"z0 = {z0} is not periodic of period {p} within tolerance")
    for d in range(1, p):
        if p % d == 0:
            wd, _ = orbit_with_derivative(qmap, np.array([z0]), d)
            if abs(wd[0] - z0) <= 1e-6 * max(1.0, abs(z0)):
                raise QuadrayError(f"z0 has minimal period {d}, not {p}")

    r_n = r0 * math.exp(-delta * n * p)
    centers = []
    radii = []
    z = z0
    deriv = 1.0 + 0.0j
    for _ in range(p):
        centers.append(z)
        radii.append(r_n * abs(deriv))
        deriv *= 2.0 * z
        z = z * z + qmap.c
    centers_arr = np.array(centers)
    radii_arr = np.array(radii)

    level = n * p
    if orbits is None:
        orbits = julia_orbits(qmap, level, cfg, minimal_only=True)

    count = 0
    for orbit in orbits:
        pts = np.array(orbit.points)
        # The base orbit can only appear in the census when level == p.
        if level == p and np.min(np.abs(pts[:, None] - centers_arr[None, :])) < 1e-7:
            continue
        inside = np.abs(pts[:, None] - centers_arr[None, :]) < radii_arr[None, :]
        if bool(inside.any(axis=1).all()):
            count += 1
    return count


def count_orbits_in_disc_pattern(qmap: QuadraticMap, pattern: DiscPattern,
                                 cfg: PrecisionConfig = DEFAULT_CONFIG,
                                 orbits: list[PeriodicOrbit] | None = None) -> PatternCountReport:
    """Points x in B_0 of minimal period n*p whose orbit follows the pattern:
    f^(kp+i)(x) in B_i for all k < n, i < p.  At most p such points exist."""
    p, n = pattern.p, pattern.n
    level = n * p
    if orbits is None:
        orbits = julia_orbits(qmap, level, cfg, minimal_only=True)
    centers = np.array(pattern.centers)
    radii = np.array(pattern.radii)
    count = 0
    for orbit in orbits:
        for start in range(level):
            x = orbit.points[start]
            if abs(x - centers[0]) >= radii[0]:
                continue
            ok = True
            for j in range(level):
                b = centers[j % p], radii[j % p]
                if abs(orbit.points[(start + j) % level] - b[0]) >= b[1]:
                    ok = False
                    break
            if ok:
                count += 1
    return PatternCountReport(count=count, bound=p, passed=count <= p)


def _low_discrepancy_disc(center: complex, r: float, count: int, seed: int) -> np.ndarray:
    """Deterministic low-discrepancy points in a disc (Halton in polar form)."""
    sampler = qmc.Halton(d=2, scramble=True, seed=seed)
    uv = sampler.random(count)
    return center + r * np.sqrt(uv[:, 0]) * np.exp(2j * np.pi * uv[:, 1])


def distortion_ratio(qmap: QuadraticMap, center: complex, r: float, n: int,
                     samples: int = DISTORTION_SAMPLE_PAIRS, period: int = 1,
                     seed: int = 0) -> DistortionReport:
    """Measure sup |(g^i)'(x) / (g^i)'(y) - 1| over sampled pairs in
    B(center, r), i <= n, for g = f^period.

    Also reports the sampled sup of |log |g'(x)|| over the initial disc (the
    per-step bound L r that controls the one-step expansion)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if samples < 1:
        raise ValueError("need at least one sample pair")
    pts = _low_discrepancy_disc(complex(center), r, 2 * samples, seed)
    x = pts[:samples].copy()
    y = pts[samples:].copy()
    _, gp = orbit_with_derivative(qmap, pts, period)
    with np.errstate(divide="ignore"):
        per_step = float(np.max(np.abs(np.log(np.abs(gp)))))
    dx = np.ones_like(x)
    dy = np.ones_like(y)
    sup = 0.0
    radius = max(qmap.escape_radius, 1e8)
    for _ in range(n):
        for _ in range(period):
            dx = dx * 2.0 * x
            x = x * x + qmap.c
            dy = dy * 2.0 * y
            y = y * y + qmap.c
        if np.any(np.abs(x) > radius) or np.any(np.abs(y) > radius):
            raise EscapeError("a sampled orbit escaped inside the distortion window")
        sup = max(sup, float(np.max(np.abs(dx / dy - 1.0))))
    return DistortionReport(center=complex(center), r=float(r), n=n,
                            sup_ratio_minus_one=sup,
                            per_step_log_derivative_bound=per_step)


def good_bad_partition(qmap: QuadraticMap, orbit: PeriodicOrbit,
                       delta: float) -> dict:
    """Indices along the cycle split by distance to the critical point 0:
    good when |f^i(x)| >= exp(-n delta / 2), bad otherwise."""
    n = orbit.minimal_period
    cutoff = math.exp(-n * delta / 2.0)
    good, bad = [], []
    for i, z in enumerate(orbit.points):
        (good if abs(z) >= cutoff else bad).append(i)
    return {"good": good, "bad": bad, "a_bound": len(bad)}
