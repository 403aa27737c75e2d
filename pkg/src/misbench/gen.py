"""Random graph models: ER, BA, Holme-Kim, Watts-Strogatz and hyperbolic graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .graph import Graph, GraphError, build_graph

MODELS = ("er", "ba", "hk", "ws", "hrg")

# parameter defaults used throughout the benchmark datasets
DEFAULT_PARAMS = {
    "er": {"p": 0.15},
    "ba": {"m": 2},
    "hk": {"m": 2, "p_triangle": 0.05},
    "ws": {"k": 2, "p_rewire": 0.15},
    "hrg": {"alpha": 0.75, "temperature": 0.1, "target_avg_degree": 10.0},
}


@dataclass
class GenSpec:
    model: str
    n: int
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        self.model = self.model.lower()
        if self.model not in MODELS:
            raise GraphError(f"unknown model {self.model!r}; expected one of {MODELS}")
        self.params = {**DEFAULT_PARAMS[self.model], **self.params}
        p = self.params
        for key in ("p", "p_triangle", "p_rewire"):
            if key in p and not 0.0 <= p[key] <= 1.0:
                raise GraphError(f"{key} must lie in [0, 1], got {p[key]}")
        if "m" in p and p["m"] < 1:
            raise GraphError("m must be >= 1")
        if "k" in p and (p["k"] < 2 or p["k"] % 2):
            raise GraphError("k must be even and >= 2")
        if self.model == "hrg":
            _check_hrg(p["alpha"], p["temperature"], p["target_avg_degree"])

    def generate(self) -> Graph:
        fn = {"er": gen_er, "ba": gen_ba, "hk": gen_hk, "ws": gen_ws, "hrg": gen_hrg}[self.model]
        return fn(self.n, **self.params, seed=self.seed)


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def gen_er(n: int, p: float, seed=None) -> Graph:
    """G(n, p): every pair is an edge independently with probability ``p``."""
    if n < 1:
        raise GraphError("n must be >= 1")
    rng = _rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return build_graph(n, np.column_stack([iu[keep], ju[keep]]))


def _pick_preferential(rng, repeated: list[int], exclude: set[int]) -> int:
    # rejection sampling over the degree-weighted multiset
    while True:
        v = repeated[int(rng.integers(len(repeated)))]
        if v not in exclude:
            return v


def _attachment(n: int, m: int, p_triangle: float, seed) -> Graph:
    if m < 1 or n <= m:
        raise GraphError(f"need n > m >= 1, got n={n}, m={m}")
    rng = _rng(seed)
    adj: list[set[int]] = [set() for _ in range(n)]
    repeated: list[int] = []
    edges = []
    for src in range(m, n):
        chosen: set[int] = set()
        if src == m:
            # all existing vertices have degree 0: uniform, and forced since exactly m exist
            targets = list(range(m))
        else:
            targets = []
            last = None
            while len(targets) < m:
                v = None
                if last is not None and p_triangle > 0 and rng.random() < p_triangle:
                    cand = sorted(adj[last] - chosen - {src})
                    if cand:
                        v = cand[int(rng.integers(len(cand)))]
                if v is None:
                    v = _pick_preferential(rng, repeated, chosen)
                chosen.add(v)
                targets.append(v)
                last = v
        for t in targets:
            adj[src].add(t)
            adj[t].add(src)
            edges.append((src, t))
        repeated.extend(targets)
        repeated.extend([src] * m)
    return build_graph(n, edges)


def gen_ba(n: int, m: int, seed=None) -> Graph:
    """Barabasi-Albert preferential attachment from ``m`` isolated seed vertices."""
    return _attachment(n, m, 0.0, seed)


def gen_hk(n: int, m: int, p_triangle: float, seed=None) -> Graph:
    """Holme-Kim: preferential attachment with triad-formation steps."""
    return _attachment(n, m, p_triangle, seed)


def gen_ws(n: int, k: int, p_rewire: float, seed=None) -> Graph:
    """Watts-Strogatz ring lattice with each edge rewired with probability ``p_rewire``."""
    if k < 2 or k % 2:
        raise GraphError("k must be even and >= 2")
    if n <= k:
        raise GraphError(f"need n > k, got n={n}, k={k}")
    rng = _rng(seed)
    adj: list[set[int]] = [set() for _ in range(n)]
    for u in range(n):
        for j in range(1, k // 2 + 1):
            v = (u + j) % n
            adj[u].add(v)
            adj[v].add(u)
    for j in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + j) % n
            if v not in adj[u] or rng.random() >= p_rewire:
                continue
            if len(adj[u]) >= n - 1:
                continue
            while True:
                w = int(rng.integers(n))
                if w != u and w not in adj[u]:
                    break
            adj[u].discard(v)
            adj[v].discard(u)
            adj[u].add(w)
            adj[w].add(u)
    return build_graph(n, [(u, v) for u in range(n) for v in adj[u] if u < v])


def _check_hrg(alpha, temperature, target_avg_degree):
    if not alpha > 0.5:
        raise GraphError("alpha must be > 0.5")
    if not 0.0 <= temperature < 1.0:
        raise GraphError("temperature must lie in [0, 1)")
    if not target_avg_degree > 0:
        raise GraphError("target average degree must be positive")


def _connect_prob(d: np.ndarray, R: float, T: float) -> np.ndarray:
    if T == 0:
        return (d <= R).astype(float)
    z = np.clip((d - R) / (2.0 * T), -700, 700)
    return 1.0 / (1.0 + np.exp(z))


def _radius_from_quantile(u: np.ndarray, alpha: float, R: float) -> np.ndarray:
    # inverse CDF of the radial density alpha sinh(alpha r) / (cosh(alpha R) - 1)
    return np.arccosh(1.0 + (math.cosh(alpha * R) - 1.0) * u) / alpha


def hyperbolic_distance(r1, t1, r2, t2) -> np.ndarray:
    dt = np.pi - np.abs(np.pi - np.abs(np.asarray(t1) - np.asarray(t2)) % (2 * np.pi))
    arg = np.cosh(r1) * np.cosh(r2) - np.sinh(r1) * np.sinh(r2) * np.cos(dt)
    return np.arccosh(np.maximum(arg, 1.0))


_GL_R = np.polynomial.legendre.leggauss(48)
_GL_T = np.polynomial.legendre.leggauss(24)


def expected_degree(n: int, alpha: float, temperature: float, R: float) -> float:
    """(n - 1) times the connection probability of two random points, by quadrature."""
    x, wx = _GL_R
    u = 0.5 * (x + 1.0)
    wu = 0.5 * wx
    r = _radius_from_quantile(u, alpha, R)
    r1, r2 = np.meshgrid(r, r, indexing="ij")
    w12 = np.outer(wu, wu)
    c1c2 = np.cosh(r1) * np.cosh(r2)
    s1s2 = np.maximum(np.sinh(r1) * np.sinh(r2), 1e-300)
    # angle at which the distance equals R splits the angular integral in two smooth panels
    cos_star = np.clip((c1c2 - math.cosh(R)) / s1s2, -1.0, 1.0)
    t_star = np.arccos(cos_star)
    xt, wt = _GL_T
    total = np.zeros_like(r1)
    for lo, hi in ((np.zeros_like(t_star), t_star), (t_star, np.full_like(t_star, np.pi))):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        for xi, wi in zip(xt, wt):
            th = mid + half * xi
            d = np.arccosh(np.maximum(c1c2 - s1s2 * np.cos(th), 1.0))
            total += wi * half * _connect_prob(d, R, temperature)
    mean_p = float((w12 * total).sum() / np.pi)
    return (n - 1) * mean_p


def calibrate_radius(n: int, alpha: float, temperature: float, target_avg_degree: float) -> float:
    """Disk radius whose expected average degree equals the target (to ~1e-6 relative)."""
    if target_avg_degree >= n - 1:
        raise GraphError("target average degree must be below n - 1")

    def f(R):
        return expected_degree(n, alpha, temperature, R) - target_avg_degree

    hi = 2.0 * math.log(max(n, 2)) + 10.0
    while f(hi) > 0:
        hi *= 1.5
    # with T > 0 the degree first rises with R, then decays; bracket on the decaying side
    grid = np.geomspace(1e-3, hi, 40)
    vals = [f(R) for R in grid]
    peak = int(np.argmax(vals))
    if vals[peak] < 0:
        raise GraphError(
            f"average degree {target_avg_degree} is unattainable for n={n}, alpha={alpha}, "
            f"T={temperature} (at most about {vals[peak] + target_avg_degree:.2f})"
        )
    return brentq(f, grid[peak], hi, rtol=1e-9)


def gen_hrg(
    n: int,
    alpha: float,
    temperature: float,
    target_avg_degree: float,
    seed=None,
) -> Graph:
    """Hyperbolic random graph in the native disk model with temperature smoothing."""
    _check_hrg(alpha, temperature, target_avg_degree)
    if n < 2:
        return build_graph(n, [])
    r, theta, R = hrg_layout(n, alpha, temperature, target_avg_degree, seed)
    rng = _rng(seed)
    rng.random(2 * n)  # skip the layout draws
    coin = rng.random(n * (n - 1) // 2)
    edges = []
    pos = 0
    for u in range(n - 1):
        d = hyperbolic_distance(r[u], theta[u], r[u + 1 :], theta[u + 1 :])
        p = _connect_prob(d, R, temperature)
        k = n - 1 - u
        hit = np.flatnonzero(coin[pos : pos + k] < p)
        pos += k
        edges.extend((u, u + 1 + int(j)) for j in hit)
    return build_graph(n, edges)


def hrg_layout(n, alpha, temperature, target_avg_degree, seed=None):
    """Polar coordinates and calibrated disk radius used by :func:`gen_hrg`."""
    R = calibrate_radius(n, alpha, temperature, target_avg_degree)
    rng = _rng(seed)
    r = _radius_from_quantile(rng.random(n), alpha, R)
    theta = rng.random(n) * 2.0 * np.pi
    return r, theta, R


def gen_weights(G: Graph, mu: float = 100.0, sigma: float = 30.0, seed=None) -> Graph:
    """Resample vertex weights from N(mu, sigma), rounded and clipped to at least 1."""
    if mu <= 0 or sigma < 0:
        raise GraphError("need mu > 0 and sigma >= 0")
    rng = _rng(seed)
    return G.with_weights(clip_weights(rng.normal(mu, sigma, G.n)))


def clip_weights(draws) -> np.ndarray:
    return np.maximum(np.rint(np.asarray(draws, dtype=float)), 1).astype(np.int64)
