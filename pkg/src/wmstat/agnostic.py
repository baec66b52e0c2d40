"""Model-agnostic watermarking: fixed region law, minimax Type II loss.

When the detector must fix the rejection-region law without seeing the model,
the minimax-optimal choice is uniform over the fixed-size subsets whose size
matches the Type I budget.  Its worst-case excess Type II error over the
per-model optimum has an exact binomial-ratio form; this module computes that
value in exact rationals, samples and couples the region law constructively
via max-flow (certifying the bound instance by instance), and checks the
underlying marginal-domination condition by brute force.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dist import DiscreteDist, binom_exact
from .flow import FlowNetwork
from .ump import Region

MAX_ENUM_SUBSETS = 100_000
MAX_BRUTE_OUTCOMES = 20


@dataclass(frozen=True)
class UniformRegionLaw:
    """Uniform law over the size-``region_size`` subsets of n outcomes.

    Requires the integrality the minimax result is stated under: the region
    size is the Type I budget times n, and its reciprocal level divides n.
    """

    n: int
    region_size: int

    def __post_init__(self):
        if not 1 <= self.region_size <= self.n:
            raise ValueError(f"region size {self.region_size} outside 1..{self.n}")
        if self.n % self.region_size != 0:
            raise ValueError(
                f"1/alpha = {self.n}/{self.region_size} must be an integer"
            )

    @property
    def alpha(self) -> Fraction:
        return Fraction(self.region_size, self.n)

    @property
    def n_subsets(self) -> int:
        return math.comb(self.n, self.region_size)

    def hit_probability(self, u_size: int) -> Fraction:
        """P(a sampled region intersects a fixed set of ``u_size`` outcomes)."""
        if not 0 <= u_size <= self.n:
            raise ValueError(f"set size {u_size} outside 0..{self.n}")
        return 1 - binom_exact(self.n - u_size, self.region_size) / binom_exact(
            self.n, self.region_size
        )


@dataclass(frozen=True)
class AgnosticCoupling:
    """Joint law of (outcome, region index) over enumerated subsets."""

    flows: tuple[tuple[int, int, float], ...]
    subsets: tuple[Region, ...]

    def outcome_marginal(self, n: int) -> list:
        mass = [0.0] * n
        for x, _, m in self.flows:
            mass[x] = mass[x] + m
        return mass

    def subset_marginal(self) -> list:
        mass = [0.0] * len(self.subsets)
        for _, a, m in self.flows:
            mass[a] = mass[a] + m
        return mass


def integrality_check(n: int, alpha: Fraction) -> int:
    """Validate alpha*n and 1/alpha are integers; returns m = alpha*n."""
    alpha = Fraction(alpha)
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    m = alpha * n
    inv = 1 / alpha
    if m.denominator != 1 or inv.denominator != 1:
        raise ValueError(f"need alpha*n and 1/alpha integral, got alpha={alpha}, n={n}")
    if n < inv:
        raise ValueError(f"need n >= 1/alpha, got n={n}, 1/alpha={inv}")
    return int(m)


def max_type2_loss(n: int, alpha: Fraction) -> Fraction:
    """Worst-case Type II excess of the uniform fixed-size region law."""
    m = integrality_check(n, alpha)
    inv = int(1 / Fraction(alpha))
    return binom_exact(n - inv, m) / binom_exact(n, m)


def max_type2_loss_telescoping(n: int, alpha: Fraction) -> Fraction:
    """Same value as a telescoping product, for exact cross-checking."""
    m = integrality_check(n, alpha)
    inv = int(1 / Fraction(alpha))
    out = Fraction(1)
    for i in range(inv):
        out *= Fraction(n - m - i, n - i)
        if out == 0:
            break
    return out


def loss_limit_gap(alpha: Fraction, n: int) -> float:
    """Distance of the exact worst-case loss from its small-alpha limit 1/e."""
    return abs(float(max_type2_loss(n, alpha)) - math.exp(-1.0))


def sample_region(law: UniformRegionLaw, rng: np.random.Generator) -> Region:
    """Uniformly random size-m subset via a partial Fisher-Yates shuffle."""
    pool = list(range(law.n))
    m = law.region_size
    for i in range(m):
        j = i + int(rng.integers(law.n - i))
        pool[i], pool[j] = pool[j], pool[i]
    return Region.of(pool[:m])


def pad_to_integral(n: int, alpha: Fraction) -> tuple[UniformRegionLaw, Fraction]:
    """Augment with dummy outcomes until the integrality hypothesis holds.

    Rounds the level down to 1/ceil(1/alpha) and pads the outcome count so
    both integrality conditions hold; an approximation of the original
    (n, alpha) problem, not an exact reduction.
    """
    alpha = Fraction(alpha)
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    inv = math.ceil(1 / alpha)
    alpha1 = Fraction(1, inv)
    n1 = math.ceil(alpha1 * n) * inv
    return UniformRegionLaw(n=n1, region_size=n1 // inv), alpha1


def build_agnostic_coupling(
    rho: DiscreteDist, law: UniformRegionLaw
) -> tuple[AgnosticCoupling, float]:
    """Couple ``rho`` with the uniform region law; returns (coupling, loss).

    Solves the transportation problem source -> outcomes -> covering subsets
    -> sink by max-flow, then completes the leftover mass (necessarily on
    non-covering pairs at a maximum flow) so both marginals are met exactly.
    ``loss`` is the probability the outcome falls outside its region.
    """
    if rho.k != law.n:
        raise ValueError(f"distribution has {rho.k} outcomes, law expects {law.n}")
    n_subsets = law.n_subsets
    if n_subsets > MAX_ENUM_SUBSETS:
        raise ValueError(f"{n_subsets} subsets exceed enumeration cap {MAX_ENUM_SUBSETS}")
    exact = rho.is_exact
    probs = list(rho.probs) if exact else list(rho.as_floats())
    subset_quota = Fraction(1, n_subsets) if exact else 1.0 / n_subsets
    big = Fraction(2) if exact else 2.0

    subsets = [Region.of(c) for c in itertools.combinations(range(law.n), law.region_size)]
    source, sink = 0, 1
    node_x = lambda x: 2 + x
    node_a = lambda a: 2 + law.n + a
    net = FlowNetwork(n_nodes=2 + law.n + n_subsets)
    source_edges = [net.add_edge(source, node_x(x), probs[x]) for x in range(law.n)]
    pair_edges: dict[tuple[int, int], int] = {}
    for a, region in enumerate(subsets):
        for x in region.members:
            pair_edges[(x, a)] = net.add_edge(node_x(x), node_a(a), big)
    sink_edges = [net.add_edge(node_a(a), sink, subset_quota) for a in range(n_subsets)]

    value = net.max_flow(source, sink)
    loss = 1 - value

    flows = [
        (x, a, net.flow_on(eid))
        for (x, a), eid in pair_edges.items()
        if net.flow_on(eid) > 0
    ]
    # Complete the coupling: pair leftover outcome mass with leftover subset
    # quota (northwest-corner).  No leftover pair can cover its outcome, or
    # the flow would admit one more augmenting path.
    deficits = [(x, probs[x] - net.flow_on(eid)) for x, eid in enumerate(source_edges)]
    deficits = [(x, d) for x, d in deficits if d > 0]
    spare = [(a, subset_quota - net.flow_on(eid)) for a, eid in enumerate(sink_edges)]
    spare = [(a, s) for a, s in spare if s > 0]
    ai = 0
    for x, d in deficits:
        while d > 0 and ai < len(spare):
            a, s = spare[ai]
            moved = min(d, s)
            flows.append((x, a, moved))
            d -= moved
            s -= moved
            if s <= 0:
                ai += 1
            else:
                spare[ai] = (a, s)

    flows.sort()
    return AgnosticCoupling(flows=tuple(flows), subsets=tuple(subsets)), (
        float(loss) if exact else loss
    )


def coupling_miss_probability(coupling: AgnosticCoupling) -> float:
    """P(outcome not in its coupled region), recomputed from the atoms."""
    return float(
        sum(m for x, a, m in coupling.flows if x not in coupling.subsets[a])
    )


def strassen_condition_holds(rho: DiscreteDist, law: UniformRegionLaw, budget) -> bool:
    """Brute-force marginal-domination check over every outcome set U.

    True iff rho(U) - P(region hits U) <= budget for all U.  Exact when the
    distribution and budget are exact rationals; float arithmetic otherwise.
    """
    if rho.k != law.n:
        raise ValueError(f"distribution has {rho.k} outcomes, law expects {law.n}")
    n = law.n
    if n > MAX_BRUTE_OUTCOMES:
        raise ValueError(f"brute force limited to n <= {MAX_BRUTE_OUTCOMES}, got {n}")
    exact = rho.is_exact and not isinstance(budget, float)
    if exact:
        hit = [law.hit_probability(u) for u in range(n + 1)]
        for bits in range(1 << n):
            total = Fraction(0)
            size = 0
            for x in range(n):
                if bits >> x & 1:
                    total += Fraction(rho.probs[x])
                    size += 1
            if total - hit[size] > budget:
                return False
        return True
    hit = np.array([float(law.hit_probability(u)) for u in range(n + 1)])
    sums = np.zeros(1)
    sizes = np.zeros(1, dtype=np.int64)
    for p in rho.as_floats():
        sums = np.concatenate([sums, sums + p])
        sizes = np.concatenate([sizes, sizes + 1])
    return bool(np.all(sums - hit[sizes] <= float(budget)))


def worst_set_gap(rho: DiscreteDist, law: UniformRegionLaw) -> float:
    """max over U of rho(U) - P(region hits U); equals the min achievable loss."""
    probs = sorted(rho.as_floats(), reverse=True)
    best = 0.0
    acc = 0.0
    for u in range(1, law.n + 1):
        acc += probs[u - 1]
        best = max(best, acc - float(law.hit_probability(u)))
    return best
