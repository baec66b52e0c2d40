"""Uniformly most powerful watermark couplings.

A watermarking scheme is a coupling of an output X with a random rejection
region R.  The optimal (UMP) scheme of level alpha pairs each outcome with its
own singleton region, clipped so no single outcome is rejected with
probability above alpha; allowing the output marginal to move by epsilon in
total variation first "water-fills" mass from above-alpha outcomes to
below-alpha ones.  This module builds that coupling, evaluates exact Type I
and Type II errors of arbitrary couplings, and certifies optimality on tiny
sample spaces with an exhaustive linear program over all regions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable

from .dist import DiscreteDist
from .simplex import LpProblem, simplex_solve

WEIGHT_SUM_TOL = 1e-12

ORACLE_MAX_OUTCOMES = 4


@dataclass(frozen=True)
class Region:
    """A rejection region: sorted, duplicate-free outcome ids."""

    members: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if list(self.members) != sorted(set(self.members)):
            raise ValueError("region members must be sorted and duplicate-free")
        if self.members and self.members[0] < 0:
            raise ValueError("region members must be non-negative outcome ids")

    @classmethod
    def of(cls, ids: Iterable[int]) -> "Region":
        return cls(members=tuple(sorted(set(int(i) for i in ids))))

    def __contains__(self, outcome: int) -> bool:
        return outcome in self.members

    def __len__(self) -> int:
        return len(self.members)


EMPTY_REGION = Region(members=())


@dataclass(frozen=True)
class Coupling:
    """Joint law of (output, region) as weighted atoms over k outcomes."""

    atoms: tuple[tuple[int, Region, float], ...]
    k: int

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        total = math.fsum(w for _, _, w in self.atoms)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"atom weights sum to {total!r}, not 1")
        for x, region, w in self.atoms:
            if w < 0:
                raise ValueError("atom weights must be non-negative")
            if not 0 <= x < self.k:
                raise ValueError(f"outcome {x} outside 0..{self.k - 1}")
            if region.members and region.members[-1] >= self.k:
                raise ValueError("region member outside outcome range")

    def x_marginal(self) -> DiscreteDist:
        mass = [0.0] * self.k
        for x, _, w in self.atoms:
            mass[x] += w
        return DiscreteDist(probs=tuple(mass))


def clipped_surplus(probs: Iterable[float], alpha: float) -> float:
    """Total mass above the level alpha: sum of (p - alpha)+ over outcomes."""
    return math.fsum(max(float(p) - alpha, 0.0) for p in probs)


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0,1), got {alpha!r}")


def optimal_distortion(rho: DiscreteDist, alpha: float, eps: float = 0.0) -> DiscreteDist:
    """Distribution within TV-eps of ``rho`` minimizing the clipped surplus.

    Water-filling: move mass (at most eps in total) from outcomes above alpha
    to outcomes below alpha, largest surplus to largest remaining capacity
    first.  The achieved objective is (S - min(eps, S, C))+ with S the donor
    surplus and C the receiver capacity; the returned minimizer is one
    representative of a generally non-unique argmin.
    """
    _check_alpha(alpha)
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps!r}")
    probs = list(rho.as_floats())
    donors = sorted(
        (j for j in range(len(probs)) if probs[j] > alpha),
        key=lambda j: (-(probs[j] - alpha), j),
    )
    receivers = sorted(
        (j for j in range(len(probs)) if probs[j] < alpha),
        key=lambda j: (-(alpha - probs[j]), j),
    )
    budget = float(eps)
    r = 0
    for j in donors:
        surplus = probs[j] - alpha
        taken = 0.0
        while surplus > 0.0 and budget > 0.0 and r < len(receivers):
            dst = receivers[r]
            room = alpha - probs[dst]
            if room <= 0.0:
                r += 1
                continue
            moved = min(surplus, room, budget)
            probs[dst] += moved
            taken += moved
            surplus -= moved
            budget -= moved
            if moved >= room:
                r += 1
        if taken > 0.0:
            probs[j] -= taken
    return DiscreteDist(probs=tuple(probs), labels=rho.labels)


def optimal_type2(rho: DiscreteDist, alpha: float, eps: float = 0.0) -> float:
    """Minimum Type II error of any eps-distorted level-alpha coupling."""
    _check_alpha(alpha)
    surplus = clipped_surplus(rho.probs, alpha)
    capacity = math.fsum(max(alpha - float(p), 0.0) for p in rho.probs)
    return max(surplus - min(eps, surplus, capacity), 0.0)


def ump_coupling(rho: DiscreteDist, alpha: float, eps: float = 0.0) -> Coupling:
    """Build the optimal coupling: singleton regions with alpha-clipping.

    Each outcome x of the (possibly distorted) marginal gets the region {x}
    with probability min(1, alpha/p(x)); leftover mass pairs with the empty
    region and is never detected.  Zero-weight atoms are omitted.
    """
    _check_alpha(alpha)
    star = optimal_distortion(rho, alpha, eps)
    atoms: list[tuple[int, Region, float]] = []
    for x, p in enumerate(star.as_floats()):
        if p <= 0.0:
            continue
        hit = min(p, alpha)  # = p * min(1, alpha/p), without the round-trip
        miss = p - hit
        if hit > 0.0:
            atoms.append((x, Region(members=(x,)), hit))
        if miss > 0.0:
            atoms.append((x, EMPTY_REGION, miss))
    return Coupling(atoms=tuple(atoms), k=rho.k)


def type1_exact(coupling: Coupling) -> float:
    """Worst-case false-detection probability over independent outputs.

    The supremum over independent laws is attained at a point mass, so this
    is the largest total weight of atoms whose region covers a single
    outcome.
    """
    per_outcome = [0.0] * coupling.k
    for _, region, w in coupling.atoms:
        for y in region.members:
            per_outcome[y] += w
    return max(per_outcome) if per_outcome else 0.0


def type2_exact(coupling: Coupling) -> float:
    """Probability the coupled output misses its own region."""
    return math.fsum(w for x, region, w in coupling.atoms if x not in region)


def ump_oracle(rho: DiscreteDist, alpha: float) -> float:
    """Exhaustive minimum Type II error over all level-alpha couplings.

    Solves the full LP over conditional region probabilities P(R | x) for
    every region R of a tiny sample space, including the empty region, with
    the per-outcome conditionals constrained to sum to exactly 1.  Certifies
    the closed-form optimum independently of the coupling construction.
    """
    _check_alpha(alpha)
    k = rho.k
    if k > ORACLE_MAX_OUTCOMES:
        raise ValueError(f"oracle limited to k <= {ORACLE_MAX_OUTCOMES}, got {k}")
    probs = rho.as_floats()
    regions = [
        tuple(sorted(members))
        for size in range(0, k + 1)
        for members in itertools.combinations(range(k), size)
    ]
    n_vars = k * len(regions)

    def var(x: int, r: int) -> int:
        return x * len(regions) + r

    objective = [0.0] * n_vars
    for x in range(k):
        for r, members in enumerate(regions):
            if x in members:
                objective[var(x, r)] = probs[x]

    constraints = []
    for x in range(k):  # conditional masses sum to exactly 1 (== as two <= rows)
        row = [0.0] * n_vars
        for r in range(len(regions)):
            row[var(x, r)] = 1.0
        constraints.append((tuple(row), 1.0))
        constraints.append((tuple(-v for v in row), -1.0))
    for y in range(k):  # point-mass Type I constraint at each outcome
        row = [0.0] * n_vars
        for x in range(k):
            for r, members in enumerate(regions):
                if y in members:
                    row[var(x, r)] = probs[x]
        constraints.append((tuple(row), alpha))

    problem = LpProblem(
        objective=tuple(objective),
        constraints=tuple(constraints),
        bounds=((0.0, 1.0),) * n_vars,
    )
    solution = simplex_solve(problem)
    if solution.status != "optimal":
        raise AssertionError(f"oracle LP unexpectedly {solution.status}")
    return 1.0 - solution.objective
