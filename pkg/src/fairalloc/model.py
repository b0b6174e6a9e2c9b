"""Core data model: instances, allocations, and exact fairness factors.

All arithmetic is exact. Valuations are non-negative rationals
(`fractions.Fraction`); the only non-rational value that ever appears is
`math.inf`, used for unbounded fairness factors and infinite envy ratios.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InvalidAllocation, InvalidInstance

INF = math.inf

# A factor or ratio: an exact Fraction, or math.inf.
ExtendedRational = Fraction | float


def is_infinite(x: ExtendedRational) -> bool:
    return x == INF


class FairnessNotion(enum.Enum):
    EF = "ef"
    EF1 = "ef1"
    EFX = "efx"
    EFR = "efr"


class Threshold(enum.Enum):
    """Irrational guarantee thresholds, compared exactly by squaring."""

    SQRT3_MINUS_ONE = "sqrt3-1"
    GOLDEN_RATIO_MINUS_ONE = "phi-1"


SQRT3_MINUS_ONE = Threshold.SQRT3_MINUS_ONE
GOLDEN_RATIO_MINUS_ONE = Threshold.GOLDEN_RATIO_MINUS_ONE


@dataclass(frozen=True)
class Instance:
    """Additive valuations: one row per agent, one column per item."""

    valuations: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        if not self.valuations or not self.valuations[0]:
            raise InvalidInstance("need at least one agent and one item")
        width = len(self.valuations[0])
        for row in self.valuations:
            if len(row) != width:
                raise InvalidInstance("valuation rows have unequal lengths")
            for v in row:
                if not isinstance(v, Fraction):
                    raise InvalidInstance(f"valuation {v!r} is not a Fraction")
                if v < 0:
                    raise InvalidInstance(f"negative valuation {v}")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int | str | Fraction]]) -> "Instance":
        return cls(tuple(tuple(Fraction(v) for v in row) for row in rows))

    @property
    def agent_count(self) -> int:
        return len(self.valuations)

    @property
    def item_count(self) -> int:
        return len(self.valuations[0])

    def value(self, agent: int, item: int) -> Fraction:
        if not 0 <= agent < self.agent_count:
            raise IndexError(f"agent {agent} out of range")
        if not 0 <= item < self.item_count:
            raise IndexError(f"item {item} out of range")
        return self.valuations[agent][item]


@dataclass(frozen=True)
class Allocation:
    """Disjoint bundles of item indices, one per agent; may be partial."""

    bundles: tuple[frozenset[int], ...]
    item_count: int

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for bundle in self.bundles:
            for item in bundle:
                if not 0 <= item < self.item_count:
                    raise InvalidAllocation(f"item {item} out of range")
                if item in seen:
                    raise InvalidAllocation(f"item {item} allocated twice")
                seen.add(item)

    @classmethod
    def of(cls, bundles: Iterable[Iterable[int]], item_count: int) -> "Allocation":
        return cls(tuple(frozenset(b) for b in bundles), item_count)

    @classmethod
    def empty(cls, agent_count: int, item_count: int) -> "Allocation":
        return cls((frozenset(),) * agent_count, item_count)

    @property
    def agent_count(self) -> int:
        return len(self.bundles)

    @property
    def remaining(self) -> frozenset[int]:
        allocated = frozenset().union(*self.bundles) if self.bundles else frozenset()
        return frozenset(range(self.item_count)) - allocated

    @property
    def is_complete(self) -> bool:
        return not self.remaining

    def with_item(self, agent: int, item: int) -> "Allocation":
        """New allocation with one more item in the given agent's bundle."""
        new = list(self.bundles)
        new[agent] = new[agent] | {item}
        return Allocation(tuple(new), self.item_count)


def check_allocation(instance: Instance, allocation: Allocation) -> None:
    """Raise InvalidAllocation unless the allocation fits the instance."""
    if allocation.agent_count != instance.agent_count:
        raise InvalidAllocation(
            f"allocation has {allocation.agent_count} bundles for "
            f"{instance.agent_count} agents"
        )
    if allocation.item_count != instance.item_count:
        raise InvalidAllocation(
            f"allocation covers {allocation.item_count} items for "
            f"{instance.item_count}-item instance"
        )


def bundle_value(instance: Instance, agent: int, bundle: Iterable[int]) -> Fraction:
    """Exact value of a bundle to an agent (sum of per-item values)."""
    total = Fraction(0)
    for item in bundle:
        total += instance.value(agent, item)
    return total


def removal_expectation(
    instance: Instance, observer: int, bundle: Iterable[int]
) -> Fraction:
    """Expected value of a bundle after a uniformly random item is removed.

    For an additive observer this collapses to ((k-1)/k) * bundle value for a
    k-item bundle. Bundles with fewer than two items yield 0: removing the
    only item (or removing from nothing) leaves nothing behind.
    """
    items = set(bundle)
    k = len(items)
    if k <= 1:
        bundle_value(instance, observer, items)  # still range-check
        return Fraction(0)
    return Fraction(k - 1, k) * bundle_value(instance, observer, items)


@dataclass(frozen=True)
class FairnessReport:
    """Worst-pair approximation factor for one fairness notion.

    `factor` is INF when every ordered pair has a zero comparison
    denominator, in which case any approximation holds vacuously.
    `witness` is the (envier, envied) pair attaining the factor, smallest
    pair first on ties; None when the factor is unbounded.
    """

    notion: FairnessNotion
    factor: ExtendedRational
    witness: tuple[int, int] | None


def _comparison_denominator(
    instance: Instance, envier: int, rival_bundle: frozenset[int], notion: FairnessNotion
) -> Fraction:
    """The rival-bundle quantity the envier's own value is measured against."""
    if not rival_bundle:
        return Fraction(0)
    total = bundle_value(instance, envier, rival_bundle)
    if notion is FairnessNotion.EF:
        return total
    per_item = [instance.value(envier, b) for b in rival_bundle]
    if notion is FairnessNotion.EF1:
        return total - max(per_item)
    if notion is FairnessNotion.EFX:
        return total - min(per_item)
    if notion is FairnessNotion.EFR:
        return removal_expectation(instance, envier, rival_bundle)
    raise ValueError(f"unknown notion {notion!r}")


def fairness_factor(
    instance: Instance, allocation: Allocation, notion: FairnessNotion
) -> FairnessReport:
    """Exact approximation factor of an allocation for one fairness notion.

    The factor is the minimum over ordered pairs (i, j), i != j, of
    v_i(own) / D_ij where D_ij is the notion's comparison denominator for
    j's bundle. Pairs with D_ij = 0 impose no constraint for any factor and
    are skipped; if every pair is skipped the factor is unbounded.
    """
    check_allocation(instance, allocation)
    n = instance.agent_count
    own = [bundle_value(instance, i, allocation.bundles[i]) for i in range(n)]
    best: Fraction | None = None
    witness: tuple[int, int] | None = None
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            denom = _comparison_denominator(instance, i, allocation.bundles[j], notion)
            if denom == 0:
                continue
            ratio = own[i] / denom
            if best is None or ratio < best:
                best = ratio
                witness = (i, j)
    if best is None:
        return FairnessReport(notion, INF, None)
    return FairnessReport(notion, best, witness)


def factor_at_least(
    factor: ExtendedRational, threshold: Threshold | Fraction | int
) -> bool:
    """Exact test of factor >= threshold; an unbounded factor passes always.

    The two irrational thresholds are decided by squaring: for f >= 0,
    f >= sqrt(3)-1 iff (f+1)^2 >= 3, and f >= (sqrt(5)-1)/2 iff
    (2f+1)^2 >= 5.
    """
    if is_infinite(factor):
        return True
    if threshold is Threshold.SQRT3_MINUS_ONE:
        return (factor + 1) ** 2 >= 3
    if threshold is Threshold.GOLDEN_RATIO_MINUS_ONE:
        return (2 * factor + 1) ** 2 >= 5
    return factor >= Fraction(threshold)


def meets_threshold(
    report: FairnessReport, threshold: Threshold | Fraction | int
) -> bool:
    return factor_at_least(report.factor, threshold)
