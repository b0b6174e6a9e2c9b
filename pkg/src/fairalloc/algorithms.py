"""The two allocation algorithms: a (sqrt(3)-1)-EFR and a (phi-1)-EFX solver.

Both run the same three-step pipeline: a certified one-item-per-agent
matching, a refinement round where low-rank agents pick extra items in
topological envy order, and envy-cycle elimination to place whatever is
left. They differ in the rank thresholds that group the agents, the number
of refinement passes, and the notion whose factor they guarantee.

Every run produces a trace: the recorded matching followed by each pick and
rotation (replaying those reproduces the output allocation exactly) plus
the outcomes of the mid-run invariant checks. The checks are switchable --
they are the main verification payload but cost a factor evaluation per
step -- and a failed check raises InternalGuaranteeViolated, which for
valid inputs always means an implementation defect.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .envy import (
    Cycle,
    EnvyRanks,
    build_envy_ratio_graph,
    envy_edges,
    find_envy_cycle,
    rotate_bundles,
    strict_envy_edges,
    topological_order,
)
from .errors import InfiniteRank, InstanceTooSmall, InternalGuaranteeViolated
from .matching import nsw_matching, verify_nsw_certificate
from .model import (
    Allocation,
    ExtendedRational,
    FairnessNotion,
    Instance,
    Threshold,
    bundle_value,
    fairness_factor,
    is_infinite,
    meets_threshold,
)

# Group boundaries. The EFR algorithm splits agents at ranks sqrt(3)+1 and 2;
# the EFX algorithm splits once at the golden ratio. Both splits are decided
# exactly by squaring, never via floats.


def _rank_above_sqrt3_plus_one(rank: ExtendedRational) -> bool:
    if is_infinite(rank):
        return True
    return (rank - 1) ** 2 > 3  # rank >= 1, so squaring preserves order


def _rank_above_golden_ratio(rank: ExtendedRational) -> bool:
    if is_infinite(rank):
        return True
    return (2 * rank - 1) ** 2 > 5


def _at_least_sqrt3_times(a: Fraction, b: Fraction) -> bool:
    """Exact a >= sqrt(3) * b for rationals."""
    if b <= 0:
        return True
    if a < 0:
        return False
    return a * a >= 3 * b * b


def _at_least_sqrt5_times(a: Fraction, b: Fraction) -> bool:
    """Exact a >= sqrt(5) * b for rationals."""
    if b <= 0:
        return True
    if a < 0:
        return False
    return a * a >= 5 * b * b


@dataclass(frozen=True)
class AgentGroups:
    """Partition of the agents by envy rank; g3 stays empty in EFX mode."""

    mode: FairnessNotion
    g1: frozenset[int]
    g2: frozenset[int]
    g3: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        if self.mode not in (FairnessNotion.EFR, FairnessNotion.EFX):
            raise ValueError("grouping is defined for the EFR and EFX modes only")
        if self.mode is FairnessNotion.EFX and self.g3:
            raise ValueError("EFX mode has no third group")
        if self.g1 & self.g2 or self.g1 & self.g3 or self.g2 & self.g3:
            raise ValueError("groups overlap")


def partition_groups(ranks: EnvyRanks, mode: FairnessNotion) -> AgentGroups:
    """Split agents by rank: above the mode's top threshold, middle, rest.

    Ranks must be finite. An infinite rank is only reachable through the
    zero-value weight conventions; the solvers place such agents in the
    top group themselves (their bundles must stay singletons), but this
    operation refuses to guess.
    """
    if any(is_infinite(r) for r in ranks.ranks):
        raise InfiniteRank("group membership is undefined for an infinite rank")
    return _partition_groups(ranks, mode)


def _partition_groups(ranks: EnvyRanks, mode: FairnessNotion) -> AgentGroups:
    if mode is FairnessNotion.EFX:
        g1 = frozenset(
            i for i, r in enumerate(ranks.ranks) if _rank_above_golden_ratio(r)
        )
        g2 = frozenset(range(len(ranks))) - g1
        return AgentGroups(mode, g1, g2)
    if mode is not FairnessNotion.EFR:
        raise ValueError("grouping is defined for the EFR and EFX modes only")
    g1 = frozenset(
        i for i, r in enumerate(ranks.ranks) if _rank_above_sqrt3_plus_one(r)
    )
    g3 = frozenset(
        i for i, r in enumerate(ranks.ranks) if i not in g1 and r <= 2
    )
    g2 = frozenset(range(len(ranks))) - g1 - g3
    return AgentGroups(mode, g1, g2, g3)


# --- Trace events -----------------------------------------------------------


@dataclass(frozen=True)
class MatchingDone:
    allocation: Allocation
    ranks: EnvyRanks


@dataclass(frozen=True)
class GroupsAssigned:
    groups: AgentGroups


@dataclass(frozen=True)
class Pick:
    """A refinement-step pick; `label` names the pass it happened in."""

    agent: int
    item: int
    label: str


@dataclass(frozen=True)
class CycleRotated:
    cycle: Cycle


@dataclass(frozen=True)
class SourcePick:
    """A completion-step pick by an agent nobody envies."""

    agent: int
    item: int


@dataclass(frozen=True)
class InvariantChecked:
    name: str
    passed: bool


TraceEvent = (
    MatchingDone | GroupsAssigned | Pick | CycleRotated | SourcePick | InvariantChecked
)
Trace = list[TraceEvent]


def replay_trace(trace: Trace) -> Allocation:
    """Reapply the recorded picks and rotations to the recorded matching."""
    if not trace or not isinstance(trace[0], MatchingDone):
        raise ValueError("trace must start with the matching event")
    allocation = trace[0].allocation
    for event in trace[1:]:
        if isinstance(event, (Pick, SourcePick)):
            allocation = allocation.with_item(event.agent, event.item)
        elif isinstance(event, CycleRotated):
            allocation = rotate_bundles(allocation, event.cycle)
    return allocation


@dataclass(frozen=True)
class RefinementState:
    """What the refinement step threads through: the running allocation,
    the rank groups, and the fixed topological pick order."""

    allocation: Allocation
    groups: AgentGroups
    order: tuple[int, ...]


def _best_remaining_item(
    instance: Instance, allocation: Allocation, agent: int
) -> int | None:
    """The agent's most valuable remaining item, smallest index on ties."""
    best: int | None = None
    best_value: Fraction | None = None
    for item in sorted(allocation.remaining):
        value = instance.value(agent, item)
        if best_value is None or value > best_value:
            best, best_value = item, value
    return best


def _pick_pass(
    instance: Instance,
    allocation: Allocation,
    members: frozenset[int],
    order: tuple[int, ...],
    label: str,
    trace: Trace,
) -> Allocation:
    for agent in order:
        if agent not in members:
            continue
        item = _best_remaining_item(instance, allocation, agent)
        if item is None:
            break  # pool exhausted: remaining picks are skipped
        allocation = allocation.with_item(agent, item)
        trace.append(Pick(agent, item, label))
    return allocation


def refine_step2(
    instance: Instance, state: RefinementState, trace: Trace | None = None
) -> RefinementState:
    """Let the low-rank groups extend their bundles from the pool.

    EFR mode: the bottom group picks its best remaining item twice (two
    full passes in topological order), then the middle group picks once.
    EFX mode: the bottom group picks once. Agents whose turn finds an
    empty pool are skipped.
    """
    if trace is None:
        trace = []
    allocation, groups, order = state.allocation, state.groups, state.order
    if groups.mode is FairnessNotion.EFR:
        allocation = _pick_pass(instance, allocation, groups.g3, order, "g3-pass-1", trace)
        allocation = _pick_pass(instance, allocation, groups.g3, order, "g3-pass-2", trace)
        allocation = _pick_pass(instance, allocation, groups.g2, order, "g2", trace)
    else:
        allocation = _pick_pass(instance, allocation, groups.g2, order, "g2", trace)
    return RefinementState(allocation, groups, order)


def envy_cycle_elimination(
    instance: Instance,
    allocation: Allocation,
    trace: Trace | None = None,
    running_check: tuple[FairnessNotion, Threshold] | None = None,
) -> Allocation:
    """Complete the allocation with the classic envy-graph procedure.

    Until the pool is empty: rotate bundles along strict-envy cycles until
    the envy graph is acyclic (each rotation strictly shrinks the edge
    set), then let the smallest-index unenvied agent pick its best
    remaining item. With `running_check` set, the stated factor is
    re-verified exactly after every rotation and every pick.
    """
    if trace is None:
        trace = []

    def check_running(tag: str) -> None:
        if running_check is None:
            return
        notion, threshold = running_check
        passed = meets_threshold(fairness_factor(instance, allocation, notion), threshold)
        trace.append(InvariantChecked("completion-factor", passed))
        if not passed:
            raise InternalGuaranteeViolated(f"completion-factor after {tag}")

    while allocation.remaining:
        while (cycle := find_envy_cycle(instance, allocation)) is not None:
            allocation = rotate_bundles(allocation, cycle)
            trace.append(CycleRotated(cycle))
            check_running("rotation")
        envied = {j for (_, j) in strict_envy_edges(instance, allocation)}
        source = min(set(range(instance.agent_count)) - envied)
        item = _best_remaining_item(instance, allocation, source)
        assert item is not None
        allocation = allocation.with_item(source, item)
        trace.append(SourcePick(source, item))
        check_running("pick")
    return allocation


# --- Mid-run invariant checks ------------------------------------------------


def _check(trace: Trace, name: str, passed: bool) -> None:
    trace.append(InvariantChecked(name, passed))
    if not passed:
        raise InternalGuaranteeViolated(name)


def _removal_expectations(
    instance: Instance, allocation: Allocation, envier: int
) -> list[Fraction]:
    out = []
    for j in range(instance.agent_count):
        if j == envier:
            continue
        bundle = allocation.bundles[j]
        k = len(bundle)
        if k <= 1:
            out.append(Fraction(0))
        else:
            out.append(Fraction(k - 1, k) * bundle_value(instance, envier, bundle))
    return out


def _max_after_any_removal(
    instance: Instance, allocation: Allocation, envier: int
) -> list[Fraction]:
    out = []
    for j in range(instance.agent_count):
        if j == envier:
            continue
        bundle = allocation.bundles[j]
        if len(bundle) <= 1:
            out.append(Fraction(0))
        else:
            total = bundle_value(instance, envier, bundle)
            out.append(total - min(instance.value(envier, b) for b in bundle))
    return out


def _check_refined_efr(
    instance: Instance, state: RefinementState, trace: Trace
) -> None:
    """Exact per-group guarantees at the end of the EFR refinement step."""
    allocation, groups = state.allocation, state.groups
    own = {
        i: bundle_value(instance, i, allocation.bundles[i])
        for i in range(instance.agent_count)
    }
    _check(
        trace,
        "refine-g1-full-fairness",
        all(e <= own[i] for i in groups.g1 for e in _removal_expectations(instance, allocation, i)),
    )
    _check(
        trace,
        "refine-g2-factor",  # factor 3/4
        all(4 * own[i] >= 3 * e for i in groups.g2 for e in _removal_expectations(instance, allocation, i)),
    )
    _check(
        trace,
        "refine-g3-factor",  # factor 2/(sqrt(3)+1): own >= (sqrt(3)-1)*e
        all(
            _at_least_sqrt3_times(own[i] + e, e)
            for i in groups.g3
            for e in _removal_expectations(instance, allocation, i)
        ),
    )
    _check(
        trace,
        "refine-global-factor",  # 2/(sqrt(3)+1) == sqrt(3)-1 overall
        meets_threshold(
            fairness_factor(instance, allocation, FairnessNotion.EFR),
            Threshold.SQRT3_MINUS_ONE,
        ),
    )
    pool = sorted(allocation.remaining)
    bounds_hold = True
    for i in range(instance.agent_count):
        for item in pool:
            v = instance.value(i, item)
            if i in groups.g1:
                # (sqrt(3)+1) * v <= own
                if not _at_least_sqrt3_times(own[i] - v, v):
                    bounds_hold = False
            elif 3 * v > own[i]:
                bounds_hold = False
    _check(trace, "refine-remaining-bounds", bounds_hold)


def _check_refined_efx(
    instance: Instance, state: RefinementState, trace: Trace
) -> None:
    """Exact per-group guarantees at the end of the EFX refinement step."""
    allocation, groups = state.allocation, state.groups
    own = {
        i: bundle_value(instance, i, allocation.bundles[i])
        for i in range(instance.agent_count)
    }
    _check(
        trace,
        "refine-g1-full-fairness",
        all(d <= own[i] for i in groups.g1 for d in _max_after_any_removal(instance, allocation, i)),
    )
    _check(
        trace,
        "refine-g2-factor",  # factor phi-1: 2*own + d >= sqrt(5)*d
        all(
            _at_least_sqrt5_times(2 * own[i] + d, d)
            for i in groups.g2
            for d in _max_after_any_removal(instance, allocation, i)
        ),
    )
    pool = sorted(allocation.remaining)
    bounds_hold = True
    for i in range(instance.agent_count):
        for item in pool:
            v = instance.value(i, item)
            if i in groups.g1:
                # phi * v <= own, i.e. sqrt(5) * v <= 2*own - v
                if not _at_least_sqrt5_times(2 * own[i] - v, v):
                    bounds_hold = False
            elif 2 * v > own[i]:
                bounds_hold = False
    _check(trace, "refine-remaining-bounds", bounds_hold)


# --- Solvers -----------------------------------------------------------------


def _solve(
    instance: Instance, mode: FairnessNotion, check: bool
) -> tuple[Allocation, Trace]:
    if instance.item_count < instance.agent_count:
        raise InstanceTooSmall(
            f"need at least {instance.agent_count} items, got {instance.item_count}"
        )
    threshold = (
        Threshold.SQRT3_MINUS_ONE
        if mode is FairnessNotion.EFR
        else Threshold.GOLDEN_RATIO_MINUS_ONE
    )
    trace: Trace = []

    result = nsw_matching(instance)
    trace.append(MatchingDone(result.allocation, result.ranks))
    if check:
        _check(
            trace,
            "matching-certificate",
            verify_nsw_certificate(instance, result.allocation),
        )

    groups = _partition_groups(result.ranks, mode)
    trace.append(GroupsAssigned(groups))

    graph = build_envy_ratio_graph(instance, result.allocation)
    order = topological_order(instance.agent_count, envy_edges(graph))

    state = refine_step2(
        instance, RefinementState(result.allocation, groups, order), trace
    )
    if check:
        if mode is FairnessNotion.EFR:
            _check_refined_efr(instance, state, trace)
        else:
            _check_refined_efx(instance, state, trace)

    allocation = envy_cycle_elimination(
        instance,
        state.allocation,
        trace,
        running_check=(mode, threshold) if check else None,
    )

    report = fairness_factor(instance, allocation, mode)
    if not meets_threshold(report, threshold):
        raise InternalGuaranteeViolated(
            f"final {mode.value} factor {report.factor} misses the guarantee"
        )
    return allocation, trace


def solve_efr(instance: Instance, check: bool = True) -> tuple[Allocation, Trace]:
    """Complete allocation whose EFR factor is at least sqrt(3)-1, exactly."""
    return _solve(instance, FairnessNotion.EFR, check)


def solve_efx(instance: Instance, check: bool = True) -> tuple[Allocation, Trace]:
    """Complete allocation whose EFX factor is at least phi-1, exactly."""
    return _solve(instance, FairnessNotion.EFX, check)
