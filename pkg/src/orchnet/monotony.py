"""Monotony analysis: does raising latencies ever shrink end-to-end latency?

Three complementary deciders plus witness machinery:

* ``structural_check``: the per-cluster postset-equality condition on the
  carrier net.  Satisfied everywhere => the induced families are monotonic.
* ``check_global_condition``: for one member and one omega, compares the
  latency of every maximal configuration against the occurring one; the
  occurring configuration must be slowest-case-optimal for monotony.
* ``brute_force_monotony``: the definitional oracle over finite grids,
  enumerating dominating member pairs.

``synthesize_counterexample`` turns a violated cluster condition into a
concrete verified witness pair by the two-stage cone construction: make the
violating branch win the race, starve its continuation (infinite latency),
then raise everything outside a finite alternative configuration so that the
bigger family finishes earlier.  Every produced pair is re-verified by
simulation; exhaustion raises instead of fabricating a witness.

``conditional_monotony_check`` weakens monotony to pairs delivering equal
value sets; distinct value sets across maximal configurations certify it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .attributes import DATE_INF, ExtendedDate, Value, date_max
from .errors import CapExceededError, NetStructureError, SynthesisError
from .nets import (
    Cluster,
    Net,
    WorkflowNet,
    clusters,
    compute_relations,
    maximal_configurations,
    require_occurrence_net,
)
from .specs import LatencySpec
from .timed import (
    EndToEnd,
    FamilyAssignment,
    OrchNet,
    PreOrchNet,
    compare_families,
    end_to_end,
    eval_dates,
    execute,
    execute_all,
    latency_of_prefix,
    summarize_run,
    values_of_configuration,
)
from .unfolding import CarrierSpecs, UnfoldingResult, induced_preorchnet, unfold


# ---------------------------------------------------------------------------
# Structural cluster condition


@dataclass(frozen=True)
class ClusterViolation:
    cluster: tuple[str, ...]
    pairs: tuple[tuple[str, str], ...]  # direct racing pairs with differing postsets


@dataclass(frozen=True)
class StructuralReport:
    satisfied: bool
    violations: tuple[ClusterViolation, ...]
    clusters_checked: int


def structural_check(carrier: Net | WorkflowNet) -> StructuralReport:
    """Check that inside every cluster all transitions share one postset.

    The check runs on the carrier net itself, not its unfolding (unique
    producers there would condemn any real conflict).  An occurrence net
    passed directly is its own unfolding, so its clusters are the ones that
    matter.  Clusters without transitions are vacuous and skipped.
    """
    net = carrier.net if isinstance(carrier, WorkflowNet) else carrier
    violations: list[ClusterViolation] = []
    checked = 0
    for cluster in clusters(net):
        if not cluster.transitions:
            continue
        checked += 1
        ts = sorted(cluster.transitions)
        postsets = {t: net.postset[t] for t in ts}
        if len({postsets[t] for t in ts}) <= 1:
            continue
        pairs = []
        for i, t1 in enumerate(ts):
            for t2 in ts[i + 1 :]:
                if net.preset[t1] & net.preset[t2] and postsets[t1] != postsets[t2]:
                    pairs.append((t1, t2))
        violations.append(
            ClusterViolation(cluster=tuple(sorted(cluster.nodes)), pairs=tuple(pairs))
        )
    return StructuralReport(
        satisfied=not violations,
        violations=tuple(violations),
        clusters_checked=checked,
    )


# ---------------------------------------------------------------------------
# Global condition: occurring configuration is optimal


@dataclass(frozen=True)
class GlobalConditionWitness:
    configuration: frozenset[str]
    latency: ExtendedDate


@dataclass(frozen=True)
class GlobalConditionReport:
    status: str  # "holds" | "violated" | "undecided"
    occurring_latency: ExtendedDate | None
    witnesses: tuple[GlobalConditionWitness, ...]
    configurations_checked: int
    note: str = ""


def check_global_condition(
    orch: OrchNet,
    omega: int,
    tie_break: str = "lex",
    config_cap: int = 100_000,
) -> GlobalConditionReport:
    """Does every maximal configuration have latency >= the occurring one?

    A violation exhibits an alternative maximal configuration strictly
    faster than what the race policy produces; with upward-closed families
    that is exactly the seed of a monotony counterexample.
    """
    summary = end_to_end(orch, omega, tie_break)
    occurring_latency = summary.latency
    try:
        configs = maximal_configurations(orch.net, orch.relations, cap=config_cap)
    except CapExceededError as exc:
        return GlobalConditionReport(
            status="undecided",
            occurring_latency=occurring_latency,
            witnesses=(),
            configurations_checked=0,
            note=str(exc),
        )
    witnesses = []
    for config in configs:
        lat = latency_of_prefix(orch, omega, config)
        if lat < occurring_latency:
            witnesses.append(GlobalConditionWitness(configuration=config, latency=lat))
    return GlobalConditionReport(
        status="violated" if witnesses else "holds",
        occurring_latency=occurring_latency,
        witnesses=tuple(witnesses),
        configurations_checked=len(configs),
    )


# ---------------------------------------------------------------------------
# Brute-force grid oracle


@dataclass(frozen=True)
class OracleWitness:
    hi: FamilyAssignment
    lo: FamilyAssignment
    omega: int
    latency_hi: ExtendedDate
    latency_lo: ExtendedDate
    resolution_hi: tuple[str, ...] = field(default=())
    resolution_lo: tuple[str, ...] = field(default=())


@dataclass(frozen=True)
class OracleReport:
    outcome: str  # "monotonic" | "non_monotonic" | "undecided"
    grid_relative: bool
    witness: OracleWitness | None
    members_checked: int
    pairs_checked: int
    note: str = ""


def brute_force_monotony(
    pre: PreOrchNet,
    tie_break: str = "lex",
    mode: str = "all_pairs",
    eval_cap: int = 1_000_000,
) -> OracleReport:
    """Definitional monotony check over the finite grid family.

    mode="all_pairs" enumerates every dominating member pair (the
    definition, verbatim).  mode="adjacent" checks only single-coordinate
    raises to the next grid value, which is equivalent under the
    deterministic tie policy: any violating pair telescopes through a chain
    of adjacent grid members, so some adjacent step already violates.
    The verdict is relative to the declared grids ("monotonic over the
    grid"), never a proof over all real-valued families.
    """
    members = pre.assignments()
    budget = {"left": eval_cap}

    if tie_break == "lex":
        memo: dict[tuple[int, int], EndToEnd] = {}

        def result_of(idx: int, omega: int) -> EndToEnd:
            key = (idx, omega)
            if key not in memo:
                if budget["left"] <= 0:
                    raise CapExceededError(f"oracle exceeded evaluation cap {eval_cap}")
                budget["left"] -= 1
                memo[key] = end_to_end(pre.instantiate(members[idx]), omega, "lex")
            return memo[key]

    elif tie_break == "all":
        if mode != "all_pairs":
            raise NetStructureError("adjacent mode requires the deterministic tie policy")
        all_memo: dict[tuple[int, int], tuple] = {}

        def results_of(idx: int, omega: int):
            key = (idx, omega)
            if key not in all_memo:
                if budget["left"] <= 0:
                    raise CapExceededError(f"oracle exceeded evaluation cap {eval_cap}")
                budget["left"] -= 1
                orch = pre.instantiate(members[idx])
                runs = execute_all(orch, omega)
                all_memo[key] = tuple(summarize_run(orch, r) for r in runs)
            return all_memo[key]

    else:
        raise NetStructureError(f"unknown tie_break {tie_break!r}")

    pairs_checked = 0

    def compare_pair(hi_idx: int, lo_idx: int) -> OracleWitness | None:
        nonlocal pairs_checked
        pairs_checked += 1
        for omega in range(pre.omega_count):
            if tie_break == "lex":
                hi_res = result_of(hi_idx, omega)
                lo_res = result_of(lo_idx, omega)
                if hi_res.latency < lo_res.latency:
                    return OracleWitness(
                        hi=members[hi_idx],
                        lo=members[lo_idx],
                        omega=omega,
                        latency_hi=hi_res.latency,
                        latency_lo=lo_res.latency,
                    )
            else:
                # a violation must hold for at least one tie resolution
                for hi_res in results_of(hi_idx, omega):
                    for lo_res in results_of(lo_idx, omega):
                        if hi_res.latency < lo_res.latency:
                            return OracleWitness(
                                hi=members[hi_idx],
                                lo=members[lo_idx],
                                omega=omega,
                                latency_hi=hi_res.latency,
                                latency_lo=lo_res.latency,
                                resolution_hi=hi_res.run.step_order,
                                resolution_lo=lo_res.run.step_order,
                            )
        return None

    try:
        if mode == "all_pairs":
            for hi_idx in range(len(members)):
                for lo_idx in range(len(members)):
                    if hi_idx == lo_idx:
                        continue
                    if not members[hi_idx].dominates(members[lo_idx]):
                        continue
                    witness = compare_pair(hi_idx, lo_idx)
                    if witness is not None:
                        return OracleReport(
                            outcome="non_monotonic",
                            grid_relative=True,
                            witness=witness,
                            members_checked=len(members),
                            pairs_checked=pairs_checked,
                        )
        elif mode == "adjacent":
            index_of = {m.sort_key(): i for i, m in enumerate(members)}
            for lo_idx, lo in enumerate(members):
                for hi in _adjacent_raises(pre, lo):
                    hi_idx = index_of[hi.sort_key()]
                    witness = compare_pair(hi_idx, lo_idx)
                    if witness is not None:
                        return OracleReport(
                            outcome="non_monotonic",
                            grid_relative=True,
                            witness=witness,
                            members_checked=len(members),
                            pairs_checked=pairs_checked,
                        )
        else:
            raise NetStructureError(f"unknown oracle mode {mode!r}")
    except CapExceededError as exc:
        return OracleReport(
            outcome="undecided",
            grid_relative=True,
            witness=None,
            members_checked=len(members),
            pairs_checked=pairs_checked,
            note=str(exc),
        )

    return OracleReport(
        outcome="monotonic",
        grid_relative=True,
        witness=None,
        members_checked=len(members),
        pairs_checked=pairs_checked,
    )


def _adjacent_raises(pre: PreOrchNet, member: FamilyAssignment):
    """Members equal to ``member`` except one coordinate raised to the next
    larger grid value."""
    class_values = dict(member.class_values)
    place_values = dict(member.place_values)
    for cls, current in member.class_values:
        if current is None:
            continue
        ladder = sorted(set(pre.class_grid[cls]))
        pos = ladder.index(current)
        if pos + 1 < len(ladder):
            raised = dict(class_values)
            raised[cls] = ladder[pos + 1]
            yield FamilyAssignment(
                class_values=tuple(sorted(raised.items())),
                place_values=member.place_values,
            )
    for p, current in member.place_values:
        if current is None:
            continue
        ladder = sorted(set(pre.place_grid[p]))
        pos = ladder.index(current)
        if pos + 1 < len(ladder):
            raised = dict(place_values)
            raised[p] = ladder[pos + 1]
            yield FamilyAssignment(
                class_values=member.class_values,
                place_values=tuple(sorted(raised.items())),
            )


# ---------------------------------------------------------------------------
# Witness verification


@dataclass(frozen=True)
class Verification:
    accepted: bool
    reason: str
    latency_lo: ExtendedDate | None = None
    latency_hi: ExtendedDate | None = None


def verify_counterexample(
    lo: OrchNet, hi: OrchNet, omega: int, tie_break: str = "lex"
) -> Verification:
    """Accept iff hi's families dominate lo's and hi finishes strictly
    earlier at the given omega.  A drop from infinite to finite latency is a
    valid strict decrease (the orchestration goes from never finishing to
    finishing).

    Under tie_break="all" the violation must hold for at least one pair of
    tie resolutions, so the fastest hi run is compared against the slowest
    lo run.
    """
    order = compare_families(hi, lo)
    if not order.geq:
        return Verification(accepted=False, reason=f"hi does not dominate lo: {order.reason}")
    if tie_break == "lex":
        e_lo = end_to_end(lo, omega, "lex").latency
        e_hi = end_to_end(hi, omega, "lex").latency
    elif tie_break == "all":
        e_lo = max(summarize_run(lo, r).latency for r in execute_all(lo, omega))
        e_hi = min(summarize_run(hi, r).latency for r in execute_all(hi, omega))
    else:
        raise NetStructureError(f"unknown tie_break {tie_break!r}")
    if e_hi < e_lo:
        return Verification(
            accepted=True,
            reason="dominating family finishes strictly earlier",
            latency_lo=e_lo,
            latency_hi=e_hi,
        )
    return Verification(
        accepted=False,
        reason=f"no strict decrease: E(hi)={e_hi} vs E(lo)={e_lo}",
        latency_lo=e_lo,
        latency_hi=e_hi,
    )


# ---------------------------------------------------------------------------
# Counterexample synthesis


@dataclass(frozen=True)
class SynthesisOutcome:
    lo: OrchNet
    hi: OrchNet
    omega: int
    verification: Verification
    cluster: tuple[str, ...]
    pair: tuple[str, str]  # winning event, sacrificed competitor
    pair_labels: tuple[str, str]
    cone_configuration: frozenset[str]
    residual_place: str
    starved_events: tuple[str, ...]
    alternative: frozenset[str]
    alternative_latency: ExtendedDate
    unfolding: UnfoldingResult


def synthesize_counterexample(
    carrier: Net | WorkflowNet,
    specs: CarrierSpecs,
    omega_star: int,
    tie_break: str = "lex",
) -> SynthesisOutcome:
    """Build a verified monotony counterexample from a cluster violation.

    Follows the cone construction: lift a violating racing pair (t1, t2)
    into the unfolding, force their common enabling prefix K to occur, rig
    the cluster race so t1 wins, give every consumer of a residual place
    p in t1's postset infinite latency (the run stalls: E = inf), then raise
    everything outside a finite alternative maximal configuration just above
    its latency so the dominating family finishes there (E finite).

    Candidates (cluster, ordered pair, residual place) are searched
    exhaustively, with descent to earlier racing pairs when the cones
    conflict or steal each other's tokens.  Every candidate is verified by
    simulation before being returned; exhaustion raises SynthesisError.
    """
    net = carrier.net if isinstance(carrier, WorkflowNet) else carrier
    report = structural_check(carrier)
    if report.satisfied:
        raise SynthesisError("cluster condition is satisfied; nothing to synthesize")
    if not specs.upward_closed:
        raise SynthesisError(
            "synthesis requires the upward_closed flag: raised members must stay in the family"
        )

    result = unfold(carrier)
    unf = result.unfolding
    phi = result.morphism.node_map
    rel = compute_relations(unf)
    pre = induced_preorchnet(result, net, specs)

    base = _finite_baseline(pre, omega_star)
    group_of, group_members = _modification_groups(pre, specs, phi)

    failures: list[str] = []
    for cluster in clusters(unf):
        events = sorted(cluster.transitions)
        for t1 in events:
            for t2 in events:
                if t1 == t2:
                    continue
                if not unf.preset[t1] & unf.preset[t2]:
                    continue
                if net.postset[phi[t1]] == net.postset[phi[t2]]:
                    continue
                resolved = _descend(unf, net, rel, phi, t1, t2)
                if resolved is None:
                    failures.append(f"({t1},{t2}): no usable racing pair in the cones")
                    continue
                r1, r2, cone_k = resolved
                outcome = _attempt(
                    pre, unf, net, rel, phi, base, group_of, group_members,
                    r1, r2, cone_k, omega_star, tie_break, result, failures,
                )
                if outcome is not None:
                    return outcome
    raise SynthesisError(
        "no candidate produced a verifiable witness: " + "; ".join(failures[:5])
        if failures
        else "no racing pair with differing postsets found in the unfolding"
    )


def _finite_baseline(pre: PreOrchNet, omega_star: int) -> dict[str, ExtendedDate]:
    """A finite latency per event at omega_star, from the declared spec or
    the smallest finite grid value; fails explicitly if neither exists."""
    base: dict[str, ExtendedDate] = {}
    for cls in sorted(pre.classes):
        spec = pre.class_spec[cls]
        value: ExtendedDate | None = None
        if spec.is_tabular():
            v = spec.value_at(omega_star)
            if v.is_finite:
                value = v
        if value is None:
            finite_grid = sorted(v for v in pre.class_grid.get(cls, ()) if v.is_finite)
            if finite_grid:
                value = finite_grid[0]
        if value is None:
            raise SynthesisError(
                f"no finite-latency member: class {cls!r} has no finite value at omega {omega_star}"
            )
        for e in pre.classes[cls]:
            base[e] = value
    for p in sorted(pre.net.minimal_places):
        spec = pre.initial_date[p]
        if not (spec.is_tabular() and spec.value_at(omega_star).is_finite):
            raise SynthesisError(f"initial date of {p!r} is not finite at omega {omega_star}")
    return base


def _modification_groups(pre: PreOrchNet, specs: CarrierSpecs, phi: dict[str, str]):
    """Synthesis modifies latencies per constraint group: events are free
    individually (the induced family choices are per-copy) unless the
    carrier declared an equality class, which ties all copies of all its
    transitions together."""
    declared = set(specs.latency_class.values())
    group_of: dict[str, str] = {}
    group_members: dict[str, set[str]] = {}
    for e in pre.net.transitions:
        cls = specs.latency_class.get(phi[e])
        gid = f"class:{cls}" if cls is not None and cls in declared else f"event:{e}"
        group_of[e] = gid
        group_members.setdefault(gid, set()).add(e)
    return group_of, group_members


def _descend(unf: Net, carrier: Net, rel, phi, t1: str, t2: str):
    """Find a racing pair whose strict-cone union K is a conflict-free
    configuration that does not consume either competitor's preset.

    Returns (t1, t2, K) or None.  Each descent strictly shrinks the combined
    cone, so this terminates.
    """
    current = (t1, t2)
    seen = set()
    while current not in seen:
        seen.add(current)
        a, b = current
        cone_a = rel.cone(a) - {a}
        cone_b = rel.cone(b) - {b}
        k_nodes = cone_a | cone_b
        k_events = k_nodes & unf.transitions

        problem = None
        ev_a = sorted(cone_a & unf.transitions)
        ev_b = sorted(cone_b & unf.transitions)
        for u in ev_a:
            if u in cone_b:
                continue
            for u2 in ev_b:
                if u2 in cone_a:
                    continue
                if unf.preset[u] & unf.preset[u2]:
                    problem = (u, u2)
                    break
            if problem:
                break
        if problem is None:
            # cones compatible; check neither competitor is starved by K
            stealer = None
            for u in sorted(k_events):
                if unf.preset[u] & unf.preset[a]:
                    stealer = (a, u)
                    break
                if unf.preset[u] & unf.preset[b]:
                    stealer = (b, u)
                    break
            if stealer is None:
                return (a, b, k_nodes)
            problem = stealer

        u, u2 = problem
        if carrier.postset[phi[u]] != carrier.postset[phi[u2]]:
            current = (u, u2)
            continue
        return None
    return None


def _attempt(
    pre: PreOrchNet,
    unf: Net,
    carrier: Net,
    rel,
    phi,
    base: dict[str, ExtendedDate],
    group_of: dict[str, str],
    group_members: dict[str, set[str]],
    t1: str,
    t2: str,
    cone_k: frozenset[str],
    omega_star: int,
    tie_break: str,
    unfres: UnfoldingResult,
    failures: list[str],
) -> SynthesisOutcome | None:
    k_events = cone_k & unf.transitions

    # residual places: in t1's postset, with no counterpart after t2, and
    # actually consumed somewhere (otherwise nothing can be starved)
    residuals = [
        p
        for p in sorted(unf.postset[t1])
        if phi[p] not in carrier.postset[phi[t2]] and unf.postset[p]
    ]
    if not residuals:
        failures.append(f"({t1},{t2}): no consumable residual place after the winner")
        return None

    lo_lat: dict[str, ExtendedDate] = dict(base)

    # dates over the forced prefix K under the finite baseline
    k_dates: dict[str, ExtendedDate] = {}
    for node in sorted(cone_k, key=lambda n: (len(rel.below[n] & cone_k), n)):
        if node in unf.places:
            producers = unf.preset[node] & cone_k
            if producers:
                (producer,) = tuple(producers)
                k_dates[node] = k_dates[producer]
            else:
                k_dates[node] = pre.initial_date[node].value_at(omega_star)
        else:
            base_date = date_max(k_dates[p] for p in unf.preset[node])
            k_dates[node] = base_date + lo_lat[node]
    n_star = date_max(k_dates.values())

    def raise_group(event: str, floor: ExtendedDate) -> bool:
        """Raise the whole constraint group to at least ``floor``; refuse if
        that would touch the forced prefix or the winner."""
        for member in group_members[group_of[event]]:
            if member == t1 or member in k_events:
                return False
        for member in group_members[group_of[event]]:
            if lo_lat[member] < floor:
                lo_lat[member] = floor
        return True

    # make K occur: every rival of a K event loses its race
    bump = n_star + ExtendedDate(1)
    for t in sorted(k_events):
        for cond in unf.preset[t]:
            for rival in sorted(unf.postset[cond]):
                if rival in k_events or rival in (t1, t2):
                    continue
                if not raise_group(rival, bump):
                    failures.append(f"({t1},{t2}): prefix rival {rival!r} shares a constraint group with the prefix")
                    return None

    # rig the cluster race: t1's date is strictly minimal among its rivals
    d1 = date_max(k_dates[p] for p in unf.preset[t1]) + lo_lat[t1]
    cluster_events = next(
        c.transitions for c in clusters(unf) if t1 in c.transitions
    )
    for u in sorted(cluster_events):
        if u == t1 or u in k_events:
            continue
        if not raise_group(u, d1 + ExtendedDate(1)):
            failures.append(f"({t1},{t2}): cluster rival {u!r} shares a constraint group with the prefix")
            return None

    for residual in residuals:
        starved = tuple(sorted(unf.postset[residual]))
        lat = dict(lo_lat)
        ok = True
        for consumer in starved:
            group = group_members[group_of[consumer]]
            if t1 in group or group & k_events:
                ok = False
                break
            for member in group:
                lat[member] = DATE_INF
        if not ok:
            failures.append(f"({t1},{t2}): consumers of {residual!r} overlap the forced prefix")
            continue

        lo = _materialize(pre, lat, omega_star)
        lo_summary = end_to_end(lo, omega_star, tie_break)
        if lo_summary.latency.is_finite or t1 not in lo_summary.run.fired:
            failures.append(
                f"({t1},{t2},{residual}): forced run did not stall behind the winner"
            )
            continue

        # finite alternative maximal configuration under lo
        alternative = None
        alt_latency = None
        for config in maximal_configurations(unf, rel):
            lat_cfg = latency_of_prefix(lo, omega_star, config)
            if lat_cfg.is_finite:
                alternative = config
                alt_latency = lat_cfg
                break
        if alternative is None:
            failures.append(f"({t1},{t2},{residual}): every maximal configuration is infinite")
            continue

        hi_lat = dict(lat)
        floor = alt_latency + ExtendedDate(1)
        for t in sorted(unf.transitions - alternative):
            for member in group_members[group_of[t]]:
                if hi_lat[member] < floor:
                    hi_lat[member] = floor
        hi = _materialize(pre, hi_lat, omega_star)

        verification = verify_counterexample(lo, hi, omega_star, tie_break)
        if not verification.accepted:
            failures.append(f"({t1},{t2},{residual}): verification rejected ({verification.reason})")
            continue

        return SynthesisOutcome(
            lo=lo,
            hi=hi,
            omega=omega_star,
            verification=verification,
            cluster=tuple(sorted(cluster_events)),
            pair=(t1, t2),
            pair_labels=(phi[t1], phi[t2]),
            cone_configuration=cone_k,
            residual_place=residual,
            starved_events=starved,
            alternative=alternative,
            alternative_latency=alt_latency,
            unfolding=unfres,
        )
    return None


def _materialize(pre: PreOrchNet, lat: dict[str, ExtendedDate], omega_star: int) -> OrchNet:
    """An OrchNet whose latency at omega_star is ``lat`` and whose other
    omega columns keep the declared class specs."""
    latency: dict[str, LatencySpec] = {}
    for cls in sorted(pre.classes):
        spec = pre.class_spec[cls]
        for e in pre.classes[cls]:
            target = lat[e]
            if spec.is_tabular() and spec.value_at(omega_star) == target:
                latency[e] = spec
                continue
            table = []
            for omega in range(pre.omega_count):
                if omega == omega_star:
                    table.append(target)
                elif spec.is_tabular():
                    table.append(spec.value_at(omega))
                else:
                    raise SynthesisError(f"class {cls!r} has a non-tabular latency spec")
            latency[e] = LatencySpec(kind="per_omega", table=tuple(table))
    return OrchNet(
        net=pre.net,
        latency=latency,
        value_fn=dict(pre.value_fn),
        initial_date=dict(pre.initial_date),
        omega_count=pre.omega_count,
        guard=dict(pre.guard),
        initial_value=dict(pre.initial_value),
    )


# ---------------------------------------------------------------------------
# Conditional monotony


@dataclass(frozen=True)
class DistinctValuesWitness:
    omega: int
    config_a: frozenset[str]
    config_b: frozenset[str]
    values: tuple[Value, ...]


@dataclass(frozen=True)
class DistinctValuesReport:
    holds: bool
    witness: DistinctValuesWitness | None
    configurations: int


def check_distinct_values(orch: OrchNet, config_cap: int = 100_000) -> DistinctValuesReport:
    """Do distinct maximal configurations always deliver distinct value sets?

    Value sets are latency-independent (values flow through value functions
    only), so this property holds for every member of a grid family or none.
    """
    configs = maximal_configurations(orch.net, orch.relations, cap=config_cap)
    for omega in range(orch.omega_count):
        seen: dict[frozenset[Value], frozenset[str]] = {}
        for config in configs:
            values = values_of_configuration(orch, omega, config)
            if values in seen:
                ordered = tuple(sorted(values, key=str))
                return DistinctValuesReport(
                    holds=False,
                    witness=DistinctValuesWitness(
                        omega=omega,
                        config_a=seen[values],
                        config_b=config,
                        values=ordered,
                    ),
                    configurations=len(configs),
                )
            seen[values] = config
    return DistinctValuesReport(holds=True, witness=None, configurations=len(configs))


@dataclass(frozen=True)
class ConditionalWitness:
    hi: FamilyAssignment
    lo: FamilyAssignment
    omega: int
    latency_hi: ExtendedDate
    latency_lo: ExtendedDate
    values: tuple[Value, ...]


@dataclass(frozen=True)
class ConditionalReport:
    outcome: str  # "conditionally_monotonic" | "non_monotonic" | "undecided"
    path: str  # "distinct_values" | "brute_force"
    grid_relative: bool
    witness: ConditionalWitness | None
    note: str = ""


def conditional_monotony_check(
    pre: PreOrchNet,
    tie_break: str = "lex",
    force_brute: bool = False,
    eval_cap: int = 1_000_000,
) -> ConditionalReport:
    """Monotony restricted to member pairs delivering equal value sets.

    Fast path: if distinct maximal configurations always deliver distinct
    value sets, equal deliveries force equal configurations, and within one
    configuration latency is a monotone max-plus expression, so conditional
    monotony holds outright (not merely over the grid).  Otherwise the
    definition is brute-forced over the grid.
    """
    baseline = pre.baseline()
    try:
        distinct = check_distinct_values(baseline)
    except CapExceededError as exc:
        return ConditionalReport(
            outcome="undecided", path="distinct_values", grid_relative=False,
            witness=None, note=str(exc),
        )
    if distinct.holds and not force_brute:
        return ConditionalReport(
            outcome="conditionally_monotonic",
            path="distinct_values",
            grid_relative=False,
            witness=None,
        )

    members = pre.assignments()
    budget = {"left": eval_cap}
    memo: dict[tuple[int, int], EndToEnd] = {}

    def result_of(idx: int, omega: int) -> EndToEnd:
        key = (idx, omega)
        if key not in memo:
            if budget["left"] <= 0:
                raise CapExceededError(f"conditional check exceeded evaluation cap {eval_cap}")
            budget["left"] -= 1
            memo[key] = end_to_end(pre.instantiate(members[idx]), omega, tie_break)
        return memo[key]

    try:
        for hi_idx in range(len(members)):
            for lo_idx in range(len(members)):
                if hi_idx == lo_idx or not members[hi_idx].dominates(members[lo_idx]):
                    continue
                for omega in range(pre.omega_count):
                    hi_res = result_of(hi_idx, omega)
                    lo_res = result_of(lo_idx, omega)
                    if hi_res.values == lo_res.values and hi_res.latency < lo_res.latency:
                        return ConditionalReport(
                            outcome="non_monotonic",
                            path="brute_force",
                            grid_relative=True,
                            witness=ConditionalWitness(
                                hi=members[hi_idx],
                                lo=members[lo_idx],
                                omega=omega,
                                latency_hi=hi_res.latency,
                                latency_lo=lo_res.latency,
                                values=tuple(sorted(hi_res.values, key=str)),
                            ),
                        )
    except CapExceededError as exc:
        return ConditionalReport(
            outcome="undecided", path="brute_force", grid_relative=True,
            witness=None, note=str(exc),
        )
    return ConditionalReport(
        outcome="conditionally_monotonic",
        path="brute_force",
        grid_relative=True,
        witness=None,
    )
