"""Race-policy execution: dates, stalls, ties, futures, family order."""

import random

import pytest

from orchnet import (
    DATE_INF,
    CapExceededError,
    EvaluationError,
    GuardOperand,
    GuardSpec,
    INFINITE_LATENCY,
    LatencySpec,
    NetStructureError,
    OrchNet,
    atom,
    build,
    compare_families,
    configuration_of,
    const_latency,
    const_value_fn,
    date_of,
    end_to_end,
    eval_dates,
    execute,
    execute_all,
    future,
    latency_of_prefix,
    load_corpus,
    net_from_arcs,
    per_omega_latency,
    replace_class_latency,
    unfold,
)
from orchnet.specs import LatencyExpr

from .randnets import random_workflow


def _orch(arcs, latency, omega_count=1, guard=None, initial_date=None):
    net = net_from_arcs(arcs)
    return OrchNet(
        net=net,
        latency={t: latency[t] for t in net.transitions},
        value_fn={t: const_value_fn(atom(t)) for t in net.transitions},
        initial_date=initial_date
        or {p: const_latency(0) for p in net.minimal_places},
        omega_count=omega_count,
        guard=guard or {},
    )


def _corpus_member(name):
    return build(load_corpus(name)).pre.baseline()


# ---------------------------------------------------------------------------
# Corpus regressions


def test_branch_race_scenarios():
    orch = _corpus_member("branch-race")
    first = end_to_end(orch, 0)
    assert first.latency == date_of(6)
    assert first.run.occurring & orch.net.transitions == {"a", "c"}
    second = end_to_end(orch, 1)
    assert second.latency == date_of(8)
    assert second.run.occurring & orch.net.transitions == {"b", "d"}


def test_overlap_cluster_scenarios():
    orch = _corpus_member("overlap-cluster")
    assert end_to_end(orch, 0).latency == date_of(6)
    run = execute(orch, 1)
    assert run.occurring & orch.net.transitions == {"b", "e"}
    assert end_to_end(orch, 1).latency == date_of(4)


def test_channel_grab_scenarios():
    orch = _corpus_member("channel-grab")
    assert end_to_end(orch, 0).latency == date_of(11)
    assert end_to_end(orch, 1).latency == date_of(5)


def test_omega_out_of_range_is_an_evaluation_error():
    orch = _corpus_member("branch-race")
    with pytest.raises(EvaluationError, match="omega"):
        end_to_end(orch, 2)


# ---------------------------------------------------------------------------
# Race policy: the fired transition always has a minimal finite date


def _assert_locally_optimal(run):
    for step in run.steps:
        finite = [d for _, d in step.candidates if d.is_finite]
        assert step.date == min(finite)


def test_race_fires_minimal_dates_on_corpus():
    for name in ("branch-race", "overlap-cluster", "channel-grab"):
        orch = _corpus_member(name)
        for omega in range(orch.omega_count):
            _assert_locally_optimal(execute(orch, omega))


def test_race_fires_minimal_dates_on_generated_nets():
    rng = random.Random(5)
    for k in range(15):
        gen = random_workflow(rng, size=2 + k % 4, name=f"r{k}")
        orch = gen.unfolded_pre().baseline()
        run = execute(orch, 0)
        _assert_locally_optimal(run)
        assert not run.stalled


# ---------------------------------------------------------------------------
# Dates are a fixpoint: replaying the occurring prefix reproduces the run


def test_run_dates_match_structural_evaluation():
    cases = [_corpus_member(n) for n in ("branch-race", "overlap-cluster", "channel-grab")]
    rng = random.Random(6)
    cases += [
        random_workflow(rng, size=2 + k % 4, name=f"f{k}").unfolded_pre().baseline()
        for k in range(10)
    ]
    for orch in cases:
        for omega in range(orch.omega_count):
            run = execute(orch, omega)
            ev = eval_dates(orch, omega, run.occurring)
            assert ev.dates == run.dates
            assert ev.values == run.values


def test_eval_dates_rejects_bad_prefixes():
    orch = _corpus_member("branch-race")
    with pytest.raises(NetStructureError, match="causally closed"):
        eval_dates(orch, 0, frozenset({"a"}))  # p0 missing
    with pytest.raises(NetStructureError, match="conflict"):
        eval_dates(orch, 0, frozenset({"p0", "a", "b", "p1", "p2"}))
    with pytest.raises(NetStructureError, match="unknown"):
        eval_dates(orch, 0, frozenset({"nope"}))


def test_latency_of_prefix_of_empty_prefix_is_zero():
    orch = _corpus_member("branch-race")
    assert latency_of_prefix(orch, 0, frozenset()) == date_of(0)


# ---------------------------------------------------------------------------
# Stalls


def test_unreachable_infinite_branch_stalls_the_run():
    # u can still occur (no conflict with t) but never will: E = inf
    orch = _orch(
        {"t": (("p",), ("q",)), "u": (("r",), ("s",))},
        {"t": const_latency(1), "u": INFINITE_LATENCY},
    )
    summary = end_to_end(orch, 0)
    assert summary.run.stalled
    assert summary.latency == DATE_INF
    assert "u" not in summary.run.occurring


def test_infinite_loser_of_a_race_does_not_stall():
    # u is in conflict with the fired t, so the run is complete
    orch = _orch(
        {"t": (("p",), ("q",)), "u": (("p",), ("s",))},
        {"t": const_latency(1), "u": INFINITE_LATENCY},
    )
    summary = end_to_end(orch, 0)
    assert not summary.run.stalled
    assert summary.latency == date_of(1)


def test_false_guard_behaves_like_infinite_latency():
    guard = GuardSpec(
        op="eq",
        left=GuardOperand(kind="select", index=0),
        right=GuardOperand(kind="const", const=atom("nope")),
    )
    orch = _orch(
        {"t": (("p",), ("q",)), "u": (("r",), ("s",))},
        {"t": const_latency(1), "u": const_latency(1)},
        guard={"u": guard},
    )
    summary = end_to_end(orch, 0)
    assert summary.run.stalled
    assert summary.latency == DATE_INF


def test_true_guard_lets_the_transition_fire():
    guard = GuardSpec(
        op="eq",
        left=GuardOperand(kind="select", index=0),
        right=GuardOperand(kind="const", const=atom("r")),
    )
    orch = _orch(
        {"t": (("p",), ("q",)), "u": (("r",), ("s",))},
        {"t": const_latency(1), "u": const_latency(1)},
        guard={"u": guard},
    )
    summary = end_to_end(orch, 0)
    assert not summary.run.stalled
    assert "u" in summary.run.occurring


# ---------------------------------------------------------------------------
# Ties


def test_concurrent_ties_collapse_to_one_run():
    orch = _orch(
        {"t": (("p",), ("q",)), "u": (("r",), ("s",))},
        {"t": const_latency(1), "u": const_latency(1)},
    )
    runs = execute_all(orch, 0)
    assert len(runs) == 1
    assert runs[0].tie_events  # the tie was seen, it just doesn't matter


def test_conflicting_ties_enumerate_both_outcomes():
    orch = _orch(
        {"t": (("p",), ("q",)), "u": (("p",), ("s",))},
        {"t": const_latency(1), "u": const_latency(1)},
    )
    lex = execute(orch, 0)
    assert lex.step_order == ("t",)  # lexicographic winner
    runs = execute_all(orch, 0)
    occurring = {frozenset(r.occurring & orch.net.transitions) for r in runs}
    assert occurring == {frozenset({"t"}), frozenset({"u"})}


def test_three_binary_races_give_eight_resolutions():
    arcs = {}
    latency = {}
    for i in range(3):
        arcs[f"x{i}"] = ((f"P{i}",), (f"qx{i}",))
        arcs[f"y{i}"] = ((f"P{i}",), (f"qy{i}",))
        latency[f"x{i}"] = latency[f"y{i}"] = const_latency(1)
    orch = _orch(arcs, latency)
    assert len(execute_all(orch, 0)) == 8


def test_tie_enumeration_cap():
    arcs = {}
    latency = {}
    for i in range(8):
        arcs[f"x{i}"] = ((f"P{i}",), (f"qx{i}",))
        arcs[f"y{i}"] = ((f"P{i}",), (f"qy{i}",))
        latency[f"x{i}"] = latency[f"y{i}"] = const_latency(1)
    orch = _orch(arcs, latency)
    with pytest.raises(CapExceededError):
        execute_all(orch, 0, cap=100)


# ---------------------------------------------------------------------------
# Futures: executing after a prefix matches executing from scratch


def test_future_after_prefix_matches_direct_execution():
    orch = _corpus_member("branch-race")
    kappa = configuration_of(orch.net, frozenset({"a"})) - {"p2"}
    # keep only a's own cone plus its input
    kappa = frozenset({"p0", "a", "p1"})
    remainder = future(orch, kappa, 0)
    assert remainder.net.transitions == {"c"}  # b, d are in conflict with a
    assert end_to_end(remainder, 0).latency == end_to_end(orch, 0).latency


def test_future_of_empty_prefix_is_identity():
    orch = _corpus_member("branch-race")
    assert future(orch, frozenset(), 0) is orch


def test_future_requires_postset_closure():
    orch = _corpus_member("branch-race")
    with pytest.raises(NetStructureError, match="postset"):
        future(orch, frozenset({"p0", "a"}), 0)


def test_future_marks_stalled_tokens_with_infinite_dates():
    orch = _orch(
        {"t": (("p",), ("q",)), "u": (("q",), ("s",))},
        {"t": INFINITE_LATENCY, "u": const_latency(1)},
    )
    remainder = future(orch, frozenset({"p", "t", "q"}), 0)
    assert remainder.initial_date["q"] == INFINITE_LATENCY
    assert end_to_end(remainder, 0).latency == DATE_INF


def test_staged_execution_on_generated_nets():
    rng = random.Random(9)
    for k in range(10):
        gen = random_workflow(rng, size=2 + k % 3, name=f"s{k}")
        orch = gen.unfolded_pre().baseline()
        run = execute(orch, 0)
        order = run.step_order
        cut = len(order) // 2
        kappa = configuration_of(orch.net, frozenset(order[:cut]))
        remainder = future(orch, kappa, 0)
        assert end_to_end(remainder, 0).latency == end_to_end(orch, 0).latency


# ---------------------------------------------------------------------------
# Family order


def test_compare_families_tabular():
    lo = _corpus_member("branch-race")
    assert compare_families(lo, lo).geq

    raised = OrchNet(
        net=lo.net,
        latency={**lo.latency, "c": const_latency(9)},
        value_fn=dict(lo.value_fn),
        initial_date=dict(lo.initial_date),
        omega_count=lo.omega_count,
    )
    assert compare_families(raised, lo).geq
    back = compare_families(lo, raised)
    assert not back.geq
    assert "c" in back.witness


def test_compare_families_per_omega_witness_names_the_scenario():
    lo = _orch({"t": (("p",), ("q",))}, {"t": per_omega_latency([1, 5])}, omega_count=2)
    hi = _orch({"t": (("p",), ("q",))}, {"t": per_omega_latency([2, 4])}, omega_count=2)
    verdict = compare_families(hi, lo)
    assert not verdict.geq
    assert "omega=1" in verdict.witness


def test_compare_families_on_different_nets():
    a = _orch({"t": (("p",), ("q",))}, {"t": const_latency(1)})
    b = _orch({"u": (("p",), ("q",))}, {"u": const_latency(1)})
    assert not compare_families(a, b).geq


def test_compare_families_expression_latencies():
    expr = LatencySpec(kind="expr", expr=LatencyExpr(op="input", index=0))
    same_a = _orch(
        {"t": (("p",), ("q",))},
        {"t": expr},
        initial_date={"p": const_latency(2)},
    )
    same_b = _orch(
        {"t": (("p",), ("q",))},
        {"t": expr},
        initial_date={"p": const_latency(2)},
    )
    assert compare_families(same_a, same_b).geq
    other = _orch(
        {"t": (("p",), ("q",))},
        {"t": LatencySpec(kind="expr", expr=LatencyExpr(op="const", const=date_of(3)))},
        initial_date={"p": const_latency(2)},
    )
    assert not compare_families(same_a, other).geq


# ---------------------------------------------------------------------------
# Grid families


def test_assignments_enumerate_the_grid_product():
    pre = build(load_corpus("branch-race")).pre
    members = pre.assignments()
    assert len(members) == pre.member_count() == 2
    latencies = sorted(
        str(pre.instantiate(m).latency["b"].value_at(0)) for m in members
    )
    assert latencies == ["1", "3"]


def test_baseline_keeps_declared_specs():
    pre = build(load_corpus("branch-race")).pre
    base = pre.baseline()
    assert base.latency["b"] == per_omega_latency([3, 1])


def test_dominates_is_the_componentwise_order():
    pre = build(load_corpus("choice-join")).pre
    members = pre.assignments()
    top = max(members, key=lambda m: sum(1 for _, v in m.class_values if v == date_of(5)))
    bottom = min(members, key=lambda m: sum(1 for _, v in m.class_values if v == date_of(5)))
    assert all(v == date_of(5) for _, v in top.class_values)
    assert top.dominates(bottom)
    assert not bottom.dominates(top)
    assert top.dominates(top)


def test_replace_class_latency_swaps_one_declared_spec():
    pre = build(load_corpus("branch-race")).pre
    swapped = replace_class_latency(pre, "b", INFINITE_LATENCY)
    member = swapped.baseline()
    assert member.latency["b"] == INFINITE_LATENCY
    assert member.latency["a"] == const_latency(2)


def test_instantiate_maps_grid_values_to_const_specs():
    from orchnet import FamilyAssignment

    pre = build(load_corpus("branch-race")).pre
    member = next(m for m in pre.assignments() if dict(m.class_values)["b"] == date_of(1))
    orch = pre.instantiate(member)
    assert orch.latency["b"] == const_latency(1)

    forced = FamilyAssignment(
        class_values=tuple(
            (c, DATE_INF if c == "d" else v) for c, v in member.class_values
        ),
        place_values=member.place_values,
    )
    assert pre.instantiate(forced).latency["d"] == INFINITE_LATENCY
