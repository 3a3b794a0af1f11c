"""Greedy selection, one-swap alternative, and replacement against the naive reference."""

import random

import pytest

from qoscompose import (
    CompositionPlan,
    NormalizedQoSVector,
    Registry,
    RegistryRecord,
    ScoredService,
    Taxonomy,
    build_search_graph,
    first_alternative,
    replace_unavailable,
)
from qoscompose.composer import topological_order
from qoscompose.errors import (
    CycleDetected,
    NoAdmissibleLink,
    NoAlternative,
    NoEligibleCandidate,
    NoReplacementCandidate,
    NotSelectedService,
    UnknownTask,
)
from reference import (
    engine_inputs,
    engine_outcome,
    random_instance,
    ref_first_alternative,
    ref_replace,
    ref_select,
)

# B is a subclass of A; C stands alone
TAX = Taxonomy(frozenset(["A", "B", "C"]), frozenset([("B", "A")]))


def build(tasks, edges, cands, interfaces, taxonomy=TAX):
    """cands: task -> [(sid, utility)]; interfaces: sid -> (inputs, outputs)."""
    plan = CompositionPlan(frozenset(tasks), frozenset(edges))
    eligible = {
        t: [ScoredService(s, NormalizedQoSVector(s, {}), 1, u) for s, u in rows]
        for t, rows in cands.items()
    }
    records = [
        RegistryRecord(sid, task, {}, tuple(ins), tuple(outs))
        for task, rows in cands.items()
        for sid, _ in rows
        for ins, outs in [interfaces[sid]]
    ]
    return build_search_graph(plan, eligible, taxonomy, Registry([], records))


def test_single_task_picks_highest_utility():
    graph, composite = build(
        ["t1"],
        [],
        {"t1": [("s_low", 0.4), ("s_high", 0.9)]},
        {"s_low": ([], ["A"]), "s_high": ([], ["A"])},
    )
    assert composite.assignment == {"t1": "s_high"}
    assert composite.final_utilities["t1"] == 0.9
    assert composite.link_qualities["t1"] == 1.0


def test_exact_link_beats_higher_utility_over_subsume():
    graph, composite = build(
        ["t1", "t2"],
        [("t1", "t2")],
        {"t1": [("up", 0.9)], "t2": [("exact", 0.8), ("sub", 0.9)]},
        {"up": ([], ["A"]), "exact": (["A"], []), "sub": (["B"], [])},
    )
    # F: 0.8 * 1.0 = 0.8 versus 0.9 * 0.5 = 0.45
    assert composite.assignment["t2"] == "exact"
    assert composite.final_utilities["t2"] == 0.8
    queue = graph.queues["t2"]
    assert [(e.service_id, e.final_utility) for e in queue] == [
        ("exact", 0.8),
        ("sub", 0.9 * 0.5),
    ]


def test_queue_head_dominates_and_ties_break_by_id():
    graph, composite = build(
        ["t1"],
        [],
        {"t1": [("s_b", 0.7), ("s_a", 0.7)]},
        {"s_b": ([], ["A"]), "s_a": ([], ["A"])},
    )
    assert composite.assignment["t1"] == "s_a"
    for task, queue in graph.queues.items():
        head = queue[0]
        assert all(head.final_utility >= e.final_utility for e in queue)


def test_multi_predecessor_quality_is_the_mean():
    graph, composite = build(
        ["a", "b", "c"],
        [("a", "c"), ("b", "c")],
        {"a": [("sa", 0.9)], "b": [("sb", 0.8)], "c": [("sc", 1.0)]},
        {"sa": ([], ["A"]), "sb": ([], ["B"]), "sc": (["A"], [])},
    )
    # a->c is Exact (1.0), b->c is PlugIn (0.75)
    assert composite.link_qualities["c"] == (1.0 + 0.75) / 2
    assert composite.final_utilities["c"] == 1.0 * ((1.0 + 0.75) / 2)


def test_missing_and_empty_candidate_sets_are_rejected():
    with pytest.raises(NoEligibleCandidate):
        build(["t1"], [], {"t1": []}, {})
    with pytest.raises(NoEligibleCandidate):
        build(["t1", "t2"], [("t1", "t2")], {"t1": [("s", 0.5)]}, {"s": ([], ["A"])})


def test_all_disjoint_candidates_raise_no_admissible_link():
    with pytest.raises(NoAdmissibleLink) as exc:
        build(
            ["t1", "t2"],
            [("t1", "t2")],
            {"t1": [("up", 0.9)], "t2": [("down", 0.8)]},
            {"up": ([], ["A"]), "down": (["C"], [])},
        )
    assert exc.value.task == "t2"


def test_candidate_without_inputs_is_inadmissible_downstream():
    graph, composite = build(
        ["t1", "t2"],
        [("t1", "t2")],
        {"t1": [("up", 0.9)], "t2": [("no_in", 0.99), ("ok", 0.5)]},
        {"up": ([], ["A"]), "no_in": ([], []), "ok": (["A"], [])},
    )
    assert composite.assignment["t2"] == "ok"
    assert [e.service_id for e in graph.queues["t2"]] == ["ok"]


def test_score_is_the_product_of_final_utilities():
    graph, composite = build(
        ["t1", "t2"],
        [("t1", "t2")],
        {"t1": [("up", 0.9)], "t2": [("down", 0.8)]},
        {"up": ([], ["A"]), "down": (["A"], [])},
    )
    assert composite.score == 1.0 * 0.9 * 0.8


def test_alternative_requires_a_second_entry():
    graph, composite = build(
        ["t1", "t2"],
        [("t1", "t2")],
        {"t1": [("up", 0.9)], "t2": [("down", 0.8)]},
        {"up": ([], ["A"]), "down": (["A"], [])},
    )
    with pytest.raises(NoAlternative):
        first_alternative(graph, composite)


def test_alternative_swaps_the_smaller_drop():
    graph, composite = build(
        ["t1", "t2", "t3"],
        [],
        {
            "t1": [("x1", 0.9), ("x2", 0.8)],
            "t2": [("y1", 0.9), ("y2", 0.6)],
            "t3": [("z1", 0.5)],
        },
        {s: ([], ["A"]) for s in ["x1", "x2", "y1", "y2", "z1"]},
    )
    alt = first_alternative(graph, composite)
    assert alt.assignment == {"t1": "x2", "t2": "y1", "t3": "z1"}
    assert alt.score == 1.0 * 0.8 * 0.9 * 0.5


def test_alternative_reevaluates_downstream_links():
    graph, composite = build(
        ["t1", "t2"],
        [("t1", "t2")],
        {"t1": [("a1", 0.9), ("a2", 0.85)], "t2": [("b1", 1.0)]},
        {"a1": ([], ["A"]), "a2": ([], ["B"]), "b1": (["B"], [])},
    )
    # primary: a1 with a Subsume link into b1 (F 0.5); swapping to a2 turns the
    # link Exact, so the variant scores 0.85 * 1.0 despite the utility drop
    assert composite.assignment["t1"] == "a1"
    assert composite.final_utilities["t2"] == 0.5
    alt = first_alternative(graph, composite)
    assert alt.assignment == {"t1": "a2", "t2": "b1"}
    assert alt.final_utilities["t2"] == 1.0
    assert alt.link_qualities["t2"] == 1.0
    assert alt.score == 0.85 * 1.0


def test_replacement_averages_both_sides():
    graph, composite = build(
        ["t1", "t2", "t3"],
        [("t1", "t2"), ("t2", "t3")],
        {
            "t1": [("p", 0.9)],
            "t2": [("m1", 0.9), ("m2", 0.8)],
            "t3": [("n", 0.7)],
        },
        {
            "p": ([], ["A"]),
            "m1": (["A"], ["A"]),
            "m2": (["A"], ["B"]),
            "n": (["B"], []),
        },
    )
    assert composite.assignment["t2"] == "m1"
    plan_registry = Registry(
        [],
        [
            RegistryRecord(s, t, {}, ins, outs)
            for s, t, ins, outs in [
                ("p", "t1", (), ("A",)),
                ("m1", "t2", ("A",), ("A",)),
                ("m2", "t2", ("A",), ("B",)),
                ("n", "t3", ("B",), ()),
            ]
        ],
    )
    replaced = replace_unavailable(graph, composite, ("t2", "m1"), TAX, plan_registry)
    # prev side p->m2 is Exact (1.0), next side m2->n is Exact via B (1.0)
    assert replaced.assignment == {"t1": "p", "t2": "m2", "t3": "n"}
    assert replaced.link_qualities["t2"] == (1.0 + 1.0) / 2
    assert replaced.final_utilities["t2"] == 0.8 * 1.0
    # untouched selections keep their stored utilities
    assert replaced.final_utilities["t1"] == composite.final_utilities["t1"]
    assert replaced.final_utilities["t3"] == composite.final_utilities["t3"]


def test_replacement_at_source_uses_next_side_only():
    graph, composite = build(
        ["t1", "t2"],
        [("t1", "t2")],
        {"t1": [("p1", 0.9), ("p2", 0.6)], "t2": [("d", 0.8)]},
        {"p1": ([], ["A"]), "p2": ([], ["B"]), "d": (["B"], [])},
    )
    registry = Registry(
        [],
        [
            RegistryRecord("p1", "t1", {}, (), ("A",)),
            RegistryRecord("p2", "t1", {}, (), ("B",)),
            RegistryRecord("d", "t2", {}, ("B",), ()),
        ],
    )
    replaced = replace_unavailable(graph, composite, ("t1", "p1"), TAX, registry)
    assert replaced.assignment["t1"] == "p2"
    assert replaced.link_qualities["t1"] == 1.0  # p2->d is Exact
    assert replaced.final_utilities["t1"] == 0.6


def test_replacement_guards():
    graph, composite = build(
        ["t1"],
        [],
        {"t1": [("only", 0.9)]},
        {"only": ([], ["A"])},
    )
    registry = Registry([], [RegistryRecord("only", "t1", {}, (), ("A",))])
    with pytest.raises(NotSelectedService):
        replace_unavailable(graph, composite, ("t1", "ghost"), TAX, registry)
    with pytest.raises(UnknownTask):
        replace_unavailable(graph, composite, ("t9", "only"), TAX, registry)
    with pytest.raises(NoReplacementCandidate):
        replace_unavailable(graph, composite, ("t1", "only"), TAX, registry)


def test_topological_order_is_lexicographic_kahn():
    tasks = frozenset(["b", "a", "c", "d"])
    edges = frozenset([("a", "d"), ("b", "d")])
    assert topological_order(tasks, edges) == ["a", "b", "c", "d"]
    with pytest.raises(CycleDetected):
        topological_order(frozenset(["a", "b"]), frozenset([("a", "b"), ("b", "a")]))


def test_plan_rejects_foreign_edge_endpoints():
    with pytest.raises(UnknownTask):
        CompositionPlan(frozenset(["a"]), frozenset([("a", "b")]))
    with pytest.raises(UnknownTask):
        CompositionPlan(
            frozenset(["a", "b"]), frozenset([("a", "b")]), {("b", "a"): ()}
        )


def outcome_views(inst):
    """Run engine and reference; normalize both to comparable tuples."""
    engine, engine_err = engine_outcome(inst)
    ref = ref_select(inst)
    return engine, engine_err, ref


def test_selection_matches_reference_on_random_instances():
    rng = random.Random(2024)
    for _ in range(60):
        inst = random_instance(rng)
        engine, engine_err, ref = outcome_views(inst)
        if ref.error:
            assert engine is None, inst
            assert engine_err == (ref.error, ref.error_task), inst
            continue
        assert engine_err is None, inst
        graph, composite = engine
        assert composite.assignment == ref.assignment, inst
        assert composite.final_utilities == ref.finals, inst
        assert composite.score == ref.score, inst
        for task, queue in graph.queues.items():
            ref_rows = [
                (e.service_id, e.utility, e.final_utility, e.link_quality)
                for e in queue
            ]
            assert ref_rows == ref.queues[task], (inst, task)


def test_alternative_matches_exhaustive_one_swap_reference():
    rng = random.Random(77)
    checked = 0
    while checked < 40:
        inst = random_instance(rng)
        engine, engine_err, ref = outcome_views(inst)
        if ref.error:
            continue
        graph, composite = engine
        ref_alt = ref_first_alternative(inst, ref)
        try:
            alt = first_alternative(graph, composite)
        except NoAlternative:
            assert ref_alt.error == "no-alternative", inst
            checked += 1
            continue
        assert ref_alt.error is None, inst
        assert alt.assignment == ref_alt.assignment, inst
        assert alt.final_utilities == ref_alt.finals, inst
        assert alt.score == ref_alt.score, inst
        checked += 1


def test_replacement_matches_reference():
    rng = random.Random(309)
    checked = 0
    while checked < 40:
        inst = random_instance(rng)
        engine, engine_err, ref = outcome_views(inst)
        if ref.error:
            continue
        graph, composite = engine
        _, _, taxonomy, registry = engine_inputs(inst)
        task = rng.choice(sorted(composite.assignment))
        failed = composite.assignment[task]
        ref_new = ref_replace(inst, ref, task, failed)
        try:
            new = replace_unavailable(graph, composite, (task, failed), taxonomy, registry)
        except NoReplacementCandidate:
            assert ref_new.error == "no-replacement", inst
            checked += 1
            continue
        assert ref_new.error is None, inst
        assert new.assignment == ref_new.assignment, (inst, task)
        assert new.final_utilities == ref_new.finals, (inst, task)
        assert new.score == ref_new.score, (inst, task)
        assert new.assignment[task] != failed
        changed = {
            t for t in composite.assignment if new.assignment[t] != composite.assignment[t]
        }
        assert changed == {task}, (inst, task)
        checked += 1
