"""Greedy composite selection over a task DAG of priority queues.

Tasks are processed in topological order. Source-task queues rank candidates
by utility alone; every later queue ranks them by final utility
F = U * q(link), where q is the mean semantic quality of the links coming in
from the already-selected predecessor services. The composite is the chain of
queue heads; a one-swap variant and an availability-replacement rule reuse
the same queues.
"""

from __future__ import annotations

import heapq
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .cba import build_classifier, mine_cars, sort_rules
from .errors import (
    CycleDetected,
    DisjointMatch,
    EngineError,
    NoAdmissibleLink,
    NoAlternative,
    NoEligibleCandidate,
    NoReplacementCandidate,
    NoSharedParameters,
    NotSelectedService,
    UnknownTask,
)
from .leveling import (
    ScoredService,
    UserRequest,
    filter_eligible,
    score_candidates,
    synthesize_training_set,
)
from .ontology import MatchType, Taxonomy, link_quality, match_type, precompute_matches
from .qos import QoSVector, compute_extremes, normalize

if TYPE_CHECKING:
    from .data_io import EngineConfig, Registry, RegistryRecord


MATCH_LABELS: dict[MatchType, str] = {
    MatchType.EXACT: "Exact",
    MatchType.PLUGIN: "PlugIn",
    MatchType.SUBSUME: "Subsume",
    MatchType.INTERSECTION: "Intersection",
    MatchType.DISJOINT: "Disjoint",
}


@dataclass(frozen=True)
class CompositionPlan:
    tasks: frozenset[str]
    edges: frozenset[tuple[str, str]]
    # edge -> declared (out_concept, in_concept) pairs; documents the intended
    # data flow, the operative pairs come from the concrete service interfaces
    link_pairs: dict[tuple[str, str], tuple[tuple[str, str], ...]] = field(
        default_factory=dict
    )

    def __post_init__(self) -> None:
        for a, b in self.edges:
            for task in (a, b):
                if task not in self.tasks:
                    raise UnknownTask(f"edge endpoint {task!r} is not a plan task")
        for edge in self.link_pairs:
            if edge not in self.edges:
                raise UnknownTask(f"link pairs declared for non-edge {edge!r}")
        topological_order(self.tasks, self.edges)


def topological_order(
    tasks: frozenset[str], edges: frozenset[tuple[str, str]]
) -> list[str]:
    """Kahn's algorithm; ready tasks leave in lexicographic order."""
    indeg = {t: 0 for t in tasks}
    succs: dict[str, list[str]] = {t: [] for t in tasks}
    for a, b in sorted(edges):
        indeg[b] += 1
        succs[a].append(b)
    ready = [t for t in sorted(tasks) if indeg[t] == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        task = heapq.heappop(ready)
        order.append(task)
        for nxt in succs[task]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(ready, nxt)
    if len(order) != len(tasks):
        stuck = sorted(t for t in tasks if indeg[t] > 0)
        raise CycleDetected(f"plan edges form a cycle through {stuck}")
    return order


@dataclass(frozen=True)
class QueueEntry:
    service_id: str
    utility: float
    final_utility: float
    link_quality: float


@dataclass
class SearchGraph:
    order: list[str]
    # task -> entries sorted by final utility desc, service_id asc
    queues: dict[str, list[QueueEntry]]
    preds: dict[str, list[str]]
    succs: dict[str, list[str]]
    taxonomy: Taxonomy
    services: dict[str, "RegistryRecord"]


@dataclass
class CompositeService:
    assignment: dict[str, str]
    final_utilities: dict[str, float]
    link_qualities: dict[str, float]
    score: float


def _interface_pairs(
    services: dict[str, "RegistryRecord"], from_service: str, to_service: str
) -> list[tuple[str, str]]:
    """Every declared output of the upstream service against every input downstream."""
    outs = services[from_service].outputs
    ins = services[to_service].inputs
    return [(o, i) for o in outs for i in ins]


def _link_or_none(
    taxonomy: Taxonomy,
    services: dict[str, "RegistryRecord"],
    from_service: str,
    to_service: str,
) -> float | None:
    """Link quality between two concrete services, None when inadmissible."""
    pairs = _interface_pairs(services, from_service, to_service)
    try:
        return link_quality(taxonomy, from_service, to_service, pairs)
    except (DisjointMatch, NoSharedParameters):
        return None


def _score(order: list[str], final_utilities: dict[str, float]) -> float:
    score = 1.0
    for task in order:
        score *= final_utilities[task]
    return score


def build_search_graph(
    plan: CompositionPlan,
    eligible_per_task: dict[str, list[ScoredService]],
    taxonomy: Taxonomy,
    registry: "Registry",
) -> tuple[SearchGraph, CompositeService]:
    """One greedy pass in topological order; returns the graph and its head composite."""
    order = topological_order(plan.tasks, plan.edges)
    preds: dict[str, list[str]] = {t: [] for t in order}
    succs: dict[str, list[str]] = {t: [] for t in order}
    for a, b in sorted(plan.edges):
        preds[b].append(a)
        succs[a].append(b)
    services = registry.services()
    queues: dict[str, list[QueueEntry]] = {}
    selected: dict[str, str] = {}
    final_utilities: dict[str, float] = {}
    link_qualities: dict[str, float] = {}
    for task in order:
        candidates = eligible_per_task.get(task, [])
        if not candidates:
            raise NoEligibleCandidate(task)
        entries: list[QueueEntry] = []
        for cand in candidates:
            if not preds[task]:
                entries.append(QueueEntry(cand.service_id, cand.utility, cand.utility, 1.0))
                continue
            qualities: list[float] = []
            for pred in preds[task]:
                quality = _link_or_none(
                    taxonomy, services, selected[pred], cand.service_id
                )
                if quality is None:
                    break
                qualities.append(quality)
            else:
                q = sum(qualities) / len(qualities)
                entries.append(
                    QueueEntry(cand.service_id, cand.utility, cand.utility * q, q)
                )
        if not entries:
            raise NoAdmissibleLink(task)
        entries.sort(key=lambda e: (-e.final_utility, e.service_id))
        queues[task] = entries
        head = entries[0]
        selected[task] = head.service_id
        final_utilities[task] = head.final_utility
        link_qualities[task] = head.link_quality
    graph = SearchGraph(order, queues, preds, succs, taxonomy, services)
    composite = CompositeService(
        selected, final_utilities, link_qualities, _score(order, final_utilities)
    )
    return graph, composite


def first_alternative(
    graph: SearchGraph, primary: CompositeService
) -> CompositeService:
    """Best composite that swaps exactly one task to its queue's second entry.

    The swapped task's direct successors get their F re-evaluated against the
    new service; selections everywhere else stay as in the primary.
    """
    swappable = [t for t in graph.order if len(graph.queues[t]) >= 2]
    if not swappable:
        raise NoAlternative("every queue has exactly one entry")
    best: CompositeService | None = None
    best_key: tuple[float, int, str] | None = None
    for task in swappable:
        second = graph.queues[task][1]
        assignment = dict(primary.assignment)
        assignment[task] = second.service_id
        finals = dict(primary.final_utilities)
        links = dict(primary.link_qualities)
        finals[task] = second.final_utility
        links[task] = second.link_quality
        feasible = True
        for succ in graph.succs[task]:
            qualities: list[float] = []
            for pred in graph.preds[succ]:
                quality = _link_or_none(
                    graph.taxonomy, graph.services, assignment[pred], assignment[succ]
                )
                if quality is None:
                    feasible = False
                    break
                qualities.append(quality)
            if not feasible:
                break
            q = sum(qualities) / len(qualities)
            utility = next(
                e.utility
                for e in graph.queues[succ]
                if e.service_id == assignment[succ]
            )
            finals[succ] = utility * q
            links[succ] = q
        if not feasible:
            continue
        candidate = CompositeService(
            assignment, finals, links, _score(graph.order, finals)
        )
        key = (-candidate.score, graph.order.index(task), second.service_id)
        if best_key is None or key < best_key:
            best, best_key = candidate, key
    if best is None:
        raise NoAlternative("every one-swap variant breaks a semantic link")
    return best


def replace_unavailable(
    graph: SearchGraph,
    composite: CompositeService,
    failed: tuple[str, str],
    taxonomy: Taxonomy,
    registry: "Registry",
) -> CompositeService:
    """Swap out a failed selected service using two-sided neighbor link quality.

    Remaining candidates at the failed task are re-scored with
    q = mean(prev-side mean, next-side mean); a boundary node keeps its single
    side and an isolated node falls back to q = 1.
    """
    task, service_id = failed
    if task not in graph.queues:
        raise UnknownTask(f"task {task!r} is not part of the search graph")
    if composite.assignment.get(task) != service_id:
        raise NotSelectedService(
            f"{service_id!r} is not the selected service of task {task!r}"
        )
    services = registry.services()
    rescored: list[QueueEntry] = []
    for entry in graph.queues[task]:
        if entry.service_id == service_id:
            continue
        sides: list[float] = []
        admissible = True
        if graph.preds[task]:
            qualities = []
            for pred in graph.preds[task]:
                quality = _link_or_none(
                    taxonomy, services, composite.assignment[pred], entry.service_id
                )
                if quality is None:
                    admissible = False
                    break
                qualities.append(quality)
            if not admissible:
                continue
            sides.append(sum(qualities) / len(qualities))
        if graph.succs[task]:
            qualities = []
            for succ in graph.succs[task]:
                quality = _link_or_none(
                    taxonomy, services, entry.service_id, composite.assignment[succ]
                )
                if quality is None:
                    admissible = False
                    break
                qualities.append(quality)
            if not admissible:
                continue
            sides.append(sum(qualities) / len(qualities))
        q = sum(sides) / len(sides) if sides else 1.0
        rescored.append(QueueEntry(entry.service_id, entry.utility, entry.utility * q, q))
    if not rescored:
        raise NoReplacementCandidate(task)
    rescored.sort(key=lambda e: (-e.final_utility, e.service_id))
    head = rescored[0]
    assignment = dict(composite.assignment)
    finals = dict(composite.final_utilities)
    links = dict(composite.link_qualities)
    assignment[task] = head.service_id
    finals[task] = head.final_utility
    links[task] = head.link_quality
    return CompositeService(assignment, finals, links, _score(graph.order, finals))


@contextmanager
def _stage(name: str):
    """Tag engine errors with the pipeline stage that raised them."""
    try:
        yield
    except EngineError as err:
        if err.stage is None:
            err.stage = name
        raise


def _validate_registry(
    plan: CompositionPlan, registry: "Registry", taxonomy: Taxonomy
) -> None:
    for rec in registry.records:
        if rec.task_id not in plan.tasks:
            raise UnknownTask(
                f"service {rec.service_id!r} targets unknown task {rec.task_id!r}"
            )
        for concept in list(rec.inputs) + list(rec.outputs):
            taxonomy.rep(concept)


def _registry_concept_pairs(
    plan: CompositionPlan, registry: "Registry"
) -> set[tuple[str, str]]:
    by_task: dict[str, list["RegistryRecord"]] = {}
    for rec in registry.records:
        by_task.setdefault(rec.task_id, []).append(rec)
    pairs: set[tuple[str, str]] = set()
    for a, b in plan.edges:
        outs = {o for rec in by_task.get(a, []) for o in rec.outputs}
        ins = {i for rec in by_task.get(b, []) for i in rec.inputs}
        pairs |= {(o, i) for o in outs for i in ins}
    return pairs


def rank_candidates(
    request: UserRequest, registry: "Registry", config: "EngineConfig"
) -> dict[str, list[ScoredService]]:
    """Scale, level, and threshold-filter every task's candidates.

    One classifier is trained per request, over extremes taken across the
    whole registry so the synthesized demand bands cover every task; the
    candidates themselves are normalized against their own task's extremes.
    """
    schema = registry.schema
    vectors = [QoSVector(rec.service_id, dict(rec.values)) for rec in registry.records]
    with _stage("training"):
        envelope = compute_extremes(vectors)
        training = synthesize_training_set(
            request, envelope, config.scheme, config.bins, schema
        )
        rules = sort_rules(mine_cars(training, config.mining))
        classifier = build_classifier(training, rules)
    by_task: dict[str, list[QoSVector]] = {}
    for vec, rec in zip(vectors, registry.records):
        by_task.setdefault(rec.task_id, []).append(vec)
    eligible: dict[str, list[ScoredService]] = {}
    for task, cands in by_task.items():
        with _stage("scaling"):
            extremes = compute_extremes(cands)
            normalized = [normalize(c, extremes, schema) for c in cands]
        with _stage("classification"):
            scored = score_candidates(normalized, classifier, config.scheme, config.bins)
        eligible[task] = filter_eligible(scored, config.threshold)
    return eligible


def compose_with_graph(
    request: UserRequest,
    plan: CompositionPlan,
    registry: "Registry",
    taxonomy: Taxonomy,
    config: "EngineConfig",
) -> tuple[SearchGraph, CompositeService, CompositeService | None]:
    """Full pipeline, also exposing the search graph for reporting/replacement."""
    with _stage("validation"):
        _validate_registry(plan, registry, taxonomy)
    eligible = rank_candidates(request, registry, config)
    with _stage("matching"):
        precompute_matches(taxonomy, _registry_concept_pairs(plan, registry))
    with _stage("selection"):
        graph, primary = build_search_graph(plan, eligible, taxonomy, registry)
    with _stage("alternative"):
        try:
            alternative: CompositeService | None = first_alternative(graph, primary)
        except NoAlternative:
            alternative = None
    return graph, primary, alternative


def compose(
    request: UserRequest,
    plan: CompositionPlan,
    registry: "Registry",
    taxonomy: Taxonomy,
    config: "EngineConfig",
) -> tuple[CompositeService, CompositeService | None]:
    """End-to-end selection: primary composite plus best one-swap alternative (or None)."""
    _, primary, alternative = compose_with_graph(
        request, plan, registry, taxonomy, config
    )
    return primary, alternative


def composite_report(graph: SearchGraph, composite: CompositeService) -> dict:
    """JSON-ready view of a composite with stable key and task ordering."""
    tasks = []
    for task in graph.order:
        service_id = composite.assignment[task]
        entry = next(e for e in graph.queues[task] if e.service_id == service_id)
        links = []
        for pred in graph.preds[task]:
            from_service = composite.assignment[pred]
            pairs = _interface_pairs(graph.services, from_service, service_id)
            links.append(
                {
                    "from_task": pred,
                    "from_service": from_service,
                    "pairs": [
                        {
                            "out": out,
                            "in": inp,
                            "match": MATCH_LABELS[match_type(graph.taxonomy, out, inp)],
                        }
                        for out, inp in pairs
                    ],
                }
            )
        tasks.append(
            {
                "task": task,
                "service": service_id,
                "utility": entry.utility,
                "link_quality": composite.link_qualities[task],
                "final_utility": composite.final_utilities[task],
                "links": links,
            }
        )
    return {"tasks": tasks, "score": composite.score}
