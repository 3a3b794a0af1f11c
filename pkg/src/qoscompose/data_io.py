"""File formats and synthetic data: registry CSV, plan/config JSON, taxonomy records.

Floats are written with repr so every format round-trips bit-exactly.
"""

from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import dataclass

from .cba import Classifier, ClassAssociationRule, Item, MiningConfig, TrainingInstance
from .composer import CompositionPlan
from .errors import (
    EmptyRegistry,
    EmptyTrainingSet,
    NonFiniteValue,
    ParseError,
    UnknownAttribute,
    UnknownConcept,
)
from .leveling import LevelScheme, UserRequest, default_scheme
from .ontology import Taxonomy
from .qos import Polarity, QoSAttribute


@dataclass(frozen=True)
class RegistryRecord:
    service_id: str
    task_id: str
    values: dict[str, float]
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]


@dataclass(frozen=True)
class Registry:
    schema: list[QoSAttribute]
    records: list[RegistryRecord]

    def services(self) -> dict[str, RegistryRecord]:
        return {rec.service_id: rec for rec in self.records}


@dataclass(frozen=True)
class EngineConfig:
    scheme: LevelScheme
    mining: MiningConfig
    bins: int = 4
    threshold: float = 0.25
    seed: int = 0

    def __post_init__(self) -> None:
        if self.bins < 2:
            raise ValueError("discretization needs at least 2 bins")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("eligibility threshold must lie in [0, 1]")


def default_config() -> EngineConfig:
    return EngineConfig(default_scheme(), MiningConfig())


# ---------------------------------------------------------------- registry CSV

def _parse_header(columns: list[str]) -> list[QoSAttribute]:
    if len(columns) < 5 or columns[:2] != ["service_id", "task_id"]:
        raise ParseError(
            "registry header must start with service_id,task_id and end with "
            "inputs,outputs",
            line=1,
        )
    if columns[-2:] != ["inputs", "outputs"]:
        raise ParseError("registry header must end with inputs,outputs", line=1)
    schema: list[QoSAttribute] = []
    for column in columns[2:-2]:
        name, sep, polarity = column.rpartition(":")
        if not sep or polarity not in ("+", "-") or not name:
            raise UnknownAttribute(
                f"attribute column {column!r} must look like name:+ or name:-"
            )
        schema.append(QoSAttribute(name, Polarity(polarity)))
    if not schema:
        raise ParseError("registry declares no QoS attributes", line=1)
    return schema


def _parse_concepts(text: str, line: int) -> tuple[str, ...]:
    if text == "":
        return ()
    parts = tuple(text.split(";"))
    if any(p == "" for p in parts):
        raise ParseError("empty concept in semicolon list", line=line)
    return parts


def load_registry(path: str) -> Registry:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("registry file is empty", line=1)
        schema = _parse_header(header)
        records: list[RegistryRecord] = []
        seen: set[str] = set()
        for row in reader:
            line = reader.line_num
            if len(row) != len(schema) + 4:
                raise ParseError(
                    f"expected {len(schema) + 4} columns, found {len(row)}", line=line
                )
            service_id, task_id = row[0], row[1]
            if not service_id or not task_id:
                raise ParseError("service_id and task_id must be non-empty", line=line)
            if service_id in seen:
                raise ParseError(f"duplicate service_id {service_id!r}", line=line)
            seen.add(service_id)
            values: dict[str, float] = {}
            for attr, token in zip(schema, row[2:-2]):
                try:
                    value = float(token)
                except ValueError:
                    raise ParseError(
                        f"bad numeric value {token!r} for {attr.name}", line=line
                    )
                if not math.isfinite(value):
                    raise NonFiniteValue(
                        f"line {line}: {attr.name} of {service_id!r} is {token}"
                    )
                values[attr.name] = value
            records.append(
                RegistryRecord(
                    service_id,
                    task_id,
                    values,
                    _parse_concepts(row[-2], line),
                    _parse_concepts(row[-1], line),
                )
            )
    if not records:
        raise EmptyRegistry(f"{path} declares a schema but no services")
    return Registry(schema, records)


def save_registry(registry: Registry, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["service_id", "task_id"]
            + [f"{a.name}:{a.polarity.value}" for a in registry.schema]
            + ["inputs", "outputs"]
        )
        for rec in registry.records:
            writer.writerow(
                [rec.service_id, rec.task_id]
                + [repr(rec.values[a.name]) for a in registry.schema]
                + [";".join(rec.inputs), ";".join(rec.outputs)]
            )


# -------------------------------------------------------------------- plan JSON

def _json_load(path: str) -> dict:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(str(exc), line=exc.lineno)
    if not isinstance(doc, dict):
        raise ParseError(f"{path} must hold a JSON object")
    return doc


def load_plan(path: str, taxonomy: Taxonomy | None = None) -> CompositionPlan:
    doc = _json_load(path)
    tasks = doc.get("tasks")
    edges = doc.get("edges")
    if not isinstance(tasks, list) or not all(isinstance(t, str) for t in tasks):
        raise ParseError("plan tasks must be a list of strings")
    if not isinstance(edges, list):
        raise ParseError("plan edges must be a list of [from, to] pairs")
    edge_set: set[tuple[str, str]] = set()
    for pair in edges:
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(t, str) for t in pair)
        ):
            raise ParseError(f"malformed plan edge {pair!r}")
        edge_set.add((pair[0], pair[1]))
    pairs_doc = doc.get("link_pairs", {})
    if not isinstance(pairs_doc, dict):
        raise ParseError("plan link_pairs must be an object keyed by from->to")
    link_pairs: dict[tuple[str, str], tuple[tuple[str, str], ...]] = {}
    for key, pairs in pairs_doc.items():
        left, sep, right = key.partition("->")
        if not sep or not left or not right:
            raise ParseError(f"link_pairs key {key!r} must look like from->to")
        if not isinstance(pairs, list) or not all(
            isinstance(p, list) and len(p) == 2 for p in pairs
        ):
            raise ParseError(f"link_pairs for {key!r} must be [out, in] pairs")
        if taxonomy is not None:
            for out_concept, in_concept in pairs:
                for concept in (out_concept, in_concept):
                    if concept not in taxonomy.concepts:
                        raise UnknownConcept(
                            f"link pair on {key!r} names unknown concept {concept!r}"
                        )
        link_pairs[(left, right)] = tuple((p[0], p[1]) for p in pairs)
    return CompositionPlan(frozenset(tasks), frozenset(edge_set), link_pairs)


def save_plan(plan: CompositionPlan, path: str) -> None:
    doc = {
        "tasks": sorted(plan.tasks),
        "edges": [list(e) for e in sorted(plan.edges)],
        "link_pairs": {
            f"{a}->{b}": [list(p) for p in plan.link_pairs[(a, b)]]
            for a, b in sorted(plan.link_pairs)
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


# -------------------------------------------------------------- taxonomy records

def load_taxonomy(path: str) -> Taxonomy:
    concepts: set[str] = set()
    edges: set[tuple[str, str]] = set()
    equivalences: set[tuple[str, str]] = set()
    disjointness: set[tuple[str, str]] = set()
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            kind, args = tokens[0], tokens[1:]
            if kind == "concept" and len(args) == 1:
                concepts.add(args[0])
            elif kind == "subclass" and len(args) == 2:
                edges.add((args[0], args[1]))
            elif kind == "equiv" and len(args) == 2:
                equivalences.add((args[0], args[1]))
            elif kind == "disjoint" and len(args) == 2:
                disjointness.add((args[0], args[1]))
            else:
                raise ParseError(f"unrecognized taxonomy record {line!r}", line=line_no)
    return Taxonomy(
        frozenset(concepts),
        frozenset(edges),
        frozenset(equivalences),
        frozenset(disjointness),
    )


def save_taxonomy(taxonomy: Taxonomy, path: str) -> None:
    with open(path, "w") as fh:
        for concept in sorted(taxonomy.concepts):
            fh.write(f"concept {concept}\n")
        for child, parent in sorted(taxonomy.edges):
            fh.write(f"subclass {child} {parent}\n")
        for a, b in sorted(taxonomy.equivalences):
            fh.write(f"equiv {a} {b}\n")
        for a, b in sorted(taxonomy.disjointness):
            fh.write(f"disjoint {a} {b}\n")


# ------------------------------------------------------------------- config JSON

def load_config(path: str) -> tuple[EngineConfig, UserRequest]:
    doc = _json_load(path)
    request_doc = doc.get("request")
    if not isinstance(request_doc, dict):
        raise ParseError("config must hold a request object")
    ranges_doc = request_doc.get("ranges")
    prefs_doc = request_doc.get("preferences")
    if not isinstance(ranges_doc, dict) or not ranges_doc:
        raise ParseError("request.ranges must map attributes to [lo, hi]")
    ranges: dict[str, tuple[float, float]] = {}
    for name, pair in ranges_doc.items():
        if not isinstance(pair, list) or len(pair) != 2:
            raise ParseError(f"request range for {name!r} must be [lo, hi]")
        ranges[name] = (float(pair[0]), float(pair[1]))
    if prefs_doc is None:
        prefs = {name: i + 1 for i, name in enumerate(ranges)}
    elif isinstance(prefs_doc, dict):
        prefs = {name: int(rank) for name, rank in prefs_doc.items()}
    else:
        raise ParseError("request.preferences must map attributes to ranks")
    request = UserRequest(ranges, prefs)
    levels_doc = doc.get("levels")
    if levels_doc is None:
        scheme = default_scheme()
    else:
        try:
            scheme = LevelScheme(
                int(levels_doc["n_levels"]),
                tuple(float(c) for c in levels_doc["coefficients"]),
            )
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed levels section: {exc}")
    mining_doc = doc.get("mining", {})
    if not isinstance(mining_doc, dict):
        raise ParseError("config mining section must be an object")
    mining = MiningConfig(
        min_support=float(mining_doc.get("min_support", 0.01)),
        min_confidence=float(mining_doc.get("min_confidence", 0.5)),
        max_antecedent_size=(
            int(mining_doc["max_antecedent_size"])
            if mining_doc.get("max_antecedent_size") is not None
            else None
        ),
    )
    config = EngineConfig(
        scheme,
        mining,
        bins=int(doc.get("bins", 4)),
        threshold=float(doc.get("threshold", 0.25)),
        seed=int(doc.get("seed", 0)),
    )
    return config, request


def save_config(config: EngineConfig, request: UserRequest, path: str) -> None:
    doc = {
        "request": {
            "ranges": {k: list(v) for k, v in request.ranges.items()},
            "preferences": dict(request.preferences),
        },
        "levels": {
            "n_levels": config.scheme.n_levels,
            "coefficients": list(config.scheme.coefficients),
        },
        "mining": {
            "min_support": config.mining.min_support,
            "min_confidence": config.mining.min_confidence,
            "max_antecedent_size": config.mining.max_antecedent_size,
        },
        "bins": config.bins,
        "threshold": config.threshold,
        "seed": config.seed,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


# --------------------------------------------- classifier / training-set formats

def save_classifier(classifier: Classifier, path: str) -> None:
    with open(path, "w") as fh:
        for rule in classifier.rules:
            items = ",".join(f"{it.attribute}={it.value}" for it in sorted(rule.antecedent))
            fh.write(
                f"{items} => {rule.consequent_class} "
                f"[{rule.support!r} {rule.confidence!r}]\n"
            )
        fh.write(f"DEFAULT {classifier.default_class}\n")


def load_classifier(path: str) -> Classifier:
    rules: list[ClassAssociationRule] = []
    default: str | None = None
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if default is not None:
                raise ParseError("rule after the DEFAULT line", line=line_no)
            if line.startswith("DEFAULT "):
                default = line.split(maxsplit=1)[1]
                continue
            head, sep, tail = line.partition(" => ")
            if not sep or not tail.endswith("]") or " [" not in tail:
                raise ParseError(f"malformed rule {line!r}", line=line_no)
            cls, _, stats = tail[:-1].partition(" [")
            parts = stats.split()
            if len(parts) != 2:
                raise ParseError(f"malformed rule stats {stats!r}", line=line_no)
            items = []
            for token in head.split(","):
                attr, sep2, value = token.partition("=")
                if not sep2 or not attr:
                    raise ParseError(f"malformed item {token!r}", line=line_no)
                items.append(Item(attr, value))
            try:
                supp, conf = float(parts[0]), float(parts[1])
            except ValueError:
                raise ParseError(f"malformed rule stats {stats!r}", line=line_no)
            rules.append(ClassAssociationRule(frozenset(items), cls, supp, conf))
    if default is None:
        raise ParseError("classifier file lacks a DEFAULT line")
    return Classifier(rules, default, attributes=None)


def save_training_set(data: list[TrainingInstance], path: str) -> None:
    if not data:
        raise EmptyTrainingSet("refusing to write an empty training set")
    names = sorted({it.attribute for it in data[0].items})
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names + ["class"])
        for inst in data:
            by_attr = {it.attribute: it.value for it in inst.items}
            writer.writerow([by_attr[n] for n in names] + [inst.class_label])


def load_training_set(path: str) -> list[TrainingInstance]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("training set file is empty", line=1)
        if len(header) < 2 or header[-1] != "class":
            raise ParseError("training header must end with a class column", line=1)
        names = header[:-1]
        data: list[TrainingInstance] = []
        for row in reader:
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} columns, found {len(row)}",
                    line=reader.line_num,
                )
            items = frozenset(Item(n, v) for n, v in zip(names, row[:-1]))
            data.append(TrainingInstance(items, row[-1]))
    return data


# --------------------------------------------------------------- synthetic data

# (name, polarity, lo, hi) of the generator's value ranges, shaped after public
# QoS measurement corpora; documented policy, not ground truth
SYNTHETIC_ATTRIBUTES: list[tuple[str, str, float, float]] = [
    ("response_time", "-", 37.0, 4990.0),
    ("availability", "+", 7.0, 100.0),
    ("throughput", "+", 0.1, 43.1),
    ("reliability", "+", 33.0, 89.0),
]


def _attribute_template(index: int) -> tuple[str, str, float, float]:
    name, polarity, lo, hi = SYNTHETIC_ATTRIBUTES[index % len(SYNTHETIC_ATTRIBUTES)]
    if index >= len(SYNTHETIC_ATTRIBUTES):
        name = f"{name}_{index // len(SYNTHETIC_ATTRIBUTES) + 1}"
    return name, polarity, lo, hi


def generate_synthetic(
    tasks: int, candidates_per_task: int, attributes: int, seed: int
) -> tuple[Registry, CompositionPlan, Taxonomy]:
    """Deterministic chain-plan workload of the given size.

    The taxonomy is a random tree whose first few concepts form a subclass
    chain (the backbone); service interfaces draw only backbone concepts, so
    every candidate link stays admissible and selection pressure comes from
    utilities and match depth, not accidental disjointness.
    """
    if tasks < 1 or candidates_per_task < 1 or attributes < 1:
        raise ValueError("generator sizes must all be >= 1")
    rng = random.Random(seed)
    schema = [
        QoSAttribute(name, Polarity(pol))
        for name, pol, _, _ in (_attribute_template(i) for i in range(attributes))
    ]
    width = max(2, len(str(tasks)))
    cand_width = max(2, len(str(candidates_per_task)))
    task_ids = [f"t{i + 1:0{width}d}" for i in range(tasks)]

    n_concepts = 4 * tasks
    concepts = [f"C{i + 1:03d}" for i in range(n_concepts)]
    backbone = concepts[: min(6, n_concepts)]
    edges: set[tuple[str, str]] = set()
    for child, parent in zip(backbone[1:], backbone):
        edges.add((child, parent))
    placed = list(backbone)
    for concept in concepts[len(backbone) :]:
        edges.add((concept, rng.choice(placed)))
        placed.append(concept)
    off_backbone = concepts[len(backbone) :]
    disjointness: set[tuple[str, str]] = set()
    ancestry = _tree_ancestors(concepts, edges)
    for _ in range(n_concepts // 8):
        if len(off_backbone) < 2:
            break
        a, b = rng.sample(off_backbone, 2)
        if a in ancestry[b] or b in ancestry[a]:
            continue
        disjointness.add((min(a, b), max(a, b)))
    taxonomy = Taxonomy(
        frozenset(concepts), frozenset(edges), frozenset(), frozenset(disjointness)
    )

    records: list[RegistryRecord] = []
    templates = [_attribute_template(i) for i in range(attributes)]
    for task_id in task_ids:
        for j in range(candidates_per_task):
            service_id = f"{task_id}_s{j + 1:0{cand_width}d}"
            values = {
                name: rng.uniform(lo, hi) for name, _, lo, hi in templates
            }
            inputs = tuple(rng.sample(backbone, rng.randint(1, min(2, len(backbone)))))
            outputs = tuple(rng.sample(backbone, rng.randint(1, min(2, len(backbone)))))
            records.append(RegistryRecord(service_id, task_id, values, inputs, outputs))
    registry = Registry(schema, records)

    plan_edges = frozenset(zip(task_ids, task_ids[1:]))
    by_task: dict[str, list[RegistryRecord]] = {}
    for rec in records:
        by_task.setdefault(rec.task_id, []).append(rec)
    link_pairs: dict[tuple[str, str], tuple[tuple[str, str], ...]] = {}
    for a, b in sorted(plan_edges):
        outs = sorted({o for rec in by_task[a] for o in rec.outputs})
        ins = sorted({i for rec in by_task[b] for i in rec.inputs})
        link_pairs[(a, b)] = tuple((o, i) for o in outs for i in ins)
    plan = CompositionPlan(frozenset(task_ids), plan_edges, link_pairs)
    return registry, plan, taxonomy


def _tree_ancestors(
    concepts: list[str], edges: set[tuple[str, str]]
) -> dict[str, set[str]]:
    parents = {child: parent for child, parent in edges}
    out: dict[str, set[str]] = {}
    for concept in concepts:
        seen = {concept}
        cur = concept
        while cur in parents:
            cur = parents[cur]
            seen.add(cur)
        out[concept] = seen
    return out


def default_request(schema: list[QoSAttribute]) -> UserRequest:
    """Request asking for the better half of each synthetic attribute's range."""
    ranges: dict[str, tuple[float, float]] = {}
    for i, attr in enumerate(schema):
        name, _, lo, hi = _attribute_template(i)
        if name != attr.name:
            raise UnknownAttribute(
                f"no synthetic value range is defined for {attr.name!r}"
            )
        mid = (lo + hi) / 2
        if attr.polarity is Polarity.NEGATIVE:
            ranges[attr.name] = (lo, mid)
        else:
            ranges[attr.name] = (mid, hi)
    prefs = {attr.name: i + 1 for i, attr in enumerate(schema)}
    return UserRequest(ranges, prefs)
