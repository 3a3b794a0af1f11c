"""Associative classification: Apriori rule mining plus coverage-based rule selection.

Training instances hold discrete attribute=label items. Mining enumerates
class association rules level-wise with support pruning; the classifier keeps
the high-precedence rules that still cover something and falls back to a
default class.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from math import floor

from .errors import EmptyTrainingSet, SchemaMismatch, ValueOutOfRange


@dataclass(frozen=True, order=True)
class Item:
    """One attribute=label pair."""

    attribute: str
    value: str


@dataclass(frozen=True)
class TrainingInstance:
    items: frozenset[Item]
    class_label: str


@dataclass(frozen=True)
class ClassAssociationRule:
    antecedent: frozenset[Item]
    consequent_class: str
    support: float
    confidence: float


@dataclass
class Classifier:
    rules: list[ClassAssociationRule]
    default_class: str
    # None when the schema is unknown (e.g. a deserialized classifier); then
    # predict skips the strict one-item-per-attribute check.
    attributes: tuple[str, ...] | None = None


@dataclass(frozen=True)
class MiningConfig:
    min_support: float = 0.01
    min_confidence: float = 0.5
    # None = no truncation (any antecedent up to the full attribute count)
    max_antecedent_size: int | None = None


def discretize(value: float, bins: int) -> int:
    """Equal-width bin index over [0, 1]; 1.0 clamps into the top bin."""
    if not 0.0 <= value <= 1.0:
        raise ValueOutOfRange(f"cannot discretize {value!r}, expected [0, 1]")
    return min(floor(value * bins), bins - 1)


def render_items(items: frozenset[Item]) -> str:
    return ",".join(f"{it.attribute}={it.value}" for it in sorted(items))


def instance_schema(instance: frozenset[Item]) -> frozenset[str]:
    """Attribute set of an instance; rejects duplicate attributes."""
    attrs = frozenset(it.attribute for it in instance)
    if len(attrs) != len(instance):
        raise SchemaMismatch("instance carries more than one item for an attribute")
    return attrs


def mine_cars(
    data: list[TrainingInstance], config: MiningConfig
) -> list[ClassAssociationRule]:
    """All class association rules passing the support/confidence thresholds.

    Level-wise Apriori: a (k+1)-itemset is considered for a class only when
    it extends a k-itemset frequent for that same class, which is sound
    because support is anti-monotone in the antecedent for a fixed class.
    """
    if not data:
        raise EmptyTrainingSet("cannot mine rules from an empty training set")
    n = len(data)
    schema = instance_schema(data[0].items)
    for inst in data[1:]:
        if instance_schema(inst.items) != schema:
            raise SchemaMismatch("training instances do not share one attribute schema")
    max_size = config.max_antecedent_size
    if max_size is None:
        max_size = len(schema)

    def count_level(candidates: list[tuple[Item, ...]]) -> tuple[dict, dict]:
        totals: dict[tuple[Item, ...], int] = {c: 0 for c in candidates}
        by_class: dict[tuple[tuple[Item, ...], str], int] = {}
        for inst in data:
            for cand in candidates:
                if all(it in inst.items for it in cand):
                    totals[cand] += 1
                    key = (cand, inst.class_label)
                    by_class[key] = by_class.get(key, 0) + 1
        return totals, by_class

    rules: list[ClassAssociationRule] = []
    singletons = sorted({it for inst in data for it in inst.items})
    candidates = [(it,) for it in singletons]
    # per class: frequent itemsets of the current level
    frequent: dict[str, set[tuple[Item, ...]]] = {}
    level = 1
    while candidates and level <= max_size:
        totals, by_class = count_level(candidates)
        next_frequent: dict[str, set[tuple[Item, ...]]] = {}
        for (cand, cls), hits in sorted(
            by_class.items(), key=lambda kv: (kv[0][0], kv[0][1])
        ):
            support = hits / n
            if support < config.min_support:
                continue
            next_frequent.setdefault(cls, set()).add(cand)
            confidence = hits / totals[cand]
            if confidence >= config.min_confidence:
                rules.append(
                    ClassAssociationRule(frozenset(cand), cls, support, confidence)
                )
        frequent = next_frequent
        level += 1
        if level > max_size:
            break
        seen: set[tuple[Item, ...]] = set()
        extended: list[tuple[Item, ...]] = []
        for cls in sorted(frequent):
            per_class = frequent[cls]
            # the max item of any frequent k-set already occurs in one of its
            # frequent (k-1)-subsets, so this pool loses nothing
            pool = sorted({it for items in per_class for it in items})
            for base in sorted(per_class):
                if len(base) != level - 1:
                    continue
                used = {it.attribute for it in base}
                for item in pool:
                    if item <= base[-1] or item.attribute in used:
                        continue
                    cand = base + (item,)
                    if cand in seen:
                        continue
                    subsets_ok = all(
                        cand[:i] + cand[i + 1 :] in per_class for i in range(level)
                    )
                    if not subsets_ok:
                        continue
                    seen.add(cand)
                    extended.append(cand)
        candidates = sorted(extended)
    return rules


def sort_rules(rules: list[ClassAssociationRule]) -> list[ClassAssociationRule]:
    """Precedence order: confidence desc, support desc, fewer items, then text."""
    return sorted(
        rules,
        key=lambda r: (
            -r.confidence,
            -r.support,
            len(r.antecedent),
            render_items(r.antecedent),
            r.consequent_class,
        ),
    )


def _majority(labels: list[str]) -> str:
    counts = Counter(labels)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]


def build_classifier(
    data: list[TrainingInstance], rules: list[ClassAssociationRule]
) -> Classifier:
    """Single coverage pass over precedence-sorted rules.

    A rule survives only if it correctly classifies some instance nobody
    above it covered; every instance its antecedent matches then counts as
    covered, right or wrong.
    """
    if not data:
        raise EmptyTrainingSet("cannot build a classifier without training data")
    covered = [False] * len(data)
    kept: list[ClassAssociationRule] = []
    for rule in rules:
        matched = [
            i
            for i, inst in enumerate(data)
            if not covered[i] and rule.antecedent <= inst.items
        ]
        if any(data[i].class_label == rule.consequent_class for i in matched):
            kept.append(rule)
            for i in matched:
                covered[i] = True
    uncovered = [inst.class_label for i, inst in enumerate(data) if not covered[i]]
    if not uncovered:
        uncovered = [inst.class_label for inst in data]
    schema = tuple(sorted(instance_schema(data[0].items)))
    return Classifier(kept, _majority(uncovered), schema)


def predict(classifier: Classifier, instance: frozenset[Item]) -> str:
    """Class of the first matching rule, or the default class."""
    attrs = instance_schema(instance)
    if classifier.attributes is not None and attrs != frozenset(classifier.attributes):
        raise SchemaMismatch(
            f"instance attributes {sorted(attrs)} do not match the classifier "
            f"schema {list(classifier.attributes)}"
        )
    for rule in classifier.rules:
        if rule.antecedent <= instance:
            return rule.consequent_class
    return classifier.default_class
