"""Manipulation operators that turn factual event tuples into foils.

Three methods are supported: temporal (exchange the timestamps of two
events), neighborhood (exchange same-type attributes between a tuple's
subject and object), and counterfactual (replace one slot's value with a
same-fine-type candidate that is false within the video). Temporal and
neighborhood swaps are involutions; counterfactual substitution is seeded
and reproducible.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, replace
from typing import Any, Iterable, Mapping, Sequence

from .errors import (
    EmptyPool,
    IdenticalKeys,
    MalformedDocument,
    NoObservableChange,
    NotApplicable,
    SameTimestamp,
    SlotAbsent,
    SubjectMismatch,
    TypeMismatch,
    UnknownType,
)
from .profiles import DatasetProfile, ManipulationCategory
from .scene_graph import (
    AttributeValue,
    EntityRef,
    EventTuple,
    PredicateValue,
    SceneGraph,
    TimeInterval,
)

SLOT_PREDICATE = "predicate"
SLOT_SUBJECT_ATTRIBUTE = "subject_attribute"
SLOT_OBJECT_ATTRIBUTE = "object_attribute"


@dataclass(frozen=True)
class AttributeObservation:
    """One attribute seen on one entity during one interval."""

    subject: EntityRef
    attribute: AttributeValue
    time: TimeInterval


@dataclass(frozen=True)
class CandidatePool:
    """Vocabulary slice a counterfactual value may be drawn from."""

    fine_type: str
    values: tuple[str, ...]
    exclusions: frozenset[str]

    def usable(self, incumbent: str | None = None) -> tuple[str, ...]:
        """Candidates left after exclusions; the incumbent never qualifies."""
        return tuple(
            v for v in self.values if v not in self.exclusions and v != incumbent
        )


@dataclass(frozen=True)
class SlotRef:
    """Points at one substitutable slot inside one tuple."""

    tuple_id: str
    kind: str
    attr_index: int | None = None


@dataclass(frozen=True)
class ManipulationRecord:
    """Provenance-carrying result of applying one operator at one site."""

    record_id: str
    category: ManipulationCategory
    video_id: str
    source_tuple_ids: tuple[str, ...]
    original: tuple[EventTuple, ...]
    manipulated: tuple[EventTuple, ...]
    seed: int
    pool_size: int | None = None

    def __post_init__(self) -> None:
        if len(self.original) != len(self.manipulated):
            raise MalformedDocument("original/manipulated tuple counts differ")
        for orig, manip in zip(self.original, self.manipulated):
            if orig == manip:
                raise MalformedDocument(
                    f"record {self.record_id!r}: manipulation left a tuple unchanged"
                )


# --- the three swap operators -------------------------------------------------


def temporal_predicate_swap(
    e1: EventTuple, e2: EventTuple
) -> tuple[EventTuple, EventTuple]:
    """Exchange the timestamps of two predicate events of one fine type.

    Applying the swap to its own output restores the original tuples.
    """
    if e1.predicate is None or e2.predicate is None:
        raise TypeMismatch("both tuples must carry a predicate")
    if e1.predicate.pred_type != e2.predicate.pred_type:
        raise TypeMismatch(
            f"predicate types differ: {e1.predicate.pred_type} vs {e2.predicate.pred_type}"
        )
    if e1.time == e2.time:
        raise SameTimestamp(f"both events span {e1.time}")
    if e1.key == e2.key:
        raise IdenticalKeys("tuples share one key; swapping their times changes nothing")
    return replace(e1, time=e2.time), replace(e2, time=e1.time)


def temporal_attribute_swap(
    o1: AttributeObservation, o2: AttributeObservation
) -> tuple[AttributeObservation, AttributeObservation]:
    """Exchange two attribute values of one entity across their intervals."""
    if o1.subject != o2.subject:
        raise SubjectMismatch(
            f"observations belong to {o1.subject.entity_id!r} and {o2.subject.entity_id!r}"
        )
    if o1.attribute.attr_type != o2.attribute.attr_type:
        raise TypeMismatch(
            f"attribute types differ: {o1.attribute.attr_type} vs {o2.attribute.attr_type}"
        )
    if o1.attribute.value == o2.attribute.value:
        raise NoObservableChange(f"both observations read {o1.attribute.value!r}")
    if o1.time == o2.time:
        raise SameTimestamp(f"both observations span {o1.time}")
    return (
        replace(o1, attribute=o2.attribute),
        replace(o2, attribute=o1.attribute),
    )


def _neighborhood_pairs(
    e: EventTuple, attr_type: str | None
) -> tuple[list[tuple[str, str, str, int, int]], bool]:
    """All (type, subject value, object value, subject idx, object idx) pairs.

    Second return flags whether any same-type pair exists at all, regardless
    of value equality.
    """
    pairs = []
    any_shared = False
    for si, sa in enumerate(e.subject_attrs):
        for oi, oa in enumerate(e.object_attrs):
            if sa.attr_type != oa.attr_type:
                continue
            if attr_type is not None and sa.attr_type != attr_type:
                continue
            any_shared = True
            if sa.value != oa.value:
                pairs.append((sa.attr_type, sa.value, oa.value, si, oi))
    return pairs, any_shared


def neighborhood_attribute_swap(
    e: EventTuple, attr_type: str | None = None
) -> EventTuple:
    """Exchange one same-type attribute pair between subject and object.

    When several pairs qualify, the first in (attr_type, subject value,
    object value) order is swapped; the choice is unambiguous whenever each
    entity carries at most one attribute per type, which also makes the
    operator an involution on that domain.
    """
    if e.object is None:
        raise NotApplicable(f"tuple {e.tuple_id!r} has no object")
    pairs, any_shared = _neighborhood_pairs(e, attr_type)
    if not any_shared:
        raise NotApplicable(
            f"tuple {e.tuple_id!r} has no shared-type subject/object attribute pair"
        )
    if not pairs:
        raise NoObservableChange(
            f"tuple {e.tuple_id!r}: all shared-type attribute pairs hold equal values"
        )
    kind, s_val, o_val, si, oi = min(pairs)
    subject_attrs = list(e.subject_attrs)
    object_attrs = list(e.object_attrs)
    subject_attrs[si] = AttributeValue(value=o_val, attr_type=kind)
    object_attrs[oi] = AttributeValue(value=s_val, attr_type=kind)
    return replace(
        e, subject_attrs=tuple(subject_attrs), object_attrs=tuple(object_attrs)
    )


# --- counterfactual substitution ---------------------------------------------


def _resolve_slot(
    e: EventTuple, kind: str, fine_type: str, attr_index: int | None
) -> tuple[str, int | None]:
    """Locate the slot's incumbent value; returns (value, attr index or None)."""
    if kind == SLOT_PREDICATE:
        if e.predicate is None or e.predicate.pred_type != fine_type:
            raise SlotAbsent(
                f"tuple {e.tuple_id!r} has no {fine_type} predicate"
            )
        return e.predicate.value, None
    if kind == SLOT_SUBJECT_ATTRIBUTE:
        attrs = e.subject_attrs
    elif kind == SLOT_OBJECT_ATTRIBUTE:
        attrs = e.object_attrs
    else:
        raise SlotAbsent(f"unknown slot kind {kind!r}")
    if attr_index is None:
        for idx, attr in enumerate(attrs):
            if attr.attr_type == fine_type:
                return attr.value, idx
        raise SlotAbsent(f"tuple {e.tuple_id!r} has no {fine_type} {kind}")
    if attr_index >= len(attrs) or attrs[attr_index].attr_type != fine_type:
        raise SlotAbsent(
            f"tuple {e.tuple_id!r} has no {fine_type} {kind} at index {attr_index}"
        )
    return attrs[attr_index].value, attr_index


def counterfactual_substitute(
    e: EventTuple,
    slot: str,
    pool: CandidatePool,
    rng: random.Random,
    attr_index: int | None = None,
) -> EventTuple:
    """Replace one slot's value with a uniformly sampled pool candidate.

    The incumbent value never qualifies, so the result always differs from
    the input at the substituted slot. Deterministic given the rng state.
    """
    incumbent, idx = _resolve_slot(e, slot, pool.fine_type, attr_index)
    usable = pool.usable(incumbent)
    if not usable:
        raise EmptyPool(
            f"no usable {pool.fine_type} candidate for tuple {e.tuple_id!r}"
        )
    choice = rng.choice(usable)
    if slot == SLOT_PREDICATE:
        return replace(
            e, predicate=PredicateValue(value=choice, pred_type=pool.fine_type)
        )
    attrs = list(e.subject_attrs if slot == SLOT_SUBJECT_ATTRIBUTE else e.object_attrs)
    attrs[idx] = AttributeValue(value=choice, attr_type=pool.fine_type)
    if slot == SLOT_SUBJECT_ATTRIBUTE:
        return replace(e, subject_attrs=tuple(attrs))
    return replace(e, object_attrs=tuple(attrs))


def _truthful_attribute_values(
    graph: SceneGraph, entity_id: str, attr_type: str
) -> set[str]:
    """Every attr_type value the graph attributes to the entity, in any role."""
    values: set[str] = set()
    for tup in graph.tuples:
        if tup.subject.entity_id == entity_id:
            values.update(
                a.value for a in tup.subject_attrs if a.attr_type == attr_type
            )
        if tup.object is not None and tup.object.entity_id == entity_id:
            values.update(
                a.value for a in tup.object_attrs if a.attr_type == attr_type
            )
    return values


def _truthful_predicate_values(
    graph: SceneGraph, subject_id: str, pred_type: str
) -> set[str]:
    """Every pred_type value the graph asserts for the subject entity."""
    return {
        tup.predicate.value
        for tup in graph.tuples
        if tup.subject.entity_id == subject_id
        and tup.predicate is not None
        and tup.predicate.pred_type == pred_type
    }


def build_pool(
    graph: SceneGraph,
    profile: DatasetProfile,
    slot: SlotRef,
    fine_type: str,
) -> CandidatePool:
    """Assemble the candidate pool for one slot.

    Values are the profile vocabulary of the fine type; exclusions are every
    value the graph truthfully attributes to the slot's entity, so sampled
    substitutes are false by construction within the video.
    """
    if fine_type not in profile.vocab:
        raise UnknownType(f"fine type {fine_type!r} not in profile {profile.name!r}")
    tup = next((t for t in graph.tuples if t.tuple_id == slot.tuple_id), None)
    if tup is None:
        raise SlotAbsent(f"tuple {slot.tuple_id!r} not in graph {graph.video_id!r}")
    if slot.kind == SLOT_PREDICATE:
        exclusions = _truthful_predicate_values(
            graph, tup.subject.entity_id, fine_type
        )
    elif slot.kind == SLOT_SUBJECT_ATTRIBUTE:
        exclusions = _truthful_attribute_values(
            graph, tup.subject.entity_id, fine_type
        )
    elif slot.kind == SLOT_OBJECT_ATTRIBUTE:
        if tup.object is None:
            raise SlotAbsent(f"tuple {slot.tuple_id!r} has no object")
        exclusions = _truthful_attribute_values(
            graph, tup.object.entity_id, fine_type
        )
    else:
        raise SlotAbsent(f"unknown slot kind {slot.kind!r}")
    return CandidatePool(
        fine_type=fine_type,
        values=profile.vocab[fine_type],
        exclusions=frozenset(exclusions),
    )


# --- site enumeration ----------------------------------------------------------


@dataclass(frozen=True)
class TemporalPredicateSite:
    video_id: str
    tuple_id_a: str
    tuple_id_b: str

    @property
    def sort_key(self) -> tuple:
        return (self.tuple_id_a, self.tuple_id_b)

    @property
    def source_tuple_ids(self) -> tuple[str, ...]:
        return (self.tuple_id_a, self.tuple_id_b)


@dataclass(frozen=True)
class TemporalAttributeSite:
    video_id: str
    tuple_id_a: str
    attr_index_a: int
    tuple_id_b: str
    attr_index_b: int

    @property
    def sort_key(self) -> tuple:
        return (self.tuple_id_a, self.attr_index_a, self.tuple_id_b, self.attr_index_b)

    @property
    def source_tuple_ids(self) -> tuple[str, ...]:
        return (self.tuple_id_a, self.tuple_id_b)


@dataclass(frozen=True)
class NeighborhoodSite:
    video_id: str
    tuple_id: str

    @property
    def sort_key(self) -> tuple:
        return (self.tuple_id,)

    @property
    def source_tuple_ids(self) -> tuple[str, ...]:
        return (self.tuple_id,)


@dataclass(frozen=True)
class CounterfactualSite:
    video_id: str
    tuple_id: str
    slot: str
    attr_index: int | None

    @property
    def sort_key(self) -> tuple:
        return (self.tuple_id, self.slot, -1 if self.attr_index is None else self.attr_index)

    @property
    def source_tuple_ids(self) -> tuple[str, ...]:
        return (self.tuple_id,)


Site = TemporalPredicateSite | TemporalAttributeSite | NeighborhoodSite | CounterfactualSite


def _subject_observations(
    graph: SceneGraph, fine_type: str
) -> list[tuple[str, int, EventTuple]]:
    """(tuple_id, attr index, tuple) for each subject attribute of the type."""
    found = []
    for tup in graph.tuples:
        for idx, attr in enumerate(tup.subject_attrs):
            if attr.attr_type == fine_type:
                found.append((tup.tuple_id, idx, tup))
    return found


def enumerate_candidates(
    graph: SceneGraph,
    profile: DatasetProfile,
    category: ManipulationCategory,
) -> list[Site]:
    """Exhaustively list the sites where the category's operator applies.

    The list is duplicate-free and sorted by tuple id, so it depends only on
    tuple contents, never on their order in the document.
    """
    sites: list[Site] = []
    vid = graph.video_id

    if category.method == "temporal" and category.target == "predicate":
        pred_tuples = sorted(
            (
                t
                for t in graph.tuples
                if t.predicate is not None
                and t.predicate.pred_type == category.fine_type
            ),
            key=lambda t: t.tuple_id,
        )
        for i, e1 in enumerate(pred_tuples):
            for e2 in pred_tuples[i + 1 :]:
                if e1.time != e2.time and e1.key != e2.key:
                    sites.append(TemporalPredicateSite(vid, e1.tuple_id, e2.tuple_id))

    elif category.method == "temporal" and category.target == "attribute":
        obs = sorted(
            _subject_observations(graph, category.fine_type),
            key=lambda item: (item[0], item[1]),
        )
        for i, (tid_a, idx_a, tup_a) in enumerate(obs):
            for tid_b, idx_b, tup_b in obs[i + 1 :]:
                if (
                    tup_a.subject == tup_b.subject
                    and tup_a.subject_attrs[idx_a].value
                    != tup_b.subject_attrs[idx_b].value
                    and tup_a.time != tup_b.time
                ):
                    sites.append(
                        TemporalAttributeSite(vid, tid_a, idx_a, tid_b, idx_b)
                    )

    elif category.method == "neighborhood":
        for tup in graph.tuples:
            if tup.object is None:
                continue
            pairs, _ = _neighborhood_pairs(tup, category.fine_type)
            if pairs:
                sites.append(NeighborhoodSite(vid, tup.tuple_id))

    elif category.method == "counterfactual":
        if category.target == "predicate":
            for tup in graph.tuples:
                if tup.predicate is None or tup.predicate.pred_type != category.fine_type:
                    continue
                slot = SlotRef(tup.tuple_id, SLOT_PREDICATE)
                pool = build_pool(graph, profile, slot, category.fine_type)
                if pool.usable(tup.predicate.value):
                    sites.append(
                        CounterfactualSite(vid, tup.tuple_id, SLOT_PREDICATE, None)
                    )
        else:
            for tid, idx, tup in _subject_observations(graph, category.fine_type):
                slot = SlotRef(tid, SLOT_SUBJECT_ATTRIBUTE, idx)
                pool = build_pool(graph, profile, slot, category.fine_type)
                if pool.usable(tup.subject_attrs[idx].value):
                    sites.append(
                        CounterfactualSite(vid, tid, SLOT_SUBJECT_ATTRIBUTE, idx)
                    )

    sites.sort(key=lambda s: s.sort_key)
    return sites


# --- seeded application ----------------------------------------------------------


def derive_seed(*parts: object) -> int:
    """Stable 64-bit seed from arbitrary parts (independent of PYTHONHASHSEED)."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def _time_order(tuples: Iterable[EventTuple]) -> list[EventTuple]:
    return sorted(tuples, key=lambda t: (t.time.start_s, t.time.end_s, t.tuple_id))


def apply_site(
    graph: SceneGraph,
    profile: DatasetProfile,
    category: ManipulationCategory,
    site: Site,
    rng: random.Random,
) -> tuple[tuple[EventTuple, ...], tuple[EventTuple, ...], int | None]:
    """Run the category's operator at one site.

    Returns (original tuples, manipulated tuples, pool size); the two tuple
    lists are aligned componentwise, ordered by original start time.
    """
    by_id = {t.tuple_id: t for t in graph.tuples}

    if isinstance(site, TemporalPredicateSite):
        e1, e2 = by_id[site.tuple_id_a], by_id[site.tuple_id_b]
        s1, s2 = temporal_predicate_swap(e1, e2)
        originals = _time_order([e1, e2])
        swapped = {s1.tuple_id: s1, s2.tuple_id: s2}
        return tuple(originals), tuple(swapped[t.tuple_id] for t in originals), None

    if isinstance(site, TemporalAttributeSite):
        e1, e2 = by_id[site.tuple_id_a], by_id[site.tuple_id_b]
        o1 = AttributeObservation(
            e1.subject, e1.subject_attrs[site.attr_index_a], e1.time
        )
        o2 = AttributeObservation(
            e2.subject, e2.subject_attrs[site.attr_index_b], e2.time
        )
        r1, r2 = temporal_attribute_swap(o1, o2)

        def with_attr(tup: EventTuple, idx: int, attr: AttributeValue) -> EventTuple:
            attrs = list(tup.subject_attrs)
            attrs[idx] = attr
            return replace(tup, subject_attrs=tuple(attrs))

        m1 = with_attr(e1, site.attr_index_a, r1.attribute)
        m2 = with_attr(e2, site.attr_index_b, r2.attribute)
        originals = _time_order([e1, e2])
        swapped = {m1.tuple_id: m1, m2.tuple_id: m2}
        return tuple(originals), tuple(swapped[t.tuple_id] for t in originals), None

    if isinstance(site, NeighborhoodSite):
        tup = by_id[site.tuple_id]
        manipulated = neighborhood_attribute_swap(tup, category.fine_type)
        return (tup,), (manipulated,), None

    if isinstance(site, CounterfactualSite):
        tup = by_id[site.tuple_id]
        slot = SlotRef(site.tuple_id, site.slot, site.attr_index)
        pool = build_pool(graph, profile, slot, category.fine_type)
        incumbent, _ = _resolve_slot(tup, site.slot, category.fine_type, site.attr_index)
        manipulated = counterfactual_substitute(
            tup, site.slot, pool, rng, site.attr_index
        )
        return (tup,), (manipulated,), len(pool.usable(incumbent))

    raise NotApplicable(f"unsupported site {site!r}")


def apply_corpus(
    graphs: Sequence[SceneGraph],
    profile: DatasetProfile,
    quotas: Mapping[str, int] | None,
    seed: int,
    categories: Sequence[ManipulationCategory] | None = None,
) -> list[ManipulationRecord]:
    """Apply manipulation categories across a corpus of graphs.

    By default every profile category runs. Per category, sites are
    enumerated over videos in video_id order and sampled without replacement
    up to the category's quota. Sampling uses a per-category stream derived
    from the global seed, and every record carries its own derived seed, so
    results are stable under quota changes in other categories.
    """
    quotas = dict(quotas or {})
    ordered = sorted(graphs, key=lambda g: g.video_id)
    seen_videos: set[str] = set()
    for graph in ordered:
        if graph.video_id in seen_videos:
            raise MalformedDocument(f"duplicate video_id {graph.video_id!r} in corpus")
        seen_videos.add(graph.video_id)

    records: list[ManipulationRecord] = []
    for category in (profile.category_set if categories is None else categories):
        category_seed = derive_seed(
            seed, category.method, category.target, category.fine_type
        )
        all_sites: list[tuple[SceneGraph, Site]] = []
        for graph in ordered:
            for site in enumerate_candidates(graph, profile, category):
                all_sites.append((graph, site))

        quota = quotas.get(category.key)
        if quota is None or quota >= len(all_sites):
            chosen = range(len(all_sites))
        else:
            picker = random.Random(category_seed)
            chosen = sorted(picker.sample(range(len(all_sites)), max(quota, 0)))

        for ordinal in chosen:
            graph, site = all_sites[ordinal]
            record_seed = derive_seed(category_seed, ordinal)
            original, manipulated, pool_size = apply_site(
                graph, profile, category, site, random.Random(record_seed)
            )
            records.append(
                ManipulationRecord(
                    record_id=f"{category.key}#{ordinal:04d}",
                    category=category,
                    video_id=graph.video_id,
                    source_tuple_ids=site.source_tuple_ids,
                    original=original,
                    manipulated=manipulated,
                    seed=record_seed,
                    pool_size=pool_size,
                )
            )
    return records


def apply_all(
    graph: SceneGraph,
    profile: DatasetProfile,
    quotas: Mapping[str, int] | None,
    seed: int,
) -> list[ManipulationRecord]:
    """Single-graph convenience wrapper around apply_corpus."""
    return apply_corpus([graph], profile, quotas, seed)


# --- record serialization --------------------------------------------------------


def _entity_doc(ent: EntityRef) -> dict[str, Any]:
    doc: dict[str, Any] = {"entity_id": ent.entity_id, "name": ent.name}
    if ent.entity_class is not None:
        doc["entity_class"] = ent.entity_class
    return doc


def _entity_from_doc(doc: Mapping[str, Any]) -> EntityRef:
    return EntityRef(
        entity_id=doc["entity_id"],
        name=doc["name"],
        entity_class=doc.get("entity_class"),
    )


def _tuple_doc(tup: EventTuple) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "tuple_id": tup.tuple_id,
        "subject": _entity_doc(tup.subject),
        "subject_attrs": [
            {"value": a.value, "attr_type": a.attr_type} for a in tup.subject_attrs
        ],
    }
    if tup.predicate is not None:
        doc["predicate"] = {
            "value": tup.predicate.value,
            "pred_type": tup.predicate.pred_type,
        }
    if tup.object is not None:
        doc["object"] = _entity_doc(tup.object)
    doc["object_attrs"] = [
        {"value": a.value, "attr_type": a.attr_type} for a in tup.object_attrs
    ]
    doc["time"] = {"start_s": tup.time.start_s, "end_s": tup.time.end_s}
    return doc


def _tuple_from_doc(doc: Mapping[str, Any]) -> EventTuple:
    predicate = None
    if doc.get("predicate") is not None:
        predicate = PredicateValue(
            value=doc["predicate"]["value"], pred_type=doc["predicate"]["pred_type"]
        )
    obj = _entity_from_doc(doc["object"]) if doc.get("object") is not None else None
    return EventTuple(
        tuple_id=doc["tuple_id"],
        subject=_entity_from_doc(doc["subject"]),
        subject_attrs=tuple(
            AttributeValue(value=a["value"], attr_type=a["attr_type"])
            for a in doc.get("subject_attrs", [])
        ),
        predicate=predicate,
        object=obj,
        object_attrs=tuple(
            AttributeValue(value=a["value"], attr_type=a["attr_type"])
            for a in doc.get("object_attrs", [])
        ),
        time=TimeInterval(
            start_s=doc["time"]["start_s"], end_s=doc["time"]["end_s"]
        ),
    )


def record_to_doc(record: ManipulationRecord) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "record_id": record.record_id,
        "category": record.category.key,
        "video_id": record.video_id,
        "source_tuple_ids": list(record.source_tuple_ids),
        "original": [_tuple_doc(t) for t in record.original],
        "manipulated": [_tuple_doc(t) for t in record.manipulated],
        "seed": record.seed,
    }
    if record.pool_size is not None:
        doc["pool_size"] = record.pool_size
    return doc


def record_from_doc(doc: Mapping[str, Any]) -> ManipulationRecord:
    return ManipulationRecord(
        record_id=doc["record_id"],
        category=ManipulationCategory.from_key(doc["category"]),
        video_id=doc["video_id"],
        source_tuple_ids=tuple(doc["source_tuple_ids"]),
        original=tuple(_tuple_from_doc(d) for d in doc["original"]),
        manipulated=tuple(_tuple_from_doc(d) for d in doc["manipulated"]),
        seed=doc["seed"],
        pool_size=doc.get("pool_size"),
    )


def records_to_jsonl(records: Iterable[ManipulationRecord]) -> str:
    return "".join(
        json.dumps(record_to_doc(r), ensure_ascii=False, separators=(",", ":")) + "\n"
        for r in records
    )


def records_from_jsonl(text: str) -> list[ManipulationRecord]:
    records = []
    for line in text.splitlines():
        if line.strip():
            records.append(record_from_doc(json.loads(line)))
    return records
