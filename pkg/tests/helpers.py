"""Builders and randomized generators shared by unit and acceptance tests."""

from __future__ import annotations

import random
import string as _string

from eventprobe.manipulate import AttributeObservation
from eventprobe.profiles import DatasetProfile
from eventprobe.scene_graph import (
    AttributeValue,
    EntityRef,
    EventTuple,
    PredicateValue,
    SceneGraph,
    TimeInterval,
)

WORDS = (
    "amber", "basalt", "cedar", "drift", "ember", "fjord", "garnet", "heath",
    "iris", "jasper", "kelp", "lunar", "moss", "nectar", "onyx", "pearl",
    "quartz", "ripple", "slate", "tundra", "umber", "velvet", "wicker", "zephyr",
)


def entity(eid: str, name: str | None = None, cls: str | None = None) -> EntityRef:
    return EntityRef(entity_id=eid, name=name or eid, entity_class=cls)


def attr(value: str, attr_type: str = "Color") -> AttributeValue:
    return AttributeValue(value=value, attr_type=attr_type)


def pred(value: str, pred_type: str = "Action") -> PredicateValue:
    return PredicateValue(value=value, pred_type=pred_type)


def span(start: float, end: float | None = None) -> TimeInterval:
    return TimeInterval(start_s=start, end_s=start if end is None else end)


def make_tuple(
    tuple_id: str,
    subject: EntityRef,
    *,
    attrs: tuple[AttributeValue, ...] = (),
    predicate: PredicateValue | None = None,
    obj: EntityRef | None = None,
    obj_attrs: tuple[AttributeValue, ...] = (),
    time: TimeInterval | None = None,
) -> EventTuple:
    return EventTuple(
        tuple_id=tuple_id,
        subject=subject,
        subject_attrs=attrs,
        predicate=predicate,
        object=obj,
        object_attrs=obj_attrs,
        time=time or span(0.0, 1.0),
    )


def random_interval(rng: random.Random, horizon: float = 100.0) -> TimeInterval:
    start = round(rng.uniform(0, horizon - 1), 3)
    return TimeInterval(start_s=start, end_s=round(start + rng.uniform(0, 10), 3))


def random_predicate_pair(rng: random.Random) -> tuple[EventTuple, EventTuple]:
    """Two tuples valid for the temporal predicate swap."""
    pred_type = rng.choice(("Action", "Contact", "SpatialRelationship"))
    v1, v2 = rng.sample(WORDS, 2)
    s1, s2 = entity("e1", rng.choice(WORDS)), entity("e2", rng.choice(WORDS))
    t1 = random_interval(rng)
    t2 = random_interval(rng)
    while t2 == t1:
        t2 = random_interval(rng)
    has_obj = rng.random() < 0.5
    e1 = make_tuple(
        "ta",
        s1,
        attrs=(attr(rng.choice(WORDS)),) if rng.random() < 0.5 else (),
        predicate=pred(v1, pred_type),
        obj=entity("o1", rng.choice(WORDS)) if has_obj else None,
        time=t1,
    )
    e2 = make_tuple(
        "tb",
        s2,
        predicate=pred(v2, pred_type),
        time=t2,
    )
    return e1, e2


def random_observation_pair(
    rng: random.Random,
) -> tuple[AttributeObservation, AttributeObservation]:
    """Two observations valid for the temporal attribute swap."""
    subject = entity("e1", rng.choice(WORDS))
    attr_type = rng.choice(("Color", "Material", "Emotion"))
    v1, v2 = rng.sample(WORDS, 2)
    t1 = random_interval(rng)
    t2 = random_interval(rng)
    while t2 == t1:
        t2 = random_interval(rng)
    return (
        AttributeObservation(subject, attr(v1, attr_type), t1),
        AttributeObservation(subject, attr(v2, attr_type), t2),
    )


def random_neighborhood_tuple(rng: random.Random) -> EventTuple:
    """A tuple valid for the neighborhood swap.

    Each side carries at most one attribute per type, the domain on which
    the swap is a well-defined involution.
    """
    types = ["Color", "Material", "Emotion", "Age"]
    rng.shuffle(types)
    shared = types[0]
    v1, v2 = rng.sample(WORDS, 2)
    subject_attrs = [attr(v1, shared)]
    object_attrs = [attr(v2, shared)]
    for extra in types[1 : rng.randint(1, 3)]:
        side = rng.random()
        if side < 0.4:
            subject_attrs.append(attr(rng.choice(WORDS), extra))
        elif side < 0.8:
            object_attrs.append(attr(rng.choice(WORDS), extra))
    rng.shuffle(subject_attrs)
    rng.shuffle(object_attrs)
    return make_tuple(
        "tn",
        entity("e1", rng.choice(WORDS)),
        attrs=tuple(subject_attrs),
        predicate=pred(rng.choice(WORDS)) if rng.random() < 0.5 else None,
        obj=entity("e2", rng.choice(WORDS)),
        obj_attrs=tuple(object_attrs),
        time=random_interval(rng),
    )


def random_profile_graph(rng: random.Random, profile: DatasetProfile) -> SceneGraph:
    """A small random graph that only uses the profile's vocabulary."""
    n_entities = rng.randint(2, 5)
    entities = tuple(
        entity(f"e{i}", rng.choice(WORDS) + _string.ascii_lowercase[i])
        for i in range(n_entities)
    )
    tuples = []
    for t in range(rng.randint(1, 8)):
        subject = rng.choice(entities)
        subject_attrs = []
        for attr_type in profile.attribute_types:
            if rng.random() < 0.5:
                subject_attrs.append(attr(rng.choice(profile.vocab[attr_type]), attr_type))
        predicate = None
        obj = None
        obj_attrs: list[AttributeValue] = []
        if rng.random() < 0.7 or not subject_attrs:
            pred_type = rng.choice(profile.predicate_types)
            predicate = pred(rng.choice(profile.vocab[pred_type]), pred_type)
            if rng.random() < 0.7:
                obj = rng.choice([e for e in entities if e != subject])
                for attr_type in profile.attribute_types:
                    if rng.random() < 0.4:
                        obj_attrs.append(
                            attr(rng.choice(profile.vocab[attr_type]), attr_type)
                        )
        start = round(rng.uniform(0, 90), 2)
        tuples.append(
            EventTuple(
                tuple_id=f"t{t}",
                subject=subject,
                subject_attrs=tuple(subject_attrs),
                predicate=predicate,
                object=obj,
                object_attrs=tuple(obj_attrs),
                time=TimeInterval(start_s=start, end_s=round(start + rng.uniform(0, 9), 2)),
            )
        )
    return SceneGraph(
        video_id=f"v{rng.randrange(10**6)}",
        duration_s=100.0,
        entities=entities,
        tuples=tuple(tuples),
    )
