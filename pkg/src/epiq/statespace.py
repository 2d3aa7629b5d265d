"""Finite epistemic state spaces.

An exact state assigns one value to every (object, attribute) slot of a
registry.  Knowledge is represented by the set of exact states it does not
exclude; the measure on such sets is plain cardinality, which satisfies the
required axioms (nonnegative, additive over disjoint unions, 1 on singletons)
at the finite scale this library targets.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional, Sequence


class ContradictionError(ValueError):
    """Raised when combined knowledge excludes every exact state."""


class VoidStateError(ValueError):
    """Raised when an operation is applied to an empty state set."""


class AttributeKind(str, Enum):
    ORDERED = "ordered"
    DIRECTED = "directed"
    BINARY = "binary"
    CIRCULAR = "circular"


@dataclass(frozen=True)
class AttributeDef:
    """A named attribute with a finite value set.

    For ordered/directed kinds the tuple order carries the betweenness and
    succession structure; for binary and circular kinds it is arbitrary
    (circular values are understood cyclically).
    """

    id: str
    kind: AttributeKind
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "kind", AttributeKind(self.kind))
        object.__setattr__(self, "values", tuple(self.values))
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"attribute {self.id}: duplicate values")
        if self.kind is AttributeKind.BINARY and len(self.values) != 2:
            raise ValueError(f"attribute {self.id}: binary kind needs exactly 2 values")
        if self.kind is AttributeKind.CIRCULAR and len(self.values) < 3:
            raise ValueError(f"attribute {self.id}: circular kind needs >= 3 values")
        if self.kind in (AttributeKind.ORDERED, AttributeKind.DIRECTED) and len(self.values) < 2:
            raise ValueError(f"attribute {self.id}: ordered kind needs >= 2 values")

    def index(self, value) -> int:
        return self.values.index(value)

    def between(self, a, b, c) -> bool:
        """True if b lies between a and c.

        Ordered/directed: positional.  Circular: always true for distinct
        triples (every value lies on some arc between the other two).
        Binary: undefined.
        """
        if len({a, b, c}) != 3:
            raise ValueError("betweenness needs three different values")
        if self.kind is AttributeKind.BINARY:
            raise ValueError(f"attribute {self.id}: betweenness undefined for binary kind")
        if self.kind is AttributeKind.CIRCULAR:
            return True
        ia, ib, ic = self.index(a), self.index(b), self.index(c)
        return min(ia, ic) < ib < max(ia, ic)

    def succeeds(self, a, b) -> bool:
        """True if b succeeds a (directed attributes only)."""
        if self.kind is not AttributeKind.DIRECTED:
            raise ValueError(f"attribute {self.id}: succession defined only for directed kind")
        return self.index(b) > self.index(a)


@dataclass(frozen=True)
class ObjectRegistry:
    """Immutable table of objects and their attributes.

    ``objects`` maps each object id to the tuple of attribute ids it carries;
    the slot list (object, attribute) is the domain of every exact state.
    """

    attributes: tuple
    objects: tuple  # of (object_id, tuple_of_attribute_ids)

    @staticmethod
    def build(attributes: Sequence[AttributeDef], objects: dict) -> "ObjectRegistry":
        attrs = tuple(attributes)
        ids = [a.id for a in attrs]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate attribute ids")
        table = dict(zip(ids, attrs))
        objs = []
        for oid, attr_ids in objects.items():
            attr_ids = tuple(attr_ids)
            if len(set(attr_ids)) != len(attr_ids):
                raise ValueError(f"object {oid}: duplicate attribute")
            for aid in attr_ids:
                if aid not in table:
                    raise ValueError(f"object {oid}: unknown attribute {aid}")
            objs.append((oid, attr_ids))
        return ObjectRegistry(attributes=attrs, objects=tuple(objs))

    @property
    def attribute_table(self) -> dict:
        return {a.id: a for a in self.attributes}

    def slots(self) -> tuple:
        return tuple((oid, aid) for oid, attr_ids in self.objects for aid in attr_ids)

    def slot_values(self) -> tuple:
        table = self.attribute_table
        return tuple(table[aid].values for _, aid in self.slots())


@dataclass(frozen=True)
class ExactState:
    """One complete value assignment over a registry (a point of state space)."""

    registry: ObjectRegistry
    values: tuple

    def __post_init__(self):
        slots = self.registry.slots()
        if len(self.values) != len(slots):
            raise ValueError("assignment is not total")
        for (oid, aid), v, legal in zip(slots, self.values, self.registry.slot_values()):
            if v not in legal:
                raise ValueError(f"illegal value {v!r} for ({oid}, {aid})")

    def value(self, object_id: str, attribute_id: str):
        return self.values[self.registry.slots().index((object_id, attribute_id))]

    def assignment(self) -> dict:
        return dict(zip(self.registry.slots(), self.values))


@dataclass(frozen=True)
class EpistemicState:
    """A nonempty finite set of exact states over one registry.

    ``physical`` marks states meant to model actual incomplete knowledge,
    which always leaves more than one exact state open.  Scratch values
    produced by intersections may legitimately be singletons.
    """

    registry: ObjectRegistry
    members: frozenset
    physical: bool = False

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        if not self.members:
            raise VoidStateError("void state has no volume meaning")
        if self.physical and len(self.members) < 2:
            raise ValueError("a physical state must leave at least two exact states open")
        for z in self.members:
            if z.registry != self.registry:
                raise ValueError("member from a different registry")

    def __len__(self):
        return len(self.members)

    def __contains__(self, z: ExactState):
        return z in self.members

    def issubset(self, other: "EpistemicState") -> bool:
        return self.members <= other.members


def all_exact_states(registry: ObjectRegistry) -> Iterator[ExactState]:
    """Enumerate the full state space of a registry."""
    for combo in itertools.product(*registry.slot_values()):
        yield ExactState(registry, combo)


def full_state(registry: ObjectRegistry) -> EpistemicState:
    return EpistemicState(registry, frozenset(all_exact_states(registry)), physical=True)


def state_slice(state: EpistemicState, object_id: str, attribute_id: str, value) -> EpistemicState:
    """The members of ``state`` whose (object, attribute) slot has ``value``."""
    idx = state.registry.slots().index((object_id, attribute_id))
    members = frozenset(z for z in state.members if z.values[idx] == value)
    if not members:
        raise VoidStateError(f"no member has {object_id}.{attribute_id} = {value!r}")
    return EpistemicState(state.registry, members)


def volume(s: EpistemicState) -> int:
    """Cardinality measure; 1 on singletons, additive over disjoint unions."""
    return len(s.members)


def relative_volume(part: EpistemicState, whole: EpistemicState) -> Fraction:
    if not part.issubset(whole):
        raise ValueError("relative volume requires part ⊆ whole")
    return Fraction(volume(part), volume(whole))


def combine(a: EpistemicState, b: EpistemicState, connective: str) -> EpistemicState:
    """Set-theoretic knowledge combination: AND, OR, or NOT (difference)."""
    if a.registry != b.registry:
        raise ValueError("states are over different registries")
    if connective == "AND":
        members = a.members & b.members
        if not members:
            raise ContradictionError("contradictory knowledge")
    elif connective == "OR":
        members = a.members | b.members
    elif connective == "NOT":
        members = a.members - b.members
        if not members:
            raise VoidStateError("difference removed every exact state")
    else:
        raise ValueError(f"unknown connective {connective!r}")
    return EpistemicState(a.registry, members)


def collective_state(subject_states: Sequence[EpistemicState]) -> EpistemicState:
    """Intersection of all subjects' states; what everyone together knows."""
    if not subject_states:
        raise ValueError("need at least one subject state")
    registry = subject_states[0].registry
    members = frozenset(subject_states[0].members)
    for s in subject_states[1:]:
        if s.registry != registry:
            raise ValueError("states are over different registries")
        members &= s.members
    if not members:
        raise ContradictionError("subjects' knowledge contradicts")
    return EpistemicState(registry, members)


def knowledge_dimension(state: EpistemicState, distinct_attributes: Sequence[int]) -> int:
    """Product over objects of the number of distinct attributes each carries."""
    if not distinct_attributes:
        raise ValueError("no objects: knowledge dimension undefined")
    dim = 1
    for n in distinct_attributes:
        if n < 1:
            raise ValueError("each object needs at least one distinct attribute")
        dim *= n
    return dim


@dataclass(frozen=True)
class PropertySpec:
    """A property: a partial valuation of exact states into labelled values.

    ``valuation`` maps an exact state to a value index or None (undefined).
    Disjointness of the value preimages is automatic for a function; label
    distinctness is enforced here.
    """

    id: str
    labels: tuple
    valuation: Callable = field(compare=False)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(float(x) for x in self.labels))
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"property {self.id}: value labels must be distinct")

    def preimage(self, j: int, within: EpistemicState) -> Optional[EpistemicState]:
        """The members of ``within`` where the property has value index j."""
        if not 0 <= j < len(self.labels):
            raise ValueError(f"property {self.id}: no value index {j}")
        members = frozenset(z for z in within.members if self.valuation(z) == j)
        if not members:
            return None
        return EpistemicState(within.registry, members)

    def defined_region(self, within: EpistemicState) -> Optional[EpistemicState]:
        members = frozenset(z for z in within.members if self.valuation(z) is not None)
        if not members:
            return None
        return EpistemicState(within.registry, members)
