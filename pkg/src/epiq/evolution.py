"""Evolution of epistemic states and the alternatives machinery.

The evolution rule is stored per exact state; the action on a set is the
union of member images, so set-theoretic linearity holds by construction.
The contracts the rule must honour (a state never overlaps its own future,
overlaps are preserved both ways) are checked at application time on the
states a scenario actually exercises.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .statespace import EpistemicState, ExactState, PropertySpec, relative_volume


class EvolutionContractError(ValueError):
    """Raised when a rule violates a checked evolution contract."""


class Knowability(IntEnum):
    """How the truth of an alternative relates to future knowledge.

    NEVER: it will never become known which alternative is true.
    CONTINGENT: it may become known, depending on later events.
    DECIDED: it will become known at a predefined moment of decision.
    """

    NEVER = 1
    CONTINGENT = 2
    DECIDED = 3


@dataclass(frozen=True)
class EvolutionRule:
    images: Mapping  # ExactState -> frozenset of ExactState

    def __post_init__(self):
        for z, img in self.images.items():
            if not img:
                raise ValueError("every exact state needs a nonempty image")

    def image_of(self, z: ExactState) -> frozenset:
        try:
            return self.images[z]
        except KeyError:
            raise ValueError("exact state outside the rule's domain") from None

    def __hash__(self):
        return hash(id(self.images))


def evolve(s: EpistemicState, rule: EvolutionRule,
           tracked_pairs: Sequence[EpistemicState] = ()) -> EpistemicState:
    """Apply the rule to a state: union of member images.

    Raises if the result overlaps ``s`` itself (a physical state must change),
    or if overlap with any tracked companion state is created or destroyed.
    """
    members = frozenset().union(*(rule.image_of(z) for z in s.members))
    out = EpistemicState(s.registry, members)
    if s.physical and (s.members & members):
        raise EvolutionContractError("state overlaps its own future")
    for other in tracked_pairs:
        before = bool(s.members & other.members)
        other_out = frozenset().union(*(rule.image_of(z) for z in other.members))
        after = bool(members & other_out)
        if before != after:
            raise EvolutionContractError("evolution not subjectively invertible")
    return out


@dataclass(frozen=True)
class FutureAlternative:
    """The part of a parent object state that leads to one property value."""

    region: EpistemicState
    property_id: str
    value_index: int
    level: Knowability

    def __post_init__(self):
        object.__setattr__(self, "level", Knowability(self.level))


@dataclass(frozen=True)
class CompleteAlternativeSet:
    parent: EpistemicState
    alternatives: tuple

    def __post_init__(self):
        alts = tuple(self.alternatives)
        object.__setattr__(self, "alternatives", alts)
        if len(alts) < 2:
            raise ValueError("no genuine alternatives")
        covered = set()
        for alt in alts:
            if not alt.region.issubset(self.parent):
                raise ValueError("alternative region outside parent state")
            if covered & alt.region.members:
                raise ValueError("alternatives not mutually exclusive")
            covered |= alt.region.members
        if covered != self.parent.members:
            raise ValueError("alternative set incomplete")
        for alt in alts:
            if alt.region.members == self.parent.members:
                raise ValueError("alternative must be a strict subset of its parent")


def make_alternatives(parent: EpistemicState, p: PropertySpec,
                      future_preimages: Mapping[int, EpistemicState],
                      levels: Mapping[int, Knowability]) -> CompleteAlternativeSet:
    """Cut the parent state along caller-supplied future value regions."""
    alts = []
    for j, region in sorted(future_preimages.items()):
        cut = parent.members & region.members
        if not cut:
            continue
        alts.append(FutureAlternative(
            region=EpistemicState(parent.registry, cut),
            property_id=p.id,
            value_index=j,
            level=Knowability(levels[j]),
        ))
    return CompleteAlternativeSet(parent=parent, alternatives=tuple(alts))


def probability(alt: FutureAlternative, parent: EpistemicState) -> Fraction:
    """Relative volume of a decided alternative within its parent."""
    if alt.level is not Knowability.DECIDED:
        raise ValueError("probability undefined at this knowability level")
    return relative_volume(alt.region, parent)


@dataclass(frozen=True)
class InvarianceReport:
    steps: int
    ratios: tuple  # per-alternative relative volumes, constant across steps
    max_deviation: Fraction


def check_invariance(parent: EpistemicState, altset: CompleteAlternativeSet,
                     rule: EvolutionRule, steps: int) -> InvarianceReport:
    """Verify relative volumes stay fixed while parent and alternatives evolve."""
    if steps < 1:
        raise ValueError("steps must be positive")
    initial = tuple(relative_volume(a.region, parent) for a in altset.alternatives)
    cur_parent = parent
    cur_regions = [a.region for a in altset.alternatives]
    max_dev = Fraction(0)
    for _ in range(steps):
        cur_parent = EpistemicState(
            cur_parent.registry,
            frozenset().union(*(rule.image_of(z) for z in cur_parent.members)))
        cur_regions = [
            EpistemicState(r.registry,
                           frozenset().union(*(rule.image_of(z) for z in r.members)))
            for r in cur_regions]
        for r0, region in zip(initial, cur_regions):
            dev = abs(relative_volume(region, cur_parent) - r0)
            max_dev = max(max_dev, dev)
    if max_dev != 0:
        raise EvolutionContractError("evolution rule breaks volume invariance")
    return InvarianceReport(steps=steps, ratios=initial, max_deviation=max_dev)


def borel_trial(probabilities: Sequence[float], n: int, seed: int,
                streams: int = 1) -> np.ndarray:
    """Empirical outcome frequencies of n seeded draws.

    Uses the counter-based Philox generator; parallel sub-streams are derived
    by index and merged deterministically, so the result depends only on
    (probabilities, n, seed, streams).
    """
    p = np.asarray([float(x) for x in probabilities], dtype=float)
    if abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("probabilities must sum to one")
    if n < 1:
        raise ValueError("need at least one draw")
    counts = np.zeros(len(p), dtype=np.int64)
    sizes = [n // streams + (1 if i < n % streams else 0) for i in range(streams)]
    for i, size in enumerate(sizes):
        if size == 0:
            continue
        rng = np.random.Generator(np.random.Philox(key=seed, counter=[i, 0, 0, 0]))
        draws = rng.choice(len(p), size=size, p=p)
        counts += np.bincount(draws, minlength=len(p))
    return counts / n
