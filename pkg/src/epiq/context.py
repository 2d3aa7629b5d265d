"""Experimental contexts as layered networks of alternatives.

A context lists the properties observed in sequence, each with a knowability
level and a finite set of labelled values.  Complex amplitudes connect the
values of consecutive layers.  Crossing a decided (level-3) layer combines
probabilities classically; crossing a never-knowable (level-1) layer combines
amplitudes first and squares at the end, which is where interference enters.

Amplitudes may be ordinary complex numbers or exact Q(sqrt2) values
(`exactnum.ExactAmplitude`); a network whose amplitudes are all exact is
propagated without any floating-point arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence, Union

from .evolution import Knowability
from .exactnum import ExactAmplitude, Sqrt2Scalar, abs2, to_float

NORM_TOL = 1e-12

Amplitude = Union[complex, ExactAmplitude]


class ContextError(ValueError):
    pass


@dataclass(frozen=True)
class Layer:
    property_id: str
    level: Knowability
    labels: tuple  # distinct real value labels, one per alternative

    def __post_init__(self):
        object.__setattr__(self, "level", Knowability(self.level))
        object.__setattr__(self, "labels", tuple(float(x) for x in self.labels))

    @property
    def size(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class ContextNetwork:
    """Layered network: initial amplitudes feed the first layer, one complex
    matrix links each consecutive pair (entry [j][k]: value j of the earlier
    layer to value k of the later)."""

    layers: tuple
    initial: tuple
    edges: tuple  # of matrices, each a tuple of row tuples

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "initial", tuple(self.initial))
        object.__setattr__(self, "edges",
                           tuple(tuple(tuple(row) for row in m) for m in self.edges))

    @property
    def final_layer(self) -> Layer:
        return self.layers[-1]

    def is_exact(self) -> bool:
        amps = list(self.initial)
        for m in self.edges:
            for row in m:
                amps.extend(row)
        return all(isinstance(a, ExactAmplitude) for a in amps)

    def matrix(self, i: int):
        return self.edges[i]


@dataclass(frozen=True)
class ContextualState:
    """Knowledge about the specimen at one layer: either a unit amplitude
    vector over the layer's values, or a single reduced value index."""

    layer_cursor: int
    amplitudes: Optional[tuple] = None
    reduced: Optional[int] = None

    def __post_init__(self):
        if (self.amplitudes is None) == (self.reduced is None):
            raise ContextError("state is either superposed or reduced")
        if self.amplitudes is not None:
            object.__setattr__(self, "amplitudes", tuple(self.amplitudes))
            norm = _sum(abs2(a) for a in self.amplitudes)
            if abs(to_float(norm) - 1.0) > NORM_TOL:
                raise ContextError("superposed state is not normalized")


def _zero(exact: bool):
    return Sqrt2Scalar.of(0) if exact else 0.0


def _sum(items):
    total = None
    for x in items:
        total = x if total is None else total + x
    return total


def born(a: Amplitude):
    """Probability carried by one amplitude: its squared modulus."""
    return abs2(a)


def validate_context(net: ContextNetwork) -> list:
    """All structural violations of a network, as a list of messages."""
    errors = []
    if not net.layers:
        return ["network has no layers"]
    for layer in net.layers:
        if layer.size < 2:
            errors.append(f"layer {layer.property_id}: a complete set needs at least 2 alternatives")
        if len(set(layer.labels)) != len(layer.labels):
            errors.append(f"layer {layer.property_id}: value labels must be distinct")
    if net.final_layer.level is not Knowability.DECIDED:
        errors.append("final property must be decided")
    if len(net.edges) != len(net.layers) - 1:
        errors.append("need exactly one amplitude matrix per consecutive layer pair")
        return errors
    if len(net.initial) != net.layers[0].size:
        errors.append("initial amplitude vector does not match first layer")
    else:
        norm = to_float(_sum(abs2(a) for a in net.initial))
        if abs(norm - 1.0) > NORM_TOL:
            errors.append("row not normalized: initial amplitudes")
    for i, m in enumerate(net.edges):
        rows, cols = net.layers[i].size, net.layers[i + 1].size
        if len(m) != rows or any(len(row) != cols for row in m):
            errors.append(f"matrix {i}: expected shape {rows}x{cols}")
            continue
        for j, row in enumerate(m):
            norm = to_float(_sum(abs2(a) for a in row))
            if abs(norm - 1.0) > NORM_TOL:
                errors.append(f"row not normalized: matrix {i} row {j}")
    for i, layer in enumerate(net.layers[:-1]):
        if layer.level is Knowability.NEVER and net.layers[i + 1].size < layer.size:
            errors.append(f"layer {layer.property_id}: requires virtual-value padding")
    return errors


def _require_valid(net: ContextNetwork):
    errors = validate_context(net)
    if errors:
        raise ContextError("; ".join(errors))


@dataclass(frozen=True)
class Distribution:
    labels: tuple
    probabilities: tuple  # floats
    exact: Optional[tuple] = None  # Sqrt2Scalar values when propagated exactly
    rules: tuple = ()  # per crossed layer: "classical" | "amplitude"

    def total_variation(self, other: "Distribution") -> float:
        return 0.5 * sum(abs(p - q) for p, q in zip(self.probabilities, other.probabilities))


def propagate(net: ContextNetwork, start: Optional[ContextualState] = None) -> Distribution:
    """Fold the network into the outcome distribution of its final property.

    Maintains a mixture of amplitude-vector branches.  A level-3 layer splits
    every branch classically over its values; a level-1 layer carries each
    branch's amplitudes linearly through the matrix.  An unpromoted level-2
    layer is an error: consistency reduction must resolve it first.
    """
    _require_valid(net)
    exact = net.is_exact()

    if start is None:
        cursor = 0
        branches = [(_one(exact),
                     [a if exact else complex(a) for a in net.initial])]
    elif start.reduced is not None:
        cursor = start.layer_cursor
        if cursor >= len(net.layers) - 1:
            raise ContextError("nothing left to propagate")
        row = net.matrix(cursor)[start.reduced]
        return propagate(net, ContextualState(layer_cursor=cursor + 1, amplitudes=tuple(row)))
    else:
        cursor = start.layer_cursor
        exact = exact and _amps_exact(start.amplitudes)
        amps = list(start.amplitudes) if exact else [complex(a) for a in start.amplitudes]
        branches = [(_one(exact), amps)]

    def coerce(a):
        return a if exact else complex(a)

    rules = []
    crossed_level1 = False
    for i in range(cursor, len(net.layers) - 1):
        layer = net.layers[i]
        matrix = tuple(tuple(coerce(a) for a in row) for row in net.matrix(i))
        if layer.level is Knowability.DECIDED:
            rules.append("classical")
            new_branches = []
            for weight, amps in branches:
                for j, a in enumerate(amps):
                    w = weight * abs2(a)
                    if to_float(w) == 0.0:
                        continue
                    new_branches.append((w, list(matrix[j])))
            branches = new_branches
        elif layer.level is Knowability.NEVER:
            rules.append("amplitude")
            crossed_level1 = True
            new_branches = []
            for weight, amps in branches:
                out = []
                for k in range(net.layers[i + 1].size):
                    out.append(_sum(amps[j] * matrix[j][k] for j in range(len(amps))))
                new_branches.append((weight, out))
            branches = new_branches
        else:
            raise ContextError("unresolved contingent knowability")

    size = net.final_layer.size
    totals = [_zero(exact) for _ in range(size)]
    for weight, amps in branches:
        for k in range(size):
            totals[k] = totals[k] + weight * abs2(amps[k])

    probs = tuple(to_float(t) for t in totals)
    if abs(sum(probs) - 1.0) > NORM_TOL:
        if crossed_level1:
            raise ContextError("amplitude matrix violates unitarity conditions")
        raise ContextError("distribution does not normalize")
    return Distribution(
        labels=net.final_layer.labels,
        probabilities=probs,
        exact=tuple(totals) if exact else None,
        rules=tuple(rules),
    )


def _one(exact: bool):
    return Sqrt2Scalar.of(1) if exact else 1.0


def _amps_exact(amps) -> bool:
    return all(isinstance(a, ExactAmplitude) for a in amps)


def reduce_by_observation(state: ContextualState, net: ContextNetwork,
                          outcome: int) -> ContextualState:
    """Collapse a superposed state at a decided layer onto one observed value."""
    layer = net.layers[state.layer_cursor]
    if layer.level is not Knowability.DECIDED:
        raise ContextError("reduction forbidden at unknowable property")
    if state.amplitudes is None:
        raise ContextError("state is already reduced")
    if not 0 <= outcome < layer.size:
        raise ContextError(f"no value index {outcome} at layer {layer.property_id}")
    if to_float(abs2(state.amplitudes[outcome])) == 0.0:
        raise ContextError("impossible outcome")
    return ContextualState(layer_cursor=state.layer_cursor, reduced=outcome)


def reduce_by_consistency(net: ContextNetwork,
                          path_knowledge_reachable: bool) -> ContextNetwork:
    """Resolve every contingent (level-2) layer of the network.

    If path knowledge can still be gained later, Nature must decide the value
    no later than the layer boundary: the layer is promoted to level 3.  If an
    eraser guarantees the knowledge can never surface, the layer degrades to
    level 1 and amplitudes interfere.
    """
    if not any(l.level is Knowability.CONTINGENT for l in net.layers):
        raise ContextError("nothing to resolve")
    target = Knowability.DECIDED if path_knowledge_reachable else Knowability.NEVER
    new_layers = tuple(
        replace(l, level=target) if l.level is Knowability.CONTINGENT else l
        for l in net.layers)
    return replace(net, layers=new_layers)


@dataclass(frozen=True)
class PaddingResult:
    network: ContextNetwork
    layer_index: int
    virtual_value_indices: tuple  # indices in the padded later layer


def pad_virtual_values(net: ContextNetwork, layer_index: int) -> PaddingResult:
    """Extend the layer after a wider level-1 layer with virtual values.

    The later layer gains M - M' fresh labels whose amplitude columns are
    zero, so their final probability is pinned to zero and every row keeps
    its normalization.
    """
    if not 0 <= layer_index < len(net.layers) - 1:
        raise ContextError("layer index must name a non-final layer")
    layer, nxt = net.layers[layer_index], net.layers[layer_index + 1]
    if layer.level is not Knowability.NEVER:
        raise ContextError("padding applies after a level-1 layer")
    m, mp = layer.size, nxt.size
    if m <= mp:
        raise ContextError("padding unnecessary")
    extra = m - mp
    exact = net.is_exact()
    zero = ExactAmplitude.of(0) if exact else 0j
    fresh = max(nxt.labels) + 1.0
    new_labels = nxt.labels + tuple(fresh + k for k in range(extra))
    matrix = net.matrix(layer_index)
    new_matrix = tuple(row + (zero,) * extra for row in matrix)
    new_layers = list(net.layers)
    new_layers[layer_index + 1] = replace(nxt, labels=new_labels)
    new_edges = list(net.edges)
    new_edges[layer_index] = new_matrix
    if layer_index + 1 < len(net.layers) - 1:
        # rows for the virtual values of the following matrix: put all weight
        # on the first downstream value so row normalization holds; the rows
        # are unreachable (zero incoming amplitude).
        follow = list(net.edges[layer_index + 1])
        width = len(follow[0])
        one = ExactAmplitude.of(1) if exact else 1 + 0j
        for _ in range(extra):
            follow.append((one,) + (zero,) * (width - 1))
        new_edges[layer_index + 1] = tuple(follow)
    padded = ContextNetwork(layers=tuple(new_layers), initial=net.initial,
                            edges=tuple(new_edges))
    return PaddingResult(network=padded, layer_index=layer_index,
                         virtual_value_indices=tuple(range(mp, m)))


@dataclass(frozen=True)
class DistributivityReport:
    nested: tuple
    flattened: tuple
    max_deviation: float


def distributivity_check(net: ContextNetwork) -> DistributivityReport:
    """Compare nested and flattened evaluation of a decided/decided pair.

    The nested form weights each first-layer branch and sums its row; the
    flattened form enumerates (j, k) paths directly.  The two must induce the
    same joint distribution.
    """
    _require_valid(net)
    if len(net.layers) < 2:
        raise ContextError("need two consecutive layers")
    l0, l1 = net.layers[0], net.layers[1]
    if l0.level is not Knowability.DECIDED or l1.level is not Knowability.DECIDED:
        raise ContextError("distributivity check applies to two decided layers")
    matrix = net.matrix(0)
    nested = []
    for j in range(l0.size):
        w = to_float(abs2(net.initial[j]))
        row = [to_float(abs2(a)) for a in matrix[j]]
        nested.extend(w * r for r in row)
    flattened = [
        to_float(abs2(net.initial[j])) * to_float(abs2(matrix[j][k]))
        for j in range(l0.size) for k in range(l1.size)]
    dev = max(abs(a - b) for a, b in zip(nested, flattened))
    return DistributivityReport(nested=tuple(nested), flattened=tuple(flattened),
                                max_deviation=dev)
