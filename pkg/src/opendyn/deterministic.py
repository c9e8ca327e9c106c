"""Finite deterministic machines composed by lenses.

A system here is a Moore machine: states S, interface (inputs I, outputs O),
a readout S -> O and an update S x I -> S. Lenses rewire interfaces (a
forward map on outputs plus a backward map that fills inputs from outputs),
charts push interfaces forward covariantly, and squares witness that a lens
pair and a chart pair are compatible.

Steady states and period-k orbits of a machine are organized into a Family
over the set of charts out of a walking k-cycle; `lens_to_span` turns a lens
into a span between these chart sets, and `check_matrix_theorem` verifies
that rewiring a machine and then collecting its orbits agrees, up to a
fiberwise bijection, with applying that span to the orbits of the original
machine. That is span (= matrix-of-sets) arithmetic acting on behaviors.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Mapping, Optional

from .errors import BoundaryError, ValidationError
from .finset import (
    Family,
    FamilyMatch,
    FinMap,
    FinSet,
    Span,
    families_isomorphic,
    apply_span_to_family,
    join_labels,
    product_finset,
)


class DetInterface:
    """An interface: the input and output alphabets a machine exposes."""

    __slots__ = ("inputs", "outputs")

    def __init__(self, inputs: FinSet, outputs: FinSet):
        self.inputs = inputs
        self.outputs = outputs

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, DetInterface)
            and self.inputs == other.inputs
            and self.outputs == other.outputs
        )

    def __hash__(self) -> int:
        return hash((self.inputs, self.outputs))

    def __repr__(self) -> str:
        return f"DetInterface(inputs={self.inputs}, outputs={self.outputs})"


def _check_nested_table(table: Mapping, rows: FinSet, cols: FinSet, values: FinSet, what: str) -> dict:
    """Validate a (rows x cols) -> values table given as nested dicts."""
    for key in table:
        if key not in rows:
            raise ValidationError(f"{what} has a row for unknown element {key!r}")
    normalized: dict[str, dict[str, str]] = {}
    for r in rows:
        if r not in table:
            raise ValidationError(f"{what} is missing a row for {r!r}")
        row = table[r]
        for key in row:
            if key not in cols:
                raise ValidationError(f"{what}[{r!r}] has an entry for unknown element {key!r}")
        normalized_row: dict[str, str] = {}
        for c in cols:
            if c not in row:
                raise ValidationError(f"{what}[{r!r}] is missing an entry for {c!r}")
            v = row[c]
            if v not in values:
                raise ValidationError(f"{what}[{r!r}][{c!r}] = {v!r} is not in {values}")
            normalized_row[c] = v
        normalized[r] = normalized_row
    return normalized


class DetSystem:
    """A Moore machine: readout S -> O, update S x I -> S."""

    __slots__ = ("states", "interface", "readout", "update")

    def __init__(
        self,
        states: FinSet,
        interface: DetInterface,
        readout: FinMap,
        update: Mapping[str, Mapping[str, str]],
    ):
        if readout.dom != states or readout.cod != interface.outputs:
            raise ValidationError(
                f"readout must map states {states} to outputs {interface.outputs}"
            )
        self.states = states
        self.interface = interface
        self.readout = readout
        self.update = _check_nested_table(update, states, interface.inputs, states, "update")

    def step(self, state: str, inp: str) -> str:
        if state not in self.states:
            raise ValidationError(f"unknown state {state!r}")
        if inp not in self.interface.inputs:
            raise ValidationError(f"unknown input {inp!r}")
        return self.update[state][inp]

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, DetSystem)
            and self.states == other.states
            and self.interface == other.interface
            and self.readout == other.readout
            and self.update == other.update
        )

    def __repr__(self) -> str:
        return f"DetSystem(states={self.states}, interface={self.interface!r})"


class DetLens:
    """Interface rewiring: fwd on outputs, bwd filling old inputs from (output, new input)."""

    __slots__ = ("source", "target", "fwd", "bwd")

    def __init__(
        self,
        source: DetInterface,
        target: DetInterface,
        fwd: FinMap,
        bwd: Mapping[str, Mapping[str, str]],
    ):
        if fwd.dom != source.outputs or fwd.cod != target.outputs:
            raise ValidationError(
                f"lens fwd must map {source.outputs} to {target.outputs}"
            )
        self.source = source
        self.target = target
        self.fwd = fwd
        self.bwd = _check_nested_table(
            bwd, source.outputs, target.inputs, source.inputs, "bwd"
        )

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, DetLens)
            and self.source == other.source
            and self.target == other.target
            and self.fwd == other.fwd
            and self.bwd == other.bwd
        )

    def __repr__(self) -> str:
        return f"DetLens({self.source!r} => {self.target!r})"


class DetChart:
    """Covariant interface map: fwd on outputs, push sending old inputs forward."""

    __slots__ = ("source", "target", "fwd", "push")

    def __init__(
        self,
        source: DetInterface,
        target: DetInterface,
        fwd: FinMap,
        push: Mapping[str, Mapping[str, str]],
    ):
        if fwd.dom != source.outputs or fwd.cod != target.outputs:
            raise ValidationError(
                f"chart fwd must map {source.outputs} to {target.outputs}"
            )
        self.source = source
        self.target = target
        self.fwd = fwd
        self.push = _check_nested_table(
            push, source.outputs, source.inputs, target.inputs, "push"
        )

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, DetChart)
            and self.source == other.source
            and self.target == other.target
            and self.fwd == other.fwd
            and self.push == other.push
        )

    def __repr__(self) -> str:
        return f"DetChart({self.source!r} -> {self.target!r})"


class DetSquare:
    """A candidate compatibility square.

    Charts run horizontally (top: iface1 -> iface2, bottom: iface3 -> iface4)
    and lenses vertically (left: iface1 => iface3, right: iface2 => iface4).
    Construction checks only that the four corners agree; whether the square
    actually commutes is `check_square`'s job.
    """

    __slots__ = ("top", "bottom", "left", "right")

    def __init__(self, top: DetChart, bottom: DetChart, left: DetLens, right: DetLens):
        if left.source != top.source:
            raise BoundaryError("left lens and top chart disagree on the first corner")
        if right.source != top.target:
            raise BoundaryError("right lens and top chart disagree on the second corner")
        if left.target != bottom.source:
            raise BoundaryError("left lens and bottom chart disagree on the third corner")
        if right.target != bottom.target:
            raise BoundaryError("right lens and bottom chart disagree on the fourth corner")
        self.top = top
        self.bottom = bottom
        self.left = left
        self.right = right


def identity_lens(iface: DetInterface) -> DetLens:
    bwd = {o: {i: i for i in iface.inputs} for o in iface.outputs}
    return DetLens(iface, iface, FinMap.identity(iface.outputs), bwd)


def identity_chart(iface: DetInterface) -> DetChart:
    push = {o: {i: i for i in iface.inputs} for o in iface.outputs}
    return DetChart(iface, iface, FinMap.identity(iface.outputs), push)


def compose_lenses(l1: DetLens, l2: DetLens) -> DetLens:
    """First rewire by l1, then by l2; the backward pass threads right to left."""
    if l1.target != l2.source:
        raise BoundaryError(
            f"cannot compose lenses: first target {l1.target!r} differs from second source {l2.source!r}"
        )
    bwd = {
        o: {i2: l1.bwd[o][l2.bwd[l1.fwd(o)][i2]] for i2 in l2.target.inputs}
        for o in l1.source.outputs
    }
    return DetLens(l1.source, l2.target, l1.fwd.then(l2.fwd), bwd)


def compose_charts(c1: DetChart, c2: DetChart) -> DetChart:
    if c1.target != c2.source:
        raise BoundaryError(
            f"cannot compose charts: first target {c1.target!r} differs from second source {c2.source!r}"
        )
    push = {
        o: {i: c2.push[c1.fwd(o)][c1.push[o][i]] for i in c1.source.inputs}
        for o in c1.source.outputs
    }
    return DetChart(c1.source, c2.target, c1.fwd.then(c2.fwd), push)


def compose_lens_system(lens: DetLens, sys: DetSystem) -> DetSystem:
    """Run the machine behind the lens: same states, rewired interface."""
    if lens.source != sys.interface:
        raise BoundaryError(
            f"lens source {lens.source!r} does not match system interface {sys.interface!r}"
        )
    update = {
        s: {i2: sys.update[s][lens.bwd[sys.readout(s)][i2]] for i2 in lens.target.inputs}
        for s in sys.states
    }
    return DetSystem(sys.states, lens.target, sys.readout.then(lens.fwd), update)


def tensor_systems(a: DetSystem, b: DetSystem) -> DetSystem:
    """Run two machines side by side; everything is the componentwise product."""
    states = product_finset(a.states, b.states)
    iface = DetInterface(
        product_finset(a.interface.inputs, b.interface.inputs),
        product_finset(a.interface.outputs, b.interface.outputs),
    )
    readout = FinMap(
        states,
        iface.outputs,
        {
            join_labels(sa, sb): join_labels(a.readout(sa), b.readout(sb))
            for sa in a.states
            for sb in b.states
        },
    )
    update = {
        join_labels(sa, sb): {
            join_labels(ia, ib): join_labels(a.update[sa][ia], b.update[sb][ib])
            for ia in a.interface.inputs
            for ib in b.interface.inputs
        }
        for sa in a.states
        for sb in b.states
    }
    return DetSystem(states, iface, readout, update)


@dataclass
class SquareResult:
    """Outcome of a square check; `witness` is a failing (output, input) pair."""

    holds: bool
    witness: Optional[tuple[str, Optional[str]]] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.holds


def check_square(sq: DetSquare) -> SquareResult:
    """Decide whether the square commutes.

    Two conditions, both quantified over the first corner's data:
    outputs must agree around the square, and pushing an input forward after
    pulling it back must equal pulling back after pushing forward.
    """
    for o in sq.top.source.outputs:
        if sq.right.fwd(sq.top.fwd(o)) != sq.bottom.fwd(sq.left.fwd(o)):
            return SquareResult(
                False,
                witness=(o, None),
                reason=(
                    f"outputs disagree at {o!r}: "
                    f"{sq.right.fwd(sq.top.fwd(o))!r} != {sq.bottom.fwd(sq.left.fwd(o))!r}"
                ),
            )
    for o in sq.top.source.outputs:
        for a3 in sq.bottom.source.inputs:
            via_top = sq.top.push[o][sq.left.bwd[o][a3]]
            via_bottom = sq.right.bwd[sq.top.fwd(o)][sq.bottom.push[sq.left.fwd(o)][a3]]
            if via_top != via_bottom:
                return SquareResult(
                    False,
                    witness=(o, a3),
                    reason=f"inputs disagree at ({o!r}, {a3!r}): {via_top!r} != {via_bottom!r}",
                )
    return SquareResult(True)


def paste_horizontal(sq1: DetSquare, sq2: DetSquare) -> DetSquare:
    """Glue two squares along a shared vertical edge (sq1's right lens)."""
    if sq1.right != sq2.left:
        raise BoundaryError("squares do not share a vertical edge")
    return DetSquare(
        compose_charts(sq1.top, sq2.top),
        compose_charts(sq1.bottom, sq2.bottom),
        sq1.left,
        sq2.right,
    )


def paste_vertical(sq1: DetSquare, sq2: DetSquare) -> DetSquare:
    """Stack two squares along a shared horizontal edge (sq1's bottom chart)."""
    if sq1.bottom != sq2.top:
        raise BoundaryError("squares do not share a horizontal edge")
    return DetSquare(
        sq1.top,
        sq2.bottom,
        compose_lenses(sq1.left, sq2.left),
        compose_lenses(sq1.right, sq2.right),
    )


def check_system_morphism(phi: FinMap, sys: DetSystem, sys2: DetSystem) -> bool:
    """Is phi a machine morphism over the shared interface?"""
    if sys.interface != sys2.interface:
        raise BoundaryError("systems do not share an interface")
    if phi.dom != sys.states or phi.cod != sys2.states:
        raise BoundaryError(
            f"morphism must map states {sys.states} to states {sys2.states}"
        )
    for s in sys.states:
        if sys2.readout(phi(s)) != sys.readout(s):
            return False
        for i in sys.interface.inputs:
            if phi(sys.update[s][i]) != sys2.update[phi(s)][i]:
                return False
    return True


def walking_cycle(k: int) -> DetSystem:
    """The k-state cycle that exposes its entire state.

    Charts out of it pick out period-k orbits; k = 1 is the one-state machine
    whose charts pick out steady states.
    """
    if k < 1:
        raise ValidationError(f"cycle length must be at least 1, got {k}")
    states = FinSet(f"c{j}" for j in range(k))
    iface = DetInterface(FinSet(["*"]), states)
    update = {f"c{j}": {"*": f"c{(j + 1) % k}"} for j in range(k)}
    return DetSystem(states, iface, FinMap.identity(states), update)


def chart_hom_set(rep: DetInterface, iface: DetInterface) -> FinSet:
    """All charts rep -> iface as labels.

    Each chart is flattened slot by slot: for every rep output o (canonical
    order) its image g(o), followed by the pushed input g#(o, i) for every
    rep input i. Enumeration is the product order over these slots.
    """
    domains: list[tuple[str, ...]] = []
    for _o in rep.outputs:
        domains.append(iface.outputs.elements)
        for _i in rep.inputs:
            domains.append(iface.inputs.elements)
    return FinSet(join_labels(*combo) for combo in product(*domains))


def _readout_is_identity(sys: DetSystem) -> bool:
    return sys.interface.outputs == sys.states and all(
        sys.readout(s) == s for s in sys.states
    )


def representable_span(rep: DetSystem, sys: DetSystem) -> Family:
    """All ways of mapping `rep` into `sys`, fibered over the chart used.

    The base is every chart rep.interface -> sys.interface. An element is a
    state map phi together with an input assignment isharp such that
    phi(update_rep(s, i)) = update(phi(s), isharp(s, i)) for all (s, i);
    the output half of its chart is then forced to be readout . phi. The
    element label interleaves phi(s) with the isharp values slot by slot,
    mirroring the base encoding.
    """
    if not _readout_is_identity(rep):
        raise ValidationError("representing system must expose its entire state")
    base = chart_hom_set(rep.interface, sys.interface)
    rep_states = rep.states.elements
    rep_inputs = rep.interface.inputs.elements
    domains: list[tuple[str, ...]] = []
    for _s in rep_states:
        domains.append(sys.states.elements)
        for _i in rep_inputs:
            domains.append(sys.interface.inputs.elements)
    width = 1 + len(rep_inputs)
    labels: list[str] = []
    proj: dict[str, str] = {}
    for combo in product(*domains):
        phi = {s: combo[pos * width] for pos, s in enumerate(rep_states)}
        isharp = {
            (s, i): combo[pos * width + 1 + ipos]
            for pos, s in enumerate(rep_states)
            for ipos, i in enumerate(rep_inputs)
        }
        if all(
            phi[rep.update[s][i]] == sys.update[phi[s]][isharp[(s, i)]]
            for s in rep_states
            for i in rep_inputs
        ):
            label = join_labels(*combo)
            base_parts: list[str] = []
            for pos, s in enumerate(rep_states):
                base_parts.append(sys.readout(phi[s]))
                base_parts.extend(combo[pos * width + 1 : (pos + 1) * width])
            labels.append(label)
            proj[label] = join_labels(*base_parts)
    total = FinSet(labels)
    return Family(base, total, FinMap(total, base, proj))


def steady_span(sys: DetSystem) -> Family:
    """States fixed by their input, fibered over (output, input) pairs.

    Identical to representable_span(walking_cycle(1), sys), including the
    label encoding, but computed by direct enumeration of S x I.
    """
    base = product_finset(sys.interface.outputs, sys.interface.inputs)
    labels: list[str] = []
    proj: dict[str, str] = {}
    for s in sys.states:
        for i in sys.interface.inputs:
            if sys.update[s][i] == s:
                label = join_labels(s, i)
                labels.append(label)
                proj[label] = join_labels(sys.readout(s), i)
    total = FinSet(labels)
    return Family(base, total, FinMap(total, base, proj))


def periodic_orbit_span(sys: DetSystem, k: int) -> Family:
    """Orbits of period dividing k, fibered over k-tuples of (output, input) pairs."""
    if k < 1:
        raise ValidationError(f"orbit period must be at least 1, got {k}")
    return representable_span(walking_cycle(k), sys)


def lens_to_span(lens: DetLens, rep_interface: DetInterface) -> Span:
    """The span a lens induces between chart sets out of a walking-cycle interface.

    An apex element assigns, to each cycle position, an old output o and a
    new input i'. The left leg fills the old input as bwd(o, i'); the right
    leg pushes the output forward as fwd(o). Both legs are functions of the
    apex, so the matrix of this span has exactly one 1 per apex element.
    """
    if len(rep_interface.inputs) != 1:
        raise ValidationError(
            "representing interface must have a single input (a walking cycle)"
        )
    source = chart_hom_set(rep_interface, lens.source)
    target = chart_hom_set(rep_interface, lens.target)
    domains: list[tuple[str, ...]] = []
    for _o in rep_interface.outputs:
        domains.append(lens.source.outputs.elements)
        domains.append(lens.target.inputs.elements)
    labels: list[str] = []
    left: dict[str, str] = {}
    right: dict[str, str] = {}
    for combo in product(*domains):
        label = join_labels(*combo)
        left_parts: list[str] = []
        right_parts: list[str] = []
        for pos in range(len(rep_interface.outputs)):
            o, i2 = combo[2 * pos], combo[2 * pos + 1]
            left_parts.extend((o, lens.bwd[o][i2]))
            right_parts.extend((lens.fwd(o), i2))
        labels.append(label)
        left[label] = join_labels(*left_parts)
        right[label] = join_labels(*right_parts)
    apex = FinSet(labels)
    return Span(source, target, apex, FinMap(apex, source, left), FinMap(apex, target, right))


def check_matrix_theorem(lens: DetLens, sys: DetSystem, k: int) -> FamilyMatch:
    """Orbits of the rewired machine vs the lens span applied to the original orbits.

    The two families must always be fiberwise bijective; a mismatch on any
    valid input is a defect, not a data problem.
    """
    if lens.source != sys.interface:
        raise BoundaryError(
            f"lens source {lens.source!r} does not match system interface {sys.interface!r}"
        )
    rewired_orbits = periodic_orbit_span(compose_lens_system(lens, sys), k)
    pushed_orbits = apply_span_to_family(
        lens_to_span(lens, walking_cycle(k).interface), periodic_orbit_span(sys, k)
    )
    return families_isomorphic(rewired_orbits, pushed_orbits)


def run_word(sys: DetSystem, s0: str, word: list[str]) -> list[tuple[str, str]]:
    """Drive the machine from s0 along a word; returns every (state, output) visited."""
    if s0 not in sys.states:
        raise ValidationError(f"unknown start state {s0!r}")
    for w in word:
        if w not in sys.interface.inputs:
            raise ValidationError(f"unknown input {w!r}")
    state = s0
    path = [(state, sys.readout(state))]
    for w in word:
        state = sys.update[state][w]
        path.append((state, sys.readout(state)))
    return path
