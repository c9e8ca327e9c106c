"""Finite Markov machines with exact rational transition weights.

Same interface discipline as the deterministic doctrine (readouts are still
functions), but the update lands in probability distributions. Weights are
`fractions.Fraction` throughout, so normalization and the embedding laws are
exact equalities rather than tolerance checks. The deterministic doctrine
embeds by sending each transition to the point distribution on its result.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .deterministic import DetInterface, DetSystem, DetLens
from .errors import BoundaryError, ValidationError
from .finset import Family, FinMap, FinSet, join_labels, product_finset

WeightLike = Union[Fraction, int, str]


def _as_fraction(value: WeightLike, where: str) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"{where}: bad rational {value!r} ({exc})") from None
    raise ValidationError(
        f"{where}: weights must be exact rationals (int, Fraction, or 'p/q' string), got {type(value).__name__}"
    )


class Dist:
    """A probability distribution on a finite set, with exact weights.

    Zero-weight labels may be omitted; they are dropped on construction, so
    two distributions are equal iff they have the same support set and the
    same nonzero weights.
    """

    __slots__ = ("support", "weights")

    def __init__(self, support: FinSet, weights: Mapping[str, WeightLike]):
        for label in weights:
            if label not in support:
                raise ValidationError(f"distribution weight on unknown label {label!r}")
        cleaned: dict[str, Fraction] = {}
        total = Fraction(0)
        for label in support:
            if label not in weights:
                continue
            w = _as_fraction(weights[label], f"weight of {label!r}")
            if w < 0:
                raise ValidationError(f"negative weight {w} on {label!r}")
            total += w
            if w != 0:
                cleaned[label] = w
        if total != 1:
            raise ValidationError(f"weights must sum to 1 exactly, got {total}")
        self.support = support
        self.weights = cleaned

    @classmethod
    def dirac(cls, support: FinSet, label: str) -> "Dist":
        return cls(support, {label: Fraction(1)})

    def __call__(self, label: str) -> Fraction:
        if label not in self.support:
            raise ValidationError(f"unknown label {label!r}")
        return self.weights.get(label, Fraction(0))

    def is_dirac_at(self, label: str) -> bool:
        return self.weights == {label: Fraction(1)}

    def to_obj(self) -> dict[str, str]:
        return {label: str(w) for label, w in self.weights.items()}

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Dist)
            and self.support == other.support
            and self.weights == other.weights
        )

    def __repr__(self) -> str:
        inner = ", ".join(f"{label}: {w}" for label, w in self.weights.items())
        return f"Dist({{{inner}}})"


class StochSystem:
    """A Markov machine: readout S -> O, update S x I -> Dist(S)."""

    __slots__ = ("states", "interface", "readout", "update")

    def __init__(
        self,
        states: FinSet,
        interface: DetInterface,
        readout: FinMap,
        update: Mapping[str, Mapping[str, Dist]],
    ):
        if readout.dom != states or readout.cod != interface.outputs:
            raise ValidationError(
                f"readout must map states {states} to outputs {interface.outputs}"
            )
        for key in update:
            if key not in states:
                raise ValidationError(f"update has a row for unknown state {key!r}")
        normalized: dict[str, dict[str, Dist]] = {}
        for s in states:
            if s not in update:
                raise ValidationError(f"update is missing a row for {s!r}")
            row = update[s]
            for key in row:
                if key not in interface.inputs:
                    raise ValidationError(
                        f"update[{s!r}] has an entry for unknown input {key!r}"
                    )
            normalized_row: dict[str, Dist] = {}
            for i in interface.inputs:
                if i not in row:
                    raise ValidationError(f"update[{s!r}] is missing an entry for {i!r}")
                d = row[i]
                if not isinstance(d, Dist) or d.support != states:
                    raise ValidationError(
                        f"update[{s!r}][{i!r}] must be a distribution on {states}"
                    )
                normalized_row[i] = d
            normalized[s] = normalized_row
        self.states = states
        self.interface = interface
        self.readout = readout
        self.update = normalized

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, StochSystem)
            and self.states == other.states
            and self.interface == other.interface
            and self.readout == other.readout
            and self.update == other.update
        )

    def __repr__(self) -> str:
        return f"StochSystem(states={self.states}, interface={self.interface!r})"


def compose_lens_stoch(lens: DetLens, sys: StochSystem) -> StochSystem:
    """Rewire a Markov machine; transition weights are untouched."""
    if lens.source != sys.interface:
        raise BoundaryError(
            f"lens source {lens.source!r} does not match system interface {sys.interface!r}"
        )
    update = {
        s: {i2: sys.update[s][lens.bwd[sys.readout(s)][i2]] for i2 in lens.target.inputs}
        for s in sys.states
    }
    return StochSystem(sys.states, lens.target, sys.readout.then(lens.fwd), update)


def step_dist(sys: StochSystem, d: Dist, inp: str) -> Dist:
    """One-step pushforward of a state distribution, exactly."""
    if d.support != sys.states:
        raise ValidationError(f"distribution must live on the state set {sys.states}")
    if inp not in sys.interface.inputs:
        raise ValidationError(f"unknown input {inp!r}")
    acc: dict[str, Fraction] = {}
    for s, w in d.weights.items():
        for t, wt in sys.update[s][inp].weights.items():
            acc[t] = acc.get(t, Fraction(0)) + w * wt
    return Dist(sys.states, acc)


def _sample(dist: Dist, rng: random.Random) -> str:
    """Inverse-CDF sampling over the canonical element order, compared exactly."""
    u = Fraction(rng.random())
    cum = Fraction(0)
    last = None
    for label, w in dist.weights.items():
        cum += w
        last = label
        if cum > u:
            return label
    assert last is not None
    return last


def simulate_stoch(sys: StochSystem, s0: str, word: Iterable[str], seed: int) -> list[str]:
    """Sample a state path; the same (system, s0, word, seed) gives the same path."""
    if s0 not in sys.states:
        raise ValidationError(f"unknown start state {s0!r}")
    word = list(word)
    for w in word:
        if w not in sys.interface.inputs:
            raise ValidationError(f"unknown input {w!r}")
    rng = random.Random(seed)
    state = s0
    path = [state]
    for w in word:
        state = _sample(sys.update[state][w], rng)
        path.append(state)
    return path


def embed_det(sys: DetSystem) -> StochSystem:
    """View a deterministic machine as a Markov machine with point transitions."""
    update = {
        s: {i: Dist.dirac(sys.states, sys.update[s][i]) for i in sys.interface.inputs}
        for s in sys.states
    }
    return StochSystem(sys.states, sys.interface, sys.readout, update)


def tensor_stoch(a: StochSystem, b: StochSystem) -> StochSystem:
    """Independent product: weights multiply componentwise."""
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
    update: dict[str, dict[str, Dist]] = {}
    for sa in a.states:
        for sb in b.states:
            row: dict[str, Dist] = {}
            for ia in a.interface.inputs:
                for ib in b.interface.inputs:
                    da = a.update[sa][ia]
                    db = b.update[sb][ib]
                    row[join_labels(ia, ib)] = Dist(
                        states,
                        {
                            join_labels(ta, tb): wa * wb
                            for ta, wa in da.weights.items()
                            for tb, wb in db.weights.items()
                        },
                    )
            update[join_labels(sa, sb)] = row
    return StochSystem(states, iface, readout, update)


def dirac_steady_span(sys: StochSystem) -> Family:
    """States whose update is the point distribution on themselves, over (output, input)."""
    base = product_finset(sys.interface.outputs, sys.interface.inputs)
    labels: list[str] = []
    proj: dict[str, str] = {}
    for s in sys.states:
        for i in sys.interface.inputs:
            if sys.update[s][i].is_dirac_at(s):
                label = join_labels(s, i)
                labels.append(label)
                proj[label] = join_labels(sys.readout(s), i)
    total = FinSet(labels)
    return Family(base, total, FinMap(total, base, proj))
