"""Shared builders for the test suite: reference machines and random data."""

from __future__ import annotations

import random
from fractions import Fraction
from importlib.resources import files

from opendyn import (
    DetInterface,
    DetLens,
    DetSystem,
    Dist,
    Family,
    FinMap,
    FinSet,
    Span,
    StochSystem,
    compose_lens_system,
)
from opendyn.laws import random_interface


def fixture_path(name: str) -> str:
    return str(files("opendyn") / "fixtures" / name)


def flipflop() -> DetSystem:
    """Set/reset latch: set forces s1, reset forces s0, hold keeps the state."""
    states = FinSet(["s0", "s1"])
    iface = DetInterface(FinSet(["set", "reset", "hold"]), FinSet(["lo", "hi"]))
    readout = FinMap(states, iface.outputs, {"s0": "lo", "s1": "hi"})
    update = {
        "s0": {"set": "s1", "reset": "s0", "hold": "s0"},
        "s1": {"set": "s1", "reset": "s0", "hold": "s1"},
    }
    return DetSystem(states, iface, readout, update)


def feedback_lens() -> DetLens:
    """Close the latch's loop: every tick requests the opposite of the output."""
    ff = flipflop().interface
    target = DetInterface(FinSet(["tick"]), FinSet(["star"]))
    fwd = FinMap(ff.outputs, target.outputs, {"lo": "star", "hi": "star"})
    bwd = {"lo": {"tick": "set"}, "hi": {"tick": "reset"}}
    return DetLens(ff, target, fwd, bwd)


def oscillator() -> DetSystem:
    return compose_lens_system(feedback_lens(), flipflop())


def chain() -> StochSystem:
    """Two-state chain: `go` mixes the states, `stay` keeps them put."""
    states = FinSet(["a", "b"])
    iface = DetInterface(FinSet(["go", "stay"]), FinSet(["lo", "hi"]))
    readout = FinMap(states, iface.outputs, {"a": "lo", "b": "hi"})
    update = {
        "a": {"go": Dist(states, {"a": "1/2", "b": "1/2"}), "stay": Dist.dirac(states, "a")},
        "b": {"go": Dist(states, {"a": "1/3", "b": "2/3"}), "stay": Dist.dirac(states, "b")},
    }
    return StochSystem(states, iface, readout, update)


def matmul(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    """Plain integer matrix product, the independent oracle for span composition."""
    if not a:
        return []
    inner = len(b)
    return [
        [sum(row[m] * b[m][w] for m in range(inner)) for w in range(len(b[0]) if b else 0)]
        for row in a
    ]


def random_finset(rng: random.Random, prefix: str, max_size: int, min_size: int = 1) -> FinSet:
    return FinSet(f"{prefix}{n}" for n in range(rng.randint(min_size, max_size)))


def random_span(rng: random.Random, source: FinSet, target: FinSet, max_apex: int = 5) -> Span:
    apex = random_finset(rng, "x", max_apex, min_size=0)
    left = FinMap(apex, source, {x: rng.choice(source.elements) for x in apex})
    right = FinMap(apex, target, {x: rng.choice(target.elements) for x in apex})
    return Span(source, target, apex, left, right)


def random_family(rng: random.Random, base: FinSet, max_total: int = 6) -> Family:
    total = random_finset(rng, "e", max_total, min_size=0)
    proj = FinMap(total, base, {e: rng.choice(base.elements) for e in total})
    return Family(base, total, proj)


def random_dist(rng: random.Random, support: FinSet) -> Dist:
    """Random exact rational distribution: integer weights over their sum."""
    raw = [rng.randint(0, 6) for _ in support]
    if sum(raw) == 0:
        raw[rng.randrange(len(raw))] = 1
    total = sum(raw)
    return Dist(support, {s: Fraction(w, total) for s, w in zip(support, raw) if w})


def random_stoch_system(rng: random.Random, max_size: int = 4) -> StochSystem:
    states = FinSet(f"s{n}" for n in range(rng.randint(1, max_size)))
    iface = random_interface(rng, max_size)
    readout = FinMap(
        states, iface.outputs, {s: rng.choice(iface.outputs.elements) for s in states}
    )
    update = {s: {i: random_dist(rng, states) for i in iface.inputs} for s in states}
    return StochSystem(states, iface, readout, update)
