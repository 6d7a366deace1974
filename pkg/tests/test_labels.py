from itertools import product

import pytest

from dynflow.labels import (
    LabelInterpreter, Lattice, PolicySpec, all_levelsets, denning_levelset,
    dynamic_spec, flows_to, interpret_label, leq, parse_label, role_levelset,
)
from dynflow.lang import run
from dynflow.syntax import parse_program

UNIVERSES = [(), ("a",), ("a", "b"), ("a", "b", "c"), ("a", "b", "c", "d")]


@pytest.mark.parametrize("universe", UNIVERSES, ids=lambda u: f"size{len(u)}")
def test_order_is_a_partial_order(universe):
    sets = all_levelsets(universe)
    assert len(sets) == 2 ** len(universe)
    for a in sets:
        assert leq(a, a)
    for a, b in product(sets, repeat=2):
        if leq(a, b) and leq(b, a):
            assert a == b
    for a, b, c in product(sets, repeat=3):
        if leq(a, b) and leq(b, c):
            assert leq(a, c)


@pytest.mark.parametrize("universe", UNIVERSES, ids=lambda u: f"size{len(u)}")
def test_order_bounds(universe):
    sets = all_levelsets(universe)
    top, bottom = frozenset(), frozenset(universe)
    for a in sets:
        assert leq(bottom, a) and leq(a, top)
    # union is the meet, intersection the join
    for a, b in product(sets, repeat=2):
        assert leq(a | b, a) and leq(a | b, b)
        assert leq(a, a & b) and leq(b, a & b)


def test_reverse_inclusion():
    assert leq(frozenset({"L", "H"}), frozenset({"H"}))
    assert not leq(frozenset({"H"}), frozenset({"L", "H"}))
    # public data may flow to the secret level, not back
    assert flows_to(frozenset({"L", "H"}), frozenset({"H"}))
    assert not flows_to(frozenset({"H"}), frozenset({"L", "H"}))


def test_denning_images():
    lat = Lattice(("L", "M", "H"), (("L", "M"), ("M", "H")))
    assert denning_levelset(lat, "L") == {"L", "M", "H"}
    assert denning_levelset(lat, "M") == {"M", "H"}
    assert denning_levelset(lat, "H") == {"H"}
    assert lat.below("L", "H")
    assert lat.name_of(frozenset({"M", "H"})) == "M"
    assert lat.render(frozenset({"L"})) == "{L}"
    assert lat.resolve("{L,H}") == {"L", "H"}
    with pytest.raises(KeyError):
        denning_levelset(lat, "Z")
    with pytest.raises(KeyError):
        lat.resolve("{Z}")


def test_denning_image_preserves_order():
    lat = Lattice(("a", "b", "c", "d"), (("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")))
    for x, y in product(lat.levels, repeat=2):
        assert lat.below(x, y) == leq(lat.levelset(x), lat.levelset(y))


def test_lattice_validation():
    with pytest.raises(ValueError):
        Lattice(("L",), (("L", "H"),))
    with pytest.raises(ValueError):
        Lattice(("A", "B"), (("A", "B"), ("B", "A")))


def test_role_levelsets():
    pairs = [("Alice", "Bob"), ("Bob", "Carol")]
    assert role_levelset(pairs, "Carol") == {"Alice", "Bob", "Carol"}
    assert role_levelset(pairs, "Alice") == {"Alice"}
    with pytest.raises(KeyError):
        role_levelset(pairs, "Eve")


# ----------------------------------------------------------- interpretation

def _trace(src, m=None):
    return run(parse_program(src), m or {})


def test_downgrade_on_event():
    lat = Lattice.two_point()
    b = parse_label("e ? L <- H", lat, {"e"})
    tr = _trace("skip; EventOn(e); skip")
    it = LabelInterpreter(tr.memories)
    assert it.at(b, 0) == {"H"}
    assert it.at(b, 2) == {"L", "H"}


def test_upgrade_direction():
    b = parse_label("e ? {a,b} -> {b}", events={"e"})
    tr = _trace("EventOn(e); skip; EventOff(e); skip")
    it = LabelInterpreter(tr.memories)
    assert it.at(b, 0) == {"b"}  # e is false at the start
    assert interpret_label(b, tr.memories[1:2]) == {"a", "b"}


def test_bidirectional_follows_latest_stretch():
    b = parse_label("e ? {} <=> {a}", events={"e"})
    tr = _trace("skip; EventOn(e); skip; EventOff(e); skip")
    it = LabelInterpreter(tr.memories)
    seen = [it.at(b, i) for i in range(len(tr.memories))]
    assert seen[0] == {"a"}
    assert seen[2] == frozenset()
    assert seen[-1] == {"a"}


def test_monotone_labels_remember_the_event():
    # once e happened, "<-" keeps the left label even after e is switched off
    b = parse_label("e ? {} <- {a}", events={"e"})
    tr = _trace("EventOn(e); EventOff(e); skip")
    assert interpret_label(b, tr) == frozenset()


def test_condition_over_variables():
    b = parse_label("x > 0 ? {} <=> {a}")
    assert interpret_label(b, _trace("skip", {"x": 1})) == frozenset()
    assert interpret_label(b, _trace("skip", {"x": 0})) == {"a"}


def test_dynamic_spec_snapshots():
    lat = Lattice.two_point()
    gamma = {"x": parse_label("e ? L <- H", lat, {"e"}), "y": parse_label("L", lat)}
    tr = _trace("EventOn(e); skip")
    assert dynamic_spec(PolicySpec(gamma), tr, 0) == {"x": {"H"}, "y": {"L", "H"}}
    assert dynamic_spec(gamma, tr, 1)["x"] == {"L", "H"}
    with pytest.raises(IndexError):
        dynamic_spec(gamma, tr, 99)


def test_policy_spec_type():
    assert PolicySpec({}, persistent=True).ptype == "Per"
    assert PolicySpec({}).ptype == "Tran"
