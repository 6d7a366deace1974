from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from dynflow.anntrace import check, make_table, tables
from dynflow.labels import Lattice, parse_label
from dynflow.lang import run
from dynflow.policies import (
    INSECURE, NOT_APPLICABLE, SECURE, Attacker, BudgetExceeded, Verdict, absorbing_automaton,
    ap_instance, check_according_to_policy, check_dynrelease, check_forgetful,
    correspondence_brute, correspondence_exists, encode_gradual_release, encode_paralocks,
    encode_tight_gr, parse_attacker, perfect_recall_automaton, single_memory_automaton,
)
from dynflow.policies.erasure import is_subtrace, k_ce
from dynflow.policies.framework import (
    combine, default_attackers, groups_from_gamma, groups_from_traces, windows,
)
from dynflow.policies.gradual import EncodingError
from dynflow.policies.paralocks import default_attackers as lock_attackers, normalize_flowlocks
from dynflow.syntax import Static, events_of, parse_program, show_label, show_program, variables_of
from dynflow.traces import LabelGroup, extend, static_event

from conftest import corpus_test

LO = frozenset({"L", "H"})
HI = frozenset({"H"})
LH = Lattice.two_point()


def table_for(src, gamma_text, domains, persistent=False, lattice=LH):
    p = parse_program(src, lattice.levelset)
    gamma = {x: parse_label(t, lattice, events_of(p)) for x, t in gamma_text.items()}
    names = sorted(domains)
    runs = []
    for vals in product(*(domains[x] for x in names)):
        m = dict(zip(names, vals))
        runs.append((m, extend(run(p, m), gamma)))
    return make_table(runs, lattice, persistent, gamma)


# ------------------------------------------------------------- framework

def test_windows():
    t = ("a", "b", "c")
    assert [i for i, _ in windows(t, "prefix")] == [(1,), (2,), (3,)]
    sub = dict(windows(t, "subtrace"))
    assert sub[(2, 3)] == ("b", "c")
    assert sub[(2, 2)] == ("b",)
    assert len(sub) == 6
    with pytest.raises(ValueError):
        list(windows(t, "bogus"))


def test_combine():
    s, i, n = Verdict(SECURE, "p"), Verdict(INSECURE, "p"), Verdict(NOT_APPLICABLE, "p")
    assert combine([s, i, s], "p").kind == INSECURE
    assert combine([s, n], "p").kind == SECURE
    assert combine([n, n], "p").kind == NOT_APPLICABLE


def test_default_attackers_include_channels():
    seqs = [(static_event(frozenset({"Q"}), 1),)]
    atk = default_attackers(LH, seqs)
    assert set(atk) == {LO, HI, frozenset({"Q"})}
    assert len(default_attackers(LH, [], powerset=True)) == 4
    with pytest.raises(ValueError):
        default_attackers(Lattice(tuple("abcde")), [], powerset=True)


def test_label_groups():
    b = parse_label("e ? L <- H", LH, {"e"})
    groups = groups_from_gamma({"x": b, "y": b, "z": Static(LO)})
    assert [g.variables for g in groups] == [{"x", "y"}, {"z"}]
    seqs = [(static_event(LO, 0, {"x": HI, "y": HI, "z": LO}),)]
    assert [g.variables for g in groups_from_traces(["x", "y", "z"], seqs)] == [{"x", "y"}, {"z"}]


# ------------------------------------------------------------ dynrelease

def test_dynrelease_laundering_is_rejected():
    v = check(corpus_test("laundering"), "dynrelease")
    assert v.kind == INSECURE
    assert v.witness.offending_init["h"] != v.witness.init["h"]


def test_transient_and_persistent_rerelease():
    tab = table_for("output(L, x); EventOn(e); output(L, x)", {"x": "e ? H <- L"}, {"x": [0, 1]})
    assert check_dynrelease(tab, persistent=False).kind == INSECURE
    assert check_dynrelease(tab, persistent=True).kind == SECURE


def test_static_labels_match_noninterference():
    tab = table_for("if (h) { output(L, l) } else { output(L, 0) }", {"h": "H", "l": "L"},
                    {"h": [0, 1], "l": [0, 1]})
    assert check_dynrelease(tab).kind == INSECURE
    tab = table_for("output(L, l); output(H, h)", {"h": "H", "l": "L"}, {"h": [0, 1], "l": [0, 1]})
    assert check_dynrelease(tab).kind == SECURE


# ------------------------------------------------------- gradual release

def test_gradual_release_encoding():
    gamma = {"h": Static(HI), "l": Static(LO)}
    p, g = encode_gradual_release(parse_program("l := declassify(h)"), gamma, LH)
    assert show_program(p, names=LH.name_of) == (
        "EventOn(r);\nl := h;\noutput(L, h);\nEventOff(r);\n")
    assert show_label(g["h"], LH.name_of) == "r ? L <=> H"


def test_gradual_release_encoding_is_identity_without_declassify():
    src = parse_program("output(L, l); l := h", LH.levelset)
    p, g = encode_gradual_release(src, {"h": Static(HI), "l": Static(LO)}, LH)
    assert p == src
    assert set(g) == {"h", "l"}


def test_tight_encoding():
    gamma = {"x": Static(HI), "y": Static(HI), "l": Static(LO)}
    p, g = encode_tight_gr(parse_program("l := declassify(x)"), gamma, LH)
    assert show_program(p, names=LH.name_of) == "EventOn(r_x);\nl := x;\noutput(L, x);\n"
    assert show_label(g["x"], LH.name_of) == "r_x ? L <- H"
    assert g["y"] == Static(HI)
    with pytest.raises(EncodingError):
        encode_tight_gr(parse_program("l := declassify(x + y)"), gamma, LH)


def test_gradual_release_verdicts():
    assert check(corpus_test("gr-declassify"), "gr").kind == SECURE
    assert check(corpus_test("gr-leak"), "gr").kind == INSECURE
    assert check(corpus_test("tgr-declassify"), "tgr").kind == SECURE
    assert check(corpus_test("tgr-fixture"), "tgr").kind == INSECURE


# ----------------------------------------------------- according to policy

def test_empty_side_always_corresponds():
    g = LabelGroup(frozenset({"x"}))
    t = (static_event(LO, 1, {"x": HI}),)
    assert correspondence_exists((), t, g, LO)
    assert correspondence_exists(t, (), g, LO)


def test_stale_copy_corresponds_backwards():
    (_, tab), = tables(corpus_test("app-B2-erase-stale"))
    g = [g for g in tab.groups if "cc" in g.variables][0]
    t0, t1 = tab.seqs
    M = frozenset({"M", "T"})
    # both events of each run can map onto the first of the other
    assert correspondence_exists(t0, t1, g, M)
    assert check_according_to_policy(tab).kind == SECURE


def test_correspondence_budget():
    g = LabelGroup(frozenset({"x"}))
    # the runs agree until the last event, so the search has to backtrack a lot
    t1 = tuple(static_event(LO, v, {"x": HI}) for v in (0, 0, 0, 0, 0, 2))
    t2 = tuple(static_event(LO, v, {"x": HI}) for v in (0, 0, 0, 0, 0, 1))
    with pytest.raises(BudgetExceeded):
        correspondence_exists(t1, t2, g, LO, budget=3)


def _events():
    return st.tuples(st.sampled_from([LO, HI]), st.integers(0, 1), st.sampled_from([LO, HI])).map(
        lambda e: static_event(e[0], e[1], {"x": e[2]}))


@settings(max_examples=300, deadline=None)
@given(st.lists(_events(), max_size=3), st.lists(_events(), max_size=3), st.sampled_from([LO, HI]))
def test_correspondence_search_matches_brute_force(t1, t2, L):
    g = LabelGroup(frozenset({"x"}))
    assert correspondence_exists(tuple(t1), tuple(t2), g, L) == correspondence_brute(tuple(t1), tuple(t2), g, L)


# ------------------------------------------------------------ erasure

def test_subtrace():
    assert is_subtrace((), (1, 2))
    assert is_subtrace((2, 3), (1, 2, 3))
    assert not is_subtrace((1, 3), (1, 2, 3))


def test_erasure_knowledge_uses_raw_segments():
    (_, tab), = tables(corpus_test("ce-counterexample"))
    t = tab.seqs[0]  # x = 0 emits two zeros
    assert k_ce(tab, LO, t[1:2]) == {0, 1}
    assert k_ce(tab, LO, t) == {0}


# ------------------------------------------------------------ forgetful

def test_automata():
    a = single_memory_automaton()
    assert a.run([1, 2, 3]) == 3
    assert a.states([1, 2]) == {None, 1, 2}
    assert perfect_recall_automaton().run([1, 2]) == (1, 2)
    assert absorbing_automaton().states([1, 2]) == {0}


def test_forgetful_variants():
    (_, tab), = tables(corpus_test("static-explicit"))
    assert check_forgetful(tab).kind == INSECURE
    assert check_forgetful(tab, perfect_recall_automaton()).kind == INSECURE
    # an attacker that forgets everything learns nothing
    assert check_forgetful(tab, absorbing_automaton()).kind == SECURE


# ------------------------------------------------------------- paralocks

FIG_SPECS = normalize_flowlocks({"x": {"a": ["D", "N"]}, "y": {"a": ["N"]}, "z": {"a": []}})
FIG_SRC = "open(D);\ny := x;\nclose(D);\nopen(N);\nz := y;"


def test_attacker_parsing():
    assert parse_attacker("a:{D,N}") == Attacker("a", frozenset({"D", "N"}))
    assert parse_attacker(" a : { } ") == Attacker("a", frozenset())
    assert str(Attacker("a", frozenset({"N", "D"}))) == "a:{D,N}"
    with pytest.raises(ValueError):
        parse_attacker("a")


def test_lock_encoding_labels():
    p = parse_program(FIG_SRC)
    _, g = encode_paralocks(p, FIG_SPECS, parse_attacker("a:{D}"), variables_of(p))
    assert show_label(g["x"]) == "s_N ? {a} <=> {}"
    assert show_label(g["y"]) == "s_N ? {a} <=> {}"
    assert show_label(g["z"]) == "{a}"


def test_lock_encoding_program():
    p = parse_program(FIG_SRC)
    enc, _ = encode_paralocks(p, FIG_SPECS, parse_attacker("a:{D}"), variables_of(p))
    # every assignment is followed by an output of its right-hand side
    assert show_program(enc) == (
        "EventOn(s_D);\n"
        "y := x;\n"
        "output(s_N ? {a} <=> {}, x);\n"
        "EventOff(s_D);\n"
        "EventOn(s_N);\n"
        "z := y;\n"
        "output({a}, y);\n")


def test_lock_encoding_errors():
    p = parse_program("open(Q); x := 1")
    with pytest.raises(ValueError):
        encode_paralocks(p, FIG_SPECS, parse_attacker("b:{}"), ["x"])
    specs = normalize_flowlocks({"x": {"a": ["A", "B", "C", "D"]}})
    with pytest.raises(ValueError):
        lock_attackers(parse_program("x := 1"), specs)


def test_lock_attackers_enumerate_subsets():
    atks = lock_attackers(parse_program(FIG_SRC), FIG_SPECS)
    assert [str(a) for a in atks] == ["a:{}", "a:{D}", "a:{N}", "a:{D,N}"]


def test_lock_verdicts():
    assert check(corpus_test("locks-encoding"), "paralocks").kind == SECURE
    v = check(corpus_test("locks-counterexample"), "paralocks")
    assert v.kind == INSECURE
    assert v.witness.init["h"] == 0


def test_non_lock_tests_are_not_applicable_for_locks():
    assert check(corpus_test("static-secure"), "paralocks").kind == NOT_APPLICABLE


def test_ap_instance_budget_is_configurable():
    assert ap_instance(budget=5).name == "ap"
