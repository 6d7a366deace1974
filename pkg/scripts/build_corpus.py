#!/usr/bin/env python3
"""Regenerate the bundled first-party corpus from the program sources below.

Usage: python3 scripts/build_corpus.py [OUTDIR]
"""
from __future__ import annotations

import sys
from pathlib import Path

from dynflow.anntrace import build_test, corpus_dir, dumps_test
from dynflow.labels import Lattice

LH = Lattice(("L", "H"), (("L", "H"),))
MT = Lattice(("M", "T"), (("M", "T"),))
AT = Lattice(("A", "T"), (("A", "T"),))
ACTOR = Lattice(("a",))
LMH = Lattice(("L", "M", "H"), (("L", "M"), ("M", "H")))

BIT = [0, 1]


def cases():
    # bidding: the bid becomes public once bidding ends
    yield build_test(
        "app-A1-bidding", "output(L, 0);\nEventOn(end);\noutput(L, bid);",
        {"bid": "end ? L <- H"}, LH, secure=True, persistent=True, domains={"bid": BIT},
        provenance="bid released at the end of an auction; output only after the release")
    yield build_test(
        "app-A2-bidding-early", "output(L, bid);\nEventOn(end);\noutput(L, bid);",
        {"bid": "end ? L <- H"}, LH, secure=False, persistent=True, domains={"bid": BIT},
        provenance="bid leaked before the auction ends")
    # credit card copy that must be wiped once the card is erased
    yield build_test(
        "app-B1-erase", "copy := cc;\noutput(M, copy);\nEventOn(erase);\ncopy := 0;\noutput(M, copy);",
        {"cc": "erase ? T <- M", "copy": "M"}, MT, secure=True, persistent=False,
        domains={"cc": BIT, "copy": [0]},
        provenance="card number erased; the copy is cleared before the next output")
    yield build_test(
        "app-B2-erase-stale", "copy := cc;\noutput(M, copy);\nEventOn(erase);\noutput(M, copy);",
        {"cc": "erase ? T <- M", "copy": "M"}, MT, secure=False, persistent=False,
        domains={"cc": BIT, "copy": [0]},
        provenance="stale copy of an erased card number is output again")
    # revoked access to a book; the note is derived from the book
    corr = [{"book": b, "note": b // 2} for b in range(4)]
    yield build_test(
        "app-C1-revoke", "output(A, book / 2);\nEventOn(revoke);\noutput(A, note);",
        {"book": "revoke ? T <- A", "note": "A"}, AT, secure=True, persistent=True, memories=corr,
        provenance="after revocation only the already-public note is output; "
                   "initial memories correlate note with book")
    yield build_test(
        "app-C2-revoke-leak", "output(A, book / 2);\nEventOn(revoke);\noutput(A, book);",
        {"book": "revoke ? T <- A", "note": "A"}, AT, secure=False, persistent=True, memories=corr,
        provenance="the book is output in full after access is revoked")
    yield build_test(
        "ce-counterexample", "output(L, 0);\nEventOn(up);\nif (x == 0) {\n  output(L, 0);\n}",
        {"x": "up ? H <- L"}, LH, secure=False, persistent=False, domains={"x": BIT},
        provenance="the presence of an output after x becomes secret reveals x; "
                   "a mid-run observer cannot tell")
    yield build_test(
        "locks-counterexample",
        "open(D);\nif (h) {\n  l2 := h1;\n}\nclose(D);\nl := 0;",
        None, ACTOR, secure=True, persistent=True, encoding="paralocks",
        flowlocks={"h": {"a": ["D"]}, "h1": {"a": ["D"]}, "l": {"a": []}, "l2": {"a": []}},
        attackers=["a:{}", "a:{D}"],
        domains={"h": BIT, "h1": BIT, "l": BIT, "l2": BIT},
        provenance="flow from h under an open lock followed by an unrelated public assignment")
    yield build_test(
        "locks-encoding", "open(D);\ny := x;\nclose(D);\nopen(N);\nz := y;",
        None, ACTOR, secure=True, persistent=True, encoding="paralocks",
        flowlocks={"x": {"a": ["D", "N"]}, "y": {"a": ["N"]}, "z": {"a": []}},
        domains={"x": BIT, "y": BIT, "z": BIT},
        provenance="each assignment moves data only while the locks it needs are open")
    yield build_test(
        "gr-branch", "if (h) {\n  l2 := declassify(h1);\n}\nl := 0;\noutput(L, l);",
        {"h": "H", "h1": "H", "l": "L", "l2": "L"}, LH, secure=True, persistent=True, encoding="gr",
        domains={"h": BIT, "h1": BIT, "l": BIT, "l2": BIT},
        provenance="a declassification that happens only on one branch; nothing is output from it")
    yield build_test(
        "challenge-2", "if (x > 0) {\n  output(L, 1);\n}\noutput(L, 1);\nEventOn(s);\noutput(L, 2);",
        {"x": "s ? H <- L"}, LH, secure=True, persistent=False, domains={"x": BIT},
        provenance="x is public at first; the last output carries no information")
    yield build_test(
        "challenge-3", "if (x > 0) {\n  output(L, 1);\n}\nEventOn(s);\nif (x <= 0) {\n  output(L, 1);\n}",
        {"x": "s ? L <- H"}, LH, secure=True, persistent=False, domains={"x": BIT},
        provenance="the first output alone would leak, but x is public by the last one")
    yield build_test(
        "laundering", "x := h;\nEventOn(s);\noutput(L, x);",
        {"x": "s ? L <- H", "h": "H"}, LH, secure=False, persistent=False,
        domains={"x": BIT, "h": BIT},
        provenance="h is laundered through x, whose label is later relaxed")
    yield build_test(
        "tgr-fixture", "l := declassify(x);\noutput(L, y);",
        {"x": "H", "y": "H", "l": "L"}, LH, secure=False, persistent=True, encoding="tgr",
        domains={"x": BIT, "y": BIT, "l": [0]},
        provenance="y is output while only x is being declassified")
    yield build_test(
        "gr-declassify", "l := declassify(h);\noutput(L, l);", {"h": "H", "l": "L"}, LH,
        secure=True, persistent=True, encoding="gr", domains={"h": BIT, "l": [0]},
        provenance="plain declassification followed by a public output")
    yield build_test(
        "gr-leak", "l := declassify(h1);\noutput(L, h);", {"h": "H", "h1": "H", "l": "L"}, LH,
        secure=False, persistent=True, encoding="gr", domains={"h": BIT, "h1": BIT, "l": [0]},
        provenance="a secret other than the declassified one is output outside any release")
    yield build_test(
        "tgr-declassify", "l := declassify(x);\noutput(L, l + 1);", {"x": "H", "y": "H", "l": "L"}, LH,
        secure=True, persistent=True, encoding="tgr", domains={"x": BIT, "y": BIT, "l": [0]},
        provenance="only the declassified variable reaches the public output")
    # static sanity cases
    yield build_test(
        "static-explicit", "l := h;\noutput(L, l);", {"h": "H", "l": "L"}, LH,
        secure=False, persistent=True, domains={"h": BIT, "l": [0]},
        provenance="direct copy of a secret to a public output")
    yield build_test(
        "static-implicit", "if (h) {\n  output(L, 1);\n} else {\n  output(L, 0);\n}", {"h": "H"}, LH,
        secure=False, persistent=True, domains={"h": BIT},
        provenance="branch on a secret")
    yield build_test(
        "static-secure", "output(H, h);\noutput(L, l + 1);", {"h": "H", "l": "L"}, LH,
        secure=True, persistent=True, domains={"h": BIT, "l": BIT},
        provenance="secrets go to the secret channel only")
    yield build_test(
        "three-level-downgrade", "output(M, x);\nEventOn(d);\noutput(L, x);",
        {"x": "d ? L <- M"}, LMH, secure=True, persistent=True, domains={"x": BIT},
        provenance="middle-level data made public by an event")
    yield build_test(
        "three-level-leak", "output(L, x);\nEventOn(d);\noutput(M, x);",
        {"x": "d ? L <- M"}, LMH, secure=False, persistent=True, domains={"x": BIT},
        provenance="public output of middle-level data before the event")
    yield build_test(
        "transient-rerelease", "output(L, x);\nEventOn(e);\noutput(L, x);",
        {"x": "e ? H <- L"}, LH, secure=False, persistent=False, domains={"x": BIT},
        provenance="x was public, then made secret; a transient policy forbids repeating it")
    yield build_test(
        "persistent-rerelease", "output(L, x);\nEventOn(e);\noutput(L, x);",
        {"x": "e ? H <- L"}, LH, secure=True, persistent=True, domains={"x": BIT},
        provenance="same program, persistent reading: re-release is permitted")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    out = Path(argv[0]) if argv else corpus_dir()
    out.mkdir(parents=True, exist_ok=True)
    for t in cases():
        (out / f"{t.name}.json").write_text(dumps_test(t), encoding="utf-8")
        print(f"wrote {t.name} ({len(t.traces)} traces)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
