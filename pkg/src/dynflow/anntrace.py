"""Annotated-trace benchmark: schema, loading, generation, tagging and evaluation."""
from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import jsonschema

from .knowledge import TraceTable, degenerate
from .labels import Lattice, flows_to, parse_label
from .lang import DEFAULT_FUEL, try_run
from .policies import (
    INSECURE, NOT_APPLICABLE, SECURE, Verdict, ap_direct, ap_instance, ce_direct,
    ce_instance, check_framework, dynrelease_instance, encode_gradual_release,
    encode_tight_gr, fa_direct, fa_instance, gr_direct, gr_instance, pl_direct,
    pl_instance, replay_witness, tgr_direct, tgr_instance,
)
from .policies.framework import combine, default_attackers, groups_from_gamma, groups_from_traces
from .policies.paralocks import (
    Attacker, default_attackers as lock_attackers, encode_paralocks, mentioned_locks,
    normalize_flowlocks, parse_attacker,
)
from .syntax import Static, parse_program, variables_of
from .traces import OutEvent, Universe, extend

log = logging.getLogger(__name__)

DEFAULT_BOUND = 4096
ENCODINGS = ("gr", "tgr", "paralocks")

SCHEMA = {
    "type": "object",
    "required": ["secure", "persistent", "lattice", "traces"],
    "properties": {
        "name": {"type": "string"},
        "partition": {"type": "string"},
        "secure": {"type": "boolean"},
        "persistent": {"type": "boolean"},
        "lattice": {
            "type": "object",
            "required": ["levels"],
            "properties": {
                "levels": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "order": {"type": "array", "items": {
                    "type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2}},
            },
            "additionalProperties": False,
        },
        "source": {
            "oneOf": [{"type": "null"}, {
                "type": "object",
                "required": ["program"],
                "properties": {
                    "program": {"type": "string"},
                    "gamma": {"oneOf": [{"type": "null"}, {
                        "type": "object", "additionalProperties": {"type": "string"}}]},
                    "encoding": {"oneOf": [{"type": "null"}, {"enum": list(ENCODINGS)}]},
                    "flowlocks": {"type": "object", "additionalProperties": {
                        "type": "object", "additionalProperties": {
                            "type": "array", "items": {"type": "string"}}}},
                    "attackers": {"type": "array", "items": {"type": "string"}},
                },
                "additionalProperties": False,
            }],
        },
        "domains": {"oneOf": [{"type": "null"}, {
            "type": "object", "additionalProperties": {
                "type": "array", "items": {"type": "integer"}, "minItems": 1}}]},
        "traces": {"type": "array", "items": {
            "type": "object",
            "required": ["init", "outputs"],
            "properties": {
                "init": {"type": "object", "additionalProperties": {"type": ["integer", "boolean"]}},
                "attacker": {"type": "string"},
                "outputs": {"type": "array", "items": {
                    "type": "object",
                    "required": ["level", "value", "policy"],
                    "properties": {
                        "level": {"type": "string"},
                        "value": {"type": "integer"},
                        "policy": {"type": "object", "additionalProperties": {"type": "string"}},
                    },
                    "additionalProperties": False,
                }},
            },
            "additionalProperties": False,
        }},
        "provenance": {"type": "string"},
    },
    "additionalProperties": False,
}


class TestCaseError(ValueError):
    """Schema or consistency problem in a benchmark document."""

    __test__ = False


@dataclass
class Source:
    program: str
    gamma: Optional[dict] = None
    encoding: Optional[str] = None
    flowlocks: Optional[dict] = None
    attackers: Optional[list] = None


@dataclass
class TraceRecord:
    init: dict
    outputs: list  # of {"level", "value", "policy"} with string levels
    attacker: Optional[str] = None

    def to_json(self) -> dict:
        d = {"init": dict(self.init), "outputs": [dict(o) for o in self.outputs]}
        if self.attacker is not None:
            d["attacker"] = self.attacker
        return d


@dataclass
class TestCase:
    __test__ = False  # keep pytest from collecting this class

    secure: bool
    persistent: bool
    lattice: Lattice
    traces: list
    source: Optional[Source] = None
    domains: Optional[dict] = None
    provenance: str = ""
    name: str = ""
    partition: str = "new"
    path: Optional[str] = None

    @property
    def locks_based(self) -> bool:
        return self.source is not None and self.source.encoding == "paralocks"


# ------------------------------------------------------------- load / dump

def load_test(doc: Mapping, name: str = "") -> TestCase:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise TestCaseError(f"{name or 'test'}: schema violation: {exc.message}") from None
    lat = doc["lattice"]
    try:
        lattice = Lattice(tuple(lat["levels"]), tuple(tuple(p) for p in lat.get("order", [])))
    except ValueError as exc:
        raise TestCaseError(f"{name}: {exc}") from None
    src = doc.get("source")
    source = None
    if src is not None:
        source = Source(src["program"], src.get("gamma"), src.get("encoding"),
                        src.get("flowlocks"), src.get("attackers"))
        if source.encoding == "paralocks" and source.flowlocks is None:
            raise TestCaseError(f"{name}: a lock-based test needs flowlocks")
        if source.encoding != "paralocks" and source.gamma is None:
            raise TestCaseError(f"{name}: source without gamma")
    traces = [TraceRecord(dict(t["init"]), [dict(o) for o in t["outputs"]], t.get("attacker"))
              for t in doc["traces"]]
    test = TestCase(
        secure=doc["secure"], persistent=doc["persistent"], lattice=lattice, traces=traces,
        source=source, domains=doc.get("domains"), provenance=doc.get("provenance", ""),
        name=doc.get("name", name), partition=doc.get("partition", "new"),
    )
    _check_invariants(test)
    return test


def _check_invariants(test: TestCase) -> None:
    names = None
    for tr in test.traces:
        for o in tr.outputs:
            try:
                test.lattice.resolve(o["level"])
                for v in o["policy"].values():
                    test.lattice.resolve(v)
            except (KeyError, ValueError) as exc:
                raise TestCaseError(f"{test.name}: unknown level: {exc}") from None
            vs = set(o["policy"])
            if names is None:
                names = vs
            elif vs != names:
                raise TestCaseError(f"{test.name}: policy states bind different variable sets")
    inits = {frozenset(k for k, v in tr.init.items() if not isinstance(v, bool)) for tr in test.traces}
    if len(inits) > 1:
        raise TestCaseError(f"{test.name}: initial memories bind different variables")


def load_file(path) -> TestCase:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TestCaseError(f"{path}: invalid JSON: {exc}") from None
    test = load_test(doc, path.stem)
    test.path = str(path)
    return test


def find_tests(paths: Iterable) -> list:
    out = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            out.extend(sorted(p.glob("*.json")))
        elif p.exists():
            out.append(p)
        else:
            raise FileNotFoundError(str(p))
    return out


def load_corpus(paths: Iterable) -> list:
    return [load_file(p) for p in find_tests(paths)]


def corpus_dir() -> Path:
    return Path(__file__).parent / "corpus"


def dump_test(test: TestCase) -> dict:
    doc = {"name": test.name, "partition": test.partition,
           "secure": test.secure, "persistent": test.persistent,
           "lattice": {"levels": list(test.lattice.levels), "order": [list(p) for p in test.lattice.order]}}
    if test.source is None:
        doc["source"] = None
    else:
        s = {"program": test.source.program}
        if test.source.gamma is not None:
            s["gamma"] = dict(test.source.gamma)
        if test.source.encoding is not None:
            s["encoding"] = test.source.encoding
        if test.source.flowlocks is not None:
            s["flowlocks"] = test.source.flowlocks
        if test.source.attackers is not None:
            s["attackers"] = list(test.source.attackers)
        doc["source"] = s
    doc["domains"] = test.domains
    doc["traces"] = [t.to_json() for t in test.traces]
    doc["provenance"] = test.provenance
    return doc


def dumps_test(test: TestCase) -> str:
    return json.dumps(dump_test(test), indent=2, ensure_ascii=False) + "\n"


# -------------------------------------------------------------- sources

@dataclass
class Compiled:
    """A runnable program with its effective labels, for one attacker or none."""
    attacker: Optional[Attacker]
    program: object
    gamma: dict
    base: Optional[dict] = None  # static base levels before an encoding, if any


def _resolver(lattice: Lattice):
    return lattice.levelset


def compile_source(test: TestCase, observation: bool = False) -> list:
    """Effective programs: one, or one per attacker for lock-based tests."""
    src = test.source
    if src is None:
        raise TestCaseError(f"{test.name}: no source")
    prog = parse_program(src.program, _resolver(test.lattice))
    if src.encoding == "paralocks":
        specs = normalize_flowlocks(src.flowlocks)
        atks = ([parse_attacker(a) for a in src.attackers] if src.attackers
                else lock_attackers(prog, specs))
        out = []
        for atk in atks:
            p2, g2 = encode_paralocks(prog, specs, atk, variables_of(prog), observation=observation)
            out.append(Compiled(atk, p2, g2))
        return out
    from .syntax import events_of
    evs = events_of(prog)
    gamma = {x: parse_label(t, test.lattice, evs) for x, t in src.gamma.items()}
    missing = variables_of(prog) - set(gamma)
    if missing:
        raise TestCaseError(f"{test.name}: variables without a label: {sorted(missing)}")
    base = None
    if src.encoding in ("gr", "tgr"):
        if all(isinstance(b, Static) for b in gamma.values()):
            base = {x: b.levels for x, b in gamma.items()}
        enc = encode_gradual_release if src.encoding == "gr" else encode_tight_gr
        prog, gamma = enc(prog, gamma, test.lattice)
    return [Compiled(None, prog, gamma, base)]


def domain_memories(variables: Iterable[str], domains: Optional[Mapping], bound: int = DEFAULT_BOUND) -> list:
    """Cartesian product of the domains; unlisted variables start at 0."""
    names = sorted(set(variables) | set(domains or {}))
    doms = [list((domains or {}).get(x, [0])) for x in names]
    size = 1
    for d in doms:
        size *= len(d)
    if size > bound:
        raise TestCaseError(f"domain product {size} exceeds the bound {bound}")
    return [dict(zip(names, vals)) for vals in product(*doms)]


def generate_traces(program, gamma: Mapping, domains: Optional[Mapping] = None,
                    fuel: int = DEFAULT_FUEL, bound: int = DEFAULT_BOUND, memories=None) -> list:
    """(initial memory, extended outputs) for every terminating member."""
    if memories is None:
        memories = domain_memories(set(variables_of(program)) | set(gamma), domains, bound)
    out = []
    for m in memories:
        tr = try_run(program, m, fuel)
        if tr is None:
            continue
        out.append((dict(m), extend(tr, gamma)))
    return out


def _record(init: dict, seq_: Sequence[OutEvent], lattice: Lattice, attacker: Optional[str]) -> TraceRecord:
    outs = [{"level": lattice.render(e.level), "value": e.value,
             "policy": {x: lattice.render(ls) for x, ls in sorted(e.gamma.items())}} for e in seq_]
    return TraceRecord(dict(sorted(init.items())), outs, attacker)


def _inits(test: TestCase, attacker: Optional[str] = None) -> list:
    seen, out = set(), []
    for tr in test.traces:
        if attacker is not None and tr.attacker not in (None, attacker):
            continue
        key = tuple(sorted(tr.init.items()))
        if key not in seen:
            seen.add(key)
            out.append(dict(tr.init))
    return out


def source_runs(test: TestCase, fuel: int = DEFAULT_FUEL, observation: bool = False,
                from_domains: bool = False, bound: int = DEFAULT_BOUND) -> list:
    """[(Compiled, [(init, OutSeq)])] by re-running the source."""
    out = []
    for comp in compile_source(test, observation):
        tag = str(comp.attacker) if comp.attacker else None
        if from_domains:
            mems = domain_memories(set(variables_of(comp.program)) | set(comp.gamma), test.domains, bound)
        else:
            mems = _inits(test, tag)
        out.append((comp, generate_traces(comp.program, comp.gamma, fuel=fuel, memories=mems)))
    return out


def regenerate(test: TestCase, fuel: int = DEFAULT_FUEL, bound: int = DEFAULT_BOUND) -> list:
    """Trace records rebuilt from source (and domains, when given)."""
    recs = []
    for comp, runs in source_runs(test, fuel, from_domains=test.domains is not None, bound=bound):
        tag = str(comp.attacker) if comp.attacker else None
        recs.extend(_record(m, s, test.lattice, tag) for m, s in runs)
    return recs


def validate(test: TestCase, fuel: int = DEFAULT_FUEL) -> bool:
    """Byte-equal comparison of the listed traces against a fresh run."""
    if test.source is None:
        return True
    fresh = json.dumps([r.to_json() for r in regenerate(test, fuel)], sort_keys=True)
    listed = json.dumps([r.to_json() for r in test.traces], sort_keys=True)
    return fresh == listed


def build_test(name: str, program: str, gamma: Optional[Mapping], lattice: Lattice, *, secure: bool,
               persistent: bool, domains: Optional[Mapping] = None, encoding: Optional[str] = None,
               flowlocks: Optional[Mapping] = None, attackers: Optional[list] = None,
               provenance: str = "", partition: str = "new", memories: Optional[list] = None,
               fuel: int = DEFAULT_FUEL) -> TestCase:
    """Authoring aid: a test case whose traces come from running ``program``.

    Without ``domains`` the initial memories must be listed in ``memories``.
    """
    src = Source(program, dict(gamma) if gamma is not None else None, encoding,
                 {x: {a: sorted(ls) for a, ls in per.items()} for x, per in flowlocks.items()} if flowlocks else None,
                 attackers)
    test = TestCase(secure=secure, persistent=persistent, lattice=lattice, traces=[], source=src,
                    domains=dict(domains) if domains is not None else None, provenance=provenance,
                    name=name, partition=partition)
    if domains is None:
        if not memories:
            raise TestCaseError(f"{name}: need domains or explicit memories")
        tags = [str(a) for a in attackers] if attackers else [None]
        test.traces = [TraceRecord(dict(m), [], a) for a in tags for m in memories]
    test.traces = regenerate(test, fuel)
    return test


# -------------------------------------------------------------- tables

def _events_from_record(rec: TraceRecord, lattice: Lattice) -> tuple:
    out = []
    for o in rec.outputs:
        lv = lattice.resolve(o["level"])
        out.append(OutEvent(Static(lv), lv, o["value"], {x: lattice.resolve(v) for x, v in o["policy"].items()}))
    return tuple(out)


def _variables(init: Mapping) -> dict:
    return {k: v for k, v in init.items() if not isinstance(v, bool)}


def make_table(runs: Sequence, lattice: Optional[Lattice], persistent: bool, gamma: Optional[Mapping] = None,
               attackers: Optional[Sequence] = None, powerset: bool = False) -> TraceTable:
    mems = tuple(_variables(m) for m, _ in runs)
    seqs = tuple(s for _, s in runs)
    if gamma is not None:
        groups = groups_from_gamma({x: b for x, b in gamma.items() if x in mems[0]})
    else:
        groups = groups_from_traces(mems[0], seqs)
    atk = tuple(attackers) if attackers is not None else default_attackers(lattice, seqs, powerset)
    return TraceTable(Universe(mems), seqs, groups, atk, persistent, lattice)


def tables(test: TestCase, use_source: bool = False, fuel: int = DEFAULT_FUEL, powerset: bool = False,
           observation: bool = False) -> list:
    """[(Compiled or None, TraceTable)]: one per attacker for lock-based tests."""
    if use_source or observation:
        out = []
        for comp, runs in source_runs(test, fuel, observation=observation):
            atks = (frozenset({comp.attacker.actor}),) if comp.attacker else None
            out.append((comp, make_table(runs, test.lattice, test.persistent, comp.gamma, atks, powerset)))
        return out
    comps = compile_source(test) if test.source is not None else [None]
    out = []
    for comp in comps:
        tag = str(comp.attacker) if comp is not None and comp.attacker else None
        runs = [(r.init, _events_from_record(r, test.lattice)) for r in test.traces
                if tag is None or r.attacker == tag]
        if not runs:
            continue
        atks = (frozenset({comp.attacker.actor}),) if comp is not None and comp.attacker else None
        gamma = comp.gamma if comp is not None else None
        out.append((comp, make_table(runs, test.lattice, test.persistent, gamma, atks, powerset)))
    return out


# -------------------------------------------------------- applicability

def tag_applicability(test: TestCase) -> frozenset:
    """A: no upgrading anywhere; B: no downgrading anywhere."""
    up = down = False
    for rec in test.traces:
        prev = None
        for o in rec.outputs:
            cur = {x: test.lattice.resolve(v) for x, v in o["policy"].items()}
            if prev is not None:
                for x, ls in cur.items():
                    old = prev.get(x)
                    if old is None or old == ls:
                        continue
                    if flows_to(old, ls):
                        up = True
                    elif flows_to(ls, old):
                        down = True
            prev = cur
    tags = set()
    if not up:
        tags.add("A")
    if not down:
        tags.add("B")
    return frozenset(tags)


DEFAULT_MATRIX = {
    "dynrelease": "always",
    "dynrelease-tran": "always",
    "dynrelease-per": "always",
    "gr": "persistent",
    "tgr": "persistent",
    "ap": "transient or A",
    "ce": "transient and B",
    "fa-single": "always",
    "paralocks": "persistent",
}


def eval_rule(rule: str, persistent: bool, tags: frozenset) -> bool:
    """Tiny Boolean language over always/never/transient/persistent/A/B."""
    toks = rule.replace("(", " ( ").replace(")", " ) ").split()
    pos = [0]
    atoms = {"always": True, "never": False, "persistent": persistent, "transient": not persistent,
             "A": "A" in tags, "B": "B" in tags}

    def peek():
        return toks[pos[0]] if pos[0] < len(toks) else None

    def take():
        t = peek()
        if t is None:
            raise ValueError(f"incomplete applicability rule {rule!r}")
        pos[0] += 1
        return t

    def disj():
        v = conj()
        while peek() == "or":
            take()
            v = conj() or v
        return v

    def conj():
        v = neg()
        while peek() == "and":
            take()
            v = neg() and v
        return v

    def neg():
        t = take()
        if t == "not":
            return not neg()
        if t == "(":
            v = disj()
            if take() != ")":
                raise ValueError(f"unbalanced rule {rule!r}")
            return v
        if t not in atoms:
            raise ValueError(f"unknown word {t!r} in applicability rule")
        return atoms[t]

    v = disj()
    if peek() is not None:
        raise ValueError(f"trailing input in applicability rule {rule!r}")
    return v


def load_matrix(path) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or not all(isinstance(v, str) for v in doc.values()):
        raise TestCaseError("matrix file must map policy ids to rule strings")
    m = dict(DEFAULT_MATRIX)
    m.update(doc)
    for rule in m.values():
        eval_rule(rule, False, frozenset())
    return m


def applicable(test: TestCase, policy: str, matrix: Optional[Mapping] = None) -> bool:
    matrix = matrix or DEFAULT_MATRIX
    if policy not in matrix:
        raise KeyError(f"unknown policy {policy!r}")
    return eval_rule(matrix[policy], test.persistent, tag_applicability(test))


# ----------------------------------------------------------- checking

POLICIES = tuple(DEFAULT_MATRIX)
TABLE_POLICIES = ("dynrelease", "gr", "tgr", "ap", "ce", "fa-single", "paralocks")


def _instance(policy: str, test: TestCase, comp: Optional[Compiled]):
    if policy == "dynrelease":
        return dynrelease_instance(test.persistent)
    if policy == "dynrelease-tran":
        return dynrelease_instance(False)
    if policy == "dynrelease-per":
        return dynrelease_instance(True)
    if policy == "paralocks":
        specs = normalize_flowlocks(test.source.flowlocks)
        prog = parse_program(test.source.program, _resolver(test.lattice))
        return pl_instance(comp.attacker, mentioned_locks(prog, specs))
    return {"gr": gr_instance, "tgr": tgr_instance, "ap": ap_instance, "ce": ce_instance,
            "fa-single": fa_instance}[policy]()


def plan(test: TestCase, policy: str, fuel: int = DEFAULT_FUEL, powerset: bool = False) -> list:
    """[(instance, table)] pairs whose verdicts combine into the policy verdict."""
    if policy not in DEFAULT_MATRIX:
        raise KeyError(f"unknown policy {policy!r}")
    if policy == "paralocks":
        if not test.locks_based:
            return []
        tabs = tables(test, fuel=fuel, observation=True)
    else:
        tabs = tables(test, fuel=fuel, powerset=powerset)
    return [(_instance(policy, test, comp), tab) for comp, tab in tabs]


def check(test: TestCase, policy: str, fuel: int = DEFAULT_FUEL, powerset: bool = False) -> Verdict:
    """Run one policy on one test, ignoring the applicability matrix."""
    parts = plan(test, policy, fuel, powerset)
    if not parts:
        return Verdict(NOT_APPLICABLE, policy, note="no lock specification")
    verdicts = []
    for k, (inst, tab) in enumerate(parts):
        if degenerate(tab):
            log.warning("%s: no memory differs from another on a labeled variable only; "
                        "the verdict is vacuous", test.name)
        v = check_framework(inst, tab, k)
        verdicts.append(Verdict(v.kind, policy, v.witness))
    return combine(verdicts, policy)


def replay(test: TestCase, policy: str, verdict: Verdict, fuel: int = DEFAULT_FUEL) -> bool:
    """Re-derive the witness of an Insecure verdict from scratch."""
    if verdict.kind != INSECURE or verdict.witness is None:
        return False
    parts = plan(test, policy, fuel)
    inst, tab = parts[verdict.witness.table]
    return replay_witness(inst, tab, verdict.witness)


def direct_check(test: TestCase, policy: str, fuel: int = DEFAULT_FUEL) -> Optional[Verdict]:
    """The policy's original definition, where it is defined for this test; else None."""
    if policy == "gr" or policy == "tgr":
        if test.source is None or test.source.encoding != policy:
            return None
        (comp, tab), = tables(test, use_source=True, fuel=fuel)
        if comp.base is None:
            return None
        return gr_direct(tab, comp.base) if policy == "gr" else tgr_direct(tab, comp.base)
    if policy == "paralocks":
        if not test.locks_based:
            return None
        prog = parse_program(test.source.program, _resolver(test.lattice))
        locks = mentioned_locks(prog, normalize_flowlocks(test.source.flowlocks))
        vs = [pl_direct(tab, comp.attacker, locks, k)
              for k, (comp, tab) in enumerate(tables(test, fuel=fuel, observation=True))]
        return combine(vs, policy)
    fn = {"ap": ap_direct, "ce": ce_direct, "fa-single": fa_direct}.get(policy)
    if fn is None:
        return None
    return combine([fn(tab) for _, tab in tables(test, fuel=fuel)], policy)


# ---------------------------------------------------------- evaluation

@dataclass
class Entry:
    policy: str
    test: str
    verdict: str
    mark: str  # yes | no | n-a
    witness: Optional[str] = None


@dataclass
class ResultTable:
    policies: list
    tests: list
    entries: dict = field(default_factory=dict)  # (policy, test) -> Entry
    partitions: dict = field(default_factory=dict)  # test -> partition

    def mark(self, policy: str, test: str) -> str:
        return self.entries[(policy, test)].mark

    def counts(self, policy: str, partition: Optional[str] = None) -> dict:
        c = {"yes": 0, "no": 0, "n-a": 0}
        for t in self.tests:
            if partition is None or self.partitions.get(t) == partition:
                c[self.entries[(policy, t)].mark] += 1
        return c

    def row(self, policy: str) -> str:
        sym = {"yes": "✓", "no": "✗", "n-a": "–"}
        return "".join(sym[self.mark(policy, t)] for t in self.tests)

    def to_json(self) -> dict:
        return {
            "policies": list(self.policies),
            "tests": list(self.tests),
            "results": [vars(self.entries[(p, t)]) for p in self.policies for t in self.tests],
            "summary": {p: {part: self.counts(p, part) for part in sorted(set(self.partitions.values()))}
                        for p in self.policies},
        }


def _mark(test: TestCase, v: Verdict) -> str:
    if v.kind == NOT_APPLICABLE:
        return "n-a"
    return "yes" if (v.kind == SECURE) == test.secure else "no"


def _evaluate_one(args) -> list:
    test, policies, matrix, fuel = args
    out = []
    for p in policies:
        if not applicable(test, p, matrix):
            v = Verdict(NOT_APPLICABLE, p)
        else:
            v = check(test, p, fuel)
        w = v.witness.describe() if v.witness is not None else None
        out.append(Entry(p, test.name, v.kind, _mark(test, v), w))
    return out


def jobs_from_env() -> int:
    try:
        return max(1, int(os.environ.get("DYNFLOW_JOBS", "1")))
    except ValueError:
        return 1


def evaluate(policies: Sequence[str], tests: Sequence[TestCase], matrix: Optional[Mapping] = None,
             fuel: int = DEFAULT_FUEL, jobs: Optional[int] = None) -> ResultTable:
    matrix = dict(matrix or DEFAULT_MATRIX)
    for p in policies:
        if p not in matrix:
            raise KeyError(f"unknown policy {p!r}")
    tests = sorted(tests, key=lambda t: t.name)
    table = ResultTable(list(policies), [t.name for t in tests],
                        partitions={t.name: t.partition for t in tests})
    work = [(t, list(policies), matrix, fuel) for t in tests]
    jobs = jobs or jobs_from_env()
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_evaluate_one, work))
    else:
        results = [_evaluate_one(w) for w in work]
    for entries in results:
        for e in entries:
            table.entries[(e.policy, e.test)] = e
    return table
