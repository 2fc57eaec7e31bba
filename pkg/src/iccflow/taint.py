"""Flow-, field- and context-sensitive taint propagation over instrumented code.

The engine is an IFDS-style tabulation: dataflow facts are access paths (a
variable plus a bounded selector chain), transfer functions are distributive,
and procedures are summarized per entry fact so a callee analyzed under one
caller's fact is reused at every other call site with the same fact — never
merged across distinct entry facts. That per-entry-fact reuse is what keeps
two components sharing a helper from contaminating each other.

Facts carry their originating source statement, and every tabulation step
records a predecessor, so each reported (origin, sink) pair comes with a
reconstructed witness path of CFG-connected statements.
"""

from __future__ import annotations

import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

from .combine import build_iac_graph, combine, split_graph
from .icc import IccLink
from .instrument import InstrumentError, instrument_model
from .ir import (
    AppModel,
    Assign,
    Block,
    Branch,
    Call,
    Component,
    Const,
    Diagnostic,
    FieldLoad,
    FieldStore,
    Goto,
    StmtId,
    GetExtra,
    GetIntent,
    Method,
    NewIntent,
    NewObj,
    PutExtra,
    Return,
    SetResult,
    SinkCall,
    SourceCall,
    Stmt,
    warning,
)

# ---------------------------------------------------------------------------
# Source/sink configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SourceSinkConfig:
    sources: frozenset[str] = frozenset()
    sinks: frozenset[str] = frozenset()


def parse_config(text: str, path: Optional[str] = None) -> SourceSinkConfig:
    sources, sinks = set(), set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[0] not in ("source", "sink"):
            where = f"{path or '<config>'}:{lineno}"
            raise ValueError(f"{where}: expected 'source <name>' or 'sink <name>', got {raw.strip()!r}")
        (sources if parts[0] == "source" else sinks).add(parts[1])
    return SourceSinkConfig(frozenset(sources), frozenset(sinks))


def load_config(path: str) -> SourceSinkConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), path)


# ---------------------------------------------------------------------------
# Inter-component control-flow graph
# ---------------------------------------------------------------------------
#
# Node shapes (all plain tuples, mk = (app, class, method)):
#   ("entry", mk)           procedure entry
#   ("exit", mk)            procedure exit
#   ("stmt", sid)           one statement
#   ("ret", sid)            return site of a call statement
#   ("retval", (mk, label)) a block's return terminator (binds @ret)
#
# Edge kinds: normal, call_to_start, call_to_return, exit_to_return.

Node = tuple
MethodKey = tuple[str, str, str]


@dataclass
class CallInfo:
    """Argument/parameter wiring for one call-like statement."""

    callee: MethodKey
    args: tuple[str, ...]
    params: tuple[str, ...]
    dst: Optional[str]


@dataclass
class Cfg:
    model: AppModel
    succ: dict[Node, list[tuple[Node, str]]] = field(default_factory=dict)
    roots: list[Node] = field(default_factory=list)
    stmts: dict[StmtId, Stmt] = field(default_factory=dict)
    calls: dict[StmtId, CallInfo] = field(default_factory=dict)
    retvar: dict[tuple[MethodKey, str], Optional[str]] = field(default_factory=dict)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def add_edge(self, a: Node, b: Node, kind: str) -> None:
        lst = self.succ.setdefault(a, [])
        if (b, kind) not in lst:
            lst.append((b, kind))


def _effective_term(method: Method, idx: int):
    block = method.blocks[idx]
    term = block.term
    if type(term).__name__ == "Fallthrough":
        if idx + 1 < len(method.blocks):
            return Goto(method.blocks[idx + 1].label)
        return Return()
    return term


class _MethodShape:
    """Per-method node layout with empty-block elision."""

    def __init__(self, cfg: Cfg, comp: Component, method: Method):
        self.cfg = cfg
        self.comp = comp
        self.method = method
        self.mk: MethodKey = (comp.origin_app, comp.name, method.name)
        self.index = {b.label: i for i, b in enumerate(method.blocks)}
        self._first: dict[str, list[Node]] = {}

    def first_real(self, label: str, _guard: Optional[set] = None) -> list[Node]:
        """First actual node(s) reached when control enters the block."""
        if label in self._first:
            return self._first[label]
        guard = _guard if _guard is not None else set()
        if label in guard:
            return []
        guard.add(label)
        idx = self.index.get(label)
        if idx is None:
            return []
        block = self.method.blocks[idx]
        if block.stmts:
            out = [("stmt", block.stmts[0].sid)]
        else:
            term = _effective_term(self.method, idx)
            if isinstance(term, Return):
                out = [("retval", (self.mk, label))]
            elif isinstance(term, Goto):
                out = self.first_real(term.label, guard)
            else:  # Branch
                left = self.first_real(term.left, guard)
                right = self.first_real(term.right, guard)
                out = left + [n for n in right if n not in left]
        self._first[label] = out
        return out

    def term_targets(self, idx: int) -> list[Node]:
        term = _effective_term(self.method, idx)
        label = self.method.blocks[idx].label
        if isinstance(term, Return):
            return [("retval", (self.mk, label))]
        if isinstance(term, Goto):
            return self.first_real(term.label)
        left = self.first_real(term.left)
        right = self.first_real(term.right)
        return left + [n for n in right if n not in left]


def _resolve_callee(
    cfg: Cfg,
    comp: Component,
    stmt: Call,
    classes: dict[tuple[str, str], Component],
    by_name: dict[str, list[Component]],
    by_qualified: dict[str, Component],
) -> Optional[tuple[Component, Method]]:
    if stmt.cls is None:
        target: Optional[Component] = comp
    elif "/" in stmt.cls:
        target = by_qualified.get(stmt.cls)
    else:
        candidates = by_name.get(stmt.cls, [])
        if len(candidates) > 1:
            cfg.diagnostics.append(
                warning(f"ambiguous callee class {stmt.cls!r} at {stmt.sid}")
            )
            return None
        target = candidates[0] if candidates else None
    if target is None:
        cfg.diagnostics.append(
            warning(f"call to unknown class {stmt.cls!r} at {stmt.sid}")
        )
        return None
    m = target.find_method(stmt.method)
    if m is None:
        cfg.diagnostics.append(
            warning(f"call to unknown method {target.name}.{stmt.method} at {stmt.sid}")
        )
        return None
    return target, m


def _call_info_for(
    cfg: Cfg,
    comp: Component,
    stmt: Stmt,
    classes: dict[tuple[str, str], Component],
    by_name: dict[str, list[Component]],
    by_qualified: dict[str, Component],
) -> Optional[CallInfo]:
    """Call wiring for a statement, or None when it is opaque.

    get_intent / set_result keep their surface syntax but gain call semantics
    once the instrumenter has synthesized the receiving methods; before that
    they are opaque (get_intent yields a clean value, set_result is a no-op).
    """
    if isinstance(stmt, Call):
        resolved = _resolve_callee(cfg, comp, stmt, classes, by_name, by_qualified)
        if resolved is None:
            return None
        target, m = resolved
        return CallInfo(
            (target.origin_app, target.name, m.name), stmt.args, m.params, stmt.dst
        )
    if isinstance(stmt, GetIntent):
        m = comp.find_method("getIntent")
        if m is None or not m.synthetic:
            return None
        return CallInfo((comp.origin_app, comp.name, m.name), ("this",), m.params, stmt.dst)
    if isinstance(stmt, SetResult):
        m = comp.find_method("setResult")
        if m is None or not m.synthetic:
            return None
        return CallInfo(
            (comp.origin_app, comp.name, m.name), ("this", stmt.intent), m.params, None
        )
    return None


def build_cfg(model: AppModel) -> Cfg:
    """Link per-method flow graphs through call/return edges.

    Roots are the dummyMain entries of startable components (components whose
    ``rooted`` flag is set, or that declare a filter when the flag is unset)
    plus any method literally named ``main``. Unreachable methods keep their
    nodes but are never rooted.
    """
    cfg = Cfg(model=model)
    classes: dict[tuple[str, str], Component] = {}
    by_name: dict[str, list[Component]] = {}
    by_qualified: dict[str, Component] = {}
    for comp in model.components:
        classes[(comp.origin_app, comp.name)] = comp
        by_name.setdefault(comp.name, []).append(comp)
        by_qualified[comp.qualified_name] = comp

    shapes: dict[MethodKey, _MethodShape] = {}
    for comp in model.components:
        for method in comp.methods():
            shape = _MethodShape(cfg, comp, method)
            shapes[shape.mk] = shape

    # intra-method edges first, then call wiring
    for shape in shapes.values():
        mk, method, comp = shape.mk, shape.method, shape.comp
        entry: Node = ("entry", mk)
        exit_: Node = ("exit", mk)
        cfg.succ.setdefault(entry, [])
        cfg.succ.setdefault(exit_, [])
        if method.blocks:
            for n in shape.first_real(method.blocks[0].label):
                cfg.add_edge(entry, n, "normal")
        else:
            pass  # parser never produces this; entry simply has no successors
        for i, block in enumerate(method.blocks):
            term = _effective_term(method, i)
            if isinstance(term, Return):
                rv: Node = ("retval", (mk, block.label))
                cfg.retvar[(mk, block.label)] = term.var
                cfg.add_edge(rv, exit_, "normal")
            nodes = [("stmt", s.sid) for s in block.stmts]
            for s in block.stmts:
                cfg.stmts[s.sid] = s
            targets = shape.term_targets(i)
            for j, n in enumerate(nodes):
                stmt = block.stmts[j]
                info = _call_info_for(cfg, comp, stmt, classes, by_name, by_qualified)
                nxt = nodes[j + 1 : j + 2] or targets
                if info is not None:
                    cfg.calls[stmt.sid] = info
                    callee_mk = info.callee
                    ret: Node = ("ret", stmt.sid)
                    cfg.add_edge(n, ("entry", callee_mk), "call_to_start")
                    cfg.add_edge(n, ret, "call_to_return")
                    cfg.add_edge(("exit", callee_mk), ret, "exit_to_return")
                    for m in nxt:
                        cfg.add_edge(ret, m, "normal")
                else:
                    for m in nxt:
                        cfg.add_edge(n, m, "normal")
            if not nodes and isinstance(term, Return):
                pass  # retval edge already added; predecessors route via first_real

    for comp in model.components:
        rooted = comp.rooted if comp.rooted is not None else bool(comp.filters)
        if rooted and comp.kind.is_component:
            dm = comp.find_method("dummyMain")
            if dm is not None:
                cfg.roots.append(("entry", (comp.origin_app, comp.name, dm.name)))
        for method in comp.methods():
            if method.name == "main":
                cfg.roots.append(("entry", (comp.origin_app, comp.name, method.name)))
    return cfg


# ---------------------------------------------------------------------------
# Facts and transfer functions
# ---------------------------------------------------------------------------

K = 2  # access-path bound: base plus at most K selectors
WILD = ("*",)  # wildcard selector; matches any selector and any extension


class Fact(NamedTuple):
    """Taint on an access path: base variable + selector chain + origin."""

    base: str
    chain: tuple
    origin: Optional[StmtId]


ZERO = Fact("@zero", (), None)
RET = "@ret"  # pseudo-variable binding a method's returned value


def _truncate(chain: tuple) -> tuple:
    if len(chain) > K:
        return chain[: K - 1] + (WILD,)
    return chain


def _stmt_gens(stmt: Stmt, config: SourceSinkConfig) -> list[Fact]:
    if isinstance(stmt, SourceCall) and stmt.source in config.sources:
        return [Fact(stmt.dst, (), stmt.sid)]
    return []


def _stmt_flow(stmt: Stmt, f: Fact) -> list[Fact]:
    """Distributive transfer for one non-call statement and one fact."""
    if isinstance(stmt, Assign):
        out = [] if f.base == stmt.dst else [f]
        if f.base == stmt.src:
            out.append(Fact(stmt.dst, f.chain, f.origin))
        return out

    if isinstance(stmt, (Const, NewIntent, NewObj, SourceCall, GetIntent)):
        # fresh clean value into dst (sources gen separately from zero)
        return [] if f.base == stmt.dst else [f]

    if isinstance(stmt, PutExtra):
        out = []
        killed = (
            f.base == stmt.intent
            and f.chain
            and stmt.key.is_literal
            and f.chain[0] == ("e", stmt.key.text)
        )
        if not killed:
            out.append(f)
        if f.base == stmt.value:
            sel = ("e", stmt.key.text) if stmt.key.is_literal else WILD
            out.append(Fact(stmt.intent, _truncate((sel,) + f.chain), f.origin))
        return out

    if isinstance(stmt, GetExtra):
        out = [] if f.base == stmt.dst else [f]
        if f.base == stmt.intent and f.chain:
            head = f.chain[0]
            if head == WILD:
                out.append(Fact(stmt.dst, (), f.origin))
                out.append(Fact(stmt.dst, (WILD,), f.origin))
            elif head[0] == "e" and (not stmt.key.is_literal or head[1] == stmt.key.text):
                out.append(Fact(stmt.dst, f.chain[1:], f.origin))
        return out

    if isinstance(stmt, FieldStore):
        out = []
        killed = f.base == stmt.obj and f.chain and f.chain[0] == ("f", stmt.fld)
        if not killed:
            out.append(f)
        if f.base == stmt.src:
            out.append(Fact(stmt.obj, _truncate((("f", stmt.fld),) + f.chain), f.origin))
        return out

    if isinstance(stmt, FieldLoad):
        out = [] if f.base == stmt.dst else [f]
        if f.base == stmt.obj and f.chain:
            head = f.chain[0]
            if head == WILD:
                out.append(Fact(stmt.dst, (), f.origin))
                out.append(Fact(stmt.dst, (WILD,), f.origin))
            elif head == ("f", stmt.fld):
                out.append(Fact(stmt.dst, f.chain[1:], f.origin))
        return out

    if isinstance(stmt, Call):  # unresolved callee: opaque, result is clean
        return [] if stmt.dst is not None and f.base == stmt.dst else [f]

    # set_target/set_action/set_category/set_data_type carry no taint;
    # sink/icc/finish/opaque set_result leave facts untouched
    return [f]


# ---------------------------------------------------------------------------
# Tabulation
# ---------------------------------------------------------------------------


@dataclass
class SinkHit:
    fact: Fact
    sink: StmtId
    node: Node
    sink_name: str


@dataclass
class TaintResult:
    hits: list[SinkHit] = field(default_factory=list)
    preds: dict = field(default_factory=dict)
    diagnostics: list[Diagnostic] = field(default_factory=list)


def _map_into(d: Fact, info: CallInfo) -> list[Fact]:
    out = []
    for a, p in zip(info.args, info.params):
        if d.base == a:
            out.append(Fact(p, d.chain, d.origin))
    return out


def _map_back(d: Fact, info: CallInfo) -> list[Fact]:
    out = []
    if d.base == RET:
        if info.dst is not None:
            out.append(Fact(info.dst, d.chain, d.origin))
        return out
    for a, p in zip(info.args, info.params):
        # empty-chain param facts are the callee's own value binding and die
        # with the frame; only field/extra extensions travel back
        if d.base == p and d.chain:
            out.append(Fact(a, d.chain, d.origin))
    return out


def propagate(cfg: Cfg, config: SourceSinkConfig) -> TaintResult:
    """Worklist tabulation with per-entry-fact procedure summaries."""
    result = TaintResult()
    preds = result.preds
    path_edges: set[tuple] = set()
    work: deque[tuple] = deque()
    end_summary: dict[tuple, dict[Fact, None]] = {}
    incoming: dict[tuple, list[tuple]] = {}

    def prop(mk: MethodKey, d1: Fact, n: Node, d2: Fact, pred) -> None:
        key = (mk, d1, n, d2)
        if key in path_edges:
            return
        path_edges.add(key)
        if pred is not None:
            preds.setdefault((n, d2), pred)
        work.append(key)

    for root in cfg.roots:
        prop(root[1], ZERO, root, ZERO, None)

    def apply_summary(
        caller_mk: MethodKey,
        caller_d1: Fact,
        call_node: Node,
        d_at_call: Fact,
        info: CallInfo,
        exit_node: Node,
        d_exit: Fact,
    ) -> None:
        ret_node: Node = ("ret", call_node[1])
        for dr in _map_back(d_exit, info):
            prop(
                caller_mk,
                caller_d1,
                ret_node,
                dr,
                ("summary", call_node, d_at_call, exit_node, d_exit),
            )

    while work:
        mk, d1, n, d2 = work.popleft()
        kind = n[0]

        if kind == "stmt":
            sid = n[1]
            stmt = cfg.stmts[sid]
            if (
                isinstance(stmt, SinkCall)
                and stmt.sink in config.sinks
                and d2 is not ZERO
                and d2.base == stmt.var
            ):
                result.hits.append(SinkHit(d2, sid, n, stmt.sink))

            info = cfg.calls.get(sid)
            if info is not None:
                callee = info.callee
                entry_node: Node = ("entry", callee)
                exit_node: Node = ("exit", callee)
                ret_node: Node = ("ret", sid)
                mapped = [ZERO] if d2 is ZERO else _map_into(d2, info)
                for dp in mapped:
                    prop(callee, dp, entry_node, dp,
                         ("xfer", n, d2) if dp is not ZERO else None)
                    ckey = (callee, dp)
                    waiters = incoming.setdefault(ckey, [])
                    item = (n, d2, mk, d1)
                    if item not in waiters:
                        waiters.append(item)
                    for d_exit in end_summary.get(ckey, ()):
                        apply_summary(mk, d1, n, d2, info, exit_node, d_exit)
                # call_to_return: facts not entering the callee flow around it
                if d2 is ZERO:
                    prop(mk, d1, ret_node, ZERO, None)
                else:
                    if info.dst is not None and d2.base == info.dst:
                        pass  # the call's result overwrites dst
                    elif d2.base in info.args and d2.chain:
                        pass  # travels through the callee; mapped back at exit
                    else:
                        prop(mk, d1, ret_node, d2, ("flow", n, d2))
                continue

        if kind == "exit":
            skey = (mk, d1)
            sums = end_summary.setdefault(skey, {})
            if d2 in sums:
                continue
            sums[d2] = None
            for call_node_sid, d_at_call, caller_mk, caller_d1 in list(
                incoming.get(skey, ())
            ):
                info = cfg.calls[call_node_sid[1]]
                apply_summary(
                    caller_mk, caller_d1, call_node_sid, d_at_call, info, n, d2
                )
            continue

        # normal flow
        outs: list[tuple[Fact, Optional[tuple]]]
        if kind == "stmt":
            stmt = cfg.stmts[n[1]]
            if d2 is ZERO:
                outs = [(ZERO, None)]
                outs += [(g, ("gen", n)) for g in _stmt_gens(stmt, config)]
            else:
                outs = [(f, ("flow", n, d2)) for f in _stmt_flow(stmt, d2)]
        elif kind == "retval":
            if d2 is ZERO:
                outs = [(ZERO, None)]
            else:
                outs = [(d2, ("flow", n, d2))]
                rv = cfg.retvar.get(n[1])
                if rv is not None and d2.base == rv:
                    outs.append((Fact(RET, d2.chain, d2.origin), ("flow", n, d2)))
        else:  # entry, ret
            outs = [(d2, ("flow", n, d2) if d2 is not ZERO else None)]
        for m, ekind in cfg.succ.get(n, ()):
            if ekind != "normal":
                continue
            for f, pred in outs:
                prop(mk, d1, m, f, pred)

    return result


# ---------------------------------------------------------------------------
# Path extraction and classification
# ---------------------------------------------------------------------------


@dataclass
class TaintedPath:
    stmts: tuple[StmtId, ...]
    source: StmtId
    sink: StmtId
    source_name: str
    sink_name: str
    klass: str  # "Intra" | "ICC" | "IAC"
    apps: tuple[str, ...]


class PathReconstructionError(Exception):
    """A pred chain failed to reach its source — an internal invariant bug."""


def _trace(node: Node, fact: Fact, preds: dict, stop_at_entry: bool) -> tuple[list[Node], bool]:
    """Walk pred records backwards; returns (source-first nodes, complete?)."""
    out = [node]
    n, d = node, fact
    while True:
        pr = preds.get((n, d))
        if pr is None:
            return list(reversed(out)), False
        tag = pr[0]
        if tag == "gen":
            out.append(pr[1])
            return list(reversed(out)), True
        if tag == "xfer":
            if stop_at_entry:
                return list(reversed(out)), False
            n, d = pr[1], pr[2]
            out.append(n)
        elif tag == "flow":
            n, d = pr[1], pr[2]
            out.append(n)
        elif tag == "summary":
            _, call_node, d_call, exit_node, d_exit = pr
            inner, complete = _trace(exit_node, d_exit, preds, stop_at_entry=True)
            out.extend(reversed(inner))
            if complete:
                return list(reversed(out)), True
            n, d = call_node, d_call
            out.append(n)
        else:  # pragma: no cover - exhaustive
            raise PathReconstructionError(f"unknown pred record {tag!r}")


def classify_path(stmt_ids: Iterable[StmtId], model: AppModel) -> str:
    """IAC when statements span two origin apps, ICC when two components.

    Statements in plain helper classes (the synthesized ICC helper lives in
    one) carry no app or component weight of their own.
    """
    comp_of = {(c.origin_app, c.name): c for c in model.components}
    apps: set[str] = set()
    comps: set[tuple[str, str]] = set()
    for sid in stmt_ids:
        comp = comp_of.get((sid.app, sid.cls))
        if comp is None or not comp.kind.is_component:
            continue
        apps.add(comp.origin_app)
        comps.add((comp.origin_app, comp.name))
    if len(apps) >= 2:
        return "IAC"
    if len(comps) >= 2:
        return "ICC"
    return "Intra"


def extract_paths(result: TaintResult, cfg: Cfg) -> list[TaintedPath]:
    """One witness path per distinct (origin, sink) pair, in sorted order."""
    paths: dict[tuple[StmtId, StmtId], TaintedPath] = {}
    for hit in result.hits:
        assert hit.fact.origin is not None
        key = (hit.fact.origin, hit.sink)
        if key in paths:
            continue
        nodes, complete = _trace(hit.node, hit.fact, result.preds, stop_at_entry=False)
        if not complete:
            raise PathReconstructionError(
                f"pred chain for {hit.fact} at {hit.sink} never reached its source"
            )
        sids = [n[1] for n in nodes if n[0] == "stmt"]
        source_stmt = cfg.stmts[sids[0]]
        assert isinstance(source_stmt, SourceCall) and sids[0] == hit.fact.origin
        klass = classify_path(sids, cfg.model)
        comp_of = {(c.origin_app, c.name): c for c in cfg.model.components}
        apps = sorted(
            {
                comp_of[(s.app, s.cls)].origin_app
                for s in sids
                if (s.app, s.cls) in comp_of and comp_of[(s.app, s.cls)].kind.is_component
            }
        )
        paths[key] = TaintedPath(
            stmts=tuple(sids),
            source=hit.fact.origin,
            sink=hit.sink,
            source_name=source_stmt.source,
            sink_name=hit.sink_name,
            klass=klass,
            apps=tuple(apps),
        )
    return [paths[k] for k in sorted(paths)]


# ---------------------------------------------------------------------------
# Pipeline orchestration
# ---------------------------------------------------------------------------


@dataclass
class AnalysisReport:
    paths: list[TaintedPath] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    sets: list[tuple[str, ...]] = field(default_factory=list)
    timings: list[tuple[str, float]] = field(default_factory=list)


def _analyze_set(
    app_ids: tuple[str, ...],
    by_id: dict[str, AppModel],
    links: list[IccLink],
    config: SourceSinkConfig,
) -> tuple[list[TaintedPath], list[Diagnostic], float]:
    started = time.perf_counter()
    models = [by_id[i] for i in app_ids]
    merged = models[0] if len(models) == 1 else combine(models)
    diags: list[Diagnostic] = []
    try:
        inst = instrument_model(merged, links)
    except InstrumentError as exc:
        return [], [Diagnostic("error", str(exc))], time.perf_counter() - started
    cfg = build_cfg(inst)
    diags.extend(cfg.diagnostics)
    res = propagate(cfg, config)
    paths = extract_paths(res, cfg)
    return paths, diags, time.perf_counter() - started


def analyze(
    apps: list[AppModel],
    links: list[IccLink],
    config: SourceSinkConfig,
    max_len: int = 2,
    jobs: int = 1,
) -> AnalysisReport:
    """Scope, combine, instrument and propagate over a whole corpus.

    The corpus is split into connected app groups bounded by ``max_len``;
    each group runs the full pipeline independently (optionally in
    parallel), and results merge deterministically: overlapping groups may
    rediscover the same (origin, sink) pair, which is reported once.
    """
    report = AnalysisReport()
    graph = build_iac_graph([a.app_id for a in apps], links)
    groups = [tuple(sorted(s)) for s in split_graph(graph, max_len)]
    report.sets = groups
    by_id = {a.app_id: a for a in apps}

    def run(group: tuple[str, ...]):
        return _analyze_set(group, by_id, links, config)

    if jobs > 1 and len(groups) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, groups))
    else:
        results = [run(g) for g in groups]

    seen: set[tuple[StmtId, StmtId]] = set()
    merged_paths: list[TaintedPath] = []
    for group, (paths, diags, elapsed) in zip(groups, results):
        report.timings.append(("+".join(group), elapsed))
        report.diagnostics.extend(diags)
        for p in paths:
            key = (p.source, p.sink)
            if key not in seen:
                seen.add(key)
                merged_paths.append(p)
    report.paths = sorted(merged_paths, key=lambda p: (p.source, p.sink))
    return report


def render_report(report: AnalysisReport, fmt: str = "text") -> str:
    if fmt == "tsv":
        lines = ["class\tsource_stmt\tsink_stmt\tpath_len\tapps"]
        for p in report.paths:
            lines.append(
                f"{p.klass}\t{p.source}\t{p.sink}\t{len(p.stmts)}\t{','.join(p.apps)}"
            )
        return "\n".join(lines) + "\n"
    if not report.paths:
        return "no tainted paths\n"
    lines = []
    for p in report.paths:
        lines.append(
            f"[{p.klass}] {p.source_name} @ {p.source} -> "
            f"{p.sink_name} @ {p.sink} ({len(p.stmts)} stmts, apps: {','.join(p.apps)})"
        )
    plural = "" if len(report.paths) == 1 else "s"
    lines.append(f"{len(report.paths)} tainted path{plural}")
    return "\n".join(lines) + "\n"
