"""Rewriting ICC calls into ordinary calls so components connect directly.

For every resolved link, the ICC call statement is replaced by a call to a
synthesized ``redirectN`` method on a per-model helper class ``IpcSC``. The
redirect constructs the target component, hands it the intent (stored in the
``intent_for_ipc`` field, returned by a synthesized ``getIntent``), and runs
the target's ``dummyMain`` driver. ``start_activity_for_result`` links
additionally route the target's stored result (``intent_for_ar``) back into
the caller's ``onActivityResult`` — the caller instance is passed into the
redirect explicitly, so two components sharing a listener can never be
confused with each other.

``dummyMain`` encodes each component kind's lifecycle as a nondeterministic
state machine with a callback loop, so the downstream dataflow analysis sees
every possible ordering of callbacks without any fixed iteration bound.

Statements that are not ICC calls survive with their ids unchanged; ICC call
sites with several links fan out into a nondeterministic branch over all
their redirects, and call sites with no links at all are left in place (a
dead call keeps an unlinked component exactly as unreachable as it was).
"""

from __future__ import annotations

import copy
from typing import Optional

from .icc import IccLink
from .ir import (
    AppModel,
    Block,
    Branch,
    Call,
    Component,
    ComponentKind,
    Const,
    FieldLoad,
    FieldStore,
    Goto,
    IccCall,
    Method,
    NewIntent,
    NewObj,
    RESERVED_CLASSES,
    RESERVED_METHODS,
    Return,
    Stmt,
    StmtId,
)

INTENT_FIELD = "intent_for_ipc"
RESULT_FIELD = "intent_for_ar"


class InstrumentError(Exception):
    pass


def _stamp(method: Method, origin_app: str, cls_name: str) -> None:
    for block in method.blocks:
        for i, stmt in enumerate(block.stmts):
            stmt.sid = StmtId(origin_app, cls_name, method.name, block.label, i)
            stmt.synthetic = True


def _straight(name: str, params: tuple[str, ...], stmts: list[Stmt], ret: Optional[str]) -> Method:
    return Method(
        name=name,
        params=params,
        blocks=[Block("b0", stmts, Return(ret))],
        synthetic=True,
    )


def _call(method: str, args: tuple[str, ...], cls: Optional[str] = None, dst: Optional[str] = None) -> Call:
    return Call(dst=dst, cls=cls, method=method, args=args)


# ---------------------------------------------------------------------------
# dummyMain synthesis
# ---------------------------------------------------------------------------


def _invoke(method: Method, out: list[Stmt], counter: list[int]) -> None:
    """Emit a call to a lifecycle/callback method, making up dummy arguments
    for any parameter beyond the component instance."""
    args: list[str] = []
    for param in method.params:
        if param == "this":
            args.append("this")
        else:
            var = f"dm_u{counter[0]}"
            counter[0] += 1
            if method.name == "onActivityResult":
                out.append(NewIntent(dst=var))
            else:
                out.append(Const(dst=var, value=""))
            args.append(var)
    out.append(_call(method.name, tuple(args)))


def _loop_blocks(options: list[Method], exit_label: str, counter: list[int]) -> list[Block]:
    """A loop head with a nondeterministic choice among all options (or exit).

    Encoded with two-way branches: the head chooses exit or the chooser
    chain, each chooser picks one option's block, and every option block
    jumps back to the head.
    """
    k = len(options)
    head = Block("dm_loop")
    blocks = [head]
    do_labels = [f"dm_do{i}" for i in range(k)]
    if k == 1:
        head.term = Branch(exit_label, do_labels[0])
    else:
        head.term = Branch(exit_label, "dm_c0")
        for i in range(k - 1):
            nxt = f"dm_c{i + 1}" if i < k - 2 else do_labels[k - 1]
            blocks.append(Block(f"dm_c{i}", [], Branch(do_labels[i], nxt)))
    for i, option in enumerate(options):
        stmts: list[Stmt] = []
        _invoke(option, stmts, counter)
        blocks.append(Block(do_labels[i], stmts, Goto("dm_loop")))
    return blocks


def synthesize_dummy_main(component: Component) -> Method:
    """Build the per-component driver encoding lifecycle plus callback loop.

    Activities run create/start/resume, then loop over callbacks and
    onActivityResult, then pause/stop/destroy. Services run create, then
    either onStartCommand or onBind, then the callback loop, then destroy.
    Receivers run onReceive then the callback loop. Missing methods are
    skipped. Providers get no driver at all.
    """
    if component.kind is ComponentKind.PROVIDER:
        raise InstrumentError(
            f"{component.qualified_name}: provider components get no driver"
        )
    if component.kind is ComponentKind.CLASS:
        raise InstrumentError(f"{component.name}: plain classes get no driver")

    counter = [0]
    life = component.lifecycle

    def present(*names: str) -> list[Method]:
        return [life[n] for n in names if n in life]

    if component.kind is ComponentKind.ACTIVITY:
        pre = present("onCreate", "onStart", "onResume")
        post = present("onPause", "onStop", "onDestroy")
        options = list(component.callbacks) + present("onActivityResult")
    elif component.kind is ComponentKind.SERVICE:
        pre = present("onCreate")
        post = present("onDestroy")
        options = list(component.callbacks)
    else:  # receiver
        pre = present("onReceive")
        post = []
        options = list(component.callbacks)

    entry = Block("dm0")
    for m in pre:
        _invoke(m, entry.stmts, counter)
    blocks = [entry]

    mid: list[Block] = []
    if component.kind is ComponentKind.SERVICE:
        started = present("onStartCommand")
        bound = present("onBind")
        if started and bound:
            sc = Block("dm_sc")
            _invoke(started[0], sc.stmts, counter)
            bd = Block("dm_bd")
            _invoke(bound[0], bd.stmts, counter)
            entry.term = Branch("dm_sc", "dm_bd")
            mid = [sc, bd]
        elif started or bound:
            _invoke((started + bound)[0], entry.stmts, counter)

    exit_block = Block("dm_exit")
    for m in post:
        _invoke(m, exit_block.stmts, counter)
    exit_block.term = Return()

    if options:
        loop = _loop_blocks(options, "dm_exit", counter)
        after_entry = "dm_loop"
    else:
        loop = []
        after_entry = "dm_exit"
    if mid:
        for b in mid:
            b.term = Goto(after_entry)
    else:
        entry.term = Goto(after_entry)

    method = Method(name="dummyMain", params=("this",), synthetic=True)
    if not (entry.stmts or mid or loop or exit_block.stmts):
        method.blocks = [Block("dm0", [], Return())]
    else:
        method.blocks = blocks + mid + loop + [exit_block]
    _stamp(method, component.origin_app, component.name)
    return method


# ---------------------------------------------------------------------------
# Link instrumentation
# ---------------------------------------------------------------------------


def _already_instrumented(model: AppModel) -> bool:
    for comp in model.components:
        if comp.synthetic or comp.name in RESERVED_CLASSES:
            return True
        for method in comp.methods():
            if method.synthetic or method.name in RESERVED_METHODS:
                return True
            for block in method.blocks:
                if any(s.synthetic for s in block.stmts):
                    return True
    return False


def _ensure_receiving(target: Component) -> None:
    if target.find_method("ctor") is None:
        ctor = _straight(
            "ctor", ("this", "i"), [FieldStore(obj="this", fld=INTENT_FIELD, src="i")], None
        )
        _stamp(ctor, target.origin_app, target.name)
        target.helpers.append(ctor)
    if target.find_method("getIntent") is None:
        getter = _straight(
            "getIntent", ("this",), [FieldLoad(dst="r", obj="this", fld=INTENT_FIELD)], "r"
        )
        _stamp(getter, target.origin_app, target.name)
        target.helpers.append(getter)


def _ensure_result(target: Component) -> None:
    if target.find_method("setResult") is None:
        setter = _straight(
            "setResult", ("this", "i"), [FieldStore(obj="this", fld=RESULT_FIELD, src="i")], None
        )
        _stamp(setter, target.origin_app, target.name)
        target.helpers.append(setter)
    if target.find_method("getIntentFAR") is None:
        getter = _straight(
            "getIntentFAR", ("this",), [FieldLoad(dst="r", obj="this", fld=RESULT_FIELD)], "r"
        )
        _stamp(getter, target.origin_app, target.name)
        target.helpers.append(getter)


def _redirect_body(
    n: int, link: IccLink, caller: Component, target: Component
) -> Method:
    """One straight-line redirect method per link."""
    qname = target.qualified_name
    stmts: list[Stmt] = [
        NewObj(dst="t", cls=qname),
        _call("ctor", ("t", "i"), cls=qname),
        _call("dummyMain", ("t",), cls=qname),
    ]
    if link.kind == "start_activity_for_result":
        params = ("caller", "i")
        stmts.append(_call("getIntentFAR", ("t",), cls=qname, dst="res"))
        if caller.find_method("onActivityResult") is not None:
            stmts.append(
                _call("onActivityResult", ("caller", "res"), cls=caller.qualified_name)
            )
    else:
        params = ("i",)
    return _straight(f"redirect{n}", params, stmts, None)


def _locate(model: AppModel, sid: StmtId):
    for comp in model.components:
        if comp.origin_app != sid.app or comp.name != sid.cls:
            continue
        method = comp.find_method(sid.method)
        if method is None:
            return None
        for block in method.blocks:
            for i, stmt in enumerate(block.stmts):
                if stmt.sid == sid:
                    return comp, method, block, i
    return None


def _replace_site(
    method: Method, block: Block, index: int, calls: list[Call], site: int
) -> None:
    """Swap one ICC call for its redirect call(s).

    A single link replaces the statement in place; several links split the
    block and fan out through a nondeterministic branch so each redirect
    stays on its own feasible path.
    """
    old = block.stmts[index]
    if len(calls) == 1:
        call = calls[0]
        call.sid = old.sid
        call.synthetic = True
        block.stmts[index] = call
        return

    tail = block.stmts[index + 1 :]
    tail_term = block.term
    del block.stmts[index:]
    cont = Block(f"icc{site}_cont", tail, tail_term)
    r_labels = [f"icc{site}_r{i}" for i in range(len(calls))]
    new_blocks: list[Block] = []
    k = len(calls)
    if k == 2:
        block.term = Branch(r_labels[0], r_labels[1])
    else:
        block.term = Branch(r_labels[0], f"icc{site}_c0")
        for i in range(k - 2):
            right = f"icc{site}_c{i + 1}" if i + 1 <= k - 3 else r_labels[k - 1]
            new_blocks.append(Block(f"icc{site}_c{i}", [], Branch(r_labels[i + 1], right)))
    for i, call in enumerate(calls):
        call.synthetic = True
        call.sid = StmtId(
            old.sid.app, old.sid.cls, old.sid.method, r_labels[i], 0
        )
        new_blocks.append(Block(r_labels[i], [call], Goto(cont.label)))
    pos = method.blocks.index(block) + 1
    method.blocks[pos:pos] = new_blocks + [cont]


def instrument(corpus: list[AppModel], links: list[IccLink]) -> list[AppModel]:
    """Return transformed copies of the models with redirects and drivers.

    Each model realizes the links whose both endpoints live inside it; links
    that point outside (a split window dropped the partner app) leave the
    call site untouched. A model showing any synthetic marker or reserved
    name is rejected rather than instrumented twice.
    """
    return [instrument_model(model, links) for model in corpus]


def instrument_model(model: AppModel, links: list[IccLink]) -> AppModel:
    if _already_instrumented(model):
        raise InstrumentError(
            f"{model.app_id}: model is already instrumented "
            "(synthetic markers or reserved names present)"
        )
    out = copy.deepcopy(model)
    local_apps = {c.origin_app for c in out.components}
    by_qualified = {c.qualified_name: c for c in out.components}

    groups: dict[StmtId, list[IccLink]] = {}
    for link in links:
        if link.from_stmt.app not in local_apps:
            continue
        target = by_qualified.get(link.to)
        if target is None:
            continue  # partner app not in this model
        if target.kind is ComponentKind.PROVIDER:
            raise InstrumentError(f"link into provider component {link.to!r} rejected")
        groups.setdefault(link.from_stmt, []).append(link)

    helper: Optional[Component] = None
    redirect_n = 0
    site_counters: dict[int, int] = {}
    linked_targets: set[str] = set()

    for sid in sorted(groups):
        located = _locate(out, sid)
        if located is None:
            raise InstrumentError(f"link source statement {sid} no longer exists")
        comp, method, block, index = located
        stmt = block.stmts[index]
        if not isinstance(stmt, IccCall):
            raise InstrumentError(f"link source statement {sid} is not an icc call")

        if helper is None:
            helper = Component(
                name="IpcSC",
                kind=ComponentKind.CLASS,
                synthetic=True,
                origin_app=out.app_id,
            )
            out.components.append(helper)

        calls: list[Call] = []
        for link in sorted(groups[sid]):
            target = by_qualified[link.to]
            _ensure_receiving(target)
            if link.kind == "start_activity_for_result":
                _ensure_result(target)
            redirect = _redirect_body(redirect_n, link, comp, target)
            _stamp(redirect, out.app_id, "IpcSC")
            helper.helpers.append(redirect)
            if link.kind == "start_activity_for_result":
                args = ("this", stmt.intent)
            else:
                args = (stmt.intent,)
            calls.append(_call(redirect.name, args, cls="IpcSC"))
            redirect_n += 1
            linked_targets.add(link.to)

        key = id(method)
        site = site_counters.get(key, 0)
        site_counters[key] = site + 1
        _replace_site(method, block, index, calls, site)

    for comp in out.components:
        if comp.kind is ComponentKind.CLASS:
            continue
        if comp.kind is ComponentKind.PROVIDER:
            comp.rooted = False
            continue
        comp.helpers.append(synthesize_dummy_main(comp))
        comp.rooted = bool(comp.filters) or comp.qualified_name in linked_targets

    return out
