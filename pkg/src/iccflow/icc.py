"""Intent value resolution and ICC link matching.

For every ICC call statement this module computes an abstract description of
the intent flowing into it (explicit target, action, categories, data type,
known extra keys), joined over all CFG paths that reach the call. The values
are then matched against every component's intent filters, corpus-wide, to
produce resolved links.

Interprocedural precision is one call level deep (k=1): a method that
receives an intent argument is re-analyzed under the join of all values its
callers pass; anything flowing further degrades to Top. Lifecycle methods and
callbacks are framework entry points, so their parameters always include Top.

Resolved values and links can be persisted to a line-oriented TSV database
keyed by a content hash of each app's source, so re-running over an unchanged
app skips its (comparatively expensive) value resolution; matching is always
redone fresh because links depend on the whole corpus.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Union

from .ir import (
    AppModel,
    Assign,
    Block,
    Branch,
    Call,
    Component,
    ComponentKind,
    Const,
    Diagnostic,
    Fallthrough,
    GetExtra,
    GetIntent,
    Goto,
    ICC_KINDS,
    IccCall,
    Method,
    NewIntent,
    PROVIDER_ICC_KINDS,
    PutExtra,
    Return,
    SetAction,
    SetCategory,
    SetDataType,
    SetTarget,
    SourceCall,
    Stmt,
    StmtId,
    parse_stmt_id,
    warning,
)


class _TopType:
    """Singleton lattice top for string-set attributes."""

    _instance: Optional["_TopType"] = None

    def __new__(cls) -> "_TopType":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "TOP"


TOP = _TopType()

#: Marker inside the targets set for "no explicit target set on this path";
#: marker inside the data-types set for "no data type set on this path".
UNSET = None

StrSet = Union[frozenset, _TopType]


def join_sets(a: StrSet, b: StrSet) -> StrSet:
    if a is TOP or b is TOP:
        return TOP
    return a | b


@dataclass(frozen=True)
class IntentValue:
    """Abstract value of one intent at one program point.

    ``targets`` and ``data_types`` are option sets: the ``None`` element
    stands for "unset on some path". ``Top`` on any attribute means the
    attribute was written from a value the analysis cannot bound.
    """

    targets: StrSet = frozenset({UNSET})
    actions: StrSet = frozenset()
    categories: StrSet = frozenset()
    data_types: StrSet = frozenset({UNSET})
    extras_keys: frozenset = frozenset()
    extras_complete: bool = True

    @staticmethod
    def top() -> "IntentValue":
        return IntentValue(TOP, TOP, TOP, TOP, frozenset(), False)

    def join(self, other: "IntentValue") -> "IntentValue":
        return IntentValue(
            join_sets(self.targets, other.targets),
            join_sets(self.actions, other.actions),
            join_sets(self.categories, other.categories),
            join_sets(self.data_types, other.data_types),
            self.extras_keys | other.extras_keys,
            self.extras_complete and other.extras_complete,
        )

    @property
    def explicit_targets(self) -> list:
        if self.targets is TOP:
            return []
        return sorted(t for t in self.targets if t is not None)

    @property
    def may_be_implicit(self) -> bool:
        return self.targets is TOP or UNSET in self.targets


@dataclass(frozen=True, order=True)
class IccLink:
    """A resolved edge from one ICC call statement to a target component."""

    from_stmt: StmtId
    kind: str
    to: str  # qualified component name "app/Component"
    exact: bool
    cross_app: bool


@dataclass
class LinkResult:
    links: list[IccLink] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Abstract values for variables
# ---------------------------------------------------------------------------
#
# A variable holds either a string abstraction (set of possible constants or
# Top) or an intent abstraction. Objects and anything else are opaque; using
# an opaque value where an intent is expected degrades to the Top intent,
# never to a failure.


@dataclass(frozen=True)
class AbsStr:
    values: StrSet = frozenset()


@dataclass(frozen=True)
class AbsIntent:
    value: IntentValue = field(default_factory=IntentValue)


AbsVal = Union[AbsStr, AbsIntent]

#: Reading a never-assigned variable yields the empty string at runtime.
_UNASSIGNED = AbsStr(frozenset({""}))


def _join_vals(a: AbsVal, b: AbsVal) -> AbsVal:
    if isinstance(a, AbsIntent) and isinstance(b, AbsIntent):
        return AbsIntent(a.value.join(b.value))
    if isinstance(a, AbsStr) and isinstance(b, AbsStr):
        return AbsStr(join_sets(a.values, b.values))
    # Mixed string/intent merge: nothing useful can be said.
    return AbsIntent(IntentValue.top())


def _join_envs(a: dict, b: dict) -> dict:
    out = dict(a)
    for var, val in b.items():
        if var in out:
            out[var] = _join_vals(out[var], val)
        else:
            out[var] = val
    return out


def _env_le(small: dict, big: dict) -> bool:
    return _join_envs(small, big) == big


def _as_str_set(val: Optional[AbsVal]) -> StrSet:
    if val is None:
        return _UNASSIGNED.values
    if isinstance(val, AbsStr):
        return val.values
    return TOP  # an intent used as a string: unknowable


def _as_intent(val: Optional[AbsVal]) -> IntentValue:
    if isinstance(val, AbsIntent):
        return val.value
    return IntentValue.top()


def _operand_strings(env: dict, operand) -> StrSet:
    if operand.is_literal:
        return frozenset({operand.text})
    return _as_str_set(env.get(operand.text))


def _apply_stmt(stmt: Stmt, env: dict, sink: "_ValueSink") -> None:
    """Transfer function of one statement over the variable environment."""
    if isinstance(stmt, Const):
        env[stmt.dst] = AbsStr(frozenset({stmt.value}))
    elif isinstance(stmt, Assign):
        env[stmt.dst] = env.get(stmt.src, _UNASSIGNED)
    elif isinstance(stmt, SourceCall):
        env[stmt.dst] = AbsStr(TOP)
    elif isinstance(stmt, GetExtra):
        env[stmt.dst] = AbsStr(TOP)
    elif isinstance(stmt, GetIntent):
        # The received intent is unknown before instrumentation connects the
        # sender; relaying it onward must over-approximate.
        env[stmt.dst] = AbsIntent(IntentValue.top())
    elif isinstance(stmt, NewIntent):
        env[stmt.dst] = AbsIntent(IntentValue())
    elif isinstance(stmt, SetTarget):
        iv = _as_intent(env.get(stmt.intent))
        env[stmt.intent] = AbsIntent(replace(iv, targets=_operand_strings(env, stmt.value)))
    elif isinstance(stmt, SetAction):
        iv = _as_intent(env.get(stmt.intent))
        env[stmt.intent] = AbsIntent(replace(iv, actions=_operand_strings(env, stmt.value)))
    elif isinstance(stmt, SetCategory):
        iv = _as_intent(env.get(stmt.intent))
        added = _operand_strings(env, stmt.value)
        env[stmt.intent] = AbsIntent(
            replace(iv, categories=join_sets(iv.categories, added))
        )
    elif isinstance(stmt, SetDataType):
        iv = _as_intent(env.get(stmt.intent))
        env[stmt.intent] = AbsIntent(replace(iv, data_types=_operand_strings(env, stmt.value)))
    elif isinstance(stmt, PutExtra):
        iv = _as_intent(env.get(stmt.intent))
        if stmt.key.is_literal:
            env[stmt.intent] = AbsIntent(
                replace(iv, extras_keys=iv.extras_keys | {stmt.key.text})
            )
        else:
            env[stmt.intent] = AbsIntent(replace(iv, extras_complete=False))
    elif isinstance(stmt, IccCall):
        sink.record(stmt, _as_intent(env.get(stmt.intent)))
    elif isinstance(stmt, Call):
        sink.record_call(stmt, env)
        if stmt.dst:
            env[stmt.dst] = AbsStr(TOP)
    else:
        # new_obj, field ops, sink/finish/set_result: no effect on intents
        # visible to this analysis.
        for attr in ("dst",):
            d = getattr(stmt, attr, None)
            if d:
                env[d] = AbsStr(TOP)


class _ValueSink:
    """Collects icc-site values and call-site argument bindings."""

    def __init__(self) -> None:
        self.icc_values: dict[StmtId, IntentValue] = {}
        self.arg_bindings: dict[tuple, AbsVal] = {}

    def record(self, stmt: IccCall, value: IntentValue) -> None:
        sid = stmt.sid
        assert sid is not None
        if sid in self.icc_values:
            self.icc_values[sid] = self.icc_values[sid].join(value)
        else:
            self.icc_values[sid] = value

    def record_call(self, stmt: Call, env: dict) -> None:
        for i, arg in enumerate(stmt.args):
            key = (stmt.cls, stmt.method, i)
            val = env.get(arg, _UNASSIGNED)
            if key in self.arg_bindings:
                self.arg_bindings[key] = _join_vals(self.arg_bindings[key], val)
            else:
                self.arg_bindings[key] = val


def _analyze_method(method: Method, init_env: dict, sink: _ValueSink) -> None:
    """Per-method fixpoint over block environments (join over paths)."""
    blocks = {b.label: b for b in method.blocks}
    in_envs: dict[str, dict] = {method.entry.label: dict(init_env)}
    work = [method.entry.label]
    while work:
        label = work.pop(0)
        block = blocks[label]
        env = dict(in_envs[label])
        for stmt in block.stmts:
            _apply_stmt(stmt, env, sink)
        term = block.term
        succs: list[str] = []
        if isinstance(term, Goto):
            succs = [term.label]
        elif isinstance(term, Branch):
            succs = [term.left, term.right]
        elif isinstance(term, Fallthrough):
            idx = method.blocks.index(block)
            if idx + 1 < len(method.blocks):
                succs = [method.blocks[idx + 1].label]
        for succ in succs:
            if succ not in blocks:
                continue
            if succ in in_envs:
                joined = _join_envs(in_envs[succ], env)
                if joined != in_envs[succ]:
                    in_envs[succ] = joined
                    if succ not in work:
                        work.append(succ)
            else:
                in_envs[succ] = dict(env)
                work.append(succ)


def _entry_methods(comp: Component) -> set:
    """Methods whose parameters the framework controls (Top bindings)."""
    names = set(comp.lifecycle)
    names.update(m.name for m in comp.callbacks)
    return names


def resolve_intent_values(app: AppModel) -> dict[StmtId, IntentValue]:
    """Abstract intent value at every ICC call statement of one app.

    Two passes: the first runs every method with Top parameters and collects
    the joined argument bindings of every call site; the second re-runs each
    method under those bindings (one level of call depth). Framework entry
    points (lifecycle methods, callbacks) and methods that are never called
    keep Top parameters.
    """
    pass1 = _ValueSink()
    for comp, method in app.iter_methods():
        init = {p: AbsIntent(IntentValue.top()) for p in method.params}
        _analyze_method(method, init, pass1)

    pass2 = _ValueSink()
    for comp, method in app.iter_methods():
        init: dict[str, AbsVal] = {}
        is_entry = method.name in _entry_methods(comp)
        for i, param in enumerate(method.params):
            bound: Optional[AbsVal] = None
            # A call may name the class explicitly or rely on same-class
            # resolution; join bindings recorded under both forms.
            for cls_key in (comp.name, comp.qualified_name, None):
                b = pass1.arg_bindings.get((cls_key, method.name, i))
                if b is not None:
                    bound = b if bound is None else _join_vals(bound, b)
            if is_entry or bound is None:
                init[param] = AbsIntent(IntentValue.top())
            else:
                init[param] = bound
        _analyze_method(method, init, pass2)

    # Every icc_call statement gets a value, even in unreachable code.
    values = dict(pass2.icc_values)
    for _c, _m, _b, stmt in app.iter_stmts():
        if isinstance(stmt, IccCall) and stmt.sid not in values:
            values[stmt.sid] = IntentValue.top()
    return values


# ---------------------------------------------------------------------------
# Filter matching
# ---------------------------------------------------------------------------


def _filter_matches(value: IntentValue, flt) -> Optional[bool]:
    """Does an implicit intent with this value match the filter?

    Returns None for no match; True for an exact match (no Top attribute
    involved); False for a match that rests on a Top over-approximation.
    """
    exact = True

    if value.actions is TOP:
        exact = False
    elif not (value.actions & flt.actions):
        return None

    if value.categories is TOP:
        exact = False
    elif not (value.categories <= flt.categories):
        return None

    if value.data_types is TOP:
        exact = False
    else:
        declared = value.data_types - {UNSET}
        ok = bool(declared & flt.data_types)
        if UNSET in value.data_types and not flt.data_types:
            ok = True
        if not ok:
            return None

    return exact


def match_links(
    values_by_app: dict[str, dict[StmtId, IntentValue]],
    corpus: Iterable[AppModel],
) -> LinkResult:
    """Match every resolved intent value against every component's filters.

    Explicit targets resolve directly by qualified name (filters are never
    consulted); implicit intents match action/category/data-type against all
    kind-compatible components corpus-wide. Provider calls resolve to nothing
    by design. Missing explicit targets become diagnostics, not errors.
    """
    apps = list(corpus)
    components: list[Component] = []
    by_qualified: dict[str, Component] = {}
    for app in apps:
        for comp in app.components:
            components.append(comp)
            by_qualified[comp.qualified_name] = comp

    result = LinkResult()
    links: set[IccLink] = set()
    for app_id in sorted(values_by_app):
        for sid in sorted(values_by_app[app_id]):
            value = values_by_app[app_id][sid]
            kind = _kind_of(sid, apps)
            if kind is None or kind in PROVIDER_ICC_KINDS:
                continue
            want = ICC_KINDS[kind]

            for qname in value.explicit_targets:
                if "/" not in qname:
                    # bare names target the sender's own app
                    qname = f"{sid.app}/{qname}"
                target = by_qualified.get(qname)
                if target is None or target.kind is not want:
                    reason = "no such component" if target is None else (
                        f"kind {target.kind.value} does not accept {kind}"
                    )
                    result.diagnostics.append(
                        warning(f"unresolved link: {sid} -> {qname!r} ({reason})")
                    )
                    continue
                links.add(
                    IccLink(sid, kind, qname, True, target.origin_app != sid.app)
                )

            if value.may_be_implicit:
                target_top = value.targets is TOP
                for comp in components:
                    if comp.kind is not want:
                        continue
                    if target_top:
                        links.add(IccLink(sid, kind, comp.qualified_name, False, comp.origin_app != sid.app))
                        continue
                    best: Optional[bool] = None
                    for flt in comp.filters:
                        m = _filter_matches(value, flt)
                        if m is not None:
                            best = m if best is None else (best or m)
                    if best is not None:
                        links.add(
                            IccLink(sid, kind, comp.qualified_name, best, comp.origin_app != sid.app)
                        )

    result.links = sorted(links)
    return result


def _kind_of(sid: StmtId, apps: list[AppModel]) -> Optional[str]:
    for app in apps:
        for comp in app.components:
            if comp.origin_app != sid.app or comp.name != sid.cls:
                continue
            m = comp.find_method(sid.method)
            if m is None:
                continue
            b = m.block(sid.block)
            if b is None or sid.index >= len(b.stmts):
                continue
            stmt = b.stmts[sid.index]
            if isinstance(stmt, IccCall):
                return stmt.kind
    return None


def resolve_corpus(apps: list[AppModel]) -> dict[str, dict[StmtId, IntentValue]]:
    return {app.app_id: resolve_intent_values(app) for app in apps}


# ---------------------------------------------------------------------------
# Link database
# ---------------------------------------------------------------------------
#
# Line-oriented TSV. Per app, sorted by app id:
#
#   #app <tab> app_id <tab> sha256-of-source
#   #value <tab> stmt_id <tab> serialized-intent-value     (one per icc site)
#   app_hash <tab> from_stmt <tab> kind <tab> to <tab> exact <tab> cross_app
#
# The comment lines are bookkeeping that lets a reload skip re-resolving
# unchanged apps; plain loaders that only want links can ignore them.


class LinkDbError(Exception):
    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass
class DbEntry:
    app_id: str
    text_hash: str
    values: dict[StmtId, IntentValue] = field(default_factory=dict)
    links: list[IccLink] = field(default_factory=list)


def app_text_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _ser_set(s: StrSet) -> str:
    if s is TOP:
        return "*"
    return ",".join("-" if v is None else v for v in sorted(s, key=lambda x: (x is not None, x)))


def _de_set(text: str) -> StrSet:
    if text == "*":
        return TOP
    if text == "":
        return frozenset()
    return frozenset(None if part == "-" else part for part in text.split(","))


def serialize_value(value: IntentValue) -> str:
    return "|".join(
        [
            _ser_set(value.targets),
            _ser_set(value.actions),
            _ser_set(value.categories),
            _ser_set(value.data_types),
            _ser_set(value.extras_keys),
            "1" if value.extras_complete else "0",
        ]
    )


def deserialize_value(text: str) -> IntentValue:
    parts = text.split("|")
    if len(parts) != 6:
        raise ValueError(f"malformed intent value: {text!r}")
    extras = _de_set(parts[4])
    if extras is TOP or None in extras:
        raise ValueError(f"malformed extras keys: {text!r}")
    return IntentValue(
        _de_set(parts[0]),
        _de_set(parts[1]),
        _de_set(parts[2]),
        _de_set(parts[3]),
        extras,
        parts[5] == "1",
    )


class LinkDb:
    def __init__(self) -> None:
        self.entries: dict[str, DbEntry] = {}

    @staticmethod
    def load(path: str) -> "LinkDb":
        db = LinkDb()
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        current: Optional[DbEntry] = None
        for number, raw in enumerate(text.splitlines(), start=1):
            if not raw.strip():
                continue
            fields = raw.split("\t")
            try:
                if fields[0] == "#app":
                    if len(fields) != 3:
                        raise ValueError("bad #app header")
                    current = DbEntry(fields[1], fields[2])
                    db.entries[current.app_id] = current
                elif fields[0] == "#value":
                    if current is None or len(fields) != 3:
                        raise ValueError("stray #value line")
                    current.values[parse_stmt_id(fields[1])] = deserialize_value(fields[2])
                elif fields[0].startswith("#"):
                    continue
                else:
                    if current is None or len(fields) != 6:
                        raise ValueError("bad link line")
                    if fields[0] != current.text_hash:
                        raise ValueError("link line hash does not match its #app header")
                    link = IccLink(
                        parse_stmt_id(fields[1]),
                        fields[2],
                        fields[3],
                        fields[4] == "1",
                        fields[5] == "1",
                    )
                    if link.kind not in ICC_KINDS:
                        raise ValueError(f"unknown icc kind {link.kind!r}")
                    current.links.append(link)
            except ValueError as exc:
                raise LinkDbError(str(exc), number) from None
        return db

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    def dumps(self) -> str:
        out: list[str] = []
        for app_id in sorted(self.entries):
            entry = self.entries[app_id]
            out.append(f"#app\t{entry.app_id}\t{entry.text_hash}")
            for sid in sorted(entry.values):
                out.append(f"#value\t{sid}\t{serialize_value(entry.values[sid])}")
            for link in sorted(entry.links):
                out.append(
                    "\t".join(
                        [
                            entry.text_hash,
                            str(link.from_stmt),
                            link.kind,
                            link.to,
                            "1" if link.exact else "0",
                            "1" if link.cross_app else "0",
                        ]
                    )
                )
        return "\n".join(out) + ("\n" if out else "")

    def put(self, app_id: str, text_hash: str, values: dict[StmtId, IntentValue], links: list[IccLink]) -> None:
        self.entries[app_id] = DbEntry(app_id, text_hash, dict(values), sorted(links))

    def cached_values(self, app_id: str, text_hash: str) -> Optional[dict[StmtId, IntentValue]]:
        entry = self.entries.get(app_id)
        if entry is not None and entry.text_hash == text_hash:
            return dict(entry.values)
        return None

    def all_links(self) -> list[IccLink]:
        links: set[IccLink] = set()
        for entry in self.entries.values():
            links.update(entry.links)
        return sorted(links)


def store_links(db: LinkDb, db_path: str) -> None:
    db.save(db_path)


def load_links(db_path: str) -> list[IccLink]:
    """Union of the stored links of every app in the database."""
    return LinkDb.load(db_path).all_links()
