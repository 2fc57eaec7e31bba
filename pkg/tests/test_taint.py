import pytest

import oracle
import progen
from iccflow.icc import match_links, resolve_corpus
from iccflow.parser import parse_app
from iccflow.taint import analyze, parse_config, render_report

CONF = parse_config(
    """
    source getDeviceId
    source getLocation
    source getSimSerialNumber
    sink writeLog
    sink sendTextMessage
    sink sendToUrl
    """
)


def _apps(*texts):
    out = []
    for t in texts:
        r = parse_app(t)
        assert r.ok, [str(d) for d in r.diagnostics]
        out.append(r.app)
    return out


def run(*texts, jobs=1):
    apps = _apps(*texts)
    links = match_links(resolve_corpus(apps), apps).links
    return analyze(apps, links, CONF, jobs=jobs)


def pairs(report):
    return {(str(p.source), str(p.sink)) for p in report.paths}


# ---------------------------------------------------------------------------
# configuration parsing
# ---------------------------------------------------------------------------


def test_parse_config_ignores_comments_and_blanks():
    conf = parse_config("# banner\n\nsource a  # trailing\nsink b\n")
    assert conf.sources == {"a"}
    assert conf.sinks == {"b"}


def test_parse_config_reports_position():
    with pytest.raises(ValueError, match=r"rules\.conf:2"):
        parse_config("source ok\nsinks b\n", path="rules.conf")


# ---------------------------------------------------------------------------
# single-method flows
# ---------------------------------------------------------------------------

INTRA = """
app "A" {
  component activity Main {
    filter { action "MAIN"; }
    method onCreate(this) {
      x = source "getDeviceId"
      sink "writeLog" x
    }
  }
}
"""


def test_intra_leak_with_endpoints():
    rep = run(INTRA)
    assert len(rep.paths) == 1
    p = rep.paths[0]
    assert p.klass == "Intra"
    assert (p.source_name, p.sink_name) == ("getDeviceId", "writeLog")
    assert str(p.source) == "A/Main/onCreate/b0/0"
    assert str(p.sink) == "A/Main/onCreate/b0/1"
    assert p.stmts[0] == p.source and p.stmts[-1] == p.sink
    assert p.apps == ("A",)


def test_constant_overwrite_kills():
    rep = run(INTRA.replace('sink "writeLog" x', 'x = "safe"\n      sink "writeLog" x'))
    assert rep.paths == []


def test_unconfigured_names_are_inert():
    text = INTRA.replace("getDeviceId", "getInstallId").replace("writeLog", "printDebug")
    assert run(text).paths == []


def test_unrooted_component_never_runs():
    # no filter, nothing targets it: the leak inside is unreachable
    assert run(INTRA.replace('filter { action "MAIN"; }\n    ', "")).paths == []


# ---------------------------------------------------------------------------
# extras: field sensitivity on intents
# ---------------------------------------------------------------------------

TWO_KEYS = """
app "A" {{
  component activity Main {{
    filter {{ action "MAIN"; }}
    method onCreate(this) {{
      id = source "getDeviceId"
      ok = "benign"
      i = new_intent
      set_target i "Recv"
      put_extra i "imei" id
      put_extra i "note" ok
      icc start_activity i
    }}
  }}
  component activity Recv {{
    method onCreate(this) {{
      g = get_intent
      v = get_extra g {key}
      sink "sendTextMessage" v
    }}
  }}
}}
"""


def test_extra_keys_are_independent():
    assert pairs(run(TWO_KEYS.format(key='"imei"'))) == {
        ("A/Main/onCreate/b0/0", "A/Recv/onCreate/b0/2")
    }
    assert run(TWO_KEYS.format(key='"note"')).paths == []


def test_variable_key_reads_any_extra():
    # a non-literal key cannot be proven disjoint from "imei"
    text = TWO_KEYS.format(key="k").replace(
        "g = get_intent", 'k = "note"\n      g = get_intent'
    )
    assert pairs(run(text)) == {("A/Main/onCreate/b0/0", "A/Recv/onCreate/b0/3")}


def test_literal_reput_is_a_strong_kill():
    text = TWO_KEYS.format(key='"imei"').replace(
        "icc start_activity i", 'put_extra i "imei" ok\n      icc start_activity i'
    )
    assert run(text).paths == []


def test_variable_key_write_is_a_weak_update():
    # overwriting through an unknown key must not kill "imei"
    text = TWO_KEYS.format(key='"imei"').replace(
        "icc start_activity i",
        'k = "note"\n      put_extra i k ok\n      icc start_activity i',
    )
    assert pairs(run(text)) == {("A/Main/onCreate/b0/0", "A/Recv/onCreate/b0/2")}


# ---------------------------------------------------------------------------
# fields on this, across lifecycle methods
# ---------------------------------------------------------------------------


def test_field_carries_taint_between_lifecycle_methods():
    text = """
app "A" {
  component activity Main {
    filter { action "MAIN"; }
    method onCreate(this) {
      x = source "getLocation"
      this.stash = x
    }
    method onResume(this) {
      y = this.stash
      sink "sendToUrl" y
    }
  }
}
"""
    assert pairs(run(text)) == {("A/Main/onCreate/b0/0", "A/Main/onResume/b0/1")}


def test_field_store_kills_previous_value():
    text = """
app "A" {
  component activity Main {
    filter { action "MAIN"; }
    method onCreate(this) {
      x = source "getLocation"
      this.stash = x
      c = "clean"
      this.stash = c
    }
    method onResume(this) {
      y = this.stash
      sink "sendToUrl" y
    }
  }
}
"""
    assert run(text).paths == []


# ---------------------------------------------------------------------------
# calls: context sensitivity
# ---------------------------------------------------------------------------

SHARED_HELPER = """
app "A" {
  component activity Hot {
    filter { action "MAIN"; }
    method onCreate(this) {
      x = source "getDeviceId"
      y = call Util.pass(x)
      sink "writeLog" y
    }
  }
  component activity Cold {
    filter { action "OTHER"; }
    method onCreate(this) {
      c = "nothing"
      d = call Util.pass(c)
      sink "sendToUrl" d
    }
  }
  class Util {
    method pass(x) {
      return x
    }
  }
}
"""


def test_shared_helper_keeps_callers_apart():
    got = pairs(run(SHARED_HELPER))
    assert got == {("A/Hot/onCreate/b0/0", "A/Hot/onCreate/b0/2")}
    # in particular, Cold's sink stays clean even though the helper was
    # summarized while tainted under Hot


def test_deleting_one_caller_leaves_the_other_alone():
    lines = SHARED_HELPER.splitlines()
    start = next(i for i, l in enumerate(lines) if "Cold" in l)
    without_cold = "\n".join(lines[:start] + lines[start + 8 :])
    assert pairs(run(without_cold)) == pairs(run(SHARED_HELPER))


def test_unknown_callee_result_is_clean():
    text = SHARED_HELPER.replace("call Util.pass", "call Mystery.launder")
    assert run(text).paths == []


# ---------------------------------------------------------------------------
# path classification
# ---------------------------------------------------------------------------


def test_icc_and_iac_classification(corpus_root):
    icc_rep = run(TWO_KEYS.format(key='"imei"'))
    assert [p.klass for p in icc_rep.paths] == ["ICC"]

    sender = """
app "A" {
  component activity Main {
    filter { action "MAIN"; }
    method onCreate(this) {
      x = source "getDeviceId"
      i = new_intent
      set_action i "com.x.PING"
      put_extra i "imei" x
      icc send_broadcast i
    }
  }
}
"""
    receiver = """
app "B" {
  component receiver Ear {
    filter { action "com.x.PING"; }
    method onReceive(this) {
      g = get_intent
      v = get_extra g "imei"
      sink "sendTextMessage" v
    }
  }
}
"""
    iac_rep = run(sender, receiver)
    assert [p.klass for p in iac_rep.paths] == ["IAC"]
    assert iac_rep.paths[0].apps == ("A", "B")


def test_one_witness_per_origin_sink_pair():
    # two routes (branch arms) from one source to one sink: a single path
    text = """
app "A" {
  component activity Main {
    filter { action "MAIN"; }
    method onCreate(this) {
      x = source "getDeviceId"
      branch bl br
    bl:
      a = x
      goto bj
    br:
      b = x
      goto bj
    bj:
      sink "writeLog" x
    }
  }
}
"""
    rep = run(text)
    assert len(rep.paths) == 1


# ---------------------------------------------------------------------------
# determinism
# ---------------------------------------------------------------------------


def test_reports_are_deterministic_across_runs_and_jobs():
    texts = []
    for seed in (5, 21):
        texts.extend(progen.gen_corpus(seed))
    # distinct app ids per seed batch
    fixed = []
    for n, t in enumerate(texts):
        fixed.append(t.replace('app "App', f'app "S{n}App'))
    base = run(*fixed, jobs=1)
    again = run(*fixed, jobs=1)
    threaded = run(*fixed, jobs=4)
    assert render_report(base, "tsv") == render_report(again, "tsv")
    assert render_report(base, "tsv") == render_report(threaded, "tsv")
    assert base.sets == threaded.sets


def test_render_formats():
    rep = run(INTRA)
    tsv = render_report(rep, "tsv")
    assert tsv.startswith("class\tsource_stmt\tsink_stmt")
    assert "Intra\tA/Main/onCreate/b0/0" in tsv
    text = render_report(rep, "text")
    assert "getDeviceId" in text and "writeLog" in text
    empty = run(INTRA.replace('x = source "getDeviceId"', 'x = "nope"'))
    assert render_report(empty, "text") == "no tainted paths\n"


# ---------------------------------------------------------------------------
# differential spot check against the concrete interpreter
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(0, 60))
def test_engine_matches_interpreter(seed):
    apps = progen.gen_apps(seed)
    config = progen.config()
    links = match_links(resolve_corpus(apps), apps).links
    rep = analyze(apps, links, config)
    engine = {(p.source, p.sink) for p in rep.paths}
    concrete = oracle.oracle_pairs(apps, config)
    assert engine == concrete, (
        f"seed {seed}: engine-only {sorted(map(str, engine - concrete))}, "
        f"oracle-only {sorted(map(str, concrete - engine))}"
    )
