"""Directory definitions, pattern clauses, and copy/shared expansion."""

import pytest

from coli.directories import (DirectoryTable, define_directory, expand,
                              load_kb, match_pattern)
from coli.errors import DepthLimitError, ExpandError, KBError
from coli.formulas import Atom, DirRef, pretty
from coli.parser import parse_dirref, parse_formula
from coli.terms import Num, Var, app

from conftest import data_text


def _table(text):
    return load_kb(text)


def test_define_simple():
    table = DirectoryTable()
    define_directory(table, "m", [(None, parse_formula("p(a)"))])
    assert table.defs["m"].arity == 0
    assert table.defs["m"].clauses[0].body == parse_formula("p(a)")


def test_define_recursive_two_clauses():
    table = _table(data_text("rec.kb"))
    assert table.defs["m"].arity == 1
    assert len(table.defs["m"].clauses) == 2


def test_redefinition_replaces():
    table = _table("/m = p(a)\n/m = p(b)\n")
    assert table.defs["m"].clauses[0].body == parse_formula("p(b)")


def test_arity_conflict_rejected():
    with pytest.raises(KBError):
        _table("/m = p\n/m(0) = q\n")


def test_overlapping_patterns_rejected():
    with pytest.raises(KBError):
        _table("/m(s(X)) = p\n/m(s(0)) = q\n")
    with pytest.raises(KBError):
        _table("/m(X) = p\n/m(0) = q\n")


def test_match_pattern_numeral_interop():
    assert match_pattern(app("s", Var("X")), Num(3)) == {"X": Num(2)}
    assert match_pattern(Num(0), Num(0)) == {}
    assert match_pattern(app("s", Var("X")), Num(0)) is None
    assert match_pattern(app("s", Var("X")), app("s", Num(4))) == {"X": Num(4)}


def test_expand_recursive_copy():
    table = _table(data_text("rec.kb"))
    graph = expand(table, parse_dirref("/m(s(s(s(0))))"))
    assert pretty(graph.to_formula()) == "p /\\ (p /\\ (p /\\ q))"


def test_expand_depth_and_counts():
    table = _table(data_text("rec.kb"))
    for k in range(17):
        ref = DirRef("m", (Num(k),))
        graph = expand(table, ref)
        assert graph.depth() == k
        rendered = pretty(graph.to_formula())
        assert rendered.count("p") == k
        assert rendered.count("q") == 1


def test_expand_copy_vs_shared():
    table = _table(data_text("dirs.kb"))
    copied = expand(table, parse_dirref("/n"))
    atoms = [nid for nid in copied.reachable()
             if copied.nodes[nid].op == "atom"]
    assert len(atoms) == 2 and atoms[0] != atoms[1]

    shared = expand(table, parse_dirref("/o"))
    atoms = [nid for nid in shared.reachable()
             if shared.nodes[nid].op == "atom"]
    assert len(atoms) == 1
    assert shared.in_degrees()[atoms[0]] == 2


def test_expand_never_leaves_refs():
    cases = [(data_text("rec.kb"), "/m(s(s(0)))"),
             (data_text("dirs.kb"), "/n"),
             (data_text("dirs.kb"), "/o")]
    for kb, text in cases:
        graph = expand(_table(kb), parse_dirref(text))
        for nid in graph.reachable():
            assert not isinstance(graph.to_formula(nid), DirRef)


def test_expand_errors():
    table = _table(data_text("rec.kb"))
    with pytest.raises(ExpandError):
        expand(table, parse_dirref("/nosuch"))
    with pytest.raises(ExpandError):
        expand(table, DirRef("m", (app("f", Num(1)),)))  # no matching clause
    looping = _table("/a = /a\n")
    with pytest.raises(DepthLimitError):
        expand(looping, parse_dirref("/a"))


def test_kb_comments_and_query():
    table = _table("# heading\n  # indented comment\n/c = fact(0,1)\nquery /c\n")
    assert table.query == "c"
    assert table.defs["c"].clauses[0].body == Atom("fact", (Num(0), Num(1)))


def test_kb_input_names_skip_parameterized_and_query():
    table = _table(data_text("fact.kb") + "/helper(0) = p\n")
    assert table.input_names() == ["c", "d"]
