"""Game-state moves: polarity checks, replication, the replay property."""

import pytest

from coli.configuration import (Path, ReadMove, ReplicateMove, WriteMove,
                                apply_read, apply_write, init_configuration,
                                legal_moves, move_line, replay, replicate)
from coli.directories import load_kb
from coli.errors import BoundError, ConfigError, SharedNodeError
from coli.formulas import Atom, Exists, Implies, pretty
from coli.terms import GVar, Num, app

from conftest import data_text, run_game


def out_formula(cfg):
    return cfg.formula_at(cfg.root_of(cfg.output))


def test_init_factorial(fact_table, fact_config):
    cfg = fact_config
    assert list(cfg.roots) == ["c", "d", "query"]
    assert cfg.sides == {"c": "input", "d": "input", "query": "output"}
    assert pretty(cfg.formula_at(cfg.root_of("c"))) == "fact(0,1)"
    assert pretty(out_formula(cfg)) == "@y. #z. fact(y,z)"
    assert cfg.trace == [] and cfg.gvars == []


def test_init_no_inputs():
    table = load_kb("/query = p\nquery /query\n")
    cfg = init_configuration(table)
    assert list(cfg.roots) == ["query"]


def test_init_undefined_service():
    table = load_kb("/d = p\n")
    with pytest.raises(ConfigError):
        init_configuration(table, output_name="missing")


def test_initial_legal_moves(fact_config):
    # derived by hand: the only active points are the environment's @y on
    # the output and replication of the /d recurrence
    moves = [(o.kind, str(o.path)) for o in legal_moves(fact_config)]
    assert moves == [("replicate", "/d"), ("read", "/query")]


def test_legal_moves_after_read(fact_config):
    cfg = apply_read(fact_config, Path("query"), 3, "n")
    kinds = {(o.kind, str(o.path)) for o in legal_moves(cfg)}
    assert ("write", "/query") in kinds


def test_no_moves_on_elementary_output():
    table = load_kb("/query = p\nquery /query\n")
    assert legal_moves(init_configuration(table)) == []


def test_apply_read(fact_config):
    cfg = apply_read(fact_config, Path("query"), 3, "n")
    assert pretty(out_formula(cfg)) == "#z. fact(3,z)"
    assert cfg.trace == [ReadMove(Path("query"), 3, "n")]

    zero = apply_read(fact_config, Path("query"), 0, "n")
    assert pretty(out_formula(zero)) == "#z. fact(0,z)"


def test_apply_read_wrong_polarity(fact_config):
    cfg = apply_read(fact_config, Path("query"), 3, "n")
    with pytest.raises(ConfigError, match="polarity"):
        apply_read(cfg, Path("query"), 1, "m")  # #z belongs to the machine


def test_apply_write_output(fact_config):
    cfg = apply_read(fact_config, Path("query"), 3, "n")
    cfg = apply_write(cfg, Path("query"))
    assert out_formula(cfg) == Atom("fact", (Num(3), GVar("W1")))
    assert cfg.gvars == ["W1"]


def test_apply_write_twice_peels_successive(fact_config):
    cfg = replicate(fact_config, Path("d"), 1)
    cfg = apply_write(cfg, Path("d", (1,)))
    cfg = apply_write(cfg, Path("d", (1,)))
    replica = cfg.formula_at(cfg.replicas[cfg.root_of("d")][1])
    want = Implies(
        Atom("fact", (GVar("W1"), GVar("W2"))),
        Atom("fact", (app("+", GVar("W1"), Num(1)),
                      app("+", app("*", GVar("W1"), GVar("W2")), GVar("W2")))))
    assert replica == want


def test_apply_write_on_atom_errors():
    table = load_kb("/query = p\nquery /query\n")
    with pytest.raises(ConfigError):
        apply_write(init_configuration(table), Path("query"))


def test_replicate_explicit_and_errors(fact_config):
    cfg = replicate(fact_config, Path("d"), 1)
    replica = cfg.formula_at(cfg.replicas[cfg.root_of("d")][1])
    assert pretty(replica) == "@x. @y. (fact(x,y) -> fact(x+1,x*y+y))"
    with pytest.raises(ConfigError):
        replicate(cfg, Path("d"), 1)  # already created
    with pytest.raises(ConfigError):
        replicate(cfg, Path("c"), 1)  # not a recurrence


def test_replicate_on_demand(fact_config):
    cfg = apply_write(fact_config, Path("d", (2,)))
    root = cfg.root_of("d")
    assert sorted(cfg.replicas[root]) == [2]
    assert [type(m).__name__ for m in cfg.trace] == ["ReplicateMove", "WriteMove"]


def test_replica_limit():
    table = load_kb(data_text("fact.kb"))
    cfg = init_configuration(table, replica_limit=2)
    cfg = replicate(cfg, Path("d"), 1)
    cfg = replicate(cfg, Path("d"), 2)
    with pytest.raises(BoundError):
        replicate(cfg, Path("d"), 3)


def test_collapse_write_output_recurrence():
    table = load_kb(data_text("q.kb"))
    cfg = init_configuration(table)
    cfg = apply_write(cfg, Path("q", (1,)))
    assert pretty(out_formula(cfg)) == "p(W1) \\/ q(a)"


def test_collapse_write_rejected_on_input():
    table = load_kb(data_text("fact.kb"))
    cfg = init_configuration(table)
    with pytest.raises(ConfigError):
        apply_write(cfg, Path("d"))


def test_shared_node_is_read_only():
    table = load_kb("/m = #x. p(x)\n/o = /m /\\ /m\nquery /o\n")
    cfg = init_configuration(table, input_names=[])
    with pytest.raises(SharedNodeError):
        apply_write(cfg, Path("o", (1,)))


def _all_paths(cfg, max_extra=2):
    """Every structural address of the configuration, replicas included."""
    paths = []

    def walk(name, nid, segs, depth):
        paths.append(Path(name, segs))
        if depth > 6:
            return
        node = cfg.nodes[nid]
        if node.op == "recur":
            for idx, rep in sorted(cfg.replicas.get(nid, {}).items()):
                walk(name, rep, segs + (idx,), depth + 1)
        else:
            for i, child in enumerate(node.children, start=1):
                walk(name, child, segs + (i,), depth + 1)

    for name, root in cfg.roots.items():
        walk(name, root, (), 0)
    return paths


def test_every_legal_move_applies_and_others_fail(fact_config):
    # exhaustively: applying (kind, path) succeeds exactly when listed
    cfg = apply_read(fact_config, Path("query"), 1, "n")
    cfg = apply_write(cfg, Path("d", (1,)))
    listed = {(o.kind, o.path): o for o in legal_moves(cfg)}
    for path in _all_paths(cfg):
        for kind in ("read", "write", "replicate"):
            def attempt():
                if kind == "write":
                    # disable on-demand replication so unlisted paths fail
                    return apply_write(cfg, path)
                if kind == "read":
                    return apply_read(cfg, path, 0, "v")
                return replicate(cfg, path, listed.get((kind, path),
                                                       None).index
                                 if (kind, path) in listed else 1)
            if (kind, path) in listed:
                attempt()
            else:
                with pytest.raises(ConfigError):
                    attempt()
    with pytest.raises(ConfigError):
        apply_read(cfg, Path("nosuch"), 0, "v")


def test_gvar_count_matches_fresh_writes():
    outcome, cfg, _ = run_game("fact.kb", "fact.coli", [4])
    fresh = [m for m in cfg.trace
             if isinstance(m, WriteMove) and m.gvar is not None]
    assert outcome.won
    assert len(cfg.gvars) == len(fresh) == 9


def test_trace_replay_reproduces_configuration(fact_table):
    outcome, cfg, _ = run_game("fact.kb", "fact.coli", [3])
    assert outcome.won
    again = replay(fact_table, cfg.trace)
    assert again.structure() == cfg.structure()
    assert again.trace == cfg.trace


def test_move_line_formats():
    assert move_line(ReadMove(Path("query"), 3, "n")) == \
        "MOVE read /query value=3 var=n"
    assert move_line(WriteMove(Path("d", (1,)), gvar="W2")) == \
        "MOVE write /d.1 var=W2"
    assert move_line(WriteMove(Path("q", (1,)), term=Num(0))) == \
        "MOVE write /q.1 term=0"
    assert move_line(ReplicateMove(Path("d"), 2)) == "MOVE replicate /d idx=2"


def test_input_side_environment_read_is_symmetric():
    # #x on an input belongs to the environment; reads work there too
    table = load_kb("/e = #x. p(x)\n/query = q(a)\nquery /query\n")
    cfg = init_configuration(table)
    opts = [(o.kind, str(o.path), o.side) for o in legal_moves(cfg)]
    assert opts == [("read", "/e", "input")]
    cfg2 = apply_read(cfg, Path("e"), 5, "v")
    assert pretty(cfg2.formula_at(cfg2.root_of("e"))) == "p(5)"
    with pytest.raises(ConfigError):
        apply_write(cfg, Path("e"))


def test_write_at_structural_child_path():
    table = load_kb("/k = q(c)\n/query = (#x. p(x)) /\\ q(c)\nquery /query\n")
    cfg = init_configuration(table)
    assert [(o.kind, str(o.path)) for o in legal_moves(cfg)] == \
        [("write", "/query.1")]
    cfg2 = apply_write(cfg, Path("query", (1,)))
    assert pretty(cfg2.formula_at(cfg2.root_of("query"))) == "p(W1) /\\ q(c)"


def test_quantifier_under_negation_flips_polarity():
    table = load_kb("/query = ~(#x. p(x))\nquery /query\n")
    cfg = init_configuration(table)
    opts = [(o.kind, str(o.path)) for o in legal_moves(cfg)]
    assert opts == [("read", "/query.1")]


def test_sides_and_untouched_services(fact_config):
    before = fact_config.formula_at(fact_config.root_of("c"))
    cfg = apply_read(fact_config, Path("query"), 2, "n")
    assert cfg.sides == fact_config.sides
    assert cfg.formula_at(cfg.root_of("c")) == before
