import math
from pathlib import Path

import pytest

from coli import init_configuration, load_kb
from coli.prover import Bounds
from coli.scripts import ListChannel, ScriptEnv, parse_script, run_script

DATA = Path(__file__).parent / "data"


def data_text(name: str) -> str:
    return (DATA / name).read_text()


def data_path(name: str) -> str:
    return str(DATA / name)


def factorial(n: int) -> int:
    return math.prod(range(1, n + 1))


def run_game(kb: str, script: str, inputs, bounds: Bounds | None = None,
             trace=False):
    """Load KB + script from tests/data, play one session in process.

    Returns (outcome, final configuration, trace lines)."""
    table = load_kb(data_text(kb))
    cfg = init_configuration(table)
    lines: list[str] = []
    env = ScriptEnv(channel=ListChannel(inputs),
                    bounds=bounds or Bounds(),
                    trace_sink=lines.append if trace else None)
    outcome, final = run_script(parse_script(data_text(script)), cfg, env)
    return outcome, final, lines


@pytest.fixture
def fact_table():
    return load_kb(data_text("fact.kb"))


@pytest.fixture
def fact_config(fact_table):
    return init_configuration(fact_table)
