import pytest

from airtune import corpus
from airtune.analyzer import ResourceBudget
from airtune.ir import parse_program


BIG_STEPS = ResourceBudget("steps", 10**9)


@pytest.fixture(scope="session")
def corpus_programs():
    return corpus.load_all()


@pytest.fixture
def big_budget():
    return BIG_STEPS


@pytest.fixture
def loop_program():
    return parse_program("""
fn main {
  block e { i = 0; goto head; }
  block head { br (i < 10) then: body else: exit; }
  block body { i = i + 1; goto head; }
  block exit { assert overflow: i == 10 #1; return; }
}
""")


@pytest.fixture
def branch_program():
    return parse_program("""
fn main {
  block e { x = havoc(0,1); br (x == 0) then: a else: b; }
  block a { y = 0; goto j; }
  block b { y = 10; goto j; }
  block j { assert overflow: y <= 10 #1; assert overflow: y != 5 #2; return; }
}
""")
