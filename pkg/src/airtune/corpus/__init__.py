"""Bundled .air corpus used by the test and acceptance suites."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from ..ir.parser import parse_program
from ..ir.nodes import Program


def corpus_dir() -> Path:
    return Path(resources.files(__package__))


def program_names() -> list[str]:
    return sorted(p.name for p in corpus_dir().glob("*.air"))


def load_text(name: str) -> str:
    return (corpus_dir() / name).read_text()


def load(name: str) -> Program:
    return parse_program(load_text(name))


def load_all() -> dict[str, Program]:
    return {name: load(name) for name in program_names()}
