from __future__ import annotations

from importlib import resources

import pytest

from pelram.ram.asm import parse_program
from pelram.tm import TmSpec


def fixture_text(name: str) -> str:
    return (resources.files("pelram") / "fixtures" / name).read_text()


def load_tm(name: str) -> TmSpec:
    return TmSpec.from_text(fixture_text(name))


def load_ram(name: str):
    return parse_program(fixture_text(name))


@pytest.fixture
def accept0():
    return load_tm("accept0.tm")
