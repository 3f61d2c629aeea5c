from __future__ import annotations

import contextlib
import io as stdio
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles.py

from voxml import cli
from voxml.io import parse_scene, parse_voxicon

DATA = Path(cli._default_data("voxicon.vox")).parent
FIXTURES = Path(__file__).parent / "fixtures"

# The core library entries: four objects, two programs, two attributes,
# one relation, one function, plus the chair.
PAPER_PREDS = [
    ("wall", "object"), ("table", "object"), ("plate", "object"),
    ("apple", "object"), ("chair", "object"),
    ("slide", "program"), ("put", "program"),
    ("brown", "attribute"), ("small", "attribute"),
    ("is_touching", "relation"), ("top", "function"),
]


@pytest.fixture(scope="session")
def voxicon_text() -> str:
    return (DATA / "voxicon.vox").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def voxicon(voxicon_text):
    return parse_voxicon(voxicon_text)


@pytest.fixture(scope="session")
def scene_text() -> str:
    return (DATA / "scene.scene").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def scene(scene_text):
    return parse_scene(scene_text).to_state()


def run_cli(*argv: str) -> tuple[int, str, str]:
    out, err = stdio.StringIO(), stdio.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        try:
            code = cli.main(list(argv))
        except SystemExit as e:  # argparse --help exits directly
            code = int(e.code or 0)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def cli_runner():
    return run_cli
