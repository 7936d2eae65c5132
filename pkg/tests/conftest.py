"""Shared fixtures: the two corpus definitions and their synthesized pairs."""

from __future__ import annotations

from pathlib import Path

import pytest

from kbx.corpus import load_definition, read_models, synthesize_pair

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
TRAFFIC = CORPUS / "traffic"
FAMILY = CORPUS / "family"


def read(path: Path) -> str:
    return path.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def traffic_ux():
    return load_definition(TRAFFIC / "traffic.kbx")


@pytest.fixture(scope="session")
def traffic_pair(traffic_ux):
    return synthesize_pair(traffic_ux, read(TRAFFIC / "traffic.kbxd"))


@pytest.fixture(scope="session")
def pedestrian(traffic_ux):
    """(m, n) for the consistent crossing."""
    return read_models(traffic_ux, read(TRAFFIC / "pedestrian.hcsp"), read(TRAFFIC / "pedestrian.uml"))


@pytest.fixture(scope="session")
def family_ux():
    return load_definition(FAMILY / "family.kbx")


@pytest.fixture(scope="session")
def family_pair(family_ux):
    return synthesize_pair(family_ux, read(FAMILY / "family.kbxd"))


@pytest.fixture(scope="session")
def march(family_ux):
    return read_models(family_ux, read(FAMILY / "march.fam"), read(FAMILY / "march.persons"))
