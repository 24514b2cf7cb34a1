from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

# The opening sentence of the corpus novel, tagged and plain. The tagged form
# is the golden rendering the demo grammar set must reproduce byte for byte.
OPENING_TAGGED = (
    "En l'année 1872, la maison portant le numéro 7 de "
    '<ENT type="loc.line">Saville-row</ENT>, '
    '<ENT type="loc.line">Burlington Gardens</ENT> -- maison dans laquelle '
    '<ENT type="pers.hum">Sheridan</ENT> mourut en 1814 --, était habité par '
    '<ENT type="pers.hum">Phileas Fogg, esq.</ENT>, '
    "l'un des membres les plus singuliers et les plus remarquables du "
    '<ENT type="org">Reform-Club de Londres</ENT>, '
    "bien qu'il semblât prendre à tâche de ne rien faire qui pût attirer l'attention."
)

OPENING_PLAIN = (
    "En l'année 1872, la maison portant le numéro 7 de Saville-row, "
    "Burlington Gardens -- maison dans laquelle Sheridan mourut en 1814 --, "
    "était habité par Phileas Fogg, esq., l'un des membres les plus singuliers "
    "et les plus remarquables du Reform-Club de Londres, bien qu'il semblât "
    "prendre à tâche de ne rien faire qui pût attirer l'attention."
)

OPENING_ENTITIES = [
    ("loc.line", "Saville-row"),
    ("loc.line", "Burlington Gardens"),
    ("pers.hum", "Sheridan"),
    ("pers.hum", "Phileas Fogg, esq."),
    ("org", "Reform-Club de Londres"),
]


@pytest.fixture
def opening_plain() -> str:
    return OPENING_PLAIN


@pytest.fixture
def opening_tagged() -> str:
    return OPENING_TAGGED
