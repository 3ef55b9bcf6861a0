import pytest

import semmatch as sm
from semmatch import bundled

# Four-synset chain used by the similarity arithmetic examples:
# entity (depth 1) <- vehicle (2) <- {car, bicycle} (3).
CHAIN_TAXONOMY = """\
synset entity.x | entity | | root
synset vehicle.x | vehicle | entity.x | conveys things
synset car.x | car | vehicle.x | motor vehicle
synset bicycle.x | bicycle | vehicle.x | pedal vehicle
"""

# Two disconnected roots.
FOREST_TAXONOMY = """\
synset left.x | left | |
synset leftkid.x | leftkid | left.x |
synset right.x | right | |
synset rightkid.x | rightkid | right.x |
"""


@pytest.fixture(scope="session")
def tax():
    return sm.load_taxonomy(bundled.taxonomy_path())


@pytest.fixture(scope="session")
def chain_tax():
    return sm.loads_taxonomy(CHAIN_TAXONOMY)


@pytest.fixture(scope="session")
def forest_tax():
    return sm.loads_taxonomy(FOREST_TAXONOMY)


@pytest.fixture(scope="session")
def po_export():
    return sm.load_schema(bundled.fixture_dir("po") / "export.json")


@pytest.fixture(scope="session")
def po_co():
    return sm.load_schema(bundled.fixture_dir("po") / "co.json")


@pytest.fixture(scope="session")
def po_mirror():
    return sm.load_schema(bundled.fixture_dir("po") / "mirror_export.json")


@pytest.fixture(scope="session")
def po_gold():
    return sm.load_gold(bundled.fixture_dir("po") / "gold.tsv")


@pytest.fixture(scope="session")
def transport_export():
    return sm.load_schema(bundled.fixture_dir("transport") / "export.json")


@pytest.fixture(scope="session")
def transport_co():
    return sm.load_schema(bundled.fixture_dir("transport") / "co.json")


@pytest.fixture(scope="session")
def transport_gold():
    return sm.load_gold(bundled.fixture_dir("transport") / "gold.tsv")


@pytest.fixture(scope="session")
def flat_export():
    return sm.load_schema(bundled.fixture_dir("flat") / "export.json")


@pytest.fixture(scope="session")
def flat_co():
    return sm.load_schema(bundled.fixture_dir("flat") / "co.json")


@pytest.fixture(scope="session")
def flat_gold():
    return sm.load_gold(bundled.fixture_dir("flat") / "gold.tsv")


@pytest.fixture(scope="session")
def po_half(tax, po_export, po_co):
    return sm.build_half_agreement(tax, po_export, po_co, peer_id="p1")


@pytest.fixture(scope="session")
def mirror_half(tax, po_mirror, po_co):
    return sm.build_half_agreement(tax, po_mirror, po_co, peer_id="p2")
