from pathlib import Path

import pytest

from errors import ConfigInvalid
from protocol import BehaviorKind
from scenario import ScenarioConfig

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

EXAMPLE_ONE = """\
# worked example 1 as a scenario
scheme=multi
prime=199
threshold=5
participants=11
public_keys=7,5,4,3,2,9,6,8,11,10,12
secret=7,9,2,3,7,5,4,9,3,21,27
message_bits=5
oneway=modexp:3
profile.4=corrupt_h_share:17
profile.9=late:3
"""


def test_parse_multi_scenario():
    scenario = ScenarioConfig.parse(EXAMPLE_ONE)
    assert scenario.scheme == "multi"
    assert scenario.public_keys == [7, 5, 4, 3, 2, 9, 6, 8, 11, 10, 12]
    assert scenario.message_bits == 5
    assert scenario.profiles[4].kind is BehaviorKind.CORRUPT_H_SHARE
    assert scenario.profiles[4].offset == 17
    assert scenario.profiles[9].delay == 3
    assert scenario.active_set() == list(range(1, 12))


def test_builders():
    scenario = ScenarioConfig.parse(EXAMPLE_ONE)
    params, oneway = scenario.scheme_params()
    secret = scenario.secret_vector(params)
    assert params.threshold_t == 5
    assert [a.value for a in params.public_keys] == scenario.public_keys
    assert [c.value for c in secret.message] == [7, 9, 2, 3, 7]


def test_text_round_trip():
    scenario = ScenarioConfig.parse(EXAMPLE_ONE + "active=1,2,3,4,5,6\nstrict=false\n")
    again = ScenarioConfig.parse(scenario.to_text())
    assert again == scenario


def test_unknown_key_reports_line():
    with pytest.raises(ConfigInvalid) as info:
        ScenarioConfig.parse(EXAMPLE_ONE + "colour=blue\n")
    assert info.value.line == 12
    assert info.value.field == "colour"
    assert "line 12" in str(info.value)


@pytest.mark.parametrize("extra,field", [
    ("threshold=five\n", "threshold"),
    ("strict=maybe\n", "strict"),
    ("profile.2=sneaky\n", "profile.2"),
])
def test_malformed_values(extra, field):
    with pytest.raises(ConfigInvalid) as info:
        ScenarioConfig.parse(EXAMPLE_ONE + extra)
    assert info.value.field == field


def test_semantic_errors():
    with pytest.raises(ConfigInvalid):
        ScenarioConfig.parse("scheme=single\nprime=199\nthreshold=3\nparticipants=5\n")
    with pytest.raises(ConfigInvalid):
        ScenarioConfig.parse("scheme=single\nprime=199\nthreshold=3\nparticipants=5\nsecret=4,5\n")
    with pytest.raises(ConfigInvalid):
        ScenarioConfig.parse("scheme=single\nprime=200\nthreshold=3\nparticipants=5\nsecret=4\n")
    with pytest.raises(ConfigInvalid):
        ScenarioConfig.parse(EXAMPLE_ONE + "profile.12=silent\n")
    with pytest.raises(ConfigInvalid):
        ScenarioConfig.parse(EXAMPLE_ONE + "message_bits=6\n")
    with pytest.raises(ConfigInvalid):
        ScenarioConfig.parse("scheme=ring\n")


def test_chain_settings():
    scenario = ScenarioConfig.parse(
        "scheme=chain\nseed=9\nchain.nodes=20\nchain.recipients=6\nchain.intervals=3\n"
        "chain.nbits=2\nchain.forging_dealers=3,7\nnode.5=silent\n"
    )
    settings = scenario.world_settings()
    assert settings.node_count == 20
    assert settings.recipients == 6
    assert settings.threshold == 3
    assert settings.forging_dealers == {3, 7}
    assert settings.node_profiles[5].kind is BehaviorKind.SILENT
    assert scenario.chain_intervals == 3


def test_chain_settings_rejected():
    with pytest.raises(ConfigInvalid):
        ScenarioConfig.parse("scheme=chain\nchain.recipients=2\n")
    with pytest.raises(ConfigInvalid):
        ScenarioConfig.parse("scheme=chain\nchain.intervals=0\n")
    with pytest.raises(ConfigInvalid, match="FieldTooSmall"):
        ScenarioConfig.parse("scheme=chain\nprime=199\n")


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigInvalid):
        ScenarioConfig.load(str(tmp_path / "missing.env"))


@pytest.mark.parametrize("name", ["example1.env", "cheater.env", "chain.env"])
def test_shipped_scenarios_load(name):
    scenario = ScenarioConfig.load(str(SCENARIOS / name))
    assert scenario.scheme in ("single", "multi", "chain")
