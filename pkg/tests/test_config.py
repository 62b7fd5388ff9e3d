import pytest

from jittermon.config import ConfigError, load_config, parse_config, parse_seeds

GOOD = """\
version: 1
name: demo
duration_s: 30
seeds: 1..3
tagged:
  rate_bps: 90e6
  packet_size_bytes: 1500
  send_jitter_us: 200
topology:
  switch_link_bps: 100000000
cross:
  rate_bps: [1e6, 4e6]
  arrivals: cbr
estimators:
  controller:
    interval_s: 3
  dataplane:
    m: 5
    kinds: [manhattan]
    ewma: 7/8
"""


def test_parse_full_config():
    cfg = parse_config(GOOD)
    assert cfg.name == "demo"
    assert cfg.duration == 30 * 10**9
    assert cfg.seeds == (1, 2, 3)
    assert cfg.tagged.rate_bps == 90_000_000 and cfg.tagged.send_jitter_us == 200
    assert cfg.cross.rate_bps == (1e6, 4e6) and cfg.cross.arrivals == "cbr"
    assert cfg.controller.interval == 3 * 10**9
    assert cfg.dataplane.window == 33 and cfg.dataplane.ewma_shift == 3
    assert cfg.dataplane.kinds == ("manhattan",)


def test_minimal_config_defaults():
    cfg = parse_config("version: 1\nduration_s: 1\ntagged: {rate_bps: 1000000}\nestimators: {controller: }\n")
    assert cfg.controller.interval_s == 1.0 and cfg.dataplane is None
    assert cfg.topology.switches == 3 and cfg.cross.enabled


def test_missing_duration_names_key():
    text = GOOD.replace("duration_s: 30\n", "")
    with pytest.raises(ConfigError, match="duration_s") as exc:
        parse_config(text)
    assert exc.value.key == "duration_s"


def test_unknown_key_names_key_and_line():
    text = GOOD.replace("  packet_size_bytes: 1500\n", "  packet_size: 1500\n")
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.key == "tagged.packet_size"
    assert exc.value.line == 7
    assert "line 7" in str(exc.value)


@pytest.mark.parametrize(
    "old,new,key",
    [
        ("interval_s: 3", "interval_s: -1", "estimators.controller.interval_s"),
        ("arrivals: cbr", "arrivals: bursty", "cross.arrivals"),
        ("rate_bps: [1e6, 4e6]", "rate_bps: [4e6, 1e6]", "cross.rate_bps"),
        ("ewma: 7/8", "ewma: 3/4", "estimators.dataplane.ewma"),
        ("kinds: [manhattan]", "kinds: [chebyshev]", "estimators.dataplane.kinds"),
        ("m: 5", "m: 0", "estimators.dataplane.m"),
        ("version: 1", "version: 2", "version"),
    ],
)
def test_bad_values_name_key(old, new, key):
    with pytest.raises(ConfigError) as exc:
        parse_config(GOOD.replace(old, new))
    assert exc.value.key == key


def test_estimators_required():
    with pytest.raises(ConfigError, match="estimators"):
        parse_config("version: 1\nduration_s: 1\ntagged: {rate_bps: 1}\nestimators: {}\n")


def test_not_yaml():
    with pytest.raises(ConfigError):
        parse_config("version: [1\n")
    with pytest.raises(ConfigError):
        parse_config("")


def test_load_config_uses_file_stem(tmp_path):
    p = tmp_path / "my-run.yaml"
    p.write_text(GOOD.replace("name: demo\n", ""))
    assert load_config(p).name == "my-run"


def test_parse_seeds():
    assert parse_seeds("1..4") == [1, 2, 3, 4]
    assert parse_seeds("3") == [3]
    assert parse_seeds("1..2,9") == [1, 2, 9]
    with pytest.raises(ValueError):
        parse_seeds("5..1")
    with pytest.raises(ValueError):
        parse_seeds("")
