import pytest

from crowdsim import config as cfg


def test_parse_kv_lines_basic():
    entries = cfg.parse_kv_lines("a = 1\n# comment\n\nb = two words  # trailing\n")
    assert entries == [("a", "1", 1), ("b", "two words", 4)]


def test_parse_kv_lines_reports_line_numbers():
    with pytest.raises(cfg.ConfigError, match=r"<x>:3"):
        cfg.parse_kv_lines("a = 1\n\nnot a directive\n", source="<x>")


def test_entries_to_dict_rejects_duplicates():
    entries = cfg.parse_kv_lines("a = 1\na = 2\n", source="<x>")
    with pytest.raises(cfg.ConfigError, match="duplicate"):
        cfg.entries_to_dict(entries, source="<x>")


def test_entries_to_dict_repeatable():
    entries = cfg.parse_kv_lines("p = 1,2\np = 3,4\n")
    d = cfg.entries_to_dict(entries, repeatable=("p",))
    assert [v for v, _ in d["p"]] == ["1,2", "3,4"]


def test_point_parsers():
    assert cfg.parse_point("1,2.5", "w") == (1.0, 2.5)
    assert cfg.parse_points("1,2 3,4", "w") == [(1.0, 2.0), (3.0, 4.0)]
    assert cfg.parse_point3("1,2,3", "w") == (1.0, 2.0, 3.0)
    with pytest.raises(cfg.ConfigError):
        cfg.parse_point("1;2", "w")


def test_scalar_parsers():
    assert cfg.parse_bool("true", "w") and not cfg.parse_bool("off", "w")
    assert cfg.parse_ints("1 2 3", "w") == [1, 2, 3]
    with pytest.raises(cfg.ConfigError, match="integer"):
        cfg.parse_int("1.5", "w")


def test_parse_fields():
    d = cfg.parse_fields("kind:dance center:1,2", "w",
                         required=("kind", "center"), optional=("radius",))
    assert d == {"kind": "dance", "center": "1,2"}
    with pytest.raises(cfg.ConfigError, match="missing field"):
        cfg.parse_fields("kind:dance", "w", required=("kind", "center"))
    with pytest.raises(cfg.ConfigError, match="unknown field"):
        cfg.parse_fields("bogus:1", "w", required=(), optional=("radius",))
