from __future__ import annotations

import pytest

from fbreg.config import SCHEMA, defaults, defaults_toml, load_config, parse_config
from fbreg.errors import ConfigError


def test_defaults_cover_schema():
    cfg = defaults()
    assert set(cfg) == set(SCHEMA)
    assert cfg["grid"]["h"] == 0.015625
    assert cfg["epi"]["deltas"] == [0.01, 0.05]


def test_defaults_are_independent_copies():
    a = defaults()
    a["epi"]["deltas"].append(1.0)
    assert defaults()["epi"]["deltas"] == [0.01, 0.05]


def test_defaults_document_round_trips():
    assert parse_config(defaults_toml()) == defaults()
    assert "# grid spacing" in defaults_toml()


def test_values_merge_and_coerce():
    cfg = parse_config('[grid]\nh = 0.03125\n[nonlinearity]\nfamily = "exp-saturating"\nparams = [1, 4]\n')
    assert cfg["grid"]["h"] == 0.03125
    assert cfg["grid"]["n"] == 2
    assert cfg["nonlinearity"]["params"] == [1.0, 4.0]
    assert isinstance(cfg["nonlinearity"]["params"][0], float)
    assert parse_config("[solver]\nstep = 1\n")["solver"]["step"] == 1.0


@pytest.mark.parametrize(
    "text, line",
    [
        ("[grid]\nspacing = 0.1\n", 2),
        ("[grid]\nh = 0.1\n[extras]\nx = 1\n", 3),
        ("[grid]\nn = 2.5\n", 2),
        ("[solver]\nacceleration = 1\n", 2),
        ("[epi]\ndeltas = [0.1, true]\n", 2),
        ('[boundary]\nkind = 3\n', 2),
    ],
)
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError, match=rf"\(line {line}\)"):
        parse_config(text)


def test_non_table_section_rejected():
    with pytest.raises(ConfigError):
        parse_config("grid = 3\n")


def test_syntax_error_wrapped():
    with pytest.raises(ConfigError, match="parse error"):
        parse_config("[grid\nh = 1\n")


def test_load_config(tmp_path):
    assert load_config(None) == defaults()
    p = tmp_path / "run.toml"
    p.write_text("[spectral]\nM = 512\n", encoding="utf-8")
    assert load_config(p)["spectral"]["M"] == 512
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
