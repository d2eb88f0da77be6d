import json
import random

import pytest

from bmquant.cli import main, parse_window, UsageError
from bmquant.generators import chain, random_spec, s2, s2xs2
from bmquant.io import (
    RunCache,
    SpecParseError,
    dumps,
    loads_json,
    module_from_json,
    module_to_csv,
    module_to_json,
    parse_rational,
    spec_digest,
    spec_from_json,
    spec_to_json,
)
from bmquant.quantize import quantize


@pytest.fixture(autouse=True)
def _isolated(tmp_path, monkeypatch):
    monkeypatch.setenv("BMQ_CACHE_DIR", str(tmp_path / "cache"))
    monkeypatch.chdir(tmp_path)


def write_spec(path, spec):
    path.write_text(dumps(spec_to_json(spec)), encoding="utf-8")
    return str(path)


def test_parse_rational():
    assert parse_rational("3/6") == parse_rational("1/2")
    assert parse_rational(4) == 4
    assert parse_rational(" -7 ") == -7
    for bad in ("0.5", "1/0", "x", True):
        with pytest.raises(SpecParseError):
            parse_rational(bad)


def test_float_literal_rejected():
    with pytest.raises(SpecParseError, match="float"):
        loads_json('{"a": 0.5}')


def test_parse_error_has_location():
    with pytest.raises(SpecParseError, match="line 2, column"):
        loads_json('{\n  "a": }')


def test_spec_round_trip():
    rng = random.Random(2)
    for spec in [s2(2), s2xs2(3), chain(4, 3)] + [random_spec(rng, rng.randint(1, 4), rng.randint(1, 3)) for _ in range(10)]:
        doc = json.loads(dumps(spec_to_json(spec)))
        again = spec_from_json(doc)
        assert again == spec
        assert quantize(again) == quantize(spec)


def test_module_round_trip():
    rng = random.Random(4)
    for _ in range(10):
        q = quantize(random_spec(rng, rng.randint(1, 4), rng.randint(1, 2)))
        assert module_from_json(json.loads(dumps(module_to_json(q)))) == q


def test_missing_side_minus_is_schema_error():
    doc = spec_to_json(s2(2))
    del doc["z_components"][0]["side_minus"]
    with pytest.raises(SpecParseError, match="side_minus"):
        spec_from_json(doc)


def test_csv_format():
    text = module_to_csv(quantize(s2xs2(2)), [(-1, 1), (0, 1)])
    assert text.startswith("w1,w2,mult\n")
    assert "\r" not in text
    assert text.splitlines()[1:4] == ["-1,0,1", "-1,1,1", "0,0,0"]


def test_digest_is_stable():
    assert spec_digest(s2(2)) == spec_digest(spec_from_json(spec_to_json(s2(2))))
    assert spec_digest(s2(2)) != spec_digest(s2(4))


def test_run_cache_atomic_put(tmp_path):
    c = RunCache(tmp_path / "c")
    assert c.get("ab" * 32) is None
    c.put("ab" * 32, "hello\n")
    assert c.get("ab" * 32) == "hello\n"
    assert not list((tmp_path / "c").rglob("*.tmp"))


def test_parse_window():
    assert parse_window("-5..5") == (-5, 5)
    with pytest.raises(UsageError, match="reversed"):
        parse_window("5..-5")
    with pytest.raises(UsageError):
        parse_window("5-6")


# ---------------------------------------------------------------------------
# command line


def test_cli_validate(tmp_path, capsys):
    path = write_spec(tmp_path / "s2.json", s2(2))
    assert main(["validate", path]) == 0
    assert "OK" in capsys.readouterr().out
    bad = tmp_path / "bad.json"
    bad.write_text(open(path).read().replace('"1"', "0.5", 1))
    assert main(["validate", str(bad)]) == 2
    assert "float" in capsys.readouterr().err
    doc = spec_to_json(s2(2))
    del doc["z_components"][0]["side_minus"]
    (tmp_path / "m.json").write_text(json.dumps(doc))
    assert main(["validate", "m.json"]) == 2
    assert "side_minus" in capsys.readouterr().err
    doc = spec_to_json(s2(2))
    doc["z_components"][0]["ratios"] = ["1", "0"]
    (tmp_path / "z.json").write_text(json.dumps(doc))
    assert main(["validate", "z.json"]) == 2
    assert "leading modular weight is zero" in capsys.readouterr().out


def test_cli_quantize_outputs(tmp_path):
    path = write_spec(tmp_path / "s2.json", s2(2))
    assert main(["quantize", path, "--window=-5..5", "--prefix", "out"]) == 0
    rows = (tmp_path / "out.csv").read_text().splitlines()
    assert rows[0] == "w1,mult"
    assert {int(r.split(",")[0]): int(r.split(",")[1]) for r in rows[1:]} == {k: int(k != 0) for k in range(-5, 6)}
    assert (tmp_path / "out.svg").read_text().startswith("<svg")
    mod = module_from_json(json.loads((tmp_path / "out.json").read_text()))
    assert mod == quantize(s2(2))
    # the input file is left alone
    assert spec_from_json(json.loads(open(path).read())) == s2(2)


def test_cli_quantize_odd_is_all_zero(tmp_path):
    path = write_spec(tmp_path / "s3.json", s2(3))
    assert main(["quantize", path, "--window=-5..5", "--out", "csv"]) == 0
    rows = (tmp_path / "s3_q.csv").read_text().splitlines()[1:]
    assert all(r.endswith(",0") for r in rows) and len(rows) == 11


def test_cli_reversed_window(tmp_path, capsys):
    path = write_spec(tmp_path / "s2.json", s2(2))
    assert main(["quantize", path, "--window=5..-5"]) == 2
    assert "reversed" in capsys.readouterr().err


def test_cli_determinism_and_cache_transparency(tmp_path, monkeypatch):
    path = write_spec(tmp_path / "c.json", chain(4, 2))
    assert main(["quantize", path, "--out", "json", "--prefix", "a", "--no-cache"]) == 0
    assert main(["quantize", path, "--out", "json", "--prefix", "b"]) == 0  # cold cache
    assert list((tmp_path / "cache").rglob("*.json"))
    assert main(["quantize", path, "--out", "json", "--prefix", "c"]) == 0  # warm cache
    a, b, c = ((tmp_path / f"{p}.json").read_bytes() for p in "abc")
    assert a == b == c


def test_cli_check(tmp_path, capsys):
    s3 = write_spec(tmp_path / "s3.json", s2(3))
    assert main(["check", s3, "theorem1"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("PASS") and "dim 0" in out
    s2p = write_spec(tmp_path / "s2.json", s2(2))
    assert main(["check", s2p, "theorem1"]) == 0
    out = capsys.readouterr().out
    assert "xi=[1] c+=1 c-=1 lambda0=1" in out
    sx = write_spec(tmp_path / "sx.json", s2xs2(2))
    assert main(["check", sx, "stages", "--proj", "[[1, 0]]"]) == 0
    capsys.readouterr()
    assert main(["check", sx, "stages", "--proj", "[[0, 1]]"]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and "non-proper restriction" in out and "leading modular weight zero" in out
    (tmp_path / "n.json").write_text('{"halfspaces": [{"normal": [1], "bound": "0"}, {"normal": [-1], "bound": "-2"}]}')
    assert main(["check", s2p, "qr", "--npolytope", "n.json"]) == 0
    assert "lhs=2 rhs=2" in capsys.readouterr().out
    assert main(["check", s2p, "stages"]) == 2


def test_cli_example(tmp_path, capsys):
    assert main(["example", "s2", "--m", "2", "--out", "e.json"]) == 0
    assert spec_from_json(json.loads((tmp_path / "e.json").read_text())) == s2(2)
    assert main(["example", "chain", "--pieces", "3", "--m", "3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert spec_from_json(doc) == chain(3, 3)
    assert main(["example", "s2", "--m", "3", "--coeffs", "4,0,1"]) == 0
    assert spec_from_json(json.loads(capsys.readouterr().out)).z_components[0].modular_ratios == (4, 0, 1)
    assert main(["example", "torus"]) == 2
    assert "unknown example" in capsys.readouterr().err
