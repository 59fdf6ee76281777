"""CLI: config parsing, element literals, exit codes, byte-determinism."""

import json

import pytest

from boundarywalk.cli import (
    ConfigError,
    format_element,
    main,
    parse_element,
    parse_group,
    parse_scalar,
    read_result,
)
from boundarywalk.groups import Cyclic, FreeGroup, IntLattice, Lamplighter


# -- element literals ---------------------------------------------------------


def test_lattice_literal_roundtrip():
    g = IntLattice(2)
    assert parse_element(g, "3,-1") == (3, -1)
    assert format_element(g, (3, -1)) == "3,-1"
    with pytest.raises(ConfigError):
        parse_element(g, "3")
    with pytest.raises(ConfigError):
        parse_element(g, "3,x")


def test_cyclic_literal():
    g = Cyclic(5)
    assert parse_element(g, "7") == 2
    assert format_element(g, 2) == "2"
    with pytest.raises(ConfigError):
        parse_element(g, "two")


def test_free_literal_roundtrip():
    g = FreeGroup(2)
    assert parse_element(g, "ab^-1a") == (1, -2, 1)
    assert parse_element(g, "e") == ()
    assert format_element(g, (1, -2, 1)) == "ab^-1a"
    assert format_element(g, ()) == "e"
    with pytest.raises(ConfigError) as exc:
        parse_element(g, "aX")
    assert "column 1" in str(exc.value)
    with pytest.raises(ConfigError):
        parse_element(g, "c")  # beyond rank 2


def test_lamplighter_literal_roundtrip():
    g = Lamplighter(1)
    e = parse_element(g, "p=2;L=0,1")
    assert e == ((2,), ((0,), (1,)))
    assert format_element(g, e) == "p=2;L=0,1"
    assert parse_element(g, "p=-1") == ((-1,), ())
    with pytest.raises(ConfigError):
        parse_element(g, "L=0")
    g2 = Lamplighter(2)
    e2 = parse_element(g2, "p=1,0;L=(0,0)(1,2)")
    assert e2 == ((1, 0), ((0, 0), (1, 2)))
    assert format_element(g2, e2) == "p=1,0;L=(0,0)(1,2)"


def test_parse_group_and_scalar():
    assert parse_group({"kind": "free", "rank": 3}) == FreeGroup(3)
    with pytest.raises(ConfigError):
        parse_group({"kind": "dihedral"})
    with pytest.raises(ConfigError):
        parse_group("lattice")
    assert parse_scalar("1/3", "exact") * 3 == 1
    assert parse_scalar(0.25, "float") == 0.25
    with pytest.raises(ConfigError):
        parse_scalar("1/0", "exact")


# -- transform subcommand ------------------------------------------------------


def srw_config(**extra):
    cfg = {
        "group": {"kind": "lattice", "rank": 1},
        "measure": {"1": "1/2", "-1": "1/2"},
        "rule": {"type": "first-increment", "set": ["-1"]},
        "seed": 11,
    }
    cfg.update(extra)
    return cfg


def write_config(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg), encoding="utf-8")
    return str(p)


def test_transform_exact(tmp_path, capsys):
    cfg = write_config(tmp_path, srw_config())
    code = main(["transform", "--config", cfg, "--out", str(tmp_path / "out")])
    assert code == 0
    csv = (tmp_path / "out" / "transform.csv").read_text()
    rows = csv.splitlines()
    assert rows[0] == "element,weight,weight_decimal,cumulative"
    table = dict(r.rsplit(",", 3)[0:2] for r in rows[1:])
    assert table["-1"] == "1/2"
    assert table["0"] == "1/4"
    summary = json.loads((tmp_path / "out" / "transform.json").read_text())
    assert summary["mass_deficit"] == "1/1048576"
    assert summary["truncated"] is False


def test_transform_byte_deterministic_and_worker_invariant(tmp_path):
    cfg = write_config(tmp_path, srw_config(samples=20_000))
    outputs = []
    for run, workers in (("a", "1"), ("b", "1"), ("c", "4")):
        out = tmp_path / run
        code = main(
            ["transform", "--config", cfg, "--out", str(out), "--workers", workers]
        )
        assert code == 0
        outputs.append(
            (out / "transform.csv").read_bytes()
            + (out / "transform.json").read_bytes()
        )
    assert outputs[0] == outputs[1] == outputs[2]


def test_transform_seed_override_changes_mc_output(tmp_path):
    cfg = write_config(tmp_path, srw_config(samples=5000))
    main(["transform", "--config", cfg, "--out", str(tmp_path / "a")])
    main(["transform", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "99"])
    assert (tmp_path / "a" / "transform.csv").read_bytes() != (
        tmp_path / "b" / "transform.csv"
    ).read_bytes()


def test_transform_truncated_exit_code(tmp_path):
    cfg = write_config(
        tmp_path,
        srw_config(rule={"type": "first-visit", "set": ["3"]}, maxHorizon=40),
    )
    assert main(["transform", "--config", cfg, "--out", str(tmp_path / "out")]) == 3
    summary = json.loads((tmp_path / "out" / "transform.json").read_text())
    assert summary["truncated"] is True


def test_transform_extended_rule(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "group": {"kind": "cyclic", "modulus": 2},
            "measure": {"1": 1},
            "rule": {"type": "beta-flag", "fraction": {"1": "1/2"}},
        },
    )
    assert main(["transform", "--config", cfg, "--out", str(tmp_path / "out")]) == 0
    rows = (tmp_path / "out" / "transform.csv").read_text().splitlines()
    table = dict(r.rsplit(",", 3)[0:2] for r in rows[1:])
    assert table["1"] == "349525/524288"  # 2/3 truncated at the 2^-20 tail


def test_transform_sequential_and_aux_convex(tmp_path):
    cfg = write_config(
        tmp_path,
        srw_config(
            rule={
                "type": "sequential",
                "rules": [
                    {"type": "constant", "n": 2},
                    {"type": "first-increment", "set": ["-1"]},
                ],
            }
        ),
        name="seq.json",
    )
    assert main(["transform", "--config", cfg, "--out", str(tmp_path / "s")]) == 0
    cfg2 = write_config(
        tmp_path,
        srw_config(
            rule={
                "type": "aux-convex",
                "points": [1, 2, 3],
                "weights": ["1/2", "1/4", "1/4"],
            }
        ),
        name="aux.json",
    )
    assert main(["transform", "--config", cfg2, "--out", str(tmp_path / "x")]) == 0
    rows = (tmp_path / "x" / "transform.csv").read_text().splitlines()
    table = dict(r.rsplit(",", 3)[0:2] for r in rows[1:])
    assert table["1"] == "11/32"  # 1/2 * 1/2 + 1/4 * 0 + 1/4 * 3/8


def test_config_errors_exit_2(tmp_path):
    bad_json = tmp_path / "bad.json"
    bad_json.write_text('{"group": }', encoding="utf-8")
    assert main(["transform", "--config", str(bad_json)]) == 2
    assert main(["transform", "--config", str(tmp_path / "missing.json")]) == 2
    for broken in (
        srw_config(rule={"type": "wat"}),
        srw_config(measure={"1": "2/2", "-1": "-1/2"}),
        srw_config(group={"kind": "free", "rank": "x"}),
        srw_config(rule={"type": "beta-flag", "fraction": {"1": 1, "-1": 1}}),
    ):
        cfg = write_config(tmp_path, broken, name="broken.json")
        assert main(["transform", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_config_error_reports_location(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n "group": oops\n}', encoding="utf-8")
    assert main(["transform", "--config", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "line 2" in err and "column" in err


# -- compare / entropy / verify ---------------------------------------------------


def test_compare_roundtrip(tmp_path, capsys):
    cfg = write_config(tmp_path, srw_config())
    main(["transform", "--config", cfg, "--out", str(tmp_path / "a")])
    main(["transform", "--config", cfg, "--out", str(tmp_path / "b")])
    code = main(
        [
            "compare",
            str(tmp_path / "a" / "transform.json"),
            str(tmp_path / "b" / "transform.csv"),  # CSV path resolves to its twin
        ]
    )
    assert code == 0
    assert "TV = 0.0" in capsys.readouterr().out


def test_compare_mismatch(tmp_path):
    cfg = write_config(tmp_path, srw_config(), name="a.json")
    main(["transform", "--config", cfg, "--out", str(tmp_path / "a")])
    cfg2 = write_config(
        tmp_path, srw_config(rule={"type": "constant", "n": 2}), name="b.json"
    )
    main(["transform", "--config", cfg2, "--out", str(tmp_path / "b")])
    args = [
        "compare",
        str(tmp_path / "a" / "transform.json"),
        str(tmp_path / "b" / "transform.json"),
    ]
    assert main(args) == 1
    assert main(args + ["--tolerance", "1.0"]) == 0
    cfg3 = write_config(
        tmp_path,
        {
            "group": {"kind": "cyclic", "modulus": 2},
            "measure": {"1": 1},
            "rule": {"type": "constant", "n": 1},
        },
        name="c.json",
    )
    main(["transform", "--config", cfg3, "--out", str(tmp_path / "c")])
    assert (
        main(
            [
                "compare",
                str(tmp_path / "a" / "transform.json"),
                str(tmp_path / "c" / "transform.json"),
            ]
        )
        == 2
    )


def test_read_result_roundtrip(tmp_path):
    cfg = write_config(tmp_path, srw_config())
    main(["transform", "--config", cfg, "--out", str(tmp_path / "out")])
    group, mu = read_result(str(tmp_path / "out" / "transform.json"))
    assert group == IntLattice(1)
    assert mu((-1,)) * 2 == 1  # exact fractions survive the round trip


def test_entropy_command(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {
            "group": {"kind": "lattice", "rank": 1},
            "measure": {"1": "1/2", "-1": "1/2"},
            "maxN": 3,
        },
    )
    assert main(["entropy", "--config", cfg, "--out", str(tmp_path / "out")]) == 0
    rows = (tmp_path / "out" / "entropy.csv").read_text().splitlines()
    assert rows[0] == "n,entropy"
    assert len(rows) == 4


def test_verify_identities_bundle(tmp_path, capsys):
    code = main(
        ["verify", "--bundle", "identities", "--out", str(tmp_path), "--seed", "0"]
    )
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert all(r["pass"] for r in report)
    out = capsys.readouterr().out
    assert "checks passed" in out


def test_verify_unknown_bundle(tmp_path):
    assert main(["verify", "--bundle", "nope", "--out", str(tmp_path)]) == 2
