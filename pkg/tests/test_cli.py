import json
import logging
from pathlib import Path

import pytest

from hybridreach.cli import main
from hybridreach.config import RunConfig, parse_config, parse_text, to_text
from hybridreach.errors import ConfigSchemaError, ConfigValueError

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "vehicle.cfg"

MINIMAL = """
[model]
a_x = 0.1
a_y = 0.15
u_max = 0.07
delta = 2
x0 = 0.3
y0 = 0.8
"""

FAST = MINIMAL + """
[scheme]
dx = 0.1
horizon = 1.0
snapshot_times = 0.5
"""


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_minimal_defaults():
    cfg = parse_text(MINIMAL)
    assert cfg.scheme.dx == 0.025 and cfg.scheme.dp == 0.05 and cfg.scheme.tol == 0
    assert cfg.initial_radius() == pytest.approx(0.05)
    assert cfg.model.switch_policy == "toggle"


def test_shipped_config_parses():
    cfg = parse_config(CONFIG)
    assert cfg.scheme.snapshot_times == (2.65, 3.0, 3.75)
    assert cfg.table.instances == ((0.5, 0.5), (0.3, 0.8))


def test_text_round_trip():
    cfg = parse_config(CONFIG)
    again = parse_text(to_text(cfg))
    assert again == cfg and again.sha256() == cfg.sha256()
    assert RunConfig.from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize("bad", ["delta = 0", "delta = -1", "a_x = -0.1", "u_max = -1"])
def test_invalid_values(bad):
    key = bad.split()[0]
    text = "\n".join(line for line in MINIMAL.splitlines() if not line.startswith(key + " "))
    with pytest.raises(ConfigValueError):
        parse_text(text.replace("[model]", "[model]\n" + bad))


@pytest.mark.parametrize("extra", ["bogus = 1", "[other]\nx = 1"])
def test_schema_errors(extra):
    with pytest.raises(ConfigSchemaError):
        parse_text(MINIMAL + extra + "\n")


def test_missing_key():
    with pytest.raises(ConfigSchemaError):
        parse_text(MINIMAL.replace("y0 = 0.8", ""))


def test_dp_above_lag_warns(caplog):
    with caplog.at_level(logging.WARNING):
        parse_text(MINIMAL + "[scheme]\ndp = 3\n")
    assert "exceeds" in caplog.text


def test_exit_codes(tmp_path, capsys):
    assert main(["solve", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path)]) == 3
    assert main(["solve", "--config", str(write(tmp_path, MINIMAL + "junk = 1\n")), "--out", str(tmp_path)]) == 4
    bad = MINIMAL.replace("delta = 2", "delta = -2")
    assert main(["solve", "--config", str(write(tmp_path, bad)), "--out", str(tmp_path)]) == 5
    with pytest.raises(SystemExit) as exc:
        main(["solve"])
    assert exc.value.code == 2


def test_solve_bundle(tmp_path, capsys):
    cfg_path = write(tmp_path, FAST)
    out = tmp_path / "out"
    assert main(["solve", "--config", str(cfg_path), "--out", str(out), "--workers", "1"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    cfg = parse_config(cfg_path)
    assert summary["config_sha256"] == cfg.sha256()
    assert RunConfig.from_dict(summary["config"]) == cfg
    manifest = (out / "MANIFEST").read_text().splitlines()
    assert manifest[0] == f"config_sha256 {cfg.sha256()}" and manifest[1] == "complete true"
    files = [line.split(" ", 1)[1] for line in manifest if line.startswith("file ")]
    assert all((out / f).is_file() for f in files)
    assert any(f.startswith("masks/") for f in files) and any(f.startswith("minmaps/") for f in files)
    first = (out / files[0]).read_text().splitlines()
    assert first[0].startswith(f"# config_sha256={cfg.sha256()}")
    assert "autonomy" in capsys.readouterr().out


def test_solve_outputs_byte_identical(tmp_path):
    cfg_path = write(tmp_path, FAST)
    dirs = []
    for w in ("1", "3"):
        d = tmp_path / f"w{w}"
        main(["solve", "--config", str(cfg_path), "--out", str(d), "--workers", w])
        dirs.append(d)
    names = sorted(p.relative_to(dirs[0]) for p in dirs[0].rglob("*.csv"))
    assert names
    for name in names:
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()


def test_overrides_recorded(tmp_path):
    out = tmp_path / "o"
    main(["solve", "--config", str(write(tmp_path, FAST)), "--out", str(out), "--dx", "0.08", "--tol", "0.01"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["config"]["scheme"]["dx"] == 0.08 and summary["config"]["scheme"]["tol"] == 0.01


def test_table_command(tmp_path, capsys):
    text = MINIMAL + "[scheme]\nhorizon = 8\n[table]\ninstances = 0.3 0.8\ndx_list = 0.1\n"
    cfg_path = write(tmp_path, text)
    assert main(["table", "--config", str(cfg_path), "--out", str(tmp_path / "t"), "--dx", "0.1,0.08"]) == 0
    lines = (tmp_path / "t" / "table.csv").read_text().splitlines()
    assert lines[1].startswith("x0,y0,dx,eps")
    assert len(lines) == 4
    assert "5.5455" in capsys.readouterr().out


@pytest.mark.slow
def test_verify_quick(capsys):
    code = main(["verify", "--quick"])
    out = capsys.readouterr().out
    assert out.count("[PASS]") + out.count("[FAIL]") == 6
    assert code == (0 if "[FAIL]" not in out else 7)


def test_failed_solve_leaves_incomplete_manifest(tmp_path, capsys):
    out = tmp_path / "bad"
    code = main(["solve", "--config", str(write(tmp_path, FAST)), "--out", str(out), "--dx", "0.125"])
    assert code != 0
    manifest = (out / "MANIFEST").read_text()
    assert "complete false" in manifest and "note " in manifest
