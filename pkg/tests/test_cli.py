import csv
import json

import pytest

from arraygain.cli import main


def test_link_budget_table(capsys, tmp_path):
    out = tmp_path / "b.csv"
    rc = main(["link-budget", "--tx-dbm", "20", "--tx-gain-dbi", "8.8", "--rx-gain-dbi", "6",
               "--distance-m", "7", "--freq-hz", "2.6e9", "--extra", "Cable loss=-23.4",
               "--extra", "RX gain=33.5", "--csv", str(out)])
    assert rc == 0
    text = capsys.readouterr().out
    assert "Free space path loss" in text and "-57.65" in text and "-12.75" in text
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["item", "db", "running_total_dbm"] and len(rows) == 7


def test_link_budget_rejects_bad_distance(capsys):
    rc = main(["link-budget", "--tx-dbm", "20", "--tx-gain-dbi", "0", "--rx-gain-dbi", "0",
               "--distance-m", "0", "--freq-hz", "2.6e9"])
    assert rc == 1


def test_steering_dump(capsys):
    rc = main(["steering", "--geometry", "2x2", "--spacing-m", "0.05", "--freq-hz", "2.99792458e9",
               "--theta-deg", "0", "--phi-deg", "0"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("element") and len(lines) == 5
    assert all(line.split(",")[3] == "1" for line in lines[1:])


def test_steering_invalid_zenith():
    assert main(["steering", "--geometry", "2x2", "--spacing-m", "0.05", "--freq-hz", "3e9",
                 "--theta-deg", "90", "--phi-deg", "0"]) == 1


def test_gain_stats_builtin(tmp_path, capsys):
    rc = main(["gain-stats", "--pattern", "builtin:dipole", "--geometry", "4x8", "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "dynamic_range.csv").exists()
    assert (tmp_path / "panel_map_theta-40.csv").exists()


def test_gain_stats_missing_file(tmp_path):
    assert main(["gain-stats", "--pattern", str(tmp_path / "none.csv"), "--out", str(tmp_path)]) == 3


def test_simulate_and_exit_codes(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"trials": 50, "snr_sweep_db": [10]}))
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "results.csv").exists()
    assert (tmp_path / "o" / "manifest.json").exists()

    cfg.write_text(json.dumps({"trails": 50}))
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1

    cfg.write_text("{not json")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1

    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert main(["simulate", "--trials", "20", "--out", str(blocker / "x")]) == 3


def test_simulate_overrides(tmp_path):
    assert main(["simulate", "--trials", "30", "--seed", "4", "--out", str(tmp_path)]) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"]["trials"] == 30 and manifest["seed"] == 4


def test_bad_geometry_argument():
    with pytest.raises(SystemExit):
        main(["steering", "--geometry", "4by8", "--spacing-m", "1", "--freq-hz", "1e9",
              "--theta-deg", "0", "--phi-deg", "0"])
