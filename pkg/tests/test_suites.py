import json
import os

import numpy as np
import pytest

from ruminheat.config import ConfigError, default_config, heat_config, int_list, load_config
from ruminheat.report import fmt_value, plot_error_curve, write_csv, write_json, write_manifest
from ruminheat.suites import _fit_order, _strictly_decreasing


def test_fit_order_recovers_slope():
    xs = [0.1, 0.05, 0.025]
    ys = [c**2 for c in xs]
    assert _fit_order(xs, ys) == pytest.approx(2.0, abs=1e-10)


def test_strictly_decreasing():
    assert _strictly_decreasing([3.0, 2.0, 1.0])
    assert not _strictly_decreasing([3.0, 3.0, 1.0])
    assert _strictly_decreasing([1.0])


def test_csv_deterministic_formatting(tmp_path):
    path = str(tmp_path / "t.csv")
    write_csv(path, ["a", "b"], [[1.0 / 3.0, 7], [2e-17, "x"]])
    text = open(path).read()
    assert text.splitlines()[1].startswith("0.33333333333333331,")
    assert fmt_value(0.1) == "0.10000000000000001"


def test_json_and_manifest(tmp_path):
    p1 = write_json(str(tmp_path / "r.json"), {"b": 1, "a": [1.5]})
    text = open(p1).read()
    assert text.index('"a"') < text.index('"b"')  # sorted keys
    man = write_manifest(str(tmp_path), "cmd", {"k": "v"}, [p1])
    payload = json.load(open(man))
    assert payload["outputs"][0]["path"] == "r.json"
    assert len(payload["outputs"][0]["sha256"]) == 64


def test_plot_writes_png(tmp_path):
    path = plot_error_curve(str(tmp_path / "e.png"), [1, 2, 4], [0.1, 0.05, 0.02],
                            "x", "err", "t")
    assert os.path.getsize(path) > 500


def test_config_defaults_and_errors(tmp_path):
    cp = default_config()
    cfg = heat_config(cp)
    assert cfg.points == 33 and cfg.t_half_width is None
    assert int_list("25, 33,49") == [25, 33, 49]
    bad = tmp_path / "bad.cfg"
    bad.write_text("[nosuch]\nx = 1\n")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    missing = tmp_path / "nothere.cfg"
    with pytest.raises(ConfigError):
        load_config(str(missing))
    # valid override round-trips
    good = tmp_path / "good.cfg"
    good.write_text("[grid]\npoints = 21\n")
    cp2 = load_config(str(good))
    assert heat_config(cp2).points == 21
