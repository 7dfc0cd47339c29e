import json
import xml.etree.ElementTree as ET

import pytest

from ufsdetect import analytics
from ufsdetect.cli import CSV_COLUMNS, main, read_csv
from ufsdetect.config import BUNDLED, ConfigError, load, resolve

SMALL = {
    "M": 8, "N": 32, "K": 2, "phi_max": 0.2, "snr_db": 20,
    "scheme": "ufs", "sweep_axis": "power_ratio_db", "sweep_values": [0, 10, -5],
    "trials": 20, "master_seed": 7,
}


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.json"
    path.write_text(json.dumps(SMALL))
    return path


@pytest.fixture
def small_csv(tmp_path, small_config):
    out = tmp_path / "small.csv"
    assert main(["simulate", "--config", str(small_config), "--out", str(out)]) == 0
    return out


def _svg_polylines(path):
    root = ET.parse(path).getroot()
    return [el for el in root.iter("{http://www.w3.org/2000/svg}polyline") if el.get("class") == "series"]


class TestConfig:
    @pytest.mark.parametrize("name", BUNDLED)
    def test_bundled_configs_load(self, name):
        resolved, cfg = load(name)
        assert resolved["M"] == 16 and cfg.trials == resolved["trials"]

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as info:
            resolve({**SMALL, "phimax": 0.1})
        assert info.value.key == "phimax"

    @pytest.mark.parametrize(
        "key, value",
        [("M", 1.5), ("K", 3), ("phi_max", 0.5), ("scheme", 3), ("sweep_values", []), ("attack", "yes")],
    )
    def test_invalid_values(self, key, value):
        with pytest.raises(ConfigError) as info:
            resolve({**SMALL, key: value})
        assert info.value.key == key

    def test_missing_required(self):
        doc = dict(SMALL)
        del doc["sweep_axis"]
        with pytest.raises(ConfigError) as info:
            resolve(doc)
        assert info.value.key == "sweep_axis"

    def test_seed_override(self, small_config):
        resolved, cfg = load(small_config, seed=99)
        assert resolved["master_seed"] == 99 and cfg.master_seed == 99


class TestSimulate:
    def test_rows_in_sweep_order(self, small_csv):
        resolved, rows = read_csv(small_csv)
        assert [r["sweep_value"] for r in rows] == [0.0, 10.0, -5.0]
        assert resolved["master_seed"] == 7

    def test_file_layout(self, small_csv):
        raw = small_csv.read_bytes()
        assert raw.endswith(b"\n") and b"\r" not in raw
        lines = raw.decode("utf-8").splitlines()
        assert lines[0].startswith("# ")
        assert tuple(lines[1].split(",")) == CSV_COLUMNS

    def test_workers_byte_identical(self, tmp_path, small_config, small_csv):
        out = tmp_path / "w3.csv"
        assert main(["simulate", "--config", str(small_config), "--out", str(out), "--workers", "3"]) == 0
        assert out.read_bytes() == small_csv.read_bytes()

    def test_seed_flag_changes_output(self, tmp_path, small_config, small_csv):
        out = tmp_path / "s.csv"
        assert main(["simulate", "--config", str(small_config), "--out", str(out), "--seed", "8"]) == 0
        assert out.read_bytes() != small_csv.read_bytes()

    def test_bad_key_exit_2(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({**SMALL, "phimax": 0.1}))
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "x.csv")]) == 2
        assert "phimax" in capsys.readouterr().err

    def test_missing_file_exit_2(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path / "x.csv")]) == 2

    def test_bad_json_exit_2(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{")
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "x.csv")]) == 2


class TestAnalytic:
    def _run(self, capsys, *args):
        code = main(["analytic", *args])
        return code, capsys.readouterr().out.strip()

    def test_sync(self, capsys):
        assert self._run(capsys, "sync", "--M", "16", "--N", "64", "--noise-var", "0.01") == (0, "0.0025")

    def test_rho_zero(self, capsys):
        assert self._run(capsys, "rho", "--delta-phi", "0", "--Q", "16") == (0, "1 0")

    def test_miss_bound(self, capsys):
        pth = analytics.power_threshold(16, 16, 0.01)
        p = repr(2 * pth)
        code, out = self._run(
            capsys, "miss-bound", "--p-bob", p, "--p-eve", p, "--noise-var", "0.01",
            "--M", "16", "--Q", "16", "--K", "4", "--phi-max", "0.2",
        )
        value, flag = out.split()
        assert code == 0 and flag == "clamped=false"
        assert float(value) == pytest.approx((2 / (3 * 16 * 0.2)) ** 4, rel=1e-11)

    def test_miss_lb_from_threshold(self, capsys):
        code, out = self._run(capsys, "miss-lb", "--p-bob", "2", "--p-th", "1", "--Q", "16", "--phi-max", "0.2", "--K", "4")
        assert code == 0 and float(out.split()[0]) == pytest.approx((1 / (2 * 16 * 0.2)) ** 4, rel=1e-11)

    @pytest.mark.parametrize(
        "kind, flags, fn",
        [
            ("lemma1-cfo", ["--Q", "64", "--noise-var", "0.001"], lambda: analytics.lemma1_cfo_mse(64, 0.001)),
            ("lemma1-mse", ["--N", "64", "--Q", "16", "--M", "16", "--noise-var", "0.01"],
             lambda: analytics.lemma1_channel_mse(64, 16, 16, 0.01)),
            ("pth", ["--M", "16", "--Q", "16", "--noise-var", "0.01"], lambda: analytics.power_threshold(16, 16, 0.01)),
        ],
    )
    def test_scalar_kinds(self, capsys, kind, flags, fn):
        code, out = self._run(capsys, kind, *flags)
        assert code == 0 and float(out) == pytest.approx(fn(), rel=1e-11)

    def test_missing_parameter(self, capsys):
        assert main(["analytic", "sync", "--M", "16"]) == 2
        assert "--N" in capsys.readouterr().err

    def test_non_integer_dimension(self):
        assert main(["analytic", "sync", "--M", "16.5", "--N", "64", "--noise-var", "0.01"]) == 2


class TestPlot:
    def test_valid_svg(self, tmp_path, small_csv):
        out = tmp_path / "a.svg"
        assert main(["plot", str(small_csv), "--out", str(out)]) == 0
        assert len(_svg_polylines(out)) == 1

    def test_overlay_matches_analytics(self, tmp_path, small_csv):
        out = tmp_path / "b.svg"
        assert main(["plot", str(small_csv), "--out", str(out), "--overlay-bound", "--log-y"]) == 0
        lines = _svg_polylines(out)
        assert [el.get("data-name") for el in lines] == ["UFS sim", "miss bound", "large-P_E lower bound"]
        root = ET.parse(out).getroot()
        dashed = [el for el in lines if el.get("stroke-dasharray") == "8,5"]
        assert len(dashed) == 1
        assert len(root.findall(".//{http://www.w3.org/2000/svg}circle")) <= 3

    def test_overlay_values(self, small_csv):
        from ufsdetect.cli import _overlay

        resolved, rows = read_csv(small_csv)
        xs = [r["sweep_value"] for r in rows]
        upper, lower = _overlay("miss_rate", resolved, xs)
        nv = 0.01
        pth = analytics.power_threshold(8, 16, nv)
        for x, u in zip(xs, upper.y):
            pe = 1 / 10 ** (x / 10)
            assert u == analytics.miss_prob_bound(analytics.MissBoundInput(1.0, pe, nv, 8, 16, 2, 0.2)).value
        assert lower.y == [analytics.miss_prob_lower_bound(1.0, pth, 16, 0.2, 2).value] * 3

    def test_empty_body(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        assert main(["plot", str(path), "--out", str(tmp_path / "e.svg")]) == 2

    def test_header_only(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text(",".join(CSV_COLUMNS) + "\n")
        assert main(["plot", str(path), "--out", str(tmp_path / "e.svg")]) == 2

    def test_schema_mismatch(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        assert main(["plot", str(path), "--out", str(tmp_path / "e.svg")]) == 2
