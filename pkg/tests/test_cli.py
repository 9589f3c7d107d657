import csv
import json

import pytest

from streetplan.cli import main
from streetplan.config import RunConfig


@pytest.fixture(scope="module")
def site(tmp_path_factory):
    """Synthetic 4x4 grid written to disk plus a config pointing at it."""
    root = tmp_path_factory.mktemp("site")
    assert main(["synth", "--n", "4", "--block-size", "100",
                 "--out", str(root)]) == 0
    config = {
        "network_path": str(root / "network.geojson"),
        "blocks_path": str(root / "blocks.geojson"),
        "radii": [400.0, 250.0, 150.0],
        "cluster_thresholds": [400.0, 250.0, 150.0],
        "min_parcels": {"district": 0.0, "community_cluster": 0.0,
                        "community": 0.0},
        "tau_int": 0.0,
        "sample_n": 12,
        "radius_grids": {"district": [350.0, 400.0],
                         "community_cluster": [200.0, 250.0],
                         "community": [100.0, 150.0]},
    }
    cfg_path = root / "config.json"
    cfg_path.write_text(json.dumps(config))
    return root, cfg_path


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestSynth:
    def test_writes_expected_feature_counts(self, tmp_path):
        out = tmp_path / "fx"
        assert main(["synth", "--n", "6", "--out", str(out)]) == 0
        net = json.loads((out / "network.geojson").read_text())
        blocks = json.loads((out / "blocks.geojson").read_text())
        assert len(net["features"]) == 60
        assert len(blocks["features"]) == 25


class TestStageCommands:
    def test_access_outputs(self, site, tmp_path):
        _, cfg = site
        out = tmp_path / "access"
        assert main(["access", "--config", str(cfg), "--out", str(out)]) == 0
        assert (out / "segment_scores.csv").exists()
        seg = json.loads((out / "segments.geojson").read_text())
        assert {"score_t0", "score_t1", "score_t2"} <= set(
            seg["features"][0]["properties"])
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config_hash"] == RunConfig.from_file(cfg).config_hash()
        assert manifest["input_hashes"]

    def test_cluster_membership_partitions(self, site, tmp_path):
        _, cfg = site
        out = tmp_path / "clusters"
        assert main(["cluster", "--config", str(cfg), "--out", str(out)]) == 0
        rows = read_rows(out / "clusters.csv")
        per_tier = {}
        for row in rows:
            per_tier.setdefault(row["tier"], []).append(int(row["block_id"]))
        for members in per_tier.values():
            assert sorted(members) == list(range(9))

    def test_allocate_outputs(self, site, tmp_path):
        _, cfg = site
        out = tmp_path / "alloc"
        assert main(["allocate", "--config", str(cfg), "--out", str(out)]) == 0
        doc = json.loads((out / "allocation.geojson").read_text())
        assert len(doc["features"]) == 9
        assert all("use" in f["properties"] for f in doc["features"])
        rows = read_rows(out / "shares.csv")
        achieved = sum(float(r["achieved_share"]) for r in rows)
        assert achieved == pytest.approx(1.0)

    def test_far_outputs(self, site, tmp_path):
        _, cfg = site
        out = tmp_path / "far"
        assert main(["far", "--config", str(cfg), "--out", str(out)]) == 0
        doc = json.loads((out / "far.geojson").read_text())
        assert all("far" in f["properties"] and "height_m" in f["properties"]
                   for f in doc["features"])
        rows = read_rows(out / "construction.csv")
        assert len(rows) == 8

    def test_evaluate_prints_record(self, site, tmp_path, capsys):
        _, cfg = site
        out = tmp_path / "record.json"
        assert main(["evaluate", "--config", str(cfg), "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["valid"]
        assert set(payload["raw"]) == {"au", "one_minus_au", "d_b", "d_lu",
                                       "d_cs", "jh_pen"}


class TestSampleParetoReport:
    def test_full_screening_flow(self, site, tmp_path):
        _, cfg = site
        run = tmp_path / "run"
        assert main(["sample", "--config", str(cfg), "--out", str(run)]) == 0
        rows = read_rows(run / "records.csv")
        assert len(rows) == 12

        assert main(["pareto", "--records", str(run / "records.csv"),
                     "--config", str(cfg)]) == 0
        knee = json.loads((run / "knee.json").read_text())
        assert knee["raw"] and knee["norm"]
        assert (run / "pareto.csv").exists()
        assert (run / "knee_allocation.geojson").exists()

        assert main(["report", "--run", str(run)]) == 0
        assert (run / "spearman_all.csv").exists()
        assert (run / "spearman_front.csv").exists()
        assert (run / "sensitivity_radius_district.csv").exists()

    def test_sample_seed_reproducible(self, site, tmp_path):
        _, cfg = site
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["sample", "--config", str(cfg), "--n", "5",
                         "--seed", "42", "--out", str(out)]) == 0
        assert (a / "records.csv").read_bytes() == (b / "records.csv").read_bytes()


class TestExitCodes:
    def test_usage_error_is_one(self, tmp_path):
        # access without a site configured
        assert main(["access", "--out", str(tmp_path / "x")]) == 1

    def test_bad_input_file_is_one(self, site, tmp_path):
        root, _ = site
        bad_cfg = tmp_path / "bad.json"
        bad_cfg.write_text(json.dumps({
            "network_path": str(tmp_path / "missing.geojson"),
            "blocks_path": str(root / "blocks.geojson")}))
        assert main(["access", "--config", str(bad_cfg),
                     "--out", str(tmp_path / "y")]) == 1

    def test_unknown_config_key_is_one(self, site, tmp_path):
        bad_cfg = tmp_path / "bad2.json"
        bad_cfg.write_text(json.dumps({"no_such_option": 1}))
        assert main(["access", "--config", str(bad_cfg),
                     "--out", str(tmp_path / "z")]) == 1

    def test_missing_records_is_one(self, tmp_path):
        assert main(["pareto", "--records", str(tmp_path / "none.csv")]) == 1

    def test_corrupt_records_is_two(self, tmp_path):
        path = tmp_path / "records.csv"
        path.write_text("id,valid\nnot-a-number,1\n")
        assert main(["pareto", "--records", str(path)]) == 2

    def test_help_is_zero(self):
        assert main(["--help"]) == 0
