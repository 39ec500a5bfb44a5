"""CLI behavior: exit codes, --json stability, subcommand round trips."""

import hashlib
import json

import pytest
from click.testing import CliRunner

from genjiko.cli import main


@pytest.fixture
def runner():
    return CliRunner()


class TestPatterns:
    def test_list_json_has_52(self, runner):
        result = runner.invoke(main, ["patterns", "list", "--json"])
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["count"] == 52
        assert len(payload["patterns"]) == 52
        # snapshot corners: lexicographic enumeration is part of the contract
        assert payload["patterns"][0] == {"rgs": "00000", "groups": [[1, 2, 3, 4, 5]]}
        assert payload["patterns"][-1]["rgs"] == "01234"

    def test_render_writes_svg(self, runner, tmp_path):
        out = tmp_path / "pattern.svg"
        result = runner.invoke(main, ["patterns", "render", "--rgs", "00101",
                                      "--out", str(out)])
        assert result.exit_code == 0
        assert "<svg" in out.read_text()

    def test_render_bad_rgs_exits_1(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["patterns", "render", "--rgs", "09", "--out", str(tmp_path / "x.svg"), "--json"],
        )
        assert result.exit_code == 1
        assert "error" in json.loads(result.output)

    def test_missing_option_exits_2(self, runner):
        result = runner.invoke(main, ["patterns", "render"])
        assert result.exit_code == 2


class TestSynth:
    def test_deterministic_sha256(self, runner, tmp_path):
        digests = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            result = runner.invoke(main, [
                "synth", "--class-label", "2", "--seed", "9",
                "--duration", "12", "--out", str(out), "--json",
            ])
            assert result.exit_code == 0
            digests.append(hashlib.sha256(out.read_bytes()).hexdigest())
        assert digests[0] == digests[1]

    def test_meta_sidecar_written(self, runner, tmp_path):
        out = tmp_path / "rec.csv"
        runner.invoke(main, ["synth", "--class-label", "0", "--duration", "10",
                             "--out", str(out)])
        meta = json.loads((tmp_path / "rec.meta.json").read_text())
        assert meta["class_label"] == 0

    def test_bad_duration_exits_1(self, runner, tmp_path):
        result = runner.invoke(main, [
            "synth", "--class-label", "0", "--duration", "3",
            "--out", str(tmp_path / "x.csv"), "--json",
        ])
        assert result.exit_code == 1


@pytest.fixture(scope="module")
def small_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli-data")
    runner = CliRunner()
    result = runner.invoke(main, [
        "dataset", "--out", str(root), "--train", "1", "--test", "1",
        "--duration", "30", "--seed", "5", "--json",
    ])
    assert result.exit_code == 0
    return root


@pytest.fixture(scope="module")
def trained_model(small_dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli-model") / "model.gnji"
    runner = CliRunner()
    result = runner.invoke(main, [
        "train", "--manifest", str(small_dataset / "manifest.json"),
        "--out", str(out), "--kind", "centroid", "--window", "50x25", "--json",
    ])
    assert result.exit_code == 0, result.output
    return out


class TestTrainEvalInfer:
    def test_eval_json(self, runner, small_dataset, trained_model):
        result = runner.invoke(main, [
            "eval", "--model", str(trained_model),
            "--manifest", str(small_dataset / "manifest.json"), "--json",
        ])
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert payload["voted_accuracy"] == 1.0
        assert len(payload["confusion"]) == 5

    def test_infer_batch(self, runner, small_dataset, trained_model):
        csv = next(small_dataset.glob("c2-test-*.csv"))
        result = runner.invoke(main, [
            "infer", "--model", str(trained_model), "--recording", str(csv), "--json",
        ])
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert payload["voted_class"] == 2
        assert len(payload["windows"]) == 11

    def test_infer_stream_matches_batch(self, runner, small_dataset, trained_model):
        csv = next(small_dataset.glob("c1-test-*.csv"))
        batch = runner.invoke(main, [
            "infer", "--model", str(trained_model), "--recording", str(csv), "--json",
        ])
        stream = runner.invoke(main, [
            "infer", "--model", str(trained_model), "--recording", str(csv),
            "--stream", "--speedup", "0", "--json",
        ])
        assert json.loads(batch.output)["voted_class"] == \
            json.loads(stream.output)["voted_class"]

    def test_train_transformer_smoke(self, runner, small_dataset, tmp_path):
        out = tmp_path / "t.gnji"
        result = runner.invoke(main, [
            "train", "--manifest", str(small_dataset / "manifest.json"),
            "--out", str(out), "--epochs", "1", "--window", "50x25", "--json",
        ])
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert payload["epochs"] == 1
        assert out.exists()


class TestSimulateAndReplay:
    def write_script(self, tmp_path, judgments, sequence=(0, 0, 1, 0, 1), revisions=None):
        script = {"sequence": list(sequence), "judgments": judgments}
        if revisions:
            script["revisions"] = revisions
        path = tmp_path / "game.json"
        path.write_text(json.dumps(script))
        return path

    def test_truth_matching_script_is_exact(self, runner, tmp_path, trained_model):
        script = self.write_script(tmp_path, [1, "new", 2, 3])
        result = runner.invoke(main, [
            "simulate", "--script", str(script), "--model", str(trained_model), "--json",
        ])
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert payload["score"]["exact"] is True
        assert payload["score"]["pair_matches"] == 10

    def test_wrong_script_scores_partially(self, runner, tmp_path):
        script = self.write_script(tmp_path, ["new", "new", "new", "new"])
        result = runner.invoke(main, ["simulate", "--script", str(script), "--json"])
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert payload["score"]["exact"] is False

    def test_revision_applies(self, runner, tmp_path):
        script = self.write_script(
            tmp_path, ["new", "new", 2, 3], revisions={"2": 1}
        )
        result = runner.invoke(main, ["simulate", "--script", str(script), "--json"])
        payload = json.loads(result.output)
        assert payload["player_rgs"] == "00101"

    def test_bad_script_exits_1(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"judgments": ["new"]}))
        result = runner.invoke(main, ["simulate", "--script", str(path), "--json"])
        assert result.exit_code == 1

    def test_replay_summarizes_log(self, runner, tmp_path, trained_model):
        import asyncio

        from test_service import GOLDEN_SCRIPT, make_service, play

        service = make_service(tmp_path)
        sid = asyncio.run(play(service, GOLDEN_SCRIPT))
        log_path = service.log_store.path_for(sid)
        result = runner.invoke(main, ["replay", "--events", str(log_path), "--json"])
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert payload["phase"] == {"kind": "debrief"}
        assert payload["player_rgs"] == "00101"
        assert len(payload["confirmed"]) == 4
