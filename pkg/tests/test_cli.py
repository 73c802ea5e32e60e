"""End-to-end tests of the command line on a tiny synthetic IDX dataset."""

import csv
import json

import pytest

from gradlab.__main__ import main
from gradlab.core.checkpoint import load_checkpoint, load_sidecar, save_checkpoint
from gradlab.core.model import Sinusoid1D
from gradlab.output.render import read_pgm


def _data_args(idx):
    return ["--data-images", str(idx[0]), "--data-labels", str(idx[1])]


def _csv_rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _config_line(path):
    first = path.read_text().splitlines()[0]
    assert first.startswith("# ")
    return json.loads(first[2:])


@pytest.fixture
def trained(tmp_path, blob_idx):
    out = tmp_path / "model.agck"
    code = main(["train", *_data_args(blob_idx), "--epochs", "3", "--hidden-units", "8",
                 "--learning-rate", "0.2", "--batch-size", "8", "--out", str(out)])
    assert code == 0
    return out


class TestTrain:
    def test_writes_checkpoint_loss_and_sidecar(self, trained):
        assert load_checkpoint(trained).input_dim == 16
        loss = _csv_rows(trained.with_name("model.agck.loss.csv"))
        assert [int(r["epoch"]) for r in loss] == [1, 2, 3]
        meta = load_sidecar(trained)
        assert meta["model_id"] == load_checkpoint(trained).model_id
        assert "out" not in meta["config"]

    def test_test_accuracy_recorded(self, tmp_path, blob_idx):
        out = tmp_path / "m.agck"
        assert main(["train", *_data_args(blob_idx), "--test-images", str(blob_idx[0]),
                     "--test-labels", str(blob_idx[1]), "--epochs", "1",
                     "--hidden-units", "4", "--out", str(out)]) == 0
        assert 0.0 <= load_sidecar(out)["test_accuracy"] <= 1.0

    def test_prints_written_paths(self, tmp_path, blob_idx, capsys):
        out = tmp_path / "m.agck"
        main(["train", *_data_args(blob_idx), "--epochs", "1", "--hidden-units", "4",
              "--out", str(out)])
        assert f"Wrote {out}" in capsys.readouterr().out


class TestSaliency:
    @pytest.mark.parametrize("extra, chain", [
        (["--method", "grad"], "Grad"),
        (["--method", "sg", "--n", "5"], "SG"),
        (["--method", "ag", "--confidence", "0.99", "--n", "5"], "AG"),
        (["--method", "ig", "--smoother", "ag", "--ig-steps", "4", "--n", "3"], "A-IG(B)"),
        (["--method", "ig", "--ig-baseline", "white", "--ig-steps", "4"], "IG(W)"),
        (["--method", "ng", "--smoother", "sg", "--ng-models", "3", "--n", "3"], "S-NG"),
        (["--method", "gi"], "GI"),
    ])
    def test_methods(self, trained, blob_idx, tmp_path, extra, chain):
        out = tmp_path / "s.csv"
        assert main(["saliency", "--model", str(trained), *_data_args(blob_idx),
                     "--index", "3", *extra, "--out", str(out)]) == 0
        rows = _csv_rows(out)
        assert len(rows) == 16
        config = _config_line(out)
        assert config["method_chain"] == chain
        assert config["image_shape"] == [4, 4]
        image, _ = read_pgm(out.with_suffix(".pgm"))
        assert image.shape == (4, 4)

    def test_artifacts_independent_of_output_path(self, trained, blob_idx, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b" / "b.csv"
        for out in (a, b):
            main(["saliency", "--model", str(trained), *_data_args(blob_idx),
                  "--method", "sg", "--n", "7", "--seed", "3", "--out", str(out)])
        assert a.read_bytes() == b.read_bytes()

    def test_thread_count_invisible(self, trained, blob_idx, tmp_path, monkeypatch):
        outs = []
        for threads in ("1", "3"):
            monkeypatch.setenv("GRADLAB_THREADS", threads)
            out = tmp_path / f"t{threads}.csv"
            main(["saliency", "--model", str(trained), *_data_args(blob_idx),
                  "--method", "ag", "--n", "150", "--out", str(out)])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_alpha_and_confidence_rejected(self, trained, blob_idx, tmp_path, capsys):
        code = main(["saliency", "--model", str(trained), *_data_args(blob_idx),
                     "--method", "sg", "--alpha", "0.1", "--confidence", "0.9",
                     "--out", str(tmp_path / "s.csv")])
        assert code == 2
        assert "mutually exclusive" in capsys.readouterr().err

    def test_index_out_of_range(self, trained, blob_idx, tmp_path):
        assert main(["saliency", "--model", str(trained), *_data_args(blob_idx),
                     "--index", "999", "--out", str(tmp_path / "s.csv")]) == 2

    def test_missing_checkpoint(self, blob_idx, tmp_path):
        assert main(["saliency", "--model", str(tmp_path / "none.agck"), *_data_args(blob_idx),
                     "--out", str(tmp_path / "s.csv")]) == 3


class TestRender:
    def test_render_saved_map(self, trained, blob_idx, tmp_path):
        sal = tmp_path / "s.csv"
        main(["saliency", "--model", str(trained), *_data_args(blob_idx), "--out", str(sal)])
        out = tmp_path / "r.pgm"
        assert main(["render", "--saliency", str(sal), "--clip-percentile", "90",
                     "--out", str(out)]) == 0
        image, config = read_pgm(out)
        assert image.shape == (4, 4)
        assert config["source"]["method_chain"] == "Grad"

    def test_bad_geometry(self, trained, blob_idx, tmp_path):
        sal = tmp_path / "s.csv"
        main(["saliency", "--model", str(trained), *_data_args(blob_idx), "--out", str(sal)])
        assert main(["render", "--saliency", str(sal), "--width", "5", "--height", "5",
                     "--out", str(tmp_path / "r.pgm")]) == 2


class TestNoiseReport:
    def test_adaptgrad_imagenet(self, tmp_path):
        out = tmp_path / "n.json"
        assert main(["noise-report", "--method", "ag", "--c", "0.95",
                     "--xmin", "-2.12", "--xmax", "2.64", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["method"] == "ag"
        assert doc["aggregate_mean"] <= 0.025 + 1e-12
        assert doc["expected_area"] == pytest.approx(0.0133526, abs=5e-6)
        assert doc["config"]["confidence"] == 0.95

    def test_sweep(self, tmp_path):
        out = tmp_path / "sweep.json"
        assert main(["noise-report", "--sweep", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert [r["method"] for r in doc["reports"]] == ["sg", "ag", "ag", "ag", "ag"]
        assert doc["reports"][0]["expected_area"] == pytest.approx(0.1595769, abs=2e-6)

    def test_with_dataset(self, blob_idx, tmp_path):
        out = tmp_path / "n.json"
        assert main(["noise-report", "--method", "sg", *_data_args(blob_idx), "--n", "5",
                     "--out", str(out)]) == 0
        assert json.loads(out.read_text())["empirical"]["n"] == 5


class TestConvergence:
    def test_sinusoid(self, tmp_path):
        out = tmp_path / "c.csv"
        assert main(["convergence", "--model", "sinusoid", "--method", "sg", "--alpha", "0.1",
                     "--n", "10,40,160", "--seeds", "8", "--out", str(out)]) == 0
        rows = _csv_rows(out)
        assert [int(r["n"]) for r in rows] == [10, 40, 160]
        config = _config_line(out)
        assert config["sigma"] == pytest.approx(0.2)

    def test_checkpointed_sinusoid(self, tmp_path):
        model = save_checkpoint(Sinusoid1D.from_frequency(2.0), tmp_path / "sin.agck")
        out = tmp_path / "c.csv"
        assert main(["convergence", "--model", str(model), "--method", "ag",
                     "--n", "10,40", "--seeds", "4", "--out", str(out)]) == 0

    def test_rejects_other_models(self, trained, tmp_path):
        assert main(["convergence", "--model", str(trained), "--method", "sg",
                     "--out", str(tmp_path / "c.csv")]) == 2


class TestMetrics:
    def test_rows(self, trained, blob_idx, tmp_path):
        out = tmp_path / "m.csv"
        assert main(["metrics", "--model", str(trained), *_data_args(blob_idx),
                     "--methods", "grad,sg,ag", "--n", "4", "--n-inputs", "3",
                     "--out", str(out)]) == 0
        rows = _csv_rows(out)
        assert {(r["metric"], r["method_chain"]) for r in rows} == {
            (m, c)
            for m in ("sparseness", "information_level", "consistency")
            for c in ("Grad", "SG", "AG")
        }
        assert all(int(r["n_inputs"]) == 3 for r in rows)
        assert "consistency_formula" in _config_line(out)

    def test_global_smoother_leaves_shorthands_alone(self, trained, blob_idx, tmp_path):
        out = tmp_path / "m.csv"
        assert main(["metrics", "--model", str(trained), *_data_args(blob_idx),
                     "--methods", "grad,sg,ag", "--smoother", "ag", "--n", "3",
                     "--n-inputs", "2", "--out", str(out)]) == 0
        rows = _csv_rows(out)
        assert len(rows) == 9
        assert [r["method_chain"] for r in rows if r["metric"] == "sparseness"] == ["AG", "SG", "AG"]


class TestInvariance:
    def test_bias_compensated(self, trained, blob_idx, tmp_path):
        out = tmp_path / "inv.csv"
        assert main(["invariance", "--model", str(trained), *_data_args(blob_idx),
                     "--method", "ag", "--n", "4", "--n-inputs", "2", "--out", str(out)]) == 0
        rows = _csv_rows(out)
        assert rows[0]["metric"] == "invariance"
        assert float(rows[0]["value"]) == pytest.approx(0.0, abs=1e-9)

    def test_retrain(self, blob_idx, tmp_path):
        out = tmp_path / "inv.csv"
        assert main(["invariance", "--retrain", *_data_args(blob_idx), "--epochs", "1",
                     "--hidden-units", "4", "--n-inputs", "2", "--out", str(out)]) == 0
        assert _config_line(out)["construction"] == "retrained"

    def test_needs_model_or_retrain(self, blob_idx, tmp_path):
        assert main(["invariance", *_data_args(blob_idx), "--out", str(tmp_path / "i.csv")]) == 2


class TestOOBRate:
    def test_json(self, blob_idx, tmp_path):
        out = tmp_path / "o.json"
        assert main(["oob-rate", *_data_args(blob_idx), "--method", "ag", "--n", "4",
                     "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["method"] == "ag"
        assert doc["n_images"] == 40
        assert 0.0 <= doc["pixel_rate"] <= 1.0

    def test_bad_idx_exit_code(self, tmp_path):
        bad = tmp_path / "bad.idx"
        bad.write_bytes(b"\x00" * 16)
        assert main(["oob-rate", "--data-images", str(bad), "--data-labels", str(bad),
                     "--method", "sg", "--out", str(tmp_path / "o.json")]) == 3


class TestLogging:
    def test_log_file(self, blob_idx, tmp_path):
        log = tmp_path / "run.log"
        main(["oob-rate", *_data_args(blob_idx), "--method", "sg", "--n", "2",
              "--log-file", str(log), "--out", str(tmp_path / "o.json")])
        assert "OOB sg" in log.read_text()
