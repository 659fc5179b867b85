from __future__ import annotations

import io
import json
import sys
from types import SimpleNamespace

import pytest

from salid.cli import MODEL_DIR_ENV, main
from salid.naive_bayes import load_model

from conftest import make_corpus


def _write_tsv(path, pairs):
    path.write_text("".join(f"{t}\t{c}\n" for t, c in pairs), encoding="utf-8")


@pytest.fixture(scope="module")
def cli_env(tmp_path_factory):
    """Corpus + trained artifacts shared by the CLI tests (one training run)."""
    root = tmp_path_factory.mktemp("cli")
    corpus = root / "corpus.tsv"
    _write_tsv(corpus, make_corpus(n_per_language=30, seed=3))
    test_tsv = root / "test.tsv"
    _write_tsv(test_tsv, make_corpus(n_per_language=6, seed=9))

    model_dir = root / "model"
    assert main(["train", "--train", str(corpus), "--n", "3",
                 "--output", str(model_dir / "nb.model")]) == 0
    assert main(["build-lexicon", "--input", str(corpus),
                 "--output-dir", str(model_dir / "lexicon")]) == 0
    return SimpleNamespace(root=root, corpus=corpus, test_tsv=test_tsv, model_dir=model_dir)


def _model_args(env):
    return ["--model-dir", str(env.model_dir)]


class TestEntryPoint:
    def test_no_command_prints_help_and_fails(self, capsys):
        assert main([]) == 1
        assert "usage: salid" in capsys.readouterr().out

    def test_unknown_command_is_a_usage_error(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["frobnicate"])
        assert excinfo.value.code == 2

    def test_errors_exit_one_with_message(self, tmp_path, capsys):
        assert main(["train", "--train", str(tmp_path / "missing.tsv")]) == 1
        assert capsys.readouterr().err.startswith("error: ")


class TestClean:
    def test_stdin_to_stdout(self, monkeypatch, capsys):
        monkeypatch.setattr(sys, "stdin", io.StringIO("Hallo, Wêreld! 123\n"))
        assert main(["clean"]) == 0
        assert capsys.readouterr().out == "hallo wêreld\n"

    def test_no_lowercase(self, monkeypatch, capsys):
        monkeypatch.setattr(sys, "stdin", io.StringIO("Hy het 123 Appels!"))
        assert main(["clean", "--no-lowercase"]) == 0
        assert capsys.readouterr().out == "Hy het Appels\n"

    def test_file_to_file(self, tmp_path, capsys):
        src = tmp_path / "raw.txt"
        out = tmp_path / "clean.txt"
        src.write_text("EERSTE reël?\nTweede; reël.\n", encoding="utf-8")
        assert main(["clean", "--input", str(src), "--output", str(out)]) == 0
        assert out.read_text(encoding="utf-8") == "eerste reël\ntweede reël\n"

    def test_tsv_corpus_cleaning(self, tmp_path, capsys):
        src = tmp_path / "raw.tsv"
        out = tmp_path / "clean.tsv"
        src.write_text("Goeie MÔRE, almal! 42\tafr\n", encoding="utf-8")
        assert main(["clean", "--format", "tsv", "--input", str(src),
                     "--output", str(out)]) == 0
        assert out.read_text(encoding="utf-8") == "goeie môre almal\tafr\n"
        assert "cleaned 1 records" in capsys.readouterr().err

    def test_tsv_from_stdin(self, monkeypatch, capsys):
        monkeypatch.setattr(sys, "stdin", io.StringIO("Molo, Mhlobo!\txho\n"))
        assert main(["clean", "--format", "tsv"]) == 0
        assert capsys.readouterr().out == "molo mhlobo\txho\n"

    def test_lines_format_needs_a_path(self, monkeypatch, capsys):
        monkeypatch.setattr(sys, "stdin", io.StringIO("whatever"))
        assert main(["clean", "--format", "lines"]) == 1
        assert "error:" in capsys.readouterr().err


class TestSplit:
    def test_writes_samples_and_manifest(self, cli_env, tmp_path, capsys):
        out = tmp_path / "splits"
        assert main(["split", "--input", str(cli_env.corpus), "--output-dir", str(out),
                     "--n-train", "20", "--n-test", "5",
                     "--min-len", "10", "--max-len", "500", "--seed", "7"]) == 0
        train_lines = (out / "train.tsv").read_text(encoding="utf-8").splitlines()
        test_lines = (out / "test.tsv").read_text(encoding="utf-8").splitlines()
        assert len(train_lines) == 11 * 20
        assert len(test_lines) == 11 * 5
        manifest = json.loads((out / "split.json").read_text(encoding="utf-8"))
        assert manifest["config"]["command"] == "split"
        assert manifest["config"]["seed"] == 7
        assert manifest["rng"]
        assert manifest["n_train"] == 220 and manifest["n_test"] == 55
        assert set(manifest["languages"]) == {
            "afr", "eng", "nbl", "nso", "sot", "ssw", "tsn", "tso", "ven", "xho", "zul"
        }
        assert all(v == {"train": 20, "test": 5} for v in manifest["languages"].values())

    def test_split_is_deterministic(self, cli_env, tmp_path):
        args = ["split", "--input", str(cli_env.corpus), "--n-train", "10", "--n-test", "5",
                "--min-len", "10", "--max-len", "500", "--seed", "3"]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--output-dir", str(out1)]) == 0
        assert main(args + ["--output-dir", str(out2)]) == 0
        assert (out1 / "train.tsv").read_bytes() == (out2 / "train.tsv").read_bytes()
        assert (out1 / "test.tsv").read_bytes() == (out2 / "test.tsv").read_bytes()

    def test_insufficient_data_fails_cleanly(self, cli_env, tmp_path, capsys):
        assert main(["split", "--input", str(cli_env.corpus),
                     "--output-dir", str(tmp_path / "x"),
                     "--n-train", "5000", "--n-test", "1000",
                     "--min-len", "10", "--max-len", "500"]) == 1
        assert "error:" in capsys.readouterr().err


class TestTrain:
    def test_reports_and_writes_model(self, cli_env, tmp_path, capsys):
        out = tmp_path / "deep" / "dir" / "nb.model"
        assert main(["train", "--train", str(cli_env.corpus), "--n", "2",
                     "--output", str(out)]) == 0
        assert out.is_file()
        stdout = capsys.readouterr().out
        assert "vocabulary:" in stdout and "model file:" in stdout
        assert load_model(out).n == 2

    def test_class_subset(self, cli_env, tmp_path):
        out = tmp_path / "nb.model"
        assert main(["train", "--train", str(cli_env.corpus), "--n", "3",
                     "--output", str(out), "--classes", "afr", "eng", "nbl", "nso",
                     "sot", "ssw", "tsn", "tso", "ven", "xho", "zul"]) == 0
        assert list(load_model(out).classes_) == [
            "afr", "eng", "nbl", "nso", "sot", "ssw", "tsn", "tso", "ven", "xho", "zul"
        ]

    def test_no_leftover_temp_files(self, cli_env):
        assert not list(cli_env.model_dir.glob("**/*.tmp"))


class TestBuildLexicon:
    def test_writes_lexicon_directory(self, cli_env, capsys):
        lex_dir = cli_env.model_dir / "lexicon"
        assert (lex_dir / "manifest.json").is_file()
        assert len(list(lex_dir.glob("*.lex"))) == 11

    def test_prints_per_language_summary(self, cli_env, tmp_path, capsys):
        out = tmp_path / "lex"
        assert main(["build-lexicon", "--input", str(cli_env.corpus),
                     "--output-dir", str(out)]) == 0
        stdout = capsys.readouterr().out
        assert "built lexicon for 11 languages" in stdout
        assert "afr:" in stdout


class TestPredict:
    def test_positional_texts(self, cli_env, capsys):
        assert main(["predict", *_model_args(cli_env),
                     "ndiyathanda intsasa ukutya",
                     "ngiyathanda ekuseni ukudla"]) == 0
        captured = capsys.readouterr()
        assert captured.out.splitlines() == ["xho", "zul"]
        config = json.loads(captured.err.splitlines()[0])
        assert config["command"] == "predict"
        assert config["mode"] == "stacked"
        assert config["margin"] == 1

    def test_stdin_texts(self, cli_env, monkeypatch, capsys):
        monkeypatch.setattr(sys, "stdin", io.StringIO("ndiyathanda intsasa\n"))
        assert main(["predict", *_model_args(cli_env)]) == 0
        assert capsys.readouterr().out.splitlines() == ["xho"]

    def test_model_dir_from_environment(self, cli_env, monkeypatch, capsys):
        monkeypatch.setenv(MODEL_DIR_ENV, str(cli_env.model_dir))
        assert main(["predict", "ke rata dijo"]) == 0
        assert len(capsys.readouterr().out.splitlines()) == 1

    def test_no_model_configured(self, cli_env, monkeypatch, capsys):
        monkeypatch.delenv(MODEL_DIR_ENV, raising=False)
        assert main(["predict", "molo"]) == 1
        assert "no model given" in capsys.readouterr().err

    def test_stacked_json_records(self, cli_env, capsys):
        assert main(["predict", *_model_args(cli_env), "--json",
                     "ndiyathanda intsasa ukutya"]) == 0
        record = json.loads(capsys.readouterr().out.splitlines()[0])
        assert record["label"] == "xho"
        assert record["family"] == "Nguni"
        assert set(record) == {
            "text", "label", "nb_label", "family", "hit_counts", "lexicon_used"
        }
        assert set(record["hit_counts"]) == {"nbl", "ssw", "xho", "zul"}

    def test_nb_only_json_records(self, cli_env, capsys):
        assert main(["predict", *_model_args(cli_env), "--nb-only", "--json",
                     "ek hou baie van brood"]) == 0
        captured = capsys.readouterr()
        record = json.loads(captured.out.splitlines()[0])
        assert set(record) == {"text", "label", "log_scores"}
        assert len(record["log_scores"]) == 11
        config = json.loads(captured.err.splitlines()[0])
        assert config["mode"] == "nb" and config["margin"] is None

    def test_stacked_and_nb_only_conflict(self, cli_env):
        with pytest.raises(SystemExit) as excinfo:
            main(["predict", *_model_args(cli_env), "--stacked", "--nb-only", "x"])
        assert excinfo.value.code == 2


class TestEvaluate:
    def test_stdout_json_report(self, cli_env, capsys):
        assert main(["evaluate", "--test", str(cli_env.test_tsv), "--mode", "nb",
                     *_model_args(cli_env)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["schema_version"] == 1
        assert report["config"]["command"] == "evaluate"
        assert report["config"]["mode"] == "nb"
        assert report["config"]["margin"] is None
        assert 0.0 <= report["accuracy"] <= 1.0
        assert len(report["cm"]["labels"]) == 11

    def test_default_mode_is_stacked(self, cli_env, capsys):
        assert main(["evaluate", "--test", str(cli_env.test_tsv),
                     *_model_args(cli_env)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["config"]["mode"] == "stacked"
        assert report["config"]["margin"] == 1

    def test_lexicon_mode(self, cli_env, capsys):
        assert main(["evaluate", "--test", str(cli_env.test_tsv), "--mode", "lexicon",
                     *_model_args(cli_env)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["config"]["mode"] == "lexicon"

    def test_report_to_file_with_summary(self, cli_env, tmp_path, capsys):
        out = tmp_path / "report.json"
        assert main(["evaluate", "--test", str(cli_env.test_tsv),
                     *_model_args(cli_env), "--output", str(out)]) == 0
        assert json.loads(out.read_text(encoding="utf-8"))["schema_version"] == 1
        assert "accuracy" in capsys.readouterr().err

    def test_csv_and_family_matrix(self, cli_env, capsys):
        assert main(["evaluate", "--test", str(cli_env.test_tsv), "--mode", "nb",
                     *_model_args(cli_env), "--report-format", "csv",
                     "--matrix", "family"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("gold\\pred,Germanic,Nguni,Sotho-Tswana,Tswa-Ronga,Venda\n")

    def test_heatmap_format(self, cli_env, capsys):
        assert main(["evaluate", "--test", str(cli_env.test_tsv), "--mode", "nb",
                     *_model_args(cli_env), "--report-format", "heatmap"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 12  # header + 11 label rows

    def test_margin_from_bundle_manifest(self, cli_env, tmp_path, capsys):
        margin_dir = tmp_path / "bundle"
        margin_dir.mkdir()
        (margin_dir / "manifest.json").write_text(json.dumps({"margin": 3}), encoding="utf-8")
        base = ["evaluate", "--test", str(cli_env.test_tsv),
                "--model-dir", str(margin_dir),
                "--nb-model", str(cli_env.model_dir / "nb.model"),
                "--lexicon-dir", str(cli_env.model_dir / "lexicon")]
        assert main(base) == 0
        assert json.loads(capsys.readouterr().out)["config"]["margin"] == 3
        assert main(base + ["--margin", "2"]) == 0
        assert json.loads(capsys.readouterr().out)["config"]["margin"] == 2

    def test_external_predictions(self, cli_env, tmp_path, capsys):
        gold = [line.split("\t")[1] for line in
                cli_env.test_tsv.read_text(encoding="utf-8").splitlines()]
        pred_file = tmp_path / "preds.txt"
        pred_file.write_text("\n".join(gold) + "\n", encoding="utf-8")
        assert main(["evaluate", "--test", str(cli_env.test_tsv),
                     "--external-predictions", str(pred_file),
                     "--supported", "afr", "eng", "xho"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["accuracy"] == 1.0
        assert report["cm"]["labels"] == ["afr", "eng", "xho"]

    def test_external_requires_supported(self, cli_env, tmp_path, capsys):
        pred_file = tmp_path / "preds.txt"
        pred_file.write_text("afr\n", encoding="utf-8")
        assert main(["evaluate", "--test", str(cli_env.test_tsv),
                     "--external-predictions", str(pred_file)]) == 1
        assert "--supported" in capsys.readouterr().err

    def test_external_conflicts_with_mode(self, cli_env, tmp_path, capsys):
        pred_file = tmp_path / "preds.txt"
        pred_file.write_text("afr\n", encoding="utf-8")
        assert main(["evaluate", "--test", str(cli_env.test_tsv), "--mode", "nb",
                     "--external-predictions", str(pred_file),
                     "--supported", "afr"]) == 1
        assert "mutually exclusive" in capsys.readouterr().err


class TestSweep:
    def test_writes_per_length_reports(self, cli_env, tmp_path, capsys):
        out = tmp_path / "sweep"
        assert main(["sweep", "--test", str(cli_env.test_tsv), "--mode", "nb",
                     *_model_args(cli_env), "--lengths", "10", "30",
                     "--output-dir", str(out)]) == 0
        assert (out / "report-10.json").is_file()
        assert (out / "report-30.json").is_file()
        summary = json.loads((out / "sweep.json").read_text(encoding="utf-8"))
        assert list(summary["accuracy_by_length"]) == ["10", "30"]
        assert summary["reports"] == {"10": "report-10.json", "30": "report-30.json"}
        assert summary["config"]["command"] == "sweep"
        stdout = capsys.readouterr().out
        assert stdout.startswith("length  accuracy  macro_f1")
        report = json.loads((out / "report-10.json").read_text(encoding="utf-8"))
        assert report["config"]["length"] == 10


class TestConfigFile:
    def test_config_supplies_defaults(self, cli_env, tmp_path):
        cfg = tmp_path / "train.json"
        cfg.write_text(json.dumps({"n": 2}), encoding="utf-8")
        out = tmp_path / "nb.model"
        assert main(["train", "--config", str(cfg), "--train", str(cli_env.corpus),
                     "--output", str(out)]) == 0
        assert load_model(out).n == 2

    def test_explicit_flag_beats_config(self, cli_env, tmp_path):
        cfg = tmp_path / "train.json"
        cfg.write_text(json.dumps({"n": 2}), encoding="utf-8")
        out = tmp_path / "nb.model"
        assert main(["train", "--config", str(cfg), "--train", str(cli_env.corpus),
                     "--output", str(out), "--n", "4"]) == 0
        assert load_model(out).n == 4

    def test_unknown_config_key(self, cli_env, tmp_path, capsys):
        cfg = tmp_path / "train.json"
        cfg.write_text(json.dumps({"bogus": 1}), encoding="utf-8")
        assert main(["train", "--config", str(cfg), "--train", str(cli_env.corpus)]) == 1
        err = capsys.readouterr().err
        assert "unknown option 'bogus'" in err and "valid:" in err

    def test_config_must_be_an_object(self, cli_env, tmp_path, capsys):
        cfg = tmp_path / "train.json"
        cfg.write_text("[1, 2]", encoding="utf-8")
        assert main(["train", "--config", str(cfg), "--train", str(cli_env.corpus)]) == 1
        assert "JSON object" in capsys.readouterr().err
