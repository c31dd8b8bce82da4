import json
from importlib.resources import files

import pytest

from currikit.cli import main
from currikit.sampledata import generate_mixed_corpus, write_corpus_file


@pytest.fixture(scope="module")
def corpus_file(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli-corpus")
    docs = generate_mixed_corpus(3000, seed=21)
    path = tmp / "corpus.txt"
    write_corpus_file(docs, path)
    return str(path)


@pytest.fixture(scope="module")
def pipeline_files(tmp_path_factory, corpus_file):
    """Run the composable subcommands once: vocab -> encode -> chunk -> score."""
    tmp = tmp_path_factory.mktemp("cli-out")
    vocab = str(tmp / "vocab.tsv")
    encoded = str(tmp / "encoded.tsv")
    chunks = str(tmp / "chunks.tsv")
    scores = str(tmp / "scores.tsv")
    base = ["--corpus", corpus_file, "--format", "blank-line-documents"]
    assert main(["vocab-train", *base, "--target", "250", "--out", vocab]) == 0
    assert main(["encode", *base, "--vocab", vocab, "--out", encoded]) == 0
    assert main(["chunk", "--encoded", encoded, "--context-size", "32", "--out", chunks]) == 0
    assert main(["score", *base, "--chunks", chunks, "--vocab", vocab, "--out", scores]) == 0
    return {"vocab": vocab, "encoded": encoded, "chunks": chunks, "scores": scores, "tmp": tmp}


class TestBasics:
    def test_help_exits_zero(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["score", "--help"])
        assert exc.value.code == 0
        assert "--threads" in capsys.readouterr().out

    def test_unknown_subcommand_exits_two(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_unknown_flag_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["stats", "--bogus"])
        assert exc.value.code == 2

    def test_pipeline_error_is_single_line(self, capsys, tmp_path):
        code = main(["encode", "--corpus", str(tmp_path / "nope.txt"), "--vocab", "x", "--out", "y"])
        assert code == 1
        err = capsys.readouterr().err.strip()
        assert "\n" not in err
        assert err.startswith("currikit: error stage=encode:")

    def test_stats(self, corpus_file, capsys):
        assert main(["stats", "--corpus", corpus_file, "--format", "blank-line-documents"]) == 0
        out = dict(
            line.split("\t") for line in capsys.readouterr().out.strip().splitlines()
        )
        assert int(out["documents"]) > 0
        assert int(out["words"]) > 0

    def test_ingest_normalizes(self, corpus_file, tmp_path, capsys):
        out = str(tmp_path / "normalized.txt")
        assert main([
            "ingest", "--corpus", corpus_file, "--format", "blank-line-documents", "--out", out
        ]) == 0
        again = str(tmp_path / "again.txt")
        assert main([
            "ingest", "--corpus", out, "--format", "blank-line-documents", "--out", again
        ]) == 0
        assert open(out, encoding="utf-8").read() == open(again, encoding="utf-8").read()


class TestOrdering:
    def test_order_modes_are_mutually_reversed(self, pipeline_files, tmp_path, capsys):
        fwd = str(tmp_path / "fwd.txt")
        rev = str(tmp_path / "rev.txt")
        assert main(["order", "--scores", pipeline_files["scores"], "--mode", "curriculum", "--out", fwd]) == 0
        assert main(["order", "--scores", pipeline_files["scores"], "--mode", "reversed", "--out", rev]) == 0
        a = open(fwd, encoding="utf-8").read().split()
        b = open(rev, encoding="utf-8").read().split()
        assert a == b[::-1]

    def test_order_seed_determinism(self, pipeline_files, tmp_path):
        o1 = str(tmp_path / "o1.txt")
        o2 = str(tmp_path / "o2.txt")
        o3 = str(tmp_path / "o3.txt")
        base = ["order", "--scores", pipeline_files["scores"], "--mode", "none", "--out"]
        assert main([*base, o1, "--seed", "5"]) == 0
        assert main([*base, o2, "--seed", "5"]) == 0
        assert main([*base, o3, "--seed", "6"]) == 0
        assert open(o1).read() == open(o2).read()
        assert open(o1).read() != open(o3).read()


class TestRepeatability:
    def test_subcommands_identical_on_rerun(self, pipeline_files, corpus_file, tmp_path):
        vocab2 = str(tmp_path / "vocab2.tsv")
        base = ["--corpus", corpus_file, "--format", "blank-line-documents"]
        assert main(["vocab-train", *base, "--target", "250", "--out", vocab2]) == 0
        assert open(pipeline_files["vocab"]).read() == open(vocab2).read()


class TestInspect:
    def test_inspect_prints_three_buckets(self, pipeline_files, capsys):
        assert main([
            "inspect",
            "--scores", pipeline_files["scores"],
            "--chunks", pipeline_files["chunks"],
            "--vocab", pipeline_files["vocab"],
            "-k", "2",
        ]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        buckets = [l.split("\t")[0] for l in lines]
        assert buckets == ["lowest", "lowest", "middle", "middle", "highest", "highest"]


class TestTransferCommand:
    def test_transfer_roundtrip_and_manifest_append(self, pipeline_files, tmp_path, capsys, corpus_file):
        import numpy as np

        from currikit.transfer import EmbeddingMatrix, write_embeddings
        from currikit.vocab import read_vocab

        vocab = read_vocab(pipeline_files["vocab"])
        chars = sorted(p for p, _ in vocab.pieces if len(p) == 1)
        gen = np.random.default_rng(3)
        src = EmbeddingMatrix(
            pieces=list(vocab.specials) + chars,
            rows=gen.normal(size=(len(chars) + 4, 8)).astype(np.float32),
        )
        char_emb = str(tmp_path / "char-emb.tsv")
        write_embeddings(src, char_emb)

        out_emb = str(tmp_path / "emb.tsv")
        assert main([
            "transfer", "--char-emb", char_emb, "--vocab", pipeline_files["vocab"],
            "--out", out_emb, "--seed", "3",
        ]) == 0
        out = dict(
            line.split("\t") for line in capsys.readouterr().out.strip().splitlines()
        )
        assert int(out["copied"]) + int(out["summed"]) == vocab.size
        assert out["head"] == "reinitialize"

    def test_transfer_appends_record_to_manifest(self, pipeline_files, corpus_file, tmp_path, capsys):
        import numpy as np

        from currikit.transfer import EmbeddingMatrix, write_embeddings
        from currikit.vocab import read_vocab

        plan_dir = str(tmp_path / "plan")
        assert main([
            "plan", "--corpus", corpus_file, "--format", "blank-line-documents",
            "--vocab-target", "250", "--out", plan_dir, "--seed", "1",
        ]) == 0
        capsys.readouterr()

        vocab_path = f"{plan_dir}/vocab.tsv"
        vocab = read_vocab(vocab_path)
        chars = sorted(p for p, _ in vocab.pieces if len(p) == 1)
        gen = np.random.default_rng(5)
        src = EmbeddingMatrix(
            pieces=list(vocab.specials) + chars,
            rows=gen.normal(size=(len(chars) + 4, 8)).astype(np.float32),
        )
        char_emb = str(tmp_path / "char-emb.tsv")
        write_embeddings(src, char_emb)
        manifest_path = f"{plan_dir}/manifest.json"
        assert main([
            "transfer", "--char-emb", char_emb, "--vocab", vocab_path,
            "--out", str(tmp_path / "emb.tsv"), "--manifest", manifest_path,
        ]) == 0
        manifest = json.load(open(manifest_path, encoding="utf-8"))
        record = manifest["embedding_transfer"]
        assert record["body"] == "copy"
        assert record["head"] == "reinitialize"
        assert record["copied"] + record["summed"] == vocab.size


class TestPlanCommand:
    def test_plan_with_default_config_small(self, corpus_file, tmp_path, capsys):
        out_dir = str(tmp_path / "plan-out")
        assert main([
            "plan", "--corpus", corpus_file, "--format", "blank-line-documents",
            "--vocab-target", "250", "--out", out_dir, "--seed", "7",
        ]) == 0
        manifest = json.load(open(f"{out_dir}/manifest.json", encoding="utf-8"))
        assert [s["context_size"] for s in manifest["plan"]["stages"]] == [32, 128]
        assert manifest["plan"]["phase_fractions"] == ["1/3", "2/3", "1"]
        assert manifest["plan"]["hyperparameters"]["optimizer"] == "AdamW"
        assert manifest["config"]["seed"] == 7

    def test_bundled_config_matches_repo_copy(self):
        bundled = files("currikit").joinpath("data/paper-default.toml").read_text()
        from pathlib import Path

        repo = Path(__file__).resolve().parents[1] / "configs" / "paper-default.toml"
        assert bundled == repo.read_text()

    def test_plan_requires_corpus(self, capsys):
        assert main(["plan"]) == 1
        assert "stage=plan" in capsys.readouterr().err
