import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from unresolved_qa import ingest, synth
from unresolved_qa.cli import main
from unresolved_qa.topics import corpus_alpha, doc_theta, load_model, question_doc_id

from conftest import answer, question, user


def run(*argv):
    return main([str(a) for a in argv])


def read_csv(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def write_dump(workdir, posts, users):
    workdir.mkdir(parents=True, exist_ok=True)
    with open(workdir / "Posts.xml", "wb") as f:
        ingest.write_posts(posts, f)
    with open(workdir / "Users.xml", "wb") as f:
        ingest.write_users(users, f)


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory):
    wd = tmp_path_factory.mktemp("pipe")
    assert run("synth", "--workdir", wd, "--n-questions", 80, "--seed", 3) == 0
    assert run("ingest", "--workdir", wd, "--posts", wd / "Posts.xml", "--users", wd / "Users.xml") == 0
    assert run("featurize", "--workdir", wd, "--topics", 5, "--lda-iters", 30) == 0
    return wd


def two_thread_dump():
    posts = [question(1, accepted=10)] + [answer(10 + i, 1) for i in range(10)]
    posts += [question(2, owner=2)] + [answer(30 + i, 2) for i in range(11)]
    posts += [question(3, days_old=20)] + [answer(50 + i, 3, days_old=10) for i in range(12)]
    posts += [question(4)] + [answer(70 + i, 4) for i in range(2)]
    return posts, [user(1), user(2)]


class TestIngestCommand:
    def test_retained_two(self, tmp_path, capsys):
        write_dump(tmp_path, *two_thread_dump())
        assert run("ingest", "--workdir", tmp_path, "--posts", tmp_path / "Posts.xml", "--users", tmp_path / "Users.xml") == 0
        out = capsys.readouterr().out
        assert "retained: 2" in out
        header = json.loads((tmp_path / "dataset.jsonl").read_text().splitlines()[0])
        assert header["counts"]["retained"] == 2
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert len(manifest["ingest"]["inputs"]) == 2

    def test_missing_posts_flag_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run("ingest", "--workdir", tmp_path, "--users", tmp_path / "Users.xml")
        assert exc.value.code == 1

    def test_missing_posts_file_is_data_error(self, tmp_path):
        assert run("ingest", "--workdir", tmp_path, "--posts", tmp_path / "nope.xml", "--users", tmp_path / "nope.xml") == 2

    def test_bad_range_is_usage_error(self, tmp_path):
        write_dump(tmp_path, *two_thread_dump())
        assert run("ingest", "--workdir", tmp_path, "--posts", tmp_path / "Posts.xml", "--users", tmp_path / "Users.xml",
                   "--min-answers", 0) == 1

    def test_malformed_xml_is_data_error(self, tmp_path, capsys):
        (tmp_path / "Posts.xml").write_bytes(b"<posts><row Id=")
        write_dump(tmp_path / "u", [], [user(1)])
        assert run("ingest", "--workdir", tmp_path, "--posts", tmp_path / "Posts.xml", "--users", tmp_path / "u" / "Users.xml") == 2
        assert "byte offset" in capsys.readouterr().err

    def test_min_answers_widens(self, tmp_path, capsys):
        write_dump(tmp_path, *two_thread_dump())
        retained = []
        for m in (10, 1):
            run("ingest", "--workdir", tmp_path, "--posts", tmp_path / "Posts.xml", "--users", tmp_path / "Users.xml",
                "--min-answers", m)
            out = capsys.readouterr().out
            retained.append(int(out.split("retained: ")[1].split()[0]))
        assert retained == [2, 3]

    def test_console_script_exit_code(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "unresolved_qa.cli", "ingest", "--workdir", str(tmp_path)],
                              capture_output=True, text=True)
        assert proc.returncode == 1
        assert "--posts" in proc.stderr


class TestFeaturizeCommand:
    def test_columns_and_rows(self, pipeline_dir):
        rows = read_csv(pipeline_dir / "features.csv")
        assert list(rows[0]) == ["question_id", "te", "arr", "lad_log", "votes", "rep_log", "label"]
        dataset = ingest.read_dataset((pipeline_dir / "dataset.jsonl").read_text().splitlines())
        assert [int(r["question_id"]) for r in rows] == [t.id for t in dataset.threads]

    def test_rerun_is_byte_identical(self, pipeline_dir, tmp_path):
        first = (pipeline_dir / "features.csv").read_bytes()
        # fresh directory, so the topic model is retrained rather than reused
        for name in ("dataset.jsonl",):
            (tmp_path / name).write_bytes((pipeline_dir / name).read_bytes())
        assert run("featurize", "--workdir", tmp_path, "--topics", 5, "--lda-iters", 30) == 0
        assert (tmp_path / "features.csv").read_bytes() == first
        assert (tmp_path / "lda_model.txt").read_bytes() == (pipeline_dir / "lda_model.txt").read_bytes()

    def test_te_matches_direct_recomputation(self, pipeline_dir):
        model = load_model(pipeline_dir / "lda_model.txt")
        alpha = corpus_alpha(model)
        for r in read_csv(pipeline_dir / "features.csv"):
            theta = doc_theta(model, model.doc_ids.index(question_doc_id(int(r["question_id"]))))
            top = np.argsort(-theta, kind="stable")[:5]
            p = alpha[top] * theta[top]
            p = p[p > 0]
            assert float(r["te"]) == pytest.approx(float(-(p * np.log(p)).sum()), rel=1e-9)

    def test_empty_dataset_is_data_error(self, tmp_path):
        assert run("featurize", "--workdir", tmp_path) == 2


class TestEvaluateCommand:
    def test_six_records(self, pipeline_dir, capsys):
        assert run("evaluate", "--workdir", pipeline_dir, "--folds", 5) == 0
        payload = json.loads((pipeline_dir / "report.json").read_text())
        assert len(payload["records"]) == 6
        for rec in payload["records"]:
            c = rec["confusion"]
            assert sum(c.values()) == 80
        assert "Decision tree (C4.5)" in capsys.readouterr().out
        assert len(list((pipeline_dir / "models").glob("*.json"))) == 6

    def test_separable_input_is_perfect(self, tmp_path):
        lines = ["question_id,te,arr,lad_log,votes,rep_log,label"]
        for i in range(40):
            unres = i % 2
            v = 5.0 + i * 0.01 if unres else i * 0.01
            lines.append(f"{i},{v},{v},{v},{int(v)},{v},{'Unresolved' if unres else 'Resolved'}")
        (tmp_path / "features.csv").write_text("\n".join(lines) + "\n")
        assert run("evaluate", "--workdir", tmp_path) == 0
        payload = json.loads((tmp_path / "report.json").read_text())
        assert [r["accuracy"] for r in payload["records"]] == [1.0] * 6

    def test_missing_features_is_data_error(self, tmp_path):
        assert run("evaluate", "--workdir", tmp_path) == 2


class TestPredictCommand:
    def test_three_rows(self, pipeline_dir, tmp_path, capsys):
        if not (pipeline_dir / "models" / "tree_full.json").exists():
            run("evaluate", "--workdir", pipeline_dir, "--folds", 5)
        rows = (pipeline_dir / "features.csv").read_text().splitlines()[:4]
        (tmp_path / "three.csv").write_text("\n".join(rows) + "\n")
        capsys.readouterr()
        assert run("predict", "--workdir", tmp_path, "--model", pipeline_dir / "models" / "tree_full.json",
                   "--features", tmp_path / "three.csv") == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 4
        from unresolved_qa.learner import FittedPipeline, predict

        pipe = FittedPipeline.from_json((pipeline_dir / "models" / "tree_full.json").read_text())
        for line, src in zip(out[1:], read_csv(tmp_path / "three.csv")):
            qid, label, p = line.split(",")
            assert qid == src["question_id"]
            assert 0.0 <= float(p) <= 1.0
            row = [float(src[c]) if src[c] else float("nan") for c in pipe.feature_names]
            assert label == predict(pipe, row)[0]

    def test_missing_columns(self, pipeline_dir, tmp_path):
        if not (pipeline_dir / "models" / "tree_full.json").exists():
            run("evaluate", "--workdir", pipeline_dir, "--folds", 5)
        (tmp_path / "bad.csv").write_text("question_id,arr\n1,0.5\n")
        assert run("predict", "--workdir", tmp_path, "--model", pipeline_dir / "models" / "tree_full.json",
                   "--features", tmp_path / "bad.csv") == 2


class TestReportCommand:
    def test_histograms_partition_each_class(self, pipeline_dir):
        assert run("report", "--workdir", pipeline_dir) == 0
        summary = read_csv(pipeline_dir / "descriptive_summary.csv")
        hist = read_csv(pipeline_dir / "descriptive_histograms.csv")
        n = {(r["metric"], r["class"]): int(r["n"]) for r in summary}
        for key, size in n.items():
            bins = [int(h["count"]) for h in hist if (h["metric"], h["class"]) == key]
            assert len(bins) == 10 and sum(bins) == size
        assert {"lad_days", "lad_log"} <= {m for m, _ in n}
        assert n[("arr", "Unresolved")] + n[("arr", "Resolved")] <= 80

    def test_generator_direction_visible(self, pipeline_dir):
        run("report", "--workdir", pipeline_dir)
        means = {(r["metric"], r["class"]): float(r["mean"]) for r in read_csv(pipeline_dir / "descriptive_summary.csv")}
        assert means[("arr", "Unresolved")] > means[("arr", "Resolved")]
        assert means[("votes", "Unresolved")] < means[("votes", "Resolved")]


class TestSynth:
    def test_same_seed_same_files(self, tmp_path):
        for d in ("a", "b"):
            assert run("synth", "--workdir", tmp_path / d, "--n-questions", 30, "--seed", 11) == 0
        for name in ("Posts.xml", "Users.xml"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_balanced_and_vote_direction(self):
        dump = synth.generate(synth.SynthConfig(n_questions=2000, seed=42))
        labels = list(dump.labels.values())
        assert labels.count("Unresolved") == 1000 and labels.count("Resolved") == 1000
        score = {p.id: p.score for p in dump.posts}
        votes = {c: np.mean([score[q] for q, lab in dump.labels.items() if lab == c]) for c in ("Unresolved", "Resolved")}
        assert votes["Unresolved"] < votes["Resolved"]
