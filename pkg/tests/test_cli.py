import subprocess
import sys

import pytest

from ktreedoc.cli import main
from ktreedoc.corpus import SparseMatrix
from ktreedoc.evaluation import Clustering


def run(*argv):
    assert main([str(a) for a in argv]) == 0


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    run("gen-synth", "--out-dir", d / "corpus", "--n-docs", 300, "--vocab", 300, "--seed", 3)
    c = d / "corpus"
    run("represent", "--scheme", "bm25", "--docs", c / "docs.txt", "--top", 150, "-o", d / "text.txt")
    run("represent", "--scheme", "lfidf", "--links", c / "links.txt", "--subset", c / "labels.txt",
        "--inbound", "--no-normalize", "-o", d / "link.txt")
    run("cull", d / "link.txt", "--top", 200, "-o", d / "link200.txt")
    run("concat", d / "text.txt", d / "link200.txt", "-o", d / "both.txt")
    return d


def test_represent_shapes(work):
    text = SparseMatrix.read(work / "text.txt")
    link = SparseMatrix.read(work / "link200.txt")
    both = SparseMatrix.read(work / "both.txt")
    assert text.shape == (300, 150)
    assert link.shape == (300, 200)
    assert both.shape == (300, 350)
    assert text.row_ids == link.row_ids == both.row_ids


def test_tfidf_and_bm25_options(work, tmp_path):
    c = work / "corpus"
    run("represent", "--scheme", "tfidf", "--docs", c / "docs.txt", "-o", tmp_path / "t.txt")
    run("represent", "--scheme", "bm25", "--k1", 1.2, "--b", 0.5, "--docs", c / "docs.txt",
        "-o", tmp_path / "b.txt")
    assert SparseMatrix.read(tmp_path / "t.txt").rows == 300


RANDOM_COMMANDS = {
    "ktree-codebook": ["ktree", "{text}", "--order", 20, "--codebook-k", 5, "--runs", 3,
                       "--dump", "{out}.dump", "--centroids-out", "{out}.cent"],
    "ktree-weighted": ["ktree", "{text}", "--order", 20, "--codebook-k", 5, "--runs", 3,
                       "--weighted"],
    "ktree-leftasis": ["ktree", "{text}", "--order", 20, "--method", "leftasis", "--level", 1],
    "ktree-rearranged": ["ktree", "{text}", "--order", 20, "--method", "rearranged"],
    "kmeans": ["kmeans", "{text}", "--k", 5, "--runs", 3, "--centroids-out", "{out}.cent"],
    "nmf": ["nmf", "{text}", "--r", 5, "--max-iters", 10, "--trace", "{out}.csv"],
    "classify": ["classify", "{text}", "--labels", "{labels}", "--split", "{split}"],
    "committee": ["classify", "{text}", "--committee", "{link}", "--labels", "{labels}",
                  "--split", "{split}"],
    "sweep": ["sweep-order", "{text}", "--labels", "{labels}", "--orders", "40,20"],
}


def _expand(cmd, work, out):
    subs = {"text": work / "text.txt", "link": work / "link200.txt", "out": out,
            "labels": work / "corpus" / "labels.txt", "split": work / "corpus" / "split.txt"}
    return [str(a).format(**subs) if isinstance(a, str) else a for a in cmd]


def _outputs(out):
    return sorted(p for p in out.parent.iterdir() if p.name.startswith(out.name))


@pytest.mark.parametrize("name", sorted(RANDOM_COMMANDS))
def test_same_seed_byte_identical(name, work, tmp_path):
    blobs = []
    for rep in ("a", "b"):
        out = tmp_path / rep / name
        out.parent.mkdir()
        run(*_expand(RANDOM_COMMANDS[name], work, out), "--seed", 11, "-o", out)
        files = _outputs(out)
        assert files
        blobs.append([p.read_bytes() for p in files])
    assert blobs[0] == blobs[1]


def test_gen_synth_deterministic(tmp_path):
    for rep in ("a", "b"):
        run("gen-synth", "--out-dir", tmp_path / rep, "--n-docs", 80, "--vocab", 100, "--seed", 9)
    for name in ("docs.txt", "links.txt", "labels.txt", "split.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_is_printed(work, tmp_path, capsys):
    run("kmeans", work / "text.txt", "--k", 3, "--runs", 2, "-o", tmp_path / "k.txt")
    assert "seed=0" in capsys.readouterr().err


def test_ktree_outputs(work, tmp_path):
    run("ktree", work / "text.txt", "--order", 20, "--codebook-k", 5, "--runs", 3,
        "-o", tmp_path / "cl.txt")
    cl = Clustering.read(tmp_path / "cl.txt")
    assert len(cl.assignment) == 300
    assert set(cl.assignment.values()) <= set(range(5))


def test_assign_and_eval(work, tmp_path, capsys):
    run("kmeans", work / "text.txt", "--k", 4, "--runs", 2, "--centroids-out", tmp_path / "c.txt",
        "-o", tmp_path / "k.txt")
    run("assign", work / "text.txt", "--centroids", tmp_path / "c.txt", "-o", tmp_path / "a.txt")
    assert len(Clustering.read(tmp_path / "a.txt").assignment) == 300
    capsys.readouterr()
    run("eval", "--clustering", tmp_path / "a.txt", "--labels", work / "corpus" / "labels.txt")
    out = capsys.readouterr().out
    assert out.startswith("clusters\t")
    assert "micro_purity" in out


def test_eval_solution1_fixture(solution1, tmp_path):
    clustering, labels = solution1
    clustering.write(tmp_path / "c.txt")
    labels.write(tmp_path / "l.txt")
    run("eval", "--clustering", tmp_path / "c.txt", "--labels", tmp_path / "l.txt",
        "-o", tmp_path / "m.tsv")
    metrics = dict(line.split("\t") for line in (tmp_path / "m.tsv").read_text().splitlines()
                   if line.count("\t") == 1)
    assert float(metrics["micro_purity"]) == pytest.approx(0.5, abs=1e-9)
    assert float(metrics["macro_purity"]) == pytest.approx(0.5, abs=1e-9)
    assert float(metrics["mean_negentropy"]) == pytest.approx(0.5, abs=1e-9)


def test_classify_prints_recall(work, tmp_path, capsys):
    run("classify", work / "both.txt", "--labels", work / "corpus" / "labels.txt",
        "--split", work / "corpus" / "split.txt", "-o", tmp_path / "p.txt")
    line = capsys.readouterr().out.strip()
    name, value, count = line.split("\t")
    assert name == "recall" and 0 <= float(value) <= 1 and int(count) == 270


def test_nmf_trace_starts_at_zero(work, tmp_path):
    run("nmf", work / "text.txt", "--r", 3, "--max-iters", 5, "--trace", tmp_path / "t.csv",
        "-o", tmp_path / "n.txt")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "iter,objective"
    assert lines[1].startswith("0,")


@pytest.mark.parametrize("argv", [
    ["cull", "missing.txt", "--top", "5", "-o", "x.txt"],
    ["nmf", "{text}", "--r", "1000", "-o", "{out}"],
    ["ktree", "{text}", "--order", "1", "-o", "{out}"],
    ["ktree", "{text}", "--order", "20", "--level", "9", "--method", "leftasis", "-o", "{out}"],
])
def test_errors_exit_nonzero(argv, work, tmp_path, capsys):
    argv = _expand(argv, work, tmp_path / "o.txt")
    assert main(argv) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert "error" in err[-1]


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ktreedoc.cli", "eval", "--clustering",
                           str(tmp_path / "nope"), "--labels", str(tmp_path / "nope")],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert proc.stderr.strip().splitlines()[-1].startswith("ktreedoc eval: error:")
