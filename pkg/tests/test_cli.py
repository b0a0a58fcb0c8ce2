import functools

import pytest

from pfx import cli, svm


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli")
    assert cli.main(["synth", "--out", str(out / "data"), "--per-class", "10", "--seed", "3"]) == 0
    return out


def manifest(data):
    return str(data / "data" / "manifest.csv")


def first_row(data):
    line = (data / "data" / "manifest.csv").read_text().splitlines()[1].split(",")
    return str(data / "data" / line[0]), line[1], ",".join(line[2:])


class TestSuccess:
    def test_synth_manifest(self, data):
        rows = (data / "data" / "manifest.csv").read_text().splitlines()
        assert len(rows) == 61

    def test_train_deterministic(self, data, capsys):
        for name in ("a.pfx", "b.pfx"):
            assert cli.main(["train", "--manifest", manifest(data), "--out", str(data / name)]) == 0
        assert (data / "a.pfx").read_bytes() == (data / "b.pfx").read_bytes()
        assert "15 pairwise machines" in capsys.readouterr().out

    def test_train_flags(self, data):
        args = ["train", "--manifest", manifest(data), "--out", str(data / "lin.pfx"), "--kernel", "linear",
                "--c", "2", "--lbp-bins", "32", "--phog-levels", "2", "--features", "lbp", "--seed", "4"]
        assert cli.main(args) == 0

    def test_predict(self, data, capsys):
        cli.main(["train", "--manifest", manifest(data), "--out", str(data / "p.pfx")])
        image, label, lm = first_row(data)
        capsys.readouterr()
        assert cli.main(["predict", "--model", str(data / "p.pfx"), "--image", image, "--landmarks", lm,
                         "--votes"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == label and len(out) == 7

    def test_evaluate_deterministic(self, data, capsys):
        for name in ("e1", "e2"):
            assert cli.main(["evaluate", "--manifest", manifest(data), "--out-dir", str(data / name),
                             "--seed", "5"]) == 0
        text = capsys.readouterr().out
        assert "pooled over 5 folds" in text and "mean of fold rates" in text
        files = sorted(p.name for p in (data / "e1").iterdir())
        assert files == sorted([f"fold{i}_confusion.csv" for i in range(1, 6)]
                               + ["pooled_confusion.csv", "summary.csv"])
        for f in files:
            assert (data / "e1" / f).read_bytes() == (data / "e2" / f).read_bytes()

    def test_evaluate_ablation(self, data):
        assert cli.main(["evaluate", "--manifest", manifest(data), "--out-dir", str(data / "abl"), "--ablation"]) == 0
        header = (data / "abl" / "ablation.csv").read_text().splitlines()
        assert [r.split(",")[0] for r in header[1:]] == ["both", "phog", "lbp"]


class TestExitCodes:
    @pytest.mark.parametrize("argv", [[], ["train"], ["bogus"], ["train", "--manifest", "m", "--out", "o",
                                                                  "--kernel", "sigmoid"]])
    def test_usage(self, argv):
        assert cli.main(argv) == 2

    def test_invalid_config_is_usage(self, data):
        assert cli.main(["train", "--manifest", manifest(data), "--out", str(data / "x"), "--lbp-bins", "100"]) == 2

    def test_too_few_folds(self, data):
        assert cli.main(["evaluate", "--manifest", manifest(data), "--folds", "1"]) == 2

    def test_missing_manifest(self, tmp_path):
        assert cli.main(["train", "--manifest", str(tmp_path / "no.csv"), "--out", str(tmp_path / "m")]) == 3

    def test_bad_model(self, data, tmp_path):
        (tmp_path / "bad.pfx").write_bytes(b"garbage")
        image, _, lm = first_row(data)
        assert cli.main(["predict", "--model", str(tmp_path / "bad.pfx"), "--image", image, "--landmarks", lm]) == 3

    def test_bad_landmarks(self, data):
        cli.main(["train", "--manifest", manifest(data), "--out", str(data / "q.pfx")])
        image, _, _ = first_row(data)
        assert cli.main(["predict", "--model", str(data / "q.pfx"), "--image", image, "--landmarks", "1,2,3"]) == 3

    def test_convergence(self, data, monkeypatch, capsys):
        monkeypatch.setattr(svm, "train_binary", functools.partial(svm.train_binary, max_iter=1))
        assert cli.main(["train", "--manifest", manifest(data), "--out", str(data / "c.pfx")]) == 4
        assert "duality gap" in capsys.readouterr().err
