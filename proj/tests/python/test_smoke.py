import math

import pytest

import shredkit


def test_canonicalize_and_validate():
    text = "artist:x  start\n g:note:s1:f0 nfx:bend\twait:480 end"
    assert shredkit.canonicalize(text) == "artist:x start g:note:s1:f0 nfx:bend wait:480 end"
    assert shredkit.validate(text) == []
    problems = shredkit.validate("start nfx:bend wait:0 end")
    assert [p[1] for p in problems].count("error") >= 2
    assert shredkit.token_kind("wait:480") == "wait"


def test_metrics():
    assert shredkit.pitch_class_entropy([1.0] * 12) == pytest.approx(math.log2(12), abs=1e-12)
    sc, scale = shredkit.scale_consistency([1, 1] + [0] * 10)
    assert sc == 1.0 and scale == "C# major"
    counts = shredkit.pitch_class_counts("start g:note:s2:f1 wait:480 g:note:s1:f0 wait:480 end")
    assert counts[0] == 1 and counts[4] == 1
    durations = shredkit.note_durations("start g:note:s1:f0 wait:240 g:note:s1:f2 wait:480 end")
    assert durations == {"240": 1.0, "480": 1.0}
    assert shredkit.techniques("start g:note:s1:f0 nfx:hammer wait:1 end")["hammer"] == 1.0


def test_statistics():
    assert shredkit.kld({"a": 3, "b": 1}, {"a": 1, "b": 1}, 1e-9) == pytest.approx(0.18872, abs=1e-4)
    r = shredkit.kruskal_wallis([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
    assert r["statistic"] == pytest.approx(7.2, abs=1e-9)
    assert r["p"] == pytest.approx(math.exp(-3.6), abs=1e-10)
    assert shredkit.chi_square_sf(12.848, 3) < 0.005
    with pytest.raises(shredkit.ShredkitError):
        shredkit.kruskal_wallis([[1, 2, 3]])


def test_models_and_report(tmp_path):
    code, _ = shredkit.synth(tmp_path / "corpus", songs_per_artist=6, measures=6, seed=1)
    assert code == 0
    lm = shredkit.StyleModel.train(tmp_path / "corpus")
    assert len(lm.artists) == 4
    artist = lm.artists[0]
    out = lm.generate("start new_measure", artist, solo=True, seed=3)
    assert out == lm.generate("start new_measure", artist, solo=True, seed=3)
    assert out.startswith("artist:" + artist)
    assert [p for p in shredkit.validate(out) if p[1] == "error"] == []

    nb = shredkit.NaiveBayes.train(tmp_path / "corpus")
    scores = nb.scores(out)
    assert set(scores) == set(lm.artists)
    assert sum(scores.values()) == pytest.approx(1.0)

    code, _ = shredkit.report(tmp_path / "corpus", tmp_path / "corpus" / "annotations.json", tmp_path / "r", n=2, seed=5)
    assert code == 0
    assert (tmp_path / "r" / "compare" / "kld_durations.csv").exists()
    assert (tmp_path / "r" / "classify" / "scores.csv").exists()
