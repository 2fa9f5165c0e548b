import xml.etree.ElementTree as ET

import pytest

from semcom.dou import MeaningSelection
from semcom.lexicon import SynsetId
from semcom.paraphrase import SynonymParaphraser
from semcom.pipeline import extract_word_units, tokenize
from semcom.simulator import (
    CellResult,
    EmptyResultError,
    ExperimentConfig,
    ExperimentResult,
    ImpairedReceiver,
    ImpairmentConfig,
    InsufficientCorpusError,
    MaskTooLargeError,
    filter_by_length,
    impair,
    load_corpus,
    load_experiment_config,
    read_csv,
    render_chart,
    run_experiment_a,
    run_experiment_b,
    write_csv,
)

from conftest import FIXTURES

CORPUS = FIXTURES / "corpus" / "sentences.txt"


def prepared(db, sentence):
    units = extract_word_units(db, sentence)
    return units, MeaningSelection.first_sense(units), tokenize(sentence)


class TestImpair:
    def test_full_understanding_copies_sender(self, exp_db):
        units, sel_s, tokens = prepared(exp_db, "the bank near the spring")
        sel_r, _ = impair(exp_db, units, sel_s, tokens, ImpairmentConfig(wdou_level=1.0, mask_all=True, seed=3))
        assert sel_r.choices == sel_s.choices

    def test_no_masking_is_identity(self, exp_db):
        units, sel_s, tokens = prepared(exp_db, "the bank near the spring")
        sel_r, sentence = impair(exp_db, units, sel_s, tokens, ImpairmentConfig(wdou_level=0.0, mask_count=0, seed=9))
        assert sel_r.choices == sel_s.choices
        assert sentence == "the bank near the spring"

    def test_seeded_golden_run(self, exp_db):
        # Pinned after the first verified run; both units land on a wrong
        # sense and emit one of that sense's lemmas.
        units, sel_s, tokens = prepared(exp_db, "the bank near the spring")
        sel_r, sentence = impair(exp_db, units, sel_s, tokens, ImpairmentConfig(wdou_level=0.0, mask_all=True, seed=7))
        assert [str(c) for c in sel_r.choices] == ["n:00010002", "n:00010101"]
        assert sentence == "the tier near the coil"

    def test_divergence_can_be_surface_invisible(self, mini_db):
        # The receiver picks the wrong "steep" sense whose only lemma is the
        # original word: the sentence matches, the selection does not.
        units, sel_s, tokens = prepared(mini_db, "the bank is steep")
        sel_r, sentence = impair(mini_db, units, sel_s, tokens, ImpairmentConfig(wdou_level=0.0, mask_count=2, seed=42))
        assert sentence == "the bank is steep"
        assert [str(c) for c in sel_r.choices] == ["n:00001001", "s:20001002"]
        assert sel_r.choices != sel_s.choices

    def test_choices_always_candidates(self, exp_db):
        sentence = "the bank near the spring and the wave broke the seal deep in the dark"
        units, sel_s, tokens = prepared(exp_db, sentence)
        for seed in range(25):
            for level in (0.0, 0.3, 0.5, 1.0):
                cfg = ImpairmentConfig(wdou_level=level, mask_all=True, seed=seed)
                sel_r, _ = impair(exp_db, units, sel_s, tokens, cfg)
                for unit, choice in zip(units, sel_r.choices):
                    assert choice in unit.candidates

    def test_mask_too_large(self, exp_db):
        units, sel_s, tokens = prepared(exp_db, "the bank near the spring")
        with pytest.raises(MaskTooLargeError):
            impair(exp_db, units, sel_s, tokens, ImpairmentConfig(wdou_level=0.5, mask_count=99, seed=1))

    def test_deterministic(self, exp_db):
        units, sel_s, tokens = prepared(exp_db, "the stock passed the check")
        cfg = ImpairmentConfig(wdou_level=0.5, mask_count=3, seed=77)
        assert impair(exp_db, units, sel_s, tokens, cfg) == impair(exp_db, units, sel_s, tokens, cfg)

    def test_understood_fraction_rounds_half_up(self, exp_db):
        sentence = "the bank near the spring"
        units, sel_s, tokens = prepared(exp_db, sentence)
        # Both units masked at level 0.5: round(0.5 * 2) = 1 understood.
        matches = []
        for seed in range(60):
            cfg = ImpairmentConfig(wdou_level=0.5, mask_all=True, seed=seed)
            sel_r, _ = impair(exp_db, units, sel_s, tokens, cfg)
            matches.append(sum(a == b for a, b in zip(sel_s.choices, sel_r.choices)))
        assert all(m >= 1 for m in matches)  # at least the understood unit
        assert any(m == 1 for m in matches)  # wrong guesses do happen

    def test_smoothing_runs_receiver_paraphraser(self, exp_db):
        units, sel_s, tokens = prepared(exp_db, "the bank near the spring")
        cfg = ImpairmentConfig(wdou_level=1.0, mask_count=0, seed=5, smoothing=True)
        sel_r, sentence = impair(exp_db, units, sel_s, tokens, cfg, SynonymParaphraser(exp_db))
        assert sel_r.choices == sel_s.choices
        assert isinstance(sentence, str) and sentence

    def test_validation(self):
        with pytest.raises(ValueError):
            ImpairmentConfig(wdou_level=1.5)
        with pytest.raises(ValueError):
            ImpairmentConfig(wdou_level=0.5, mask_count=-1)


class TestImpairedReceiver:
    def test_respond_resolves_and_rebuilds(self, exp_db):
        sentence = "the bank near the spring"
        units, sel_s, tokens = prepared(exp_db, sentence)
        behavior = ImpairedReceiver(ImpairmentConfig(wdou_level=0.0, mask_all=True, seed=2))
        sel_r, sentence_r = behavior.respond(exp_db, sentence, units, sel_s, 0)
        assert len(sel_r) == len(units)
        assert sel_r.resolved

    def test_rounds_draw_fresh_streams(self, exp_db):
        sentence = "the bank near the spring"
        units, sel_s, tokens = prepared(exp_db, sentence)
        behavior = ImpairedReceiver(ImpairmentConfig(wdou_level=0.0, mask_all=True, seed=2))
        first = behavior.respond(exp_db, sentence, units, sel_s, 0)
        second = behavior.respond(exp_db, sentence, units, sel_s, 1)
        again = behavior.respond(exp_db, sentence, units, sel_s, 0)
        assert first == again
        assert first != second

    def test_mask_count_clamped_to_new_sentence(self, exp_db):
        sentence = "the bank"
        units, sel_s, tokens = prepared(exp_db, sentence)
        behavior = ImpairedReceiver(ImpairmentConfig(wdou_level=1.0, mask_count=10, seed=4))
        sel_r, _ = behavior.respond(exp_db, sentence, units, sel_s, 0)
        assert sel_r.choices == sel_s.choices


class TestCorpus:
    def test_bundled_corpus_counts(self):
        sentences = load_corpus(CORPUS)
        assert len(sentences) == 60
        assert len(filter_by_length(sentences, 5)) >= 12
        assert len(filter_by_length(sentences, 15)) == 20
        assert len(filter_by_length(sentences, 25)) == 20

    def test_empty_file(self, tmp_path):
        empty = tmp_path / "corpus.txt"
        empty.write_text("\n\n")
        assert load_corpus(empty) == []

    def test_filter_larger_than_any(self):
        assert filter_by_length(load_corpus(CORPUS), 99) == []

    def test_length_counts_tokens_before_stopword_removal(self):
        assert filter_by_length(["The bank, rose."], 3) == ["The bank, rose."]


class TestConfig:
    def test_load_resolves_paths(self):
        kind, cfg = load_experiment_config(FIXTURES / "exp-a-small.toml")
        assert kind == "a"
        assert cfg.sentence_length == 5
        assert cfg.mask_counts == (0, 1, 3, 5)
        assert load_corpus(cfg.corpus_path)

    def test_bad_kind_rejected(self, tmp_path):
        bad = tmp_path / "bad.toml"
        bad.write_text('[experiment]\nkind = "c"\ncorpus = "x"\nlexicon = "y"\nsentence_length = 5\n')
        with pytest.raises(ValueError):
            load_experiment_config(bad)

    def test_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig("c", "l", 5, sentences_per_cell=0)
        with pytest.raises(ValueError):
            ExperimentConfig("c", "l", 5, wdou_levels=(2.0,))


def small_cfg(**overrides):
    base = dict(
        corpus_path=str(CORPUS),
        lexicon_dir=str(FIXTURES / "exp-wndb"),
        sentence_length=5,
        sentences_per_cell=6,
        trials_per_sentence=3,
        wdou_levels=(0.0, 1.0),
        mask_counts=(0, 2, 5),
        variants=8,
        top_k=6,
        base_seed=11,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestExperimentA:
    def test_unmasked_perfect_cell(self, exp_db):
        cfg = small_cfg(mask_counts=(0,), wdou_levels=(1.0,))
        result = run_experiment_a(cfg, exp_db)
        assert result.rows[0].mean_sdou == pytest.approx(1.0)
        assert result.rows[0].std_sdou == pytest.approx(0.0)
        assert result.rows[0].trials == 18

    def test_wdou_ordering_trend(self, exp_db):
        cfg = small_cfg(sentences_per_cell=12, trials_per_sentence=8, mask_counts=(5,))
        result = run_experiment_a(cfg, exp_db)
        by_level = {r.wdou_level: r.mean_sdou for r in result.rows}
        assert by_level[1.0] >= by_level[0.0]

    def test_reproducible_and_parallel_identical(self, exp_db, tmp_path):
        cfg = small_cfg()
        first = run_experiment_a(cfg, exp_db)
        second = run_experiment_a(cfg, exp_db)
        parallel = run_experiment_a(small_cfg(workers=4), exp_db)
        a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
        write_csv(first, a)
        write_csv(second, b)
        write_csv(parallel, c)
        assert a.read_bytes() == b.read_bytes() == c.read_bytes()

    def test_insufficient_corpus(self, exp_db):
        with pytest.raises(InsufficientCorpusError):
            run_experiment_a(small_cfg(sentence_length=7), exp_db)

    def test_golden_csv(self, exp_db, tmp_path):
        kind, cfg = load_experiment_config(FIXTURES / "exp-a-small.toml")
        result = run_experiment_a(cfg, exp_db)
        out = tmp_path / "out.csv"
        write_csv(result, out)
        golden = (FIXTURES / "experiments" / "exp-a-small.golden.csv").read_bytes()
        assert out.read_bytes() == golden


class TestExperimentB:
    def test_optimized_never_below_baseline(self, exp_db):
        cfg = small_cfg(wdou_levels=(0.0, 0.5), trials_per_sentence=2, mask_counts=())
        result = run_experiment_b(cfg, exp_db)
        for row in result.rows:
            assert row.optimized_mean >= row.baseline_mean - 1e-12
            assert row.mean_sdou == row.optimized_mean

    def test_degenerate_variantless_corpus(self, exp_db, tmp_path):
        corpus = tmp_path / "corpus.txt"
        corpus.write_text("quiet mornings feel gentle here\n")
        cfg = small_cfg(
            corpus_path=str(corpus), sentences_per_cell=1, trials_per_sentence=2,
            wdou_levels=(0.0,), variants=1, mask_counts=(),
        )
        result = run_experiment_b(cfg, exp_db)
        row = result.rows[0]
        assert row.baseline_mean == pytest.approx(row.optimized_mean)
        assert row.baseline_mean == pytest.approx(1.0)

    def test_golden_csv(self, exp_db, tmp_path):
        kind, cfg = load_experiment_config(FIXTURES / "exp-b-small.toml")
        result = run_experiment_b(cfg, exp_db)
        out = tmp_path / "out.csv"
        write_csv(result, out)
        golden = (FIXTURES / "experiments" / "exp-b-small.golden.csv").read_bytes()
        assert out.read_bytes() == golden


class TestReports:
    def sample(self):
        return ExperimentResult(
            "a",
            (
                CellResult(0.0, 0, 1.0, 0.0, 10),
                CellResult(0.0, 2, 0.91234567, 0.05, 10),
                CellResult(1.0, 0, 1.0, 0.0, 10),
                CellResult(1.0, 2, 0.95, 0.025, 10),
            ),
        )

    def test_write_csv_format(self, tmp_path):
        path = tmp_path / "r.csv"
        write_csv(self.sample(), path)
        lines = path.read_text().splitlines()
        assert lines[0] == "experiment,wdou_level,mask_count,mean_sdou,std_sdou,trials"
        assert lines[2] == "a,0.000000,2,0.912346,0.050000,10"

    def test_csv_roundtrip_stable(self, tmp_path):
        path = tmp_path / "r.csv"
        write_csv(self.sample(), path)
        parsed = read_csv(path)
        again = tmp_path / "r2.csv"
        write_csv(parsed, again)
        assert again.read_bytes() == path.read_bytes()

    def test_empty_result_errors_without_file(self, tmp_path):
        path = tmp_path / "nope.csv"
        with pytest.raises(EmptyResultError):
            write_csv(ExperimentResult("a", ()), path)
        assert not path.exists()
        with pytest.raises(EmptyResultError):
            render_chart(ExperimentResult("a", ()), tmp_path / "nope.svg")

    def test_render_chart_wellformed_and_deterministic(self, tmp_path):
        first = tmp_path / "c1.svg"
        second = tmp_path / "c2.svg"
        render_chart(self.sample(), first)
        render_chart(self.sample(), second)
        assert first.read_bytes() == second.read_bytes()
        root = ET.fromstring(first.read_text())
        assert root.tag.endswith("svg")
        ns = "{http://www.w3.org/2000/svg}"
        polylines = root.findall(f"{ns}polyline")
        assert len(polylines) == 2  # one series per level
        assert len(root.findall(f"{ns}circle")) == 4
