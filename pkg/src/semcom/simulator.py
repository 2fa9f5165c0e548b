"""Receiver impairment, corpus handling, and the masking/paraphrase sweeps.

Experiment A masks a growing number of token positions and controls what
fraction of the masked polysemous words the receiver still resolves
correctly, then measures how sentence-level understanding degrades.
Experiment B masks everything and measures how much transmitting the best
of l candidate paraphrases recovers.

All randomness is drawn from streams keyed off a per-trial seed that
depends only on (base seed, sentence index, trial index). Cells reuse the
trial streams (common random numbers), so comparisons across masking and
understanding levels are paired: cells whose impairment models coincide
produce identical samples instead of independently noisy ones.
"""

from __future__ import annotations

import concurrent.futures
import statistics
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .dou import DouReport, MeaningSelection
from .lexicon import LexicalDatabase, load_lexicon_dir
from .paraphrase import (
    DEFAULT_TOP_K,
    DEFAULT_VARIANT_COUNT,
    SynonymParaphraser,
    filter_top_k,
    select_best_transmission,
    synonym_paraphrase,
)
from .pipeline import extract_word_units, tokenize
from .protocol import Providers, SenderPolicy, run_local_session
from .rng import mix64, stream
from .similarity import default_embedder

_MASK_STREAM = 1
_SHUFFLE_STREAM = 2
_UNIT_STREAM = 3
_SMOOTH_STREAM = 4
_ROUND_STREAM = 5
_PARAPHRASE_STREAM = 6


class MaskTooLargeError(ValueError):
    pass


class InsufficientCorpusError(ValueError):
    pass


class EmptyResultError(ValueError):
    pass


@dataclass(frozen=True)
class ImpairmentConfig:
    """How flawed the simulated receiver is for one session."""

    wdou_level: float
    mask_count: int = 0
    mask_all: bool = False
    seed: int = 0
    smoothing: bool = False

    def __post_init__(self):
        if not 0.0 <= self.wdou_level <= 1.0:
            raise ValueError(f"wdou_level {self.wdou_level} outside [0, 1]")
        if self.mask_count < 0:
            raise ValueError("mask_count must be >= 0")


def _round_half_up(x: float) -> int:
    return int(x + 0.5)


def impair(
    db: LexicalDatabase,
    units,
    sel_s: MeaningSelection,
    tokens,
    cfg: ImpairmentConfig,
    paraphraser=None,
):
    """Produce the receiver's meaning selection and reconstructed sentence.

    Masked positions are chosen without replacement over all tokens; masked
    word units are "understood" (they copy the sender's sense) for exactly
    round(wdou_level * masked_units) of them, chosen by a seeded shuffle.
    Every masked unit's token is rewritten with a uniform lemma of its
    chosen synset; all other tokens are copied verbatim.
    """
    if not sel_s.resolved:
        raise ValueError("sender selection must be fully resolved")
    n = len(tokens)
    mask_count = n if cfg.mask_all else cfg.mask_count
    if mask_count > n:
        raise MaskTooLargeError(f"cannot mask {mask_count} of {n} tokens")
    masked = set(stream(cfg.seed, _MASK_STREAM).sample_prefix(n, mask_count))
    masked_units = [
        (i, unit, chosen)
        for i, (unit, chosen) in enumerate(zip(units, sel_s.choices))
        if unit.token_index in masked
    ]
    order = list(range(len(masked_units)))
    stream(cfg.seed, _SHUFFLE_STREAM).shuffle(order)
    understood_count = _round_half_up(cfg.wdou_level * len(masked_units))
    understood = set(order[:understood_count])
    choices = list(sel_s.choices)
    words = [t.surface for t in tokens]
    for slot, (unit_pos, unit, sender_choice) in enumerate(masked_units):
        g = stream(cfg.seed, _UNIT_STREAM, unit.token_index)
        if slot in understood:
            chosen = sender_choice
        else:
            chosen = unit.candidates[g.randrange(len(unit.candidates))]
            choices[unit_pos] = chosen
        lemmas = db.lemmas_of(chosen)
        words[unit.token_index] = lemmas[g.randrange(len(lemmas))].replace("_", " ")
    sentence = " ".join(words)
    if cfg.smoothing and paraphraser is not None:
        smooth_seed = mix64(cfg.seed, _SMOOTH_STREAM)
        sentence = paraphraser.generate(sentence, 1, seed=smooth_seed).variants[0]
    return MeaningSelection(tuple(choices)), sentence


class ImpairedReceiver:
    """Protocol receiver behavior backed by the impairment model."""

    def __init__(self, cfg: ImpairmentConfig, paraphraser=None):
        self.cfg = cfg
        self.paraphraser = paraphraser

    def respond(self, db, sentence, units, sender_selection, round_index):
        round_cfg = replace(self.cfg, seed=mix64(self.cfg.seed, _ROUND_STREAM, round_index))
        tokens = tokenize(sentence)
        if not round_cfg.mask_all and round_cfg.mask_count > len(tokens):
            round_cfg = replace(round_cfg, mask_count=len(tokens))
        return impair(db, units, sender_selection, tokens, round_cfg, self.paraphraser)


# --- corpus -------------------------------------------------------------------


def load_corpus(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


def filter_by_length(sentences, n: int) -> list[str]:
    return [s for s in sentences if len(tokenize(s)) == n]


# --- experiment configuration ---------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    corpus_path: str
    lexicon_dir: str
    sentence_length: int
    sentences_per_cell: int = 12
    trials_per_sentence: int = 50
    wdou_levels: tuple = (0.0, 0.5, 1.0)
    mask_counts: tuple = ()
    variants: int = DEFAULT_VARIANT_COUNT
    top_k: int = DEFAULT_TOP_K
    base_seed: int = 42
    smoothing: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.sentences_per_cell < 1 or self.trials_per_sentence < 1:
            raise ValueError("counts must be >= 1")
        if any(not 0.0 <= level <= 1.0 for level in self.wdou_levels):
            raise ValueError("wdou levels must lie in [0, 1]")


def load_experiment_config(path) -> tuple[str, ExperimentConfig]:
    """Read a TOML experiment file; paths are resolved against its directory."""
    path = Path(path)
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    section = raw["experiment"]
    kind = section["kind"].lower()
    if kind not in ("a", "b"):
        raise ValueError(f"experiment kind must be 'a' or 'b', got {kind!r}")
    base = path.parent

    def resolve(p):
        p = Path(p)
        return str(p if p.is_absolute() else (base / p))

    cfg = ExperimentConfig(
        corpus_path=resolve(section["corpus"]),
        lexicon_dir=resolve(section["lexicon"]),
        sentence_length=int(section["sentence_length"]),
        sentences_per_cell=int(section.get("sentences_per_cell", 12)),
        trials_per_sentence=int(section.get("trials_per_sentence", 50)),
        wdou_levels=tuple(float(x) for x in section.get("wdou_levels", (0.0, 0.5, 1.0))),
        mask_counts=tuple(int(x) for x in section.get("mask_counts", ())),
        variants=int(section.get("variants", DEFAULT_VARIANT_COUNT)),
        top_k=int(section.get("top_k", DEFAULT_TOP_K)),
        base_seed=int(section.get("base_seed", 42)),
        smoothing=bool(section.get("smoothing", False)),
        workers=int(section.get("workers", 1)),
    )
    return kind, cfg


@dataclass(frozen=True)
class CellResult:
    wdou_level: float
    mask_count: int
    mean_sdou: float
    std_sdou: float
    trials: int
    baseline_mean: Optional[float] = None
    optimized_mean: Optional[float] = None


@dataclass(frozen=True)
class ExperimentResult:
    experiment: str
    rows: tuple


# --- runners --------------------------------------------------------------------


def _select_sentences(cfg: ExperimentConfig) -> list[str]:
    sentences = filter_by_length(load_corpus(cfg.corpus_path), cfg.sentence_length)
    if len(sentences) < cfg.sentences_per_cell:
        raise InsufficientCorpusError(
            f"corpus has {len(sentences)} sentences of length {cfg.sentence_length}, "
            f"need {cfg.sentences_per_cell}"
        )
    return sentences[: cfg.sentences_per_cell]


def _run_tasks(tasks, worker, workers: int):
    """Evaluate worker over tasks, preserving task order in the result list."""
    if workers <= 1:
        return [worker(task) for task in tasks]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, tasks))


def _session_policy() -> SenderPolicy:
    # Experiments measure a single exchange; retries are a protocol feature
    # studied separately. The sender transmits the sentence itself.
    return SenderPolicy(max_rounds=1, reference_mode="original")


def run_experiment_a(
    cfg: ExperimentConfig,
    db: Optional[LexicalDatabase] = None,
    embedder=None,
) -> ExperimentResult:
    """Mean SDoU per (understanding level, mask count) cell.

    The embedder defaults to the environment-selected provider: the
    deterministic bag of synsets, or the model server when
    SEMCOM_MODEL_SERVER_URL is set.
    """
    db = db or load_lexicon_dir(cfg.lexicon_dir)
    sentences = _select_sentences(cfg)
    providers = Providers(
        embedder=embedder or default_embedder(db), paraphraser=SynonymParaphraser(db)
    )
    policy = _session_policy()
    paraphraser = providers.paraphraser if cfg.smoothing else None

    def one_trial(task):
        level, mask, s_idx, t_idx = task
        trial_seed = mix64(cfg.base_seed, s_idx, t_idx)
        behavior = ImpairedReceiver(
            ImpairmentConfig(
                wdou_level=level, mask_count=mask, seed=trial_seed, smoothing=cfg.smoothing
            ),
            paraphraser,
        )
        report, _ = run_local_session(db, sentences[s_idx], providers, behavior, policy=policy)
        return report.dou.sim_s

    rows = []
    for level in cfg.wdou_levels:
        for mask in cfg.mask_counts:
            tasks = [
                (level, mask, s_idx, t_idx)
                for s_idx in range(len(sentences))
                for t_idx in range(cfg.trials_per_sentence)
            ]
            sims = _run_tasks(tasks, one_trial, cfg.workers)
            rows.append(
                CellResult(
                    wdou_level=level,
                    mask_count=mask,
                    mean_sdou=statistics.fmean(sims),
                    std_sdou=statistics.pstdev(sims),
                    trials=len(sims),
                )
            )
    return ExperimentResult("a", tuple(rows))


def run_experiment_b(
    cfg: ExperimentConfig,
    db: Optional[LexicalDatabase] = None,
    embedder=None,
) -> ExperimentResult:
    """Baseline vs paraphrase-optimized SDoU with every word masked."""
    db = db or load_lexicon_dir(cfg.lexicon_dir)
    sentences = _select_sentences(cfg)
    providers = Providers(
        embedder=embedder or default_embedder(db), paraphraser=SynonymParaphraser(db)
    )
    policy = _session_policy()

    def one_trial(task):
        level, s_idx, t_idx = task
        trial_seed = mix64(cfg.base_seed, s_idx, t_idx)
        sentence = sentences[s_idx]

        def trial(candidate: str) -> DouReport:
            behavior = ImpairedReceiver(
                ImpairmentConfig(
                    wdou_level=level, mask_all=True, seed=trial_seed, smoothing=cfg.smoothing
                )
            )
            report, _ = run_local_session(db, candidate, providers, behavior, policy=policy)
            return report.dou

        baseline = trial(sentence)
        variant_seed = mix64(trial_seed, _PARAPHRASE_STREAM)
        vs = synonym_paraphrase(db, sentence, cfg.variants, seed=variant_seed)
        top = filter_top_k(sentence, vs, providers.embedder, cfg.top_k)
        _, best = select_best_transmission(sentence, [v for v, _ in top], trial)
        return baseline.sim_s, best.sim_s

    rows = []
    for level in cfg.wdou_levels:
        tasks = [
            (level, s_idx, t_idx)
            for s_idx in range(len(sentences))
            for t_idx in range(cfg.trials_per_sentence)
        ]
        pairs = _run_tasks(tasks, one_trial, cfg.workers)
        base_sims = [p[0] for p in pairs]
        opt_sims = [p[1] for p in pairs]
        rows.append(
            CellResult(
                wdou_level=level,
                mask_count=cfg.sentence_length,
                mean_sdou=statistics.fmean(opt_sims),
                std_sdou=statistics.pstdev(opt_sims),
                trials=len(opt_sims),
                baseline_mean=statistics.fmean(base_sims),
                optimized_mean=statistics.fmean(opt_sims),
            )
        )
    return ExperimentResult("b", tuple(rows))


# --- reports --------------------------------------------------------------------

_BASE_COLUMNS = ("experiment", "wdou_level", "mask_count", "mean_sdou", "std_sdou", "trials")
_B_COLUMNS = _BASE_COLUMNS + ("baseline_mean", "optimized_mean")


def write_csv(result: ExperimentResult, path) -> None:
    """Fixed 6-decimal CSV; byte-identical across runs for equal configs."""
    if not result.rows:
        raise EmptyResultError("refusing to write an empty result")
    with_b = any(r.baseline_mean is not None for r in result.rows)
    columns = _B_COLUMNS if with_b else _BASE_COLUMNS
    lines = [",".join(columns)]
    for row in result.rows:
        cells = [
            result.experiment,
            f"{row.wdou_level:.6f}",
            str(row.mask_count),
            f"{row.mean_sdou:.6f}",
            f"{row.std_sdou:.6f}",
            str(row.trials),
        ]
        if with_b:
            cells.append("" if row.baseline_mean is None else f"{row.baseline_mean:.6f}")
            cells.append("" if row.optimized_mean is None else f"{row.optimized_mean:.6f}")
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path) -> ExperimentResult:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if len(lines) < 2:
        raise EmptyResultError(f"{path} holds no result rows")
    header = lines[0].split(",")
    rows = []
    experiment = ""
    for line in lines[1:]:
        values = dict(zip(header, line.split(",")))
        experiment = values["experiment"]
        rows.append(
            CellResult(
                wdou_level=float(values["wdou_level"]),
                mask_count=int(values["mask_count"]),
                mean_sdou=float(values["mean_sdou"]),
                std_sdou=float(values["std_sdou"]),
                trials=int(values["trials"]),
                baseline_mean=float(values["baseline_mean"]) if values.get("baseline_mean") else None,
                optimized_mean=float(values["optimized_mean"]) if values.get("optimized_mean") else None,
            )
        )
    return ExperimentResult(experiment, tuple(rows))


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def render_chart(result: ExperimentResult, path) -> None:
    """Self-contained SVG: one line per understanding level, y is mean SDoU."""
    if not result.rows:
        raise EmptyResultError("refusing to render an empty result")
    width, height = 640, 420
    left, right, top, bottom = 70, 170, 30, 50
    plot_w, plot_h = width - left - right, height - top - bottom
    masks = sorted({r.mask_count for r in result.rows})
    span = max(masks[-1] - masks[0], 1)

    def x_at(mask):
        return left + plot_w * (mask - masks[0]) / span

    def y_at(value):
        return top + plot_h * (1.0 - value)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + plot_h}" stroke="black"/>',
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" y2="{top + plot_h}" stroke="black"/>',
    ]
    for i in range(6):
        value = i / 5
        y = y_at(value)
        parts.append(
            f'<line x1="{left - 4}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{left - 8}" y="{y + 4:.2f}" font-size="12" text-anchor="end">{value:.1f}</text>'
        )
    for mask in masks:
        x = x_at(mask)
        parts.append(
            f'<line x1="{x:.2f}" y1="{top + plot_h}" x2="{x:.2f}" y2="{top + plot_h + 4}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{top + plot_h + 18}" font-size="12" text-anchor="middle">{mask}</text>'
        )
    parts.append(
        f'<text x="{left + plot_w / 2:.2f}" y="{height - 12}" font-size="13" '
        f'text-anchor="middle">masked words</text>'
    )
    parts.append(
        f'<text x="18" y="{top + plot_h / 2:.2f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 18 {top + plot_h / 2:.2f})">mean SDoU</text>'
    )
    levels = sorted({r.wdou_level for r in result.rows})
    for idx, level in enumerate(levels):
        color = _PALETTE[idx % len(_PALETTE)]
        series = sorted(
            (r for r in result.rows if r.wdou_level == level), key=lambda r: r.mask_count
        )
        points = [(x_at(r.mask_count), y_at(r.mean_sdou)) for r in series]
        if len(points) > 1:
            coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
            parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y in points:
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3.5" fill="{color}"/>')
        legend_y = top + 12 + 18 * idx
        parts.append(
            f'<rect x="{left + plot_w + 14}" y="{legend_y - 9}" width="12" height="12" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{left + plot_w + 32}" y="{legend_y + 2}" font-size="12">'
            f"WDoU {level * 100:.0f}%</text>"
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
