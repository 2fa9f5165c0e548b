"""Degree-of-understanding arithmetic.

Word level: per-word sense agreement weighted by importance and by
normalized sense-count difficulty, summed. Sentence level: clamped cosine
between sentence vectors. The combined objective adds the two
misunderstanding terms; zero means perfect agreement on both levels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .lexicon import SynsetId
from .pipeline import WordUnit
from .similarity import SentenceVector, cosine


class LengthMismatchError(ValueError):
    pass


class DomainError(ValueError):
    pass


class EmptyUnitsError(ValueError):
    pass


@dataclass(frozen=True)
class MeaningSelection:
    """One chosen sense per word unit; None marks an unresolved choice."""

    choices: tuple

    def __len__(self) -> int:
        return len(self.choices)

    @property
    def resolved(self) -> bool:
        return all(c is not None for c in self.choices)

    @classmethod
    def for_units(cls, units: Sequence[WordUnit], choices: Sequence[Optional[SynsetId]]) -> "MeaningSelection":
        if len(units) != len(choices):
            raise LengthMismatchError(f"{len(choices)} choices for {len(units)} units")
        for unit, choice in zip(units, choices):
            if choice is not None and choice not in unit.candidates:
                raise DomainError(f"{choice} is not a candidate of {unit.surface!r}")
        return cls(tuple(choices))

    @classmethod
    def first_sense(cls, units: Sequence[WordUnit]) -> "MeaningSelection":
        """The conventional sender choice: each unit's first listed sense."""
        return cls(tuple(unit.candidates[0] for unit in units))


@dataclass(frozen=True)
class DifficultyVector:
    values: tuple

    def __len__(self) -> int:
        return len(self.values)


def match_vector(sel_s: MeaningSelection, sel_r: MeaningSelection) -> list[int]:
    """1 where both sides resolved the same sense, else 0."""
    if len(sel_s) != len(sel_r):
        raise LengthMismatchError(f"selections of length {len(sel_s)} vs {len(sel_r)}")
    return [
        1 if a is not None and b is not None and a == b else 0
        for a, b in zip(sel_s.choices, sel_r.choices)
    ]


def difficulty_vector(units: Sequence[WordUnit]) -> DifficultyVector:
    """Sense counts normalized to sum 1 over the filtered unit list."""
    if not units:
        raise EmptyUnitsError("difficulty weights are undefined on an empty unit list")
    counts = [unit.sense_count for unit in units]
    total = sum(counts)
    return DifficultyVector(tuple(c / total for c in counts))


def wdou(v: Sequence, u: Sequence, d) -> float:
    """Word-level degree of understanding: sum of v_i * u_i * d_i."""
    dv = d.values if isinstance(d, DifficultyVector) else tuple(d)
    if not (len(v) == len(u) == len(dv)):
        raise LengthMismatchError(f"lengths v={len(v)}, u={len(u)}, d={len(dv)}")
    total = 0
    for vi, ui, di in zip(v, u, dv):
        if not 0 <= ui <= 1:
            raise DomainError(f"importance {ui} outside [0, 1]")
        total += vi * ui * di
    return total


def sdou(a: SentenceVector, b: SentenceVector) -> float:
    """Sentence-level degree of understanding: cosine clamped to [0, 1]."""
    return min(1.0, max(0.0, cosine(a, b)))


def objective(sim_w: float, sim_s: float) -> float:
    """Total misunderstanding (1 - sim_w) + (1 - sim_s), in [0, 2]."""
    if not 0 <= sim_w <= 1:
        raise DomainError(f"sim_w {sim_w} outside [0, 1]")
    if not 0 <= sim_s <= 1:
        raise DomainError(f"sim_s {sim_s} outside [0, 1]")
    return (1.0 - sim_w) + (1.0 - sim_s)


@dataclass(frozen=True)
class DouReport:
    """Both understanding scores and the objective for one session."""

    sim_w: float
    sim_s: float
    objective_f: float
    rounds: int = 1
    word_detail: tuple = ()
    sim_s_vs_original: Optional[float] = None

    @classmethod
    def build(
        cls,
        sim_w: float,
        sim_s: float,
        rounds: int = 1,
        word_detail=(),
        sim_s_vs_original: Optional[float] = None,
    ) -> "DouReport":
        return cls(
            sim_w=sim_w,
            sim_s=sim_s,
            objective_f=objective(sim_w, sim_s),
            rounds=rounds,
            word_detail=tuple(word_detail),
            sim_s_vs_original=sim_s_vs_original,
        )

    def as_dict(self) -> dict:
        out = {
            "sim_w": self.sim_w,
            "sim_s": self.sim_s,
            "objective_f": self.objective_f,
            "rounds": self.rounds,
            "word_detail": [list(t) for t in self.word_detail],
        }
        if self.sim_s_vs_original is not None:
            out["sim_s_vs_original"] = self.sim_s_vs_original
        return out
