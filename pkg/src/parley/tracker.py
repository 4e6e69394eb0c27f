"""Ongoing-question tracking: dense retrieval over the script, confidence
display mapping, and arbitration between automatic detection and manual
selection (15-second suspension)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyScript
from .ingest import DialogueWindow
from .script import ScriptHierarchy


@dataclass(frozen=True)
class QuestionEmbeddings:
    question_ids: tuple[str, ...]
    vectors: np.ndarray  # (n, dim), rows unit-normalized
    model_tag: str = "mock-hashed-bow"


@dataclass(frozen=True)
class QuestionDetection:
    question_id: str
    similarity: float
    opacity: float
    window_end: float


def embed_script(h: ScriptHierarchy, gateway) -> QuestionEmbeddings:
    """One vector per question, main and sub; stage intros are context only
    and are not embedded."""
    questions = h.all_questions()
    if not questions:
        raise EmptyScript("hierarchy has no questions")
    vectors = gateway.embed([q.text for q in questions])
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return QuestionEmbeddings(
        question_ids=tuple(q.id for q in questions),
        vectors=vectors / norms,
    )


def detect_from_vector(vec: np.ndarray, emb: QuestionEmbeddings,
                       window_end: float,
                       threshold: float = 0.5) -> QuestionDetection | None:
    """Core retrieval step over a precomputed dialogue vector."""
    if vec.shape[0] != emb.vectors.shape[1]:
        raise DimensionMismatch(
            f"window dim {vec.shape[0]} != question dim {emb.vectors.shape[1]}")
    norm = np.linalg.norm(vec)
    if norm == 0:
        return None
    sims = emb.vectors @ (vec / norm)
    best = int(np.argmax(sims))  # np.argmax returns the first maximum
    s = float(sims[best])
    if s < threshold:
        return None
    return QuestionDetection(
        question_id=emb.question_ids[best],
        similarity=s,
        opacity=s * s,
        window_end=window_end,
    )


def detect(window: DialogueWindow, emb: QuestionEmbeddings, gateway,
           threshold: float = 0.5) -> QuestionDetection | None:
    """Argmax-by-cosine question for the window, iff the maximum similarity
    reaches the threshold. Ties break to earliest script order. Pure given
    the (deterministic) embedder."""
    vec = gateway.embed([window.text])[0]
    return detect_from_vector(vec, emb, window.end, threshold)


class SuspensionState:
    """Manual selection suspends automatic detection for a fixed interval.

    The interval is half-open [t, t + duration): a detection arriving exactly
    at t + duration is accepted. Detections whose window ended before the
    manual event are stale and rejected regardless."""

    def __init__(self, duration: float = 15.0):
        self.duration = duration
        self.suspended_until: float | None = None
        self.last_manual_at: float | None = None

    def on_manual(self, now: float) -> None:
        self.last_manual_at = now
        self.suspended_until = now + self.duration

    def blocks(self, det: QuestionDetection, now: float) -> bool:
        if self.suspended_until is not None and now < self.suspended_until:
            return True
        if self.last_manual_at is not None and det.window_end < self.last_manual_at:
            return True  # stale result from before the manual override
        return False
