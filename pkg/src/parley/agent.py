"""Co-interviewer agent: situation tags, 10-second-gap aggregation,
judge-based selection, pause-gated surfacing, and strategy expansion.

Window closure needs a timer tick: the gap rule closes a window by observing
the *absence* of arrivals, so a lone tag would otherwise stay open forever.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NonMonotonicTime, SchemaError
from .gateway import SITUATION_CODES

PROBE_CODES = ("1.1", "1.2")
FOLLOWUP_CODES = ("2.1", "2.2")


@dataclass(frozen=True)
class SituationTag:
    excerpt: str
    code: str
    arrival: float
    source_span: tuple[float, float] | None = None

    def __post_init__(self):
        if self.code not in SITUATION_CODES:
            raise SchemaError(f"situation code {self.code!r} out of scheme")
        if not self.excerpt.strip():
            raise SchemaError("situation excerpt is empty")


@dataclass
class SuggestionWindow:
    tags: list[SituationTag]
    opened_at: float
    closed_at: float | None = None

    @property
    def last_arrival(self) -> float:
        return self.tags[-1].arrival


@dataclass(frozen=True)
class JudgedSuggestion:
    tag: SituationTag
    correctness: int
    specificity: int
    coverage: int

    @property
    def total(self) -> int:
        return self.correctness + self.specificity + self.coverage


@dataclass
class Candidate:
    suggestion: JudgedSuggestion
    window_closed_at: float
    surfaced: bool = False


def parse_situation_payload(payload: dict, now: float,
                            span: tuple[float, float] | None = None) -> SituationTag:
    """Convert a schema-validated detection payload into a SituationTag,
    rejecting out-of-scheme codes."""
    return SituationTag(excerpt=str(payload["situation"]),
                        code=str(payload["number"]), arrival=now,
                        source_span=span)


class GapAggregator:
    """Groups arriving tags into windows by the gap rule: a window extends
    while consecutive arrivals are < gap seconds apart and closes once a gap
    of at least that length is observed (a gap of exactly the threshold
    closes). check_timeout() performs the absence-driven closure."""

    def __init__(self, gap_seconds: float = 10.0):
        self.gap_seconds = gap_seconds
        self._open: SuggestionWindow | None = None
        self._last_time: float | None = None

    def add(self, tag: SituationTag) -> SuggestionWindow | None:
        if self._last_time is not None and tag.arrival < self._last_time:
            raise NonMonotonicTime(
                f"tag at {tag.arrival} after one at {self._last_time}")
        self._last_time = tag.arrival
        closed = None
        if self._open is not None:
            if tag.arrival - self._open.last_arrival < self.gap_seconds:
                self._open.tags.append(tag)
                return None
            closed = self._close(tag.arrival)
        self._open = SuggestionWindow(tags=[tag], opened_at=tag.arrival)
        return closed

    def check_timeout(self, now: float) -> SuggestionWindow | None:
        """Close the open window once no tag has arrived for the gap length."""
        if self._open is None:
            return None
        if now - self._open.last_arrival >= self.gap_seconds:
            return self._close(now)
        return None

    def flush(self, now: float) -> SuggestionWindow | None:
        if self._open is None:
            return None
        return self._close(now)

    def _close(self, at: float) -> SuggestionWindow:
        window = self._open
        window.closed_at = at
        self._open = None
        return window

    @property
    def open_window(self) -> SuggestionWindow | None:
        return self._open


def select_candidate(suggestions: list[JudgedSuggestion]) -> JudgedSuggestion:
    """Argmax by total score; ties break to the earliest arrival."""
    return min(suggestions, key=lambda s: (-s.total, s.tag.arrival))


def judge_window(window: SuggestionWindow, transcript: str,
                 gateway) -> list[JudgedSuggestion]:
    """Score every tag in a closed window through the judge template."""
    if window.closed_at is None or not window.tags:
        raise ValueError("judge requires a closed, non-empty window")
    situations = "\n".join(t.excerpt for t in window.tags)
    result = gateway.complete("judge", {"situations": situations,
                                        "transcript": transcript})
    scores = result.payload
    if scores is None or len(scores) != len(window.tags):
        raise SchemaError("judge returned wrong number of score triples")
    return [JudgedSuggestion(tag=t, correctness=sc["correctness"],
                             specificity=sc["specificity"],
                             coverage=sc["coverage"])
            for t, sc in zip(window.tags, scores)]


def token_overlap(a: str, b: str) -> float:
    """Fraction of a's tokens that also occur in b."""
    ta = {t.lower().strip(".,!?") for t in a.split()}
    tb = {t.lower().strip(".,!?") for t in b.split()}
    ta.discard("")
    tb.discard("")
    if not ta:
        return 0.0
    return len(ta & tb) / len(ta)


class CandidateQueue:
    """Pending judged candidates awaiting a conversational pause.

    Newest window first; candidates expire unsurfaced after the configured
    staleness bound. A candidate whose excerpt overlaps an existing user tag
    or a previously surfaced suggestion beyond the duplicate threshold is
    dropped on arrival."""

    def __init__(self, expiry_seconds: float = 120.0,
                 duplicate_threshold: float = 0.6):
        self.expiry_seconds = expiry_seconds
        self.duplicate_threshold = duplicate_threshold
        self._pending: list[Candidate] = []
        self._surfaced_texts: list[str] = []

    def offer(self, suggestion: JudgedSuggestion, closed_at: float,
              known_texts: list[str]) -> bool:
        """Returns False when the candidate is suppressed as a duplicate."""
        for text in list(known_texts) + self._surfaced_texts:
            if token_overlap(suggestion.tag.excerpt, text) >= self.duplicate_threshold:
                return False
        self._pending.append(Candidate(suggestion, closed_at))
        return True

    def expire(self, now: float) -> list[Candidate]:
        expired = [c for c in self._pending
                   if now - c.window_closed_at > self.expiry_seconds]
        self._pending = [c for c in self._pending if c not in expired]
        return expired

    def pop_for_pause(self, now: float) -> Candidate | None:
        """At most one candidate per pause event, newest window first."""
        self.expire(now)
        if not self._pending:
            return None
        newest = max(self._pending, key=lambda c: c.window_closed_at)
        self._pending.remove(newest)
        newest.surfaced = True
        self._surfaced_texts.append(newest.suggestion.tag.excerpt)
        return newest

    @property
    def pending(self) -> list[Candidate]:
        return list(self._pending)


def expand_suggestion(code: str, excerpt: str, transcript: str,
                      gateway) -> str:
    """Fetch strategy text: probe branch for 1.x codes, follow-up branch for
    2.x codes."""
    template = "expand_probe" if code in PROBE_CODES else "expand_followup"
    result = gateway.complete(template, {"situation": excerpt, "code": code,
                                         "transcript": transcript})
    return result.raw_text
