"""Streaming transcript ingestion.

Two structures are maintained from the same segment stream:

* a retrieval windower that emits a DialogueWindow once 50 accumulated final
  words can be extended to a sentence boundary, and
* a 30-second ring buffer of final segments for click-to-summarize.

Pause detection for text-only operation fires when no final words arrive for
the configured silence gap; explicit voice-activity events injected upstream
take precedence.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyBuffer, OutOfOrder

INTERVIEWER = "interviewer"
INTERVIEWEE = "interviewee"
UNKNOWN = "unknown"

_TERMINATORS = (".", "!", "?", '."', '!"', '?"', ".'", "!'", "?'")

# tokens that end in a period but do not end a sentence
ABBREVIATIONS = {
    "dr.", "mr.", "mrs.", "ms.", "prof.", "sr.", "jr.", "st.",
    "vs.", "etc.", "e.g.", "i.e.", "fig.", "no.", "dept.", "approx.",
    "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.",
    "sept.", "oct.", "nov.", "dec.",
}


@dataclass(frozen=True)
class TranscriptSegment:
    start: float
    end: float
    speaker: str = UNKNOWN
    text: str = ""
    final: bool = True

    def words(self) -> list[str]:
        return self.text.split()

    def to_dict(self) -> dict:
        return {"start": self.start, "end": self.end, "speaker": self.speaker,
                "text": self.text, "final": self.final}

    @staticmethod
    def from_dict(d: dict) -> "TranscriptSegment":
        return TranscriptSegment(float(d["start"]), float(d["end"]),
                                 d.get("speaker", UNKNOWN), d.get("text", ""),
                                 bool(d.get("final", True)))


@dataclass(frozen=True)
class DialogueWindow:
    segments: tuple[TranscriptSegment, ...]
    tokens: tuple[str, ...]
    closed_at_sentence_boundary: bool
    start: float
    end: float

    @property
    def word_count(self) -> int:
        return len(self.tokens)

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class WindowReady:
    window: DialogueWindow


@dataclass(frozen=True)
class PauseDetected:
    at: float


def is_sentence_end(token: str) -> bool:
    t = token.lower().strip()
    if not t.endswith(_TERMINATORS):
        return False
    return t not in ABBREVIATIONS


def detect_sentence_boundaries(tokens: list[str]) -> list[int]:
    """Indices i such that tokens[:i] ends a sentence (i.e. the boundary sits
    after tokens[i-1])."""
    return [i + 1 for i, tok in enumerate(tokens) if is_sentence_end(tok)]


@dataclass
class _PendingToken:
    token: str
    segment: TranscriptSegment


class TranscriptIngest:
    """Single-writer accumulator for segments; see module docstring."""

    def __init__(self, window_words: int = 50, ring_seconds: float = 30.0,
                 pause_seconds: float = 2.0, out_of_order_tolerance: float = 0.5):
        self.window_words = window_words
        self.ring_seconds = ring_seconds
        self.pause_seconds = pause_seconds
        self.out_of_order_tolerance = out_of_order_tolerance
        self.now = 0.0
        self._ring: list[TranscriptSegment] = []
        self._pending: list[_PendingToken] = []
        self._partial: TranscriptSegment | None = None
        self._last_final_end: float | None = None
        self._in_pause = False  # set once a pause fires, until speech resumes

    # -- segment intake -----------------------------------------------------

    def push_segment(self, seg: TranscriptSegment) -> list:
        """Accept a segment; returns pipeline triggers (WindowReady)."""
        if seg.start > seg.end:
            raise OutOfOrder(f"segment start {seg.start} > end {seg.end}")
        if (self._last_final_end is not None
                and seg.end < self._last_final_end - self.out_of_order_tolerance):
            raise OutOfOrder(
                f"segment end {seg.end} precedes last accepted end "
                f"{self._last_final_end} beyond tolerance")
        self.now = max(self.now, seg.end)
        if not seg.final:
            self._partial = seg  # revisions replace, never append
            return []
        self._partial = None
        self._last_final_end = seg.end
        self._in_pause = False
        self._ring.append(seg)
        self._trim_ring()
        for tok in seg.words():
            self._pending.append(_PendingToken(tok, seg))
        return self._drain_windows()

    def _drain_windows(self) -> list:
        triggers = []
        while True:
            window = self._try_cut()
            if window is None:
                break
            triggers.append(WindowReady(window))
        return triggers

    def _try_cut(self) -> DialogueWindow | None:
        if len(self._pending) < self.window_words:
            return None
        cut = None
        for i in range(self.window_words - 1, len(self._pending)):
            if is_sentence_end(self._pending[i].token):
                cut = i + 1
                break
        if cut is None:
            return None
        return self._emit(cut, closed=True)

    def _emit(self, cut: int, closed: bool) -> DialogueWindow:
        taken = self._pending[:cut]
        self._pending = self._pending[cut:]
        segs: list[TranscriptSegment] = []
        for pt in taken:
            if not segs or segs[-1] is not pt.segment:
                segs.append(pt.segment)
        return DialogueWindow(
            segments=tuple(segs),
            tokens=tuple(pt.token for pt in taken),
            closed_at_sentence_boundary=closed,
            start=segs[0].start,
            end=segs[-1].end,
        )

    def flush(self) -> list:
        """Emit whatever words remain at stream end as a final window."""
        if not self._pending:
            return []
        closed = is_sentence_end(self._pending[-1].token)
        return [WindowReady(self._emit(len(self._pending), closed=closed))]

    # -- ring buffer --------------------------------------------------------

    def _trim_ring(self) -> None:
        floor = self.now - self.ring_seconds
        self._ring = [s for s in self._ring if s.end >= floor]

    def window_last(self, horizon: float | None = None) -> DialogueWindow:
        """All segments overlapping [now - horizon, now], returned whole."""
        if horizon is None:
            horizon = self.ring_seconds
        if horizon <= 0:
            raise ValueError("horizon must be positive")
        floor = self.now - horizon
        segs = [s for s in self._ring if s.end >= floor and s.start <= self.now]
        if not segs:
            raise EmptyBuffer(f"no speech in the last {horizon:g} s")
        tokens = [t for s in segs for t in s.words()]
        return DialogueWindow(
            segments=tuple(segs), tokens=tuple(tokens),
            closed_at_sentence_boundary=bool(tokens) and is_sentence_end(tokens[-1]),
            start=segs[0].start, end=segs[-1].end,
        )

    # -- pause detection ----------------------------------------------------

    def check_pause(self, now: float) -> PauseDetected | None:
        """Called on timer ticks; fires once per silence stretch."""
        self.now = max(self.now, now)
        if self._last_final_end is None or self._in_pause:
            return None
        if now - self._last_final_end >= self.pause_seconds:
            self._in_pause = True
            return PauseDetected(at=now)
        return None

    @property
    def partial(self) -> TranscriptSegment | None:
        return self._partial

    @property
    def last_final_end(self) -> float | None:
        return self._last_final_end
