"""Mixed-initiative information capture: manual tags and click-to-summarize
over the last 30 seconds, focused on the ongoing question.

Over-limit summaries are flagged rather than truncated: the word bound is a
prompt instruction, not a guarantee, and cutting could destroy meaning."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (AlreadyFulfilled, EmptyText, InsufficientContext,
                     UnknownRequest)
from .ingest import DialogueWindow

MANUAL = "manual"
SUMMARY = "summary"
SUGGESTION = "suggestion"


@dataclass(frozen=True)
class Tag:
    id: str
    question_id: str | None
    kind: str
    text: str
    created_at: float
    over_limit: bool = False
    source_request: str | None = None
    situation_code: str | None = None  # suggestion tags only
    expansion: str | None = None

    def to_dict(self) -> dict:
        return {"id": self.id, "question_id": self.question_id,
                "kind": self.kind, "text": self.text,
                "created_at": self.created_at, "over_limit": self.over_limit,
                "source_request": self.source_request,
                "situation_code": self.situation_code,
                "expansion": self.expansion}


@dataclass
class SummaryRequest:
    id: str
    issued_at: float
    window: DialogueWindow  # frozen at issue time
    focus_question: str | None
    state: str = "pending"  # pending | fulfilled | failed
    error: str | None = None


class CaptureStore:
    """Append-only tag store plus summary-request lifecycle. Deletion writes
    a tombstone rather than removing, preserving replay determinism."""

    def __init__(self, word_limit: int = 7):
        self.word_limit = word_limit
        self.tags: list[Tag] = []
        self.tombstones: set[str] = set()
        self.requests: dict[str, SummaryRequest] = {}
        self._tag_counter = 0
        self._request_counter = 0

    def _next_tag_id(self) -> str:
        self._tag_counter += 1
        return f"t{self._tag_counter}"

    def create_manual_tag(self, question_id: str | None, text: str,
                          now: float) -> Tag:
        if not text.strip():
            raise EmptyText("manual tag text is empty")
        tag = Tag(self._next_tag_id(), question_id, MANUAL, text, now)
        self.tags.append(tag)
        return tag

    def delete_tag(self, tag_id: str) -> None:
        if not any(t.id == tag_id for t in self.tags):
            raise UnknownRequest(tag_id)
        self.tombstones.add(tag_id)

    def visible_tags(self) -> list[Tag]:
        return [t for t in self.tags if t.id not in self.tombstones]

    # -- summary lifecycle --------------------------------------------------

    def issue_summary_request(self, window: DialogueWindow,
                              focus_question: str | None,
                              now: float) -> SummaryRequest:
        self._request_counter += 1
        req = SummaryRequest(f"s{self._request_counter}", now, window,
                             focus_question)
        self.requests[req.id] = req
        return req

    def fulfill_summary(self, request_id: str, text: str, now: float) -> Tag:
        req = self.requests.get(request_id)
        if req is None:
            raise UnknownRequest(request_id)
        if req.state != "pending":
            raise AlreadyFulfilled(request_id)
        if not text.strip():
            req.state = "failed"
            req.error = "insufficient context"
            raise InsufficientContext(request_id)
        req.state = "fulfilled"
        words = text.split()
        tag = Tag(self._next_tag_id(), req.focus_question, SUMMARY, text,
                  now, over_limit=len(words) > self.word_limit,
                  source_request=request_id)
        self.tags.append(tag)
        return tag

    def fail_summary(self, request_id: str, error: str) -> SummaryRequest:
        req = self.requests.get(request_id)
        if req is None:
            raise UnknownRequest(request_id)
        if req.state != "pending":
            raise AlreadyFulfilled(request_id)
        req.state = "failed"
        req.error = error
        return req

    def add_suggestion_tag(self, question_id: str | None, text: str,
                           code: str, now: float) -> Tag:
        tag = Tag(self._next_tag_id(), question_id, SUGGESTION, text, now,
                  situation_code=code)
        self.tags.append(tag)
        return tag

    def attach_expansion(self, tag_id: str, expansion: str) -> Tag:
        for i, t in enumerate(self.tags):
            if t.id == tag_id:
                updated = Tag(t.id, t.question_id, t.kind, t.text,
                              t.created_at, t.over_limit, t.source_request,
                              t.situation_code, expansion)
                self.tags[i] = updated
                return updated
        raise UnknownRequest(tag_id)
