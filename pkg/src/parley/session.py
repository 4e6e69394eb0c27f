"""Orchestrating state machine: applies every event in order, derives
pipeline activity (windowing, detection, aggregation, judging, surfacing),
logs an append-only event stream, and produces snapshots.

All derived work runs synchronously inside apply(); with the mock backend
every derivation is a pure function of the inputs, so replaying the input
events of a recorded log reproduces the final snapshot byte for byte.
Timestamps come from the events themselves (virtual time), never from the
wall clock.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import agent as agent_mod
from . import capture as capture_mod
from . import script as script_mod
from . import tracker as tracker_mod
from .config import EngineConfig
from .errors import (ConfigError, CorruptLog, EmptyBuffer, GatewayError,
                     InsufficientContext, ParleyError)
from .gateway import make_gateway
from .ingest import (TranscriptSegment,
                     TranscriptIngest, WindowReady)
from .timing import TalkStats

PROTOCOL_VERSION = 1

# Events that originate outside the engine; replay re-applies exactly these
# and regenerates everything else.
INPUT_KINDS = frozenset({
    "genesis", "segment", "manual_select", "reorder", "create_tag",
    "delete_tag", "request_summary", "hover_expand", "timer_tick", "pause",
    "client_connect",
})

DERIVED_KINDS = frozenset({
    "window_ready", "detection", "discarded_detection", "status_change",
    "stage_enter", "tag", "summary_request", "summary_fulfilled",
    "summary_failed", "situation_tag", "suggestion_window_closed",
    "suggestion", "candidate_expired", "candidate_suppressed",
    "ratio_published", "error",
})


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    t: float
    kind: str
    payload: dict

    def to_json(self) -> str:
        return json.dumps({"seq": self.seq, "t": self.t, "kind": self.kind,
                           "payload": self.payload}, sort_keys=True)

    @staticmethod
    def from_json(line: str) -> "SessionEvent":
        d = json.loads(line)
        return SessionEvent(int(d["seq"]), float(d["t"]), d["kind"],
                            d["payload"])


def input_event(kind: str, t: float, payload: dict | None = None) -> dict:
    """Build an unsequenced input event for Session.apply()."""
    return {"kind": kind, "t": t, "payload": payload or {}}


class Session:
    """Single-threaded engine; see module docstring. In live deployments a
    bounded queue feeds apply() from socket readers and timers — the engine
    itself never blocks on I/O because the gateway is synchronous."""

    def __init__(self, script_text: str, config: EngineConfig | None = None,
                 gateway=None):
        self.config = (config or EngineConfig()).validate()
        self.hierarchy = script_mod.parse_script(script_text, gateway)
        if self.hierarchy.planned_minutes <= 0:
            raise ConfigError("planned interview time must be positive")
        self._script_text = script_text
        vocab = {w for q in self.hierarchy.all_questions()
                 for w in q.text.lower().split()}
        self.gateway = gateway or make_gateway(self.config, script_vocab=vocab)
        self.embeddings = tracker_mod.embed_script(self.hierarchy, self.gateway)
        self.ingest = TranscriptIngest(
            window_words=self.config.window_words,
            ring_seconds=self.config.ring_seconds,
            pause_seconds=self.config.pause_seconds,
            out_of_order_tolerance=self.config.out_of_order_tolerance)
        self.suspension = tracker_mod.SuspensionState(
            self.config.suspension_seconds)
        self.stats = TalkStats([st.name for st in self.hierarchy.stages],
                               self.hierarchy.planned_minutes)
        self.capture = capture_mod.CaptureStore(self.config.summary_word_limit)
        self.aggregator = agent_mod.GapAggregator(self.config.gap_seconds)
        self.candidates = agent_mod.CandidateQueue(
            self.config.candidate_expiry_seconds,
            self.config.duplicate_overlap_threshold)
        self.user_notes: list[str] = []  # forwarded tags/summaries, in order
        self.log: list[SessionEvent] = []
        self.now = 0.0
        self.current_opacity: float | None = None
        # first ratio publish lands at the first tick >= one cadence interval
        self._last_ratio_published: float = 0.0
        self._seq = 0
        self._log_sink = None
        self._record("genesis", 0.0, {
            "script": script_text,
            "config": self.config.to_dict(),
            "protocol": PROTOCOL_VERSION,
        })

    # -- log plumbing -------------------------------------------------------

    def attach_log_sink(self, fileobj) -> None:
        """Stream every already-recorded and future event to a file object."""
        self._log_sink = fileobj
        for ev in self.log:
            fileobj.write(ev.to_json() + "\n")

    def _record(self, kind: str, t: float, payload: dict) -> SessionEvent:
        self._seq += 1
        ev = SessionEvent(self._seq, t, kind, payload)
        self.log.append(ev)
        if self._log_sink is not None:
            self._log_sink.write(ev.to_json() + "\n")
        return ev

    # -- event application --------------------------------------------------

    def apply(self, event: dict) -> list[SessionEvent]:
        """Apply one input event; returns the derived events it produced.
        Module errors become error events and never crash the loop."""
        kind = event["kind"]
        t = float(event["t"])
        payload = event.get("payload", {})
        if kind not in INPUT_KINDS or kind == "genesis":
            self._record("error", t, {"message": f"unknown event kind {kind!r}",
                                      "event_kind": kind})
            return []
        self.now = max(self.now, t)
        self._record(kind, t, payload)
        mark = len(self.log)
        handler = getattr(self, f"_on_{kind}")
        try:
            handler(t, payload)
        except ParleyError as exc:
            self._record("error", t, {"message": str(exc),
                                      "event_kind": kind,
                                      "error": type(exc).__name__})
        return self.log[mark:]

    # -- handlers -----------------------------------------------------------

    def _on_segment(self, t: float, payload: dict) -> None:
        seg = TranscriptSegment.from_dict(payload)
        triggers = self.ingest.push_segment(seg)
        if seg.final:
            self.stats.record_speech(seg)
            self._observe_delta(seg)
        for trig in triggers:
            if isinstance(trig, WindowReady):
                self._on_window_ready(trig.window, t)

    def _on_window_ready(self, window, t: float) -> None:
        self._record("window_ready", t, {
            "word_count": window.word_count,
            "closed_at_sentence_boundary": window.closed_at_sentence_boundary,
            "start": window.start, "end": window.end,
        })
        det = tracker_mod.detect(window, self.embeddings, self.gateway,
                                 self.config.similarity_threshold)
        if det is None:
            return
        self._apply_detection(det, t)

    def _apply_detection(self, det, t: float) -> None:
        if self.suspension.blocks(det, t):
            self._record("discarded_detection", t, {
                "question_id": det.question_id, "similarity": det.similarity,
                "reason": "suspended"})
            return
        self._record("detection", t, {
            "question_id": det.question_id, "similarity": det.similarity,
            "opacity": det.opacity, "window_end": det.window_end})
        self.current_opacity = det.opacity
        self._set_ongoing(det.question_id, "auto", t)

    def _set_ongoing(self, qid: str, source: str, t: float) -> None:
        q = self.hierarchy.find(qid)
        already = q.status == script_mod.ONGOING
        self.hierarchy = script_mod.set_question_status(
            self.hierarchy, qid, script_mod.ONGOING, source)
        if not already:
            self._record("status_change", t, {
                "question_id": qid, "status": script_mod.ONGOING,
                "source": source})
        stage = self.hierarchy.stage_of(qid)
        if stage.name != self.stats.current_stage:
            self.stats.enter_stage(stage.name, t)
            self._record("stage_enter", t, {"stage": stage.name})

    def _on_manual_select(self, t: float, payload: dict) -> None:
        qid = payload["question_id"]
        self.hierarchy.find(qid)  # raises UnknownId before any state change
        self.suspension.on_manual(t)
        self.current_opacity = 1.0
        self._set_ongoing(qid, "manual", t)

    def _on_reorder(self, t: float, payload: dict) -> None:
        self.hierarchy = script_mod.reorder_question(
            self.hierarchy, payload["question_id"], int(payload["new_index"]))

    def _on_create_tag(self, t: float, payload: dict) -> None:
        tag = self.capture.create_manual_tag(
            payload.get("question_id"), payload["text"], t)
        self._record("tag", t, tag.to_dict())
        self._forward_note(f"interviewer note: {tag.text}")

    def _on_delete_tag(self, t: float, payload: dict) -> None:
        self.capture.delete_tag(payload["tag_id"])

    def _on_request_summary(self, t: float, payload: dict) -> None:
        window = self.ingest.window_last(self.config.ring_seconds)
        ongoing = self.hierarchy.ongoing()
        focus = ongoing.id if ongoing else None
        req = self.capture.issue_summary_request(window, focus, t)
        self._record("summary_request", t, {
            "request_id": req.id, "focus_question": focus,
            "window_start": window.start, "window_end": window.end})
        transcript = "\n".join(f"{s.speaker}: {s.text}"
                               for s in window.segments)
        question_text = self.hierarchy.find(focus).text if focus else ""
        try:
            result = self.gateway.complete("summary", {
                "transcript": transcript, "question": question_text,
                "word_limit": self.config.summary_word_limit})
        except GatewayError as exc:
            self.capture.fail_summary(req.id, str(exc))
            self._record("summary_failed", t, {"request_id": req.id,
                                               "error": str(exc)})
            return
        try:
            tag = self.capture.fulfill_summary(req.id, result.raw_text, t)
        except InsufficientContext:
            self._record("summary_failed", t, {
                "request_id": req.id, "error": "insufficient context",
                "latency": result.latency})
            return
        self._record("summary_fulfilled", t, {
            "request_id": req.id, "tag": tag.to_dict(),
            "latency": result.latency})
        self._forward_note(f"summary: {tag.text}")

    def _on_hover_expand(self, t: float, payload: dict) -> None:
        tag_id = payload["tag_id"]
        tag = next((x for x in self.capture.tags if x.id == tag_id), None)
        if tag is None or tag.kind != capture_mod.SUGGESTION:
            raise ParleyError(f"no suggestion tag {tag_id!r}")
        if tag.expansion is not None:
            return  # cached; no second gateway call
        transcript = self._recent_transcript()
        text = agent_mod.expand_suggestion(tag.situation_code, tag.text,
                                           transcript, self.gateway)
        self.capture.attach_expansion(tag_id, text)

    def _on_timer_tick(self, t: float, payload: dict) -> None:
        closed = self.aggregator.check_timeout(t)
        if closed is not None:
            self._judge_window(closed, t)
        for cand in self.candidates.expire(t):
            self._record("candidate_expired", t, {
                "excerpt": cand.suggestion.tag.excerpt})
        pause = self.ingest.check_pause(t)
        if pause is not None:
            self._surface(t)
        self._maybe_publish_ratio(t)

    def _on_pause(self, t: float, payload: dict) -> None:
        # explicit voice-activity pause from a vendor VAD; takes precedence
        # over the text-silence rule
        self._surface(t)

    def _on_client_connect(self, t: float, payload: dict) -> None:
        pass  # logged for the interaction record; no state change

    # -- co-interviewer pipeline --------------------------------------------

    def _observe_delta(self, seg: TranscriptSegment) -> None:
        context = {"research_question": self.hierarchy.research_question,
                   "background": self.hierarchy.background,
                   "user_notes": "\n".join(self.user_notes)}
        try:
            payloads = self.gateway.observe_stream(seg.text, context)
        except GatewayError as exc:
            self._record("error", seg.end, {"message": str(exc),
                                            "event_kind": "observe",
                                            "error": type(exc).__name__})
            return
        for payload in payloads:
            try:
                tag = agent_mod.parse_situation_payload(
                    payload, seg.end, span=(seg.start, seg.end))
            except ParleyError as exc:
                self._record("error", seg.end, {"message": str(exc),
                                                "event_kind": "situation"})
                continue
            self._record("situation_tag", seg.end, {
                "excerpt": tag.excerpt, "code": tag.code,
                "arrival": tag.arrival})
            closed = self.aggregator.add(tag)
            if closed is not None:
                self._judge_window(closed, seg.end)

    def _judge_window(self, window, t: float) -> None:
        self._record("suggestion_window_closed", t, {
            "opened_at": window.opened_at, "closed_at": window.closed_at,
            "size": len(window.tags)})
        try:
            judged = agent_mod.judge_window(window, self._recent_transcript(),
                                            self.gateway)
        except (GatewayError, ParleyError) as exc:
            self._record("error", t, {"message": str(exc),
                                      "event_kind": "judge",
                                      "error": type(exc).__name__})
            return
        best = agent_mod.select_candidate(judged)
        known = [x.text for x in self.capture.visible_tags()
                 if x.kind in (capture_mod.MANUAL, capture_mod.SUMMARY)]
        if not self.candidates.offer(best, window.closed_at, known):
            self._record("candidate_suppressed", t, {
                "excerpt": best.tag.excerpt, "reason": "duplicate"})

    def _surface(self, t: float) -> None:
        cand = self.candidates.pop_for_pause(t)
        if cand is None:
            return
        ongoing = self.hierarchy.ongoing()
        tag = self.capture.add_suggestion_tag(
            ongoing.id if ongoing else None,
            cand.suggestion.tag.excerpt, cand.suggestion.tag.code, t)
        self._record("suggestion", t, {
            "tag": tag.to_dict(), "total_score": cand.suggestion.total,
            "arrival": cand.suggestion.tag.arrival})

    def _forward_note(self, note: str) -> None:
        self.user_notes.append(note)

    def _recent_transcript(self) -> str:
        try:
            window = self.ingest.window_last(self.config.ring_seconds)
        except EmptyBuffer:
            return ""
        return "\n".join(f"{s.speaker}: {s.text}" for s in window.segments)

    def _maybe_publish_ratio(self, t: float) -> None:
        if t - self._last_ratio_published < self.config.ratio_cadence_seconds:
            return
        self._last_ratio_published = t
        self._record("ratio_published", t, self.stats.snapshot(t).to_dict())

    # -- snapshots ----------------------------------------------------------

    def snapshot(self) -> dict:
        """Pure function of the applied event prefix."""
        return {
            "protocol": PROTOCOL_VERSION,
            "now": self.now,
            "script": script_mod.script_to_json(self.hierarchy),
            "ongoing_opacity": self.current_opacity,
            "suspended_until": self.suspension.suspended_until,
            "timer": self.stats.snapshot(self.now).to_dict(),
            "tags": [tag.to_dict() for tag in self.capture.visible_tags()],
            "pending_suggestions": [
                {"excerpt": c.suggestion.tag.excerpt,
                 "code": c.suggestion.tag.code,
                 "total": c.suggestion.total,
                 "closed_at": c.window_closed_at}
                for c in self.candidates.pending
            ],
            "config": self.config.to_dict(),
        }

    def snapshot_json(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True)


# -- replay ------------------------------------------------------------------

def read_log(source) -> list[SessionEvent]:
    if isinstance(source, (str, Path)):
        lines = Path(source).read_text().splitlines()
    else:
        lines = [ln for ln in source]
    events = []
    for ln in lines:
        if not ln.strip():
            continue
        try:
            events.append(SessionEvent.from_json(ln))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise CorruptLog(f"unparseable log line: {exc}")
    expected = 1
    for ev in events:
        if ev.seq != expected:
            raise CorruptLog("sequence gap", seq=ev.seq)
        expected += 1
    return events


def replay(source, gateway=None) -> Session:
    """Rebuild a session by re-applying the input events of a recorded log.
    The genesis event carries the script and config, so the log alone is
    sufficient. Requires a deterministic (mock) backend for output events to
    regenerate identically."""
    events = read_log(source)
    if not events or events[0].kind != "genesis":
        raise CorruptLog("log does not start with a genesis event")
    genesis = events[0]
    config = EngineConfig(**genesis.payload["config"])
    session = Session(genesis.payload["script"], config, gateway)
    for ev in events[1:]:
        if ev.kind in INPUT_KINDS:
            session.apply({"kind": ev.kind, "t": ev.t, "payload": ev.payload})
    return session
