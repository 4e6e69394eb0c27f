"""Visual-timer model: per-stage elapsed time, overall progress against the
planned total, and interviewer/interviewee speaking balance.

Stage identity of a speech segment is the stage of the ongoing question at
segment end; before any question is ongoing, speech is attributed to the
first stage. Revisiting a stage accumulates into the same bucket. Overlapping
speech counts toward both speakers."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UnknownStage
from .ingest import INTERVIEWEE, INTERVIEWER, TranscriptSegment


@dataclass(frozen=True)
class StageView:
    name: str
    elapsed: float
    interviewer_seconds: float
    interviewee_seconds: float

    @property
    def interviewer_share(self) -> float | None:
        total = self.interviewer_seconds + self.interviewee_seconds
        if total == 0:
            return None
        return self.interviewer_seconds / total


@dataclass(frozen=True)
class TimerView:
    stages: tuple[StageView, ...]
    current_stage: str | None
    planned_total_seconds: float
    overall_elapsed: float

    @property
    def overall_interviewer_share(self) -> float | None:
        er = sum(s.interviewer_seconds for s in self.stages)
        ee = sum(s.interviewee_seconds for s in self.stages)
        if er + ee == 0:
            return None
        return er / (er + ee)

    def stage(self, name: str) -> StageView:
        for s in self.stages:
            if s.name == name:
                return s
        raise UnknownStage(name)

    def to_dict(self) -> dict:
        return {
            "current_stage": self.current_stage,
            "planned_total_seconds": self.planned_total_seconds,
            "overall_elapsed": self.overall_elapsed,
            "stages": [
                {"name": s.name, "elapsed": s.elapsed,
                 "interviewer_seconds": s.interviewer_seconds,
                 "interviewee_seconds": s.interviewee_seconds,
                 "interviewer_share": s.interviewer_share}
                for s in self.stages
            ],
        }


class TalkStats:
    """Mutable accumulator; snapshots are immutable TimerViews."""

    def __init__(self, stage_names: list[str], planned_minutes: float,
                 session_start: float = 0.0):
        if not stage_names:
            raise UnknownStage("no stages")
        self.stage_names = list(stage_names)
        self.planned_total_seconds = planned_minutes * 60.0
        self._elapsed = {name: 0.0 for name in stage_names}
        self._talk = {(name, spk): 0.0 for name in stage_names
                      for spk in (INTERVIEWER, INTERVIEWEE)}
        self.current_stage = stage_names[0]
        self._entered_at = session_start
        self._session_start = session_start

    def enter_stage(self, stage: str, now: float) -> None:
        if stage not in self._elapsed:
            raise UnknownStage(stage)
        if stage == self.current_stage:
            return
        self._elapsed[self.current_stage] += max(0.0, now - self._entered_at)
        self.current_stage = stage
        self._entered_at = now

    def record_speech(self, seg: TranscriptSegment) -> None:
        if not seg.final:
            return
        duration = seg.end - seg.start
        if duration <= 0:
            return
        if seg.speaker in (INTERVIEWER, INTERVIEWEE):
            self._talk[(self.current_stage, seg.speaker)] += duration
        # unknown speakers contribute to elapsed wall time only

    def snapshot(self, now: float) -> TimerView:
        views = []
        for name in self.stage_names:
            elapsed = self._elapsed[name]
            if name == self.current_stage:
                elapsed += max(0.0, now - self._entered_at)
            views.append(StageView(
                name=name, elapsed=elapsed,
                interviewer_seconds=self._talk[(name, INTERVIEWER)],
                interviewee_seconds=self._talk[(name, INTERVIEWEE)],
            ))
        return TimerView(
            stages=tuple(views),
            current_stage=self.current_stage,
            planned_total_seconds=self.planned_total_seconds,
            overall_elapsed=max(0.0, now - self._session_start),
        )
