"""Replay harness: drives recorded transcripts through the engine in virtual
time and computes session metrics.

Detection accuracy follows the study definition: correct detections divided
by scripted questions the interviewer actually asked, with manual overrides
counted as failures. Accuracy needs a ground-truth sidecar file annotating
which scripted question each interviewer utterance asked; without it the
harness reports only counts and latencies.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .config import EngineConfig
from .errors import ConfigError, ParleyError
from .ingest import TranscriptSegment
from .session import Session, input_event

# Desk-scale runs with the mock backend do not reproduce the live-deployment
# averages, which depended on vendor ASR/embedding models and human
# annotation; they are printed as a reference header only.
REFERENCE_FIGURES = {"detection_accuracy": 0.58, "detection_latency_s": 8.9,
                     "summary_latency_s": 4.2}


@dataclass
class MetricsReport:
    accuracy: float | None  # None = no annotations / nothing asked
    questions_asked: int
    correct_detections: int
    manual_overrides: int
    mean_detection_latency: float | None
    summary_count: int
    summary_failures: int
    mean_summary_latency: float | None
    manual_tag_count: int
    suggestion_count: int
    suggestions_per_code: dict[str, int]
    adopted_suggestions: int | None
    config: dict

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "questions_asked": self.questions_asked,
            "correct_detections": self.correct_detections,
            "manual_overrides": self.manual_overrides,
            "mean_detection_latency": self.mean_detection_latency,
            "summary_count": self.summary_count,
            "summary_failures": self.summary_failures,
            "mean_summary_latency": self.mean_summary_latency,
            "manual_tag_count": self.manual_tag_count,
            "suggestion_count": self.suggestion_count,
            "suggestions_per_code": dict(sorted(
                self.suggestions_per_code.items())),
            "adopted_suggestions": self.adopted_suggestions,
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_table(self) -> str:
        def fmt(v):
            if v is None:
                return "N/A"
            if isinstance(v, float):
                return f"{v:.3f}"
            return str(v)

        rows = [
            ("question detection accuracy", fmt(self.accuracy)),
            ("scripted questions asked", fmt(self.questions_asked)),
            ("correct detections", fmt(self.correct_detections)),
            ("manual overrides", fmt(self.manual_overrides)),
            ("mean detection latency (s)", fmt(self.mean_detection_latency)),
            ("summaries fulfilled", fmt(self.summary_count)),
            ("summaries failed", fmt(self.summary_failures)),
            ("mean summary latency (s)", fmt(self.mean_summary_latency)),
            ("manual tags", fmt(self.manual_tag_count)),
            ("suggestions surfaced", fmt(self.suggestion_count)),
            ("adopted suggestions", fmt(self.adopted_suggestions)),
        ]
        for code, n in sorted(self.suggestions_per_code.items()):
            rows.append((f"suggestions with code {code}", str(n)))
        width = max(len(r[0]) for r in rows)
        header = ("reference (live study averages, not reproduced here): "
                  f"accuracy {REFERENCE_FIGURES['detection_accuracy']}, "
                  f"detection latency {REFERENCE_FIGURES['detection_latency_s']} s, "
                  f"summary latency {REFERENCE_FIGURES['summary_latency_s']} s")
        lines = [header, "-" * len(header)]
        lines += [f"{name.ljust(width)}  {value}" for name, value in rows]
        return "\n".join(lines)


def load_segments(path: str | Path) -> list[TranscriptSegment]:
    """Line-delimited transcript records; one segment per line."""
    segments = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            segments.append(TranscriptSegment.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ParleyError(f"{path}:{lineno}: bad segment record: {exc}")
    return segments


def load_annotations(path: str | Path) -> list[dict]:
    """Sidecar ground truth: [{"question_id", "asked_at", "adopted"?}, ...]
    where asked_at is when the interviewer finished asking."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list):
        raise ParleyError("annotations must be a JSON list")
    for item in data:
        if "question_id" not in item or "asked_at" not in item:
            raise ParleyError("annotation needs question_id and asked_at")
    return data


def drive_session(session: Session, segments: list[TranscriptSegment],
                  extra_events: list[dict] | None = None,
                  tick_interval: float = 1.0,
                  tail_seconds: float = 15.0) -> Session:
    """Feed segments plus interleaved timer ticks in virtual-time order.
    extra_events (manual selects, tag/summary requests) merge in by time."""
    events = [input_event("segment", seg.end, seg.to_dict())
              for seg in segments]
    events.extend(extra_events or [])
    horizon = max((e["t"] for e in events), default=0.0) + tail_seconds
    n_ticks = int(math.floor(horizon / tick_interval))
    ticks = [input_event("timer_tick", round(i * tick_interval, 6))
             for i in range(1, n_ticks + 1)]
    merged = sorted(events + ticks, key=lambda e: (e["t"], e["kind"] == "timer_tick"))
    for ev in merged:
        session.apply(ev)
    return session


def compute_metrics(session: Session,
                    annotations: list[dict] | None = None) -> MetricsReport:
    """Derive the report from the session's event log."""
    log = session.log
    status_events = [ev for ev in log if ev.kind == "status_change"]

    accuracy = None
    correct = 0
    manual_overrides = 0
    latencies: list[float] = []
    asked = 0
    adopted = None
    if annotations is not None:
        asked = len(annotations)
        ordered = sorted(annotations, key=lambda a: a["asked_at"])
        for i, ann in enumerate(ordered):
            until = (ordered[i + 1]["asked_at"] if i + 1 < len(ordered)
                     else math.inf)
            hit = next((ev for ev in status_events
                        if ann["asked_at"] <= ev.t < until), None)
            if (hit is not None and hit.payload["source"] == "auto"
                    and hit.payload["question_id"] == ann["question_id"]):
                correct += 1
                latencies.append(hit.t - ann["asked_at"])
            elif hit is not None and hit.payload["source"] == "manual":
                manual_overrides += 1
        accuracy = correct / asked if asked else None
        if any("adopted" in ann for ann in annotations):
            adopted = sum(1 for ann in annotations if ann.get("adopted"))

    summary_ok = [ev for ev in log if ev.kind == "summary_fulfilled"]
    summary_failed = [ev for ev in log if ev.kind == "summary_failed"]
    requests = {ev.payload["request_id"]: ev.t
                for ev in log if ev.kind == "summary_request"}
    summary_latencies = [
        (ev.t - requests[ev.payload["request_id"]])
        + ev.payload.get("latency", 0.0)
        for ev in summary_ok if ev.payload["request_id"] in requests]

    suggestions = [ev for ev in log if ev.kind == "suggestion"]
    per_code: dict[str, int] = {}
    for ev in suggestions:
        code = ev.payload["tag"]["situation_code"]
        per_code[code] = per_code.get(code, 0) + 1

    manual_tags = sum(1 for ev in log if ev.kind == "tag"
                      and ev.payload.get("kind") == "manual")

    def mean(xs):
        return sum(xs) / len(xs) if xs else None

    return MetricsReport(
        accuracy=accuracy,
        questions_asked=asked,
        correct_detections=correct,
        manual_overrides=manual_overrides,
        mean_detection_latency=mean(latencies),
        summary_count=len(summary_ok),
        summary_failures=len(summary_failed),
        mean_summary_latency=mean(summary_latencies),
        manual_tag_count=manual_tags,
        suggestion_count=len(suggestions),
        suggestions_per_code=per_code,
        adopted_suggestions=adopted,
        config=session.config.to_dict(),
    )


def run(script_path: str | Path, transcript_path: str | Path,
        annotations_path: str | Path | None = None,
        config: EngineConfig | None = None,
        extra_events: list[dict] | None = None) -> tuple[Session, MetricsReport]:
    script_text = Path(script_path).read_text()
    segments = load_segments(transcript_path)
    annotations = (load_annotations(annotations_path)
                   if annotations_path else None)
    session = Session(script_text, config)
    drive_session(session, segments, extra_events)
    return session, compute_metrics(session, annotations)


def sweep(script_path: str | Path, transcript_path: str | Path,
          grid: dict[str, list], base_config: EngineConfig | None = None,
          annotations_path: str | Path | None = None) -> list[tuple[dict, MetricsReport]]:
    """One deterministic run per configuration in the cartesian grid."""
    base = base_config or EngineConfig()
    if not grid:
        return []
    keys = sorted(grid)
    results = []
    for values in itertools.product(*(grid[k] for k in keys)):
        overrides = dict(zip(keys, values))
        try:
            cfg = base.replace(**overrides)
        except (TypeError, ConfigError) as exc:
            raise ConfigError(f"bad sweep point {overrides}: {exc}")
        _, report = run(script_path, transcript_path, annotations_path, cfg)
        results.append((overrides, report))
    return results


# -- report rendering --------------------------------------------------------

def write_report(report: MetricsReport, out_dir: str | Path,
                 session: Session | None = None) -> list[Path]:
    """Write the delimited metrics file plus figures into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    csv_path = out / "metrics.csv"
    flat = report.to_dict()
    flat.pop("config")
    per_code = flat.pop("suggestions_per_code")
    for code, n in per_code.items():
        flat[f"suggestions_code_{code}"] = n
    lines = ["metric,value"]
    lines += [f"{k},{'' if v is None else v}" for k, v in flat.items()]
    csv_path.write_text("\n".join(lines) + "\n")
    written.append(csv_path)

    (out / "metrics.json").write_text(report.to_json() + "\n")
    written.append(out / "metrics.json")

    written.extend(render_figures(report, out, session))
    return written


def render_figures(report: MetricsReport, out_dir: Path,
                   session: Session | None = None) -> list[Path]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    fig, ax = plt.subplots(figsize=(5, 3))
    codes = ["1.1", "1.2", "2.1", "2.2"]
    counts = [report.suggestions_per_code.get(c, 0) for c in codes]
    ax.bar(codes, counts, color="#5b8dd9")
    ax.set_xlabel("situation code")
    ax.set_ylabel("suggestions surfaced")
    ax.set_title("Suggestions per situation code")
    fig.tight_layout()
    path = out_dir / "suggestions_per_code.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    if session is not None:
        fig, ax = plt.subplots(figsize=(7, 3))
        timer = session.stats.snapshot(session.now)
        names = [s.name for s in timer.stages]
        elapsed = [s.elapsed / 60.0 for s in timer.stages]
        ax.barh(names, elapsed, color="#d9a45b")
        ax.set_xlabel("minutes in stage")
        ax.set_title("Time allocation across stages")
        ax.invert_yaxis()
        fig.tight_layout()
        path = out_dir / "stage_time.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
