"""Hierarchical interview script: parsing, serialization, and status updates.

The plain-text grammar (documented in docs/formats.md):

    research_question: <text>
    background: <text>
    planned_minutes: <number>

    # Stage name
    optional intro prose lines
    - main question
      - subquestion

Question ids are assigned in document order at parse time (q1, q2, ...)
and remain stable across reorders, so the event log survives drag-and-drop.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import EmptyScript, GrammarError, IndexOutOfRange, SchemaError, UnknownId

UNVISITED = "unvisited"
ONGOING = "ongoing"
VISITED = "visited"


@dataclass
class Question:
    id: str
    text: str
    kind: str  # "main" | "sub"
    parent: str | None = None
    status: str = UNVISITED
    status_source: str = "none"  # "auto" | "manual" | "none"


@dataclass
class Stage:
    name: str
    intro: str | None = None
    questions: list[Question] = field(default_factory=list)


@dataclass
class ScriptHierarchy:
    stages: list[Stage]
    planned_minutes: float = 30.0
    research_question: str = ""
    background: str = ""

    # -- lookup helpers -----------------------------------------------------

    def all_questions(self) -> list[Question]:
        return [q for st in self.stages for q in st.questions]

    def find(self, qid: str) -> Question:
        for q in self.all_questions():
            if q.id == qid:
                return q
        raise UnknownId(qid)

    def stage_of(self, qid: str) -> Stage:
        for st in self.stages:
            if any(q.id == qid for q in st.questions):
                return st
        raise UnknownId(qid)

    def ongoing(self) -> Question | None:
        for q in self.all_questions():
            if q.status == ONGOING:
                return q
        return None

    def siblings(self, qid: str) -> list[Question]:
        """The sibling list a question is ordered within: main questions of
        its stage, or subquestions of its parent."""
        q = self.find(qid)
        st = self.stage_of(qid)
        if q.kind == "main":
            return [s for s in st.questions if s.kind == "main"]
        return [s for s in st.questions if s.parent == q.parent]


def _clone(h: ScriptHierarchy) -> ScriptHierarchy:
    return ScriptHierarchy(
        stages=[Stage(st.name, st.intro, [replace(q) for q in st.questions])
                for st in h.stages],
        planned_minutes=h.planned_minutes,
        research_question=h.research_question,
        background=h.background,
    )


# -- structured grammar ------------------------------------------------------

_FRONT_KEYS = {"research_question", "background", "planned_minutes"}


def parse_structured_script(text: str) -> ScriptHierarchy:
    """Parse the plain-text grammar. Raises GrammarError with a line number
    on malformed nesting and EmptyScript when no questions are found."""
    front: dict[str, str] = {}
    stages: list[Stage] = []
    counter = 0
    last_main: Question | None = None
    intro_lines: list[str] = []

    def flush_intro():
        nonlocal intro_lines
        if stages and intro_lines:
            stages[-1].intro = " ".join(intro_lines)
        intro_lines = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line.strip():
            continue
        if line.startswith("# "):
            flush_intro()
            name = line[2:].strip()
            if not name:
                raise GrammarError("empty stage name", lineno)
            if any(st.name == name for st in stages):
                raise GrammarError(f"duplicate stage name {name!r}", lineno)
            stages.append(Stage(name))
            last_main = None
            continue
        if line.startswith("  - "):
            if last_main is None:
                raise GrammarError("subquestion without a main question", lineno)
            counter += 1
            stages[-1].questions.append(Question(
                id=f"q{counter}", text=line[4:].strip(), kind="sub",
                parent=last_main.id))
            continue
        if line.startswith("- "):
            if not stages:
                raise GrammarError("question before any stage heading", lineno)
            counter += 1
            q = Question(id=f"q{counter}", text=line[2:].strip(), kind="main")
            stages[-1].questions.append(q)
            last_main = q
            continue
        if not stages:
            key, sep, value = line.partition(":")
            if sep and key.strip() in _FRONT_KEYS:
                front[key.strip()] = value.strip()
                continue
            raise GrammarError(f"unrecognized front-matter line: {line!r}", lineno)
        # prose between a stage heading and its first question
        if last_main is None:
            intro_lines.append(line.strip())
            continue
        raise GrammarError(f"unrecognized line: {line!r}", lineno)

    flush_intro()
    if not any(st.questions for st in stages):
        raise EmptyScript("no questions found")
    for st in stages:
        if not st.questions:
            raise GrammarError(f"stage {st.name!r} has no questions")

    planned = 30.0
    if "planned_minutes" in front:
        try:
            planned = float(front["planned_minutes"])
        except ValueError:
            raise GrammarError("planned_minutes is not a number")
    if planned <= 0:
        raise GrammarError("planned_minutes must be positive")
    return ScriptHierarchy(
        stages=stages,
        planned_minutes=planned,
        research_question=front.get("research_question", ""),
        background=front.get("background", ""),
    )


def serialize_script(h: ScriptHierarchy) -> str:
    """Inverse of parse_structured_script on the documented grammar."""
    lines = []
    if h.research_question:
        lines.append(f"research_question: {h.research_question}")
    if h.background:
        lines.append(f"background: {h.background}")
    planned = h.planned_minutes
    lines.append(f"planned_minutes: {planned:g}")
    for st in h.stages:
        lines.append("")
        lines.append(f"# {st.name}")
        if st.intro:
            lines.append(st.intro)
        for q in st.questions:
            if q.kind == "main":
                lines.append(f"- {q.text}")
            else:
                lines.append(f"  - {q.text}")
    return "\n".join(lines) + "\n"


# -- freeform parse via the gateway ------------------------------------------

SCRIPT_SCHEMA = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["category", "questions"],
        "properties": {
            "category": {"type": "string"},
            "intro": {"type": "string"},
            "questions": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["main_question", "sub_questions"],
                    "properties": {
                        "main_question": {"type": "string"},
                        "sub_questions": {
                            "type": "array",
                            "items": {
                                "type": "object",
                                "required": ["sub_question"],
                                "properties": {"sub_question": {"type": "string"}},
                            },
                        },
                    },
                },
            },
        },
    },
}


def hierarchy_from_payload(payload, planned_minutes: float = 30.0,
                           research_question: str = "",
                           background: str = "") -> ScriptHierarchy:
    """Convert a schema-validated category/question payload into a hierarchy."""
    stages: list[Stage] = []
    counter = 0
    for cat in payload:
        st = Stage(cat["category"], intro=cat.get("intro") or None)
        for item in cat["questions"]:
            counter += 1
            main = Question(id=f"q{counter}", text=item["main_question"], kind="main")
            st.questions.append(main)
            for sub in item["sub_questions"]:
                counter += 1
                st.questions.append(Question(
                    id=f"q{counter}", text=sub["sub_question"], kind="sub",
                    parent=main.id))
        stages.append(st)
    if not any(st.questions for st in stages):
        raise EmptyScript("model returned no questions")
    return ScriptHierarchy(stages=stages, planned_minutes=planned_minutes,
                           research_question=research_question,
                           background=background)


def parse_freeform_script(text: str, gateway, planned_minutes: float = 30.0,
                          research_question: str = "",
                          background: str = "") -> ScriptHierarchy:
    """Parse an unstructured script through the model gateway. The model's
    output is schema-validated before conversion."""
    result = gateway.complete("script_parse", {"script": text})
    if result.payload is None:
        raise SchemaError("script parse output failed validation")
    return hierarchy_from_payload(result.payload, planned_minutes,
                                  research_question, background)


def parse_script(text: str, gateway=None, **kwargs) -> ScriptHierarchy:
    """Structured grammar first; fall back to the gateway parse when the
    grammar does not match and a gateway is available."""
    try:
        return parse_structured_script(text)
    except (GrammarError, EmptyScript):
        if gateway is None:
            raise
        return parse_freeform_script(text, gateway, **kwargs)


# -- mutation ----------------------------------------------------------------

def reorder_question(h: ScriptHierarchy, qid: str, new_index: int) -> ScriptHierarchy:
    """Move a question within its sibling list. Subquestions travel with
    their parent. Cross-parent moves are rejected."""
    out = _clone(h)
    q = out.find(qid)
    st = out.stage_of(qid)
    sibs = out.siblings(qid)
    if not 0 <= new_index < len(sibs):
        raise IndexOutOfRange(f"{new_index} not in [0, {len(sibs)})")
    old_index = [s.id for s in sibs].index(qid)
    if new_index == old_index:
        return out

    sib_order = [s for s in sibs if s.id != qid]
    sib_order.insert(new_index, q)

    rebuilt: list[Question] = []
    if q.kind == "main":
        subs_of = {m.id: [s for s in st.questions if s.parent == m.id]
                   for m in sibs}
        for m in sib_order:
            rebuilt.append(m)
            rebuilt.extend(subs_of[m.id])
    else:
        for s in st.questions:
            if s.kind == "sub" and s.parent == q.parent:
                continue
            rebuilt.append(s)
            if s.kind == "main" and s.id == q.parent:
                rebuilt.extend(sib_order)
    out.stages[out.stages.index(st)].questions = rebuilt
    return out


def set_question_status(h: ScriptHierarchy, qid: str, status: str,
                        source: str = "manual") -> ScriptHierarchy:
    """Set a question's status. Marking a question ongoing demotes the
    previously ongoing question to visited."""
    out = _clone(h)
    q = out.find(qid)
    if status == ONGOING:
        prev = out.ongoing()
        if prev is not None and prev.id != qid:
            prev.status = VISITED
    q.status = status
    q.status_source = source
    return out


def script_to_json(h: ScriptHierarchy) -> dict:
    return {
        "planned_minutes": h.planned_minutes,
        "research_question": h.research_question,
        "background": h.background,
        "stages": [
            {
                "name": st.name,
                "intro": st.intro,
                "questions": [
                    {"id": q.id, "text": q.text, "kind": q.kind,
                     "parent": q.parent, "status": q.status,
                     "status_source": q.status_source}
                    for q in st.questions
                ],
            }
            for st in h.stages
        ],
    }


def script_from_json(data: dict) -> ScriptHierarchy:
    return ScriptHierarchy(
        stages=[Stage(st["name"], st.get("intro"),
                      [Question(**q) for q in st["questions"]])
                for st in data["stages"]],
        planned_minutes=data.get("planned_minutes", 30.0),
        research_question=data.get("research_question", ""),
        background=data.get("background", ""),
    )
