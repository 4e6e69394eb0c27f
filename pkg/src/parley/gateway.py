"""Uniform gateway to model capabilities: embeddings, templated structured
completions, and streaming situation detection.

All prompt construction and raw-output parsing lives here; no other module
touches model text. The mock backend is a pure function of its inputs, which
is what makes whole-session replay byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import re
import string
from dataclasses import dataclass

import jsonschema
import numpy as np

from .errors import BackendUnavailable, GatewayError, SchemaError
from .script import SCRIPT_SCHEMA

TEMPLATE_IDS = ("script_parse", "summary", "situation_detect",
                "expand_probe", "expand_followup", "judge")

SITUATION_CODES = ("1.1", "1.2", "2.1", "2.2")

SITUATION_SCHEMA = {
    "type": "object",
    "required": ["situation", "number"],
    "properties": {
        "situation": {"type": "string", "minLength": 1},
        "number": {"enum": list(SITUATION_CODES)},
    },
}

JUDGE_SCHEMA = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["correctness", "specificity", "coverage"],
        "properties": {
            "correctness": {"type": "integer", "minimum": 1, "maximum": 5},
            "specificity": {"type": "integer", "minimum": 1, "maximum": 5},
            "coverage": {"type": "integer", "minimum": 1, "maximum": 5},
        },
    },
}

# Prompt bodies sent to live backends. The mock never reads them; adapters
# interpolate {slot} names before dispatch.
PROMPT_TEMPLATES = {
    "script_parse": (
        "Read this interview script and break it into stages, main questions,"
        " and subquestions. Respond with JSON only, shaped as a list of"
        ' {"category": str, "intro": str, "questions": [{"main_question": str,'
        ' "sub_questions": [{"sub_question": str}]}]}.\n\nScript:\n${script}'
    ),
    "summary": (
        "Here is a recent stretch of an interview transcript. Work out which"
        " speaker is the interviewee and reply with a short extractive summary"
        " of what they said that answers the interviewer, at most"
        " ${word_limit} words, no filler phrases.\n\nOngoing question:"
        " ${question}\n\nTranscript:\n${transcript}"
    ),
    "situation_detect": (
        "You are watching a semi-structured interview about: ${research_question}"
        " (background: ${background}). Watch for four moments worth flagging:"
        " 1.1 answer is vague, overly general, or leans on shared knowledge or"
        " jargon; 1.2 the interviewee hesitates, self-corrects, or sounds"
        " uncomfortable; 2.1 a new concept relevant to the research question"
        " comes up beyond the current question's scope; 2.2 the interviewee"
        " contradicts something they said earlier. Interviewer notes so far:"
        " ${user_notes}\n\nWhen one applies, reply with JSON"
        ' {"situation": one-sentence grounded content, "number": "1.1"|"1.2"|'
        '"2.1"|"2.2"}; otherwise reply with nothing.\n\nLatest dialogue:\n${delta}'
    ),
    "expand_probe": (
        "A probe-worthy moment was flagged: ${situation} (kind ${code})."
        " Given the conversation context, say whether to ask for clarification"
        " or to ask for evidence and an example, and phrase one concrete probe."
        "\n\nContext:\n${transcript}"
    ),
    "expand_followup": (
        "A follow-up-worthy moment was flagged: ${situation} (kind ${code})."
        " Pick a suitable follow-up strategy (repeat or paraphrase to confirm;"
        " request a definition; ask why; ask for specifics, a timeline, or an"
        " example; compare the conflicting statements) and phrase one concrete"
        " follow-up.\n\nContext:\n${transcript}"
    ),
    "judge": (
        "Rate each flagged interview moment from 1 to 5 on three criteria:"
        " correctness (supported by the transcript), specificity (pinpoints a"
        " concrete idea rather than a generic concept), and coverage (does not"
        " miss the important point of the exchange). Respond with a JSON list"
        ' of {"correctness": int, "specificity": int, "coverage": int}, one'
        " per moment, in order.\n\nMoments:\n${situations}\n\nTranscript:\n${transcript}"
    ),
}

TEMPLATE_SCHEMAS = {
    "script_parse": SCRIPT_SCHEMA,
    "situation_detect": SITUATION_SCHEMA,
    "judge": JUDGE_SCHEMA,
}

_SLOT_RE = re.compile(r"\$\{(\w+)\}")


def render_prompt(template_id: str, slots: dict) -> str:
    """Interpolate slots; every referenced slot must be filled."""
    if template_id not in PROMPT_TEMPLATES:
        raise GatewayError(f"unknown template {template_id!r}")
    body = PROMPT_TEMPLATES[template_id]
    referenced = set(_SLOT_RE.findall(body))
    missing = referenced - set(slots)
    if missing:
        raise GatewayError(f"unfilled slots for {template_id}: {sorted(missing)}")
    return string.Template(body).safe_substitute(
        {k: str(slots[k]) for k in referenced})


@dataclass(frozen=True)
class GatewayResult:
    request_id: str
    template_id: str
    raw_text: str
    payload: object | None
    latency: float


def _validate(template_id: str, raw_text: str):
    schema = TEMPLATE_SCHEMAS.get(template_id)
    if schema is None:
        return None
    try:
        payload = json.loads(raw_text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{template_id}: output is not valid JSON: {exc}")
    try:
        jsonschema.validate(payload, schema)
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"{template_id}: {exc.message}")
    return payload


def _stable_hash(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def hashed_bow_vector(text: str, dim: int) -> np.ndarray:
    """Deterministic hashed bag-of-words embedding, unit-normalized."""
    v = np.zeros(dim, dtype=np.float64)
    for tok in re.findall(r"[a-z0-9']+", text.lower()):
        v[_stable_hash(tok) % dim] += 1.0
    norm = np.linalg.norm(v)
    if norm > 0:
        v /= norm
    return v


# -- rule-based situation detector (mock stand-in for the live model) --------

_FILLERS = {"well", "um", "uh", "er", "hmm", "i", "mean", "not", "exactly",
            "actually"}
_FILLER_BIGRAMS = {("i", "mean"), ("not", "exactly"), ("or", "rather")}
_HEDGES = {"maybe", "probably", "generally", "usually", "somehow", "stuff",
           "things", "whatever", "depends", "necessary", "sometimes",
           "kind", "sort", "basically"}
_NEGATIONS = {"not", "don't", "dont", "never", "rarely", "few", "no",
              "hardly", "barely", "didn't", "didnt", "won't", "wont"}
_STOPWORDS = {"the", "a", "an", "and", "or", "but", "so", "to", "of", "in",
              "on", "for", "with", "at", "by", "from", "is", "are", "was",
              "were", "be", "been", "it", "its", "i", "you", "he", "she",
              "we", "they", "my", "your", "this", "that", "these", "those",
              "do", "does", "did", "have", "has", "had", "will", "would",
              "can", "could", "should", "me", "them", "us", "as", "about",
              "what", "when", "how", "why", "really", "very", "just", "like",
              "think", "know", "yes", "yeah", "no", "there", "here", "some",
              "lot", "time", "way", "say", "said", "get", "got", "want",
              "one", "thing", "things", "all", "also", "more", "most", "if",
              "because", "then", "now", "them"}


def _content_words(tokens: list[str]) -> list[str]:
    skip = _STOPWORDS | _NEGATIONS | _HEDGES
    return [t for t in tokens if t not in skip and len(t) > 2]


class RuleBasedObserver:
    """Deterministic detector behind the mock gateway's streaming interface.

    Heuristics, checked in priority order per utterance:
      2.2  a content word reappears with flipped negation polarity
      1.2  dense filler/hesitation markers or ellipses
      1.1  dense hedge words
      2.1  a burst of content words never seen before (and outside the
           script vocabulary, when one is provided)
    A stand-in for the live streaming model; not a claim of its quality.
    """

    def __init__(self, script_vocab: set[str] | None = None):
        self.script_vocab = {w.lower() for w in (script_vocab or set())}
        self._polarity: dict[str, bool] = {}  # word -> last seen negated?
        self._seen: set[str] = set()

    def observe(self, text: str) -> dict | None:
        raw = text.lower()
        tokens = re.findall(r"[a-z0-9']+|\.\.\.", raw)
        words = [t for t in tokens if t != "..."]
        content = _content_words(words)

        # polarity map for contrast detection
        negated_positions = {i for i, t in enumerate(words) if t in _NEGATIONS}
        contradiction = None
        for i, w in enumerate(words):
            if w in _STOPWORDS or len(w) <= 2 or w in _NEGATIONS or w in _HEDGES:
                continue
            neg = any(abs(i - j) <= 3 for j in negated_positions)
            if w in self._polarity and self._polarity[w] != neg and contradiction is None:
                contradiction = w
            self._polarity[w] = neg

        ellipses = raw.count("...")
        filler_hits = sum(1 for a, b in zip(words, words[1:])
                          if (a, b) in _FILLER_BIGRAMS)
        filler_hits += sum(1 for w in words if w in {"um", "uh", "er", "hmm", "well"})
        hedge_hits = sum(1 for w in words if w in _HEDGES)

        had_history = bool(self._seen)
        new_words = [w for w in content
                     if w not in self._seen and w not in self.script_vocab]
        self._seen.update(content)

        if contradiction is not None:
            return {"situation": f"apparent contradiction about "
                                 f"'{contradiction}' with an earlier statement",
                    "number": "2.2"}
        if ellipses + filler_hits >= 2:
            return {"situation": "interviewee hesitates and self-corrects, "
                                 "possible discomfort or deeper meaning",
                    "number": "1.2"}
        if hedge_hits >= 2 and words:
            return {"situation": "response stays vague and general, "
                                 "no specific steps described",
                    "number": "1.1"}
        if had_history and len(new_words) >= 3 and content:
            return {"situation": f"new theme around "
                                 f"'{new_words[0]}' emerged beyond the question",
                    "number": "2.1"}
        return None


# -- backends ----------------------------------------------------------------

class MockGateway:
    """Deterministic offline backend.

    ``canned`` maps (template_id, key) to raw response text, where key is the
    value of the slot named by _CANNED_KEY_SLOT (or a context hash); entries
    override the built-in behaviors, which exist so that every template works
    without fixtures.
    """

    _CANNED_KEY_SLOT = {"script_parse": "script", "summary": "transcript",
                        "situation_detect": "delta"}

    def __init__(self, dim: int = 512, canned: dict | None = None,
                 script_vocab: set[str] | None = None,
                 summary_word_limit: int = 7):
        self.dim = dim
        self.canned = dict(canned or {})
        self.summary_word_limit = summary_word_limit
        self._observer = RuleBasedObserver(script_vocab)
        self._request_counter = 0
        self.calls: list[tuple[str, str]] = []  # (template_id, key) audit trail

    # latency is a fixed constant so replay stays byte-identical
    MOCK_LATENCY = 0.0

    def _next_id(self) -> str:
        self._request_counter += 1
        return f"g{self._request_counter}"

    def embed(self, texts: list[str]) -> np.ndarray:
        if not texts:
            raise GatewayError("embed requires at least one text")
        return np.stack([hashed_bow_vector(t, self.dim) for t in texts])

    def complete(self, template_id: str, slots: dict) -> GatewayResult:
        render_prompt(template_id, slots)  # slot-completeness check
        key_slot = self._CANNED_KEY_SLOT.get(template_id)
        key = slots.get(key_slot, "") if key_slot else json.dumps(
            slots, sort_keys=True)
        self.calls.append((template_id, key))
        raw = self.canned.get((template_id, key))
        if raw is None:
            raw = self._default_response(template_id, slots)
        if template_id == "situation_detect" and not raw.strip():
            # the streaming detector legitimately emits nothing
            return GatewayResult(self._next_id(), template_id, raw, None,
                                 self.MOCK_LATENCY)
        # one reprompt retry on schema failure; the mock is deterministic, so
        # a bad response stays bad and the error surfaces after the retry
        try:
            payload = _validate(template_id, raw)
        except SchemaError:
            payload = _validate(template_id, raw)
        return GatewayResult(self._next_id(), template_id, raw, payload,
                             self.MOCK_LATENCY)

    def _default_response(self, template_id: str, slots: dict) -> str:
        if template_id == "summary":
            return self._mock_summary(slots)
        if template_id == "judge":
            return self._mock_judge(slots)
        if template_id in ("expand_probe", "expand_followup"):
            return self._mock_expand(template_id, slots)
        if template_id == "script_parse":
            return self._mock_script_parse(slots)
        if template_id == "situation_detect":
            payload = self._observer.observe(slots.get("delta", ""))
            return json.dumps(payload) if payload else ""
        raise GatewayError(f"unknown template {template_id!r}")

    def _mock_summary(self, slots: dict) -> str:
        # echo the interviewee's first words; lines are "speaker: text"
        words: list[str] = []
        for line in slots.get("transcript", "").splitlines():
            speaker, sep, text = line.partition(":")
            if sep and speaker.strip().lower() == "interviewee":
                words.extend(text.split())
        if not words:
            return ""
        return " ".join(words[: self.summary_word_limit])

    def _mock_judge(self, slots: dict) -> str:
        situations = [s for s in slots.get("situations", "").splitlines() if s]
        scores = []
        for s in situations:
            h = _stable_hash(s)
            scores.append({"correctness": 1 + h % 5,
                           "specificity": 1 + (h // 5) % 5,
                           "coverage": 1 + (h // 25) % 5})
        return json.dumps(scores)

    def _mock_expand(self, template_id: str, slots: dict) -> str:
        code = slots.get("code", "")
        situation = slots.get("situation", "")
        if template_id == "expand_probe":
            kind = ("ask for clarification" if code == "1.1"
                    else "acknowledge the hesitation, then gently ask for "
                         "evidence and an example")
            return f"Probe: {kind} — grounded in: ${situation}"
        kind = ("repeat or paraphrase the new concept to confirm, then request "
                "a definition" if code == "2.1"
                else "compare the two statements and ask which holds")
        return f"Follow-up: {kind} — grounded in: ${situation}"

    def _mock_script_parse(self, slots: dict) -> str:
        # naive line heuristic: short lines without '?' start stages,
        # '?' lines are main questions, indented '?' lines subquestions
        cats: list[dict] = []
        for line in slots.get("script", "").splitlines():
            if not line.strip():
                continue
            indented = line.startswith((" ", "\t"))
            stripped = line.strip()
            if "?" not in stripped and not indented:
                cats.append({"category": stripped, "intro": "", "questions": []})
                continue
            if not cats:
                cats.append({"category": "Interview", "intro": "", "questions": []})
            if indented and cats[-1]["questions"]:
                cats[-1]["questions"][-1]["sub_questions"].append(
                    {"sub_question": stripped})
            else:
                cats[-1]["questions"].append(
                    {"main_question": stripped, "sub_questions": []})
        return json.dumps([c for c in cats if c["questions"]])

    def observe_stream(self, delta: str, context: dict) -> list[dict]:
        """Zero or more situation payloads for a transcript delta."""
        slots = {"research_question": context.get("research_question", ""),
                 "background": context.get("background", ""),
                 "user_notes": context.get("user_notes", ""),
                 "delta": delta}
        result = self.complete("situation_detect", slots)
        if result.payload is None:
            return []
        return [result.payload]

class UnavailableGateway:
    """Stand-in used when a configured live backend cannot be reached; every
    call raises so callers exercise their degradation paths."""

    def embed(self, texts):
        raise BackendUnavailable("model backend is not reachable")

    def complete(self, template_id, slots):
        raise BackendUnavailable("model backend is not reachable")

    def observe_stream(self, delta, context):
        raise BackendUnavailable("model backend is not reachable")


def make_gateway(config, script_vocab: set[str] | None = None,
                 canned: dict | None = None):
    if config.backend == "mock":
        return MockGateway(dim=config.embedding_dim, canned=canned,
                           script_vocab=script_vocab,
                           summary_word_limit=config.summary_word_limit)
    if config.backend == "unavailable":
        return UnavailableGateway()
    raise GatewayError(f"unknown backend {config.backend!r}; vendor adapters "
                       "are configured by name once installed")
