import pytest

from parley.config import EngineConfig
from parley.session import Session


BASIC_SCRIPT = """\
research_question: how people decide what to watch on streaming platforms
background: thesis project on sense of agency with streaming content choice
planned_minutes: 25

# Opening
Warm-up and context for the conversation.
- Why do you use streaming platforms on a typical evening?
  - What draws you back to them?
- How much time do you usually spend per session?

# Content Discovery
- How do you get recommendations for new shows?
  - Do friends or social media play a role?
  - Does the platform itself play a role?
- What frustrates you about finding something to watch?

# Closing
- Is there anything about choosing content we have not covered?
"""


@pytest.fixture
def basic_script():
    return BASIC_SCRIPT


@pytest.fixture
def config():
    return EngineConfig()


@pytest.fixture
def session(basic_script):
    return Session(basic_script)


def make_segment(start, end, speaker="interviewee", text="", final=True):
    return {"start": start, "end": end, "speaker": speaker, "text": text,
            "final": final}
