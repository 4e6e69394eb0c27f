"""Regenerates transcript.jsonl, annotations.json and events.json.

The timeline gives each scripted question a 30-second slot:

  base + 2 .. base + 8    interviewer asks (50 words, one clean window)
  base + 10               manual selection, in the four paraphrase slots
  base + 12 .. base + 20  interviewee answers (same 50-word text every time)
  base + 22               summary request, in slots 1 and 6

Six questions are asked verbatim (repeated to exactly 50 words, so the
window matches with similarity 1.0 and detection lands at base + 8); four
are asked as paraphrases whose vocabulary barely overlaps the script, so
no detection fires and the manual click counts as an override.  Expected
report: accuracy 6/10 = 0.60, four overrides, detection latencies
6, 5, 4, 6, 5, 4 seconds (mean 5.0).

Run from this directory: python3 make_fixture.py
"""

import json
from pathlib import Path

HERE = Path(__file__).parent

QUESTIONS = {
    "q1": "Which streaming service occupies most of your evening viewing hours?",
    "q2": "What originally convinced you to subscribe to that particular service?",
    "q3": "How many hours per week do you spend watching overall?",
    "q4": "Where do recommendations for fresh titles typically come from first?",
    "q5": "Do friends or family influence which shows you pick next?",
    "q6": "Does the platform homepage shape what you choose to watch?",
    "q7": "What frustrates you when browsing catalogs for something to enjoy?",
    "q8": "Have advertisements changed your viewing habits in any noticeable way?",
    "q9": "Would you recommend your primary service to a close colleague?",
    "q10": "Is there anything else about choosing content worth mentioning today?",
}

# each paraphrase is five ten-word sentences, vocabulary chosen to stay far
# below the 0.5 similarity threshold against every scripted question
PARAPHRASES = {
    "q3": ("Tell me roughly a weekly total spent with these apps. "
           "Give an honest ballpark figure covering weekdays plus weekend sessions. "
           "Include background play while cooking dinner and commuting each morning. "
           "Count tablet telephone television plus laptop screens together please now. "
           "Just a rough weekly figure would work fine here thanks."),
    "q5": ("Consider other people around here, perhaps relatives, nudging these selections. "
           "Think roommates, partners, group chats, and coworkers suggesting things nightly. "
           "Who pushed a title onto a queue during last month? "
           "Describe one memorable nudge received recently via text message please. "
           "Walk through who said it plus why it landed eventually."),
    "q8": ("Let's discuss commercials now, those breaks between episodes lately appearing. "
           "Did sponsored clips alter anything regarding nightly routines around screens? "
           "Some viewers report quitting after seeing repeated promotional spots nightly. "
           "Others simply upgrade toward pricier tiers without commercials included anywhere. "
           "Share whatever reaction feels accurate, even mild indifference counts here."),
    "q10": ("Before wrapping up, final thoughts deserve space right here now. "
            "Perhaps a topic we skipped deserves a quick mention still. "
            "Feel free raising anything overlooked during our conversation this afternoon. "
            "Small details count, even ones seeming trivial at first glance. "
            "Take a moment, gather thoughts, share whenever ready please everyone."),
}

ANSWER = ("Mostly dramas fill quiet nights after dinner during busy seasons. "
          "Long episodes help unwind once chores finish around nine slowly. "
          "Weekends bring movie marathons shared alongside popcorn bowls together happily. "
          "Subtitles stay on because accents vary across imported series often. "
          "Ratings guide selections whenever reviews look trustworthy enough online tonight.")

# ask-time offset within each slot for the verbatim questions; the detection
# lands at base + 8, so the latency is 8 minus this offset
ASK_OFFSETS = {"q1": 2, "q2": 3, "q4": 4, "q6": 2, "q7": 3, "q9": 4}

SUMMARY_SLOTS = (1, 6)


def main():
    segments, annotations, events = [], [], []
    for i, (qid, text) in enumerate(QUESTIONS.items(), start=1):
        base = 30.0 * (i - 1)
        if qid in PARAPHRASES:
            ask_text = PARAPHRASES[qid]
            annotations.append({"question_id": qid, "asked_at": base + 2.0})
            events.append({"kind": "manual_select", "t": base + 10.0,
                           "payload": {"question_id": qid}})
        else:
            words = text.split()
            assert len(words) == 10, (qid, len(words))
            ask_text = " ".join([text] * 5)
            annotations.append({"question_id": qid,
                                "asked_at": base + float(ASK_OFFSETS[qid])})
        segments.append({"start": base + 2.0, "end": base + 8.0,
                         "speaker": "interviewer", "text": ask_text,
                         "final": True})
        segments.append({"start": base + 12.0, "end": base + 20.0,
                         "speaker": "interviewee", "text": ANSWER,
                         "final": True})
        if i in SUMMARY_SLOTS:
            events.append({"kind": "request_summary", "t": base + 22.0,
                           "payload": {}})

    (HERE / "transcript.jsonl").write_text(
        "\n".join(json.dumps(s) for s in segments) + "\n")
    (HERE / "annotations.json").write_text(
        json.dumps(annotations, indent=2) + "\n")
    (HERE / "events.json").write_text(json.dumps(events, indent=2) + "\n")


if __name__ == "__main__":
    main()
