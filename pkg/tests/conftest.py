import pytest

from pal.difficulty import Difficulty
from pal.pipeline import AnswerKey, QuestionRecord, assemble_bank

# Three definitional sentences at 12.5 / 40.0 / 71.2 seconds with filler between.
FIXTURE_SRT = """1
00:00:10,000 --> 00:00:12,000
Welcome to the lecture on thermodynamics.

2
00:00:12,500 --> 00:00:16,000
Entropy is defined as the measure of disorder in a system.

3
00:00:20,000 --> 00:00:25,000
We will explore what that implies for engines.

4
00:00:40,000 --> 00:00:46,000
Enthalpy is defined as the total heat content of a system.

5
00:00:50,000 --> 00:00:55,000
For example, ice melting absorbs heat from the surroundings.

6
00:01:11,200 --> 00:01:15,000
Free energy is defined as the energy available to do useful work.
"""


@pytest.fixture
def fixture_srt() -> bytes:
    return FIXTURE_SRT.encode("utf-8")


def make_bank_records(n: int = 12) -> list[QuestionRecord]:
    """Synthetic bank cycling Easy/Medium/Hard, correct answer always index 0."""
    records = []
    for i in range(n):
        records.append(
            QuestionRecord(
                q=f"What is concept {i}?",
                a=AnswerKey((f"answer {i}", f"foil {i}a", f"foil {i}b"), 0),
                d=Difficulty(i % 3),
                t=float(10 * i),
                c=f"Context sentence for concept {i}.",
            )
        )
    return records


@pytest.fixture
def bank_bytes() -> bytes:
    return assemble_bank(make_bank_records(), "synthetic")
