"""Shared fixtures and session-driving helpers."""

import pytest

from genjiko.genjimon import Judgment
from genjiko.session import (
    CALIBRATION_NEXT,
    DONE_SMELLING,
    FINISH_CALIBRATION,
    FINISH_DIALOGUE,
    START_CALIBRATION,
    ScentSequence,
    advance,
    confirm_judgment,
    create_session,
    propose_judgment,
    record_ai_prediction,
)


def drive_to_smelling(session, round_no=1):
    """Advance a fresh session to round_smelling(round_no)."""
    session = advance(session, START_CALIBRATION)
    for _ in range(4):
        session = advance(session, CALIBRATION_NEXT)
    session = advance(session, FINISH_CALIBRATION)
    for r in range(1, round_no):
        session = advance(session, DONE_SMELLING)
        if r == 1:
            session = advance(session, FINISH_DIALOGUE)
        else:
            session = propose_judgment(session, Judgment.new())
            session = confirm_judgment(session)
    return session


def one_hot(label, confidence=0.8):
    rest = (1 - confidence) / 4
    return tuple(confidence if i == label else rest for i in range(5))


def play_with_predictions(session, judgments, ai_labels):
    """Full game recording an AI distribution for every round."""
    session = drive_to_smelling(session)
    session = record_ai_prediction(session, 1, one_hot(ai_labels[0]))
    session = advance(session, DONE_SMELLING)
    session = advance(session, FINISH_DIALOGUE)
    for r, judgment in zip(range(2, 6), judgments):
        session = record_ai_prediction(session, r, one_hot(ai_labels[r - 1]))
        session = advance(session, DONE_SMELLING)
        session = propose_judgment(session, judgment)
        session = confirm_judgment(session)
    return session


@pytest.fixture
def basic_registry():
    return {
        "T1": ScentSequence.from_labels("seq-a", [0, 0, 1, 0, 1]),
        "T2": ScentSequence.from_labels("seq-b", [2, 2, 2, 2, 2]),
    }


@pytest.fixture
def fresh_session(basic_registry):
    return create_session("T1", basic_registry)
