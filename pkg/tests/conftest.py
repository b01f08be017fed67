from datetime import datetime, timedelta, timezone

import pytest

from unresolved_qa.ingest import PostRow, PostType, UserRow

ANALYSIS = datetime(2015, 2, 18, tzinfo=timezone.utc)


def question(id, days_old=200, accepted=None, owner=1, score=0, body="<p>q</p>"):
    return PostRow(
        id=id,
        post_type=PostType.QUESTION,
        creation_date=ANALYSIS - timedelta(days=days_old),
        score=score,
        body=body,
        accepted_answer_id=accepted,
        owner_user_id=owner,
    )


def answer(id, parent, score=0, days_old=190, body="<p>a</p>", seconds=0):
    return PostRow(
        id=id,
        post_type=PostType.ANSWER,
        creation_date=ANALYSIS - timedelta(days=days_old) + timedelta(seconds=seconds),
        score=score,
        body=body,
        parent_id=parent,
    )


def user(id, reputation=10, days_since_access=0):
    return UserRow(id=id, reputation=reputation, last_access_date=ANALYSIS - timedelta(days=days_since_access))


@pytest.fixture
def analysis_date():
    return ANALYSIS


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_RESULTS: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[n])
