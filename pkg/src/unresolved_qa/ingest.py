"""Stack Exchange dump ingestion.

Reads ``Posts.xml`` / ``Users.xml`` style dumps (one ``<row .../>`` element per
record, CamelCase attributes), links answers to their questions and question
owners, and applies the selection rules that define the labelled dataset.
"""

from __future__ import annotations

import enum
import io
import json
import logging
import xml.parsers.expat
from dataclasses import asdict, dataclass, field
from datetime import datetime, timedelta, timezone
from typing import BinaryIO, Iterable, Optional
from xml.sax.saxutils import escape

from .users import QuestionOutcome, UserProfile

LOGGER = logging.getLogger(__name__)

_ATTR_ENTITIES = {'"': "&quot;", "\n": "&#10;", "\r": "&#13;", "\t": "&#9;"}
_CHUNK = 1 << 16


class PostType(enum.Enum):
    QUESTION = 1
    ANSWER = 2


class Label(str, enum.Enum):
    RESOLVED = "Resolved"
    UNRESOLVED = "Unresolved"


class DumpParseError(ValueError):
    """The dump is not well-formed XML."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


class SelectionError(ValueError):
    """Selection rules cannot be applied to the given threads."""


@dataclass(frozen=True)
class RowError:
    index: int
    row_id: Optional[str]
    reason: str


@dataclass(frozen=True)
class PostRow:
    id: int
    post_type: PostType
    creation_date: datetime
    score: int = 0
    body: str = ""
    parent_id: Optional[int] = None
    accepted_answer_id: Optional[int] = None
    owner_user_id: Optional[int] = None
    answer_count: int = 0


@dataclass(frozen=True)
class UserRow:
    id: int
    reputation: int
    last_access_date: datetime


@dataclass(frozen=True)
class QuestionThread:
    question: PostRow
    answers: tuple[PostRow, ...]
    owner: Optional[UserProfile]
    label: Label
    best_answer_id: Optional[int]

    @property
    def id(self) -> int:
        return self.question.id

    def answer(self, answer_id: Optional[int]) -> Optional[PostRow]:
        for a in self.answers:
            if a.id == answer_id:
                return a
        return None

    def topic_answer(self) -> Optional[PostRow]:
        """The answer paired with the question for topic analysis.

        Accepted answer for resolved threads, most up-voted otherwise.
        """
        if self.label is Label.RESOLVED:
            return self.answer(self.question.accepted_answer_id)
        return self.answer(self.best_answer_id)


@dataclass(frozen=True)
class SelectionCriteria:
    analysis_date: datetime
    min_age_days: int = 183
    min_answers: int = 10

    def __post_init__(self):
        if self.min_age_days < 0:
            raise ValueError("min_age_days must be >= 0")
        if self.min_answers < 1:
            raise ValueError("min_answers must be >= 1")


@dataclass
class IngestReport:
    """Tallies of everything skipped or patched during ingestion."""

    post_row_errors: int = 0
    user_row_errors: int = 0
    dangling_answers: int = 0
    missing_accepted_answers: int = 0
    dropped_no_owner: int = 0
    dropped_age: int = 0
    dropped_answers: int = 0
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Dataset:
    criteria: SelectionCriteria
    threads: tuple[QuestionThread, ...]
    report: IngestReport = field(default_factory=IngestReport, compare=False)

    def counts(self) -> dict[str, int]:
        resolved = sum(1 for t in self.threads if t.label is Label.RESOLVED)
        return {
            "retained": len(self.threads),
            "resolved": resolved,
            "unresolved": len(self.threads) - resolved,
        }


# --- timestamps -------------------------------------------------------------


def parse_timestamp(text: str) -> datetime:
    dt = datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).replace(tzinfo=None).isoformat()


# --- XML parsing ------------------------------------------------------------


def _iter_rows(stream: BinaryIO) -> list[dict[str, str]]:
    rows: list[dict[str, str]] = []
    depth = 0
    roots = 0

    parser = xml.parsers.expat.ParserCreate()

    def start(name, attrs):
        nonlocal depth, roots
        if depth == 0:
            roots += 1
        elif depth == 1 and name == "row":
            rows.append(attrs)
        depth += 1

    def end(name):
        nonlocal depth
        depth -= 1

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    try:
        while True:
            chunk = stream.read(_CHUNK)
            if not chunk:
                break
            parser.Parse(chunk, False)
        parser.Parse(b"", True)
    except xml.parsers.expat.ExpatError as exc:
        raise DumpParseError(
            xml.parsers.expat.ErrorString(exc.code), parser.ErrorByteIndex
        ) from None
    if roots != 1:
        raise DumpParseError("expected a single root element", parser.CurrentByteIndex)
    return rows


def _opt_int(attrs: dict[str, str], key: str) -> Optional[int]:
    value = attrs.get(key)
    if value is None or value == "":
        return None
    return int(value)


def parse_posts(stream: BinaryIO) -> tuple[list[PostRow], list[RowError]]:
    """Parse a Posts dump into question and answer rows.

    Rows of any other post type are skipped silently. Rows that lack
    ``Id``, ``PostTypeId`` or ``CreationDate`` (or carry unparseable values)
    are skipped and returned as :class:`RowError` entries.
    """
    posts: list[PostRow] = []
    errors: list[RowError] = []
    for index, attrs in enumerate(_iter_rows(stream)):
        row_id = attrs.get("Id")
        missing = [k for k in ("Id", "PostTypeId", "CreationDate") if k not in attrs]
        if missing:
            errors.append(RowError(index, row_id, f"missing {', '.join(missing)}"))
            continue
        try:
            type_id = int(attrs["PostTypeId"])
            if type_id not in (1, 2):
                continue
            post_type = PostType(type_id)
            parent_id = _opt_int(attrs, "ParentId")
            if post_type is PostType.ANSWER and parent_id is None:
                errors.append(RowError(index, row_id, "answer without ParentId"))
                continue
            post = PostRow(
                id=int(attrs["Id"]),
                post_type=post_type,
                creation_date=parse_timestamp(attrs["CreationDate"]),
                score=int(attrs.get("Score") or 0),
                body=attrs.get("Body", ""),
                parent_id=parent_id if post_type is PostType.ANSWER else None,
                accepted_answer_id=(
                    _opt_int(attrs, "AcceptedAnswerId")
                    if post_type is PostType.QUESTION
                    else None
                ),
                owner_user_id=_opt_int(attrs, "OwnerUserId"),
                answer_count=int(attrs.get("AnswerCount") or 0),
            )
        except ValueError as exc:
            errors.append(RowError(index, row_id, f"bad value: {exc}"))
            continue
        if post.id <= 0:
            errors.append(RowError(index, row_id, "non-positive Id"))
            continue
        posts.append(post)
    return posts, errors


def parse_users(stream: BinaryIO) -> tuple[list[UserRow], list[RowError]]:
    users: list[UserRow] = []
    errors: list[RowError] = []
    for index, attrs in enumerate(_iter_rows(stream)):
        row_id = attrs.get("Id")
        missing = [
            k for k in ("Id", "Reputation", "LastAccessDate") if k not in attrs
        ]
        if missing:
            errors.append(RowError(index, row_id, f"missing {', '.join(missing)}"))
            continue
        try:
            user = UserRow(
                id=int(attrs["Id"]),
                reputation=int(attrs["Reputation"]),
                last_access_date=parse_timestamp(attrs["LastAccessDate"]),
            )
        except ValueError as exc:
            errors.append(RowError(index, row_id, f"bad value: {exc}"))
            continue
        if user.reputation < 0:
            errors.append(RowError(index, row_id, "negative Reputation"))
            continue
        users.append(user)
    return users, errors


def _row_xml(attrs: dict[str, object]) -> str:
    parts = [
        f'{k}="{escape(str(v), _ATTR_ENTITIES)}"' for k, v in attrs.items() if v is not None
    ]
    return "  <row " + " ".join(parts) + " />\n"


def write_posts(posts: Iterable[PostRow], stream: BinaryIO) -> None:
    out = io.TextIOWrapper(stream, encoding="utf-8", newline="\n")
    out.write('<?xml version="1.0" encoding="utf-8"?>\n<posts>\n')
    for p in posts:
        out.write(
            _row_xml(
                {
                    "Id": p.id,
                    "PostTypeId": p.post_type.value,
                    "ParentId": p.parent_id,
                    "AcceptedAnswerId": p.accepted_answer_id,
                    "CreationDate": format_timestamp(p.creation_date),
                    "Score": p.score,
                    "Body": p.body,
                    "OwnerUserId": p.owner_user_id,
                    "AnswerCount": p.answer_count if p.post_type is PostType.QUESTION else None,
                }
            )
        )
    out.write("</posts>\n")
    out.flush()
    out.detach()


def write_users(users: Iterable[UserRow], stream: BinaryIO) -> None:
    out = io.TextIOWrapper(stream, encoding="utf-8", newline="\n")
    out.write('<?xml version="1.0" encoding="utf-8"?>\n<users>\n')
    for u in users:
        out.write(
            _row_xml(
                {
                    "Id": u.id,
                    "Reputation": u.reputation,
                    "LastAccessDate": format_timestamp(u.last_access_date),
                }
            )
        )
    out.write("</users>\n")
    out.flush()
    out.detach()


# --- linking and selection --------------------------------------------------


def best_answer_id(answers: Iterable[PostRow]) -> Optional[int]:
    """Highest score; ties go to the earliest creation date, then lowest id."""
    best = min(
        answers,
        key=lambda a: (-a.score, a.creation_date, a.id),
        default=None,
    )
    return None if best is None else best.id


def link_threads(
    posts: Iterable[PostRow],
    users: Iterable[UserRow],
    report: Optional[IngestReport] = None,
) -> list[QuestionThread]:
    """Group answers under their questions and attach owner profiles.

    Owner profiles carry the outcome of every question the user asked in the
    dump, which is the universe the rejection ratio is computed over.
    """
    report = report if report is not None else IngestReport()
    posts = list(posts)
    questions: dict[int, PostRow] = {}
    answers: dict[int, list[PostRow]] = {}
    for p in posts:
        if p.post_type is PostType.QUESTION:
            questions[p.id] = p
            answers.setdefault(p.id, [])
    for p in posts:
        if p.post_type is PostType.ANSWER:
            if p.parent_id in questions:
                answers[p.parent_id].append(p)
            else:
                report.dangling_answers += 1

    labels: dict[int, Label] = {}
    for qid, q in questions.items():
        accepted = q.accepted_answer_id
        if accepted is not None and any(a.id == accepted for a in answers[qid]):
            labels[qid] = Label.RESOLVED
        else:
            labels[qid] = Label.UNRESOLVED
            if accepted is not None:
                report.missing_accepted_answers += 1
                report.warnings.append(
                    f"question {qid}: accepted answer {accepted} not found"
                )

    history: dict[int, list[QuestionOutcome]] = {}
    for qid in sorted(questions):
        owner = questions[qid].owner_user_id
        if owner is None:
            continue
        history.setdefault(owner, []).append(
            QuestionOutcome(
                question_id=qid,
                was_answered=bool(answers[qid]),
                was_resolved=labels[qid] is Label.RESOLVED,
            )
        )

    profiles = {
        u.id: UserProfile(
            user_id=u.id,
            reputation=u.reputation,
            last_access_date=u.last_access_date,
            question_history=tuple(history.get(u.id, ())),
        )
        for u in users
    }

    threads = []
    for qid in sorted(questions):
        q = questions[qid]
        thread_answers = tuple(sorted(answers[qid], key=lambda a: a.id))
        threads.append(
            QuestionThread(
                question=q,
                answers=thread_answers,
                owner=profiles.get(q.owner_user_id) if q.owner_user_id is not None else None,
                label=labels[qid],
                best_answer_id=best_answer_id(thread_answers),
            )
        )
    return threads


def apply_selection(
    threads: Iterable[QuestionThread],
    criteria: SelectionCriteria,
    report: Optional[IngestReport] = None,
) -> Dataset:
    """Keep threads old enough and answered often enough, ordered by question id."""
    report = report if report is not None else IngestReport()
    threads = list(threads)
    for t in threads:
        if t.question.creation_date > criteria.analysis_date:
            raise SelectionError(
                f"question {t.id} created {format_timestamp(t.question.creation_date)} "
                f"after analysis date {format_timestamp(criteria.analysis_date)}"
            )
    min_age = timedelta(days=criteria.min_age_days)
    kept = []
    for t in sorted(threads, key=lambda t: t.id):
        if t.owner is None:
            report.dropped_no_owner += 1
        elif criteria.analysis_date - t.question.creation_date < min_age:
            report.dropped_age += 1
        elif len(t.answers) < criteria.min_answers:
            report.dropped_answers += 1
        else:
            kept.append(t)
    return Dataset(criteria=criteria, threads=tuple(kept), report=report)


# --- dataset file -----------------------------------------------------------
#
# Line-delimited JSON. Line 1 is the header record
#   {"record": "header", "criteria": {...}, "counts": {...}, "ingest": {...}}
# followed by one {"record": "thread", ...} per retained question.


def _post_to_json(p: PostRow) -> dict:
    d = asdict(p)
    d["post_type"] = p.post_type.name.lower()
    d["creation_date"] = format_timestamp(p.creation_date)
    return d


def _post_from_json(d: dict) -> PostRow:
    d = dict(d)
    d["post_type"] = PostType[d["post_type"].upper()]
    d["creation_date"] = parse_timestamp(d["creation_date"])
    return PostRow(**d)


def _profile_to_json(u: UserProfile) -> dict:
    return {
        "user_id": u.user_id,
        "reputation": u.reputation,
        "last_access_date": format_timestamp(u.last_access_date),
        "question_history": [
            [q.question_id, q.was_answered, q.was_resolved] for q in u.question_history
        ],
    }


def _profile_from_json(d: dict) -> UserProfile:
    return UserProfile(
        user_id=d["user_id"],
        reputation=d["reputation"],
        last_access_date=parse_timestamp(d["last_access_date"]),
        question_history=tuple(QuestionOutcome(*h) for h in d["question_history"]),
    )


def dataset_lines(dataset: Dataset) -> Iterable[str]:
    report = asdict(dataset.report)
    report.pop("warnings")
    header = {
        "record": "header",
        "criteria": {
            "analysis_date": format_timestamp(dataset.criteria.analysis_date),
            "min_age_days": dataset.criteria.min_age_days,
            "min_answers": dataset.criteria.min_answers,
        },
        "counts": dataset.counts(),
        "ingest": report,
    }
    yield json.dumps(header, sort_keys=True)
    for t in dataset.threads:
        yield json.dumps(
            {
                "record": "thread",
                "question": _post_to_json(t.question),
                "answers": [_post_to_json(a) for a in t.answers],
                "owner": _profile_to_json(t.owner) if t.owner else None,
                "label": t.label.value,
                "best_answer_id": t.best_answer_id,
            },
            sort_keys=True,
        )


def read_dataset(lines: Iterable[str]) -> Dataset:
    it = iter(lines)
    try:
        header = json.loads(next(it))
    except StopIteration:
        raise ValueError("dataset file is empty") from None
    if header.get("record") != "header":
        raise ValueError("dataset file does not start with a header record")
    c = header["criteria"]
    criteria = SelectionCriteria(
        analysis_date=parse_timestamp(c["analysis_date"]),
        min_age_days=c["min_age_days"],
        min_answers=c["min_answers"],
    )
    report = IngestReport(**header.get("ingest", {}))
    threads = []
    for line in it:
        if not line.strip():
            continue
        rec = json.loads(line)
        if rec.get("record") != "thread":
            raise ValueError(f"unexpected record type {rec.get('record')!r}")
        threads.append(
            QuestionThread(
                question=_post_from_json(rec["question"]),
                answers=tuple(_post_from_json(a) for a in rec["answers"]),
                owner=_profile_from_json(rec["owner"]) if rec["owner"] else None,
                label=Label(rec["label"]),
                best_answer_id=rec["best_answer_id"],
            )
        )
    if len(threads) != header["counts"]["retained"]:
        raise ValueError(
            f"header says {header['counts']['retained']} threads, file has {len(threads)}"
        )
    return Dataset(criteria=criteria, threads=tuple(threads), report=report)
