"""Document model: registry trial records, patient topics, corpus persistence.

Trial XML is the registry export format: one record per file with
``id_info/nct_id``, ``brief_title`` and an ``eligibility`` block.  Topics
arrive as a single XML file of numbered free-text patient descriptions.
The corpus store is line-delimited JSON with a version header so a large
collection can be streamed instead of loaded wholesale.
"""

from __future__ import annotations

import json
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

from .criteria import Criteria, split_criteria
from .errors import InputError

STORE_MAGIC = "trialmatch-corpus"
STORE_VERSION = 1

GENDER_ALL = "all"
GENDER_MALE = "male"
GENDER_FEMALE = "female"
GENDER_UNSPECIFIED = "unspecified"


class MalformedXml(InputError):
    pass


class MissingId(InputError):
    pass


class DuplicateTopicId(InputError):
    pass


class FormatVersionMismatch(InputError):
    pass


@dataclass
class TrialDoc:
    """One parsed clinical trial record."""

    doc_id: str
    title: str = ""
    eligibility_raw: str | None = None
    criteria: Criteria | None = None
    gender: str = GENDER_ALL
    min_age_months: int | None = None
    max_age_months: int | None = None

    def __post_init__(self) -> None:
        if not self.doc_id:
            raise MissingId("trial document has an empty id")
        if (
            self.min_age_months is not None
            and self.max_age_months is not None
            and self.min_age_months > self.max_age_months
        ):
            raise InputError(
                f"{self.doc_id}: min age {self.min_age_months} months exceeds "
                f"max age {self.max_age_months} months"
            )


@dataclass(frozen=True)
class Topic:
    """A numbered patient description used as a query."""

    topic_id: int
    text: str

    def __post_init__(self) -> None:
        if self.topic_id <= 0:
            raise InputError(f"topic id must be positive, got {self.topic_id}")
        if not self.text.strip():
            raise InputError(f"topic {self.topic_id} has empty text")


@dataclass
class CorpusStats:
    total_parsed: int = 0
    dropped_no_criteria: int = 0


@dataclass
class Corpus:
    """Trials keyed by document id, plus ingest statistics."""

    trials: dict[str, TrialDoc] = field(default_factory=dict)
    stats: CorpusStats = field(default_factory=CorpusStats)

    def add(self, trial: TrialDoc) -> None:
        if trial.doc_id in self.trials:
            raise InputError(f"duplicate trial id {trial.doc_id}")
        self.trials[trial.doc_id] = trial
        self.stats.total_parsed += 1

    def __len__(self) -> int:
        return len(self.trials)


_AGE_RE = re.compile(r"^\s*(\d+)\s*(year|month|week|day|hour|minute)s?\s*$", re.IGNORECASE)

_AGE_TO_MONTHS: dict[str, Callable[[int], int]] = {
    "year": lambda n: n * 12,
    "month": lambda n: n,
    "week": lambda n: n * 12 // 52,
    "day": lambda n: n * 12 // 365,
    "hour": lambda n: 0,
    "minute": lambda n: 0,
}


def parse_age_months(value: str | None) -> int | None:
    """Normalize a registry age string ("18 Years", "6 Months") to months.

    Returns None for missing values and "N/A".
    """
    if value is None:
        return None
    text = value.strip()
    if not text or text.upper() in ("N/A", "NA", "NONE"):
        return None
    m = _AGE_RE.match(text)
    if not m:
        raise InputError(f"unrecognized age string {value!r}")
    return _AGE_TO_MONTHS[m.group(2).lower()](int(m.group(1)))


def _normalize_gender(value: str | None) -> str:
    if value is None:
        return GENDER_ALL
    text = value.strip().lower()
    if not text or text == "all":
        return GENDER_ALL
    if text == "male":
        return GENDER_MALE
    if text == "female":
        return GENDER_FEMALE
    return GENDER_UNSPECIFIED


def parse_trial_xml(data: bytes | str) -> TrialDoc:
    """Parse one registry trial record.

    Unknown elements are ignored.  The eligibility text is kept verbatim
    (outer whitespace trimmed) so downstream splitting sees the original
    line structure.
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise MalformedXml(f"unparseable trial XML: {exc}") from exc

    doc_id = (root.findtext("id_info/nct_id") or "").strip()
    if not doc_id:
        raise MissingId("trial record has no registry identifier")

    textblock = root.findtext("eligibility/criteria/textblock")
    eligibility_raw = textblock.strip() if textblock and textblock.strip() else None

    return TrialDoc(
        doc_id=doc_id,
        title=" ".join((root.findtext("brief_title") or "").split()),
        eligibility_raw=eligibility_raw,
        gender=_normalize_gender(root.findtext("eligibility/gender")),
        min_age_months=parse_age_months(root.findtext("eligibility/minimum_age")),
        max_age_months=parse_age_months(root.findtext("eligibility/maximum_age")),
    )


def parse_topics(data: bytes | str) -> list[Topic]:
    """Parse a topic file: ``<topics><topic number="N">text</topic>...``."""
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise MalformedXml(f"unparseable topic XML: {exc}") from exc

    topics: list[Topic] = []
    seen: set[int] = set()
    for node in root.iter("topic"):
        number = node.get("number")
        if number is None:
            raise MalformedXml("topic element without a number attribute")
        try:
            topic_id = int(number)
        except ValueError as exc:
            raise MalformedXml(f"non-integer topic number {number!r}") from exc
        if topic_id in seen:
            raise DuplicateTopicId(f"topic number {topic_id} appears twice")
        seen.add(topic_id)
        text = " ".join("".join(node.itertext()).split())
        topics.append(Topic(topic_id=topic_id, text=text))
    return topics


def drop_uncriterioned(corpus: Corpus, splitter: Callable[[str | None], Criteria] = split_criteria) -> Corpus:
    """Keep only trials whose eligibility text splits into ≥1 statement.

    Splitting results are stored on the retained trials; the dropped count
    accumulates in the stats.  Idempotent.
    """
    kept: dict[str, TrialDoc] = {}
    dropped = 0
    for doc_id, trial in corpus.trials.items():
        crit = trial.criteria if trial.criteria is not None else splitter(trial.eligibility_raw)
        if crit.is_empty():
            dropped += 1
            continue
        trial.criteria = crit
        kept[doc_id] = trial
    return Corpus(
        trials=kept,
        stats=CorpusStats(
            total_parsed=corpus.stats.total_parsed,
            dropped_no_criteria=corpus.stats.dropped_no_criteria + dropped,
        ),
    )


def _trial_to_record(trial: TrialDoc) -> dict:
    record: dict = {
        "doc_id": trial.doc_id,
        "title": trial.title,
        "eligibility_raw": trial.eligibility_raw,
        "gender": trial.gender,
        "min_age_months": trial.min_age_months,
        "max_age_months": trial.max_age_months,
    }
    if trial.criteria is not None:
        record["criteria"] = {
            "inclusion": list(trial.criteria.inclusion),
            "exclusion": list(trial.criteria.exclusion),
        }
    return record


def _trial_from_record(record: dict) -> TrialDoc:
    criteria = None
    if "criteria" in record:
        criteria = Criteria(
            inclusion=tuple(record["criteria"]["inclusion"]),
            exclusion=tuple(record["criteria"]["exclusion"]),
        )
    return TrialDoc(
        doc_id=record["doc_id"],
        title=record["title"],
        eligibility_raw=record["eligibility_raw"],
        criteria=criteria,
        gender=record["gender"],
        min_age_months=record["min_age_months"],
        max_age_months=record["max_age_months"],
    )


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write the corpus store: a header line, then one JSON record per trial.

    Trials are written in doc_id order so saves are byte-reproducible.
    """
    header = {
        "magic": STORE_MAGIC,
        "version": STORE_VERSION,
        "total_parsed": corpus.stats.total_parsed,
        "dropped_no_criteria": corpus.stats.dropped_no_criteria,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for doc_id in sorted(corpus.trials):
            fh.write(json.dumps(_trial_to_record(corpus.trials[doc_id]), sort_keys=True) + "\n")


def _read_store_header(path: str | Path, line: str) -> dict:
    try:
        header = json.loads(line)
    except json.JSONDecodeError as exc:
        raise FormatVersionMismatch(f"{path}: not a corpus store") from exc
    if not isinstance(header, dict) or header.get("magic") != STORE_MAGIC:
        raise FormatVersionMismatch(f"{path}: missing corpus store header")
    if header.get("version") != STORE_VERSION:
        raise FormatVersionMismatch(
            f"{path}: store version {header.get('version')} != {STORE_VERSION}"
        )
    return header


def iter_corpus_records(path: str | Path) -> Iterator[TrialDoc]:
    """Stream trials from a corpus store without materializing the corpus."""
    with open(path, encoding="utf-8") as fh:
        _read_store_header(path, fh.readline())
        for line in fh:
            if line.strip():
                yield _trial_from_record(json.loads(line))


def load_corpus(path: str | Path) -> Corpus:
    """Load a corpus store written by save_corpus; exact round-trip."""
    corpus = Corpus()
    with open(path, encoding="utf-8") as fh:
        header = _read_store_header(path, fh.readline())
        for line in fh:
            if line.strip():
                trial = _trial_from_record(json.loads(line))
                corpus.trials[trial.doc_id] = trial
    corpus.stats = CorpusStats(
        total_parsed=header.get("total_parsed", len(corpus.trials)),
        dropped_no_criteria=header.get("dropped_no_criteria", 0),
    )
    return corpus


def ingest_directory(
    trial_dir: str | Path,
    strict: bool = False,
    on_error: Callable[[Path, Exception], None] | None = None,
) -> Corpus:
    """Parse every ``*.xml`` file under a directory into a corpus.

    Malformed files are skipped (reported through on_error) unless strict.
    """
    corpus = Corpus()
    paths = sorted(Path(trial_dir).rglob("*.xml"))
    for path in paths:
        try:
            corpus.add(parse_trial_xml(path.read_bytes()))
        except InputError as exc:
            if strict:
                raise InputError(f"{path}: {exc}") from exc
            if on_error is not None:
                on_error(path, exc)
    return corpus
