"""Dictionary-based clinical concept recognition.

Concepts are matched by exact token-sequence lookup against a lexicon,
greedily (longest match first, left to right, no overlaps).  Each lexicon
entry carries a coarse semantic-type code; only the twelve types relevant
to trial eligibility are retained, anything else is rejected at load.
The only surface normalization is lowercasing, punctuation-insensitive
tokenization, and plural-s stripping, which keeps the matcher auditable.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import InputError

log = logging.getLogger(__name__)

# Retained semantic types: age group, cell, finding, disease or syndrome,
# hazardous substance, amino acid/protein, lab result, organism function,
# pharmacologic substance, quantitative concept, sign or symptom,
# therapeutic or preventive procedure.
RETAINED_SEMTYPES = frozenset(
    ["aggp", "cell", "fndg", "dsyn", "hops", "aapp", "lbtr", "orgf", "phsu", "qnco", "sosy", "topp"]
)

AFFIRMED = "affirmed"
NEGATED = "negated"

_WORD_RE = re.compile(r"[A-Za-z0-9]+")


class MalformedLexiconLine(InputError):
    pass


def word_tokens(text: str) -> list[tuple[int, int]]:
    """Character spans of the alphanumeric word runs in text."""
    return [(m.start(), m.end()) for m in _WORD_RE.finditer(text)]


def canonical_token(token: str) -> str:
    """Lowercase and strip a plural -s (but never -ss) from longer tokens."""
    t = token.lower()
    if len(t) >= 4 and t.endswith("s") and not t.endswith("ss"):
        t = t[:-1]
    return t


def canonical_tokens(text: str) -> tuple[str, ...]:
    return tuple(canonical_token(text[a:b]) for a, b in word_tokens(text))


@dataclass(frozen=True)
class LexiconEntry:
    surface: str
    preferred: str
    semtype: str


@dataclass
class TaggedEntity:
    """A concept mention located in source text."""

    text: str
    preferred: str
    semtype: str
    span: tuple[int, int]
    polarity: str = AFFIRMED


@dataclass
class Lexicon:
    """Concept entries indexed by their first canonical token."""

    entries: list[LexiconEntry] = field(default_factory=list)
    rejected: int = 0
    # first token -> [(token tuple, entry)], longest token tuple first
    _by_first: dict[str, list[tuple[tuple[str, ...], LexiconEntry]]] = field(
        default_factory=dict, repr=False
    )

    def add(self, entry: LexiconEntry) -> None:
        tokens = canonical_tokens(entry.surface)
        if not tokens:
            raise MalformedLexiconLine(f"surface {entry.surface!r} has no word tokens")
        self.entries.append(entry)
        bucket = self._by_first.setdefault(tokens[0], [])
        bucket.append((tokens, entry))
        bucket.sort(key=lambda item: len(item[0]), reverse=True)

    def __len__(self) -> int:
        return len(self.entries)


def load_lexicon(path: str | Path) -> Lexicon:
    """Load a TSV lexicon: ``surface<TAB>preferred<TAB>semtype``.

    Lines whose semantic type is outside the retained set are skipped and
    counted; '#' lines are comments.
    """
    lexicon = Lexicon()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise MalformedLexiconLine(
                    f"{path}:{lineno}: expected 3 tab-separated columns, got {len(parts)}"
                )
            surface, preferred, semtype = (p.strip() for p in parts)
            if semtype not in RETAINED_SEMTYPES:
                lexicon.rejected += 1
                continue
            lexicon.add(LexiconEntry(surface=surface.lower(), preferred=preferred, semtype=semtype))
    if lexicon.rejected:
        log.warning("%s: rejected %d entries with non-retained semantic types", path, lexicon.rejected)
    return lexicon


def default_lexicon() -> Lexicon:
    ref = resources.files("trialmatch.data") / "lexicon.tsv"
    with resources.as_file(ref) as path:
        return load_lexicon(path)


def tag(text: str, lexicon: Lexicon) -> list[TaggedEntity]:
    """Greedy longest-match concept tagging.

    Scans token positions left to right; at each position the longest
    matching lexicon surface wins and the scan resumes after it, so
    returned entities never overlap.  All entities come back affirmed.
    """
    spans = word_tokens(text)
    canon = [canonical_token(text[a:b]) for a, b in spans]
    entities: list[TaggedEntity] = []
    i = 0
    n = len(canon)
    while i < n:
        matched = None
        for tokens, entry in lexicon._by_first.get(canon[i], ()):
            length = len(tokens)
            if i + length <= n and tuple(canon[i : i + length]) == tokens:
                matched = (length, entry)
                break  # bucket is sorted longest-first
        if matched is None:
            i += 1
            continue
        length, entry = matched
        start = spans[i][0]
        end = spans[i + length - 1][1]
        entities.append(
            TaggedEntity(
                text=text[start:end],
                preferred=entry.preferred,
                semtype=entry.semtype,
                span=(start, end),
            )
        )
        i += length
    return entities
