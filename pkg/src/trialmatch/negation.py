"""Rule-based negation cue and scope detection.

An entity is negated when a pre-negation trigger precedes it within the
scope window (default 5 tokens) with no termination trigger in between,
or a post-negation trigger follows it within the window.  Pseudo-negation
phrases ("no increase", "not only", ...) block any pre/post trigger they
overlap.  Trigger phrases live in ``data/negation_triggers.tsv``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .concepts import AFFIRMED, NEGATED, TaggedEntity, word_tokens
from .errors import InputError, TrialMatchError

PRE_NEGATION = "pre_negation"
POST_NEGATION = "post_negation"
PSEUDO_NEGATION = "pseudo_negation"
TERMINATION = "termination"
TRIGGER_KINDS = frozenset([PRE_NEGATION, POST_NEGATION, PSEUDO_NEGATION, TERMINATION])

DEFAULT_SCOPE_WINDOW = 5
MAX_PHRASE_TOKENS = 5


class SpanOutOfRange(TrialMatchError):
    pass


@dataclass(frozen=True)
class NegationTrigger:
    phrase: tuple[str, ...]
    kind: str

    def __post_init__(self) -> None:
        if not self.phrase:
            raise InputError("empty trigger phrase")
        if len(self.phrase) > MAX_PHRASE_TOKENS:
            raise InputError(f"trigger phrase longer than {MAX_PHRASE_TOKENS} tokens: {self.phrase}")
        if self.kind not in TRIGGER_KINDS:
            raise InputError(f"unknown trigger kind {self.kind!r}")


@dataclass(frozen=True)
class PolarityAnnotation:
    entity_span: tuple[int, int]
    polarity: str
    trigger_span: tuple[int, int] | None = None


@dataclass
class TriggerSet:
    triggers: list[NegationTrigger] = field(default_factory=list)
    _by_first: dict[str, list[NegationTrigger]] = field(default_factory=dict, repr=False)

    def add(self, trigger: NegationTrigger) -> None:
        self.triggers.append(trigger)
        self._by_first.setdefault(trigger.phrase[0], []).append(trigger)

    def __len__(self) -> int:
        return len(self.triggers)

    @classmethod
    def load(cls, path: str | Path) -> "TriggerSet":
        """Load a TSV trigger file: ``phrase<TAB>kind``, '#' comments."""
        triggers = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise InputError(f"{path}:{lineno}: expected 'phrase<TAB>kind'")
                phrase = tuple(parts[0].strip().lower().split())
                triggers.add(NegationTrigger(phrase=phrase, kind=parts[1].strip()))
        return triggers

    @classmethod
    def default(cls) -> "TriggerSet":
        ref = resources.files("trialmatch.data") / "negation_triggers.tsv"
        with resources.as_file(ref) as path:
            return cls.load(path)


def _trigger_matches(
    low_tokens: list[str], spans: list[tuple[int, int]], triggers: TriggerSet
) -> list[tuple[int, int, str, tuple[int, int]]]:
    """All trigger occurrences as (first token, last token, kind, char span)."""
    matches = []
    n = len(low_tokens)
    for i in range(n):
        for trig in triggers._by_first.get(low_tokens[i], ()):
            length = len(trig.phrase)
            if i + length <= n and tuple(low_tokens[i : i + length]) == trig.phrase:
                matches.append((i, i + length - 1, trig.kind, (spans[i][0], spans[i + length - 1][1])))
    return matches


def detect(
    sentence: str,
    entities: list[TaggedEntity],
    triggers: TriggerSet,
    window: int = DEFAULT_SCOPE_WINDOW,
) -> list[PolarityAnnotation]:
    """Assign a polarity to every entity of one sentence.

    Returns one annotation per input entity, in input order; polarity
    depends only on spans, never on list order.
    """
    spans = word_tokens(sentence)
    low = [sentence[a:b].lower() for a, b in spans]
    matches = _trigger_matches(low, spans, triggers)

    pseudo = [(s, e) for s, e, kind, _ in matches if kind == PSEUDO_NEGATION]

    def blocked(s: int, e: int) -> bool:
        return any(s <= pe and e >= ps for ps, pe in pseudo)

    pre = [(s, e, cs) for s, e, kind, cs in matches if kind == PRE_NEGATION and not blocked(s, e)]
    post = [(s, e, cs) for s, e, kind, cs in matches if kind == POST_NEGATION and not blocked(s, e)]
    term = [(s, e) for s, e, kind, _ in matches if kind == TERMINATION]

    annotations: list[PolarityAnnotation] = []
    for entity in entities:
        start, end = entity.span
        if start < 0 or end > len(sentence) or end <= start:
            raise SpanOutOfRange(f"entity span {entity.span} outside sentence of length {len(sentence)}")
        covered = [idx for idx, (a, b) in enumerate(spans) if a < end and b > start]
        if not covered:
            annotations.append(PolarityAnnotation((start, end), AFFIRMED))
            continue
        first, last = covered[0], covered[-1]

        trigger_span = None
        # Nearest pre-negation trigger ahead of the entity, scope not cut
        # by a termination trigger sitting strictly between the two.
        for s, e, cs in sorted(pre, key=lambda m: -m[1]):
            if e < first and first - e <= window:
                if any(e < ts and te < first for ts, te in term):
                    continue
                trigger_span = cs
                break
        if trigger_span is None:
            for s, e, cs in sorted(post, key=lambda m: m[0]):
                if s > last and s - last <= window:
                    trigger_span = cs
                    break

        if trigger_span is None:
            annotations.append(PolarityAnnotation((start, end), AFFIRMED))
        else:
            annotations.append(PolarityAnnotation((start, end), NEGATED, trigger_span))
    return annotations


def apply_polarity(
    sentence: str,
    entities: list[TaggedEntity],
    triggers: TriggerSet,
    window: int = DEFAULT_SCOPE_WINDOW,
) -> list[TaggedEntity]:
    """Run detect() and write the polarities back onto the entities."""
    for entity, note in zip(entities, detect(sentence, entities, triggers, window)):
        entity.polarity = note.polarity
    return entities


_SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?])\s+(?=[A-Z0-9(])")
_BULLET_START = re.compile(r"\n\s*(?=(?:[-*•·]|\d{1,2}[.)]|\(\d{1,2}\))\s+)")


def segment_sentences(text: str) -> list[tuple[int, int]]:
    """Split text into sentence spans.

    Boundaries fall after sentence-final punctuation followed by a capital
    (or digit/parenthesis), and before bullet-item lines.  Returned spans
    are trimmed to non-whitespace, ordered, and non-overlapping.
    """
    if not text or not text.strip():
        return []
    cuts = {0, len(text)}
    for m in _SENTENCE_BOUNDARY.finditer(text):
        cuts.add(m.end())
    for m in _BULLET_START.finditer(text):
        cuts.add(m.end())
    ordered = sorted(cuts)
    spans: list[tuple[int, int]] = []
    for a, b in zip(ordered, ordered[1:]):
        chunk = text[a:b]
        lead = len(chunk) - len(chunk.lstrip())
        trail = len(chunk) - len(chunk.rstrip())
        if a + lead < b - trail:
            spans.append((a + lead, b - trail))
    return spans
