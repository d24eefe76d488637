"""Split raw eligibility text into inclusion and exclusion statements.

Eligibility blocks follow a loose convention: an "Inclusion"-like heading,
criteria lines (often bulleted), then an "Exclusion"-like heading with more
lines.  The heading and bullet patterns are data, not code: they live in
``data/heading_rules.tsv`` and can be edited without touching the package.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import InputError

INCLUSION = "inclusion"
EXCLUSION = "exclusion"
NONE = "none"

# Sentence boundary: a final period/question/exclamation mark followed by
# whitespace and a capital letter, digit, or opening parenthesis.
_SENT_SPLIT = re.compile(r"(?<=[.!?])\s+(?=[A-Z0-9(])")


@dataclass(frozen=True)
class Criteria:
    """Ordered inclusion and exclusion statement lists for one trial."""

    inclusion: tuple[str, ...] = ()
    exclusion: tuple[str, ...] = ()

    def is_empty(self) -> bool:
        return not self.inclusion and not self.exclusion


@dataclass
class HeadingRules:
    """Compiled heading and bullet patterns loaded from a rules file."""

    headings: list[tuple[str, re.Pattern]] = field(default_factory=list)
    bullets: list[re.Pattern] = field(default_factory=list)

    @classmethod
    def load(cls, path: str | Path) -> "HeadingRules":
        rules = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise InputError(
                        f"{path}:{lineno}: expected 'kind<TAB>regex', got {line!r}"
                    )
                kind, pattern = parts[0].strip(), parts[1].strip()
                if kind in (INCLUSION, EXCLUSION):
                    rules.headings.append((kind, re.compile(pattern, re.IGNORECASE)))
                elif kind == "bullet":
                    rules.bullets.append(re.compile(pattern))
                else:
                    raise InputError(f"{path}:{lineno}: unknown rule kind {kind!r}")
        return rules

    @classmethod
    def default(cls) -> "HeadingRules":
        ref = resources.files("trialmatch.data") / "heading_rules.tsv"
        with resources.as_file(ref) as path:
            return cls.load(path)

    def match_heading(self, line: str) -> tuple[str, str]:
        """Classify a line; returns (kind, content-after-heading).

        kind is "none" when the line is not a heading, in which case the
        content is the whole line.
        """
        stripped = line.lstrip()
        for kind, pattern in self.headings:
            m = pattern.match(stripped)
            if m:
                return kind, stripped[m.end():].strip()
        return NONE, line

    def match_bullet(self, line: str) -> str | None:
        """Return the bullet item text if the line starts a bullet, else None."""
        stripped = line.lstrip()
        for pattern in self.bullets:
            m = pattern.match(stripped)
            if m:
                return stripped[m.end():]
        return None


_DEFAULT_RULES: HeadingRules | None = None


def default_rules() -> HeadingRules:
    global _DEFAULT_RULES
    if _DEFAULT_RULES is None:
        _DEFAULT_RULES = HeadingRules.default()
    return _DEFAULT_RULES


def heading_kind(line: str, rules: HeadingRules | None = None) -> str:
    """Classify one line as "inclusion", "exclusion", or "none"."""
    rules = rules or default_rules()
    kind, _ = rules.match_heading(line)
    return kind


def split_criteria(eligibility_raw: str | None, rules: HeadingRules | None = None) -> Criteria:
    """Split an eligibility block into inclusion/exclusion statements.

    Text before the first recognized heading is discarded.  Multiple
    regions of the same kind (multi-arm trials) are concatenated.  Within
    a region, bullet markers start new statements; otherwise statements
    end at sentence-final punctuation followed by a capital, or at a line
    ending in a period.  Returns empty lists when no heading is found.
    """
    if not eligibility_raw:
        return Criteria()
    rules = rules or default_rules()

    regions: dict[str, list[str]] = {INCLUSION: [], EXCLUSION: []}
    current: str = NONE
    for line in eligibility_raw.splitlines():
        kind, content = rules.match_heading(line)
        if kind != NONE:
            current = kind
            if content:
                regions[current].append(content)
            continue
        if current != NONE:
            regions[current].append(line)

    return Criteria(
        inclusion=tuple(_segment(regions[INCLUSION], rules)),
        exclusion=tuple(_segment(regions[EXCLUSION], rules)),
    )


def _segment(lines: list[str], rules: HeadingRules) -> list[str]:
    """Turn the raw lines of one region into trimmed statements."""
    statements: list[str] = []
    parts: list[str] = []

    def close() -> None:
        text = " ".join(p for p in parts if p).strip()
        parts.clear()
        if text:
            statements.append(text)

    for line in lines:
        bullet_text = rules.match_bullet(line)
        if bullet_text is not None:
            close()
            line = bullet_text
        elif not line.strip():
            close()
            continue
        # A line may hold several sentences; everything before the last
        # boundary closes a statement immediately.
        pieces = _SENT_SPLIT.split(line.strip())
        for piece in pieces[:-1]:
            parts.append(piece)
            close()
        parts.append(pieces[-1])
        if line.rstrip().endswith((".", "!", "?")):
            close()
    close()
    return statements
