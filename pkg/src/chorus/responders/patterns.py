"""Token-pattern rules with wildcards, captures, and one-level redirects.

Rule file format, one rule per line:

    pattern -> template
    prio=N | pattern -> template

Patterns are word tokens plus the wildcards "*" and "_", each matching one
or more tokens and capturing them. "_" marks a rule as highest priority;
otherwise priority defaults to the number of literal tokens (more specific
wins), with file order breaking ties. Templates reference captures as
$1..$9; a template starting with "@" redirects: the rest is substituted and
matched again, one level deep.

Matching ignores punctuation tokens and case; captures keep the user's
original casing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from chorus.core import Article, ConversationState
from chorus.responders.base import Responder, last_human_text
from chorus.text.tokenize import has_word_chars, tokenize

WILDCARDS = ("*", "_")
_PRIO_PREFIX = re.compile(r"^prio=(-?\d+)\s*\|\s*")
_CAPTURE_REF = re.compile(r"\$([1-9])")


@dataclass(frozen=True)
class PatternRule:
    pattern: tuple[str, ...]
    template: str
    priority: int
    index: int


def parse_rule_lines(lines: Sequence[str]) -> list[PatternRule]:
    rules: list[PatternRule] = []
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        priority: Optional[int] = None
        m = _PRIO_PREFIX.match(line)
        if m:
            priority = int(m.group(1))
            line = line[m.end():]
        if " -> " not in line:
            raise ValueError(f"rule line needs ' -> ': {line!r}")
        lhs, template = line.split(" -> ", 1)
        pattern = tuple(
            tok if tok in WILDCARDS else tok.lower() for tok in lhs.split()
        )
        if not pattern:
            raise ValueError(f"empty pattern in rule: {line!r}")
        if priority is None:
            if "_" in pattern:
                priority = 100
            else:
                priority = sum(1 for tok in pattern if tok not in WILDCARDS)
        rules.append(PatternRule(pattern, template.strip(), priority, len(rules)))
    return rules


def load_rules(path: str | Path) -> list[PatternRule]:
    return parse_rule_lines(Path(path).read_text(encoding="utf-8").splitlines())


def _word_tokens(text: str) -> list[str]:
    return [t for t in tokenize(text, lower=False) if has_word_chars(t)]


def match_pattern(
    pattern: tuple[str, ...], tokens: Sequence[str]
) -> Optional[list[list[str]]]:
    """Captured token spans per wildcard, or None. Wildcards take the
    shortest span that lets the rest match, so captures are deterministic."""
    lowered = [t.lower() for t in tokens]

    def walk(pi: int, ti: int) -> Optional[list[list[str]]]:
        if pi == len(pattern):
            return [] if ti == len(tokens) else None
        tok = pattern[pi]
        if tok in WILDCARDS:
            for end in range(ti + 1, len(tokens) + 1):
                rest = walk(pi + 1, end)
                if rest is not None:
                    return [list(tokens[ti:end])] + rest
            return None
        if ti < len(tokens) and lowered[ti] == tok:
            return walk(pi + 1, ti + 1)
        return None

    return walk(0, 0)


def substitute(template: str, captures: Sequence[Sequence[str]]) -> str:
    def repl(m: re.Match) -> str:
        i = int(m.group(1)) - 1
        return " ".join(captures[i]) if i < len(captures) else ""

    return _CAPTURE_REF.sub(repl, template)


class PatternEngine:
    def __init__(self, rules: Sequence[PatternRule]):
        self._rules = sorted(rules, key=lambda r: (-r.priority, r.index))

    def reply(self, text: str, _depth: int = 0) -> Optional[str]:
        tokens = _word_tokens(text)
        if not tokens:
            return None
        for rule in self._rules:
            captures = match_pattern(rule.pattern, tokens)
            if captures is None:
                continue
            out = substitute(rule.template, captures)
            if out.startswith("@"):
                if _depth >= 1:
                    return None
                return self.reply(out[1:], _depth + 1)
            return out
        return None


class PatternResponder(Responder):
    name = "pattern"

    def __init__(
        self, rules: Sequence[PatternRule], legacy_quote_suppression: bool = False
    ):
        self._engine = PatternEngine(rules)
        # withholds replies containing a double quote when enabled
        self._suppress_quotes = legacy_quote_suppression

    def wake_up(self, article: Article) -> None:
        pass

    def respond(self, state: ConversationState) -> Optional[str]:
        text = last_human_text(state)
        if text is None:
            return None
        out = self._engine.reply(text)
        if out is not None and self._suppress_quotes and '"' in out:
            return None
        return out
