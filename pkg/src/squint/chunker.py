"""Lightweight heuristic noun-chunk extraction.

A small closed-class lexicon (determiners, pronouns, question words, common
adjectives, verbs, function words) is used to tag tokens; anything not in the
lexicon defaults to a noun. Chunks are maximal spans matching
``determiner? adjective* noun+`` with the determiner stripped.

This is a rough surrogate for a full NLP pipeline, good enough for measuring
concept overlap between linked questions. Gerunds that commonly act as event
nouns in questions (e.g. "landing") are intentionally left in the open noun
class.
"""

from __future__ import annotations

import string

DETERMINERS = frozenset(
    """a an the this that these those some any no every each all both either
    neither another such its his her their your my our"""
    .split()
)

QUESTION_WORDS = frozenset("what which who whom whose where when why how".split())

PRONOUNS = frozenset(
    """i you he she it we they me him us them himself herself itself themselves
    anyone someone everyone anybody somebody everybody anything something
    everything nothing there""".split()
)

VERBS = frozenset(
    """is are was were be been being am do does did done have has had having
    can could will would shall should may might must get gets got go goes going
    gone come comes coming look looks looking seem seems appear appears take
    takes taking took eat eats eating ate drink drinks drinking wear wears
    wearing wore hold holds held see sees seen saw say says said think thinks
    know knows make makes made use uses used ride rides riding rode play plays
    playing played stand stands standing sit sits sitting walk walks walking
    run runs fly flying jump jumps work works live lives want wants like likes
    love loves enjoy enjoys serve serves served need needs""".split()
)

ADJECTIVES = frozenset(
    """ripe fresh healthy edible big small large little tiny huge old new young
    long short tall high low wide narrow hot cold warm cool sunny cloudy rainy
    snowy clean dirty wet dry full empty open closed bright dark happy sad good
    bad nice pretty ugly many few more most several same different real fake
    red orange yellow green blue purple pink brown black white gray grey golden
    wooden metal plastic glass shiny dull heavy light soft hard""".split()
)

FUNCTION_WORDS = frozenset(
    """in on at of to for with from by about above below over under near beside
    between behind into onto off out up down or and but not very too so enough
    here now then just only also still already yet never always often usually
    sometimes mostly really quite rather as than if because while during before
    after when"""
    .split()
)

_DET = "det"
_ADJ = "adj"
_NOUN = "noun"
_OTHER = "other"


def _tag(token: str) -> str:
    if token in DETERMINERS:
        return _DET
    if token in ADJECTIVES:
        return _ADJ
    if (
        token in QUESTION_WORDS
        or token in PRONOUNS
        or token in VERBS
        or token in FUNCTION_WORDS
    ):
        return _OTHER
    return _NOUN


def _clean_tokens(text: str) -> list[str]:
    tokens = []
    for raw in text.lower().split():
        tok = raw.strip(string.punctuation)
        if tok:
            tokens.append(tok)
    return tokens


def extract_noun_chunks(text: str) -> list[str]:
    """Maximal det? adj* noun+ spans, lowercased, determiners stripped."""
    tokens = _clean_tokens(text)
    tags = [_tag(t) for t in tokens]
    chunks = []
    i = 0
    n = len(tokens)
    while i < n:
        j = i
        if j < n and tags[j] == _DET:
            j += 1
        content_start = j
        while j < n and tags[j] == _ADJ:
            j += 1
        noun_start = j
        while j < n and tags[j] == _NOUN:
            j += 1
        if j > noun_start:
            chunks.append(" ".join(tokens[content_start:j]))
            i = j
        else:
            i += 1
    return chunks


def fold_plural(token: str) -> str:
    """Cheap singular/plural folding: strip a trailing 's' on longer tokens."""
    if len(token) > 3 and token.endswith("s"):
        return token[:-1]
    return token


def chunk_token_set(text: str) -> set[str]:
    """All tokens of all chunks in the text, plural-folded."""
    out: set[str] = set()
    for chunk in extract_noun_chunks(text):
        for tok in chunk.split():
            out.add(fold_plural(tok))
    return out
