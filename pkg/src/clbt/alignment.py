"""Contextual word pairs from a parallel corpus and Pharaoh alignments.

Conventions: the first bitext segment is the target language, the second
is the source language, and the left index of a Pharaoh ``t-s`` link
refers to the target side.
"""
import re
from dataclasses import dataclass
from typing import NamedTuple

from .errors import (
    CorpusMismatch,
    FormatError,
    LinkOutOfRange,
    MalformedAlignmentLine,
    MalformedBitextLine,
)
from .wordpiece import word_to_piece_spans

SEPARATOR = " ||| "
_LINK = re.compile(r"^(\d+)-(\d+)$")


@dataclass(frozen=True)
class BitextSentence:
    index: int
    target_tokens: tuple
    source_tokens: tuple


@dataclass(frozen=True)
class AlignmentLinkSet:
    sentence_index: int
    links: frozenset

    def validate(self, sentence):
        for t, s in self.links:
            if t >= len(sentence.target_tokens) or s >= len(sentence.source_tokens):
                raise LinkOutOfRange(
                    f"sentence {self.sentence_index}: link {t}-{s} outside "
                    f"{len(sentence.target_tokens)} target / {len(sentence.source_tokens)} source words"
                )


class ContextualPair(NamedTuple):
    sentence_index: int
    target_index: int
    source_index: int


class PairRecord(NamedTuple):
    """One line of the pair file: a contextual pair plus its first-piece indices."""

    sentence_index: int
    target_index: int
    source_index: int
    target_piece: int
    source_piece: int


@dataclass(frozen=True)
class ExtractedSentence:
    index: int
    pairs: tuple
    target_spans: tuple
    source_spans: tuple

    def records(self):
        for p in self.pairs:
            yield PairRecord(
                p.sentence_index,
                p.target_index,
                p.source_index,
                self.target_spans[p.target_index][0],
                self.source_spans[p.source_index][0],
            )


def _strip_eol(line):
    return line.rstrip("\r\n")


def parse_bitext(lines):
    """Parse ``target ||| source`` lines; exactly one separator per line."""
    sentences = []
    for line_no, line in enumerate(lines, start=1):
        line = _strip_eol(line)
        n_sep = line.count(SEPARATOR)
        if n_sep != 1:
            problem = "missing ' ||| ' separator" if n_sep == 0 else f"{n_sep} separators, expected 1"
            raise MalformedBitextLine(line_no, problem)
        left, right = line.split(SEPARATOR)
        target, source = left.split(), right.split()
        if not target or not source:
            raise MalformedBitextLine(line_no, "empty side")
        sentences.append(BitextSentence(line_no - 1, tuple(target), tuple(source)))
    return sentences


def parse_parallel(target_lines, source_lines):
    """Bitext given as two line-aligned files, one sentence per line."""
    target_lines = [_strip_eol(x) for x in target_lines]
    source_lines = [_strip_eol(x) for x in source_lines]
    if len(target_lines) != len(source_lines):
        raise CorpusMismatch(
            f"target file has {len(target_lines)} lines but source file has {len(source_lines)}"
        )
    sentences = []
    for i, (left, right) in enumerate(zip(target_lines, source_lines)):
        target, source = left.split(), right.split()
        if not target or not source:
            raise MalformedBitextLine(i + 1, "empty side")
        sentences.append(BitextSentence(i, tuple(target), tuple(source)))
    return sentences


def parse_pharaoh(lines):
    """Parse one line of ``t-s`` links per sentence; duplicates collapse."""
    result = []
    for line_no, line in enumerate(lines, start=1):
        links = set()
        for field in _strip_eol(line).split():
            m = _LINK.match(field)
            if m is None:
                if field.startswith("-") or "--" in field:
                    raise MalformedAlignmentLine(line_no, f"negative index in {field!r}")
                raise MalformedAlignmentLine(line_no, f"malformed link {field!r}")
            links.add((int(m.group(1)), int(m.group(2))))
        result.append(AlignmentLinkSet(line_no - 1, frozenset(links)))
    return result


def resolve_one_to_one(links, sentence=None):
    """Collapse a link set to one-to-one pairs, preferring the left-most word.

    Phase 1 keeps the smallest source index for each target word; phase 2
    keeps the smallest target index for each surviving source word.  The
    result is sorted by target index and independent of input order.
    """
    if sentence is not None:
        links.validate(sentence)
    source_for = {}
    for t, s in links.links:
        if t not in source_for or s < source_for[t]:
            source_for[t] = s
    target_for = {}
    for t, s in source_for.items():
        if s not in target_for or t < target_for[s]:
            target_for[s] = t
    return [ContextualPair(links.sentence_index, t, s) for s, t in sorted(target_for.items(), key=lambda kv: kv[1])]


def extract_pairs(bitext, alignments, vocab=None):
    """Join sentences with their alignments and resolve each to one-to-one pairs.

    ``vocab=None`` means the bitext is already piece-tokenized.  Returns one
    ExtractedSentence per bitext sentence, in order; unaligned sentences
    yield zero pairs.
    """
    bitext = list(bitext)
    alignments = list(alignments)
    if len(bitext) != len(alignments):
        raise CorpusMismatch(
            f"bitext has {len(bitext)} sentences but alignment file has {len(alignments)} lines"
        )
    out = []
    for sentence, links in zip(bitext, alignments):
        pairs = resolve_one_to_one(links, sentence)
        out.append(
            ExtractedSentence(
                sentence.index,
                tuple(pairs),
                tuple(word_to_piece_spans(sentence.target_tokens, vocab)),
                tuple(word_to_piece_spans(sentence.source_tokens, vocab)),
            )
        )
    return out


def write_pairs(f, extracted):
    """Write tab-separated pair records; return the number written."""
    n = 0
    for sentence in extracted:
        for rec in sentence.records():
            f.write("\t".join(map(str, rec)) + "\n")
            n += 1
    return n


def read_pairs(lines):
    records = []
    for line_no, line in enumerate(lines, start=1):
        line = _strip_eol(line)
        if not line:
            continue
        fields = line.split("\t")
        try:
            values = [int(x) for x in fields]
        except ValueError:
            values = []
        if len(values) != 5 or min(values) < 0:
            raise FormatError("pair record needs 5 non-negative integers", f"line {line_no}")
        records.append(PairRecord(*values))
    return records
