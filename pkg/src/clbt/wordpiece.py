"""Greedy longest-match-first WordPiece segmentation."""
from dataclasses import dataclass, field

from .errors import InvalidInput

CONTINUATION = "##"


@dataclass(frozen=True)
class WordPieceVocab:
    entries: tuple
    unk_token: str = "[UNK]"
    _lookup: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        entries = tuple(self.entries)
        if len(set(entries)) != len(entries):
            raise InvalidInput("vocabulary entries must be unique")
        if self.unk_token not in entries:
            raise InvalidInput(f"unknown token {self.unk_token!r} missing from vocabulary")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_lookup", frozenset(entries))

    def __contains__(self, piece):
        return piece in self._lookup

    def __len__(self):
        return len(self.entries)

    def piece_id(self, piece):
        return self.entries.index(piece)

    @classmethod
    def from_pieces(cls, pieces, unk_token="[UNK]"):
        """Build a vocab, appending ``unk_token`` when it is not listed."""
        pieces = list(pieces)
        if unk_token not in pieces:
            pieces.append(unk_token)
        return cls(tuple(pieces), unk_token)

    @classmethod
    def load(cls, path, unk_token="[UNK]"):
        """One piece per line; line order defines piece ids."""
        with open(path, encoding="utf-8") as f:
            pieces = [line.rstrip("\r\n") for line in f]
        # a trailing blank line is not a piece
        while pieces and pieces[-1] == "":
            pieces.pop()
        return cls(tuple(pieces), unk_token)


def wordpiece_tokenize(word, vocab):
    """Split ``word`` into vocabulary pieces, longest match first.

    Non-initial pieces are looked up with the ``##`` prefix.  If any
    position cannot be matched the whole word becomes ``[vocab.unk_token]``.
    """
    if not word:
        raise InvalidInput("cannot tokenize an empty word")
    if any(ch.isspace() for ch in word):
        raise InvalidInput(f"word contains whitespace: {word!r}")
    pieces = []
    start = 0
    while start < len(word):
        end = len(word)
        match = None
        while end > start:
            candidate = word[start:end]
            if start > 0:
                candidate = CONTINUATION + candidate
            if candidate in vocab:
                match = candidate
                break
            end -= 1
        if match is None:
            return [vocab.unk_token]
        pieces.append(match)
        start = end
    return pieces


def detokenize(pieces):
    """Inverse of a successful segmentation: strip ``##`` and concatenate."""
    if not pieces:
        return ""
    rest = (p[len(CONTINUATION):] if p.startswith(CONTINUATION) else p for p in pieces[1:])
    return pieces[0] + "".join(rest)


def word_to_piece_spans(tokens, vocab=None):
    """Return ``(first_piece_index, piece_count)`` for every word.

    With ``vocab=None`` the tokens are taken to be pieces already, so every
    span has length one.
    """
    spans = []
    offset = 0
    for token in tokens:
        count = 1 if vocab is None else len(wordpiece_tokenize(token, vocab))
        spans.append((offset, count))
        offset += count
    return spans
