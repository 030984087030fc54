import io

import pytest
from hypothesis import given
from hypothesis import strategies as st

from clbt.alignment import (
    AlignmentLinkSet,
    BitextSentence,
    ContextualPair,
    extract_pairs,
    parse_bitext,
    parse_parallel,
    parse_pharaoh,
    read_pairs,
    resolve_one_to_one,
    write_pairs,
)
from clbt.errors import (
    CorpusMismatch,
    FormatError,
    LinkOutOfRange,
    MalformedAlignmentLine,
    MalformedBitextLine,
)
from clbt.wordpiece import WordPieceVocab

from fixtures import RESOLUTION_CASES, UNK


def links(*pairs, sentence=0):
    return AlignmentLinkSet(sentence, frozenset(pairs))


def test_parse_bitext_basic():
    [s] = parse_bitext(["el canal ||| the channel\n"])
    assert s == BitextSentence(0, ("el", "canal"), ("the", "channel"))


def test_parse_bitext_rejects_double_separator():
    with pytest.raises(MalformedBitextLine) as exc:
        parse_bitext(["ok ||| fine", "a ||| b ||| c"])
    assert exc.value.line_no == 2


@pytest.mark.parametrize("line", ["no separator here", " ||| the", "el ||| ", "", "a|||b"])
def test_parse_bitext_errors(line):
    with pytest.raises(MalformedBitextLine):
        parse_bitext([line])


def test_parse_bitext_large_corpus():
    lines = (f"w{i} x ||| y z{i}" for i in range(10_000))
    sentences = parse_bitext(lines)
    assert len(sentences) == 10_000
    assert [s.index for s in sentences] == list(range(10_000))


def test_parse_bitext_keeps_tokens_verbatim():
    [s] = parse_bitext(["Él  CANAL,  ||| The\tchannel"])
    assert s.target_tokens == ("Él", "CANAL,")
    assert s.source_tokens == ("The", "channel")


def test_parse_parallel():
    sents = parse_parallel(["el canal", "hola"], ["the channel", "hello"])
    assert sents[1] == BitextSentence(1, ("hola",), ("hello",))
    with pytest.raises(CorpusMismatch):
        parse_parallel(["a"], ["b", "c"])


def test_parse_pharaoh():
    assert parse_pharaoh(["0-0 1-1"])[0].links == {(0, 0), (1, 1)}
    assert parse_pharaoh(["0-0 0-0 2-1"])[0].links == {(0, 0), (2, 1)}
    empty = parse_pharaoh(["0-0", "", "1-2"])
    assert empty[1] == AlignmentLinkSet(1, frozenset())
    assert empty[2].sentence_index == 2


@pytest.mark.parametrize("line", ["1-x", "0-0 -1-2", "0:1", "1-", "0-1-2", "a"])
def test_parse_pharaoh_errors(line):
    with pytest.raises(MalformedAlignmentLine) as exc:
        parse_pharaoh(["0-0", line])
    assert exc.value.line_no == 2


@pytest.mark.parametrize("link_set, expected", RESOLUTION_CASES)
def test_resolution_fixtures(link_set, expected):
    got = resolve_one_to_one(AlignmentLinkSet(0, frozenset(link_set)))
    assert [(p.target_index, p.source_index) for p in got] == expected


def test_resolution_validates_against_sentence():
    sent = BitextSentence(0, ("a", "b"), ("x",))
    with pytest.raises(LinkOutOfRange):
        resolve_one_to_one(links((0, 1)), sent)
    with pytest.raises(LinkOutOfRange):
        resolve_one_to_one(links((2, 0)), sent)
    assert resolve_one_to_one(links((1, 0)), sent) == [ContextualPair(0, 1, 0)]


link_sets = st.frozensets(st.tuples(st.integers(0, 8), st.integers(0, 8)), max_size=30)


@given(link_sets)
def test_resolution_properties(raw):
    pairs = resolve_one_to_one(AlignmentLinkSet(3, raw))
    ts = [p.target_index for p in pairs]
    ss = [p.source_index for p in pairs]
    assert len(set(ts)) == len(ts) and len(set(ss)) == len(ss)
    assert ts == sorted(ts)
    assert all((p.target_index, p.source_index) in raw for p in pairs)
    assert all(p.sentence_index == 3 for p in pairs)
    # idempotent
    again = resolve_one_to_one(AlignmentLinkSet(3, frozenset((p.target_index, p.source_index) for p in pairs)))
    assert again == pairs


@given(link_sets, st.randoms())
def test_resolution_order_free(raw, random):
    shuffled = list(raw)
    random.shuffle(shuffled)
    assert resolve_one_to_one(AlignmentLinkSet(0, frozenset(shuffled))) == resolve_one_to_one(AlignmentLinkSet(0, raw))


@given(link_sets)
def test_resolution_is_left_most(raw):
    # every target word that has any link keeps a pair unless its left-most
    # source word was taken by a smaller target index
    pairs = {p.target_index: p.source_index for p in resolve_one_to_one(AlignmentLinkSet(0, raw))}
    for t in {t for t, _ in raw}:
        leftmost = min(s for tt, s in raw if tt == t)
        if t in pairs:
            assert pairs[t] == leftmost
        else:
            rivals = [tt for tt in pairs if pairs[tt] == leftmost]
            assert rivals and rivals[0] < t


VOCAB = WordPieceVocab((UNK, "el", "can", "##al", "the", "channel", "hola", "hello"), UNK)


def test_extract_pairs_with_spans():
    bitext = parse_bitext(["el canal ||| the channel", "hola ||| hello"])
    aligns = parse_pharaoh(["0-0 1-1", ""])
    out = extract_pairs(bitext, aligns, VOCAB)
    assert [len(s.pairs) for s in out] == [2, 0]
    assert out[0].target_spans == ((0, 1), (1, 2))
    assert out[0].source_spans == ((0, 1), (1, 1))
    assert out[1].index == 1
    records = list(out[0].records())
    assert records[1].target_piece == 1 and records[1].source_piece == 1


def test_extract_pairs_pretokenized():
    bitext = parse_bitext(["can ##al ||| channel"])
    out = extract_pairs(bitext, parse_pharaoh(["1-0"]), vocab=None)
    assert out[0].target_spans == ((0, 1), (1, 1))
    assert list(out[0].records())[0].target_piece == 1


def test_extract_pairs_mismatch():
    bitext = parse_bitext(["a ||| b"])
    with pytest.raises(CorpusMismatch, match="1 sentences.*2 lines"):
        extract_pairs(bitext, parse_pharaoh(["0-0", "0-0"]), VOCAB)


def test_extract_pairs_out_of_range():
    bitext = parse_bitext(["el ||| the"])
    with pytest.raises(LinkOutOfRange):
        extract_pairs(bitext, parse_pharaoh(["0-1"]), VOCAB)


def test_pair_file_round_trip():
    bitext = parse_bitext(["el canal ||| the channel", "hola ||| hello"])
    out = extract_pairs(bitext, parse_pharaoh(["1-1 0-0", "0-0"]), VOCAB)
    buf = io.StringIO()
    assert write_pairs(buf, out) == 3
    assert buf.getvalue().splitlines()[1] == "0\t1\t1\t1\t1"
    assert read_pairs(io.StringIO(buf.getvalue())) == [r for s in out for r in s.records()]


@pytest.mark.parametrize("line", ["0\t1\t1\t1", "0\t1\tx\t1\t1", "0\t-1\t1\t1\t1"])
def test_read_pairs_errors(line):
    with pytest.raises(FormatError):
        read_pairs([line])


def test_data_scale_order_of_magnitude():
    # 10,000 sentences of ~40 tokens is on the order of 0.4M candidate tokens
    bitext = parse_bitext(" ".join(f"t{j}" for j in range(40)) + " ||| s" for _ in range(10_000))
    n_tokens = sum(len(s.target_tokens) for s in bitext)
    assert n_tokens == 400_000
