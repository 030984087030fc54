"""Hand-traced fixtures shared by the unit and acceptance tests."""

UNK = "[UNK]"

CANAL_SPLIT_VOCAB = (UNK, "can", "##al")
CANAL_WHOLE_VOCAB = (UNK, "can", "##al", "canal")
MAIN_VOCAB = (
    UNK, "un", "##aff", "##able", "aff", "able", "play", "##ing", "##in", "##g",
    "##s", "##er", "run", "##n", "##ning", "a", "##a", "b", "##b", "el", "the",
    "channel", "##ch", "c", "##h",
)

# (vocab, word, expected pieces)
WORDPIECE_CASES = [
    (CANAL_SPLIT_VOCAB, "canal", ["can", "##al"]),
    (CANAL_WHOLE_VOCAB, "canal", ["canal"]),
    (CANAL_SPLIT_VOCAB, "zzz", [UNK]),
    (MAIN_VOCAB, "unaffable", ["un", "##aff", "##able"]),
    (MAIN_VOCAB, "playing", ["play", "##ing"]),
    (MAIN_VOCAB, "plays", ["play", "##s"]),
    (MAIN_VOCAB, "player", ["play", "##er"]),
    (MAIN_VOCAB, "running", ["run", "##ning"]),
    (MAIN_VOCAB, "runs", ["run", "##s"]),
    (MAIN_VOCAB, "aaa", ["a", "##a", "##a"]),
    (MAIN_VOCAB, "ab", ["a", "##b"]),
    (MAIN_VOCAB, "ba", ["b", "##a"]),
    (MAIN_VOCAB, "abc", [UNK]),
    (MAIN_VOCAB, "ch", ["c", "##h"]),
    (MAIN_VOCAB, "the", ["the"]),
    (MAIN_VOCAB, "playingz", [UNK]),
    (MAIN_VOCAB, "pla", [UNK]),
    (MAIN_VOCAB, "able", ["able"]),
    (MAIN_VOCAB, "playin", ["play", "##in"]),
    (MAIN_VOCAB, "playinggs", ["play", "##ing", "##g", "##s"]),
]

# (links, expected resolved (target, source) pairs)
RESOLUTION_CASES = [
    ({(0, 0), (1, 1)}, [(0, 0), (1, 1)]),
    ({(0, 0), (0, 1), (1, 1), (2, 1)}, [(0, 0), (1, 1)]),
    ({(3, 0), (0, 2)}, [(0, 2), (3, 0)]),
    (set(), []),
    ({(0, 2), (0, 1), (0, 0)}, [(0, 0)]),
    ({(2, 0), (1, 0), (0, 0)}, [(0, 0)]),
    ({(0, 1), (1, 0)}, [(0, 1), (1, 0)]),
    ({(0, 1), (0, 2), (1, 2), (2, 0)}, [(0, 1), (1, 2), (2, 0)]),
    ({(1, 1), (1, 3), (2, 1), (0, 3)}, [(0, 3), (1, 1)]),
    ({(4, 4), (3, 4), (4, 3)}, [(3, 4), (4, 3)]),
]
