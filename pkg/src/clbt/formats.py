"""CLBE embedding files and CLBT transform files.

CLBE binary layout (little-endian)::

    b"CLBE" | u16 version=1 | u8 flags=0 | u8 reserved | u64 n | u32 d
    n x (u32 byte length + UTF-8 key)
    n*d float32, row-major

CLBE text layout: a header line ``"n d"`` then ``n`` lines ``key v1 ... vd``.

CLBT layout (little-endian)::

    b"CLBT" | u16 version=1 | u32 out_dim | u32 in_dim | u8 method
    | u8 orthogonal | f64 objective | u64 n_train | out_dim*in_dim float64
"""
import struct

import numpy as np

from .embeddings import EmbeddingMatrix
from .errors import FormatError
from .fit import TransformMatrix

CLBE_MAGIC = b"CLBE"
CLBT_MAGIC = b"CLBT"
VERSION = 1
_CLBE_HEADER = struct.Struct("<4sHBBQI")
_CLBT_HEADER = struct.Struct("<4sHIIBBdQ")
_U32 = struct.Struct("<I")
METHOD_CODES = {"svd": 0, "gd": 1, "lsq": 2}
_CODE_METHODS = {v: k for k, v in METHOD_CODES.items()}


class _Reader:
    """Bounds-checked cursor over an in-memory byte string."""

    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, size, what):
        end = self.pos + size
        if end > len(self.data):
            raise FormatError(f"truncated file while reading {what}", f"byte {self.pos}")
        chunk = self.data[self.pos:end]
        self.pos = end
        return chunk

    def unpack(self, st, what):
        return st.unpack(self.take(st.size, what))

    def finish(self):
        if self.pos != len(self.data):
            raise FormatError(f"{len(self.data) - self.pos} trailing bytes", f"byte {self.pos}")


def _read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


def detect_format(path):
    with open(path, "rb") as f:
        return "binary" if f.read(4) == CLBE_MAGIC else "text"


def read_embeddings(path, format="auto"):
    """Load a CLBE file; ``format`` is ``"text"``, ``"binary"`` or ``"auto"``."""
    if format == "auto":
        format = detect_format(path)
    if format == "binary":
        return _read_binary(_read_bytes(path))
    if format == "text":
        return _read_text(path)
    raise ValueError(f"unknown embedding format {format!r}")


def _read_binary(data):
    r = _Reader(data)
    magic, version, flags, _reserved, n, d = r.unpack(_CLBE_HEADER, "header")
    if magic != CLBE_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {CLBE_MAGIC!r}", "byte 0")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", "byte 4")
    if flags != 0:
        raise FormatError(f"unsupported flags {flags}", "byte 6")
    keys = []
    for i in range(n):
        (length,) = r.unpack(_U32, f"length of key {i}")
        start = r.pos
        raw = r.take(length, f"key {i}")
        try:
            keys.append(raw.decode("utf-8"))
        except UnicodeDecodeError:
            raise FormatError(f"key {i} is not valid UTF-8", f"byte {start}") from None
    start = r.pos
    raw = r.take(4 * n * d, "vector data")
    r.finish()
    vectors = np.frombuffer(raw, dtype="<f4").reshape(n, d).astype(np.float64)
    _check_finite(vectors, lambda row: f"byte {start + 4 * d * row}")
    return _build(keys, vectors)


def _check_finite(vectors, where):
    bad = ~np.isfinite(vectors)
    if bad.any():
        row = int(np.argwhere(bad)[0][0])
        raise FormatError(f"non-finite value in row {row}", where(row))


def _build(keys, vectors):
    try:
        return EmbeddingMatrix(keys, vectors)
    except FormatError as exc:
        raise FormatError(str(exc)) from None


def _read_text(path):
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines:
        raise FormatError("empty file", "line 1")
    header = lines[0].split()
    try:
        n, d = (int(x) for x in header)
    except ValueError:
        raise FormatError(f"header must be 'n d', got {lines[0]!r}", "line 1") from None
    if n < 0 or d < 0:
        raise FormatError("negative size in header", "line 1")
    body = lines[1:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) < n:
        raise FormatError(f"truncated file: expected {n} rows, found {len(body)}", f"line {len(body) + 2}")
    if len(body) > n:
        raise FormatError(f"expected {n} rows, found {len(body)}", f"line {n + 2}")
    keys = []
    vectors = np.empty((n, d))
    for i, line in enumerate(body):
        fields = line.split(" ")
        if len(fields) != d + 1:
            raise FormatError(f"expected key and {d} values, got {len(fields)} fields", f"line {i + 2}")
        keys.append(fields[0])
        try:
            # stored precision is float32 whatever the decimal text says
            vectors[i] = np.array([float(x) for x in fields[1:]], dtype=np.float32)
        except ValueError:
            raise FormatError("unparseable value", f"line {i + 2}") from None
    _check_finite(vectors, lambda row: f"line {row + 2}")
    return _build(keys, vectors)


def write_embeddings(path, emb, format="binary"):
    if format == "binary":
        data = bytearray(_CLBE_HEADER.pack(CLBE_MAGIC, VERSION, 0, 0, len(emb), emb.dim))
        for key in emb.keys:
            raw = key.encode("utf-8")
            data += _U32.pack(len(raw))
            data += raw
        data += np.ascontiguousarray(emb.vectors, dtype="<f4").tobytes()
        with open(path, "wb") as f:
            f.write(bytes(data))
    elif format == "text":
        for key in emb.keys:
            if not key or any(ch.isspace() for ch in key):
                raise FormatError(f"key {key!r} cannot be written in text format")
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(f"{len(emb)} {emb.dim}\n")
            # float32 storage; 9 significant digits round-trip it exactly
            values = emb.vectors.astype(np.float32)
            for key, row in zip(emb.keys, values):
                f.write(key + " " + " ".join(f"{x:.9g}" for x in row) + "\n")
    else:
        raise ValueError(f"unknown embedding format {format!r}")


def write_transform(path, transform):
    w = np.ascontiguousarray(transform.w, dtype="<f8")
    header = _CLBT_HEADER.pack(
        CLBT_MAGIC,
        VERSION,
        transform.out_dim,
        transform.in_dim,
        METHOD_CODES[transform.method],
        1 if transform.orthogonal else 0,
        float(transform.objective),
        int(transform.n_train),
    )
    with open(path, "wb") as f:
        f.write(header + w.tobytes())


def read_transform(path):
    r = _Reader(_read_bytes(path))
    magic, version, out_dim, in_dim, method, orth, obj, n_train = r.unpack(_CLBT_HEADER, "header")
    if magic != CLBT_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {CLBT_MAGIC!r}", "byte 0")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", "byte 4")
    if method not in _CODE_METHODS:
        raise FormatError(f"unknown method code {method}", "byte 14")
    if orth not in (0, 1):
        raise FormatError(f"orthogonal flag must be 0 or 1, got {orth}", "byte 15")
    start = r.pos
    raw = r.take(8 * out_dim * in_dim, "matrix data")
    r.finish()
    w = np.frombuffer(raw, dtype="<f8").reshape(out_dim, in_dim).astype(np.float64)
    _check_finite(w, lambda row: f"byte {start + 8 * in_dim * row}")
    if not np.isfinite(obj) or obj < 0:
        raise FormatError(f"invalid objective {obj}", "byte 16")
    return TransformMatrix(w, _CODE_METHODS[method], bool(orth), obj, n_train)
