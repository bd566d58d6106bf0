"""Binary snapshot format for result stores.

Layout (all integers little-endian)::

    "KLAB" | version u8 (=1) | machine tag u8
    [conditional: condition bit-length u16, condition bytes]
    [custom: name length u8, utf-8 name]
    round u32 | program length cap u16
    records until end of file, sorted by program in length-lex order:
        program bit-length u16, program bytes,
        output bit-length u32, output bytes, steps u64

Bit strings are packed MSB-first and zero-padded to whole bytes.
"""

from __future__ import annotations

import fcntl
import os
import struct
import tempfile
from contextlib import contextmanager
from pathlib import Path

from .bitstr import bits_to_bytes, bytes_to_bits, lenlex_key
from .dovetail import MachineKind, ResultStore

MAGIC = b"KLAB"
VERSION = 1
_TAGS = {"plain": 0, "prefix": 1, "conditional": 2, "custom": 3}
_TAG_NAMES = {v: k for k, v in _TAGS.items()}


class FormatError(ValueError):
    def __init__(self, msg: str, offset: int):
        super().__init__(f"{msg} (at byte offset {offset})")
        self.offset = offset


def dumps(store: ResultStore) -> bytes:
    kind = store.machine
    buf = bytearray(MAGIC)
    buf += struct.pack("<BB", VERSION, _TAGS[kind.tag])
    if kind.tag == "conditional":
        buf += struct.pack("<H", len(kind.condition)) + bits_to_bytes(kind.condition)
    elif kind.tag == "custom":
        name = kind.name.encode()
        buf += struct.pack("<B", len(name)) + name
    buf += struct.pack("<IH", store.round, store.program_length_cap)
    for prog in sorted(store.facts, key=lenlex_key):
        out, steps = store.facts[prog]
        buf += struct.pack("<H", len(prog)) + bits_to_bytes(prog)
        buf += struct.pack("<I", len(out)) + bits_to_bytes(out)
        buf += struct.pack("<Q", steps)
    return bytes(buf)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(f"truncated {what}", self.pos)
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))

    def bits(self, nbits: int, what: str) -> str:
        return bytes_to_bits(self.take((nbits + 7) // 8, what), nbits)


def loads(data: bytes) -> ResultStore:
    rd = _Reader(data)
    if rd.take(4, "magic") != MAGIC:
        raise FormatError("bad magic", 0)
    version, tag = rd.unpack("<BB", "header")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    if tag not in _TAG_NAMES:
        raise FormatError(f"unknown machine tag {tag}", 5)
    tag_name = _TAG_NAMES[tag]
    if tag_name == "conditional":
        (n,) = rd.unpack("<H", "condition length")
        kind = MachineKind.conditional(rd.bits(n, "condition"))
    elif tag_name == "custom":
        (n,) = rd.unpack("<B", "name length")
        kind = MachineKind.custom(rd.take(n, "name").decode())
    else:
        kind = MachineKind(tag_name)
    rnd, cap = rd.unpack("<IH", "round/cap")
    facts = {}
    while rd.pos < len(data):
        (plen,) = rd.unpack("<H", "program length")
        prog = rd.bits(plen, "program")
        (olen,) = rd.unpack("<I", "output length")
        out = rd.bits(olen, "output")
        (steps,) = rd.unpack("<Q", "steps")
        facts[prog] = (out, steps)
    return ResultStore(kind, rnd, facts, cap)


@contextmanager
def _locked(path: Path):
    with open(str(path) + ".lock", "w") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)


def save(store: ResultStore, path) -> None:
    """Write atomically: temp file in the same directory, then rename."""
    path = Path(path)
    data = dumps(store)
    with _locked(path):
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def load(path) -> ResultStore:
    with open(path, "rb") as fh:
        return loads(fh.read())
