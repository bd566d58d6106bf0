"""Binary strings, the string/natural bijection and the pairing code.

Bit strings are plain ``str`` objects over the alphabet ``{"0", "1"}``.
Natural numbers and strings are identified through length-lexicographic
order: ``"" -> 0, "0" -> 1, "1" -> 2, "00" -> 3, ...``, i.e. ``n`` maps to the
binary expansion of ``n + 1`` with its leading 1 dropped.
"""

from __future__ import annotations

from typing import Iterator

BitString = str


class MalformedInput(ValueError):
    """Raised when a bit string cannot be parsed by a decoder."""


def is_bitstring(s: object) -> bool:
    return isinstance(s, str) and not s.strip("01")


def check_bitstring(s: str) -> str:
    if not is_bitstring(s):
        raise MalformedInput(f"not a bit string: {s!r}")
    return s


def str_to_nat(x: BitString) -> int:
    """Rank of ``x`` in length-lexicographic order (0-based)."""
    return int("1" + x, 2) - 1


def nat_to_str(n: int) -> BitString:
    """Inverse of :func:`str_to_nat`."""
    if n < 0:
        raise ValueError("natural numbers only")
    return bin(n + 1)[3:]


def lenlex_key(x: BitString) -> tuple[int, str]:
    """Sort key realising length-lexicographic order."""
    return (len(x), x)


def strings_up_to(max_len: int) -> Iterator[BitString]:
    """All bit strings of length <= max_len, in length-lex order."""
    for n in range(2 ** (max_len + 1) - 1):
        yield nat_to_str(n)


def strings_of_length(length: int) -> Iterator[BitString]:
    if length == 0:
        yield ""
        return
    for v in range(2**length):
        yield format(v, f"0{length}b")


def pair_encode(x: BitString, y: BitString) -> BitString:
    """Self-delimiting pairing ``1^{|x|} 0 x y``."""
    return "1" * len(x) + "0" + x + y


def pair_decode(s: BitString) -> tuple[BitString, BitString]:
    """Split ``s = 1^k 0 x y`` with ``|x| = k`` into ``(x, y)``."""
    k = s.find("0")
    if k < 0:
        raise MalformedInput("unary length prefix has no 0 terminator")
    end = 2 * k + 1
    if len(s) < end:
        raise MalformedInput(
            f"need {k} bits after the unary prefix, found {len(s) - k - 1}"
        )
    return s[k + 1 : end], s[end:]


def bits_to_bytes(x: BitString) -> bytes:
    """Pack bits MSB-first, zero-padding the last byte."""
    if not x:
        return b""
    pad = -len(x) % 8
    return int(x + "0" * pad, 2).to_bytes((len(x) + pad) // 8, "big")


def bytes_to_bits(data: bytes, nbits: int) -> BitString:
    if nbits == 0:
        return ""
    full = format(int.from_bytes(data, "big"), f"0{len(data) * 8}b")
    return full[:nbits]
