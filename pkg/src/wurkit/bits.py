"""Bit-sequence parsing and the packed stream file format.

A packed file starts with one ASCII header line ``bits=<count>`` followed by the
payload, most-significant bit first within each byte. Pad bits in the last byte
are zero and ignored on read.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


class BitParseError(ValueError):
    """Malformed bit string; ``position`` is the 0-based offending index."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


def parse_bits(text: str) -> np.ndarray:
    """Parse an ASCII string of ``0``/``1`` into a uint8 array.

    Whitespace and ``_`` separators are not accepted; callers strip beforehand.
    """
    if not text:
        raise BitParseError("empty bit string", 0)
    for pos, ch in enumerate(text):
        if ch not in "01":
            raise BitParseError(f"invalid character {ch!r} at position {pos}", pos)
    return np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0")


def format_bits(bits) -> str:
    return "".join("1" if b else "0" for b in np.asarray(bits).ravel())


def write_packed(path, bits) -> None:
    bits = np.asarray(bits, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"bits={bits.size}\n".encode("ascii"))
        fh.write(np.packbits(bits, bitorder="big").tobytes())


def read_packed(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    nl = raw.find(b"\n")
    if nl < 0:
        raise BitParseError("packed file lacks a 'bits=<count>' header line")
    header = raw[:nl].decode("ascii", errors="replace").strip()
    if not header.startswith("bits="):
        raise BitParseError(f"bad header {header!r}, expected 'bits=<count>'")
    try:
        count = int(header[5:])
    except ValueError:
        raise BitParseError(f"bad bit count in header {header!r}") from None
    payload = np.frombuffer(raw[nl + 1:], dtype=np.uint8)
    if count < 0 or payload.size * 8 < count or payload.size > (count + 7) // 8:
        raise BitParseError(f"header declares {count} bits but payload holds {payload.size} bytes")
    return np.unpackbits(payload, bitorder="big")[:count].copy()


def read_stream_file(path) -> np.ndarray:
    """Read a stream file, either packed (``bits=`` header) or ASCII ``0``/``1``."""
    raw = Path(path).read_bytes()
    if raw.startswith(b"bits="):
        return read_packed(path)
    return parse_bits(raw.decode("ascii", errors="replace").strip())
