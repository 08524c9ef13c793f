"""Bit-stream ingestion and the 0/1 -> -1/+1 rescaling.

Three corpus formats are understood:

``appendix-decimal``
    Blank-line separated records, each the base-10 value of a bit string
    written most-significant bit first.  Lines inside a record are joined
    (a trailing backslash continuation is allowed) and a trailing run of
    non-digit junk such as ``+Null`` is dropped.  Leading zeros of the bit
    string are lost in base 10, so every record is left-padded back to the
    declared record length.
``ascii-bits``
    Characters ``0``/``1``; whitespace is ignored and the stream is cut into
    consecutive records of ``record_length`` bits.
``raw-bytes``
    Binary data unpacked most-significant bit first, then cut like
    ``ascii-bits``.

Record numbers in errors and issues are 1-based.
"""

from __future__ import annotations

import io
import logging
import re
import sys
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Iterator, List, Optional, Union

import numpy as np

from .errors import BitOverflowError, ParseError

logger = logging.getLogger(__name__)

FORMATS = ("appendix-decimal", "ascii-bits", "raw-bytes")

# int()/str() refuse decimal strings longer than this on recent CPythons;
# conversions are split into chunks below the limit.
_DIGIT_CHUNK = 2048


class BitString:
    """An immutable finite string over {0, 1}."""

    __slots__ = ("_bits",)

    def __init__(self, bits: Union[str, Iterable[int], np.ndarray]):
        if isinstance(bits, str):
            if bits.strip("01"):
                raise ParseError(f"non-binary character in {bits[:20]!r}")
            arr = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
        else:
            arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits)
            if arr.size and not np.isin(arr, (0, 1)).all():
                raise ValueError("bits must be 0 or 1")
        self._bits = arr.astype(np.uint8)
        self._bits.flags.writeable = False

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    @property
    def declared_length(self) -> int:
        return int(self._bits.size)

    def __len__(self):
        return int(self._bits.size)

    def __iter__(self):
        return iter(self._bits.tolist())

    def __getitem__(self, item):
        if isinstance(item, slice):
            return BitString(self._bits[item])
        return int(self._bits[item])

    def __eq__(self, other):
        if not isinstance(other, BitString):
            return NotImplemented
        return np.array_equal(self._bits, other._bits)

    def __hash__(self):
        return hash(self._bits.tobytes())

    def __str__(self):
        return (self._bits + ord("0")).tobytes().decode("ascii")

    def __repr__(self):
        text = str(self)
        if len(text) > 32:
            text = text[:29] + "..."
        return f"BitString({text!r}, n={len(self)})"

    def to_int(self) -> int:
        if not len(self):
            return 0
        packed = np.packbits(self._bits)  # pads the tail with zeros
        value = int.from_bytes(packed.tobytes(), "big")
        return value >> (-len(self) % 8)


class SignSequence:
    """An immutable finite sequence over {-1, +1}."""

    __slots__ = ("_signs",)

    def __init__(self, signs: Union[Iterable[int], np.ndarray]):
        arr = np.asarray(list(signs) if not isinstance(signs, np.ndarray) else signs)
        if arr.size and not np.isin(arr, (-1, 1)).all():
            raise ValueError("signs must be -1 or +1")
        self._signs = arr.astype(np.int8)
        self._signs.flags.writeable = False

    @property
    def signs(self) -> np.ndarray:
        return self._signs

    @property
    def length(self) -> int:
        return int(self._signs.size)

    def __len__(self):
        return int(self._signs.size)

    def __iter__(self):
        return iter(self._signs.tolist())

    def __getitem__(self, item):
        if isinstance(item, slice):
            return SignSequence(self._signs[item])
        return int(self._signs[item])

    def __eq__(self, other):
        if not isinstance(other, SignSequence):
            return NotImplemented
        return np.array_equal(self._signs, other._signs)

    def __hash__(self):
        return hash(self._signs.tobytes())

    def __repr__(self):
        head = ",".join(f"{s:+d}" for s in self._signs[:8].tolist())
        tail = ",..." if len(self) > 8 else ""
        return f"SignSequence(({head}{tail}), n={len(self)})"

    def to_bits(self) -> BitString:
        return BitString((self._signs + 1) // 2)


def rescale(b: BitString) -> SignSequence:
    """Map 0 -> -1 and 1 -> +1 element-wise (x -> 2x - 1)."""
    return SignSequence(2 * b.bits.astype(np.int8) - 1)


def _digits_to_int(digits: str) -> int:
    if len(digits) <= _DIGIT_CHUNK:
        return int(digits)
    low_len = len(digits) // 2
    high = _digits_to_int(digits[:-low_len])
    low = _digits_to_int(digits[-low_len:])
    return high * 10**low_len + low


def _int_to_digits(value: int, width: int = 0) -> str:
    """Decimal digits of ``value``, zero-padded to ``width``."""
    if value.bit_length() <= 3 * _DIGIT_CHUNK:
        text = str(value)
        return text.zfill(width) if width else text
    # Split on a power of ten about half the decimal length.
    low_len = int(value.bit_length() * 0.30103) // 2
    high, low = divmod(value, 10**low_len)
    text = _int_to_digits(high) + _int_to_digits(low, low_len)
    return text.zfill(width) if width else text


def _int_to_bits(value: int, length: int) -> np.ndarray:
    nbytes = (length + 7) // 8
    raw = np.frombuffer(value.to_bytes(nbytes, "big"), dtype=np.uint8)
    return np.unpackbits(raw)[8 * nbytes - length:]


_TRAILING_JUNK = re.compile(r"[^0-9]+$")


def clean_decimal(text: str, record: Optional[int] = None) -> str:
    """Join a possibly wrapped decimal record and drop trailing junk."""
    joined = re.sub(r"\\\s*\n", "", text)
    joined = re.sub(r"\s+", "", joined)
    joined = _TRAILING_JUNK.sub("", joined)
    if not joined:
        raise ParseError("no decimal digits", record)
    if not joined.isdigit() or not joined.isascii():
        bad = re.search(r"[^0-9]", joined)
        raise ParseError(
            f"unexpected character {joined[bad.start()]!r} at offset {bad.start()}",
            record)
    return joined


def decode_base10_record(text: str, target_length: int, *,
                         overflow: str = "error",
                         record: Optional[int] = None) -> BitString:
    """Decode a decimal record into exactly ``target_length`` bits.

    With ``overflow="truncate"`` a value wider than ``target_length`` keeps its
    leading ``target_length`` bits instead of raising.
    """
    if target_length < 1:
        raise ValueError("target_length must be positive")
    value = _digits_to_int(clean_decimal(text, record))
    width = value.bit_length()
    if width > target_length:
        if overflow != "truncate":
            raise BitOverflowError(
                f"value needs {width} bits, record length is {target_length}",
                record, width)
        return BitString(_int_to_bits(value, width)[:target_length])
    return BitString(_int_to_bits(value, target_length))


def encode_base10(b: BitString) -> str:
    return _int_to_digits(b.to_int())


@dataclass(frozen=True)
class RecordIssue:
    record: int
    kind: str  # "error" drops the record, "warning" keeps it
    message: str


@dataclass
class Corpus:
    """Records loaded from one source, plus anything worth reporting."""

    records: List[SignSequence]
    record_numbers: List[int]
    issues: List[RecordIssue] = field(default_factory=list)
    format: str = ""
    record_length: int = 0

    def __len__(self):
        return len(self.records)

    def __iter__(self) -> Iterator[SignSequence]:
        return iter(self.records)

    def __getitem__(self, item):
        return self.records[item]

    @property
    def errors(self) -> List[RecordIssue]:
        return [i for i in self.issues if i.kind == "error"]


def _read_source(source) -> bytes:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source)
    if isinstance(source, str):
        return source.encode()
    return source.read()


def split_appendix_records(text: str) -> List[str]:
    return [chunk for chunk in re.split(r"\n[ \t]*\n", text) if chunk.strip()]


def _chunk_bits(bits: np.ndarray, record_length: int, corpus: Corpus):
    full = bits.size // record_length
    for i in range(full):
        chunk = bits[i * record_length:(i + 1) * record_length]
        corpus.records.append(rescale(BitString(chunk)))
        corpus.record_numbers.append(i + 1)
    rest = bits.size - full * record_length
    if rest:
        corpus.issues.append(RecordIssue(
            full + 1, "error",
            f"incomplete record: {rest} bits, record length is {record_length}"))


def load_corpus(source: Union[bytes, str, BinaryIO], format: str,
                record_length: int, *, overflow: str = "error",
                expected_records: Optional[int] = None) -> Corpus:
    """Load every record of ``source`` as a :class:`SignSequence`.

    Bad records are dropped and listed in ``Corpus.issues`` rather than
    aborting the load.  ``overflow`` is forwarded to
    :func:`decode_base10_record`; truncated records are kept with a warning.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
    if record_length < 1:
        raise ValueError("record_length must be positive")
    data = _read_source(source)
    corpus = Corpus([], [], format=format, record_length=record_length)

    if format == "appendix-decimal":
        text = data.decode("utf-8", errors="replace").replace("\r\n", "\n")
        for number, chunk in enumerate(split_appendix_records(text), start=1):
            try:
                bits = decode_base10_record(chunk, record_length, record=number)
            except BitOverflowError as exc:
                if overflow != "truncate":
                    corpus.issues.append(RecordIssue(number, "error", str(exc)))
                    continue
                bits = decode_base10_record(chunk, record_length,
                                            overflow="truncate", record=number)
                corpus.issues.append(RecordIssue(
                    number, "warning",
                    f"{exc.bit_length} bits truncated to the leading {record_length}"))
            except ParseError as exc:
                corpus.issues.append(RecordIssue(number, "error", str(exc)))
                continue
            corpus.records.append(rescale(bits))
            corpus.record_numbers.append(number)
    elif format == "ascii-bits":
        text = re.sub(rb"\s+", b"", data)
        bad = re.search(rb"[^01]", text)
        if bad:
            record = bad.start() // record_length + 1
            corpus.issues.append(RecordIssue(
                record, "error",
                f"non-binary character {text[bad.start():bad.start() + 1]!r}"))
            text = text[:(record - 1) * record_length]
        bits = np.frombuffer(text, dtype=np.uint8) - ord("0")
        _chunk_bits(bits, record_length, corpus)
    else:
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
        _chunk_bits(bits, record_length, corpus)

    if expected_records is not None and len(corpus) != expected_records:
        corpus.issues.append(RecordIssue(
            0, "warning",
            f"expected {expected_records} records, loaded {len(corpus)}"))
    for issue in corpus.issues:
        logger.debug("record %d %s: %s", issue.record, issue.kind, issue.message)
    return corpus


def open_source(path: str) -> bytes:
    """Read a path, or stdin for ``-``."""
    if path == "-":
        return sys.stdin.buffer.read()
    with io.open(path, "rb") as fh:
        return fh.read()
