"""
Framed binary files: magic, u16 version, payload, trailing CRC32.

The database, model and dataset formats all share this framing; their
payloads are written with BinaryWriter and decoded with BinaryReader.
"""

import os
import struct
import zlib
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ChecksumError, FileFormatError, FormatVersionError

PathLike = Union[str, Path]


class BinaryWriter:
    """Little-endian payload builder"""

    def __init__(self):
        self._chunks = []

    def u8(self, value: int) -> "BinaryWriter":
        self._chunks.append(struct.pack("<B", value))
        return self

    def u16(self, value: int) -> "BinaryWriter":
        self._chunks.append(struct.pack("<H", value))
        return self

    def u32(self, value: int) -> "BinaryWriter":
        self._chunks.append(struct.pack("<I", value))
        return self

    def u64(self, value: int) -> "BinaryWriter":
        self._chunks.append(struct.pack("<Q", value))
        return self

    def f64(self, value: float) -> "BinaryWriter":
        self._chunks.append(struct.pack("<d", value))
        return self

    def text(self, value: str) -> "BinaryWriter":
        """Length-prefixed (u32) UTF-8 string"""
        data = value.encode("utf-8")
        self.u32(len(data))
        self._chunks.append(data)
        return self

    def array(self, values: np.ndarray, dtype: str) -> "BinaryWriter":
        self._chunks.append(np.ascontiguousarray(values, dtype=dtype).tobytes())
        return self

    def raw(self, data: bytes) -> "BinaryWriter":
        self._chunks.append(data)
        return self

    def getvalue(self) -> bytes:
        return b"".join(self._chunks)


class BinaryReader:
    """Cursor over a payload; every read is bounds-checked"""

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def _take(self, size: int) -> bytes:
        if self._pos + size > len(self._data):
            raise FileFormatError("unexpected end of payload")
        chunk = self._data[self._pos:self._pos + size]
        self._pos += size
        return chunk

    def u8(self) -> int:
        return struct.unpack("<B", self._take(1))[0]

    def u16(self) -> int:
        return struct.unpack("<H", self._take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self._take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self._take(8))[0]

    def text(self) -> str:
        size = self.u32()
        return self._take(size).decode("utf-8")

    def array(self, count: int, dtype: str) -> np.ndarray:
        itemsize = np.dtype(dtype).itemsize
        return np.frombuffer(self._take(count * itemsize), dtype=dtype).copy()

    def raw(self, size: int) -> bytes:
        return self._take(size)

    def at_end(self) -> bool:
        return self._pos == len(self._data)


def crc32(data: bytes) -> int:
    return zlib.crc32(data) & 0xFFFFFFFF


def frame(magic: bytes, version: int, payload: bytes) -> bytes:
    """Wrap a payload as magic + version + payload + CRC32"""
    body = magic + struct.pack("<H", version) + payload
    return body + struct.pack("<I", crc32(body))


def unframe(data: bytes, magic: bytes, version: int) -> bytes:
    """Validate CRC, magic and version; return the payload"""
    header = len(magic) + 2
    if len(data) < header + 4:
        raise ChecksumError("file too short to carry a checksum")
    body, stored = data[:-4], struct.unpack("<I", data[-4:])[0]
    if crc32(body) != stored:
        raise ChecksumError("CRC32 mismatch")
    if body[:len(magic)] != magic:
        raise FileFormatError(f"bad magic {body[:len(magic)]!r}, expected {magic!r}")
    found = struct.unpack("<H", body[len(magic):header])[0]
    if found != version:
        raise FormatVersionError(f"format version {found} is not supported (reader expects {version})")
    return body[header:]


def write_framed(path: PathLike, magic: bytes, version: int, payload: bytes) -> None:
    """Write atomically through a temp file; the temp file is removed on failure"""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "wb") as handle:
            handle.write(frame(magic, version, payload))
        os.replace(tmp, path)
    except OSError:
        if tmp.exists():
            tmp.unlink()
        raise


def read_framed(path: PathLike, magic: bytes, version: int) -> bytes:
    with open(path, "rb") as handle:
        data = handle.read()
    return unframe(data, magic, version)
