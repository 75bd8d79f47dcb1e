"""Record-oriented data section codec.

A record holds ``samples_per_record`` consecutive samples of channel 1, then
of channel 2, and so on; the data section is the concatenation of all
records. Sparse channels (samples_per_record == 0) contribute no bytes here.
24-bit integers are stored in 3 little-endian bytes; the 16-byte float type
passes through as opaque bytes and is never scaled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import type_info
from .errors import DomainError, TruncatedDataError
from .header import ChannelInfo


@dataclass(frozen=True)
class ChannelLayout:
    """Placement of one channel inside a record; sparse channels have no offset."""

    index: int
    samples_per_record: int
    gdf_type: int
    offset: int | None
    dig_min: float = 0.0
    dig_max: float = 0.0

    @property
    def is_sparse(self) -> bool:
        return self.samples_per_record == 0


@dataclass(frozen=True)
class RecordLayout:
    channels: tuple[ChannelLayout, ...]
    bytes_per_record: int


def layout_from_channels(channels: Sequence[ChannelInfo]) -> RecordLayout:
    """Assign record-local byte offsets in channel order."""
    entries = []
    offset = 0
    for i, ch in enumerate(channels):
        info = type_info(ch.gdf_type)
        if ch.is_sparse:
            entries.append(ChannelLayout(i, 0, int(ch.gdf_type), None,
                                         ch.cal.dig_min, ch.cal.dig_max))
            continue
        entries.append(ChannelLayout(i, ch.samples_per_record, int(ch.gdf_type),
                                     offset, ch.cal.dig_min, ch.cal.dig_max))
        offset += ch.samples_per_record * info.size
    return RecordLayout(tuple(entries), offset)


def decode_int24(b0: int, b1: int, b2: int, signed: bool = True) -> int:
    """Assemble one 3-byte little-endian integer."""
    value = b0 | (b1 << 8) | (b2 << 16)
    if signed and value & 0x800000:
        value -= 1 << 24
    return value


def encode_int24(value: int, signed: bool = True) -> bytes:
    if signed:
        if not -(1 << 23) <= value < 1 << 23:
            raise DomainError(f"{value} outside int24 range")
    elif not 0 <= value < 1 << 24:
        raise DomainError(f"{value} outside uint24 range")
    return (value & 0xFFFFFF).to_bytes(3, "little")


def _decode_samples(raw: np.ndarray, gdf_type: int) -> np.ndarray:
    """Raw little-endian bytes of one channel -> sample array."""
    info = type_info(gdf_type)
    if info.kind == "opaque":
        return raw.reshape(-1, info.size).copy()
    if info.size == 3:
        b = raw.reshape(-1, 3).astype(np.uint32)
        value = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        if info.min < 0:
            out = value.astype(np.int32)
            out[value & 0x800000 != 0] -= 1 << 24
            return out
        return value
    return np.frombuffer(raw.tobytes(), dtype=info.dtype).copy()


def _encode_samples(samples: np.ndarray, gdf_type: int) -> np.ndarray:
    """Sample array -> raw little-endian bytes (uint8 array)."""
    info = type_info(gdf_type)
    if info.kind == "opaque":
        flat = np.ascontiguousarray(samples, dtype=np.uint8)
        if flat.size != samples.shape[0] * info.size:
            raise DomainError("opaque samples must be rows of 16 bytes")
        return flat.reshape(-1)
    if info.size == 3:
        v = np.asarray(samples).astype(np.int64)
        if info.min < 0:
            if np.any((v < info.min) | (v > info.max)):
                raise DomainError("sample outside int24 range")
        elif np.any((v < 0) | (v > info.max)):
            raise DomainError("sample outside uint24 range")
        v = (v & 0xFFFFFF).astype(np.uint32)
        out = np.empty((v.size, 3), dtype=np.uint8)
        out[:, 0] = v & 0xFF
        out[:, 1] = (v >> 8) & 0xFF
        out[:, 2] = (v >> 16) & 0xFF
        return out.reshape(-1)
    arr = np.ascontiguousarray(samples, dtype=info.dtype)
    return np.frombuffer(arr.tobytes(), dtype=np.uint8).copy()


@dataclass
class SignalBlock:
    """Decoded samples of all continuous channels.

    ``samples[i]`` is the record-concatenated raw array of channel ``i``
    (None for sparse channels; an (n, 16) uint8 array for the opaque 16-byte
    float type). ``validity[i]`` is True where the raw value lies within the
    channel's digital bounds; it is derived data and ignored by equality.
    """

    samples: list[np.ndarray | None]
    n_records: int
    validity: list[np.ndarray | None] = field(default_factory=list)

    def __eq__(self, other):
        if not isinstance(other, SignalBlock):
            return NotImplemented
        if self.n_records != other.n_records or len(self.samples) != len(other.samples):
            return False
        for a, b in zip(self.samples, other.samples):
            if (a is None) != (b is None):
                return False
            if a is None:
                continue
            if a.dtype != b.dtype or a.shape != b.shape:
                return False
            equal_nan = a.dtype.kind == "f"
            if not np.array_equal(a, b, equal_nan=equal_nan):
                return False
        return True

    @classmethod
    def empty(cls) -> "SignalBlock":
        return cls([], 0, [])


def _validity(samples: np.ndarray | None, entry: ChannelLayout) -> np.ndarray | None:
    if samples is None:
        return None
    if type_info(entry.gdf_type).kind == "opaque":
        return None
    with np.errstate(invalid="ignore"):
        return (samples >= entry.dig_min) & (samples <= entry.dig_max)


def decode_records(data: bytes, layout: RecordLayout, n_records: int) -> SignalBlock:
    """Split the data section into per-channel sample arrays.

    The byte count must equal ``n_records * bytes_per_record`` exactly;
    anything else raises :class:`TruncatedDataError` reporting how many
    complete records are present.
    """
    if n_records < 0:
        raise DomainError(f"record count {n_records} is negative")
    expected = n_records * layout.bytes_per_record
    if len(data) != expected:
        bpr = layout.bytes_per_record
        complete = len(data) // bpr if bpr else 0
        raise TruncatedDataError(
            f"data section has {len(data)} bytes, expected {expected} "
            f"({complete} complete records)",
            rule="data.truncated",
            complete_records=complete,
            remainder_bytes=len(data) - complete * bpr)
    grid = np.frombuffer(data, dtype=np.uint8).reshape(n_records, layout.bytes_per_record)
    samples: list[np.ndarray | None] = []
    validity: list[np.ndarray | None] = []
    for entry in layout.channels:
        if entry.is_sparse:
            samples.append(None)
            validity.append(None)
            continue
        width = entry.samples_per_record * type_info(entry.gdf_type).size
        chunk = np.ascontiguousarray(grid[:, entry.offset:entry.offset + width])
        arr = _decode_samples(chunk.reshape(-1), entry.gdf_type)
        samples.append(arr)
        validity.append(_validity(arr, entry))
    return SignalBlock(samples, n_records, validity)


def encode_records(block: SignalBlock, layout: RecordLayout) -> bytes:
    """Interleave per-channel arrays back into records; inverse of decode."""
    if len(block.samples) != len(layout.channels):
        raise DomainError(f"block has {len(block.samples)} channels, layout "
                          f"{len(layout.channels)}")
    n = block.n_records
    for entry in layout.channels:
        arr = block.samples[entry.index]
        if entry.is_sparse:
            if arr is not None and len(arr) > 0:
                raise DomainError(f"channel {entry.index} is sparse but carries samples")
            continue
        if arr is None or len(arr) != n * entry.samples_per_record:
            have = "none" if arr is None else str(len(arr))
            raise DomainError(
                f"channel {entry.index} needs {n * entry.samples_per_record} "
                f"samples for {n} records, has {have}")
    out = np.zeros((n, layout.bytes_per_record), dtype=np.uint8)
    for entry in layout.channels:
        if entry.is_sparse:
            continue
        width = entry.samples_per_record * type_info(entry.gdf_type).size
        raw = _encode_samples(block.samples[entry.index], entry.gdf_type)
        out[:, entry.offset:entry.offset + width] = raw.reshape(n, width)
    return out.tobytes()


@dataclass(frozen=True)
class OverflowReport:
    """Saturation summary of one channel."""

    channel: int
    n_samples: int
    n_invalid: int
    raw_min: float | None
    raw_max: float | None

    @property
    def saturation_ratio(self) -> float:
        return self.n_invalid / self.n_samples if self.n_samples else 0.0


def overflow_scan(block: SignalBlock, channels: Sequence[ChannelInfo]) -> list[OverflowReport]:
    """Count samples outside each channel's digital bounds."""
    reports = []
    for i, ch in enumerate(channels):
        arr = block.samples[i] if i < len(block.samples) else None
        if arr is None or type_info(ch.gdf_type).kind == "opaque" or arr.size == 0:
            reports.append(OverflowReport(i, 0 if arr is None else len(arr), 0, None, None))
            continue
        with np.errstate(invalid="ignore"):
            valid = (arr >= ch.cal.dig_min) & (arr <= ch.cal.dig_max)
        finite = arr[~np.isnan(arr)] if arr.dtype.kind == "f" else arr
        reports.append(OverflowReport(
            channel=i,
            n_samples=int(arr.size),
            n_invalid=int(arr.size - np.count_nonzero(valid)),
            raw_min=float(finite.min()) if finite.size else None,
            raw_max=float(finite.max()) if finite.size else None,
        ))
    return reports
