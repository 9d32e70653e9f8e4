"""Single-file binary store.

Layout: magic "BYST", u32 LE format version, then length-prefixed
sections (u32 LE name length + name, u64 LE payload length + payload),
little-endian throughout.  The first section is a canonical-JSON
manifest (sorted keys, no whitespace) naming every column's kind,
encoding scheme, and physical layout; the parsers for the remaining
sections are chosen from it.  Byte-for-byte reproducibility is part of
the contract: identical inputs must serialize identically.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .bitpacked import BitPackedColumn
from .byteslice import ByteSliceColumn
from .dictionary import CodeAssignment, ColumnKind, Dictionary, FrequencyTable
from .predicate import DEFAULT_LANES, LaneConfig
from .vbp import VbpColumn
from .vbs import VbsColumn, _pad_bytes

__all__ = ["Store", "StoredColumn", "write_store", "read_store",
           "MAGIC", "FORMAT_VERSION"]

MAGIC = b"BYST"
FORMAT_VERSION = 1

_KIND_TAG = {ColumnKind.NUMERIC: 0, ColumnKind.CATEGORICAL: 1,
             ColumnKind.ORDERED_STRING: 2}
_TAG_KIND = {v: k for k, v in _KIND_TAG.items()}
_SCHEME_TAG = {"fixed": 0, "ppe_numerical": 1, "ppe_categorical": 2,
               "prefix_free": 3}
_TAG_SCHEME = {v: k for k, v in _SCHEME_TAG.items()}
_VBP_TAG = {"plain": 0, "padded_encoding": 1}
_TAG_VBP = {v: k for k, v in _VBP_TAG.items()}


@dataclass
class StoredColumn:
    name: str
    kind: ColumnKind
    scheme: str
    layout: str            # bitpacked | byteslice | vbp | pevbp | ppvbs
    dictionary: Dictionary
    column: object


@dataclass
class Store:
    manifest: dict
    columns: dict   # name -> StoredColumn, in manifest order

    @property
    def n_rows(self) -> int:
        return self.manifest["n_rows"]


# ---------------------------------------------------------------------------
# serialization


def _manifest_bytes(manifest: dict) -> bytes:
    return json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode()


def _dict_payload(d: Dictionary) -> bytes:
    a = d.assignment
    parts = [struct.pack("<BBBQ", _KIND_TAG[d.kind], _SCHEME_TAG[a.scheme],
                         a.width_bits, d.n)]
    if d.kind is ColumnKind.NUMERIC:
        parts.append(d.table.values.astype("<i8").tobytes())
    else:
        for v in d.table.values.tolist():
            raw = str(v).encode()
            parts.append(struct.pack("<I", len(raw)) + raw)
    parts.append(a.codes.astype("<u8").tobytes())
    parts.append(a.lengths.astype("u1").tobytes())
    return b"".join(parts)


def _parse_dict(buf: bytes) -> Dictionary:
    kind_tag, scheme_tag, width_bits, n = struct.unpack_from("<BBBQ", buf, 0)
    off = struct.calcsize("<BBBQ")
    kind = _TAG_KIND[kind_tag]
    if kind is ColumnKind.NUMERIC:
        values = np.frombuffer(buf, "<i8", count=n, offset=off).astype(np.int64)
        off += 8 * n
    else:
        out = []
        for _ in range(n):
            (ln,) = struct.unpack_from("<I", buf, off)
            off += 4
            out.append(buf[off: off + ln].decode())
            off += ln
        values = np.array(out, dtype=object)
    codes = np.frombuffer(buf, "<u8", count=n, offset=off).astype(np.uint64)
    off += 8 * n
    lengths = np.frombuffer(buf, "u1", count=n, offset=off).astype(np.uint8)
    table = FrequencyTable(values, np.ones(n, dtype=np.int64), kind)
    assignment = CodeAssignment(codes, lengths, _TAG_SCHEME[scheme_tag],
                                width_bits=width_bits)
    return Dictionary(table, assignment)


def _vbs_payload(col: VbsColumn) -> bytes:
    parts = [struct.pack("<BQ", col.max_len, col.n_rows)]
    for j in range(1, col.max_len + 1):
        raw = col.slices[j - 1][: col.slice_len(j)].tobytes()
        parts.append(struct.pack("<Q", len(raw)) + raw)
    for packed in col.exist_bits:
        parts.append(_pad_bytes(packed, 4).tobytes())
    parts.append(col.block_dir.astype("<u4").tobytes())
    return b"".join(parts)


def _parse_vbs(buf: bytes, lanes: LaneConfig) -> VbsColumn:
    max_len, n_rows = struct.unpack_from("<BQ", buf, 0)
    off = struct.calcsize("<BQ")
    n_blocks = lanes.n_blocks(n_rows)
    L = lanes.lane_count
    padded_rows = n_blocks * L
    slices = []
    for _ in range(max_len):
        (ln,) = struct.unpack_from("<Q", buf, off)
        off += 8
        slices.append(np.frombuffer(buf, "u1", count=ln, offset=off).copy())
        off += ln
    first = np.zeros(padded_rows, dtype=np.uint8)
    first[:n_rows] = slices[0]
    slices[0] = first
    exist_len = n_blocks * (L // 8)
    stored = -(-exist_len // 4) * 4
    exist_bits, lane_of, word_pops = [], [], []
    for _ in range(max_len - 1):
        packed = np.frombuffer(buf, "u1", count=stored, offset=off)[:exist_len].copy()
        off += stored
        exist_bits.append(packed)
        rows = np.flatnonzero(np.unpackbits(packed, bitorder="little")[:padded_rows])
        lane_of.append((rows % L).astype(np.uint8))
        w32 = _pad_bytes(packed, 4).view(np.uint32)
        pops = np.zeros(len(w32) + 1, dtype=np.int64)
        np.cumsum(np.bitwise_count(w32).astype(np.int64), out=pops[1:])
        word_pops.append(pops)
    grid = max(max_len - 1, 0) * (n_blocks + 1)
    block_dir = (np.frombuffer(buf, "<u4", count=grid, offset=off)
                 .astype(np.int64).reshape(max(max_len - 1, 0), n_blocks + 1))
    return VbsColumn(n_rows, max_len, lanes, slices, exist_bits, block_dir,
                     lane_of, word_pops)


def _byteslice_payload(col: ByteSliceColumn) -> bytes:
    parts = [struct.pack("<BQ", col.width_bits, col.n_rows)]
    for j in range(col.n_slices):
        parts.append(col.slices[j][: col.n_rows].tobytes())
    return b"".join(parts)


def _parse_byteslice(buf: bytes, lanes: LaneConfig) -> ByteSliceColumn:
    w, n_rows = struct.unpack_from("<BQ", buf, 0)
    off = struct.calcsize("<BQ")
    n_slices = -(-w // 8)
    padded = lanes.n_blocks(n_rows) * lanes.lane_count
    slices = np.zeros((n_slices, padded), dtype=np.uint8)
    for j in range(n_slices):
        slices[j, :n_rows] = np.frombuffer(buf, "u1", count=n_rows, offset=off)
        off += n_rows
    return ByteSliceColumn(n_rows, w, lanes, slices)


def _bitpacked_payload(col: BitPackedColumn) -> bytes:
    return struct.pack("<BQ", col.w, col.n_rows) + col.bits.tobytes()


def _parse_bitpacked(buf: bytes, lanes: LaneConfig) -> BitPackedColumn:
    w, n_rows = struct.unpack_from("<BQ", buf, 0)
    off = struct.calcsize("<BQ")
    count = (n_rows * w + 7) // 8
    bits = np.frombuffer(buf, "u1", count=count, offset=off).copy()
    return BitPackedColumn(n_rows, w, bits)


def _vbp_payload(col: VbpColumn) -> bytes:
    return (struct.pack("<BBQ", col.w_max, _VBP_TAG[col.kind], col.n_rows)
            + col.planes.astype("<u4").tobytes())


def _parse_vbp(buf: bytes, lanes: LaneConfig) -> VbpColumn:
    w_max, kind_tag, n_rows = struct.unpack_from("<BBQ", buf, 0)
    off = struct.calcsize("<BBQ")
    n_words = (n_rows + 31) // 32
    planes = (np.frombuffer(buf, "<u4", count=w_max * n_words, offset=off)
              .astype(np.uint32).reshape(w_max, n_words))
    return VbpColumn(n_rows, w_max, _TAG_VBP[kind_tag], planes)


_LAYOUT_IO = {
    "ppvbs": (_vbs_payload, _parse_vbs),
    "byteslice": (_byteslice_payload, _parse_byteslice),
    "bitpacked": (_bitpacked_payload, _parse_bitpacked),
    "vbp": (_vbp_payload, _parse_vbp),
    "pevbp": (_vbp_payload, _parse_vbp),
}


def _section(name: str, payload: bytes) -> bytes:
    raw = name.encode()
    return struct.pack("<I", len(raw)) + raw + struct.pack("<Q", len(payload)) + payload


def write_store(path, store: Store) -> None:
    if store.manifest.get("format_version") != FORMAT_VERSION:
        raise ValueError("manifest format_version mismatch")
    blob = [MAGIC, struct.pack("<I", FORMAT_VERSION)]
    blob.append(_section("manifest", _manifest_bytes(store.manifest)))
    for entry in store.manifest["columns"]:
        col = store.columns[entry["name"]]
        blob.append(_section(f"col:{col.name}:dict", _dict_payload(col.dictionary)))
        payload = _LAYOUT_IO[col.layout][0](col.column)
        blob.append(_section(f"col:{col.name}:layout", payload))
    with open(path, "wb") as fh:
        fh.write(b"".join(blob))


def read_store(path) -> Store:
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != MAGIC:
        raise ValueError("not a store file (bad magic)")
    (version,) = struct.unpack_from("<I", buf, 4)
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported store format version {version}")
    off = 8
    sections = {}
    order = []
    while off < len(buf):
        (nlen,) = struct.unpack_from("<I", buf, off)
        off += 4
        name = buf[off: off + nlen].decode()
        off += nlen
        (plen,) = struct.unpack_from("<Q", buf, off)
        off += 8
        sections[name] = buf[off: off + plen]
        order.append(name)
        off += plen
    if not order or order[0] != "manifest":
        raise ValueError("store file missing leading manifest section")
    manifest = json.loads(sections["manifest"].decode())
    lanes = LaneConfig(manifest.get("lane_count", DEFAULT_LANES.lane_count))
    columns = {}
    for entry in manifest["columns"]:
        name = entry["name"]
        dictionary = _parse_dict(sections[f"col:{name}:dict"])
        layout = entry["layout"]
        column = _LAYOUT_IO[layout][1](sections[f"col:{name}:layout"], lanes)
        columns[name] = StoredColumn(name, dictionary.kind,
                                     dictionary.assignment.scheme, layout,
                                     dictionary, column)
    return Store(manifest, columns)
