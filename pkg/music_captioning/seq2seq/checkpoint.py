"""
Binary checkpoint format (all integers little-endian):

    b"MCAP" | u8 version (0x01)
    u32 tensor count
    per tensor: u16 name length | UTF-8 name | u8 rank | rank x u64 dims | prod(dims) x f64 values
    u32 config length | UTF-8 config JSON

Nothing may follow the config JSON.
"""
import json
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Tuple, Union

import numpy as np

from ..errors import CheckpointFormatError, DataError

logger = logging.getLogger(__name__)

MAGIC = b"MCAP"
VERSION = 1

_U8 = struct.Struct("<B")
_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")
_F64 = np.dtype("<f8")


@dataclass
class Checkpoint:
    version: int
    tensors: Dict[str, np.ndarray]
    config: Dict[str, Any]


@dataclass
class CheckpointHeader:
    version: int
    shapes: List[Tuple[str, Tuple[int, ...]]]
    config: Dict[str, Any]


def encode_checkpoint(tensors: Mapping[str, np.ndarray], config: Mapping[str, Any]) -> bytes:
    """Serialize named tensors (in mapping order) and a JSON-able config"""
    chunks = [MAGIC, _U8.pack(VERSION), _U32.pack(len(tensors))]
    for name, value in tensors.items():
        value = np.asarray(value, dtype=np.float64)
        encoded_name = name.encode("utf-8")
        chunks.append(_U16.pack(len(encoded_name)))
        chunks.append(encoded_name)
        chunks.append(_U8.pack(value.ndim))
        chunks.extend(_U64.pack(dim) for dim in value.shape)
        chunks.append(np.ascontiguousarray(value, dtype=_F64).tobytes())
    payload = json.dumps(config, sort_keys=True, separators=(",", ":")).encode("utf-8")
    chunks.append(_U32.pack(len(payload)))
    chunks.append(payload)
    return b"".join(chunks)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    @property
    def remaining(self) -> int:
        return len(self.data) - self.offset

    def take(self, size: int, what: str) -> bytes:
        if size > self.remaining:
            raise CheckpointFormatError(f"truncated checkpoint while reading {what} at byte {self.offset}",
                                        offset=self.offset)
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: struct.Struct, what: str) -> int:
        return fmt.unpack(self.take(fmt.size, what))[0]


def decode_checkpoint(data: bytes) -> Checkpoint:
    reader = _Reader(bytes(data))
    if reader.take(len(MAGIC), "magic") != MAGIC:
        raise CheckpointFormatError("not a checkpoint: magic bytes mismatch")
    version = reader.unpack(_U8, "version")
    if version != VERSION:
        raise CheckpointFormatError(f"unsupported checkpoint version {version}", version=version)

    tensors: Dict[str, np.ndarray] = {}
    for _ in range(reader.unpack(_U32, "tensor count")):
        raw_name = reader.take(reader.unpack(_U16, "name length"), "tensor name")
        try:
            name = raw_name.decode("utf-8")
        except UnicodeDecodeError as e:
            raise CheckpointFormatError(f"tensor name is not valid UTF-8 at byte {reader.offset}") from e
        if name in tensors:
            raise CheckpointFormatError(f"duplicate tensor '{name}'", tensor=name)

        rank = reader.unpack(_U8, f"rank of '{name}'")
        shape = tuple(reader.unpack(_U64, f"dims of '{name}'") for _ in range(rank))
        count = int(np.prod(shape, dtype=object)) if shape else 1
        if count * _F64.itemsize > reader.remaining:
            raise CheckpointFormatError(f"truncated checkpoint: tensor '{name}' {shape} exceeds file size",
                                        tensor=name)
        values = np.frombuffer(reader.take(count * _F64.itemsize, f"values of '{name}'"), dtype=_F64)
        if not np.all(np.isfinite(values)):
            raise CheckpointFormatError(f"tensor '{name}' contains non-finite values", tensor=name)
        tensors[name] = values.astype(np.float64).reshape(shape)

    payload = reader.take(reader.unpack(_U32, "config length"), "config JSON")
    if reader.remaining:
        raise CheckpointFormatError(f"{reader.remaining} trailing bytes after config JSON")
    try:
        config = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointFormatError(f"config block is not valid JSON: {e}") from e
    if not isinstance(config, dict):
        raise CheckpointFormatError("config block must be a JSON object")

    return Checkpoint(version, tensors, config)


def save_checkpoint(path: Union[str, Path], tensors: Mapping[str, np.ndarray], config: Mapping[str, Any]):
    path = Path(path)
    data = encode_checkpoint(tensors, config)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as e:
        raise DataError(f"Cannot write checkpoint to {path}: {e}", path=str(path)) from e
    logger.info(f"Wrote checkpoint with {len(tensors)} tensors ({len(data)} bytes) to {path}")


def read_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """Read and structurally validate a checkpoint file"""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise DataError(f"Cannot read checkpoint {path}: {e}", path=str(path)) from e
    try:
        return decode_checkpoint(data)
    except CheckpointFormatError as e:
        e.context.setdefault("path", str(path))
        raise


def read_checkpoint_header(path: Union[str, Path]) -> CheckpointHeader:
    """Validate the file and return version, tensor names/shapes and config"""
    checkpoint = read_checkpoint(path)
    shapes = [(name, tuple(value.shape)) for name, value in checkpoint.tensors.items()]
    return CheckpointHeader(checkpoint.version, shapes, checkpoint.config)


def check_against_template(checkpoint: Checkpoint, template: Mapping[str, np.ndarray]):
    """The checkpoint must hold exactly the template's tensor names with matching shapes"""
    unknown = [name for name in checkpoint.tensors if name not in template]
    if unknown:
        raise CheckpointFormatError(f"unknown tensor '{unknown[0]}'", tensor=unknown[0])
    missing = [name for name in template if name not in checkpoint.tensors]
    if missing:
        raise CheckpointFormatError(f"missing tensor '{missing[0]}'", tensor=missing[0])
    for name, expected in template.items():
        shape = checkpoint.tensors[name].shape
        if shape != expected.shape:
            raise CheckpointFormatError(f"tensor '{name}' has shape {shape}, configuration expects {expected.shape}",
                                        tensor=name)


def load_checkpoint(path: Union[str, Path], template: Mapping[str, np.ndarray]) -> Checkpoint:
    """Read a checkpoint and check it against a parameter template"""
    checkpoint = read_checkpoint(path)
    try:
        check_against_template(checkpoint, template)
    except CheckpointFormatError as e:
        e.context.setdefault("path", str(path))
        raise
    return checkpoint
