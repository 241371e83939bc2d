"""
Raw k-space files.

A file is a plain-text header of ``key=value`` lines closed by an empty
line, followed by little-endian float32 (real, imag) pairs stored coil-major
then row-major. Masks use the same container as a single real-valued coil.
"""
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
import torch

from ... import Context, KSpaceVolume, SamplingMask
from ...util.utility import (HeaderParseError, HeaderPayloadMismatchError,
                             TruncatedPayloadError, ValidationError)

__all__ = ['RAW_FORMAT', 'RAW_VERSION', 'RawKSpaceFile', 'decode_raw',
           'read_raw', 'write_raw', 'read_mask', 'write_mask']

RAW_FORMAT = 'pksynth-raw'
RAW_VERSION = '1'
_REQUIRED = ('format', 'version', 'coils', 'rows', 'cols')
_FLOAT = np.dtype('<f4')


@dataclass
class RawKSpaceFile:
    volume: KSpaceVolume
    header: Dict[str, str] = field(default_factory=OrderedDict)

    def __post_init__(self):
        header = OrderedDict(format=RAW_FORMAT, version=RAW_VERSION,
                             coils=str(self.volume.n_coils),
                             rows=str(self.volume.rows),
                             cols=str(self.volume.cols))
        for key, value in self.header.items():
            if key not in header:
                header[key] = str(value)
        self.header = header

    @property
    def label(self) -> str:
        return self.header.get('label', '')

    @property
    def domain(self) -> str:
        return self.header.get('domain', 'kspace')

    def encode(self) -> bytes:
        lines = []
        for key, value in self.header.items():
            if '=' in key or '\n' in key + value:
                raise ValidationError(f"header entry {key!r}={value!r} "
                                      f"cannot be stored")
            lines.append(f"{key}={value}\n")
        data = Context.convert_to_ndarray(self.volume.data)
        pairs = np.stack([data.real, data.imag], axis=-1).astype(_FLOAT)
        return ''.join(lines).encode('ascii') + b'\n' + pairs.tobytes()


def _parse_header(text: bytes) -> Dict[str, str]:
    try:
        lines = text.decode('ascii').split('\n')
    except UnicodeDecodeError:
        raise HeaderParseError("raw header is not ASCII text")
    header = OrderedDict()
    for line in lines:
        key, sep, value = line.partition('=')
        if not sep or not key:
            raise HeaderParseError(f"malformed header line {line!r}")
        header[key] = value
    missing = [key for key in _REQUIRED if key not in header]
    if missing:
        raise HeaderParseError(f"raw header lacks {', '.join(missing)}")
    if header['format'] != RAW_FORMAT:
        raise HeaderParseError(f"unknown raw format {header['format']!r}")
    for key in ('coils', 'rows', 'cols'):
        try:
            if int(header[key]) < 1:
                raise ValueError
        except ValueError:
            raise HeaderParseError(f"header {key}={header[key]!r} is not a "
                                   f"positive integer")
    return header


def decode_raw(blob: bytes, context: Optional[Context] = None
               ) -> RawKSpaceFile:
    context = context or Context()
    header_end = blob.find(b'\n\n')
    if header_end < 0:
        raise HeaderParseError("raw header is not terminated by an empty "
                               "line")
    header = _parse_header(blob[:header_end])
    payload = blob[header_end + 2:]

    coils, rows, cols = (int(header[key]) for key in ('coils', 'rows', 'cols'))
    expected = coils * rows * cols * 2
    if len(payload) % _FLOAT.itemsize:
        raise TruncatedPayloadError(f"payload of {len(payload)} bytes is not "
                                    f"a whole number of float32 values")
    found = len(payload) // _FLOAT.itemsize
    if found > expected:
        raise HeaderPayloadMismatchError(
            f"payload holds {found} floats, header declares {expected}")
    if found < expected:
        if found % (rows * cols * 2):
            raise TruncatedPayloadError(
                f"payload ends after {found} of {expected} floats")
        raise HeaderPayloadMismatchError(
            f"payload holds {found // (rows * cols * 2)} coil planes, "
            f"header declares {coils}")

    pairs = np.frombuffer(payload, dtype=_FLOAT).reshape(coils, rows, cols, 2)
    data = pairs[..., 0].astype(np.float64) + 1j * pairs[..., 1]
    volume = KSpaceVolume(context.convert_to_complex(data))
    return RawKSpaceFile(volume, header)


def read_raw(path: Union[str, Path], context: Optional[Context] = None
             ) -> RawKSpaceFile:
    return decode_raw(Path(path).read_bytes(), context)


def write_raw(path: Union[str, Path],
              data: Union[KSpaceVolume, RawKSpaceFile, torch.Tensor],
              **header) -> RawKSpaceFile:
    """Write a volume (or an already loaded file) and return what was
    written. Extra keyword arguments become header entries."""
    if isinstance(data, RawKSpaceFile):
        merged = OrderedDict(data.header)
        merged.update({k: str(v) for k, v in header.items()})
        raw = RawKSpaceFile(data.volume, merged)
    else:
        volume = data if isinstance(data, KSpaceVolume) else KSpaceVolume(data)
        raw = RawKSpaceFile(volume, OrderedDict(
            (k, str(v)) for k, v in header.items()))
    Path(path).write_bytes(raw.encode())
    return raw


def write_mask(path: Union[str, Path], mask: SamplingMask) -> RawKSpaceFile:
    indicator = mask.indicator.to(torch.float64)[None]
    return write_raw(path, KSpaceVolume(indicator), domain='mask',
                     nominal_R=repr(float(mask.nominal_R)), seed=mask.seed,
                     family=mask.family)


def read_mask(path: Union[str, Path]) -> SamplingMask:
    raw = read_raw(path)
    data = raw.volume.data
    if raw.volume.n_coils != 1 or bool((data.imag != 0).any()):
        raise ValidationError(f"{path} does not hold a real single-plane "
                              f"mask")
    try:
        nominal_R = float(raw.header.get('nominal_R', 1.0))
        seed = int(raw.header.get('seed', 0))
    except ValueError as error:
        raise HeaderParseError(f"bad mask metadata in {path}: {error}")
    return SamplingMask(data.real[0], nominal_R, seed,
                        raw.header.get('family', 'custom'))
