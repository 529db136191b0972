#!/usr/bin/env python
# vim: sw=4:ts=4:sts=4:fdm=indent:fdl=0:
# -*- coding: UTF8 -*-
#
# Seed compression of local randomizers.
# Copyright (C) 2026 The ldpcompress developers
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.

"""Wire format of report files.

    magic 'LDPC' | version u8 | scheme tag u8 | layout u8
    parameter block (frequency or mean, below)
    record count u32
    records, all the same size

Integers are little endian.  Frequency parameters are

    k u32 | p u64 | dim u8 | variant u8 | eps f64 | alpha0 u64/u64 | alpha1 u64/u64

and mean parameters are

    d u32 | eps f64 | theta f64 | seed bits u16 | m_reps u16 | generator u8

Affine function records are either one u64 word per coefficient
(WORDS) or ceil(log2 p) bits per coefficient packed into whole bytes
(PACKED).  RAPPOR records are the k bits packed into whole bytes.
Seeds are written big endian in ceil(bits / 8) bytes, followed for
PrivHS by one sign byte (1 or 255).  Raw vectors are d f64 values.
"""

import struct
from fractions import Fraction
from typing import Sequence

import numpy as np

from .field import field_bits
from .freq import VARIANTS, AffineFn, RapporParams
from .mean import (MeanParams, MeanReport, priv_hs_params, priv_unit_params,
                   sphere_prg)
from .randcore import PRG_FAMILIES, PrgSpec, Seed
from .utils import WireError, info_print

MAGIC = b'LDPC'
VERSION = 1

WORDS = 0
PACKED = 1
LAYOUTS = {'words': WORDS, 'packed': PACKED}

FREQ_TAGS = {'rappor': 1, 'pi-rappor': 2, 'gen-pi-rappor': 3, 'noiseless': 4}
MEAN_TAGS = {'privhs': 16, 'privunit-seed': 17, 'privunit': 18}
SCHEME_NAMES = {tag: name for name, tag in {**FREQ_TAGS, **MEAN_TAGS}.items()}

_HEADER = struct.Struct('<4sBBB')
_FREQ_BLOCK = struct.Struct('<IQBBdQQQQ')
_MEAN_BLOCK = struct.Struct('<IddHHB')
_COUNT = struct.Struct('<I')

_SIGN_BYTES = {1: b'\x01', -1: b'\xff'}


def _bit_reports(scheme: str) -> bool:
    """True for schemes whose records are RAPPOR bit vectors."""
    return scheme in ('rappor', 'noiseless')


def message_bits(scheme: str, params, seed_bits: int = 256) -> int:
    """Return the bits in one message of scheme, before byte packing."""
    if _bit_reports(scheme):
        return params.k
    if scheme in ('pi-rappor', 'gen-pi-rappor'):
        return params.report_bits
    if scheme == 'privhs':
        return seed_bits + 8
    if scheme == 'privunit-seed':
        return seed_bits
    if scheme == 'privunit':
        return 64 * params.d
    raise(ValueError(f"Unknown scheme: {scheme}"))


def record_bytes(scheme: str, params, seed_bits: int = 256,
                 layout: int = PACKED) -> int:
    """Return the bytes in one record of scheme."""
    if scheme in ('pi-rappor', 'gen-pi-rappor') and layout == WORDS:
        return 8 * params.coefficient_count
    if scheme == 'privhs':
        return (seed_bits + 7) // 8 + 1
    return (message_bits(scheme, params, seed_bits) + 7) // 8


def _header(tag: int, layout: int) -> bytes:
    """Return the fixed header."""
    return _HEADER.pack(MAGIC, VERSION, tag, layout)


def _read_header(data: bytes) -> tuple[str, int]:
    """Check the header and return (scheme, layout)."""
    if len(data) < _HEADER.size:
        raise WireError(f"File of {len(data)} bytes is too short")
    magic, version, tag, layout = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise WireError(f"Bad magic {magic!r}")
    if version != VERSION:
        raise WireError(f"Unsupported version {version}")
    if tag not in SCHEME_NAMES:
        raise WireError(f"Unknown scheme tag {tag}")
    if layout not in LAYOUTS.values():
        raise WireError(f"Unknown layout {layout}")
    return SCHEME_NAMES[tag], layout


def _records(data: bytes, offset: int, size: int) -> list[bytes]:
    """Split the record section into records of size bytes."""
    if len(data) < offset + _COUNT.size:
        raise WireError("Missing record count")
    count, = _COUNT.unpack_from(data, offset)
    offset += _COUNT.size
    if len(data) - offset != count * size:
        raise WireError(f"Expected {count} records of {size} bytes, got "
                        f"{len(data) - offset} bytes")
    return [data[offset + i * size:offset + (i + 1) * size]
            for i in range(count)]


def _pack_affine(phi: AffineFn, params: RapporParams, layout: int) -> bytes:
    """Return the record of one affine function."""
    if layout == WORDS:
        return struct.pack(f'<{len(phi.coefficients)}Q', *phi.coefficients)

    width = field_bits(params.p)
    value = 0
    for coefficient in phi.coefficients:
        value = (value << width) | coefficient
    nbits = width * len(phi.coefficients)
    nbytes = (nbits + 7) // 8
    return (value << (8 * nbytes - nbits)).to_bytes(nbytes, 'big')


def _unpack_affine(record: bytes, params: RapporParams,
                   layout: int) -> AffineFn:
    """Read one affine function record."""
    count = params.coefficient_count
    if layout == WORDS:
        coefficients = struct.unpack(f'<{count}Q', record)
    else:
        width = field_bits(params.p)
        nbits = width * count
        value = int.from_bytes(record, 'big') >> (8 * len(record) - nbits)
        mask = (1 << width) - 1
        coefficients = tuple((value >> (width * (count - 1 - i))) & mask
                             for i in range(count))
    try:
        return AffineFn(coefficients, params.p)
    except ValueError as err:
        raise WireError(f"Bad affine function record: {err}") from err


def encode_freq(reports: Sequence, params: RapporParams, scheme: str,
                layout: str = 'packed') -> bytes:
    """Return the wire bytes of frequency reports."""
    if scheme not in FREQ_TAGS:
        raise(ValueError(f"Unknown frequency scheme: {scheme}"))
    layout_id = LAYOUTS[layout]
    alpha0, alpha1 = params.alpha0, params.alpha1

    out = bytearray(_header(FREQ_TAGS[scheme], layout_id))
    out += _FREQ_BLOCK.pack(params.k, params.p, params.dim,
                            VARIANTS.index(params.variant), params.eps,
                            alpha0.numerator, alpha0.denominator,
                            alpha1.numerator, alpha1.denominator)
    out += _COUNT.pack(len(reports))

    size = record_bytes(scheme, params, layout=layout_id)
    for report in reports:
        if _bit_reports(scheme):
            bits = np.asarray(report, dtype=np.uint8)
            if bits.shape != (params.k,):
                raise(ValueError(f"Bit report of shape {bits.shape}, "
                                 f"expected ({params.k},)"))
            record = np.packbits(bits).tobytes()
        else:
            record = _pack_affine(report, params, layout_id)
        if len(record) != size:
            raise WireError(f"{scheme} record of {len(record)} bytes, "
                            f"expected {size}")
        out += record

    info_print(f"encoded {len(reports)} {scheme} reports, {size} bytes "
               f"each", tag=2)
    return bytes(out)


def decode_freq(data: bytes) -> tuple[str, RapporParams, list]:
    """Return (scheme, params, reports) from wire bytes."""
    scheme, layout = _read_header(data)
    if scheme not in FREQ_TAGS:
        raise WireError(f"Expected frequency reports, found {scheme}")

    offset = _HEADER.size
    if len(data) < offset + _FREQ_BLOCK.size:
        raise WireError("Truncated parameter block")
    (k, p, dim, variant, eps, a0n, a0d, a1n,
     a1d) = _FREQ_BLOCK.unpack_from(data, offset)
    try:
        params = RapporParams(k=k, p=p, alpha0=Fraction(a0n, a0d),
                              alpha1=Fraction(a1n, a1d),
                              variant=VARIANTS[variant], eps=eps, dim=dim,
                              generalized=scheme == 'gen-pi-rappor')
    except (ValueError, IndexError, ZeroDivisionError) as err:
        raise WireError(f"Bad parameter block: {err}") from err

    size = record_bytes(scheme, params, layout=layout)
    records = _records(data, offset + _FREQ_BLOCK.size, size)
    if _bit_reports(scheme):
        reports = [np.unpackbits(np.frombuffer(record, dtype=np.uint8),
                                 count=k) for record in records]
    else:
        reports = [_unpack_affine(record, params, layout)
                   for record in records]
    return scheme, params, reports


def encode_mean(reports: Sequence[MeanReport], params: MeanParams,
                scheme: str, prg: PrgSpec, m_reps: int = 1) -> bytes:
    """Return the wire bytes of mean reports."""
    if scheme not in MEAN_TAGS:
        raise(ValueError(f"Unknown mean scheme: {scheme}"))

    out = bytearray(_header(MEAN_TAGS[scheme], PACKED))
    out += _MEAN_BLOCK.pack(params.d, params.eps, params.theta,
                            prg.seed_bits, m_reps, prg.family_id)
    out += _COUNT.pack(len(reports))

    size = record_bytes(scheme, params, prg.seed_bits)
    for report in reports:
        if scheme == 'privunit':
            record = np.asarray(report.vector, dtype='<f8').tobytes()
        else:
            if report.seed is None or report.seed.bits != prg.seed_bits:
                raise WireError(f"{scheme} report without a "
                                f"{prg.seed_bits}-bit seed")
            record = report.seed.to_bytes()
            if scheme == 'privhs':
                record += _SIGN_BYTES[report.sign]
        if len(record) != size:
            raise WireError(f"{scheme} record of {len(record)} bytes, "
                            f"expected {size}")
        out += record

    info_print(f"encoded {len(reports)} {scheme} reports, {size} bytes "
               f"each", tag=2)
    return bytes(out)


def decode_mean(data: bytes) -> tuple[str, MeanParams, PrgSpec, int, list]:
    """Return (scheme, params, generator, m_reps, reports) from wire bytes."""
    scheme, _ = _read_header(data)
    if scheme not in MEAN_TAGS:
        raise WireError(f"Expected mean reports, found {scheme}")

    offset = _HEADER.size
    if len(data) < offset + _MEAN_BLOCK.size:
        raise WireError("Truncated parameter block")
    d, eps, theta, seed_bits, m_reps, family = _MEAN_BLOCK.unpack_from(
        data, offset)
    if family >= len(PRG_FAMILIES) or PRG_FAMILIES[family] != 'shake256':
        raise WireError(f"Unsupported generator family {family}")
    if m_reps < 1:
        raise WireError("m_reps must be positive")
    try:
        if scheme == 'privhs':
            params = priv_hs_params(d, eps)
        else:
            params = priv_unit_params(d, eps, theta)
    except ValueError as err:
        raise WireError(f"Bad parameter block: {err}") from err
    prg = sphere_prg(d, seed_bits)

    size = record_bytes(scheme, params, seed_bits)
    records = _records(data, offset + _MEAN_BLOCK.size, size)
    nbytes = (seed_bits + 7) // 8
    reports = []
    for record in records:
        if scheme == 'privunit':
            reports.append(MeanReport(scheme, vector=np.frombuffer(
                record, dtype='<f8').astype(np.float64)))
            continue
        try:
            seed = Seed.from_bytes(record[:nbytes], seed_bits)
        except ValueError as err:
            raise WireError(f"Bad seed record: {err}") from err
        if scheme == 'privhs':
            signs = {value[0]: sign for sign, value in _SIGN_BYTES.items()}
            if record[-1] not in signs:
                raise WireError(f"Bad sign byte {record[-1]}")
            reports.append(MeanReport(scheme, seed=seed,
                                      sign=signs[record[-1]]))
        else:
            reports.append(MeanReport(scheme, seed=seed))
    return scheme, params, prg, m_reps, reports


class WireFile(object):
    """A report file, used with the with statement."""

    def __init__(self, path: str, mode: str = 'rb'):
        """Initialize for reading ('rb') or writing ('wb') path."""
        if mode not in ('rb', 'wb'):
            raise(ValueError(f"Invalid mode: {mode}"))
        self._path = path
        self._mode = mode
        self._file = None

    def __enter__(self):
        """Open the file."""
        self._file = open(self._path, self._mode)
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        """Close the file."""
        self._file.close()
        return False

    def read(self) -> bytes:
        """Return the whole file."""
        return self._file.read()

    def write(self, data: bytes) -> int:
        """Write the encoded reports."""
        return self._file.write(data)


def records_offset(data: bytes) -> int:
    """Return the offset of the first record of a wire file."""
    scheme, _ = _read_header(data)
    block = _FREQ_BLOCK if scheme in FREQ_TAGS else _MEAN_BLOCK
    return _HEADER.size + block.size + _COUNT.size
