"""Compression for archived reports.

Python >= 3.14 uses the standard library ``compression.zstd``; older
interpreters use the ``zstandard`` package. Both expose :class:`ReportCodec`
with ``compress``/``decompress`` over complete frames.
"""

from __future__ import annotations

import sys
import threading

# Reports are small, repetitive JSON; a higher level costs little.
DEFAULT_LEVEL = 9

if sys.version_info >= (3, 14):
    from compression.zstd import CompressionParameter, ZstdCompressor, decompress as _decompress

    class ReportCodec:
        def __init__(self, level: int = DEFAULT_LEVEL):
            self.level = level
            self._options = {
                CompressionParameter.compression_level: level,
                CompressionParameter.checksum_flag: 1,
            }
            # ZstdCompressor keeps stream state; one per thread.
            self._local = threading.local()

        def _compressor(self) -> ZstdCompressor:
            c = getattr(self._local, "compressor", None)
            if c is None:
                c = self._local.compressor = ZstdCompressor(options=self._options)
            return c

        def compress(self, data: bytes) -> bytes:
            return self._compressor().compress(data, ZstdCompressor.FLUSH_FRAME)

        def decompress(self, data: bytes) -> bytes:
            return _decompress(data)

else:
    import zstandard as zstd  # ty: ignore[unresolved-import]

    class ReportCodec:
        def __init__(self, level: int = DEFAULT_LEVEL):
            self.level = level
            params = zstd.ZstdCompressionParameters.from_level(level, write_checksum=True)
            self._compressor = zstd.ZstdCompressor(compression_params=params)
            self._decompressor = zstd.ZstdDecompressor()

        def compress(self, data: bytes) -> bytes:
            return self._compressor.compress(data)

        def decompress(self, data: bytes) -> bytes:
            return self._decompressor.decompress(data)
