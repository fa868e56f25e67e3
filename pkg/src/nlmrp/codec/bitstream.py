"""MSB-first bit writer/reader with exp-Golomb codes."""

from __future__ import annotations

from ..errors import MalformedBitstream


class BitWriter:
    def __init__(self):
        self._buf = bytearray()
        self._acc = 0
        self._nacc = 0
        self.bits_written = 0

    def write(self, value: int, nbits: int) -> None:
        """Append the low ``nbits`` of ``value``, most significant bit first."""
        if nbits == 0:
            return
        if value < 0 or value >> nbits:
            raise ValueError(f"{value} does not fit in {nbits} bits")
        self._acc = (self._acc << nbits) | value
        self._nacc += nbits
        self.bits_written += nbits
        while self._nacc >= 8:
            self._nacc -= 8
            self._buf.append((self._acc >> self._nacc) & 0xFF)
        self._acc &= (1 << self._nacc) - 1

    def bit(self, b: int) -> None:
        self.write(1 if b else 0, 1)

    def ue(self, v: int) -> None:
        if v < 0:
            raise ValueError(f"ue() needs a non-negative value, got {v}")
        code = v + 1
        n = code.bit_length()
        self.write(code, 2 * n - 1)

    def se(self, v: int) -> None:
        self.ue(2 * v - 1 if v > 0 else -2 * v)

    def getvalue(self) -> bytes:
        """Bytes written so far, the last one zero-padded."""
        if self._nacc:
            return bytes(self._buf) + bytes([(self._acc << (8 - self._nacc)) & 0xFF])
        return bytes(self._buf)


class BitReader:
    def __init__(self, data: bytes, pos: int = 0):
        self._data = data
        self._nbits = 8 * len(data)
        self.pos = pos

    @property
    def remaining(self) -> int:
        return self._nbits - self.pos

    def read(self, nbits: int) -> int:
        if nbits > self.remaining:
            raise MalformedBitstream("truncated bitstream")
        v = 0
        for _ in range(nbits):
            byte = self._data[self.pos >> 3]
            v = (v << 1) | ((byte >> (7 - (self.pos & 7))) & 1)
            self.pos += 1
        return v

    def bit(self) -> int:
        return self.read(1)

    def ue(self) -> int:
        zeros = 0
        while self.read(1) == 0:
            zeros += 1
            if zeros > 32:
                raise MalformedBitstream("exp-Golomb prefix too long")
        return (1 << zeros) - 1 + self.read(zeros)

    def se(self) -> int:
        k = self.ue()
        return (k + 1) >> 1 if k & 1 else -(k >> 1)


def ue_bits(v: int) -> int:
    return 2 * (v + 1).bit_length() - 1


def se_bits(v: int) -> int:
    return ue_bits(2 * v - 1 if v > 0 else -2 * v)
