"""S-box tables, AES construction and the bit-naming convention.

Variables follow the X1..Xn / Y1..Ym naming with X1 as the most significant
input bit and Y1 the most significant output bit.  State ``s`` is the input
value ``s`` together with its image ``table[s]``.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path

AES_MODULUS = 0x11B
AES_AFFINE_CONSTANT = 0x63

# FIPS-197 S-box, row-major by input byte.
_AES_CANONICAL_HEX = """
63 7c 77 7b f2 6b 6f c5 30 01 67 2b fe d7 ab 76
ca 82 c9 7d fa 59 47 f0 ad d4 a2 af 9c a4 72 c0
b7 fd 93 26 36 3f f7 cc 34 a5 e5 f1 71 d8 31 15
04 c7 23 c3 18 96 05 9a 07 12 80 e2 eb 27 b2 75
09 83 2c 1a 1b 6e 5a a0 52 3b d6 b3 29 e3 2f 84
53 d1 00 ed 20 fc b1 5b 6a cb be 39 4a 4c 58 cf
d0 ef aa fb 43 4d 33 85 45 f9 02 7f 50 3c 9f a8
51 a3 40 8f 92 9d 38 f5 bc b6 da 21 10 ff f3 d2
cd 0c 13 ec 5f 97 44 17 c4 a7 7e 3d 64 5d 19 73
60 81 4f dc 22 2a 90 88 46 ee b8 14 de 5e 0b db
e0 32 3a 0a 49 06 24 5c c2 d3 ac 62 91 95 e4 79
e7 c8 37 6d 8d d5 4e a9 6c 56 f4 ea 65 7a ae 08
ba 78 25 2e 1c a6 b4 c6 e8 dd 74 1f 4b bd 8b 8a
70 3e b5 66 48 03 f6 0e 61 35 57 b9 86 c1 1d 9e
e1 f8 98 11 69 d9 8e 94 9b 1e 87 e9 ce 55 28 df
8c a1 89 0d bf e6 42 68 41 99 2d 0f b0 54 bb 16
"""
AES_CANONICAL = tuple(int(tok, 16) for tok in _AES_CANONICAL_HEX.split())


class SBoxError(ValueError):
    """Invalid S-box definition or S-box file."""


class SBoxParseError(SBoxError):
    def __init__(self, message: str, path: str | None = None, line: int | None = None,
                 column: int | None = None) -> None:
        self.path = path
        self.line = line
        self.column = column
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
            if column is not None:
                where += f"{column}:"
        super().__init__(f"{where} {message}" if where else message)


@dataclass(frozen=True)
class SBox:
    """Lookup table for an ``n_in`` -> ``n_out`` bit substitution."""

    n_in: int
    n_out: int
    table: tuple[int, ...]
    name: str = "sbox"
    _digest: str = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (1 <= self.n_in <= 8 and 1 <= self.n_out <= 8):
            raise SBoxError(f"bit counts must lie in 1..8, got {self.n_in}->{self.n_out}")
        table = tuple(int(v) for v in self.table)
        if len(table) != 1 << self.n_in:
            raise SBoxError(f"expected {1 << self.n_in} entries, got {len(table)}")
        limit = 1 << self.n_out
        for i, v in enumerate(table):
            if not 0 <= v < limit:
                raise SBoxError(f"value out of range at index {i}: {v:#x} >= {limit:#x}")
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "_digest", hashlib.sha256(
            bytes([self.n_in, self.n_out]) + bytes(table)).hexdigest())

    @property
    def n_states(self) -> int:
        return 1 << self.n_in

    @property
    def n_vars(self) -> int:
        return self.n_in + self.n_out

    @property
    def is_permutation(self) -> bool:
        return self.n_in == self.n_out and len(set(self.table)) == len(self.table)

    @property
    def digest(self) -> str:
        """SHA-256 over the dimensions and the table bytes."""
        return self._digest

    def __getitem__(self, s: int) -> int:
        return self.table[s]

    def __len__(self) -> int:
        return len(self.table)


@dataclass(frozen=True, order=True)
class StateIndex:
    """Input state ``S<value>`` of an S-box."""

    value: int

    def __post_init__(self) -> None:
        if self.value < 0:
            raise ValueError(f"state index must be non-negative, got {self.value}")

    def check(self, sbox: SBox) -> "StateIndex":
        if self.value >= sbox.n_states:
            raise ValueError(f"state S{self.value} out of range for {sbox.n_in}-bit input")
        return self

    def __str__(self) -> str:
        return f"S{self.value}"


# --- GF(2^8) -----------------------------------------------------------------

def gf256_mul(a: int, b: int) -> int:
    """Multiply two bytes in GF(2^8) modulo x^8 + x^4 + x^3 + x + 1."""
    result = 0
    while b:
        if b & 1:
            result ^= a
        a <<= 1
        if a & 0x100:
            a ^= AES_MODULUS
        b >>= 1
    return result


def gf256_pow(a: int, e: int) -> int:
    result = 1
    while e:
        if e & 1:
            result = gf256_mul(result, a)
        a = gf256_mul(a, a)
        e >>= 1
    return result


def gf256_inv(a: int) -> int:
    """Multiplicative inverse, with 0 mapped to 0."""
    if a == 0:
        return 0
    # a^254 = a^-1 since the multiplicative group has order 255
    return gf256_pow(a, 254)


def _rotl8(x: int, r: int) -> int:
    return ((x << r) | (x >> (8 - r))) & 0xFF


def aes_affine(x: int) -> int:
    return (x ^ _rotl8(x, 1) ^ _rotl8(x, 2) ^ _rotl8(x, 3) ^ _rotl8(x, 4)
            ^ AES_AFFINE_CONSTANT)


def build_aes_sbox() -> SBox:
    """Build the AES S-box from field inversion and the affine map.

    The computed table is checked against the embedded FIPS-197 constants;
    any disagreement raises ``RuntimeError``.
    """
    table = tuple(aes_affine(gf256_inv(s)) for s in range(256))
    if table != AES_CANONICAL:
        bad = [s for s in range(256) if table[s] != AES_CANONICAL[s]]
        raise RuntimeError(f"AES S-box self-check failed at {len(bad)} entries, first {bad[0]:#04x}")
    return SBox(8, 8, table, name="aes")


def identity_sbox(n: int = 8) -> SBox:
    return SBox(n, n, tuple(range(1 << n)), name=f"identity{n}")


# --- variables ---------------------------------------------------------------

_VAR_RE = re.compile(r"^([XY])([1-9][0-9]*)$")


def parse_variable(var: str) -> tuple[str, int]:
    m = _VAR_RE.match(var)
    if not m:
        raise ValueError(f"malformed variable {var!r}")
    return m.group(1), int(m.group(2))


def bit_of_state(s: StateIndex | int, sbox: SBox, var: str) -> int:
    """Value of variable ``Xi`` or ``Yj`` at state ``s``.

    >>> aes = build_aes_sbox()
    >>> bit_of_state(9, aes, "X5"), bit_of_state(9, aes, "X8")
    (1, 1)
    """
    value = s.check(sbox).value if isinstance(s, StateIndex) else StateIndex(s).check(sbox).value
    letter, index = parse_variable(var)
    width = sbox.n_in if letter == "X" else sbox.n_out
    if not 1 <= index <= width:
        raise ValueError(f"variable {var} out of range for {sbox.n_in}->{sbox.n_out} S-box")
    word = value if letter == "X" else sbox.table[value]
    return (word >> (width - index)) & 1


def one_variables(s: int, sbox: SBox) -> list[str]:
    """Variables equal to 1 at state ``s``, X block first, ascending index."""
    out = [f"X{i}" for i in range(1, sbox.n_in + 1) if (s >> (sbox.n_in - i)) & 1]
    y = sbox.table[s]
    out += [f"Y{j}" for j in range(1, sbox.n_out + 1) if (y >> (sbox.n_out - j)) & 1]
    return out


# --- file format ---------------------------------------------------------------

_HEX_RE = re.compile(r"^(0[xX])?[0-9a-fA-F]+$")


def parse_sbox_text(text: str, name: str = "sbox", path: str | None = None) -> SBox:
    """Parse ``SBOX <n_in> <n_out>`` followed by 2^n_in hex entries.

    ``#`` starts a comment.  Errors carry line and column numbers.
    """
    header: tuple[int, int] | None = None
    header_line = 0
    entries: list[int] = []
    last_pos = (1, 1)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = [(m.start() + 1, m.group()) for m in re.finditer(r"\S+", line)]
        if not tokens:
            continue
        if header is None:
            if tokens[0][1] != "SBOX" or len(tokens) != 3:
                raise SBoxParseError("malformed header, expected 'SBOX <n_in> <n_out>'",
                                     path, lineno, tokens[0][0])
            try:
                n_in, n_out = int(tokens[1][1]), int(tokens[2][1])
            except ValueError:
                raise SBoxParseError("malformed header, bit counts must be decimal",
                                     path, lineno, tokens[1][0]) from None
            if not (1 <= n_in <= 8 and 1 <= n_out <= 8):
                raise SBoxParseError(f"malformed header, bit counts {n_in} {n_out} not in 1..8",
                                     path, lineno, tokens[1][0])
            header = (n_in, n_out)
            header_line = lineno
            continue
        for col, tok in tokens:
            if not _HEX_RE.match(tok):
                raise SBoxParseError(f"non-hex token {tok!r}", path, lineno, col)
            value = int(tok, 16)
            if value >= 1 << header[1]:
                raise SBoxParseError(f"value out of range: {tok} >= {1 << header[1]:#x}",
                                     path, lineno, col)
            entries.append(value)
            last_pos = (lineno, col)
    if header is None:
        raise SBoxParseError("malformed header, file is empty", path, 1, 1)
    expected = 1 << header[0]
    if len(entries) != expected:
        line = last_pos[0] if entries else header_line
        raise SBoxParseError(f"expected {expected} entries, found {len(entries)}", path, line)
    return SBox(header[0], header[1], tuple(entries), name=name)


def load_sbox(path: str | Path) -> SBox:
    path = Path(path)
    try:
        text = path.read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise SBoxParseError(f"cannot read file: {exc}", str(path)) from None
    return parse_sbox_text(text, name=path.stem, path=str(path))


def format_sbox(sbox: SBox, per_line: int = 16) -> str:
    digits = (sbox.n_out + 3) // 4
    lines = [f"SBOX {sbox.n_in} {sbox.n_out}"]
    for i in range(0, len(sbox.table), per_line):
        lines.append(" ".join(f"{v:0{digits}x}" for v in sbox.table[i:i + per_line]))
    return "\n".join(lines) + "\n"


def resolve_sbox(spec: str) -> SBox:
    """Resolve a built-in name (``aes``, ``identityN``) or a file path."""
    if spec == "aes":
        return build_aes_sbox()
    m = re.fullmatch(r"identity([1-8])", spec)
    if m:
        return identity_sbox(int(m.group(1)))
    return load_sbox(spec)


def random_sbox(n_in: int, n_out: int, rng, name: str | None = None,
                permutation: bool = True) -> SBox:
    """Random table drawn from ``rng`` (a ``random.Random``)."""
    if permutation and n_in == n_out:
        table = list(range(1 << n_in))
        rng.shuffle(table)
    else:
        table = [rng.randrange(1 << n_out) for _ in range(1 << n_in)]
    return SBox(n_in, n_out, tuple(table), name=name or f"random{n_in}x{n_out}")

