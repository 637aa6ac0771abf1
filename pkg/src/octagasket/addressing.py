"""Cell addresses and their integer encodings.

An m-cell F_{j1} F_{j2} ... F_{jm}(OG) carries the address
``(j1, j2 - j1, ..., jm - j(m-1))`` with all arithmetic in Z_8, i.e. each digit
after the first is measured relative to its parent's rotated labelling.  The
tuple ``(j1, ..., jm)`` of absolute contraction indices is called the *word*
of the cell.  Matrix rows are ordered by the base-8 value of the address.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyAddress, IndexOutOfRange, InvalidEntry, LevelTooLarge

MAX_LEVEL = 6

Address = tuple[int, ...]


def validate_address(addr: Sequence[int]) -> Address:
    addr = tuple(int(d) for d in addr)
    if not addr:
        raise EmptyAddress("address must have at least one digit")
    if len(addr) > MAX_LEVEL:
        raise LevelTooLarge(f"address length {len(addr)} exceeds {MAX_LEVEL}")
    for d in addr:
        if not 0 <= d <= 7:
            raise InvalidEntry(f"address digit {d} outside 0..7")
    return addr


def parse_address(text: str) -> Address:
    """``"012"`` -> ``(0, 1, 2)``."""
    text = text.strip()
    if not text or not text.isdigit():
        raise InvalidEntry(f"bad address string {text!r}")
    return validate_address(int(c) for c in text)


def format_address(addr: Sequence[int]) -> str:
    return "".join(str(int(d)) for d in addr)


def address_to_index(addr: Sequence[int]) -> int:
    """Base-8 value of the address, most significant digit first."""
    addr = validate_address(addr)
    value = 0
    for d in addr:
        value = 8 * value + d
    return value


def index_to_address(i: int, m: int) -> Address:
    if m < 1:
        raise EmptyAddress("level must be >= 1")
    if not 0 <= i < 8**m:
        raise IndexOutOfRange(f"index {i} outside [0, 8^{m})")
    digits = []
    for _ in range(m):
        digits.append(i % 8)
        i //= 8
    return tuple(reversed(digits))


def to_word(addr: Sequence[int]) -> Address:
    """Absolute contraction indices: j_k = (a_1 + ... + a_k) mod 8."""
    out, acc = [], 0
    for d in addr:
        acc = (acc + d) % 8
        out.append(acc)
    return tuple(out)


def from_word(word: Sequence[int]) -> Address:
    out, prev = [], 0
    for k, j in enumerate(word):
        out.append(j % 8 if k == 0 else (j - prev) % 8)
        prev = j
    return tuple(out)


def all_addresses(m: int) -> np.ndarray:
    """(8^m, m) array of address digits, row i holding index_to_address(i, m)."""
    idx = np.arange(8**m, dtype=np.int64)
    powers = 8 ** np.arange(m - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % 8


def words_of(addresses: np.ndarray) -> np.ndarray:
    """Vectorised :func:`to_word` over the rows of an (n, m) digit array."""
    return np.cumsum(addresses, axis=1) % 8


def addresses_of(words: np.ndarray) -> np.ndarray:
    """Vectorised :func:`from_word`."""
    rel = words.copy()
    rel[:, 1:] = (words[:, 1:] - words[:, :-1]) % 8
    return rel


def digits_to_index(digits: np.ndarray) -> np.ndarray:
    m = digits.shape[1]
    powers = 8 ** np.arange(m - 1, -1, -1, dtype=np.int64)
    return digits.astype(np.int64) @ powers


def word_index_to_cell_index(m: int) -> np.ndarray:
    """Lookup table: base-8 value of a word -> row index of that cell."""
    words = all_addresses(m)  # enumerate every word once
    return digits_to_index(addresses_of(words))


def iter_addresses(m: int) -> Iterable[Address]:
    for row in all_addresses(m):
        yield tuple(int(d) for d in row)
