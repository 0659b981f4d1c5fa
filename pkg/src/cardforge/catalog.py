"""Class codes and the ordered class catalog.

A card class is written as two characters, suit first: ``HJ`` is the jack of
hearts, ``ST`` the ten of spades. The built-in catalog orders suits C, D, H, S
and ranks A, 2..9, T, J, Q, K within each suit, so ``CA`` is index 0 and
``SK`` index 51.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import InvalidClassCode

SUITS = "CDHS"
RANKS = "A23456789TJQK"
# ace high, for sorting hands
RANK_STRENGTH = {r: i for i, r in enumerate("23456789TJQKA")}


@dataclass(frozen=True, order=True)
class ClassCode:
    suit: str
    rank: str

    def __str__(self) -> str:
        return self.suit + self.rank


def parse_class_code(text: str) -> ClassCode:
    if not isinstance(text, str) or len(text) != 2:
        raise InvalidClassCode(f"class code must be 2 characters, got {text!r}")
    suit, rank = text[0].upper(), text[1].upper()
    if suit not in SUITS:
        raise InvalidClassCode(f"unknown suit {text[0]!r} in {text!r}")
    if rank not in RANKS:
        raise InvalidClassCode(f"unknown rank {text[1]!r} in {text!r} (ten is 'T')")
    return ClassCode(suit, rank)


def is_card_code(text: str) -> bool:
    try:
        parse_class_code(text)
    except InvalidClassCode:
        return False
    return True


def standard_deck() -> list[str]:
    return [s + r for s in SUITS for r in RANKS]


@dataclass(frozen=True)
class ClassCatalog:
    """Ordered class names; line order of the names file is the label index.

    Card names are canonicalised through :func:`parse_class_code`. Names that
    are not card codes are kept verbatim so further classes (bidding calls)
    can be appended to a names file.
    """

    names: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        canon = tuple(str(parse_class_code(n)) if is_card_code(n) else n for n in self.names)
        if any(not n or any(c.isspace() for c in n) for n in canon):
            raise InvalidClassCode("class names must be non-empty and contain no whitespace")
        if len(set(canon)) != len(canon):
            raise InvalidClassCode("duplicate class names in catalog")
        object.__setattr__(self, "names", canon)
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(canon)})

    @classmethod
    def default(cls) -> "ClassCatalog":
        return cls(tuple(standard_deck()))

    @classmethod
    def from_names_file(cls, path) -> "ClassCatalog":
        text = Path(path).read_text(encoding="utf-8")
        return cls(tuple(line.strip() for line in text.splitlines() if line.strip()))

    @classmethod
    def load(cls, path=None) -> "ClassCatalog":
        """Catalog from ``path`` if it exists, else the 52-card default."""
        if path is not None and Path(path).is_file():
            return cls.from_names_file(path)
        return cls.default()

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __contains__(self, name) -> bool:
        return str(name).upper() in self._index or str(name) in self._index

    def index(self, code: ClassCode | str) -> int:
        key = str(code)
        if key in self._index:
            return self._index[key]
        return self._index[str(parse_class_code(key))]

    def name(self, index: int) -> str:
        return self.names[index]

    def names_text(self) -> str:
        return "".join(n + "\n" for n in self.names)

    def write_names_file(self, path) -> None:
        Path(path).write_bytes(self.names_text().encode("utf-8"))

    def digest(self) -> str:
        return hashlib.sha256(self.names_text().encode("utf-8")).hexdigest()

    def card_names(self) -> list[str]:
        return [n for n in self.names if is_card_code(n)]


def catalog_index(catalog: ClassCatalog, code: ClassCode | str) -> int:
    return catalog.index(code)


def sort_hand(codes: Iterable[str], suit_order: str) -> list[str]:
    """Group by ``suit_order`` and sort each suit from ace down to two."""
    parsed = [parse_class_code(c) for c in codes]
    return [
        str(c)
        for suit in suit_order
        for c in sorted((p for p in parsed if p.suit == suit), key=lambda p: -RANK_STRENGTH[p.rank])
    ]
