"""Finite abelian groups Z_{d1} x ... x Z_{dm}.

Elements are tuples of nonnegative residues.  They are enumerated in
row-major (mixed-radix) order, so element ``(g_1, ..., g_m)`` has index
``g_m + d_m * (g_{m-1} + d_{m-1} * (...))``; for ``Z_N x Z_N`` this is the
block layout in which the first coordinate selects the block.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DomainError

Element = tuple[int, ...]


@dataclass(frozen=True)
class AbelianGroup:
    dims: tuple[int, ...]

    def __init__(self, dims):
        if isinstance(dims, int):
            dims = (dims,)
        dims = tuple(int(d) for d in dims)
        if not dims or any(d < 1 for d in dims):
            raise DomainError(f"group dimensions must be positive integers, got {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def parse(cls, text: str) -> "AbelianGroup":
        """Parse ``"N"`` or ``"NxMx..."``."""
        parts = text.lower().split("x")
        try:
            return cls(int(p) for p in parts)
        except ValueError as exc:
            raise DomainError(f"bad group specification {text!r}") from exc

    def __str__(self):
        return "x".join(str(d) for d in self.dims)

    @property
    def order(self) -> int:
        return int(np.prod(self.dims))

    def canonical(self, g) -> Element:
        """Reduce an element (int or tuple, negatives allowed) to nonnegative residues."""
        if isinstance(g, (int, np.integer)):
            g = (int(g),)
        g = tuple(int(x) for x in g)
        if len(g) != len(self.dims):
            raise DomainError(f"element {g} does not belong to Z_{self}")
        return tuple(x % d for x, d in zip(g, self.dims))

    def elements(self) -> list[Element]:
        return list(itertools.product(*(range(d) for d in self.dims)))

    def index(self, g) -> int:
        idx = 0
        for x, d in zip(self.canonical(g), self.dims):
            idx = idx * d + x
        return idx

    def element(self, idx: int) -> Element:
        out = []
        for d in reversed(self.dims):
            idx, r = divmod(idx, d)
            out.append(r)
        return tuple(reversed(out))

    def add(self, g, h) -> Element:
        return self.canonical(tuple(a + b for a, b in zip(self.canonical(g), self.canonical(h))))

    def sub(self, g, h) -> Element:
        return self.canonical(tuple(a - b for a, b in zip(self.canonical(g), self.canonical(h))))

    def difference_table(self) -> np.ndarray:
        """``table[i, j]`` is the index of ``element(i) - element(j)``."""
        coords = np.array(self.elements(), dtype=np.int64).reshape(self.order, len(self.dims))
        diff = (coords[:, None, :] - coords[None, :, :]) % np.array(self.dims)
        idx = np.zeros((self.order, self.order), dtype=np.int64)
        for axis, d in enumerate(self.dims):
            idx = idx * d + diff[:, :, axis]
        return idx

    def generated_subgroup(self, s: Iterable) -> set[Element]:
        """Closure of ``s`` under addition (finite sums of elements of ``s``)."""
        gens = [self.canonical(g) for g in s]
        zero = self.canonical((0,) * len(self.dims))
        seen = {zero}
        frontier = [zero]
        while frontier:
            g = frontier.pop()
            for h in gens:
                x = self.add(g, h)
                if x not in seen:
                    seen.add(x)
                    frontier.append(x)
        return seen

    def generates(self, s: Iterable) -> bool:
        return len(self.generated_subgroup(s)) == self.order


_TUPLE = re.compile(r"\(([^()]*)\)")


def parse_element(text: str) -> Element:
    """Parse ``"-1"`` or ``"(0,1)"`` into a (not yet canonical) tuple."""
    text = text.strip()
    m = _TUPLE.fullmatch(text)
    body = m.group(1) if m else text
    try:
        return tuple(int(tok) for tok in body.split(","))
    except ValueError as exc:
        raise DomainError(f"bad group element {text!r}") from exc


def split_elements(text: str) -> list[str]:
    """Split ``"-1,0,1"`` or ``"(0,0),(1,0)"`` into element strings."""
    text = text.strip()
    if "(" in text:
        return [m.group(0) for m in _TUPLE.finditer(text)]
    return [tok for tok in text.split(",") if tok.strip()]
