"""Finite complete Boolean algebras as powerset lattices over named atoms.

Elements are atom subsets stored as bitmasks: atom ``i`` of the algebra is
bit ``1 << i``.  A relative algebra ``A_b`` shares the ambient atom order and
only narrows the top element, so an element keeps the same mask in every
relative algebra it belongs to.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import AlgebraMismatch, ValidationError


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@lru_cache(maxsize=4096)
def bits(mask: int) -> tuple[int, ...]:
    """Indices of the set bits of ``mask``, ascending."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@lru_cache(maxsize=4096)
def submasks(mask: int) -> tuple[int, ...]:
    """All submasks of ``mask`` in increasing numeric order."""
    out = []
    s = mask
    while True:
        out.append(s)
        if s == 0:
            break
        s = (s - 1) & mask
    out.reverse()
    return tuple(out)


@dataclass(frozen=True)
class Algebra:
    """The powerset algebra on ``atoms``, optionally relativised below ``top``."""

    atoms: tuple[str, ...]
    top: int = -1

    def __post_init__(self):
        atoms = tuple(self.atoms)
        object.__setattr__(self, "atoms", atoms)
        for name in atoms:
            if not isinstance(name, str) or not name:
                raise ValidationError(f"atom names must be non-empty strings, got {name!r}")
            if "|" in name:
                raise ValidationError(f"atom name {name!r} may not contain '|'")
        if len(set(atoms)) != len(atoms):
            dup = sorted({a for a in atoms if atoms.count(a) > 1})
            raise ValidationError(f"duplicate atom names: {dup}")
        full = (1 << len(atoms)) - 1
        top = full if self.top == -1 else self.top
        if top & ~full:
            raise ValidationError(f"top mask {top:b} outside the atom set")
        object.__setattr__(self, "top", top)

    # -- structure --------------------------------------------------------

    @property
    def full(self) -> int:
        return (1 << len(self.atoms)) - 1

    @property
    def is_relative(self) -> bool:
        return self.top != self.full

    @property
    def degenerate(self) -> bool:
        """True when 0 = 1, i.e. no atoms lie below the top."""
        return self.top == 0

    @cached_property
    def ambient(self) -> Algebra:
        return self if not self.is_relative else Algebra(self.atoms)

    @cached_property
    def atom_indices(self) -> tuple[int, ...]:
        return tuple(bits(self.top))

    def __len__(self):
        return 1 << popcount(self.top)

    @cached_property
    def masks(self) -> tuple[int, ...]:
        return tuple(submasks(self.top))

    def elements(self) -> list[Elem]:
        amb = self.ambient
        return [Elem(amb, m) for m in self.masks]

    def atom_elems(self) -> list[Elem]:
        amb = self.ambient
        return [Elem(amb, 1 << i) for i in self.atom_indices]

    @property
    def zero(self) -> Elem:
        return Elem(self.ambient, 0)

    @property
    def one(self) -> Elem:
        return Elem(self.ambient, self.top)

    def relative(self, b) -> Algebra:
        """The relative algebra ``A_b = {a : a <= b}``."""
        m = self.mask_of(b)
        if m & ~self.top:
            raise ValidationError(f"{self.fmt(m)} is not below the top {self.fmt(self.top)}")
        return Algebra(self.atoms, m)

    # -- element construction and formatting -------------------------------

    def elem(self, spec) -> Elem:
        """Build an element from a mask, an ``Elem``, a ``"p|q"`` key, or atom names."""
        return Elem(self.ambient, self.mask_of(spec))

    def mask_of(self, spec) -> int:
        if isinstance(spec, Elem):
            self.check_same(spec.algebra)
            return spec.mask
        if isinstance(spec, int):
            if spec < 0 or spec & ~self.full:
                raise ValidationError(f"mask {spec} outside the algebra")
            return spec
        if isinstance(spec, str):
            if spec in ("", "0"):
                return 0
            if spec == "1":
                return self.top
            spec = spec.split("|")
        mask = 0
        for name in spec:
            try:
                mask |= 1 << self.atoms.index(name)
            except ValueError:
                raise ValidationError(f"unknown atom {name!r}") from None
        return mask

    def fmt(self, mask: int) -> str:
        if mask == 0:
            return "0"
        return "|".join(self.atoms[i] for i in bits(mask))

    def key(self, mask: int) -> str:
        """Model-file encoding of an element: ``"p|q"``, empty string for 0."""
        return "" if mask == 0 else self.fmt(mask)

    def check_same(self, other: Algebra):
        if other.atoms != self.atoms:
            raise AlgebraMismatch(f"algebras differ: {self.atoms} vs {other.atoms}")

    # -- lattice operations on this (possibly relative) algebra ------------

    def meet(self, a, b) -> Elem:
        return self.elem(self.mask_of(a) & self.mask_of(b))

    def join(self, a, b) -> Elem:
        return self.elem(self.mask_of(a) | self.mask_of(b))

    def complement(self, a) -> Elem:
        """Complement relative to this algebra's top."""
        m = self.mask_of(a)
        if m & ~self.top:
            raise ValidationError(f"{self.fmt(m)} not in the algebra below {self.fmt(self.top)}")
        return self.elem(self.top & ~m)

    def leq(self, a, b) -> bool:
        ma = self.mask_of(a)
        return ma & self.mask_of(b) == ma

    def relative_down_set(self, b) -> list[Elem]:
        m = self.mask_of(b)
        return [self.elem(s) for s in submasks(m)]

    def sup(self, elems: Iterable) -> Elem:
        m = 0
        for e in elems:
            m |= self.mask_of(e)
        return self.elem(m)

    def arrows(self) -> Iterator[tuple[int, int]]:
        """The set Delta of pairs ``(a, b)`` with ``a <= b``, as masks."""
        for b in self.masks:
            for a in submasks(b):
                yield a, b


def make_algebra(atom_names: Sequence[str]) -> Algebra:
    return Algebra(tuple(atom_names))


@dataclass(frozen=True)
class Elem:
    algebra: Algebra
    mask: int

    def _other(self, other) -> int:
        if not isinstance(other, Elem):
            return NotImplemented
        if other.algebra.atoms != self.algebra.atoms:
            raise AlgebraMismatch(
                f"cannot combine elements of {self.algebra.atoms} and {other.algebra.atoms}"
            )
        return other.mask

    def __and__(self, other):
        m = self._other(other)
        if m is NotImplemented:
            return m
        return Elem(self.algebra, self.mask & m)

    def __or__(self, other):
        m = self._other(other)
        if m is NotImplemented:
            return m
        return Elem(self.algebra, self.mask | m)

    def __sub__(self, other):
        m = self._other(other)
        if m is NotImplemented:
            return m
        return Elem(self.algebra, self.mask & ~m)

    def __invert__(self):
        return Elem(self.algebra, self.algebra.full & ~self.mask)

    def __le__(self, other):
        m = self._other(other)
        if m is NotImplemented:
            return m
        return self.mask & m == self.mask

    def __lt__(self, other):
        return self <= other and self.mask != other.mask

    def __ge__(self, other):
        return other <= self

    def __gt__(self, other):
        return other < self

    def __bool__(self):
        return self.mask != 0

    @property
    def atoms(self) -> list[str]:
        return [self.algebra.atoms[i] for i in bits(self.mask)]

    @property
    def key(self) -> str:
        return self.algebra.key(self.mask)

    def __str__(self):
        return self.algebra.fmt(self.mask)

    def __repr__(self):
        return f"Elem({self})"


def _check_below(elem: Elem, base: Elem, what: str):
    if not elem <= base:
        raise ValidationError(f"{what} {elem} is not below {base}")


@dataclass(frozen=True)
class Partition:
    """A 0-free pairwise-disjoint family with join ``base``: a member of P(base)."""

    base: Elem
    parts: frozenset[Elem]

    def __post_init__(self):
        parts = frozenset(self.parts)
        object.__setattr__(self, "parts", parts)
        acc = 0
        for p in parts:
            _check_below(p, self.base, "part")
            if p.mask == 0:
                raise ValidationError("partitions are 0-free")
            if acc & p.mask:
                raise ValidationError(f"part {p} overlaps an earlier part")
            acc |= p.mask
        if acc != self.base.mask:
            raise ValidationError(
                f"parts join to {self.base.algebra.fmt(acc)}, not {self.base}"
            )

    def sorted_parts(self) -> list[Elem]:
        return sorted(self.parts, key=lambda e: e.mask)

    def __str__(self):
        inner = ", ".join(str(p) for p in self.sorted_parts())
        return f"{{{inner}}}"


def _set_partitions(items: list[int]) -> Iterator[list[list[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for sub in _set_partitions(rest):
        yield [[first]] + sub
        for k in range(len(sub)):
            yield sub[:k] + [[first] + sub[k]] + sub[k + 1:]


def partition_masks(mask: int) -> Iterator[tuple[int, ...]]:
    """Canonical partitions of ``mask`` as sorted tuples of part masks."""
    for blocks in _set_partitions(bits(mask)):
        yield tuple(sorted(sum(1 << i for i in blk) for blk in blocks))


def partitions_of(a: Elem) -> Iterator[Partition]:
    """Every canonical (0-free) partition of ``a``; ``a = 0`` gives the empty one."""
    amb = a.algebra
    for parts in partition_masks(a.mask):
        yield Partition(a, frozenset(Elem(amb, m) for m in parts))


@dataclass(frozen=True)
class Sieve:
    base: Elem
    members: frozenset[Elem]

    def __post_init__(self):
        members = frozenset(self.members)
        object.__setattr__(self, "members", members)
        masks = {m.mask for m in members}
        for m in members:
            _check_below(m, self.base, "sieve member")
            for s in submasks(m.mask):
                if s not in masks:
                    raise ValidationError(
                        f"not downward closed: {m} in sieve but {self.base.algebra.fmt(s)} missing"
                    )

    @classmethod
    def generated(cls, base: Elem, generators: Iterable[Elem]) -> Sieve:
        """Downward closure of ``generators`` as a sieve on ``base``."""
        amb = base.algebra
        out = set()
        for g in generators:
            _check_below(g, base, "generator")
            out.update(Elem(amb, s) for s in submasks(g.mask))
        return cls(base, frozenset(out))

    @property
    def joined(self) -> Elem:
        m = 0
        for e in self.members:
            m |= e.mask
        return Elem(self.base.algebra, m)

    @property
    def covering(self) -> bool:
        return self.joined == self.base

    def ordered_members(self) -> list[Elem]:
        return sorted(self.members, key=lambda e: (e.mask,))


class NotCovering(ValidationError):
    pass


def disjointify(sieve: Sieve, order: Sequence[Elem] | None = None) -> Partition:
    """Turn a covering sieve into a partition by subtracting earlier members.

    ``order`` lists the sieve members in the chosen well-order; it defaults to
    increasing mask order.  Zero differences are dropped.
    """
    if not sieve.covering:
        raise NotCovering(
            f"sieve does not cover {sieve.base}: members join to {sieve.joined}"
        )
    members = sieve.ordered_members() if order is None else list(order)
    if set(members) != sieve.members or len(members) != len(sieve.members):
        raise ValidationError("order must list each sieve member exactly once")
    amb = sieve.base.algebra
    acc = 0
    parts = []
    for m in members:
        b = m.mask & ~acc
        acc |= b
        if b:
            parts.append(Elem(amb, b))
    return Partition(sieve.base, frozenset(parts))
