"""Sheaves on the site (A, P) of a finite Boolean algebra.

Two representations share one interface:

* ``StalkSheaf`` -- one finite set per atom; the component at ``c`` is the
  product of the stalks at the atoms below ``c`` (tuples in atom order) and
  restrictions are projections.  Always a sheaf, always surjective.
* ``ExtensionalSheaf`` -- explicit components and restriction maps, checked
  by :func:`validate_sheaf`.

Every sheaf exposes ``stalk(i)``, ``germ(x, c, i)`` (restriction of ``x`` to
atom ``i``) and ``glue(c, germs)``; on an atomic algebra these determine the
whole sheaf, and the generic amalgamation and transformation code uses only
them.
"""

from __future__ import annotations

import itertools
import os
from functools import cached_property
from typing import Any, Iterable, Mapping

from .boolean_algebra import Algebra, Elem, Partition, bits, partition_masks, submasks
from .errors import AxiomError, SizeGuardError, StructureError, ValidationError, Violation

DEFAULT_MAX_TUPLES = 10**6


def max_tuples() -> int:
    raw = os.environ.get("CONDSHEAF_MAX_TUPLES")
    return int(raw) if raw else DEFAULT_MAX_TUPLES


def sort_labels(labels: Iterable) -> tuple:
    labels = list(labels)
    try:
        return tuple(sorted(labels))
    except TypeError:
        return tuple(sorted(labels, key=repr))


def _mask(c) -> int:
    return c.mask if isinstance(c, Elem) else c


class Sheaf:
    """Interface shared by every sheaf representation."""

    algebra: Algebra

    def component(self, c) -> tuple:
        raise NotImplementedError

    def restrict(self, x, frm, to):
        raise NotImplementedError

    def stalk(self, i: int) -> tuple:
        raise NotImplementedError

    def germ(self, x, c, i: int):
        return self.restrict(x, c, 1 << i)

    def glue(self, c, germs: Mapping[int, Any]):
        raise NotImplementedError

    def restricted(self, a) -> Sheaf:
        raise NotImplementedError

    # -- derived operations ------------------------------------------------

    @property
    def top(self) -> int:
        return self.algebra.top

    def stalk_sizes(self) -> dict[str, int]:
        return {self.algebra.atoms[i]: len(self.stalk(i)) for i in self.algebra.atom_indices}

    def decompose(self, x, c) -> tuple:
        c = _mask(c)
        return tuple(self.germ(x, c, i) for i in bits(c))

    def point(self):
        """The unique element of the component at 0."""
        return self.component(0)[0]

    def amalgamate(self, parts, family: Mapping):
        """The unique element of the component at ``parts.base`` restricting to ``family``.

        ``parts`` is a :class:`Partition`; ``family`` maps each part (an
        ``Elem`` or mask) to an element of that part's component.
        """
        if isinstance(parts, Partition):
            base = parts.base.mask
            part_masks = [p.mask for p in parts.parts]
        else:
            base, part_masks = parts
        fam = {_mask(k): v for k, v in family.items()}
        germs = {}
        for pm in part_masks:
            if pm not in fam:
                raise ValidationError(f"family has no element on part {self.algebra.fmt(pm)}")
            x = fam[pm]
            for i in bits(pm):
                germs[i] = self.germ(x, pm, i)
        if base == 0:
            return self.point()
        return self.glue(base, germs)

    def surjectivity_witness(self):
        """``(a, b, y)`` with ``y`` in X_a outside the image of X_b, or None."""
        for a, b in self.algebra.arrows():
            if a == b:
                continue
            image = {self.restrict(x, b, a) for x in self.component(b)}
            for y in self.component(a):
                if y not in image:
                    return a, b, y
        return None

    def is_surjective(self) -> bool:
        return self.surjectivity_witness() is None

    def maps_as_dicts(self) -> dict[tuple[int, int], dict]:
        out = {}
        for a, b in self.algebra.arrows():
            out[(b, a)] = {x: self.restrict(x, b, a) for x in self.component(b)}
        return out

    def to_extensional(self) -> ExtensionalSheaf:
        comps = {c: self.component(c) for c in self.algebra.masks}
        return ExtensionalSheaf(self.algebra, comps, self.maps_as_dicts())


class StalkSheaf(Sheaf):
    """A sheaf given by one non-empty finite stalk per atom below the top."""

    def __init__(self, algebra: Algebra, stalks: Mapping):
        self.algebra = algebra
        norm = {}
        for key, labels in stalks.items():
            i = key if isinstance(key, int) else algebra.atoms.index(key) if key in algebra.atoms else None
            if i is None or not (algebra.top >> i) & 1:
                raise ValidationError(f"stalk given for {key!r}, which is not an atom below the top")
            labels = list(labels)
            if not labels:
                raise ValidationError(f"empty stalk at atom {algebra.atoms[i]}")
            if len(set(labels)) != len(labels):
                raise ValidationError(f"duplicate labels in stalk at {algebra.atoms[i]}")
            norm[i] = sort_labels(labels)
        missing = [algebra.atoms[i] for i in algebra.atom_indices if i not in norm]
        if missing:
            raise ValidationError(f"no stalk given for atoms {missing}")
        self.stalks = {i: norm[i] for i in algebra.atom_indices}

    @cached_property
    def _key(self):
        return (self.algebra.atoms, self.algebra.top, tuple(self.stalks.items()))

    def __eq__(self, other):
        if not isinstance(other, StalkSheaf):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        inner = ", ".join(
            f"{self.algebra.atoms[i]}: {list(s)}" for i, s in self.stalks.items()
        )
        return f"StalkSheaf({{{inner}}})"

    def stalk(self, i):
        return self.stalks[i]

    def component(self, c):
        c = _mask(c)
        if c & ~self.top:
            raise ValidationError(f"{self.algebra.fmt(c)} is not below the top")
        return self._component(c)

    @cached_property
    def _components(self):
        return {}

    def _component(self, c):
        comp = self._components.get(c)
        if comp is None:
            idx = bits(c)
            size = 1
            for i in idx:
                size *= len(self.stalks[i])
            if size > max_tuples():
                raise SizeGuardError(
                    f"component at {self.algebra.fmt(c)} has {size} elements "
                    f"(cap {max_tuples()}, set CONDSHEAF_MAX_TUPLES to raise)"
                )
            comp = tuple(itertools.product(*(self.stalks[i] for i in idx)))
            self._components[c] = comp
        return comp

    def restrict(self, x, frm, to):
        frm, to = _mask(frm), _mask(to)
        if to == frm:
            return x
        idx = bits(frm)
        return tuple(v for i, v in zip(idx, x) if (to >> i) & 1)

    def germ(self, x, c, i):
        return x[bits(_mask(c)).index(i)]

    def glue(self, c, germs):
        return tuple(germs[i] for i in bits(_mask(c)))

    def amalgamate(self, parts, family):
        if isinstance(parts, Partition):
            return super().amalgamate(parts, family)
        base, part_masks = parts
        germs = {}
        for pm in part_masks:
            x = family.get(pm)
            if x is None:
                return super().amalgamate(parts, family)
            germs.update(zip(bits(pm), x))
        return tuple(germs[i] for i in bits(base))

    def restricted(self, a) -> StalkSheaf:
        rel = self.algebra.relative(a)
        return StalkSheaf(rel, {i: self.stalks[i] for i in rel.atom_indices})

    def is_surjective(self):
        # projections out of products of non-empty stalks are onto
        return True

    def surjectivity_witness(self):
        return None


class ExtensionalSheaf(Sheaf):
    """Explicit components and restriction maps; build through :func:`validate_sheaf`."""

    def __init__(self, algebra: Algebra, components: Mapping[int, tuple], maps: Mapping):
        self.algebra = algebra
        self.components = {c: tuple(components[c]) for c in algebra.masks}
        self.maps = dict(maps)

    @cached_property
    def _key(self):
        maps = tuple(
            (k, tuple(sorted(self.maps[k].items(), key=repr))) for k in sorted(self.maps)
        )
        comps = tuple((c, sort_labels(v)) for c, v in sorted(self.components.items()))
        return (self.algebra.atoms, self.algebra.top, comps, maps)

    def __eq__(self, other):
        if not isinstance(other, ExtensionalSheaf):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        sizes = {self.algebra.fmt(c): len(v) for c, v in self.components.items()}
        return f"ExtensionalSheaf({sizes})"

    def component(self, c):
        return self.components[_mask(c)]

    def restrict(self, x, frm, to):
        frm, to = _mask(frm), _mask(to)
        if frm == to:
            return x
        return self.maps[(frm, to)][x]

    def stalk(self, i):
        return self.components[1 << i]

    @cached_property
    def _glue_tables(self):
        return {}

    def glue(self, c, germs):
        c = _mask(c)
        table = self._glue_tables.get(c)
        if table is None:
            table = {self.decompose(x, c): x for x in self.components[c]}
            self._glue_tables[c] = table
        return table[tuple(germs[i] for i in bits(c))]

    def restricted(self, a) -> ExtensionalSheaf:
        rel = self.algebra.relative(a)
        keep = set(rel.masks)
        comps = {c: self.components[c] for c in rel.masks}
        maps = {k: v for k, v in self.maps.items() if k[0] in keep}
        return ExtensionalSheaf(rel, comps, maps)

    def normalize(self) -> StalkSheaf:
        """The stalk form: stalks are the components at the atoms."""
        return StalkSheaf(self.algebra, {i: self.components[1 << i] for i in self.algebra.atom_indices})

    def normal_form_iso(self) -> dict[int, dict]:
        """Per component, the bijection onto the stalk form's tuples."""
        return {c: {x: self.decompose(x, c) for x in self.components[c]} for c in self.algebra.masks}


def terminal_sheaf(algebra: Algebra) -> StalkSheaf:
    return StalkSheaf(algebra, {i: ("*",) for i in algebra.atom_indices})


def sheaf_from_stalks(algebra: Algebra, stalks: Mapping) -> StalkSheaf:
    return StalkSheaf(algebra, stalks)


def restrict_sheaf(X: Sheaf, a) -> Sheaf:
    return X.restricted(a)


def amalgamate(X: Sheaf, parts, family):
    return X.amalgamate(parts, family)


def is_surjective(X: Sheaf) -> bool:
    return X.is_surjective()


def sheaf_equal(X: Sheaf, Y: Sheaf) -> bool:
    """Componentwise equality of components and restrictions, ignoring X_0's point."""
    if X.algebra != Y.algebra:
        return False
    if isinstance(X, StalkSheaf) and isinstance(Y, StalkSheaf):
        return X.stalks == Y.stalks
    for c in X.algebra.masks:
        if c == 0:
            continue
        if set(X.component(c)) != set(Y.component(c)):
            return False
    for a, b in X.algebra.arrows():
        if a == 0 or a == b:
            continue
        for x in X.component(b):
            if X.restrict(x, b, a) != Y.restrict(x, b, a):
                return False
    return True


def isomorphic(X: Sheaf, Y: Sheaf) -> bool:
    """Isomorphism of sheaves; on an atomic site this is equality of stalk sizes."""
    if X.algebra != Y.algebra:
        return False
    return all(len(X.stalk(i)) == len(Y.stalk(i)) for i in X.algebra.atom_indices)


def is_subsheaf(S: Sheaf, Y: Sheaf) -> bool:
    """``S_c`` is a subset of ``Y_c`` for every ``c != 0``, with the same restrictions."""
    if S.algebra.atoms != Y.algebra.atoms or S.top & ~Y.top:
        return False
    for c in S.algebra.masks:
        if c and not set(S.component(c)) <= set(Y.component(c)):
            return False
    for a, b in S.algebra.arrows():
        if a == 0 or a == b:
            continue
        for x in S.component(b):
            if S.restrict(x, b, a) != Y.restrict(x, b, a):
                return False
    return True


# -- extensional validation ---------------------------------------------------


def _fill_forced_maps(algebra, components, maps):
    maps = {k: dict(v) for k, v in maps.items()}
    zero = components.get(0)
    for a, b in algebra.arrows():
        if (b, a) in maps or b not in components:
            continue
        if a == b:
            maps[(b, a)] = {x: x for x in components[b]}
        elif a == 0 and zero is not None and len(zero) == 1:
            maps[(b, a)] = {x: zero[0] for x in components[b]}
    return maps


def check_sheaf(algebra: Algebra, components: Mapping, maps: Mapping):
    """Return ``(structural_problems, violations)`` for extensional sheaf data.

    ``components`` maps masks to element lists; ``maps`` maps ``(frm, to)``
    mask pairs with ``to <= frm`` to dicts.  Identity maps and maps into a
    singleton X_0 may be omitted.
    """
    problems: list[str] = []
    violations: list[Violation] = []
    fmt = algebra.fmt
    comps = {}
    for c in algebra.masks:
        if c not in components:
            problems.append(f"missing component at {fmt(c)}")
            continue
        elems = list(components[c])
        if len(set(elems)) != len(elems):
            problems.append(f"duplicate elements in component at {fmt(c)}")
        comps[c] = tuple(elems)
    extra = set(components) - set(algebra.masks)
    for c in sorted(extra):
        problems.append(f"component given at {fmt(c)}, outside the algebra")
    maps = _fill_forced_maps(algebra, comps, maps)
    for a, b in algebra.arrows():
        if a not in comps or b not in comps:
            continue
        m = maps.get((b, a))
        if m is None:
            problems.append(f"missing restriction map {fmt(b)} -> {fmt(a)}")
            continue
        for x in comps[b]:
            if x not in m:
                problems.append(f"map {fmt(b)} -> {fmt(a)} undefined at {x!r}")
            elif m[x] not in set(comps[a]):
                problems.append(f"map {fmt(b)} -> {fmt(a)} sends {x!r} outside X_{fmt(a)}")
    if problems:
        return problems, violations

    if len(comps[0]) != 1:
        violations.append(Violation(
            "x0-singleton", f"X_0 has {len(comps[0])} elements, not exactly one",
            {"component": "0", "size": len(comps[0])},
        ))
    for a in algebra.masks:
        for x in comps[a]:
            if maps[(a, a)][x] != x:
                violations.append(Violation(
                    "functoriality", f"map {fmt(a)} -> {fmt(a)} is not the identity at {x!r}",
                    {"a": fmt(a), "x": x},
                ))
    for c in algebra.masks:
        for b in submasks(c):
            if b == c:
                continue
            for a in submasks(b):
                if a == b:
                    continue
                for x in comps[c]:
                    direct = maps[(c, a)][x]
                    via = maps[(b, a)][maps[(c, b)][x]]
                    if direct != via:
                        violations.append(Violation(
                            "functoriality",
                            f"restricting {x!r} from {fmt(c)} to {fmt(a)} directly gives "
                            f"{direct!r} but via {fmt(b)} gives {via!r}",
                            {"a": fmt(a), "b": fmt(b), "c": fmt(c), "x": x},
                        ))
    for a in algebra.masks:
        if a == 0:
            continue
        for parts in partition_masks(a):
            if parts == (a,):
                continue
            groups: dict[tuple, list] = {}
            for x in comps[a]:
                groups.setdefault(tuple(maps[(a, p)][x] for p in parts), []).append(x)
            label = "{" + ", ".join(fmt(p) for p in parts) + "}"
            for fam in itertools.product(*(comps[p] for p in parts)):
                hits = groups.get(fam, [])
                if not hits:
                    violations.append(Violation(
                        "amalgamation-existence",
                        f"family {list(fam)!r} on partition {label} of {fmt(a)} has no amalgamation",
                        {"a": fmt(a), "partition": [fmt(p) for p in parts], "family": list(fam)},
                    ))
                elif len(hits) > 1:
                    violations.append(Violation(
                        "amalgamation-uniqueness",
                        f"family {list(fam)!r} on partition {label} of {fmt(a)} has "
                        f"{len(hits)} amalgamations {hits!r}",
                        {"a": fmt(a), "partition": [fmt(p) for p in parts],
                         "family": list(fam), "amalgamations": hits},
                    ))
    return problems, violations


def validate_sheaf(algebra: Algebra, components: Mapping, maps: Mapping) -> ExtensionalSheaf:
    """Validated extensional sheaf; raises StructureError or AxiomError otherwise."""
    problems, violations = check_sheaf(algebra, components, maps)
    if problems:
        raise StructureError("; ".join(problems))
    if violations:
        raise AxiomError(violations)
    comps = {c: tuple(components[c]) for c in algebra.masks}
    return ExtensionalSheaf(algebra, comps, _fill_forced_maps(algebra, comps, maps))


# -- natural transformations -------------------------------------------------


class NatTrans:
    """A family of component functions ``source_c -> target_c``."""

    def __init__(self, source: Sheaf, target: Sheaf, components: Mapping[int, Mapping]):
        if source.algebra != target.algebra:
            raise ValidationError("natural transformation between sheaves on different algebras")
        self.source = source
        self.target = target
        self.components = {c: dict(components[c]) for c in source.algebra.masks}

    @classmethod
    def from_stalk_maps(cls, source: Sheaf, target: Sheaf, stalk_maps: Mapping) -> NatTrans:
        alg = source.algebra
        sm = {}
        for key, m in stalk_maps.items():
            i = key if isinstance(key, int) else alg.atoms.index(key)
            sm[i] = dict(m)
        comps = {}
        for c in alg.masks:
            idx = bits(c)
            comps[c] = {
                x: target.glue(c, {i: sm[i][source.germ(x, c, i)] for i in idx})
                for x in source.component(c)
            }
        return cls(source, target, comps)

    @classmethod
    def identity(cls, X: Sheaf) -> NatTrans:
        return cls(X, X, {c: {x: x for x in X.component(c)} for c in X.algebra.masks})

    def __call__(self, c, x):
        return self.components[_mask(c)][x]

    def __eq__(self, other):
        if not isinstance(other, NatTrans):
            return NotImplemented
        return (self.source.algebra == other.source.algebra
                and self.components == other.components)

    def __repr__(self):
        return f"NatTrans({self.source!r} -> {self.target!r})"

    def stalk_map(self, i: int) -> dict:
        """The component at atom ``i`` as a map between stalk labels."""
        d = 1 << i
        X, Y = self.source, self.target
        return {X.germ(x, d, i): Y.germ(y, d, i) for x, y in self.components[d].items()}

    def stalk_maps(self) -> dict[int, dict]:
        return {i: self.stalk_map(i) for i in self.source.algebra.atom_indices}

    def validate(self) -> list[Violation]:
        out = []
        alg = self.source.algebra
        for c in alg.masks:
            tgt = set(self.target.component(c))
            comp = self.components[c]
            for x in self.source.component(c):
                if x not in comp:
                    out.append(Violation("totality", f"f_{alg.fmt(c)} undefined at {x!r}",
                                         {"c": alg.fmt(c), "x": x}))
                elif comp[x] not in tgt:
                    out.append(Violation("codomain", f"f_{alg.fmt(c)}({x!r}) not in target",
                                         {"c": alg.fmt(c), "x": x}))
        if out:
            return out
        for a, b in alg.arrows():
            if a == b:
                continue
            for x in self.source.component(b):
                lhs = self.target.restrict(self.components[b][x], b, a)
                rhs = self.components[a][self.source.restrict(x, b, a)]
                if lhs != rhs:
                    out.append(Violation(
                        "naturality",
                        f"at {alg.fmt(b)} -> {alg.fmt(a)} and {x!r}: {lhs!r} != {rhs!r}",
                        {"a": alg.fmt(a), "b": alg.fmt(b), "x": x},
                    ))
        return out

    def is_componentwise_injective_below(self, a) -> bool:
        for c in submasks(_mask(a)):
            comp = self.components[c]
            if len(set(comp.values())) != len(comp):
                return False
        return True


def compose(g: NatTrans, f: NatTrans) -> NatTrans:
    """``g . f``."""
    if f.target != g.source:
        raise ValidationError("cannot compose: target of f is not the source of g")
    comps = {c: {x: g.components[c][y] for x, y in f.components[c].items()}
             for c in f.source.algebra.masks}
    return NatTrans(f.source, g.target, comps)


def identity(X: Sheaf) -> NatTrans:
    return NatTrans.identity(X)


def global_elements(X: Sheaf) -> list[NatTrans]:
    """All transformations from the terminal sheaf into ``X``."""
    one = terminal_sheaf(X.algebra)
    idx = X.algebra.atom_indices
    out = []
    for choice in itertools.product(*(X.stalk(i) for i in idx)):
        maps = {i: {"*": v} for i, v in zip(idx, choice)}
        out.append(NatTrans.from_stalk_maps(one, X, maps))
    return out
