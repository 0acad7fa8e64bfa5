"""The quotient category F of pairs (support, surjective sheaf).

An arrow ``(a, X) -> (b, Y)`` exists only when ``a <= b`` and is a natural
transformation ``X -> Y`` up to agreement on every component below ``a``.
Because the algebra is atomic, that class is determined by the stalk
functions at the atoms below ``a``, and ``FArrow`` stores exactly those, so
equality of arrows is equality of the stored data.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .boolean_algebra import Algebra, Elem, bits, make_algebra
from .errors import ValidationError
from .sheaf import (
    ExtensionalSheaf,
    NatTrans,
    Sheaf,
    StalkSheaf,
    sort_labels,
    terminal_sheaf,
)


class ArrowError(ValidationError):
    pass


@dataclass(frozen=True)
class FObject:
    support: Elem
    carrier: Sheaf

    def __post_init__(self):
        alg = self.carrier.algebra
        if alg.is_relative:
            raise ValidationError("the carrier of an object must be a sheaf on the whole algebra")
        alg.check_same(self.support.algebra)
        if self.support.mask == 0 and not _is_terminal(self.carrier):
            # every (0, Z) is identified with the initial object
            object.__setattr__(self, "carrier", terminal_sheaf(alg))
        elif not isinstance(self.carrier, StalkSheaf):
            w = self.carrier.surjectivity_witness()
            if w is not None:
                raise ValidationError(f"carrier is not a surjective sheaf: {w}")

    @property
    def algebra(self) -> Algebra:
        return self.carrier.algebra

    @cached_property
    def atoms(self) -> tuple[int, ...]:
        return tuple(bits(self.support.mask))

    def stalk(self, i: int) -> tuple:
        return self.carrier.stalk(i)

    def __str__(self):
        sizes = ",".join(str(len(self.stalk(i))) for i in self.algebra.atom_indices)
        return f"({self.support}, [{sizes}])"


def _is_terminal(X: Sheaf) -> bool:
    return isinstance(X, StalkSheaf) and all(s == ("*",) for s in X.stalks.values())


def initial_object(algebra: Algebra) -> FObject:
    return FObject(algebra.zero, terminal_sheaf(algebra))


def terminal_object(algebra: Algebra) -> FObject:
    return FObject(algebra.one, terminal_sheaf(algebra))


@dataclass(frozen=True)
class FArrow:
    """Arrow in F, stored as one image tuple per atom below the source support.

    ``maps`` pairs each such atom index with the images of the source stalk
    (in the stalk's stored order).
    """

    source: FObject
    target: FObject
    maps: tuple[tuple[int, tuple], ...]

    @classmethod
    def build(cls, source: FObject, target: FObject, stalk_maps: Mapping) -> FArrow:
        """Validated constructor from ``{atom (name or index): {label: image}}``."""
        if not source.support <= target.support:
            raise ArrowError(
                f"no arrows from support {source.support} to support {target.support}"
            )
        alg = source.algebra
        sm = {}
        for key, m in stalk_maps.items():
            i = key if isinstance(key, int) else alg.atoms.index(key)
            sm[i] = m
        maps = []
        for i in source.atoms:
            if i not in sm:
                raise ArrowError(f"no stalk map at atom {alg.atoms[i]}")
            tgt = set(target.stalk(i))
            m = sm[i]
            imgs = []
            for x in source.stalk(i):
                if x not in m:
                    raise ArrowError(f"stalk map at {alg.atoms[i]} undefined at {x!r}")
                if m[x] not in tgt:
                    raise ArrowError(f"stalk map at {alg.atoms[i]} sends {x!r} outside the target")
                imgs.append(m[x])
            maps.append((i, tuple(imgs)))
        return cls(source, target, tuple(maps))

    @classmethod
    def from_nat(cls, source: FObject, target: FObject, nat: NatTrans) -> FArrow:
        """The class of a transformation between the carriers."""
        return cls.build(source, target, {i: nat.stalk_map(i) for i in source.atoms})

    @cached_property
    def lookup(self) -> dict[int, dict]:
        return {i: dict(zip(self.source.stalk(i), imgs)) for i, imgs in self.maps}

    def stalk_map(self, i: int) -> dict:
        return self.lookup[i]

    def component(self, c) -> dict:
        """``f_c`` on the source carrier's component at ``c <= support``."""
        c = self.source.algebra.mask_of(c)
        if c & ~self.source.support.mask:
            raise ArrowError("components above the source support are not determined")
        X, Y = self.source.carrier, self.target.carrier
        idx = bits(c)
        return {
            x: Y.glue(c, {i: self.lookup[i][X.germ(x, c, i)] for i in idx})
            for x in X.component(c)
        }

    def __str__(self):
        alg = self.source.algebra
        parts = []
        for i, imgs in self.maps:
            pairs = ", ".join(f"{x}->{y}" for x, y in zip(self.source.stalk(i), imgs))
            parts.append(f"{alg.atoms[i]}: {{{pairs}}}")
        return f"{self.source} -> {self.target} [{'; '.join(parts)}]"


def identity_arrow(obj: FObject) -> FArrow:
    return FArrow(obj, obj, tuple((i, obj.stalk(i)) for i in obj.atoms))


def compose(g: FArrow, f: FArrow) -> FArrow:
    """``g . f``."""
    if f.target != g.source:
        raise ArrowError("cannot compose: target of f is not the source of g")
    gl = g.lookup
    return FArrow(
        f.source, g.target,
        tuple((i, tuple(gl[i][y] for y in imgs)) for i, imgs in f.maps),
    )


def hom_set(src: FObject, tgt: FObject) -> list[FArrow]:
    """Every arrow ``src -> tgt``; empty unless the supports are ordered."""
    if not src.support <= tgt.support:
        return []
    per_atom = []
    for i in src.atoms:
        n = len(src.stalk(i))
        per_atom.append([(i, imgs) for imgs in itertools.product(tgt.stalk(i), repeat=n)])
    return [FArrow(src, tgt, tuple(choice)) for choice in itertools.product(*per_atom)]


def least_element(X: Sheaf, c: int):
    return sort_labels(X.component(c))[0]


def constant_transformation(X: Sheaf, Y: Sheaf) -> NatTrans:
    """Stalkwise constant map onto the least label of each target stalk."""
    alg = X.algebra
    maps = {i: {x: sort_labels(Y.stalk(i))[0] for x in X.stalk(i)} for i in alg.atom_indices}
    return NatTrans.from_stalk_maps(X, Y, maps)


def extend_natural(h: NatTrans, X: Sheaf, Y: Sheaf, default: NatTrans | None = None) -> NatTrans:
    """Combine ``h : X|_a -> Y|_a`` with ``default : X -> Y`` into one transformation.

    ``f_d(x)`` is the amalgamation of ``h`` applied to the restriction of ``x``
    to ``a & d`` and ``default`` applied to its restriction to ``~a & d``.
    """
    a = h.source.algebra.top
    if default is None:
        default = constant_transformation(X, Y)
    alg = X.algebra
    comps = {}
    for d in alg.masks:
        inside, outside = d & a, d & ~a
        parts = [p for p in (inside, outside) if p]
        comp = {}
        for x in X.component(d):
            fam = {}
            if inside:
                fam[inside] = h.components[inside][X.restrict(x, d, inside)]
            if outside:
                fam[outside] = default.components[outside][X.restrict(x, d, outside)]
            comp[x] = Y.amalgamate((d, parts), fam)
        comps[d] = comp
    return NatTrans(X, Y, comps)


def extend_transformation(h: NatTrans, b, X: Sheaf, Y: Sheaf,
                          default: NatTrans | None = None) -> FArrow:
    """The arrow ``(a, X) -> (b, Y)`` agreeing with ``h`` below ``a``."""
    alg = X.algebra
    a = alg.elem(h.source.algebra.top)
    b = alg.elem(b)
    if not a <= b:
        raise ArrowError(f"cannot extend: {a} is not below {b}")
    f = extend_natural(h, X, Y, default)
    return FArrow.from_nat(FObject(a, X), FObject(b, Y), f)


@dataclass
class MonicCheck:
    """Outcome of :func:`is_monic`; truthy when the arrow is monic.

    On failure ``witness`` holds two distinct arrows ``(a, 1) -> (a, X)`` that
    ``m`` merges, and ``atom``/``pair`` name the collapsed stalk elements.
    """

    ok: bool
    atom: int | None = None
    pair: tuple | None = None
    witness: tuple[FArrow, FArrow] | None = None

    def __bool__(self):
        return self.ok


def _separating_global_elements(X: Sheaf, d: int, x, y):
    """Global elements equal to ``x`` resp. ``y`` on ``d`` and to a fixed one elsewhere."""
    alg = X.algebra
    one = terminal_sheaf(alg)
    dc = alg.top & ~d
    z = least_element(X, dc)
    out = []
    for v in (x, y):
        comps = {}
        for e in alg.masks:
            parts = [p for p in (d & e, dc & e) if p]
            fam = {}
            if d & e:
                fam[d & e] = X.restrict(v, d, d & e)
            if dc & e:
                fam[dc & e] = X.restrict(z, dc, dc & e)
            comps[e] = {"*": X.amalgamate((e, parts), fam)}
        out.append(NatTrans(one, X, comps))
    return out


def is_monic(m: FArrow) -> MonicCheck:
    X = m.source.carrier
    for i, imgs in m.maps:
        seen = {}
        for x, y in zip(m.source.stalk(i), imgs):
            if y in seen:
                x0 = seen[y]
                d = 1 << i
                h, g = _separating_global_elements(
                    X, d, X.glue(d, {i: x0}), X.glue(d, {i: x})
                )
                a = m.source.support
                src = FObject(a, terminal_sheaf(X.algebra))
                fh = FArrow.from_nat(src, m.source, h)
                fg = FArrow.from_nat(src, m.source, g)
                return MonicCheck(False, i, (x0, x), (fh, fg))
            seen[y] = x
    return MonicCheck(True)


@dataclass(frozen=True)
class Subobject:
    """A subobject of ``ambient``: a support below its support and stalk subsets."""

    ambient: FObject
    support: int
    stalks: tuple[tuple[int, tuple], ...]

    @classmethod
    def make(cls, ambient: FObject, support, stalks: Mapping) -> Subobject:
        alg = ambient.algebra
        s = alg.mask_of(support)
        if s & ~ambient.support.mask:
            raise ValidationError(f"support {alg.fmt(s)} is not below {ambient.support}")
        given = {(k if isinstance(k, int) else alg.atoms.index(k)): v for k, v in stalks.items()}
        out = []
        for i in bits(s):
            sub = given.get(i)
            if not sub:
                raise ValidationError(f"subobject needs a non-empty stalk at {alg.atoms[i]}")
            amb = ambient.stalk(i)
            if not set(sub) <= set(amb):
                raise ValidationError(f"stalk at {alg.atoms[i]} is not a subset of the ambient stalk")
            out.append((i, tuple(x for x in amb if x in set(sub))))
        return cls(ambient, s, tuple(out))

    def __hash__(self):
        return self._hash

    @cached_property
    def _hash(self) -> int:
        return hash((self.support, self.stalks))

    @cached_property
    def stalk_sets(self) -> dict[int, frozenset]:
        return {i: frozenset(s) for i, s in self.stalks}

    @property
    def support_elem(self) -> Elem:
        return self.ambient.algebra.elem(self.support)

    def stalk(self, i: int) -> tuple:
        return dict(self.stalks)[i]

    def component(self, c) -> frozenset:
        """Elements of the ambient carrier's component at ``c <= support``."""
        c = c.mask if isinstance(c, Elem) else c
        if c & ~self.support:
            raise ValidationError("subobject components exist only below its support")
        X = self.ambient.carrier
        idx = bits(c)
        st = dict(self.stalks)
        return frozenset(
            X.glue(c, dict(zip(idx, choice))) if idx else X.point()
            for choice in itertools.product(*(st[i] for i in idx))
        )

    def leq(self, other: Subobject) -> bool:
        if self.support & ~other.support:
            return False
        o = other.stalk_sets
        return all(s <= o[i] for i, s in self.stalk_sets.items())

    def as_sheaf(self) -> ExtensionalSheaf:
        """The subsheaf of the ambient carrier restricted to the support."""
        X = self.ambient.carrier
        rel = X.algebra.relative(self.support)
        comps = {c: tuple(sort_labels(self.component(c))) for c in rel.masks}
        maps = {(b, a): {x: X.restrict(x, b, a) for x in comps[b]} for a, b in rel.arrows()}
        return ExtensionalSheaf(rel, comps, maps)

    def padded_carrier(self) -> StalkSheaf:
        """Stalks of the subobject below its support, the ambient stalks elsewhere."""
        X = self.ambient.carrier
        st = dict(self.stalks)
        return StalkSheaf(X.algebra, {i: st.get(i, X.stalk(i)) for i in X.algebra.atom_indices})

    def as_fobject(self) -> FObject:
        return FObject(self.support_elem, self.padded_carrier())

    def inclusion(self) -> FArrow:
        src = self.as_fobject()
        return FArrow(src, self.ambient, tuple((i, src.stalk(i)) for i in src.atoms))

    def label(self) -> str:
        alg = self.ambient.algebra
        inner = ";".join(
            f"{alg.atoms[i]}={{{','.join(str(x) for x in s)}}}" for i, s in self.stalks
        )
        return f"{alg.fmt(self.support)}:{inner}"

    def __str__(self):
        return self.label()


def subobject_of_monic(m: FArrow) -> Subobject:
    """The (support, subsheaf) pair classifying the monic ``m``."""
    chk = is_monic(m)
    if not chk:
        raise ArrowError(f"arrow is not monic: it identifies {chk.pair} at atom "
                         f"{m.source.algebra.atoms[chk.atom]}")
    stalks = tuple((i, tuple(x for x in m.target.stalk(i) if x in set(imgs)))
                   for i, imgs in m.maps)
    return Subobject(m.target, m.source.support.mask, stalks)


def separating_arrow(f: FArrow, g: FArrow) -> FArrow:
    """An arrow ``u`` out of a subterminal with ``f . u != g . u``.

    The subterminal is ``(c, 1)`` for an atom ``c`` where ``f`` and ``g``
    differ, and ``u`` picks an element on which they differ.
    """
    if f.source != g.source or f.target != g.target:
        raise ArrowError("arrows are not parallel")
    X = f.source.carrier
    for i, imgs in f.maps:
        gl = g.lookup[i]
        for x, y in zip(f.source.stalk(i), imgs):
            if gl[x] != y:
                c = X.algebra.elem(1 << i)
                src = FObject(c, terminal_sheaf(X.algebra))
                u = FArrow(src, f.source, ((i, (x,)),))
                assert compose(f, u) != compose(g, u)
                return u
    raise ArrowError("not separable: the arrows are equal")


# -- finite limits and colimits ----------------------------------------------


@dataclass
class Limit:
    """A limit or colimit: apex plus its legs (projections or injections)."""

    kind: str
    apex: FObject
    legs: tuple[FArrow, ...]
    diagram: tuple[FArrow | FObject, ...]

    @property
    def is_colimit(self) -> bool:
        return self.kind == "coproduct"

    def mediate(self, arrows: Sequence[FArrow]) -> FArrow:
        return _MEDIATORS[self.kind](self, arrows)


def product(A: FObject, B: FObject) -> Limit:
    alg = A.algebra
    s = A.support & B.support
    stalks = {i: tuple(itertools.product(A.stalk(i), B.stalk(i))) for i in alg.atom_indices}
    P = FObject(s, StalkSheaf(alg, stalks))
    p1 = FArrow(P, A, tuple((i, tuple(x for x, _ in P.stalk(i))) for i in P.atoms))
    p2 = FArrow(P, B, tuple((i, tuple(y for _, y in P.stalk(i))) for i in P.atoms))
    return Limit("product", P, (p1, p2), (A, B))


def _pair_into(lim: Limit, arrows):
    h, k = arrows
    W = h.source
    return FArrow(W, lim.apex, tuple(
        (i, tuple(zip(hi, ki))) for (i, hi), (_, ki) in zip(h.maps, k.maps)
    ))


def coproduct(A: FObject, B: FObject) -> Limit:
    alg = A.algebra
    a, b = A.support.mask, B.support.mask
    stalks = {}
    for i in alg.atom_indices:
        labels = []
        if (a >> i) & 1:
            labels += [(0, x) for x in A.stalk(i)]
        if (b >> i) & 1:
            labels += [(1, y) for y in B.stalk(i)]
        stalks[i] = labels or ["*"]
    C = FObject(A.support | B.support, StalkSheaf(alg, stalks))
    i1 = FArrow(A, C, tuple((i, tuple((0, x) for x in A.stalk(i))) for i in A.atoms))
    i2 = FArrow(B, C, tuple((i, tuple((1, y) for y in B.stalk(i))) for i in B.atoms))
    return Limit("coproduct", C, (i1, i2), (A, B))


def _copair(lim: Limit, arrows):
    f, g = arrows
    C = lim.apex
    fl, gl = f.lookup, g.lookup
    maps = []
    for i in C.atoms:
        imgs = tuple(fl[i][x] if tag == 0 else gl[i][x] for tag, x in C.stalk(i))
        maps.append((i, imgs))
    return FArrow(C, f.target, tuple(maps))


def equalizer(f: FArrow, g: FArrow) -> Limit:
    if f.source != g.source or f.target != g.target:
        raise ArrowError("equalizer needs parallel arrows")
    A = f.source
    alg = A.algebra
    sols = {}
    for i in A.atoms:
        fl, gl = f.lookup[i], g.lookup[i]
        sols[i] = tuple(x for x in A.stalk(i) if fl[x] == gl[x])
    s = 0
    for i, sol in sols.items():
        if sol:
            s |= 1 << i
    stalks = {i: sols[i] if (s >> i) & 1 else A.stalk(i) for i in alg.atom_indices}
    E = FObject(alg.elem(s), StalkSheaf(alg, stalks))
    e = FArrow(E, A, tuple((i, E.stalk(i)) for i in E.atoms))
    return Limit("equalizer", E, (e,), (f, g))


def _restrict_into(lim: Limit, arrows):
    (h,) = arrows
    return FArrow(h.source, lim.apex, h.maps)


def pullback(f: FArrow, g: FArrow) -> Limit:
    if f.target != g.target:
        raise ArrowError("pullback needs a cospan")
    A, B = f.source, g.source
    alg = A.algebra
    s = 0
    sols = {}
    for i in bits(A.support.mask & B.support.mask):
        fl, gl = f.lookup[i], g.lookup[i]
        sols[i] = tuple((x, y) for x in A.stalk(i) for y in B.stalk(i) if fl[x] == gl[y])
        if sols[i]:
            s |= 1 << i
    stalks = {
        i: sols[i] if (s >> i) & 1 else tuple(itertools.product(A.stalk(i), B.stalk(i)))
        for i in alg.atom_indices
    }
    P = FObject(alg.elem(s), StalkSheaf(alg, stalks))
    p1 = FArrow(P, A, tuple((i, tuple(x for x, _ in P.stalk(i))) for i in P.atoms))
    p2 = FArrow(P, B, tuple((i, tuple(y for _, y in P.stalk(i))) for i in P.atoms))
    return Limit("pullback", P, (p1, p2), (f, g))


_MEDIATORS = {
    "product": _pair_into,
    "pullback": _pair_into,
    "equalizer": _restrict_into,
    "coproduct": _copair,
}

_BUILDERS = {
    "product": product,
    "coproduct": coproduct,
    "equalizer": equalizer,
    "pullback": pullback,
}


def finite_limits_colimits(kind: str, *diagram) -> Limit:
    """Dispatch to ``product``, ``coproduct``, ``equalizer`` or ``pullback``."""
    if kind not in _BUILDERS:
        raise ValueError(f"unknown construction {kind!r}")
    if not diagram:
        raise ValidationError(f"empty diagram for {kind}")
    return _BUILDERS[kind](*diagram)


# -- bounded universes and universal-property checks -------------------------


def default_atom_names(n: int) -> list[str]:
    base = "pqrstuvw"
    return list(base[:n]) if n <= len(base) else [f"p{i}" for i in range(n)]


def bounded_universe(algebra: Algebra, max_stalk: int) -> list[FObject]:
    """Every object with stalk sizes in ``1..max_stalk``; ``(0, Z)`` appears once."""
    out = [initial_object(algebra)]
    idx = algebra.atom_indices
    carriers = []
    for sizes in itertools.product(range(1, max_stalk + 1), repeat=len(idx)):
        stalks = {i: [f"{algebra.atoms[i]}{j + 1}" for j in range(k)] for i, k in zip(idx, sizes)}
        carriers.append(StalkSheaf(algebra, stalks))
    for s in algebra.masks:
        if s == 0:
            continue
        out.extend(FObject(algebra.elem(s), X) for X in carriers)
    return out


def arrows_between(universe: Sequence[FObject]) -> Iterator[FArrow]:
    for A in universe:
        for B in universe:
            yield from hom_set(A, B)


@dataclass
class UniversalCheck:
    ok: bool
    apexes: int = 0
    cones: int = 0
    failures: list[str] = field(default_factory=list)


def verify_universal(lim: Limit, universe: Iterable[FObject], check_mediate: bool = True) -> UniversalCheck:
    """Check the universal property against every (co)cone with apex in ``universe``.

    For each test object ``W`` the map ``u -> (legs composed with u)`` must be
    a bijection from ``hom(W, apex)`` (``hom(apex, W)`` for colimits) onto
    the (co)cones from ``W``, and ``mediate`` must invert it.
    """
    res = UniversalCheck(True)
    legs = lim.legs
    if lim.kind == "equalizer":
        f, g = lim.diagram
        (e,) = legs
        if compose(f, e) != compose(g, e):
            res.failures.append("equalizer leg does not equalize")
    elif lim.kind == "pullback":
        f, g = lim.diagram
        if compose(f, legs[0]) != compose(g, legs[1]):
            res.failures.append("pullback square does not commute")
    for W in universe:
        res.apexes += 1
        if lim.is_colimit:
            A, B = lim.diagram
            n_cones = len(hom_set(A, W)) * len(hom_set(B, W))
            us = hom_set(lim.apex, W)
            images = [tuple(compose(u, leg) for leg in legs) for u in us]
        else:
            us = hom_set(W, lim.apex)
            images = [tuple(compose(leg, u) for leg in legs) for u in us]
            n_cones = _count_cones(lim, W)
        res.cones += n_cones
        if len(set(images)) != len(images):
            res.failures.append(f"two mediating arrows for one cone from {W}")
        if len(images) != n_cones:
            res.failures.append(
                f"apex {W}: {n_cones} cones but {len(images)} arrows through the {lim.kind}"
            )
        for u, img in zip(us, images if check_mediate else ()):
            if lim.mediate(img) != u:
                res.failures.append(f"mediate does not recover {u}")
                break
    res.ok = not res.failures
    return res


def _count_cones(lim: Limit, W: FObject) -> int:
    if lim.kind == "product":
        A, B = lim.diagram
        return len(hom_set(W, A)) * len(hom_set(W, B))
    if lim.kind == "equalizer":
        f, g = lim.diagram
        return sum(1 for h in hom_set(W, f.source) if compose(f, h) == compose(g, h))
    if lim.kind == "pullback":
        f, g = lim.diagram
        left: dict = {}
        for h in hom_set(W, f.source):
            k = compose(f, h)
            left[k] = left.get(k, 0) + 1
        total = 0
        for k in hom_set(W, g.source):
            total += left.get(compose(g, k), 0)
        return total
    raise ValueError(lim.kind)


def left_cancellable(m: FArrow, universe: Iterable[FObject]) -> bool:
    """Brute-force monicity: no two distinct arrows into the source are merged by ``m``."""
    for W in universe:
        seen = {}
        for u in hom_set(W, m.source):
            k = compose(m, u)
            if k in seen:
                return False
            seen[k] = u
    return True


def limits_report(n_atoms: int, max_stalk: int) -> dict:
    """Verify every product, coproduct, equalizer and pullback of a bounded universe."""
    alg = make_algebra(default_atom_names(n_atoms))
    universe = bounded_universe(alg, max_stalk)
    homs = {(A, B): hom_set(A, B) for A in universe for B in universe}
    counts = {k: 0 for k in _BUILDERS}
    cones = {k: 0 for k in _BUILDERS}
    failures = []

    def run(kind, *diagram):
        lim = finite_limits_colimits(kind, *diagram)
        res = verify_universal(lim, universe)
        counts[kind] += 1
        cones[kind] += res.cones
        if not res.ok and len(failures) < 5:
            failures.append({"kind": kind, "diagram": [str(d) for d in diagram],
                             "failure": res.failures[0]})
        return res.ok

    ok = True
    for A, B in itertools.product(universe, repeat=2):
        ok &= run("product", A, B)
        ok &= run("coproduct", A, B)
        for f, g in itertools.combinations_with_replacement(homs[(A, B)], 2):
            ok &= run("equalizer", f, g)
    for C in universe:
        into = [f for A in universe for f in homs[(A, C)]]
        for f, g in itertools.combinations_with_replacement(into, 2):
            ok &= run("pullback", f, g)
    return {
        "universe": {"atoms": list(alg.atoms), "max_stalk": max_stalk, "objects": len(universe)},
        "diagrams_checked": dict(sorted(counts.items())),
        "cones_checked": dict(sorted(cones.items())),
        "failures": failures,
        "passed": bool(ok),
    }
