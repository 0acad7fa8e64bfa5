"""Conditional sets and their correspondence with surjective sheaves.

A conditional set on ``A_a`` is a family of finite sets ``X_c`` (``c <= a``)
with surjections ``gamma_c : X_a -> X_c``, subject to

(i)   X_0 is a singleton,
(ii)  gamma_a is the identity,
(iii) consistency: ``gamma_b(x) == gamma_b(y)`` and ``c <= b`` imply
      ``gamma_c(x) == gamma_c(y)``,
(iv)  stability: every family over a partition of ``a`` has exactly one
      element of ``X_a`` restricting to it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

from .boolean_algebra import Algebra, Elem, bits, partition_masks, submasks
from .errors import AlgebraMismatch, AxiomError, StructureError, ValidationError, Violation
from .sheaf import ExtensionalSheaf, Sheaf, StalkSheaf, check_sheaf, is_subsheaf, sheaf_equal, sort_labels


class NotSurjective(ValidationError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"restriction map not surjective: {witness}")


def check_condset(algebra: Algebra, components: Mapping, gammas: Mapping):
    """Return ``(structural_problems, violations)`` for conditional-set data.

    ``gammas[c]`` maps each element of ``X_top`` to an element of ``X_c``.
    ``gammas[top]`` may be omitted (then it is the identity).
    """
    fmt = algebra.fmt
    top = algebra.top
    problems: list[str] = []
    violations: list[Violation] = []
    comps = {}
    for c in algebra.masks:
        if c not in components:
            problems.append(f"missing component X_{fmt(c)}")
            continue
        elems = list(components[c])
        if len(set(elems)) != len(elems):
            problems.append(f"duplicate elements in X_{fmt(c)}")
        comps[c] = tuple(elems)
    for c in sorted(set(components) - set(algebra.masks)):
        problems.append(f"component X_{fmt(c)} lies outside the algebra below {fmt(top)}")
    if top not in comps:
        return problems, violations
    X1 = comps[top]
    gam = {}
    for c in algebra.masks:
        if c not in gammas:
            if c == top:
                gam[c] = {x: x for x in X1}
                continue
            problems.append(f"missing gamma_{fmt(c)}")
            continue
        g = dict(gammas[c])
        for x in X1:
            if x not in g:
                problems.append(f"gamma_{fmt(c)} undefined at {x!r}")
            elif c in comps and g[x] not in set(comps[c]):
                problems.append(f"gamma_{fmt(c)} sends {x!r} outside X_{fmt(c)}")
        gam[c] = g
    if problems:
        return problems, violations

    if len(comps[0]) != 1:
        violations.append(Violation(
            "i-singleton", f"X_0 has {len(comps[0])} elements, not exactly one",
            {"size": len(comps[0])},
        ))
    for x in X1:
        if gam[top][x] != x:
            violations.append(Violation(
                "ii-identity", f"gamma_{fmt(top)}({x!r}) = {gam[top][x]!r}, not {x!r}",
                {"x": x},
            ))
    for c in algebra.masks:
        image = set(gam[c].values())
        missing = [y for y in comps[c] if y not in image]
        if missing:
            violations.append(Violation(
                "surjectivity", f"gamma_{fmt(c)} misses {missing!r}",
                {"c": fmt(c), "missing": missing},
            ))
    for b in algebra.masks:
        groups: dict = {}
        for x in X1:
            groups.setdefault(gam[b][x], []).append(x)
        for a in submasks(b):
            if a == b:
                continue
            for members in groups.values():
                x = members[0]
                for y in members[1:]:
                    if gam[a][x] != gam[a][y]:
                        violations.append(Violation(
                            "iii-consistency",
                            f"gamma_{fmt(b)} identifies {x!r} and {y!r} but gamma_{fmt(a)} does not",
                            {"a": fmt(a), "b": fmt(b), "x": x, "y": y},
                        ))
    for parts in partition_masks(top):
        if not parts:
            continue
        groups = {}
        for x in X1:
            groups.setdefault(tuple(gam[p][x] for p in parts), []).append(x)
        plist = [fmt(p) for p in parts]
        for fam in itertools.product(*(comps[p] for p in parts)):
            hits = groups.get(fam, [])
            if len(hits) == 1:
                continue
            kind = "existence" if not hits else "uniqueness"
            violations.append(Violation(
                f"iv-stability-{kind}",
                f"family {list(fam)!r} on partition {{{', '.join(plist)}}} has "
                f"{len(hits)} elements of X_{fmt(top)} restricting to it",
                {"partition": plist, "family": list(fam), "elements": hits},
            ))
    return problems, violations


class CondSet:
    """A validated conditional set; construct with :func:`validate_condset`."""

    def __init__(self, algebra: Algebra, components: Mapping, gammas: Mapping):
        self.algebra = algebra
        self.components = {c: tuple(components[c]) for c in algebra.masks}
        X1 = self.components[algebra.top]
        self.gammas = {c: dict(gammas[c]) if c in gammas else {x: x for x in X1}
                       for c in algebra.masks}

    @property
    def lives_on(self) -> Elem:
        return self.algebra.one

    @property
    def X1(self) -> tuple:
        return self.components[self.algebra.top]

    def __repr__(self):
        sizes = {self.algebra.fmt(c): len(v) for c, v in self.components.items()}
        return f"CondSet(on {self.algebra.fmt(self.algebra.top)}, {sizes})"

    def __eq__(self, other):
        if not isinstance(other, CondSet):
            return NotImplemented
        if self.algebra != other.algebra:
            return False
        for c in self.algebra.masks:
            if c == 0:
                continue
            if set(self.components[c]) != set(other.components[c]):
                return False
            if self.gammas[c] != other.gammas[c]:
                return False
        return True

    @cached_property
    def _induced(self):
        return {}

    def induced(self, b, a) -> dict:
        """The map ``gamma^b_a : X_b -> X_a`` with ``gamma^b_a . gamma_b = gamma_a``."""
        b = b.mask if isinstance(b, Elem) else b
        a = a.mask if isinstance(a, Elem) else a
        key = (b, a)
        m = self._induced.get(key)
        if m is None:
            m = {}
            for x in self.X1:
                m[self.gammas[b][x]] = self.gammas[a][x]
            self._induced[key] = m
        return m

    def lift(self, parts: Mapping[int, object]):
        """The unique ``x`` in X_top with ``gamma_p(x) = parts[p]`` (stability)."""
        for x in self.X1:
            if all(self.gammas[p][x] == v for p, v in parts.items()):
                return x
        raise ValidationError("no element of X_top restricts to the given family")

    def amalgamate(self, base, family: Mapping, filler=None):
        """Glue ``family`` (part mask -> element) over a partition of ``base``.

        Completes the partition with ``base``'s complement carrying ``filler``
        (default: least element of that component), lifts to X_top by
        stability and restricts back to ``base``.
        """
        base = base.mask if isinstance(base, Elem) else base
        rest = self.algebra.top & ~base
        fam = {(k.mask if isinstance(k, Elem) else k): v for k, v in family.items() if
               (k.mask if isinstance(k, Elem) else k)}
        if rest:
            fam[rest] = filler if filler is not None else sort_labels(self.components[rest])[0]
        x = self.lift(fam)
        return self.gammas[base][x]


class CondSetSheaf(ExtensionalSheaf):
    """The sheaf of a conditional set; gluing goes through the conditional set."""

    def __init__(self, condset: CondSet):
        alg = condset.algebra
        maps = {}
        for a, b in alg.arrows():
            maps[(b, a)] = condset.induced(b, a)
        super().__init__(alg, condset.components, maps)
        self.condset = condset

    def glue(self, c, germs):
        c = c.mask if isinstance(c, Elem) else c
        if c == 0:
            return self.components[0][0]
        return self.condset.amalgamate(c, {1 << i: germs[i] for i in bits(c)})


def validate_condset(algebra: Algebra, components: Mapping, gammas: Mapping) -> CondSet:
    problems, violations = check_condset(algebra, components, gammas)
    if problems:
        raise StructureError("; ".join(problems))
    if violations:
        raise AxiomError(violations)
    return CondSet(algebra, components, gammas)


def conditional_empty_set(algebra: Algebra) -> CondSet:
    """The unique conditional set on ``A_0``."""
    rel = algebra.ambient.relative(0)
    return CondSet(rel, {0: ("*",)}, {0: {"*": "*"}})


def to_sheaf(C: CondSet, check: bool = True) -> CondSetSheaf:
    """The surjective sheaf with the induced restriction maps ``gamma^b_a``."""
    X = CondSetSheaf(C)
    if check:
        problems, violations = check_sheaf(X.algebra, X.components, X.maps)
        if problems:
            raise StructureError("; ".join(problems))
        if violations:
            raise AxiomError(violations)
    return X


def from_sheaf(X: Sheaf) -> CondSet:
    """``(X_a, gamma^top_a)`` for a surjective sheaf ``X``."""
    witness = X.surjectivity_witness()
    if witness is not None:
        a, b, y = witness
        fmt = X.algebra.fmt
        raise NotSurjective({"to": fmt(a), "from": fmt(b), "missed": y})
    alg = X.algebra
    top = alg.top
    comps = {c: X.component(c) for c in alg.masks}
    gammas = {c: {x: X.restrict(x, top, c) for x in comps[top]} for c in alg.masks}
    return validate_condset(alg, comps, gammas)


def _same_ambient(*sets: CondSet):
    atoms = sets[0].algebra.atoms
    for s in sets[1:]:
        if s.algebra.atoms != atoms:
            raise AlgebraMismatch("conditional sets live in different ambient algebras")


def conditional_inclusion(X: CondSet, Y: CondSet) -> bool:
    """``X`` is conditionally included in ``Y``: supports ordered and X a subsheaf of Y|_a."""
    _same_ambient(X, Y)
    a, b = X.algebra.top, Y.algebra.top
    if a & ~b:
        return False
    return is_subsheaf(to_sheaf(X, check=False), to_sheaf(Y, check=False).restricted(a))


def conditional_product(family) -> CondSet:
    """Pointwise product on the infimum of the supports."""
    family = list(family)
    if not family:
        raise ValidationError("conditional product of an empty family")
    _same_ambient(*family)
    m = family[0].algebra.ambient.full
    for X in family:
        m &= X.algebra.top
    alg = family[0].algebra.ambient.relative(m)
    comps = {c: tuple(itertools.product(*(X.components[c] for X in family))) for c in alg.masks}
    induced = {c: [X.induced(m, c) for X in family] for c in alg.masks}
    gammas = {
        c: {x: tuple(f[xi] for f, xi in zip(induced[c], x)) for x in comps[m]}
        for c in alg.masks
    }
    return CondSet(alg, comps, gammas)


@dataclass
class CondFunction:
    source: CondSet
    target: CondSet
    graph: dict
    domain: int

    def f(self, c) -> dict:
        c = c.mask if isinstance(c, Elem) else c
        return dict(self.graph[c])


def identity_graph(X: CondSet) -> dict:
    return {c: {(x, x) for x in X.components[c]} for c in X.algebra.masks}


def check_cond_function(G: Mapping, X: CondSet, Y: CondSet, d) -> tuple[list[str], list[Violation]]:
    _same_ambient(X, Y)
    fmt = X.algebra.fmt
    d = d.mask if isinstance(d, Elem) else d
    problems: list[str] = []
    violations: list[Violation] = []
    if d & ~(X.algebra.top & Y.algebra.top):
        problems.append(f"domain {fmt(d)} is not below the meet of the supports")
        return problems, violations
    for c in submasks(d):
        if c not in G:
            problems.append(f"graph has no component at {fmt(c)}")
    if problems:
        return problems, violations
    for c in submasks(d):
        Xc, Yc = set(X.components[c]), set(Y.components[c])
        seen: dict = {}
        for pair in sorted(G[c], key=repr):
            x, y = pair
            if x not in Xc or y not in Yc:
                violations.append(Violation(
                    "graph-in-product", f"pair {pair!r} at {fmt(c)} is not in X_c x Y_c",
                    {"c": fmt(c), "pair": pair},
                ))
                continue
            if x in seen and seen[x] != y:
                violations.append(Violation(
                    "functionality",
                    f"at {fmt(c)}, {x!r} is paired with both {seen[x]!r} and {y!r}",
                    {"c": fmt(c), "x": x, "y": [seen[x], y]},
                ))
            seen.setdefault(x, y)
        missing = [x for x in X.components[c] if x not in seen]
        if missing:
            violations.append(Violation(
                "totality", f"at {fmt(c)}, no image for {missing!r}",
                {"c": fmt(c), "missing": missing},
            ))
    if violations:
        return problems, violations
    # the graph must be closed under restriction to be a conditional subset
    for b in submasks(d):
        for a in submasks(b):
            if a == b:
                continue
            rx, ry = X.induced(X.algebra.top, a), Y.induced(Y.algebra.top, a)
            bx, by = X.induced(X.algebra.top, b), Y.induced(Y.algebra.top, b)
            down_x = {bx[u]: rx[u] for u in X.X1}
            down_y = {by[u]: ry[u] for u in Y.X1}
            for x, y in G[b]:
                pair = (down_x[x], down_y[y])
                if pair not in G[a]:
                    violations.append(Violation(
                        "restriction-closed",
                        f"{(x, y)!r} at {fmt(b)} restricts to {pair!r}, missing at {fmt(a)}",
                        {"a": fmt(a), "b": fmt(b), "pair": (x, y)},
                    ))
    return problems, violations


def validate_cond_function(G: Mapping, X: CondSet, Y: CondSet, d) -> CondFunction:
    problems, violations = check_cond_function(G, X, Y, d)
    if problems:
        raise StructureError("; ".join(problems))
    if violations:
        raise AxiomError(violations)
    d = d.mask if isinstance(d, Elem) else d
    graph = {c: {x: y for x, y in G[c]} for c in submasks(d)}
    return CondFunction(X, Y, graph, d)


def stalk_models(n_atoms: int, max_stalk: int):
    """Every stalk-form sheaf on ``n_atoms`` atoms with stalk sizes ``1..max_stalk``."""
    names = ["pqrstuvw"[i] if n_atoms <= 8 else f"p{i}" for i in range(n_atoms)]
    alg = Algebra(tuple(names))
    for sizes in itertools.product(range(1, max_stalk + 1), repeat=n_atoms):
        yield StalkSheaf(alg, {i: [f"{names[i]}{j + 1}" for j in range(k)] for i, k in enumerate(sizes)})


def roundtrip_report(n_atoms: int, max_stalk: int) -> dict:
    """Check the sheaf/conditional-set correspondence on every model up to the bounds.

    For each stalk-form ``X`` (all atom counts up to ``n_atoms``):
    ``from_sheaf(X)`` passes the axioms, ``to_sheaf`` of it is a surjective
    sheaf equal to ``X``, and ``from_sheaf`` of that gives back the same
    conditional set.
    """
    models = 0
    failures = []
    for n in range(n_atoms + 1):
        for X in stalk_models(n, max_stalk):
            models += 1
            try:
                C = from_sheaf(X)
                S = to_sheaf(C)
                problems = []
                if not S.is_surjective():
                    problems.append("to_sheaf output is not surjective")
                if not sheaf_equal(S, X):
                    problems.append("to_sheaf(from_sheaf(X)) differs from X")
                if from_sheaf(S) != C:
                    problems.append("from_sheaf(to_sheaf(C)) differs from C")
            except ValidationError as exc:
                problems = [f"{type(exc).__name__}: {exc}"]
            if problems and len(failures) < 5:
                failures.append({"model": repr(X), "problems": problems})
    return {
        "bounds": {"atoms": n_atoms, "max_stalk": max_stalk},
        "models_checked": models,
        "failures": failures,
        "passed": not failures,
    }
