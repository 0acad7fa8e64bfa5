"""Independent reference computations for the tests.

Nothing here uses bitmasks or the package's own enumeration helpers: elements
are frozensets of atom names, arrows are plain dicts, and searches are brute
force.  Values checked against these oracles are then frozen in the tests.
"""

from __future__ import annotations

import itertools
from math import comb


def powerset(atoms) -> list[frozenset]:
    atoms = list(atoms)
    return [frozenset(c) for r in range(len(atoms) + 1) for c in itertools.combinations(atoms, r)]


def bell(n: int) -> int:
    b = [1]
    for k in range(n):
        b.append(sum(comb(k, j) * b[j] for j in range(k + 1)))
    return b[n]


def partitions_brute(base: frozenset) -> set[frozenset]:
    """All families of non-empty pairwise disjoint subsets of ``base`` joining to it."""
    cands = [s for s in powerset(base) if s]
    out = set()
    for r in range(len(cands) + 1):
        for fam in itertools.combinations(cands, r):
            if any(x & y for x, y in itertools.combinations(fam, 2)):
                continue
            if frozenset().union(*fam) == base:
                out.add(frozenset(fam))
    return out


def disjointify_by_hand(order: list[frozenset]) -> set[frozenset]:
    """b_i = a_i minus the union of earlier b_j, zero parts dropped."""
    seen = frozenset()
    parts = set()
    for a in order:
        b = a - seen
        seen |= b
        if b:
            parts.add(b)
    return parts


# -- sheaves as raw extensional data ------------------------------------------------


def stalk_encoding(stalks: dict[str, list[str]], atoms: list[str]):
    """Extensional data of the stalk-form sheaf: components keyed by frozenset.

    Elements of a component are strings like ``"x1.y1"`` so the encoding shares
    nothing with the package's tuple representation.
    """
    comps = {}
    for c in powerset(atoms):
        names = [a for a in atoms if a in c]
        comps[c] = [".".join(t) if t else "pt" for t in itertools.product(*(stalks[a] for a in names))]
    maps = {}
    for b in powerset(atoms):
        names_b = [a for a in atoms if a in b]
        for a in powerset(b):
            keep = [k for k, n in enumerate(names_b) if n in a]
            m = {}
            for x in comps[b]:
                parts = x.split(".") if names_b else []
                sub = [parts[k] for k in keep]
                m[x] = ".".join(sub) if sub else "pt"
            maps[(b, a)] = m
    return comps, maps


def is_sheaf_brute(atoms, comps, maps) -> bool:
    """Functor to Set on the order, with unique gluing along every partition."""
    els = powerset(atoms)
    if len(comps[frozenset()]) != 1:
        return False
    for c in els:
        if any(maps[(c, c)][x] != x for x in comps[c]):
            return False
        for b in powerset(c):
            for a in powerset(b):
                for x in comps[c]:
                    if maps[(b, a)][maps[(c, b)][x]] != maps[(c, a)][x]:
                        return False
    for c in els:
        for fam in partitions_brute(c):
            fam = sorted(fam, key=sorted)
            seen = {}
            for x in comps[c]:
                key = tuple(maps[(c, p)][x] for p in fam)
                seen[key] = seen.get(key, 0) + 1
            total = 1
            for p in fam:
                total *= len(comps[p])
            if len(seen) != total or any(v != 1 for v in seen.values()):
                return False
    return True


def isomorphic_brute(atoms, comps1, maps1, comps2, maps2) -> bool:
    """Search for componentwise bijections commuting with every restriction."""
    els = sorted(powerset(atoms), key=len)
    if any(len(comps1[c]) != len(comps2[c]) for c in els):
        return False

    def extend(k, iso):
        if k == len(els):
            return True
        c = els[k]
        for perm in itertools.permutations(comps2[c]):
            f = dict(zip(comps1[c], perm))
            ok = True
            for a in els[:k]:
                if a < c:
                    if any(iso[a][maps1[(c, a)][x]] != maps2[(c, a)][f[x]] for x in comps1[c]):
                        ok = False
                        break
            if ok:
                iso[c] = f
                if extend(k + 1, iso):
                    return True
                del iso[c]
        return False

    return extend(0, {})


# -- arrows of F as dicts ----------------------------------------------------------


def hom_brute(src_support, src_stalks, tgt_support, tgt_stalks):
    """Arrows as ``{atom: {x: y}}`` for atoms in the source support."""
    if not src_support <= tgt_support:
        return []
    atoms = sorted(src_support)
    per_atom = []
    for a in atoms:
        xs = src_stalks[a]
        per_atom.append([dict(zip(xs, ys)) for ys in itertools.product(tgt_stalks[a], repeat=len(xs))])
    return [dict(zip(atoms, choice)) for choice in itertools.product(*per_atom)]


def compose_brute(g: dict, f: dict) -> dict:
    return {a: {x: g[a][y] for x, y in fa.items()} for a, fa in f.items()}


def freeze(arrow: dict):
    return tuple(sorted((a, tuple(sorted(m.items()))) for a, m in arrow.items()))


def monic_brute(m: dict, src_support, src_stalks, universe) -> bool:
    """No two distinct arrows from a universe object into the source are merged by ``m``."""
    for W_support, W_stalks in universe:
        seen = set()
        for u in hom_brute(W_support, W_stalks, src_support, src_stalks):
            k = freeze(compose_brute(m, u))
            if k in seen:
                return False
            seen.add(k)
    return True


def brute_universe(atoms, max_stalk):
    """Objects as ``(support frozenset, stalks dict)``; support 0 appears once."""
    out = [(frozenset(), {a: ["*"] for a in atoms})]
    for sizes in itertools.product(range(1, max_stalk + 1), repeat=len(atoms)):
        stalks = {a: [f"{a}{j + 1}" for j in range(k)] for a, k in zip(atoms, sizes)}
        for s in powerset(atoms):
            if s:
                out.append((s, stalks))
    return out


def subobjects_via_monics(support, stalks, universe):
    """Images ``(support, {atom: frozenset})`` of every monic into the object."""
    found = set()
    for W_support, W_stalks in universe:
        for u in hom_brute(W_support, W_stalks, support, stalks):
            if all(len(set(fa.values())) == len(fa) for fa in u.values()):
                found.add((W_support, frozenset((a, frozenset(fa.values())) for a, fa in u.items())))
    return found


def sub_elements(support, stalks):
    """All (b, S) with b <= support and non-empty stalk subsets at the atoms of b."""
    out = []
    for b in powerset(support):
        names = sorted(b)
        choices = [[frozenset(c) for r in range(1, len(stalks[a]) + 1)
                    for c in itertools.combinations(stalks[a], r)] for a in names]
        for pick in itertools.product(*choices):
            out.append((b, frozenset(zip(names, pick))))
    return out


def sub_leq(s, t) -> bool:
    (b, S), (c, T) = s, t
    if not b <= c:
        return False
    T = dict(T)
    return all(v <= T[a] for a, v in S)


def lub_brute(elements, family):
    ups = [u for u in elements if all(sub_leq(s, u) for s in family)]
    least = [u for u in ups if all(sub_leq(u, v) for v in ups)]
    return least[0] if len(least) == 1 else None


def glb_brute(elements, family):
    downs = [d for d in elements if all(sub_leq(d, s) for s in family)]
    great = [d for d in downs if all(sub_leq(v, d) for v in downs)]
    return great[0] if len(great) == 1 else None
