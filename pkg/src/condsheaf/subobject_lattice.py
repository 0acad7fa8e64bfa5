"""Sub(a, X): the subobjects of an object of F and their Boolean structure.

Joins and meets are computed the way the completeness argument builds them
(amalgamated part-wise picks for joins, pointwise intersections with a shrunk
support for meets) and are checked against brute-force bounds found by
scanning the enumerated poset.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .boolean_algebra import bits, popcount, submasks
from .boolean_algebra import make_algebra
from .category_f import FObject, Subobject, bounded_universe, default_atom_names
from .errors import SizeGuardError, ValidationError
from .sheaf import max_tuples


def _nonempty_subsets(labels: Sequence) -> list[tuple]:
    out = []
    for r in range(1, len(labels) + 1):
        out.extend(itertools.combinations(labels, r))
    return out


def lattice_size(obj: FObject) -> int:
    """``prod over atoms p <= a of 2^{|X_p|}``."""
    n = 1
    for i in obj.atoms:
        n *= 2 ** len(obj.stalk(i))
    return n


class SubLattice:
    """All subobjects of ``ambient`` with the order, joins, meets and complements."""

    def __init__(self, ambient: FObject, limit: int | None = None):
        self.ambient = ambient
        size = lattice_size(ambient)
        cap = max_tuples() if limit is None else limit
        if size > cap:
            raise SizeGuardError(f"Sub has {size} elements, above the cap {cap}")
        options = []
        for i in ambient.atoms:
            options.append([None] + _nonempty_subsets(ambient.stalk(i)))
        elems = []
        for choice in itertools.product(*options):
            support = 0
            stalks = []
            for i, sub in zip(ambient.atoms, choice):
                if sub is not None:
                    support |= 1 << i
                    stalks.append((i, sub))
            elems.append(Subobject(ambient, support, tuple(stalks)))
        elems.sort(key=lambda s: (popcount(s.support), s.support, s.stalks))
        self.elements: list[Subobject] = elems
        self.index = {s: k for k, s in enumerate(elems)}

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def bottom(self) -> Subobject:
        return self.elements[0]

    @cached_property
    def top(self) -> Subobject:
        amb = self.ambient
        return Subobject(amb, amb.support.mask, tuple((i, amb.stalk(i)) for i in amb.atoms))

    @cached_property
    def up(self) -> list[int]:
        """``up[k]``: bitset of the indices of elements above element ``k``."""
        n = len(self.elements)
        out = []
        for s in self.elements:
            bs = 0
            for k in range(n):
                if s.leq(self.elements[k]):
                    bs |= 1 << k
            out.append(bs)
        return out

    @cached_property
    def down(self) -> list[int]:
        n = len(self.elements)
        out = [0] * n
        for k, bs in enumerate(self.up):
            for j in bits(bs):
                out[j] |= 1 << k
        return out

    def leq(self, s: Subobject, t: Subobject) -> bool:
        return s.leq(t)

    # -- components ---------------------------------------------------------

    @cached_property
    def _components(self) -> dict:
        return {}

    def component(self, s: Subobject, c: int) -> frozenset:
        key = (s, c)
        out = self._components.get(key)
        if out is None:
            out = s.component(c)
            self._components[key] = out
        return out

    def _from_components(self, support: int, comps: dict) -> Subobject:
        X = self.ambient.carrier
        stalks = []
        for i in bits(support):
            atom = 1 << i
            labels = {X.germ(z, atom, i) for z in comps[atom]}
            stalks.append((i, tuple(x for x in X.stalk(i) if x in labels)))
        return Subobject(self.ambient, support, tuple(stalks))

    # -- join: amalgamations of part-wise picks ------------------------------

    def join_components(self, family: Sequence[Subobject], atoms_only: bool = False) -> tuple[int, dict]:
        """Support ``a_* = join of supports`` and the components ``Z_c`` for ``c <= a_*``.

        ``Z_c`` collects every amalgamation over a partition ``(b_i)`` of ``c``
        with ``b_i <= a_i``, picking ``y_i`` from the ``i``-th member at ``b_i``.
        With ``atoms_only`` only the components at atoms are built, which is
        all :meth:`join` needs.
        """
        family = list(family)
        X = self.ambient.carrier
        a_star = 0
        for s in family:
            a_star |= s.support
        comps = {}
        targets = [1 << i for i in bits(a_star)] if atoms_only else submasks(a_star)
        for c in targets:
            if c == 0:
                comps[0] = frozenset([X.point()])
                continue
            eligible = [[k for k, s in enumerate(family) if (s.support >> i) & 1] for i in bits(c)]
            out = set()
            for assign in itertools.product(*eligible):
                parts: dict[int, int] = {}
                for i, k in zip(bits(c), assign):
                    parts[k] = parts.get(k, 0) | (1 << i)
                owners = list(parts.items())
                picks = [sorted(self.component(family[k], b), key=repr) for k, b in owners]
                pmasks = [b for _, b in owners]
                for ys in itertools.product(*picks):
                    out.add(X.amalgamate((c, pmasks), dict(zip(pmasks, ys))))
            comps[c] = frozenset(out)
        return a_star, comps

    @cached_property
    def _joins(self) -> dict:
        return {}

    def join(self, family: Iterable[Subobject]) -> Subobject:
        family = list(family)
        if not family:
            raise ValidationError("join of an empty family; use the least element")
        key = frozenset(family)
        out = self._joins.get(key)
        if out is None:
            a_star, comps = self.join_components(family, atoms_only=True)
            out = self._joins[key] = self._from_components(a_star, comps)
        return out

    def join_extension(self, family: Sequence[Subobject]) -> dict:
        """Components of the join padded by the ambient data outside ``a_*``.

        For every ``c`` the component is all amalgamations of an element of the
        join at ``c & a_*`` with an element of the ambient at ``c & ~a_*``.
        """
        X = self.ambient.carrier
        a_star, comps = self.join_components(list(family))
        outside_top = X.algebra.top & ~a_star
        out = {}
        for c in X.algebra.masks:
            inside, outside = c & a_star, c & outside_top
            parts = [p for p in (inside, outside) if p]
            vals = set()
            for x in comps[inside]:
                for y in X.component(outside):
                    fam = {}
                    if inside:
                        fam[inside] = x
                    if outside:
                        fam[outside] = y
                    vals.add(X.amalgamate((c, parts), fam))
            out[c] = frozenset(vals)
        return out

    # -- meet: pointwise intersection, support shrunk -----------------------

    def meet_components(self, family: Sequence[Subobject]) -> tuple[int, dict]:
        family = list(family)
        m = self.ambient.algebra.full
        for s in family:
            m &= s.support
        comps = {}
        a_star = 0
        for c in submasks(m):
            z = self.component(family[0], c)
            for s in family[1:]:
                z = z & self.component(s, c)
            comps[c] = z
            if z:
                a_star |= c
        return a_star, comps

    def meet(self, family: Iterable[Subobject]) -> Subobject:
        family = list(family)
        if not family:
            raise ValidationError("meet of an empty family; use the greatest element")
        a_star, comps = self.meet_components(family)
        return self._from_components(a_star, comps)

    # -- complement ---------------------------------------------------------

    def complement(self, s: Subobject) -> Subobject:
        """Join of every subobject whose meet with ``s`` is the least element."""
        bottom = self.bottom
        disjoint = [t for t in self.elements if self.meet([t, s]) == bottom]
        return self.join(disjoint)

    def direct_complement(self, s: Subobject) -> Subobject:
        """Per atom: drop it if ``s`` uses the whole stalk, else take the rest of the stalk."""
        st = s.stalk_sets
        support = 0
        stalks = []
        for i in self.ambient.atoms:
            full = self.ambient.stalk(i)
            rest = tuple(x for x in full if x not in st.get(i, ()))
            if rest:
                support |= 1 << i
                stalks.append((i, rest))
        return Subobject(self.ambient, support, tuple(stalks))

    # -- brute force bounds -------------------------------------------------

    def brute_join(self, family: Iterable[Subobject]) -> Subobject | None:
        n = len(self.elements)
        upper = (1 << n) - 1
        for s in family:
            upper &= self.up[self.index[s]]
        for k in bits(upper):
            if upper & ~self.up[k] == 0:
                return self.elements[k]
        return None

    def brute_meet(self, family: Iterable[Subobject]) -> Subobject | None:
        n = len(self.elements)
        lower = (1 << n) - 1
        for s in family:
            lower &= self.down[self.index[s]]
        for k in bits(lower):
            if lower & ~self.down[k] == 0:
                return self.elements[k]
        return None

    # -- structure ----------------------------------------------------------

    def lattice_atoms(self) -> list[Subobject]:
        """Elements covering the least element."""
        bottom = self.bottom
        out = []
        for k, s in enumerate(self.elements):
            if s == bottom:
                continue
            below = self.down[k] & ~(1 << k)
            if below == 1 << self.index[bottom]:
                out.append(s)
        return out

    def covers(self) -> list[tuple[int, int]]:
        """Hasse edges ``(lower, upper)`` by element index."""
        edges = []
        for k in range(len(self.elements)):
            strictly_above = self.up[k] & ~(1 << k)
            for j in bits(strictly_above):
                between = strictly_above & self.down[j] & ~(1 << j)
                if between == 0:
                    edges.append((k, j))
        return edges

    def to_dot(self) -> str:
        lines = ["digraph Sub {", "  rankdir=BT;"]
        for k, s in enumerate(self.elements):
            label = s.label().replace('"', '\\"')
            lines.append(f'  n{k} [label="{label}"];')
        for lo, hi in self.covers():
            lines.append(f"  n{lo} -> n{hi};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    # -- the distributivity suprema -----------------------------------------

    def step2_suprema(self, s1: Subobject, s2: Subobject, s3: Subobject) -> tuple[int, int, int]:
        """The three suprema ``c*_1, c*_2, c*_3`` of the distributivity step.

        ``c*_3`` uses ``Z_c``: amalgamations ``b1 x + b2 y`` over partitions
        ``(b1, b2)`` of ``c`` with ``b1 <= a2``, ``b2 <= a3``.
        """
        a1, a2, a3 = s1.support, s2.support, s3.support
        c1 = 0
        for c in submasks(a1 & a2):
            if self.component(s1, c) & self.component(s2, c):
                c1 |= c
        c2 = 0
        for c in submasks(a1 & a3):
            if self.component(s1, c) & self.component(s3, c):
                c2 |= c
        c3 = 0
        for c in submasks(a1 & (a2 | a3)):
            if self.component(s1, c) & self._step2_z(s2, s3, c):
                c3 |= c
        return c1, c2, c3

    @cached_property
    def _z_cache(self) -> dict:
        return {}

    def _step2_z(self, s2: Subobject, s3: Subobject, c: int) -> frozenset:
        key = (s2, s3, c)
        out = self._z_cache.get(key)
        if out is not None:
            return out
        X = self.ambient.carrier
        vals = set()
        for b1 in submasks(c & s2.support):
            b2 = c & ~b1
            if b2 & ~s3.support:
                continue
            parts = [p for p in (b1, b2) if p]
            for x in self.component(s2, b1):
                for y in self.component(s3, b2):
                    fam = {}
                    if b1:
                        fam[b1] = x
                    if b2:
                        fam[b2] = y
                    vals.add(X.amalgamate((c, parts), fam) if c else X.point())
        out = frozenset(vals)
        self._z_cache[key] = out
        return out


def enumerate_sublattice(obj: FObject, limit: int | None = None) -> SubLattice:
    return SubLattice(obj, limit)


@dataclass
class Check:
    name: str
    passed: bool = True
    cases: int = 0
    counterexample: str | None = None

    def record(self, ok: bool, describe) -> None:
        self.cases += 1
        if not ok and self.passed:
            self.passed = False
            self.counterexample = describe() if callable(describe) else describe


@dataclass
class LatticeReport:
    ambient: str
    size: int
    expected_size: int
    atoms: list[str]
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "ambient": self.ambient,
            "size": self.size,
            "expected_size": self.expected_size,
            "atoms": self.atoms,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "cases": c.cases,
                 "counterexample": c.counterexample}
                for c in self.checks
            ],
        }


def verify_boolean_algebra(lat: SubLattice, subset_size: int = 3) -> LatticeReport:
    """Exhaustively check that ``lat`` is a complete Boolean algebra."""
    E = lat.elements
    n = len(E)
    idx = lat.index
    atoms = lat.lattice_atoms()
    report = LatticeReport(str(lat.ambient), n, lattice_size(lat.ambient), [a.label() for a in atoms])

    def chk(name):
        c = Check(name)
        report.checks.append(c)
        return c

    card = chk("cardinality")
    card.record(n == report.expected_size, lambda: f"{n} subobjects, expected {report.expected_size}")

    order = chk("partial-order")
    for i in range(n):
        order.record(bool(lat.up[i] >> i & 1), lambda: f"not reflexive at {E[i]}")
        for j in bits(lat.up[i]):
            if j != i:
                order.record(not (lat.up[j] >> i & 1), lambda: f"{E[i]} and {E[j]} mutually below")
            for k in bits(lat.up[j]):
                order.record(bool(lat.up[i] >> k & 1), lambda: f"transitivity fails at {E[i]}, {E[j]}, {E[k]}")

    bounds = chk("bounds")
    bounds.record(lat.bottom.support == 0, lambda: f"least element {lat.bottom}")
    bounds.record(lat.top.support == lat.ambient.support.mask
                  and all(set(s) == set(lat.ambient.stalk(i)) for i, s in lat.top.stalks),
                  lambda: f"greatest element {lat.top}")
    bounds.record(lat.down[idx[lat.top]] == (1 << n) - 1 and lat.up[0] == (1 << n) - 1,
                  "bounds are not extremal")

    # binary tables by construction, compared to brute force
    J = [[0] * n for _ in range(n)]
    M = [[0] * n for _ in range(n)]
    lub, glb, closed = chk("join-is-lub"), chk("meet-is-glb"), chk("closure")
    for i in range(n):
        for j in range(n):
            jn = lat.join([E[i], E[j]])
            mt = lat.meet([E[i], E[j]])
            closed.record(jn in idx and mt in idx, lambda: f"{E[i]}, {E[j]} leave the lattice")
            lub.record(jn == lat.brute_join([E[i], E[j]]), lambda: f"join of {E[i]}, {E[j]} is {jn}")
            glb.record(mt == lat.brute_meet([E[i], E[j]]), lambda: f"meet of {E[i]}, {E[j]} is {mt}")
            J[i][j] = idx.get(jn, -1)
            M[i][j] = idx.get(mt, -1)
    if not closed.passed:
        return report

    comm, idem, absorb = chk("commutativity"), chk("idempotence"), chk("absorption")
    for i in range(n):
        idem.record(J[i][i] == i and M[i][i] == i, lambda: f"at {E[i]}")
        for j in range(n):
            comm.record(J[i][j] == J[j][i] and M[i][j] == M[j][i], lambda: f"{E[i]}, {E[j]}")
            absorb.record(J[i][M[i][j]] == i and M[i][J[i][j]] == i, lambda: f"{E[i]}, {E[j]}")

    assoc, dist, step2 = chk("associativity"), chk("distributivity"), chk("step2-identity")
    for i in range(n):
        for j in range(n):
            for k in range(n):
                assoc.record(
                    J[J[i][j]][k] == J[i][J[j][k]] and M[M[i][j]][k] == M[i][M[j][k]],
                    lambda: f"{E[i]}, {E[j]}, {E[k]}",
                )
                dist.record(
                    J[M[i][j]][M[i][k]] == M[i][J[j][k]]
                    and M[J[i][j]][J[i][k]] == J[i][M[j][k]],
                    lambda: f"{E[i]}, {E[j]}, {E[k]}",
                )
                c1, c2, c3 = lat.step2_suprema(E[i], E[j], E[k])
                step2.record(c1 | c2 == c3, lambda: (
                    f"{E[i]}, {E[j]}, {E[k]}: c1|c2 = {lat.ambient.algebra.fmt(c1 | c2)}, "
                    f"c3 = {lat.ambient.algebra.fmt(c3)}"))

    compl = chk("complement")
    top, bot = idx[lat.top], 0
    C = []
    for i in range(n):
        c = lat.complement(E[i])
        d = lat.direct_complement(E[i])
        ci = idx[c]
        C.append(ci)
        compl.record(M[i][ci] == bot and J[i][ci] == top, lambda: f"{E[i]} has complement {c}")
        compl.record(c == d, lambda: f"complement of {E[i]}: join gives {c}, direct gives {d}")
    demorgan = chk("double-complement-de-morgan")
    for i in range(n):
        demorgan.record(C[C[i]] == i, lambda: f"double complement of {E[i]}")
        for j in range(n):
            demorgan.record(C[J[i][j]] == M[C[i]][C[j]] and C[M[i][j]] == J[C[i]][C[j]],
                            lambda: f"{E[i]}, {E[j]}")

    complete = chk("completeness")
    families = [()]
    for r in range(1, subset_size + 1):
        families.extend(itertools.combinations(range(n), r))
    families.append(tuple(range(n)))
    for fam in families:
        members = [E[k] for k in fam]
        bj, bm = lat.brute_join(members), lat.brute_meet(members)
        if not fam:
            complete.record(bj == lat.bottom and bm == lat.top, "empty family bounds")
            continue
        jn, mt = lat.join(members), lat.meet(members)
        complete.record(jn == bj and mt == bm, lambda: f"family {[str(s) for s in members]}")

    boolean = chk("atomic-powerset")
    boolean.record(n == 2 ** len(atoms), lambda: f"{n} elements but {len(atoms)} atoms")
    atom_idx = [idx[a] for a in atoms]
    for i in range(n):
        below = [a for a in atom_idx if lat.up[a] >> i & 1]
        acc = bot
        for a in below:
            acc = J[acc][a]
        boolean.record(acc == i, lambda: f"{E[i]} is not the join of the atoms below it")
    return report


def sublattice_report(n_atoms: int, max_stalk: int) -> dict:
    """Run :func:`verify_boolean_algebra` on every object of the bounded universes.

    Covers every atom count from 0 to ``n_atoms``.
    """
    objects = 0
    triples = 0
    sizes: dict[int, int] = {}
    failures = []
    step2_violations = 0
    for n in range(n_atoms + 1):
        alg = make_algebra(default_atom_names(n))
        for obj in bounded_universe(alg, max_stalk):
            objects += 1
            rep = verify_boolean_algebra(SubLattice(obj))
            sizes[rep.size] = sizes.get(rep.size, 0) + 1
            for c in rep.checks:
                if c.name == "step2-identity":
                    triples += c.cases
                    if not c.passed:
                        step2_violations += 1
            if not rep.passed and len(failures) < 5:
                bad = [c for c in rep.checks if not c.passed]
                failures.append({"object": str(obj), "check": bad[0].name,
                                 "counterexample": bad[0].counterexample})
    return {
        "bounds": {"atoms": n_atoms, "max_stalk": max_stalk},
        "objects_checked": objects,
        "lattice_sizes": {str(k): v for k, v in sorted(sizes.items())},
        "triples_checked": triples,
        "step2_failing_lattices": step2_violations,
        "failures": failures,
        "passed": not failures,
    }
