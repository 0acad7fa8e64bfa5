"""The truth-value sheaf, characteristic maps, and the classifier square in F.

``Omega`` has the relative algebra ``A_d`` as its component at ``d`` and
restricts by meeting; on this site closed sieves on ``d`` are exactly the
principal ones, so an element ``c <= d`` stands for the sieve ``A_c``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

from .boolean_algebra import Algebra, Elem, bits, popcount, submasks
from .category_f import (
    ArrowError,
    FArrow,
    FObject,
    Limit,
    Subobject,
    bounded_universe,
    compose,
    default_atom_names,
    extend_natural,
    hom_set,
    is_monic,
    pullback,
    separating_arrow,
    subobject_of_monic,
    terminal_object,
    verify_universal,
)
from .boolean_algebra import make_algebra
from .errors import ValidationError
from .sheaf import NatTrans, Sheaf, terminal_sheaf


class OmegaSheaf(Sheaf):
    def __init__(self, algebra: Algebra):
        self.algebra = algebra

    def __eq__(self, other):
        if not isinstance(other, OmegaSheaf):
            return NotImplemented
        return self.algebra == other.algebra

    def __hash__(self):
        return hash(("Omega", self.algebra))

    def __repr__(self):
        return f"Omega(on {self.algebra.fmt(self.algebra.top)})"

    def component(self, c):
        c = c.mask if isinstance(c, Elem) else c
        amb = self.algebra.ambient
        return tuple(Elem(amb, s) for s in submasks(c))

    def restrict(self, x, frm, to):
        to = to.mask if isinstance(to, Elem) else to
        return Elem(x.algebra, x.mask & to)

    def stalk(self, i):
        amb = self.algebra.ambient
        return (Elem(amb, 0), Elem(amb, 1 << i))

    def germ(self, x, c, i):
        return Elem(x.algebra, x.mask & (1 << i))

    def glue(self, c, germs):
        m = 0
        for g in germs.values():
            m |= g.mask
        return Elem(self.algebra.ambient, m)

    def restricted(self, a):
        return OmegaSheaf(self.algebra.relative(a))


def omega(algebra: Algebra) -> OmegaSheaf:
    return OmegaSheaf(algebra)


def true_transformation(algebra: Algebra) -> NatTrans:
    """``true : 1 -> Omega``, picking the top ``d`` of each component."""
    one = terminal_sheaf(algebra)
    amb = algebra.ambient
    return NatTrans(one, omega(algebra), {d: {one.component(d)[0]: Elem(amb, d)} for d in algebra.masks})


def omega_object(algebra: Algebra) -> FObject:
    return FObject(algebra.one, omega(algebra))


def true_arrow(algebra: Algebra) -> FArrow:
    return FArrow.from_nat(terminal_object(algebra), omega_object(algebra), true_transformation(algebra))


def characteristic_map(sub: Subobject) -> NatTrans:
    """``phi : Y|_a -> Omega|_a`` with ``phi_d(y)`` the largest ``c <= d`` where ``y`` lies in ``S``."""
    Y = sub.ambient.carrier
    a = sub.support
    rel = Y.algebra.relative(a)
    amb = Y.algebra
    comps = {}
    for d in rel.masks:
        comp = {}
        for y in Y.component(d):
            v = 0
            for c in submasks(d):
                if Y.restrict(y, d, c) in sub.component(c):
                    v |= c
            comp[y] = Elem(amb, v)
        comps[d] = comp
    return NatTrans(Y.restricted(a), omega(rel), comps)


def pullback_of_true(phi: NatTrans) -> dict[int, frozenset]:
    """Per component, the elements sent to the top truth value."""
    return {d: frozenset(y for y, v in comp.items() if v.mask == d)
            for d, comp in phi.components.items()}


def classifies(sub: Subobject, phi: NatTrans | None = None) -> bool:
    phi = characteristic_map(sub) if phi is None else phi
    pb = pullback_of_true(phi)
    return all(pb[c] == sub.component(c) for c in submasks(sub.support))


def top_default(Y: Sheaf) -> NatTrans:
    """``Y -> Omega`` sending everything to the top: Y classified as all of itself."""
    alg = Y.algebra
    return NatTrans.from_stalk_maps(Y, omega(alg), {i: {y: Elem(alg.ambient, 1 << i) for y in Y.stalk(i)}
                                                   for i in alg.atom_indices})


def bottom_default(Y: Sheaf) -> NatTrans:
    alg = Y.algebra
    return NatTrans.from_stalk_maps(Y, omega(alg), {i: {y: Elem(alg.ambient, 0) for y in Y.stalk(i)}
                                                   for i in alg.atom_indices})


@dataclass
class ClassifierSquare:
    """The square (a,X) -> (1,1) -> (1,Omega) over (a,X) >-> (b,Y) -> (1,Omega)."""

    monic: FArrow
    subobject: Subobject
    phi: NatTrans
    eta: FArrow
    to_terminal: FArrow
    true: FArrow
    commutes: bool
    canonical: Limit
    comparison: FArrow
    is_pullback: bool
    witness: dict[str, Any] = field(default_factory=dict)

    @property
    def a(self) -> Elem:
        return self.monic.source.support

    @property
    def b(self) -> Elem:
        return self.monic.target.support


def _bang(obj: FObject) -> FArrow:
    term = terminal_object(obj.algebra)
    return FArrow(obj, term, tuple((i, ("*",) * len(obj.stalk(i))) for i in obj.atoms))


def _is_iso(u: FArrow) -> bool:
    if u.source.support != u.target.support:
        return False
    for i, imgs in u.maps:
        if len(set(imgs)) != len(imgs) or set(imgs) != set(u.target.stalk(i)):
            return False
    return True


def classifier_square(m: FArrow, default: str | NatTrans = "top") -> ClassifierSquare:
    """Build the square for the monic ``m`` and decide whether it is a pullback.

    ``eta`` agrees with the characteristic map below ``a``; between ``a`` and
    ``b`` it follows ``default`` (``"top"``, ``"bottom"`` or an explicit
    transformation ``Y -> Omega``).
    """
    chk = is_monic(m)
    if not chk:
        raise ArrowError("classifier square needs a monic")
    alg = m.source.algebra
    sub = subobject_of_monic(m)
    Y = m.target.carrier
    phi = characteristic_map(sub)
    if isinstance(default, str):
        g = {"top": top_default, "bottom": bottom_default}[default](Y)
    else:
        g = default
    eta_nat = extend_natural(phi, Y, omega(alg), g)
    eta = FArrow.from_nat(m.target, omega_object(alg), eta_nat)
    bang = _bang(m.source)
    t = true_arrow(alg)
    commutes = compose(t, bang) == compose(eta, m)
    canon = pullback(eta, t)
    comparison = canon.mediate((m, bang))
    iso = _is_iso(comparison)
    witness: dict[str, Any] = {}
    if not iso:
        P = canon.apex
        witness = {
            "pullback_apex": str(P),
            "pullback_support": str(P.support),
            "square_support": str(m.source.support),
            "legs": [str(leg) for leg in canon.legs],
            "comparison": str(comparison),
            "arrows_back": len(hom_set(P, m.source)),
            "reason": (
                f"the pullback cone has support {P.support}, not below {m.source.support}, "
                "so no arrow from it factors through the square"
                if not P.support <= m.source.support else
                "the comparison arrow is not invertible"
            ),
        }
    return ClassifierSquare(m, sub, phi, eta, bang, t, commutes, canon, comparison, iso, witness)


def is_pullback_by_cones(sq: ClassifierSquare, universe) -> bool:
    """Cross-check: every cone over the cospan factors uniquely through the square."""
    lim = Limit("pullback", sq.monic.source, (sq.monic, sq.to_terminal), (sq.eta, sq.true))
    return verify_universal(lim, universe, check_mediate=False).ok


def default_variants(m: FArrow) -> list[NatTrans]:
    """Every transformation ``Y -> Omega`` that can matter between ``a`` and ``b``.

    Stalk maps are free at the atoms of ``b`` outside ``a`` and fixed to the
    top elsewhere.
    """
    Y = m.target.carrier
    alg = Y.algebra
    amb = alg.ambient
    a, b = m.source.support.mask, m.target.support.mask
    free = bits(b & ~a)
    fixed = {i: {y: Elem(amb, 1 << i) for y in Y.stalk(i)} for i in alg.atom_indices}
    options = []
    for i in free:
        st = Y.stalk(i)
        options.append([dict(zip(st, vals))
                        for vals in itertools.product((Elem(amb, 0), Elem(amb, 1 << i)), repeat=len(st))])
    out = []
    for choice in itertools.product(*options):
        maps = dict(fixed)
        maps.update(zip(free, choice))
        out.append(NatTrans.from_stalk_maps(Y, omega(alg), maps))
    return out


def universe_algebra(n_atoms: int) -> Algebra:
    return make_algebra(default_atom_names(n_atoms))


def monics_in(universe) -> list[FArrow]:
    out = []
    for A in universe:
        for B in universe:
            for m in hom_set(A, B):
                if is_monic(m):
                    out.append(m)
    return out


def _monic_size(m: FArrow):
    def obj(o):
        return (popcount(o.support.mask), o.support.mask,
                tuple(len(o.stalk(i)) for i in o.algebra.atom_indices))
    return (obj(m.target), obj(m.source), m.maps)


def no_classifier_report(n_atoms: int, max_stalk: int) -> dict:
    """Run the classifier square on every monic of a bounded universe."""
    alg = universe_algebra(n_atoms)
    universe = bounded_universe(alg, max_stalk)
    monics = sorted(monics_in(universe), key=_monic_size)
    exceptions = []
    variance = []
    pullback_counts = {}
    counterexample = None
    cx_rank = True
    strict = 0
    for m in monics:
        sq = classifier_square(m)
        equal = m.source.support == m.target.support
        if not equal:
            strict += 1
        if sq.is_pullback != equal or not sq.commutes:
            exceptions.append(_describe_square(sq))
        verdicts = []
        for g in default_variants(m):
            verdicts.append(classifier_square(m, g).is_pullback)
        n_pb = sum(verdicts)
        pullback_counts[n_pb] = pullback_counts.get(n_pb, 0) + 1
        if len(set(verdicts)) > 1:
            variance.append({"monic": str(m), "defaults": len(verdicts), "pullbacks": n_pb})
        if not equal and not sq.is_pullback:
            # prefer a non-initial source: (0, Z) >-> (b, Y) is a degenerate witness
            rank = m.source.support.mask == 0
            if counterexample is None or rank < cx_rank:
                counterexample, cx_rank = _describe_square(sq), rank
    pattern = not exceptions
    invariant = not variance
    return {
        "universe": {"atoms": list(alg.atoms), "max_stalk": max_stalk, "objects": len(universe)},
        "monics_checked": len(monics),
        "strict_monics": strict,
        "pattern_holds": pattern,
        "pattern_exceptions": exceptions[:5],
        "pattern_exception_count": len(exceptions),
        "invariant_under_defaults": invariant,
        "default_dependent_monics": len(variance),
        "default_dependence_examples": variance[:3],
        "pullback_extensions_per_monic": {str(k): v for k, v in sorted(pullback_counts.items())},
        "counterexample": counterexample,
        # invariance across defaults is reported, not folded into the verdict
        "passed": pattern and (counterexample is not None or strict == 0),
    }


def _describe_square(sq: ClassifierSquare) -> dict:
    return {
        "monic": str(sq.monic),
        "a": str(sq.a),
        "b": str(sq.b),
        "eta": str(sq.eta),
        "commutes": sq.commutes,
        "is_pullback": sq.is_pullback,
        "witness": sq.witness,
    }


def _is_subterminal(obj: FObject) -> bool:
    term = terminal_object(obj.algebra)
    arrows = hom_set(obj, term)
    return len(arrows) == 1 and bool(is_monic(arrows[0]))


def generator_report(n_atoms: int, max_stalk: int) -> dict:
    """Separate every distinct parallel pair of the universe by an arrow from a subterminal."""
    alg = universe_algebra(n_atoms)
    universe = bounded_universe(alg, max_stalk)
    pairs = failures = 0
    supports: dict[str, int] = {}
    first_failure = None
    for A in universe:
        for B in universe:
            arrows = hom_set(A, B)
            for f, g in itertools.combinations(arrows, 2):
                pairs += 1
                try:
                    u = separating_arrow(f, g)
                    ok = _is_subterminal(u.source) and compose(f, u) != compose(g, u)
                except (ArrowError, ValidationError) as exc:
                    ok, u = False, exc
                if ok:
                    key = str(u.source.support)
                    supports[key] = supports.get(key, 0) + 1
                else:
                    failures += 1
                    if first_failure is None:
                        first_failure = {"f": str(f), "g": str(g), "error": str(u)}
    return {
        "universe": {"atoms": list(alg.atoms), "max_stalk": max_stalk, "objects": len(universe)},
        "pairs_checked": pairs,
        "failures": failures,
        "separator_supports": dict(sorted(supports.items())),
        "first_failure": first_failure,
        "passed": failures == 0,
    }
