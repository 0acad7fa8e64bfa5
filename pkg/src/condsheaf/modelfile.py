"""Reading model files: JSON documents validated against ``model.schema.json``.

Element keys are atom names joined by ``|``; ``""`` and ``"0"`` denote the
bottom element and ``"1"`` the top.  Sheaves, objects and arrows may refer to
each other by name.
"""

from __future__ import annotations

import hashlib
import json
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .boolean_algebra import Algebra, bits
from .category_f import FArrow, FObject
from .conditional_set import CondSet, check_condset
from .errors import AxiomError, StructureError, ValidationError, Violation
from .sheaf import ExtensionalSheaf, Sheaf, StalkSheaf, _fill_forced_maps, check_sheaf


class ModelError(StructureError):
    """The file is missing, unreadable, not JSON, off-schema, or names something undefined."""


@lru_cache(maxsize=1)
def model_schema() -> dict:
    text = resources.files("condsheaf").joinpath("model.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


class Model:
    def __init__(self, data: dict, source: str = "<memory>", digest: str = ""):
        try:
            jsonschema.validate(data, model_schema())
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ModelError(f"{source}: schema violation at {where}: {exc.message}") from None
        self.data = data
        self.source = source
        self.digest = digest or hashlib.sha256(
            json.dumps(data, sort_keys=True).encode()).hexdigest()
        try:
            self.algebra = Algebra(tuple(data["algebra"]["atoms"]))
        except ValidationError as exc:
            raise ModelError(f"{source}: bad algebra: {exc}") from None
        self._sheaves: dict[str, Sheaf] = {}
        self._objects: dict[str, FObject] = {}

    def names(self, section: str) -> list[str]:
        return sorted(self.data.get(section, {}))

    def _entry(self, section: str, name: str) -> dict:
        table = self.data.get(section, {})
        if name not in table:
            known = ", ".join(sorted(table)) or "none"
            raise ModelError(f"no entry {name!r} in {section} (known: {known})")
        return table[name]

    def mask(self, key: str, algebra: Algebra | None = None) -> int:
        alg = algebra or self.algebra
        try:
            return alg.mask_of(key)
        except ValidationError as exc:
            raise ModelError(f"bad element key {key!r}: {exc}") from None

    # -- sheaves --------------------------------------------------------------

    def sheaf_data(self, spec: dict) -> tuple[dict, dict]:
        """``(components, maps)`` keyed by masks for extensional sheaf data."""
        comps = {self.mask(k): tuple(v) for k, v in spec["components"].items()}
        maps = {}
        for frm, row in spec["maps"].items():
            for to, table in row.items():
                maps[(self.mask(frm), self.mask(to))] = dict(table)
        return comps, maps

    def check_sheaf(self, name: str) -> tuple[list[str], list[Violation]]:
        spec = self._entry("sheaves", name)
        if "stalks" in spec:
            try:
                self._stalk_sheaf(spec)
            except ValidationError as exc:
                return [str(exc)], []
            return [], []
        comps, maps = self.sheaf_data(spec)
        return check_sheaf(self.algebra, comps, maps)

    def _stalk_sheaf(self, spec: dict) -> StalkSheaf:
        return StalkSheaf(self.algebra, spec["stalks"])

    def build_sheaf(self, spec: dict) -> Sheaf:
        if "stalks" in spec:
            try:
                return self._stalk_sheaf(spec)
            except ValidationError as exc:
                raise StructureError(str(exc)) from None
        comps, maps = self.sheaf_data(spec)
        problems, violations = check_sheaf(self.algebra, comps, maps)
        if problems:
            raise StructureError("; ".join(problems))
        if violations:
            raise AxiomError(violations)
        return ExtensionalSheaf(self.algebra, comps, _fill_forced_maps(self.algebra, comps, maps))

    def sheaf(self, name: str) -> Sheaf:
        if name not in self._sheaves:
            self._sheaves[name] = self.build_sheaf(self._entry("sheaves", name))
        return self._sheaves[name]

    def _sheaf_ref(self, ref) -> Sheaf:
        return self.sheaf(ref) if isinstance(ref, str) else self.build_sheaf(ref)

    # -- conditional sets -----------------------------------------------------

    def condset_data(self, name: str) -> tuple[Algebra, dict, dict]:
        spec = self._entry("condsets", name)
        alg = self.algebra.relative(self.mask(spec["lives_on"]))
        comps = {self.mask(k): tuple(v) for k, v in spec["components"].items()}
        gammas = {self.mask(k): dict(v) for k, v in spec["gammas"].items()}
        return alg, comps, gammas

    def check_condset(self, name: str) -> tuple[list[str], list[Violation]]:
        return check_condset(*self.condset_data(name))

    def condset(self, name: str) -> CondSet:
        problems, violations = self.check_condset(name)
        if problems:
            raise StructureError("; ".join(problems))
        if violations:
            raise AxiomError(violations)
        return CondSet(*self.condset_data(name))

    # -- objects and arrows of F ----------------------------------------------

    def build_fobject(self, spec: dict) -> FObject:
        X = self._sheaf_ref(spec["sheaf"])
        support = self.algebra.elem(self.mask(spec["support"]))
        w = X.surjectivity_witness() if not isinstance(X, StalkSheaf) else None
        if w is not None and support.mask:
            a, b, y = w
            fmt = self.algebra.fmt
            raise AxiomError([Violation(
                "surjectivity",
                f"restriction from {fmt(b)} to {fmt(a)} misses {y!r}",
                {"from": fmt(b), "to": fmt(a), "missed": y},
            )])
        return FObject(support, X)

    def fobject(self, name: str) -> FObject:
        if name not in self._objects:
            self._objects[name] = self.build_fobject(self._entry("fobjects", name))
        return self._objects[name]

    def _fobject_ref(self, ref) -> FObject:
        return self.fobject(ref) if isinstance(ref, str) else self.build_fobject(ref)

    def check_farrow(self, name: str) -> tuple[list[str], list[Violation]]:
        spec = self._entry("farrows", name)
        try:
            src = self._fobject_ref(spec["source"])
            tgt = self._fobject_ref(spec["target"])
        except AxiomError as exc:
            return [], exc.violations
        alg = self.algebra
        problems: list[str] = []
        violations: list[Violation] = []
        if src.support.mask & ~tgt.support.mask:
            violations.append(Violation(
                "hom-empty",
                f"source support {src.support} is not below target support {tgt.support}",
                {"source_support": str(src.support), "target_support": str(tgt.support)},
            ))
            return problems, violations
        maps = {}
        for key, table in spec["stalk_maps"].items():
            m = self.mask(key)
            if len(bits(m)) != 1:
                problems.append(f"stalk map key {key!r} is not an atom")
                continue
            maps[bits(m)[0]] = table
        # stalk maps at atoms outside the source support are identified away by R
        for i in src.atoms:
            if i not in maps:
                problems.append(f"no stalk map at atom {alg.atoms[i]}")
                continue
            table = maps[i]
            tgt_stalk = set(_label_keys(tgt.stalk(i)))
            for x in src.stalk(i):
                key = _label_key(x)
                if key not in table:
                    problems.append(f"stalk map at {alg.atoms[i]} undefined at {key!r}")
                elif table[key] not in tgt_stalk:
                    violations.append(Violation(
                        "codomain",
                        f"stalk map at {alg.atoms[i]} sends {key!r} to {table[key]!r}, "
                        f"outside the target stalk",
                        {"atom": alg.atoms[i], "x": key, "image": table[key]},
                    ))
        return problems, violations

    def farrow(self, name: str) -> FArrow:
        problems, violations = self.check_farrow(name)
        if problems:
            raise StructureError("; ".join(problems))
        if violations:
            raise AxiomError(violations)
        spec = self._entry("farrows", name)
        src = self._fobject_ref(spec["source"])
        tgt = self._fobject_ref(spec["target"])
        maps = {}
        for key, table in spec["stalk_maps"].items():
            i = bits(self.mask(key))[0]
            if i not in src.atoms:
                continue
            by_key = {_label_key(y): y for y in tgt.stalk(i)}
            maps[i] = {x: by_key[table[_label_key(x)]] for x in src.stalk(i)}
        return FArrow.build(src, tgt, maps)


def _label_key(x) -> str:
    """File-level name of a stalk label (stalk-form components are 1-tuples)."""
    if isinstance(x, tuple) and len(x) == 1:
        x = x[0]
    return x if isinstance(x, str) else json.dumps(x)


def _label_keys(labels) -> list[str]:
    return [_label_key(x) for x in labels]


def load_model(path) -> Model:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ModelError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelError(f"{path}: not a UTF-8 JSON document: {exc}") from None
    if not isinstance(data, dict):
        raise ModelError(f"{path}: top level must be an object")
    return Model(data, str(path), hashlib.sha256(raw).hexdigest())


def loads_model(text: str) -> Model:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"not a JSON document: {exc}") from None
    if not isinstance(data, dict):
        raise ModelError("top level must be an object")
    return Model(data)


def as_jsonable(value: Any):
    """Deterministic JSON-ready form: sets sorted, tuples as lists, other objects as str."""
    if isinstance(value, dict):
        return {str(k): as_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [as_jsonable(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted((as_jsonable(v) for v in value), key=lambda v: json.dumps(v, sort_keys=True))
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    return str(value)
