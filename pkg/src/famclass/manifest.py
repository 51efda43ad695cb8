"""JSON manifest ingestion and validation.

A manifest names manifolds (with lattices), auxiliary classes, diffeomorphism
actions, externally supplied base invariants (each with a provenance string),
an optional wall setup, and requested commands.  Every cross-reference must
resolve, and base invariants without provenance are rejected: they are the
axioms of any verdict built on them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import FamClassError
from .fourman import (
    FourManifoldDescriptor,
    SO3Class,
    SpinCClass,
    descriptor_from_json,
    standard_manifold,
    validate_so3,
)


class ManifestError(FamClassError):
    pass


@dataclass
class DiffeoAction:
    name: str
    matrix: np.ndarray
    h1_sign: int = 1


@dataclass
class BaseInvariant:
    name: str
    value: int
    provenance: str


@dataclass
class ScenarioManifest:
    manifolds: dict = field(default_factory=dict)
    spinc: dict = field(default_factory=dict)
    so3: dict = field(default_factory=dict)
    diffeos: dict = field(default_factory=dict)
    base_invariants: dict = field(default_factory=dict)
    families: dict = field(default_factory=dict)
    wall: dict = field(default_factory=dict)
    commands: list = field(default_factory=list)

    def manifold(self, name: str) -> FourManifoldDescriptor:
        if name in self.manifolds:
            return self.manifolds[name]
        try:
            return standard_manifold(name)
        except KeyError:
            raise ManifestError(f"manifest names no manifold {name!r}") from None

    def invariant(self, name: str) -> BaseInvariant:
        if name not in self.base_invariants:
            raise ManifestError(f"manifest provides no base invariant {name!r}")
        return self.base_invariants[name]


def load_manifest(source, strict: bool = False) -> ScenarioManifest:
    """Parse a manifest from a dict, JSON string, or file path."""
    if isinstance(source, ScenarioManifest):
        return source
    if isinstance(source, dict):
        data = source
    else:
        text = str(source)
        if text.lstrip().startswith("{"):
            data = json.loads(text)
        else:
            with open(text, "r", encoding="utf-8") as fh:
                data = json.load(fh)
    if strict:
        data = dict(data)
        data["strict"] = True
    return _build(data)


def _build(data) -> ScenarioManifest:
    out = ScenarioManifest()
    raw_manifolds = data.get("manifolds", [])
    if "manifold" in data:
        raw_manifolds = list(raw_manifolds) + [data["manifold"]]
    for m in raw_manifolds:
        desc = descriptor_from_json(m)
        out.manifolds[desc.name] = desc

    for name, spec in (data.get("spinc") or {}).items():
        out.spinc[name] = _spinc_entry(spec, out)
    for name, spec in (data.get("so3") or {}).items():
        out.so3[name] = _so3_entry(spec, out, strict=bool(data.get("strict")))

    for d in data.get("diffeos", []):
        mat = np.asarray(d["matrix"], dtype=np.int64)
        out.diffeos[d["name"]] = DiffeoAction(
            name=d["name"], matrix=mat, h1_sign=int(d.get("h1_sign", 1))
        )

    for name, spec in (data.get("base_invariants") or {}).items():
        if not isinstance(spec, dict) or "value" not in spec:
            raise ManifestError(f"base invariant {name!r} needs a value")
        prov = spec.get("provenance", "").strip()
        if not prov:
            raise ManifestError(
                f"base invariant {name!r} must carry a provenance string"
            )
        out.base_invariants[name] = BaseInvariant(
            name=name, value=int(spec["value"]), provenance=prov
        )

    out.families = dict(data.get("families") or {})
    out.wall = dict(data.get("wall") or {})
    out.commands = list(data.get("commands") or [])
    return out


def _spinc_entry(spec, manifest):
    klass = SpinCClass(spec["c1"])
    on = spec.get("on")
    if on:
        x = manifest.manifold(on)
        if len(klass.c1) != x.lattice.rank:
            raise ManifestError(
                f"c1 length {len(klass.c1)} does not match {on!r} rank {x.lattice.rank}"
            )
    return {"class": klass, "on": on}


def _so3_entry(spec, manifest, strict=False):
    klass = SO3Class(spec["p1"], spec["w2"])
    on = spec.get("on")
    if on:
        validate_so3(manifest.manifold(on), klass, strict=strict)
    return {"class": klass, "on": on}
