"""Command-line interface: manifest-driven runs with deterministic reports.

Subcommands: dim, membership, homeo-check, wall-degree, vn-run, compose,
scenario, report.  Exit codes: 0 computed, 2 a stated hypothesis failed,
3 a count or degree refused to stabilize.  Reports are byte-identical across
repeated runs with the same inputs (no timestamps, sorted keys, fixed order).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import cochain, fourman, scenarios, vnengine, wallcross
from .errors import FamClassError, HypothesisError, StabilityError
from .manifest import ManifestError, ScenarioManifest, load_manifest

REPORT_SCHEMA = "famclass/1"


def emit_report(payload, fmt: str = "text") -> bytes:
    """Render a report dict (or VerdictReport) deterministically.

    JSON output is schema-versioned and key-sorted; text output is a fixed
    ordering of the same numbers.  Same input, same bytes.
    """
    if hasattr(payload, "to_json"):
        payload = payload.to_json()
    doc = {"schema": REPORT_SCHEMA, "report": payload}
    if fmt == "json":
        return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode()
    lines = [f"famclass report ({REPORT_SCHEMA})"]
    lines.extend(_text_lines(payload, indent=""))
    return ("\n".join(lines) + "\n").encode()


def _text_lines(obj, indent):
    out = []
    if isinstance(obj, dict):
        for key in sorted(obj):
            val = obj[key]
            if isinstance(val, (dict, list)) and val:
                out.append(f"{indent}{key}:")
                out.extend(_text_lines(val, indent + "  "))
            else:
                out.append(f"{indent}{key}: {_scalar(val)}")
    elif isinstance(obj, list):
        for val in obj:
            if isinstance(val, (dict, list)):
                out.append(f"{indent}-")
                out.extend(_text_lines(val, indent + "  "))
            else:
                out.append(f"{indent}- {_scalar(val)}")
    else:
        out.append(f"{indent}{_scalar(obj)}")
    return out


def _scalar(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, (dict, list)):
        return "{}" if isinstance(v, dict) else "[]"
    return str(v)


def _load(args) -> ScenarioManifest:
    if getattr(args, "manifest", None):
        return load_manifest(args.manifest, strict=getattr(args, "strict", False))
    return ScenarioManifest()


def _resolve_manifold(manifest, name):
    return manifest.manifold(name)


def cmd_dim(args):
    mf = _load(args)
    x = _resolve_manifold(mf, args.manifold)
    from .lattice import inertia, parity

    bp, bm, sig = inertia(x.lattice)
    payload = {
        "manifold": x.name,
        "b1": x.b1,
        "rank": x.lattice.rank,
        "euler_char": fourman.euler_char(x),
        "b_plus": bp,
        "b_minus": bm,
        "signature": sig,
        "parity": parity(x.lattice),
    }
    if args.spinc:
        entry = mf.spinc.get(args.spinc)
        if entry is None:
            raise ManifestError(f"manifest names no spin-c class {args.spinc!r}")
        payload["formal_dim_sw"] = fourman.formal_dim_sw(x, entry["class"])
    if args.so3:
        entry = mf.so3.get(args.so3)
        if entry is None:
            raise ManifestError(f"manifest names no SO(3) class {args.so3!r}")
        payload["formal_dim_asd"] = fourman.formal_dim_asd(
            x, entry["class"], strict=args.strict
        )
    return payload


def cmd_membership(args):
    mf = _load(args)
    x = _resolve_manifold(mf, args.manifold)
    if args.diffeo not in mf.diffeos:
        raise ManifestError(f"manifest names no diffeomorphism {args.diffeo!r}")
    action = mf.diffeos[args.diffeo]
    klass = None
    if args.spinc:
        klass = mf.spinc[args.spinc]["class"]
    elif args.so3:
        klass = mf.so3[args.so3]["class"]
    else:
        raise ManifestError("membership needs --spinc or --so3")
    rep = fourman.group_membership(x, klass, action.matrix, h1_sign=action.h1_sign)
    return {
        "manifold": x.name,
        "diffeo": action.name,
        "preserves_class": rep.preserves_class,
        "preserves_homology_orientation": rep.preserves_homology_orientation,
        "coefficient_ring": rep.coefficient_ring,
    }


def cmd_homeo_check(args):
    mf = _load(args)
    x = _resolve_manifold(mf, args.manifold)
    y = _resolve_manifold(mf, args.other)
    match, report = fourman.homeo_invariants_match(x, y)
    return {
        "first": x.name,
        "second": y.name,
        "match": match,
        "invariants": {k: list(v) for k, v in report.items()},
    }


def cmd_wall_degree(args):
    mf = _load(args)
    if args.reflection:
        fam = wallcross.reflection_family(args.reflection)
    elif mf.wall:
        fam = _wall_family_from_manifest(mf)
    else:
        raise ManifestError("wall-degree needs --reflection N or a manifest wall")
    deg = wallcross.boundary_degree(fam, seed=args.seed)
    return {"family": fam.name, "degree": deg.value, "trace": [list(t) for t in deg.trace],
            "exact": deg.exact, "method": deg.method}


def _wall_family_from_manifest(mf):
    from .lattice import lattice_from_json

    spec = mf.wall
    lat = lattice_from_json(spec["lattice"])
    exprs = spec["sigma"]
    n = int(spec["n"])
    funcs = [vnengine.compile_polynomial(e, n, 0) for e in exprs]

    def sigma(t):
        b = np.array([[float(x) for x in t]])
        return [float(fn(b, np.zeros((1, 0)))[0]) for fn in funcs]

    return wallcross.WallFamily(
        n=n,
        lattice=lat,
        gammas=tuple(tuple(g) for g in spec["gammas"]),
        sigma=sigma,
        name=spec.get("name", "manifest-wall"),
        exact=False,
    )


def cmd_vn_run(args):
    mf = _load(args)
    if args.family in mf.families:
        fam = vnengine.family_from_spec(mf.families[args.family], name=args.family)
    else:
        fam = vnengine.builtin_family(args.family, n=args.n)
    ring = {"z": "Z", "f2": "F2"}[args.ring]
    if fam.base_dim == 0:
        res = vnengine.count_point(fam, seed=args.seed, ring=ring)
        return {"family": fam.name, "ring": ring, "count": res.value,
                "trace": [list(t) for t in res.trace]}
    klass, details = vnengine.family_class(
        fam, seed=args.seed, ring=ring, return_details=True
    )
    return {
        "family": fam.name,
        "ring": ring,
        "cochain": dict(klass.values),
        "traces": {cid: [list(t) for t in r.trace] for cid, r in details.items()},
    }


def cmd_compose(args):
    values = None
    if args.values:
        parts = [int(v) for v in args.values.split(",")]
        values = {k: v for k, v in enumerate(parts)}
    rep = scenarios.composition_scenario(args.n, values=values)
    return rep


def cmd_scenario(args):
    mf = args.manifest if args.manifest else None
    name = args.name
    params = {}
    if name is None:
        # fall back to the manifest's requested commands
        if mf is None:
            raise ManifestError("scenario needs --name or a manifest with commands")
        loaded = load_manifest(mf, strict=args.strict)
        entry = next(
            (c for c in loaded.commands if c.get("command") == "scenario"), None
        )
        if entry is None:
            raise ManifestError("manifest requests no scenario command")
        name = entry["name"]
        params = {k: v for k, v in entry.items() if k not in ("command", "name")}
        mf = loaded
    else:
        if name in ("k3-sum", "dissolve", "composition"):
            params["n"] = args.n if args.n is not None else 1
        if name == "ruberman-asd":
            params["donaldson_value"] = (
                args.donaldson if args.donaldson is not None else 1
            )
    rep = scenarios.run_scenario(name, manifest=mf, seed=args.seed, **params)
    return rep


def cmd_report(args):
    with open(args.input, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    payload = doc.get("report", doc)
    return payload


_COMMON_DEFAULTS = {
    "manifest": None,
    "ring": "f2",
    "seed": 0,
    "strict": False,
    "format": "text",
}


def _common_flags():
    # accepted both before and after the subcommand; SUPPRESS keeps unset
    # occurrences from clobbering the other position
    c = argparse.ArgumentParser(add_help=False)
    c.add_argument("--manifest", default=argparse.SUPPRESS,
                   help="JSON manifest file")
    c.add_argument("--ring", choices=["z", "f2"], default=argparse.SUPPRESS)
    c.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    c.add_argument("--strict", action="store_true", default=argparse.SUPPRESS,
                   help="turn consistency warnings into errors")
    c.add_argument("--format", choices=["text", "json"],
                   default=argparse.SUPPRESS)
    return c


def build_parser():
    common = _common_flags()
    p = argparse.ArgumentParser(
        prog="famclass",
        description="desk-scale characteristic-class computations for "
        "4-manifold bundles",
        parents=[common],
    )
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dim", parents=[common],
                       help="inertia, parity, Euler characteristic, "
                       "formal dimensions")
    d.add_argument("--manifold", required=True)
    d.add_argument("--spinc")
    d.add_argument("--so3")
    d.set_defaults(func=cmd_dim)

    m = sub.add_parser("membership", parents=[common],
                       help="structure-group membership of a lattice isometry")
    m.add_argument("--manifold", required=True)
    m.add_argument("--diffeo", required=True)
    m.add_argument("--spinc")
    m.add_argument("--so3")
    m.set_defaults(func=cmd_membership)

    h = sub.add_parser("homeo-check", parents=[common],
                       help="compare homeomorphism invariants")
    h.add_argument("--manifold", required=True)
    h.add_argument("--other", required=True)
    h.set_defaults(func=cmd_homeo_check)

    w = sub.add_parser("wall-degree", parents=[common],
                       help="PL mapping degree of a wall family")
    w.add_argument("--reflection", type=int,
                   help="use the built-in reflection family of this dimension")
    w.set_defaults(func=cmd_wall_degree)

    v = sub.add_parser("vn-run", parents=[common],
                       help="count a built-in toy section")
    v.add_argument("--family", required=True,
                   help=f"one of {', '.join(vnengine.BUILTIN_FAMILIES)}")
    v.add_argument("--n", type=int, default=None)
    v.set_defaults(func=cmd_vn_run)

    c = sub.add_parser("compose", parents=[common],
                       help="composition parity over factor choices")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--values", help="comma list of per-signature values, k=0..n")
    c.set_defaults(func=cmd_compose)

    s = sub.add_parser("scenario", parents=[common],
                       help="run a named end-to-end scenario (or the one the "
                       "manifest requests)")
    s.add_argument("--name", choices=sorted(scenarios.SCENARIOS))
    s.add_argument("--n", type=int)
    s.add_argument("--donaldson", type=int)
    s.set_defaults(func=cmd_scenario)

    r = sub.add_parser("report", parents=[common],
                       help="re-render a saved JSON report")
    r.add_argument("--input", required=True)
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, val in _COMMON_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, val)
    try:
        payload = args.func(args)
    except HypothesisError as err:
        sys.stderr.write(f"hypothesis failure: {err}\n")
        return 2
    except StabilityError as err:
        sys.stderr.write(f"numerical non-stabilization: {err}\n")
        return 3
    except (FamClassError, ManifestError, ValueError, KeyError, OSError) as err:
        sys.stderr.write(f"error: {err}\n")
        return 1
    sys.stdout.buffer.write(emit_report(payload, fmt=args.format))
    return 0


if __name__ == "__main__":
    sys.exit(main())
