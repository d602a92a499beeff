"""JSON instance files, policy files, and plain-text reports.

Every number that is a value travels as a ``"p/q"`` string; counts and
indices stay integers.  Items are referred to by label everywhere.
"""
from __future__ import annotations

import json
from typing import Any, Dict, List, Sequence

from .configlp import CertificateCheck, DualCertificate, PrimalWitness
from .greedy import ByPermutation, GreedyTrace
from .matroids import (DownwardClosed, Explicit, Matroid, Partition, RestrictedMatroid,
                       Uniform, EXPLICIT_LIMIT)
from .model import Allocation, Instance
from .valuation import (Additive, Augmented, Coverage, DisjointSum, Restricted, SetFunction,
                        Table, Truncated, iter_bits, parse_value, render_value)

__all__ = [
    "FORMAT_VERSION", "FormatError", "dump_instance", "load_instance", "instance_to_dict",
    "instance_from_dict", "dump_policy", "load_policy", "render_allocation", "render_trace",
    "render_certificate", "render_witness", "allocation_to_dict",
]

FORMAT_VERSION = 1


class FormatError(ValueError):
    pass


# ------------------------------------------------------------------ valuations

def _valuation_to_dict(f: SetFunction, labels: Sequence[str]) -> Dict[str, Any]:
    if isinstance(f, Additive):
        return {"type": "additive",
                "payload": {"weights": {lab: render_value(w) for lab, w in zip(labels, f.weights)}}}
    if isinstance(f, Coverage):
        names = f.element_labels or tuple(f"e{k}" for k in range(len(f.weights)))
        return {"type": "coverage", "payload": {
            "universe": [{"label": e, "weight": render_value(w)} for e, w in zip(names, f.weights)],
            "covers": {lab: [names[e] for e in sorted(c)] for lab, c in zip(labels, f.covers)},
        }}
    if isinstance(f, Table):
        values = {}
        for mask, v in enumerate(f.values):
            values[",".join(labels[j] for j in iter_bits(mask))] = render_value(v)
        return {"type": "table", "payload": {"values": values}}
    if isinstance(f, Truncated):
        return {"type": "truncated", "payload": {
            "cap": render_value(f.cap), "inner": _valuation_to_dict(f.inner, labels)}}
    if isinstance(f, Augmented):
        return {"type": "augmented", "payload": {
            "item": labels[-1], "bonus": render_value(f.bonus),
            "inner": _valuation_to_dict(f.inner, labels[:-1])}}
    if isinstance(f, DisjointSum):
        parts, start = [], 0
        for part in f.parts:
            parts.append(_valuation_to_dict(part, labels[start:start + part.n]))
            start += part.n
        return {"type": "disjoint_sum", "payload": {"parts": parts}}
    if isinstance(f, Restricted):
        inner_labels = [f"r{k}" for k in range(f.inner.n)]
        return {"type": "restricted", "payload": {
            "items": [inner_labels[j] for j in f.items],
            "inner": _valuation_to_dict(f.inner, inner_labels),
            "inner_items": inner_labels}}
    raise FormatError(f"cannot serialise valuation of type {type(f).__name__}")


def _index(labels: Sequence[str]) -> Dict[str, int]:
    return {lab: j for j, lab in enumerate(labels)}


def _valuation_from_dict(d: Dict[str, Any], labels: Sequence[str]) -> SetFunction:
    try:
        kind, payload = d["type"], d["payload"]
    except (KeyError, TypeError) as exc:
        raise FormatError("valuation needs 'type' and 'payload'") from exc
    where = _index(labels)
    if kind == "additive":
        w = payload["weights"]
        if set(w) != set(labels):
            raise FormatError("additive weights must cover exactly the item labels")
        return Additive(tuple(parse_value(w[lab]) for lab in labels))
    if kind == "coverage":
        universe = payload["universe"]
        names = [e["label"] for e in universe]
        eidx = _index(names)
        covers = payload["covers"]
        if set(covers) != set(labels):
            raise FormatError("coverage covers must list exactly the item labels")
        try:
            sets = tuple(frozenset(eidx[e] for e in covers[lab]) for lab in labels)
        except KeyError as exc:
            raise FormatError(f"unknown universe element {exc}") from exc
        return Coverage(tuple(parse_value(e["weight"]) for e in universe), sets, tuple(names))
    if kind == "table":
        n = len(labels)
        raw = payload["values"]
        values = [None] * (1 << n)
        for key, v in raw.items():
            mask = 0
            for lab in filter(None, key.split(",")):
                if lab not in where:
                    raise FormatError(f"unknown item {lab!r} in table key")
                mask |= 1 << where[lab]
            values[mask] = parse_value(v)
        if any(v is None for v in values):
            raise FormatError("table must list a value for every subset")
        return Table(tuple(values))
    if kind == "truncated":
        return Truncated(_valuation_from_dict(payload["inner"], labels), parse_value(payload["cap"]))
    if kind == "augmented":
        if payload.get("item") != labels[-1]:
            raise FormatError("augmented item must be the last item")
        return Augmented(_valuation_from_dict(payload["inner"], labels[:-1]),
                         parse_value(payload["bonus"]))
    if kind == "disjoint_sum":
        parts, start = [], 0
        for part in payload["parts"]:
            size = _part_size(part, labels[start:])
            parts.append(_valuation_from_dict(part, labels[start:start + size]))
            start += size
        if start != len(labels):
            raise FormatError("disjoint-sum parts do not cover the items")
        return DisjointSum(tuple(parts))
    if kind == "restricted":
        inner_labels = payload["inner_items"]
        inner = _valuation_from_dict(payload["inner"], inner_labels)
        idx = _index(inner_labels)
        return Restricted(inner, tuple(idx[lab] for lab in payload["items"]))
    raise FormatError(f"unknown valuation type {kind!r}")


def _part_size(d: Dict[str, Any], labels: Sequence[str]) -> int:
    kind, payload = d["type"], d["payload"]
    if kind == "additive":
        return len(payload["weights"])
    if kind == "coverage":
        return len(payload["covers"])
    if kind == "table":
        return (len(payload["values"]).bit_length() - 1)
    if kind == "truncated":
        return _part_size(payload["inner"], labels)
    if kind == "augmented":
        return _part_size(payload["inner"], labels) + 1
    if kind == "disjoint_sum":
        total = 0
        for part in payload["parts"]:
            total += _part_size(part, labels[total:])
        return total
    if kind == "restricted":
        return len(payload["items"])
    raise FormatError(f"unknown valuation type {kind!r}")


# ------------------------------------------------------------------ matroids

def _matroid_to_dict(mat: Matroid, labels: Sequence[str]) -> Dict[str, Any]:
    if isinstance(mat, Uniform):
        return {"type": "uniform", "rank": mat.rank}
    if isinstance(mat, Partition):
        return {"type": "partition",
                "blocks": [[labels[j] for j in sorted(b)] for b in mat.blocks],
                "capacities": list(mat.capacities)}
    if isinstance(mat, RestrictedMatroid):
        if mat.n > EXPLICIT_LIMIT:
            raise FormatError("restricted matroid too large to serialise explicitly")
        mat = (DownwardClosed if not mat.is_matroid else Explicit).from_oracle(mat)
    if isinstance(mat, Explicit):
        fam = mat.family
        maximal = sorted(s for s in fam if not any(s | 1 << j in fam
                                                   for j in range(mat.n) if not s >> j & 1))
        kind = "downward_closed" if isinstance(mat, DownwardClosed) else "explicit"
        return {"type": kind, "maximal_sets": [[labels[j] for j in iter_bits(s)] for s in maximal]}
    raise FormatError(f"cannot serialise matroid of type {type(mat).__name__}")


def _matroid_from_dict(d: Dict[str, Any], labels: Sequence[str]) -> Matroid:
    n = len(labels)
    where = _index(labels)
    kind = d.get("type")
    try:
        if kind == "uniform":
            return Uniform(n, int(d["rank"]))
        if kind == "partition":
            blocks = tuple(frozenset(where[lab] for lab in b) for b in d["blocks"])
            return Partition(n, blocks, tuple(int(c) for c in d["capacities"]))
        if kind in ("explicit", "downward_closed"):
            cls = DownwardClosed if kind == "downward_closed" else Explicit
            return cls.from_sets(n, [[where[lab] for lab in s] for s in d["maximal_sets"]])
    except KeyError as exc:
        raise FormatError(f"matroid refers to unknown item or field {exc}") from exc
    raise FormatError(f"unknown matroid type {kind!r}")


# ------------------------------------------------------------------ instances

def instance_to_dict(inst: Instance) -> Dict[str, Any]:
    labels = list(inst.labels)
    d: Dict[str, Any] = {
        "version": FORMAT_VERSION,
        "n": inst.n,
        "m": inst.m,
        "items": labels,
        "valuation": _valuation_to_dict(inst.valuation, labels),
        "matroids": [_matroid_to_dict(mat, labels) for mat in inst.matroids],
    }
    if inst.cardinality_cap is not None:
        d["cardinality_cap"] = inst.cardinality_cap
    return d


def instance_from_dict(d: Dict[str, Any]) -> Instance:
    if not isinstance(d, dict):
        raise FormatError("instance document must be a JSON object")
    if d.get("version") != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {d.get('version')!r}")
    try:
        labels = [str(x) for x in d["items"]]
        n, m = int(d["n"]), int(d["m"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"missing or malformed header field: {exc}") from exc
    if n != len(labels):
        raise FormatError(f"n={n} but {len(labels)} item labels")
    try:
        f = _valuation_from_dict(d["valuation"], labels)
        mats = tuple(_matroid_from_dict(x, labels) for x in d.get("matroids", []))
        return Instance(f, m=m, labels=tuple(labels), matroids=mats,
                        cardinality_cap=d.get("cardinality_cap"))
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise FormatError(str(exc)) from exc


def dump_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1, sort_keys=True) + "\n"


def load_instance(text: str) -> Instance:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    return instance_from_dict(d)


# ------------------------------------------------------------------ policies

def dump_policy(policy: ByPermutation, inst: Instance) -> str:
    labels = inst.labels
    return json.dumps({
        "items": [labels[j] for j in policy.items],
        "players": list(policy.players),
        "owners": {labels[j]: p for j, p in policy.owners},
    }, indent=1, sort_keys=True) + "\n"


def load_policy(text: str, inst: Instance) -> ByPermutation:
    try:
        d = json.loads(text)
        where = _index(inst.labels)
        items = tuple(where[lab] for lab in d["items"])
        players = tuple(int(p) for p in d["players"])
        owners = tuple((where[lab], int(p)) for lab, p in d.get("owners", {}).items())
        policy = ByPermutation(items, players, owners)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed policy file: {exc}") from exc
    if policy.n != inst.n or policy.m != inst.m:
        raise FormatError("policy does not match the instance size")
    return policy


# ------------------------------------------------------------------ reports

def _items(inst: Instance, mask: int) -> List[str]:
    return [inst.labels[j] for j in iter_bits(mask)]


def allocation_to_dict(inst: Instance, alloc: Allocation) -> Dict[str, Any]:
    f = inst.valuation
    return {
        "bundles": [{"player": p, "items": _items(inst, b), "value": render_value(f.value(b))}
                    for p, b in enumerate(alloc.masks)],
        "unallocated": _items(inst, alloc.unallocated_mask),
    }


def render_allocation(inst: Instance, alloc: Allocation) -> str:
    f = inst.valuation
    lines = []
    for p, b in enumerate(alloc.masks):
        lines.append(f"player {p}: value {render_value(f.value(b))} "
                     f"items {{{', '.join(_items(inst, b))}}}")
    lines.append(f"unallocated: {{{', '.join(_items(inst, alloc.unallocated_mask))}}}")
    return "\n".join(lines)


def render_trace(inst: Instance, trace: GreedyTrace) -> str:
    lines = [f"threshold {render_value(trace.threshold)}"]
    for j, p in trace.fixed:
        lines.append(f"fixed item {inst.labels[j]} player {p}")
    for k, s in enumerate(trace.seeds):
        lines.append(f"seed {k} item {inst.labels[s.item]} player {s.player} "
                     f"gain {render_value(s.gain)}")
    for k, s in enumerate(trace.steps):
        lines.append(f"step {k} item {inst.labels[s.item]} player {s.player} "
                     f"gain {render_value(s.gain)}")
    return "\n".join(lines)


def render_certificate(inst: Instance, cert: DualCertificate,
                       check: CertificateCheck) -> str:
    rel = ">" if cert.strict else ">="
    lines = [
        f"certificate {cert.source}",
        f"threshold {render_value(cert.threshold)} (configurations with f(C) {rel} threshold)",
        f"players {cert.m}",
    ]
    if cert.opt is not None:
        lines.append(f"integral optimum {render_value(cert.opt)}")
    if cert.removed:
        lines.append("removed big items: " + ", ".join(
            f"{inst.labels[j]}->player {p}" for j, p in cert.removed))
    if cert.min_player is not None:
        lines.append(f"min player of the truncated allocation {cert.min_player}")
    for j, y in enumerate(cert.y):
        lines.append(f"y {inst.labels[j]} {render_value(y)}")
    lines.append(f"sum {render_value(cert.total)}")
    if cert.repair is None:
        lines.append("repair none")
    else:
        r = cert.repair
        slack = "none" if r.slack is None else render_value(r.slack)
        lines.append(f"repair item {inst.labels[r.item]} decreased by {render_value(r.amount)} "
                     f"(min slack {slack})")
    lines.append(f"configurations checked {check.configurations}")
    lines.append("verdict " + ("VERIFIED" if check.ok else "INVALID"))
    if check.violation is not None:
        lines.append(f"violating configuration {{{', '.join(_items(inst, check.violation))}}} "
                     f"weight {render_value(cert.weight(check.violation))}")
    elif not check.total_below_m:
        lines.append(f"value constraint fails: sum {render_value(cert.total)} >= {cert.m}")
    return "\n".join(lines)


def render_witness(inst: Instance, w: PrimalWitness) -> str:
    lines = [f"threshold {render_value(w.threshold)}"]
    for p, c, x in w.entries:
        lines.append(f"x player {p} config {{{', '.join(_items(inst, c))}}} = {render_value(x)}")
    return "\n".join(lines)

