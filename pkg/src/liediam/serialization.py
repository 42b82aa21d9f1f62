"""JSON formats for matrices, subspaces, subgroups and gate sets.

Matrix: ``{"kind": "su"|"so"|"product", "d": int, "re": [[...]], "im": [[...]]}``
with row-major arrays and ``"im"`` omitted for real kinds.  Product kinds
additionally list their factors: ``"factors": [{"kind": "so", "d": 3}, ...]``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .groups import GroupElement, GroupKind, make_group_element, product, so, su
from .quotient import SubgroupSample
from .subspaces import Subspace
from .universality import GateSet


def kind_to_json(kind: GroupKind) -> dict:
    out = {"kind": kind.family, "d": kind.d}
    if kind.family == "product":
        out["factors"] = [{"kind": f.family, "d": f.d} for f in kind.factors]
    return out


def kind_from_json(obj: dict) -> GroupKind:
    try:
        family, d = obj["kind"], int(obj["d"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad group kind: {obj!r}") from exc
    if family == "su":
        return su(d)
    if family == "so":
        return so(d)
    if family == "product":
        kind = product(*(kind_from_json(f) for f in obj.get("factors", [])))
        if kind.d != d:
            raise ValidationError("product dimension does not match its factors")
        return kind
    raise ValidationError(f"unknown group kind {family!r}")


def element_to_json(g: GroupElement) -> dict:
    out = kind_to_json(g.kind)
    m = np.asarray(g.matrix)
    out["re"] = np.real(m).tolist()
    if not g.kind.is_real:
        out["im"] = np.imag(m).tolist()
    return out


def element_from_json(obj: dict) -> GroupElement:
    kind = kind_from_json(obj)
    try:
        m = np.array(obj["re"], dtype=float)
        if "im" in obj:
            m = m + 1j * np.array(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("matrix needs numeric 're' (and optional 'im') arrays") from exc
    return make_group_element(m, kind)


def subspace_to_json(W: Subspace) -> dict:
    out = {"ambient": W.ambient_dim, "basis": np.real(W.basis).tolist()}
    if np.iscomplexobj(W.basis):
        out["basis_im"] = np.imag(W.basis).tolist()
    return out


def subspace_from_json(obj: dict) -> Subspace:
    """Columns of ``basis`` (n x k) span the subspace; they are orthonormalized."""
    try:
        b = np.array(obj["basis"], dtype=float)
        if "basis_im" in obj:
            b = b + 1j * np.array(obj["basis_im"], dtype=float)
        n = int(obj["ambient"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("subspace needs 'ambient' and 'basis'") from exc
    if b.ndim != 2 or b.shape[0] != n:
        raise ValidationError(f"basis must have {n} rows")
    return Subspace.span(b)


def subgroup_from_json(obj) -> SubgroupSample:
    """A JSON array of matrices, or ``{"elements": [...], "exact": bool}``."""
    if isinstance(obj, dict):
        elements, exact = obj.get("elements", []), bool(obj.get("exact", True))
    else:
        elements, exact = obj, True
    return SubgroupSample(tuple(element_from_json(e) for e in elements), exact=exact)


def gate_set_to_json(gs: GateSet) -> dict:
    return {
        **kind_to_json(gs.kind),
        "gates": [element_to_json(g) for g in gs.gates],
        "labels": list(gs.labels),
        "include_inverses": gs.include_inverses,
    }


def gate_set_from_json(obj: dict) -> GateSet:
    kind = kind_from_json(obj)
    gates = tuple(element_from_json({**kind_to_json(kind), **g}) for g in obj.get("gates", []))
    labels = obj.get("labels") or [f"g{i}" for i in range(len(gates))]
    return GateSet(kind, gates, tuple(labels), bool(obj.get("include_inverses", True)))


def load_json(path: str | Path):
    with open(path) as fh:
        return json.load(fh)
