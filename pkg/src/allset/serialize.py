"""JSON and CSV encodings of the library's values.

Every ``*_to_json`` returns plain dicts and lists ready for
:func:`json.dumps`; the matching ``*_from_json`` accepts the same shape
and raises :class:`InputError` on anything malformed.
"""
from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .core_metric import DistanceMatrix, ValidationReport
from .embed import Circle, EmbedResult, Euclidean, Hyperbolic, ModelSpace, Sphere, TreeValence
from .errors import InputError
from .extend import PartialIsometry, TraceStep
from .fingerprint import FingerprintSet, FingerprintVector, Membership, NonclosedReport
from .homog import HomogeneityReport, PartialMap
from .ramsey import CliqueResult, EdgeColoring
from .tree import Edge, FiniteTree, TreeLocation, Vertex


def dumps(doc: Any) -> str:
    """Deterministic JSON text: sorted keys, no NaN, trailing newline."""
    return json.dumps(doc, sort_keys=True, allow_nan=False, indent=2) + "\n"


def _get(doc: dict, key: str, kind=None):
    if not isinstance(doc, dict) or key not in doc:
        raise InputError(f"missing field {key!r}")
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise InputError(f"field {key!r} has the wrong type")
    return value


# -- distance matrices ---------------------------------------------------------


def matrix_to_json(m: DistanceMatrix) -> dict:
    return {"n": m.n, "kind": m.kind, "d": m.d.tolist()}


def matrix_from_json(doc: dict) -> DistanceMatrix:
    d = _get(doc, "d", list)
    kind = doc.get("kind", "metric")
    try:
        m = DistanceMatrix(np.asarray(d, dtype=float), kind)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad distance matrix: {exc}") from exc
    if "n" in doc and doc["n"] != m.n:
        raise InputError(f"declared n = {doc['n']} but matrix has {m.n} rows")
    return m


def matrix_from_csv(text: str, kind: str = "metric") -> DistanceMatrix:
    """Lower-triangular CSV: row i lists d[i][0..i-1]; the empty first row may be omitted."""
    rows = [r for r in csv.reader(_io.StringIO(text))]
    rows = [[c for c in r if c.strip() != ""] for r in rows]
    while rows and not rows[-1]:
        rows.pop()
    if rows and rows[0]:
        rows.insert(0, [])
    n = len(rows)
    if n == 0:
        raise InputError("empty CSV matrix")
    d = np.zeros((n, n))
    for i, row in enumerate(rows):
        if len(row) != i:
            raise InputError(f"CSV row {i} has {len(row)} entries, expected {i}")
        try:
            d[i, :i] = [float(c) for c in row]
        except ValueError as exc:
            raise InputError(f"CSV row {i}: {exc}") from exc
    return DistanceMatrix(d + d.T, kind)


def matrix_to_csv(m: DistanceMatrix) -> str:
    out = _io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    for i in range(m.n):
        writer.writerow([repr(float(x)) for x in m.d[i, :i]])
    return out.getvalue()


def load_matrix(path: str | Path) -> DistanceMatrix:
    """Read a matrix file; ``.csv`` files are lower-triangular CSV, anything else JSON."""
    path = Path(path)
    text = _read(path)
    if path.suffix.lower() == ".csv":
        return matrix_from_csv(text)
    return matrix_from_json(_parse(text, path))


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _parse(text: str, path: Path) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from exc


def load_json(path: str | Path) -> Any:
    path = Path(path)
    return _parse(_read(path), path)


def validation_to_json(r: ValidationReport) -> dict:
    return {"ok": r.ok, "axiom": r.axiom, "witness": list(r.witness), "message": r.message}


# -- trees ----------------------------------------------------------------------


def tree_to_json(t: FiniteTree) -> dict:
    return {
        "vertices": [{"id": v.id, "label": v.label} for v in t.vertices],
        "edges": [{"u": e.u, "v": e.v, "len": float(e.length)} for e in t.edges],
        "valence_budget": t.valence_budget,
    }


def tree_from_json(doc: dict) -> FiniteTree:
    try:
        verts = tuple(Vertex(int(v["id"]), v.get("label")) for v in _get(doc, "vertices", list))
        edges = tuple(Edge(int(e["u"]), int(e["v"]), float(e["len"])) for e in _get(doc, "edges", list))
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InputError(f"bad tree: {exc}") from exc
    budget = doc.get("valence_budget")
    return FiniteTree(verts, edges, None if budget is None else int(budget))


def location_to_json(loc: TreeLocation) -> dict:
    if loc.is_vertex:
        return {"vertex": loc.vertex}
    return {"edge": loc.edge, "offset": float(loc.offset)}


def location_from_json(doc: Any) -> TreeLocation:
    if isinstance(doc, int):
        return TreeLocation.at(doc)
    if not isinstance(doc, dict):
        raise InputError(f"bad tree location {doc!r}")
    try:
        if "vertex" in doc:
            return TreeLocation.at(int(doc["vertex"]))
        return TreeLocation.on(int(doc["edge"]), float(doc["offset"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad tree location {doc!r}") from exc


# -- extension --------------------------------------------------------------------


def map_to_json(p: PartialIsometry) -> dict:
    return {"domain": [location_to_json(x) for x in p.domain], "images": [location_to_json(y) for y in p.images]}


def map_from_json(doc: dict) -> tuple[list[TreeLocation], list[TreeLocation]]:
    dom = [location_from_json(x) for x in _get(doc, "domain", list)]
    img = [location_from_json(y) for y in _get(doc, "images", list)]
    if len(dom) != len(img):
        raise InputError("domain and images must have equal length")
    return dom, img


def step_to_json(s: TraceStep) -> dict:
    doc = {"kind": s.kind, "point": location_to_json(s.point), "anchors": list(s.anchors)}
    if s.gate is not None:
        doc["gate"] = location_to_json(s.gate)
        doc["t"] = float(s.t)
    if s.direction is not None:
        doc["direction"] = s.direction
    if s.offset is not None:
        doc["offset"] = float(s.offset)
    return doc


def step_from_json(doc: dict) -> TraceStep:
    gate = doc.get("gate")
    return TraceStep(
        kind=_get(doc, "kind", str),
        point=location_from_json(_get(doc, "point")),
        gate=None if gate is None else location_from_json(gate),
        t=float(doc.get("t", 0.0)),
        direction=doc.get("direction"),
        offset=doc.get("offset"),
        anchors=tuple(doc.get("anchors", ())),
    )


def trace_to_json(trace: Sequence[TraceStep]) -> list:
    return [step_to_json(s) for s in trace]


def trace_from_json(doc: list) -> list[TraceStep]:
    if not isinstance(doc, list):
        raise InputError("trace must be a list")
    return [step_from_json(s) for s in doc]


# -- model spaces and embeddings -------------------------------------------------


def space_to_json(space: ModelSpace) -> dict:
    if isinstance(space, Euclidean):
        return {"space": "euclidean", "dim": space.dim}
    if isinstance(space, Sphere):
        return {"space": "sphere", "dim": space.dim, "radius": space.radius}
    if isinstance(space, Hyperbolic):
        return {"space": "hyperbolic", "dim": space.dim, "scale": space.scale}
    if isinstance(space, Circle):
        return {"space": "circle", "length": space.length}
    if isinstance(space, TreeValence):
        return {"space": "tree", "valence": space.valence}
    raise InputError(f"unknown model space {space!r}")


def space_from_json(doc: dict) -> ModelSpace:
    kind = _get(doc, "space", str)
    try:
        if kind == "euclidean":
            return Euclidean(int(doc["dim"]))
        if kind == "sphere":
            return Sphere(int(doc["dim"]), float(doc.get("radius", 1.0)))
        if kind == "hyperbolic":
            return Hyperbolic(int(doc["dim"]), float(doc.get("scale", 1.0)))
        if kind == "circle":
            return Circle(float(doc["length"]))
        if kind == "tree":
            return TreeValence(int(doc["valence"]))
    except KeyError as exc:
        raise InputError(f"model space {kind!r} needs field {exc.args[0]!r}") from exc
    raise InputError(f"unknown model space {kind!r}")


def embed_result_to_json(r: EmbedResult) -> dict:
    witness = r.witness
    if isinstance(witness, FiniteTree):
        witness = tree_to_json(witness)
    elif isinstance(witness, np.ndarray):
        witness = witness.tolist()
    return {
        "embeddable": r.embeddable,
        "witness": witness,
        "certificate": r.certificate,
        "marginal": r.marginal,
        "classes": None if r.classes is None else [int(c) for c in r.classes],
    }


def embed_result_from_json(doc: dict) -> EmbedResult:
    witness = doc.get("witness")
    if isinstance(witness, dict):
        witness = tree_from_json(witness)
    return EmbedResult(bool(_get(doc, "embeddable")), witness, doc.get("certificate"), bool(doc.get("marginal", False)), doc.get("classes"))


# -- homogeneity ---------------------------------------------------------------------


def partial_map_to_json(p: PartialMap) -> dict:
    return {"domain": list(p.domain), "image": list(p.image)}


def partial_map_from_json(doc: dict) -> PartialMap:
    return PartialMap(tuple(_get(doc, "domain", list)), tuple(_get(doc, "image", list)))


def report_to_json(r: HomogeneityReport) -> dict:
    return {
        "verdict": r.verdict,
        "witness": None if r.witness is None else partial_map_to_json(r.witness),
        "checked_k": r.checked_k,
        "isometry_group_size": r.isometry_group_size,
    }


def report_from_json(doc: dict) -> HomogeneityReport:
    w = doc.get("witness")
    return HomogeneityReport(
        bool(_get(doc, "verdict")),
        None if w is None else partial_map_from_json(w),
        int(_get(doc, "checked_k")),
        int(_get(doc, "isometry_group_size")),
    )


# -- fingerprints ----------------------------------------------------------------------


def vector_to_json(v: FingerprintVector) -> dict:
    return {"n": v.n, "entries": list(v.entries)}


def vector_from_json(doc: dict) -> FingerprintVector:
    return FingerprintVector(int(_get(doc, "n")), tuple(_get(doc, "entries", list)))


def fingerprint_set_to_json(s: FingerprintSet) -> dict:
    return {"n": s.n, "vectors": [list(v.entries) for v in s.vectors]}


def fingerprint_set_from_json(doc: dict) -> FingerprintSet:
    n = int(_get(doc, "n"))
    return FingerprintSet(n, tuple(FingerprintVector(n, tuple(v)) for v in _get(doc, "vectors", list)))


def membership_to_json(v: FingerprintVector, space: ModelSpace, r: Membership) -> dict:
    return {
        "vector": vector_to_json(v),
        "space": space_to_json(space),
        "member": r.member,
        "certificate": r.certificate,
        "embedding": None if r.result is None else embed_result_to_json(r.result),
    }


def nonclosed_to_json(r: NonclosedReport) -> dict:
    return {
        "valence": r.valence,
        "k": r.k,
        "eps": list(r.eps),
        "vectors": [vector_to_json(v) for v in r.vectors],
        "members": list(r.members),
        "limit": vector_to_json(r.limit),
        "limit_member": r.limit_member,
        "limit_certificate": r.limit_certificate,
        "gaps": list(r.gaps),
        "gap_exhibited": r.gap_exhibited,
        "message": r.message,
    }


def nonclosed_to_csv(r: NonclosedReport) -> str:
    """One row per vector (each comb vector, then the limit): eps, member, gap, entries."""
    out = _io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    names = [f"d{i}_{j}" for i in range(r.k) for j in range(i + 1, r.k)]
    writer.writerow(["eps", "member", "gap"] + names)
    for e, v, mem, gap in zip(r.eps, r.vectors, r.members, r.gaps):
        writer.writerow([repr(e), mem, repr(gap)] + [repr(x) for x in v.entries])
    writer.writerow([0.0, r.limit_member, 0.0] + [repr(x) for x in r.limit.entries])
    return out.getvalue()


# -- colorings ---------------------------------------------------------------------------


def coloring_to_json(c: EdgeColoring) -> dict:
    return {"n": c.n, "colors": [list(row) for row in c.colors], "bins": [{"lo": lo, "hi": hi} for lo, hi in c.bins]}


def coloring_from_json(doc: dict) -> EdgeColoring:
    try:
        bins = tuple((float(b["lo"]), float(b["hi"])) for b in doc.get("bins", []))
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad bins: {exc}") from exc
    return EdgeColoring(int(_get(doc, "n")), tuple(tuple(r) for r in _get(doc, "colors", list)), bins)


def clique_to_json(r: Optional[CliqueResult]) -> Optional[dict]:
    if r is None:
        return None
    return {"color": r.color, "subset": list(r.subset)}
