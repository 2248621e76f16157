"""Stent description files (JSON) and tabular result export.

File layout::

    {"version": "stentnet/1",
     "vertices": [{"id": "A", "position": [x, y, z]}, ...],
     "edges": [{"id": "e0", "tail": "A", "head": "B",
                "curve": {"kind": "straight"}
                       | {"kind": "arc", "center": [...], "axis": [...], "radius": r,
                          "angles": [phi0, phi1], "reference": [...]}
                       | {"kind": "polyline", "points": [[...], ...]},
                "material": {"mu": ..., "lam": ...},
                "cross_section": {"width": ..., "thickness": ...},
                "H": [[...], [...], [...]],            # instead of material/cross_section
                "load": {"kind": "constant", "value": [...]}
                      | {"kind": "polynomial", "coefficients": [[...], ...]}
                      | {"kind": "sampled", "s": [...], "values": [[...], ...]}}]}

Units are SI: m, Pa, N/m. Straight edges default to the segment between
their vertices; explicit ``start``/``end`` points may be given.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import ArcCurve, PolylineCurve, StraightCurve
from .graph import Edge, GraphError, StentGraph
from .loads import ZERO, ConstantLoad, PolynomialLoad, SampledLoad
from .rod import CrossSection, Material, RodProperties

FORMAT_VERSION = "stentnet/1"
DEFAULT_SAMPLES = 20


class StentFileError(ValueError):
    pass


class ParseError(StentFileError):
    """The file is not a well-formed stent description."""


class ValidationError(StentFileError):
    """The description parses but violates a model invariant."""


def _vec(x, where, n=3) -> np.ndarray:
    try:
        v = np.array(x, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{where}: expected {n} numbers") from None
    if v.shape != (n,):
        raise ParseError(f"{where}: expected {n} numbers, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{where}: non-finite value")
    return v


def _array(x, where, cols=3) -> np.ndarray:
    try:
        a = np.array(x, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{where}: expected rows of {cols} numbers") from None
    if a.ndim != 2 or a.shape[1] != cols:
        raise ParseError(f"{where}: expected rows of {cols} numbers")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{where}: non-finite value")
    return a


def _scalar(x, where) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"{where}: expected a number")
    if not math.isfinite(x):
        raise ValidationError(f"{where}: non-finite value")
    return float(x)


def _get(d, key, where):
    if not isinstance(d, dict):
        raise ParseError(f"{where}: expected an object")
    if key not in d:
        raise ParseError(f"{where}: missing '{key}'")
    return d[key]


def _curve(desc, a, b, where):
    kind = _get(desc, "kind", where)
    try:
        if kind == "straight":
            start = _vec(desc["start"], f"{where}.start") if "start" in desc else a
            end = _vec(desc["end"], f"{where}.end") if "end" in desc else b
            return StraightCurve(start, end)
        if kind == "arc":
            ref = desc.get("reference")
            angles = _array([_get(desc, "angles", where)], f"{where}.angles", 2)[0]
            return ArcCurve(_vec(_get(desc, "center", where), f"{where}.center"),
                            _vec(_get(desc, "axis", where), f"{where}.axis"),
                            _scalar(_get(desc, "radius", where), f"{where}.radius"),
                            angles, None if ref is None else _vec(ref, f"{where}.reference"))
        if kind == "polyline":
            return PolylineCurve(_array(_get(desc, "points", where), f"{where}.points"))
    except StentFileError:
        raise
    except ValueError as exc:
        raise ValidationError(f"{where}: {exc}") from None
    raise ParseError(f"{where}: unknown curve kind {kind!r}")


def _props(desc, where) -> RodProperties:
    try:
        if "H" in desc:
            return RodProperties(H=_array(desc["H"], f"{where}.H"))
        mat = _get(desc, "material", where)
        cs = _get(desc, "cross_section", where)
        return RodProperties(
            Material(_scalar(_get(mat, "mu", f"{where}.material"), f"{where}.material.mu"),
                     _scalar(_get(mat, "lam", f"{where}.material"), f"{where}.material.lam")),
            CrossSection(
                _scalar(_get(cs, "width", f"{where}.cross_section"), f"{where}.cross_section.width"),
                _scalar(_get(cs, "thickness", f"{where}.cross_section"),
                        f"{where}.cross_section.thickness")))
    except StentFileError:
        raise
    except ValueError as exc:
        raise ValidationError(f"{where}: bad material: {exc}") from None


def _load(desc, where):
    if desc is None:
        return ZERO
    kind = _get(desc, "kind", where)
    try:
        if kind == "constant":
            return ConstantLoad(_vec(_get(desc, "value", where), f"{where}.value"))
        if kind == "polynomial":
            return PolynomialLoad(_array(_get(desc, "coefficients", where), f"{where}.coefficients"))
        if kind == "sampled":
            s = _array([_get(desc, "s", where)], f"{where}.s", len(desc["s"]))[0]
            return SampledLoad(s, _array(_get(desc, "values", where), f"{where}.values"))
    except StentFileError:
        raise
    except ValueError as exc:
        raise ValidationError(f"{where}: {exc}") from None
    raise ParseError(f"{where}: unknown load kind {kind!r}")


def parse_stent(data) -> tuple[StentGraph, list]:
    """Build the graph and per-edge loads from an already decoded document."""
    if not isinstance(data, dict):
        raise ParseError("top level must be an object")
    version = data.get("version")
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported version {version!r} (expected {FORMAT_VERSION!r})")
    verts = _get(data, "vertices", "file")
    edges = _get(data, "edges", "file")
    if not isinstance(verts, list) or not isinstance(edges, list):
        raise ParseError("'vertices' and 'edges' must be lists")
    ids, pos = [], []
    for k, v in enumerate(verts):
        vid = str(_get(v, "id", f"vertices[{k}]"))
        if vid in ids:
            raise ValidationError(f"duplicate vertex id {vid!r}")
        ids.append(vid)
        pos.append(_vec(_get(v, "position", f"vertex {vid}"), f"vertex {vid}.position"))
    index = {vid: j for j, vid in enumerate(ids)}
    out, loads, seen = [], [], set()
    for k, e in enumerate(edges):
        eid = str(_get(e, "id", f"edges[{k}]"))
        where = f"edge {eid}"
        if eid in seen:
            raise ValidationError(f"duplicate edge id {eid!r}")
        seen.add(eid)
        ends = []
        for key in ("tail", "head"):
            ref = str(_get(e, key, where))
            if ref not in index:
                raise ValidationError(f"{where}: unknown {key} vertex {ref!r}")
            ends.append(index[ref])
        curve = _curve(_get(e, "curve", where), pos[ends[0]], pos[ends[1]], f"{where}.curve")
        out.append(Edge(ends[0], ends[1], curve, _props(e, where), eid))
        loads.append(_load(e.get("load"), f"{where}.load"))
    try:
        g = StentGraph(np.array(pos) if pos else np.zeros((0, 3)), out, ids)
    except GraphError as exc:
        raise ValidationError(str(exc)) from None
    return g, loads


def load_stent(path) -> tuple[StentGraph, list]:
    """Read and validate a stent description file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return parse_stent(data)


def _curve_spec(c) -> dict:
    if isinstance(c, StraightCurve):
        return {"kind": "straight", "start": c.a.tolist(), "end": c.b.tolist()}
    if isinstance(c, ArcCurve):
        d = {"kind": "arc", "center": c.center.tolist(), "axis": c.axis_input.tolist(),
             "radius": c.radius, "angles": list(c.angles)}
        if c.reference_input is not None:
            d["reference"] = c.reference_input.tolist()
        return d
    if isinstance(c, PolylineCurve):
        return {"kind": "polyline", "points": c.points.tolist()}
    raise TypeError(f"cannot serialize curve {type(c).__name__}")


def _load_spec(f):
    if f is None or f is ZERO:
        return None
    if isinstance(f, ConstantLoad):
        return {"kind": "constant", "value": f.value.tolist()}
    if isinstance(f, PolynomialLoad):
        return {"kind": "polynomial", "coefficients": f.coefficients.tolist()}
    if isinstance(f, SampledLoad):
        return {"kind": "sampled", "s": f.s.tolist(), "values": f.values.tolist()}
    raise TypeError(f"cannot serialize load {type(f).__name__}")


def stent_document(g: StentGraph, loads=None) -> dict:
    edges = []
    for i, e in enumerate(g.edges):
        d = {"id": e.name or f"e{i}", "tail": g.vertex_names[e.tail],
             "head": g.vertex_names[e.head], "curve": _curve_spec(e.curve)}
        p = e.props
        if p.H is not None:
            d["H"] = p.H.tolist()
        else:
            d["material"] = {"mu": p.material.mu, "lam": p.material.lam}
            d["cross_section"] = {"width": p.cross_section.width,
                                  "thickness": p.cross_section.thickness}
        desc = _load_spec(loads[i]) if loads is not None else None
        if desc is not None:
            d["load"] = desc
        edges.append(d)
    return {"version": FORMAT_VERSION,
            "vertices": [{"id": nm, "position": x.tolist()}
                         for nm, x in zip(g.vertex_names, g.vertices)],
            "edges": edges}


def atomic_write(path, text: str) -> None:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_stent(path, g: StentGraph, loads=None) -> None:
    # json writes floats with repr, which round-trips exactly
    atomic_write(path, json.dumps(stent_document(g, loads), indent=1) + "\n")


def fmt(x) -> str:
    return "%.17g" % (x + 0.0)  # no negative zero


@dataclass
class ResultBundle:
    """Sampled fields per edge plus scalar summary data."""

    edge_ids: list
    s: list                      # per edge, (k,)
    y: list                      # per edge, (k, 3)
    theta: list
    n: list
    alpha: np.ndarray
    beta: np.ndarray
    meta: dict = field(default_factory=dict)

    COLUMNS = ("edge_id", "s", "y1", "y2", "y3", "theta1", "theta2", "theta3", "n1", "n2", "n3")

    @classmethod
    def from_state(cls, state, samples: int = DEFAULT_SAMPLES, meta=None) -> "ResultBundle":
        g, mesh = state.graph, state.mesh
        ids, ss, ys, ts, ns = [], [], [], [], []
        for i, e in enumerate(g.edges):
            b = mesh.breaks[i]
            xi = (np.arange(samples) + 0.5) / samples
            s = (b[:-1, None] + np.diff(b)[:, None] * xi).ravel()
            ev = state.evaluate(i, s)
            ids.append(e.name or f"e{i}")
            ss.append(s)
            ys.append(ev["y"])
            ts.append(ev["theta"])
            ns.append(ev["n"])
        return cls(ids, ss, ys, ts, ns, np.asarray(state.alpha), np.asarray(state.beta),
                   dict(meta or {}))

    def table(self) -> str:
        lines = ["\t".join(self.COLUMNS)]
        for eid, s, y, t, n in zip(self.edge_ids, self.s, self.y, self.theta, self.n):
            for k in range(len(s)):
                row = [fmt(s[k])] + [fmt(v) for v in (*y[k], *t[k], *n[k])]
                lines.append("\t".join([eid] + row))
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        items = {"alpha": self.alpha, "beta": self.beta, **self.meta}
        return "".join(f"{k} = {format_value(v)}\n" for k, v in items.items())

    def write(self, out_dir, prefix: str = "") -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        fields_path = out_dir / f"{prefix}fields.tsv"
        summary_path = out_dir / f"{prefix}summary.txt"
        atomic_write(fields_path, self.table())
        atomic_write(summary_path, self.summary())
        return fields_path, summary_path


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    if isinstance(v, str):
        return v
    a = np.asarray(v, dtype=float).ravel()
    return " ".join(fmt(x) for x in a)
