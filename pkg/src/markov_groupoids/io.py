"""JSON input formats and CSV/text output helpers."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .errors import SchemaError
from .groupoid import (
    ActionSpec,
    FiniteGroupoid,
    PartitionSpec,
    build_action_groupoid,
    build_pair_groupoid,
    build_table_groupoid,
)
from .measures import FibredSystem

GROUPOID_KINDS = ("action", "pair", "table")


def load_json(path: str | Path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _require(doc: Mapping, key: str, where: str) -> Any:
    if not isinstance(doc, Mapping) or key not in doc:
        raise SchemaError(f"{where}: missing key {key!r}")
    return doc[key]


def parse_groupoid(doc: Mapping) -> FiniteGroupoid:
    kind = _require(doc, "kind", "groupoid")
    if kind == "action":
        return build_action_groupoid(ActionSpec(_require(doc, "group", "groupoid"),
                                                _require(doc, "action", "groupoid")))
    if kind == "pair":
        return build_pair_groupoid(PartitionSpec(_require(doc, "blocks", "groupoid")))
    if kind == "table":
        return build_table_groupoid(
            *(_require(doc, k, "groupoid") for k in ("source", "target", "compose", "unit", "inverse"))
        )
    raise SchemaError(f"unknown groupoid kind {kind!r}; expected one of {GROUPOID_KINDS}")


def groupoid_to_doc(G: FiniteGroupoid) -> dict:
    if G.kind == "action":
        spec: ActionSpec = G.spec
        return {"kind": "action", "group": [list(r) for r in spec.group],
                "action": [list(r) for r in spec.action]}
    if G.kind == "pair":
        return {"kind": "pair", "blocks": [list(b) for b in G.spec.blocks]}
    return G.to_table()


def parse_mass(entry: Sequence, exact: bool, where: str):
    """``[key, num, den]`` or ``[key, value]``; returns ``(key, mass)``."""
    if not isinstance(entry, (list, tuple)) or len(entry) not in (2, 3):
        raise SchemaError(f"{where}: mass entry {entry!r} must be [key, num, den] or [key, value]")
    key = entry[0]
    if len(entry) == 3:
        num, den = entry[1], entry[2]
        if not (isinstance(num, int) and isinstance(den, int)) or isinstance(num, bool) or den == 0:
            raise SchemaError(f"{where}: numerator/denominator must be integers with den != 0")
        value: Any = Fraction(num, den)
    else:
        raw = entry[1]
        if isinstance(raw, bool):
            raise SchemaError(f"{where}: invalid mass {raw!r}")
        if isinstance(raw, int):
            value = Fraction(raw)
        elif isinstance(raw, str):
            try:
                value = Fraction(raw)
            except ValueError:
                raise SchemaError(f"{where}: invalid mass {raw!r}") from None
        elif isinstance(raw, float):
            if exact:
                raise SchemaError(f"{where}: float mass {raw!r} not allowed in exact mode")
            value = raw
        else:
            raise SchemaError(f"{where}: invalid mass {raw!r}")
    if value < 0:
        raise SchemaError(f"{where}: negative mass for {key!r}")
    return key, (value if exact else float(value))


def parse_masses(entries: Iterable, exact: bool, where: str) -> dict:
    out: dict = {}
    if not isinstance(entries, list):
        raise SchemaError(f"{where}: masses must be a list")
    for e in entries:
        k, v = parse_mass(e, exact, where)
        if isinstance(k, list):
            k = tuple(k)
        out[k] = out.get(k, 0) + v
    return out


def parse_system(doc: Mapping, G: FiniteGroupoid, exact: bool = True) -> FibredSystem:
    entries = _require(doc, "system", "system file")
    fibres: list[dict] = [{} for _ in G.objects]
    seen = set()
    for item in entries:
        x = _require(item, "object", "system entry")
        if not isinstance(x, int) or not 0 <= x < G.n_objects:
            raise SchemaError(f"system entry: object {x!r} out of range")
        if x in seen:
            raise SchemaError(f"system entry: object {x} listed twice")
        seen.add(x)
        masses = parse_masses(_require(item, "masses", "system entry"), exact, f"object {x}")
        for g in masses:
            if not isinstance(g, int):
                raise SchemaError(f"object {x}: morphism id {g!r} is not an integer")
        fibres[x] = masses
    return FibredSystem(G, fibres)


def fmt(v) -> str:
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else str(v.numerator)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _mass_entry(k, v) -> list:
    if isinstance(v, Fraction):
        return [k, v.numerator, v.denominator]
    if isinstance(v, int):
        return [k, v, 1]
    return [k, v]


def system_to_doc(system: FibredSystem) -> dict:
    return {
        "system": [
            {"object": x, "masses": [_mass_entry(g, v) for g, v in sorted(m.items())]}
            for x, m in enumerate(system.fibres)
        ]
    }


def parse_theta(doc: Mapping, n_points: int, exact: bool = True) -> list[dict]:
    """``{"theta": [{"point": x, "masses": [[h, num, den], ...]}, ...]}``."""
    entries = _require(doc, "theta", "theta file")
    theta: list[dict | None] = [None] * n_points
    for item in entries:
        x = _require(item, "point", "theta entry")
        if not isinstance(x, int) or not 0 <= x < n_points:
            raise SchemaError(f"theta entry: point {x!r} out of range")
        theta[x] = parse_masses(_require(item, "masses", "theta entry"), exact, f"point {x}")
    missing = [x for x, t in enumerate(theta) if t is None]
    if missing:
        raise SchemaError(f"theta file: no measure for points {missing}")
    return theta  # type: ignore[return-value]


def parse_measure_literal(text: str, exact: bool = True) -> dict:
    try:
        entries = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"measure literal is not JSON: {exc}") from None
    return parse_masses(entries, exact, "measure literal")


def parse_number_list(text: str, exact: bool = True) -> list:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not a JSON list: {exc}") from None
    if not isinstance(raw, list):
        raise SchemaError("expected a JSON list of numbers")
    out = []
    for v in raw:
        _, val = parse_mass(["_", v], exact, "number list")
        out.append(val)
    return out


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def measure_csv(mu: Mapping, key_name: str = "morphismId") -> str:
    return csv_text((key_name, "mass"), sorted(mu.items(), key=lambda kv: (str(type(kv[0])), kv[0])))


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")
