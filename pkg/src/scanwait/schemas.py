"""Shipped JSON schemas and a small structural validator.

The CLI's JSON outputs are promised to match the schema files under
``scanwait/schemas/``.  The validator covers the subset of JSON Schema the
shipped files use (type, properties, required, items, enum, additional
properties) so the promise can be tested without an external dependency.
"""

from __future__ import annotations

import json
from importlib import resources

_TYPES = {
    "object": dict,
    "array": list,
    "string": str,
    "boolean": bool,
    "null": type(None),
}


class SchemaViolation(ValueError):
    pass


def load_schema(name: str) -> dict:
    """Load a shipped schema by bare name, e.g. 'window_stats'."""
    ref = resources.files("scanwait") / "schemas" / f"{name}.schema.json"
    return json.loads(ref.read_text(encoding="utf-8"))


def validate(obj, schema: dict, path: str = "$") -> None:
    """Raise SchemaViolation when ``obj`` does not match ``schema``."""
    types = schema.get("type")
    if types is not None:
        allowed = (types,) if isinstance(types, str) else tuple(types)
        ok = False
        for t in allowed:
            if t == "number":
                ok = ok or (isinstance(obj, (int, float)) and not isinstance(obj, bool))
            elif t == "integer":
                ok = ok or (isinstance(obj, int) and not isinstance(obj, bool))
            else:
                ok = ok or isinstance(obj, _TYPES[t])
        if not ok:
            raise SchemaViolation(f"{path}: expected type {types}, got {type(obj).__name__}")
    if "enum" in schema and obj not in schema["enum"]:
        raise SchemaViolation(f"{path}: {obj!r} not in {schema['enum']}")
    if isinstance(obj, dict):
        for key in schema.get("required", []):
            if key not in obj:
                raise SchemaViolation(f"{path}: missing required key {key!r}")
        props = schema.get("properties", {})
        for key, sub in props.items():
            if key in obj:
                validate(obj[key], sub, f"{path}.{key}")
        if schema.get("additionalProperties") is False:
            extra = set(obj) - set(props)
            if extra:
                raise SchemaViolation(f"{path}: unexpected keys {sorted(extra)}")
    if isinstance(obj, list) and "items" in schema:
        for i, item in enumerate(obj):
            validate(item, schema["items"], f"{path}[{i}]")
