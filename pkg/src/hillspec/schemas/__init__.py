"""Bundled JSON schemas for the CLI artifacts, with a structural validator.

Every JSON document the command-line tool writes is checked against one
of these schemas before it reaches disk. The validator covers the
subset of JSON Schema the bundled files use: ``type``, ``enum``,
``const``, ``properties``, ``required``, ``additionalProperties``,
``items``, ``minItems``, ``maxItems``, ``minimum``, ``maximum``,
``oneOf``, and local ``$ref`` into ``$defs``.
"""

from __future__ import annotations

import json
from importlib import resources
from typing import Any

__all__ = ["SchemaError", "SCHEMA_NAMES", "load_schema", "validate_json"]

SCHEMA_NAMES = (
    "potential",
    "spectra",
    "portrait_summary",
    "criterion_report",
    "project_diagnostics",
    "expand_diagnostics",
    "validate_table",
)


class SchemaError(ValueError):
    """A JSON document does not match its schema."""


def load_schema(name: str) -> dict:
    """Load a bundled schema by bare name, e.g. ``load_schema("spectra")``."""
    if name not in SCHEMA_NAMES:
        raise KeyError(f"unknown schema {name!r}; available: {SCHEMA_NAMES}")
    text = (
        resources.files(__package__).joinpath(f"{name}.schema.json").read_text("utf-8")
    )
    return json.loads(text)


def _resolve(schema: dict, root: dict) -> dict:
    hops = 0
    while "$ref" in schema:
        ref = schema["$ref"]
        if not isinstance(ref, str) or not ref.startswith("#/"):
            raise SchemaError(f"only local $ref is supported, got {ref!r}")
        node: Any = root
        for part in ref[2:].split("/"):
            try:
                node = node[part]
            except (KeyError, TypeError) as exc:
                raise SchemaError(f"dangling $ref {ref!r}") from exc
        schema = node
        hops += 1
        if hops > 32:
            raise SchemaError(f"circular $ref chain at {ref!r}")
    return schema


def _type_ok(value: Any, tname: str) -> bool:
    if tname == "object":
        return isinstance(value, dict)
    if tname == "array":
        return isinstance(value, list)
    if tname == "string":
        return isinstance(value, str)
    if tname == "boolean":
        return isinstance(value, bool)
    if tname == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if tname == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if tname == "null":
        return value is None
    raise SchemaError(f"schema uses unsupported type {tname!r}")


def validate_json(
    value: Any,
    schema: dict,
    root: dict | None = None,
    path: str = "$",
) -> None:
    """Check ``value`` against ``schema``; raise SchemaError on mismatch."""
    if root is None:
        root = schema
    schema = _resolve(schema, root)

    if "oneOf" in schema:
        hits = 0
        for branch in schema["oneOf"]:
            try:
                validate_json(value, branch, root, path)
            except SchemaError:
                continue
            hits += 1
        if hits != 1:
            raise SchemaError(f"{path}: matched {hits} oneOf branches, need exactly 1")

    if "const" in schema and value != schema["const"]:
        raise SchemaError(f"{path}: expected const {schema['const']!r}, got {value!r}")
    if "enum" in schema and value not in schema["enum"]:
        raise SchemaError(f"{path}: {value!r} not in enum {schema['enum']!r}")

    if "type" in schema:
        types = schema["type"]
        if isinstance(types, str):
            types = [types]
        if not any(_type_ok(value, t) for t in types):
            raise SchemaError(f"{path}: expected type {types}, got {type(value).__name__}")

    if isinstance(value, (int, float)) and not isinstance(value, bool):
        if "minimum" in schema and value < schema["minimum"]:
            raise SchemaError(f"{path}: {value} below minimum {schema['minimum']}")
        if "maximum" in schema and value > schema["maximum"]:
            raise SchemaError(f"{path}: {value} above maximum {schema['maximum']}")

    if isinstance(value, dict):
        props = schema.get("properties", {})
        for key in schema.get("required", ()):
            if key not in value:
                raise SchemaError(f"{path}: missing required key {key!r}")
        extra = schema.get("additionalProperties", True)
        for key, sub in value.items():
            kpath = f"{path}.{key}"
            if key in props:
                validate_json(sub, props[key], root, kpath)
            elif extra is False:
                raise SchemaError(f"{kpath}: key not allowed by schema")
            elif isinstance(extra, dict):
                validate_json(sub, extra, root, kpath)

    if isinstance(value, list):
        if "minItems" in schema and len(value) < schema["minItems"]:
            raise SchemaError(f"{path}: fewer than {schema['minItems']} items")
        if "maxItems" in schema and len(value) > schema["maxItems"]:
            raise SchemaError(f"{path}: more than {schema['maxItems']} items")
        items = schema.get("items")
        if isinstance(items, dict):
            for i, sub in enumerate(value):
                validate_json(sub, items, root, f"{path}[{i}]")
