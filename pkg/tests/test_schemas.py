"""Bundled result schemas and the in-process validator."""

from __future__ import annotations

import pytest

from hillspec.schemas import SCHEMA_NAMES, SchemaError, load_schema, validate_json


def test_all_bundled_schemas_load():
    for name in SCHEMA_NAMES:
        schema = load_schema(name)
        assert schema.get("title") == name
        assert schema.get("type") == "object" or "oneOf" in schema


def test_potential_document_shapes():
    schema = load_schema("potential")
    validate_json({"fourier": {"0": [0.5, 0.0], "1": [0.0, 1.0]}}, schema)
    validate_json({"samples": [[1.0, 0.0], [0.0, 0.0]]}, schema)
    validate_json({"preset": "mathieu", "parameter": [0.5, 0.0]}, schema)
    # exactly one shape may match
    with pytest.raises(SchemaError):
        validate_json({"fourier": {}, "samples": [[1.0, 0.0]]}, schema)
    with pytest.raises(SchemaError):
        validate_json({"preset": "unknown-name"}, schema)
    with pytest.raises(SchemaError):
        validate_json({"samples": []}, schema)


def test_validator_rejects_bool_as_number():
    schema = {"type": "object", "properties": {"x": {"type": "number"}}, "required": ["x"]}
    validate_json({"x": 1.5}, schema)
    with pytest.raises(SchemaError):
        validate_json({"x": True}, schema)


def test_validator_enforces_required_and_extra_keys():
    schema = {
        "type": "object",
        "properties": {"a": {"type": "string"}},
        "required": ["a"],
        "additionalProperties": False,
    }
    validate_json({"a": "ok"}, schema)
    with pytest.raises(SchemaError):
        validate_json({}, schema)
    with pytest.raises(SchemaError):
        validate_json({"a": "ok", "b": 1}, schema)


def test_validator_checks_enum_bounds_and_items():
    schema = {
        "type": "object",
        "properties": {
            "kind": {"enum": ["one", "two"]},
            "xs": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
        },
        "required": ["kind", "xs"],
    }
    validate_json({"kind": "one", "xs": [0.0, 2.5]}, schema)
    with pytest.raises(SchemaError):
        validate_json({"kind": "three", "xs": [1.0]}, schema)
    with pytest.raises(SchemaError):
        validate_json({"kind": "one", "xs": []}, schema)
    with pytest.raises(SchemaError):
        validate_json({"kind": "one", "xs": [-1.0]}, schema)


def test_validator_resolves_local_refs():
    schema = {
        "type": "object",
        "properties": {"z": {"$ref": "#/$defs/complex"}},
        "required": ["z"],
        "$defs": {
            "complex": {
                "type": "array",
                "items": {"type": "number"},
                "minItems": 2,
                "maxItems": 2,
            }
        },
    }
    validate_json({"z": [1.0, -2.0]}, schema)
    with pytest.raises(SchemaError):
        validate_json({"z": [1.0]}, schema)


def test_unknown_schema_name_raises():
    with pytest.raises(KeyError):
        load_schema("not-a-schema")
