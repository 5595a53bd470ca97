"""Tool descriptors: the unit everything downstream scans, hashes, and pins.

Input schemas model named parameters with scalar JSON types (string,
integer, number, boolean); nested object schemas are carried opaquely.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

SCALAR_TYPES = frozenset({"string", "integer", "number", "boolean"})


class InvalidDescriptor(ValueError):
    """A tool descriptor violates its invariants."""


@dataclass(frozen=True)
class ToolDescriptor:
    """A server-advertised tool.

    ``server_id`` is empty until the gateway assigns it at admission;
    ``alias`` keeps the original unqualified name once the gateway renames
    the tool for exposure.
    """

    name: str
    description: str = ""
    input_schema: dict[str, Any] = field(default_factory=dict)
    server_id: str = ""
    alias: str = ""

    def __post_init__(self) -> None:
        validate_descriptor(self)

    def parameters(self) -> dict[str, dict[str, Any]]:
        """Named parameter specs from the schema ({} when unschematized)."""
        props = self.input_schema.get("properties")
        return props if isinstance(props, dict) else {}

    def parameter_type(self, param: str) -> str | None:
        spec = self.parameters().get(param)
        if isinstance(spec, dict):
            t = spec.get("type")
            return t if isinstance(t, str) else None
        return None

    def forwarding_name(self) -> str:
        """Name to use on the wire toward the origin server."""
        return self.alias or self.name


def validate_descriptor(t: ToolDescriptor) -> None:
    if not t.name or any(c.isspace() for c in t.name):
        raise InvalidDescriptor(f"tool name must be non-empty without whitespace: {t.name!r}")
    props = t.input_schema.get("properties")
    if props is not None and not isinstance(props, dict):
        raise InvalidDescriptor("input_schema.properties must be an object keyed by parameter name")


def schema_for(params: dict[str, str], required: list[str] | None = None,
               descriptions: dict[str, str] | None = None) -> dict[str, Any]:
    """Build a parameter schema from name -> scalar type."""
    for name, typ in params.items():
        if typ not in SCALAR_TYPES:
            raise InvalidDescriptor(f"parameter {name!r} has non-scalar type {typ!r}")
    properties: dict[str, Any] = {}
    for name, typ in params.items():
        spec: dict[str, Any] = {"type": typ}
        if descriptions and name in descriptions:
            spec["description"] = descriptions[name]
        properties[name] = spec
    return {"type": "object", "properties": properties, "required": sorted(required or [])}


def descriptor_to_wire(t: ToolDescriptor) -> dict[str, Any]:
    return {"name": t.name, "description": t.description, "inputSchema": t.input_schema}


def descriptor_from_wire(obj: dict[str, Any]) -> ToolDescriptor:
    name = obj.get("name")
    if not isinstance(name, str):
        raise InvalidDescriptor("wire descriptor lacks a string name")
    schema = obj.get("inputSchema", obj.get("input_schema", {}))
    if not isinstance(schema, dict):
        raise InvalidDescriptor("inputSchema must be an object")
    description = obj.get("description", "")
    if not isinstance(description, str):
        raise InvalidDescriptor("description must be a string")
    return ToolDescriptor(name=name, description=description, input_schema=schema)


def qualify(t: ToolDescriptor, namespace: str) -> ToolDescriptor:
    """Rename ``t`` under its server namespace, keeping the original as alias."""
    return replace(t, name=f"{namespace}.{t.name}", server_id=namespace, alias=t.name)
