"""JSON schemas for every artifact the command-line tool writes.

Shipped with the package so that consumers (and the test suite) can
validate artifacts structurally; all schemas share the manifest core.
"""

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["command", "argv", "parameters", "generator",
                 "precision_bits", "precision_cap", "library_version",
                 "timestamp", "input_digests"],
    "properties": {
        "command": {"type": "string"},
        "argv": {"type": "array", "items": {"type": "string"}},
        "parameters": {"type": "object"},
        "seed": {"type": ["integer", "null"]},
        "generator": {"type": "string"},
        "precision_bits": {"type": "integer"},
        "precision_cap": {"type": "integer"},
        "library_version": {"type": "string"},
        "timestamp": {"type": "string"},
        "input_digests": {"type": "object"},
    },
}

_CERTREAL = {
    "type": "object",
    "oneOf": [
        {"required": ["exact"]},
        {"required": ["lo", "hi", "bits"]},
    ],
}

SNAPSHOT_SCHEMA = {
    "type": "object",
    "required": ["manifest", "snapshot", "counts"],
    "properties": {
        "manifest": MANIFEST_SCHEMA,
        "snapshot": {
            "type": "object",
            "required": ["system", "X", "entries"],
            "properties": {
                "system": {"type": "object", "required": ["provenance", "count", "primes"]},
                "X": _CERTREAL,
                "entries": {"type": "array"},
            },
        },
        "counts": {
            "type": "object",
            "required": ["N", "pi"],
        },
    },
}

CONDITIONS_SCHEMA = {
    "type": "object",
    "required": ["manifest", "reports"],
    "properties": {
        "manifest": MANIFEST_SCHEMA,
        "reports": {"type": "object"},
    },
}

ZETA_SCHEMA = {
    "type": "object",
    "required": ["manifest", "evaluations"],
    "properties": {
        "manifest": MANIFEST_SCHEMA,
        "evaluations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["s", "value", "cutoff", "tail", "rigorous", "kind"],
            },
        },
    },
}

PERTURB_SCHEMA = {
    "type": "object",
    "required": ["manifest", "params", "primes", "certificate", "steps"],
    "properties": {
        "manifest": MANIFEST_SCHEMA,
        "primes": {"type": "array"},
        "certificate": {
            "type": "object",
            "required": ["exponent", "min_margin", "verified_range", "valid"],
        },
        "steps": {"type": "array"},
    },
}

SAMPLE_SCHEMA = {
    "type": "object",
    "required": ["manifest", "system", "box_property", "events",
                 "deviations", "gap_audit", "density"],
    "properties": {
        "manifest": MANIFEST_SCHEMA,
        "system": {"type": "object"},
        "box_property": {"type": "boolean"},
        "events": {"type": "object", "required": ["A", "B", "removed_indices"]},
        "deviations": {"type": "array"},
        "gap_audit": {"type": ["object", "null"]},
        "density": {"type": ["object", "null"]},
    },
}

DIOPH_SCHEMA = {
    "type": "object",
    "required": ["manifest", "target", "best", "mu"],
    "properties": {
        "manifest": MANIFEST_SCHEMA,
        "best": {"type": "array"},
        "mu": {"type": ["object", "null"]},
    },
}

HELSON_SCHEMA = {
    "type": "object",
    "required": ["manifest", "report"],
    "properties": {
        "manifest": MANIFEST_SCHEMA,
        "report": {
            "type": "object",
            "required": ["epsilon", "euler_partials", "mobius_partials",
                         "defects", "evaluations"],
        },
    },
}

ARTIFACT_SCHEMAS = {
    "gen": SNAPSHOT_SCHEMA,
    "conditions": CONDITIONS_SCHEMA,
    "zeta": ZETA_SCHEMA,
    "perturb": PERTURB_SCHEMA,
    "sample": SAMPLE_SCHEMA,
    "dioph": DIOPH_SCHEMA,
    "helson": HELSON_SCHEMA,
}


def validate_artifact(kind: str, payload: dict) -> None:
    """Raise if the payload does not match the shipped schema."""
    import jsonschema

    jsonschema.validate(payload, ARTIFACT_SCHEMAS[kind])
