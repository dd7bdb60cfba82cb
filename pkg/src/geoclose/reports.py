"""Report model: canonical JSON as the single source of truth.

Every command emits one JSON document embedding the tool version, the
seed, a hash of the effective configuration and a hash of the parsed
input spec; identical inputs produce byte-identical documents.  The text
format is rendered from the JSON model by one fixed template walker.
"""

import hashlib
import json

from . import __version__


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_bytes(obj) -> bytes:
    return (canonical_json(obj) + "\n").encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest(obj) -> str:
    return sha256_hex(canonical_json(obj).encode("utf-8"))


def build_report(command, body, seed=None, config=None, spec=None) -> dict:
    report = {
        "tool": {"name": "geoclose", "version": __version__},
        "command": command,
        "seed": seed,
        "configHash": digest(config or {}),
        "specHash": digest(spec) if spec is not None else None,
    }
    report.update(body)
    return report


def _render(value, indent, lines):
    pad = "  " * indent
    if isinstance(value, dict):
        for key in sorted(value):
            item = value[key]
            if isinstance(item, (dict, list)):
                lines.append(f"{pad}{key}:")
                _render(item, indent + 1, lines)
            else:
                lines.append(f"{pad}{key}: {json.dumps(item, ensure_ascii=False)}")
    elif isinstance(value, list):
        if not value:
            lines.append(f"{pad}(none)")
        for i, item in enumerate(value):
            if isinstance(item, (dict, list)):
                lines.append(f"{pad}- [{i}]")
                _render(item, indent + 1, lines)
            else:
                lines.append(f"{pad}- {json.dumps(item, ensure_ascii=False)}")
    else:
        lines.append(f"{pad}{json.dumps(value, ensure_ascii=False)}")


def render_text(report) -> str:
    lines = [f"geoclose {report.get('command', '?')} report"]
    _render(report, 0, lines)
    return "\n".join(lines) + "\n"
