"""Input manifests: JSONL, one entry per output row.

Text manifests carry {"id": int, "text": str}; image manifests carry
{"id": int, "path": str}. A manifest holds exactly one kind — mixing
would silently interleave embedding spaces in the output matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import CorruptInput


@dataclass(frozen=True)
class ManifestEntry:
    id: int
    payload: str  # caption text, or image path
    kind: str  # "text" | "image"


def load_manifest(path) -> list[ManifestEntry]:
    entries: list[ManifestEntry] = []
    seen_ids: set[int] = set()
    kind: str | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                raise CorruptInput(path, f"line {lineno}: blank line")
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorruptInput(path, f"line {lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise CorruptInput(path, f"line {lineno}: expected a JSON object")
            entry_id = obj.get("id")
            if not isinstance(entry_id, int) or isinstance(entry_id, bool):
                raise CorruptInput(path, f'line {lineno}: missing or non-integer "id"')
            if entry_id in seen_ids:
                raise CorruptInput(path, f"line {lineno}: duplicate id {entry_id}")
            seen_ids.add(entry_id)

            has_text = isinstance(obj.get("text"), str) and obj["text"].strip()
            has_path = isinstance(obj.get("path"), str) and obj["path"].strip()
            if bool(has_text) == bool(has_path):
                raise CorruptInput(
                    path, f'line {lineno}: exactly one of "text" or "path" is required'
                )
            line_kind = "text" if has_text else "image"
            if kind is None:
                kind = line_kind
            elif kind != line_kind:
                raise CorruptInput(
                    path, f"line {lineno}: manifest mixes text and image entries"
                )
            entries.append(
                ManifestEntry(id=entry_id, payload=obj["text" if has_text else "path"], kind=line_kind)
            )
    if not entries:
        raise CorruptInput(path, "manifest holds no entries")
    return entries
