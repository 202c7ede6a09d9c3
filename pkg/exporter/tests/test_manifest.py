"""Manifest parsing and its error battery."""

import json

import pytest

pytest.importorskip("embedding_exporter")

from embedding_exporter.errors import CorruptInput
from embedding_exporter.manifest import load_manifest


def write_lines(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return path


class TestLoadManifest:
    def test_text_manifest(self, tmp_path):
        path = write_lines(
            tmp_path / "m.jsonl",
            [
                {"id": 0, "text": "a cat"},
                {"id": 1, "text": "a dog"},
            ],
        )
        entries = load_manifest(path)
        assert [e.id for e in entries] == [0, 1]
        assert [e.payload for e in entries] == ["a cat", "a dog"]
        assert all(e.kind == "text" for e in entries)

    def test_image_manifest(self, tmp_path):
        path = write_lines(
            tmp_path / "m.jsonl",
            [
                {"id": 3, "path": "imgs/red.png"},
                {"id": 4, "path": "imgs/blue.png"},
            ],
        )
        entries = load_manifest(path)
        assert [e.kind for e in entries] == ["image", "image"]
        assert entries[0].payload == "imgs/red.png"

    def test_ids_need_not_be_contiguous(self, tmp_path):
        path = write_lines(
            tmp_path / "m.jsonl",
            [{"id": 10, "text": "x"}, {"id": 2, "text": "y"}],
        )
        entries = load_manifest(path)
        assert [e.id for e in entries] == [10, 2]


class TestManifestErrors:
    def check(self, tmp_path, rows, needle):
        path = write_lines(tmp_path / "m.jsonl", rows)
        with pytest.raises(CorruptInput) as err:
            load_manifest(path)
        assert needle in str(err.value)
        assert err.value.path == str(path)

    def test_empty_file(self, tmp_path):
        self.check(tmp_path, [], "no entries")

    def test_blank_line(self, tmp_path):
        path = tmp_path / "m.jsonl"
        path.write_text('{"id": 0, "text": "a"}\n\n', encoding="utf-8")
        with pytest.raises(CorruptInput):
            load_manifest(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "m.jsonl"
        path.write_text("{not json}\n", encoding="utf-8")
        with pytest.raises(CorruptInput) as err:
            load_manifest(path)
        assert "line 1" in str(err.value)

    def test_non_object_line(self, tmp_path):
        self.check(tmp_path, [[1, 2, 3]], "line 1")

    def test_missing_id(self, tmp_path):
        self.check(tmp_path, [{"text": "a"}], "id")

    def test_bool_id_rejected(self, tmp_path):
        # bool is an int subclass; it must not slip through the id check.
        self.check(tmp_path, [{"id": True, "text": "a"}], "id")

    def test_duplicate_id(self, tmp_path):
        self.check(
            tmp_path,
            [{"id": 0, "text": "a"}, {"id": 0, "text": "b"}],
            "duplicate id",
        )

    def test_both_text_and_path(self, tmp_path):
        self.check(tmp_path, [{"id": 0, "text": "a", "path": "p.png"}], "exactly one")

    def test_neither_text_nor_path(self, tmp_path):
        self.check(tmp_path, [{"id": 0}], "exactly one")

    def test_empty_text(self, tmp_path):
        self.check(tmp_path, [{"id": 0, "text": ""}], "exactly one")

    def test_mixed_kinds(self, tmp_path):
        self.check(
            tmp_path,
            [{"id": 0, "text": "a"}, {"id": 1, "path": "p.png"}],
            "mix",
        )

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_manifest(tmp_path / "nope.jsonl")
