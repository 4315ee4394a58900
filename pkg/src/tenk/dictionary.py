"""Item title alias dictionary: load, validate, and query.

The dictionary is a versioned YAML file users can extend without touching
code. Every canonical item must be present with the SEC title; extra
aliases accumulate as the review workflow surfaces new wordings.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

from .errors import DictError
from .schema import ALL_ITEMS, ItemId


@dataclass(frozen=True)
class KeywordDictionary:
    """Alias patterns per item; the canonical title is always aliases[0]."""

    entries: dict[ItemId, tuple[str, ...]]
    version: str

    def aliases_for(self, item: ItemId) -> tuple[str, ...]:
        return self.entries[item]

    def title_for(self, item: ItemId) -> str:
        return self.entries[item][0]


def _validate(entries: dict[ItemId, tuple[str, ...]], version: str) -> KeywordDictionary:
    for item in ALL_ITEMS:
        if item not in entries:
            raise DictError(f"dictionary is missing Item {item}")
        if not entries[item] or not all(a.strip() for a in entries[item]):
            raise DictError(f"Item {item} has an empty alias list or blank alias")
    return KeywordDictionary(entries=entries, version=version)


def _from_mapping(data: dict) -> KeywordDictionary:
    if not isinstance(data, dict) or "items" not in data:
        raise DictError("dictionary file must be a mapping with an 'items' list")
    entries: dict[ItemId, tuple[str, ...]] = {}
    for record in data["items"]:
        try:
            item = ItemId(str(record["item"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise DictError(f"bad item record {record!r}: {exc}") from exc
        title = str(record.get("title", "")).strip()
        if not title:
            raise DictError(f"Item {item} has no title")
        if "part" in record and int(record["part"]) != item.part:
            raise DictError(
                f"Item {item} declared in part {record['part']} but belongs to part {item.part}"
            )
        aliases = [title] + [str(a) for a in (record.get("aliases") or [])]
        if item in entries:
            raise DictError(f"duplicate record for Item {item}")
        entries[item] = tuple(dict.fromkeys(aliases))
    return _validate(entries, version=str(data.get("version", "unversioned")))


def load_dictionary(path: Path | str) -> KeywordDictionary:
    """Load and validate a dictionary file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DictError(f"cannot read dictionary {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise DictError(f"unparseable dictionary {path}: {exc}") from exc
    return _from_mapping(data)


def default_dictionary() -> KeywordDictionary:
    """The dictionary shipped with the package."""
    text = resources.files("tenk.data").joinpath("dictionary.yaml").read_text("utf-8")
    return _from_mapping(yaml.safe_load(text))
