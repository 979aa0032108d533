"""Shared helpers: canonical JSON, content digests, UTC timestamps."""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from typing import Any


def canonical_json(value: Any) -> str:
    """Serialize to a stable JSON form (sorted keys, no whitespace).

    Used wherever byte-stable output matters: content digests, journal
    records, and report determinism.
    """
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def content_digest(value: Any) -> str:
    """sha256 hex digest of the canonical JSON form of ``value``."""
    return hashlib.sha256(canonical_json(value).encode("utf-8")).hexdigest()


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def bytes_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def utc_now_iso() -> str:
    """Current UTC time, fixed-width ISO form (lexicographically ordered)."""
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")
