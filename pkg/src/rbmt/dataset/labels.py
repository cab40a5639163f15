"""Wikidata entity labels with a local TSV cache (``qid<TAB>lang<TAB>label``)."""
from __future__ import annotations

import logging
import os
import re
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import requests

log = logging.getLogger(__name__)

DEFAULT_ENDPOINT = "https://www.wikidata.org/w/api.php"
ENDPOINT_ENV = "RBMT_WIKIDATA_ENDPOINT"
BATCH = 50  # wbgetentities id limit
_QID_RE = re.compile(r"Q[0-9]+")


@dataclass
class EndpointConfig:
    url: str = field(default_factory=lambda: os.environ.get(ENDPOINT_ENV, DEFAULT_ENDPOINT))
    min_interval: float = 1.0  # seconds between requests
    timeout: float = 30.0
    offline: bool = False


@dataclass
class FetchResult:
    labels: dict[str, str]
    status: dict[str, str]  # qid -> cached | fetched | missing | error


class LabelCache:
    """TSV-backed label table.  Writes are serialized and atomic; existing
    entries are never overwritten."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._labels: dict[tuple[str, str], str] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        with open(self.path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ValueError(f"{self.path}:{lineno}: expected qid<TAB>lang<TAB>label")
                self._labels.setdefault((parts[0], parts[1]), parts[2])

    def get(self, qid: str, lang: str) -> str | None:
        return self._labels.get((qid, lang))

    def __contains__(self, key: tuple[str, str]) -> bool:
        return key in self._labels

    def __len__(self) -> int:
        return len(self._labels)

    def merge(self, lang: str, labels: dict[str, str]) -> int:
        """Add new labels and persist; returns how many were new."""
        with self._lock:
            new = 0
            for qid, label in labels.items():
                if (qid, lang) not in self._labels:
                    self._labels[(qid, lang)] = label.replace("\t", " ").replace("\n", " ")
                    new += 1
            if new and self.path is not None:
                self._save()
            return new

    def _save(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=".labels-")
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            for (qid, lang), label in sorted(self._labels.items(), key=lambda kv: (_qid_key(kv[0][0]), kv[0][1])):
                fh.write(f"{qid}\t{lang}\t{label}\n")
        os.replace(tmp, self.path)


def _qid_key(qid: str) -> tuple[int, str]:
    return (int(qid[1:]), qid) if _QID_RE.fullmatch(qid) else (-1, qid)


def fetch_labels(qids: Iterable[str], lang: str, cache: LabelCache,
                 config: EndpointConfig | None = None,
                 session: requests.Session | None = None) -> FetchResult:
    """Labels for ``qids`` in ``lang``: cache first, then the wbgetentities API.

    Network failures do not raise; the affected QIDs get status ``error``.
    """
    config = config or EndpointConfig()
    labels: dict[str, str] = {}
    status: dict[str, str] = {}
    pending = []
    for qid in dict.fromkeys(qids):
        if not _QID_RE.fullmatch(qid):
            raise ValueError(f"not a QID: {qid!r}")
        cached = cache.get(qid, lang)
        if cached is not None:
            labels[qid] = cached
            status[qid] = "cached"
        else:
            pending.append(qid)
    if not pending:
        return FetchResult(labels, status)
    if config.offline:
        status.update({q: "missing" for q in pending})
        return FetchResult(labels, status)

    session = session or requests.Session()
    fetched: dict[str, str] = {}
    last = 0.0
    for start in range(0, len(pending), BATCH):
        batch = pending[start:start + BATCH]
        wait = config.min_interval - (time.monotonic() - last)
        if last and wait > 0:
            time.sleep(wait)
        last = time.monotonic()
        params = {"action": "wbgetentities", "format": "json", "props": "labels",
                  "languages": lang, "ids": "|".join(batch)}
        try:
            resp = session.get(config.url, params=params, timeout=config.timeout)
            resp.raise_for_status()
            entities = resp.json().get("entities", {})
        except (requests.RequestException, ValueError) as e:
            log.warning("label request failed for %d id(s): %s", len(batch), e)
            status.update({q: "error" for q in batch})
            continue
        for qid in batch:
            value = entities.get(qid, {}).get("labels", {}).get(lang, {}).get("value")
            if value is None:
                status[qid] = "missing"
            else:
                fetched[qid] = value
                status[qid] = "fetched"
    cache.merge(lang, fetched)
    labels.update(fetched)
    return FetchResult(labels, status)
