"""Document ingestion: HTML text extraction, sentence splitting, bundled topics.

Extraction uses a tolerant tag scanner (the stdlib HTMLParser), not a
validating parser, so malformed markup degrades gracefully. Block-level
boundaries are kept as newlines so that headings and bullet fragments stay
separate from running prose; the sentence splitter treats those newlines as
hard boundaries.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from dataclasses import dataclass
from html.parser import HTMLParser
from importlib import resources
from pathlib import Path
from typing import Iterable

import requests

from .errors import (
    ArgumentError,
    EmptyExtractionError,
    FetchPolicyError,
    HttpStatusError,
    IntegrityError,
    TransportError,
)

DEFAULT_MIN_TOKENS = 3

_SKIP_CONTENT_TAGS = {"script", "style", "noscript"}
_BLOCK_TAGS = {
    "p", "div", "li", "ul", "ol", "dl", "dt", "dd", "br", "hr",
    "h1", "h2", "h3", "h4", "h5", "h6",
    "table", "tr", "td", "th", "thead", "tbody",
    "section", "article", "aside", "header", "footer", "nav",
    "blockquote", "pre", "form", "title",
}


@dataclass(frozen=True)
class Sentence:
    id: int
    text: str


@dataclass(frozen=True)
class Document:
    source: str
    raw_html: str | None
    sentences: tuple[Sentence, ...]

    @property
    def texts(self) -> list[str]:
        return [s.text for s in self.sentences]


class _TextExtractor(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self._skip_depth = 0
        self._saw_body = False
        self._in_body = False
        self._all: list[str] = []
        self._body: list[str] = []

    def _emit(self, chunk: str) -> None:
        self._all.append(chunk)
        if self._in_body:
            self._body.append(chunk)

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_CONTENT_TAGS:
            self._skip_depth += 1
            return
        if tag == "body":
            self._saw_body = True
            self._in_body = True
            return
        if tag in _BLOCK_TAGS:
            self._emit("\n")

    def handle_startendtag(self, tag, attrs):
        if tag in _BLOCK_TAGS:
            self._emit("\n")

    def handle_endtag(self, tag):
        if tag in _SKIP_CONTENT_TAGS:
            self._skip_depth = max(0, self._skip_depth - 1)
            return
        if tag == "body":
            self._in_body = False
            return
        if tag in _BLOCK_TAGS:
            self._emit("\n")

    def handle_data(self, data):
        if self._skip_depth == 0 and data:
            self._emit(data)

    def text(self) -> str:
        raw = "".join(self._body if self._saw_body else self._all)
        raw = re.sub(r"[ \t\r\f\v]+", " ", raw)
        raw = re.sub(r" ?\n ?", "\n", raw)
        raw = re.sub(r"\n+", "\n", raw)
        return raw.strip()


def extract_text(html: str) -> str:
    """Pull the visible text out of (possibly malformed) HTML.

    Drops script/style/noscript content and comments, decodes character
    entities, keeps only the body when a body tag exists, and collapses
    whitespace runs. Block-element boundaries survive as single newlines.
    """
    parser = _TextExtractor()
    parser.feed(html)
    parser.close()
    return parser.text()


# Terminators split only when a trailing run is followed by whitespace or
# the end of the line, so decimals like 2.3 never produce a boundary.
_BOUNDARY_RE = re.compile(r"[.!?]+(?=\s|$)")
_TOKEN_RE = re.compile(r"[A-Za-z0-9]+")
_URL_RE = re.compile(r"(?:https?://|\bwww\.)\S+", re.IGNORECASE)
_BULLET_RE = re.compile(r"^\s*(?:[•·‣▪●*\-–—]+|\(?\d{1,3}[.)])\s+")

# Fixed abbreviation list: a trailing "." after these never ends a sentence.
ABBREVIATIONS = frozenset(
    ["e.g", "i.e", "etc", "mr", "mrs", "ms", "dr", "prof", "st", "no", "vs",
     "inc", "ltd", "fig", "et", "al", "approx"]
)

_CHAR_NORMALIZATIONS = {
    " ": " ",   # no-break space
    "‘": "'", "’": "'", "‚": "'",
    "“": '"', "”": '"', "„": '"',
    "–": "-", "—": "-", "−": "-",
    "…": "...",
}


def _normalize_punctuation(text: str) -> str:
    for src, dst in _CHAR_NORMALIZATIONS.items():
        text = text.replace(src, dst)
    # control characters other than newline carry no text content
    return re.sub(r"[\x00-\x09\x0b-\x1f\x7f]", " ", text)


def _word_before(line: str, dot_index: int) -> str:
    start = dot_index
    while start > 0 and (line[start - 1].isalpha() or line[start - 1] == "."):
        start -= 1
    return line[start:dot_index].lower().strip(".")


def _split_line(line: str) -> Iterable[str]:
    start = 0
    for match in _BOUNDARY_RE.finditer(line):
        if match.group().startswith(".") and _word_before(line, match.start()) in ABBREVIATIONS:
            continue
        yield line[start:match.end()]
        start = match.end()
    tail = line[start:]
    if tail.strip():
        yield tail


def split_sentences(text: str, min_tokens: int = DEFAULT_MIN_TOKENS) -> list[Sentence]:
    """Segment cleaned text into sentences.

    Splits on terminator runs followed by whitespace (guarding a fixed set
    of abbreviations; decimals never match), treats newlines as hard
    boundaries, strips bullets and links, and drops fragments with fewer
    than ``min_tokens`` alphanumeric tokens.
    """
    text = _normalize_punctuation(text)
    text = _URL_RE.sub(" ", text)
    sentences: list[Sentence] = []
    for line in text.split("\n"):
        line = _BULLET_RE.sub("", line)
        for fragment in _split_line(line):
            cleaned = re.sub(r"\s+", " ", fragment).strip()
            if len(_TOKEN_RE.findall(cleaned)) < min_tokens:
                continue
            sentences.append(Sentence(id=len(sentences), text=cleaned))
    return sentences


_TOPICS_RESOURCE = "gdpr_topics.json"
_TOPICS_SHA256 = "68a76f8188bcd17b6866d46124243cbc77f6b9db7c8d91a76d17ca5322869dfa"


@dataclass(frozen=True)
class GdprTopics:
    """The 14 privacy-notice topics with their combined sample sentences."""

    entries: tuple[tuple[str, str], ...]  # (topic_header, combined_sentence)

    @property
    def headers(self) -> list[str]:
        return [header for header, _ in self.entries]

    @property
    def combined_sentences(self) -> list[str]:
        return [combined for _, combined in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def _load_topics_bytes(raw: bytes, expected_sha256: str) -> GdprTopics:
    digest = hashlib.sha256(raw).hexdigest()
    if digest != expected_sha256:
        raise IntegrityError(
            f"topic asset checksum {digest} does not match expected {expected_sha256}"
        )
    records = json.loads(raw.decode("utf-8"))
    entries = tuple((rec["topic_header"], rec["combined_sentence"]) for rec in records)
    if len(entries) != 14:
        raise IntegrityError(f"topic asset holds {len(entries)} entries, expected 14")
    return GdprTopics(entries=entries)


def load_gdpr_topics() -> GdprTopics:
    """Load the bundled 14-topic asset, verifying its pinned checksum."""
    raw = resources.files("policysum.data").joinpath(_TOPICS_RESOURCE).read_bytes()
    return _load_topics_bytes(raw, _TOPICS_SHA256)


_host_last_fetch: dict[str, float] = {}
_POLITENESS_SECONDS = 0.5
_MAX_REDIRECTS = 5


def _fetch_url(url: str, timeout: float) -> str:
    host = re.sub(r"^https?://", "", url).split("/", 1)[0]
    elapsed = time.monotonic() - _host_last_fetch.get(host, -1e9)
    if elapsed < _POLITENESS_SECONDS:
        time.sleep(_POLITENESS_SECONDS - elapsed)
    session = requests.Session()
    session.max_redirects = _MAX_REDIRECTS
    try:
        response = session.get(url, timeout=timeout)
    except requests.RequestException as exc:
        raise TransportError(f"fetch of {url} failed: {exc}", url) from exc
    finally:
        _host_last_fetch[host] = time.monotonic()
    if response.status_code != 200:
        raise HttpStatusError(
            f"fetch of {url} returned status {response.status_code}", response.status_code
        )
    return response.text


def fetch_document(
    source: str,
    fetch_policy: str = "fixture-only",
    min_tokens: int = DEFAULT_MIN_TOKENS,
    timeout: float = 30.0,
) -> Document:
    """Retrieve a source, extract its text, and split it into sentences.

    Under the fixture-only policy the source must resolve to a local file;
    URLs are rejected. The live policy fetches http(s) URLs with at most
    five redirects and a per-host politeness delay.
    """
    if fetch_policy not in ("fixture-only", "live"):
        raise ArgumentError(f"unknown fetch policy {fetch_policy!r}")
    is_url = bool(re.match(r"^https?://", str(source), re.IGNORECASE))
    if is_url:
        if fetch_policy == "fixture-only":
            raise FetchPolicyError(
                f"{source} is a URL but the fetch policy is fixture-only"
            )
        raw = _fetch_url(str(source), timeout)
    else:
        path = Path(source)
        if not path.is_file():
            raise FetchPolicyError(f"{source} does not resolve to a local file")
        raw = path.read_text(encoding="utf-8", errors="replace")
    text = extract_text(raw)
    sentences = split_sentences(text, min_tokens=min_tokens)
    if not sentences:
        raise EmptyExtractionError(f"{source} yielded no sentences")
    return Document(source=str(source), raw_html=raw, sentences=tuple(sentences))
