"""LLM client interface, an HTTP implementation and a scriptable stub.

The stub reads a playbook (YAML file or mapping)::

    responses:            # exact prompt match by sha256 hex digest
      3f2a...: "MATCH (n) RETURN count(n)"
    rules:                # first rule whose substring occurs in the prompt
      - contains: "electric motor"
        replies: ["CREATE ...", "CREATE ..."]   # consumed in order, last repeats
      - contains: "Answer the question"
        reply: $echo                            # returns the prompt itself
    default: null         # reply when nothing matches; absent -> LlmError
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Protocol, Union, runtime_checkable

import yaml

logger = logging.getLogger(__name__)

ECHO = "$echo"


class LlmError(RuntimeError):
    """Transport failure, bad response or (for the stub) an unscripted prompt."""


@dataclass(frozen=True)
class Completion:
    text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0


@runtime_checkable
class LlmClient(Protocol):
    model: str

    def complete(self, prompt: str, temperature: float = 0.0, max_tokens: int = 512) -> Completion: ...


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def _count_tokens(text: str) -> int:
    return len(text.split())


class HttpLlmClient:
    """POSTs ``{model, prompt, temperature, max_tokens}``; expects ``{text, ...}``."""

    def __init__(
        self,
        endpoint: Optional[str] = None,
        api_key: Optional[str] = None,
        model: str = "default",
        timeout: float = 60.0,
    ):
        self.endpoint = endpoint or os.environ.get("LLM_ENDPOINT")
        if not self.endpoint:
            raise LlmError("no LLM endpoint configured (set LLM_ENDPOINT)")
        self.api_key = api_key if api_key is not None else os.environ.get("LLM_API_KEY")
        self.model = model
        self.timeout = timeout

    def complete(self, prompt: str, temperature: float = 0.0, max_tokens: int = 512) -> Completion:
        body = json.dumps(
            {"model": self.model, "prompt": prompt, "temperature": temperature, "max_tokens": max_tokens}
        ).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        req = urllib.request.Request(self.endpoint, data=body, headers=headers, method="POST")
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise LlmError(f"LLM request failed: {exc}") from exc
        if not isinstance(payload, dict) or not isinstance(payload.get("text"), str):
            raise LlmError("LLM response lacks a 'text' string")
        if payload["text"] == "":
            raise LlmError("LLM returned an empty completion")
        return Completion(
            payload["text"],
            int(payload.get("prompt_tokens") or 0),
            int(payload.get("completion_tokens") or 0),
        )


class StubLlmClient:
    """Deterministic client driven by a playbook; records every call."""

    def __init__(self, playbook: Union[Mapping[str, Any], str, Path, None] = None, model: str = "stub"):
        if playbook is None:
            playbook = {}
        elif isinstance(playbook, (str, Path)):
            playbook = yaml.safe_load(Path(playbook).read_text(encoding="utf-8")) or {}
        if not isinstance(playbook, Mapping):
            raise LlmError("playbook must be a mapping")
        self.model = model
        self._responses: Dict[str, List[str]] = {
            k: _replies(v) for k, v in (playbook.get("responses") or {}).items()
        }
        self._rules: List[tuple] = []
        for rule in playbook.get("rules") or []:
            if not isinstance(rule, Mapping) or "contains" not in rule:
                raise LlmError("each playbook rule needs 'contains'")
            replies = _replies(rule.get("replies", rule.get("reply")))
            self._rules.append((str(rule["contains"]), replies))
        default = playbook.get("default")
        self._default: Optional[List[str]] = None if default is None else _replies(default)
        self._cursor: Dict[str, int] = {}
        self._lock = threading.Lock()
        self.calls: List[str] = []

    @property
    def call_count(self) -> int:
        return len(self.calls)

    def _next(self, slot: str, replies: List[str]) -> str:
        i = self._cursor.get(slot, 0)
        self._cursor[slot] = i + 1
        return replies[min(i, len(replies) - 1)]

    def complete(self, prompt: str, temperature: float = 0.0, max_tokens: int = 512) -> Completion:
        with self._lock:
            self.calls.append(prompt)
            h = prompt_hash(prompt)
            text: Optional[str] = None
            if h in self._responses:
                text = self._next("h:" + h, self._responses[h])
            else:
                for i, (needle, replies) in enumerate(self._rules):
                    if needle in prompt:
                        text = self._next(f"r:{i}", replies)
                        break
                else:
                    if self._default is not None:
                        text = self._next("default", self._default)
            if text is None:
                raise LlmError(f"stub playbook has no reply for prompt {h[:12]}")
        if text == ECHO:
            text = prompt
        return Completion(text, _count_tokens(prompt), _count_tokens(text))


def _replies(value: Any) -> List[str]:
    if isinstance(value, str):
        return [value]
    if isinstance(value, list) and value and all(isinstance(v, str) for v in value):
        return list(value)
    raise LlmError("playbook replies must be a string or a nonempty list of strings")
