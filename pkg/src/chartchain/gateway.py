"""Chat-completion gateway: one HTTP client plus a deterministic mock.

All prompt traffic in the package goes through a Gateway object, so every
stage can run fully offline against recorded or rule-generated replies.
Endpoint configuration comes only from the environment (LLM_BASE_URL,
LLM_API_KEY, LLM_MODEL), never from CLI arguments or dataset files.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BudgetExceeded, FixtureMissing, GatewayError


@dataclass(frozen=True)
class GatewayRequest:
    user: str
    system: str | None = None
    temperature: float = 0.0
    max_tokens: int = 2048
    tag: str = ""

    def __post_init__(self):
        if not self.user:
            raise ValueError("user text must be non-empty")
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError("temperature must be in [0, 1]")


@dataclass(frozen=True)
class GatewayPolicy:
    max_retries: int = 2
    backoff: tuple[float, ...] = (0.2, 0.5, 1.0)
    max_concurrent: int = 4
    per_minute_budget: int | None = None

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


def prompt_hash(tag: str, text: str) -> str:
    """Stable request key; whitespace-normalized so formatting-only edits
    to prompt templates do not invalidate recorded fixtures."""
    normalized = " ".join(text.split())
    return hashlib.sha256(f"{tag}\x00{normalized}".encode("utf-8")).hexdigest()


class Gateway:
    """Base class: retry loop, budget guard, and transcript logging."""

    def __init__(self, policy: GatewayPolicy | None = None):
        self.policy = policy or GatewayPolicy()
        self.transcript: list[dict] = []
        self._lock = threading.Lock()
        self._slots = threading.Semaphore(self.policy.max_concurrent)
        self._call_times: list[float] = []

    def complete(self, req: GatewayRequest,
                 policy: GatewayPolicy | None = None) -> str:
        policy = policy or self.policy
        self._charge_budget(policy)
        last_error: Exception | None = None
        with self._slots:
            for attempt in range(policy.max_retries + 1):
                start = time.monotonic()
                try:
                    reply = self._send(req)
                except Exception as exc:          # noqa: BLE001 - retried
                    last_error = exc
                    if attempt < policy.max_retries:
                        delay = policy.backoff[min(attempt, len(policy.backoff) - 1)]
                        time.sleep(delay)
                    continue
                self._log(req, reply, time.monotonic() - start)
                return reply
        raise GatewayError(f"request failed after {policy.max_retries + 1} "
                           f"attempts: {last_error}")

    def _charge_budget(self, policy: GatewayPolicy) -> None:
        if policy.per_minute_budget is None:
            return
        now = time.monotonic()
        with self._lock:
            self._call_times = [t for t in self._call_times if now - t < 60]
            if len(self._call_times) >= policy.per_minute_budget:
                raise BudgetExceeded(
                    f"per-minute budget of {policy.per_minute_budget} exhausted")
            self._call_times.append(now)

    def _log(self, req: GatewayRequest, reply: str, latency: float) -> None:
        with self._lock:
            self.transcript.append({
                "tag": req.tag,
                "hash": prompt_hash(req.tag, req.user),
                "prompt": req.user,
                "reply": reply,
                "latency": round(latency, 6),
            })

    def save_transcript(self, path: str | Path) -> None:
        with self._lock:
            lines = [json.dumps(e, ensure_ascii=False) for e in self.transcript]
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))

    def _send(self, req: GatewayRequest) -> str:
        raise NotImplementedError


class HttpGateway(Gateway):
    """Remote chat-completion client (OpenAI-style wire format)."""

    def __init__(self, policy: GatewayPolicy | None = None,
                 base_url: str | None = None, api_key: str | None = None,
                 model: str | None = None, timeout: float = 120.0):
        super().__init__(policy)
        self.base_url = (base_url or os.environ.get("LLM_BASE_URL", "")).rstrip("/")
        self.api_key = api_key or os.environ.get("LLM_API_KEY", "")
        self.model = model or os.environ.get("LLM_MODEL", "")
        self.timeout = timeout
        if not self.base_url:
            raise GatewayError("LLM_BASE_URL is not configured")

    def _send(self, req: GatewayRequest) -> str:
        import requests

        messages = []
        if req.system:
            messages.append({"role": "system", "content": req.system})
        messages.append({"role": "user", "content": req.user})
        resp = requests.post(
            f"{self.base_url}/chat/completions",
            headers={"Authorization": f"Bearer {self.api_key}"},
            json={"model": self.model, "messages": messages,
                  "temperature": req.temperature, "max_tokens": req.max_tokens},
            timeout=self.timeout,
        )
        if resp.status_code >= 500:
            raise GatewayError(f"server error {resp.status_code}")
        resp.raise_for_status()
        return resp.json()["choices"][0]["message"]["content"]


class MockGateway(Gateway):
    """Deterministic stand-in for the HTTP gateway.

    Replies are looked up by prompt hash.  On a miss the behaviour depends
    on ``unknown``: "echo" returns the prompt text, "error" raises, and
    "rule" synthesizes a reply of the shape each pipeline stage expects,
    derived only from the prompt content (so runs are reproducible).
    """

    def __init__(self, replies: dict[str, str] | None = None,
                 unknown: str = "rule",
                 policy: GatewayPolicy | None = None,
                 fail_times: int = 0):
        super().__init__(policy)
        if unknown not in ("echo", "error", "rule"):
            raise ValueError(f"unknown mode {unknown!r}")
        self.replies = dict(replies or {})
        self.unknown = unknown
        self._remaining_failures = fail_times

    def _send(self, req: GatewayRequest) -> str:
        if self._remaining_failures > 0:
            self._remaining_failures -= 1
            raise GatewayError("injected transient failure")
        key = prompt_hash(req.tag, req.user)
        if key in self.replies:
            return self.replies[key]
        if self.unknown == "echo":
            return req.user
        if self.unknown == "error":
            raise GatewayError(f"no recorded reply for hash {key}")
        return _rule_reply(req)


def _rule_reply(req: GatewayRequest) -> str:
    """Shape-correct deterministic replies keyed on the request tag."""
    tag = req.tag
    if tag == "seed":
        return f"JSON Data 1: {_expand_skeleton(_embedded_json(req.user))}"
    if tag == "evolve":
        block = _embedded_json(req.user)
        return f"JSON Data 1: {block}"
    if tag == "rationale":
        result = _final_result(req.user)
        steps = _step_lines(req.user)
        body = " ".join(steps) if steps else "The chart is read step by step."
        return f"Reasoning process: {body}, Final answer: {result}"
    if tag == "question":
        title = _field_after(req.user, '"title": "')
        where = f' in the chart "{title}"' if title else " in the chart"
        return ("Question: Following the described selection and computation"
                f"{where}, what is the resulting value?")
    if tag == "refinement":
        result = _final_result(req.user)
        steps = _step_lines(req.user)
        body = " ".join(steps) if steps else "Reading the chart step by step"
        return (f"Rewritten rationale: {body} This yields {result}., "
                f"Final answer: {result}")
    if tag == "extraction":
        return _extract_by_rule(req.user)
    return req.user


def _embedded_json(prompt: str) -> str:
    start = prompt.find("{")
    if start < 0:
        return "{}"
    depth = 0
    for i, ch in enumerate(prompt[start:], start):
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return prompt[start:i + 1]
    return "{}"


def _expand_skeleton(block: str) -> str:
    """Turn a structure-only JSON block into a complete chart record.

    Deterministic: the record depends only on the block's content.  If the
    block is already a full record (or unparseable), return it untouched.
    """
    try:
        raw = json.loads(block)
    except ValueError:
        return block
    needed = {"type", "legend_num", "group_num", "colors"}
    if not (isinstance(raw, dict) and needed <= set(raw)
            and "data_points" not in raw):
        return block
    from .forge import SpecSkeleton, fallback_from_skeleton
    from .model import serialize
    skeleton = SpecSkeleton(
        chart_type=raw["type"], legend_num=int(raw["legend_num"]),
        group_num=int(raw["group_num"]), colors=tuple(raw["colors"]),
        title=raw.get("title"))
    digest = hashlib.sha256(block.encode()).hexdigest()
    spec = fallback_from_skeleton(skeleton, random.Random(int(digest[:12], 16)))
    return serialize(spec)


def _final_result(prompt: str) -> str:
    matches = re.findall(r"Final result:\s*([^\n]+)", prompt)
    return matches[-1].strip() if matches else "unknown"


def _step_lines(prompt: str) -> list[str]:
    return [m.strip() for m in re.findall(r"^Step \d+: ([^\n]+)$", prompt, re.M)]


def _field_after(prompt: str, marker: str) -> str:
    pos = prompt.find(marker)
    if pos < 0:
        return ""
    rest = prompt[pos + len(marker):]
    return rest.split('"', 1)[0]


_NUMBER_RE = re.compile(r"(?<![A-Za-z0-9.])-?\d[\d,]*(?:\.\d+)?(?![A-Za-z0-9])")


def _extract_by_rule(prompt: str) -> str:
    pos = prompt.rfind("Model response:")
    response = prompt[pos + len("Model response:"):] if pos >= 0 else prompt
    response = response.split("Expected answer:")[0].strip()
    if not response:
        return "FAILED"
    tokens = response.split()
    garbled = [t for t in tokens
               if re.search(r"[A-Za-z]", t) and re.search(r"\d", t)]
    if len(garbled) > len(tokens) / 2:
        return "FAILED"
    lowered = response.lower()
    if re.search(r"\byes\b", lowered):
        return "yes"
    if re.search(r"\bno\b", lowered):
        return "no"
    sentences = [s for s in re.split(r"(?<=[.!?])\s+", response) if s.strip()]
    last = sentences[-1] if sentences else response
    for scope in (last, response):
        numbers = _NUMBER_RE.findall(scope)
        if numbers:
            return numbers[-1].replace(",", "")
        words = re.findall(r"[A-Za-z][A-Za-z-]*", scope)
        if words:
            return words[-1]
    return "FAILED"


def mock_from_fixture(path: str | Path,
                      policy: GatewayPolicy | None = None) -> MockGateway:
    """Load a recorded-reply fixture: {"replies": {hash: text}, "unknown": mode}."""
    path = Path(path)
    if not path.exists():
        raise FixtureMissing(str(path))
    raw = json.loads(path.read_text())
    return MockGateway(replies=raw.get("replies", {}),
                       unknown=raw.get("unknown", "rule"), policy=policy)


def mock_from_transcript(path: str | Path,
                         policy: GatewayPolicy | None = None) -> MockGateway:
    """Rebuild a mock from a saved transcript so a run can be replayed."""
    path = Path(path)
    if not path.exists():
        raise FixtureMissing(str(path))
    replies = {}
    for line in path.read_text().splitlines():
        if line.strip():
            entry = json.loads(line)
            replies[entry["hash"]] = entry["reply"]
    return MockGateway(replies=replies, unknown="error", policy=policy)
