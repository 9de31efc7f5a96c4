"""Optional remote text decorator that naturalizes template captions.

The decorator never fails the pipeline: any transport problem, bad response,
or candidate set that loses the protected slot values falls back to the
template text. The API key is read from the environment at call time and is
never persisted.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence

from .captions import NEGATIVE, POSITIVE, Caption, CaptionPair
from .errors import ConfigError

Transport = Callable[[str, dict, dict, float], dict]

_NATURALIZE_PROMPT = (
    "In this task, you are given a sentence; your job is to rewrite it as a "
    "fluent natural-language caption without adding or removing facts, "
    "please generate {n} sentences.\n\nSentence: {text}"
)

_VERB_SWAP_PROMPT = (
    "In this task, you are given a sentence, your job is to replace the verb "
    "in the sentence with a verb which makes this sentence make sense, "
    "please generate {n} sentences.\n\nSentence: {text}"
)


@dataclass(frozen=True)
class DecoratorConfig:
    """Connection settings for the remote rewriting service."""

    enabled: bool = False
    endpoint: str | None = None
    model_name: str | None = None
    temperature: float = 0.2
    api_key_env: str | None = None
    timeout_s: float = 10.0
    max_candidates: int = 10

    def __post_init__(self) -> None:
        if self.enabled and (not self.endpoint or not self.api_key_env):
            raise ConfigError("enabled decorator needs endpoint and api_key_env")
        if not 0 <= self.temperature <= 2:
            raise ConfigError("temperature must lie in [0, 2]")


def _requests_transport(endpoint: str, payload: dict, headers: dict, timeout: float) -> dict:
    import requests

    response = requests.post(endpoint, json=payload, headers=headers, timeout=timeout)
    response.raise_for_status()
    return response.json()


def _call_remote(
    text: str,
    prompt_template: str,
    config: DecoratorConfig,
    transport: Transport,
) -> list[str]:
    api_key = os.environ.get(config.api_key_env or "", "")
    if not api_key:
        raise ConfigError(f"environment variable {config.api_key_env!r} is unset")
    payload = {
        "model": config.model_name,
        "temperature": config.temperature,
        "prompt": prompt_template.format(n=config.max_candidates, text=text),
    }
    headers = {"Authorization": f"Bearer {api_key}"}
    response = transport(config.endpoint or "", payload, headers, config.timeout_s)
    candidates = response.get("candidates")
    if not isinstance(candidates, list) or not all(isinstance(c, str) for c in candidates):
        raise ValueError("decorator response lacks a candidates list")
    return candidates


def _decorate_caption(
    caption: Caption,
    required: Sequence[str],
    config: DecoratorConfig,
    transport: Transport,
) -> Caption:
    try:
        candidates = _call_remote(caption.text, _NATURALIZE_PROMPT, config, transport)
    except Exception:
        return caption  # DecoratorUnavailable; renderer stays "template"
    for candidate in candidates:
        if candidate and all(value in candidate for value in required):
            return replace(caption, text=candidate, renderer="llm")
    return caption


def decorate(
    pair: CaptionPair,
    config: DecoratorConfig,
    rng: random.Random | None = None,
    required: Mapping[str, Sequence[str]] | None = None,
    transport: Transport | None = None,
) -> CaptionPair:
    """Naturalize both captions of a pair, keeping protected values verbatim.

    With the decorator disabled this is the identity. Candidates that drop
    any required slot value are filtered out; the first survivor wins, so the
    rng argument is accepted for interface stability but unused. A caption
    whose renderer still reads "template" afterwards was not decorated.
    """
    del rng  # selection is deterministic: first surviving candidate
    if not config.enabled:
        return pair
    transport = transport or _requests_transport
    required = required or {}
    positive = _decorate_caption(
        pair.positive, tuple(required.get(POSITIVE, ())), config, transport
    )
    negative = _decorate_caption(
        pair.negative, tuple(required.get(NEGATIVE, ())), config, transport
    )
    if positive.text == negative.text:
        return pair  # degenerate rewrite; keep the distinguishable template pair
    return replace(pair, positive=positive, negative=negative)


def propose_alternatives(
    sentence: str,
    config: DecoratorConfig,
    transport: Transport | None = None,
) -> list[str]:
    """Ask the remote service for verb-replacement variants of a sentence.

    Exposed for parity with LLM-based counterfactual generation; the
    manipulation pipeline itself draws counterfactuals from vocabulary pools.
    """
    if not config.enabled:
        return []
    transport = transport or _requests_transport
    try:
        return _call_remote(sentence, _VERB_SWAP_PROMPT, config, transport)
    except Exception:
        return []
