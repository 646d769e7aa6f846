"""Reconstruct noised sentences into fluent corrupted targets.

An infiller is any callable ``(InfillRequest, rng) -> InfillResult``. Two
desk-scale infillers live here: the identity infiller (a test oracle that
undoes masking exactly) and a stochastic one that fills masks with random
vocabulary tokens. The third is a client for a remote denoising-generator
service speaking the shared wire protocol; no neural decoding happens in
this package.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np
import requests

from .corpus import TokenSeq
from .errors import ProtocolError, SentinelOutputError, TransportError
from .noising import (
    ORIGIN_INSERTED,
    ORIGIN_MASKED,
    NoisedSeq,
    Vocab,
)

DEFAULT_BEAM_SIZE = 4
DEFAULT_LENGTH_PENALTY = 3.0
DEFAULT_MAX_IN_FLIGHT = 8


@dataclass(frozen=True)
class InfillRequest:
    noised: NoisedSeq
    beam_size: int = DEFAULT_BEAM_SIZE
    length_penalty: float = DEFAULT_LENGTH_PENALTY

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError(f"beam_size must be >= 1, got {self.beam_size}")


@dataclass(frozen=True)
class InfillResult:
    filled: TokenSeq

    def __post_init__(self):
        if len(self.filled) == 0:
            raise ValueError("infiller produced an empty sequence")


class Infiller(Protocol):
    def __call__(
        self, req: InfillRequest, rng: np.random.Generator | None = None
    ) -> InfillResult:
        ...


def _check_no_sentinel(tokens, mask_token: str) -> None:
    if mask_token in tokens:
        raise SentinelOutputError(
            f"infilled output still contains the sentinel {mask_token!r}"
        )


def infill_identity(
    req: InfillRequest, rng: np.random.Generator | None = None
) -> InfillResult:
    """Undo the noise exactly: masks back to their original tokens, inserted
    masks dropped, replacements kept. The diff against the input is then
    exactly the replaced positions, which makes this the end-to-end oracle."""
    noised = req.noised
    if noised.origin is None or noised.original is None:
        raise ValueError("identity infill needs the origin map and original tokens")
    out = []
    ptr = 0
    for tok, tag in zip(noised.tokens, noised.origin):
        if tag == ORIGIN_INSERTED:
            continue
        if tag == ORIGIN_MASKED:
            out.append(noised.original[ptr])
        else:
            out.append(tok)
        ptr += 1
    return InfillResult(filled=TokenSeq(tuple(out)))


def infill_stochastic(
    req: InfillRequest, vocab: Vocab, rng: np.random.Generator
) -> InfillResult:
    """Fill every mask sentinel with a vocabulary-sampled token.

    Masked positions become likely substitutions, inserted masks become
    genuine insertions; everything else passes through.
    """
    noised = req.noised
    out = []
    for tok in noised.tokens:
        if tok == noised.mask_token:
            out.append(vocab.sample(rng))
        else:
            out.append(tok)
    _check_no_sentinel(out, noised.mask_token)
    return InfillResult(filled=TokenSeq(tuple(out)))


class RemoteInfiller:
    """Client for the remote denoising-generator service.

    POSTs ``{tokens, beam_size, length_penalty}`` to ``<endpoint>/infill`` and
    expects ``{tokens}`` back, mask-free. A semaphore bounds in-flight
    requests (default 8); the pipeline preserves record order regardless of
    completion order.
    """

    def __init__(
        self,
        endpoint: str,
        max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
        timeout: float = 60.0,
        session: requests.Session | None = None,
    ):
        if max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self._gate = threading.Semaphore(max_in_flight)
        self._session = session or requests.Session()

    def __call__(
        self, req: InfillRequest, rng: np.random.Generator | None = None
    ) -> InfillResult:
        body = {
            "tokens": list(req.noised.tokens),
            "beam_size": req.beam_size,
            "length_penalty": req.length_penalty,
        }
        with self._gate:
            try:
                resp = self._session.post(
                    self.endpoint + "/infill", json=body, timeout=self.timeout
                )
            except requests.RequestException as exc:
                raise TransportError(f"infill request failed: {exc}") from exc
        if resp.status_code != 200:
            raise ProtocolError(
                f"infill endpoint answered HTTP {resp.status_code}: {resp.text[:200]}"
            )
        try:
            payload = resp.json()
        except ValueError as exc:
            raise ProtocolError(f"infill response is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict) or "tokens" not in payload:
            raise ProtocolError("infill response lacks the 'tokens' field")
        tokens = payload["tokens"]
        if (
            not isinstance(tokens, list)
            or not tokens
            or not all(isinstance(t, str) and t for t in tokens)
        ):
            raise ProtocolError("infill response 'tokens' must be a nonempty list of words")
        _check_no_sentinel(tokens, req.noised.mask_token)
        try:
            filled = TokenSeq(tuple(tokens))
        except ValueError as exc:
            raise ProtocolError(f"infill response tokens invalid: {exc}") from exc
        return InfillResult(filled=filled)


def make_infiller(
    choice: str,
    vocab: Vocab | None = None,
    endpoint: str | None = None,
    max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
) -> Infiller:
    """Build the pipeline-facing infiller for one of identity / stochastic /
    remote."""
    if choice == "identity":
        return infill_identity
    if choice == "stochastic":
        if vocab is None:
            raise ValueError("stochastic infiller needs a vocabulary")

        def _stochastic(req, rng=None):
            if rng is None:
                raise ValueError("stochastic infiller needs an rng stream")
            return infill_stochastic(req, vocab, rng)

        return _stochastic
    if choice == "remote":
        if not endpoint:
            raise ValueError("remote infiller needs an endpoint")
        return RemoteInfiller(endpoint, max_in_flight=max_in_flight)
    raise ValueError(f"unknown infiller {choice!r}")
