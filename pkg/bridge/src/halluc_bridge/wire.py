"""Wire protocol types.

Field names are fixed; requests reject unknown fields so client typos fail
loudly instead of being silently dropped. The infill response enforces the
sentinel-free invariant at the model level so a buggy backend cannot leak
masks onto the wire.
"""

from pydantic import BaseModel, ConfigDict, Field, field_validator

MASK_TOKEN = "<mask>"

# request size ceilings; anything larger gets a 4xx, never an OOM
MAX_TOKENS_PER_REQUEST = 1024
MAX_TEXT_CHARS = 20_000


class InfillRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tokens: list[str]
    beam_size: int = Field(default=4, ge=1)
    length_penalty: float = 3.0


class InfillResponse(BaseModel):
    tokens: list[str]

    @field_validator("tokens")
    @classmethod
    def _sentinel_free(cls, value: list[str]) -> list[str]:
        if any(tok == MASK_TOKEN for tok in value):
            raise ValueError("response tokens must not contain the mask sentinel")
        return value


class PredictRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    source: str
    target: str
    reference: str | None = None


class PredictResponse(BaseModel):
    probs: list[float]

    @field_validator("probs")
    @classmethod
    def _unit_interval(cls, value: list[float]) -> list[float]:
        if any(not 0.0 <= p <= 1.0 for p in value):
            raise ValueError("probabilities must lie in [0, 1]")
        return value
