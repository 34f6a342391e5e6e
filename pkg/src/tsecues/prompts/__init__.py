"""Natural-language extraction prompts from relative cues."""

from .grammar import is_valid_prompt, parse_prompt
from .phrases import PHRASEBOOK_VERSION, LANGUAGE_NAMES, PhraseError, cue_phrase, eligible_cues
from .render import (
    N_VARIATIONS,
    IndistinguishablePairError,
    PromptSpec,
    bundle_size_before_dedup,
    count_roles,
    generate_bundle,
    render_template,
)
from .rephrase import RephraseClient, rephrase_external

__all__ = [
    "IndistinguishablePairError",
    "LANGUAGE_NAMES",
    "N_VARIATIONS",
    "PHRASEBOOK_VERSION",
    "PhraseError",
    "PromptSpec",
    "RephraseClient",
    "bundle_size_before_dedup",
    "count_roles",
    "cue_phrase",
    "eligible_cues",
    "generate_bundle",
    "is_valid_prompt",
    "parse_prompt",
    "rephrase_external",
    "render_template",
]
