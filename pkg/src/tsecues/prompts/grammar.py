"""Parser for the shipped prompt grammar."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from lark import Lark
from lark.exceptions import LarkError

GRAMMAR_FILE = "prompt.lark"


@lru_cache(maxsize=1)
def parser() -> Lark:
    text = resources.files(__package__).joinpath(GRAMMAR_FILE).read_text(encoding="utf-8")
    return Lark(text, parser="lalr")


def parse_prompt(text: str):
    """Parse tree for ``text``; raises ``lark.exceptions.LarkError`` if it is not a prompt."""
    return parser().parse(text)


def is_valid_prompt(text: str) -> bool:
    try:
        parse_prompt(text)
    except LarkError:
        return False
    return True
