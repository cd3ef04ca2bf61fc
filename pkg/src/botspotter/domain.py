"""Fixed vocabularies shared by every stage.

The tuple order is canonical: feature columns, CSV columns and tie-breaks all
follow it.
"""
from __future__ import annotations

from enum import Enum


class TweetType(str, Enum):
    ORIGINAL = "original"
    RETWEET = "retweet"
    REPLY = "reply"
    QUOTE = "quote"


class UserClass(str, Enum):
    HUMAN = "human"
    UNCERTAIN = "uncertain"
    BOT = "bot"
    REMOVED = "removed"


TWEET_TYPES: tuple[str, ...] = tuple(t.value for t in TweetType)
INTERACTION_TYPES: tuple[str, ...] = ("retweet", "reply", "quote")
PARTIES: tuple[str, ...] = ("UP", "PSOE", "CS", "PP", "VOX")
THEMES: tuple[str, ...] = ("AbascalEH", "Catalonia", "Exhumation", "Debate", "Election")
UNKNOWN = "Unknown"

# Observation window of the 2019 collection, inclusive, UTC.
DEFAULT_WINDOW = ("2019-10-04T00:00:00Z", "2019-11-11T23:59:59Z")
