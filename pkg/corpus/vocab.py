# =============================================================================
# A3T Desk - Vocabulary
# =============================================================================
"""
Token <-> id mapping with reserved padding and unknown ids.
"""

import logging
from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

logger = logging.getLogger(__name__)

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"


class Vocabulary:
    """
    Bijection between tokens and ids.

    Id 0 is padding and id 1 is the unknown token; every other id belongs to
    exactly one surface token.
    """

    PAD_ID = 0
    UNK_ID = 1

    def __init__(self, tokens: Iterable[str] = ()):
        self._id_to_token: List[str] = [PAD_TOKEN, UNK_TOKEN]
        self._token_to_id: Dict[str, int] = {PAD_TOKEN: self.PAD_ID, UNK_TOKEN: self.UNK_ID}
        for token in tokens:
            self.add(token)

    def add(self, token: str) -> int:
        """Add a token if new; return its id."""
        if token not in self._token_to_id:
            self._token_to_id[token] = len(self._id_to_token)
            self._id_to_token.append(token)
        return self._token_to_id[token]

    def __len__(self) -> int:
        return len(self._id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self._token_to_id

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self._id_to_token == other._id_to_token

    @property
    def tokens(self) -> List[str]:
        """Every token in id order, specials included."""
        return list(self._id_to_token)

    def id_of(self, token: str) -> int:
        return self._token_to_id.get(token, self.UNK_ID)

    def token_of(self, index: int) -> str:
        return self._id_to_token[index]

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        """Map tokens to ids (unknown tokens map to the unknown id)."""
        return np.array([self._token_to_id.get(token, self.UNK_ID) for token in tokens], dtype=np.int64)

    def decode(self, ids: Sequence[int]) -> List[str]:
        return [self._id_to_token[int(i)] for i in ids if int(i) != self.PAD_ID]

    # =========================================================================
    # Construction and persistence
    # =========================================================================

    @classmethod
    def build(
        cls,
        streams: Iterable[Sequence[str]],
        min_count: int = 1,
        extra: Iterable[str] = (),
    ) -> "Vocabulary":
        """
        Build a vocabulary from token streams.

        Tokens are ordered by descending frequency, ties by the token itself,
        so the result does not depend on the stream order. ``extra`` tokens
        (for instance every token of the substitution tables) are appended.
        """
        counts = Counter()
        for stream in streams:
            counts.update(stream)
        frequent = sorted((t for t, c in counts.items() if c >= min_count), key=lambda t: (-counts[t], t))
        vocab = cls(frequent)
        for token in sorted(set(extra)):
            vocab.add(token)
        logger.info(f"Built vocabulary with {len(vocab)} tokens")
        return vocab

    def save(self, path: Union[str, Path]) -> None:
        """One token per line, specials excluded."""
        with open(path, "w", encoding="utf-8") as f:
            for token in self._id_to_token[2:]:
                f.write(f"{token}\n")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Vocabulary":
        with open(path, "r", encoding="utf-8") as f:
            return cls(line.rstrip("\n") for line in f if line.rstrip("\n"))

    @classmethod
    def from_tokens(cls, tokens: Sequence[str]) -> "Vocabulary":
        """Rebuild from ``tokens`` (the full id-ordered list, specials first)."""
        tokens = list(tokens)
        if tokens[:2] != [PAD_TOKEN, UNK_TOKEN]:
            raise ValueError("vocabulary token list must start with the pad and unknown tokens")
        return cls(tokens[2:])

    def to_dict(self) -> Dict:
        return {"size": len(self), "tokens": self.tokens}

    def summary(self, limit: Optional[int] = 10) -> str:
        head = ", ".join(self._id_to_token[2:2 + (limit or len(self))])
        return f"Vocabulary({len(self)} tokens: {head}{', ...' if len(self) - 2 > (limit or 0) else ''})"
