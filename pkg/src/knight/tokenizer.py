"""Word-level tokenizer and vocabulary.

Tokens are lowercased words split on whitespace and punctuation, with
punctuation marks kept as their own tokens. The same scheme feeds both
the decoder vocabulary and the caption metrics, so candidate and
reference statistics stay comparable.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field

from .errors import EmptyCorpus, MalformedLine

PAD_ID = 0
BOS_ID = 1
EOS_ID = 2
UNK_ID = 3

PAD_TOKEN = "<pad>"
BOS_TOKEN = "<bos>"
EOS_TOKEN = "<eos>"
UNK_TOKEN = "<unk>"

RESERVED_TOKENS = (PAD_TOKEN, BOS_TOKEN, EOS_TOKEN, UNK_TOKEN)

_TOKEN_RE = re.compile(r"[a-z0-9]+|[^\sa-z0-9]")


def tokenize(text: str) -> list[str]:
    """Lowercase and split into word/punctuation tokens."""
    return _TOKEN_RE.findall(text.lower())


@dataclass
class Vocabulary:
    token_to_id: dict[str, int] = field(default_factory=dict)
    id_to_token: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.id_to_token)

    def encode_token(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def encode(self, text: str) -> list[int]:
        return [self.encode_token(t) for t in tokenize(text)]

    def decode(self, ids) -> str:
        """Space-join tokens, skipping PAD/BOS/EOS; UNK renders as <unk>."""
        words = []
        for i in ids:
            if i in (PAD_ID, BOS_ID, EOS_ID):
                continue
            words.append(self.id_to_token[i] if 0 <= i < len(self.id_to_token) else UNK_TOKEN)
        return " ".join(words)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for idx, token in enumerate(self.id_to_token):
                fh.write(json.dumps({"id": idx, "token": token}) + "\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        id_to_token: list[str] = []
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    idx, token = int(obj["id"]), str(obj["token"])
                except (ValueError, KeyError, TypeError) as exc:
                    raise MalformedLine(f"bad vocabulary entry: {exc}", lineno) from exc
                if idx != len(id_to_token):
                    raise MalformedLine(f"vocabulary ids must be contiguous, got {idx}", lineno)
                id_to_token.append(token)
        if len(id_to_token) < len(RESERVED_TOKENS) or tuple(id_to_token[:4]) != RESERVED_TOKENS:
            raise MalformedLine("vocabulary must start with the reserved tokens")
        return cls({t: i for i, t in enumerate(id_to_token)}, id_to_token)


def build_vocabulary(texts, min_count: int = 1) -> Vocabulary:
    """Count tokens over the corpus and assign ids by (count desc, token asc).

    Reserved ids 0..3 are PAD/BOS/EOS/UNK; corpus tokens start at 4.
    """
    texts = list(texts)
    if not texts:
        raise EmptyCorpus("cannot build a vocabulary from an empty corpus")
    counts: Counter[str] = Counter()
    for text in texts:
        counts.update(tokenize(text))
    kept = [(tok, cnt) for tok, cnt in counts.items() if cnt >= min_count]
    kept.sort(key=lambda item: (-item[1], item[0]))
    id_to_token = list(RESERVED_TOKENS) + [tok for tok, _ in kept]
    return Vocabulary({t: i for i, t in enumerate(id_to_token)}, id_to_token)
