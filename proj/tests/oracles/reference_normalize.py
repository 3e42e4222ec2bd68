#!/usr/bin/env python3
"""Independent reference for text normalization and lexical counting.

Used to freeze expected values in the C++ unit tests. Keep it independent of
the C++ implementation: it works directly from the Unicode database.
"""
import sys
import unicodedata

KEEP_INTRA = {"'", "’", "-", "‐", "‑"}


def is_word(ch):
    return unicodedata.category(ch)[0] in "LN"


def normalize(raw):
    out = []
    for i, ch in enumerate(raw):
        cat = unicodedata.category(ch)
        if cat.startswith("P"):
            prev = raw[i - 1] if i > 0 else ""
            nxt = raw[i + 1] if i + 1 < len(raw) else ""
            if ch in KEEP_INTRA and prev and nxt and is_word(prev) and is_word(nxt):
                out.append(ch)
            else:
                out.append(" ")
        elif ch.isspace() or cat.startswith("Z") or cat == "Cc":
            out.append(" ")
        else:
            # simple (1:1) lowercase mapping, like u_tolower
            low = ch.lower()
            out.append(low if len(low) == 1 else ch)
    return " ".join("".join(out).split())


def lexical_ratio(keyphrase_tokens, text):
    toks = normalize(text).split()
    if not toks:
        return 0.0
    return sum(t in keyphrase_tokens for t in toks) / len(toks)


if __name__ == "__main__":
    for s in sys.argv[1:]:
        print(repr(normalize(s)))
