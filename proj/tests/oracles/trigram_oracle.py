#!/usr/bin/env python3
"""Independent re-implementation of the default trigram embedding + cosine.

Used to compute the frozen golden values asserted by the C++ tests. This file
does not import or call anything from the C++ implementation.

Embedding: lowercase ASCII, drop apostrophes, map every other ASCII
punctuation byte to a space, split on whitespace, pad each token as
"#token#", take byte trigrams, hash each with FNV-1a (32 bit) modulo 2**20,
count, then L2-normalise.
"""
import json
import math
import string
import sys
from collections import Counter
from itertools import combinations

DIM = 1 << 20


def fnv1a32(data: bytes) -> int:
    h = 0x811C9DC5
    for b in data:
        h ^= b
        h = (h * 0x01000193) & 0xFFFFFFFF
    return h


def clean(text: str) -> bytes:
    out = bytearray()
    for b in text.encode("utf-8"):
        c = chr(b) if b < 128 else None
        if c == "'":
            continue
        if c is not None and c in string.punctuation:
            out.append(ord(" "))
        elif c is not None and c.isupper():
            out.append(ord(c.lower()))
        else:
            out.append(b)
    return bytes(out)


def embed(text: str) -> dict:
    counts = Counter()
    for tok in clean(text).split():
        padded = b"#" + tok + b"#"
        for i in range(len(padded) - 2):
            counts[fnv1a32(padded[i : i + 3]) % DIM] += 1
    norm = math.sqrt(sum(v * v for v in counts.values()))
    if norm == 0:
        raise ValueError("empty embedding for %r" % text)
    return {k: v / norm for k, v in counts.items()}


def cosine(a: str, b: str) -> float:
    u, v = embed(a), embed(b)
    return sum(w * v.get(k, 0.0) for k, w in u.items())


def main() -> None:
    pairs = [
        ("areds", "areds-2 vitamins"),
        ("eating spinach and fish", "spinach and fish"),
        ("macular degenration", "macular degeneration"),
        ("fish", "spinach"),
    ]
    for a, b in pairs:
        print("%-32r %-32r %.17g" % (a, b, cosine(a, b)))
    if len(sys.argv) > 1:
        # pairwise similarities and word counts for a notes JSONL file
        notes = [json.loads(l) for l in open(sys.argv[1]) if l.strip()]
        for n in notes:
            print(n["id"], "wc=%d" % len(n["text"].split()))
        for x, y in combinations(notes, 2):
            print(x["id"], y["id"], "%.17g" % cosine(x["text"], y["text"]))


if __name__ == "__main__":
    main()
