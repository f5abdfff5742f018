#!/usr/bin/env python3
"""Writes the BM25 reference table for the bundled corpus.

Independent of the C++ code: chunking, tokenization and scoring are
re-implemented here from the documented rules. Run from the repository root:

    python3 tools/bm25_oracle.py > data/corpus/bm25_oracle.json
"""

import json
import math
import pathlib
import re

K1, B = 1.2, 0.75
SIZE, STRIDE = 1200, 1100

QUERIES = [
    "s curve profile",
    "DistanceToTarget of Axis 3",
    "circular interpolation arc center",
    "jerk ratio",
    "wait axis",
    "look-ahead corner tolerance",
    "input edge output",
    "move axis 1 to position 130.2",
]


def sections(text):
    out, cur = [], []
    for line in text.splitlines(keepends=True):
        if line.startswith("#") and cur:
            out.append("".join(cur))
            cur = []
        cur.append(line)
    if cur:
        out.append("".join(cur))
    return [s for s in out if s.strip()]


def chunks(root):
    out = []
    for path in sorted((root / "docs").rglob("*")):
        if path.suffix not in (".md", ".txt"):
            continue
        ordinal = 0
        for sec in sections(path.read_text()):
            start = 0
            while True:
                out.append((f"docs/{path.relative_to(root / 'docs').as_posix()}#{ordinal}", sec[start:start + SIZE]))
                ordinal += 1
                if start + SIZE >= len(sec):
                    break
                start += STRIDE
    for path in sorted((root / "samples").rglob("*.mcs")):
        out.append((f"samples/{path.relative_to(root / 'samples').as_posix()}#0", path.read_text()))
    return out


def tokens(text):
    return re.findall(r"[a-z0-9]+", text.lower())


def main():
    root = pathlib.Path(__file__).resolve().parent.parent / "data" / "corpus"
    docs = [(cid, tokens(text)) for cid, text in chunks(root)]
    n = len(docs)
    avg = sum(len(t) for _, t in docs) / n
    table = {"chunks": n, "queries": []}
    for q in QUERIES:
        terms = set(tokens(q))
        scored = []
        for cid, toks in docs:
            s = 0.0
            for term in terms:
                tf = toks.count(term)
                if tf == 0:
                    continue
                df = sum(1 for _, t in docs if term in t)
                idf = math.log((n - df + 0.5) / (df + 0.5) + 1)
                s += idf * tf * (K1 + 1) / (tf + K1 * (1 - B + B * len(toks) / avg))
            if s > 0:
                scored.append((cid, s))
        scored.sort(key=lambda x: (-x[1], x[0]))
        table["queries"].append({"query": q, "ranking": [{"id": c, "score": s} for c, s in scored]})
    print(json.dumps(table, indent=1))


if __name__ == "__main__":
    main()
