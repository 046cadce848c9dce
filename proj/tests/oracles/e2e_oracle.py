#!/usr/bin/env python3
"""Hand-traced oracle for the bundled six-note fixture.

The table below is the trace: which notes survive preprocessing and disease
identification (checked with trigram_oracle.py), and what the scripted
backend answers for each (note, category). From it this script writes the
backend script, the expected graph and the gold file. It shares no code with
the C++ implementation.

  n3 is a near duplicate of n2 (fewer words, dropped); n4 has 3 words.
  n6 only mentions "macular degenration", found through the NER lexicon.
"""
import json
import math
import os
import string
import sys
from collections import defaultdict

sys.path.insert(0, os.path.dirname(__file__))
from trigram_oracle import cosine  # noqa: E402

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data", "e2e")
STOPWORDS = os.path.join(HERE, "..", "..", "assets", "stopwords.txt")

DISEASE = "macular degeneration"
QUESTIONS_PER_CATEGORY = 5
KEPT_NOTES = ["n1", "n2", "n5", "n6"]

# (note, category) -> (response text, probability or None, parsed entities)
# parsed entities: list for answers, "dont_know" or "unstructured" otherwise
TRACE = {
    ("n1", "treat"): ("treat: AREDS vitamins, healthy diet", 0.8, ["AREDS vitamins", "healthy diet"]),
    ("n2", "treat"): ("treat: AREDS vitamins, healthy diet", 0.6, ["AREDS vitamins", "healthy diet"]),
    ("n5", "treat"): ("treat: Anti-VEGF injections, healthy diets", 0.9, ["Anti-VEGF injections", "healthy diets"]),
    ("n6", "treat"): ("treat: healthy diets, Anti-VEGF injections", 0.7, ["healthy diets", "Anti-VEGF injections"]),
    ("n1", "factor"): ("factor: smoking, family history", None, ["smoking", "family history"]),
    ("n2", "factor"): ("factor: factor: smoking, age", None, ["smoking", "age"]),
    ("n5", "factor"): ("I do not know.", None, "dont_know"),
    ("n6", "factor"): ("factor: [ENTITY_1], [ENTITY_2]", None, "unstructured"),
    ("n1", "coexists_with"): ("coexists_with: vision loss, smoking", 0.3, ["vision loss", "smoking"]),
    ("n2", "coexists_with"): ("effect: vision loss, smoking", 0.3, ["vision loss", "smoking"]),
    ("n5", "coexists_with"): ("coexists_with: vision loss", 0.05, ["vision loss"]),
    ("n6", "coexists_with"): ("coexists_with: drusen", 0.09, ["drusen"]),
}
CATEGORY_NAME = {"treat": "Treatment", "factor": "Factor", "coexists_with": "CoexistsWith"}
CATEGORY_ORDER = ["treat", "factor", "coexists_with"]
DEFAULT_SCORE = 0.5
MIN_SCORE, MIN_COUNT, MIN_AVG, GROUPING = 0.08, 10, 0.1, 0.8


def stopwords():
    return {l.strip() for l in open(STOPWORDS) if l.strip() and not l.startswith("#")}


def canonical(text):
    out = []
    for ch in text:
        if ch == "'":
            continue
        if ch in string.punctuation:
            out.append(" ")
        else:
            out.append(ch.lower() if ch.isascii() else ch)
    return " ".join("".join(out).split())


def normalize(text, stops):
    return " ".join(t for t in canonical(text).split() if t not in stops)


def split_values(text):
    pieces = []
    for part in text.split(","):
        cur = []
        for tok in part.split():
            if tok.lower() == "and":
                if cur:
                    pieces.append(" ".join(cur))
                cur = []
            else:
                cur.append(tok)
        if cur:
            pieces.append(" ".join(cur))
    return pieces


def argmax(cands):
    best = {}
    for c in cands:
        key = c["entity"]
        cur = best.get(key)
        rank = (c["avg"], c["count"], -CATEGORY_ORDER.index(c["category"]))
        if cur is None or rank > (cur["avg"], cur["count"], -CATEGORY_ORDER.index(cur["category"])):
            best[key] = c
    return list(best.values())


def main():
    stops = stopwords()
    logprob = {}
    preds = []
    for (note, cat), (text, p, parsed) in TRACE.items():
        lp = [math.log(p)] if p is not None else None
        logprob[(note, cat)] = lp
        score = math.exp(lp[0]) if lp else DEFAULT_SCORE
        if not isinstance(parsed, list):
            continue
        for _ in range(QUESTIONS_PER_CATEGORY):
            for ent in parsed:
                preds.append((ent, normalize(ent, stops), score, cat))

    groups = defaultdict(list)
    for surface, ent, score, cat in preds:
        if score < MIN_SCORE or not ent:
            continue
        groups[(ent, cat)].append((score, surface))
    cands = []
    for (ent, cat), items in groups.items():
        scores = [s for s, _ in items]
        avg = math.fsum(scores) / len(scores)
        surface = sorted(items, key=lambda x: (-x[0], x[1]))[0][1]
        if len(scores) >= MIN_COUNT and avg >= MIN_AVG:
            cands.append({"entity": ent, "category": cat, "avg": avg, "count": len(scores), "surface": surface})
    cands = argmax(cands)

    final = []
    for cat in CATEGORY_ORDER:
        members = [c for c in cands if c["category"] == cat]
        # single-link components over normalized forms
        parent = list(range(len(members)))

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                if cosine(members[i]["entity"], members[j]["entity"]) > GROUPING:
                    parent[find(j)] = find(i)
        comps = defaultdict(list)
        for i, m in enumerate(members):
            comps[find(i)].append(m)
        merged = {}
        for comp in comps.values():
            rep = sorted(comp, key=lambda m: (-m["avg"], -len(m["surface"]), m["surface"]))[0]
            for piece in split_values(rep["surface"]):
                ent = normalize(piece, stops)
                if ent and (ent not in merged or rep["avg"] > merged[ent]["avg"]):
                    merged[ent] = dict(rep, entity=ent, surface=piece)
        final.extend(merged.values())
    final = argmax(final)

    rules = []
    for (note, cat), (text, p, parsed) in TRACE.items():
        resp = {"text": text}
        if logprob[(note, cat)]:
            resp["token_logprobs"] = logprob[(note, cat)]
        rules.append({"match": {"note_id": note, "category": cat}, "response": resp})
    backend = {"name": "fixture-guided", "kind": "generative", "rules": rules}

    edges = sorted(
        ({"from": DISEASE, "to": f["surface"], "category": CATEGORY_NAME[f["category"]],
          "avg_score": f["avg"], "count": f["count"]} for f in final),
        key=lambda e: (e["from"], CATEGORY_ORDER.index([k for k, v in CATEGORY_NAME.items() if v == e["category"]][0]),
                       normalize(e["to"], stops)))
    nodes = [{"kind": "disease", "label": DISEASE}] + sorted(
        ({"kind": "entity", "label": f["surface"]} for f in final), key=lambda n: n["label"])
    kg = {"schema_version": 1, "nodes": nodes, "edges": edges}

    gold = [{"disease": DISEASE, "category": CATEGORY_NAME[cat],
             "values": sorted(f["surface"] for f in final if f["category"] == cat)} for cat in CATEGORY_ORDER]

    with open(os.path.join(DATA, "backend.json"), "w") as fh:
        json.dump(backend, fh, indent=2)
        fh.write("\n")
    with open(os.path.join(DATA, "expected_kg.json"), "w") as fh:
        json.dump(kg, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(DATA, "gold.json"), "w") as fh:
        json.dump(gold, fh, indent=2)
        fh.write("\n")
    for e in edges:
        print("%-13s %-22s %.17g %d" % (e["category"], e["to"], e["avg_score"], e["count"]))


if __name__ == "__main__":
    main()
