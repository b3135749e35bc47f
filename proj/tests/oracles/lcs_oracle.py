"""Fuzzy-coverage oracle: the Joy trace with its third paragraph dropped.

The coverage key removes all whitespace and folds the curly apostrophe, which
is all the normalization this fixture needs. The LCS is the textbook
O(n*m) dynamic program over code points.
"""
import json
from pathlib import Path

FIX = Path(__file__).resolve().parent.parent / "fixtures"


def key(text):
    return "".join(text.replace("’", "'").split())


def lcs(a, b):
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0]
        for j, cb in enumerate(b):
            cur.append(prev[j] + 1 if ca == cb else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def main():
    trace = (FIX / "joy" / "original_cot.txt").read_text(encoding="utf-8")
    paragraphs = [p for p in trace.split("\n\n") if p.strip()]
    steps = paragraphs[:2] + paragraphs[3:]
    trace_key = key(trace)
    steps_key = key(" ".join(steps))
    common = lcs(steps_key, trace_key)
    doc = {"steps": steps, "lcs": common, "trace_len": len(trace_key), "ratio": common / len(trace_key)}
    (FIX / "lcs_oracle.json").write_text(json.dumps(doc, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    print(common, len(trace_key), doc["ratio"])


if __name__ == "__main__":
    main()
