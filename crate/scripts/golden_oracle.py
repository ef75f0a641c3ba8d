#!/usr/bin/env python3
"""Independent brute-force recomputation of the end-to-end comparison
report over the CLI test fixtures.

This script deliberately shares no code with the Rust implementation:
token attributions for the additive toy models are written down
analytically (each token's Shapley value in an additive game is exactly
its word weight), and every aggregation step below is a direct loop over
the defining formulas. Its output, oracle_values.json, is frozen into
the test fixtures; the acceptance suite checks the pipeline's report
against it numerically.

Run from the repository root:

    python3 scripts/golden_oracle.py
"""

import json
import unicodedata
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "crates/cli/tests/fixtures"
PUNCT = "⟨punct⟩"
K = 3


def normalize(raw):
    s = unicodedata.normalize("NFC", raw).lower()
    s = unicodedata.normalize("NFC", s)
    start, end = 0, len(s)
    while start < end and not s[start].isalnum():
        start += 1
    while end > start and not s[end - 1].isalnum():
        end -= 1
    return s[start:end] or None


def load_membership(path):
    """topic label list and P(topic|w) maps from the matrix CSV."""
    rows = {}
    with open(path) as f:
        header = f.readline().strip().split(",")
        assert header == ["topic_id", "word", "p_word_given_topic"], header
        for line in f:
            if not line.strip():
                continue
            t, w, p = line.strip().split(",")
            rows.setdefault(int(t), {})[normalize(w)] = float(p)
    num_topics = max(rows) + 1
    # renormalize each topic row (row sums are exactly 1.0 here)
    for t, row in rows.items():
        s = sum(row.values())
        for w in row:
            row[w] /= s
    membership = {}
    words = set(w for row in rows.values() for w in row)
    for w in words:
        col = [rows.get(t, {}).get(w, 0.0) for t in range(num_topics)]
        total = sum(col)
        membership[w] = [c / total for c in col]
    labels = [f"topic_{t}" for t in range(num_topics)]
    return labels, membership


def explain(model_path, sentences, labels, membership):
    model = json.loads(Path(model_path).read_text())
    weights = {normalize(k): v for k, v in model["weights"].items()}

    # per-instance word-level values; additive game => token value = weight
    instances = []
    for sent in sentences:
        values = []
        for tok in sent.split():
            w = normalize(tok)
            if w is None:
                values.append((PUNCT, 0.0))
            else:
                values.append((w, weights.get(w, 0.0)))
        instances.append(values)

    counts = {}
    for inst in instances:
        for w, _ in inst:
            counts[w] = counts.get(w, 0) + 1

    # inverse-frequency global word importance
    g = {}
    for inst in instances:
        for w, v in inst:
            g[w] = g.get(w, 0.0) + abs(v)
    for w in g:
        g[w] /= counts[w]

    # topic importances with the OTHER bucket last
    G = [0.0] * (len(labels) + 1)
    for w, gw in g.items():
        if w in membership:
            for t, p in enumerate(membership[w]):
                G[t] += p * gw
        else:
            G[-1] += gw
    total = sum(G)
    return model["model_id"], [v / total for v in G]


def ranked(indices, labels, a, b, delta):
    return [
        {
            "rank": i + 1,
            "topic": labels[t],
            "value_a": a[t],
            "value_b": b[t],
            "delta": delta[t],
        }
        for i, t in enumerate(indices)
    ]


def model_rows(indices, labels, values):
    return [
        {"rank": i + 1, "topic": labels[t], "value": values[t]}
        for i, t in enumerate(indices)
    ]


def main():
    sentences = [
        line for line in (FIXTURES / "corpus.txt").read_text().splitlines() if line.strip()
    ]
    labels, membership = load_membership(FIXTURES / "membership.csv")
    labels_other = labels + ["OTHER"]

    id_a, a = explain(FIXTURES / "model_a.json", sentences, labels, membership)
    id_b, b = explain(FIXTURES / "model_b.json", sentences, labels, membership)

    delta = [x - y for x, y in zip(a, b)]
    distance = sum(abs(d) for d in delta)

    idx = list(range(len(labels_other)))
    most_diff = sorted(idx, key=lambda t: (-abs(delta[t]), labels_other[t]))[:K]
    most_sim = sorted(idx, key=lambda t: (abs(delta[t]), labels_other[t]))[:K]
    a_desc = sorted(idx, key=lambda t: (-a[t], labels_other[t]))[:K]
    a_asc = sorted(idx, key=lambda t: (a[t], labels_other[t]))[:K]
    b_desc = sorted(idx, key=lambda t: (-b[t], labels_other[t]))[:K]
    b_asc = sorted(idx, key=lambda t: (b[t], labels_other[t]))[:K]

    report = {
        "models": [id_a, id_b],
        "distance_l1": distance,
        "delta": {labels_other[t]: delta[t] for t in sorted(idx, key=lambda t: labels_other[t])},
        "most_different": ranked(most_diff, labels_other, a, b, delta),
        "most_similar": ranked(most_sim, labels_other, a, b, delta),
        "per_model": {
            "a": {
                "model_id": id_a,
                "most_important": model_rows(a_desc, labels_other, a),
                "least_important": model_rows(a_asc, labels_other, a),
            },
            "b": {
                "model_id": id_b,
                "most_important": model_rows(b_desc, labels_other, b),
                "least_important": model_rows(b_asc, labels_other, b),
            },
        },
    }

    out = FIXTURES / "golden" / "oracle_values.json"
    out.write_text(json.dumps(report, indent=2) + "\n")
    print(f"wrote {out}")
    print(f"distance_l1 = {distance!r}")
    for row in report["most_different"]:
        print("  most different:", row["topic"], row["delta"])


if __name__ == "__main__":
    main()
