#!/usr/bin/env python3
"""Download the published Kurdish NER corpus and convert it to the TSV format
the kurdner tools consume (header `sentence_id<TAB>word<TAB>tag`, LF endings,
no blank lines).

Requires network access and the `datasets` package:

    pip install datasets
    python3 scripts/fetch_corpus.py --out data/kurdish_ner.tsv

The source dataset is https://huggingface.co/datasets/abdulhade/Kurdish_NameEntityRecognition
Column names vary between dataset revisions, so the converter looks for a
token column and a tag column by name rather than position.
"""

import argparse
import sys

TOKEN_COLUMNS = ("tokens", "token", "words", "word")
TAG_COLUMNS = ("ner_tags", "tags", "tag", "labels", "label")


def pick_column(names, candidates):
    for c in candidates:
        if c in names:
            return c
    raise SystemExit(f"none of {candidates} found in dataset columns {sorted(names)}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dataset", default="abdulhade/Kurdish_NameEntityRecognition")
    ap.add_argument("--split", default="train")
    ap.add_argument("--out", required=True, help="output TSV path")
    args = ap.parse_args()

    try:
        from datasets import load_dataset
    except ImportError:
        raise SystemExit("pip install datasets")

    ds = load_dataset(args.dataset, split=args.split)
    token_col = pick_column(ds.column_names, TOKEN_COLUMNS)
    tag_col = pick_column(ds.column_names, TAG_COLUMNS)

    # ClassLabel-encoded tags carry their string names in the feature metadata.
    tag_feature = ds.features[tag_col]
    id_to_name = None
    if hasattr(tag_feature, "feature") and hasattr(tag_feature.feature, "names"):
        id_to_name = tag_feature.feature.names

    n_rows = 0
    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        f.write("sentence_id\tword\ttag\n")
        for i, example in enumerate(ds):
            words = example[token_col]
            tags = example[tag_col]
            if isinstance(words, str):  # sentence-level rows rather than token lists
                words, tags = [words], [tags]
            if len(words) != len(tags):
                print(f"skipping sentence {i}: {len(words)} words vs {len(tags)} tags",
                      file=sys.stderr)
                continue
            for word, tag in zip(words, tags):
                if id_to_name is not None and isinstance(tag, int):
                    tag = id_to_name[tag]
                word = str(word).strip()
                tag = str(tag).strip()
                if not word or not tag:
                    continue
                if any(ch.isspace() for ch in word):
                    word = word.split()[0]  # keep single-token words only
                f.write(f"{i + 1}\t{word}\t{tag}\n")
                n_rows += 1
    print(f"wrote {n_rows} tokens to {args.out}")


if __name__ == "__main__":
    main()
