#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Exports ViDoRe v2 BEIR-style datasets from the Hugging Face hub into the
layout read by `serval`: corpus.jsonl with page images on disk, queries.jsonl
and qrels.tsv.

  python3 tools/export_vidore.py --out data            # all nine datasets
  python3 tools/export_vidore.py --out data RERB SAXA  # a subset

Needs the `datasets` package and hub access.
"""
import argparse
import json
import os

REGISTRY = {
    "RERB": "vidore/restaurant_esg_reports_beir",
    "SAXA": "vidore/synthetic_axa_filtered_v1.0",
    "SAXAM": "vidore/synthetic_axa_filtered_v1.0_multilingual",
    "SEME": "vidore/synthetic_economics_macro_economy_2024_filtered_v1.0",
    "SEMEM": "vidore/synthetics_economics_macro_economy_2024_filtered_v1.0_multilingual",
    "SMBTI": "vidore/synthetic_mit_biomedical_tissue_interactions_unfiltered",
    "SMBTIM": "vidore/synthetic_mit_biomedical_tissue_interactions_unfiltered_multilingual",
    "SRS": "vidore/synthetic_rse_restaurant_filtered_v1.0",
    "SRSM": "vidore/synthetic_rse_restaurant_filtered_v1.0_multilingual",
}


def export(name: str, hf_path: str, out_root: str, split: str) -> None:
    from datasets import load_dataset

    root = os.path.join(out_root, name)
    os.makedirs(os.path.join(root, "images"), exist_ok=True)

    corpus = load_dataset(hf_path, "corpus", split=split)
    with open(os.path.join(root, "corpus.jsonl"), "w", encoding="utf-8") as f:
        for row in corpus:
            doc_id = str(row["corpus-id"])
            rel = f"images/{doc_id}.png"
            row["image"].save(os.path.join(root, rel), format="PNG")
            f.write(json.dumps({"_id": doc_id, "image_path": rel}) + "\n")

    queries = load_dataset(hf_path, "queries", split=split)
    with open(os.path.join(root, "queries.jsonl"), "w", encoding="utf-8") as f:
        for row in queries:
            f.write(json.dumps({"_id": str(row["query-id"]), "text": row["query"]},
                               ensure_ascii=False) + "\n")

    qrels = load_dataset(hf_path, "qrels", split=split)
    with open(os.path.join(root, "qrels.tsv"), "w", encoding="utf-8") as f:
        f.write("query-id\tcorpus-id\tscore\n")
        for row in qrels:
            f.write(f"{row['query-id']}\t{row['corpus-id']}\t{int(row['score'])}\n")
    print(f"{name}: {len(corpus)} documents, {len(queries)} queries, {len(qrels)} judgments")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--split", default="test")
    parser.add_argument("names", nargs="*", help="dataset names (default: all)")
    args = parser.parse_args()
    unknown = sorted(set(args.names) - set(REGISTRY))
    if unknown:
        parser.error("unknown dataset(s): " + ", ".join(unknown))
    for name in args.names or list(REGISTRY):
        export(name, REGISTRY[name], args.out, args.split)


if __name__ == "__main__":
    main()
