#!/usr/bin/env python3
# Copyright 2026 The Sciex Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Converts SpERT-style JSON (CoNLL04, ADE releases) to the sciex dataset format.

Input: a JSON array of {"tokens", "entities": [{"type", "start", "end"}],
"relations": [{"type", "head", "tail"}], ...}. Extra keys (orig_id, pos)
are dropped unless --keep-pos is given and a "pos" list is present.
Also writes the schema implied by the data when --schema-out is set.
"""

import argparse
import json
import sys


def convert(items, keep_pos):
    out = []
    for n, item in enumerate(items):
        tokens = item["tokens"]
        ents = []
        for e in item.get("entities", []):
            if not 0 <= e["start"] < e["end"] <= len(tokens):
                sys.exit(f"sentence {n}: entity span {e['start']}..{e['end']} out of range")
            ents.append({"type": e["type"], "start": e["start"], "end": e["end"]})
        rels = [{"type": r["type"], "head": r["head"], "tail": r["tail"]}
                for r in item.get("relations", [])]
        sentence = {"tokens": tokens, "entities": ents, "relations": rels}
        if keep_pos and "pos" in item:
            sentence["pos"] = item["pos"]
        out.append(sentence)
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("input", nargs="+", help="SpERT JSON files (concatenated in order)")
    parser.add_argument("-o", "--out", required=True)
    parser.add_argument("--schema-out")
    parser.add_argument("--keep-pos", action="store_true")
    args = parser.parse_args()

    items = []
    for path in args.input:
        with open(path, encoding="utf-8") as f:
            items.extend(json.load(f))
    sentences = convert(items, args.keep_pos)
    with open(args.out, "w", encoding="utf-8") as f:
        json.dump(sentences, f, ensure_ascii=False)
        f.write("\n")
    if args.schema_out:
        ents = sorted({e["type"] for s in sentences for e in s["entities"]})
        rels = sorted({r["type"] for s in sentences for r in s["relations"]})
        with open(args.schema_out, "w", encoding="utf-8") as f:
            json.dump({"entities": ents, "relations": rels, "symmetric": []}, f, indent=2)
            f.write("\n")
    print(f"{len(sentences)} sentences", file=sys.stderr)


if __name__ == "__main__":
    main()
