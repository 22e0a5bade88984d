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

"""Writes the small synthetic corpus used by the tests and the quick-start.

Twenty template sentences with three entity types (Person, Organization,
Location) and two relation types (WorksFor, LocatedIn).
"""

import argparse
import json
import random

PEOPLE = [["Alice", "Smith"], ["Bob"], ["Carol", "Jones"], ["Dmitri"], ["Eva", "Lind"],
          ["Farid"], ["Grace", "Hopper"], ["Hiro", "Tanaka"]]
ORGS = [["Acme", "Corp"], ["Globex"], ["Initech"], ["Umbrella", "Labs"], ["Hooli"],
        ["Stark", "Industries"]]
PLACES = [["Berlin"], ["Paris"], ["New", "York"], ["Osaka"], ["Lima"], ["Cape", "Town"]]

TEMPLATES = [
    ("{p} works for {o} in {l} .", True, True),
    ("{p} joined {o} , which is based in {l} .", True, True),
    ("{o} is headquartered in {l} .", False, True),
    ("{p} is employed by {o} .", True, False),
    ("Last year {p} moved to {o} near {l} .", True, True),
    ("The office of {o} is in {l} .", False, True),
]


def build(seed):
    rng = random.Random(seed)
    sentences = []
    while len(sentences) < 20:
        template, works, located = TEMPLATES[len(sentences) % len(TEMPLATES)]
        slots = {"p": rng.choice(PEOPLE), "o": rng.choice(ORGS), "l": rng.choice(PLACES)}
        tokens, entities, index = [], [], {}
        for word in template.split():
            if word in ("{p}", "{o}", "{l}"):
                key = word[1]
                start = len(tokens)
                tokens.extend(slots[key])
                index[key] = len(entities)
                entities.append({"type": {"p": "Person", "o": "Organization", "l": "Location"}[key],
                                 "start": start, "end": len(tokens)})
            else:
                tokens.append(word)
        relations = []
        if works:
            relations.append({"type": "WorksFor", "head": index["p"], "tail": index["o"]})
        if located:
            relations.append({"type": "LocatedIn", "head": index["o"], "tail": index["l"]})
        sentences.append({"tokens": tokens, "entities": entities, "relations": relations})
    return sentences


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", default="toy_corpus.json")
    parser.add_argument("--schema-out", default="toy_schema.json")
    args = parser.parse_args()
    with open(args.out, "w", encoding="utf-8") as f:
        json.dump(build(args.seed), f, indent=1)
        f.write("\n")
    schema = {"entities": ["Person", "Organization", "Location"],
              "relations": ["WorksFor", "LocatedIn"], "symmetric": []}
    with open(args.schema_out, "w", encoding="utf-8") as f:
        json.dump(schema, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
