#!/usr/bin/env python3
# SPDX-FileCopyrightText: Copyright (c) 2026 The flashtok Authors
# SPDX-License-Identifier: Apache-2.0
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

"""Runs every JSON-emitting flashtok command and validates the output
against the schemas in docs/."""

import json
import pathlib
import random
import subprocess
import sys
import tempfile

import jsonschema
from referencing import Registry, Resource


def load_registry(docs):
    schemas = {}
    for path in sorted(docs.glob("*.schema.json")):
        doc = json.loads(path.read_text())
        jsonschema.Draft202012Validator.check_schema(doc)
        schemas[doc["$id"]] = doc
    registry = Registry().with_resources(
        (sid, Resource.from_contents(doc)) for sid, doc in schemas.items())
    return schemas, registry


def write_ppm(path, w, h, seed):
    rng = random.Random(seed)
    pixels = bytes(rng.randrange(256) for _ in range(w * h * 3))
    path.write_bytes(b"P6\n%d %d\n255\n" % (w, h) + pixels)


def run(tool, *args):
    proc = subprocess.run([tool, *map(str, args)], capture_output=True, text=True)
    if proc.returncode != 0:
        sys.exit(f"command failed ({proc.returncode}): {args}\n{proc.stderr}")
    return proc.stdout


def main():
    tool, docs = sys.argv[1], pathlib.Path(sys.argv[2])
    schemas, registry = load_registry(docs)

    def check(schema_id, doc, label):
        validator = jsonschema.Draft202012Validator(schemas[schema_id], registry=registry)
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
        if errors:
            sys.exit(f"{label}: {errors[0].message} at {list(errors[0].path)}")
        print(f"ok   {label}")

    def reject(schema_id, doc, label):
        validator = jsonschema.Draft202012Validator(schemas[schema_id], registry=registry)
        if validator.is_valid(doc):
            sys.exit(f"{label}: schema accepted a malformed document")
        print(f"ok   {label} (rejected)")

    small = ["--patch-size", 2, "--grid-side", 8, "--overlap-rate", 0.25,
             "--vit-dim", 8, "--vit-heads", 2, "--vit-depth", 1, "--adapter-out", 4]

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        images = tmp / "images"
        images.mkdir()
        write_ppm(images / "a.ppm", 64, 48, 1)
        write_ppm(images / "b.ppm", 30, 90, 2)

        for strategy in ("static", "dynamic", "overlap", "iss"):
            doc = json.loads(run(tool, "tile", "--image", images / "a.ppm",
                                 "--strategy", strategy))
            check("tile_layout.schema.json", doc, f"tile --strategy {strategy}")
        broken = json.loads(json.dumps(doc))
        broken["tiles"][0]["retain"]["l"] = -1
        reject("tile_layout.schema.json", broken, "tile with negative border")

        out = tmp / "features.bin"
        for stage in ("encoder", "adapter"):
            run(tool, "encode", "--image", images / "b.ppm", "--out", out,
                "--strategy", "iss", "--stage", stage, *small)
            meta = json.loads(pathlib.Path(f"{out}.json").read_text())
            check("encode_meta.schema.json", meta, f"encode --stage {stage}")

        report = json.loads(run(tool, "bench", "--images", images, "--fake-clock",
                                "--n-out", 16, "--strategy", "iss", *small))
        check("bench_report.schema.json", report, "bench")
        broken = json.loads(json.dumps(report))
        del broken["ttft_s"]["p95"]
        reject("bench_report.schema.json", broken, "bench without p95")

        points = tmp / "points.csv"
        points.write_text("name,tps,accuracy\n"
                          "single-static,60.73,62.4\ntiled-dynamic,51.53,64.0\n"
                          "tiled-iss,48.66,64.8\nbaseline-2b,39.07,60.2\n")
        run(tool, "pareto", points, "--json", tmp / "front.json")
        front = json.loads((tmp / "front.json").read_text())
        check("pareto.schema.json", front, "pareto")
        broken = json.loads(json.dumps(front))
        broken["front"][0]["accuracy"] = 120
        reject("pareto.schema.json", broken, "pareto accuracy above 100")


if __name__ == "__main__":
    main()
