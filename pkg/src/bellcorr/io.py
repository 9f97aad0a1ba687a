"""File formats: vertex JSON, facet JSONL, matrix JSON, run manifests."""
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .exactlin import RationalMatrix
from .polytope import Facet, Vertex


def write_vertices(path, vertices: Sequence[Vertex]) -> None:
    with open(path, "w") as fh:
        json.dump([v.to_json() for v in vertices], fh)
        fh.write("\n")


def read_vertices(path) -> list[Vertex]:
    with open(path) as fh:
        return [Vertex.from_json(o) for o in json.load(fh)]


def write_facets(path, facets: Iterable[Facet]) -> int:
    """Stream facets as JSONL; returns the number of lines written."""
    count = 0
    tmp = Path(str(path) + ".part")
    with open(tmp, "w") as fh:
        for f in facets:
            fh.write(json.dumps(f.to_json(), separators=(",", ":")))
            fh.write("\n")
            count += 1
    os.replace(tmp, path)
    return count


def iter_facets(path) -> Iterator[Facet]:
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield Facet.from_json(json.loads(line))
            except (ValueError, KeyError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed facet record ({exc})") from exc


def read_facets(path) -> list[Facet]:
    return list(iter_facets(path))


def read_matrix(path) -> RationalMatrix:
    with open(path) as fh:
        obj = json.load(fh)
    if "normal" in obj:
        obj = obj["normal"]
    return RationalMatrix.from_json(obj)


def write_matrix(path, M: RationalMatrix) -> None:
    with open(path, "w") as fh:
        json.dump(M.to_json(), fh)
        fh.write("\n")


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")
