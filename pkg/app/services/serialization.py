"""
Text formats shared by the CLI, the bench runner and the HTTP layer.

Edge list:   first line "n m", then m lines "u v" (u < v, sorted); '#' lines are comments.
Permutation: n lines "i p(i)".
Partial map: lines "u w" for the defined entries, sorted by u.
"""
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

from app.services.graph_core import Graph, GraphError, Permutation, make_graph

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _content_lines(text: str) -> List[str]:
    out = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        out.append(line)
    return out


def _int_pair(line: str, what: str) -> Tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise GraphError(f"malformed {what} line: {line!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as e:
        raise GraphError(f"malformed {what} line: {line!r}") from e


def dumps_graph(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def loads_graph(text: str) -> Graph:
    lines = _content_lines(text)
    if not lines:
        raise GraphError("empty edge-list document")
    n, m = _int_pair(lines[0], "header")
    edges = [_int_pair(line, "edge") for line in lines[1:]]
    if len(edges) != m:
        raise GraphError(f"header announces {m} edges, found {len(edges)}")
    return make_graph(n, edges)


def dumps_permutation(p: Permutation) -> str:
    return "".join(f"{i} {x}\n" for i, x in enumerate(p.image))


def loads_permutation(text: str) -> Permutation:
    pairs = [_int_pair(line, "permutation") for line in _content_lines(text)]
    image = [-1] * len(pairs)
    for i, x in pairs:
        if not 0 <= i < len(pairs) or image[i] != -1:
            raise GraphError(f"permutation file has a bad or repeated index: {i}")
        image[i] = x
    return Permutation(image)


def dumps_partial_map(mapping: Dict[int, int]) -> str:
    return "".join(f"{u} {w}\n" for u, w in sorted(mapping.items()))


def loads_partial_map(text: str) -> Dict[int, int]:
    mapping: Dict[int, int] = {}
    for line in _content_lines(text):
        u, w = _int_pair(line, "partial map")
        if u in mapping:
            raise GraphError(f"partial map defines vertex {u} twice")
        mapping[u] = w
    return mapping


def write_text(path: PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # newline="" keeps output byte-identical across platforms
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_text(path: PathLike) -> str:
    return Path(path).read_text(encoding="utf-8")


def save_graph(path: PathLike, g: Graph) -> None:
    write_text(path, dumps_graph(g))


def load_graph(path: PathLike) -> Graph:
    return loads_graph(read_text(path))


def save_permutation(path: PathLike, p: Permutation) -> None:
    write_text(path, dumps_permutation(p))


def load_permutation(path: PathLike) -> Permutation:
    return loads_permutation(read_text(path))


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def pretty_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()

