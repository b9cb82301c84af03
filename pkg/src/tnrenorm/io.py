"""Network files: a self-describing JSON document, bit-exact on reload.

Layout (format_version 1)::

    {"format_version": 1,
     "structure": "TT",
     "dims": {"N": 3, "p": 2, "b": 2},
     "init": {"mean": 1.0, "std": 0.5, "seed": 0, "positive": false},
     "order": [0, 1, 2],
     "nodes": [
      {"shape": [2, 2],
       "indices": [{"kind": "physical-out", "dim": 2, "peer": null},
                   {"kind": "bond", "dim": 2, "peer": [1, 0]}],
       "data": [...]},
      ...]}

Floats are written with ``repr``, the shortest decimal that round-trips.
"""

import json
import math
from pathlib import Path

from .network import (BondConsistencyError, IndexRef, InitParams,
                      TensorNetworkLayer)
from .tensor import as_tensor

FORMAT_VERSION = 1


class MalformedDocumentError(ValueError):
    pass


class FormatVersionError(ValueError):
    pass


def _dumps(obj):
    return json.dumps(obj, separators=(", ", ": "), allow_nan=False,
                      ensure_ascii=True)


def network_to_text(tn: TensorNetworkLayer) -> str:
    for k, t in enumerate(tn.tensors):
        if not all(math.isfinite(x) for x in t.ravel().tolist()):
            raise ValueError(f"node {k} holds non-finite entries")
    head = {
        "format_version": FORMAT_VERSION,
        "structure": tn.structure,
        "dims": tn.dims,
        "init": tn.init.to_dict() if tn.init is not None else None,
        "order": list(tn.order),
    }
    lines = ["{"]
    for key, value in head.items():
        lines.append(f' "{key}": {_dumps(value)},')
    lines.append(' "nodes": [')
    node_lines = []
    for t, idx in zip(tn.tensors, tn.indices):
        node = {
            "shape": list(t.shape),
            "indices": [{"kind": ix.kind, "dim": ix.dim,
                         "peer": list(ix.peer) if ix.peer is not None else None}
                        for ix in idx],
            "data": t.ravel().tolist(),
        }
        node_lines.append("  " + _dumps(node))
    lines.append(",\n".join(node_lines))
    lines.append(" ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_network(tn: TensorNetworkLayer, path):
    Path(path).write_bytes(network_to_text(tn).encode("utf-8"))


def _require(doc, key, kind):
    if key not in doc:
        raise MalformedDocumentError(f"missing field {key!r}")
    if not isinstance(doc[key], kind):
        raise MalformedDocumentError(f"field {key!r} has the wrong type")
    return doc[key]


def network_from_text(text: str) -> TensorNetworkLayer:
    """Parse and validate a network document.

    Raises:
        MalformedDocumentError: unparsable or structurally wrong document.
        FormatVersionError: unsupported ``format_version``.
        BondConsistencyError: the network fails validation.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(f"not a JSON document: {exc}") from None
    if not isinstance(doc, dict):
        raise MalformedDocumentError("top level must be an object")
    version = _require(doc, "format_version", int)
    if version != FORMAT_VERSION:
        raise FormatVersionError(
            f"format_version {version} is not supported (expected {FORMAT_VERSION})")
    structure = _require(doc, "structure", str)
    dims = doc.get("dims") or {}
    init = doc.get("init")
    order = _require(doc, "order", list)
    nodes = _require(doc, "nodes", list)
    tensors, indices = [], []
    try:
        for node in nodes:
            shape = node["shape"]
            tensors.append(as_tensor(node["data"], shape))
            indices.append([
                IndexRef(ix["kind"], ix["dim"],
                         tuple(ix["peer"]) if ix["peer"] is not None else None)
                for ix in node["indices"]])
        init = InitParams(**init) if init is not None else None
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedDocumentError(f"bad node record: {exc}") from None
    return TensorNetworkLayer(tensors, indices, structure, order, dims, init)


def load_network(path) -> TensorNetworkLayer:
    return network_from_text(Path(path).read_bytes().decode("utf-8"))


def load_document(path) -> dict:
    """Read a JSON object (used for sweep spec files)."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(f"not a JSON document: {exc}") from None
    if not isinstance(doc, dict):
        raise MalformedDocumentError("top level must be an object")
    return doc


__all__ = ["FORMAT_VERSION", "BondConsistencyError", "FormatVersionError",
           "MalformedDocumentError", "load_document", "load_network",
           "network_from_text", "network_to_text", "save_network"]
