"""Graph JSON documents and the small CSV files exchanged by the CLI.

Graph document schema::

    {
      "nodes": [0, 1, ...],
      "edges": [[i, j, length], ...],
      "mu": [...],                      # optional, uniform when absent
      "attributes": [                   # optional, one entry per node
        {"curves": [[...], ...],
         "histograms": [{"bin_width": w, "masses": [...]}, ...]},
        ...
      ]
    }

Floats are written with ``repr`` precision so a load/save round trip is exact.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .attributes import AttributeBundle, Curve, Histogram
from .graph import AttributedGraph


def graph_to_dict(g: AttributedGraph) -> dict:
    doc = {
        "nodes": list(g.nodes),
        "edges": [[i, j, length] for i, j, length in g.edges],
        "mu": [float(x) for x in g.mu],
    }
    if g.attributes is not None:
        doc["attributes"] = [
            {
                "curves": [[float(x) for x in c.samples] for c in a.curves],
                "histograms": [{"bin_width": h.bin_width, "masses": [float(x) for x in h.masses]}
                               for h in a.histograms],
            }
            for a in g.attributes
        ]
    return doc


def graph_from_dict(doc: dict) -> AttributedGraph:
    nodes = list(doc["nodes"])
    if nodes != list(range(len(nodes))):
        raise ValueError("node ids must be 0..N-1 in order")
    attrs = None
    if doc.get("attributes") is not None:
        attrs = [
            AttributeBundle(
                curves=[Curve(np.asarray(c, dtype=float)) for c in a.get("curves", [])],
                histograms=[Histogram(np.asarray(h["masses"], dtype=float), h["bin_width"])
                            for h in a.get("histograms", [])],
            )
            for a in doc["attributes"]
        ]
    return AttributedGraph(len(nodes), [tuple(e) for e in doc["edges"]], doc.get("mu"), attrs)


def save_graph(g: AttributedGraph, path) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(g)) + "\n")


def load_graph(path) -> AttributedGraph:
    return graph_from_dict(json.loads(Path(path).read_text()))


def write_labels(path, labels, header=("node_id", "group")) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, lab in enumerate(labels):
            w.writerow([i, int(lab)])


def read_labels(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    rows.sort(key=lambda r: int(r[0]))
    return np.array([int(r[1]) for r in rows], dtype=int)
