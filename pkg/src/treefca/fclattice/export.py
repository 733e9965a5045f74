"""Lattice serialisation: JSON documents and Graphviz DOT Hasse diagrams."""

import json

from .bits import from_bits
from .lattice import object_labels


def _name(x):
    return x if isinstance(x, (str, int)) else str(x)


def lattice_to_dict(lattice):
    """``{concepts: [{extent, intent, count, support}], covers: [[lo, hi]]}`` with labels, not indices.

    ``count`` is the extent size and ``support`` the fraction of all objects.
    """
    ctx = lattice.context
    concepts = []
    for k in range(len(lattice)):
        concepts.append(
            {
                "extent": [_name(ctx.objects[g]) for g in from_bits(lattice.extent_bits(k))],
                "intent": [_name(ctx.attributes[a]) for a in from_bits(lattice.intent_bits(k))],
                "count": lattice.extent_bits(k).bit_count(),
                "support": lattice.support(k, relative=True),
            }
        )
    return {"concepts": concepts, "covers": sorted([lo, hi] for lo, hi in lattice.covers)}


def save_lattice(lattice, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(lattice_to_dict(lattice), fh, indent=1)
        fh.write("\n")


def _display(a):
    return getattr(a, "label", str(a))


def _quote(s):
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def class_purity(lattice, labels, positive):
    """Per concept, the ``(pos, neg)`` counts of its extent under ``labels`` (one per object)."""
    out = []
    for k in range(len(lattice)):
        ext = list(from_bits(lattice.extent_bits(k)))
        pos = sum(1 for g in ext if labels[g] == positive)
        out.append((pos, len(ext) - pos))
    return out


def to_dot(lattice, labels=None, positive=None, name="lattice"):
    """Hasse diagram in DOT with reduced labelling.

    Attribute labels sit above each node, object labels below.  With
    ``labels`` (one class label per object) and ``positive`` every node
    also shows ``pos/neg`` counts of its extent.  Nodes are numbered in
    the lattice's (lectic) order and edges are sorted, so output is
    stable across runs.
    """
    objs, attrs = object_labels(lattice)
    purity = class_purity(lattice, labels, positive) if labels is not None else None
    lines = [f"digraph {_quote(name)} {{", "  rankdir=BT;", "  node [shape=circle, width=0.25, label=\"\"];"]
    for k in range(len(lattice)):
        opts = []
        if attrs[k]:
            opts.append(f"xlabel={_quote(', '.join(_display(a) for a in attrs[k]))}")
        bottom_text = [", ".join(str(o) for o in objs[k])] if objs[k] else []
        if purity is not None:
            bottom_text.append("%d/%d" % purity[k])
        if bottom_text:
            opts.append('label="' + "\\n".join(_quote(t)[1:-1] for t in bottom_text) + '"')
            opts.append("shape=box")
        lines.append(f"  c{k}" + (f" [{', '.join(opts)}]" if opts else "") + ";")
    for lo, hi in sorted(lattice.covers):
        lines.append(f"  c{lo} -> c{hi} [arrowhead=none];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_dot(lattice, path, **kw):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_dot(lattice, **kw))
