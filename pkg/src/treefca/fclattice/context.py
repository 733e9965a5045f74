"""Formal contexts and the two derivation operators."""

import json

import numpy as np

from ..errors import NoSuchObject, ParseError, UnknownAttribute
from .bits import bit_list, from_bits, full, to_bits


class FormalContext:
    """A binary incidence relation between objects and attributes.

    Objects and attributes are arbitrary hashable labels kept in a fixed
    order; all set-valued queries work on their integer positions.  The
    incidence is held twice, as one bitset per object row (over attribute
    positions) and one per attribute column (over object positions).
    Instances are immutable.

    Parameters
    ----------
    objects, attributes : sequence
        Labels, pairwise distinct.
    incidence : iterable of (int, int)
        ``(object index, attribute index)`` pairs.
    """

    __slots__ = ("objects", "attributes", "rows", "cols", "_oidx", "_aidx")

    def __init__(self, objects, attributes, incidence=()):
        objects = tuple(objects)
        attributes = tuple(attributes)
        rows = [0] * len(objects)
        n, m = len(objects), len(attributes)
        for g, a in incidence:
            if not (0 <= g < n and 0 <= a < m):
                raise IndexError(f"incidence pair ({g}, {a}) out of range for {n}x{m} context")
            rows[g] |= 1 << a
        self._set(objects, attributes, rows)

    def _set(self, objects, attributes, rows):
        cols = [0] * len(attributes)
        for g, r in enumerate(rows):
            for a in from_bits(r):
                cols[a] |= 1 << g
        set_ = object.__setattr__
        set_(self, "objects", objects)
        set_(self, "attributes", attributes)
        set_(self, "rows", tuple(rows))
        set_(self, "cols", tuple(cols))
        set_(self, "_oidx", {o: i for i, o in enumerate(objects)})
        set_(self, "_aidx", {a: i for i, a in enumerate(attributes)})
        if len(self._oidx) != len(objects):
            raise ValueError("object labels must be distinct")
        if len(self._aidx) != len(attributes):
            raise ValueError("attribute labels must be distinct")

    def __setattr__(self, name, value):
        raise AttributeError("FormalContext is immutable")

    @classmethod
    def from_bitrows(cls, objects, attributes, rows):
        ctx = cls.__new__(cls)
        rows = list(rows)
        if len(rows) != len(objects):
            raise ValueError("need exactly one row per object")
        limit = full(len(attributes))
        if any(r & ~limit for r in rows):
            raise IndexError("row bitset exceeds attribute count")
        ctx._set(tuple(objects), tuple(attributes), rows)
        return ctx

    @classmethod
    def from_rows(cls, objects, attributes, rows):
        """Build from one iterable of attribute indices per object."""
        return cls.from_bitrows(objects, attributes, [to_bits(r) for r in rows])

    @classmethod
    def from_matrix(cls, matrix, objects=None, attributes=None):
        matrix = np.asarray(matrix, dtype=bool)
        n, m = matrix.shape
        objects = range(n) if objects is None else objects
        attributes = range(m) if attributes is None else attributes
        rows = [to_bits(np.flatnonzero(r).tolist()) for r in matrix]
        return cls.from_bitrows(objects, attributes, rows)

    # -- basic queries -------------------------------------------------

    @property
    def n_objects(self):
        return len(self.objects)

    @property
    def n_attributes(self):
        return len(self.attributes)

    @property
    def incidence(self):
        return frozenset((g, a) for g, r in enumerate(self.rows) for a in from_bits(r))

    def to_matrix(self):
        out = np.zeros((self.n_objects, self.n_attributes), dtype=bool)
        for g, r in enumerate(self.rows):
            out[g, bit_list(r)] = True
        return out

    def object_index(self, label):
        try:
            return self._oidx[label]
        except KeyError:
            raise NoSuchObject(label) from None

    def attribute_index(self, label):
        try:
            return self._aidx[label]
        except KeyError:
            raise UnknownAttribute(label) from None

    def attribute_indices(self, labels):
        return frozenset(self.attribute_index(a) for a in labels)

    def object_indices(self, labels):
        return frozenset(self.object_index(g) for g in labels)

    def row(self, g):
        """Attribute indices of object ``g`` (an index)."""
        return frozenset(from_bits(self.rows[g]))

    def column(self, a):
        return frozenset(from_bits(self.cols[a]))

    # -- bitset derivations ------------------------------------------

    def intent_bits(self, extent):
        """Attributes shared by every object in the ``extent`` bitset."""
        if extent.bit_count() <= len(self.attributes):
            b = full(len(self.attributes))
            for g in from_bits(extent):
                b &= self.rows[g]
            return b
        b = 0
        for a, c in enumerate(self.cols):
            if c & extent == extent:
                b |= 1 << a
        return b

    def extent_bits(self, intent):
        if intent.bit_count() <= len(self.objects):
            e = full(len(self.objects))
            for a in from_bits(intent):
                e &= self.cols[a]
            return e
        e = 0
        for g, r in enumerate(self.rows):
            if r & intent == intent:
                e |= 1 << g
        return e

    # -- derived contexts --------------------------------------------

    def subcontext(self, objects=None, attributes=None):
        """Induced subcontext on the given object / attribute indices (order kept)."""
        oi = range(self.n_objects) if objects is None else list(objects)
        ai = range(self.n_attributes) if attributes is None else list(attributes)
        remap = {a: k for k, a in enumerate(ai)}
        rows = []
        for g in oi:
            r = self.rows[g]
            rows.append(to_bits(remap[a] for a in from_bits(r) if a in remap))
        return FormalContext.from_bitrows(
            [self.objects[g] for g in oi], [self.attributes[a] for a in ai], rows
        )

    def transpose(self):
        return FormalContext.from_bitrows(self.attributes, self.objects, self.cols)

    def apposition(self, other):
        """Side-by-side union over a shared object list; attribute labels must be disjoint."""
        if self.objects != other.objects:
            raise ValueError("apposition requires identical object lists")
        shift = self.n_attributes
        rows = [r | (s << shift) for r, s in zip(self.rows, other.rows)]
        return FormalContext.from_bitrows(self.objects, self.attributes + other.attributes, rows)

    def drop_full_columns(self):
        keep = [a for a, c in enumerate(self.cols) if c != full(self.n_objects)]
        return self.subcontext(attributes=keep)

    def clarify_attributes(self):
        """Remove later duplicates of identical columns."""
        seen = set()
        keep = []
        for a, c in enumerate(self.cols):
            if c not in seen:
                seen.add(c)
                keep.append(a)
        return self.subcontext(attributes=keep)

    # -- misc ----------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, FormalContext):
            return NotImplemented
        return (
            self.objects == other.objects
            and self.attributes == other.attributes
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.objects, self.attributes, self.rows))

    def __repr__(self):
        n_inc = sum(r.bit_count() for r in self.rows)
        return f"FormalContext({self.n_objects} objects, {self.n_attributes} attributes, {n_inc} crosses)"

    def to_table(self, cross="x", blank="."):
        """Plain-text cross table, mostly for debugging."""
        names = [str(a) for a in self.attributes]
        width = max([len(str(o)) for o in self.objects] + [1])
        lines = [" " * width + " " + " ".join(names)]
        for o, r in zip(self.objects, self.rows):
            cells = [(cross if r >> a & 1 else blank).center(len(n)) for a, n in enumerate(names)]
            lines.append(str(o).rjust(width) + " " + " ".join(cells))
        return "\n".join(lines)


def derive_attributes(ctx, objects):
    """Attributes common to all objects in ``objects`` (indices)."""
    return frozenset(from_bits(ctx.intent_bits(to_bits(objects))))


def derive_objects(ctx, attributes):
    """Objects having every attribute in ``attributes`` (indices)."""
    return frozenset(from_bits(ctx.extent_bits(to_bits(attributes))))


def closure(ctx, attributes):
    """Attribute closure ``B''``."""
    return frozenset(from_bits(ctx.intent_bits(ctx.extent_bits(to_bits(attributes)))))


def object_closure(ctx, objects):
    return frozenset(from_bits(ctx.extent_bits(ctx.intent_bits(to_bits(objects)))))


# -- JSON ------------------------------------------------------------------


def _label(x):
    return x if isinstance(x, (str, int)) else str(x)


def context_to_dict(ctx):
    return {
        "objects": [_label(o) for o in ctx.objects],
        "attributes": [_label(a) for a in ctx.attributes],
        "incidence": sorted([g, a] for g, a in ctx.incidence),
    }


def context_from_dict(doc):
    try:
        pairs = [(int(g), int(a)) for g, a in doc["incidence"]]
        return FormalContext(doc["objects"], doc["attributes"], pairs)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"malformed context document: {exc}") from exc


def save_context(ctx, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(context_to_dict(ctx), fh, indent=1)
        fh.write("\n")


def load_context(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return context_from_dict(doc)
