"""Many-valued contexts, threshold predicates and conceptual scaling.

A many-valued context is a table of objects by attributes whose cells hold
tokens from a linearly ordered value domain.  The ordering is declared,
never inferred from the data, in a small JSON document::

    {"id_column": "id", "label_column": "play",
     "attributes": [{"name": "overlook", "values": ["rainy", "overcast", "sunny"]}, ...]}

Cells are stored as value positions in an integer array (``-1`` = absent).
"""

import csv
import enum
import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainViolation,
    DuplicateObject,
    IncompleteContext,
    NoSuchObject,
    ParseError,
    ScaleDomainViolation,
    UnknownAttribute,
)
from .fclattice.bits import to_bits
from .fclattice.context import FormalContext

MISSING = -1
_BOOL_TOKENS = {"true": True, "false": False}


class Direction(str, enum.Enum):
    LEQ = "<="
    GEQ = ">="

    def __str__(self):
        return self.value


LEQ = Direction.LEQ
GEQ = Direction.GEQ


@dataclass(frozen=True)
class ValueDomain:
    """Ordered values of one attribute, least first."""

    name: str
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(str(v) for v in self.values))
        if not self.values:
            raise ValueError(f"domain of {self.name!r} is empty")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"domain of {self.name!r} has repeated values")
        object.__setattr__(self, "_pos", {v: i for i, v in enumerate(self.values)})

    def __len__(self):
        return len(self.values)

    def index(self, value):
        try:
            return self._pos[value]
        except KeyError:
            raise ValueError(f"{value!r} is not a value of {self.name!r}") from None

    def __contains__(self, value):
        return value in self._pos

    def successor(self, value):
        i = self.index(value)
        if i + 1 >= len(self.values):
            raise ValueError(f"{value!r} is the greatest value of {self.name!r}")
        return self.values[i + 1]

    def predecessor(self, value):
        i = self.index(value)
        if i == 0:
            raise ValueError(f"{value!r} is the least value of {self.name!r}")
        return self.values[i - 1]


@dataclass(frozen=True, order=True)
class Predicate:
    """Threshold test ``attribute <= threshold`` or ``attribute >= threshold``.

    ``str()`` gives the canonical form ``attr:<=:value`` used to merge
    columns across trees; :attr:`label` is the human-readable form, with
    boolean attributes written as ``windy`` / ``not windy``.
    """

    attribute: str
    direction: Direction
    threshold: str

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        object.__setattr__(self, "threshold", str(self.threshold))

    def __str__(self):
        return f"{self.attribute}:{self.direction.value}:{self.threshold}"

    def __repr__(self):
        return f"Predicate({str(self)!r})"

    @property
    def label(self):
        flag = _BOOL_TOKENS.get(self.threshold.lower())
        if flag is not None:
            return self.attribute if flag else f"not {self.attribute}"
        return f"{self.attribute}{self.direction.value}{self.threshold}"

    def holds(self, domain, value):
        """Whether a value (token) satisfies the predicate under ``domain``'s order."""
        v, t = domain.index(value), domain.index(self.threshold)
        return v <= t if self.direction is LEQ else v >= t

    def negation(self, domain):
        """The complementary predicate; ``<= v`` becomes ``>= succ(v)``."""
        if self.direction is LEQ:
            return Predicate(self.attribute, GEQ, domain.successor(self.threshold))
        return Predicate(self.attribute, LEQ, domain.predecessor(self.threshold))

    def to_dict(self):
        return {"attr": self.attribute, "dir": self.direction.value, "value": self.threshold}

    @classmethod
    def from_dict(cls, d):
        return cls(d["attr"], Direction(d["dir"]), d["value"])

    @classmethod
    def parse(cls, text):
        """Inverse of ``str()``."""
        attr, direction, value = text.split(":", 2)
        return cls(attr, Direction(direction), value)


class ManyValuedContext:
    """Objects described by ordered many-valued attributes, plus optional class labels.

    Immutable.  ``codes[g, m]`` is the position of object ``g``'s value in
    the domain of attribute ``m`` or ``-1`` when the cell is absent.
    """

    def __init__(self, objects, domains, codes, labels=None):
        self.objects = tuple(str(g) for g in objects)
        self.domains = tuple(domains)
        codes = np.asarray(codes, dtype=np.int16).reshape(len(self.objects), len(self.domains))
        for m, d in enumerate(self.domains):
            col = codes[:, m]
            if np.any((col < MISSING) | (col >= len(d))):
                raise ValueError(f"code out of range for attribute {d.name!r}")
        codes.setflags(write=False)
        self.codes = codes
        self.labels = None if labels is None else tuple(str(x) for x in labels)
        if self.labels is not None and len(self.labels) != len(self.objects):
            raise ValueError("need one label per object")
        self._oidx = {}
        for i, g in enumerate(self.objects):
            if g in self._oidx:
                raise DuplicateObject(g)
            self._oidx[g] = i
        self._aidx = {d.name: i for i, d in enumerate(self.domains)}

    @classmethod
    def from_rows(cls, objects, domains, rows, labels=None):
        """Build from rows of tokens (``None`` for an absent cell)."""
        domains = tuple(domains)
        codes = np.full((len(rows), len(domains)), MISSING, dtype=np.int16)
        for r, row in enumerate(rows):
            for m, (d, tok) in enumerate(zip(domains, row)):
                if tok is None or tok == "":
                    continue
                if tok not in d:
                    raise DomainViolation(r, d.name, tok)
                codes[r, m] = d.index(tok)
        return cls(objects, domains, codes, labels)

    # -- access --------------------------------------------------------

    @property
    def attributes(self):
        return tuple(d.name for d in self.domains)

    def __len__(self):
        return len(self.objects)

    @property
    def complete(self):
        return not bool(np.any(self.codes == MISSING))

    def object_index(self, g):
        try:
            return self._oidx[str(g)]
        except KeyError:
            raise NoSuchObject(g) from None

    def attribute_index(self, m):
        try:
            return self._aidx[m]
        except KeyError:
            raise UnknownAttribute(m) from None

    def domain(self, m):
        return self.domains[self.attribute_index(m)]

    def value(self, g, m):
        c = self.codes[self.object_index(g), self.attribute_index(m)]
        return None if c == MISSING else self.domains[self.attribute_index(m)].values[c]

    def row(self, g):
        """Mapping attribute -> token (absent cells omitted)."""
        i = self.object_index(g)
        return {
            d.name: d.values[c] for d, c in zip(self.domains, self.codes[i]) if c != MISSING
        }

    def label(self, g):
        return None if self.labels is None else self.labels[self.object_index(g)]

    def observed_values(self, m):
        """Values of ``m`` that occur in the data, in domain order."""
        j = self.attribute_index(m)
        col = self.codes[:, j]
        present = sorted(set(int(c) for c in col[col != MISSING]))
        return tuple(self.domains[j].values[c] for c in present)

    def take(self, indices, objects=None):
        """New context with rows at ``indices`` (repeats allowed, e.g. for bootstrap copies)."""
        indices = list(indices)
        if objects is None:
            objects = [self.objects[i] for i in indices]
        labels = None if self.labels is None else [self.labels[i] for i in indices]
        return ManyValuedContext(objects, self.domains, self.codes[indices], labels)

    def select(self, objects):
        return self.take([self.object_index(g) for g in objects])

    def with_rows(self, objects, rows, labels=None):
        """Context over the same domains holding new rows (dicts or sequences of tokens)."""
        seqs = []
        for row in rows:
            if isinstance(row, dict):
                seqs.append([row.get(m) for m in self.attributes])
            else:
                seqs.append(list(row))
        return ManyValuedContext.from_rows(objects, self.domains, seqs, labels)

    def __eq__(self, other):
        if not isinstance(other, ManyValuedContext):
            return NotImplemented
        return (
            self.objects == other.objects
            and self.domains == other.domains
            and np.array_equal(self.codes, other.codes)
            and self.labels == other.labels
        )

    def __repr__(self):
        return f"ManyValuedContext({len(self.objects)} objects, attributes={list(self.attributes)})"

    # -- predicates ------------------------------------------------------

    def predicate_mask(self, p):
        """Tri-state evaluation over all objects: (holds, known) boolean arrays."""
        j = self.attribute_index(p.attribute)
        t = self.domains[j].index(p.threshold)
        col = self.codes[:, j]
        known = col != MISSING
        holds = (col <= t) if p.direction is LEQ else (col >= t)
        return holds & known, known

    def negation(self, p):
        return p.negation(self.domain(p.attribute))


# -- domain spec and CSV -----------------------------------------------------


@dataclass(frozen=True)
class DomainSpec:
    domains: tuple
    label_column: str = None
    id_column: str = None

    def to_dict(self):
        return {
            "id_column": self.id_column,
            "label_column": self.label_column,
            "attributes": [{"name": d.name, "values": list(d.values)} for d in self.domains],
        }


def load_domain_spec(source):
    """Read a domain declaration from a path or an already-parsed dict."""
    if isinstance(source, dict):
        doc = source
    else:
        try:
            with open(source, encoding="utf-8") as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{source}: {exc}") from exc
    try:
        domains = tuple(ValueDomain(a["name"], a["values"]) for a in doc["attributes"])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed domain spec: {exc}") from exc
    return DomainSpec(domains, doc.get("label_column"), doc.get("id_column"))


def save_domain_spec(spec, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec.to_dict(), fh, indent=2)
        fh.write("\n")


def load_csv(path, domain_spec, label_column=None):
    """Read a CSV file into a :class:`ManyValuedContext`.

    Columns are matched by header name.  Empty cells become absent values;
    the label column (from the argument or the spec) is kept out of the
    attributes.  Object ids come from the spec's ``id_column`` or, without
    one, from the row position.
    """
    spec = domain_spec if isinstance(domain_spec, DomainSpec) else load_domain_spec(domain_spec)
    label_column = label_column or spec.label_column
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        body = [r for r in reader if r]
    if header is None:
        return ManyValuedContext([], spec.domains, np.zeros((0, len(spec.domains))), None)
    header = [h.strip() for h in header]
    pos = {h: i for i, h in enumerate(header)}
    missing = [d.name for d in spec.domains if d.name not in pos]
    if missing:
        raise ParseError(f"CSV header lacks attributes {missing}")
    if label_column is not None and label_column not in pos:
        raise ParseError(f"CSV header lacks label column {label_column!r}")
    objects, rows, labels = [], [], []
    seen = set()
    for r, line in enumerate(body):
        g = line[pos[spec.id_column]].strip() if spec.id_column else str(r)
        if g in seen:
            raise DuplicateObject(g)
        seen.add(g)
        objects.append(g)
        rows.append([line[pos[d.name]].strip() for d in spec.domains])
        if label_column is not None:
            labels.append(line[pos[label_column]].strip())
    return ManyValuedContext.from_rows(
        objects, spec.domains, rows, labels if label_column is not None else None
    )


def save_csv(ctx, path, label_column="label", id_column="id"):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        head = [id_column, *ctx.attributes]
        if ctx.labels is not None:
            head.append(label_column)
        w.writerow(head)
        for i, g in enumerate(ctx.objects):
            cells = [
                "" if c == MISSING else d.values[c] for d, c in zip(ctx.domains, ctx.codes[i])
            ]
            if ctx.labels is not None:
                cells.append(ctx.labels[i])
            w.writerow([g, *cells])


# -- model relation and scalings ---------------------------------------------


def satisfies(ctx, g, p):
    """``True``/``False`` when g's cell is present, ``None`` when it is absent."""
    i = ctx.object_index(g)
    j = ctx.attribute_index(p.attribute)
    c = ctx.codes[i, j]
    if c == MISSING:
        return None
    t = ctx.domains[j].index(p.threshold)
    return bool(c <= t) if p.direction is LEQ else bool(c >= t)


def _require_complete(ctx, attributes=None):
    cols = range(len(ctx.domains)) if attributes is None else [ctx.attribute_index(a) for a in attributes]
    for j in cols:
        if np.any(ctx.codes[:, j] == MISSING):
            raise IncompleteContext(f"attribute {ctx.domains[j].name!r} has absent cells")


def interordinal_predicates(ctx):
    """All ``m <= v`` and ``m >= v`` over observed values, per attribute ``<=`` first."""
    out = []
    for d in ctx.domains:
        vals = ctx.observed_values(d.name)
        out.extend(Predicate(d.name, LEQ, v) for v in vals)
        out.extend(Predicate(d.name, GEQ, v) for v in vals)
    return out


def predicate_context(ctx, predicates, objects=None, drop_full=False):
    """Objects x predicates, crossed where the model relation holds."""
    idx = range(len(ctx.objects)) if objects is None else [ctx.object_index(g) for g in objects]
    idx = list(idx)
    masks = [ctx.predicate_mask(p)[0][idx] for p in predicates]
    preds = list(predicates)
    if drop_full:
        keep = [k for k, mk in enumerate(masks) if not mk.all()]
        preds = [preds[k] for k in keep]
        masks = [masks[k] for k in keep]
    rows = [0] * len(idx)
    for a, mk in enumerate(masks):
        for r in np.flatnonzero(mk):
            rows[r] |= 1 << a
    return FormalContext.from_bitrows([ctx.objects[i] for i in idx], preds, rows)


def interordinal_scale_context(ctx):
    """The interordinally scaled context; columns true for every object are omitted."""
    _require_complete(ctx)
    return predicate_context(ctx, interordinal_predicates(ctx), drop_full=True)


def interordinal_scale(domain):
    """One-dimensional interordinal scale over a domain: values x predicates."""
    preds = [Predicate(domain.name, LEQ, v) for v in domain.values]
    preds += [Predicate(domain.name, GEQ, v) for v in domain.values]
    rows = [
        to_bits(a for a, p in enumerate(preds) if p.holds(domain, v)) for v in domain.values
    ]
    return FormalContext.from_bitrows(domain.values, preds, rows)


def nominal_scale(domain):
    n = len(domain.values)
    return FormalContext(domain.values, domain.values, [(i, i) for i in range(n)])


def plain_scale(ctx, scales, clarify=False):
    """Replace every cell by its row in the attribute's scale.

    ``scales`` maps attribute names to a :class:`FormalContext` whose objects
    are that attribute's value tokens.  Derived attributes are
    ``(attribute, scale attribute)`` pairs.
    """
    attrs = []
    blocks = []
    for m, scale in scales.items():
        j = ctx.attribute_index(m)
        d = ctx.domains[j]
        offset = len(attrs)
        attrs.extend((m, s) for s in scale.attributes)
        blocks.append((j, d, scale, offset))
    rows = []
    for i in range(len(ctx.objects)):
        r = 0
        for j, d, scale, offset in blocks:
            c = ctx.codes[i, j]
            if c == MISSING:
                continue
            tok = d.values[c]
            try:
                srow = scale.rows[scale.object_index(tok)]
            except KeyError:
                raise ScaleDomainViolation(f"value {tok!r} of {d.name!r} missing from its scale") from None
            r |= srow << offset
        rows.append(r)
    out = FormalContext.from_bitrows(ctx.objects, attrs, rows)
    return out.clarify_attributes() if clarify else out


# -- logical scaling ---------------------------------------------------------


class Formula:
    """Boolean combination of predicates.  Build with ``&``, ``|`` and ``~``."""

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


class Atom(Formula):
    def __init__(self, predicate):
        self.predicate = predicate

    def mask(self, ctx):
        holds, known = ctx.predicate_mask(self.predicate)
        return holds, known

    def attributes(self):
        return {self.predicate.attribute}


class And(Formula):
    def __init__(self, *parts):
        self.parts = parts

    def mask(self, ctx):
        holds = np.ones(len(ctx), dtype=bool)
        known = np.ones(len(ctx), dtype=bool)
        for f in self.parts:
            h, k = f.mask(ctx)
            holds &= h
            known &= k
        return holds, known

    def attributes(self):
        return set().union(*(f.attributes() for f in self.parts)) if self.parts else set()


class Or(Formula):
    def __init__(self, *parts):
        self.parts = parts

    def mask(self, ctx):
        holds = np.zeros(len(ctx), dtype=bool)
        known = np.ones(len(ctx), dtype=bool)
        for f in self.parts:
            h, k = f.mask(ctx)
            holds |= h
            known &= k
        return holds, known

    def attributes(self):
        return set().union(*(f.attributes() for f in self.parts)) if self.parts else set()


class Not(Formula):
    def __init__(self, part):
        self.part = part

    def mask(self, ctx):
        h, k = self.part.mask(ctx)
        return ~h & k, k

    def attributes(self):
        return self.part.attributes()


def atom(attribute, direction, threshold):
    return Atom(Predicate(attribute, direction, threshold))


def equals(attribute, value):
    """``attribute = value`` as the conjunction of both thresholds."""
    return And(atom(attribute, LEQ, value), atom(attribute, GEQ, value))


@dataclass(frozen=True)
class LogicalFormula:
    name: str
    formula: Formula


def logical_scale(ctx, formulas):
    """One derived attribute per named formula, crossed where it evaluates true."""
    cols = []
    for lf in formulas:
        attrs = lf.formula.attributes()
        for a in attrs:
            ctx.attribute_index(a)
        _require_complete(ctx, attrs)
        holds, _ = lf.formula.mask(ctx)
        cols.append(holds)
    rows = [0] * len(ctx)
    for a, col in enumerate(cols):
        for r in np.flatnonzero(col):
            rows[r] |= 1 << a
    return FormalContext.from_bitrows(ctx.objects, [lf.name for lf in formulas], rows)
