"""Concept enumeration and lattice queries.

Concepts are enumerated depth-first with the Close-by-One canonicity test,
including the inherited failure sets of FCbO so that a canonicity test that
failed at a parent is not repeated in its children.  Support pruning turns
the same walk into an iceberg enumeration: extents only shrink along a
branch, so a branch can be cut as soon as its extent drops below the
threshold.
"""

import sys
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

from ..errors import CapacityExceeded, NotClosed
from .bits import from_bits, full, lectic_key, to_bits
from .context import FormalContext


@dataclass(frozen=True)
class FormalConcept:
    extent: frozenset
    intent: frozenset

    def __repr__(self):
        return f"FormalConcept(extent={sorted(self.extent)}, intent={sorted(self.intent)})"


def _walk(ctx, min_support=0, on_concept=None):
    """Yield every concept of ``ctx`` (as extent/intent bitsets) with support >= min_support."""
    n_attr = ctx.n_attributes
    cols = ctx.cols
    intent_bits = ctx.intent_bits
    below = [(1 << j) - 1 for j in range(n_attr + 1)]
    top_ext = full(ctx.n_objects)
    if top_ext.bit_count() < min_support:
        return
    top_int = intent_bits(top_ext)
    if sys.getrecursionlimit() < n_attr + 100:
        sys.setrecursionlimit(n_attr + 100)

    def rec(ext, intent, start, failed):
        on_concept(ext, intent)
        queue = []
        failed = list(failed)
        for j in range(start, n_attr):
            if intent >> j & 1:
                continue
            if failed[j] & below[j] & ~intent:
                continue
            new_ext = ext & cols[j]
            if new_ext.bit_count() < min_support:
                continue
            new_int = intent_bits(new_ext)
            if new_int & below[j] & ~intent:
                failed[j] = new_int
            else:
                queue.append((new_ext, new_int, j))
        for new_ext, new_int, j in queue:
            rec(new_ext, new_int, j + 1, failed)

    rec(top_ext, top_int, 0, [0] * n_attr)


def count_concepts(ctx, min_support=0):
    """Number of concepts, without materialising them."""
    n = 0

    def bump(_e, _i):
        nonlocal n
        n += 1

    _walk(ctx, min_support, bump)
    return n


def _collect(ctx, min_support, max_attributes):
    if max_attributes is not None and ctx.n_attributes > max_attributes:
        raise CapacityExceeded(ctx.n_attributes, max_attributes)
    pairs = []
    _walk(ctx, min_support, lambda e, i: pairs.append((e, i)))
    n = ctx.n_attributes
    pairs.sort(key=lambda p: lectic_key(p[1], n))
    return pairs


def enumerate_concepts(ctx, max_attributes=None):
    """All concepts of ``ctx`` as a :class:`ConceptLattice`, in lectic order of intents.

    ``max_attributes`` optionally bounds ``|M|``; exceeding it raises
    :class:`CapacityExceeded`.  Without a bound any width is accepted.
    """
    return ConceptLattice(ctx, _collect(ctx, 0, max_attributes))


def iceberg(ctx, min_support, max_attributes=None):
    """Concepts whose extent holds at least ``min_support`` objects.

    The result is join-closed in the full lattice; its cover relation is
    the full cover relation restricted to the kept concepts.
    """
    if min_support < 0:
        raise ValueError("min_support must be non-negative")
    return ConceptLattice(ctx, _collect(ctx, min_support, max_attributes), min_support=min_support)


def brute_force_concepts(ctx, max_attributes=20):
    """Reference enumeration over every attribute subset; for tests only."""
    m = ctx.n_attributes
    if m > max_attributes:
        raise CapacityExceeded(m, max_attributes)
    has = {}
    for g, a in ctx.incidence:
        has.setdefault(g, set()).add(a)
    objects = range(ctx.n_objects)
    attrs = range(m)

    def ext_of(b):
        return frozenset(g for g in objects if b <= has.get(g, set()))

    def int_of(e):
        return frozenset(a for a in attrs if all(a in has.get(g, ()) for g in e))

    out = set()
    for k in range(m + 1):
        for b in combinations(attrs, k):
            e = ext_of(set(b))
            out.add(FormalConcept(e, int_of(e)))
    return out


class ConceptLattice:
    """Concepts of a context ordered by extent inclusion.

    Built by :func:`enumerate_concepts` or :func:`iceberg`.  The cover
    relation is computed on first access.
    """

    def __init__(self, context, pairs, min_support=0):
        self.context = context
        self.min_support = min_support
        self._ext = [e for e, _ in pairs]
        self._int = [i for _, i in pairs]
        self._by_intent = {i: k for k, i in enumerate(self._int)}
        self._by_extent = {e: k for k, e in enumerate(self._ext)}

    def __len__(self):
        return len(self._ext)

    def __iter__(self):
        return (self.concept(k) for k in range(len(self)))

    def __getitem__(self, k):
        return self.concept(k)

    def concept(self, k):
        return FormalConcept(frozenset(from_bits(self._ext[k])), frozenset(from_bits(self._int[k])))

    @property
    def concepts(self):
        return list(self)

    def extent_bits(self, k):
        return self._ext[k]

    def intent_bits(self, k):
        return self._int[k]

    def index(self, concept):
        """Position of ``concept`` (a FormalConcept or an intent set)."""
        intent = concept.intent if isinstance(concept, FormalConcept) else concept
        try:
            return self._by_intent[to_bits(intent)]
        except KeyError:
            raise KeyError(f"not a concept of this lattice: {concept!r}") from None

    def index_of_extent(self, extent):
        return self._by_extent[to_bits(extent)]

    def __contains__(self, concept):
        intent = concept.intent if isinstance(concept, FormalConcept) else concept
        return to_bits(intent) in self._by_intent

    @property
    def top(self):
        return self._by_extent.get(full(self.context.n_objects))

    @property
    def bottom(self):
        return self._by_intent.get(full(self.context.n_attributes))

    def support(self, k, relative=False):
        s = self._ext[k].bit_count()
        if relative:
            n = self.context.n_objects
            return s / n if n else 0.0
        return s

    def leq(self, i, j):
        return self._ext[i] & self._ext[j] == self._ext[i]

    def object_concept(self, g):
        """Index of the object concept of object index ``g``."""
        ctx = self.context
        return self._by_intent[ctx.intent_bits(1 << g)]

    def attribute_concept(self, a):
        ctx = self.context
        return self._by_intent[ctx.intent_bits(ctx.cols[a])]

    # -- cover relation --------------------------------------------

    def _lower_neighbours(self, k):
        ctx = self.context
        ext, intent = self._ext[k], self._int[k]
        candidates = full(ctx.n_attributes) & ~intent
        minimal = candidates
        out = []
        for m in from_bits(candidates):
            bit = 1 << m
            new_int = ctx.intent_bits(ext & ctx.cols[m])
            if (new_int & ~intent & ~bit) & minimal:
                minimal &= ~bit
            else:
                idx = self._by_intent.get(new_int)
                if idx is not None:
                    out.append(idx)
        return out

    @cached_property
    def covers(self):
        """Set of ``(lower, upper)`` index pairs of the Hasse diagram."""
        return frozenset((lo, k) for k in range(len(self)) for lo in self._lower_neighbours(k))

    @cached_property
    def _up(self):
        up = [[] for _ in range(len(self))]
        for lo, hi in sorted(self.covers):
            up[lo].append(hi)
        return up

    @cached_property
    def _down(self):
        down = [[] for _ in range(len(self))]
        for lo, hi in sorted(self.covers):
            down[hi].append(lo)
        return down

    def upper_covers(self, k):
        return list(self._up[k])

    def lower_covers(self, k):
        return list(self._down[k])


# -- queries ------------------------------------------------------------


def atoms(lattice):
    """Concepts covering the bottom element."""
    b = lattice.bottom
    if b is None:
        return frozenset()
    return frozenset(lattice.concept(k) for k in lattice.upper_covers(b))


def object_concepts(lattice):
    ctx = lattice.context
    return frozenset(lattice.concept(lattice.object_concept(g)) for g in range(ctx.n_objects))


def is_atomistic_on_objects(lattice):
    """True iff the object concepts are exactly the atoms (ignoring an empty context)."""
    return object_concepts(lattice) == atoms(lattice)


def _minimal_sets(sets):
    out = []
    for s in sorted(set(sets), key=int.bit_count):
        if not any(t & s == t for t in out):
            out.append(s)
    return out


def minimal_generators(ctx, intent):
    """All inclusion-minimal subsets of ``intent`` whose closure is ``intent``.

    A subset D of a closed intent B generates B iff it is not contained in
    the row of any object outside B', i.e. iff it meets ``B - {h}'`` for
    each such object h.  The minimal generators are therefore the minimal
    transversals of that family, computed here by Berge multiplication.
    """
    b = to_bits(intent)
    extent = ctx.extent_bits(b)
    if ctx.intent_bits(extent) != b:
        raise NotClosed(sorted(intent))
    family = _minimal_sets(
        b & ~ctx.rows[h] for h in range(ctx.n_objects) if not extent >> h & 1
    )
    transversals = [0]
    for s in family:
        grown = []
        for t in transversals:
            if t & s:
                grown.append(t)
            else:
                grown.extend(t | (1 << x) for x in from_bits(s))
        transversals = _minimal_sets(grown)
    return {frozenset(from_bits(t)) for t in transversals}


def _lattice_of(obj):
    return obj if isinstance(obj, ConceptLattice) else enumerate_concepts(obj)


def local_view(lattice, g, include_neighbors=False):
    """Order filter above the object concept of ``g`` (an object label).

    With ``include_neighbors`` every upper and lower cover of a filter member
    is added as well.  Accepts a lattice or a context.
    """
    lattice = _lattice_of(lattice)
    ctx = lattice.context
    bit = 1 << ctx.object_index(g)
    members = {k for k in range(len(lattice)) if lattice.extent_bits(k) & bit}
    if include_neighbors:
        extra = set()
        for k in members:
            extra.update(lattice.upper_covers(k))
            extra.update(lattice.lower_covers(k))
        members |= extra
    return frozenset(lattice.concept(k) for k in members)


def _as_bits(lattice, c, attr):
    if isinstance(c, int):
        return lattice.extent_bits(c) if attr == "extent" else lattice.intent_bits(c)
    return to_bits(getattr(c, attr))


def concept_join(lattice, concepts):
    """Least upper bound of concepts (FormalConcept objects or lattice indices)."""
    concepts = list(concepts)
    if not concepts:
        raise ValueError("join of an empty family is undefined here")
    ctx = lattice.context
    intent = full(ctx.n_attributes)
    for c in concepts:
        intent &= _as_bits(lattice, c, "intent")
    extent = ctx.extent_bits(intent)
    return FormalConcept(frozenset(from_bits(extent)), frozenset(from_bits(intent)))


def concept_meet(lattice, concepts):
    concepts = list(concepts)
    if not concepts:
        raise ValueError("meet of an empty family is undefined here")
    ctx = lattice.context
    extent = full(ctx.n_objects)
    for c in concepts:
        extent &= _as_bits(lattice, c, "extent")
    intent = ctx.intent_bits(extent)
    return FormalConcept(frozenset(from_bits(extent)), frozenset(from_bits(intent)))


def dominated_by(lattice, p, q):
    """True iff the attribute concept of ``p`` lies below that of ``q`` (labels)."""
    ctx = lattice.context if isinstance(lattice, ConceptLattice) else lattice
    cp = ctx.cols[ctx.attribute_index(p)]
    cq = ctx.cols[ctx.attribute_index(q)]
    return cp & cq == cp


def leaf_coverage(lattice, p, leaf_intents):
    """Number of leaf concepts whose intent contains attribute label ``p``.

    ``leaf_intents`` holds one collection of attribute labels per leaf; each
    is closed in the lattice's context to find its concept.
    """
    ctx = lattice.context if isinstance(lattice, ConceptLattice) else lattice
    pb = 1 << ctx.attribute_index(p)
    count = 0
    for labels in leaf_intents:
        b = to_bits(ctx.attribute_index(a) for a in labels)
        if ctx.intent_bits(ctx.extent_bits(b)) & pb:
            count += 1
    return count


def object_labels(lattice):
    """Reduced labelling: object and attribute labels introduced at each concept."""
    ctx = lattice.context
    objs = [[] for _ in range(len(lattice))]
    attrs = [[] for _ in range(len(lattice))]
    for g in range(ctx.n_objects):
        k = lattice._by_intent.get(ctx.intent_bits(1 << g))
        if k is not None:
            objs[k].append(ctx.objects[g])
    for a in range(ctx.n_attributes):
        k = lattice._by_intent.get(ctx.intent_bits(ctx.cols[a]))
        if k is not None:
            attrs[k].append(ctx.attributes[a])
    return objs, attrs


__all__ = [
    "FormalConcept",
    "ConceptLattice",
    "FormalContext",
    "enumerate_concepts",
    "count_concepts",
    "iceberg",
    "brute_force_concepts",
    "atoms",
    "object_concepts",
    "minimal_generators",
    "local_view",
    "concept_join",
    "concept_meet",
    "dominated_by",
    "leaf_coverage",
]
