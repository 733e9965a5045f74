"""Formal contexts, concept lattices and lattice-based queries."""

from .context import (
    FormalContext,
    closure,
    context_from_dict,
    context_to_dict,
    derive_attributes,
    derive_objects,
    load_context,
    object_closure,
    save_context,
)
from .lattice import (
    ConceptLattice,
    FormalConcept,
    atoms,
    brute_force_concepts,
    concept_join,
    concept_meet,
    count_concepts,
    dominated_by,
    enumerate_concepts,
    iceberg,
    is_atomistic_on_objects,
    object_labels,
    leaf_coverage,
    local_view,
    minimal_generators,
    object_concepts,
)
from .export import class_purity, lattice_to_dict, save_dot, save_lattice, to_dot

__all__ = [
    "ConceptLattice",
    "FormalConcept",
    "FormalContext",
    "atoms",
    "brute_force_concepts",
    "class_purity",
    "closure",
    "concept_join",
    "concept_meet",
    "context_from_dict",
    "context_to_dict",
    "count_concepts",
    "derive_attributes",
    "derive_objects",
    "dominated_by",
    "enumerate_concepts",
    "iceberg",
    "is_atomistic_on_objects",
    "lattice_to_dict",
    "leaf_coverage",
    "load_context",
    "local_view",
    "minimal_generators",
    "object_closure",
    "object_concepts",
    "object_labels",
    "save_context",
    "save_dot",
    "save_lattice",
    "to_dot",
]
