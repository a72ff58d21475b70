"""Actual, necessary and sufficient causes in finite structural equation models."""

__version__ = "0.1.0"

from .boolformula import (CNF, DNF, Clause, NormalForm, TruthTable, canonical_cnf, dual_family,
                          eval_nf, family_to_dnf, minimal_necessary_from_minimal_sufficient,
                          minimal_sufficient_from_minimal_necessary, minimize_family, quine_mccluskey,
                          saturate_upward, switch_connectives, truth_table)
from .causes import (ACTUAL, NECESSARY, SUFFICIENT, CauseQuery, CauseVerdict, Situation, Witness,
                     check_ac1, enumerate_causes, is_actual_cause, is_necessary_cause, is_sufficient_cause,
                     make_query)
from .dsl import (build_model, build_query, emit_family, load_query, parse_family, parse_model,
                  pretty_print)
from .errors import (CausatumError, Diagnostic, NotAntichain, ParseError, QueryTooLarge, SourceSpan,
                     ValidationError)
from .family import CauseFamily
from .generate import generate_random_model
from .model import (CausalFormula, CausalModel, Range, Signature, dependency_graph, intervene,
                    intervene_context, satisfies, solve, validate)
