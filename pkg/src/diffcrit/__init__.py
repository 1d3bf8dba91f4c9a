"""Differential polynomial reduction with certificates, Delta-polynomials and
criteria under which their reduction to zero is known in advance."""

from .coeff import CoeffElement, CoeffField, FieldConfig, FieldError
from .criterion import (CompletionStats, Lemma1Report, NotEssentialPair, ProductWitness, Verdict,
                        check_product_witness, complete, criterion_linear_pair, criterion_product,
                        lemma1_equivalence_check, spoly)
from .diffpoly import (ELIMINATION, ORDERLY, Derivative, DiffPoly, DiffRing, NoLeaderError,
                       Ranking, RankedView, compare, is_partially_reduced, is_reduced)
from .kahler import (KahlerForm, PowerCharsetReport, algebraic_member, d, monomial_diff_ideal_member,
                     partial_power, partial_wrt, power_charset_check)
from .oreop import (LinDiffOp, NonTerminationError, OperatorReduction, Theorem1Witness,
                    WitnessReport, op_apply, op_compose, operator_spoly, operator_spoly_reduce,
                    validate_witness)
from .parsing import ParseError, parse_expr, parse_operator, parse_poly
from .reduce import (FULL, PARTIAL, AutoreducedSet, CoherenceReport, Inconsistent, NeedsSplitting,
                     ReductionCertificate, autoreduce, autoreduced_violations, coherence_check,
                     is_autoreduced, pseudo_reduce, reduces_to_zero, verify_certificate)
from .session import Session, SessionError, load, loads

__version__ = "0.1.0"
