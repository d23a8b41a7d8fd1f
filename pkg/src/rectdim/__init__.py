"""Dimension numbers for limsup sets of rectangles, their applications and numerical verifiers."""
from .applications import (LinearFormsInstance, MultiplicativeResult, Regime, SimultaneousInstance, classify_regime,
                           exponent_orbit, linear_forms_dim, liminf_rate, mult_dim, mult_pair_dim, shrinking_target_dim,
                           simultaneous_dim, simultaneous_sup)
from .cantor import CantorAxisSpec
from .coverlab import (RectangleSpec, critical_exponent, cover_count, empirical_critical_exponent, grid_count,
                       singular_cover_cost)
from .dimcore import (DimensionReport, ExponentProfile, Partition, ProductSpaceSpec, TiePolicy, build_alphabet,
                      candidate_dim, compute_s, compute_s_hat, partition_for, sup_over_candidates)
from .errors import (BudgetExceededError, EmptyCandidatesError, InvalidProfileError, RectDimError, ValidationError,
                     VerificationError)

__version__ = "0.1.0"
