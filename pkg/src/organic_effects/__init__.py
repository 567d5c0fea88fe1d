"""Organic direct and indirect effects with post-treatment common causes of mediator and outcome."""

from ._backend import BACKEND
from .bootstrap import BootstrapSummary, bootstrap_effects
from .discrete import DiscreteLaw, fit_discrete_laws, identify_effects, identify_ey1I
from .errors import (DegenerateDesign, DimensionMismatch, EmptyArm, IdentificationGap,
                     MalformedHeader, OrganicError, ParseError, TooManyFailures,
                     ValidationError)
from .io import read_csv, write_csv
from .model import (Dataset, EffectEstimates, ObservedRecord, OutcomeModelFit,
                    ShiftModelFit, default_features, parse_features, validate_dataset)
from .parametric import (DesignMatrix, estimate_effects, fit_outcome_model, fit_shift_model,
                         least_squares, plugin_ey1I)
from .scm import (CounterfactualDraw, ScmSpec, Unsupported, closed_form_effects,
                  draw_counterfactuals, oracle_effects, simulate_observed)

__version__ = "0.1.0"
