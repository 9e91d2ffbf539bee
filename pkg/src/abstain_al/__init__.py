"""Pool-based active classification with a reject option, plus exact oracles."""

__version__ = "0.1.0"

from .distribution import (  # noqa: E402
    LabeledDistribution,
    LabeledSample,
    LabelOracle,
    Pool,
    bayes_chow_classifier,
    bayes_classifier,
)
from .hypotheses import (  # noqa: E402
    ABSTAIN,
    AbstainingHypothesis,
    Hypothesis,
    HypothesisClass,
    InstanceSpace,
    midpoint,
)
from .learners import active_abstain, compute_schedule, erm, finite_diameter, midpoint_algorithm  # noqa: E402
from .risk import alpha, chow_risk_exact, chow_risk_empirical, lp_loss  # noqa: E402
