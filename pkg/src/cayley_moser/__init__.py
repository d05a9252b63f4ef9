"""Optimal selling of an item to Poisson-arriving offers before a deadline.

The seller accepts an offer ``X`` when it beats the threshold ``mu(r)`` for
the remaining time ``r``; if nothing is accepted by the deadline the item
goes for a salvage price drawn from the residual law.  The package computes
the threshold policy, the exact laws of the sale price and the time to sale,
their large-deadline limits, and checks them against a Monte Carlo replay.
"""

from .asymptotics import (
    RVExponent,
    TailClass,
    asymptotics_report,
    classify_tail,
    mu_asymptotic,
    rv_diagnostic,
    that_limit,
    that_limit_moments,
    var_asymptotic,
)
from .distributions import (
    Beta,
    Exponential,
    Frechet,
    Gamma,
    OfferModel,
    Pareto,
    PointMass,
    ResidualSpec,
    Tabulated,
    Uniform,
    make_offer,
)
from .errors import *  # noqa: F401,F403
from .policy import PolicyCurve, reconstruct_offer_cdf
from .price import export_price, price_cdf, price_mean, price_pdf, price_var
from .simulator import SimBatch, SimConfig, simulate_batch, simulate_run, summarize
from .stoptime import atom_prob, export_stop, stop_cdf, stop_law, stop_mean, stop_var, that_cdf
from .validate import cdf_distance, dkw_threshold, figure_replication, oracle_suite

__version__ = "0.1.0"

__all__ = [
    "Beta",
    "Exponential",
    "Frechet",
    "Gamma",
    "OfferModel",
    "Pareto",
    "PointMass",
    "PolicyCurve",
    "RVExponent",
    "ResidualSpec",
    "SimBatch",
    "SimConfig",
    "Tabulated",
    "TailClass",
    "Uniform",
    "asymptotics_report",
    "atom_prob",
    "cdf_distance",
    "classify_tail",
    "dkw_threshold",
    "export_price",
    "export_stop",
    "figure_replication",
    "make_offer",
    "mu_asymptotic",
    "oracle_suite",
    "price_cdf",
    "price_mean",
    "price_pdf",
    "price_var",
    "reconstruct_offer_cdf",
    "rv_diagnostic",
    "simulate_batch",
    "simulate_run",
    "stop_cdf",
    "stop_law",
    "stop_mean",
    "stop_var",
    "summarize",
    "that_cdf",
    "that_limit",
    "that_limit_moments",
    "var_asymptotic",
    "CayleyMoserError",
    "DomainError",
    "EmptyBatch",
    "MgfInfinite",
    "MomentInfinite",
    "NoDensity",
    "NonPositiveValue",
    "NotApplicable",
    "NotConcave",
    "NotIncreasing",
    "RateTooSmall",
    "SecondMomentInfinite",
    "StepUnderflow",
    "TailNotIntegrable",
    "TooFewSamples",
    "UnknownFigure",
    "UnknownTail",
]
