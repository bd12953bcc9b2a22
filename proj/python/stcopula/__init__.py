"""Geostatistical copula interpolation toolkit.

Thin Python surface over the C++ core: clustering, Gumbel-Hougaard copula
fitting and sampling, extreme-value margin fitting, accuracy metrics, and
the end-to-end interpolation pipeline.
"""

from ._core import (
    Margin,
    Pipeline,
    PipelineError,
    __version__,
    cluster_stations,
    fit_margin,
    fit_theta,
    gh_cdf,
    gh_density,
    gh_sample,
    haversine_m,
    kendall_tau,
    mae,
    rmse,
    select_margin,
)

__all__ = [
    "Margin",
    "Pipeline",
    "PipelineError",
    "__version__",
    "cluster_stations",
    "fit_margin",
    "fit_theta",
    "gh_cdf",
    "gh_density",
    "gh_sample",
    "haversine_m",
    "kendall_tau",
    "mae",
    "rmse",
    "select_margin",
]
