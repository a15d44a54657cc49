"""One-call quality assessment of a covariance-selection model."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .auc_bounds import bound_report
from .chow_liu import chow_liu_tree
from .divergences import divergences_from_spectrum
from .graph_model import EdgeSet, covariance_select
from .matrix_core import _as_correlation, spectrum_of
from .mc_oracle import empirical_roc, sample_llrt
from .spectral_auc import auc_complement

SANDWICH_SLACK = 1e-7


@dataclass
class QualityReport:
    n: int
    kl: float
    reverse_kl: float
    jeffreys: float
    auc: float
    one_minus_auc: float
    auc_lower: float
    auc_upper: float
    auc_lower_asymptotic: float
    auc_upper_asymptotic: float
    d_star: float
    lambdas: list
    alphas: list
    mc_auc: float | None = None
    mc_se: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def sandwich_holds(self, slack: float = SANDWICH_SLACK) -> bool:
        return self.auc_lower - slack <= self.auc <= self.auc_upper + slack

    def to_dict(self) -> dict:
        return asdict(self)


def assess(sigma, structure: EdgeSet | None = None, mc_samples: int | None = None,
           seed: int | None = None, strict: bool = True) -> QualityReport:
    """Fit the model on ``structure`` (Chow-Liu tree when None) and report on it."""
    sigma = _as_correlation(sigma)
    if structure is None:
        structure = chow_liu_tree(sigma)
    model = covariance_select(sigma, structure, strict=strict)
    spec = spectrum_of(sigma, model)
    div = divergences_from_spectrum(spec)
    bounds = bound_report(spec, div)
    tail = auc_complement(spec)
    rep = QualityReport(
        n=sigma.n,
        kl=div.kl,
        reverse_kl=div.reverse_kl,
        jeffreys=div.jeffreys,
        auc=1.0 - tail,
        one_minus_auc=tail,
        auc_lower=bounds.lower,
        auc_upper=bounds.upper,
        auc_lower_asymptotic=bounds.lower_asymptotic,
        auc_upper_asymptotic=bounds.upper_asymptotic,
        d_star=bounds.d_star,
        lambdas=[float(x) for x in spec.lambdas],
        alphas=[float(x) for x in spec.alphas],
        diagnostics={
            "trace_delta": spec.trace,
            "logdet_delta": spec.logdet,
            "edges": [list(e) for e in structure.canonical()],
            "violations": model.violations._asdict() if model.violations else None,
            "feasible_region_a": bounds.a_param,
        },
    )
    if mc_samples:
        roc = empirical_roc(sample_llrt(sigma, model, mc_samples, seed))
        rep.mc_auc = roc.auc_mw
        rep.mc_se = roc.se
    return rep
