//! Registered cases: closed-form data, limit estimation and the per-case
//! pipeline tying the series identities to the recurrence.

mod form;
mod limit;
mod registry;
mod run;

pub use form::SeriesForm;
pub use limit::{
    aitken, estimate_from_ratios, estimate_limit, exact_sequences, fit_rate, fit_window, float_precision, fmt_sig,
    linear_fit, log_poly_extrapolate, log_shift_extrapolate, power_extrapolate, ratio_series, rescale, FitOutcome,
    LimitEstimate, RateFit, RatioSeries, MIN_FIT_POINTS,
};
pub use registry::{
    builtin_case, AnalyticCheck, CaseSpec, ConstTerm, EichlerRelation, LimitTarget, PointKind, RateLaw, Registry,
    Singularity, Stated, StatedValue, TauPoint, REGISTRY_ENV,
};
pub use run::{
    analytic_check, audit_recurrence, case_series, check_initial_values, default_n, judge, run_all, run_case,
    run_cases, CaseReport, IntegrandCheck, RecurrenceAudit, RunOptions, TermAudit, GEOMETRIC_RATIO_TOLERANCE,
    LOGLIKE_SPREAD, LOGLIKE_TOLERANCE, POWER_EXPONENT_RANGE,
};
