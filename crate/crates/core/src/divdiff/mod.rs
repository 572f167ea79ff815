//! Scalar divided differences, their closed forms and series.

mod closed;
mod function;
pub mod multiindex;
mod nodes;
mod series;

pub use closed::{
    bang_shriek, dd_power, dd_resolvent, multinomial_identity, power_sum_exact, simplex_moment_s,
    simplex_moment_s_exact, simplex_moment_t, simplex_moment_t_exact, simplex_moment_t_full_form,
    MultinomialMode,
};
pub use function::{Domain, HolomorphicFunction};
pub use multiindex::{Compositions, MultiIndex};
pub use nodes::{
    contour_within, dd_contour, dd_contour_report, dd_explicit, dd_hermite, dd_recursive,
    divided_difference, margin_circle, simplex_lattice, DdMethod, NodeSet, DEFAULT_COINCIDENCE_TOL,
    HULL_SAMPLES_PER_AXIS,
};
pub use series::{dd_series_eval, SeriesValue, SeriesVariant};
pub(crate) use series::SHELL_GROWTH_LIMIT;
