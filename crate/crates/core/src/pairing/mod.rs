//! Test forms on P1 x P1 and their pairing with graph currents and the limit current.

pub mod atlas;
pub mod experiment;
pub mod forms;
pub mod fourier;
pub mod graph;
pub mod limit;

pub use atlas::{localize, partition, LocalizedForm};
pub use experiment::{convergence_experiment, fit_rate, ExperimentGrids, PairingReport, PairingRow, RateFit};
pub use forms::{
    build_case_test_form, Case, CaseForm, FormCoefficients, GlobalForm, GlobalTerm, Parameter, ProductKahlerForm,
    ScaledForm, SharedForm, SpherePolynomial, SumForm, Support, TestForm, WithHolomorphicPart,
};
pub use fourier::{fourier_coefficients, truncation_error_bound, FourierCoefficients, FourierTestFunction};
pub use graph::{pair_graph_current, pair_graph_current_levels, PairingEstimate, Strategy};
pub use limit::{pair_limit_current, LimitCurrent, LimitOptions};
