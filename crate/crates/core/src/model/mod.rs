//! Instances, assortment families, demand laws and assumption checkers.

pub mod checks;
pub mod choice;
pub mod demand;
pub mod family;
pub mod instance;

pub use checks::{
    check_assumptions, check_cdf_dominance, check_substitutability, check_truncation_ratio, default_c_grid, AssumptionReport,
    CdfOrder, TruncationCheck,
};
pub use choice::{ChoiceConfig, ChoiceModel, DemandLaw, MixtureMnl, ProductDemand, RankedPreference, TableEntry};
pub use demand::{DemandDistribution, DemandKind, DemandSpec};
pub use family::{Assortment, AssortmentFamily, FamilySpec, Product};
pub use instance::{build_instance, Instance, InstanceConfig};
