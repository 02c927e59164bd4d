//! Two single-wire cuts of a p = 2 QAOA circuit around one separator qubit.

pub mod plan;
pub mod qpd;
pub mod sample;
pub mod tables;

pub use plan::{build_cut_plan, CutPlan};
pub use qpd::{harada_terms, kappa, peng_terms, Prep, QpdTerm, Scheme};
pub use sample::{reconstruct_distribution, sample_cut, sample_cut_shot, SignedSampleSet};
pub use tables::{exact_cut_distribution, CutDistribution, FragmentTables};
