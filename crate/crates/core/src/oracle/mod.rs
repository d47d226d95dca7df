//! Reference solvers used to check the heuristics on small instances.

pub mod enumerate;
pub mod ilp;

pub use enumerate::{
    binomial, brute_force, brute_force_dis, brute_force_dis_with, brute_force_with, count_connected,
    enumerate_connected, enumerate_subsets, ScaleGuard,
};
pub use ilp::{export_ilp, IlpModel, PathLink, SubstitutionChecker};
