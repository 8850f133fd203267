//! Toolchain for ORTAC+ tactical mission files.
//!
//! A mission file describes a road graph, a tag ontology, the agents taking
//! part, and the constraints on their movements. The pipeline is:
//!
//! 1. [`parser::parse_mission`] turns text into a [`model::Mission`] with
//!    unresolved selectors.
//! 2. [`analysis::check_static`] resolves tags and attribute filters, expands
//!    list arguments, and produces a [`analysis::GroundMission`].
//! 3. [`planner::plan`] finds a makespan-optimal [`model::Plan`];
//!    [`validator::validate`] checks any plan against the ground constraints.
//! 4. [`pddl`] emits a PDDL3 domain/problem pair for external planners.

pub mod analysis;
pub mod cli;
pub mod filter;
pub mod model;
pub mod parser;
pub mod pddl;
pub mod planfile;
pub mod planner;
pub mod validator;
