//! Summary record produced by every protocol run.

use std::collections::BTreeMap;

use crate::dynamics::Trajectory;

/// Transfer efficiency, transient occupation, and model-reduction quality
/// for one protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolReport {
    /// Final population of the protocol's target level. For protocols with
    /// always-on drives this is averaged over the trailing coarse-graining
    /// window to remove micromotion.
    pub transfer_efficiency: f64,
    /// Peak population of the intermediate level over the whole run.
    pub peak_transient: f64,
    /// Sup-norm gap between coarse-grained full populations and the
    /// effective-model populations, when an effective model was run.
    pub effective_deviation: Option<f64>,
    /// Final populations of all levels, in basis order, measured the same
    /// way as `transfer_efficiency`.
    pub final_populations: Vec<f64>,
    pub trajectory: Trajectory,
    pub effective_trajectory: Option<Trajectory>,
    /// Named scalar diagnostics (norm drift, photon number, ...).
    pub extras: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

impl ProtocolReport {
    pub fn new(trajectory: Trajectory, target: &str, intermediate: &str) -> Self {
        let transfer_efficiency = trajectory.final_population(target).expect("target label");
        let peak_transient = trajectory.peak_population(intermediate).expect("level label");
        let final_populations = trajectory.final_populations();
        let mut extras = BTreeMap::new();
        extras.insert("norm_drift".into(), trajectory.max_norm_deviation);
        Self {
            transfer_efficiency,
            peak_transient,
            effective_deviation: None,
            final_populations,
            trajectory,
            effective_trajectory: None,
            extras,
            warnings: Vec::new(),
        }
    }
}
