//! Single paired run dumped sample by sample.

use faulty_oracle_core::dynamics::IntegratorConfig;
use faulty_oracle_core::progress::{simulate_pair, ProgressSample};
use faulty_oracle_core::SearchModel;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sweep::EngineTag;

pub const TRAJECTORY_HEADER: [&str; 8] = ["t", "success_prob", "F_w", "F_total", "rate_direct", "rate_closed_form", "purity_w", "trace_w"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub success_prob: f64,
    #[serde(rename = "F_w")]
    pub f_w: f64,
    #[serde(rename = "F_total")]
    pub f_total: f64,
    pub rate_direct: f64,
    pub rate_closed_form: f64,
    pub purity_w: f64,
    pub trace_w: f64,
}

impl From<&ProgressSample> for TrajectoryRow {
    fn from(s: &ProgressSample) -> Self {
        Self {
            t: s.t,
            success_prob: s.success_prob,
            f_w: s.f_w,
            f_total: s.f_total,
            rate_direct: s.rate_direct,
            rate_closed_form: s.rate_closed_form,
            purity_w: s.purity_w,
            trace_w: s.trace_w,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulateSpec {
    pub n: usize,
    pub gamma: f64,
    pub energy: f64,
    pub engine: EngineTag,
    pub t_final: f64,
    pub integrator: IntegratorConfig,
}

pub fn simulate(spec: &SimulateSpec) -> Result<Vec<TrajectoryRow>> {
    let model = SearchModel::new(spec.n, spec.energy, spec.gamma)?;
    let samples = simulate_pair(&model, spec.engine.into(), spec.t_final, &spec.integrator)?;
    Ok(samples.iter().map(TrajectoryRow::from).collect())
}
