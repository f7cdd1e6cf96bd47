use rayon::prelude::*;

use crate::icm::derive_seed;
use crate::money::Money;
use crate::Graph;

use super::{run, Algorithm, RunConfig, RunError};

pub const SWEEP_HEADER: &str =
    "cell,instance,algorithm,budget,seed,cost,sigma,half_width,bound,oracle_ratio,seeds,edges,error";

/// Cartesian product of algorithms and budgets applied to every instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub algorithms: Vec<Algorithm>,
    pub budgets: Vec<Money>,
    /// Settings shared by every cell; algorithm, budget and seed are overridden per cell.
    pub base: RunConfig,
}

#[derive(Debug)]
pub struct SweepInstance {
    pub name: String,
    pub graph: Result<Graph, String>,
}

/// Runs every cell (instance-major, then algorithm, then budget) and returns
/// the CSV table. Cell `i` runs with seed `derive_seed(master_seed, i)`.
/// Failed cells keep their row with the error class in the last column.
pub fn sweep(spec: &SweepSpec, instances: &[SweepInstance]) -> String {
    let cells: Vec<(usize, &SweepInstance, Algorithm, Money)> = instances
        .iter()
        .flat_map(|inst| {
            spec.algorithms
                .iter()
                .flat_map(move |&alg| spec.budgets.iter().map(move |&k| (inst, alg, k)))
        })
        .enumerate()
        .map(|(i, (inst, alg, k))| (i, inst, alg, k))
        .collect();

    let rows: Vec<Vec<String>> = cells
        .par_iter()
        .map(|&(i, inst, algorithm, budget)| {
            let seed = derive_seed(spec.base.master_seed, i as u64);
            let config = RunConfig {
                algorithm,
                budget,
                master_seed: seed,
                timing: false,
                ..spec.base.clone()
            };
            let result = match &inst.graph {
                Ok(g) => run(&config, g),
                Err(e) => Err(RunError::Load(e.clone())),
            };
            let mut row = vec![
                i.to_string(),
                inst.name.clone(),
                algorithm.name().to_string(),
                budget.to_string(),
                seed.to_string(),
            ];
            match result {
                Ok(r) => row.extend([
                    r.cost.to_string(),
                    r.sigma.to_string(),
                    r.half_width.to_string(),
                    r.bound.as_ref().map(|b| b.factor.to_string()).unwrap_or_default(),
                    r.oracle.as_ref().map(|o| o.ratio.to_string()).unwrap_or_default(),
                    r.seeds_field(),
                    r.edges_field(),
                    String::new(),
                ]),
                Err(e) => {
                    row.extend(std::iter::repeat_n(String::new(), 7));
                    row.push(e.code().to_string());
                }
            }
            row
        })
        .collect();

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER.split(',')).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
