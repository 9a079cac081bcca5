//! Cell evaluation.
//!
//! Level-1 parts are computed once per side (or pair) on a bounded pool and
//! then assembled for every requested level. Records come back in cell
//! order whatever the thread count.

use std::sync::Arc;
use std::time::Instant;

use qbridge::bounds::{assemble_first_class, assemble_second_class, first_class_parts, gamma_cross, trek_bounds};
use qbridge::group::builtin::BuiltinGroup;
use qbridge::group::coset::default_stability_tol;
use qbridge::linalg::{projector, CMat, ONE, ZERO};
use qbridge::oracle::{hausdorff_reach_oracle, height_oracle, sample_ball, sample_states, HeightOracle, SampleMode};
use qbridge::optimize::{FunctionBall, OperatorBall};
use qbridge::{
    build_finite_group, build_su2_grid, coset_space, spin_representation, stability_subgroup, BoundReport, BoundValue, BridgeSpec, Error,
    FirstClassParts, GroupModel, OptimizerSettings, ProjectionData, Representation, TrekReport,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{finite_group, Experiment, GroupDef, OracleConfig, RunConfig, SideLabel};
use crate::CliError;

/// Group model plus what is needed to turn side labels into projections.
pub struct GroupContext {
    pub group: Arc<GroupModel>,
    finite: Option<BuiltinGroup>,
    tol: f64,
}

impl GroupContext {
    pub fn build(def: &GroupDef, tol: Option<f64>) -> Result<Self, CliError> {
        let (group, finite) = match def {
            GroupDef::Su2 { resolution } => {
                let g = build_su2_grid(*resolution).map_err(|e| CliError::Config(format!("group: {e}")))?;
                (g, None)
            }
            _ => {
                let b = finite_group(def)?;
                let g = build_finite_group(&b.table, &b.generators).map_err(|e| CliError::Config(format!("group: {e}")))?;
                (g, Some(b))
            }
        };
        let tol = tol.unwrap_or_else(|| default_stability_tol(group.kind()));
        Ok(GroupContext {
            group: Arc::new(group),
            finite,
            tol,
        })
    }

    /// Checks that a label names something this group has.
    pub fn check_label(&self, label: &SideLabel) -> Result<(), CliError> {
        match (label, &self.finite) {
            (SideLabel::Spin(j), None) => {
                let top = self.group.max_exact_degree().unwrap_or(0);
                if (2.0 * j).round() as usize > top {
                    return Err(CliError::Config(format!("spin {j} needs 2j <= {top} at this grid resolution")));
                }
                Ok(())
            }
            (SideLabel::Irrep(name), Some(b)) if b.irrep(name).is_some() => Ok(()),
            (SideLabel::Irrep(name), Some(_)) => Err(CliError::Config(format!("unknown irrep `{name}`"))),
            (SideLabel::Spin(j), Some(_)) => Err(CliError::Config(format!("spin {j} given for a finite group"))),
            (SideLabel::Irrep(name), None) => Err(CliError::Config(format!("irrep `{name}` given for SU(2)"))),
        }
    }

    /// Coherent projection for a side: the highest-weight vector for spins,
    /// the configured vector for finite-group irreps.
    pub fn projection(&self, label: &SideLabel) -> qbridge::Result<ProjectionData> {
        let (rep, v) = match (label, &self.finite) {
            (SideLabel::Spin(j), _) => {
                let rep = spin_representation(&self.group, *j)?;
                let mut v = vec![ZERO; rep.dim()];
                v[0] = ONE;
                (rep, v)
            }
            (SideLabel::Irrep(name), Some(b)) => {
                let ir = b.irrep(name).ok_or_else(|| Error::Parameter(format!("unknown irrep `{name}`")))?;
                let rep = Representation::from_generators(self.group.clone(), name.clone(), &ir.generator_matrices)?;
                (rep, ir.vector.clone())
            }
            (SideLabel::Irrep(name), None) => return Err(Error::Parameter(format!("irrep `{name}` on SU(2)"))),
        };
        stability_subgroup(&Arc::new(rep), &projector(&v), self.tol)
    }
}

/// Per-cell seed from the run seed and the cell key (FNV-1a, then a
/// SplitMix64 finaliser).
pub fn cell_seed(seed: u64, key: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in key.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRecord {
    pub reach: f64,
    pub height: HeightOracle,
    pub ball_a: usize,
    pub ball_b: usize,
    pub states_a: usize,
    pub states_b: usize,
    pub reach_ok: bool,
    pub height_ok: bool,
}

/// One output line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub class: String,
    pub m: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<String>,
    pub q: usize,
    pub cell_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct: Option<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trek: Option<TrekReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_ms: f64,
}

impl Record {
    fn new(class: &str, m: &SideLabel, n: Option<&SideLabel>, q: usize, seed: u64) -> Self {
        Record {
            class: class.into(),
            m: m.to_string(),
            n: n.map(|s| s.to_string()),
            q,
            cell_seed: seed,
            report: None,
            direct: None,
            trek: None,
            oracle: None,
            error: None,
            wall_ms: 0.0,
        }
    }

    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    /// Oracle values above the corresponding bounds.
    pub fn oracle_violation(&self) -> bool {
        self.oracle.as_ref().is_some_and(|o| !(o.reach_ok && o.height_ok))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub records: Vec<Record>,
}

impl RunSummary {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.failed()).count()
    }

    pub fn oracle_violations(&self) -> usize {
        self.records.iter().filter(|r| r.oracle_violation()).count()
    }
}

fn strip_value(v: &mut BoundValue) {
    v.witness = None;
}

fn strip_report(r: &mut BoundReport) {
    for p in &mut r.parts {
        for v in [&mut p.gamma_breve_a, &mut p.gamma_b, &mut p.delta_tilde_a] {
            strip_value(v);
        }
        let d = &mut p.deltas;
        for v in [&mut d.delta_a, &mut d.delta_b, &mut d.delta_hat_b, &mut d.delta_tilde_b] {
            strip_value(v);
        }
        if let Some(v) = d.delta_hat_a.as_mut() {
            strip_value(v);
        }
    }
    for v in r.gamma_mn.iter_mut().chain(r.gamma_nm.iter_mut()) {
        strip_value(v);
    }
}

fn settings_for(cfg: &RunConfig, seed: u64) -> OptimizerSettings {
    OptimizerSettings { seed, ..cfg.optimizer }
}

fn run_oracle(spec: &BridgeSpec, report: &BoundReport, oc: &OracleConfig, seed: u64) -> qbridge::Result<OracleRecord> {
    let rep = spec.side(0).projection().rep().clone();
    let d = rep.dim();
    let mode_b = if d * d - 1 <= 3 {
        SampleMode::Grid { step: oc.operator_step }
    } else {
        SampleMode::Random {
            count: oc.random_count,
            seed,
        }
    };
    let mode_a = if spec.coset().len() <= 4 {
        SampleMode::Grid { step: oc.function_step }
    } else {
        SampleMode::Random {
            count: oc.random_count,
            seed: seed ^ 1,
        }
    };
    let bb = sample_ball(&OperatorBall::new(rep, |_: &CMat| 0.0), mode_b)?;
    let ba = sample_ball(&FunctionBall::new(spec.coset().clone(), |_: &[f64]| 0.0), mode_a)?;
    let reach = hausdorff_reach_oracle(spec, &ba.members, &bb.members)?;
    let states = sample_states(spec, oc.state_resolution, seed)?;
    let height = height_oracle(spec, &ba.members, &bb.members, &states)?;
    Ok(OracleRecord {
        reach,
        reach_ok: reach <= report.reach_bound + 1e-9,
        height_ok: height.value <= report.height_bound + 1e-9,
        height,
        ball_a: ba.len(),
        ball_b: bb.len(),
        states_a: states.weights.len(),
        states_b: states.densities.len(),
    })
}

fn first_cells(cfg: &RunConfig, ctx: &GroupContext, side: &SideLabel, oracle: bool) -> Vec<Record> {
    let key = format!("first:{side}");
    let seed = cell_seed(cfg.seed(), &key);
    let start = Instant::now();
    let parts = ctx
        .projection(side)
        .and_then(|pd| BridgeSpec::first_class(pd, 1))
        .and_then(|spec| Ok((first_class_parts(&spec, &settings_for(cfg, seed))?, spec)));
    let shared_ms = start.elapsed().as_secs_f64() * 1e3;
    cfg.q
        .iter()
        .map(|&q| {
            let mut rec = Record::new("first", side, None, q, seed);
            let t = Instant::now();
            match &parts {
                Err(e) => rec.error = Some(e.to_string()),
                Ok((p, spec)) => match assemble_first_class(p, q) {
                    Err(e) => rec.error = Some(e.to_string()),
                    Ok(mut r) => {
                        if oracle && q == 1 {
                            match run_oracle(spec, &r, &cfg.oracle, seed) {
                                Ok(o) => rec.oracle = Some(o),
                                Err(e) => rec.error = Some(format!("oracle: {e}")),
                            }
                        }
                        if !cfg.witnesses {
                            strip_report(&mut r);
                        }
                        rec.report = Some(r);
                    }
                },
            }
            rec.wall_ms = shared_ms + t.elapsed().as_secs_f64() * 1e3;
            rec
        })
        .collect()
}

struct PairParts {
    m: FirstClassParts,
    n: FirstClassParts,
    spec: BridgeSpec,
}

fn pair_parts(ctx: &GroupContext, m: &SideLabel, n: &SideLabel, settings: &OptimizerSettings) -> qbridge::Result<PairParts> {
    let pm = ctx.projection(m)?;
    let pn = ctx.projection(n)?;
    let coset = Arc::new(coset_space(&pm)?);
    let sm = BridgeSpec::first_class_on(coset.clone(), pm.clone(), 1)?;
    let sn = BridgeSpec::first_class_on(coset.clone(), pn.clone(), 1)?;
    let spec = BridgeSpec::second_class_on(coset, pm, pn, 1)?;
    Ok(PairParts {
        m: first_class_parts(&sm, settings)?,
        n: first_class_parts(&sn, settings)?,
        spec,
    })
}

fn second_cells(cfg: &RunConfig, ctx: &GroupContext, m: &SideLabel, n: &SideLabel) -> Vec<Record> {
    let seed = cell_seed(cfg.seed(), &format!("second:{m}:{n}"));
    let settings = settings_for(cfg, seed);
    let start = Instant::now();
    let parts = pair_parts(ctx, m, n, &settings).and_then(|pp| {
        let direct = if cfg.direct_gamma {
            Some((gamma_cross(&pp.spec, 0, &settings)?, gamma_cross(&pp.spec, 1, &settings)?))
        } else {
            None
        };
        Ok((pp, direct))
    });
    let shared_ms = start.elapsed().as_secs_f64() * 1e3;
    cfg.q
        .iter()
        .map(|&q| {
            let mut rec = Record::new("second", m, Some(n), q, seed);
            let t = Instant::now();
            match &parts {
                Err(e) => rec.error = Some(e.to_string()),
                Ok((pp, direct)) => {
                    let (gmn, gnm) = direct.clone().unzip();
                    match assemble_second_class(&pp.m, &pp.n, q, gmn, gnm) {
                        Err(e) => rec.error = Some(e.to_string()),
                        Ok(mut r) => {
                            if !cfg.witnesses {
                                strip_report(&mut r);
                            }
                            rec.report = Some(r);
                        }
                    }
                }
            }
            rec.wall_ms = shared_ms + t.elapsed().as_secs_f64() * 1e3;
            rec
        })
        .collect()
}

fn trek_cell(cfg: &RunConfig, ctx: &GroupContext, m: &SideLabel, n: &SideLabel) -> Record {
    let seed = cell_seed(cfg.seed(), &format!("trek:{m}:{n}"));
    let settings = settings_for(cfg, seed);
    let start = Instant::now();
    let mut rec = Record::new("trek", m, Some(n), 1, seed);
    let out = pair_parts(ctx, m, n, &settings).and_then(|pp| {
        let dm = assemble_first_class(&pp.m, 1)?;
        let dn = assemble_first_class(&pp.n, 1)?;
        let (gmn, gnm) = if cfg.direct_gamma {
            (Some(gamma_cross(&pp.spec, 0, &settings)?), Some(gamma_cross(&pp.spec, 1, &settings)?))
        } else {
            (None, None)
        };
        let direct = assemble_second_class(&pp.m, &pp.n, 1, gmn, gnm)?;
        let trek = trek_bounds(&dm, &dn, Some(&direct))?;
        Ok((direct, trek))
    });
    match out {
        Ok((mut direct, trek)) => {
            if !cfg.witnesses {
                strip_report(&mut direct);
            }
            rec.direct = Some(direct);
            rec.trek = Some(trek);
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    rec
}

/// Validates labels against the group and evaluates every cell on a pool of
/// `jobs` threads (all cores when `None`).
pub fn run(cfg: &RunConfig, experiment: Experiment, jobs: Option<usize>, oracle: bool) -> Result<RunSummary, CliError> {
    let ctx = GroupContext::build(&cfg.group_def()?, cfg.stability_tol)?;
    if oracle && !ctx.group.is_finite() {
        return Err(CliError::Config("oracle checks need a finite group".into()));
    }
    if oracle && experiment != Experiment::First {
        return Err(CliError::Config("oracle checks run on first-class cells".into()));
    }
    let sides = cfg.sides();
    let pairs = cfg.pair_labels();
    match experiment {
        Experiment::First => sides.iter().try_for_each(|s| ctx.check_label(s))?,
        _ => pairs.iter().try_for_each(|(a, b)| ctx.check_label(a).and(ctx.check_label(b)))?,
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let records = pool.install(|| -> Vec<Record> {
        match experiment {
            Experiment::First => sides.par_iter().map(|s| first_cells(cfg, &ctx, s, oracle)).flatten().collect(),
            Experiment::Second => pairs.par_iter().map(|(m, n)| second_cells(cfg, &ctx, m, n)).flatten().collect(),
            Experiment::Trek => pairs.par_iter().map(|(m, n)| trek_cell(cfg, &ctx, m, n)).collect(),
        }
    });
    Ok(RunSummary { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    #[test]
    fn cell_seeds_depend_on_key_and_seed() {
        assert_eq!(cell_seed(1, "first:0.5"), cell_seed(1, "first:0.5"));
        assert_ne!(cell_seed(1, "first:0.5"), cell_seed(1, "first:1"));
        assert_ne!(cell_seed(1, "first:0.5"), cell_seed(2, "first:0.5"));
    }

    #[test]
    fn label_checks() {
        let su2 = GroupContext::build(&GroupDef::Su2 { resolution: 6 }, None).unwrap();
        assert!(su2.check_label(&SideLabel::Spin(1.0)).is_ok());
        assert!(su2.check_label(&SideLabel::Spin(4.0)).is_err());
        assert!(su2.check_label(&SideLabel::Irrep("std".into())).is_err());
        let s3 = GroupContext::build(&GroupDef::Builtin { name: "s3".into() }, None).unwrap();
        assert!(s3.check_label(&SideLabel::Irrep("std".into())).is_ok());
        assert!(s3.check_label(&SideLabel::Irrep("nope".into())).is_err());
    }

    #[test]
    fn failing_cells_are_recorded() {
        // the sign irrep has a one-point coset space against `std`
        let cfg = RunConfig::parse(
            r#"{"group": {"kind": "builtin", "name": "s3"}, "experiment": "second", "pairs": [["std", "sign"]], "seed": 1,
                "optimizer": {"restarts": 2, "steps": 20}}"#,
            Path::new("."),
        )
        .unwrap()
        .finalize(None)
        .unwrap();
        let s = run(&cfg, Experiment::Second, Some(1), false).unwrap();
        assert_eq!(s.records.len(), 1);
        assert_eq!(s.failures(), 1);
    }
}
