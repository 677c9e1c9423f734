use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use frametk::fixtures::{self, Ambient};
use frametk::gabor::{gabor_rit_pipeline, half_lattice_step, GaborConfig, Signal, TFSet};
use frametk::group::{
    density_index_free, density_indexed, DensityMode, ExactSpec, IndexFreeConfig, IndexedFamilyMap, ReferenceSystem,
};
use frametk::io::{self, FamilyJson};
use frametk::linalg::VectorFamily;
use frametk::localization::{envelope_from_map, tail_operator_norms};
use frametk::rit::{
    blockwise_select_case_a, finite_rit_select, BlockwiseConfig, BlockwiseProblem, SelectionResult, SelectorConfig,
    VerificationReport, VerifyContext,
};
use frametk::{CMatrix, Complex64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::*;
use crate::CliError;

/// One verified numerical claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `>=`, `<=`, `<` or `==`.
    pub relation: String,
    pub tolerance: f64,
    pub pass: bool,
    /// Reported but excluded from the verdict.
    #[serde(default)]
    pub informational: bool,
}

impl Check {
    fn new(name: &str, value: f64, relation: &str, threshold: f64, tolerance: f64) -> Self {
        let pass = match relation {
            ">=" => value >= threshold - tolerance,
            "<=" => value <= threshold + tolerance,
            "<" => value < threshold,
            ">" => value > threshold,
            _ => (value - threshold).abs() <= tolerance,
        };
        Self {
            name: name.into(),
            value,
            threshold,
            relation: relation.into(),
            tolerance,
            pass,
            informational: false,
        }
    }

    fn from_report(report: &VerificationReport) -> Vec<Check> {
        report
            .clauses
            .iter()
            .map(|c| Check {
                name: c.name.clone(),
                value: c.value,
                threshold: c.threshold,
                relation: match c.name.as_str() {
                    "subset" => "==",
                    "self_certification" => "<=",
                    _ => ">=",
                }
                .into(),
                tolerance: frametk::rit::VERIFY_TOL,
                pass: c.pass,
                informational: c.informational,
            })
            .collect()
    }
}

/// Wall-clock fields; everything else in a report is reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub generated_at_unix: u64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub results: Value,
    pub checks: Vec<Check>,
    pub pass: bool,
    /// Sidecar files, relative to the output directory.
    pub artifacts: Vec<String>,
    pub timing: Timing,
}

pub const REPORT_FILE: &str = "report.json";

struct Outputs<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl Outputs<'_> {
    fn text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        io::write_text(&self.dir.join(name), text)?;
        self.written.push(name.into());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<(), CliError> {
        self.text(name, &io::to_json(v)?)
    }
}

/// Runs one experiment, writing `report.json` and its sidecars into `out`.
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<RunReport, CliError> {
    config.validate()?;
    let start = Instant::now();
    let mut o = Outputs { dir: out, written: Vec::new() };
    let (results, checks) = match &config.command {
        Command::Density(d) => density(d, &mut o)?,
        Command::Localize(l) => localize(l, config.seed, &mut o)?,
        Command::Select(s) => select(s, config.seed, &mut o)?,
        Command::Gabor(g) => gabor(g, &mut o)?,
        Command::Verify(v) => verify(v)?,
    };
    let pass = checks.iter().filter(|c| !c.informational).all(|c| c.pass);
    let report = RunReport {
        config: config.clone(),
        results,
        checks,
        pass,
        artifacts: o.written.clone(),
        timing: Timing {
            generated_at_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    };
    io::write_json(&out.join(REPORT_FILE), &report)?;
    Ok(report)
}

type Outcome = (Value, Vec<Check>);

fn density(cmd: &DensityCommand, o: &mut Outputs) -> Result<Outcome, CliError> {
    match cmd {
        DensityCommand::ExampleMaps { half_width } => {
            let mut rows = Vec::new();
            let mut checks = Vec::new();
            let mut csv = String::from("map,density_all,density_subset,ratio\n");
            for fx in fixtures::density_maps(*half_width) {
                let mode = DensityMode::ExactPattern(ExactSpec { period: vec![fx.period], check_cells: 2 });
                let all = density_indexed(&fx.map, &fx.map.labels, &mode)?;
                let sub = density_indexed(&fx.map, &fx.subset, &mode)?;
                let (da, ds) = (exact(&all)?, exact(&sub)?);
                let ratio = ds / da;
                csv.push_str(&format!("{},{da},{ds},{ratio}\n", fx.name));
                checks.push(Check::new(
                    &format!("ratio_{}", fx.name),
                    ratio_f64(ratio),
                    "==",
                    ratio_f64(fx.expected_ratio),
                    0.0,
                ));
                rows.push(json!({
                    "map": fx.name,
                    "density_all": da.to_string(),
                    "density_subset": ds.to_string(),
                    "ratio": ratio.to_string(),
                }));
            }
            o.text("density_ratios.csv", &csv)?;
            Ok((json!({ "maps": rows }), checks))
        }
        DensityCommand::Map { path, subset, mode } => {
            let map: IndexedFamilyMap = io::read_json::<IndexedFamilyMap>(path)?.reindex()?;
            let est = density_indexed(&map, subset, mode)?;
            if !est.sweep.is_empty() {
                o.text("density_sweep.csv", &io::sweep_to_csv(&est)?)?;
            }
            Ok((serde_json::to_value(&est)?, Vec::new()))
        }
        DensityCommand::IndexFree { ordering, subset, half_width, r_max } => {
            let (ambient, reference) = ordered_reference(*ordering, *half_width);
            let idx: Vec<i64> = ambient.indices().iter().copied().filter(|&m| subset.admits(m)).collect();
            let f = ambient.basis(&idx)?;
            let est = density_index_free(&f, &reference, &IndexFreeConfig::new(*r_max))?;
            o.text("density_sweep.csv", &io::sweep_to_csv(&est)?)?;
            let checks = vec![Check::new("sweep_converged", f64::from(u8::from(est.converged)), "==", 1.0, 0.0)];
            Ok((serde_json::to_value(&est)?, checks))
        }
    }
}

fn exact(d: &frametk::group::DensityEstimate) -> Result<num_rational::Ratio<i64>, CliError> {
    d.exact_lower.ok_or_else(|| CliError::Invalid("exact evaluation did not return a rational value".into()))
}

fn ratio_f64(r: num_rational::Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Basis of a window of positions `-half_width..=half_width` in the given ordering.
pub fn ordered_reference(ordering: Ordering, half_width: i64) -> (Ambient, ReferenceSystem) {
    match ordering {
        Ordering::Natural => {
            let a = Ambient::range(-half_width, half_width);
            let r = fixtures::natural_reference(&a);
            (a, r)
        }
        Ordering::Doubled => {
            let a = Ambient::range(-half_width / 2, half_width / 2);
            let r = fixtures::doubled_reference(&a);
            (a, r)
        }
        Ordering::Interleaved => fixtures::interleaved_reference(half_width),
    }
}

fn localize(cmd: &LocalizeCommand, seed: u64, o: &mut Outputs) -> Result<Outcome, CliError> {
    let s = localized(&cmd.system, seed);
    let rep = envelope_from_map(&s.family, &s.map, &s.reference, cmd.p)?;
    let radii: Vec<u64> = (0..=cmd.r_max).collect();
    let tails = tail_operator_norms(&s.family, &s.map, &s.reference, &radii)?;
    o.text("envelope.csv", &io::envelope_to_csv(&rep.envelope)?)?;
    let mut csv = String::from("R,norm,schur_bound\n");
    for t in &tails {
        csv.push_str(&format!("{},{:?},{:?}\n", t.radius, t.norm, t.schur_bound));
    }
    o.text("tail_norms.csv", &csv)?;
    let checks = tails
        .iter()
        .map(|t| Check::new(&format!("schur_tail_R{}", t.radius), t.norm, "<=", t.schur_bound, 1e-9))
        .collect();
    let results = json!({
        "verdict": rep.p_summable_verdict,
        "minimal": rep.minimal,
        "decay": rep.decay,
        "growth_ratio": rep.growth_ratio,
        "diagnostics": rep.diagnostics,
        "tails": tails,
    });
    Ok((results, checks))
}

fn localized(input: &LocalizedInput, seed: u64) -> fixtures::LocalizedSystem {
    fixtures::localized_system(seed, input.half_width, input.band, input.decay)
}

/// Gaussian matrix with unit-norm columns.
pub fn random_family(n: usize, m: usize, seed: u64) -> Result<VectorFamily, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mat = CMatrix::from_fn(m, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    });
    for mut c in mat.column_iter_mut() {
        let norm = c.norm();
        c /= Complex64::from(norm);
    }
    Ok(VectorFamily::from_matrix(mat)?)
}

fn load_family(path: &Path) -> Result<VectorFamily, CliError> {
    if path.extension().is_some_and(|e| e == "csv") {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        Ok(io::family_from_csv(&text)?)
    } else {
        Ok(VectorFamily::try_from(io::read_json::<FamilyJson>(path)?)?)
    }
}

fn select(cmd: &SelectCommand, seed: u64, o: &mut Outputs) -> Result<Outcome, CliError> {
    let selector = SelectorConfig::new(cmd.epsilon, cmd.delta).with_strategy(cmd.strategy);
    let (family, result, ctx) = match &cmd.input {
        FamilyInput::Localized(input) => {
            let s = localized(input, seed);
            let problem = BlockwiseProblem {
                family: &s.family,
                map: &s.map,
                reference: &s.reference,
                dual: &s.reference.family,
                window: s.window.clone(),
            };
            let cfg = BlockwiseConfig {
                selector: selector.clone(),
                policy: cmd.policy,
                ..BlockwiseConfig::new(cmd.epsilon, cmd.delta)
            };
            let r = blockwise_select_case_a(&problem, &cfg)?;
            let ctx = VerifyContext::from_result(&r, selector.c_curve.clone()).expect("blockwise summary present");
            (s.family, r, ctx)
        }
        other => {
            let f = match other {
                FamilyInput::Orthonormal { n } => VectorFamily::standard_basis(*n),
                FamilyInput::DuplicatedBasis { n } => fixtures::duplicated_basis(*n),
                FamilyInput::Random { n, m } => random_family(*n, *m, seed)?,
                FamilyInput::File { path } => load_family(path)?,
                FamilyInput::Localized(_) => unreachable!(),
            };
            let r = finite_rit_select(&f, &selector)?;
            let ctx = VerifyContext::finite(&r, cmd.epsilon, selector.c_curve.clone());
            (f, r, ctx)
        }
    };
    let report = frametk::rit::verify_conclusions(&result, &family, &ctx)?;
    o.json("selection.json", &result)?;
    o.json("family.json", &FamilyJson::from(&family))?;
    o.text("selection_summary.csv", &io::selection_summary_csv(&[("select".into(), &result)])?)?;
    let results = json!({
        "selected": result.selected,
        "size_ratio": result.size_ratio,
        "achieved_lower": result.achieved_lower,
        "certified_bound": result.certified_bound,
        "verification": report,
    });
    Ok((results, Check::from_report(&report)))
}

fn gabor(cmd: &GaborCommand, o: &mut Outputs) -> Result<Outcome, CliError> {
    let phi = Signal::gaussian(cmd.n).normalized()?;
    let (_, s) = half_lattice_step(cmd.n)?;
    let step = cmd.base_step.unwrap_or(s);
    let lambda = TFSet::lattice(cmd.n, step, step)?;
    let cfg = GaborConfig {
        base_step: cmd.base_step,
        ..GaborConfig::new(cmd.epsilon, cmd.delta)
    };
    let r = gabor_rit_pipeline(&phi, &lambda, &cfg)?;
    let mut checks = Check::from_report(&r.verification);
    checks.push(Check::new("certified_lambda_min", r.selection.achieved_lower, ">", 0.0, 0.0));
    if let Some(ct) = r.selection.blockwise.as_ref().and_then(|b| b.cross_term.as_ref()) {
        checks.push(Check::new("cross_term_ratio", ct.measured_ratio, "<", ct.delta_over_8, 0.0));
    }
    o.text("window.csv", &io::signal_to_csv(&phi)?)?;
    o.json("selection.json", &r.selection)?;
    let results = json!({
        "selected": r.selection.selected.len(),
        "achieved_lower": r.selection.achieved_lower,
        "addendum": r.addendum,
        "verification": r.verification,
    });
    Ok((results, checks))
}

fn verify(cmd: &VerifyCommand) -> Result<Outcome, CliError> {
    let result: SelectionResult = io::read_json(&cmd.selection)?;
    let family = load_family(&cmd.family)?;
    let ctx = VerifyContext::from_result(&result, cmd.c_curve.clone())
        .unwrap_or_else(|| VerifyContext::finite(&result, cmd.epsilon, cmd.c_curve.clone()));
    let report = frametk::rit::verify_conclusions(&result, &family, &ctx)?;
    Ok((serde_json::to_value(&report)?, Check::from_report(&report)))
}

/// Writes every worked example; returns the written paths in order.
pub fn emit_fixtures(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut o = Outputs { dir, written: Vec::new() };
    o.json("catalog.json", &fixtures::catalog())?;
    for fx in fixtures::density_maps(32) {
        o.json(&format!("map_{}.json", fx.name), &fx.map)?;
    }
    o.text("duplicated_basis.csv", &io::family_to_csv(&fixtures::duplicated_basis(8))?)?;
    let (_, copies) = fixtures::geometric_copies(16, 8);
    o.text("geometric_copies.csv", &io::family_to_csv(&copies)?)?;
    let ordering: Vec<Value> = (-16..=16)
        .map(|p| json!({ "position": p, "index": fixtures::interleaved_index(p) }))
        .collect();
    o.json("interleaved_ordering.json", &ordering)?;
    let z2: Vec<Value> = (-64..=64)
        .map(|m| json!({ "index": m, "position": fixtures::z2_position(m).coords }))
        .collect();
    o.json("z2_arrangement.json", &z2)?;
    let ns: Vec<i64> = (-16..=16).collect();
    let ambient = Ambient::range(-32, 32);
    o.text("t4_family.csv", &io::family_to_csv(&fixtures::t4_family(&ambient, &ns)?)?)?;
    o.json("t4_map.json", &fixtures::t4_map(&ns))?;
    let (phi, lambda) = fixtures::gaussian_half_lattice(64)?;
    o.text("gaussian_64.csv", &io::signal_to_csv(&phi)?)?;
    o.json("half_lattice_64.json", &lambda)?;
    Ok(o.written.iter().map(|n| dir.join(n)).collect())
}
