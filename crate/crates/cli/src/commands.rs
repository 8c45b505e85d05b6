use serde::Serialize;
use symdisc::discrimination::{failure_diagonal, success_diagonal};
use symdisc::optics::{default_angles, expected_core_counts, to_json, to_text};
use symdisc::sim::SimReport;
use symdisc::verify::{run_battery, CheckResult, VerifyOptions};
use symdisc::{
    angles_from_coefficients, apply_protocol_all, build_povm, coefficients_from_angles,
    compile_full, count_components, optimal_probability, run_trials, verify_completeness,
    AngleVector, CoefficientVector, ComponentCount, Dimension, Error, SimConfig,
};

use crate::error::{CliError, CliResult};
use crate::output::{csv_table, emit, json, resolve, write_atomic, SCHEMA_VERSION};
use crate::{
    CompileArgs, DiscriminateArgs, Format, NoiseArgs, SimulateArgs, SweepArgs, SystemArgs,
    VerifyArgs,
};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Validated parameters of the state family.
struct System {
    angles: AngleVector<f64>,
    coefficients: CoefficientVector<f64>,
}

fn check_len(dim: Option<usize>, expected_for: impl Fn(usize) -> usize, found: usize) -> CliResult<()> {
    if let Some(n) = dim {
        Dimension::new(n)?;
        if expected_for(n) != found {
            return Err(Error::DimensionMismatch {
                expected: expected_for(n),
                found,
            }
            .into());
        }
    }
    Ok(())
}

impl SystemArgs {
    fn resolve(&self) -> CliResult<Option<System>> {
        match (&self.angles, &self.coeffs) {
            (Some(a), _) => {
                check_len(self.dim, |n| n - 1, a.0.len())?;
                let angles = AngleVector::new(a.0.clone())?;
                let coefficients = coefficients_from_angles(&angles)?;
                Ok(Some(System { angles, coefficients }))
            }
            (None, Some(c)) => {
                check_len(self.dim, |n| n, c.0.len())?;
                let coefficients = CoefficientVector::new(c.0.clone())?;
                let angles = angles_from_coefficients(&coefficients)?;
                Ok(Some(System { angles, coefficients }))
            }
            (None, None) => {
                if let Some(n) = self.dim {
                    Dimension::new(n)?;
                }
                Ok(None)
            }
        }
    }

    fn require(&self) -> CliResult<System> {
        self.resolve()?
            .ok_or_else(|| usage("exactly one of --angles or --coeffs is required"))
    }
}

impl NoiseArgs {
    fn config(&self, trials: u64) -> SimConfig {
        SimConfig {
            trials,
            seed: self.seed,
            source: None,
            pbs_extinction: self.extinction,
            phase_noise_sigma: self.phase_noise,
            detector_efficiency: self.detector_efficiency,
            heralding_efficiency: self.heralding_efficiency,
            threads: self.threads,
        }
    }
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

#[derive(Serialize)]
struct DiscriminateReport {
    schema_version: u32,
    dim: usize,
    angles: Vec<f64>,
    coefficients: Vec<f64>,
    c_min_index: usize,
    c_min: f64,
    p_d: f64,
    success_diagonal: Vec<f64>,
    failure_diagonal: Vec<f64>,
    p_conclusive: Vec<f64>,
    completeness_residual: f64,
}

pub fn discriminate(args: DiscriminateArgs) -> CliResult<()> {
    let sys = args.system.require()?;
    let c = &sys.coefficients;
    let (c_min_index, c_min) = c.min_coefficient();
    let report = DiscriminateReport {
        schema_version: SCHEMA_VERSION,
        dim: c.dim().get(),
        angles: sys.angles.as_slice().to_vec(),
        coefficients: c.as_slice().to_vec(),
        c_min_index,
        c_min,
        p_d: optimal_probability(c),
        success_diagonal: success_diagonal(c)?,
        failure_diagonal: failure_diagonal(c)?,
        p_conclusive: apply_protocol_all(c)?.iter().map(|o| o.p_conclusive).collect(),
        completeness_residual: verify_completeness(&build_povm(c)?),
    };
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => json(&report),
        Format::Csv => {
            let rows: Vec<Vec<String>> = (0..report.dim)
                .map(|k| {
                    vec![
                        k.to_string(),
                        fmt(report.coefficients[k]),
                        fmt(report.success_diagonal[k]),
                        fmt(report.failure_diagonal[k]),
                        fmt(report.p_conclusive[k]),
                        fmt(report.p_d),
                    ]
                })
                .collect();
            csv_table(&["k", "c_k", "a_s", "a_i", "p_conclusive", "p_d"], &rows)
        }
        Format::NetlistText => return Err(usage("discriminate does not produce a netlist")),
    };
    emit(args.output.out.as_deref(), &text)
}

const COUNT_HEADER: [&str; 10] = [
    "dim", "hwp", "pbs", "bs", "ps", "mirrors", "detectors", "expected_hwp", "expected_pbs", "expected_bs",
];

fn count_row(n: usize, c: &ComponentCount, expected: Option<(usize, usize, usize)>) -> Vec<String> {
    let mut row: Vec<String> = [n, c.hwp, c.pbs, c.bs, c.ps, c.mirrors, c.detectors]
        .iter()
        .map(ToString::to_string)
        .collect();
    match expected {
        Some((h, p, b)) => row.extend([h, p, b].map(|x| x.to_string())),
        None => row.extend(std::iter::repeat_n(String::new(), 3)),
    }
    row
}

fn check_table1() -> CliResult<()> {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for n in [4, 8, 16] {
        let dim = Dimension::new(n)?;
        let count = count_components(&compile_full(&default_angles::<f64>(dim), 0)?);
        let expected = expected_core_counts(dim)?;
        if (count.hwp, count.pbs, count.bs) != expected {
            failures.push(format!("N={n}"));
        }
        rows.push(count_row(n, &count, Some(expected)));
    }
    emit(None, &csv_table(&COUNT_HEADER, &rows))?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("component counts differ for {}", failures.join(", "))))
    }
}

pub fn compile(args: CompileArgs) -> CliResult<()> {
    if args.check_table1 {
        return check_table1();
    }
    let angles = match args.system.resolve()? {
        Some(sys) => sys.angles,
        None => {
            let n = args
                .system
                .dim
                .ok_or_else(|| usage("compile needs --dim, --angles or --coeffs"))?;
            default_angles(Dimension::new(n)?)
        }
    };
    let dim = angles.dim();
    let netlist = compile_full(&angles, args.state)?;
    let count = count_components(&netlist);
    let expected = {
        let c = coefficients_from_angles(&angles)?;
        let unique_min = c
            .as_slice()
            .iter()
            .filter(|&&x| x <= c.min_coefficient().1 * (1.0 + 1e-12))
            .count()
            == 1;
        unique_min.then(|| expected_core_counts(dim)).transpose()?
    };
    let counts = csv_table(&COUNT_HEADER, &[count_row(dim.get(), &count, expected)]);

    match &args.out {
        Some(dir) => {
            let dir = resolve(dir);
            std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
            write_atomic(&dir.join("netlist.txt"), &to_text(&netlist))?;
            write_atomic(&dir.join("netlist.json"), &to_json(&netlist))?;
            write_atomic(&dir.join("counts.csv"), &counts)?;
            emit(None, &counts)
        }
        None => {
            let text = match args.format {
                Format::NetlistText => to_text(&netlist),
                Format::Json => to_json(&netlist) + "\n",
                Format::Csv => counts.clone(),
            };
            emit(None, &text)?;
            if !matches!(args.format, Format::Csv) {
                eprint!("{counts}");
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SimulationDocument<'a> {
    schema_version: u32,
    dim: usize,
    angles: &'a [f64],
    coefficients: &'a [f64],
    config: &'a SimConfig,
    report: &'a SimReport,
}

const SIM_HEADER: [&str; 13] = [
    "dim",
    "trials",
    "conclusive",
    "inconclusive",
    "discarded",
    "correct",
    "misidentified",
    "conclusive_rate",
    "conclusive_lower",
    "conclusive_upper",
    "success_rate",
    "analytic_p_d",
    "seed",
];

pub fn simulate(args: SimulateArgs) -> CliResult<()> {
    let sys = args.system.require()?;
    let n = sys.angles.dim().get();
    let mut config = args.noise.config(args.trials);
    if let Some(l) = args.state {
        sys.angles.dim().check_index(l)?;
        let mut prior = vec![0.0; n];
        prior[l] = 1.0;
        config.source = Some(prior);
    }
    let report = run_trials(&config, &sys.angles)?;
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => json(&SimulationDocument {
            schema_version: SCHEMA_VERSION,
            dim: n,
            angles: sys.angles.as_slice(),
            coefficients: sys.coefficients.as_slice(),
            config: &config,
            report: &report,
        }),
        Format::Csv => {
            let r = &report;
            let row = vec![
                n.to_string(),
                r.trials.to_string(),
                r.conclusive_count.to_string(),
                r.inconclusive_count.to_string(),
                r.discarded_count.to_string(),
                r.correct_count.to_string(),
                r.misidentified_count.to_string(),
                fmt(r.conclusive_rate.estimate),
                fmt(r.conclusive_rate.lower),
                fmt(r.conclusive_rate.upper),
                fmt(r.success_rate.estimate),
                fmt(r.analytic_p_d),
                config.seed.to_string(),
            ];
            csv_table(&SIM_HEADER, &[row])
        }
        Format::NetlistText => return Err(usage("simulate does not produce a netlist")),
    };
    emit(args.output.out.as_deref(), &text)
}

#[derive(Serialize)]
struct SweepRow {
    theta: f64,
    valid: bool,
    p_d: Option<f64>,
    empirical_rate: Option<f64>,
    empirical_lower: Option<f64>,
    empirical_upper: Option<f64>,
    note: String,
}

#[derive(Serialize)]
struct SweepDocument {
    schema_version: u32,
    dim: usize,
    index: usize,
    rows: Vec<SweepRow>,
}

fn sweep_point(base: &[f64], index: usize, theta: f64, args: &SweepArgs) -> SweepRow {
    let mut row = SweepRow {
        theta,
        valid: false,
        p_d: None,
        empirical_rate: None,
        empirical_lower: None,
        empirical_upper: None,
        note: String::new(),
    };
    let mut thetas = base.to_vec();
    thetas[index] = theta;
    let angles = match AngleVector::new(thetas) {
        Ok(a) => a,
        Err(e) => {
            row.note = e.to_string();
            return row;
        }
    };
    row.valid = true;
    let c = coefficients_from_angles(&angles).expect("valid angles give valid coefficients");
    row.p_d = Some(optimal_probability(&c));
    if let Some(trials) = args.trials {
        match run_trials(&args.noise.config(trials), &angles) {
            Ok(r) => {
                row.empirical_rate = Some(r.conclusive_rate.estimate);
                row.empirical_lower = Some(r.conclusive_rate.lower);
                row.empirical_upper = Some(r.conclusive_rate.upper);
            }
            Err(e) => row.note = e.to_string(),
        }
    }
    row
}

pub fn sweep(args: SweepArgs) -> CliResult<()> {
    let dim = Dimension::new(args.dim)?;
    let n = dim.get();
    if args.index == 0 || args.index > n - 1 {
        return Err(usage(format!("--index must lie in 1..={}", n - 1)));
    }
    let base = match &args.angles {
        Some(a) => {
            check_len(Some(n), |n| n - 1, a.0.len())?;
            a.0.clone()
        }
        None => default_angles::<f64>(dim).as_slice().to_vec(),
    };
    let grid: Vec<f64> = match (&args.grid, args.from, args.to, args.steps) {
        (Some(g), ..) => g.0.clone(),
        (None, Some(from), Some(to), Some(steps)) => {
            if steps == 1 {
                vec![from]
            } else {
                (0..steps)
                    .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
                    .collect()
            }
        }
        _ => return Err(usage("give either --grid or --from/--to/--steps")),
    };
    if args.trials.is_some() {
        args.noise.config(1).validate(n)?;
    }
    let rows: Vec<SweepRow> = grid
        .iter()
        .map(|&theta| sweep_point(&base, args.index - 1, theta, &args))
        .collect();

    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let opt = |x: Option<f64>| x.map(fmt).unwrap_or_default();
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        fmt(r.theta),
                        r.valid.to_string(),
                        opt(r.p_d),
                        opt(r.empirical_rate),
                        opt(r.empirical_lower),
                        opt(r.empirical_upper),
                        r.note.clone(),
                    ]
                })
                .collect();
            csv_table(
                &["theta", "valid", "p_d", "empirical_rate", "empirical_lower", "empirical_upper", "note"],
                &table,
            )
        }
        Format::Json => json(&SweepDocument {
            schema_version: SCHEMA_VERSION,
            dim: n,
            index: args.index,
            rows,
        }),
        Format::NetlistText => return Err(usage("sweep does not produce a netlist")),
    };
    emit(args.output.out.as_deref(), &text)
}

#[derive(Serialize)]
struct VerifyDocument<'a> {
    schema_version: u32,
    dim: usize,
    seed: u64,
    passed: bool,
    checks: &'a [CheckResult],
}

pub fn verify(args: VerifyArgs) -> CliResult<()> {
    let dim = Dimension::new(args.dim)?;
    let opts = VerifyOptions {
        dim,
        seed: args.seed,
        draws: args.draws,
        fourier_fault: args.inject_fourier_fault,
    };
    let checks = run_battery(&opts)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let text = match args.output.format {
        None => checks
            .iter()
            .map(|c| {
                format!(
                    "{} {:<20} worst={:.3e} tol={:.1e}  {}\n",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.worst,
                    c.tolerance,
                    c.detail
                )
            })
            .collect(),
        Some(Format::Json) => json(&VerifyDocument {
            schema_version: SCHEMA_VERSION,
            dim: dim.get(),
            seed: args.seed,
            passed: failed.is_empty(),
            checks: &checks,
        }),
        Some(Format::Csv) => {
            let rows: Vec<Vec<String>> = checks
                .iter()
                .map(|c| vec![c.name.clone(), c.passed.to_string(), fmt(c.worst), fmt(c.tolerance), c.detail.clone()])
                .collect();
            csv_table(&["check", "passed", "worst", "tolerance", "detail"], &rows)
        }
        Some(Format::NetlistText) => return Err(usage("verify does not produce a netlist")),
    };
    emit(args.output.out.as_deref(), &text)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}
