use std::fs;
use std::path::Path;

use stinespring::schur_example as example;
use stinespring::{
    asadi_condition_check, choi_of, choi_rank, construct_minimal_pair, gen_cp_map, gen_phi_map,
    hermitian_eig, image_of_unit, is_completely_positive, minimality_check, operator_norm,
    unitary_equivalence, verify_phi_map, verify_representation, AsadiVerdict, Error,
    RepresentationPair, RepresentationReport, TolerancePolicy,
};

use crate::format::{
    matrix_to_json, Check, Dimensions, Instance, InstanceFile, Minimality, PhiSource, ReportFile,
    RepresentationFile, Tolerances, WitnessFile,
};
use crate::{CliError, Exit};

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    fs::write(path, crate::format::to_json_text(value))
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<Instance, CliError> {
    read_json::<InstanceFile>(path)?.parse()
}

fn tolerances(tol: &TolerancePolicy) -> Tolerances {
    Tolerances {
        atol: tol.atol,
        rank_rtol: tol.rank_rtol,
        psd_rtol: tol.psd_rtol,
    }
}

fn dimensions(inst: &Instance) -> Dimensions {
    let m = inst.big_phi.module();
    Dimensions {
        n: m.n(),
        k: m.k(),
        h1_dim: inst.big_phi.h1_dim(),
        h2_dim: inst.big_phi.h2_dim(),
        ..Dimensions::default()
    }
}

fn empty_report(command: &str, tol: &TolerancePolicy, dims: Dimensions) -> ReportFile {
    ReportFile {
        command: command.into(),
        passed: false,
        tolerances: tolerances(tol),
        dimensions: dims,
        checks: Vec::new(),
        choi_eigenvalues: None,
        minimality: None,
        representation: None,
        witness: None,
        error: None,
    }
}

/// Complete positivity and the φ-map identity, appended to `report`.
/// Returns whether both hold.
fn run_checks(inst: &Instance, tol: &TolerancePolicy, report: &mut ReportFile) -> bool {
    let choi = choi_of(&inst.phi);
    let sym = (&choi + &choi.adjoint()).scale_real(0.5);
    let eig = hermitian_eig(&sym, tol).expect("symmetrized matrix is Hermitian");
    let cp = is_completely_positive(&inst.phi, tol);
    report.choi_eigenvalues = Some(eig.values);
    report.dimensions.choi_rank = Some(choi_rank(&inst.phi, tol));
    report.checks.push(Check {
        name: "completely_positive".into(),
        passed: cp.completely_positive,
        residual: (-cp.min_eigenvalue).max(0.0),
        threshold: tol.psd_rtol * cp.max_eigenvalue.max(1.0),
        detail: Some(format!("min Choi eigenvalue {:e}", cp.min_eigenvalue)),
    });

    let pv = verify_phi_map(&inst.big_phi, tol);
    report.checks.push(Check {
        name: "phi_map".into(),
        passed: pv.is_phi_map,
        residual: pv.max_residual,
        threshold: tol.atol * pv.scale,
        detail: None,
    });
    if !cp.completely_positive {
        report.error = Some(format!(
            "{}",
            Error::NotCompletelyPositive {
                min_eigenvalue: cp.min_eigenvalue
            }
        ));
    } else if !pv.is_phi_map {
        report.error = Some(format!(
            "Phi is not a phi-map: residual {:e} exceeds {:e}",
            pv.max_residual,
            tol.atol * pv.scale
        ));
    }
    cp.completely_positive && pv.is_phi_map
}

fn push_representation_checks(report: &mut ReportFile, rr: &RepresentationReport) {
    report.checks.push(Check {
        name: "shapes_consistent".into(),
        passed: rr.shapes_consistent,
        residual: 0.0,
        threshold: rr.threshold,
        detail: None,
    });
    for (name, residual) in rr.residuals() {
        report.checks.push(Check {
            name: name.into(),
            passed: residual <= rr.threshold,
            residual,
            threshold: rr.threshold,
            detail: None,
        });
    }
    report.checks.push(Check {
        name: "w_coisometry".into(),
        passed: rr.w_coisometry <= rr.threshold,
        residual: rr.w_coisometry,
        threshold: rr.threshold,
        detail: Some("informational".into()),
    });
}

fn exit_for(passed: bool) -> Exit {
    if passed {
        Exit::Success
    } else {
        Exit::Math
    }
}

pub fn check(path: &Path, tol: &TolerancePolicy) -> Result<(Exit, ReportFile), CliError> {
    let inst = read_instance(path)?;
    let mut report = empty_report("check", tol, dimensions(&inst));
    report.passed = run_checks(&inst, tol, &mut report);
    Ok((exit_for(report.passed), report))
}

/// Builds and verifies the minimal pair. The pair is returned separately so
/// the caller decides where it goes.
pub fn dilate(
    path: &Path,
    tol: &TolerancePolicy,
) -> Result<(Exit, ReportFile, Option<RepresentationPair>), CliError> {
    let inst = read_instance(path)?;
    let mut report = empty_report("dilate", tol, dimensions(&inst));
    if !run_checks(&inst, tol, &mut report) {
        return Ok((Exit::Math, report, None));
    }
    let pair = match construct_minimal_pair(&inst.big_phi, tol) {
        Ok(pair) => pair,
        Err(e) => {
            report.error = Some(e.to_string());
            return Ok((Exit::Math, report, None));
        }
    };
    let rr = verify_representation(&inst.phi, &inst.big_phi, &pair, tol);
    push_representation_checks(&mut report, &rr);
    let m = minimality_check(&pair, tol);
    report.minimality = Some(Minimality {
        minimal_k1: m.minimal_k1,
        minimal_k2: m.minimal_k2,
    });
    report.dimensions.k1_dim = Some(rr.k1_dim);
    report.dimensions.k2_dim = Some(rr.k2_dim);
    report.passed = rr.passed && m.minimal_k1 && m.minimal_k2;
    Ok((exit_for(report.passed), report, Some(pair)))
}

pub fn equiv(
    instance: &Path,
    rep_a: &Path,
    rep_b: &Path,
    tol: &TolerancePolicy,
) -> Result<(Exit, ReportFile, Option<WitnessFile>), CliError> {
    let inst = read_instance(instance)?;
    let a = read_json::<RepresentationFile>(rep_a)?
        .parse()
        .map_err(|e| CliError::input(format!("{}: {e}", rep_a.display())))?;
    let b = read_json::<RepresentationFile>(rep_b)?
        .parse()
        .map_err(|e| CliError::input(format!("{}: {e}", rep_b.display())))?;

    let mut report = empty_report("equiv", tol, dimensions(&inst));
    for (label, path, pair) in [("A", rep_a, &a), ("B", rep_b, &b)] {
        let rr = verify_representation(&inst.phi, &inst.big_phi, pair, tol);
        if !rr.shapes_consistent {
            return Err(CliError::input(format!(
                "{}: representation shapes do not match the instance",
                path.display()
            )));
        }
        if !rr.passed {
            report.error = Some(format!(
                "representation {label} does not verify: {}",
                rr.failures().join(", ")
            ));
            return Ok((Exit::Math, report, None));
        }
    }
    report.dimensions.k1_dim = Some(a.stinespring().k1_dim());
    report.dimensions.k2_dim = Some(a.module_rep().k2_dim());
    match unitary_equivalence(&a, &b, tol) {
        Ok(w) => {
            for (name, residual) in w.residuals.named() {
                report.checks.push(Check {
                    name: name.into(),
                    passed: residual <= w.threshold,
                    residual,
                    threshold: w.threshold,
                    detail: None,
                });
            }
            report.passed = true;
            Ok((Exit::Success, report, Some(WitnessFile::from_witness(&w))))
        }
        Err(e @ (Error::NotMinimal(_) | Error::NotEquivalent(_) | Error::IllConditioned(_))) => {
            report.error = Some(e.to_string());
            Ok((Exit::Math, report, None))
        }
        Err(e) => Err(CliError::input(e.to_string())),
    }
}

/// Seed for the `Φ` draw, derived from the user seed so one number fixes
/// the whole instance.
fn module_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1)
}

pub fn gen(
    n: usize,
    k: usize,
    h1: usize,
    h2: usize,
    r: usize,
    seed: u64,
) -> Result<InstanceFile, CliError> {
    for (name, v) in [("n", n), ("k", k), ("h1", h1), ("h2", h2), ("r", r)] {
        if v == 0 {
            return Err(CliError::input(format!("--{name} must be at least 1")));
        }
    }
    if r > n * h1 {
        return Err(CliError::input(format!(
            "infeasible dimensions: needs r ≤ n·h1 = {}, got r = {r}",
            n * h1
        )));
    }
    if h2 < n * r * k {
        return Err(CliError::input(format!(
            "infeasible dimensions: needs h2 ≥ n·r·k = {}, got h2 = {h2}",
            n * r * k
        )));
    }
    let phi = gen_cp_map(n, h1, r, seed).map_err(|e| CliError::input(e.to_string()))?;
    let big_phi =
        gen_phi_map(&phi, k, h2, module_seed(seed)).map_err(|e| CliError::input(e.to_string()))?;
    let source = PhiSource::Images {
        images: phi.images().iter().map(matrix_to_json).collect(),
    };
    Ok(InstanceFile::from_maps(source, &big_phi))
}

pub fn example_instance() -> InstanceFile {
    InstanceFile::from_maps(
        PhiSource::Schur {
            d: matrix_to_json(&example::d()),
        },
        &example::big_phi(),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stage {
    pub name: &'static str,
    pub passed: bool,
    pub lines: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DemoReport {
    pub stages: Vec<Stage>,
}

impl DemoReport {
    pub fn passed(&self) -> bool {
        self.stages.iter().all(|s| s.passed)
    }

    pub fn render(&self) -> String {
        let mut out =
            String::from("Schur-multiplier example on M2(C), k = 2, H1 = C^2, H2 = C^8\n");
        for (i, s) in self.stages.iter().enumerate() {
            out += &format!(
                "[{}] stage {}: {}\n",
                if s.passed { "PASS" } else { "FAIL" },
                i + 1,
                s.name
            );
            for line in &s.lines {
                out += &format!("    {line}\n");
            }
        }
        out += if self.passed() {
            "all stages passed\n"
        } else {
            "some stages FAILED\n"
        };
        out
    }
}

/// Exact-reproduction thresholds for the built-in example.
const EXACT: f64 = 1e-12;
const WITNESS: f64 = 1e-8;

/// The built-in example end to end. Stage thresholds are fixed; `tol` only
/// drives the underlying constructions.
pub fn demo(tol: &TolerancePolicy) -> (DemoReport, RepresentationPair) {
    let phi = example::phi();
    let big_phi = example::big_phi();
    let mut stages = Vec::new();

    // 1. complete positivity and the φ-map identity
    let choi = choi_of(&phi);
    let eig = hermitian_eig(&choi, tol).expect("Choi matrix of a Schur map is Hermitian");
    let expected = [0.0, 0.0, 0.5, 1.5];
    let eig_err = eig
        .values
        .iter()
        .zip(expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let cp = is_completely_positive(&phi, tol);
    let pv = verify_phi_map(&big_phi, tol);
    stages.push(Stage {
        name: "check",
        passed: cp.completely_positive
            && eig_err <= EXACT
            && pv.is_phi_map
            && pv.max_residual <= EXACT,
        lines: vec![
            format!(
                "Choi eigenvalues {:?} (expected {{0, 0, 1/2, 3/2}}, max error {eig_err:.1e})",
                eig.values
                    .iter()
                    .map(|v| (v * 1e12).round() / 1e12 + 0.0)
                    .collect::<Vec<_>>()
            ),
            format!("phi completely positive: {}", cp.completely_positive),
            format!("Phi phi-map residual {:.1e}", pv.max_residual),
        ],
    });

    // 2. construction
    let built = construct_minimal_pair(&big_phi, tol);
    let (constructed, stage) = match built {
        Ok(pair) => {
            let rr = verify_representation(&phi, &big_phi, &pair, tol);
            let m = minimality_check(&pair, tol);
            let stage = Stage {
                name: "dilate",
                passed: rr.passed
                    && rr.k1_dim == 4
                    && rr.k2_dim == 8
                    && m.minimal_k1
                    && m.minimal_k2,
                lines: vec![
                    format!(
                        "k1_dim = {} (expected 4), k2_dim = {} (expected 8)",
                        rr.k1_dim, rr.k2_dim
                    ),
                    format!(
                        "max residual {:.1e}, minimal ({}, {})",
                        max_residual(&rr),
                        m.minimal_k1,
                        m.minimal_k2
                    ),
                ],
            };
            (Some(pair), stage)
        }
        Err(e) => (
            None,
            Stage {
                name: "dilate",
                passed: false,
                lines: vec![format!("construction failed: {e}")],
            },
        ),
    };
    stages.push(stage);

    // 3. the explicit pair
    let explicit = example::explicit_pair();
    let rr = verify_representation(&phi, &big_phi, &explicit, tol);
    let v_sq = operator_norm(explicit.stinespring().v()).powi(2);
    let phi_one = operator_norm(&image_of_unit(&phi));
    let norms_ok = (v_sq - 1.0).abs() <= EXACT && (phi_one - 1.0).abs() <= EXACT;
    let mut lines = vec![format!("max residual {:.1e}", max_residual(&rr))];
    lines.push(if norms_ok {
        "‖V‖² = ‖φ(1)‖ = 1".to_string()
    } else {
        format!("‖V‖² = {v_sq}, ‖φ(1)‖ = {phi_one}")
    });
    stages.push(Stage {
        name: "explicit pair",
        passed: rr.shapes_consistent && max_residual(&rr) <= EXACT && norms_ok,
        lines,
    });

    // 4. equivalence
    let stage = match &constructed {
        Some(c) => match unitary_equivalence(&explicit, c, tol) {
            Ok(w) => Stage {
                name: "equivalence",
                passed: w.residuals.max() <= WITNESS,
                lines: vec![format!("witness max residual {:.1e}", w.residuals.max())],
            },
            Err(e) => Stage {
                name: "equivalence",
                passed: false,
                lines: vec![e.to_string()],
            },
        },
        None => Stage {
            name: "equivalence",
            passed: false,
            lines: vec!["no constructed pair".into()],
        },
    };
    stages.push(stage);

    // 5. x0 obstruction
    let a = asadi_condition_check(&big_phi);
    let impossible = a.verdict == AsadiVerdict::Impossible;
    stages.push(Stage {
        name: "x0 condition",
        passed: impossible && a.max_rank_bound == 2 && a.h2_dim == 8,
        lines: vec![if impossible {
            format!(
                "x₀ condition impossible: rank ≤ {} < {}",
                a.max_rank_bound, a.h2_dim
            )
        } else {
            format!(
                "x₀ condition inconclusive: rank ≤ {}, h2 = {}",
                a.max_rank_bound, a.h2_dim
            )
        }],
    });

    (DemoReport { stages }, constructed.unwrap_or(explicit))
}

fn max_residual(rr: &RepresentationReport) -> f64 {
    rr.residuals().iter().map(|(_, r)| *r).fold(0.0, f64::max)
}

/// Writes the example instance and both pairs into `dir`.
pub fn write_demo_files(dir: &Path, constructed: &RepresentationPair) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    write_json(&dir.join("schur_instance.json"), &example_instance())?;
    write_json(
        &dir.join("schur_explicit_pair.json"),
        &RepresentationFile::from_pair(&example::explicit_pair()),
    )?;
    write_json(
        &dir.join("schur_constructed_pair.json"),
        &RepresentationFile::from_pair(constructed),
    )
}
