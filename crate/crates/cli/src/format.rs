//! JSON file formats: instances, representations, witnesses and reports.
//!
//! Complex scalars are `[re, im]` pairs and matrices are arrays of rows.
//! Every object rejects unknown keys. Shapes are not self-describing, so
//! each matrix is parsed against the shape implied by the declared
//! dimensions; that also makes zero-row matrices (an empty `K2`)
//! unambiguous.

use serde::{Deserialize, Serialize};
use stinespring::{
    CMatrix, CPMap, EquivalenceWitness, FreeModule, MatrixAlgebra, ModuleRep, PhiMap,
    RepresentationPair, StinespringRep, C64,
};

use crate::CliError;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

/// Pretty JSON with each matrix row kept on one line, newline-terminated.
pub fn to_json_text<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("serializable");
    let mut out = String::new();
    write_value(&value, 0, &mut out);
    out.push('\n');
    out
}

fn is_flat(v: &serde_json::Value) -> bool {
    use serde_json::Value;
    match v {
        Value::Array(items) => items.iter().all(|x| match x {
            Value::Array(inner) => inner.iter().all(|y| !y.is_array() && !y.is_object()),
            Value::Object(_) => false,
            _ => true,
        }),
        _ => true,
    }
}

fn write_value(v: &serde_json::Value, depth: usize, out: &mut String) {
    use serde_json::Value;
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Array(items) if !items.is_empty() && !is_flat(v) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&serde_json::to_string(key).expect("string key"));
                out.push_str(": ");
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
        _ => out.push_str(&serde_json::to_string(v).expect("serializable")),
    }
}

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| {
                    let z = m.get(i, j);
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

/// Parses `json` as a `rows × cols` matrix; `field` names it in errors.
pub fn matrix_from_json(
    json: &JsonMatrix,
    rows: usize,
    cols: usize,
    field: &str,
) -> Result<CMatrix, CliError> {
    if json.len() != rows {
        return Err(CliError::input(format!(
            "{field}: expected {rows} rows, found {}",
            json.len()
        )));
    }
    let mut entries = Vec::with_capacity(rows * cols);
    for (i, row) in json.iter().enumerate() {
        if row.len() != cols {
            return Err(CliError::input(format!(
                "{field}: row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        entries.extend(row.iter().map(|&[re, im]| C64::new(re, im)));
    }
    CMatrix::from_row_major(rows, cols, entries)
        .map_err(|e| CliError::input(format!("{field}: {e}")))
}

fn matrices_from_json(
    json: &[JsonMatrix],
    count: usize,
    rows: usize,
    cols: usize,
    field: &str,
) -> Result<Vec<CMatrix>, CliError> {
    if json.len() != count {
        return Err(CliError::input(format!(
            "{field}: expected {count} matrices, found {}",
            json.len()
        )));
    }
    json.iter()
        .enumerate()
        .map(|(i, m)| matrix_from_json(m, rows, cols, &format!("{field}[{i}]")))
        .collect()
}

/// How the base map `φ` is given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PhiSource {
    /// `φ(a) = D ∘ a`; requires `h1_dim = n`.
    Schur {
        #[serde(rename = "D")]
        d: JsonMatrix,
    },
    /// Images of the matrix units `E_pq`, in `p·n + q` order.
    Images { images: Vec<JsonMatrix> },
    /// `h1 × n` Kraus operators.
    Kraus { ops: Vec<JsonMatrix> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n: usize,
    pub k: usize,
    pub h1_dim: usize,
    pub h2_dim: usize,
    pub phi: PhiSource,
    /// Images of the scalar basis `δ_i ⊗ E_pq` of `Aᵏ`, in `i·n² + p·n + q`
    /// order.
    #[serde(rename = "Phi")]
    pub big_phi: Vec<JsonMatrix>,
}

/// A parsed instance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub phi: CPMap,
    pub big_phi: PhiMap,
}

impl InstanceFile {
    pub fn from_maps(phi_source: PhiSource, big_phi: &PhiMap) -> Self {
        Self {
            n: big_phi.module().n(),
            k: big_phi.module().k(),
            h1_dim: big_phi.h1_dim(),
            h2_dim: big_phi.h2_dim(),
            phi: phi_source,
            big_phi: big_phi.basis_images().iter().map(matrix_to_json).collect(),
        }
    }

    pub fn parse(&self) -> Result<Instance, CliError> {
        for (name, value) in [
            ("n", self.n),
            ("k", self.k),
            ("h1_dim", self.h1_dim),
            ("h2_dim", self.h2_dim),
        ] {
            if value == 0 {
                return Err(CliError::input(format!("{name}: must be at least 1")));
            }
        }
        let algebra = MatrixAlgebra::new(self.n).map_err(|e| CliError::input(format!("n: {e}")))?;
        let (n, h1) = (self.n, self.h1_dim);
        let phi = match &self.phi {
            PhiSource::Schur { d } => {
                if h1 != n {
                    return Err(CliError::input(format!(
                        "phi.D: a Schur map needs h1_dim = n, got h1_dim = {h1}, n = {n}"
                    )));
                }
                let d = matrix_from_json(d, n, n, "phi.D")?;
                stinespring::schur_map(&d)
            }
            PhiSource::Images { images } => {
                let images = matrices_from_json(images, n * n, h1, h1, "phi.images")?;
                CPMap::from_images(algebra, h1, images)
            }
            PhiSource::Kraus { ops } => {
                if ops.is_empty() {
                    return Err(CliError::input(
                        "phi.ops: at least one Kraus operator is required",
                    ));
                }
                let ops = matrices_from_json(ops, ops.len(), h1, n, "phi.ops")?;
                CPMap::from_kraus(algebra, &ops)
            }
        }
        .map_err(|e| CliError::input(format!("phi: {e}")))?;
        let module =
            FreeModule::new(algebra, self.k).map_err(|e| CliError::input(format!("k: {e}")))?;
        let images = matrices_from_json(&self.big_phi, module.basis_len(), self.h2_dim, h1, "Phi")?;
        let big_phi = PhiMap::new(module, phi.clone(), self.h2_dim, images)
            .map_err(|e| CliError::input(format!("Phi: {e}")))?;
        Ok(Instance { phi, big_phi })
    }
}

/// A serialized `((ρ, V, K1), (Ψ, W, K2))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationFile {
    pub n: usize,
    pub k: usize,
    pub h1_dim: usize,
    pub h2_dim: usize,
    pub k1_dim: usize,
    pub k2_dim: usize,
    /// `ρ(E_pq)`, `k1 × k1`, in `p·n + q` order.
    pub rho: Vec<JsonMatrix>,
    /// `k1 × h1`.
    #[serde(rename = "V")]
    pub v: JsonMatrix,
    /// `Ψ(δ_i ⊗ E_pq)`, `k2 × k1`.
    #[serde(rename = "Psi")]
    pub psi: Vec<JsonMatrix>,
    /// `k2 × h2`.
    #[serde(rename = "W")]
    pub w: JsonMatrix,
}

impl RepresentationFile {
    pub fn from_pair(pair: &RepresentationPair) -> Self {
        let st = pair.stinespring();
        let mr = pair.module_rep();
        Self {
            n: st.algebra().n(),
            k: mr.module().k(),
            h1_dim: st.h1_dim(),
            h2_dim: mr.w().cols(),
            k1_dim: st.k1_dim(),
            k2_dim: mr.k2_dim(),
            rho: st.rho_images().iter().map(matrix_to_json).collect(),
            v: matrix_to_json(st.v()),
            psi: mr.psi_images().iter().map(matrix_to_json).collect(),
            w: matrix_to_json(mr.w()),
        }
    }

    pub fn parse(&self) -> Result<RepresentationPair, CliError> {
        let algebra = MatrixAlgebra::new(self.n).map_err(|e| CliError::input(format!("n: {e}")))?;
        let module =
            FreeModule::new(algebra, self.k).map_err(|e| CliError::input(format!("k: {e}")))?;
        let (k1, k2) = (self.k1_dim, self.k2_dim);
        let rho = matrices_from_json(&self.rho, algebra.dim(), k1, k1, "rho")?;
        let v = matrix_from_json(&self.v, k1, self.h1_dim, "V")?;
        let psi = matrices_from_json(&self.psi, module.basis_len(), k2, k1, "Psi")?;
        let w = matrix_from_json(&self.w, k2, self.h2_dim, "W")?;
        let st =
            StinespringRep::new(algebra, rho, v).map_err(|e| CliError::input(e.to_string()))?;
        let mr = ModuleRep::new(module, psi, w).map_err(|e| CliError::input(e.to_string()))?;
        RepresentationPair::new(st, mr).map_err(|e| CliError::input(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessFile {
    /// `U1: K1 → K1'`.
    #[serde(rename = "U1")]
    pub u1: JsonMatrix,
    /// `U2: K2 → K2'`.
    #[serde(rename = "U2")]
    pub u2: JsonMatrix,
    pub residuals: Vec<Residual>,
    pub threshold: f64,
}

impl WitnessFile {
    pub fn from_witness(w: &EquivalenceWitness) -> Self {
        Self {
            u1: matrix_to_json(&w.u1),
            u2: matrix_to_json(&w.u2),
            residuals: w
                .residuals
                .named()
                .into_iter()
                .map(|(name, value)| Residual {
                    name: name.into(),
                    value,
                })
                .collect(),
            threshold: w.threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Residual {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub atol: f64,
    pub rank_rtol: f64,
    pub psd_rtol: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dimensions {
    pub n: usize,
    pub k: usize,
    pub h1_dim: usize,
    pub h2_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub choi_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k1_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k2_dim: Option<usize>,
}

/// One named identity or property with its residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Finite, non-negative.
    pub residual: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Minimality {
    pub minimal_k1: bool,
    pub minimal_k2: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub command: String,
    pub passed: bool,
    pub tolerances: Tolerances,
    pub dimensions: Dimensions,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub choi_eigenvalues: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub minimality: Option<Minimality>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub representation: Option<RepresentationFile>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<WitnessFile>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl ReportFile {
    pub fn render_human(&self) -> String {
        let mut out = format!(
            "{}: {}\n",
            self.command,
            if self.passed { "PASS" } else { "FAIL" }
        );
        let d = &self.dimensions;
        out += &format!(
            "  n = {}, k = {}, h1 = {}, h2 = {}",
            d.n, d.k, d.h1_dim, d.h2_dim
        );
        for (name, v) in [
            ("choi_rank", d.choi_rank),
            ("k1_dim", d.k1_dim),
            ("k2_dim", d.k2_dim),
        ] {
            if let Some(v) = v {
                out += &format!(", {name} = {v}");
            }
        }
        out.push('\n');
        if let Some(eigs) = &self.choi_eigenvalues {
            let list: Vec<String> = eigs.iter().map(|e| format!("{e:.6}")).collect();
            out += &format!("  Choi eigenvalues: [{}]\n", list.join(", "));
        }
        for c in &self.checks {
            out += &format!(
                "  [{}] {:<24} residual {:.3e} (threshold {:.3e})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.residual,
                c.threshold
            );
            if let Some(detail) = &c.detail {
                out += &format!("  {detail}");
            }
            out.push('\n');
        }
        if let Some(m) = &self.minimality {
            out += &format!("  minimal: K1 {}, K2 {}\n", m.minimal_k1, m.minimal_k2);
        }
        if let Some(err) = &self.error {
            out += &format!("  error: {err}\n");
        }
        out
    }
}
