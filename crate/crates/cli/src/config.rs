//! Run configuration: TOML schema, parsing with path-qualified errors, and
//! translation into a [`SystemSpec`].

use lindloc::baths::{BathSpec, SpectralModel};
use lindloc::linalg::{embed, pauli, validate_density};
use lindloc::liouvillian::{Subsystem, SystemSpec};
use lindloc::models;
use lindloc::{ComplexMatrix, C64};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Relative tolerance for the Hermiticity check on every matrix read from a config.
const HERMITIAN_LOAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub generator: GeneratorChoice,
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorChoice {
    #[default]
    Modified,
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builder {
    SingleQubit,
    TwoQubit,
    Chain,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionKind {
    #[default]
    Xx,
    Zz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub builder: Builder,
    /// Qubit splittings (builders only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub energies: Vec<f64>,
    #[serde(default)]
    pub alpha: f64,
    pub beta_coupling: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grouping_tol: Option<f64>,
    #[serde(default)]
    pub interaction: InteractionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralConfig>,
    #[serde(default)]
    pub lamb_shift: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subsystems: Vec<SubsystemConfig>,
    /// Full-space interaction terms (explicit models only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interactions: Vec<MatrixConfig>,
    pub baths: Vec<BathConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralKind {
    Flat,
    Ohmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    pub kind: SpectralKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsystemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub hamiltonian: MatrixConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coupling_ops: Vec<MatrixConfig>,
}

/// A complex matrix as paired real and (optional) imaginary row arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixConfig {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    pub t_max: f64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default = "default_positivity_tol")]
    pub positivity_tol: f64,
    #[serde(default)]
    pub initial: InitialState,
}

fn default_stride() -> usize {
    1
}

fn default_positivity_tol() -> f64 {
    lindloc::linalg::POSITIVITY_CLIP
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedState {
    #[default]
    Ground,
    Excited,
    MaximallyMixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Named(NamedState),
    Matrix(MatrixConfig),
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Named(NamedState::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Report]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Dotted path into the config, e.g. `model.baths[0].temperature`.
    pub parameter: String,
    pub values: Vec<f64>,
    /// Further paths set to the same value on every point.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub linked: Vec<String>,
}

impl RunConfig {
    pub fn formats(&self) -> Vec<OutputFormat> {
        self.output.as_ref().map_or_else(default_formats, |o| o.formats.clone())
    }

    pub fn output_dir(&self) -> Option<&str> {
        self.output.as_ref().and_then(|o| o.directory.as_deref())
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))
    }
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let de = toml::Deserializer::parse(text).map_err(|e| CliError::Config(describe_toml_error(text, &e, None)))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(describe_toml_error(text, e.inner(), Some(path)))
    })
}

fn describe_toml_error(text: &str, err: &toml::de::Error, path: Option<String>) -> String {
    let message = err.message().trim().to_string();
    let mut location = path.filter(|p| p != ".").unwrap_or_default();
    // serde reports a missing field at its parent; name the field itself.
    if let Some(field) = message.strip_prefix("missing field `").and_then(|m| m.strip_suffix('`')) {
        location = if location.is_empty() { field.to_string() } else { format!("{location}.{field}") };
    }
    let line = err.span().map(|span| text[..span.start.min(text.len())].lines().count().max(1));
    match (line, location.is_empty()) {
        (Some(line), false) => format!("line {line}, key `{location}`: {message}"),
        (Some(line), true) => format!("line {line}: {message}"),
        (None, false) => format!("key `{location}`: {message}"),
        (None, true) => message,
    }
}

/// Returns a copy of `text` with each dotted `path` set to `value`.
pub fn with_values(text: &str, paths: &[&str], value: f64) -> Result<String, CliError> {
    let mut doc: toml::Table =
        toml::from_str(text).map_err(|e| CliError::Config(describe_toml_error(text, &e, None)))?;
    for path in paths {
        set_path(&mut doc, path, value)?;
    }
    toml::to_string(&doc).map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))
}

enum Segment<'a> {
    Key(&'a str),
    Index(usize),
}

fn parse_path(path: &str) -> Result<Vec<Segment<'_>>, CliError> {
    let bad = || CliError::Config(format!("malformed sweep path `{path}`"));
    let mut out = Vec::new();
    for part in path.split('.') {
        let (key, mut rest) = match part.find('[') {
            Some(i) => (&part[..i], &part[i..]),
            None => (part, ""),
        };
        if key.is_empty() {
            return Err(bad());
        }
        out.push(Segment::Key(key));
        while !rest.is_empty() {
            let close = rest.find(']').ok_or_else(bad)?;
            if !rest.starts_with('[') {
                return Err(bad());
            }
            out.push(Segment::Index(rest[1..close].parse().map_err(|_| bad())?));
            rest = &rest[close + 1..];
        }
    }
    Ok(out)
}

fn set_path(doc: &mut toml::Table, path: &str, value: f64) -> Result<(), CliError> {
    let segments = parse_path(path)?;
    let missing = || CliError::Config(format!("sweep path `{path}` does not exist in the config"));
    let (last, init) = segments.split_last().ok_or_else(missing)?;
    let mut slot: &mut toml::Value = match &init.first() {
        Some(Segment::Key(k)) => doc.get_mut(*k).ok_or_else(missing)?,
        _ => {
            // Top-level scalar.
            let Segment::Key(k) = last else { return Err(missing()) };
            doc.insert((*k).to_string(), toml::Value::Float(value));
            return Ok(());
        }
    };
    for seg in &init[1..] {
        slot = match seg {
            Segment::Key(k) => slot.get_mut(*k).ok_or_else(missing)?,
            Segment::Index(i) => slot.get_mut(*i).ok_or_else(missing)?,
        };
    }
    match last {
        Segment::Key(k) => {
            let table = slot.as_table_mut().ok_or_else(missing)?;
            table.insert((*k).to_string(), toml::Value::Float(value));
        }
        Segment::Index(i) => {
            let arr = slot.as_array_mut().ok_or_else(missing)?;
            *arr.get_mut(*i).ok_or_else(missing)? = toml::Value::Float(value);
        }
    }
    Ok(())
}

impl MatrixConfig {
    pub fn to_matrix(&self, what: &str) -> Result<ComplexMatrix, CliError> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        if rows == 0 || self.re.iter().any(|r| r.len() != cols) {
            return Err(CliError::Config(format!("{what}: `re` must be a non-empty rectangular array")));
        }
        let mut data = Vec::with_capacity(rows * cols);
        match &self.im {
            None => data.extend(self.re.iter().flatten().map(|&x| C64::new(x, 0.0))),
            Some(im) => {
                if im.len() != rows || im.iter().any(|r| r.len() != cols) {
                    return Err(CliError::Config(format!("{what}: `im` shape differs from `re`")));
                }
                data.extend(self.re.iter().flatten().zip(im.iter().flatten()).map(|(&a, &b)| C64::new(a, b)));
            }
        }
        Ok(ComplexMatrix::from_vec(rows, cols, data)?)
    }

    pub fn to_hermitian(&self, what: &str) -> Result<ComplexMatrix, CliError> {
        let m = self.to_matrix(what)?;
        if !m.is_square() {
            return Err(CliError::Config(format!("{what}: matrix must be square")));
        }
        m.ensure_hermitian(HERMITIAN_LOAD_TOL)
            .map_err(|e| CliError::Config(format!("{what}: {e}")))?;
        Ok(m)
    }

    #[cfg(test)]
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| {
            (0..m.rows()).map(|i| (0..m.cols()).map(|j| f(&m[(i, j)])).collect()).collect::<Vec<Vec<f64>>>()
        };
        let im = rows(|z| z.im);
        let has_im = im.iter().flatten().any(|&x| x != 0.0);
        Self { re: rows(|z| z.re), im: has_im.then_some(im) }
    }
}

impl SpectralConfig {
    pub fn to_model(self, what: &str) -> Result<SpectralModel, CliError> {
        let model = match self.kind {
            SpectralKind::Flat => {
                if self.cutoff.is_some() {
                    return Err(CliError::Config(format!("{what}: flat spectral model takes no `cutoff`")));
                }
                SpectralModel::Flat {
                    // 2πκ = 1 unless overridden
                    coupling_scale: self.coupling_scale.unwrap_or(1.0 / (2.0 * std::f64::consts::PI)),
                }
            }
            SpectralKind::Ohmic => SpectralModel::Ohmic {
                coupling_scale: self
                    .coupling_scale
                    .ok_or_else(|| CliError::Config(format!("{what}: ohmic model needs `coupling_scale`")))?,
                cutoff: self.cutoff.ok_or_else(|| CliError::Config(format!("{what}: ohmic model needs `cutoff`")))?,
            },
        };
        model.validate().map_err(|e| CliError::Config(format!("{what}: {e}")))?;
        Ok(model)
    }
}

impl ModelConfig {
    pub fn to_spec(&self) -> Result<SystemSpec, CliError> {
        if self.lamb_shift {
            return Err(CliError::Config(
                "model.lamb_shift: the Lamb-shift correction is not supported; remove the flag or set it to false".into(),
            ));
        }
        let default_spectral = match self.spectral {
            Some(s) => s.to_model("model.spectral")?,
            None => SpectralModel::default(),
        };
        let mut spec = match self.builder {
            Builder::Explicit => self.explicit_spec(default_spectral)?,
            _ => self.builder_spec(default_spectral)?,
        };
        spec.grouping_tol = self.grouping_tol;
        spec.validate()?;
        Ok(spec)
    }

    fn builder_spec(&self, spectral: SpectralModel) -> Result<SystemSpec, CliError> {
        if !self.subsystems.is_empty() || !self.interactions.is_empty() {
            return Err(CliError::Config(
                "model: `subsystems` and `interactions` are only allowed with builder = \"explicit\"".into(),
            ));
        }
        let n = self.energies.len();
        let expected = match self.builder {
            Builder::SingleQubit => Some(1),
            Builder::TwoQubit => Some(2),
            _ => None,
        };
        if let Some(k) = expected {
            if n != k {
                return Err(CliError::Config(format!("model.energies: builder needs {k} energies, got {n}")));
            }
        }
        if self.baths.len() != n {
            return Err(CliError::Config(format!(
                "model.baths: one bath per qubit is required ({n} qubits, {} baths)",
                self.baths.len()
            )));
        }
        let temps: Vec<f64> = self.baths.iter().map(|b| b.temperature).collect();
        let mut spec = match self.builder {
            Builder::SingleQubit => {
                if self.alpha != 0.0 {
                    return Err(CliError::Config("model.alpha: a single qubit has no interaction".into()));
                }
                models::single_qubit_model(self.energies[0], temps[0], spectral, self.beta_coupling)?
            }
            Builder::TwoQubit => models::two_qubit_model(&models::TwoQubitParams {
                e1: self.energies[0],
                e2: self.energies[1],
                alpha: self.alpha,
                beta_coupling: self.beta_coupling,
                t1: temps[0],
                t2: temps[1],
                spectral,
            })?,
            _ => models::qubit_chain_model(n, &self.energies, self.alpha, self.beta_coupling, &temps, spectral)?,
        };
        if self.interaction == InteractionKind::Zz {
            let dims = spec.dims();
            spec.interactions = (0..n.saturating_sub(1))
                .map(|k| Ok(embed(&pauli::sigma_z(), k, &dims)?.matmul(&embed(&pauli::sigma_z(), k + 1, &dims)?)))
                .collect::<lindloc::Result<Vec<_>>>()?;
        }
        for (i, (bath, cfg)) in spec.baths.iter_mut().zip(&self.baths).enumerate() {
            if let Some(label) = &cfg.label {
                bath.label = label.clone();
            }
            if let Some(s) = cfg.spectral {
                bath.spectral = s.to_model(&format!("model.baths[{i}].spectral"))?;
            }
            if !cfg.coupling_ops.is_empty() {
                bath.coupling_ops = coupling_ops(cfg, i)?;
            }
        }
        Ok(spec)
    }

    fn explicit_spec(&self, spectral: SpectralModel) -> Result<SystemSpec, CliError> {
        if !self.energies.is_empty() {
            return Err(CliError::Config("model.energies: not used by builder = \"explicit\"".into()));
        }
        if self.interaction != InteractionKind::default() {
            return Err(CliError::Config(
                "model.interaction: explicit models list their terms under `interactions`".into(),
            ));
        }
        let subsystems = self
            .subsystems
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let h = s.hamiltonian.to_hermitian(&format!("model.subsystems[{i}].hamiltonian"))?;
                Ok(Subsystem::new(s.label.clone().unwrap_or_else(|| format!("s{}", i + 1)), h))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let interactions = self
            .interactions
            .iter()
            .enumerate()
            .map(|(i, m)| m.to_hermitian(&format!("model.interactions[{i}]")))
            .collect::<Result<Vec<_>, CliError>>()?;
        let baths = self
            .baths
            .iter()
            .enumerate()
            .map(|(i, cfg)| {
                if cfg.coupling_ops.is_empty() {
                    return Err(CliError::Config(format!(
                        "model.baths[{i}].coupling_ops: required for explicit models"
                    )));
                }
                let sp = match cfg.spectral {
                    Some(s) => s.to_model(&format!("model.baths[{i}].spectral"))?,
                    None => spectral,
                };
                let label = cfg.label.clone().unwrap_or_else(|| format!("b{}", i + 1));
                Ok(BathSpec::from_temperature(label, cfg.temperature, sp, coupling_ops(cfg, i)?)?)
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(SystemSpec {
            subsystems,
            interactions,
            alpha: self.alpha,
            baths,
            beta_coupling: self.beta_coupling,
            grouping_tol: None,
        })
    }
}

fn coupling_ops(cfg: &BathConfig, bath: usize) -> Result<Vec<ComplexMatrix>, CliError> {
    cfg.coupling_ops
        .iter()
        .enumerate()
        .map(|(k, m)| m.to_hermitian(&format!("model.baths[{bath}].coupling_ops[{k}]")))
        .collect()
}

impl InitialState {
    /// Resolves the initial density matrix against the bare Hamiltonian.
    pub fn to_state(&self, h_s: &ComplexMatrix, positivity_tol: f64) -> Result<ComplexMatrix, CliError> {
        let d = h_s.rows();
        let rho = match self {
            InitialState::Named(NamedState::MaximallyMixed) => ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
            InitialState::Named(which) => {
                let eig = lindloc::linalg::hermitian_eig(h_s)?;
                let k = if *which == NamedState::Ground { 0 } else { d - 1 };
                let v = eig.eigenvector(k);
                ComplexMatrix::outer(&v, &v)
            }
            InitialState::Matrix(m) => {
                let rho = m.to_hermitian("solver.initial")?;
                if rho.rows() != d {
                    return Err(CliError::Config(format!(
                        "solver.initial: expected a {d}x{d} matrix, got {}x{}",
                        rho.rows(),
                        rho.cols()
                    )));
                }
                rho
            }
        };
        validate_density(&rho, positivity_tol).map_err(|e| CliError::Config(format!("solver.initial: {e}")))?;
        Ok(rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_QUBIT: &str = r#"
generator = "modified"

[model]
builder = "two_qubit"
energies = [1.0, 1.0]
alpha = 0.01
beta_coupling = 0.01

[[model.baths]]
temperature = 2.0

[[model.baths]]
temperature = 1.0
spectral = { kind = "ohmic", coupling_scale = 0.2, cutoff = 5.0 }

[solver]
dt = 0.05
t_max = 10.0
record_stride = 20
initial = { re = [[0.5, 0.0, 0.0, 0.0], [0.0, 0.5, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]] }

[sweep]
parameter = "model.baths[0].temperature"
values = [0.5, 1.0]
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = parse(TWO_QUBIT).unwrap();
        assert_eq!(cfg.model.baths.len(), 2);
        assert!(matches!(cfg.solver.as_ref().unwrap().initial, InitialState::Matrix(_)));
        let again = parse(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
        let spec = cfg.model.to_spec().unwrap();
        assert!(matches!(spec.baths[1].spectral, SpectralModel::Ohmic { .. }));
    }

    #[test]
    fn missing_temperature_names_the_key() {
        let text = TWO_QUBIT.replacen("temperature = 2.0", "", 1);
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("model.baths[0].temperature"), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected_with_line() {
        let text = TWO_QUBIT.replace("alpha = 0.01", "alpha = 0.01\ngamma = 3");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("gamma") && err.contains("line"), "{err}");
    }

    #[test]
    fn lamb_shift_rejected() {
        let text = TWO_QUBIT.replace("alpha = 0.01", "alpha = 0.01\nlamb_shift = true");
        assert!(parse(&text).unwrap().model.to_spec().is_err());
    }

    #[test]
    fn non_hermitian_matrix_rejected() {
        let m = MatrixConfig { re: vec![vec![0.0, 1.0], vec![0.0, 0.0]], im: None };
        assert!(m.to_hermitian("x").is_err());
        let m = MatrixConfig { re: vec![vec![0.0, 0.0], vec![0.0, 0.0]], im: Some(vec![vec![0.0, 1.0], vec![-1.0, 0.0]]) };
        assert!(m.to_hermitian("x").is_ok());
        assert_eq!(MatrixConfig::from_matrix(&m.to_matrix("x").unwrap()), m);
    }

    #[test]
    fn sweep_paths() {
        let text = with_values(TWO_QUBIT, &["model.baths[1].temperature", "model.alpha"], 0.75).unwrap();
        let cfg = parse(&text).unwrap();
        assert_eq!(cfg.model.baths[1].temperature, 0.75);
        assert_eq!(cfg.model.alpha, 0.75);
        assert!(with_values(TWO_QUBIT, &["model.baths[7].temperature"], 1.0).is_err());
        assert!(with_values(TWO_QUBIT, &["model..alpha"], 1.0).is_err());
    }

    #[test]
    fn builder_shape_checks() {
        let text = TWO_QUBIT.replace("energies = [1.0, 1.0]", "energies = [1.0]");
        assert!(parse(&text).unwrap().model.to_spec().is_err());
    }
}
