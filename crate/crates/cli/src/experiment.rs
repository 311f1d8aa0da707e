use std::path::{Path, PathBuf};

use delaypred::disturbance::{make_disturbance, DisturbanceSpec};
use delaypred::linalg::{matrix_from_rows, vector_from_slice, Matrix};
use delaypred::model::PlantDocument;
use delaypred::prelude::*;
use serde::{Deserialize, Serialize};

/// Plant given inline or as a path relative to the experiment file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlantSource {
    Path(PathBuf),
    Inline(PlantDocument),
}

fn default_zeta_a() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignOptions {
    #[serde(default = "default_zeta_a")]
    pub zeta_a: f64,
    #[serde(default)]
    pub zeta_b: f64,
    /// Minimize `γ̄`; otherwise any feasible point is accepted.
    #[serde(default = "default_true")]
    pub minimize: bool,
    /// Skip the eigenvalue band constraints.
    #[serde(default)]
    pub unconstrained_eigenvalues: bool,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            zeta_a: 1.0,
            zeta_b: 0.0,
            minimize: true,
            unconstrained_eigenvalues: false,
        }
    }
}

fn default_horizon() -> usize {
    delaypred::sim::DEFAULT_HORIZON
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationOptions {
    #[serde(rename = "K")]
    pub k: Vec<Vec<f64>>,
    pub x0: Vec<f64>,
    pub disturbance: DisturbanceSpec,
    /// Method for `simulate` and `bound`.
    #[serde(default)]
    pub method: Option<Method>,
    /// Methods for `compare` when `--methods` is absent.
    #[serde(default)]
    pub methods: Option<Vec<Method>>,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub theta: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub etahat0: Option<Vec<f64>>,
}

/// One experiment file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub plant: PlantSource,
    /// Overrides the plant document's `r`.
    #[serde(default)]
    pub r: Option<usize>,
    #[serde(default)]
    pub design: Option<DesignOptions>,
    /// Externally supplied observer gain (`n × m_y`).
    #[serde(rename = "L", default)]
    pub l: Option<Vec<Vec<f64>>>,
    /// Previously written certificate, relative to the experiment file.
    #[serde(default)]
    pub certificate: Option<PathBuf>,
    #[serde(default)]
    pub simulation: Option<SimulationOptions>,
}

/// Where the observer gain comes from.
#[derive(Debug, Clone)]
pub enum GainSource {
    Design(DesignOptions),
    Supplied(Matrix),
    Certificate(DesignCertificate),
}

/// An experiment with every file reference loaded and checked.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub spec: ExperimentSpec,
    pub plant: PlantModel,
    pub r: usize,
    pub gain: GainSource,
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let spec: ExperimentSpec =
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_spec(spec, base)
    }

    pub fn from_spec(mut spec: ExperimentSpec, base: &Path) -> Result<Self> {
        let doc = match &spec.plant {
            PlantSource::Path(p) => PlantDocument::load(&resolve(base, p))?,
            PlantSource::Inline(doc) => doc.clone(),
        };
        let plant = doc.to_plant()?;
        let r = spec.r.unwrap_or(doc.r);
        // Echo the plant inline so the output directory is self-contained.
        spec.plant = PlantSource::Inline(PlantDocument::from_plant(&plant, r));
        spec.r = Some(r);

        let given = [spec.design.is_some(), spec.l.is_some(), spec.certificate.is_some()];
        if given.iter().filter(|g| **g).count() > 1 {
            return Err(Error::Usage("choose one of `design`, `L` and `certificate`".into()));
        }
        let gain = if let Some(rows) = &spec.l {
            GainSource::Supplied(matrix_from_rows("L", rows)?)
        } else if let Some(p) = &spec.certificate {
            let full = resolve(base, p);
            let text = std::fs::read_to_string(&full).map_err(|e| Error::Parse(format!("{}: {e}", full.display())))?;
            let cert = delaypred::lmi::certificate_from_json(&text)?;
            spec.certificate = None;
            spec.l = Some(delaypred::linalg::matrix_to_rows(&cert.l));
            GainSource::Certificate(cert)
        } else {
            GainSource::Design(spec.design.clone().unwrap_or_default())
        };
        Ok(Self { spec, plant, r, gain })
    }

    /// Method for single-run commands: configured, else the output-injected
    /// form when the state is measured, else the standard observer form.
    pub fn method(&self) -> Method {
        self.spec
            .simulation
            .as_ref()
            .and_then(|s| s.method)
            .unwrap_or(if self.plant.measures_state() { Method::Modified } else { Method::Proposed })
    }

    pub fn gain_form(&self) -> GainForm {
        if self.method() == Method::Modified {
            GainForm::Modified
        } else {
            GainForm::Standard
        }
    }

    pub fn simulation(&self) -> Result<&SimulationOptions> {
        self.spec
            .simulation
            .as_ref()
            .ok_or_else(|| Error::Usage("experiment has no `simulation` section".into()))
    }

    pub fn sim_config(&self, l: Option<Matrix>, seed: Option<u64>) -> Result<SimConfig> {
        let s = self.simulation()?;
        let mut config = SimConfig::new(
            self.plant.clone(),
            matrix_from_rows("K", &s.k)?,
            vector_from_slice("x0", &s.x0)?,
            make_disturbance(&s.disturbance, seed)?,
        )
        .with_method(self.method())
        .with_horizon(s.horizon);
        config.r = self.r;
        config.l = l;
        config.theta = match &s.theta {
            Some(rows) => Some(rows.iter().map(|u| vector_from_slice("theta", u)).collect::<Result<_>>()?),
            None => None,
        };
        config.etahat0 = match &s.etahat0 {
            Some(v) => Some(vector_from_slice("etahat0", v)?),
            None => None,
        };
        config.validate()?;
        Ok(config)
    }
}
