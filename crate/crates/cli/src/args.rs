//! Argument definitions and their translation into library types.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nearfar::channel::{PhaseModel, PowerCoupling, ScatterBox, ScattererScaling, ScattererSet};
use nearfar::experiments::ExperimentId;
use nearfar::geometry::{wavelength_from_ghz, ArraySpec, LinkScene, SceneKind};

#[derive(Debug, Parser)]
#[command(
    name = "nearfar",
    version,
    about = "Near-field / far-field boundary analysis for MIMO links"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one boundary criterion, or every criterion with `--criterion all`.
    Boundary(BoundaryArgs),
    /// EDoF of the spherical and planar channels at one distance.
    Edof(PointArgs),
    /// Capacity of both channel models and the planar estimation error.
    Capacity(CapacityArgs),
    /// EDoF ratio and capacity error over a range of distances.
    Sweep(SweepArgs),
    /// Reproduce one of the reference studies as CSV.
    #[command(after_long_help = crate::experiment_defaults())]
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SceneChoice {
    /// BS ULA on the Z axis, user ULA at angles α, β.
    UlaUla,
    /// BS URA in the XZ-plane, user ULA rotated by θ.
    UraUla,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhaseChoice {
    RandomPerPair,
    PerScatterer,
}

#[derive(Debug, Clone, Args)]
pub struct SceneArgs {
    #[arg(long, value_enum, default_value = "ula-ula")]
    pub scene: SceneChoice,
    /// Transmit ULA length in metres (ula-ula).
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    /// Transmit ULA element count (ula-ula).
    #[arg(long, default_value_t = 2)]
    pub nt: usize,
    /// Transmit URA horizontal side in metres (ura-ula).
    #[arg(long, default_value_t = 0.05)]
    pub dtx: f64,
    /// Transmit URA vertical side in metres (ura-ula).
    #[arg(long, default_value_t = 0.3)]
    pub dtz: f64,
    /// URA elements along X; half-wavelength spacing when omitted.
    #[arg(long)]
    pub ntx: Option<usize>,
    /// URA elements along Z; half-wavelength spacing when omitted.
    #[arg(long)]
    pub ntz: Option<usize>,
    /// Receive ULA length in metres.
    #[arg(long, default_value_t = 0.1)]
    pub dr: f64,
    /// Receive ULA element count.
    #[arg(long, default_value_t = 2)]
    pub nr: usize,
    /// User direction elevation α in degrees (ula-ula).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha_deg: f64,
    /// User ULA tilt β in degrees (ula-ula).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub beta_deg: f64,
    /// User ULA rotation θ in degrees (ura-ula).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta_deg: f64,
    /// Carrier frequency in GHz.
    #[arg(long, default_value_t = 100.0)]
    pub freq_ghz: f64,
    /// Scatterers placed in the middle 80% of the link, 2 m × 2 m cross-section.
    #[arg(long, default_value_t = 0)]
    pub scatterers: usize,
    #[arg(long, value_enum, default_value = "random-per-pair")]
    pub phase_model: PhaseChoice,
    /// Seed for scatterer placement and phases.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SceneArgs {
    pub fn wavelength(&self) -> f64 {
        wavelength_from_ghz(self.freq_ghz)
    }

    /// Scene at `distance`; scatterers are placed for that distance and
    /// stretch along the link if the distance is later changed.
    pub fn scene(&self, distance: f64) -> nearfar::Result<LinkScene> {
        let lambda = self.wavelength();
        let rx = ArraySpec::ula(self.nr, self.dr)?;
        let (tx, kind) = match self.scene {
            SceneChoice::UlaUla => (
                ArraySpec::ula(self.nt, self.dt)?,
                SceneKind::UlaToUla {
                    alpha: self.alpha_deg.to_radians(),
                    beta: self.beta_deg.to_radians(),
                },
            ),
            SceneChoice::UraUla => {
                let tx = match (self.ntx, self.ntz) {
                    (None, None) => ArraySpec::ura_half_wavelength(self.dtx, self.dtz, lambda)?,
                    (nx, nz) => {
                        let half = ArraySpec::ura_half_wavelength(self.dtx, self.dtz, lambda)?;
                        let (hx, hz) = match half {
                            ArraySpec::Ura {
                                elements_x,
                                elements_z,
                                ..
                            } => (elements_x, elements_z),
                            ArraySpec::Ula { .. } => {
                                unreachable!("ura_half_wavelength returns a URA")
                            }
                        };
                        ArraySpec::ura(nx.unwrap_or(hx), nz.unwrap_or(hz), self.dtx, self.dtz)?
                    }
                };
                (
                    tx,
                    SceneKind::UraToUla {
                        theta: self.theta_deg.to_radians(),
                    },
                )
            }
        };
        let scene = LinkScene::new(tx, rx, distance, lambda, kind)?;
        if self.scatterers == 0 {
            return Ok(scene);
        }
        let mut elements = scene.tx_positions()?;
        elements.extend(scene.rx_positions()?);
        let region = ScatterBox::between_arrays(distance, 0.8, 2.0, 2.0);
        let placed = ScattererSet::random_in_box(
            self.scatterers,
            region,
            10.0 * lambda,
            &elements,
            None,
            self.seed,
        )?;
        let phase = match self.phase_model {
            PhaseChoice::RandomPerPair => PhaseModel::RandomPerPair,
            PhaseChoice::PerScatterer => PhaseModel::PerScatterer,
        };
        let set = ScattererSet::new(placed, phase, PowerCoupling::FreeSpaceProduct, self.seed)?
            .with_scaling(ScattererScaling::AlongLink {
                reference_distance: distance,
            });
        Ok(scene.with_scatterers(set))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionChoice {
    /// 2D²/λ with D = --aperture (default: transmit aperture).
    Rayleigh,
    /// 2(Dt + Dr)²/λ.
    RayleighArray,
    /// 4 Dt Dr / λ.
    MimoArd,
    /// 9D.
    Critical,
    /// Uniform-power distance for --gamma-th.
    UniformPower,
    /// 0.367 cos²φ · 2D²/λ.
    EffectiveRayleigh,
    /// 2L√N.
    Bjornson,
    /// 2.86D (ULA) or 3.96D (URA).
    EquiPower,
    /// τ_g d_t d_r cos cos / λ with element spacings.
    EigenThreshold,
    /// ε Dt Dr cos cos / λ.
    CapacityThreshold,
    /// Numerical EDoF-ratio boundary at --threshold.
    Ebd,
    /// Closed-form EBD with --aux.
    EbdClosedForm,
    /// Numerical eigenvalue-ratio boundary at --eigenratio-db.
    Emd,
    /// Numerical capacity-ratio boundary at --factor and --snr-db.
    CapacityRatio,
    /// Every criterion above that has its inputs.
    All,
}

#[derive(Debug, Clone, Args)]
pub struct BoundaryArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[arg(long, value_enum, default_value = "ebd")]
    pub criterion: CriterionChoice,
    /// Aperture D for the single-aperture forms; defaults to the transmit aperture.
    #[arg(long)]
    pub aperture: Option<f64>,
    /// EDoF-ratio threshold.
    #[arg(long, default_value_t = 1.01)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0.9)]
    pub gamma_th: f64,
    /// Incidence angle φ in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi_deg: f64,
    /// Element diagonal L in metres; defaults to √2 · half a wavelength.
    #[arg(long)]
    pub element_diagonal: Option<f64>,
    /// Antenna count N; defaults to the transmit element count.
    #[arg(long)]
    pub n_antennas: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub tau_g: f64,
    #[arg(long, default_value_t = 4.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = -20.0, allow_negative_numbers = true)]
    pub eigenratio_db: f64,
    /// Eigenvalue index compared with the largest.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 1.5)]
    pub factor: f64,
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub snr_db: f64,
    /// Auxiliary constant a (ula-ula) or b (ura-ula) of the closed-form EBD.
    #[arg(long)]
    pub aux: Option<f64>,
    /// Search bracket lower end in metres.
    #[arg(long, requires = "hi")]
    pub lo: Option<f64>,
    /// Search bracket upper end in metres.
    #[arg(long, requires = "lo")]
    pub hi: Option<f64>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Centre-to-centre distance in metres.
    #[arg(long, default_value_t = 1.0)]
    pub distance: f64,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Receive SNR in dB; repeat for several values.
    #[arg(long = "snr-db", default_values_t = [20.0], allow_negative_numbers = true)]
    pub snr_db: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[arg(long, default_value_t = 1.0)]
    pub from: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub to: f64,
    #[arg(long, default_value_t = 31)]
    pub points: usize,
    /// Space the distances linearly instead of geometrically.
    #[arg(long)]
    pub linear: bool,
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub snr_db: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    /// fig2, fig3, fig4, fig5a or fig5b.
    #[arg(value_parser = parse_experiment)]
    pub id: ExperimentId,
    /// Output CSV path; `-` for standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for `<id>.csv` when --out is not given.
    #[arg(long, env = "NEARFAR_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON file with parameter overrides.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Single override `key=<json>`, applied after --config; repeatable.
    #[arg(long = "set", value_name = "KEY=JSON")]
    pub set: Vec<String>,
    /// Print the resolved parameters as JSON and exit.
    #[arg(long)]
    pub show_config: bool,
}

fn parse_experiment(s: &str) -> Result<ExperimentId, String> {
    s.parse().map_err(|e: nearfar::Error| e.to_string())
}
