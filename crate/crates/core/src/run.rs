//! Batch driver: configuration in, CSV traces and VTK snapshots out.
//!
//! The configuration is validated before anything is written. Records are
//! handed to a writer thread over a bounded channel so that file I/O
//! overlaps the next step.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::thread;

use thiserror::Error;

use crate::coupler::{CoupledProblem, SubiterationRecord};
use crate::mesh::{build_channel_mesh, write_vtk, Point, PointField, ReferenceMesh};
use crate::scenario::{validate_config, ConfigError, ScenarioConfig};
use crate::simulation::{Simulation, SimulationError, StepRecord};
use crate::windkessel::WindkesselParams;

pub const FLOW_CSV: &str = "flow.csv";
pub const WALL_CSV: &str = "wall.csv";
pub const WINDKESSEL_CSV: &str = "windkessel.csv";
pub const SUBITERATION_CSV: &str = "subiterations.csv";

const SCHEMA_VERSION: u32 = 1;
const CHANNEL_BOUND: usize = 16;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("simulation failed: {0}")]
    Step(#[from] SimulationError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl RunError {
    /// Process exit status for this class of failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Step(_) => 3,
            Self::Io { .. } => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub steps: usize,
    pub max_subiterations: usize,
    pub total_subiterations: usize,
}

/// Reads, validates and runs the scenario at `config_path`. `output_dir`
/// overrides the directory named in the file.
pub fn run_scenario(config_path: &Path, output_dir: Option<&Path>) -> Result<RunSummary, RunError> {
    let mut cfg = ScenarioConfig::from_file(config_path)?;
    if let Some(dir) = output_dir {
        cfg.output.directory = dir.to_path_buf();
    }
    run_config(&cfg)
}

/// Validates `cfg` and builds the simulation without touching the disk.
pub fn prepare(cfg: &ScenarioConfig) -> Result<Simulation, RunError> {
    let violations = validate_config(cfg);
    if !violations.is_empty() {
        return Err(ConfigError::Invalid(violations).into());
    }
    let invalid = |e: String| RunError::Config(ConfigError::Invalid(vec![e]));
    let g = &cfg.geometry;
    let mesh =
        build_channel_mesh(g.length, g.radius, g.nz, g.nr).map_err(|e| invalid(e.to_string()))?;
    let problem = CoupledProblem::new(
        mesh,
        cfg.physical_params(),
        cfg.fluid_config(),
        cfg.coupling,
    )
    .map_err(|e| invalid(e.to_string()))?;
    Simulation::new(
        problem,
        cfg.windkessel,
        cfg.wall_mode,
        cfg.output.probes.clone(),
    )
    .map_err(|e| invalid(e.to_string()))
}

pub fn run_config(cfg: &ScenarioConfig) -> Result<RunSummary, RunError> {
    let mut sim = prepare(cfg)?;
    let dir = cfg.output.directory.clone();
    std::fs::create_dir_all(&dir).map_err(|source| RunError::Io {
        path: dir.clone(),
        source,
    })?;

    let writer = Writers::create(&dir, &cfg.output.probes, *sim.windkessel())?;
    let (tx, rx) = mpsc::sync_channel::<Message>(CHANNEL_BOUND);
    let mesh = sim.problem().mesh.clone();
    let handle = thread::spawn(move || writer.drain(&mesh, rx));

    let interval = cfg.output.snapshot_interval;
    let snapshot = |sim: &Simulation| {
        let state = sim.state();
        let rho = sim.problem().fluid.rho;
        Message::Snapshot {
            step: state.step_index,
            coords: state.ale.y_new.clone(),
            u: state.fluid.u.clone(),
            p: state.fluid.p.iter().map(|p| rho * p).collect(),
        }
    };

    let mut summary = RunSummary {
        output_dir: dir.clone(),
        steps: 0,
        max_subiterations: 0,
        total_subiterations: 0,
    };
    let mut outcome = Ok(());
    // A send only fails once the writer has stopped on an I/O error, which
    // the join below reports.
    let _ = tx.send(Message::Record(sim.record(Vec::new())));
    if interval > 0 {
        let _ = tx.send(snapshot(&sim));
    }
    for _ in 0..sim.num_steps() {
        match sim.step() {
            Ok(record) => {
                summary.steps += 1;
                summary.max_subiterations =
                    summary.max_subiterations.max(record.subiterations.len());
                summary.total_subiterations += record.subiterations.len();
                let step = record.step;
                log::info!(
                    "t = {:.6e}: {} subiterations, max |eta| = {:.3e}",
                    record.t,
                    record.subiterations.len(),
                    record.max_wall_disp
                );
                if tx.send(Message::Record(record)).is_err() {
                    break;
                }
                if interval > 0 && step % interval == 0 && tx.send(snapshot(&sim)).is_err() {
                    break;
                }
            }
            Err(e) => {
                if let SimulationError::Coupling(crate::coupler::CouplingError::NotConverged {
                    history,
                    ..
                }) = &e
                {
                    let _ = tx.send(Message::History(history.clone()));
                }
                log::error!("{e}");
                outcome = Err(RunError::Step(e));
                break;
            }
        }
    }
    drop(tx);
    let written = handle.join().expect("writer thread panicked");
    written?;
    outcome?;
    Ok(summary)
}

enum Message {
    Record(StepRecord),
    History(Vec<SubiterationRecord>),
    Snapshot {
        step: usize,
        coords: Vec<Point>,
        u: Vec<Point>,
        p: Vec<f64>,
    },
}

struct Sink {
    path: PathBuf,
    out: BufWriter<File>,
}

impl Sink {
    fn create(path: PathBuf) -> Result<Self, RunError> {
        let file = File::create(&path).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(Self {
            path,
            out: BufWriter::new(file),
        })
    }

    fn line(&mut self, text: &str) -> Result<(), RunError> {
        writeln!(self.out, "{text}").map_err(|source| self.error(source))
    }

    fn finish(mut self) -> Result<(), RunError> {
        self.out.flush().map_err(|source| self.error(source))
    }

    fn error(&self, source: io::Error) -> RunError {
        RunError::Io {
            path: self.path.clone(),
            source,
        }
    }
}

struct Writers {
    dir: PathBuf,
    flow: Sink,
    wall: Sink,
    windkessel: Sink,
    subiterations: Sink,
    wk_params: WindkesselParams,
}

fn num(v: f64) -> String {
    // Adding zero maps -0.0 to 0.0.
    format!("{:.9e}", v + 0.0)
}

impl Writers {
    fn create(dir: &Path, probes: &[f64], wk_params: WindkesselParams) -> Result<Self, RunError> {
        let header = |name: &str| format!("# vessel-sim {name} v{SCHEMA_VERSION}");
        let mut flow = Sink::create(dir.join(FLOW_CSV))?;
        flow.line(&header("flow"))?;
        flow.line("t,q_in,q_out,p_in_mean,p_out_mean,max_wall_disp")?;

        let mut wall = Sink::create(dir.join(WALL_CSV))?;
        let locations: Vec<String> = probes.iter().map(|z| z.to_string()).collect();
        wall.line(&format!(
            "{} probes_z={}",
            header("wall"),
            locations.join(";")
        ))?;
        let mut columns = vec!["t".to_string()];
        columns.extend((0..probes.len()).map(|i| format!("eta_{i}")));
        columns.push("max_abs_eta".to_string());
        wall.line(&columns.join(","))?;

        let mut windkessel = Sink::create(dir.join(WINDKESSEL_CSV))?;
        windkessel.line(&header("windkessel"))?;
        windkessel.line("t,q,p_c,p_out")?;

        let mut subiterations = Sink::create(dir.join(SUBITERATION_CSV))?;
        subiterations.line(&header("subiterations"))?;
        subiterations.line("step,subiteration,disp_residual,vel_residual,fluid_iterations")?;

        Ok(Self {
            dir: dir.to_path_buf(),
            flow,
            wall,
            windkessel,
            subiterations,
            wk_params,
        })
    }

    fn drain(mut self, mesh: &ReferenceMesh, rx: mpsc::Receiver<Message>) -> Result<(), RunError> {
        for message in rx {
            match message {
                Message::Record(record) => self.record(&record)?,
                Message::History(history) => self.history(&history)?,
                Message::Snapshot { step, coords, u, p } => {
                    let path = self.dir.join(format!("snapshot_{step:06}.vtk"));
                    let io_err = |source| RunError::Io {
                        path: path.clone(),
                        source,
                    };
                    let mut out = BufWriter::new(File::create(&path).map_err(io_err)?);
                    write_vtk(
                        &mut out,
                        &format!("step {step}"),
                        mesh,
                        &coords,
                        &[
                            PointField::Vector("velocity", &u),
                            PointField::Scalar("pressure", &p),
                        ],
                    )
                    .and_then(|_| out.flush())
                    .map_err(io_err)?;
                }
            }
        }
        self.flow.finish()?;
        self.wall.finish()?;
        self.windkessel.finish()?;
        self.subiterations.finish()
    }

    fn record(&mut self, r: &StepRecord) -> Result<(), RunError> {
        let flow = [
            r.t,
            r.q_in,
            r.q_out,
            r.p_in_mean,
            r.p_out_mean,
            r.max_wall_disp,
        ];
        self.flow.line(&flow.map(num).join(","))?;

        let mut wall = vec![num(r.t)];
        wall.extend(r.probes.iter().map(|&v| num(v)));
        wall.push(num(r.max_wall_disp));
        self.wall.line(&wall.join(","))?;

        let p_out = r.windkessel.outlet_pressure(&self.wk_params, r.q_out);
        let wk = [r.t, r.q_out, r.windkessel.p_c, p_out];
        self.windkessel.line(&wk.map(num).join(","))?;

        self.history(&r.subiterations)
    }

    fn history(&mut self, history: &[SubiterationRecord]) -> Result<(), RunError> {
        for s in history {
            self.subiterations.line(&format!(
                "{},{},{},{},{}",
                s.step,
                s.subiteration,
                num(s.disp_residual),
                num(s.vel_residual),
                s.fluid_iterations
            ))?;
        }
        Ok(())
    }
}
