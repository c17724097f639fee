//! Orchestration of the five run modes: classical simulation, static current
//! sweeps, quantum toy-model trajectories, spectral analysis and the
//! self-check suite. The command-line binary is a thin wrapper over these.

use std::path::Path;

use nalgebra::{DVector, Vector3};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{lorentzian_fit, welch_psd, TimeSeries};
use crate::config::SimConfig;
use crate::detection::{current_decomposition, homodyne_current, homodyne_mean, HomodyneConfig};
use crate::dynamics::simulate_trajectory;
use crate::error::Error;
use crate::kinematics::{n_matrix, rotation_from_euler, EulerAngles, GIMBAL_THRESHOLD};
use crate::optics::{gradient_coupling, gradient_coupling_trig, scattering_basis};
use crate::output::{
    read_columns_csv, svg_line_plot, write_columns_csv, write_trace_csv, PlotScale, TraceRecord,
};
use crate::scattering::{integrate_over_detector, DetectorGeometry, ScatterParams};
use crate::sme::{
    build_1d_translational_model, build_planar_rotor_model, validate_unraveling, DensityMatrix,
    HomodyneSme, LindbladSystem, UnravelingSpec,
};
use crate::Result;

/// Execution knobs shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Replaces the config seed when set.
    pub seed: Option<u64>,
    /// Worker threads for embarrassingly parallel sweeps.
    pub threads: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: None,
            threads: 1,
        }
    }
}

// The current-noise stream must be independent of the dynamics stream so
// that toggling detection cannot alter a trajectory.
const CURRENT_STREAM_SALT: u64 = 0x6c65_7669_746f_6431;

/// Classical trajectory plus homodyne current trace; writes `trace.csv` and
/// `trace.svg`.
pub fn run_simulate(cfg: &SimConfig, out_dir: &Path, opts: &RunOptions) -> Result<()> {
    let trap = cfg.trap_params()?;
    let gas = cfg.gas_params()?;
    let iopts = cfg.integration_options(opts.seed)?;
    let points = simulate_trajectory(&cfg.initial_state(), &trap, &gas, &cfg.constants, &iopts)?;

    let sample_dt = iopts.dt * iopts.stride as f64;
    let hcfg = HomodyneConfig::new(cfg.detector.delta_phi_rad, cfg.detector()?, sample_dt);
    let mut current_rng = ChaCha8Rng::seed_from_u64(iopts.seed ^ CURRENT_STREAM_SALT);
    let records: Vec<TraceRecord> = points
        .iter()
        .map(|pt| TraceRecord {
            t: pt.t,
            state: pt.state,
            j: homodyne_current(&pt.state, &trap, &cfg.constants, &hcfg, &mut current_rng),
            energy: pt.energy,
        })
        .collect();

    std::fs::create_dir_all(out_dir)?;
    write_trace_csv(&out_dir.join("trace.csv"), &records)?;
    let ts: Vec<f64> = records.iter().map(|r| r.t).collect();
    let xs: Vec<f64> = records.iter().map(|r| r.state.r.x).collect();
    svg_line_plot(
        &out_dir.join("trace.svg"),
        &ts,
        &xs,
        "t [s]",
        "x [m]",
        PlotScale::Linear,
    )
}

pub const CURRENTS_HEADER: &str = "value,j0,jt,jr,jrt,total,mean";

/// Static-state current decomposition swept over one configured coordinate;
/// writes `currents.csv`.
pub fn run_currents(cfg: &SimConfig, out_dir: &Path, opts: &RunOptions) -> Result<()> {
    let sweep = cfg
        .currents
        .as_ref()
        .ok_or_else(|| Error::ConfigInvalid("currents: section required".into()))?;
    let trap = cfg.trap_params()?;
    let hcfg = HomodyneConfig::new(
        cfg.detector.delta_phi_rad,
        cfg.detector()?,
        cfg.integrator.dt_s,
    );
    let base = cfg.initial_state();
    let values: Vec<f64> = (0..sweep.points)
        .map(|i| {
            sweep.start
                + (sweep.stop - sweep.start) * i as f64 / (sweep.points - 1) as f64
        })
        .collect();

    let eval = |v: f64| -> Vec<f64> {
        let mut state = base;
        match sweep.sweep.as_str() {
            "x" => state.r.x = v,
            "y" => state.r.y = v,
            "z" => state.r.z = v,
            "alpha" => state.phi.alpha = v,
            "beta" => state.phi.beta = v,
            _ => state.phi.gamma = v,
        }
        let dec = current_decomposition(&state, &trap, &cfg.constants, &hcfg);
        let mean = homodyne_mean(&state, &trap, &cfg.constants, &hcfg);
        vec![v, dec.j0, dec.jt, dec.jr, dec.jrt, dec.sum(), mean]
    };

    let rows: Vec<Vec<f64>> = if opts.threads > 1 {
        let mut rows = vec![Vec::new(); values.len()];
        let chunk = values.len().div_ceil(opts.threads);
        std::thread::scope(|scope| {
            for (vals, out) in values.chunks(chunk).zip(rows.chunks_mut(chunk)) {
                scope.spawn(|| {
                    for (v, slot) in vals.iter().zip(out.iter_mut()) {
                        *slot = eval(*v);
                    }
                });
            }
        });
        rows
    } else {
        values.iter().map(|v| eval(*v)).collect()
    };

    std::fs::create_dir_all(out_dir)?;
    write_columns_csv(&out_dir.join("currents.csv"), CURRENTS_HEADER, &rows)
}

/// Quantum toy-model trajectory; writes `sme.csv`.
pub fn run_sme(cfg: &SimConfig, out_dir: &Path, opts: &RunOptions) -> Result<()> {
    let q = cfg
        .quantum
        .as_ref()
        .ok_or_else(|| Error::ConfigInvalid("quantum: section required".into()))?;
    let trap = cfg.trap_params()?;
    let gas = cfg.gas_params()?;
    let seed = opts.seed.unwrap_or(cfg.integrator.seed);
    let steps = (q.duration_s / q.dt_s).round() as usize;
    std::fs::create_dir_all(out_dir)?;

    let rows = match q.model.as_str() {
        "translational" => {
            let model = build_1d_translational_model(
                &trap,
                &gas,
                &cfg.constants,
                q.fock_dim.unwrap(),
                (2, 4),
            )?;
            let sme = HomodyneSme::new(
                model.hamiltonian.clone(),
                model.gas_channels.clone(),
                &model.scatter,
                model.gamma_s,
                &cfg.detector()?,
                model.hbar,
            )?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rho = DensityMatrix::pure(&DVector::from_fn(model.dim, |i, _| {
                if i == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }))?;
            let mut rows = Vec::new();
            for step in 0..=steps {
                if step % q.stride == 0 {
                    rows.push(vec![
                        step as f64 * q.dt_s,
                        rho.expectation(&model.number_op).re,
                        rho.expectation(&model.x_op).re,
                        rho.purity(),
                        if step == 0 { 0.0 } else { f64::NAN },
                    ]);
                }
                if step == steps {
                    break;
                }
                let (next, j) = sme.step(&rho, q.dt_s, &mut rng);
                rho = next;
                if let Some(last) = rows.last_mut() {
                    if last[4].is_nan() {
                        last[4] = j;
                    }
                }
            }
            rows
        }
        _ => {
            // rotor: unconditional evolution of the gas-damped planar rotor
            let model = build_planar_rotor_model(&trap, &gas, &cfg.constants, q.l_max.unwrap())?;
            let sys = LindbladSystem::new(
                model.hamiltonian.clone(),
                model.gas_channels.clone(),
                model.hbar,
            )?;
            let mut rho = DensityMatrix::maximally_mixed(model.dim);
            let mut rows = Vec::new();
            for step in 0..=steps {
                if step % q.stride == 0 {
                    rows.push(vec![
                        step as f64 * q.dt_s,
                        rho.expectation(&model.hamiltonian).re,
                        rho.expectation(&model.pi_op).re,
                        rho.purity(),
                        0.0,
                    ]);
                }
                if step == steps {
                    break;
                }
                rho = sys.step(&rho, q.dt_s);
            }
            rows
        }
    };
    write_columns_csv(&out_dir.join("sme.csv"), "t,observable,quadrature,purity,J", &rows)
}

/// Welch PSD (and optional Lorentzian fit) of a trace column; writes
/// `psd.csv`, `psd.svg` and, when a fit window is configured, `fit.csv`.
pub fn run_psd(cfg: &SimConfig, out_dir: &Path, _opts: &RunOptions) -> Result<()> {
    let psd_cfg = cfg
        .psd
        .as_ref()
        .ok_or_else(|| Error::ConfigInvalid("psd: section required".into()))?;
    let input = {
        let p = Path::new(&psd_cfg.input);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            out_dir.join(p)
        }
    };
    let (header, rows) = read_columns_csv(&input)?;
    let col = |name: &str| -> Result<usize> {
        header.iter().position(|h| h == name).ok_or_else(|| {
            Error::ConfigInvalid(format!(
                "psd.column: '{name}' not found in {}",
                input.display()
            ))
        })
    };
    let t_idx = col("t")?;
    let v_idx = col(&psd_cfg.column)?;
    if rows.len() < 2 {
        return Err(Error::ConfigInvalid("psd.input: too few samples".into()));
    }
    let sample_rate = 1.0 / (rows[1][t_idx] - rows[0][t_idx]);
    let ts = TimeSeries::new(sample_rate, rows.iter().map(|r| r[v_idx]).collect())?;
    let (freqs, psd) = welch_psd(&ts, psd_cfg.segment_length, psd_cfg.overlap)?;

    std::fs::create_dir_all(out_dir)?;
    let table: Vec<Vec<f64>> = freqs.iter().zip(&psd).map(|(f, s)| vec![*f, *s]).collect();
    write_columns_csv(&out_dir.join("psd.csv"), "frequency_hz,psd_value", &table)?;
    svg_line_plot(
        &out_dir.join("psd.svg"),
        &freqs,
        &psd,
        "frequency [Hz]",
        "PSD",
        PlotScale::LogLog,
    )?;
    if let Some([lo, hi]) = psd_cfg.fit_window_hz {
        let fit = lorentzian_fit(&freqs, &psd, (lo, hi))?;
        write_columns_csv(
            &out_dir.join("fit.csv"),
            "center_hz,linewidth_hz,plateau,amplitude,residual",
            &[vec![
                fit.center,
                fit.linewidth,
                fit.plateau,
                fit.amplitude,
                fit.residual,
            ]],
        )?;
    }
    Ok(())
}

/// One line of the self-check report.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Fast invariant suite over the configured system; returns one result per
/// check. All checks are deterministic.
pub fn run_check(cfg: &SimConfig) -> Result<Vec<CheckResult>> {
    let trap = cfg.trap_params()?;
    let mut rng = ChaCha8Rng::seed_from_u64(424242);
    let mut results = Vec::new();
    let mut push = |name: &'static str, passed: bool, detail: String| {
        results.push(CheckResult {
            name,
            passed,
            detail,
        });
    };
    let uniform =
        |rng: &mut ChaCha8Rng, lo: f64, hi: f64| lo + (hi - lo) * rand::Rng::random::<f64>(rng);

    // rotation algebra: orthogonality, unit determinant, generator identity
    {
        let mut worst: f64 = 0.0;
        let dt = 1e-6;
        for _ in 0..1_000 {
            let phi = EulerAngles::new(
                uniform(&mut rng, -3.0, 3.0),
                uniform(&mut rng, 0.2, std::f64::consts::PI - 0.2),
                uniform(&mut rng, -3.0, 3.0),
            );
            let f = rotation_from_euler(&phi);
            worst = worst.max((f.transpose() * f - nalgebra::Matrix3::identity()).norm());
            worst = worst.max((f.determinant() - 1.0).abs());
            // Ḟ Fᵀ must be the skew form of N φ̇
            let rate = Vector3::new(
                uniform(&mut rng, -1.0, 1.0),
                uniform(&mut rng, -1.0, 1.0),
                uniform(&mut rng, -1.0, 1.0),
            );
            let plus = EulerAngles::from_vector(&(phi.as_vector() + rate * (dt / 2.0)));
            let minus = EulerAngles::from_vector(&(phi.as_vector() - rate * (dt / 2.0)));
            let fdot_ft =
                (rotation_from_euler(&plus) - rotation_from_euler(&minus)) / dt * f.transpose();
            let omega = n_matrix(&phi) * rate;
            let skew = crate::kinematics::skew(&omega);
            for i in 0..3 {
                for j in 0..3 {
                    worst = worst.max((fdot_ft[(i, j)] - skew[(i, j)]).abs());
                }
            }
        }
        push(
            "rotation-algebra",
            worst < 1e-6,
            format!("max residual {worst:.3e}"),
        );
    }

    // gradient-coupling equivalence: trig expansion vs matrix contraction
    {
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let phi = EulerAngles::new(
                uniform(&mut rng, -3.0, 3.0),
                uniform(&mut rng, -3.0, 3.0),
                uniform(&mut rng, -3.0, 3.0),
            );
            let chi = crate::optics::Susceptibility::new(
                uniform(&mut rng, 0.1, 2.0),
                Vector3::new(
                    uniform(&mut rng, -0.4, 0.4),
                    uniform(&mut rng, -0.4, 0.4),
                    uniform(&mut rng, -0.4, 0.4),
                ),
            )
            .unwrap();
            let pol = crate::optics::elliptical_polarization(
                uniform(&mut rng, 0.1, 1.0),
                uniform(&mut rng, 0.0, 1.0),
            )
            .unwrap();
            worst = worst.max(
                (gradient_coupling(&phi, &chi, &pol) - gradient_coupling_trig(&phi, &chi, &pol))
                    .abs(),
            );
        }
        push(
            "gradient-coupling",
            worst < 1e-12,
            format!("max |trig − matrix| {worst:.3e}"),
        );
    }

    // completeness of the transverse basis and the dipole integral
    {
        let mut worst: f64 = 0.0;
        for _ in 0..1_000 {
            let n = Vector3::new(
                uniform(&mut rng, -1.0, 1.0),
                uniform(&mut rng, -1.0, 1.0),
                uniform(&mut rng, -1.0, 1.0),
            )
            .normalize();
            let basis = scattering_basis(&n)?;
            let mut sum = nalgebra::Matrix3::<f64>::zeros();
            for nu in 0..2 {
                let e = basis.eps_real(nu);
                sum += e * e.transpose();
            }
            let expected = nalgebra::Matrix3::identity() - n * n.transpose();
            worst = worst.max((sum - expected).norm());
        }
        let sphere = DetectorGeometry::full_sphere(1.0).with_orders(32, 64);
        let v = Vector3::new(0.0, 0.0, 1.0);
        let dipole = integrate_over_detector(
            |_n, basis, nu| Complex64::new(basis.eps_real(nu).dot(&v).powi(2), 0.0),
            &sphere,
        )
        .re;
        let dipole_err = (dipole - 8.0 * std::f64::consts::PI / 3.0).abs();
        push(
            "completeness-dipole",
            worst < 1e-12 && dipole_err < 1e-10,
            format!("completeness {worst:.3e}, dipole residual {dipole_err:.3e}"),
        );
    }

    // conservative-limit energy drift over the configured trap
    {
        let mut iopts = cfg.integration_options(None)?;
        iopts.recoil = None;
        let n_steps = 10_000usize;
        iopts.duration = iopts.dt * n_steps as f64;
        iopts.stride = n_steps;
        let points = simulate_trajectory(
            &cfg.initial_state(),
            &trap,
            &crate::dynamics::GasParams::off(),
            &cfg.constants,
            &iopts,
        )?;
        let e0 = points.first().unwrap().energy;
        let e1 = points.last().unwrap().energy;
        let scale = e0.abs().max(1e-300);
        let drift = ((e1 - e0) / scale).abs();
        push(
            "energy-conservation",
            drift < 1e-6,
            format!("relative drift {drift:.3e} over {n_steps} steps"),
        );
    }

    // unraveling positivity validator on the three canonical cases
    {
        let ok1 = validate_unraveling(&UnravelingSpec::heterodyne_like(2)).is_ok();
        let ok2 = validate_unraveling(&UnravelingSpec {
            eta: DVector::from_element(2, 1.0),
            xi: nalgebra::DMatrix::identity(2, 2),
        })
        .is_ok();
        let rejected = validate_unraveling(&UnravelingSpec {
            eta: DVector::from_element(2, 0.5),
            xi: nalgebra::DMatrix::identity(2, 2),
        })
        .is_err();
        push(
            "unraveling-validator",
            ok1 && ok2 && rejected,
            format!("accept {ok1}/{ok2}, reject {rejected}"),
        );
    }

    // gimbal-locked charts must be rejected, regular ones accepted
    {
        let locked = crate::kinematics::n_matrix_inverse(
            &EulerAngles::new(0.3, 0.0, -0.2),
            GIMBAL_THRESHOLD,
        )
        .is_err();
        let regular = crate::kinematics::n_matrix_inverse(
            &EulerAngles::new(0.3, 1.2, -0.2),
            GIMBAL_THRESHOLD,
        )
        .is_ok();
        push(
            "gimbal-guard",
            locked && regular,
            format!("locked rejected {locked}, regular accepted {regular}"),
        );
    }

    // scattering rate consistency: explicit formula vs ScatterParams
    {
        let sp = ScatterParams::from_trap(&trap, &cfg.constants, None);
        let direct = crate::scattering::scattering_rate(&trap, &cfg.constants);
        let rel = ((sp.gamma_s - direct) / direct).abs();
        push(
            "scattering-rate",
            rel < 1e-12 && sp.gamma_s > 0.0,
            format!("relative mismatch {rel:.3e}"),
        );
    }

    Ok(results)
}
