//! Time-domain stochastic oracle for the collective Brownian motion.
//!
//! Integrates the same equation of motion the mode picture diagonalizes,
//!
//! dp_n = [-m nu^2 z_n + fbar_n - alpha_n p_n
//!         + Sum_{m != n} K_nm (z_n - z_m)] dt + dW_n,
//! dz_n = (p_n / m) dt,
//!
//! with Gaussian increments correlated across sites, <dW_n dW_m> =
//! 2 D_p^{nm} dt. The quantum recoil noise is replaced by a classical
//! Gaussian process with the same second moments, which is all the
//! steady-state observables depend on; the derivative correction to the
//! noise kernel is dropped as negligible. Stepping is semi-implicit
//! (symplectic Euler): momenta advance with the current positions,
//! positions advance with the updated momenta, which keeps the long-time
//! energy bounded once nu dt <= 0.05.
//!
//! The ensemble serves as an independent cross-check of the
//! frequency-domain solution: per-mode equipartition at T_e, the static
//! displacements zbar, nearest-neighbour position correlations, and the
//! Lorentzian sidebands of the position power spectral density.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::mechanics::{normal_modes, ForceCoefficients, ModeBasis};
use crate::params::TrapParams;
use crate::scalar::Real;

/// How the site-correlated noise covariance 2 D_p dt is factorized into
/// per-step increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseFactorization {
    /// Eigendecomposition with negative eigenvalues clipped at -1e-10;
    /// handles rank-deficient covariances exactly.
    Eigen,
    /// Cholesky factorization, retried with a small diagonal jitter when
    /// the matrix is numerically semidefinite.
    CholeskyWithJitter,
}

/// Integration budget and reproducibility contract of a stochastic run.
#[derive(Debug, Clone, PartialEq)]
pub struct LangevinConfig<R: Real> {
    /// Time step (units 1/gamma); capped by 0.05/max(nu_j) and
    /// 0.1/max(alpha_n).
    pub dt: R,
    /// Recorded steps per ensemble member (after burn-in).
    pub n_steps: usize,
    /// Independent ensemble members.
    pub n_ensemble: usize,
    /// Seed of the counter-based RNG; member i draws from substream i.
    pub seed: u64,
    /// Discarded equilibration steps; positive values must cover
    /// 5/min(alpha_j). Zero keeps the transient (deterministic checks).
    pub burn_in: usize,
    /// Noise factorization route.
    pub noise_factorization: NoiseFactorization,
}

/// Recorded trajectories of one stochastic run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble<R: Real> {
    /// Positions, one (n_steps x N) matrix per member (units lambda).
    pub z: Vec<DMatrix<R>>,
    /// Momenta, matching layout.
    pub p: Vec<DMatrix<R>>,
    /// Configuration echo.
    pub config: LangevinConfig<R>,
    /// RNG substream identifier used by each member.
    pub streams: Vec<u64>,
}

impl<R: Real> TrajectoryEnsemble<R> {
    /// Number of ensemble members.
    pub fn n_members(&self) -> usize {
        self.z.len()
    }

    /// Number of sites.
    pub fn n_sites(&self) -> usize {
        self.z.first().map_or(0, |m| m.ncols())
    }

    /// Recorded steps per member.
    pub fn n_recorded(&self) -> usize {
        self.z.first().map_or(0, |m| m.nrows())
    }
}

/// Welch estimate of the per-mode position spectral density.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate<R: Real> {
    /// Nonnegative frequency half-grid omega_k = 2 pi k / (segment dt),
    /// k = 0..=segment/2 (units gamma). The underlying series are real,
    /// so the two-sided density is even and the half-grid is complete.
    pub omega: DVector<R>,
    /// Two-sided spectral density, row j holds mode j.
    pub psd: DMatrix<R>,
    /// Segment length in steps.
    pub segment_len: usize,
    /// Total averaged segments across members.
    pub n_segments: usize,
}

fn finite<R: Real>(x: R) -> bool {
    x.to_subset().unwrap_or(f64::NAN).is_finite()
}

/// Factorizes cov = 2 D dt into a matrix L with L L^T = cov.
fn noise_scale<R: Real>(
    diffusion: &DMatrix<Complex<R>>,
    dt: R,
    route: NoiseFactorization,
) -> Result<DMatrix<R>> {
    let n = diffusion.nrows();
    let scale = diffusion.iter().fold(R::zero(), |acc, z| {
        acc.max(z.re.abs()).max(z.im.abs())
    });
    let im_tol = R::of(1e-10) * scale.max(R::one());
    if diffusion.iter().any(|z| z.im.abs() > im_tol) {
        return Err(Error::InvalidArgument(
            "diffusion matrix has an imaginary part; the classical noise \
             surrogate requires a real drive profile"
                .into(),
        ));
    }
    let d = DMatrix::from_fn(n, n, |i, j| diffusion[(i, j)].re);
    let two_dt = (R::of(2.0) * dt).sqrt();
    if scale == R::zero() {
        return Ok(DMatrix::zeros(n, n));
    }
    match route {
        NoiseFactorization::Eigen => {
            let eig = d.symmetric_eigen();
            let tol = R::of(1e-10);
            let mut l = DMatrix::zeros(n, n);
            for k in 0..n {
                let lam = eig.eigenvalues[k];
                if lam < -tol {
                    return Err(Error::NoiseFactorization {
                        value: lam.to_subset().unwrap_or(f64::NAN),
                        tolerance: 1e-10,
                    });
                }
                let s = lam.max(R::zero()).sqrt() * two_dt;
                for i in 0..n {
                    l[(i, k)] = eig.eigenvectors[(i, k)] * s;
                }
            }
            Ok(l)
        }
        NoiseFactorization::CholeskyWithJitter => {
            let diag_scale = (0..n).fold(R::zero(), |acc, i| acc.max(d[(i, i)].abs()));
            for jitter_rel in [0.0, 1e-14, 1e-12, 1e-10] {
                let mut dj = d.clone();
                for i in 0..n {
                    dj[(i, i)] += R::of(jitter_rel) * diag_scale;
                }
                if let Some(chol) = dj.cholesky() {
                    return Ok(chol.unpack() * two_dt);
                }
            }
            let min_eig = d
                .symmetric_eigenvalues()
                .iter()
                .fold(R::zero(), |acc, &e| acc.min(e));
            Err(Error::NoiseFactorization {
                value: min_eig.to_subset().unwrap_or(f64::NAN),
                tolerance: 1e-10,
            })
        }
    }
}

/// Integrates the ensemble from the quiescent initial state z = p = 0.
///
/// Burn-in then relaxes each member onto the displaced thermal steady
/// state before recording starts.
pub fn simulate<R: Real>(
    fc: &ForceCoefficients<R>,
    trap: &TrapParams<R>,
    cfg: &LangevinConfig<R>,
) -> Result<TrajectoryEnsemble<R>> {
    let n = fc.n_sites();
    simulate_from(fc, trap, cfg, &DVector::zeros(n), &DVector::zeros(n))
}

/// Integrates the ensemble from a caller-supplied initial state, shared
/// by every member (deterministic checks start from a displaced atom).
pub fn simulate_from<R: Real>(
    fc: &ForceCoefficients<R>,
    trap: &TrapParams<R>,
    cfg: &LangevinConfig<R>,
    z0: &DVector<R>,
    p0: &DVector<R>,
) -> Result<TrajectoryEnsemble<R>> {
    let n = fc.n_sites();
    if cfg.n_steps == 0 || cfg.n_ensemble == 0 {
        return Err(Error::InvalidArgument(format!(
            "need at least one step and one member, got n_steps={}, n_ensemble={}",
            cfg.n_steps, cfg.n_ensemble
        )));
    }
    if !(cfg.dt > R::zero() && finite(cfg.dt)) {
        return Err(Error::InvalidArgument(format!(
            "time step must be positive and finite, got {:?}",
            cfg.dt
        )));
    }
    if z0.len() != n || p0.len() != n {
        return Err(Error::InvalidArgument(format!(
            "initial state has {} / {} entries for {n} sites",
            z0.len(),
            p0.len()
        )));
    }
    // Mode frequencies and frictions bound the resolvable step and the
    // equilibration horizon; the eigensolve also validates stability.
    let modes = normal_modes(fc, trap)?;
    let nu_max = modes.frequencies.max();
    if cfg.dt * nu_max > R::of(0.05) {
        return Err(Error::InvalidArgument(format!(
            "dt must resolve the fastest mode: dt <= 0.05/max(nu_j) = {:?}",
            R::of(0.05) / nu_max
        )));
    }
    let alpha_site_max = fc.friction.max();
    if alpha_site_max > R::zero() && cfg.dt * alpha_site_max > R::of(0.1) {
        return Err(Error::InvalidArgument(format!(
            "dt must resolve the friction: dt <= 0.1/max(alpha_n) = {:?}",
            R::of(0.1) / alpha_site_max
        )));
    }
    if cfg.burn_in > 0 {
        let alpha_mode_min = modes.mode_friction.min();
        if alpha_mode_min <= R::zero() {
            return Err(Error::InvalidArgument(
                "burn-in is undefined without friction; set burn_in = 0".into(),
            ));
        }
        let horizon = R::of(cfg.burn_in as f64) * cfg.dt * alpha_mode_min;
        if horizon < R::of(5.0) {
            return Err(Error::InvalidArgument(format!(
                "burn-in too short to equilibrate: burn_in*dt >= 5/min(alpha_j) \
                 = {:?} required",
                R::of(5.0) / alpha_mode_min
            )));
        }
    }
    let scale = noise_scale(&fc.diffusion, cfg.dt, cfg.noise_factorization)?;
    let noisy = scale.amax() > R::zero();
    let spring = fc.spring_matrix(trap);
    let dt = cfg.dt;
    let dt_over_m = dt / trap.mass;
    let total = cfg.burn_in + cfg.n_steps;

    let members: Result<Vec<(DMatrix<R>, DMatrix<R>)>> = (0..cfg.n_ensemble)
        .into_par_iter()
        .map(|member| {
            let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
            rng.set_stream(member as u64);
            let mut z = z0.clone();
            let mut p = p0.clone();
            let mut spring_z = DVector::zeros(n);
            let mut xi = DVector::zeros(n);
            let mut dw = DVector::zeros(n);
            let mut zrec = DMatrix::zeros(cfg.n_steps, n);
            let mut prec = DMatrix::zeros(cfg.n_steps, n);
            for step in 0..total {
                spring_z.gemv(R::one(), &spring, &z, R::zero());
                if noisy {
                    for i in 0..n {
                        xi[i] = R::of(rng.sample::<f64, _>(StandardNormal));
                    }
                    dw.gemv(R::one(), &scale, &xi, R::zero());
                }
                for i in 0..n {
                    let force = fc.mean_force[i] - spring_z[i] - fc.friction[i] * p[i];
                    p[i] += force * dt;
                    if noisy {
                        p[i] += dw[i];
                    }
                }
                for i in 0..n {
                    z[i] += p[i] * dt_over_m;
                }
                if !(z.iter().all(|&v| finite(v)) && p.iter().all(|&v| finite(v))) {
                    return Err(Error::IntegrationFailure { step, member });
                }
                if step >= cfg.burn_in {
                    let row = step - cfg.burn_in;
                    for i in 0..n {
                        zrec[(row, i)] = z[i];
                        prec[(row, i)] = p[i];
                    }
                }
            }
            Ok((zrec, prec))
        })
        .collect();
    let members = members?;
    let (z, p) = members.into_iter().unzip();
    Ok(TrajectoryEnsemble {
        z,
        p,
        config: cfg.clone(),
        streams: (0..cfg.n_ensemble as u64).collect(),
    })
}

/// Welch segment-averaged spectral density of the mode coordinates
/// z_j(t) = Sum_n U_jn z_n(t).
///
/// Segments of `segment_len` steps overlap by half and carry a periodic
/// Hann window; each member's time mean is removed first so the static
/// displacement does not leak into the low bins. The normalization
/// dt/Sum(w^2) makes the output the two-sided density matching
/// 2 D_p^{jj} |chi_j(omega)|^2 / (m nu_j^2)^2 on resonance bands.
pub fn psd_estimate<R: Real>(
    traj: &TrajectoryEnsemble<R>,
    modes: &ModeBasis<R>,
    segment_len: usize,
) -> Result<PsdEstimate<R>> {
    let steps = traj.n_recorded();
    let n = traj.n_sites();
    if modes.n_modes() != n {
        return Err(Error::InvalidArgument(format!(
            "mode basis has {} modes for {} sites",
            modes.n_modes(),
            n
        )));
    }
    if segment_len < 4 || segment_len % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "segment length must be an even number of at least 4 steps, got {segment_len}"
        )));
    }
    if segment_len > steps {
        return Err(Error::InvalidArgument(format!(
            "segment of {segment_len} steps exceeds the {steps} recorded"
        )));
    }
    let l = segment_len;
    let hop = l / 2;
    let segs_per_member = 1 + (steps - l) / hop;
    let dt = traj.config.dt;
    // Periodic Hann window.
    let window: Vec<R> = (0..l)
        .map(|i| {
            R::of(0.5) * (R::one() - (R::of(2.0) * R::pi() * R::of(i as f64) / R::of(l as f64)).cos())
        })
        .collect();
    let sum_w2 = window.iter().fold(R::zero(), |acc, &w| acc + w * w);
    let nbins = l / 2 + 1;
    let fft = FftPlanner::<R>::new().plan_fft_forward(l);
    let mut scratch = vec![Complex::new(R::zero(), R::zero()); fft.get_inplace_scratch_len()];
    let mut buf = vec![Complex::new(R::zero(), R::zero()); l];
    let mut accum = DMatrix::<R>::zeros(n, nbins);
    for zm in &traj.z {
        // Mode coordinates for the whole member at once, column j = z_j(t).
        let proj = zm * modes.transform.transpose();
        for j in 0..n {
            let col = proj.column(j);
            let mean = col.sum() / R::of(steps as f64);
            for s in 0..segs_per_member {
                let start = s * hop;
                for i in 0..l {
                    buf[i] = Complex::new((col[start + i] - mean) * window[i], R::zero());
                }
                fft.process_with_scratch(&mut buf, &mut scratch);
                for k in 0..nbins {
                    accum[(j, k)] += buf[k].re * buf[k].re + buf[k].im * buf[k].im;
                }
            }
        }
    }
    let n_segments = segs_per_member * traj.n_members();
    let norm = dt / (sum_w2 * R::of(n_segments as f64));
    let psd = accum * norm;
    let d_omega = R::of(2.0) * R::pi() / (R::of(l as f64) * dt);
    let omega = DVector::from_fn(nbins, |k, _| d_omega * R::of(k as f64));
    Ok(PsdEstimate {
        omega,
        psd,
        segment_len: l,
        n_segments,
    })
}
