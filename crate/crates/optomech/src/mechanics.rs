//! Light-induced forces on the array and the collective mechanical modes.
//!
//! Along the trap axis each atom sees, to lowest order in the Lamb-Dicke
//! parameter, a static radiation-pressure force, a friction force, pairwise
//! light-mediated spring couplings, and a fluctuating recoil force. The
//! resulting equation of motion is a collective Brownian motion
//!
//! m z''_n = -m nu^2 z_n + fbar_n - m alpha_n z'_n
//!           + Sum_{m != n} K_nm (z_n - z_m) + noise,
//!
//! diagonalized here into normal modes with frequencies nu_j, per-mode
//! friction alpha_j, and static displacements zbar_j.

use crate::dipole::{force_dd_inplane, CooperativeResponse};
use crate::error::{Error, Result};
use crate::params::{units, ArrayGeometry, DriveProfile, TrapParams};
use crate::scalar::{cmod2, Real};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

/// Coefficients of the collective Brownian-motion equation, all derived
/// from second-order perturbation theory in the drive. Units: forces in
/// hbar*q*gamma, couplings in hbar*q^2*gamma, rates in gamma, temperature
/// in hbar*gamma.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceCoefficients<R: Real> {
    /// Static radiation-pressure force fbar_n.
    pub mean_force: DVector<R>,
    /// Per-site friction rate alpha_n (positive for red detuning).
    pub friction: DVector<R>,
    /// Light-mediated spring couplings K_nm, zero diagonal.
    pub coupling: DMatrix<R>,
    /// Momentum-diffusion matrix D_p^{nm} (Hermitian, PSD).
    pub diffusion: DMatrix<Complex<R>>,
    /// Effective temperature T_e of the motional steady state.
    pub t_eff: R,
    /// Detuning delta_L - Delta the coefficients were evaluated at.
    pub detuning: R,
    /// Collective linewidth gamma + Gamma.
    pub linewidth: R,
}

impl<R: Real> ForceCoefficients<R> {
    /// Builds all drive-induced coefficients at detuning delta_L - Delta
    /// (units gamma). Fails for non-red detuning, where the motional
    /// steady state is untrapped.
    pub fn build(
        geom: &ArrayGeometry<R>,
        drive: &DriveProfile<R>,
        coop: &CooperativeResponse<R>,
        trap: &TrapParams<R>,
        detuning: R,
    ) -> Result<Self> {
        if detuning >= R::zero() {
            return Err(Error::NegativeTemperature {
                detuning: detuning.to_subset().unwrap_or(f64::NAN),
            });
        }
        let n = geom.n_sites();
        if drive.amplitudes().len() != n || coop.decay_kernel.nrows() != n {
            return Err(Error::InvalidArgument(format!(
                "drive/response size mismatch: {} sites, {} amplitudes, {}x{} kernel",
                n,
                drive.amplitudes().len(),
                coop.decay_kernel.nrows(),
                coop.decay_kernel.ncols(),
            )));
        }
        let q: R = units::wavenumber();
        let g = coop.linewidth();
        let half = R::of(0.5);
        let x = detuning * detuning + half * g * half * g;
        let omega = drive.amplitudes();

        let mean_force = DVector::from_fn(n, |i, _| q * cmod2(omega[i]) * g / x);
        let friction = DVector::from_fn(n, |i, _| {
            trap.recoil * cmod2(omega[i]) * (-R::of(2.0)) * detuning * g / (x * x)
        });

        let pts = geom.positions();
        let mut coupling = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..i {
                let dx = pts[i][0] - pts[j][0];
                let dy = pts[i][1] - pts[j][1];
                let f = force_dd_inplane(q * dx.hypot(dy)).expect("distinct sites");
                // K_nm = (3/4) q^2 [F_nm Omega_n^* Omega_m / X + c.c.]
                let kij = R::of(1.5) * q * q * (f * omega[i].conj() * omega[j]).re / x;
                let kji = R::of(1.5) * q * q * (f * omega[j].conj() * omega[i]).re / x;
                coupling[(i, j)] = kij;
                coupling[(j, i)] = kji;
            }
        }

        let diffusion = DMatrix::from_fn(n, n, |i, j| {
            Complex::new(q * q * coop.decay_kernel[(i, j)] / x, R::zero())
                * omega[i].conj()
                * omega[j]
        });

        // T_e = D_p^{nn} / (m alpha_n), independent of the site.
        let t_eff = half * x / (-detuning * g);
        Ok(Self {
            mean_force,
            friction,
            coupling,
            diffusion,
            t_eff,
            detuning,
            linewidth: g,
        })
    }

    /// Number of sites.
    pub fn n_sites(&self) -> usize {
        self.mean_force.len()
    }

    /// Real-space spring matrix m nu^2 I - L_K with the coupling Laplacian
    /// L_K = diag(row sums of K) - K; the coupling force on site n is
    /// +Sum_m K_nm (z_n - z_m) = +(L_K z)_n, and the static displacements
    /// solve (spring) z = fbar.
    pub fn spring_matrix(&self, trap: &TrapParams<R>) -> DMatrix<R> {
        let n = self.n_sites();
        let mut s = DMatrix::from_diagonal_element(n, n, trap.mass * trap.nu * trap.nu);
        for i in 0..n {
            let row: R = (0..n).fold(R::zero(), |acc, j| acc + self.coupling[(i, j)]);
            s[(i, i)] -= row;
            for j in 0..n {
                s[(i, j)] += self.coupling[(i, j)];
            }
        }
        s
    }
}

/// Orthogonal normal-mode basis of the collective motion.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBasis<R: Real> {
    /// Orthogonal transform; row j holds the eigenvector U_jn.
    pub transform: DMatrix<R>,
    /// Mode frequencies nu_j (units gamma), ascending.
    pub frequencies: DVector<R>,
    /// Per-mode friction alpha_j = Sum_n U_jn^2 alpha_n.
    pub mode_friction: DVector<R>,
    /// Static displacement zbar_j = fbar_j / (m nu_j^2).
    pub static_shift: DVector<R>,
}

impl<R: Real> ModeBasis<R> {
    /// Number of modes.
    pub fn n_modes(&self) -> usize {
        self.frequencies.len()
    }

    /// Largest off-diagonal mode-friction ratio max_{j != j'}
    /// |alpha_jj'| / alpha_j, a diagnostic for the diagonal-friction
    /// approximation used throughout.
    pub fn friction_offdiag_ratio(&self, fc: &ForceCoefficients<R>) -> R {
        let n = self.n_modes();
        let mut worst = R::zero();
        for j in 0..n {
            for jp in 0..n {
                if j == jp {
                    continue;
                }
                let cross: R = (0..n).fold(R::zero(), |acc, a| {
                    acc + self.transform[(j, a)] * fc.friction[a] * self.transform[(jp, a)]
                });
                worst = worst.max(cross.abs() / self.mode_friction[j]);
            }
        }
        worst
    }
}

/// Diagonalizes the collective motion: eigenmodes of the dynamical matrix
/// D_nm = nu^2 delta_nm - (1/m)[(Sum_{l != n} K_nl) delta_nm - K_nm].
pub fn normal_modes<R: Real>(
    fc: &ForceCoefficients<R>,
    trap: &TrapParams<R>,
) -> Result<ModeBasis<R>> {
    let n = fc.n_sites();
    let scale = fc.coupling.amax().max(R::one());
    for i in 0..n {
        for j in 0..i {
            if (fc.coupling[(i, j)] - fc.coupling[(j, i)]).abs() > R::of(1e-9) * scale {
                return Err(Error::InvalidArgument(
                    "coupling matrix must be symmetric (real drive)".into(),
                ));
            }
        }
    }
    let dyn_matrix = fc.spring_matrix(trap) / trap.mass;
    let eig = dyn_matrix.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("finite eigenvalues")
    });
    let mut transform = DMatrix::zeros(n, n);
    let mut frequencies = DVector::zeros(n);
    for (j, &idx) in order.iter().enumerate() {
        let lam = eig.eigenvalues[idx];
        if lam <= R::zero() {
            return Err(Error::MechanicalInstability {
                index: j,
                value: lam.to_subset().unwrap_or(f64::NAN),
            });
        }
        frequencies[j] = lam.sqrt();
        for a in 0..n {
            transform[(j, a)] = eig.eigenvectors[(a, idx)];
        }
    }
    let mode_friction = DVector::from_fn(n, |j, _| {
        (0..n).fold(R::zero(), |acc, a| {
            acc + transform[(j, a)] * transform[(j, a)] * fc.friction[a]
        })
    });
    let static_shift = DVector::from_fn(n, |j, _| {
        let fj = (0..n).fold(R::zero(), |acc, a| acc + transform[(j, a)] * fc.mean_force[a]);
        fj / (trap.mass * frequencies[j] * frequencies[j])
    });
    Ok(ModeBasis {
        transform,
        frequencies,
        mode_friction,
        static_shift,
    })
}

/// Mechanical susceptibility chi_j(omega) = -nu_j^2 / (omega^2 - nu_j^2
/// + i alpha_j omega); chi_j(0) = 1 and chi_j(-omega) = chi_j(omega)^*.
pub fn susceptibility<R: Real>(nu_j: R, alpha_j: R, omega: R) -> Complex<R> {
    let num = Complex::new(-nu_j * nu_j, R::zero());
    let den = Complex::new(omega * omega - nu_j * nu_j, alpha_j * omega);
    num / den
}

/// Lattice Fourier (Bloch) modes of a uniformly driven array:
/// nu_k = sqrt(nu^2 + (K_k - K_0)/m) with K_k = Sum_{n != 0} K_{n0}
/// e^{-i k.r_n}. The friction is site-independent and returned once.
pub fn bloch_modes<R: Real>(
    geom: &ArrayGeometry<R>,
    fc: &ForceCoefficients<R>,
    trap: &TrapParams<R>,
    kgrid: &[[R; 2]],
) -> Result<(DVector<R>, R)> {
    let n = geom.n_sites();
    let f0 = fc.mean_force[0];
    for i in 0..n {
        if (fc.mean_force[i] - f0).abs() > R::of(1e-9) * f0.abs() {
            return Err(Error::InvalidArgument(
                "Bloch modes require a uniform drive".into(),
            ));
        }
    }
    let pts = geom.positions();
    let fourier = |k: [R; 2]| -> Result<R> {
        let mut sum = Complex::new(R::zero(), R::zero());
        for i in 1..n {
            let phase = -(k[0] * pts[i][0] + k[1] * pts[i][1]);
            sum += Complex::new(fc.coupling[(i, 0)], R::zero()) * crate::scalar::cis(phase);
        }
        let tol = R::of(1e-10);
        if sum.im.abs() > tol {
            return Err(Error::ImaginaryResidue {
                residue: sum.im.abs().to_subset().unwrap_or(f64::NAN),
                tolerance: 1e-10,
            });
        }
        Ok(sum.re)
    };
    let k0 = fourier([R::zero(), R::zero()])?;
    let nu2 = trap.nu * trap.nu;
    let mut out = DVector::zeros(kgrid.len());
    for (idx, &k) in kgrid.iter().enumerate() {
        let kk = fourier(k)?;
        let lam = nu2 + (kk - k0) / trap.mass;
        if lam <= R::zero() {
            return Err(Error::MechanicalInstability {
                index: idx,
                value: lam.to_subset().unwrap_or(f64::NAN),
            });
        }
        out[idx] = lam.sqrt();
    }
    Ok((out, fc.friction[0]))
}
