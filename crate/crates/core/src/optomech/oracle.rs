// SPDX-License-Identifier: Apache-2.0

//! Direct linear-response solution of the quantum Langevin equations.
//!
//! At each frequency the unknowns `(a, a^dag, b, b^dag, i)` solve `M y = B u`,
//! where `u` lists the input noise operators and their conjugates and the last
//! row closes the feedback loop on the photocurrent `i`. Any observable is a
//! row vector over `u`; spectra follow from the input correlations `N`,
//! `<u_j(omega) u_k(omega')> = N_jk delta(omega + omega')`.
//!
//! Nothing here relies on the closed-form transfer functions, which makes it
//! a reference for them.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, RowDVector};
use num_traits::Float;

use super::OmLoop;
use crate::error::{Error, Result};
use crate::spectral::{c, cis, FilterFunction, Port, C64};

/// Independent input modes, in the order used for `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputMode {
    Mirror1 = 0,
    Mirror2 = 1,
    Loss = 2,
    /// Vacuum standing in for detection inefficiency.
    Detector = 3,
    Thermal = 4,
}

const MODES: usize = 5;
const INPUTS: usize = 2 * MODES;
const UNKNOWNS: usize = 5;

/// Quantities whose spectra the oracle can produce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable {
    Photocurrent,
    Field,
    FieldDagger,
    Phonon,
    PhononDagger,
    /// `(b + b^dag)/sqrt(2)`.
    Position,
    /// `a + a^dag`, the intracavity amplitude quadrature.
    Amplitude,
    /// Output quadrature at angle `theta_bar` referred to the drive.
    Output {
        port: Port,
        theta_bar: f64,
    },
}

/// The assembled system at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub omega: f64,
    pub drift: DMatrix<C64>,
    pub input: DMatrix<C64>,
    pub noise: DMatrix<C64>,
}

/// Solved response `y = R u` at one frequency.
#[derive(Debug, Clone)]
pub struct Response {
    pub omega: f64,
    pub unknowns: DMatrix<C64>,
}

pub struct Oracle<'a, F> {
    om: &'a OmLoop<F>,
    feedback: bool,
    theta_bar: f64,
}

/// Spectra of the main observables at one frequency, feedback closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSpectra {
    pub omega: f64,
    pub photocurrent: f64,
    /// Symmetrised position spectrum.
    pub position: f64,
    pub out_fb: f64,
    pub out_un: f64,
}

fn unit(k: usize) -> RowDVector<C64> {
    let mut r = RowDVector::zeros(INPUTS);
    r[k] = c(1.0);
    r
}

impl<'a, F: FilterFunction> Oracle<'a, F> {
    /// `feedback = false` opens the loop (the filter is ignored).
    pub fn new(om: &'a OmLoop<F>, feedback: bool) -> Result<Self> {
        let theta_bar = om.lp.theta_bar()?;
        Ok(Self { om, feedback, theta_bar })
    }

    fn filter(&self, omega: f64) -> C64 {
        if self.feedback {
            self.om.lp.laser.filter.response(omega)
        } else {
            c(0.0)
        }
    }

    pub fn noise_matrix(&self) -> DMatrix<C64> {
        let mut n = DMatrix::zeros(INPUTS, INPUTS);
        for k in 0..InputMode::Thermal as usize {
            n[(k, k + MODES)] = c(1.0);
        }
        let th = InputMode::Thermal as usize;
        let nth = self.om.mech.n_th;
        n[(th, th + MODES)] = c(nth + 1.0);
        n[(th + MODES, th)] = c(nth);
        n
    }

    pub fn system(&self, omega: f64) -> LinearSystem {
        let cav = &self.om.lp.cavity;
        let mech = &self.om.mech;
        let (k1, k2, kl) = (cav.kappa1, cav.kappa2, cav.kappa_loss);
        let k = cav.kappa();
        let d = cav.detuning;
        let phi = cav.phase();
        let g = mech.coupling;
        let eta = self.om.lp.eta();
        let tb = self.theta_bar;
        let gp = self.filter(omega);
        let gm = self.filter(-omega).conj();
        let i = C64::i();

        let mut m = DMatrix::<C64>::zeros(UNKNOWNS, UNKNOWNS);
        let mut b = DMatrix::<C64>::zeros(UNKNOWNS, INPUTS);
        let dag = MODES;

        // Cavity field.
        m[(0, 0)] = -C64::new(k, d - omega);
        m[(0, 2)] = i * g;
        m[(0, 3)] = i * g;
        m[(0, 4)] = cis(-phi) * (2.0 * k1).sqrt() * gp;
        for (mode, rate) in [(0, k1), (1, k2), (2, kl)] {
            b[(0, mode)] = -cis(-phi) * (2.0 * rate).sqrt();
            b[(1, mode + dag)] = -cis(phi) * (2.0 * rate).sqrt();
        }
        m[(1, 1)] = -C64::new(k, -(d + omega));
        m[(1, 2)] = -i * g;
        m[(1, 3)] = -i * g;
        m[(1, 4)] = cis(phi) * (2.0 * k1).sqrt() * gm;

        // Mechanics.
        let th = InputMode::Thermal as usize;
        m[(2, 0)] = i * g;
        m[(2, 1)] = i * g;
        m[(2, 2)] = -C64::new(0.5 * mech.gamma, mech.omega_m - omega);
        b[(2, th)] = c(-mech.gamma.sqrt());
        m[(3, 0)] = -i * g;
        m[(3, 1)] = -i * g;
        m[(3, 3)] = -C64::new(0.5 * mech.gamma, -(mech.omega_m + omega));
        b[(3, th + dag)] = c(-mech.gamma.sqrt());

        // Photocurrent: i = sqrt(eta) X_fb + sqrt(1 - eta) X_v.
        let port = self.om.lp.port;
        let kfb = cav.port_rate(port);
        let se = eta.sqrt();
        let amp = se * (2.0 * kfb).sqrt();
        m[(4, 0)] = -amp * cis(-(tb - phi));
        m[(4, 1)] = -amp * cis(tb - phi);
        m[(4, 4)] = c(1.0);
        if port == Port::Reflection {
            m[(4, 4)] += se * (cis(-tb) * gp + cis(tb) * gm);
        }
        let vfb = match port {
            Port::Reflection => InputMode::Mirror1 as usize,
            Port::Transmission => InputMode::Mirror2 as usize,
        };
        b[(4, vfb)] = -se * cis(-tb);
        b[(4, vfb + dag)] = -se * cis(tb);
        let det = InputMode::Detector as usize;
        b[(4, det)] = c((1.0 - eta).sqrt());
        b[(4, det + dag)] = c((1.0 - eta).sqrt());

        LinearSystem { omega, drift: m, input: b, noise: self.noise_matrix() }
    }

    pub fn solve(&self, omega: f64) -> Result<Response> {
        let sys = self.system(omega);
        let unknowns = sys.drift.lu().solve(&sys.input).ok_or(Error::SingularSystem { omega })?;
        if unknowns.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("oracle solve"));
        }
        Ok(Response { omega, unknowns })
    }

    /// Coefficients of `obs(omega)` on the inputs `u(omega)`.
    pub fn row(&self, obs: Observable, resp: &Response) -> RowDVector<C64> {
        let y = |k: usize| resp.unknowns.row(k).into_owned();
        let cav = &self.om.lp.cavity;
        match obs {
            Observable::Photocurrent => y(4),
            Observable::Field => y(0),
            Observable::FieldDagger => y(1),
            Observable::Phonon => y(2),
            Observable::PhononDagger => y(3),
            Observable::Position => (y(2) + y(3)) * c(FRAC_1_SQRT_2),
            Observable::Amplitude => y(0) + y(1),
            Observable::Output { port, theta_bar } => {
                let w = resp.omega;
                let phi = cav.phase();
                let amp = (2.0 * cav.port_rate(port)).sqrt();
                let mut r = (y(0) * cis(-(theta_bar - phi)) + y(1) * cis(theta_bar - phi)) * c(amp);
                let v = match port {
                    Port::Reflection => InputMode::Mirror1 as usize,
                    Port::Transmission => InputMode::Mirror2 as usize,
                };
                r -= unit(v) * cis(-theta_bar) + unit(v + MODES) * cis(theta_bar);
                if port == Port::Reflection {
                    let gp = self.filter(w);
                    let gm = self.filter(-w).conj();
                    r -= y(4) * (cis(-theta_bar) * gp + cis(theta_bar) * gm);
                }
                r
            }
        }
    }

    /// Coefficients of `O^dag(omega) = [O(-omega)]^dag`, given the row of
    /// `O(-omega)`.
    pub fn dagger(row_at_minus: &RowDVector<C64>) -> RowDVector<C64> {
        let mut r = RowDVector::zeros(INPUTS);
        for k in 0..MODES {
            r[k] = row_at_minus[k + MODES].conj();
            r[k + MODES] = row_at_minus[k].conj();
        }
        r
    }

    /// `<A(omega) B(omega')>` coefficient of `delta(omega + omega')`, from the
    /// row of `A` at `omega` and the row of `B` at `-omega`.
    pub fn correlate(&self, a: &RowDVector<C64>, b_at_minus: &RowDVector<C64>) -> C64 {
        (a * self.noise_matrix() * b_at_minus.transpose())[(0, 0)]
    }

    pub fn cross_spectrum(&self, a: Observable, b: Observable, omega: f64) -> Result<C64> {
        let rp = self.solve(omega)?;
        let rm = self.solve(-omega)?;
        Ok(self.correlate(&self.row(a, &rp), &self.row(b, &rm)))
    }

    /// Unsymmetrised `<O(omega) O(-omega)>`.
    pub fn spectrum(&self, obs: Observable, omega: f64) -> Result<f64> {
        Ok(self.cross_spectrum(obs, obs, omega)?.re)
    }

    pub fn symmetrized_spectrum(&self, obs: Observable, omega: f64) -> Result<f64> {
        Ok(0.5 * (self.spectrum(obs, omega)? + self.spectrum(obs, -omega)?))
    }

    /// Row of a linear combination of input-mode operators, as used to build
    /// derived noise operators in tests and checks.
    pub fn input_row(mode: InputMode, dagger: bool) -> RowDVector<C64> {
        unit(mode as usize + if dagger { MODES } else { 0 })
    }

    pub fn width() -> usize {
        INPUTS
    }
}

/// Feedback-closed spectra of the photocurrent, the position and both outputs
/// (quadratures referred to the drive, `theta_bar_fb` and `theta_bar_un`).
pub fn oracle_spectra<F: FilterFunction>(om: &OmLoop<F>, omega: f64, theta_bar_un: f64) -> Result<OracleSpectra> {
    let o = Oracle::new(om, true)?;
    let tb = om.lp.theta_bar()?;
    Ok(OracleSpectra {
        omega,
        photocurrent: o.spectrum(Observable::Photocurrent, omega)?,
        position: o.symmetrized_spectrum(Observable::Position, omega)?,
        out_fb: o.spectrum(Observable::Output { port: om.lp.port, theta_bar: tb }, omega)?,
        out_un: o.spectrum(Observable::Output { port: om.lp.unused_port(), theta_bar: theta_bar_un }, omega)?,
    })
}

/// Samples of one spectrum over a grid.
pub fn oracle_trace<F: FilterFunction>(om: &OmLoop<F>, obs: Observable, omega: &[f64], feedback: bool) -> Result<Vec<f64>> {
    let o = Oracle::new(om, feedback)?;
    omega.iter().map(|&w| o.spectrum(obs, w)).collect()
}
