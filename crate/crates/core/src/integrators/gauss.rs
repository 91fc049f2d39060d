use super::{add_scaled_spectrum, weighted_inner, zero_spectrum, MultiplierSolve, Scheme, StepRecord};
use crate::error::{Error, Result};
use crate::spectral::{Spectrum, State};

/// Intermediate quantities of an LM-GAUSS step: `k = L₁ + λR₁` stage-wise
/// and `z⁺ = L₂ + λR₂`.
#[derive(Clone, Debug)]
pub struct GaussCorrection {
    pub predicted: Vec<State>,
    pub l1: Vec<State>,
    pub r1: Vec<State>,
    pub l2: State,
    pub r2: State,
}

impl Scheme {
    /// Runs one linearized sweep `z₍ₘ₊₁₎ = C⁻¹(zⁿ + Δt A f₂(z₍ₘ₎))`.
    /// Returns the new stages and their spectra.
    fn sweep(&self, z_hat: &Spectrum, stages: &[State]) -> (Vec<State>, Vec<Spectrum>) {
        let f_hat: Vec<Spectrum> = stages.iter().map(|s| self.f2_spectrum(s)).collect();
        let mut rhs = self.stage_rhs(z_hat, &f_hat);
        self.solver.solve_spectral(&mut rhs);
        (self.to_states(&rhs), rhs)
    }

    /// Prediction stage of LM-GAUSS: `Λ` linearized Gauss sweeps from
    /// `z₍₀₎ᵢ = zⁿ`.
    pub fn predict_stages(&self, z: &State) -> Result<Vec<State>> {
        self.model.check_state(z)?;
        Ok(self.predict_with(z, self.cfg.prediction_sweeps()))
    }

    pub(crate) fn predict_with(&self, z: &State, sweeps: usize) -> Vec<State> {
        let s = self.tableau.stages();
        let z_hat = z.to_spectrum();
        let mut stages = vec![z.clone(); s];
        for m in 0..sweeps {
            stages = if m == 0 {
                let f = self.f2_spectrum(z);
                let mut rhs = self.stage_rhs(&z_hat, &vec![f; s]);
                self.solver.solve_spectral(&mut rhs);
                self.to_states(&rhs)
            } else {
                self.sweep(&z_hat, &stages).0
            };
        }
        stages
    }

    /// Builds `L₁, R₁, L₂, R₂` from the predicted stages.
    pub fn gauss_correction(&self, z: &State, predicted: Vec<State>) -> GaussCorrection {
        let dt = self.cfg.dt;
        let s = self.tableau.stages();
        let grid = self.model.grid();
        let z_hat = z.to_spectrum();

        let f1 = self.model.sl_blocks().apply_spectrum(&z_hat);
        let mut l1_hat = vec![f1; s];
        self.solver.solve_spectral(&mut l1_hat);
        let mut r1_hat: Vec<Spectrum> = predicted.iter().map(|zt| self.f2_spectrum(zt)).collect();
        self.solver.solve_spectral(&mut r1_hat);

        let mut l2_hat = z_hat;
        let mut r2_hat = zero_spectrum(self.model.n_components(), grid.len());
        for i in 0..s {
            let w = dt * self.tableau.b[i];
            add_scaled_spectrum(&mut l2_hat, w, &l1_hat[i]);
            add_scaled_spectrum(&mut r2_hat, w, &r1_hat[i]);
        }
        GaussCorrection {
            predicted,
            l1: self.to_states(&l1_hat),
            r1: self.to_states(&r1_hat),
            l2: State::from_spectrum(grid.clone(), &l2_hat),
            r2: State::from_spectrum(grid.clone(), &r2_hat),
        }
    }

    /// One LM-GAUSS step: prediction, then the multiplier-corrected Gauss
    /// update `z⁺ = L₂ + λR₂`.
    pub fn lm_gauss_step(&self, z: &State) -> Result<(State, StepRecord)> {
        let predicted = self.predict_stages(z)?;
        let corr = self.gauss_correction(z, predicted);
        let forces: Vec<State> = corr.predicted.iter().map(|zt| self.model.n_grad(zt)).collect();
        if self.is_degenerate(&forces.iter().collect::<Vec<_>>(), z) {
            let next = corr.l2.add_scaled(1.0, &corr.r2);
            let mut rec = self.record(self.cfg.dt, &next, 1.0, 0);
            rec.degenerate = true;
            return Ok((next, rec));
        }
        let (solve, near_orthogonal) = self.solve_multiplier_gauss_with(z, &corr, &forces)?;
        let next = corr.l2.add_scaled(solve.lambda, &corr.r2);
        let mut rec = self.record(self.cfg.dt, &next, solve.lambda, solve.iterations);
        rec.near_orthogonal = near_orthogonal;
        Ok((next, rec))
    }

    /// Solves `(N(L₂ + λR₂) − N(zⁿ), 1) = λΔt Σᵢ bᵢ (N'(z̃ᵢ), L₁ᵢ + λR₁ᵢ)`
    /// for `λ` near 1.
    pub fn solve_multiplier_gauss(&self, z: &State, corr: &GaussCorrection) -> Result<MultiplierSolve> {
        let forces: Vec<State> = corr.predicted.iter().map(|zt| self.model.n_grad(zt)).collect();
        Ok(self.solve_multiplier_gauss_with(z, corr, &forces)?.0)
    }

    fn solve_multiplier_gauss_with(
        &self,
        z: &State,
        corr: &GaussCorrection,
        forces: &[State],
    ) -> Result<(MultiplierSolve, bool)> {
        let dt = self.cfg.dt;
        let b = &self.tableau.b;
        let lin_sum = weighted_inner(b, forces, &corr.l1);
        let quad_sum = weighted_inner(b, forces, &corr.r1);
        let solve = self.solve_multiplier(&corr.l2, &corr.r2, z, dt * lin_sum, dt * quad_sum)?;
        let scale = self.model.nonlinear_energy(z).abs().max(1.0);
        let near_orthogonal = (lin_sum + solve.lambda * quad_sum).abs() < 1e-12 * scale;
        Ok((solve, near_orthogonal))
    }

    /// Iterates the linearized sweep to its fixed point. Returns the stages,
    /// their spectra and the number of sweeps before the confirming one.
    fn fixed_point_stages(&self, z: &State) -> Result<(Vec<State>, Vec<Spectrum>, usize)> {
        let z_hat = z.to_spectrum();
        let threshold = self.cfg.fp_tol * z.max_abs().max(1.0);
        let mut stages = self.predict_with(z, 1);
        let mut increment = f64::INFINITY;
        for sweep in 2..=self.cfg.fp_max_sweeps.max(2) {
            let (next, next_hat) = self.sweep(&z_hat, &stages);
            increment = next
                .iter()
                .zip(&stages)
                .map(|(a, b)| a.max_abs_diff(b))
                .fold(0.0, f64::max);
            stages = next;
            if increment < threshold {
                return Ok((stages, next_hat, sweep - 1));
            }
        }
        Err(Error::FixedPointNonConvergence {
            sweeps: self.cfg.fp_max_sweeps,
            increment,
        })
    }

    /// Fully implicit `s`-stage Gauss step with stages found by fixed-point
    /// iteration on the nonlinear part.
    ///
    /// The reported iteration count excludes the final sweep that confirms
    /// convergence, so a linear problem reports 1.
    pub fn gauss_fp_step(&self, z: &State) -> Result<(State, StepRecord)> {
        self.model.check_state(z)?;
        let dt = self.cfg.dt;
        let (stages, stage_hat, iterations) = self.fixed_point_stages(z)?;

        // z⁺ = zⁿ + Δt Σ bᵢ (f₁(zᵢ) + f₂(zᵢ))
        let mut next_hat = z.to_spectrum();
        for (i, (zi, zi_hat)) in stages.iter().zip(&stage_hat).enumerate() {
            let w = dt * self.tableau.b[i];
            add_scaled_spectrum(&mut next_hat, w, &self.model.sl_blocks().apply_spectrum(zi_hat));
            add_scaled_spectrum(&mut next_hat, w, &self.f2_spectrum(zi));
        }
        let next = State::from_spectrum(self.model.grid().clone(), &next_hat);
        let rec = self.record(dt, &next, 1.0, iterations);
        Ok((next, rec))
    }

    /// Converged Gauss stages at `z`, the fixed point that
    /// [`Scheme::gauss_fp_step`] iterates to.
    pub fn gauss_stages(&self, z: &State) -> Result<Vec<State>> {
        self.model.check_state(z)?;
        Ok(self.fixed_point_stages(z)?.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::SchemeConfig;
    use crate::models::{InitialCondition, Model, KDV_ONE_SOLITON_MU2};
    use crate::spectral::Grid;

    fn kdv(eta: f64) -> (Model, State) {
        let grid = Grid::new_1d(-3.0, 5.0, 64).unwrap();
        let model = Model::kdv(eta, KDV_ONE_SOLITON_MU2.sqrt(), grid).unwrap();
        let z = InitialCondition::KdvOneSoliton.state(&model).unwrap();
        (model, z)
    }

    #[test]
    fn linear_problem_collapses_to_gauss() {
        let (model, z) = kdv(0.0);
        for s in 1..=3 {
            let lm = Scheme::new(model.clone(), SchemeConfig::lm_gauss(s, 0.01)).unwrap();
            let fp = Scheme::new(model.clone(), SchemeConfig::gauss_fp(s, 0.01)).unwrap();
            let (a, ra) = lm.lm_gauss_step(&z).unwrap();
            let (b, rb) = fp.gauss_fp_step(&z).unwrap();
            assert!(ra.degenerate && ra.lambda == 1.0);
            assert_eq!(rb.iterations, 1);
            assert!(a.max_abs_diff(&b) < 1e-12, "s={s}");
        }
    }

    #[test]
    fn converged_stages_solve_the_collocation_equations() {
        let (model, z) = kdv(1.0);
        let dt = 0.004;
        let scheme = Scheme::new(model.clone(), SchemeConfig::gauss_fp(2, dt)).unwrap();
        let stages = scheme.gauss_stages(&z).unwrap();
        let t = scheme.tableau();
        let k: Vec<State> = stages.iter().map(|zi| model.vector_field(zi)).collect();
        for i in 0..2 {
            let mut rhs = z.clone();
            for j in 0..2 {
                rhs.axpy(dt * t.a[i][j], &k[j]);
            }
            let res = stages[i].max_abs_diff(&rhs);
            assert!(res < 1e-12, "stage {i}: {res}");
        }
    }

    #[test]
    fn step_conserves_energy() {
        let (model, z) = kdv(1.0);
        let scheme = Scheme::new(model.clone(), SchemeConfig::lm_gauss(2, 0.002)).unwrap();
        let h0 = model.energy(&z).total;
        let (_, rec) = scheme.lm_gauss_step(&z).unwrap();
        assert!((rec.energy.total - h0).abs() <= 10.0 * 1e-12 * h0.abs().max(1.0));
        let corr = scheme.gauss_correction(&z, scheme.predict_stages(&z).unwrap());
        let solve = scheme.solve_multiplier_gauss(&z, &corr).unwrap();
        assert_eq!(solve.lambda, rec.lambda);
    }

    #[test]
    fn forced_newton_update_resolves_small_multiplier() {
        let (model, z) = kdv(1.0);
        let mut cfg = SchemeConfig::lm_gauss(2, 0.002);
        cfg.newton_min_iter = 1;
        let scheme = Scheme::new(model, cfg).unwrap();
        let (_, rec) = scheme.lm_gauss_step(&z).unwrap();
        assert_eq!(rec.iterations, 1);
        assert!((rec.lambda - 1.0).abs() < 1e-3);
    }

    #[test]
    fn too_few_fixed_point_sweeps_fail() {
        let (model, z) = kdv(1.0);
        let mut cfg = SchemeConfig::gauss_fp(3, 0.01);
        cfg.fp_max_sweeps = 2;
        let scheme = Scheme::new(model, cfg).unwrap();
        assert!(matches!(scheme.gauss_fp_step(&z), Err(Error::FixedPointNonConvergence { .. })));
    }
}
