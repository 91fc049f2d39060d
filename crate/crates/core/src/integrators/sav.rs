use super::{Scheme, StepRecord};
use crate::error::{Error, Result};
use crate::spectral::{inner_product, State};

impl Scheme {
    /// One SAV-CN step. Returns `(z⁺, r⁺, record)`.
    ///
    /// The coupled linear system is reduced to a scalar equation for
    /// `γ = (b̃, z⁺)` with `b̃ = N'(z̃)/√(F(z̃) + c₀)`.
    pub fn sav_cn_step(&self, z: &State, r: f64, z_tilde: &State) -> Result<(State, f64, StepRecord)> {
        self.model.check_state(z)?;
        self.model.check_state(z_tilde)?;
        let dt = self.cfg.dt;
        let shifted = self.model.nonlinear_energy(z_tilde) + self.cfg.sav_c0;
        if !(shifted > 0.0) {
            return Err(Error::SavSqrtDomain { value: shifted });
        }
        let b = self.model.n_grad(z_tilde).scaled(1.0 / shifted.sqrt());

        // u = (I − ½Δt SL)⁻¹ S b̃
        let u = self.cn_resolve_force(&b, 1.0);
        let mut w1 = self.cn_propagate(z);
        w1.axpy(dt * (r - 0.25 * inner_product(&b, z)), &u);
        let w2 = u.scaled(0.25 * dt);

        let denominator = 1.0 - inner_product(&b, &w2);
        if denominator.abs() < 1e-14 {
            return Err(Error::EliminationSingular { denominator });
        }
        let gamma = inner_product(&b, &w1) / denominator;
        let next = w1.add_scaled(gamma, &w2);
        let r_next = r + 0.5 * (inner_product(&b, &next) - inner_product(&b, z));

        let mut rec = self.record(dt, &next, 1.0, 0);
        rec.modified_energy = Some(rec.energy.quadratic + r_next * r_next);
        Ok((next, r_next, rec))
    }
}
