use super::{add_scaled_spectrum, scale_spectrum, MultiplierSolve, Scheme, StepRecord};
use crate::error::Result;
use crate::spectral::{inner_product, State};

impl Scheme {
    /// `p = (I − ½Δt SL)⁻¹(I + ½Δt SL) z`.
    pub(super) fn cn_propagate(&self, z: &State) -> State {
        let z_hat = z.to_spectrum();
        let mut rhs = z_hat.clone();
        add_scaled_spectrum(&mut rhs, 0.5 * self.cfg.dt, &self.model.sl_blocks().apply_spectrum(&z_hat));
        let mut rhs = vec![rhs];
        self.solver.solve_spectral(&mut rhs);
        State::from_spectrum(self.model.grid().clone(), &rhs[0])
    }

    /// `a·(I − ½Δt SL)⁻¹ S g`.
    pub(super) fn cn_resolve_force(&self, g: &State, a: f64) -> State {
        let mut rhs = self.model.s_blocks().apply_spectrum(&g.to_spectrum());
        scale_spectrum(&mut rhs, a);
        let mut rhs = vec![rhs];
        self.solver.solve_spectral(&mut rhs);
        State::from_spectrum(self.model.grid().clone(), &rhs[0])
    }

    /// One LM-CN step from `z` with extrapolated midpoint `z_tilde`.
    ///
    /// `z⁺ = p + λ q` with `p` the linear Crank–Nicolson propagation of `z`
    /// and `q = Δt (I − ½Δt SL)⁻¹ S N'(z̃)`; `λ` restores `H(z⁺) = H(z)`.
    pub fn lm_cn_step(&self, z: &State, z_tilde: &State) -> Result<(State, StepRecord)> {
        self.model.check_state(z)?;
        self.model.check_state(z_tilde)?;
        let p = self.cn_propagate(z);
        let force = self.model.n_grad(z_tilde);
        let q = self.cn_resolve_force(&force, self.cfg.dt);
        if self.is_degenerate(&[&force], z) {
            let next = p.add_scaled(1.0, &q);
            let mut rec = self.record(self.cfg.dt, &next, 1.0, 0);
            rec.degenerate = true;
            return Ok((next, rec));
        }
        let solve = self.solve_multiplier_cn_with(&p, &q, z, &force)?;
        let next = p.add_scaled(solve.lambda, &q);
        let rec = self.record(self.cfg.dt, &next, solve.lambda, solve.iterations);
        Ok((next, rec))
    }

    /// Solves `(N(p + λq) − N(z), 1) = λ (N'(z̃), p + λq − z)` for `λ` near 1.
    pub fn solve_multiplier_cn(&self, p: &State, q: &State, z: &State, z_tilde: &State) -> Result<MultiplierSolve> {
        let force = self.model.n_grad(z_tilde);
        self.solve_multiplier_cn_with(p, q, z, &force)
    }

    fn solve_multiplier_cn_with(&self, p: &State, q: &State, z: &State, force: &State) -> Result<MultiplierSolve> {
        let lin = inner_product(force, p) - inner_product(force, z);
        let quad = inner_product(force, q);
        self.solve_multiplier(p, q, z, lin, quad)
    }
}
