//! Mass-action ODE simulation with an adaptive Dormand–Prince 5(4) pair,
//! or a linearly implicit Rosenbrock 2(3) pair for stiff runs to long
//! horizons.
//!
//! Rate-independent networks should reach the same output under any
//! positive rates; the simulator is a floating-point cross-check of the
//! exact semantics, not part of it.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Crn, State};
use crate::rational::to_f64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MassActionError {
    #[error("rate for reaction {reaction} must be positive and finite, got {value}")]
    BadRate { reaction: usize, value: f64 },
    #[error("{expected} reactions but {found} rates")]
    RateCount { expected: usize, found: usize },
    #[error("state has {found} species, network has {expected}")]
    StateSize { expected: usize, found: usize },
    #[error("t_end and tolerances must be positive")]
    BadParameters,
    #[error("step size underflow at t = {t} (h = {h:e}); the system looks stiff")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("gave up after {steps} steps at t = {t}")]
    TooManySteps { steps: usize, t: f64 },
}

/// Positive rate constant per reaction.
#[derive(Debug, Clone, PartialEq)]
pub struct RateAssignment(Vec<f64>);

impl RateAssignment {
    pub fn new(rates: Vec<f64>) -> Result<Self, MassActionError> {
        for (j, &k) in rates.iter().enumerate() {
            if !(k.is_finite() && k > 0.0) {
                return Err(MassActionError::BadRate { reaction: j, value: k });
            }
        }
        Ok(RateAssignment(rates))
    }

    pub fn uniform(reactions: usize, k: f64) -> Result<Self, MassActionError> {
        RateAssignment::new(vec![k; reactions])
    }

    /// Log-uniform rates in `[lo, hi]`.
    pub fn random(reactions: usize, lo: f64, hi: f64, seed: u64) -> Result<Self, MassActionError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (lo.ln(), hi.ln());
        RateAssignment::new((0..reactions).map(|_| rng.gen_range(a..=b).exp()).collect())
    }

    pub fn rates(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Explicit Dormand–Prince 5(4) with FSAL.
    #[default]
    DormandPrince,
    /// Rosenbrock 2(3) (the ode23s scheme) with an exact Jacobian. Takes
    /// large steps through stiff, slowly decaying tails.
    Rosenbrock,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub method: Method,
    pub t_end: f64,
    /// Convergence threshold on the sup-norm of the derivative.
    pub tol: f64,
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
    /// Stop at the first accepted step whose derivative norm is below `tol`.
    pub stop_on_convergence: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            method: Method::DormandPrince,
            t_end: 100.0,
            tol: 1e-10,
            atol: 1e-9,
            rtol: 1e-9,
            max_steps: 1_000_000,
            stop_on_convergence: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub times: Vec<f64>,
    /// One row per entry of `times`, clamped at zero.
    pub states: Vec<Vec<f64>>,
    pub converged: bool,
    /// Sup-norm of the derivative at the final state.
    pub derivative_norm: f64,
    /// Smallest unclamped concentration seen.
    pub min_raw: f64,
    pub steps: usize,
    pub rejected: usize,
}

impl SimResult {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("at least the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("at least the initial time")
    }

    pub fn series(&self, species: usize) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(move |row| row[species])
    }

    /// `time,<species...>` header and one line per recorded step.
    pub fn to_csv(&self, crn: &Crn) -> String {
        let mut out = String::from("time");
        for name in crn.species() {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.states) {
            out.push_str(&t.to_string());
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Reaction table flattened for the right-hand side.
struct System {
    reactants: Vec<Vec<(usize, i32)>>,
    net: Vec<Vec<(usize, f64)>>,
    rates: Vec<f64>,
}

impl System {
    fn new(crn: &Crn, rates: &RateAssignment) -> Self {
        let reactants = crn
            .reactions()
            .iter()
            .map(|r| r.reactants.iter().map(|(&s, &k)| (s, k as i32)).collect())
            .collect();
        let net = crn
            .reactions()
            .iter()
            .map(|r| {
                r.net_changes()
                    .into_iter()
                    .filter(|&(_, d)| d != 0)
                    .map(|(s, d)| (s, d as f64))
                    .collect()
            })
            .collect();
        System {
            reactants,
            net,
            rates: rates.0.clone(),
        }
    }

    fn derivative(&self, y: &[f64], dy: &mut [f64]) {
        dy.iter_mut().for_each(|v| *v = 0.0);
        for ((reactants, net), k) in self.reactants.iter().zip(&self.net).zip(&self.rates) {
            let mut rate = *k;
            for &(s, m) in reactants {
                rate *= y[s].max(0.0).powi(m);
            }
            if rate == 0.0 {
                continue;
            }
            for &(s, d) in net {
                dy[s] += rate * d;
            }
        }
    }

    fn jacobian(&self, y: &[f64], jac: &mut DMatrix<f64>) {
        jac.fill(0.0);
        for ((reactants, net), k) in self.reactants.iter().zip(&self.net).zip(&self.rates) {
            for (l, &(sl, ml)) in reactants.iter().enumerate() {
                let mut partial = *k * ml as f64 * y[sl].max(0.0).powi(ml - 1);
                for (o, &(s, m)) in reactants.iter().enumerate() {
                    if o != l {
                        partial *= y[s].max(0.0).powi(m);
                    }
                }
                if partial == 0.0 {
                    continue;
                }
                for &(s, d) in net {
                    jac[(s, sl)] += partial * d;
                }
            }
        }
    }
}

/// Dormand–Prince tableau; the system is autonomous so the nodes are unused.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus the embedded fourth-order ones.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Integrates the mass-action ODE from `x0` with default tolerances,
/// running to `t_end` and flagging convergence when the derivative's
/// sup-norm at the end is below `tol`.
pub fn simulate_mass_action(
    crn: &Crn,
    x0: &State,
    rates: &RateAssignment,
    t_end: f64,
    tol: f64,
) -> Result<SimResult, MassActionError> {
    simulate_with(
        crn,
        x0,
        rates,
        &SimOptions {
            t_end,
            tol,
            ..SimOptions::default()
        },
    )
}

pub fn simulate_with(
    crn: &Crn,
    x0: &State,
    rates: &RateAssignment,
    opts: &SimOptions,
) -> Result<SimResult, MassActionError> {
    let n = crn.num_species();
    if x0.len() != n {
        return Err(MassActionError::StateSize { expected: n, found: x0.len() });
    }
    if rates.0.len() != crn.num_reactions() {
        return Err(MassActionError::RateCount {
            expected: crn.num_reactions(),
            found: rates.0.len(),
        });
    }
    if !(opts.t_end > 0.0 && opts.tol > 0.0 && opts.atol > 0.0 && opts.rtol >= 0.0) {
        return Err(MassActionError::BadParameters);
    }
    let sys = System::new(crn, rates);
    let y: Vec<f64> = x0.values().iter().map(to_f64).collect();
    match opts.method {
        Method::DormandPrince => dormand_prince(&sys, y, opts),
        Method::Rosenbrock => rosenbrock(&sys, y, opts),
    }
}

/// Initial record, and whether the run is already over because nothing
/// can fire.
fn start(y: &[f64], f0: &[f64], opts: &SimOptions) -> (SimResult, bool) {
    let mut result = SimResult {
        times: vec![0.0],
        states: vec![y.to_vec()],
        converged: false,
        derivative_norm: sup_norm(f0),
        min_raw: y.iter().copied().fold(f64::INFINITY, f64::min),
        steps: 0,
        rejected: 0,
    };
    if y.is_empty() {
        result.min_raw = 0.0;
    }
    if result.derivative_norm == 0.0 {
        // Nothing can fire; the trajectory is constant.
        result.converged = true;
        if !opts.stop_on_convergence {
            result.times.push(opts.t_end);
            result.states.push(y.to_vec());
        }
        return (result, true);
    }
    (result, false)
}

fn initial_step(y: &[f64], norm: f64, opts: &SimOptions) -> f64 {
    let scale = y.iter().fold(opts.atol, |m, v| m.max(v.abs()));
    (0.01 * scale / norm).clamp(1e-8, opts.t_end)
}

fn dormand_prince(sys: &System, mut y: Vec<f64>, opts: &SimOptions) -> Result<SimResult, MassActionError> {
    let n = y.len();
    let mut t = 0.0;
    let mut k = vec![vec![0.0; n]; 7];
    sys.derivative(&y, &mut k[0]);
    let (mut result, done) = start(&y, &k[0], opts);
    if done {
        return Ok(result);
    }
    let mut h = initial_step(&y, result.derivative_norm, opts);
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut last_rejected = false;
    while t < opts.t_end {
        if result.steps + result.rejected >= opts.max_steps {
            return Err(MassActionError::TooManySteps {
                steps: result.steps + result.rejected,
                t,
            });
        }
        h = h.min(opts.t_end - t);
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(MassActionError::StepSizeUnderflow { t, h });
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (r, a) in A[s].iter().enumerate().take(s) {
                    acc += h * a * k[r][i];
                }
                stage[i] = acc;
            }
            sys.derivative(&stage, &mut k[s]);
        }
        // Stage 7 was evaluated at the fifth-order solution (FSAL).
        y_new.copy_from_slice(&stage);
        for i in 0..n {
            err[i] = h * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>();
        }
        let norm = (0..n)
            .map(|i| err[i].abs() / (opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs())))
            .fold(0.0, f64::max);
        if norm <= 1.0 {
            t += h;
            for i in 0..n {
                result.min_raw = result.min_raw.min(y_new[i]);
                y[i] = y_new[i].max(0.0);
            }
            k.swap(0, 6);
            if y_new.iter().any(|v| *v < 0.0) {
                sys.derivative(&y, &mut k[0]);
            }
            result.steps += 1;
            result.times.push(t);
            result.states.push(y.clone());
            result.derivative_norm = sup_norm(&k[0]);
            if opts.stop_on_convergence && result.derivative_norm < opts.tol {
                break;
            }
            let grow = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
            h *= if last_rejected { grow.min(1.0) } else { grow };
            last_rejected = false;
        } else {
            result.rejected += 1;
            h *= (0.9 * norm.powf(-0.2)).clamp(0.1, 1.0);
            last_rejected = true;
        }
    }
    result.converged = result.derivative_norm < opts.tol;
    Ok(result)
}

fn rosenbrock(sys: &System, mut y: Vec<f64>, opts: &SimOptions) -> Result<SimResult, MassActionError> {
    let n = y.len();
    let d = 1.0 / (2.0 + std::f64::consts::SQRT_2);
    let e32 = 6.0 + std::f64::consts::SQRT_2;
    let mut t = 0.0;
    let mut f0 = vec![0.0; n];
    sys.derivative(&y, &mut f0);
    let (mut result, done) = start(&y, &f0, opts);
    if done {
        return Ok(result);
    }
    let mut h = initial_step(&y, result.derivative_norm, opts);
    let mut jac = DMatrix::zeros(n, n);
    let mut fresh_jacobian = false;
    let mut stage = vec![0.0; n];
    let mut f1 = vec![0.0; n];
    let mut f2 = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    while t < opts.t_end {
        if result.steps + result.rejected >= opts.max_steps {
            return Err(MassActionError::TooManySteps {
                steps: result.steps + result.rejected,
                t,
            });
        }
        h = h.min(opts.t_end - t);
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(MassActionError::StepSizeUnderflow { t, h });
        }
        if !fresh_jacobian {
            sys.jacobian(&y, &mut jac);
            fresh_jacobian = true;
        }
        let w = DMatrix::identity(n, n) - &jac * (h * d);
        let lu = w.lu();
        let solve = |rhs: Vec<f64>| lu.solve(&DVector::from_vec(rhs));
        let Some(k1) = solve(f0.clone()) else {
            result.rejected += 1;
            h *= 0.5;
            continue;
        };
        for i in 0..n {
            stage[i] = y[i] + 0.5 * h * k1[i];
        }
        sys.derivative(&stage, &mut f1);
        let Some(k2) = solve((0..n).map(|i| f1[i] - k1[i]).collect()) else {
            result.rejected += 1;
            h *= 0.5;
            continue;
        };
        let k2 = k2 + &k1;
        for i in 0..n {
            y_new[i] = y[i] + h * k2[i];
        }
        sys.derivative(&y_new, &mut f2);
        let rhs = (0..n)
            .map(|i| f2[i] - e32 * (k2[i] - f1[i]) - 2.0 * (k1[i] - f0[i]))
            .collect();
        let Some(k3) = solve(rhs) else {
            result.rejected += 1;
            h *= 0.5;
            continue;
        };
        let norm = (0..n)
            .map(|i| {
                let err = h / 6.0 * (k1[i] - 2.0 * k2[i] + k3[i]);
                err.abs() / (opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs()))
            })
            .fold(0.0, f64::max);
        if norm.is_finite() && norm <= 1.0 {
            t += h;
            let clamped = y_new.iter().any(|v| *v < 0.0);
            for i in 0..n {
                result.min_raw = result.min_raw.min(y_new[i]);
                y[i] = y_new[i].max(0.0);
            }
            if clamped {
                sys.derivative(&y, &mut f0);
            } else {
                f0.copy_from_slice(&f2);
            }
            fresh_jacobian = false;
            result.steps += 1;
            result.times.push(t);
            result.states.push(y.clone());
            result.derivative_norm = sup_norm(&f0);
            if opts.stop_on_convergence && result.derivative_norm < opts.tol {
                break;
            }
            let grow = if norm == 0.0 { 5.0 } else { (0.8 * norm.powf(-1.0 / 3.0)).clamp(0.2, 5.0) };
            h *= grow;
        } else {
            result.rejected += 1;
            let shrink = if norm.is_finite() { (0.8 * norm.powf(-1.0 / 3.0)).clamp(0.1, 0.5) } else { 0.1 };
            h *= shrink;
        }
    }
    result.converged = result.derivative_norm < opts.tol;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::left_null_space;
    use crate::model::Crc;
    use crate::rational::int;
    use crate::semantics::execute_topological;

    fn crc(lines: &[&str], inputs: &[&str], output: &str) -> Crc {
        Crc::with_names(Crn::from_reactions(lines).unwrap(), inputs, output).unwrap()
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        let c = crc(&["X -> Y"], &["X"], "Y");
        let x0 = c.initial_state(&[int(2)]).unwrap();
        let rates = RateAssignment::uniform(1, 1.0).unwrap();
        let r = simulate_mass_action(&c.crn, &x0, &rates, 20.0, 1e-6).unwrap();
        let y = r.final_state()[c.output];
        assert!((y - 2.0 * (1.0 - (-20.0f64).exp())).abs() < 1e-6, "{y}");
        assert!((y - 2.0).abs() < 1e-6);
        assert_eq!(r.final_time(), 20.0);
        // Intermediate points follow the closed form too.
        for (t, row) in r.times.iter().zip(&r.states) {
            assert!((row[c.inputs[0]] - 2.0 * (-t).exp()).abs() < 1e-7);
        }
    }

    #[test]
    fn min_net_converges_to_min() {
        let c = crc(&["X1 + X2 -> Y"], &["X1", "X2"], "Y");
        let x0 = c.initial_state(&[int(2), int(3)]).unwrap();
        let rates = RateAssignment::uniform(1, 1.0).unwrap();
        let r = simulate_mass_action(&c.crn, &x0, &rates, 50.0, 1e-8).unwrap();
        let exact = execute_topological(&c, &x0).unwrap();
        assert!((r.final_state()[c.output] - to_f64(exact.output(&c))).abs() < 1e-3);
        assert!(r.converged);
    }

    #[test]
    fn zero_state_stays_zero() {
        let c = crc(&["X1 + X2 -> Y", "X1 -> Z"], &["X1", "X2"], "Y");
        let x0 = c.initial_state(&[int(0), int(0)]).unwrap();
        let r = simulate_mass_action(&c.crn, &x0, &RateAssignment::uniform(2, 1.0).unwrap(), 5.0, 1e-9).unwrap();
        assert!(r.converged);
        assert!(r.states.iter().all(|row| row.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn conservation_laws_hold() {
        let c = crc(&["X -> Z1 + Y", "Z1 + W -> 2 K", "K + Y -> W"], &["X", "W"], "Y");
        let x0 = c.initial_state(&[int(3), int(1)]).unwrap();
        let rates = RateAssignment::random(3, 0.2, 5.0, 7).unwrap();
        let r = simulate_mass_action(&c.crn, &x0, &rates, 30.0, 1e-9).unwrap();
        let laws = left_null_space(&c.crn.stoich_matrix().to_rational());
        assert!(!laws.is_empty());
        for w in laws {
            let w: Vec<f64> = w.iter().map(to_f64).collect();
            let dot = |row: &[f64]| row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
            let start = dot(&r.states[0]);
            for row in &r.states {
                assert!((dot(row) - start).abs() < 1e-6);
            }
        }
        assert!(r.min_raw > -1e-8);
    }

    #[test]
    fn stops_on_convergence() {
        let c = crc(&["X -> Y"], &["X"], "Y");
        let x0 = c.initial_state(&[int(1)]).unwrap();
        let opts = SimOptions {
            t_end: 1e6,
            tol: 1e-9,
            stop_on_convergence: true,
            ..SimOptions::default()
        };
        let r = simulate_with(&c.crn, &x0, &RateAssignment::uniform(1, 1.0).unwrap(), &opts).unwrap();
        assert!(r.converged);
        assert!(r.final_time() < 100.0);
    }

    #[test]
    fn errors_are_reported() {
        assert!(matches!(RateAssignment::new(vec![1.0, 0.0]), Err(MassActionError::BadRate { reaction: 1, .. })));
        let c = crc(&["X -> Y"], &["X"], "Y");
        let x0 = c.initial_state(&[int(1)]).unwrap();
        let rates = RateAssignment::uniform(1, 1.0).unwrap();
        assert_eq!(
            simulate_mass_action(&c.crn, &x0, &rates, 0.0, 1e-9),
            Err(MassActionError::BadParameters)
        );
        let two = RateAssignment::uniform(2, 1.0).unwrap();
        assert!(matches!(
            simulate_mass_action(&c.crn, &x0, &two, 1.0, 1e-9),
            Err(MassActionError::RateCount { .. })
        ));
        let opts = SimOptions {
            t_end: 100.0,
            max_steps: 3,
            ..SimOptions::default()
        };
        assert!(matches!(simulate_with(&c.crn, &x0, &rates, &opts), Err(MassActionError::TooManySteps { .. })));
    }

    #[test]
    fn stiff_system_underflows() {
        // A fast reaction pinned by a slow source forces tiny steps.
        let c = crc(&["X -> Y", "Y -> Z"], &["X"], "Z");
        let x0 = c.initial_state(&[int(1)]).unwrap();
        let rates = RateAssignment::new(vec![1.0, 1e15]).unwrap();
        let opts = SimOptions {
            t_end: 10.0,
            max_steps: 10_000_000,
            ..SimOptions::default()
        };
        let r = simulate_with(&c.crn, &x0, &rates, &opts);
        assert!(matches!(r, Err(MassActionError::StepSizeUnderflow { .. }) | Err(MassActionError::TooManySteps { .. })));
    }

    #[test]
    fn rosenbrock_matches_closed_form() {
        let c = crc(&["X -> Y"], &["X"], "Y");
        let x0 = c.initial_state(&[int(2)]).unwrap();
        let opts = SimOptions {
            method: Method::Rosenbrock,
            t_end: 5.0,
            ..SimOptions::default()
        };
        let r = simulate_with(&c.crn, &x0, &RateAssignment::uniform(1, 1.0).unwrap(), &opts).unwrap();
        for (t, row) in r.times.iter().zip(&r.states) {
            assert!((row[c.inputs[0]] - 2.0 * (-t).exp()).abs() < 1e-6, "t = {t}");
        }
        assert_eq!(r.final_time(), 5.0);
    }

    #[test]
    fn rosenbrock_handles_the_stiff_case() {
        let c = crc(&["X -> Y", "Y -> Z"], &["X"], "Z");
        let x0 = c.initial_state(&[int(1)]).unwrap();
        let rates = RateAssignment::new(vec![1.0, 1e15]).unwrap();
        let opts = SimOptions {
            method: Method::Rosenbrock,
            t_end: 50.0,
            tol: 1e-12,
            ..SimOptions::default()
        };
        let r = simulate_with(&c.crn, &x0, &rates, &opts).unwrap();
        assert!(r.steps < 10_000, "{} steps", r.steps);
        assert!((r.final_state()[c.output] - 1.0).abs() < 1e-6);
        assert!(r.converged);
    }

    #[test]
    fn rosenbrock_reaches_far_along_a_cubic_tail() {
        // Three-way tie: each reactant decays like t^(-1/2).
        let c = crc(&["A + B + C -> Y"], &["A", "B", "C"], "Y");
        let x0 = c.initial_state(&[int(1), int(1), int(1)]).unwrap();
        let opts = SimOptions {
            method: Method::Rosenbrock,
            t_end: 1e12,
            tol: 1e-12,
            ..SimOptions::default()
        };
        let r = simulate_with(&c.crn, &x0, &RateAssignment::uniform(1, 1.0).unwrap(), &opts).unwrap();
        let a = r.final_state()[0];
        let closed = 1.0 / (1.0 + 2.0 * 1e12f64).sqrt();
        assert!((a - closed).abs() < 1e-8, "{a} vs {closed}");
        assert!(r.steps < 20_000);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let c = crc(&["X -> Y"], &["X"], "Y");
        let x0 = c.initial_state(&[int(1)]).unwrap();
        let r = simulate_mass_action(&c.crn, &x0, &RateAssignment::uniform(1, 1.0).unwrap(), 1.0, 1e-9).unwrap();
        let csv = r.to_csv(&c.crn);
        assert!(csv.starts_with("time,X,Y\n0,1,0\n"));
        assert_eq!(csv.lines().count(), r.times.len() + 1);
    }
}
