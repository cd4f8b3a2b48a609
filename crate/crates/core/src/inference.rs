//! Graph pCN sampling over prior coefficients, the data-misfit potential,
//! and posterior summarization.
//!
//! The chain state is the coefficient vector (zeta, mu) of the prior, so
//! the pCN proposal sqrt(1 - zeta^2) theta + zeta xi with xi ~ N(0, I) is
//! referenced exactly to the prior covariance, and acceptance depends only
//! on the potential difference.

use ndarray::Array1;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forward::Observation;
use crate::scalar::Scalar;

/// Tuning parameters of one pCN run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PcnConfig<T> {
    /// Proposal step size in (0, 1).
    pub zeta: T,
    /// Total iterations J.
    pub iterations: usize,
    /// Iterations discarded from the front; must be < J.
    pub burn_in: usize,
    pub seed: u64,
    /// Keep every `thinning`-th post-burn-in state.
    pub thinning: usize,
}

impl<T: Scalar> PcnConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.zeta > T::zero() && self.zeta < T::one()) {
            return Err(Error::invalid("zeta", "step size must lie in (0, 1)"));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::invalid("burn_in", "must be smaller than iterations"));
        }
        if self.thinning == 0 {
            return Err(Error::invalid("thinning", "must be at least 1"));
        }
        Ok(())
    }

    /// Number of samples a run will store.
    pub fn stored_samples(&self) -> usize {
        (self.iterations - self.burn_in) / self.thinning
    }
}

/// Stored trajectory of one chain.
#[derive(Debug, Clone)]
pub struct Chain<T> {
    /// Post-burn-in, thinned coefficient samples.
    pub samples: Vec<Array1<T>>,
    /// Accepted proposals over all iterations.
    pub acceptance_count: usize,
    /// Potential of the current state after every iteration.
    pub potentials: Vec<T>,
    pub iterations: usize,
}

impl<T: Scalar> Chain<T> {
    pub fn acceptance_rate(&self) -> f64 {
        if self.iterations == 0 {
            return 0.0;
        }
        self.acceptance_count as f64 / self.iterations as f64
    }
}

/// Node-wise posterior mean and central 95% band.
#[derive(Debug, Clone)]
pub struct PosteriorSummary<T> {
    pub mean: Array1<T>,
    pub p025: Array1<T>,
    pub p975: Array1<T>,
    pub acceptance_rate: f64,
}

/// Data-misfit potential 0.5 * sum (y_m - g_m)^2 / sigma^2.
pub fn potential<T: Scalar>(observation: &Observation<T>, g: &Array1<T>) -> Result<T> {
    if g.len() != observation.y.len() {
        return Err(Error::DimensionMismatch {
            what: "forward output",
            expected: observation.y.len(),
            got: g.len(),
        });
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteForward {
            detail: "potential input contains non-finite forward values".into(),
        });
    }
    let half = T::cast(0.5);
    let phi = half
        * observation
            .y
            .iter()
            .zip(g.iter())
            .map(|(&y, &g)| (y - g) * (y - g))
            .sum::<T>()
        / observation.noise_var;
    if !phi.is_finite() {
        return Err(Error::NonFiniteForward {
            detail: format!("potential overflowed to {phi}"),
        });
    }
    Ok(phi)
}

/// min(1, exp(delta)), the pCN acceptance probability for a potential drop
/// of `delta` = Phi(state) - Phi(proposal).
pub fn acceptance_probability<T: Scalar>(delta: T) -> T {
    if delta >= T::zero() {
        T::one()
    } else {
        delta.exp()
    }
}

/// One pCN transition. Returns the next state, its potential, and whether
/// the proposal was accepted; on rejection the returned state is the input
/// state, bit for bit.
pub fn pcn_step<T, F, R>(
    state: &Array1<T>,
    state_potential: T,
    zeta: T,
    potential_of: &F,
    rng: &mut R,
) -> Result<(Array1<T>, T, bool)>
where
    T: Scalar,
    F: Fn(&Array1<T>) -> Result<T>,
    R: Rng + ?Sized,
{
    let contraction = (T::one() - zeta * zeta).sqrt();
    let proposal = Array1::from_iter(
        state
            .iter()
            .map(|&x| contraction * x + zeta * T::standard_normal(rng)),
    );
    let proposal_potential = potential_of(&proposal)?;
    let alpha = acceptance_probability(state_potential - proposal_potential);
    let coin: T = T::unit_uniform(rng);
    if coin < alpha {
        Ok((proposal, proposal_potential, true))
    } else {
        Ok((state.clone(), state_potential, false))
    }
}

/// Run a full chain from the given initial coefficients. Deterministic for
/// a fixed seed.
pub fn run_chain<T, F>(
    config: &PcnConfig<T>,
    initial: Array1<T>,
    potential_of: F,
) -> Result<Chain<T>>
where
    T: Scalar,
    F: Fn(&Array1<T>) -> Result<T>,
{
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = initial;
    let mut phi = potential_of(&state).map_err(|source| Error::NonFiniteForward {
        detail: format!("initial state rejected: {source}"),
    })?;

    let mut samples = Vec::with_capacity(config.stored_samples());
    let mut potentials = Vec::with_capacity(config.iterations);
    let mut accepted = 0usize;
    for j in 0..config.iterations {
        let (next, next_phi, took) =
            pcn_step(&state, phi, config.zeta, &potential_of, &mut rng).map_err(|source| {
                Error::NonFiniteForward {
                    detail: format!("iteration {j}: {source}"),
                }
            })?;
        state = next;
        phi = next_phi;
        if took {
            accepted += 1;
        }
        potentials.push(phi);
        let completed = j + 1;
        if completed > config.burn_in && (completed - config.burn_in) % config.thinning == 0 {
            samples.push(state.clone());
        }
    }
    Ok(Chain {
        samples,
        acceptance_count: accepted,
        potentials,
        iterations: config.iterations,
    })
}

/// Empirical quantile with linear interpolation between order statistics;
/// `sorted` must be ascending.
fn quantile_sorted<T: Scalar>(sorted: &[T], q: f64) -> T {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = T::cast(h - lo as f64);
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Reconstruct every stored sample to node values and reduce to the
/// node-wise mean and empirical 2.5/97.5 percentiles.
pub fn summarize<T, F>(chain: &Chain<T>, reconstruct: F) -> Result<PosteriorSummary<T>>
where
    T: Scalar,
    F: Fn(&Array1<T>) -> Result<Array1<T>>,
{
    if chain.samples.is_empty() {
        return Err(Error::EmptyChain);
    }
    let fields: Vec<Array1<T>> = chain
        .samples
        .iter()
        .map(|c| reconstruct(c))
        .collect::<Result<_>>()?;
    let n = fields[0].len();
    let count = fields.len();
    let mut mean = Array1::zeros(n);
    for field in &fields {
        if field.len() != n {
            return Err(Error::DimensionMismatch {
                what: "reconstructed sample",
                expected: n,
                got: field.len(),
            });
        }
        mean += field;
    }
    mean.mapv_inplace(|v| v / T::cast_usize(count));

    let mut p025 = Array1::zeros(n);
    let mut p975 = Array1::zeros(n);
    let mut column: Vec<T> = Vec::with_capacity(count);
    for i in 0..n {
        column.clear();
        column.extend(fields.iter().map(|f| f[i]));
        column.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        p025[i] = quantile_sorted(&column, 0.025);
        p975[i] = quantile_sorted(&column, 0.975);
    }
    Ok(PosteriorSummary {
        mean,
        p025,
        p975,
        acceptance_rate: chain.acceptance_rate(),
    })
}

/// Split a flat coefficient vector into its interior and boundary parts.
pub fn split_coefficients<T: Scalar>(
    coefficients: &Array1<T>,
    interior_len: usize,
) -> Result<(Array1<T>, Array1<T>)> {
    if coefficients.len() < interior_len {
        return Err(Error::DimensionMismatch {
            what: "coefficient vector",
            expected: interior_len,
            got: coefficients.len(),
        });
    }
    let zeta = coefficients.slice(ndarray::s![..interior_len]).to_owned();
    let mu = coefficients.slice(ndarray::s![interior_len..]).to_owned();
    Ok((zeta, mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn obs(y: Array1<f64>, noise_var: f64) -> Observation<f64> {
        let obs_idx = (0..y.len()).collect();
        Observation { y, noise_var, obs_idx }
    }

    #[test]
    fn potential_closed_forms() {
        let o = obs(array![1.0, -2.0, 0.5], 0.25);
        let phi = potential(&o, &o.y.clone()).unwrap();
        assert_eq!(phi, 0.0);

        let o = obs(array![1.0], 0.01);
        let phi = potential(&o, &array![0.0]).unwrap();
        assert_relative_eq!(phi, 50.0);
    }

    #[test]
    fn potential_scales_inversely_with_noise() {
        let y = array![0.3, 1.7, -0.4];
        let g = array![0.0, 1.0, 0.0];
        let phi1 = potential(&obs(y.clone(), 0.02), &g).unwrap();
        let phi2 = potential(&obs(y, 0.04), &g).unwrap();
        assert_relative_eq!(phi1, 2.0 * phi2, max_relative = 1e-14);
    }

    #[test]
    fn potential_rejects_non_finite_forward_output() {
        let o = obs(array![1.0, 2.0], 0.01);
        assert!(potential(&o, &array![f64::NAN, 0.0]).is_err());
        assert!(potential(&o, &array![1.0]).is_err());
    }

    #[test]
    fn acceptance_probability_is_exact() {
        assert_eq!(acceptance_probability(0.0_f64), 1.0);
        assert_eq!(acceptance_probability(3.5_f64), 1.0);
        assert_eq!(acceptance_probability(-0.7_f64), (-0.7_f64).exp());
        assert_eq!(acceptance_probability(-40.0_f64), (-40.0_f64).exp());
    }

    #[test]
    fn zero_potential_accepts_everything() {
        let config = PcnConfig {
            zeta: 0.3,
            iterations: 500,
            burn_in: 100,
            seed: 5,
            thinning: 1,
        };
        let chain = run_chain(&config, Array1::zeros(4), |_| Ok(0.0)).unwrap();
        assert_eq!(chain.acceptance_count, 500);
        assert_eq!(chain.samples.len(), 400);
        assert_relative_eq!(chain.acceptance_rate(), 1.0);
    }

    #[test]
    fn downhill_proposals_always_accept() {
        // Potential strictly decreasing in the first coordinate's magnitude
        // is not needed; feed a potential that is lower for any proposal.
        use std::cell::Cell;
        let calls = Cell::new(0usize);
        let potential_of = |_: &Array1<f64>| {
            let c = calls.get();
            calls.set(c + 1);
            // First call (initial state) expensive, every proposal cheaper.
            Ok(if c == 0 { 100.0 } else { 1.0 })
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let state = Array1::zeros(3);
        let phi0 = potential_of(&state).unwrap();
        let (_, phi1, took) = pcn_step(&state, phi0, 0.5, &potential_of, &mut rng).unwrap();
        assert!(took);
        assert_eq!(phi1, 1.0);
    }

    #[test]
    fn rejected_steps_leave_state_bit_identical() {
        let state = array![0.123456789, -4.2e-3, 99.5];
        // Any proposal is catastrophically worse: exp(-1e6) underflows to
        // zero acceptance.
        let potential_of = |c: &Array1<f64>| {
            if c == &state {
                Ok(0.0)
            } else {
                Ok(1e6)
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (next, phi, took) = pcn_step(&state, 0.0, 0.4, &potential_of, &mut rng).unwrap();
        assert!(!took);
        assert_eq!(phi, 0.0);
        for (a, b) in next.iter().zip(state.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn chains_are_seed_deterministic() {
        let config = PcnConfig {
            zeta: 0.25,
            iterations: 300,
            burn_in: 50,
            seed: 77,
            thinning: 3,
        };
        let y = obs(array![0.5, -0.5], 0.1);
        let run = || {
            run_chain(&config, Array1::zeros(2), |c| potential(&y, c)).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.acceptance_count, b.acceptance_count);
        assert_eq!(a.samples.len(), b.samples.len());
        assert_eq!(a.samples.len(), (300 - 50) / 3);
        for (sa, sb) in a.samples.iter().zip(b.samples.iter()) {
            for (x, y) in sa.iter().zip(sb.iter()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn chain_errors_carry_the_iteration() {
        let config = PcnConfig {
            zeta: 0.5,
            iterations: 10,
            burn_in: 2,
            seed: 1,
            thinning: 1,
        };
        use std::cell::Cell;
        let calls = Cell::new(0usize);
        let err = run_chain(&config, Array1::zeros(2), |_| {
            let c = calls.get();
            calls.set(c + 1);
            if c >= 4 {
                Err(Error::NonFiniteForward { detail: "boom".into() })
            } else {
                Ok(0.0)
            }
        })
        .unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("iteration 3"), "{msg}");
    }

    #[test]
    fn summary_of_constant_chain_is_that_sample() {
        let sample = array![2.0, -1.0, 0.5];
        let chain = Chain {
            samples: vec![sample.clone(); 20],
            acceptance_count: 20,
            potentials: vec![0.0; 20],
            iterations: 20,
        };
        let summary = summarize(&chain, |c| Ok(c.clone())).unwrap();
        for i in 0..3 {
            assert_eq!(summary.mean[i], sample[i]);
            assert_eq!(summary.p025[i], sample[i]);
            assert_eq!(summary.p975[i], sample[i]);
        }
    }

    #[test]
    fn summary_two_sample_mean_and_interpolated_percentiles() {
        let chain = Chain {
            samples: vec![Array1::zeros(4), Array1::from_elem(4, 1.0)],
            acceptance_count: 2,
            potentials: vec![0.0; 2],
            iterations: 2,
        };
        let summary = summarize(&chain, |c| Ok(c.clone())).unwrap();
        for i in 0..4 {
            assert_relative_eq!(summary.mean[i], 0.5);
            assert_relative_eq!(summary.p025[i], 0.025);
            assert_relative_eq!(summary.p975[i], 0.975);
            assert!(summary.p025[i] <= summary.p975[i]);
        }
    }

    #[test]
    fn summary_rejects_empty_chains() {
        let chain: Chain<f64> = Chain {
            samples: vec![],
            acceptance_count: 0,
            potentials: vec![],
            iterations: 0,
        };
        assert!(matches!(
            summarize(&chain, |c: &Array1<f64>| Ok(c.clone())),
            Err(Error::EmptyChain)
        ));
    }

    #[test]
    fn prior_only_chain_reproduces_the_prior_variance_profile() {
        // With zero potential the stationary law of the coefficients is
        // N(0, I); reconstructed through any linear map, the node variance
        // must match the prior's variance profile. Thinning keeps the
        // autocorrelation of the kept samples small.
        use crate::geometry::{construct_ghost_points, semi_ellipse};
        use crate::graph_ops::{calibrate_epsilon, default_epsilon_grid};
        use crate::prior::{
            boundary_basis_1d, reconstruct, sample_prior, truncated_spectrum, MaternSpec,
        };
        use rand::SeedableRng;

        let n = 60;
        let m = 8;
        let cloud = semi_ellipse::<f64>(n).unwrap();
        let ghosts = construct_ghost_points(&cloud, 5).unwrap();
        let eps = calibrate_epsilon(&cloud.points, 10, &default_epsilon_grid())
            .unwrap()
            .epsilon_star;
        let spectrum = truncated_spectrum(&cloud, &ghosts, 2, m).unwrap();
        let basis = boundary_basis_1d(&cloud, &ghosts, eps).unwrap();
        let spec = MaternSpec::from_spectrum(0.2, 4.0, m, &spectrum, n, 1).unwrap();

        let config = PcnConfig {
            zeta: 0.5,
            iterations: 61_000,
            burn_in: 1_000,
            seed: 31,
            thinning: 10,
        };
        let chain = run_chain(&config, Array1::zeros(m + 2), |_| Ok(0.0)).unwrap();
        assert_eq!(chain.samples.len(), 6_000);

        let mut sum = Array1::<f64>::zeros(n);
        let mut sum_sq = Array1::<f64>::zeros(n);
        for c in &chain.samples {
            let (zeta, mu) = split_coefficients(c, m).unwrap();
            let field = reconstruct(&spec, &spectrum, &basis, &zeta, &mu).unwrap();
            sum += &field;
            sum_sq += &field.mapv(|v| v * v);
        }
        let count = chain.samples.len() as f64;

        // Oracle: Monte Carlo variance profile of the prior sampler itself.
        let mut oracle_sum = Array1::<f64>::zeros(n);
        let mut oracle_sq = Array1::<f64>::zeros(n);
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        let oracle_draws = 6000;
        for _ in 0..oracle_draws {
            let s = sample_prior(&spec, &spectrum, &basis, &mut rng).unwrap();
            oracle_sum += &s.theta;
            oracle_sq += &s.theta.mapv(|v| v * v);
        }
        for i in 0..n {
            let mean = sum[i] / count;
            let var = sum_sq[i] / count - mean * mean;
            let om = oracle_sum[i] / oracle_draws as f64;
            let ov = oracle_sq[i] / oracle_draws as f64 - om * om;
            let ratio = var / ov;
            assert!(
                (0.85..=1.15).contains(&ratio),
                "node {i}: chain var {var} vs prior var {ov}"
            );
        }
    }
}
