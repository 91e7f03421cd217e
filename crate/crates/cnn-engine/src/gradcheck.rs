//! Central-difference verification of the analytic gradients. The numeric
//! side goes through the forward pass only (frozen running statistics), so
//! it is independent of the backpropagation path it checks.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::layers::LossKind;
use crate::network::{example_loss, network_backward, network_forward, Mode};
use crate::params::NetworkParams;
use crate::spec::NetworkSpec;
use crate::tensor::LabeledExample;
use crate::CnnError;

/// Worst disagreement found by a gradient check.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_coordinate: String,
    pub checked: usize,
    /// Coordinates whose relative error exceeded the tolerance.
    pub violations: Vec<(String, f64)>,
}

/// Compares backprop gradients against central finite differences with
/// step `h` on up to `max_coords` parameters (all of them when the network
/// is small enough, otherwise a seeded random subsample). The relative
/// error is `|ga - gn| / max(|ga|, |gn|, 1e-4)`; the floor keeps
/// noise-level gradients from dividing by ~zero.
pub fn grad_check(
    spec: &NetworkSpec,
    params: &NetworkParams,
    example: &LabeledExample,
    loss: LossKind,
    h: f64,
    tol: f64,
    max_coords: usize,
    subsample_seed: u64,
) -> Result<GradCheckReport, CnnError> {
    let target = example.target();
    let mut work = params.clone();
    let (_, cache) = network_forward(spec, &mut work, &example.input, Mode::TrainFrozenStats)?;
    let cache = cache.expect("training-mode cache");
    let analytic = network_backward(spec, &work, &cache, &target, loss)?;

    let total = params.coordinate_count();
    let mut coords: Vec<usize> = (0..total).collect();
    if total > max_coords {
        let mut rng = ChaCha8Rng::seed_from_u64(subsample_seed);
        coords.shuffle(&mut rng);
        coords.truncate(max_coords);
        coords.sort_unstable();
    }

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_coordinate: String::new(),
        checked: coords.len(),
        violations: Vec::new(),
    };
    for idx in coords {
        let ga = NetworkParams::gradient_at(&analytic, params, idx);
        let mut perturbed = params.clone();
        let name;
        {
            let (v, n) = perturbed.coordinate_mut(idx);
            *v += h;
            name = n;
        }
        let plus = example_loss(
            spec,
            &mut perturbed,
            &example.input,
            &target,
            loss,
            Mode::TrainFrozenStats,
        )?;
        {
            let (v, _) = perturbed.coordinate_mut(idx);
            *v -= 2.0 * h;
        }
        let minus = example_loss(
            spec,
            &mut perturbed,
            &example.input,
            &target,
            loss,
            Mode::TrainFrozenStats,
        )?;
        let gn = (plus - minus) / (2.0 * h);
        let rel = (ga - gn).abs() / ga.abs().max(gn.abs()).max(1e-4);
        if rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst_coordinate = name.clone();
        }
        if rel > tol {
            report.violations.push((name, rel));
        }
    }
    Ok(report)
}
