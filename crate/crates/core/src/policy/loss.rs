use alloc::vec;

use super::adam::AdamState;
use super::net::{one_hot, Gradients, Parameters, PolicyNet, ValueNet};
use super::PolicyError;
use crate::options::Trajectory;

fn check_alignment(trajectory: &Trajectory, returns: &[f64], baselines: &[f64]) -> Result<(), PolicyError> {
    if returns.len() != trajectory.steps.len() {
        return Err(PolicyError::MisalignedInput("returns and trajectory differ in length"));
    }
    if baselines.len() != trajectory.steps.len() {
        return Err(PolicyError::MisalignedInput("baselines and trajectory differ in length"));
    }
    Ok(())
}

/// `−Σ_t (R_t − V_t) log y_t[choice_t]`, summed over the learned records of
/// the trajectory. Returns and baselines are indexed like `trajectory.steps`;
/// entries of non-learned records are ignored.
pub fn pg_loss_and_grads(
    net: &PolicyNet,
    trajectory: &Trajectory,
    returns: &[f64],
    baselines: &[f64],
) -> Result<(f64, Gradients), PolicyError> {
    pg_loss_and_grads_regularised(net, trajectory, returns, baselines, 0.0)
}

/// Loss value only; shares the forward path with [`pg_loss_and_grads`].
pub fn pg_loss(
    net: &PolicyNet,
    trajectory: &Trajectory,
    returns: &[f64],
    baselines: &[f64],
    entropy_coef: f64,
) -> Result<f64, PolicyError> {
    check_alignment(trajectory, returns, baselines)?;
    let mut loss = 0.0;
    for (i, step) in trajectory.steps.iter().enumerate().filter(|(_, s)| s.learned) {
        let onehot = one_hot(step.context, net.option_count);
        let y = net.forward(&step.observation.features, &onehot, &step.mask)?;
        let p = y[step.choice];
        if !(p > 0.0) {
            return Err(PolicyError::ZeroProbabilityChoice(step.choice));
        }
        loss -= (returns[i] - baselines[i]) * libm::log(p);
        if entropy_coef != 0.0 {
            loss -= entropy_coef * entropy(&y);
        }
    }
    Ok(loss)
}

fn entropy(y: &[f64]) -> f64 {
    -y.iter().filter(|&&p| p > 0.0).map(|&p| p * libm::log(p)).sum::<f64>()
}

/// Policy-gradient loss with an optional entropy bonus `−c·Σ_t H(y_t)`, and
/// its exact gradient through sigmoid, mask and normalisation.
///
/// With `s = σ(z)`, `S = Σ_j m_j s_j` and `y_k = m_k s_k / S`:
/// `∂ log y_c / ∂z_k = δ_ck (1 − s_c) − m_k s_k (1 − s_k) / S` and
/// `∂H/∂z_k = m_k s_k (1 − s_k) / S · (−log y_k − H)`.
pub fn pg_loss_and_grads_regularised(
    net: &PolicyNet,
    trajectory: &Trajectory,
    returns: &[f64],
    baselines: &[f64],
    entropy_coef: f64,
) -> Result<(f64, Gradients), PolicyError> {
    check_alignment(trajectory, returns, baselines)?;
    let mut grads = Gradients::zeros_like(net);
    let mut loss = 0.0;
    let n_in = net.hidden.inputs;
    let n_hidden = net.hidden.outputs;
    let n_out = net.output.outputs;
    let mut dz = vec![0.0; n_out];
    let mut dh = vec![0.0; n_hidden];

    for (i, step) in trajectory.steps.iter().enumerate().filter(|(_, s)| s.learned) {
        let onehot = one_hot(step.context, net.option_count);
        let cache = net.forward_cached(&step.observation.features, &onehot, &step.mask)?;
        let c = step.choice;
        let p = cache.y[c];
        if !(p > 0.0) {
            return Err(PolicyError::ZeroProbabilityChoice(c));
        }
        let adv = returns[i] - baselines[i];
        loss -= adv * libm::log(p);
        let h_y = if entropy_coef != 0.0 { entropy(&cache.y) } else { 0.0 };
        loss -= entropy_coef * h_y;

        let mask = step.mask.entries();
        for k in 0..n_out {
            let s = cache.sig[k];
            let ds = s * (1.0 - s);
            let norm = if mask[k] == 1 { ds / cache.total } else { 0.0 };
            let mut g = adv * norm;
            if k == c {
                g -= adv * (1.0 - s);
            }
            if entropy_coef != 0.0 && mask[k] == 1 && cache.y[k] > 0.0 {
                g -= entropy_coef * norm * (-libm::log(cache.y[k]) - h_y);
            }
            dz[k] = g;
        }

        let (gw1, rest) = grads.tensors.split_at_mut(1);
        let (gb1, rest) = rest.split_at_mut(1);
        let (gw2, gb2) = rest.split_at_mut(1);
        let (gw1, gb1, gw2, gb2) = (&mut gw1[0], &mut gb1[0], &mut gw2[0], &mut gb2[0]);

        dh.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..n_out {
            let g = dz[k];
            if g == 0.0 {
                continue;
            }
            gb2[k] += g;
            let row = net.output.row(k);
            let grow = &mut gw2[k * n_hidden..(k + 1) * n_hidden];
            for j in 0..n_hidden {
                grow[j] += g * cache.hidden[j];
                dh[j] += g * row[j];
            }
        }
        for j in 0..n_hidden {
            let da = dh[j] * (1.0 - cache.hidden[j] * cache.hidden[j]);
            gb1[j] += da;
            let grow = &mut gw1[j * n_in..(j + 1) * n_in];
            for (g, x) in grow.iter_mut().zip(&cache.input) {
                *g += da * x;
            }
        }
    }
    Ok((loss, grads))
}

/// Mean squared error of `V(x_t, ω_t)` against Monte-Carlo returns.
pub fn value_loss_and_grads(
    vnet: &ValueNet,
    features: &[&[f64]],
    option_onehots: &[&[f64]],
    returns: &[f64],
) -> Result<(f64, Gradients), PolicyError> {
    if features.len() != returns.len() || option_onehots.len() != returns.len() {
        return Err(PolicyError::MisalignedInput("value inputs and returns differ in length"));
    }
    let mut grads = Gradients::zeros_like(vnet);
    if returns.is_empty() {
        return Ok((0.0, grads));
    }
    let n = returns.len() as f64;
    let n_in = vnet.hidden.inputs;
    let n_hidden = vnet.hidden.outputs;
    let mut loss = 0.0;
    for ((x, o), &target) in features.iter().zip(option_onehots).zip(returns) {
        let (input, hidden, v) = vnet.forward_cached(x, o)?;
        let err = v - target;
        loss += err * err / n;
        let dv = 2.0 * err / n;
        grads.tensors[3][0] += dv;
        for j in 0..n_hidden {
            grads.tensors[2][j] += dv * hidden[j];
            let da = dv * vnet.output.weights[j] * (1.0 - hidden[j] * hidden[j]);
            grads.tensors[1][j] += da;
            let grow = &mut grads.tensors[0][j * n_in..(j + 1) * n_in];
            for (g, xi) in grow.iter_mut().zip(&input) {
                *g += da * xi;
            }
        }
    }
    Ok((loss, grads))
}

/// One Adam step on the value regression. Returns the loss before the step.
pub fn value_update(
    vnet: &mut ValueNet,
    optimizer: &mut AdamState,
    features: &[&[f64]],
    option_onehots: &[&[f64]],
    returns: &[f64],
) -> Result<f64, PolicyError> {
    let (loss, grads) = value_loss_and_grads(vnet, features, option_onehots, returns)?;
    optimizer.step(vnet, &grads)?;
    Ok(loss)
}

fn central_difference<P, F>(params: &mut P, analytic: &Gradients, fd_step: f64, mut loss: F) -> Result<f64, PolicyError>
where
    P: Parameters + Clone,
    F: FnMut(&P) -> Result<f64, PolicyError>,
{
    let mut worst: f64 = 0.0;
    let tensor_count = params.tensors().len();
    for t in 0..tensor_count {
        let len = params.tensors()[t].len();
        for i in 0..len {
            let orig = params.tensors()[t][i];
            params.tensors_mut()[t][i] = orig + fd_step;
            let up = loss(params)?;
            params.tensors_mut()[t][i] = orig - fd_step;
            let down = loss(params)?;
            params.tensors_mut()[t][i] = orig;
            let numeric = (up - down) / (2.0 * fd_step);
            let err = libm::fabs(analytic.tensors[t][i] - numeric) / f64::max(1e-8, libm::fabs(numeric));
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

/// Largest relative error between analytic policy gradients and central
/// differences, `|a − d| / max(1e-8, |d|)`, over every parameter.
pub fn grad_check(
    net: &PolicyNet,
    trajectory: &Trajectory,
    returns: &[f64],
    baselines: &[f64],
    entropy_coef: f64,
    fd_step: f64,
) -> Result<f64, PolicyError> {
    let (_, analytic) = pg_loss_and_grads_regularised(net, trajectory, returns, baselines, entropy_coef)?;
    let mut probe = net.clone();
    central_difference(&mut probe, &analytic, fd_step, |p| pg_loss(p, trajectory, returns, baselines, entropy_coef))
}

/// Same check for the value regression.
pub fn value_grad_check(
    vnet: &ValueNet,
    features: &[&[f64]],
    option_onehots: &[&[f64]],
    returns: &[f64],
    fd_step: f64,
) -> Result<f64, PolicyError> {
    let (_, analytic) = value_loss_and_grads(vnet, features, option_onehots, returns)?;
    let mut probe = vnet.clone();
    central_difference(&mut probe, &analytic, fd_step, |p| {
        value_loss_and_grads(p, features, option_onehots, returns).map(|(l, _)| l)
    })
}
