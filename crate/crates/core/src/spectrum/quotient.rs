use ndarray::Array2;

use crate::dns::state::{Parity, SpectralState, C64};
use crate::dns::transform::Transform;
use crate::error::{Error, Result};
use crate::params::DimensionlessParams;

/// `E1 / (2 E2)` for a trial pair, with
/// `E1 = int Pr_x v_x^2 + Pr_z v_z^2 + theta_x^2 + kappa_a theta_z^2` and
/// `E2 = -int v d_x int_0^z theta`, both evaluated by grid quadrature.
pub fn rayleigh_quotient(state: &SpectralState, d: &DimensionlessParams) -> Result<f64> {
    let (m_max, n_max) = (state.m_max(), state.n_max());
    let mut tr = Transform::new(m_max, n_max, true)?;
    let len = tr.len();
    let shape = (2 * m_max + 1, n_max + 1);
    let mut v_x = Array2::<C64>::zeros(shape);
    let mut v_z = Array2::<C64>::zeros(shape);
    let mut t_x = Array2::<C64>::zeros(shape);
    let mut t_z = Array2::<C64>::zeros(shape);
    let mut w_t = Array2::<C64>::zeros(shape);
    for (i, _m, k) in state.wavenumbers() {
        let ik = C64::new(0.0, k);
        for n in 0..=n_max {
            let q = n as f64 * std::f64::consts::PI;
            let (v, t) = (state.v_hat[[i, n]], state.theta_hat[[i, n]]);
            v_x[[i, n]] = ik * v;
            v_z[[i, n]] = -q * v;
            if n >= 1 {
                t_x[[i, n]] = ik * t;
                t_z[[i, n]] = q * t;
                // int_0^z sin(q z) = (1 - cos(q z)) / q
                w_t[[i, 0]] += ik * t / q;
                w_t[[i, n]] -= ik * t / q;
            }
        }
    }
    let mut a = vec![0.0; len];
    let mut b = vec![0.0; len];
    let (nx, nz) = tr.grid();
    let cell = state.alpha() / nx as f64 * 2.0 / nz as f64 * 0.5;
    let mut sq = |fa: &Array2<C64>, pa: Parity, fb: &Array2<C64>, pb: Parity| -> (f64, f64) {
        tr.synthesize_pair((fa, pa), Some((fb, pb)), &mut a, Some(&mut b));
        (
            a.iter().map(|x| x * x).sum::<f64>() * cell,
            b.iter().map(|x| x * x).sum::<f64>() * cell,
        )
    };
    let (vx2, vz2) = sq(&v_x, Parity::Cos, &v_z, Parity::Sin);
    let (tx2, tz2) = sq(&t_x, Parity::Sin, &t_z, Parity::Cos);
    let e1 = d.pr_x * vx2 + d.pr_z * vz2 + tx2 + d.kappa_a * tz2;
    tr.synthesize_pair(
        (&state.v_hat, Parity::Cos),
        Some((&w_t, Parity::Cos)),
        &mut a,
        Some(&mut b),
    );
    let e2 = -a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() * cell;
    let scale = e1.abs().max(f64::MIN_POSITIVE);
    if e2 == 0.0 || e2.abs() <= 1e-14 * scale {
        return Err(Error::Undefined("E2 vanishes for this trial pair".into()));
    }
    Ok(e1 / (2.0 * e2))
}
