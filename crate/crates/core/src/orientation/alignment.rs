//! Rigid alignment utilities: best-fit rotation between marker sets and
//! correlation-based time synchronization of two signals.

use nalgebra::{Matrix3, Rotation3, Vector3};

use crate::error::{Error, Result};

/// Rotation `R` minimizing `sum |(m_i - m̄) - R (r_i - r̄)|²` (orthogonal
/// Procrustes with a proper-rotation constraint).
pub fn best_fit_rotation(reference: &[[f64; 3]], measured: &[[f64; 3]]) -> Result<Rotation3<f64>> {
    if reference.len() != measured.len() {
        return Err(Error::invalid(format!(
            "point sets differ in size ({} vs {})",
            reference.len(),
            measured.len()
        )));
    }
    if reference.len() < 3 {
        return Err(Error::invalid("need at least 3 point pairs"));
    }
    let centroid = |pts: &[[f64; 3]]| {
        pts.iter().fold(Vector3::zeros(), |acc, p| acc + Vector3::from(*p)) / pts.len() as f64
    };
    let rc = centroid(reference);
    let mc = centroid(measured);

    let mut h = Matrix3::zeros();
    for (r, m) in reference.iter().zip(measured) {
        h += (Vector3::from(*r) - rc) * (Vector3::from(*m) - mc).transpose();
    }

    for pts in [reference, measured] {
        let c = centroid(pts);
        let scatter = pts.iter().fold(Matrix3::zeros(), |acc: Matrix3<f64>, p| {
            let d = Vector3::from(*p) - c;
            acc + d * d.transpose()
        });
        let sv = scatter.singular_values();
        let max = sv.max();
        let rank = sv.iter().filter(|&&s| s > 1e-12 * max.max(f64::MIN_POSITIVE)).count();
        if max == 0.0 || rank < 2 {
            return Err(Error::Degenerate { rank: if max == 0.0 { 0 } else { rank } });
        }
    }

    let svd = h.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let correction = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d));
    let r = v * correction * u.transpose();
    Ok(Rotation3::from_matrix_unchecked(r))
}

/// Lag (seconds) that maximizes the Pearson correlation between `a` and `b`
/// over their overlap, searched over integer-sample shifts that keep at least
/// half of the shorter series overlapping.
///
/// A positive lag means `b` is `a` delayed: `b[n] ≈ a[n - lag·rate]`. Ties go
/// to the smallest `|lag|`, then to the positive one.
pub fn estimate_time_shift(a: &[f64], b: &[f64], sample_rate: f64) -> Result<f64> {
    Ok(estimate_shift_samples(a, b)? as f64 / sample_rate)
}

/// [`estimate_time_shift`] in whole samples.
pub fn estimate_shift_samples(a: &[f64], b: &[f64]) -> Result<i64> {
    let n = a.len().min(b.len());
    if n < 2 {
        return Err(Error::invalid("time-shift estimation needs at least 2 samples"));
    }
    for (name, s) in [("first", a), ("second", b)] {
        if s.iter().all(|&v| v == s[0]) {
            return Err(Error::UndefinedCorrelation(format!("{name} series is constant")));
        }
    }
    let max_shift = (n / 2) as i64;
    let mut best: Option<(f64, i64)> = None;
    // visit 0, +1, -1, +2, -2, ... so strict improvement implements the tie rule
    for k in std::iter::once(0).chain((1..=max_shift).flat_map(|m| [m, -m])) {
        let Some(c) = overlap_correlation(a, b, k) else {
            continue;
        };
        if best.is_none_or(|(bc, _)| c > bc) {
            best = Some((c, k));
        }
    }
    best.map(|(_, k)| k)
        .ok_or_else(|| Error::UndefinedCorrelation("no shift has a non-constant overlap".into()))
}

/// Pearson correlation of `a[n - k]` with `b[n]` over the indices where both
/// exist.
fn overlap_correlation(a: &[f64], b: &[f64], k: i64) -> Option<f64> {
    let (a0, b0) = if k >= 0 { (0, k as usize) } else { ((-k) as usize, 0) };
    if a0 >= a.len() || b0 >= b.len() {
        return None;
    }
    let len = (a.len() - a0).min(b.len() - b0);
    if len < 2 {
        return None;
    }
    let xa = &a[a0..a0 + len];
    let xb = &b[b0..b0 + len];
    let ma = xa.iter().sum::<f64>() / len as f64;
    let mb = xb.iter().sum::<f64>() / len as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in xa.iter().zip(xb) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}
